//! Everything between the ES loop and the language model: log
//! condensation, prompt rendering, provider transport, response parsing,
//! and transcript audit records.
//!
//! Three providers are available:
//!
//! - `http-chat` — a real chat-completions endpoint, with retries,
//!   exponential backoff, and a globally rate-limited shared client;
//! - `scripted` — canned responses replayed in order from a file, for
//!   deterministic offline runs;
//! - `surrogate-one-fifth` — a deterministic stand-in that answers with
//!   what the one-fifth rule would have done since the previous query,
//!   enabling offline end-to-end tests of the whole advisor path.

mod http;
mod log;
pub mod mock;
mod parse;
mod prompt;
mod transcript;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::EvaluationRecord;

pub use http::{HttpChatClient, API_KEY_ENV};
pub use log::condense_log;
pub use parse::{parse_recommendation, Recommendation};
pub use prompt::{build_prompt, template_scaffold_len, SYSTEM_MESSAGE};
pub use transcript::{
    read_transcripts_file, transcripts_from_text, transcripts_to_text, write_transcripts_file,
};

/// Which transport backs an advisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    HttpChat,
    Scripted,
    SurrogateOneFifth,
}

fn default_char_budget() -> usize {
    8000
}

fn default_timeout_seconds() -> u64 {
    30
}

fn default_max_retries() -> u32 {
    3
}

fn default_retry_backoff_ms() -> u64 {
    250
}

/// Identifies a model endpoint and how to talk to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvisorConfig {
    pub provider: ProviderKind,
    /// Base URL for http-chat; `/chat/completions` is appended.
    #[serde(default)]
    pub endpoint_url: String,
    #[serde(default)]
    pub model_name: String,
    /// Sampling temperature; 0 maximizes reproducibility.
    #[serde(default)]
    pub temperature: f64,
    /// Truncation budget for the condensed log, in characters
    /// (roughly tokens x 4).
    #[serde(default = "default_char_budget")]
    pub char_budget: usize,
    #[serde(default = "default_timeout_seconds")]
    pub timeout_seconds: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Minimum spacing between request starts on the shared client,
    /// enforced across all concurrent runs.
    #[serde(default)]
    pub min_request_interval_ms: u64,
    #[serde(default = "default_retry_backoff_ms")]
    pub retry_initial_backoff_ms: u64,
    /// Response file for the scripted provider.
    #[serde(default)]
    pub replay_file: Option<PathBuf>,
}

impl AdvisorConfig {
    pub fn http_chat(endpoint_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        AdvisorConfig {
            provider: ProviderKind::HttpChat,
            endpoint_url: endpoint_url.into(),
            model_name: model_name.into(),
            temperature: 0.0,
            char_budget: default_char_budget(),
            timeout_seconds: default_timeout_seconds(),
            max_retries: default_max_retries(),
            min_request_interval_ms: 0,
            retry_initial_backoff_ms: default_retry_backoff_ms(),
            replay_file: None,
        }
    }

    pub fn scripted(replay_file: impl Into<PathBuf>) -> Self {
        AdvisorConfig {
            replay_file: Some(replay_file.into()),
            provider: ProviderKind::Scripted,
            ..AdvisorConfig::surrogate()
        }
    }

    pub fn surrogate() -> Self {
        AdvisorConfig {
            provider: ProviderKind::SurrogateOneFifth,
            endpoint_url: String::new(),
            model_name: String::new(),
            temperature: 0.0,
            char_budget: default_char_budget(),
            timeout_seconds: default_timeout_seconds(),
            max_retries: default_max_retries(),
            min_request_interval_ms: 0,
            retry_initial_backoff_ms: default_retry_backoff_ms(),
            replay_file: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.char_budget <= template_scaffold_len() {
            return Err(Error::Config(format!(
                "char_budget must exceed the fixed template scaffolding ({} chars)",
                template_scaffold_len()
            )));
        }
        match self.provider {
            ProviderKind::HttpChat => {
                if self.endpoint_url.is_empty() {
                    return Err(Error::Config("http-chat advisor needs endpoint_url".into()));
                }
                if self.model_name.is_empty() {
                    return Err(Error::Config("http-chat advisor needs model_name".into()));
                }
                if self.temperature < 0.0 {
                    return Err(Error::Config("temperature must be >= 0".into()));
                }
            }
            ProviderKind::Scripted => {
                if self.replay_file.is_none() {
                    return Err(Error::Config("scripted advisor needs replay_file".into()));
                }
            }
            ProviderKind::SurrogateOneFifth => {}
        }
        Ok(())
    }
}

/// One advisor exchange, as stored in run records and transcript logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptTranscript {
    pub generation: usize,
    pub rendered_system: String,
    pub rendered_user: String,
    pub raw_response: String,
    /// Recommendation after clamping; `None` when nothing parsed.
    pub parsed_sigma: Option<f64>,
    pub clamped: bool,
    pub failure: Option<String>,
    pub latency_ms: u64,
}

/// What a provider receives for one query.
pub struct AdvisorRequest<'a> {
    pub system_message: &'a str,
    pub user_message: &'a str,
    pub current_sigma: f64,
    pub bounds: (f64, f64),
    /// Offspring trials since the previous query (the whole history on
    /// the first query). Only the surrogate uses these.
    pub records_since_last_query: &'a [EvaluationRecord],
}

/// A provider's answer. Offline providers report zero latency so replays
/// are byte-stable.
#[derive(Clone, Debug)]
pub struct ProviderResponse {
    pub text: String,
    pub latency_ms: u64,
}

/// One advisor backend, owned by a single run.
pub trait AdvisorProvider: Send {
    fn respond(&mut self, request: &AdvisorRequest<'_>) -> Result<ProviderResponse>;
}

/// Replays canned responses in file order; errors once exhausted.
pub struct ScriptedProvider {
    responses: Arc<Vec<String>>,
    cursor: usize,
}

impl ScriptedProvider {
    pub fn new(responses: Arc<Vec<String>>) -> Self {
        ScriptedProvider {
            responses,
            cursor: 0,
        }
    }
}

impl AdvisorProvider for ScriptedProvider {
    fn respond(&mut self, _request: &AdvisorRequest<'_>) -> Result<ProviderResponse> {
        let response = self
            .responses
            .get(self.cursor)
            .ok_or(Error::ReplayExhausted)?;
        self.cursor += 1;
        Ok(ProviderResponse {
            text: response.clone(),
            latency_ms: 0,
        })
    }
}

/// Splits a replay file into responses. Responses are separated by a
/// line containing only `---`; blank responses are dropped.
pub fn parse_replay_text(text: &str) -> Vec<String> {
    let mut responses = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut flush = |current: &mut Vec<&str>| {
        let block = current.join("\n");
        let block = block.trim_matches('\n');
        if !block.trim().is_empty() {
            responses.push(block.to_string());
        }
        current.clear();
    };
    for line in text.lines() {
        if line.trim_end() == "---" {
            flush(&mut current);
        } else {
            current.push(line);
        }
    }
    flush(&mut current);
    responses
}

/// Deterministic stand-in: replies with the step size the one-fifth rule
/// would have reached over the trials since the previous query, clamped
/// to the advisor bounds.
pub struct SurrogateOneFifthProvider;

impl AdvisorProvider for SurrogateOneFifthProvider {
    fn respond(&mut self, request: &AdvisorRequest<'_>) -> Result<ProviderResponse> {
        // The per-trial updates are a pure product of factors, so fold
        // them into one power: sigma * 1.5^(successes - failures/4).
        // Balanced periods (one success per four failures) then cancel
        // exactly, ties contribute nothing.
        let mut successes: i64 = 0;
        let mut failures: i64 = 0;
        for rec in request.records_since_last_query {
            if rec.offspring_f < rec.parent_f {
                successes += 1;
            } else if rec.offspring_f > rec.parent_f {
                failures += 1;
            }
        }
        let exponent = successes as f64 - failures as f64 / 4.0;
        let sigma = request.current_sigma * 1.5f64.powf(exponent);
        let (low, high) = request.bounds;
        let sigma = sigma.clamp(low, high);
        Ok(ProviderResponse {
            text: format!("Recommended step size: {sigma}"),
            latency_ms: 0,
        })
    }
}

struct HttpChatProvider {
    client: Arc<HttpChatClient>,
    config: AdvisorConfig,
}

impl AdvisorProvider for HttpChatProvider {
    fn respond(&mut self, request: &AdvisorRequest<'_>) -> Result<ProviderResponse> {
        let (text, latency_ms) =
            self.client
                .chat(&self.config, request.system_message, request.user_message)?;
        Ok(ProviderResponse { text, latency_ms })
    }
}

/// Shared provider infrastructure: one rate-limited HTTP client per
/// endpoint and a cache of loaded replay files. Each run gets its own
/// provider instance (scripted cursors are per run), but http-chat
/// providers share the client, so the request interval is honored
/// globally.
#[derive(Default)]
pub struct AdvisorEnv {
    http_clients: Mutex<HashMap<String, Arc<HttpChatClient>>>,
    replay_files: Mutex<HashMap<PathBuf, Arc<Vec<String>>>>,
}

impl AdvisorEnv {
    pub fn new() -> Self {
        AdvisorEnv::default()
    }

    pub fn make_provider(&self, config: &AdvisorConfig) -> Result<Box<dyn AdvisorProvider>> {
        config.validate()?;
        match config.provider {
            ProviderKind::SurrogateOneFifth => Ok(Box::new(SurrogateOneFifthProvider)),
            ProviderKind::Scripted => {
                let path = config.replay_file.as_ref().expect("validated");
                Ok(Box::new(ScriptedProvider::new(self.load_replay(path)?)))
            }
            ProviderKind::HttpChat => {
                let mut clients = self.http_clients.lock().unwrap();
                let client = clients
                    .entry(config.endpoint_url.clone())
                    .or_insert_with(|| {
                        Arc::new(HttpChatClient::new(
                            config.timeout_seconds,
                            config.min_request_interval_ms,
                        ))
                    })
                    .clone();
                Ok(Box::new(HttpChatProvider {
                    client,
                    config: config.clone(),
                }))
            }
        }
    }

    fn load_replay(&self, path: &Path) -> Result<Arc<Vec<String>>> {
        let mut cache = self.replay_files.lock().unwrap();
        if let Some(found) = cache.get(path) {
            return Ok(found.clone());
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let responses = Arc::new(parse_replay_text(&text));
        cache.insert(path.to_path_buf(), responses.clone());
        Ok(responses)
    }
}
