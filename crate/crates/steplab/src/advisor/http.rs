//! Chat-completion transport.
//!
//! One client per endpoint, shared by every run that targets it. The
//! client holds a lock across each request so outbound traffic is
//! strictly serialized, and enforces a minimum interval between request
//! starts regardless of how many runs are querying concurrently.
//! Transport failures, 429s, and 5xx responses are retried with
//! exponential backoff up to `max_retries`.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::advisor::AdvisorConfig;
use crate::error::{Error, Result};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "ADVISOR_API_KEY";

const MAX_BACKOFF_MS: u64 = 10_000;

pub struct HttpChatClient {
    agent: ureq::Agent,
    min_interval: Duration,
    last_request_start: Mutex<Option<Instant>>,
}

enum SendError {
    Retryable(String),
    Fatal(String),
}

impl HttpChatClient {
    pub fn new(timeout_seconds: u64, min_request_interval_ms: u64) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(timeout_seconds)))
            .http_status_as_error(false)
            .build();
        HttpChatClient {
            agent: ureq::Agent::new_with_config(config),
            min_interval: Duration::from_millis(min_request_interval_ms),
            last_request_start: Mutex::new(None),
        }
    }

    /// Sends one chat-completion request and returns the first choice's
    /// message content plus the total latency (including retries).
    pub fn chat(&self, config: &AdvisorConfig, system: &str, user: &str) -> Result<(String, u64)> {
        let api_key = std::env::var(API_KEY_ENV).map_err(|_| {
            Error::Config(format!(
                "environment variable {API_KEY_ENV} must be set for http-chat advisors"
            ))
        })?;
        let url = format!(
            "{}/chat/completions",
            config.endpoint_url.trim_end_matches('/')
        );
        let body = serde_json::json!({
            "model": config.model_name,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": config.temperature,
        });
        let started = Instant::now();
        let mut attempt: u32 = 0;
        loop {
            match self.send_once(&url, &api_key, &body) {
                Ok(content) => {
                    return Ok((content, started.elapsed().as_millis() as u64));
                }
                Err(SendError::Fatal(message)) => {
                    return Err(Error::AdvisorTransport(message));
                }
                Err(SendError::Retryable(message)) => {
                    if attempt >= config.max_retries {
                        return Err(Error::AdvisorTransport(format!(
                            "{message} (gave up after {attempt} retries)"
                        )));
                    }
                    let backoff = config
                        .retry_initial_backoff_ms
                        .saturating_mul(1u64 << attempt.min(10))
                        .min(MAX_BACKOFF_MS);
                    std::thread::sleep(Duration::from_millis(backoff));
                    attempt += 1;
                }
            }
        }
    }

    fn send_once(
        &self,
        url: &str,
        api_key: &str,
        body: &serde_json::Value,
    ) -> std::result::Result<String, SendError> {
        // Held across the whole exchange: requests never overlap and
        // consecutive starts are at least `min_interval` apart.
        let mut last = self
            .last_request_start
            .lock()
            .unwrap_or_else(|poison| poison.into_inner());
        if let Some(previous) = *last {
            let since = previous.elapsed();
            if since < self.min_interval {
                std::thread::sleep(self.min_interval - since);
            }
        }
        *last = Some(Instant::now());

        let response = self
            .agent
            .post(url)
            .header("Authorization", &format!("Bearer {api_key}"))
            .send_json(body);
        let mut response = match response {
            Ok(r) => r,
            Err(e @ (ureq::Error::BadUri(_) | ureq::Error::Http(_))) => {
                return Err(SendError::Fatal(format!("request error: {e}")));
            }
            Err(e) => return Err(SendError::Retryable(format!("transport error: {e}"))),
        };
        let status = response.status().as_u16();
        if status == 429 || (500..600).contains(&status) {
            return Err(SendError::Retryable(format!("server returned {status}")));
        }
        if !(200..300).contains(&status) {
            let detail = response
                .body_mut()
                .read_to_string()
                .unwrap_or_default();
            let snippet: String = detail.chars().take(200).collect();
            return Err(SendError::Fatal(format!("server returned {status}: {snippet}")));
        }
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| SendError::Fatal(format!("malformed response body: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                SendError::Fatal("response missing choices[0].message.content".into())
            })
    }
}
