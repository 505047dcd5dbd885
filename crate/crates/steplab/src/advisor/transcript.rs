//! Human-readable transcript log: one advisor exchange per block, for
//! audit. The format is line-oriented with sentinel markers so it can be
//! parsed back for replay:
//!
//! ```text
//! ### exchange 1
//! generation: 50
//! latency_ms: 0
//! parsed_sigma: 0.05
//! clamped: false
//! failure: none
//! ::: system
//! ...
//! ::: user
//! ...
//! ::: response
//! ...
//! ### end exchange 1
//! ```

use crate::advisor::PromptTranscript;
use crate::error::{Error, Result};

/// Serializes transcripts to the block text format.
pub fn transcripts_to_text(transcripts: &[PromptTranscript]) -> String {
    let mut out = String::new();
    for (i, t) in transcripts.iter().enumerate() {
        let n = i + 1;
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("### exchange {n}\n"));
        out.push_str(&format!("generation: {}\n", t.generation));
        out.push_str(&format!("latency_ms: {}\n", t.latency_ms));
        match t.parsed_sigma {
            Some(s) => out.push_str(&format!("parsed_sigma: {s}\n")),
            None => out.push_str("parsed_sigma: none\n"),
        }
        out.push_str(&format!("clamped: {}\n", t.clamped));
        match &t.failure {
            Some(f) => out.push_str(&format!("failure: {}\n", f.replace('\n', " "))),
            None => out.push_str("failure: none\n"),
        }
        out.push_str("::: system\n");
        out.push_str(&t.rendered_system);
        out.push_str("\n::: user\n");
        out.push_str(&t.rendered_user);
        out.push_str("\n::: response\n");
        out.push_str(&t.raw_response);
        out.push_str(&format!("\n### end exchange {n}\n"));
    }
    out
}

/// Parses the block text format back into transcripts. Errors carry the
/// 1-based line number of the offending line.
pub fn transcripts_from_text(text: &str) -> Result<Vec<PromptTranscript>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut transcripts = Vec::new();
    let mut i = 0;
    let err = |line: usize, message: &str| Error::ParseTranscript {
        line: line + 1,
        message: message.to_string(),
    };
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let n = transcripts.len() + 1;
        let open = format!("### exchange {n}");
        if lines[i] != open {
            return Err(err(i, &format!("expected '{open}'")));
        }
        i += 1;
        let field = |prefix: &str, idx: &mut usize| -> Result<String> {
            let line = lines
                .get(*idx)
                .ok_or_else(|| err(*idx, &format!("missing '{prefix}' line")))?;
            let value = line
                .strip_prefix(prefix)
                .ok_or_else(|| err(*idx, &format!("expected line starting with '{prefix}'")))?;
            *idx += 1;
            Ok(value.to_string())
        };
        let generation: usize = field("generation: ", &mut i)?
            .parse()
            .map_err(|_| err(i - 1, "invalid generation"))?;
        let latency_ms: u64 = field("latency_ms: ", &mut i)?
            .parse()
            .map_err(|_| err(i - 1, "invalid latency_ms"))?;
        let parsed_sigma = match field("parsed_sigma: ", &mut i)?.as_str() {
            "none" => None,
            s => Some(s.parse::<f64>().map_err(|_| err(i - 1, "invalid parsed_sigma"))?),
        };
        let clamped: bool = field("clamped: ", &mut i)?
            .parse()
            .map_err(|_| err(i - 1, "invalid clamped flag"))?;
        let failure = match field("failure: ", &mut i)?.as_str() {
            "none" => None,
            s => Some(s.to_string()),
        };

        let section = |marker: &str, terminators: &[&str], idx: &mut usize| -> Result<String> {
            let line = lines
                .get(*idx)
                .ok_or_else(|| err(*idx, &format!("missing '{marker}'")))?;
            if *line != marker {
                return Err(err(*idx, &format!("expected '{marker}'")));
            }
            *idx += 1;
            let start = *idx;
            while *idx < lines.len() && !terminators.contains(&lines[*idx]) {
                *idx += 1;
            }
            if *idx >= lines.len() {
                return Err(err(*idx, "unterminated section"));
            }
            Ok(lines[start..*idx].join("\n"))
        };
        let close = format!("### end exchange {n}");
        let rendered_system = section("::: system", &["::: user"], &mut i)?;
        let rendered_user = section("::: user", &["::: response"], &mut i)?;
        let raw_response = section("::: response", &[close.as_str()], &mut i)?;
        // consume the close line
        i += 1;
        transcripts.push(PromptTranscript {
            generation,
            rendered_system,
            rendered_user,
            raw_response,
            parsed_sigma,
            clamped,
            failure,
            latency_ms,
        });
    }
    Ok(transcripts)
}

/// Writes transcripts to `path` (atomically, via a temp file).
pub fn write_transcripts_file(transcripts: &[PromptTranscript], path: &std::path::Path) -> Result<()> {
    let tmp = path.with_extension("txt.tmp");
    std::fs::write(&tmp, transcripts_to_text(transcripts)).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a transcript file.
pub fn read_transcripts_file(path: &std::path::Path) -> Result<Vec<PromptTranscript>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    transcripts_from_text(&text)
}
