//! Extracts a step-size recommendation from raw model output.
//!
//! Chatty models restate the requested format, hedge, or bold their
//! answer, so parsing is deliberately forgiving: the last occurrence of
//! `recommended step size` followed by a number wins; failing that, the
//! last number anywhere in the text; failing that, the caller's fallback.
//! Parsed values are clamped into the given bounds. Total function: no
//! input can make it fail.

use std::sync::LazyLock;

use regex::Regex;

const NUMBER_PATTERN: &str = r"[-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?";

static RECOMMENDATION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r#"(?i)recommended\s+step[\s-]*size\s*(?:is|of)?\s*[:=\-]?\s*[`'"*_\s]*({NUMBER_PATTERN})"#
    ))
    .expect("valid recommendation regex")
});

static ANY_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(NUMBER_PATTERN).expect("valid number regex"));

/// Outcome of parsing one response.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Recommendation {
    /// The step size to adopt; already clamped when `parsed`.
    pub sigma: f64,
    /// True when clamping changed the parsed value.
    pub clamped: bool,
    /// False when no number was found and `sigma` is the fallback.
    pub parsed: bool,
}

/// Parses `raw_response`, clamping into `[bounds.0, bounds.1]` and
/// falling back to `fallback_sigma` when nothing parses.
pub fn parse_recommendation(
    raw_response: &str,
    bounds: (f64, f64),
    fallback_sigma: f64,
) -> Recommendation {
    let (low, high) = bounds;
    let candidate = RECOMMENDATION
        .captures_iter(raw_response)
        .last()
        .map(|c| c[1].to_string())
        .or_else(|| {
            ANY_NUMBER
                .find_iter(raw_response)
                .last()
                .map(|m| m.as_str().to_string())
        });
    match candidate.and_then(|s| s.parse::<f64>().ok()) {
        Some(value) => {
            let clamped_value = value.clamp(low, high);
            Recommendation {
                sigma: clamped_value,
                clamped: clamped_value != value,
                parsed: true,
            }
        }
        None => Recommendation {
            sigma: fallback_sigma,
            clamped: false,
            parsed: false,
        },
    }
}
