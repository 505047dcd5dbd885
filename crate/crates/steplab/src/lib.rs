//! steplab: a laboratory for step-size adaptation in (1+1) evolution
//! strategies.
//!
//! The crate wires together everything needed to study how a (1+1)-ES
//! behaves under different step-size controllers at a fixed evaluation
//! budget:
//!
//! - [`problems`] — shifted continuous benchmark functions on a box domain;
//! - [`es`] — the elitist mutate/evaluate/select loop with seeded,
//!   replayable runs;
//! - [`adaptation`] — step-size controllers: constant, the one-fifth
//!   success rule, and a periodic advisor that consults a chat model;
//! - [`advisor`] — log condensation, prompt rendering, chat-completion
//!   transport with retry and rate limiting, response parsing, and
//!   transcript auditing;
//! - [`ranking`] — Glicko-2 ratings over fixed-budget tournaments;
//! - [`analysis`] — best-fitness distributions, step-size trajectories
//!   with confidence bands, and CSV/SVG report export;
//! - [`harness`] — experiment configuration, parallel execution with
//!   resume, and the `run`/`rank`/`report`/`replay` commands behind the
//!   `steplab` binary.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example single_run            # one ES run, step by step
//! cargo run --example build_suite           # seeded problem instances + manifest
//! cargo run --example render_prompt         # the advisor prompt for a small log
//! cargo run --example surrogate_advisor_run # offline advisor-driven run
//! cargo run --example scripted_advisor_run  # advisor replies replayed from a file
//! cargo run --example http_advisor          # advisor over a local mock chat server
//! cargo run --example rank_methods          # tournament + Glicko-2 table
//! cargo run --example export_report         # CSV + SVG report from fresh runs
//! cargo run --example full_experiment       # config file end to end
//! ```

pub mod adaptation;
pub mod advisor;
pub mod analysis;
pub mod error;
pub mod es;
pub mod harness;
pub mod problems;
pub mod ranking;
pub mod record;

pub use error::{Error, Result};

/// FNV-1a 64-bit hash. Used everywhere a reproducible seed is derived
/// from structured inputs (suite instances, per-run seeds), so results
/// are independent of execution order, platform, and standard-library
/// hasher changes.
pub fn stable_hash64(input: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for byte in input.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}
