//! Shows exactly what the advisor is asked: condense a small run log and
//! render the system/user message pair.
//!
//! ```bash
//! cargo run --example render_prompt
//! ```

use steplab::advisor::{build_prompt, condense_log};
use steplab::record::{EvaluationRecord, SigmaChange};

fn main() {
    let history: Vec<EvaluationRecord> = [12.25, 9.5, 10.0, 7.75]
        .iter()
        .enumerate()
        .map(|(i, &offspring_f)| EvaluationRecord {
            generation: i + 1,
            sigma_used: 0.1,
            parent_f: 12.25f64.min(offspring_f + 1.0),
            offspring_f,
            accepted: i % 2 == 1,
        })
        .collect();
    let changes = [SigmaChange {
        generation: 2,
        old: 0.1,
        new: 0.05,
    }];

    let log = condense_log(&history, &changes, 8000);
    let (system, user) = build_prompt(&log, 0.05);

    println!("----- system -----");
    println!("{system}");
    println!("----- user -----");
    println!("{user}");

    // A tight character budget drops oldest lines and marks it.
    let truncated = condense_log(&history, &changes, 40);
    println!("----- same log under a 40-character budget -----");
    println!("{truncated}");
}
