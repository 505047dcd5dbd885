//! An advisor-driven run that needs no network: the surrogate provider
//! answers each query with what the one-fifth rule would have done since
//! the previous one.
//!
//! ```bash
//! cargo run --example surrogate_advisor_run
//! ```

use steplab::adaptation::StrategySpec;
use steplab::advisor::{AdvisorConfig, AdvisorEnv};
use steplab::es::{run, RunOptions};
use steplab::problems::make_suite;

fn main() -> steplab::Result<()> {
    let instance = &make_suite(&[3], &[5], 3)?[0];
    let strategy = StrategySpec::periodic_advisor("surrogate", AdvisorConfig::surrogate());
    let record = run(instance, &strategy, &RunOptions::new(1000, 9), &AdvisorEnv::new())?;

    println!(
        "{} advisor queries on f{} d{} (budget {}):",
        record.transcripts.len(),
        record.function_id,
        record.dimension,
        record.budget
    );
    for t in &record.transcripts {
        println!(
            "  generation {:>3}: sigma {} -> {}",
            t.generation,
            record.sigma_trace[t.generation],
            t.parsed_sigma.expect("surrogate always parses"),
        );
    }
    println!(
        "final best-above-target: {:.3e}",
        record.final_best() - instance.f_opt
    );
    Ok(())
}
