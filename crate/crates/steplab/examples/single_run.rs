//! One (1+1)-ES run, stepped manually: sphere in five dimensions, the
//! one-fifth success rule, a budget of 1000 evaluations.
//!
//! ```bash
//! cargo run --example single_run
//! ```

use steplab::adaptation::StrategySpec;
use steplab::advisor::AdvisorEnv;
use steplab::es::{EsRun, RunOptions, StepStatus};
use steplab::problems::make_suite;

fn main() -> steplab::Result<()> {
    let instance = &make_suite(&[1], &[5], 7)?[0];
    println!(
        "problem: f{} ({}) d={} f_opt={:.4}",
        instance.id, instance.name, instance.dimension, instance.f_opt
    );

    let strategy = StrategySpec::one_fifth();
    let mut es = EsRun::new(instance, &strategy, &RunOptions::new(1000, 42), &AdvisorEnv::new())?;
    println!("initial: f = {:.6}, sigma = {}", es.state().current_f, es.state().step_size);

    while es.step()? == StepStatus::Stepped {
        let state = es.state();
        if state.generation % 100 == 0 {
            println!(
                "gen {:>4}: best-above-target = {:.3e}  sigma = {:.3e}",
                state.generation,
                state.current_f - instance.f_opt,
                state.step_size
            );
        }
    }

    let record = es.into_record();
    println!(
        "final:    best-above-target = {:.3e} after {} evaluations",
        record.final_best() - instance.f_opt,
        record.best_so_far.len()
    );
    Ok(())
}
