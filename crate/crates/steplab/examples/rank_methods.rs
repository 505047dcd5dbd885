//! Runs a small method comparison and prints the Glicko-2 table:
//! constant vs one-fifth vs the surrogate advisor on two functions.
//!
//! ```bash
//! cargo run --example rank_methods
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steplab::adaptation::StrategySpec;
use steplab::advisor::{AdvisorConfig, AdvisorEnv};
use steplab::es::{run, RunOptions};
use steplab::harness::derive_run_seed;
use steplab::problems::make_suite;
use steplab::ranking::{build_tournament, group_runs, rank, UpdateSchedule, DEFAULT_TAU};

fn main() -> steplab::Result<()> {
    let budget = 1000;
    let runs_per_cell = 5;
    let suite = make_suite(&[1, 8], &[2], 4)?;
    let strategies = [
        StrategySpec::constant(),
        StrategySpec::one_fifth(),
        StrategySpec::periodic_advisor("surrogate", AdvisorConfig::surrogate()),
    ];
    let env = AdvisorEnv::new();

    let mut records = Vec::new();
    for instance in &suite {
        for strategy in &strategies {
            for index in 0..runs_per_cell {
                let seed =
                    derive_run_seed(1, instance.id, instance.dimension, &strategy.name(), index);
                records.push(run(instance, strategy, &RunOptions::new(budget, seed), &env)?);
            }
        }
    }

    let groups = group_runs(&records, 2);
    let methods: Vec<String> = groups.keys().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let matches = build_tournament(&groups, 2, 25, budget, &mut rng)?;
    let rows = rank(&matches, &methods, UpdateSchedule::PerRound, DEFAULT_TAU)?;

    println!("{} matches over {} rounds, dimension 2:", matches.len(), 25);
    println!(
        "{:<20} {:>7} {:>10} {:>11} {:>6} {:>5} {:>5} {:>5}",
        "method", "rating", "deviation", "volatility", "games", "win", "draw", "loss"
    );
    for r in rows {
        println!(
            "{:<20} {:>7.0} {:>10.1} {:>11.4} {:>6} {:>5} {:>5} {:>5}",
            r.method, r.rating, r.deviation, r.volatility, r.games, r.wins, r.draws, r.losses
        );
    }
    Ok(())
}
