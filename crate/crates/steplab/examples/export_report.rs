//! Aggregates fresh runs into the full report: boxplot and trajectory
//! CSVs plus SVG renderings, written to `steplab_report/` in the current
//! directory.
//!
//! ```bash
//! cargo run --example export_report
//! ```

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steplab::adaptation::StrategySpec;
use steplab::advisor::AdvisorEnv;
use steplab::analysis::{export_report, ReportData};
use steplab::es::{run, RunOptions};
use steplab::harness::derive_run_seed;
use steplab::problems::make_suite;
use steplab::ranking::{build_tournament, group_runs, rank, UpdateSchedule, DEFAULT_TAU};

fn main() -> steplab::Result<()> {
    let budget = 1000;
    let suite = make_suite(&[1, 3, 8], &[2, 5], 2)?;
    let strategies = [StrategySpec::constant(), StrategySpec::one_fifth()];
    let env = AdvisorEnv::new();

    let mut records = Vec::new();
    for instance in &suite {
        for strategy in &strategies {
            for index in 0..10 {
                let seed =
                    derive_run_seed(3, instance.id, instance.dimension, &strategy.name(), index);
                records.push(run(instance, strategy, &RunOptions::new(budget, seed), &env)?);
            }
        }
    }

    let methods: Vec<String> = strategies.iter().map(|s| s.name()).collect();
    let mut rankings = Vec::new();
    for dimension in [2usize, 5] {
        let groups = group_runs(&records, dimension);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let matches = build_tournament(&groups, dimension, 25, budget, &mut rng)?;
        rankings.push((dimension, rank(&matches, &methods, UpdateSchedule::PerRound, DEFAULT_TAU)?));
    }

    let data = ReportData::from_runs(&records, rankings)?;
    let manifest = export_report(&data, Path::new("steplab_report"))?;
    for path in manifest {
        println!("wrote {}", path.display());
    }
    Ok(())
}
