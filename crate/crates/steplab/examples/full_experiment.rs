//! The whole pipeline through the harness, exactly as the CLI drives it:
//! write a config, run every cell (twice, to show resume), rank one
//! dimension, and export the report.
//!
//! ```bash
//! cargo run --example full_experiment
//! ```

use steplab::harness::{cmd_rank, cmd_report, cmd_run};

const CONFIG: &str = r#"
function_ids = [1, 5, 8]
dimensions = [2]
runs_per_cell = 5
budget = 1000
strategies = ["constant", "one-fifth", "advisor:surrogate"]
instance_seed = 1
master_seed = 1
output_dir = "out"

[advisors.surrogate]
provider = "surrogate-one-fifth"
"#;

fn main() -> steplab::Result<()> {
    let dir = std::env::temp_dir().join("steplab_full_experiment");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let config_path = dir.join("experiment.toml");
    std::fs::write(&config_path, CONFIG).expect("write config");

    let report = cmd_run(&config_path, 4)?;
    println!("run:    {} cells executed, {} skipped", report.completed, report.skipped);
    let again = cmd_run(&config_path, 4)?;
    println!("re-run: {} cells executed, {} skipped (resume)", again.completed, again.skipped);

    let records_dir = dir.join("out/records");
    let rows = cmd_rank(&records_dir, 2, 25, 1)?;
    println!("\nranking at dimension 2:");
    for r in &rows {
        println!(
            "  {:<20} rating {:>4.0}  deviation {:>5.1}  {}W/{}D/{}L",
            r.method, r.rating, r.deviation, r.wins, r.draws, r.losses
        );
    }

    let manifest = cmd_report(&records_dir, &dir.join("report"), 25, 1)?;
    println!("\nreport files:");
    for path in manifest {
        println!("  {}", path.display());
    }
    Ok(())
}
