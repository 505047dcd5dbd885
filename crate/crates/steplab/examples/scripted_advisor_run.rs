//! Replays canned advisor responses from a file, including what happens
//! when the script runs out: the failure lands in the transcript and the
//! run carries on with its current step size.
//!
//! ```bash
//! cargo run --example scripted_advisor_run
//! ```

use steplab::adaptation::StrategySpec;
use steplab::advisor::{transcripts_to_text, AdvisorConfig, AdvisorEnv};
use steplab::es::{run, RunOptions};
use steplab::problems::make_suite;

fn main() -> steplab::Result<()> {
    let dir = std::env::temp_dir().join("steplab_scripted_example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let replay = dir.join("replies.txt");
    std::fs::write(
        &replay,
        "Reasoning: fitness is still falling fast, stay coarse.\n\
         Recommended step size: 0.08\n\
         ---\n\
         Reasoning: progress is slowing, tighten the search.\n\
         Recommended step size: 0.02\n",
    )
    .expect("write replay file");

    let instance = &make_suite(&[1], &[2], 11)?[0];
    let strategy = StrategySpec::periodic_advisor("replay", AdvisorConfig::scripted(&replay));
    // Three query generations (50, 100, 150) but only two scripted
    // replies: the third query fails soft.
    let record = run(instance, &strategy, &RunOptions::new(151, 2), &AdvisorEnv::new())?;

    print!("{}", transcripts_to_text(&record.transcripts));
    Ok(())
}
