//! End-to-end advisor-driven runs with offline providers: query cadence,
//! clamp safety, failure handling, and transcript bookkeeping.

use steplab::adaptation::StrategySpec;
use steplab::advisor::{transcripts_from_text, transcripts_to_text, AdvisorConfig, AdvisorEnv};
use steplab::es::{run, RunOptions};
use steplab::problems::ProblemInstance;

fn sphere(dimension: usize) -> ProblemInstance {
    ProblemInstance::new(1, dimension, vec![0.5; dimension], 0.0).unwrap()
}

fn write_replay(dir: &std::path::Path, responses: &[String]) -> std::path::PathBuf {
    let path = dir.join("replies.txt");
    std::fs::write(&path, responses.join("\n---\n")).unwrap();
    path
}

#[test]
fn budget_1000_period_50_queries_19_times_at_the_expected_generations() {
    let problem = sphere(5);
    let strategy = StrategySpec::periodic_advisor("surrogate", AdvisorConfig::surrogate());
    let record = run(
        &problem,
        &strategy,
        &RunOptions::new(1000, 42),
        &AdvisorEnv::new(),
    )
    .unwrap();
    assert_eq!(record.transcripts.len(), 19);
    let generations: Vec<usize> = record.transcripts.iter().map(|t| t.generation).collect();
    let expected: Vec<usize> = (1..=19).map(|k| k * 50).collect();
    assert_eq!(generations, expected);
}

#[test]
fn off_period_generations_produce_no_transcripts() {
    let problem = sphere(2);
    let strategy = StrategySpec::periodic_advisor("surrogate", AdvisorConfig::surrogate());
    // 50 evaluations = generations 1..=49: never reaches a query.
    let record = run(
        &problem,
        &strategy,
        &RunOptions::new(50, 3),
        &AdvisorEnv::new(),
    )
    .unwrap();
    assert!(record.transcripts.is_empty());
    assert!(record.sigma_trace.iter().all(|&s| s == 0.1));
}

#[test]
fn scripted_recommendations_are_adopted_at_query_generations() {
    let dir = tempfile::tempdir().unwrap();
    let replay = write_replay(
        dir.path(),
        &["Recommended step size: 0.05".to_string(), "Recommended step size: 0.2".to_string()],
    );
    let problem = sphere(2);
    let strategy = StrategySpec::periodic_advisor("replay", AdvisorConfig::scripted(&replay));
    let record = run(
        &problem,
        &strategy,
        &RunOptions::new(151, 7),
        &AdvisorEnv::new(),
    )
    .unwrap();
    // Generations 50 and 100 query; 150 queries a third time and runs dry.
    assert_eq!(record.transcripts.len(), 3);
    assert_eq!(record.transcripts[0].parsed_sigma, Some(0.05));
    assert_eq!(record.transcripts[1].parsed_sigma, Some(0.2));
    // Step size in effect: 0.1 until the g=50 update lands at g=51.
    assert!(record.sigma_trace[..=50].iter().all(|&s| s == 0.1));
    assert!(record.sigma_trace[51..=100].iter().all(|&s| s == 0.05));
    assert!(record.sigma_trace[101..].iter().all(|&s| s == 0.2));
    // The exhausted third query records the failure and keeps the value.
    let last = &record.transcripts[2];
    assert_eq!(last.parsed_sigma, None);
    assert_eq!(last.failure.as_deref(), Some("replay exhausted"));
}

#[test]
fn out_of_bounds_replies_clamp_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let replay = write_replay(dir.path(), &["Recommended step size: 7.5".to_string()]);
    let problem = sphere(2);
    let strategy = StrategySpec::periodic_advisor("replay", AdvisorConfig::scripted(&replay));
    let record = run(
        &problem,
        &strategy,
        &RunOptions::new(60, 1),
        &AdvisorEnv::new(),
    )
    .unwrap();
    let t = &record.transcripts[0];
    assert_eq!(t.parsed_sigma, Some(0.999));
    assert!(t.clamped);
    assert!(record.sigma_trace[51..].iter().all(|&s| s == 0.999));
}

#[test]
fn unparseable_replies_keep_sigma_and_record_the_failure() {
    let dir = tempfile::tempdir().unwrap();
    let replay = write_replay(dir.path(), &["I would rather not say.".to_string()]);
    let problem = sphere(2);
    let strategy = StrategySpec::periodic_advisor("replay", AdvisorConfig::scripted(&replay));
    let record = run(
        &problem,
        &strategy,
        &RunOptions::new(60, 1),
        &AdvisorEnv::new(),
    )
    .unwrap();
    let t = &record.transcripts[0];
    assert_eq!(t.parsed_sigma, None);
    assert!(t.failure.as_deref().unwrap().contains("no step-size recommendation"));
    assert!(record.sigma_trace.iter().all(|&s| s == 0.1));
}

#[test]
fn sigma_after_queries_always_lies_in_bounds() {
    let problem = sphere(3);
    let strategy = StrategySpec::periodic_advisor("surrogate", AdvisorConfig::surrogate());
    for seed in 0..5 {
        let record = run(
            &problem,
            &strategy,
            &RunOptions::new(400, seed),
            &AdvisorEnv::new(),
        )
        .unwrap();
        for t in &record.transcripts {
            // The step size in effect right after a query generation.
            let sigma_next = record.sigma_trace[t.generation + 1];
            assert!(
                (0.001..=0.999).contains(&sigma_next),
                "seed {seed} gen {}: {sigma_next}",
                t.generation
            );
        }
    }
}

#[test]
fn advisor_runs_replay_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let replay = write_replay(
        dir.path(),
        &(1..=19)
            .map(|k| format!("Recommended step size: {}", 0.1 * 0.9f64.powi(k)))
            .collect::<Vec<_>>(),
    );
    let problem = sphere(5);
    let strategy = StrategySpec::periodic_advisor("replay", AdvisorConfig::scripted(&replay));
    let opts = RunOptions::new(1000, 11);
    let env = AdvisorEnv::new();
    let a = run(&problem, &strategy, &opts, &env).unwrap();
    let b = run(&problem, &strategy, &opts, &env).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        transcripts_to_text(&a.transcripts),
        transcripts_to_text(&b.transcripts)
    );
    // The transcript log round-trips, too.
    let parsed = transcripts_from_text(&transcripts_to_text(&a.transcripts)).unwrap();
    assert_eq!(parsed, a.transcripts);
}

#[test]
fn transcript_count_matches_query_count_for_any_budget() {
    let problem = sphere(2);
    let strategy = StrategySpec::periodic_advisor("surrogate", AdvisorConfig::surrogate());
    for (budget, expected) in [(1usize, 0usize), (50, 0), (51, 1), (101, 2), (500, 9)] {
        let record = run(
            &problem,
            &strategy,
            &RunOptions::new(budget, 5),
            &AdvisorEnv::new(),
        )
        .unwrap();
        assert_eq!(
            record.transcripts.len(),
            expected,
            "budget {budget}: expected {expected} queries"
        );
    }
}
