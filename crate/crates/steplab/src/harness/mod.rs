//! Experiment orchestration: the `run`, `rank`, `report`, and `replay`
//! commands behind the CLI.
//!
//! Runs execute in a worker pool. Per-run seeds are derived by a stable
//! hash of (master seed, function, dimension, strategy, run index), so
//! results are identical whatever the worker count or execution order.
//! Completed record files are skipped on re-execution, which makes an
//! interrupted experiment resumable by simply running it again.

mod config;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adaptation::StrategySpec;
use crate::advisor::{
    read_transcripts_file, write_transcripts_file, AdvisorEnv, API_KEY_ENV,
};
use crate::analysis::{export_report, ReportData};
use crate::error::{Error, Result};
use crate::es::{run, RunOptions};
use crate::problems::{make_suite, write_suite_manifest, ProblemInstance};
use crate::ranking::{build_tournament, group_runs, rank, write_ranking_csv, RankRow, UpdateSchedule, DEFAULT_TAU};
use crate::record::RunRecord;
use crate::stable_hash64;

pub use config::ExperimentConfig;

/// Derives the seed for one run. Stable across platforms and
/// independent of execution order: `fnv1a64("run/<master>/<function>/
/// <dimension>/<strategy>/<index>")`.
pub fn derive_run_seed(
    master_seed: u64,
    function_id: u32,
    dimension: usize,
    strategy_name: &str,
    run_index: usize,
) -> u64 {
    stable_hash64(&format!(
        "run/{master_seed}/{function_id}/{dimension}/{strategy_name}/{run_index}"
    ))
}

/// File stem for one cell's outputs.
fn cell_stem(instance: &ProblemInstance, strategy_name: &str, run_index: usize) -> String {
    let sanitized: String = strategy_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect();
    format!(
        "f{}_d{}_{}_run{}",
        instance.id, instance.dimension, sanitized, run_index
    )
}

/// Outcome summary of `cmd_run`.
#[derive(Debug, Default)]
pub struct RunReport {
    pub completed: usize,
    pub skipped: usize,
    /// (cell name, error message) for every failed cell.
    pub failed: Vec<(String, String)>,
}

struct Cell<'a> {
    instance: &'a ProblemInstance,
    strategy: &'a StrategySpec,
    strategy_name: String,
    run_index: usize,
    seed: u64,
    record_path: PathBuf,
    transcript_path: Option<PathBuf>,
}

/// Executes every (function x dimension x strategy x run) cell of the
/// experiment, persisting records and transcripts under the configured
/// output directory. Cells whose record files are already complete are
/// skipped, so interrupted experiments resume where they left off.
pub fn cmd_run(config_path: &Path, jobs: usize) -> Result<RunReport> {
    let config = ExperimentConfig::from_path(config_path)?;
    let strategies = config.resolve_strategies()?;
    if config.uses_http_chat()? && std::env::var(API_KEY_ENV).is_err() {
        return Err(Error::Config(format!(
            "an http-chat advisor is configured but {API_KEY_ENV} is not set"
        )));
    }
    let suite = make_suite(&config.function_ids, &config.dimensions, config.instance_seed)?;

    let records_dir = config.output_dir.join("records");
    let transcripts_dir = config.output_dir.join("transcripts");
    std::fs::create_dir_all(&records_dir).map_err(|e| Error::io(&records_dir, e))?;
    let has_advisor = strategies
        .iter()
        .any(|s| matches!(s, StrategySpec::PeriodicAdvisor { .. }));
    if has_advisor {
        std::fs::create_dir_all(&transcripts_dir).map_err(|e| Error::io(&transcripts_dir, e))?;
    }
    let manifest_path = config.output_dir.join("suite.csv");
    let mut manifest = Vec::new();
    write_suite_manifest(&suite, config.instance_seed, &mut manifest)
        .map_err(|e| Error::io(&manifest_path, e))?;
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;

    let mut cells = Vec::new();
    for instance in &suite {
        for strategy in &strategies {
            let strategy_name = strategy.name();
            for run_index in 0..config.runs_per_cell {
                let stem = cell_stem(instance, &strategy_name, run_index);
                let transcript_path = match strategy {
                    StrategySpec::PeriodicAdvisor { .. } => {
                        Some(transcripts_dir.join(format!("{stem}_transcripts.txt")))
                    }
                    _ => None,
                };
                cells.push(Cell {
                    instance,
                    strategy,
                    strategy_name: strategy_name.clone(),
                    run_index,
                    seed: derive_run_seed(
                        config.master_seed,
                        instance.id,
                        instance.dimension,
                        &strategy_name,
                        run_index,
                    ),
                    record_path: records_dir.join(format!("{stem}.csv")),
                    transcript_path,
                });
            }
        }
    }

    let env = AdvisorEnv::new();
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<RunReport> = Mutex::new(RunReport::default());
    let jobs = jobs.max(1);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = cells.get(index) else { break };
                match execute_cell(cell, &config, &env) {
                    Ok(true) => outcomes.lock().unwrap().completed += 1,
                    Ok(false) => outcomes.lock().unwrap().skipped += 1,
                    Err(e) => outcomes
                        .lock()
                        .unwrap()
                        .failed
                        .push((cell_stem(cell.instance, &cell.strategy_name, cell.run_index), e.to_string())),
                }
            });
        }
    });
    Ok(outcomes.into_inner().unwrap())
}

/// Returns Ok(true) when the cell ran, Ok(false) when it was already
/// complete on disk.
fn execute_cell(cell: &Cell<'_>, config: &ExperimentConfig, env: &AdvisorEnv) -> Result<bool> {
    if record_is_complete(cell, config) {
        return Ok(false);
    }
    let opts = RunOptions {
        budget: config.budget,
        seed: cell.seed,
        mutation: config.mutation_mode,
    };
    let record = run(cell.instance, cell.strategy, &opts, env)?;
    // Transcripts first: the record file is the completion marker.
    if let Some(path) = &cell.transcript_path {
        write_transcripts_file(&record.transcripts, path)?;
    }
    record.write_to_file(&cell.record_path)?;
    Ok(true)
}

fn record_is_complete(cell: &Cell<'_>, config: &ExperimentConfig) -> bool {
    if !cell.record_path.exists() {
        return false;
    }
    match RunRecord::read_from_file(&cell.record_path) {
        Ok(existing) => {
            existing.seed == cell.seed
                && existing.strategy == cell.strategy_name
                && existing.budget == config.budget
                && existing.mutation == config.mutation_mode
                && existing.best_so_far.len() == existing.budget
        }
        Err(_) => false,
    }
}

/// Loads every run record under `dir` (files with the record header).
pub fn load_records_dir(dir: &Path) -> Result<Vec<RunRecord>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if !text.starts_with("# steplab-run") {
            continue;
        }
        records.push(RunRecord::from_text(&text, &path)?);
    }
    Ok(records)
}

/// Builds and writes the ranking table for one dimension from persisted
/// records; returns the rows (rating-descending).
pub fn cmd_rank(records_dir: &Path, dimension: usize, rounds: usize, seed: u64) -> Result<Vec<RankRow>> {
    let records = load_records_dir(records_dir)?;
    let at_dim: Vec<RunRecord> = records
        .into_iter()
        .filter(|r| r.dimension == dimension)
        .collect();
    if at_dim.is_empty() {
        return Err(Error::Config(format!(
            "no run records for dimension {dimension} under {} (expected files like f1_d{dimension}_constant_run0.csv)",
            records_dir.display()
        )));
    }
    let budget = at_dim[0].budget;
    if let Some(odd) = at_dim.iter().find(|r| r.budget != budget) {
        return Err(Error::Config(format!(
            "records mix budgets {budget} and {} (strategy {}, function {})",
            odd.budget, odd.strategy, odd.function_id
        )));
    }
    let groups = group_runs(&at_dim, dimension);
    let methods: Vec<String> = groups.keys().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matches = build_tournament(&groups, dimension, rounds, budget, &mut rng)?;
    let rows = rank(&matches, &methods, UpdateSchedule::PerRound, DEFAULT_TAU)?;
    let path = records_dir.join(format!("ranking_{dimension}.csv"));
    let mut buf = Vec::new();
    write_ranking_csv(&rows, &mut buf).map_err(|e| Error::io(&path, e))?;
    std::fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// Aggregates all records into the report (CSVs and SVGs) under
/// `out_dir`. Rankings are computed per dimension where every
/// (method, function) cell has runs; incomplete dimensions are skipped
/// with a warning on stderr.
pub fn cmd_report(records_dir: &Path, out_dir: &Path, rounds: usize, seed: u64) -> Result<Vec<PathBuf>> {
    let records = load_records_dir(records_dir)?;
    if records.is_empty() {
        return Err(Error::Config(format!(
            "no run records under {} (expected a records directory produced by `run`, \
             with files like f1_d2_constant_run0.csv)",
            records_dir.display()
        )));
    }
    let budget = records[0].budget;
    if let Some(odd) = records.iter().find(|r| r.budget != budget) {
        return Err(Error::Config(format!(
            "records mix budgets {budget} and {}; report needs a single budget",
            odd.budget
        )));
    }
    let mut dimensions: Vec<usize> = records.iter().map(|r| r.dimension).collect();
    dimensions.sort_unstable();
    dimensions.dedup();
    let mut rankings = Vec::new();
    for dimension in dimensions {
        let groups = group_runs(&records, dimension);
        let methods: Vec<String> = groups.keys().cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match build_tournament(&groups, dimension, rounds, budget, &mut rng)
            .and_then(|matches| rank(&matches, &methods, UpdateSchedule::PerRound, DEFAULT_TAU))
        {
            Ok(rows) => rankings.push((dimension, rows)),
            Err(e) => eprintln!("skipping ranking for dimension {dimension}: {e}"),
        }
    }
    let data = ReportData::from_runs(&records, rankings)?;
    export_report(&data, out_dir)
}

/// Pretty-prints a transcript file; returns the rendered text.
pub fn cmd_replay(transcript_file: &Path) -> Result<String> {
    let transcripts = read_transcripts_file(transcript_file)?;
    let mut out = String::new();
    for (i, t) in transcripts.iter().enumerate() {
        out.push_str(&format!(
            "exchange {} | generation {} | {} ms\n",
            i + 1,
            t.generation,
            t.latency_ms
        ));
        match (&t.failure, t.parsed_sigma) {
            (Some(failure), _) => out.push_str(&format!("  FAILURE: {failure}\n")),
            (None, Some(sigma)) => out.push_str(&format!(
                "  adopted step size {sigma}{}\n",
                if t.clamped { " (clamped)" } else { "" }
            )),
            (None, None) => out.push_str("  no recommendation parsed; step size kept\n"),
        }
        let reply_head: String = t.raw_response.lines().take(2).collect::<Vec<_>>().join(" / ");
        if !reply_head.is_empty() {
            out.push_str(&format!("  reply: {reply_head}\n"));
        }
    }
    out.push_str(&format!("{} exchanges\n", transcripts.len()));
    Ok(out)
}
