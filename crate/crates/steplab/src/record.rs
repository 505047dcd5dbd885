//! Run records: the complete seedable trace of one ES run, and its
//! line-delimited on-disk format.
//!
//! A record file is one header line, one column line, then one row per
//! evaluation:
//!
//! ```text
//! # steplab-run function_id=1 dimension=2 strategy=constant seed=42 budget=4 mutation=gaussian-isotropic f_opt=-3.5
//! generation,sigma_used,parent_f,offspring_f,accepted,best_so_far
//! 0,0.1,7.5,7.5,false,7.5
//! 1,0.1,7.5,3.25,true,3.25
//! ...
//! ```
//!
//! Row 0 is the initial evaluation (no offspring yet, so parent and
//! offspring fitness coincide and `accepted` is false). Floats use the
//! shortest decimal rendering that round-trips, so writing and re-reading
//! a record reproduces it bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::advisor::PromptTranscript;
use crate::error::{Error, Result};
use crate::es::MutationMode;

const HEADER_TAG: &str = "# steplab-run";
const COLUMNS: &str = "generation,sigma_used,parent_f,offspring_f,accepted,best_so_far";

/// One offspring trial: the unit the advisor log is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub generation: usize,
    /// Step size in effect when the offspring was sampled.
    pub sigma_used: f64,
    /// Parent fitness before selection.
    pub parent_f: f64,
    pub offspring_f: f64,
    /// True iff the offspring strictly improved on the parent.
    pub accepted: bool,
}

/// A step-size change adopted at the end of a generation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaChange {
    pub generation: usize,
    pub old: f64,
    pub new: f64,
}

/// The full trace of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub function_id: u32,
    pub dimension: usize,
    pub f_opt: f64,
    /// Strategy name, e.g. `constant`, `one-fifth`, `advisor:<profile>`.
    pub strategy: String,
    pub seed: u64,
    pub budget: usize,
    pub mutation: MutationMode,
    /// Offspring trials, generations 1 through `budget - 1`.
    pub records: Vec<EvaluationRecord>,
    /// Step size in effect at each evaluation; length equals `budget`.
    pub sigma_trace: Vec<f64>,
    /// Minimum fitness seen up to each evaluation; non-increasing.
    pub best_so_far: Vec<f64>,
    /// Advisor exchanges; empty for non-advisor strategies.
    pub transcripts: Vec<PromptTranscript>,
}

impl RunRecord {
    /// Fitness of the initial point.
    pub fn initial_f(&self) -> f64 {
        self.best_so_far[0]
    }

    /// Best fitness at the final evaluation.
    pub fn final_best(&self) -> f64 {
        *self.best_so_far.last().expect("non-empty trace")
    }

    /// Serializes the record to its line-delimited text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{HEADER_TAG} function_id={} dimension={} strategy={} seed={} budget={} mutation={} f_opt={}",
            self.function_id,
            self.dimension,
            self.strategy,
            self.seed,
            self.budget,
            self.mutation,
            self.f_opt
        )
        .unwrap();
        out.push_str(COLUMNS);
        out.push('\n');
        writeln!(
            out,
            "0,{},{},{},false,{}",
            self.sigma_trace[0], self.best_so_far[0], self.best_so_far[0], self.best_so_far[0]
        )
        .unwrap();
        for rec in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                rec.generation,
                rec.sigma_used,
                rec.parent_f,
                rec.offspring_f,
                rec.accepted,
                self.best_so_far[rec.generation]
            )
            .unwrap();
        }
        out
    }

    /// Parses a record from its text form, validating counts and
    /// per-row consistency. `path` is used only for error messages.
    pub fn from_text(text: &str, path: &Path) -> Result<RunRecord> {
        let err = |line: usize, message: String| Error::ParseRecord {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty record file".into()))?;
        let rest = header
            .strip_prefix(HEADER_TAG)
            .ok_or_else(|| err(1, format!("expected header starting with '{HEADER_TAG}'")))?;
        let mut function_id = None;
        let mut dimension = None;
        let mut strategy = None;
        let mut seed = None;
        let mut budget = None;
        let mut mutation = None;
        let mut f_opt = None;
        for token in rest.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(1, format!("malformed header token '{token}'")))?;
            match key {
                "function_id" => function_id = Some(value.parse().map_err(|e| err(1, format!("function_id: {e}")))?),
                "dimension" => dimension = Some(value.parse().map_err(|e| err(1, format!("dimension: {e}")))?),
                "strategy" => strategy = Some(value.to_string()),
                "seed" => seed = Some(value.parse().map_err(|e| err(1, format!("seed: {e}")))?),
                "budget" => budget = Some(value.parse().map_err(|e| err(1, format!("budget: {e}")))?),
                "mutation" => mutation = Some(value.parse().map_err(|e| err(1, format!("mutation: {e}")))?),
                "f_opt" => f_opt = Some(value.parse().map_err(|e| err(1, format!("f_opt: {e}")))?),
                other => return Err(err(1, format!("unknown header key '{other}'"))),
            }
        }
        let function_id = function_id.ok_or_else(|| err(1, "missing function_id".into()))?;
        let dimension = dimension.ok_or_else(|| err(1, "missing dimension".into()))?;
        let strategy = strategy.ok_or_else(|| err(1, "missing strategy".into()))?;
        let seed = seed.ok_or_else(|| err(1, "missing seed".into()))?;
        let budget: usize = budget.ok_or_else(|| err(1, "missing budget".into()))?;
        let mutation = mutation.ok_or_else(|| err(1, "missing mutation".into()))?;
        let f_opt = f_opt.ok_or_else(|| err(1, "missing f_opt".into()))?;

        let (_, columns) = lines
            .next()
            .ok_or_else(|| err(2, "missing column line".into()))?;
        if columns != COLUMNS {
            return Err(err(2, format!("expected columns '{COLUMNS}'")));
        }

        let mut records = Vec::with_capacity(budget.saturating_sub(1));
        let mut sigma_trace = Vec::with_capacity(budget);
        let mut best_so_far = Vec::with_capacity(budget);
        for (idx, row) in lines {
            let line_no = idx + 1;
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 6 {
                return Err(err(line_no, format!("expected 6 fields, got {}", fields.len())));
            }
            let generation: usize = fields[0]
                .parse()
                .map_err(|e| err(line_no, format!("generation: {e}")))?;
            let parse_f = |s: &str, name: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| err(line_no, format!("{name}: {e}")))
            };
            let sigma_used = parse_f(fields[1], "sigma_used")?;
            let parent_f = parse_f(fields[2], "parent_f")?;
            let offspring_f = parse_f(fields[3], "offspring_f")?;
            let accepted = match fields[4] {
                "true" => true,
                "false" => false,
                other => return Err(err(line_no, format!("accepted: invalid bool '{other}'"))),
            };
            let best = parse_f(fields[5], "best_so_far")?;
            if generation != sigma_trace.len() {
                return Err(err(
                    line_no,
                    format!("expected generation {}, got {generation}", sigma_trace.len()),
                ));
            }
            if generation > 0 {
                records.push(EvaluationRecord {
                    generation,
                    sigma_used,
                    parent_f,
                    offspring_f,
                    accepted,
                });
            }
            sigma_trace.push(sigma_used);
            best_so_far.push(best);
        }
        if sigma_trace.len() != budget {
            return Err(err(
                text.lines().count(),
                format!("expected {budget} evaluation rows, found {}", sigma_trace.len()),
            ));
        }
        Ok(RunRecord {
            function_id,
            dimension,
            f_opt,
            strategy,
            seed,
            budget,
            mutation,
            records,
            sigma_trace,
            best_so_far,
            transcripts: Vec::new(),
        })
    }

    /// Writes the record to `path` via a sibling temp file and an atomic
    /// rename, so interrupted writes never leave a readable partial file.
    pub fn write_to_file(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("csv.tmp");
        std::fs::write(&tmp, self.to_text()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads and parses a record file.
    pub fn read_from_file(path: &Path) -> Result<RunRecord> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunRecord::from_text(&text, path)
    }
}
