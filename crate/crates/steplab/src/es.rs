//! The elitist (1+1)-ES loop: mutate, evaluate, select, record.
//!
//! A run owns its seeded generator and is strictly sequential; distinct
//! runs are independent and can execute concurrently. The evaluation
//! budget counts the initial point, so a budget of `b` performs exactly
//! `b` fitness evaluations: one for the starting point and one per
//! generation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adaptation::{build_controller, StepSizeController, StrategySpec, UpdateContext};
use crate::advisor::{AdvisorEnv, PromptTranscript};
use crate::error::{Error, Result};
use crate::problems::{sample_initial_point, Problem};
use crate::record::{EvaluationRecord, RunRecord, SigmaChange};

/// How offspring are perturbed around the parent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationMode {
    /// `x' = x + sigma * g`, `g` standard normal per coordinate.
    #[default]
    GaussianIsotropic,
    /// `x' = x + u`, `u` uniform in the ball of radius sigma.
    UniformBall,
}

impl std::str::FromStr for MutationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-isotropic" => Ok(MutationMode::GaussianIsotropic),
            "uniform-ball" => Ok(MutationMode::UniformBall),
            other => Err(Error::InvalidParameter(format!(
                "unknown mutation mode '{other}' (expected 'gaussian-isotropic' or 'uniform-ball')"
            ))),
        }
    }
}

impl std::fmt::Display for MutationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MutationMode::GaussianIsotropic => write!(f, "gaussian-isotropic"),
            MutationMode::UniformBall => write!(f, "uniform-ball"),
        }
    }
}

/// Samples an offspring around `x` with scale `sigma`.
pub fn mutate<R: Rng>(x: &[f64], sigma: f64, rng: &mut R, mode: MutationMode) -> Result<Vec<f64>> {
    if sigma <= 0.0 || sigma.is_nan() {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {sigma}"
        )));
    }
    match mode {
        MutationMode::GaussianIsotropic => Ok(x
            .iter()
            .map(|&xi| xi + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect()),
        MutationMode::UniformBall => {
            let d = x.len();
            // Uniform direction from a normalized Gaussian vector, radius
            // sigma * U^(1/d) for uniformity over the ball volume.
            let direction = loop {
                let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break g.into_iter().map(|v| v / norm).collect::<Vec<f64>>();
                }
            };
            let radius = sigma * rng.random::<f64>().powf(1.0 / d as f64);
            Ok(x.iter()
                .zip(&direction)
                .map(|(&xi, &di)| xi + radius * di)
                .collect())
        }
    }
}

/// Live state of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct EsState {
    pub current_x: Vec<f64>,
    /// Cached fitness of `current_x`; never stale.
    pub current_f: f64,
    pub step_size: f64,
    pub generation: usize,
    /// Always `generation + 1`: the initial point plus one per generation.
    pub evaluations_used: usize,
}

/// Run parameters.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub budget: usize,
    pub seed: u64,
    pub mutation: MutationMode,
}

impl RunOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        RunOptions {
            budget,
            seed,
            mutation: MutationMode::default(),
        }
    }

    pub fn with_mutation(mut self, mode: MutationMode) -> Self {
        self.mutation = mode;
        self
    }
}

/// Outcome of [`EsRun::step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Stepped,
    BudgetExhausted,
}

/// An in-progress run. Construction evaluates the initial point (one
/// evaluation); each [`step`](EsRun::step) consumes one more.
pub struct EsRun<'a> {
    problem: &'a dyn Problem,
    controller: Box<dyn StepSizeController>,
    strategy_name: String,
    state: EsState,
    mode: MutationMode,
    budget: usize,
    seed: u64,
    rng: ChaCha8Rng,
    records: Vec<EvaluationRecord>,
    sigma_changes: Vec<SigmaChange>,
    transcripts: Vec<PromptTranscript>,
    sigma_trace: Vec<f64>,
    best_so_far: Vec<f64>,
}

impl<'a> EsRun<'a> {
    pub fn new(
        problem: &'a dyn Problem,
        strategy: &StrategySpec,
        opts: &RunOptions,
        env: &AdvisorEnv,
    ) -> Result<Self> {
        if opts.budget < 1 {
            return Err(Error::InvalidParameter(
                "budget must be at least 1 evaluation".into(),
            ));
        }
        let controller = build_controller(strategy, env)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let current_x = sample_initial_point(problem, &mut rng);
        let current_f = problem.evaluate(&current_x)?;
        let step_size = strategy.initial_sigma();
        Ok(EsRun {
            problem,
            controller,
            strategy_name: strategy.name(),
            state: EsState {
                current_x,
                current_f,
                step_size,
                generation: 0,
                evaluations_used: 1,
            },
            mode: opts.mutation,
            budget: opts.budget,
            seed: opts.seed,
            rng,
            records: Vec::with_capacity(opts.budget.saturating_sub(1)),
            sigma_changes: Vec::new(),
            transcripts: Vec::new(),
            sigma_trace: vec![step_size],
            best_so_far: vec![current_f],
        })
    }

    pub fn state(&self) -> &EsState {
        &self.state
    }

    pub fn is_complete(&self) -> bool {
        self.state.evaluations_used >= self.budget
    }

    /// One generation: sample an offspring with the current step size,
    /// evaluate it, keep it iff strictly better (a tie keeps the parent),
    /// then let the controller adjust the step size for the generations
    /// that follow. Returns `BudgetExhausted` without evaluating once the
    /// budget is spent.
    pub fn step(&mut self) -> Result<StepStatus> {
        if self.is_complete() {
            return Ok(StepStatus::BudgetExhausted);
        }
        let sigma = self.state.step_size;
        let offspring = mutate(&self.state.current_x, sigma, &mut self.rng, self.mode)?;
        let offspring_f = self.problem.evaluate(&offspring)?;
        let parent_f = self.state.current_f;
        let accepted = offspring_f < parent_f;
        if accepted {
            self.state.current_x = offspring;
            self.state.current_f = offspring_f;
        }
        self.state.generation += 1;
        self.state.evaluations_used += 1;
        self.records.push(EvaluationRecord {
            generation: self.state.generation,
            sigma_used: sigma,
            parent_f,
            offspring_f,
            accepted,
        });
        self.sigma_trace.push(sigma);
        self.best_so_far.push(self.state.current_f);

        let update = self.controller.update(&UpdateContext {
            generation: self.state.generation,
            sigma,
            parent_f,
            offspring_f,
            history: &self.records,
            sigma_changes: &self.sigma_changes,
        });
        if update.sigma != sigma {
            self.sigma_changes.push(SigmaChange {
                generation: self.state.generation,
                old: sigma,
                new: update.sigma,
            });
            self.state.step_size = update.sigma;
        }
        if let Some(t) = update.transcript {
            self.transcripts.push(t);
        }
        Ok(StepStatus::Stepped)
    }

    pub fn into_record(self) -> RunRecord {
        RunRecord {
            function_id: self.problem.id(),
            dimension: self.problem.dimension(),
            f_opt: self.problem.f_opt(),
            strategy: self.strategy_name,
            seed: self.seed,
            budget: self.budget,
            mutation: self.mode,
            records: self.records,
            sigma_trace: self.sigma_trace,
            best_so_far: self.best_so_far,
            transcripts: self.transcripts,
        }
    }
}

/// Runs a full budget and returns the trace. Fully deterministic for a
/// fixed seed and a deterministic advisor.
pub fn run(
    problem: &dyn Problem,
    strategy: &StrategySpec,
    opts: &RunOptions,
    env: &AdvisorEnv,
) -> Result<RunRecord> {
    let mut es = EsRun::new(problem, strategy, opts, env)?;
    while es.step()? == StepStatus::Stepped {}
    Ok(es.into_record())
}
