//! Step-size controllers.
//!
//! Three controllers are provided: a constant step size, the one-fifth
//! success rule (multiply by 1.5 on success, by 1.5^(-1/4) on failure,
//! keep on a tie), and a periodic advisor that condenses the run log into
//! a prompt every `period` generations and adopts the recommendation a
//! chat model replies with, clamped into fixed bounds.
//!
//! Neither the constant nor the one-fifth controller clamps its step
//! size; the clamp interval applies only to advisor proposals.

use std::time::Instant;

use crate::advisor::{
    build_prompt, condense_log, parse_recommendation, AdvisorConfig, AdvisorEnv, AdvisorProvider,
    AdvisorRequest, PromptTranscript,
};
use crate::error::{Error, Result};
use crate::record::{EvaluationRecord, SigmaChange};

/// Shared starting step size for every controller.
pub const DEFAULT_INITIAL_SIGMA: f64 = 0.1;
/// Generations between advisor queries.
pub const DEFAULT_ADVISOR_PERIOD: usize = 50;
/// Clamp interval for advisor proposals.
pub const DEFAULT_SIGMA_BOUNDS: (f64, f64) = (0.001, 0.999);
/// One-fifth rule success multiplier.
pub const ONE_FIFTH_INCREASE: f64 = 1.5;

/// One-fifth rule failure multiplier, 1.5^(-1/4) = 0.9036020036098449.
pub fn one_fifth_decrease() -> f64 {
    1.5f64.powf(-0.25)
}

/// The one-fifth success rule with the standard factors: 1.5 sigma on a
/// strict improvement, 1.5^(-1/4) sigma on a strict regression, sigma
/// unchanged on a tie. Never clamped.
pub fn one_fifth_update(sigma: f64, parent_f: f64, offspring_f: f64) -> f64 {
    one_fifth_update_with(sigma, parent_f, offspring_f, ONE_FIFTH_INCREASE, one_fifth_decrease())
}

/// One-fifth rule with configurable factors.
pub fn one_fifth_update_with(
    sigma: f64,
    parent_f: f64,
    offspring_f: f64,
    increase: f64,
    decrease: f64,
) -> f64 {
    if offspring_f < parent_f {
        sigma * increase
    } else if offspring_f > parent_f {
        sigma * decrease
    } else {
        sigma
    }
}

/// The constant controller's update: the identity.
pub fn constant_update(sigma: f64) -> f64 {
    sigma
}

/// Tagged description of a step-size controller, the unit of comparison
/// in experiments.
#[derive(Clone, Debug)]
pub enum StrategySpec {
    Constant {
        sigma: f64,
    },
    OneFifth {
        increase: f64,
        decrease: f64,
        initial_sigma: f64,
    },
    PeriodicAdvisor {
        /// Profile label; the method name becomes `advisor:<label>`.
        label: String,
        period: usize,
        advisor: AdvisorConfig,
        bounds: (f64, f64),
        initial_sigma: f64,
    },
}

impl StrategySpec {
    /// Constant step size 0.1.
    pub fn constant() -> Self {
        StrategySpec::Constant {
            sigma: DEFAULT_INITIAL_SIGMA,
        }
    }

    /// One-fifth rule with the standard factors, starting at 0.1.
    pub fn one_fifth() -> Self {
        StrategySpec::OneFifth {
            increase: ONE_FIFTH_INCREASE,
            decrease: one_fifth_decrease(),
            initial_sigma: DEFAULT_INITIAL_SIGMA,
        }
    }

    /// Periodic advisor with period 50 and bounds [0.001, 0.999].
    pub fn periodic_advisor(label: impl Into<String>, advisor: AdvisorConfig) -> Self {
        StrategySpec::PeriodicAdvisor {
            label: label.into(),
            period: DEFAULT_ADVISOR_PERIOD,
            advisor,
            bounds: DEFAULT_SIGMA_BOUNDS,
            initial_sigma: DEFAULT_INITIAL_SIGMA,
        }
    }

    /// Method name used in records, rankings, and file names.
    pub fn name(&self) -> String {
        match self {
            StrategySpec::Constant { .. } => "constant".into(),
            StrategySpec::OneFifth { .. } => "one-fifth".into(),
            StrategySpec::PeriodicAdvisor { label, .. } => format!("advisor:{label}"),
        }
    }

    pub fn initial_sigma(&self) -> f64 {
        match self {
            StrategySpec::Constant { sigma } => *sigma,
            StrategySpec::OneFifth { initial_sigma, .. } => *initial_sigma,
            StrategySpec::PeriodicAdvisor { initial_sigma, .. } => *initial_sigma,
        }
    }

    pub fn with_initial_sigma(mut self, sigma: f64) -> Self {
        match &mut self {
            StrategySpec::Constant { sigma: s } => *s = sigma,
            StrategySpec::OneFifth { initial_sigma, .. } => *initial_sigma = sigma,
            StrategySpec::PeriodicAdvisor { initial_sigma, .. } => *initial_sigma = sigma,
        }
        self
    }

    pub fn with_period(mut self, new_period: usize) -> Self {
        if let StrategySpec::PeriodicAdvisor { period, .. } = &mut self {
            *period = new_period;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategySpec::Constant { sigma } => {
                if *sigma <= 0.0 || sigma.is_nan() {
                    return Err(Error::InvalidParameter(
                        "constant step size must be positive".into(),
                    ));
                }
            }
            StrategySpec::OneFifth {
                increase,
                decrease,
                initial_sigma,
            } => {
                if *increase <= 1.0 || increase.is_nan() {
                    return Err(Error::InvalidParameter(
                        "one-fifth increase factor must exceed 1".into(),
                    ));
                }
                if *decrease <= 0.0 || *decrease >= 1.0 || decrease.is_nan() {
                    return Err(Error::InvalidParameter(
                        "one-fifth decrease factor must be in (0, 1)".into(),
                    ));
                }
                if *initial_sigma <= 0.0 || initial_sigma.is_nan() {
                    return Err(Error::InvalidParameter(
                        "initial step size must be positive".into(),
                    ));
                }
            }
            StrategySpec::PeriodicAdvisor {
                period,
                bounds,
                initial_sigma,
                advisor,
                ..
            } => {
                if *period == 0 {
                    return Err(Error::InvalidParameter(
                        "advisor period must be positive".into(),
                    ));
                }
                let (low, high) = *bounds;
                if !(0.0 < low && low < high && high < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "advisor bounds must satisfy 0 < low < high < 1, got [{low}, {high}]"
                    )));
                }
                if *initial_sigma <= 0.0 || initial_sigma.is_nan() {
                    return Err(Error::InvalidParameter(
                        "initial step size must be positive".into(),
                    ));
                }
                advisor.validate()?;
            }
        }
        Ok(())
    }
}

/// What a controller sees after selection at one generation.
pub struct UpdateContext<'a> {
    pub generation: usize,
    /// Step size used for this generation's offspring.
    pub sigma: f64,
    /// Parent fitness before selection.
    pub parent_f: f64,
    pub offspring_f: f64,
    /// All evaluation records so far, newest last (includes this generation).
    pub history: &'a [EvaluationRecord],
    /// Step-size changes adopted so far.
    pub sigma_changes: &'a [SigmaChange],
}

/// A controller's decision for the next generation.
pub struct SigmaUpdate {
    pub sigma: f64,
    pub transcript: Option<PromptTranscript>,
}

impl SigmaUpdate {
    fn keep(sigma: f64) -> Self {
        SigmaUpdate {
            sigma,
            transcript: None,
        }
    }
}

/// Per-run controller state. Runs after selection at every generation;
/// the returned step size takes effect from the next generation onward.
pub trait StepSizeController: Send {
    fn update(&mut self, ctx: &UpdateContext<'_>) -> SigmaUpdate;
}

struct ConstantController;

impl StepSizeController for ConstantController {
    fn update(&mut self, ctx: &UpdateContext<'_>) -> SigmaUpdate {
        SigmaUpdate::keep(constant_update(ctx.sigma))
    }
}

struct OneFifthController {
    increase: f64,
    decrease: f64,
}

impl StepSizeController for OneFifthController {
    fn update(&mut self, ctx: &UpdateContext<'_>) -> SigmaUpdate {
        SigmaUpdate::keep(one_fifth_update_with(
            ctx.sigma,
            ctx.parent_f,
            ctx.offspring_f,
            self.increase,
            self.decrease,
        ))
    }
}

/// Queries the advisor every `period` generations with the condensed run
/// log; otherwise leaves the step size alone. Transport and parse
/// failures never abort the run: the step size stays unchanged and the
/// transcript records what happened.
pub struct PeriodicAdvisorController {
    period: usize,
    bounds: (f64, f64),
    char_budget: usize,
    provider: Box<dyn AdvisorProvider>,
    /// Number of history records already shown to the advisor.
    seen: usize,
}

impl PeriodicAdvisorController {
    pub fn new(
        period: usize,
        bounds: (f64, f64),
        char_budget: usize,
        provider: Box<dyn AdvisorProvider>,
    ) -> Self {
        PeriodicAdvisorController {
            period,
            bounds,
            char_budget,
            provider,
            seen: 0,
        }
    }
}

impl StepSizeController for PeriodicAdvisorController {
    fn update(&mut self, ctx: &UpdateContext<'_>) -> SigmaUpdate {
        if !ctx.generation.is_multiple_of(self.period) {
            return SigmaUpdate::keep(ctx.sigma);
        }
        let log = condense_log(ctx.history, ctx.sigma_changes, self.char_budget);
        let (system, user) = build_prompt(&log, ctx.sigma);
        let request = AdvisorRequest {
            system_message: &system,
            user_message: &user,
            current_sigma: ctx.sigma,
            bounds: self.bounds,
            records_since_last_query: &ctx.history[self.seen..],
        };
        let started = Instant::now();
        let outcome = self.provider.respond(&request);
        self.seen = ctx.history.len();
        let mut transcript = PromptTranscript {
            generation: ctx.generation,
            rendered_system: system,
            rendered_user: user,
            raw_response: String::new(),
            parsed_sigma: None,
            clamped: false,
            failure: None,
            latency_ms: 0,
        };
        match outcome {
            Ok(response) => {
                transcript.raw_response = response.text.clone();
                transcript.latency_ms = response.latency_ms;
                let rec = parse_recommendation(&response.text, self.bounds, ctx.sigma);
                if rec.parsed {
                    transcript.parsed_sigma = Some(rec.sigma);
                    transcript.clamped = rec.clamped;
                    SigmaUpdate {
                        sigma: rec.sigma,
                        transcript: Some(transcript),
                    }
                } else {
                    transcript.failure =
                        Some("no step-size recommendation found in response".into());
                    SigmaUpdate {
                        sigma: ctx.sigma,
                        transcript: Some(transcript),
                    }
                }
            }
            Err(e) => {
                transcript.latency_ms = started.elapsed().as_millis() as u64;
                // Offline providers fail instantly; keep their latency at
                // zero so replays are byte-stable.
                if !matches!(e, Error::AdvisorTransport(_)) {
                    transcript.latency_ms = 0;
                }
                transcript.failure = Some(e.to_string());
                SigmaUpdate {
                    sigma: ctx.sigma,
                    transcript: Some(transcript),
                }
            }
        }
    }
}

/// Materializes the runtime controller for a strategy. Advisor providers
/// (replay cursors, shared HTTP clients) come from `env`.
pub fn build_controller(
    spec: &StrategySpec,
    env: &AdvisorEnv,
) -> Result<Box<dyn StepSizeController>> {
    spec.validate()?;
    match spec {
        StrategySpec::Constant { .. } => Ok(Box::new(ConstantController)),
        StrategySpec::OneFifth {
            increase, decrease, ..
        } => Ok(Box::new(OneFifthController {
            increase: *increase,
            decrease: *decrease,
        })),
        StrategySpec::PeriodicAdvisor {
            period,
            advisor,
            bounds,
            ..
        } => {
            let provider = env.make_provider(advisor)?;
            Ok(Box::new(PeriodicAdvisorController::new(
                *period,
                *bounds,
                advisor.char_budget,
                provider,
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn success_multiplies_by_increase() {
        assert_eq!(one_fifth_update(0.1, 2.0, 1.0), 0.15000000000000002);
        assert!((one_fifth_update(0.1, 2.0, 1.0) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn tie_keeps_sigma() {
        assert_eq!(one_fifth_update(0.1, 1.0, 1.0), 0.1);
    }

    #[test]
    fn failure_multiplies_by_decrease() {
        let got = one_fifth_update(0.1, 1.0, 2.0);
        assert!((got - 0.0903602).abs() < 1e-7, "got {got}");
        assert_eq!(got, 0.1 * one_fifth_decrease());
    }

    #[test]
    fn one_success_four_failures_is_neutral() {
        let mut sigma = 0.1;
        sigma = one_fifth_update(sigma, 2.0, 1.0);
        for _ in 0..4 {
            sigma = one_fifth_update(sigma, 1.0, 2.0);
        }
        assert!((sigma - 0.1).abs() <= 1e-13 * 0.1, "sigma = {sigma}");
    }

    #[test]
    fn constant_update_is_identity() {
        assert_eq!(constant_update(0.1), 0.1);
        assert_eq!(constant_update(0.5), 0.5);
        let mut sigma = 0.1;
        for _ in 0..1000 {
            sigma = constant_update(sigma);
        }
        assert_eq!(sigma, 0.1);
    }

    #[test]
    fn strategy_names() {
        assert_eq!(StrategySpec::constant().name(), "constant");
        assert_eq!(StrategySpec::one_fifth().name(), "one-fifth");
        let advisor = StrategySpec::periodic_advisor("groq", AdvisorConfig::surrogate());
        assert_eq!(advisor.name(), "advisor:groq");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(StrategySpec::Constant { sigma: 0.0 }.validate().is_err());
        assert!(StrategySpec::OneFifth {
            increase: 0.9,
            decrease: 0.5,
            initial_sigma: 0.1
        }
        .validate()
        .is_err());
        let mut advisor = StrategySpec::periodic_advisor("x", AdvisorConfig::surrogate());
        if let StrategySpec::PeriodicAdvisor { bounds, .. } = &mut advisor {
            *bounds = (0.9, 0.1);
        }
        assert!(advisor.validate().is_err());
    }

    proptest! {
        // The rule is a pure product of per-outcome factors, so the order
        // of a fixed multiset of outcomes cannot matter.
        #[test]
        fn one_fifth_is_order_independent(
            outcomes in proptest::collection::vec(0u8..3, 1..40),
            seed in any::<u64>()
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let apply = |order: &[u8]| {
                let mut sigma = 0.1;
                for o in order {
                    let (pf, of) = match o {
                        0 => (2.0, 1.0),
                        1 => (1.0, 2.0),
                        _ => (1.0, 1.0),
                    };
                    sigma = one_fifth_update(sigma, pf, of);
                }
                sigma
            };
            let base = apply(&outcomes);
            let mut shuffled = outcomes.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let other = apply(&shuffled);
            prop_assert!((base - other).abs() <= 1e-9 * base.abs().max(other.abs()));
        }

        #[test]
        fn one_fifth_matches_three_case_formula(
            sigma in 1e-8f64..1e4,
            parent in -1e6f64..1e6,
            offspring in -1e6f64..1e6,
        ) {
            let got = one_fifth_update(sigma, parent, offspring);
            let want = if offspring < parent {
                1.5 * sigma
            } else if offspring > parent {
                1.5f64.powf(-0.25) * sigma
            } else {
                sigma
            };
            prop_assert_eq!(got, want);
        }
    }
}
