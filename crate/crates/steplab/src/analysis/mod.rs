//! Aggregates run records into distribution and trajectory summaries, and
//! exports the CSV/SVG report built from them.

mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::RunRecord;

pub use report::{export_report, BoxplotRow, ReportData};

/// Five-number summary of final best fitness for one (function, method)
/// cell, pooled over dimensions and runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessDistribution {
    pub function_id: u32,
    pub method: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

/// Linear-interpolation quantile (the midpoint convention: the median of
/// an even-sized sample is the mean of the middle two values).
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
}

/// (min, q1, median, q3, max) of `values`; errors when empty.
pub fn five_number_summary(values: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot summarize an empty sample".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok((
        sorted[0],
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.5),
        quantile(&sorted, 0.75),
        sorted[sorted.len() - 1],
    ))
}

/// Final best fitness per (function, method), pooled over dimensions and
/// runs. `regret` subtracts each instance's target value first, which is
/// what the log-scale plots use.
pub fn best_fitness_distribution(
    runs: &[RunRecord],
    regret: bool,
) -> Result<Vec<FitnessDistribution>> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter("no runs to summarize".into()));
    }
    let mut cells: BTreeMap<(u32, String), Vec<f64>> = BTreeMap::new();
    for run in runs {
        let value = if regret {
            run.final_best() - run.f_opt
        } else {
            run.final_best()
        };
        cells
            .entry((run.function_id, run.strategy.clone()))
            .or_default()
            .push(value);
    }
    cells
        .into_iter()
        .map(|((function_id, method), values)| {
            let (min, q1, median, q3, max) = five_number_summary(&values)?;
            Ok(FitnessDistribution {
                function_id,
                method,
                min,
                q1,
                median,
                q3,
                max,
                values,
            })
        })
        .collect()
}

/// Per-evaluation mean step size with a confidence band, for one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub method: String,
    pub mean_sigma: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Runs aggregated.
    pub n: usize,
    /// True when n < 2 and the band is degenerate (equal to the mean).
    pub degenerate: bool,
}

fn z_for_confidence(confidence: f64) -> Result<f64> {
    // Normal-approximation band; the usual three levels suffice here.
    let table = [(0.90, 1.645), (0.95, 1.96), (0.99, 2.576)];
    table
        .iter()
        .find(|(c, _)| (confidence - c).abs() < 1e-9)
        .map(|(_, z)| *z)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unsupported confidence level {confidence} (use 0.90, 0.95, or 0.99)"
            ))
        })
}

/// Pointwise mean of the step-size traces of `runs` (which must share a
/// budget), with a `confidence` normal-approximation band
/// `mean +- z * s / sqrt(n)`. With fewer than two runs the band collapses
/// to the mean and is flagged.
pub fn step_size_trajectory(runs: &[&RunRecord], confidence: f64) -> Result<TrajectorySummary> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no runs to aggregate".into()))?;
    let budget = first.budget;
    let method = first.strategy.clone();
    for run in runs {
        if run.budget != budget {
            return Err(Error::InvalidParameter(format!(
                "trajectory runs must share one budget; found {} and {budget}",
                run.budget
            )));
        }
        if run.strategy != method {
            return Err(Error::InvalidParameter(format!(
                "trajectory runs must share one method; found '{}' and '{method}'",
                run.strategy
            )));
        }
    }
    let z = z_for_confidence(confidence)?;
    let n = runs.len();
    let mut mean_sigma = Vec::with_capacity(budget);
    let mut ci_low = Vec::with_capacity(budget);
    let mut ci_high = Vec::with_capacity(budget);
    for i in 0..budget {
        // A column of identical values must summarize exactly: mean
        // equal to the value, zero-width band.
        let first = runs[0].sigma_trace[i];
        if runs.iter().all(|r| r.sigma_trace[i] == first) {
            mean_sigma.push(first);
            ci_low.push(first);
            ci_high.push(first);
            continue;
        }
        let mean = runs.iter().map(|r| r.sigma_trace[i]).sum::<f64>() / n as f64;
        if n < 2 {
            mean_sigma.push(mean);
            ci_low.push(mean);
            ci_high.push(mean);
            continue;
        }
        let variance = runs
            .iter()
            .map(|r| {
                let d = r.sigma_trace[i] - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64;
        let half_width = z * (variance / n as f64).sqrt();
        mean_sigma.push(mean);
        ci_low.push(mean - half_width);
        ci_high.push(mean + half_width);
    }
    Ok(TrajectorySummary {
        method,
        mean_sigma,
        ci_low,
        ci_high,
        n,
        degenerate: n < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_with_trace(method: &str, sigma_trace: Vec<f64>) -> RunRecord {
        let budget = sigma_trace.len();
        RunRecord {
            function_id: 1,
            dimension: 2,
            f_opt: 0.0,
            strategy: method.into(),
            seed: 0,
            budget,
            mutation: Default::default(),
            records: Vec::new(),
            sigma_trace,
            best_so_far: vec![1.0; budget],
            transcripts: Vec::new(),
        }
    }

    fn run_with_final(method: &str, function_id: u32, final_best: f64) -> RunRecord {
        let mut run = run_with_trace(method, vec![0.1; 4]);
        run.function_id = function_id;
        run.best_so_far = vec![final_best + 1.0, final_best + 1.0, final_best, final_best];
        run
    }

    #[test]
    fn odd_count_summary() {
        let (min, _, median, _, max) =
            five_number_summary(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((min, median, max), (1.0, 3.0, 5.0));
    }

    #[test]
    fn even_count_median_interpolates() {
        let (_, q1, median, q3, _) = five_number_summary(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(median, 2.5);
        assert_eq!(q1, 1.75);
        assert_eq!(q3, 3.25);
    }

    #[test]
    fn singleton_summary_is_flat() {
        let (min, q1, median, q3, max) = five_number_summary(&[2.5]).unwrap();
        assert!([min, q1, median, q3, max].iter().all(|&v| v == 2.5));
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(five_number_summary(&[]).is_err());
        assert!(best_fitness_distribution(&[], false).is_err());
    }

    #[test]
    fn distributions_group_by_function_and_method() {
        let runs = vec![
            run_with_final("constant", 1, 3.0),
            run_with_final("constant", 1, 1.0),
            run_with_final("one-fifth", 1, 2.0),
            run_with_final("constant", 5, 9.0),
        ];
        let dists = best_fitness_distribution(&runs, false).unwrap();
        assert_eq!(dists.len(), 3);
        let cell = dists
            .iter()
            .find(|d| d.function_id == 1 && d.method == "constant")
            .unwrap();
        assert_eq!(cell.values, vec![3.0, 1.0]);
        assert_eq!(cell.min, 1.0);
        assert_eq!(cell.max, 3.0);
    }

    #[test]
    fn regret_subtracts_the_target() {
        let mut run = run_with_final("constant", 1, 3.0);
        run.f_opt = 2.5;
        let dists = best_fitness_distribution(&[run], true).unwrap();
        assert_eq!(dists[0].values, vec![0.5]);
    }

    #[test]
    fn constant_traces_give_flat_mean_and_zero_width_band() {
        let runs: Vec<RunRecord> = (0..3)
            .map(|_| run_with_trace("constant", vec![0.1; 10]))
            .collect();
        let refs: Vec<&RunRecord> = runs.iter().collect();
        let t = step_size_trajectory(&refs, 0.95).unwrap();
        assert!(t.mean_sigma.iter().all(|&m| m == 0.1));
        assert!(t.ci_low.iter().zip(&t.ci_high).all(|(a, b)| a == b));
        assert!(!t.degenerate);
    }

    #[test]
    fn two_traces_average_pointwise() {
        let runs = [
            run_with_trace("m", vec![0.1; 5]),
            run_with_trace("m", vec![0.3; 5]),
        ];
        let refs: Vec<&RunRecord> = runs.iter().collect();
        let t = step_size_trajectory(&refs, 0.95).unwrap();
        assert!(t.mean_sigma.iter().all(|&m| (m - 0.2).abs() < 1e-15));
    }

    #[test]
    fn band_matches_hand_computed_standard_error() {
        // Ten synthetic traces with known pointwise spread.
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let runs: Vec<RunRecord> = values
            .iter()
            .map(|&v| run_with_trace("m", vec![v; 3]))
            .collect();
        let refs: Vec<&RunRecord> = runs.iter().collect();
        let t = step_size_trajectory(&refs, 0.95).unwrap();
        let mean = 5.5;
        // Sample variance of 1..10 is 55/6; s/sqrt(10) follows.
        let half = 1.96 * (55.0 / 6.0 / 10.0f64).sqrt();
        assert!((t.mean_sigma[0] - mean).abs() < 1e-12);
        assert!((t.ci_high[0] - (mean + half)).abs() < 1e-12);
        assert!((t.ci_low[0] - (mean - half)).abs() < 1e-12);
    }

    #[test]
    fn single_run_band_is_flagged() {
        let runs = [run_with_trace("m", vec![0.2; 4])];
        let refs: Vec<&RunRecord> = runs.iter().collect();
        let t = step_size_trajectory(&refs, 0.95).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.ci_low, t.mean_sigma);
    }

    #[test]
    fn duplicating_runs_keeps_mean_and_shrinks_band_by_sqrt2() {
        let runs: Vec<RunRecord> = (0..20)
            .map(|i| run_with_trace("m", vec![0.1 * (i + 1) as f64; 3]))
            .collect();
        let doubled: Vec<RunRecord> = runs.iter().chain(runs.iter()).cloned().collect();
        let refs: Vec<&RunRecord> = runs.iter().collect();
        let refs2: Vec<&RunRecord> = doubled.iter().collect();
        let t1 = step_size_trajectory(&refs, 0.95).unwrap();
        let t2 = step_size_trajectory(&refs2, 0.95).unwrap();
        assert_eq!(t1.mean_sigma, t2.mean_sigma);
        let w1 = t1.ci_high[0] - t1.ci_low[0];
        let w2 = t2.ci_high[0] - t2.ci_low[0];
        // Up to the n-1 small-sample correction the band shrinks by
        // 1/sqrt(2) when the run set is duplicated.
        let ratio = w2 / w1;
        assert!((ratio - 1.0 / 2.0f64.sqrt()).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn mixed_budgets_are_rejected() {
        let runs = [
            run_with_trace("m", vec![0.1; 3]),
            run_with_trace("m", vec![0.1; 4]),
        ];
        let refs: Vec<&RunRecord> = runs.iter().collect();
        assert!(step_size_trajectory(&refs, 0.95).is_err());
    }
}
