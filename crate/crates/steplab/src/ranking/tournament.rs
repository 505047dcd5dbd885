//! Fixed-budget tournaments over run records, and the rating table built
//! from them.
//!
//! A match compares the best fitness two methods reached at the same
//! evaluation budget; lower wins, exact equality draws. Each tournament
//! round plays every unordered method pair once per function, sampling
//! one run per method uniformly with replacement, so every method plays
//! `rounds x functions x (methods - 1)` games.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::glicko2::{glicko2_update, GlickoState};
use crate::record::RunRecord;

/// One game between two methods.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub method_a: String,
    pub method_b: String,
    /// 1 if `method_a` won, 0.5 for a draw, 0 for a loss.
    pub score_a: f64,
    pub function_id: u32,
    pub dimension: usize,
    pub round: usize,
}

impl MatchResult {
    pub fn score_b(&self) -> f64 {
        1.0 - self.score_a
    }
}

/// Fixed-budget comparison: the run whose best-so-far value at the final
/// budgeted evaluation is lower wins; exact equality is a draw.
pub fn compare_runs(run_a: &RunRecord, run_b: &RunRecord, budget: usize) -> Result<f64> {
    for run in [run_a, run_b] {
        if run.best_so_far.len() < budget {
            return Err(Error::TraceTooShort {
                len: run.best_so_far.len(),
                budget,
            });
        }
    }
    let a = run_a.best_so_far[budget - 1];
    let b = run_b.best_so_far[budget - 1];
    Ok(if a < b {
        1.0
    } else if a > b {
        0.0
    } else {
        0.5
    })
}

/// Runs grouped as method -> function id -> runs, for one dimension.
pub type RunGroups<'a> = BTreeMap<String, BTreeMap<u32, Vec<&'a RunRecord>>>;

/// Groups records of one dimension by method and function.
pub fn group_runs(records: &[RunRecord], dimension: usize) -> RunGroups<'_> {
    let mut groups: RunGroups = BTreeMap::new();
    for record in records.iter().filter(|r| r.dimension == dimension) {
        groups
            .entry(record.strategy.clone())
            .or_default()
            .entry(record.function_id)
            .or_default()
            .push(record);
    }
    groups
}

/// Builds the match list: for each round and each function, every
/// unordered method pair plays once on freshly sampled runs.
/// Deterministic for a fixed generator state.
pub fn build_tournament(
    groups: &RunGroups<'_>,
    dimension: usize,
    rounds: usize,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MatchResult>> {
    let methods: Vec<&String> = groups.keys().collect();
    let functions: BTreeSet<u32> = groups
        .values()
        .flat_map(|by_function| by_function.keys().copied())
        .collect();
    let mut missing = Vec::new();
    for method in &methods {
        for function in &functions {
            let populated = groups[*method]
                .get(function)
                .map(|runs| !runs.is_empty())
                .unwrap_or(false);
            if !populated {
                missing.push(format!("('{method}', function {function})"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingCell(format!(
            "no runs at dimension {dimension} for {}",
            missing.join(", ")
        )));
    }
    let mut matches = Vec::new();
    for round in 0..rounds {
        for &function in &functions {
            for i in 0..methods.len() {
                for j in (i + 1)..methods.len() {
                    let runs_a = &groups[methods[i]][&function];
                    let runs_b = &groups[methods[j]][&function];
                    let run_a = runs_a[rng.random_range(0..runs_a.len())];
                    let run_b = runs_b[rng.random_range(0..runs_b.len())];
                    matches.push(MatchResult {
                        method_a: methods[i].clone(),
                        method_b: methods[j].clone(),
                        score_a: compare_runs(run_a, run_b, budget)?,
                        function_id: function,
                        dimension,
                        round,
                    });
                }
            }
        }
    }
    Ok(matches)
}

/// How matches are batched into rating periods.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UpdateSchedule {
    /// One rating period per tournament round.
    #[default]
    PerRound,
    /// All matches form a single period.
    SinglePeriod,
}

/// One row of the ranking table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub method: String,
    pub rating: f64,
    pub deviation: f64,
    pub volatility: f64,
    pub games: usize,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
}

/// Rates `methods` over the match list, applying Glicko-2 updates per
/// rating period, and returns rows sorted by rating descending.
pub fn rank(
    matches: &[MatchResult],
    methods: &[String],
    schedule: UpdateSchedule,
    tau: f64,
) -> Result<Vec<RankRow>> {
    let known: BTreeSet<&str> = methods.iter().map(String::as_str).collect();
    for m in matches {
        for name in [m.method_a.as_str(), m.method_b.as_str()] {
            if !known.contains(name) {
                return Err(Error::InvalidParameter(format!(
                    "match references unknown method '{name}'"
                )));
            }
        }
    }

    let mut states: BTreeMap<&str, GlickoState> = methods
        .iter()
        .map(|m| (m.as_str(), GlickoState::default()))
        .collect();
    let mut tallies: BTreeMap<&str, (usize, usize, usize)> = methods
        .iter()
        .map(|m| (m.as_str(), (0usize, 0usize, 0usize)))
        .collect();

    for m in matches {
        for (name, score) in [(m.method_a.as_str(), m.score_a), (m.method_b.as_str(), m.score_b())]
        {
            let tally = tallies.get_mut(name).expect("validated");
            if score == 1.0 {
                tally.0 += 1;
            } else if score == 0.5 {
                tally.1 += 1;
            } else {
                tally.2 += 1;
            }
        }
    }

    let mut periods: BTreeMap<usize, Vec<&MatchResult>> = BTreeMap::new();
    match schedule {
        UpdateSchedule::PerRound => {
            for m in matches {
                periods.entry(m.round).or_default().push(m);
            }
        }
        UpdateSchedule::SinglePeriod => {
            periods.insert(0, matches.iter().collect());
        }
    }

    for (_, period_matches) in periods {
        let snapshot = states.clone();
        let mut next = BTreeMap::new();
        for (&name, state) in &snapshot {
            let opponents: Vec<(GlickoState, f64)> = period_matches
                .iter()
                .filter_map(|m| {
                    if m.method_a == name {
                        Some((snapshot[m.method_b.as_str()], m.score_a))
                    } else if m.method_b == name {
                        Some((snapshot[m.method_a.as_str()], m.score_b()))
                    } else {
                        None
                    }
                })
                .collect();
            next.insert(name, glicko2_update(state, &opponents, tau)?);
        }
        states = next;
    }

    let mut rows: Vec<RankRow> = methods
        .iter()
        .map(|method| {
            let state = states[method.as_str()];
            let (wins, draws, losses) = tallies[method.as_str()];
            RankRow {
                method: method.clone(),
                rating: state.rating,
                deviation: state.deviation,
                volatility: state.volatility,
                games: wins + draws + losses,
                wins,
                draws,
                losses,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.rating
            .partial_cmp(&a.rating)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(rows)
}

/// Writes the ranking table CSV:
/// `method,rating,deviation,volatility,games,wins,draws,losses`.
pub fn write_ranking_csv<W: Write>(rows: &[RankRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "method,rating,deviation,volatility,games,wins,draws,losses")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.method,
            row.rating,
            row.deviation,
            row.volatility,
            row.games,
            row.wins,
            row.draws,
            row.losses
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::glicko2::DEFAULT_TAU;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn synthetic_run(
        method: &str,
        function_id: u32,
        dimension: usize,
        final_best: f64,
        budget: usize,
    ) -> RunRecord {
        RunRecord {
            function_id,
            dimension,
            f_opt: 0.0,
            strategy: method.into(),
            seed: 0,
            budget,
            mutation: Default::default(),
            records: Vec::new(),
            sigma_trace: vec![0.1; budget],
            best_so_far: {
                let mut trace = vec![final_best + 1.0; budget];
                *trace.last_mut().unwrap() = final_best;
                trace
            },
            transcripts: Vec::new(),
        }
    }

    fn synthetic_groups(
        methods: &[&str],
        functions: &[u32],
        runs_per_cell: usize,
        budget: usize,
        score_of: impl Fn(&str, u32, usize) -> f64,
    ) -> Vec<RunRecord> {
        let mut records = Vec::new();
        for &method in methods {
            for &function in functions {
                for run in 0..runs_per_cell {
                    records.push(synthetic_run(
                        method,
                        function,
                        2,
                        score_of(method, function, run),
                        budget,
                    ));
                }
            }
        }
        records
    }

    #[test]
    fn lower_final_best_wins() {
        let a = synthetic_run("a", 1, 2, 0.5, 10);
        let b = synthetic_run("b", 1, 2, 0.7, 10);
        assert_eq!(compare_runs(&a, &b, 10).unwrap(), 1.0);
        assert_eq!(compare_runs(&b, &a, 10).unwrap(), 0.0);
    }

    #[test]
    fn exact_equality_draws_and_self_play_draws() {
        let a = synthetic_run("a", 1, 2, 0.7, 10);
        let b = synthetic_run("b", 1, 2, 0.7, 10);
        assert_eq!(compare_runs(&a, &b, 10).unwrap(), 0.5);
        assert_eq!(compare_runs(&a, &a, 10).unwrap(), 0.5);
    }

    #[test]
    fn short_trace_is_an_error() {
        let a = synthetic_run("a", 1, 2, 0.5, 5);
        let b = synthetic_run("b", 1, 2, 0.7, 10);
        assert!(matches!(
            compare_runs(&a, &b, 10),
            Err(Error::TraceTooShort { len: 5, budget: 10 })
        ));
    }

    #[test]
    fn game_counts_follow_the_formula() {
        // 4 methods, 24 functions, 25 rounds: 25 * 24 * 3 = 1800 each.
        let methods = ["a", "b", "c", "d"];
        let functions: Vec<u32> = (1..=24).collect();
        let records = synthetic_groups(&methods, &functions, 2, 10, |_, f, r| {
            f as f64 + r as f64
        });
        let groups = group_runs(&records, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let matches = build_tournament(&groups, 2, 25, 10, &mut rng).unwrap();
        assert_eq!(matches.len(), 25 * 24 * 6);
        let rows = rank(
            &matches,
            &methods.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            UpdateSchedule::PerRound,
            DEFAULT_TAU,
        )
        .unwrap();
        for row in &rows {
            assert_eq!(row.games, 1800);
        }
    }

    #[test]
    fn zero_rounds_yield_no_matches() {
        let records = synthetic_groups(&["a", "b"], &[1], 1, 10, |_, _, _| 0.0);
        let groups = group_runs(&records, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(build_tournament(&groups, 2, 0, 10, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_methods_one_function_three_rounds_is_three_matches() {
        let records = synthetic_groups(&["a", "b"], &[1], 1, 10, |_, _, _| 0.0);
        let groups = group_runs(&records, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let matches = build_tournament(&groups, 2, 3, 10, &mut rng).unwrap();
        assert_eq!(matches.len(), 3);
    }

    #[test]
    fn missing_cells_are_enumerated() {
        let mut records = synthetic_groups(&["a", "b"], &[1, 2, 3], 1, 10, |_, _, _| 0.0);
        records.retain(|r| !(r.strategy == "b" && r.function_id >= 2));
        let groups = group_runs(&records, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        match build_tournament(&groups, 2, 1, 10, &mut rng) {
            Err(Error::MissingCell(msg)) => {
                assert!(
                    msg.contains("('b', function 2)") && msg.contains("('b', function 3)"),
                    "{msg}"
                );
            }
            other => panic!("expected missing cell, got {other:?}"),
        }
    }

    #[test]
    fn all_draws_keep_everyone_at_1500() {
        let records = synthetic_groups(&["a", "b", "c"], &[1, 2], 2, 10, |_, _, _| 1.0);
        let groups = group_runs(&records, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let matches = build_tournament(&groups, 2, 5, 10, &mut rng).unwrap();
        assert!(matches.iter().all(|m| m.score_a == 0.5));
        let rows = rank(
            &matches,
            &["a".into(), "b".into(), "c".into()],
            UpdateSchedule::PerRound,
            DEFAULT_TAU,
        )
        .unwrap();
        for row in rows {
            assert!((row.rating - 1500.0).abs() < 1e-9, "{row:?}");
        }
    }

    #[test]
    fn dominant_method_ranks_first_above_1500() {
        let records = synthetic_groups(&["strong", "weak"], &[1, 2], 2, 10, |m, _, _| {
            if m == "strong" {
                0.0
            } else {
                10.0
            }
        });
        let groups = group_runs(&records, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let matches = build_tournament(&groups, 2, 10, 10, &mut rng).unwrap();
        let rows = rank(
            &matches,
            &["strong".into(), "weak".into()],
            UpdateSchedule::PerRound,
            DEFAULT_TAU,
        )
        .unwrap();
        assert_eq!(rows[0].method, "strong");
        assert!(rows[0].rating > 1500.0);
        assert_eq!(rows[0].losses, 0);
    }

    #[test]
    fn unknown_method_in_matches_is_rejected() {
        let matches = vec![MatchResult {
            method_a: "a".into(),
            method_b: "mystery".into(),
            score_a: 1.0,
            function_id: 1,
            dimension: 2,
            round: 0,
        }];
        assert!(rank(&matches, &["a".into()], UpdateSchedule::PerRound, DEFAULT_TAU).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        // Every match contributes one win+loss or two draws, so the table
        // tallies are zero-sum and the draw count is even.
        #[test]
        fn tallies_are_zero_sum(
            n_methods in 2usize..5,
            n_functions in 1usize..6,
            rounds in 0usize..6,
            seed in any::<u64>(),
        ) {
            let methods: Vec<String> = (0..n_methods).map(|i| format!("m{i}")).collect();
            let method_refs: Vec<&str> = methods.iter().map(String::as_str).collect();
            let functions: Vec<u32> = (1..=n_functions as u32).collect();
            let records = synthetic_groups(&method_refs, &functions, 3, 10, |m, f, r| {
                // Mix of wins, losses, and exact draws across cells.
                ((m.len() + f as usize + r) % 3) as f64
            });
            let groups = group_runs(&records, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let matches = build_tournament(&groups, 2, rounds, 10, &mut rng).unwrap();
            let rows = rank(&matches, &methods, UpdateSchedule::PerRound, DEFAULT_TAU).unwrap();
            let wins: usize = rows.iter().map(|r| r.wins).sum();
            let losses: usize = rows.iter().map(|r| r.losses).sum();
            let draws: usize = rows.iter().map(|r| r.draws).sum();
            prop_assert_eq!(wins, losses);
            prop_assert_eq!(draws % 2, 0);
            let per_method = rounds * n_functions * (n_methods - 1);
            for row in &rows {
                prop_assert_eq!(row.games, per_method);
            }
        }

        // Comparison is ordinal, so rescaling every fitness by a positive
        // constant cannot change any match or the final table.
        #[test]
        fn table_is_invariant_under_positive_rescaling(
            scale in prop::sample::select(vec![0.25f64, 2.0, 10.0, 1e6]),
            seed in any::<u64>(),
        ) {
            let methods = ["a", "b", "c"];
            let functions = [1u32, 2, 3];
            let records = synthetic_groups(&methods, &functions, 3, 10, |m, f, r| {
                (m.len() * 7 + f as usize * 3 + r) as f64
            });
            let mut scaled = records.clone();
            for run in &mut scaled {
                for v in &mut run.best_so_far {
                    *v *= scale;
                }
            }
            let names: Vec<String> = methods.iter().map(|s| s.to_string()).collect();
            let mut rng_a = ChaCha8Rng::seed_from_u64(seed);
            let mut rng_b = ChaCha8Rng::seed_from_u64(seed);
            let matches_a = build_tournament(&group_runs(&records, 2), 2, 4, 10, &mut rng_a).unwrap();
            let matches_b = build_tournament(&group_runs(&scaled, 2), 2, 4, 10, &mut rng_b).unwrap();
            prop_assert_eq!(&matches_a, &matches_b);
            let rows_a = rank(&matches_a, &names, UpdateSchedule::PerRound, DEFAULT_TAU).unwrap();
            let rows_b = rank(&matches_b, &names, UpdateSchedule::PerRound, DEFAULT_TAU).unwrap();
            prop_assert_eq!(rows_a, rows_b);
        }
    }
}
