//! Glicko-2 rating engine and fixed-budget tournament builder.

mod glicko2;
mod tournament;

pub use glicko2::{glicko2_update, inflate_deviation, GlickoState, DEFAULT_TAU, GLICKO2_SCALE};
pub use tournament::{
    build_tournament, compare_runs, group_runs, rank, write_ranking_csv, MatchResult, RankRow,
    RunGroups, UpdateSchedule,
};
