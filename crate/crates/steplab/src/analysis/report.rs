//! Report export: the CSV files and self-contained SVG renderings built
//! from a set of run records.
//!
//! Files written into the output directory:
//!
//! - `boxplot_data.csv` — `function_id,dimension,method,run_seed,best_fitness`,
//!   one row per run (raw final best fitness);
//! - `sigma_trajectory.csv` — `method,evaluation,mean_sigma,ci_low,ci_high,n`;
//! - `ranking_<dim>.csv` — one Glicko-2 table per dimension;
//! - `sigma_trajectory.svg` — mean step size per evaluation with the
//!   confidence band, log-scaled;
//! - `boxplot_f<id>.svg` — per-function box plots of best fitness above
//!   the target, log-scaled.
//!
//! Log axes use a plotting floor of 1e-12: values at or below the floor
//! are drawn at the floor and footnoted. The floor never alters stored
//! data.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{best_fitness_distribution, FitnessDistribution, TrajectorySummary};
use crate::error::{Error, Result};
use crate::ranking::RankRow;
use crate::record::RunRecord;

/// Plotting-only floor for log-scaled axes.
pub const LOG_PLOT_FLOOR: f64 = 1e-12;

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// One row of `boxplot_data.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxplotRow {
    pub function_id: u32,
    pub dimension: usize,
    pub method: String,
    pub run_seed: u64,
    pub best_fitness: f64,
}

/// Everything the report writer needs.
pub struct ReportData {
    pub boxplot_rows: Vec<BoxplotRow>,
    /// Per (function, method), values are best fitness minus the
    /// instance target (what the log-scaled boxes show).
    pub distributions: Vec<FitnessDistribution>,
    pub trajectories: Vec<TrajectorySummary>,
    /// Ranking tables keyed by dimension.
    pub rankings: Vec<(usize, Vec<RankRow>)>,
}

impl ReportData {
    /// Builds report data from records (empty input yields an empty but
    /// valid report). Rankings are supplied by the caller.
    pub fn from_runs(runs: &[RunRecord], rankings: Vec<(usize, Vec<RankRow>)>) -> Result<Self> {
        let mut boxplot_rows: Vec<BoxplotRow> = runs
            .iter()
            .map(|run| BoxplotRow {
                function_id: run.function_id,
                dimension: run.dimension,
                method: run.strategy.clone(),
                run_seed: run.seed,
                best_fitness: run.final_best(),
            })
            .collect();
        boxplot_rows.sort_by(|a, b| {
            (a.function_id, a.dimension, &a.method, a.run_seed).cmp(&(
                b.function_id,
                b.dimension,
                &b.method,
                b.run_seed,
            ))
        });
        let distributions = if runs.is_empty() {
            Vec::new()
        } else {
            best_fitness_distribution(runs, true)?
        };
        let mut by_method: std::collections::BTreeMap<&str, Vec<&RunRecord>> =
            std::collections::BTreeMap::new();
        for run in runs {
            by_method.entry(&run.strategy).or_default().push(run);
        }
        let trajectories = by_method
            .values()
            .map(|method_runs| crate::analysis::step_size_trajectory(method_runs, 0.95))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReportData {
            boxplot_rows,
            distributions,
            trajectories,
            rankings,
        })
    }
}

/// Writes the whole report and returns the list of files created.
pub fn export_report(data: &ReportData, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = Vec::new();

    let boxplot_path = out_dir.join("boxplot_data.csv");
    let mut csv = String::from("function_id,dimension,method,run_seed,best_fitness\n");
    for row in &data.boxplot_rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.function_id, row.dimension, row.method, row.run_seed, row.best_fitness
        ));
    }
    write_file(&boxplot_path, csv.as_bytes())?;
    manifest.push(boxplot_path);

    let trajectory_path = out_dir.join("sigma_trajectory.csv");
    let mut csv = String::from("method,evaluation,mean_sigma,ci_low,ci_high,n\n");
    for t in &data.trajectories {
        for i in 0..t.mean_sigma.len() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t.method, i, t.mean_sigma[i], t.ci_low[i], t.ci_high[i], t.n
            ));
        }
    }
    write_file(&trajectory_path, csv.as_bytes())?;
    manifest.push(trajectory_path);

    for (dimension, rows) in &data.rankings {
        let path = out_dir.join(format!("ranking_{dimension}.csv"));
        let mut buf = Vec::new();
        crate::ranking::write_ranking_csv(rows, &mut buf).map_err(|e| Error::io(&path, e))?;
        write_file(&path, &buf)?;
        manifest.push(path);
    }

    let svg_path = out_dir.join("sigma_trajectory.svg");
    write_file(&svg_path, trajectory_svg(&data.trajectories).as_bytes())?;
    manifest.push(svg_path);

    let mut function_ids: Vec<u32> = data.distributions.iter().map(|d| d.function_id).collect();
    function_ids.sort_unstable();
    function_ids.dedup();
    for function_id in function_ids {
        let cells: Vec<&FitnessDistribution> = data
            .distributions
            .iter()
            .filter(|d| d.function_id == function_id)
            .collect();
        let path = out_dir.join(format!("boxplot_f{function_id}.svg"));
        write_file(&path, boxplot_svg(function_id, &cells).as_bytes())?;
        manifest.push(path);
    }
    Ok(manifest)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}

struct LogAxis {
    lo: f64,
    hi: f64,
    floored: bool,
}

impl LogAxis {
    fn fit(values: impl Iterator<Item = f64>) -> LogAxis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut floored = false;
        for v in values {
            let clipped = if v <= LOG_PLOT_FLOOR {
                floored = true;
                LOG_PLOT_FLOOR
            } else {
                v
            };
            let l = clipped.log10();
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = -1.0;
            hi = 1.0;
        }
        if hi - lo < 0.5 {
            lo -= 0.25;
            hi += 0.25;
        }
        LogAxis { lo, hi, floored }
    }

    /// Maps a value to a y pixel in [top, bottom] (SVG y grows downward).
    fn y(&self, value: f64, top: f64, bottom: f64) -> f64 {
        let l = value.max(LOG_PLOT_FLOOR).log10().clamp(self.lo, self.hi);
        bottom - (l - self.lo) / (self.hi - self.lo) * (bottom - top)
    }

    fn ticks(&self) -> Vec<i32> {
        let lo = self.lo.ceil() as i32;
        let hi = self.hi.floor() as i32;
        let span = (hi - lo).max(1);
        let step = (span / 6).max(1);
        (lo..=hi).step_by(step as usize).collect()
    }
}

fn svg_header(width: u32, height: u32, title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        width / 2
    )
}

fn axis_frame(left: f64, top: f64, right: f64, bottom: f64) -> String {
    format!(
        "<line x1=\"{left}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{bottom}\" stroke=\"black\"/>\n\
         <line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"black\"/>\n"
    )
}

/// Mean step size per evaluation for every method, with shaded bands.
pub(crate) fn trajectory_svg(trajectories: &[TrajectorySummary]) -> String {
    let (width, height) = (840u32, 460u32);
    let (left, top, right, bottom) = (70.0, 40.0, 810.0, 410.0);
    let mut svg = svg_header(width, height, "Mean step size per evaluation (log scale)");
    svg.push_str(&axis_frame(left, top, right, bottom));

    let budget = trajectories
        .iter()
        .map(|t| t.mean_sigma.len())
        .max()
        .unwrap_or(0);
    if budget == 0 {
        svg.push_str("<text x=\"420\" y=\"230\" text-anchor=\"middle\">no data</text>\n</svg>\n");
        return svg;
    }
    let axis = LogAxis::fit(
        trajectories
            .iter()
            .flat_map(|t| {
                t.mean_sigma
                    .iter()
                    .chain(t.ci_low.iter())
                    .chain(t.ci_high.iter())
            })
            .copied(),
    );
    let x = |i: usize| left + i as f64 / (budget.max(2) - 1) as f64 * (right - left);

    for tick in axis.ticks() {
        let y = axis.y(10f64.powi(tick), top, bottom);
        svg.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{y:.1}\" x2=\"{r}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{tx}\" y=\"{ty:.1}\" text-anchor=\"end\">1e{tick}</text>\n",
            l = left,
            r = right,
            tx = left - 6.0,
            ty = y + 4.0
        ));
    }
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let i = ((budget - 1) as f64 * frac) as usize;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            x(i),
            bottom + 16.0,
            i
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">evaluation</text>\n",
        (left + right) / 2.0,
        bottom + 34.0
    ));

    for (idx, t) in trajectories.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        // Shaded confidence band.
        let mut band = String::from("<polygon points=\"");
        for (i, &v) in t.ci_high.iter().enumerate() {
            band.push_str(&format!("{:.1},{:.1} ", x(i), axis.y(v, top, bottom)));
        }
        for (i, &v) in t.ci_low.iter().enumerate().rev() {
            band.push_str(&format!("{:.1},{:.1} ", x(i), axis.y(v, top, bottom)));
        }
        band.push_str(&format!("\" fill=\"{color}\" fill-opacity=\"0.18\" stroke=\"none\"/>\n"));
        svg.push_str(&band);
        // Solid mean line.
        let mut line = String::from("<polyline points=\"");
        for (i, &v) in t.mean_sigma.iter().enumerate() {
            line.push_str(&format!("{:.1},{:.1} ", x(i), axis.y(v, top, bottom)));
        }
        line.push_str(&format!(
            "\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        ));
        svg.push_str(&line);
        let legend_y = top + 16.0 * idx as f64;
        svg.push_str(&format!(
            "<rect x=\"{lx}\" y=\"{ly:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{tx}\" y=\"{ty:.1}\">{label} (n={n})</text>\n",
            lx = left + 10.0,
            ly = legend_y,
            tx = left + 26.0,
            ty = legend_y + 10.0,
            label = t.method,
            n = t.n
        ));
    }
    if axis.floored {
        svg.push_str(&format!(
            "<text x=\"{left}\" y=\"{}\" font-size=\"10\">* values at or below 1e-12 are drawn at the axis floor</text>\n",
            bottom + 48.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Box plots of best fitness above the target for one function, one box
/// per method, log-scaled.
pub(crate) fn boxplot_svg(function_id: u32, cells: &[&FitnessDistribution]) -> String {
    let (width, height) = (640u32, 420u32);
    let (left, top, right, bottom) = (70.0, 40.0, 610.0, 360.0);
    let mut svg = svg_header(
        width,
        height,
        &format!("f{function_id}: best fitness reached (log scale, target-relative)"),
    );
    svg.push_str(&axis_frame(left, top, right, bottom));
    if cells.is_empty() {
        svg.push_str("<text x=\"320\" y=\"200\" text-anchor=\"middle\">no data</text>\n</svg>\n");
        return svg;
    }
    let axis = LogAxis::fit(cells.iter().flat_map(|c| c.values.iter().copied()));
    for tick in axis.ticks() {
        let y = axis.y(10f64.powi(tick), top, bottom);
        svg.push_str(&format!(
            "<line x1=\"{l}\" y1=\"{y:.1}\" x2=\"{r}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{tx}\" y=\"{ty:.1}\" text-anchor=\"end\">1e{tick}</text>\n",
            l = left,
            r = right,
            tx = left - 6.0,
            ty = y + 4.0
        ));
    }
    let slot = (right - left) / cells.len() as f64;
    for (idx, cell) in cells.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let center = left + slot * (idx as f64 + 0.5);
        let half = (slot * 0.3).min(40.0);
        let y_min = axis.y(cell.min, top, bottom);
        let y_q1 = axis.y(cell.q1, top, bottom);
        let y_med = axis.y(cell.median, top, bottom);
        let y_q3 = axis.y(cell.q3, top, bottom);
        let y_max = axis.y(cell.max, top, bottom);
        svg.push_str(&format!(
            "<line x1=\"{center:.1}\" y1=\"{y_min:.1}\" x2=\"{center:.1}\" y2=\"{y_max:.1}\" stroke=\"{color}\"/>\n"
        ));
        for y in [y_min, y_max] {
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{color}\"/>\n",
                center - half * 0.5,
                center + half * 0.5
            ));
        }
        svg.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" \
             fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"{color}\"/>\n",
            center - half,
            y_q3,
            half * 2.0,
            (y_q1 - y_q3).max(0.5)
        ));
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y_med:.1}\" x2=\"{:.1}\" y2=\"{y_med:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            center - half,
            center + half
        ));
        let floored_cell = cell.values.iter().any(|&v| v <= LOG_PLOT_FLOOR);
        svg.push_str(&format!(
            "<text x=\"{center:.1}\" y=\"{}\" text-anchor=\"middle\">{}{}</text>\n",
            bottom + 16.0,
            cell.method,
            if floored_cell { " *" } else { "" }
        ));
    }
    if axis.floored {
        svg.push_str(&format!(
            "<text x=\"{left}\" y=\"{}\" font-size=\"10\">* values at or below 1e-12 are drawn at the axis floor</text>\n",
            bottom + 40.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::RunRecord;

    fn run(method: &str, function_id: u32, dimension: usize, seed: u64, best: f64) -> RunRecord {
        RunRecord {
            function_id,
            dimension,
            f_opt: 1.0,
            strategy: method.into(),
            seed,
            budget: 3,
            mutation: Default::default(),
            records: Vec::new(),
            sigma_trace: vec![0.1, 0.1, 0.1],
            best_so_far: vec![best + 2.0, best, best],
            transcripts: Vec::new(),
        }
    }

    #[test]
    fn empty_report_has_valid_headers() {
        let dir = tempfile::tempdir().unwrap();
        let data = ReportData::from_runs(&[], Vec::new()).unwrap();
        let manifest = export_report(&data, dir.path()).unwrap();
        let boxplot = std::fs::read_to_string(dir.path().join("boxplot_data.csv")).unwrap();
        assert_eq!(boxplot, "function_id,dimension,method,run_seed,best_fitness\n");
        let trajectory = std::fs::read_to_string(dir.path().join("sigma_trajectory.csv")).unwrap();
        assert_eq!(trajectory, "method,evaluation,mean_sigma,ci_low,ci_high,n\n");
        assert!(manifest.iter().any(|p| p.ends_with("sigma_trajectory.svg")));
    }

    #[test]
    fn two_methods_appear_as_two_series() {
        let dir = tempfile::tempdir().unwrap();
        let runs = vec![
            run("constant", 1, 2, 1, 5.0),
            run("constant", 1, 2, 2, 6.0),
            run("one-fifth", 1, 2, 1, 4.0),
            run("one-fifth", 1, 2, 2, 3.0),
        ];
        let data = ReportData::from_runs(&runs, Vec::new()).unwrap();
        export_report(&data, dir.path()).unwrap();
        let trajectory = std::fs::read_to_string(dir.path().join("sigma_trajectory.csv")).unwrap();
        let methods: std::collections::BTreeSet<&str> = trajectory
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(methods.len(), 2);
        assert!(methods.contains("constant") && methods.contains("one-fifth"));
    }

    #[test]
    fn csv_rows_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut alt = run("constant", 1, 2, 8, 5.0);
        alt.sigma_trace = vec![0.1, 1.0 / 3.0, 0.7];
        let runs = vec![run("constant", 1, 2, 7, 0.1 + 0.2), alt];
        let data = ReportData::from_runs(&runs, Vec::new()).unwrap();
        export_report(&data, dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("boxplot_data.csv")).unwrap();
        let row = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[4].parse::<f64>().unwrap(), 0.1 + 0.2);

        // The trajectory CSV re-parses to the exact values exported.
        let text = std::fs::read_to_string(dir.path().join("sigma_trajectory.csv")).unwrap();
        let summary = &data.trajectories[0];
        for (i, line) in text.lines().skip(1).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields[1].parse::<usize>().unwrap(), i);
            assert_eq!(fields[2].parse::<f64>().unwrap(), summary.mean_sigma[i]);
            assert_eq!(fields[3].parse::<f64>().unwrap(), summary.ci_low[i]);
            assert_eq!(fields[4].parse::<f64>().unwrap(), summary.ci_high[i]);
        }
    }

    #[test]
    fn zero_regret_values_floor_with_footnote() {
        // Final best equal to the target: regret exactly zero.
        let mut zero = run("constant", 5, 2, 1, 1.0);
        zero.f_opt = 1.0;
        let other = run("one-fifth", 5, 2, 1, 9.0);
        let data = ReportData::from_runs(&[zero, other], Vec::new()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_report(&data, dir.path()).unwrap();
        let svg = std::fs::read_to_string(dir.path().join("boxplot_f5.svg")).unwrap();
        assert!(svg.contains("axis floor"), "footnote missing");
    }

    #[test]
    fn ranking_tables_are_written_per_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![RankRow {
            method: "constant".into(),
            rating: 1500.0,
            deviation: 350.0,
            volatility: 0.06,
            games: 0,
            wins: 0,
            draws: 0,
            losses: 0,
        }];
        let data = ReportData::from_runs(&[], vec![(2, rows)]).unwrap();
        let manifest = export_report(&data, dir.path()).unwrap();
        assert!(manifest.iter().any(|p| p.ends_with("ranking_2.csv")));
        let text = std::fs::read_to_string(dir.path().join("ranking_2.csv")).unwrap();
        assert!(text.starts_with("method,rating,deviation,volatility,games,wins,draws,losses"));
    }
}
