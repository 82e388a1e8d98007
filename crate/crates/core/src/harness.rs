//! Convergence sweeps over `(r, N)` grids, reproduction of the published
//! convergence tables, and DCC figure data.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::observed_order;
use crate::dcc::dcc_row;
use crate::error::{Error, Result};
use crate::kernels::{KernelTable, Scheme};
use crate::meshes::{graded_mesh, Mesh};
use crate::solver::{
    solve_ode, solve_pde, OdeProblem, PdeProblem, Trajectory, DEFAULT_SPACE_INTERVALS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Ode,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// `n = 1`.
    Begin,
    /// `n = N`.
    End,
    /// Maximum over all levels.
    Max,
}

fn default_m() -> usize {
    DEFAULT_SPACE_INTERVALS
}

fn default_horizon() -> f64 {
    1.0
}

fn default_levels() -> Vec<Level> {
    vec![Level::End]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub r_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub problem: ProblemKind,
    #[serde(default = "default_m", rename = "M")]
    pub space_intervals: usize,
    #[serde(default = "default_levels")]
    pub report_levels: Vec<Level>,
    #[serde(default = "default_horizon", rename = "T")]
    pub horizon: f64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_list.is_empty() || self.n_list.is_empty() || self.report_levels.is_empty() {
            return Err(Error::Config(
                "r_list, n_list and report_levels must be nonempty".into(),
            ));
        }
        for w in self.n_list.windows(2) {
            if w[1] != 2 * w[0] {
                return Err(Error::Config(format!(
                    "n_list must double at each step, found {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        if self.n_list[0] == 0 {
            return Err(Error::Config("N must be positive".into()));
        }
        Ok(())
    }
}

/// `r* = (2-alpha)/(1+beta-alpha)`.
pub fn critical_grading(alpha: f64, beta: f64) -> f64 {
    (2.0 - alpha) / (1.0 + beta - alpha)
}

/// Predicted pointwise order at the requested level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoOrder {
    pub r: f64,
    pub level: Level,
    pub order: f64,
    /// The estimate carries a `(1 + ln N)` factor.
    pub log_factor: bool,
}

/// Orders from the pointwise error estimate on graded meshes:
/// `r beta` at the first level, `min(2-alpha, r(1+beta-alpha))` at the last
/// (with a log factor at `r = r*`), and `min(r beta, 2-alpha)` for the maximum.
pub fn theoretical_order(alpha: f64, beta: f64, r: f64, level: Level) -> TheoOrder {
    let beta_eff = beta.min(1.0);
    let rstar = critical_grading(alpha, beta_eff);
    let (order, log_factor) = match level {
        Level::Begin => ((r * beta_eff).min(2.0 - alpha), false),
        Level::End => (
            (r * (1.0 + beta_eff - alpha)).min(2.0 - alpha),
            (r - rstar).abs() < 1e-9,
        ),
        Level::Max => ((r * beta_eff).min(2.0 - alpha), false),
    };
    TheoOrder {
        r,
        level,
        order,
        log_factor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub r: f64,
    pub n: usize,
    pub level: Level,
    pub error: f64,
    /// Observed order against the previous `N`; absent for the first.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: SweepConfig,
    pub rows: Vec<ReportRow>,
    pub theo: Vec<TheoOrder>,
}

impl ConvergenceReport {
    pub fn column(&self, r: f64, level: Level) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|row| row.r == r && row.level == level)
            .collect()
    }
}

fn solve_cell(config: &SweepConfig, mesh: Mesh) -> Result<Trajectory> {
    match config.problem {
        ProblemKind::Ode => solve_ode(&OdeProblem {
            alpha: config.alpha,
            beta: config.beta,
            kappa: config.kappa,
            mesh,
        }),
        ProblemKind::Pde => solve_pde(&PdeProblem {
            alpha: config.alpha,
            beta: config.beta,
            kappa: config.kappa,
            mesh,
            space_intervals: config.space_intervals,
        }),
    }
}

fn level_error(t: &Trajectory, level: Level) -> f64 {
    match level {
        Level::Begin => t.begin_error(),
        Level::End => t.end_error(),
        Level::Max => t.max_error(),
    }
}

/// Runs every `(r, N)` cell (in parallel) and assembles the rows in config order.
pub fn run_sweep(config: &SweepConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let cells: Vec<(f64, usize)> = config
        .r_list
        .iter()
        .flat_map(|&r| config.n_list.iter().map(move |&n| (r, n)))
        .collect();
    let errors: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(r, n)| {
            let wrap = |e: Error| Error::Sweep {
                r,
                n,
                source: Box::new(e),
            };
            let mesh = graded_mesh(config.horizon, n, r).map_err(wrap)?;
            let traj = solve_cell(config, mesh).map_err(wrap)?;
            log::debug!("solved r={r} N={n}");
            Ok(config
                .report_levels
                .iter()
                .map(|&lv| level_error(&traj, lv))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut theo = Vec::new();
    for (ri, &r) in config.r_list.iter().enumerate() {
        for (li, &level) in config.report_levels.iter().enumerate() {
            theo.push(theoretical_order(config.alpha, config.beta, r, level));
            let mut prev: Option<f64> = None;
            for (ni, &n) in config.n_list.iter().enumerate() {
                let error = errors[ri * config.n_list.len() + ni][li];
                let order = match prev {
                    Some(p) => Some(observed_order(p, error)?),
                    None => None,
                };
                rows.push(ReportRow {
                    r,
                    n,
                    level,
                    error,
                    order,
                });
                prev = Some(error);
            }
        }
    }
    Ok(ConvergenceReport {
        config: config.clone(),
        rows,
        theo,
    })
}

/// Scientific notation with four significant digits and a two-digit exponent,
/// e.g. `1.335e-01`.
pub fn sci4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.3e}");
    }
    let s = format!("{x:.3e}");
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn report_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("r,N,level,error,order,theo\n");
    for row in &report.rows {
        let theo = report
            .theo
            .iter()
            .find(|t| t.r == row.r && t.level == row.level)
            .map(|t| format!("{:.3}", t.order))
            .unwrap_or_default();
        let order = row.order.map(|o| format!("{o:.3}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.r,
            row.n,
            level_name(row.level),
            sci4(row.error),
            order,
            theo
        );
    }
    out
}

fn level_name(level: Level) -> &'static str {
    match level {
        Level::Begin => "begin",
        Level::End => "end",
        Level::Max => "max",
    }
}

/// One published table: its sweep and printed `(error, order)` per `r` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablePreset {
    pub which: u8,
    pub config: SweepConfig,
    pub level: Level,
    /// `printed[column][row] = (error, order)`, rows `N = 64..512`.
    pub printed: Vec<Vec<(f64, Option<f64>)>>,
}

const TABLE_N: [usize; 4] = [64, 128, 256, 512];

fn printed(which: u8) -> Vec<Vec<(f64, Option<f64>)>> {
    let cols: [[(f64, Option<f64>); 4]; 3] = match which {
        1 => [
            [
                (1.335e-1, None),
                (1.056e-1, Some(0.338)),
                (8.429e-2, Some(0.325)),
                (6.771e-2, Some(0.316)),
            ],
            [
                (3.574e-2, None),
                (2.350e-2, Some(0.605)),
                (1.548e-2, Some(0.602)),
                (1.021e-2, Some(0.601)),
            ],
            [
                (1.021e-2, None),
                (5.467e-3, Some(0.901)),
                (2.929e-3, Some(0.900)),
                (1.570e-3, Some(0.900)),
            ],
        ],
        2 => [
            [
                (1.653e-1, None),
                (1.039e-1, Some(0.670)),
                (6.484e-2, Some(0.680)),
                (4.027e-2, Some(0.687)),
            ],
            [
                (2.831e-2, None),
                (1.203e-2, Some(1.235)),
                (5.043e-3, Some(1.254)),
                (2.092e-3, Some(1.269)),
            ],
            [
                (1.546e-2, None),
                (5.882e-3, Some(1.394)),
                (2.233e-3, Some(1.398)),
                (8.466e-4, Some(1.399)),
            ],
        ],
        3 => [
            [
                (2.192e-1, None),
                (1.781e-1, Some(0.300)),
                (1.446e-1, Some(0.300)),
                (1.175e-1, Some(0.300)),
            ],
            [
                (6.296e-2, None),
                (4.154e-2, Some(0.600)),
                (2.740e-2, Some(0.600)),
                (1.808e-2, Some(0.600)),
            ],
            [
                (3.374e-2, None),
                (2.006e-2, Some(0.750)),
                (1.193e-2, Some(0.750)),
                (7.093e-3, Some(0.750)),
            ],
        ],
        _ => [
            [
                (4.528e-2, None),
                (2.783e-2, Some(0.702)),
                (1.711e-2, Some(0.702)),
                (1.052e-2, Some(0.701)),
            ],
            [
                (8.350e-3, None),
                (3.480e-3, Some(1.263)),
                (1.433e-3, Some(1.280)),
                (5.816e-4, Some(1.301)),
            ],
            [
                (6.046e-3, None),
                (2.337e-3, Some(1.371)),
                (8.934e-4, Some(1.387)),
                (3.354e-4, Some(1.413)),
            ],
        ],
    };
    cols.iter().map(|c| c.to_vec()).collect()
}

/// Preset for table `which` (1..=4).
///
/// The printed values are reproduced by `alpha = 0.6, beta = 0.3`, for which
/// `r* = 2`; the spatial tables use `r = 2.5` in their last column.
/// `labeled` instead runs `alpha = 0.3, beta = 0.6` with `r = 1, r*, r*+1`.
pub fn table_preset(which: u8, labeled: bool) -> Result<TablePreset> {
    if !(1..=4).contains(&which) {
        return Err(Error::Config(format!("no table {which}; expected 1..=4")));
    }
    let problem = if which <= 2 {
        ProblemKind::Ode
    } else {
        ProblemKind::Pde
    };
    let level = if which % 2 == 1 {
        Level::Begin
    } else {
        Level::End
    };
    let (alpha, beta, r_list) = if labeled {
        let rstar = critical_grading(0.3, 0.6);
        (0.3, 0.6, vec![1.0, rstar, rstar + 1.0])
    } else if problem == ProblemKind::Ode {
        (0.6, 0.3, vec![1.0, 2.0, 3.0])
    } else {
        (0.6, 0.3, vec![1.0, 2.0, 2.5])
    };
    Ok(TablePreset {
        which,
        config: SweepConfig {
            alpha,
            beta,
            kappa: 1.0,
            r_list,
            n_list: TABLE_N.to_vec(),
            problem,
            space_intervals: DEFAULT_SPACE_INTERVALS,
            report_levels: vec![level],
            horizon: 1.0,
        },
        level,
        printed: printed(which),
    })
}

/// Comparison of one reproduced cell against the printed table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub r: f64,
    pub n: usize,
    pub error: f64,
    pub printed_error: f64,
    pub rel_dev: f64,
    pub order: Option<f64>,
    pub printed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub preset: TablePreset,
    pub report: ConvergenceReport,
    pub cells: Vec<CellComparison>,
    pub gate: f64,
    /// Every column's order at the largest `N` is within `gate` of the printed one.
    pub gate_pass: bool,
}

pub const DEFAULT_ORDER_GATE: f64 = 0.05;

pub fn reproduce_table(which: u8, labeled: bool, gate: f64) -> Result<TableReport> {
    let preset = table_preset(which, labeled)?;
    let report = run_sweep(&preset.config)?;
    let mut cells = Vec::new();
    let mut gate_pass = true;
    for (ci, &r) in preset.config.r_list.iter().enumerate() {
        let column = report.column(r, preset.level);
        for (row, &(printed_error, printed_order)) in column.iter().zip(&preset.printed[ci]) {
            cells.push(CellComparison {
                r,
                n: row.n,
                error: row.error,
                printed_error,
                rel_dev: (row.error - printed_error).abs() / printed_error,
                order: row.order,
                printed_order,
            });
        }
        if let (Some(last), Some(&(_, Some(po)))) = (column.last(), preset.printed[ci].last()) {
            if row_order_off(last.order, po, gate) {
                gate_pass = false;
            }
        }
    }
    Ok(TableReport {
        preset,
        report,
        cells,
        gate,
        gate_pass,
    })
}

fn row_order_off(order: Option<f64>, printed: f64, gate: f64) -> bool {
    order.map_or(true, |o| !((o - printed).abs() <= gate))
}

pub fn table_csv(t: &TableReport) -> String {
    let mut out = String::from("r,N,error,printed_error,rel_dev,order,printed_order\n");
    for c in &t.cells {
        let fmt = |o: Option<f64>| o.map(|v| format!("{v:.3}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{:.4},{},{}",
            c.r,
            c.n,
            sci4(c.error),
            sci4(c.printed_error),
            c.rel_dev,
            fmt(c.order),
            fmt(c.printed_order)
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub k: usize,
    pub p: f64,
    pub p_tilde: f64,
    pub q: f64,
}

/// `(k, p^{(n)}_{n-k}, p~^{(n)}_{n-k}, q)` for `k = 1..=n`.
pub fn figure_data(mesh: &Mesh, alpha: f64, n: usize) -> Result<Vec<FigureRow>> {
    let table = KernelTable::build_to(mesh, Scheme::L1, alpha, n)?;
    let d = dcc_row(&table, n)?;
    Ok((0..n)
        .map(|i| FigureRow {
            k: i + 1,
            p: d.p[i],
            p_tilde: d.p_tilde[i],
            q: d.q[i],
        })
        .collect())
}

pub fn figure_csv(rows: &[FigureRow]) -> String {
    let mut out = String::from("k,p,p_tilde,q\n");
    for r in rows {
        let _ = writeln!(out, "{},{:e},{:e},{:e}", r.k, r.p, r.p_tilde, r.q);
    }
    out
}
