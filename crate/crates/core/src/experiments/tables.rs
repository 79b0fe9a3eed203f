//! Batch experiments: single runs, the refinement ladders, tension sweeps and
//! the stencil limit report.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csv::{emit_csv, fmt_f64, write_atomic};
use crate::diagnostics::RunRecord;
use crate::error::Result;
use crate::fitting::Grid;
use crate::solver::{ProblemSpec, RunOutcome, Solver};
use crate::spline_basis::{EvalPath, NodalStencils, SplineBasis};

/// `(h, Δt)` pairs of the refinement ladder.
pub const LADDER: [(f64, f64); 4] = [(0.2, 0.05), (0.1, 0.02), (0.05, 0.01), (0.02, 0.005)];

/// Time at which ladder rows are reported.
pub const LADDER_TIME: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LadderRow {
    pub h: f64,
    pub dt: f64,
    pub rho: f64,
    pub linf: f64,
    pub c_e: f64,
    pub c_p: f64,
    /// Observed order against the previous row, `ln(e_prev/e)/ln(h_prev/h)`.
    pub order: Option<f64>,
    pub error: Option<String>,
}

impl LadderRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

fn outcome_error(out: &RunOutcome) -> Option<String> {
    out.failure.as_ref().map(|e| e.to_string())
}

/// Runs every ladder row to `t = 10` for the first tension of `config`.
pub fn run_ladder(config: &ExperimentConfig) -> Vec<LadderRow> {
    let rho = config.rho[0];
    let mut rows: Vec<LadderRow> = LADDER
        .par_iter()
        .map(|&(h, dt)| {
            let run = || -> Result<RunOutcome> {
                let spec = ProblemSpec {
                    grid: Grid::with_spacing(config.a, config.b, h)?,
                    dt,
                    rho,
                    wave_speed: config.speed,
                    t_final: LADDER_TIME,
                };
                Solver::new(spec)?.run(usize::MAX)
            };
            let (last, error) = match run() {
                Ok(out) => (out.final_record().copied(), outcome_error(&out)),
                Err(e) => (None, Some(e.to_string())),
            };
            let last = last.filter(|_| error.is_none());
            LadderRow {
                h,
                dt,
                rho,
                linf: last.map_or(f64::NAN, |r| r.linf),
                c_e: last.map_or(f64::NAN, |r| r.c_e),
                c_p: last.map_or(f64::NAN, |r| r.c_p),
                order: None,
                error,
            }
        })
        .collect();
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        let order = (prev.linf / cur.linf).ln() / (prev.h / cur.h).ln();
        rows[k].order = Some(order).filter(|o| o.is_finite());
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn format_table1(rows: &[LadderRow]) -> String {
    let mut out = String::from("h,dt,rho,linf_x1e3,order,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.h,
            r.dt,
            r.rho,
            fmt_f64(r.linf * 1e3),
            opt(r.order),
            r.error.as_deref().unwrap_or("")
        );
    }
    out
}

pub fn format_table2(rows: &[LadderRow]) -> String {
    let mut out = String::from("h,dt,rho,C_P,C_E,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.h,
            r.dt,
            r.rho,
            fmt_f64(r.c_p),
            fmt_f64(r.c_e),
            r.error.as_deref().unwrap_or("")
        );
    }
    out
}

/// Maximum nodal error at `t = 10` with observed orders; writes
/// `table1.csv`.
pub fn run_table1(config: &ExperimentConfig) -> Result<Vec<LadderRow>> {
    let rows = run_ladder(config);
    write_atomic(&config.out.join("table1.csv"), &format_table1(&rows))?;
    Ok(rows)
}

/// Relative energy and momentum drift at `t = 10`; writes `table2.csv`.
pub fn run_table2(config: &ExperimentConfig) -> Result<Vec<LadderRow>> {
    let rows = run_ladder(config);
    write_atomic(&config.out.join("table2.csv"), &format_table2(&rows))?;
    Ok(rows)
}

/// Single run for the first tension in `config`; writes `run.csv`.
pub fn run_single(config: &ExperimentConfig) -> Result<RunOutcome> {
    let solver = Solver::new(config.spec_for(config.rho[0])?)?;
    let out = solver.run(config.observe_every)?;
    emit_csv(&out.records, &config.out.join("run.csv"))?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub path: EvalPath,
    /// Error at `t = 10` when that time was observed.
    pub linf_t10: Option<f64>,
    pub final_record: Option<RunRecord>,
    pub file: PathBuf,
    pub error: Option<String>,
}

pub fn sweep_file_name(rho: f64) -> String {
    format!("rho_{rho:e}.csv")
}

/// One full run per tension, each written to its own CSV, plus
/// `rho_sweep_summary.csv`.
pub fn rho_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let rows: Vec<SweepRow> = config
        .rho
        .par_iter()
        .map(|&rho| {
            let file = config.out.join(sweep_file_name(rho));
            let path = EvalPath::for_tension(rho * config.h);
            let run = || -> Result<RunOutcome> {
                let out = Solver::new(config.spec_for(rho)?)?.run(config.observe_every)?;
                emit_csv(&out.records, &file)?;
                Ok(out)
            };
            match run() {
                Ok(out) => SweepRow {
                    rho,
                    path,
                    linf_t10: out
                        .records
                        .iter()
                        .find(|r| (r.t - LADDER_TIME).abs() < 1e-9)
                        .map(|r| r.linf),
                    final_record: out.final_record().copied(),
                    error: outcome_error(&out),
                    file,
                },
                Err(e) => SweepRow {
                    rho,
                    path,
                    linf_t10: None,
                    final_record: None,
                    error: Some(e.to_string()),
                    file,
                },
            }
        })
        .collect();

    let mut summary = String::from("rho,path,linf_t10,t_final,linf_final,C_E_final,C_P_final,error\n");
    for r in &rows {
        let f = r.final_record;
        let _ = writeln!(
            summary,
            "{},{:?},{},{},{},{},{},{}",
            fmt_f64(r.rho),
            r.path,
            opt(r.linf_t10),
            opt(f.map(|f| f.t)),
            opt(f.map(|f| f.linf)),
            opt(f.map(|f| f.c_e)),
            opt(f.map(|f| f.c_p)),
            r.error.as_deref().unwrap_or("")
        );
    }
    write_atomic(&config.out.join("rho_sweep_summary.csv"), &summary)?;
    Ok(rows)
}

/// Same run as [`Solver::new`] but with the collocation rows built from the
/// polynomial cubic B-spline weights.
pub fn polynomial_limit_solver(spec: ProblemSpec) -> Result<Solver> {
    let basis = SplineBasis::new(spec.rho, spec.grid.h)?;
    Solver::with_stencils(spec, basis, NodalStencils::polynomial_limit(spec.grid.h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitsRow {
    pub rho: f64,
    pub h: f64,
    pub path: EvalPath,
    pub stencils: NodalStencils,
    pub limit: NodalStencils,
}

pub fn limits(config: &ExperimentConfig) -> Result<Vec<LimitsRow>> {
    config
        .rho
        .iter()
        .map(|&rho| {
            let b = SplineBasis::new(rho, config.h)?;
            Ok(LimitsRow {
                rho,
                h: config.h,
                path: b.eval_path,
                stencils: b.stencils(),
                limit: NodalStencils::polynomial_limit(config.h),
            })
        })
        .collect()
}

pub fn format_limits(rows: &[LimitsRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "rho = {:e}, h = {}, rho*h = {:e}, path = {:?}", r.rho, r.h, r.rho * r.h, r.path);
        let pairs = [
            ("alpha1", r.stencils.alpha1, r.limit.alpha1),
            ("beta1", r.stencils.beta1, r.limit.beta1),
            ("gamma1", r.stencils.gamma1, r.limit.gamma1),
            ("gamma2", r.stencils.gamma2, r.limit.gamma2),
        ];
        for (name, v, l) in pairs {
            let _ = writeln!(
                out,
                "  {name:<7} {v:>24.16e}  limit {l:>24.16e}  rel diff {:.3e}",
                ((v - l) / l).abs()
            );
        }
    }
    out
}
