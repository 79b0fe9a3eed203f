use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use kge_core::experiments::{self, tables, ExperimentConfig, ExperimentKind};

/// Exponential B-spline collocation experiments for the cubic Klein-Gordon
/// kink.
#[derive(Debug, Parser)]
#[command(name = "kge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single run; writes run.csv
    Run(Flags),
    /// Nodal maximum error ladder at t = 10; writes table1.csv
    Table1(Flags),
    /// Energy/momentum drift ladder at t = 10; writes table2.csv
    Table2(Flags),
    /// One run per --rho value; writes rho_<value>.csv and a summary
    RhoSweep(Flags),
    /// Print stencil weights next to their polynomial limits
    Limits(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Left end of the domain
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Right end of the domain
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Number of elements N (the grid has N + 1 nodes)
    #[arg(long, conflicts_with = "h")]
    nodes: Option<String>,
    /// Mesh spacing
    #[arg(long)]
    h: Option<String>,
    /// Time step
    #[arg(long)]
    dt: Option<String>,
    /// Tension parameter; repeat for sweeps
    #[arg(long, allow_hyphen_values = true)]
    rho: Vec<String>,
    /// Kink velocity c, |c| < 1
    #[arg(long, allow_hyphen_values = true)]
    speed: Option<String>,
    /// Final time
    #[arg(long)]
    t_final: Option<String>,
    /// Observation cadence in steps
    #[arg(long)]
    observe_every: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = Vec::new();
        let scalars = [
            ("a", &self.a),
            ("b", &self.b),
            ("nodes", &self.nodes),
            ("h", &self.h),
            ("dt", &self.dt),
            ("speed", &self.speed),
            ("t_final", &self.t_final),
            ("observe_every", &self.observe_every),
        ];
        for (k, v) in scalars {
            if let Some(v) = v {
                o.push((k.to_string(), v.clone()));
            }
        }
        for r in &self.rho {
            o.push(("rho".to_string(), r.clone()));
        }
        if let Some(p) = &self.out {
            o.push(("out".to_string(), p.display().to_string()));
        }
        o
    }

    fn load(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => Some(
                std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?,
            ),
            None => None,
        };
        let mut overrides = self.overrides();
        overrides.push(("kind".into(), kind_name(kind).into()));
        Ok(experiments::parse_config(text.as_deref(), &overrides)?)
    }
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Single => "single",
        ExperimentKind::Table1 => "table1",
        ExperimentKind::Table2 => "table2",
        ExperimentKind::RhoSweep => "rho-sweep",
        ExperimentKind::Limits => "limits",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns `Ok(false)` when a run failed but output was still written.
fn dispatch(command: Command) -> Result<bool> {
    let (flags, kind) = match &command {
        Command::Run(f) => (f, ExperimentKind::Single),
        Command::Table1(f) => (f, ExperimentKind::Table1),
        Command::Table2(f) => (f, ExperimentKind::Table2),
        Command::RhoSweep(f) => (f, ExperimentKind::RhoSweep),
        Command::Limits(f) => (f, ExperimentKind::Limits),
    };
    let config = flags.load(kind)?;
    match config.kind {
        ExperimentKind::Single => {
            let out = experiments::run_single(&config)?;
            if let Some(r) = out.final_record() {
                println!(
                    "t = {}  linf = {:.6e}  E = {:.10}  P = {:.10}  C_E = {:.4e}  C_P = {:.4e}",
                    r.t, r.linf, r.energy, r.momentum, r.c_e, r.c_p
                );
            }
            println!("wrote {}", config.out.join("run.csv").display());
            Ok(report_failure(out.failure.as_ref().map(|e| e.to_string())))
        }
        ExperimentKind::Table1 => {
            let rows = experiments::run_table1(&config)?;
            println!("{:>6} {:>7} {:>12} {:>7}", "h", "dt", "Linf x1e3", "order");
            for r in &rows {
                println!(
                    "{:>6} {:>7} {:>12.4} {:>7}",
                    r.h,
                    r.dt,
                    r.linf * 1e3,
                    r.order.map(|o| format!("{o:.3}")).unwrap_or_default()
                );
            }
            println!("wrote {}", config.out.join("table1.csv").display());
            Ok(ladder_ok(&rows))
        }
        ExperimentKind::Table2 => {
            let rows = experiments::run_table2(&config)?;
            println!("{:>6} {:>7} {:>12} {:>12}", "h", "dt", "C_P(10)", "C_E(10)");
            for r in &rows {
                println!("{:>6} {:>7} {:>12.4e} {:>12.4e}", r.h, r.dt, r.c_p, r.c_e);
            }
            println!("wrote {}", config.out.join("table2.csv").display());
            Ok(ladder_ok(&rows))
        }
        ExperimentKind::RhoSweep => {
            let rows = experiments::rho_sweep(&config)?;
            let mut ok = true;
            for r in &rows {
                let linf = r.final_record.map(|f| f.linf).unwrap_or(f64::NAN);
                println!(
                    "rho = {:e} ({:?}): linf(10) = {}  linf(final) = {:.6e}  -> {}",
                    r.rho,
                    r.path,
                    r.linf_t10.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into()),
                    linf,
                    r.file.display()
                );
                ok &= report_failure(r.error.clone());
            }
            Ok(ok)
        }
        ExperimentKind::Limits => {
            print!("{}", tables::format_limits(&experiments::limits(&config)?));
            Ok(true)
        }
    }
}

fn report_failure(error: Option<String>) -> bool {
    match error {
        Some(e) => {
            eprintln!("run failed: {e}");
            false
        }
        None => true,
    }
}

fn ladder_ok(rows: &[experiments::LadderRow]) -> bool {
    rows.iter().fold(true, |ok, r| {
        ok & report_failure(
            r.error
                .as_ref()
                .map(|e| format!("h = {}, dt = {}: {e}", r.h, r.dt)),
        )
    })
}
