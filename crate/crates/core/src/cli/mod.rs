//! Command-line front end. One subcommand per sweep target.
//!
//! Values come from, in increasing priority: target defaults, the
//! `--config` file (TOML or a previous run's `.meta.json`), then flags.
//! Exit codes: 0 ok, 2 config, 3 infeasible, 4 I/O.

pub mod config;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::rsp::DemandModel;
use config::{parse_config, ConfigFile, Loaded, Params, SweepSpec, Target};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Infeasible(_) => CliError::Infeasible(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qmux", version, about = "Multiplexing rate and fidelity sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML config, or the `.meta.json` of an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV path; a `<out>.meta.json` sidecar is written next to it.
    /// Without it the CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, env = "QMUX_THREADS")]
    pub threads: Option<usize>,
}

fn parse_demand(s: &str) -> Result<DemandModel, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown demand model {s}"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected attempts for the window problem, exact and small-p.
    Window(WindowArgs),
    /// Semiclassical gain bounds.
    Limits(LimitsArgs),
    /// EG rate-fidelity curve over xi_A^2.
    EgCurve(EgCurveArgs),
    /// EG multiplexing gain against M.
    EgGain(EgGainArgs),
    /// RSP rate-fidelity curve over eta_c |alpha|^2.
    RspCurve(RspCurveArgs),
    /// RSP multiplexing gain against M per demand model.
    RspGain(RspGainArgs),
    /// Optimized hub rate against F_min and M.
    MsCurve(HubArgs),
    /// Optimized hub gain over the single-server reference.
    MsGain(HubArgs),
    /// One sampler run for an explicit hub.
    MsSample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub w: Option<u64>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub m_max: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<u32>>,
    #[arg(long)]
    pub w: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EgCurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    /// Sets both efficiencies.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eta_a: Option<f64>,
    #[arg(long)]
    pub eta_b: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub xi_a2: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EgGainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Sets both efficiencies.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eta_a: Option<f64>,
    #[arg(long)]
    pub eta_b: Option<f64>,
    #[arg(long = "fmin", visible_alias = "f-min")]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub m_max: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RspCurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    #[arg(long)]
    pub eta_c: Option<f64>,
    #[arg(long)]
    pub eta_s: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_demand)]
    pub demand: Option<DemandModel>,
}

#[derive(Debug, Args)]
pub struct RspGainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub eta_c: Option<f64>,
    #[arg(long)]
    pub eta_s: Option<f64>,
    #[arg(long = "fmin", visible_alias = "f-min")]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub m_max: Option<u32>,
    #[arg(long, value_delimiter = ',', value_parser = parse_demand)]
    pub demand: Option<Vec<DemandModel>>,
    #[arg(long)]
    pub alpha2_cap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HubArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long = "fmin", visible_alias = "f-min", value_delimiter = ',')]
    pub f_min: Option<Vec<f64>>,
    #[arg(long)]
    pub n_rounds: Option<u64>,
    #[arg(long)]
    pub eta_c: Option<f64>,
    #[arg(long)]
    pub eta_s: Option<f64>,
    #[arg(long)]
    pub tau_e: Option<f64>,
    #[arg(long)]
    pub tau_ce: Option<f64>,
    #[arg(long)]
    pub tau_co: Option<f64>,
    #[arg(long)]
    pub n_e: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub n_o: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub p_sc: Option<f64>,
    #[arg(long)]
    pub p_ss: Option<f64>,
    #[arg(long)]
    pub n_e: Option<u64>,
    #[arg(long)]
    pub n_o: Option<u64>,
    #[arg(long)]
    pub tau_e: Option<f64>,
    #[arg(long)]
    pub tau_ce: Option<f64>,
    #[arg(long)]
    pub tau_co: Option<f64>,
    #[arg(long)]
    pub f0_sc: Option<f64>,
    #[arg(long)]
    pub f0_ss: Option<f64>,
    #[arg(long)]
    pub n_rounds: Option<u64>,
    #[arg(long = "fmin", visible_alias = "f-min")]
    pub f_min: Option<f64>,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src.clone() {
            $dst = v;
        }
    };
}

impl Command {
    fn target(&self) -> Target {
        match self {
            Command::Window(_) => Target::Window,
            Command::Limits(_) => Target::Limits,
            Command::EgCurve(_) => Target::EgCurve,
            Command::EgGain(_) => Target::EgGain,
            Command::RspCurve(_) => Target::RspCurve,
            Command::RspGain(_) => Target::RspGain,
            Command::MsCurve(_) => Target::MultiserverCurve,
            Command::MsGain(_) => Target::MultiserverGain,
            Command::MsSample(_) => Target::MultiserverSample,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Window(a) => &a.common,
            Command::Limits(a) => &a.common,
            Command::EgCurve(a) => &a.common,
            Command::EgGain(a) => &a.common,
            Command::RspCurve(a) => &a.common,
            Command::RspGain(a) => &a.common,
            Command::MsCurve(a) | Command::MsGain(a) => &a.common,
            Command::MsSample(a) => &a.common,
        }
    }

    fn apply(&self, params: &mut Params) {
        match (self, params) {
            (Command::Window(a), Params::Window(p)) => {
                set!(p.w, a.w);
                set!(p.s, a.s);
                set!(p.m, a.m);
                set!(p.p, a.p);
            }
            (Command::Limits(a), Params::Limits(p)) => {
                set!(p.m_max, a.m_max);
                set!(p.s, a.s);
                set!(p.w, a.w);
            }
            (Command::EgCurve(a), Params::EgCurve(p)) => {
                set!(p.m, a.m);
                set!(p.eta_a, a.eta);
                set!(p.eta_b, a.eta);
                set!(p.eta_a, a.eta_a);
                set!(p.eta_b, a.eta_b);
                set!(p.xi_a2, a.xi_a2);
            }
            (Command::EgGain(a), Params::EgGain(p)) => {
                set!(p.eta_a, a.eta);
                set!(p.eta_b, a.eta);
                set!(p.eta_a, a.eta_a);
                set!(p.eta_b, a.eta_b);
                set!(p.f_min, a.f_min);
                set!(p.m_max, a.m_max);
            }
            (Command::RspCurve(a), Params::RspCurve(p)) => {
                set!(p.m, a.m);
                set!(p.eta_c, a.eta_c);
                set!(p.eta_s, a.eta_s);
                set!(p.gamma, a.gamma);
                set!(p.demand, a.demand);
            }
            (Command::RspGain(a), Params::RspGain(p)) => {
                set!(p.eta_c, a.eta_c);
                set!(p.eta_s, a.eta_s);
                set!(p.f_min, a.f_min);
                set!(p.m_max, a.m_max);
                set!(p.demand, a.demand);
                set!(p.alpha2_cap, a.alpha2_cap);
            }
            (Command::MsCurve(a) | Command::MsGain(a), Params::Multiserver(p)) => {
                set!(p.m, a.m);
                set!(p.s, a.s);
                set!(p.f_min, a.f_min);
                set!(p.n_rounds, a.n_rounds);
                set!(p.physical.eta_c, a.eta_c);
                set!(p.physical.eta_s, a.eta_s);
                set!(p.physical.tau_e, a.tau_e);
                set!(p.physical.tau_ce, a.tau_ce);
                set!(p.physical.tau_co, a.tau_co);
                set!(p.physical.n_e, a.n_e);
                set!(p.grids.alpha2, a.alpha2);
                set!(p.grids.n_o, a.n_o);
            }
            (Command::MsSample(a), Params::MultiserverSample(p)) => {
                set!(p.hub.m, a.m);
                set!(p.hub.s, a.s);
                set!(p.hub.p_sc, a.p_sc);
                set!(p.hub.p_ss, a.p_ss);
                set!(p.hub.n_e, a.n_e);
                set!(p.hub.n_o, a.n_o);
                set!(p.hub.tau_e, a.tau_e);
                set!(p.hub.tau_ce, a.tau_ce);
                set!(p.hub.tau_co, a.tau_co);
                set!(p.hub.f0_sc, a.f0_sc);
                set!(p.hub.f0_ss, a.f0_ss);
                set!(p.n_rounds, a.n_rounds);
                set!(p.f_min, a.f_min);
            }
            _ => unreachable!("params always follow the command's target"),
        }
    }
}

/// Resolves the sweep spec and thread count for a parsed command.
pub fn resolve(cmd: &Command) -> Result<(SweepSpec, usize), CliError> {
    let target = cmd.target();
    let common = cmd.common();
    let (mut spec, file_threads) = match &common.config {
        None => (ConfigFile::default().resolve(target), None),
        Some(path) => match parse_config(path)? {
            Loaded::Toml(file) => {
                let threads = file.threads;
                (file.resolve(target), threads)
            }
            Loaded::Sidecar(side) => {
                if side.spec.target != target {
                    return Err(CliError::Config(format!(
                        "{}: sidecar is for target {}, not {}",
                        path.display(),
                        side.spec.target.name(),
                        target.name()
                    )));
                }
                (side.spec, None)
            }
        },
    };
    cmd.apply(&mut spec.params);
    set!(spec.seed, common.seed);
    let threads = common.threads.or(file_threads).unwrap_or(0);
    Ok((spec, threads))
}

impl ConfigFile {
    fn resolve(&self, target: Target) -> SweepSpec {
        SweepSpec {
            target,
            seed: self.seed.unwrap_or(0),
            params: self.params_for(target),
        }
    }
}

/// Computes and renders the CSV on a pool of `threads` workers.
pub fn run_spec(spec: &SweepSpec, threads: usize) -> Result<String, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    let table = pool.install(|| sweep::compute(spec))?;
    Ok(output::render_csv(spec, &table))
}

fn execute(cmd: &Command) -> Result<(), CliError> {
    let (spec, threads) = resolve(cmd)?;
    let start = Instant::now();
    let csv = run_spec(&spec, threads)?;
    let wall = start.elapsed().as_secs_f64();
    output::write_outputs(&csv, &spec, cmd.common().out.as_deref(), threads, wall)
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qmux: {e}");
            e.exit_code()
        }
    }
}
