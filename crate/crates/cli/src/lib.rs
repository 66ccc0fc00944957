//! Command-line front end: configuration loading, subcommand dispatch and
//! artifact emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rykick::optimizer::Method;
use serde::Serialize;
use serde_json::Value;

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::{CliError, EXIT_OK, EXIT_VALIDATION};
use crate::output::Artifacts;
use crate::reproduce::summary;

#[derive(Debug, Parser)]
#[command(name = "rykick", version, about = "Electric-kick waveform synthesis and gate simulation for Rydberg-ion crystals")]
pub struct Cli {
    /// TOML run configuration; defaults to the reference two-ion setup.
    #[arg(long, global = true, env = "RYKICK_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Slices,
    Fourier,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Slices => Method::Slices,
            MethodArg::Fourier => Method::Fourier,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GateArgs {
    /// Gate time in µs, overriding `gate.t_g_us`.
    #[arg(long)]
    pub tg_us: Option<f64>,

    /// Waveform parametrisation, overriding `gate.method`.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Debug, Clone, Args)]
pub struct FourKickArgs {
    /// Rock/COM frequency ratio p:q the trap is tuned to.
    #[arg(long, default_value = "3:4")]
    pub ratio: String,

    /// Use the configured trap as is.
    #[arg(long)]
    pub no_tune: bool,

    /// Distortion parameters of the arctan kick model.
    #[arg(long, value_delimiter = ',')]
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FeasibilityArgs {
    /// Peak field to check (V/m); optimises the configured gate when absent.
    #[arg(long, requires = "x_max")]
    pub e_max: Option<f64>,

    /// Peak excursion to check (ground-state lengths).
    #[arg(long, requires = "e_max")]
    pub x_max: Option<f64>,

    #[command(flatten)]
    pub gate: GateArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    /// Principal quantum numbers, overriding `scaling.principal_n`.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,

    /// Re-anchor the IT field so that the reference level's optimal gate at
    /// this time (µs) sits exactly at the purity target.
    #[arg(long)]
    pub calibrate_at_us: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum ReproduceTarget {
    /// State-dependent two-ion frequencies before and after tuning.
    Table1,
    /// Four-kick scheme: waveform, trajectories and distortion scan.
    Fig2,
    /// Optimal two-ion waveform and field against gate time.
    Fig3 {
        /// Gate time of the optimal waveform (µs); defaults to `gate.t_g_us`.
        #[arg(long)]
        tg_us: Option<f64>,

        /// Spacing of the gate-time scan (µs).
        #[arg(long, default_value_t = 0.05)]
        scan_step_us: f64,
    },
    /// Six-ion pair scans at two gate times.
    Fig4,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Secular frequencies, equilibrium and the gate configurations' modes.
    Modes,
    /// Four-kick gate on a commensurately tuned two-ion trap.
    FourKick(FourKickArgs),
    /// Optimal continuous waveform for the configured gate.
    Optimize(GateArgs),
    /// Evaluate a waveform file written by `optimize`.
    Simulate {
        /// `waveform.json` as written by `optimize`.
        #[arg(long)]
        waveform: PathBuf,
    },
    /// Optimal waveform for every ion pair of the crystal.
    ScanPairs(GateArgs),
    /// Field and excursion verdict; exits with status 4 when infeasible.
    Feasibility(FeasibilityArgs),
    /// Minimal gate time against principal quantum number.
    Scaling(ScalingArgs),
    /// Reproduction pipelines.
    Reproduce {
        #[command(subcommand)]
        target: ReproduceTarget,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Modes => "modes".into(),
            Command::FourKick(_) => "four-kick".into(),
            Command::Optimize(_) => "optimize".into(),
            Command::Simulate { .. } => "simulate".into(),
            Command::ScanPairs(_) => "scan-pairs".into(),
            Command::Feasibility(_) => "feasibility".into(),
            Command::Scaling(_) => "scaling".into(),
            Command::Reproduce { target } => format!(
                "reproduce {}",
                match target {
                    ReproduceTarget::Table1 => "table1",
                    ReproduceTarget::Fig2 => "fig2",
                    ReproduceTarget::Fig3 { .. } => "fig3",
                    ReproduceTarget::Fig4 => "fig4",
                }
            ),
        }
    }
}

/// What a successful run prints on stdout.
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub files: Vec<String>,
    pub summary: Value,
}

fn dispatch(command: &Command, ctx: &mut Context) -> Result<Value, CliError> {
    let gate_time = |a: &GateArgs, cfg: &config::Resolved| a.tg_us.map(|t| t * 1e-6).unwrap_or(cfg.t_g);
    let gate_method = |a: &GateArgs, cfg: &config::Resolved| a.method.map(Method::from).unwrap_or(cfg.method);
    match command {
        Command::Modes => commands::modes(ctx),
        Command::FourKick(a) => {
            let ratio = if a.no_tune { None } else { Some(commands::parse_ratio(&a.ratio)?) };
            let g: &[f64] = if a.g.is_empty() { &commands::DEFAULT_DISTORTIONS } else { &a.g };
            Ok(summary(&commands::four_kick(ctx, ratio, g, "four_kick_")?))
        }
        Command::Optimize(a) => {
            let (t, m) = (gate_time(a, &ctx.cfg), gate_method(a, &ctx.cfg));
            let r = commands::optimize(ctx, t, m, "")?;
            Ok(serde_json::json!({ "e_max_v_per_m": r.gate.e_max_v_per_m, "verdict": r.verdict }))
        }
        Command::Simulate { waveform } => {
            let r = commands::simulate(ctx, waveform)?;
            Ok(serde_json::json!({ "closure_residual": r.gate.closure_residual, "delta_phi_rad": r.gate.delta_phi_rad }))
        }
        Command::ScanPairs(a) => {
            let (t, m) = (gate_time(a, &ctx.cfg), gate_method(a, &ctx.cfg));
            let trap = ctx.cfg.trap.clone();
            let n = ctx.cfg.n_ions;
            let r = commands::scan_pairs_on(ctx, &trap, n, t, m, "pairs_")?;
            Ok(serde_json::json!({ "max_e_max_v_per_m": r.max_e_max_v_per_m, "infeasible_pairs": r.infeasible_pairs }))
        }
        Command::Feasibility(a) => {
            let values = a.e_max.zip(a.x_max);
            let (t, m) = (gate_time(&a.gate, &ctx.cfg), gate_method(&a.gate, &ctx.cfg));
            commands::feasibility(ctx, values, t, m)
        }
        Command::Scaling(a) => {
            let ns = if a.n.is_empty() { ctx.cfg.scaling_n.clone() } else { a.n.clone() };
            let at = a.calibrate_at_us.map(|t| t * 1e-6);
            Ok(summary(&commands::scaling(ctx, &ns, at)?))
        }
        Command::Reproduce { target } => match target {
            ReproduceTarget::Table1 => Ok(summary(&reproduce::table1(ctx)?)),
            ReproduceTarget::Fig2 => Ok(summary(&reproduce::fig2(ctx)?)),
            ReproduceTarget::Fig3 { tg_us, scan_step_us } => {
                let t = tg_us.unwrap_or(ctx.cfg.t_g * 1e6);
                let r = reproduce::fig3(ctx, t, *scan_step_us)?;
                Ok(serde_json::json!({ "e_max_v_per_m": r.gate.gate.e_max_v_per_m, "closure_residual": r.gate.gate.closure_residual }))
            }
            ReproduceTarget::Fig4 => Ok(summary(&reproduce::fig4(ctx)?)),
        },
    }
}

/// Loads the configuration and runs one subcommand.
pub fn execute(cli: &Cli) -> Result<RunSummary, CliError> {
    let config = RunConfig::load(cli.config.as_deref())?;
    let cfg = config.resolve()?;
    let dir = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    let mut ctx = Context { cfg, out: Artifacts::create(&dir)? };
    let value = dispatch(&cli.command, &mut ctx)?;
    Ok(RunSummary {
        command: cli.command.name(),
        files: ctx.out.written().iter().map(|p| p.display().to_string()).collect(),
        summary: value,
    })
}

fn run_in_pool(cli: &Cli) -> Result<RunSummary, CliError> {
    match cli.threads {
        None => execute(cli),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| execute(cli)),
    }
}

/// Full program: parse `args`, run, print the summary or the error JSON,
/// and return the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run_in_pool(&cli) {
        Ok(s) => {
            let _ = writeln!(stdout, "{}", serde_json::to_string(&s).unwrap_or_default());
            EXIT_OK
        }
        Err(e) => {
            let report = serde_json::json!({ "error": e.report() });
            let _ = writeln!(stderr, "{report}");
            e.exit_code()
        }
    }
}
