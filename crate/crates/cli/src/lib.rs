//! `cqed`: cavity scans, trace synthesis and trace analysis.
//!
//! Every command computes all of its outputs in memory first and only then
//! writes them into `--out`, finishing with `manifest.json`. A failed run
//! leaves the output directory untouched.

pub mod analyze;
pub mod error;
pub mod output;
pub mod presets;
pub mod scan;
pub mod synth;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cqed_core::quantum::DEFAULT_N_MAX;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::RunManifest;
use crate::presets::Preset;

#[derive(Debug, Parser)]
#[command(name = "cqed", version, about = "Collective scattering of atoms in a cavity: scans, traces, HMM analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classical (and optionally quantum) detection rates along a scan axis.
    Scan(ScanArgs),
    /// Synthesize a photon-count trace with its JSON sidecar.
    Synth(SynthArgs),
    /// Fit a two-state HMM to one or more traces.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Axial atom separation; grid in µm.
    DeltaZ,
    /// Relative drive phase; grid in rad, both axial patterns.
    PhiY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rabi {
    /// Ω = g0 E_L / E_vac, the field of the classical model.
    Field,
    /// Ω = Γ sqrt(I_L / (2 I_sat)).
    Saturation,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Parameter file (TOML, or JSON by extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Axis::DeltaZ)]
    pub axis: Axis,
    /// START:STOP:POINTS.
    #[arg(long)]
    pub grid: Option<String>,
    /// Also solve the master equation on every `--quantum-stride`-th point.
    #[arg(long)]
    pub quantum: bool,
    /// Fock-space cutoff for the master equation.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub nmax: usize,
    #[arg(long, default_value_t = presets::QUANTUM_STRIDE)]
    pub quantum_stride: usize,
    /// Add a relative-deviation column and report its maximum (implies --quantum).
    #[arg(long)]
    pub compare_classical: bool,
    #[arg(long, value_enum, default_value_t = Rabi::Field)]
    pub rabi: Rabi,
    /// Display factor for free-space photon numbers.
    #[arg(long, default_value_t = 1.0)]
    pub free_space_scale: f64,
    /// Print derived quantities as JSON.
    #[arg(long)]
    pub print_derived: bool,
    /// Recorded in the manifest; scans are deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Telegraph settings file (TOML, or JSON by extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub trace_id: u64,
    /// Output file stem (default: preset name or `trace`).
    #[arg(long)]
    pub stem: Option<String>,
    /// Constructive → destructive jump rate (1/s).
    #[arg(long)]
    pub rate_cd: Option<f64>,
    /// Destructive → constructive jump rate (1/s).
    #[arg(long)]
    pub rate_dc: Option<f64>,
    /// Constructive count rate (1/ms).
    #[arg(long)]
    pub r_high: Option<f64>,
    /// Destructive count rate (1/ms).
    #[arg(long)]
    pub r_low: Option<f64>,
    /// Background count rate (1/ms).
    #[arg(long)]
    pub r_bg: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Seconds.
    #[arg(long)]
    pub bin_width: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trace CSV files, each with its JSON sidecar.
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Analyze only the named region of a loss-scenario trace.
    #[arg(long)]
    pub region: Option<String>,
    /// Analyze only bins START:END.
    #[arg(long)]
    pub bins: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Initial emission means HIGH,LOW (counts/bin).
    #[arg(long, value_delimiter = ',')]
    pub init_means: Option<Vec<f64>>,
    /// Initial per-bin switch probability.
    #[arg(long)]
    pub init_switch: Option<f64>,
}

fn configure_threads(jobs: Option<usize>) -> CliResult<()> {
    match jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}"))),
        None => Ok(()),
    }
}

pub fn run(cli: &Cli, argv: Vec<String>) -> CliResult<()> {
    let started = Instant::now();
    configure_threads(cli.jobs)?;
    let (name, out_dir, seed, (outputs, config, summary)) = match &cli.command {
        Command::Scan(a) => ("scan", &a.out, a.seed, scan::run(a)?),
        Command::Synth(a) => ("synth", &a.out, Some(a.seed), synth::run(a)?),
        Command::Analyze(a) => ("analyze", &a.out, None, analyze::run(a)?),
    };
    let manifest = RunManifest {
        schema: 1,
        command: name.into(),
        args: argv,
        config,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        outputs: Vec::new(),
        wall_time_s: 0.0,
        summary,
    };
    let written = outputs.commit(out_dir, manifest, started)?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I: IntoIterator<Item = OsString>>(argv: I) -> i32 {
    let argv: Vec<OsString> = argv.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let strings = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, strings) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
