//! Command-line front end: one subcommand per experiment.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::experiment::{execute, write_error, ExperimentConfig, ExperimentError, ExperimentKind};

#[derive(Debug, Parser)]
#[command(name = "orbifold-yamabe", version, about = "Radial prescribed scalar curvature experiments on LeBrun and football orbifolds")]
pub struct Cli {
    /// Worker threads for scans and sweeps (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.directory` of the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run whatever experiment the configuration names.
    Run(RunArgs),
    /// Closed-form against finite-difference scalar curvature.
    Curvature(RunArgs),
    /// ADM mass by surface quadrature and extrapolation.
    Mass(RunArgs),
    /// Radial Green's function of the conformal Laplacian.
    Green(RunArgs),
    /// Solve the radial boundary-value problem.
    Solve(RunArgs),
    /// Continuation in the exponent.
    Continue(RunArgs),
    /// Multi-start solution count over a slope scan.
    Count(RunArgs),
    /// Transform an `O(-n)` solution to `O(-2)`.
    Transform(RunArgs),
    /// Pohozaev balance of bubbles and computed solutions.
    Pohozaev(RunArgs),
    /// Energy of concentrating test functions.
    Energy(RunArgs),
    /// Side of the wall of the curvature candidate.
    Classify(RunArgs),
    /// One-parameter sweep with solution counts.
    Sweep(RunArgs),
}

impl Command {
    fn split(&self) -> (Option<ExperimentKind>, &RunArgs) {
        use ExperimentKind as K;
        match self {
            Command::Run(a) => (None, a),
            Command::Curvature(a) => (Some(K::Curvature), a),
            Command::Mass(a) => (Some(K::Mass), a),
            Command::Green(a) => (Some(K::Green), a),
            Command::Solve(a) => (Some(K::Solve), a),
            Command::Continue(a) => (Some(K::Continue), a),
            Command::Count(a) => (Some(K::Count), a),
            Command::Transform(a) => (Some(K::Transform), a),
            Command::Pohozaev(a) => (Some(K::Pohozaev), a),
            Command::Energy(a) => (Some(K::Energy), a),
            Command::Classify(a) => (Some(K::Classify), a),
            Command::Sweep(a) => (Some(K::Sweep), a),
        }
    }
}

/// Parses `args`, runs the experiment and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let (forced, args) = cli.command.split();
    let fallback_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let fail = |e: ExperimentError, dir: &PathBuf, hash: Option<&str>| {
        write_error(dir, &e, hash);
        println!("{}", e.to_json(hash));
        e.exit_code()
    };
    let mut cfg = match ExperimentConfig::from_path(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(e, &fallback_dir, None),
    };
    if let Some(kind) = forced {
        if cfg.experiment != kind {
            let e = ExperimentError::Config(format!(
                "subcommand {} does not match configured experiment {}",
                kind.name(),
                cfg.experiment.name()
            ));
            return fail(e, &fallback_dir, Some(&cfg.hash()));
        }
    }
    if let Some(dir) = &args.out {
        cfg.output.directory = dir.clone();
    }
    let dir = cfg.output.directory.clone();
    match execute(&cfg, &dir) {
        Ok(out) => {
            for f in &out.failures {
                log::warn!("{f}");
            }
            out.exit_code()
        }
        Err(e) => {
            println!("{}", e.to_json(Some(&cfg.hash())));
            e.exit_code()
        }
    }
}
