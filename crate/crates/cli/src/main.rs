//! `bundled-lindblad`: run, converge, scale and validate subcommands.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bundled_lindblad::runner::{self, BenchMode, WallClock};
use bundled_lindblad::scenario::{load_config, DissipatorMode, ScenarioConfig, ScenarioKind};
use bundled_lindblad::selftest::run_self_tests;
use bundled_lindblad::stats::Observable;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bundled-lindblad", version, about = "Lindblad dynamics with stochastically bundled dissipators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one scenario and write trajectories, statistics and a manifest.
    Run(RunArgs),
    /// Max-RMSE of stochastic runs against the full dissipator as a function of M.
    Converge(ConvergeArgs),
    /// Wall time per RK4 step versus Hilbert-space dimension.
    Scale(ScaleArgs),
    /// Run the analytic-identity self-tests.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Cooling,
    Heating,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Bundled,
    Jk1,
    Jk2,
}

impl From<Mode> for DissipatorMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Full => DissipatorMode::Full,
            Mode::Bundled => DissipatorMode::Bundled,
            Mode::Jk1 => DissipatorMode::Jk1,
            Mode::Jk2 => DissipatorMode::Jk2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchArg {
    Full,
    FullSparse,
    Bundled,
}

impl From<BenchArg> for BenchMode {
    fn from(m: BenchArg) -> Self {
        match m {
            BenchArg::Full => BenchMode::Full,
            BenchArg::FullSparse => BenchMode::FullSparse,
            BenchArg::Bundled => BenchMode::Bundled,
        }
    }
}

/// Options shared by every simulation subcommand; flags override the config.
#[derive(Args)]
struct Common {
    /// Scenario config or run manifest (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset used when no config is given.
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    bundles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads across realizations (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = match (&self.config, self.scenario) {
            (Some(_), Some(_)) => bail!("--config and --scenario are mutually exclusive"),
            (Some(path), None) => load_config(path).with_context(|| format!("loading {}", path.display()))?,
            (None, Some(Scenario::Heating)) => ScenarioConfig::preset(ScenarioKind::Heating),
            (None, _) => ScenarioConfig::preset(ScenarioKind::Cooling),
        };
        if let Some(seed) = self.seed {
            cfg.rng.master_seed = seed;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
        if let Some(m) = self.bundles {
            cfg.bundles = m;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Stochastic modes to compare.
    #[arg(long = "mode", value_enum, value_delimiter = ',', default_value = "bundled")]
    modes: Vec<Mode>,
    /// Bundle counts M.
    #[arg(long = "m-values", value_delimiter = ',', default_value = "4,8,16,32")]
    m_values: Vec<usize>,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    common: Common,
    /// Qudit spins; N = (2s + 1)(nx + 1).
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5")]
    spins: Vec<f64>,
    #[arg(long = "mode", value_enum, value_delimiter = ',', default_value = "full,bundled")]
    modes: Vec<BenchArg>,
    /// Timed repeats per size after one warm-up step.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = args.common.config()?;
    if let Some(mode) = args.mode {
        cfg.mode = mode.into();
    }
    let manifest = runner::run_scenario(&cfg)?;
    println!(
        "N = {}, N_B = {}, mode = {}, operators = {}",
        manifest.derived.dimension, manifest.derived.n_bohr, cfg.mode, manifest.derived.operator_count
    );
    println!("wrote {} files to {}", manifest.files.len() + 1, cfg.output_dir.display());
    println!("max trace drift {:.3e}, {:.1} s", manifest.max_trace_drift, manifest.timings.total_seconds);
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn converge(args: ConvergeArgs) -> Result<()> {
    let cfg = args.common.config()?;
    let modes: Vec<DissipatorMode> = args.modes.into_iter().map(Into::into).collect();
    let report = runner::convergence_study(&cfg, &args.m_values, &modes)?;
    println!("{:>4} {:>6} {:>10} {:>14} {:>8}", "M", "mode", "observable", "max_rmse", "t");
    for r in &report.rows {
        println!("{:>4} {:>6} {:>10} {:>14.6e} {:>8}", r.m, r.mode, r.observable.name(), r.max_rmse, r.t_at_max);
    }
    for f in &report.fits {
        if f.observable != Observable::Purity {
            println!("{} {}: max RMSE ∝ M^{:.3} (r² = {:.3})", f.mode, f.observable.name(), f.fit.exponent, f.fit.r_squared);
        }
    }
    println!("wrote convergence tables to {}", cfg.output_dir.display());
    Ok(())
}

fn scale(args: ScaleArgs) -> Result<()> {
    let cfg = args.common.config()?;
    let modes: Vec<BenchMode> = args.modes.into_iter().map(Into::into).collect();
    let mut timer = WallClock { repeats: args.repeats, ..WallClock::default() };
    let report = runner::run_scaling_benchmark(&cfg, &args.spins, cfg.bundles, &modes, &mut timer)?;
    report.write(&cfg.output_dir)?;
    for r in &report.rows {
        println!("N = {:>4}  N_B = {:>6}  {:>11}  {:.4e} s/step", r.n, r.n_bohr, r.mode.name(), r.seconds_per_step);
    }
    for (mode, fit) in &report.fits {
        println!("{}: t ∝ N^{:.3} (r² = {:.3})", mode.name(), fit.exponent, fit.r_squared);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn validate() -> Result<bool> {
    let results = run_self_tests();
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        println!("{}  {:<width$}  {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a).map(|()| true),
        Command::Converge(a) => converge(a).map(|()| true),
        Command::Scale(a) => scale(a).map(|()| true),
        Command::Validate => validate(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            match e.downcast_ref::<bundled_lindblad::Error>() {
                Some(bundled_lindblad::Error::Config(fields)) => {
                    eprintln!("error: invalid configuration");
                    for f in fields {
                        eprintln!("  {f}");
                    }
                }
                _ => eprintln!("error: {e:#}"),
            }
            ExitCode::from(2)
        }
    }
}
