//! Run orchestration: deterministic and stochastic scenario runs,
//! convergence studies over the bundle count, and the wall-time scaling
//! benchmark, with CSV and JSON output.
//!
//! # File formats
//!
//! Every float is written as `{:.16e}` (17 significant digits).
//!
//! | file                      | columns                                                        |
//! |---------------------------|----------------------------------------------------------------|
//! | `reference.csv`           | `t,energy,position,purity`                                     |
//! | `realization_NNNN.csv`    | `t,energy,position,purity`                                     |
//! | `stats_<observable>.csv`  | `t,rmse,bias,std`                                              |
//! | `convergence.csv`         | `s,M,mode,observable,max_rmse,t_at_max,bias_at_max,std_at_max` |
//! | `convergence_fits.csv`    | `s,mode,observable,exponent,prefactor,r_squared`               |
//! | `scaling.csv`             | `N,N_B,mode,seconds_per_step`                                  |
//! | `scaling_fits.csv`        | `mode,exponent,prefactor,r_squared`                            |

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dissipator::{
    decomposition_hash, BundledDissipator, CoefficientSource, DaviesDissipator, Dissipator, FullStrategy, SeedRecord,
    SeededStreams,
};
use crate::propagator::{evolve, evolve_combined, rk4_step, step_size_warning, Rk4Workspace, Trajectory};
use crate::scenario::{DissipatorMode, ScenarioConfig, System};
use crate::spectral::BohrDecomposition;
use crate::stats::{ensemble_stats, fit_power_law, max_rmse, EnsembleStats, Observable, ScalingFit};
use crate::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "energy", "position", "purity"];
pub const STATS_HEADER: [&str; 4] = ["t", "rmse", "bias", "std"];
pub const SCALING_HEADER: [&str; 4] = ["N", "N_B", "mode", "seconds_per_step"];
pub const CONVERGENCE_HEADER: [&str; 8] =
    ["s", "M", "mode", "observable", "max_rmse", "t_at_max", "bias_at_max", "std_at_max"];
pub const CONVERGENCE_FIT_HEADER: [&str; 6] = ["s", "mode", "observable", "exponent", "prefactor", "r_squared"];
pub const SCALING_FIT_HEADER: [&str; 4] = ["mode", "exponent", "prefactor", "r_squared"];

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_rows<const K: usize>(path: &Path, header: [&str; K], rows: impl Iterator<Item = [String; K]>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    write_rows(
        path,
        TRAJECTORY_HEADER,
        (0..traj.len()).map(|i| {
            [fmt_float(traj.times[i]), fmt_float(traj.energy[i]), fmt_float(traj.position[i]), fmt_float(traj.purity[i])]
        }),
    )
}

pub fn write_stats_csv(path: &Path, stats: &EnsembleStats) -> Result<()> {
    write_rows(
        path,
        STATS_HEADER,
        (0..stats.times.len()).map(|i| {
            [fmt_float(stats.times[i]), fmt_float(stats.rmse[i]), fmt_float(stats.bias[i]), fmt_float(stats.std[i])]
        }),
    )
}

/// The dissipators and combination weights one stochastic realization is
/// propagated with.
///
/// All `M` coefficient vectors are drawn once; the jackknife half-sets reuse
/// the first and second `M/2` of them with their own `1/√(M/2)`
/// normalization.
pub fn realization_dissipators(
    decomp: &BohrDecomposition,
    mode: DissipatorMode,
    m: usize,
    source: &mut dyn CoefficientSource,
) -> Result<(Vec<(f64, BundledDissipator)>, Option<SeedRecord>)> {
    if !mode.is_stochastic() {
        return Err(Error::Parameter("the full dissipator has no stochastic realizations".into()));
    }
    if m == 0 || (mode.is_jackknife() && m % 2 != 0) {
        return Err(Error::Parameter(format!("bundle count {m} is invalid for mode {mode}")));
    }
    let nb = decomp.n_bohr();
    let coeffs: Vec<_> = (0..m).map(|b| source.coefficients(b, nb)).collect();
    let full = BundledDissipator::from_coefficients(decomp, &coeffs)?;
    let half = m / 2;
    let members = match mode {
        DissipatorMode::Full => unreachable!(),
        DissipatorMode::Bundled => vec![(1.0, full)],
        DissipatorMode::Jk1 => vec![(2.0, full), (-1.0, BundledDissipator::from_coefficients(decomp, &coeffs[..half])?)],
        DissipatorMode::Jk2 => vec![
            (2.0, full),
            (-0.5, BundledDissipator::from_coefficients(decomp, &coeffs[..half])?),
            (-0.5, BundledDissipator::from_coefficients(decomp, &coeffs[half..])?),
        ],
    };
    Ok((members, source.seed_record(m)))
}

/// Number of Lindblad operators the mode propagates with.
pub fn operator_count(mode: DissipatorMode, n_bohr: usize, m: usize) -> usize {
    match mode {
        DissipatorMode::Full => n_bohr,
        DissipatorMode::Bundled => m,
        DissipatorMode::Jk1 => m + m / 2,
        DissipatorMode::Jk2 => 2 * m,
    }
}

/// Deterministic propagation under the full Davies dissipator.
pub fn reference_trajectory(system: &System, cfg: &ScenarioConfig) -> Result<Trajectory> {
    let d = DaviesDissipator::with_strategy(&system.decomposition, cfg.full_strategy);
    evolve(&system.hamiltonian, &system.position.view(), &d, &system.rho0, &cfg.propagation())
}

/// Produces one stochastic realization. The default implementation
/// propagates; tests substitute synthetic trajectories.
pub trait TrajectorySampler: Sync {
    fn sample(&self, mode: DissipatorMode, m: usize, realization: u32) -> Result<(Trajectory, Option<SeedRecord>)>;
}

/// Propagates realizations seeded from the config's RNG settings.
pub struct PropagatingSampler<'a> {
    pub system: &'a System,
    pub cfg: &'a ScenarioConfig,
}

impl TrajectorySampler for PropagatingSampler<'_> {
    fn sample(&self, mode: DissipatorMode, m: usize, realization: u32) -> Result<(Trajectory, Option<SeedRecord>)> {
        let mut source = SeededStreams::new(self.cfg.rng.master_seed, self.cfg.rng.kind, realization);
        let (members, record) = realization_dissipators(&self.system.decomposition, mode, m, &mut source)?;
        let refs: Vec<(f64, &dyn Dissipator)> = members.iter().map(|(w, d)| (*w, d as &dyn Dissipator)).collect();
        let traj = evolve_combined(
            &self.system.hamiltonian,
            &self.system.position.view(),
            &refs,
            &self.system.rho0,
            &self.cfg.propagation(),
            |_, _| {},
        )?;
        Ok((traj, record))
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))
}

/// Samples realizations `0..r` in parallel, returned in realization order.
pub fn sample_ensemble(
    sampler: &dyn TrajectorySampler,
    mode: DissipatorMode,
    m: usize,
    r: usize,
    threads: usize,
) -> Result<Vec<(Trajectory, Option<SeedRecord>)>> {
    let r = u32::try_from(r).map_err(|_| Error::Parameter(format!("too many realizations: {r}")))?;
    thread_pool(threads)?.install(|| (0..r).into_par_iter().map(|k| sampler.sample(mode, m, k)).collect())
}

pub fn observable_stats(reference: &Trajectory, ensemble: &[Trajectory], obs: Observable) -> Result<EnsembleStats> {
    let samples: Vec<Vec<f64>> = ensemble.iter().map(|t| t.series(obs).to_vec()).collect();
    ensemble_stats(&reference.times, &samples, reference.series(obs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub dimension: usize,
    pub n_bohr: usize,
    pub operator_count: usize,
    pub decomposition_hash: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_seconds: f64,
    pub reference_seconds: Option<f64>,
    pub realizations_seconds: Option<f64>,
    pub total_seconds: f64,
}

/// Written as `manifest.json`; its `config` reproduces every CSV of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software_version: String,
    pub config: ScenarioConfig,
    pub derived: DerivedQuantities,
    pub seed_records: Vec<SeedRecord>,
    pub files: Vec<String>,
    pub max_trace_drift: f64,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn realization_file_name(r: usize) -> String {
    format!("realization_{r:04}.csv")
}

/// Runs a scenario and writes its CSVs and `manifest.json` into
/// `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunManifest> {
    let start = Instant::now();
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    create_dir(&dir)?;
    let system = System::build(cfg)?;
    let setup_seconds = start.elapsed().as_secs_f64();
    let decomp = &system.decomposition;

    let mut files = Vec::new();
    let mut timings = Timings { setup_seconds, ..Timings::default() };
    let mut max_drift = 0.0_f64;
    let mut seed_records = Vec::new();

    let need_reference = !cfg.mode.is_stochastic() || cfg.compute_stats;
    let reference = if need_reference {
        let t = Instant::now();
        let traj = reference_trajectory(&system, cfg)?;
        timings.reference_seconds = Some(t.elapsed().as_secs_f64());
        write_trajectory_csv(&dir.join("reference.csv"), &traj)?;
        files.push("reference.csv".to_string());
        max_drift = max_drift.max(traj.max_trace_drift);
        Some(traj)
    } else {
        None
    };

    if cfg.mode.is_stochastic() {
        let t = Instant::now();
        let sampler = PropagatingSampler { system: &system, cfg };
        let results = sample_ensemble(&sampler, cfg.mode, cfg.bundles, cfg.realizations, cfg.threads)?;
        timings.realizations_seconds = Some(t.elapsed().as_secs_f64());
        let mut ensemble = Vec::with_capacity(results.len());
        for (r, (traj, record)) in results.into_iter().enumerate() {
            let name = realization_file_name(r);
            write_trajectory_csv(&dir.join(&name), &traj)?;
            files.push(name);
            max_drift = max_drift.max(traj.max_trace_drift);
            seed_records.extend(record);
            ensemble.push(traj);
        }
        if let (Some(reference), true) = (&reference, cfg.compute_stats) {
            for obs in Observable::ALL {
                let stats = observable_stats(reference, &ensemble, obs)?;
                let name = format!("stats_{}.csv", obs.name());
                write_stats_csv(&dir.join(&name), &stats)?;
                files.push(name);
            }
        }
    }

    timings.total_seconds = start.elapsed().as_secs_f64();
    let manifest = RunManifest {
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        derived: DerivedQuantities {
            dimension: system.dim(),
            n_bohr: decomp.n_bohr(),
            operator_count: operator_count(cfg.mode, decomp.n_bohr(), cfg.bundles),
            decomposition_hash: decomposition_hash(decomp),
        },
        seed_records,
        files,
        max_trace_drift: max_drift,
        warnings: step_size_warning(&system.eigen.energies, cfg.dt).into_iter().collect(),
        timings,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Peak RMSE of one observable for one `(M, mode)` ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub s: f64,
    pub m: usize,
    pub mode: DissipatorMode,
    pub observable: Observable,
    pub max_rmse: f64,
    pub t_at_max: f64,
    pub bias_at_max: f64,
    pub std_at_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub mode: DissipatorMode,
    pub observable: Observable,
    pub fit: ScalingFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Max-RMSE vs `M` power laws, for modes sampled at three or more `M`.
    pub fits: Vec<ConvergenceFit>,
}

impl ConvergenceReport {
    pub fn row(&self, m: usize, mode: DissipatorMode, observable: Observable) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.m == m && r.mode == mode && r.observable == observable)
    }

    pub fn fit(&self, mode: DissipatorMode, observable: Observable) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.mode == mode && f.observable == observable).map(|f| &f.fit)
    }

    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        write_rows(
            &dir.join("convergence.csv"),
            CONVERGENCE_HEADER,
            self.rows.iter().map(|r| {
                [
                    r.s.to_string(),
                    r.m.to_string(),
                    r.mode.name().to_string(),
                    r.observable.name().to_string(),
                    fmt_float(r.max_rmse),
                    fmt_float(r.t_at_max),
                    fmt_float(r.bias_at_max),
                    fmt_float(r.std_at_max),
                ]
            }),
        )?;
        let s = self.rows.first().map_or(0.0, |r| r.s);
        write_rows(
            &dir.join("convergence_fits.csv"),
            CONVERGENCE_FIT_HEADER,
            self.fits.iter().map(|f| {
                [
                    s.to_string(),
                    f.mode.name().to_string(),
                    f.observable.name().to_string(),
                    fmt_float(f.fit.exponent),
                    fmt_float(f.fit.prefactor),
                    fmt_float(f.fit.r_squared),
                ]
            }),
        )
    }
}

/// Max-RMSE of every observable for each `(M, mode)` against `reference`,
/// with `R = base.realizations`.
pub fn run_convergence_study(
    base: &ScenarioConfig,
    m_values: &[usize],
    modes: &[DissipatorMode],
    sampler: &dyn TrajectorySampler,
    reference: &Trajectory,
) -> Result<ConvergenceReport> {
    let mut errs = Vec::new();
    for &mode in modes {
        if !mode.is_stochastic() {
            errs.push("modes: convergence studies need stochastic modes".to_string());
        }
        for &m in m_values {
            if m == 0 || (mode.is_jackknife() && m % 2 != 0) {
                errs.push(format!("bundles: M = {m} is invalid for mode {mode}"));
            }
        }
    }
    if base.realizations < 2 {
        errs.push(format!("realizations: need at least 2, got {}", base.realizations));
    }
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }

    let mut rows = Vec::new();
    for &mode in modes {
        for &m in m_values {
            let ensemble: Vec<Trajectory> = sample_ensemble(sampler, mode, m, base.realizations, base.threads)?
                .into_iter()
                .map(|(t, _)| t)
                .collect();
            for obs in Observable::ALL {
                let stats = observable_stats(reference, &ensemble, obs)?;
                let (peak, t) = max_rmse(&stats).ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
                let i = stats.times.iter().position(|&x| x == t).expect("peak time is a recorded time");
                rows.push(ConvergenceRow {
                    s: base.s,
                    m,
                    mode,
                    observable: obs,
                    max_rmse: peak,
                    t_at_max: t,
                    bias_at_max: stats.bias[i],
                    std_at_max: stats.std[i],
                });
            }
        }
    }

    let mut fits = Vec::new();
    if m_values.len() >= 3 {
        for &mode in modes {
            for obs in Observable::ALL {
                let (ms, peaks): (Vec<f64>, Vec<f64>) = rows
                    .iter()
                    .filter(|r| r.mode == mode && r.observable == obs)
                    .map(|r| (r.m as f64, r.max_rmse))
                    .unzip();
                if let Ok(fit) = fit_power_law(&ms, &peaks) {
                    fits.push(ConvergenceFit { mode, observable: obs, fit });
                }
            }
        }
    }
    Ok(ConvergenceReport { rows, fits })
}

/// Builds the system and reference for `base`, runs the study with
/// propagated realizations, and writes its CSVs into `base.output_dir`.
pub fn convergence_study(base: &ScenarioConfig, m_values: &[usize], modes: &[DissipatorMode]) -> Result<ConvergenceReport> {
    let system = System::build(base)?;
    let reference = reference_trajectory(&system, base)?;
    let sampler = PropagatingSampler { system: &system, cfg: base };
    let report = run_convergence_study(base, m_values, modes, &sampler, &reference)?;
    create_dir(&base.output_dir)?;
    report.write_csv(&base.output_dir)?;
    write_trajectory_csv(&base.output_dir.join("reference.csv"), &reference)?;
    Ok(report)
}

/// Dissipator variants timed by the scaling benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchMode {
    /// Full dissipator, two dense products per Lindblad operator.
    Full,
    /// Full dissipator exploiting the sparsity of each `L_ω`.
    FullSparse,
    /// `M` bundled operators.
    Bundled,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Full => "full",
            BenchMode::FullSparse => "full_sparse",
            BenchMode::Bundled => "bundled",
        }
    }
}

/// Measures seconds per RK4 step; `step` performs one step.
pub trait StepTimer {
    fn measure(&mut self, n: usize, mode: BenchMode, step: &mut dyn FnMut()) -> Vec<f64>;
}

/// Wall-clock timing: `warmup` discarded steps, then `repeats` samples of
/// `steps_per_sample` steps each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallClock {
    pub warmup: usize,
    pub repeats: usize,
    pub steps_per_sample: usize,
}

impl Default for WallClock {
    fn default() -> Self {
        WallClock { warmup: 1, repeats: 3, steps_per_sample: 1 }
    }
}

impl StepTimer for WallClock {
    fn measure(&mut self, _n: usize, _mode: BenchMode, step: &mut dyn FnMut()) -> Vec<f64> {
        for _ in 0..self.warmup {
            step();
        }
        (0..self.repeats)
            .map(|_| {
                let t = Instant::now();
                for _ in 0..self.steps_per_sample {
                    step();
                }
                t.elapsed().as_secs_f64() / self.steps_per_sample as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub n_bohr: usize,
    pub mode: BenchMode,
    pub seconds_per_step: f64,
    /// Individual timing samples; `seconds_per_step` is their median.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub bundles: usize,
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<(BenchMode, ScalingFit)>,
    pub warnings: Vec<String>,
}

impl ScalingReport {
    pub fn fit(&self, mode: BenchMode) -> Option<&ScalingFit> {
        self.fits.iter().find(|(m, _)| *m == mode).map(|(_, f)| f)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        create_dir(dir)?;
        write_rows(
            &dir.join("scaling.csv"),
            SCALING_HEADER,
            self.rows.iter().map(|r| {
                [r.n.to_string(), r.n_bohr.to_string(), r.mode.name().to_string(), fmt_float(r.seconds_per_step)]
            }),
        )?;
        write_rows(
            &dir.join("scaling_fits.csv"),
            SCALING_FIT_HEADER,
            self.fits.iter().map(|(m, f)| {
                [m.name().to_string(), fmt_float(f.exponent), fmt_float(f.prefactor), fmt_float(f.r_squared)]
            }),
        )?;
        write_json(&dir.join("scaling_manifest.json"), self)
    }
}

/// Relative spread `(max - min) / median` above which a timing is flagged.
pub const TIMING_SPREAD_WARNING: f64 = 0.25;

fn median(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times one RK4 step for each spin in `spins` (so `N = (2s + 1)(nx + 1)`)
/// and each mode, and fits `t = a N^n` per mode.
pub fn run_scaling_benchmark(
    base: &ScenarioConfig,
    spins: &[f64],
    bundles: usize,
    modes: &[BenchMode],
    timer: &mut dyn StepTimer,
) -> Result<ScalingReport> {
    if spins.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: spins.len() });
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &s in spins {
        let mut cfg = base.clone();
        cfg.s = s;
        cfg.mode = DissipatorMode::Full;
        let system = System::build(&cfg)?;
        let n = system.dim();
        let decomp = &system.decomposition;
        for &mode in modes {
            let d: Box<dyn Dissipator> = match mode {
                BenchMode::Full => Box::new(DaviesDissipator::with_strategy(decomp, FullStrategy::Dense)),
                BenchMode::FullSparse => Box::new(DaviesDissipator::with_strategy(decomp, FullStrategy::Sparse)),
                BenchMode::Bundled => {
                    let mut src = SeededStreams::new(cfg.rng.master_seed, cfg.rng.kind, 0);
                    Box::new(BundledDissipator::build(decomp, bundles, &mut src)?)
                }
            };
            let mut rho = system.rho0.matrix().clone();
            let mut ws = Rk4Workspace::new(n);
            let mut step = || rk4_step(&system.hamiltonian, d.as_ref(), &mut rho, cfg.dt, &mut ws);
            let samples = timer.measure(n, mode, &mut step);
            if samples.is_empty() {
                return Err(Error::InsufficientSamples { needed: 1, got: 0 });
            }
            let med = median(&samples);
            let spread = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - samples.iter().cloned().fold(f64::INFINITY, f64::min);
            if med > 0.0 && spread / med > TIMING_SPREAD_WARNING {
                warnings.push(format!(
                    "{} at N = {n}: timing spread {:.0}% of the median",
                    mode.name(),
                    100.0 * spread / med
                ));
            }
            rows.push(ScalingRow { n, n_bohr: decomp.n_bohr(), mode, seconds_per_step: med, samples });
        }
    }
    let mut fits = Vec::new();
    for &mode in modes {
        let (ns, ts): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| r.mode == mode).map(|r| (r.n as f64, r.seconds_per_step)).unzip();
        fits.push((mode, fit_power_law(&ns, &ts)?));
    }
    Ok(ScalingReport { bundles, rows, fits, warnings })
}
