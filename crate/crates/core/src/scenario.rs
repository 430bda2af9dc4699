//! Scenario configuration: a flat JSON document using the model's parameter
//! names, cooling/heating presets, validation, and assembly of the
//! eigenbasis representation every run starts from.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dissipator::{FullStrategy, RandomVectorKind};
use crate::model::{self, build_grid, build_model, DensityMatrix, MorseParams, SpinOscillatorModel};
use crate::propagator::{Hamiltonian, PropagationConfig};
use crate::spectral::{eigendecompose, BohrDecomposition, BohrOptions, CouplingParams, EigenSystem};
use crate::{CMatrix, Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Hot spinless oscillator in a cold bath.
    #[default]
    Cooling,
    /// Cold spin-½ system in a hot bath.
    Heating,
    Custom,
}

/// Which dissipator drives the dynamics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipatorMode {
    /// The deterministic Davies dissipator.
    #[default]
    Full,
    /// `M` stochastically bundled operators.
    Bundled,
    /// First-order jackknife `2ρ_M - ρ_{M/2}`.
    #[serde(alias = "jackknife1")]
    Jk1,
    /// Second-order jackknife `2ρ_M - ½(ρ_a + ρ_b)` over the two halves.
    #[serde(alias = "jackknife2")]
    Jk2,
}

impl DissipatorMode {
    pub fn name(self) -> &'static str {
        match self {
            DissipatorMode::Full => "full",
            DissipatorMode::Bundled => "bundled",
            DissipatorMode::Jk1 => "jk1",
            DissipatorMode::Jk2 => "jk2",
        }
    }

    pub fn is_stochastic(self) -> bool {
        self != DissipatorMode::Full
    }

    pub fn is_jackknife(self) -> bool {
        matches!(self, DissipatorMode::Jk1 | DissipatorMode::Jk2)
    }
}

impl std::fmt::Display for DissipatorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DissipatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(DissipatorMode::Full),
            "bundled" => Ok(DissipatorMode::Bundled),
            "jk1" | "jackknife1" => Ok(DissipatorMode::Jk1),
            "jk2" | "jackknife2" => Ok(DissipatorMode::Jk2),
            other => Err(Error::Parameter(format!("unknown dissipator mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngConfig {
    pub kind: RandomVectorKind,
    pub master_seed: u64,
}

impl Default for RngConfig {
    fn default() -> Self {
        RngConfig { kind: RandomVectorKind::UnitCircle, master_seed: 20240501 }
    }
}

/// Everything needed to reproduce a run. Omitted fields take the cooling
/// preset's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub mass: f64,
    pub x0: f64,
    pub dx: f64,
    /// Grid intervals; the grid has `nx + 1` points.
    pub nx: usize,
    pub v_inf: f64,
    pub u_max: f64,
    pub a: f64,
    /// Qudit spin `s`; `2s` must be a whole number.
    pub s: f64,
    pub gap: f64,
    pub alpha: f64,
    pub gamma_star: f64,
    pub omega_c: f64,
    pub kbt: f64,
    pub xi: f64,
    pub dt: f64,
    pub record_every: f64,
    pub t_final: f64,
    pub mode: DissipatorMode,
    pub bundles: usize,
    pub rng: RngConfig,
    pub realizations: usize,
    /// Compare stochastic realizations against the deterministic reference.
    pub compute_stats: bool,
    pub full_strategy: FullStrategy,
    pub bin_tol_rel: f64,
    pub drop_tol_rel: f64,
    /// Worker threads for realizations; 0 lets the pool decide.
    pub threads: usize,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(ScenarioKind::Cooling)
    }
}

impl ScenarioConfig {
    pub fn preset(kind: ScenarioKind) -> Self {
        let bohr = BohrOptions::default();
        let mut cfg = ScenarioConfig {
            scenario: kind,
            mass: 1.0,
            x0: -10.0,
            dx: 1.0,
            nx: 30,
            v_inf: 4.0,
            u_max: 6.0,
            a: 0.2,
            s: 0.0,
            gap: 0.1,
            alpha: 0.1225,
            gamma_star: 0.02,
            omega_c: std::f64::consts::SQRT_2,
            kbt: 0.25,
            xi: 3.4,
            dt: 0.125,
            record_every: 1.0,
            t_final: 1000.0,
            mode: DissipatorMode::Full,
            bundles: 8,
            rng: RngConfig::default(),
            realizations: 100,
            compute_stats: true,
            full_strategy: FullStrategy::Sparse,
            bin_tol_rel: bohr.bin_tol_rel,
            drop_tol_rel: bohr.drop_tol_rel,
            threads: 0,
            output_dir: PathBuf::from("out"),
        };
        if kind == ScenarioKind::Heating {
            cfg.s = 0.5;
            cfg.xi = 0.7;
            cfg.kbt = 1.0;
            cfg.t_final = 2000.0;
        }
        cfg
    }

    pub fn propagation(&self) -> PropagationConfig {
        PropagationConfig { dt: self.dt, record_every: self.record_every, t_final: self.t_final }
    }

    pub fn coupling(&self) -> CouplingParams {
        CouplingParams { gamma_star: self.gamma_star, omega_c: self.omega_c, kbt: self.kbt }
    }

    pub fn bohr_options(&self) -> BohrOptions {
        BohrOptions { bin_tol_rel: self.bin_tol_rel, drop_tol_rel: self.drop_tol_rel }
    }

    /// Hilbert-space dimension `(2s + 1)(nx + 1)`.
    pub fn dimension(&self) -> usize {
        ((2.0 * self.s).round() as usize + 1) * (self.nx + 1)
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{name}: must be positive and finite, got {v}"));
            }
        };
        positive("mass", self.mass);
        positive("dx", self.dx);
        positive("v_inf", self.v_inf);
        positive("u_max", self.u_max);
        positive("a", self.a);
        positive("gamma_star", self.gamma_star);
        positive("omega_c", self.omega_c);
        positive("kbt", self.kbt);
        positive("xi", self.xi);
        positive("bin_tol_rel", self.bin_tol_rel);
        positive("drop_tol_rel", self.drop_tol_rel);
        for (name, v) in [("x0", self.x0), ("gap", self.gap), ("alpha", self.alpha)] {
            if !v.is_finite() {
                errs.push(format!("{name}: must be finite, got {v}"));
            }
        }
        if self.nx < 6 {
            errs.push(format!("nx: the seven-point stencil needs nx >= 6, got {}", self.nx));
        }
        let twice_s = 2.0 * self.s;
        if !(self.s >= 0.0 && (twice_s - twice_s.round()).abs() < 1e-12) {
            errs.push(format!("s: must be a non-negative multiple of 1/2, got {}", self.s));
        } else if self.dimension() > model::MAX_DIMENSION {
            errs.push(format!("s, nx: dimension {} exceeds {}", self.dimension(), model::MAX_DIMENSION));
        }
        if let Err(e) = self.propagation().validate() {
            errs.push(format!("dt, record_every, t_final: {e}"));
        }
        if self.mode.is_stochastic() {
            if self.bundles == 0 {
                errs.push("bundles: must be at least 1".to_string());
            }
            if self.mode.is_jackknife() && self.bundles % 2 != 0 {
                errs.push(format!("bundles: jackknife modes need an even bundle count, got {}", self.bundles));
            }
            if self.realizations == 0 {
                errs.push("realizations: must be at least 1".to_string());
            }
            if self.compute_stats && self.realizations < 2 {
                errs.push(format!(
                    "realizations: ensemble statistics need at least 2 realizations, got {}",
                    self.realizations
                ));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reads a scenario config, or the config embedded in a run manifest.
///
/// Only the schema is checked here; values are validated when the config
/// is used, so that command-line overrides apply first.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let cfg: ScenarioConfig = match value.get("config") {
        Some(inner) if value.get("software_version").is_some() => serde_json::from_value(inner.clone())?,
        _ => serde_json::from_value(value)?,
    };
    Ok(cfg)
}

/// A model expressed in its energy eigenbasis, with its Davies operators
/// and initial state.
#[derive(Debug, Clone)]
pub struct System {
    pub model: SpinOscillatorModel,
    pub eigen: EigenSystem,
    pub decomposition: BohrDecomposition,
    /// `H` in its eigenbasis.
    pub hamiltonian: Hamiltonian,
    /// The position operator `σ_0 ⊗ X` in the eigenbasis.
    pub position: CMatrix,
    /// The initial state in the eigenbasis.
    pub rho0: DensityMatrix,
}

impl System {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = build_grid(cfg.x0, cfg.dx, cfg.nx)?;
        let morse = MorseParams::new(cfg.v_inf, cfg.a, cfg.u_max, cfg.mass)?;
        let model = build_model(grid, morse, cfg.s, cfg.gap, cfg.alpha)?;
        let eigen = eigendecompose(&model.hamiltonian.view())?;
        let decomposition =
            BohrDecomposition::build(&eigen, &model.x_operator.view(), &cfg.coupling(), &cfg.bohr_options())?;
        let rho0 = model::initial_state(&eigen, cfg.xi)?;
        Ok(System {
            hamiltonian: Hamiltonian::Diagonal(eigen.energies.clone()),
            position: decomposition.x_eigen.clone(),
            model,
            eigen,
            decomposition,
            rho0,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }
}
