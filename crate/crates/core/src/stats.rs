//! Jackknife extrapolation, ensemble error statistics and power-law fits.

use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result};

fn check_aligned(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Alignment(format!("{what}: lengths {a} and {b} differ")));
    }
    Ok(())
}

/// `2 y_M - y_{M/2}`, pointwise.
pub fn jackknife1(full: &[f64], half: &[f64]) -> Result<Vec<f64>> {
    check_aligned("jackknife1", full.len(), half.len())?;
    Ok(full.iter().zip(half).map(|(f, h)| 2.0 * f - h).collect())
}

/// `2 y_M - ½(y_a + y_b)` for the two disjoint halves `a`, `b`, pointwise.
pub fn jackknife2(full: &[f64], half_a: &[f64], half_b: &[f64]) -> Result<Vec<f64>> {
    check_aligned("jackknife2", full.len(), half_a.len())?;
    check_aligned("jackknife2", full.len(), half_b.len())?;
    Ok(full.iter().zip(half_a).zip(half_b).map(|((f, a), b)| 2.0 * f - 0.5 * (a + b)).collect())
}

fn check_same_shape(what: &str, a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Alignment(format!("{what}: shapes {:?} and {:?} differ", a.dim(), b.dim())));
    }
    Ok(())
}

/// `2 ρ_M - ρ_{M/2}`.
pub fn jackknife1_matrix(full: &CMatrix, half: &CMatrix) -> Result<CMatrix> {
    check_same_shape("jackknife1", full, half)?;
    Ok(full * 2.0 - half)
}

/// `2 ρ_M - ½(ρ_a + ρ_b)`.
pub fn jackknife2_matrix(full: &CMatrix, half_a: &CMatrix, half_b: &CMatrix) -> Result<CMatrix> {
    check_same_shape("jackknife2", full, half_a)?;
    check_same_shape("jackknife2", full, half_b)?;
    Ok(full * 2.0 - (half_a + half_b) * 0.5)
}

/// Recorded expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Energy,
    Position,
    Purity,
}

impl Observable {
    pub const ALL: [Observable; 3] = [Observable::Energy, Observable::Position, Observable::Purity];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Energy => "energy",
            Observable::Position => "position",
            Observable::Purity => "purity",
        }
    }
}

/// Per-time statistics of `R` realizations against a reference trajectory.
///
/// `std` is the sample standard deviation (divisor `R - 1`) and
/// `rmse = sqrt(mean_r (y_r - ref)²)`, so that
/// `rmse² = bias² + std² (R - 1) / R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub bias: Vec<f64>,
    pub std: Vec<f64>,
    pub rmse: Vec<f64>,
}

pub fn ensemble_stats(times: &[f64], samples: &[Vec<f64>], reference: &[f64]) -> Result<EnsembleStats> {
    let r = samples.len();
    if r < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: r });
    }
    let n = times.len();
    check_aligned("reference", n, reference.len())?;
    for s in samples {
        check_aligned("realization", n, s.len())?;
    }
    let rf = r as f64;
    let mut out = EnsembleStats {
        times: times.to_vec(),
        mean: Vec::with_capacity(n),
        bias: Vec::with_capacity(n),
        std: Vec::with_capacity(n),
        rmse: Vec::with_capacity(n),
    };
    for t in 0..n {
        let mean = samples.iter().map(|s| s[t]).sum::<f64>() / rf;
        let var = samples.iter().map(|s| (s[t] - mean).powi(2)).sum::<f64>() / (rf - 1.0);
        let mse = samples.iter().map(|s| (s[t] - reference[t]).powi(2)).sum::<f64>() / rf;
        out.mean.push(mean);
        out.bias.push(mean - reference[t]);
        out.std.push(var.sqrt());
        out.rmse.push(mse.sqrt());
    }
    Ok(out)
}

/// Largest RMSE over the trajectory and the earliest time it occurs.
pub fn max_rmse(stats: &EnsembleStats) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (&t, &e) in stats.times.iter().zip(&stats.rmse) {
        if best.is_none_or(|(b, _)| e > b) {
            best = Some((e, t));
        }
    }
    best
}

/// `y ≈ prefactor · x^exponent`, fitted by least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Coefficient of determination in log–log space.
    pub r_squared: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<ScalingFit> {
    check_aligned("power-law fit", x.len(), y.len())?;
    if x.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: x.len() });
    }
    if let Some(bad) = x.iter().chain(y).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!("power-law fit needs positive finite data, got {bad}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("power-law fit needs at least two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ScalingFit { exponent: slope, prefactor: intercept.exp(), r_squared })
}
