//! The discretized Morse oscillator coupled to a qudit.
//!
//! The total Hamiltonian acts on `spin ⊗ oscillator`; basis index
//! `i * n_points + n` labels spin level `i` and grid point `n`.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, kron};
use crate::spectral::EigenSystem;
use crate::{CMatrix, Error, Result, C64};

/// Largest Hilbert-space dimension [`build_model`] will assemble.
pub const MAX_DIMENSION: usize = 8192;

/// Seven-point second-derivative stencil, `a_0 .. a_3` in units of `1/dx²`.
pub const STENCIL: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// Uniform real-space grid `x_n = x0 + n dx`, `n = 0..=nx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n_points: usize,
    pub points: Vec<f64>,
}

impl Grid {
    pub fn last(&self) -> f64 {
        *self.points.last().expect("grid has at least one point")
    }
}

pub fn build_grid(x0: f64, dx: f64, nx: usize) -> Result<Grid> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::Parameter(format!("grid spacing must be positive, got {dx}")));
    }
    if !x0.is_finite() {
        return Err(Error::Parameter(format!("grid origin must be finite, got {x0}")));
    }
    let points = (0..=nx).map(|n| x0 + n as f64 * dx).collect();
    Ok(Grid { x0, dx, n_points: nx + 1, points })
}

/// Morse potential parameters, atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseParams {
    pub v_inf: f64,
    pub a: f64,
    pub u_max: f64,
    pub mass: f64,
}

impl MorseParams {
    pub fn new(v_inf: f64, a: f64, u_max: f64, mass: f64) -> Result<Self> {
        let p = MorseParams { v_inf, a, u_max, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_inf", self.v_inf), ("a", self.a), ("u_max", self.u_max), ("mass", self.mass)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `min(u_max, v_inf (1 - e^{-a x})²)`: the Morse well with its repulsive
/// wall capped at `u_max`.
pub fn morse_potential(x: f64, p: &MorseParams) -> f64 {
    let raw = p.v_inf * (1.0 - (-p.a * x).exp()).powi(2);
    raw.min(p.u_max)
}

/// Seven-point second-derivative matrix with hard walls, in units of `1/dx²`
/// already applied.
pub fn second_derivative_matrix(grid: &Grid) -> Result<Array2<f64>> {
    let n = grid.n_points;
    if n < 7 {
        return Err(Error::Parameter(format!(
            "seven-point stencil needs at least 7 grid points, got {n}"
        )));
    }
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let mut d2 = Array2::zeros((n, n));
    for i in 0..n {
        for (k, &c) in STENCIL.iter().enumerate() {
            if i + k < n {
                d2[(i, i + k)] = c * inv_dx2;
            }
            if k > 0 && i >= k {
                d2[(i, i - k)] = c * inv_dx2;
            }
        }
    }
    Ok(d2)
}

/// Kinetic energy `-(1 / 2m) D₂` (ħ = 1).
pub fn kinetic_matrix(grid: &Grid, mass: f64) -> Result<Array2<f64>> {
    if !(mass > 0.0) {
        return Err(Error::Parameter(format!("mass must be positive, got {mass}")));
    }
    Ok(second_derivative_matrix(grid)? * (-0.5 / mass))
}

/// The `(2s+1)`-dimensional spin matrices used in the coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSector {
    /// `2s`, so half-integers stay exact.
    pub twice_s: u32,
    pub dim: usize,
    pub sigma0: Array2<f64>,
    pub sigmaz: Array2<f64>,
    pub sigmax: Array2<f64>,
}

impl SpinSector {
    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }
}

pub fn spin_matrices(s: f64) -> Result<SpinSector> {
    let twice = 2.0 * s;
    if !(s >= 0.0) || !twice.is_finite() || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::Parameter(format!("spin must be a non-negative half-integer, got {s}")));
    }
    let twice_s = twice.round() as u32;
    let dim = twice_s as usize + 1;
    let sigma0 = Array2::eye(dim);
    let mut sigmaz = Array2::zeros((dim, dim));
    let mut sigmax = Array2::zeros((dim, dim));
    // Spinless sector: sigma_z = sigma_x = 0, so the spin terms drop out.
    if twice_s > 0 {
        for i in 0..dim {
            // entries m / s for m = -s, ..., s
            sigmaz[(i, i)] = (2.0 * i as f64 - twice_s as f64) / twice_s as f64;
            if i + 1 < dim {
                sigmax[(i, i + 1)] = 1.0;
                sigmax[(i + 1, i)] = 1.0;
            }
        }
    }
    Ok(SpinSector { twice_s, dim, sigma0, sigmaz, sigmax })
}

/// Morse oscillator ⊗ qudit, with the assembled Hamiltonian and the
/// system operator that couples to the bath.
#[derive(Debug, Clone)]
pub struct SpinOscillatorModel {
    pub grid: Grid,
    pub morse: MorseParams,
    pub spin: SpinSector,
    pub gap: f64,
    pub coupling: f64,
    pub hamiltonian: CMatrix,
    pub x_operator: CMatrix,
}

impl SpinOscillatorModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

fn complexify(a: &Array2<f64>) -> CMatrix {
    a.mapv(|x| C64::new(x, 0.0))
}

pub fn build_model(grid: Grid, morse: MorseParams, s: f64, gap: f64, alpha: f64) -> Result<SpinOscillatorModel> {
    morse.validate()?;
    if !gap.is_finite() || !alpha.is_finite() {
        return Err(Error::Parameter("gap and coupling must be finite".into()));
    }
    let spin = spin_matrices(s)?;
    let n = grid.n_points;
    let dim = spin
        .dim
        .checked_mul(n)
        .filter(|&d| d <= MAX_DIMENSION)
        .ok_or_else(|| Error::Parameter(format!("Hilbert space dimension ({} x {n}) exceeds {MAX_DIMENSION}", spin.dim)))?;

    let mut h0 = kinetic_matrix(&grid, morse.mass)?;
    for (i, &x) in grid.points.iter().enumerate() {
        h0[(i, i)] += morse_potential(x, &morse);
    }
    let x0 = Array2::from_diag(&Array1::from(grid.points.clone()));
    let ident = Array2::<f64>::eye(n);

    let h0 = complexify(&h0);
    let x0 = complexify(&x0);
    let ident = complexify(&ident);
    let s0 = complexify(&spin.sigma0);
    let sz = complexify(&spin.sigmaz);
    let sx = complexify(&spin.sigmax);

    let mut hamiltonian = kron(&s0.view(), &h0.view());
    hamiltonian = hamiltonian + kron(&sz.view(), &ident.view()) * C64::new(0.5 * gap, 0.0);
    hamiltonian = hamiltonian + kron(&sx.view(), &x0.view()) * C64::new(alpha, 0.0);
    let x_operator = kron(&s0.view(), &x0.view());
    debug_assert_eq!(hamiltonian.nrows(), dim);

    Ok(SpinOscillatorModel { grid, morse, spin, gap, coupling: alpha, hamiltonian, x_operator })
}

/// A density matrix. Arithmetic on it is done on the raw matrix; callers
/// re-symmetrize with [`DensityMatrix::symmetrize`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMatrix,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;

    /// Validates Hermiticity and unit trace.
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(Error::Dimension { expected: rho.nrows(), found: rho.ncols() });
        }
        let dev = linalg::hermiticity_error(&rho.view());
        if dev > Self::HERMITICITY_TOL {
            return Err(Error::NotHermitian { deviation: dev, tolerance: Self::HERMITICITY_TOL });
        }
        let tr = linalg::trace(&rho.view());
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::Parameter(format!("density matrix trace is {tr}, expected 1")));
        }
        Ok(DensityMatrix { rho })
    }

    /// Wraps a matrix without checking it; used for propagated states whose
    /// trace drift is a diagnostic rather than an error.
    pub fn from_matrix_unchecked(rho: CMatrix) -> Self {
        DensityMatrix { rho }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::DegenerateState);
        }
        let n = psi.len();
        let rho = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj() / norm2);
        Ok(DensityMatrix { rho })
    }

    /// `1 / N`.
    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { rho: CMatrix::eye(n) / C64::new(n as f64, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn view(&self) -> ArrayView2<'_, C64> {
        self.rho.view()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn symmetrize(&mut self) {
        linalg::hermitize(&mut self.rho);
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.rho.view())
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.rho.view(), &self.rho.view()).re
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.rho.view())
    }
}

/// Expansion coefficients `C_k = ε_k exp(-ε_k² / 2ξ²)` of the initial state.
pub fn initial_amplitudes(energies: &[f64], xi: f64) -> Vec<f64> {
    energies.iter().map(|&e| e * (-e * e / (2.0 * xi * xi)).exp()).collect()
}

/// The pure initial state `Σ_k C_k |k>`, normalized, expressed in the
/// eigenbasis of `eig`.
pub fn initial_state(eig: &EigenSystem, xi: f64) -> Result<DensityMatrix> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::Parameter(format!("xi must be positive, got {xi}")));
    }
    let c: Vec<C64> = initial_amplitudes(&eig.energies, xi).into_iter().map(|x| C64::new(x, 0.0)).collect();
    if c.iter().all(|z| *z == linalg::ZERO) {
        return Err(Error::DegenerateState);
    }
    DensityMatrix::pure(&c)
}
