//! Spectral data of the system Hamiltonian and the Davies Lindblad operators
//! built from it.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, gemm, ONE, ZERO};
use crate::model::DensityMatrix;
use crate::{CMatrix, Error, Result, C64};

/// Relative threshold for the component that fixes an eigenvector's phase.
const GAUGE_THRESHOLD: f64 = 1e-3;

/// Ascending spectrum and orthonormal eigenvectors (columns of `kets`).
///
/// Eigenvector phases are fixed so that the first component whose magnitude
/// exceeds `1e-3` of the column maximum is real and positive. Observables
/// such as the initial position depend on this choice through the coherent
/// initial state.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub kets: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `V^H A V`.
    pub fn to_eigenbasis(&self, a: &ArrayView2<C64>) -> CMatrix {
        let n = self.dim();
        let vh = linalg::adjoint(&self.kets.view());
        let mut tmp = CMatrix::zeros((n, n));
        gemm(ONE, a, &self.kets.view(), ZERO, &mut tmp);
        let mut out = CMatrix::zeros((n, n));
        gemm(ONE, &vh.view(), &tmp.view(), ZERO, &mut out);
        out
    }

    /// `V A V^H`.
    pub fn from_eigenbasis(&self, a: &ArrayView2<C64>) -> CMatrix {
        let n = self.dim();
        let vh = linalg::adjoint(&self.kets.view());
        let mut tmp = CMatrix::zeros((n, n));
        gemm(ONE, a, &vh.view(), ZERO, &mut tmp);
        let mut out = CMatrix::zeros((n, n));
        gemm(ONE, &self.kets.view(), &tmp.view(), ZERO, &mut out);
        out
    }
}

pub fn eigendecompose(h: &ArrayView2<C64>) -> Result<EigenSystem> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Dimension { expected: n, found: h.ncols() });
    }
    let scale = linalg::max_abs(h).max(1.0);
    let tol = 1e-10 * scale;
    let dev = linalg::hermiticity_error(h);
    if dev > tol {
        return Err(Error::NotHermitian { deviation: dev, tolerance: tol });
    }
    let mut sym = h.to_owned();
    linalg::hermitize(&mut sym);
    let evd = nalgebra::SymmetricEigen::new(linalg::to_nalgebra(&sym.view()));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| evd.eigenvalues[a].total_cmp(&evd.eigenvalues[b]));

    let energies: Vec<f64> = order.iter().map(|&k| evd.eigenvalues[k]).collect();
    let mut kets = CMatrix::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        let v = evd.eigenvectors.column(k);
        let peak = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let anchor = v.iter().find(|z| z.norm() > GAUGE_THRESHOLD * peak).copied().unwrap_or(ONE);
        let phase = anchor.conj() / anchor.norm();
        for row in 0..n {
            kets[(row, col)] = v[row] * phase;
        }
    }
    Ok(EigenSystem { energies, kets })
}

/// Coupling-function parameters for `γ(ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub gamma_star: f64,
    pub omega_c: f64,
    pub kbt: f64,
}

impl CouplingParams {
    pub fn new(gamma_star: f64, omega_c: f64, kbt: f64) -> Result<Self> {
        let p = CouplingParams { gamma_star, omega_c, kbt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma_star", self.gamma_star), ("omega_c", self.omega_c), ("kbt", self.kbt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `γ(ω) = γ_* exp(-(ω/ω_c)²/2) exp(ω / 2k_BT)`; satisfies
/// `γ(ω) = e^{ω/k_BT} γ(-ω)`.
pub fn coupling_gamma(omega: f64, p: &CouplingParams) -> f64 {
    let r = omega / p.omega_c;
    p.gamma_star * (-0.5 * r * r + 0.5 * omega / p.kbt).exp()
}

/// Thresholds used when grouping matrix elements by Bohr frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BohrOptions {
    /// Gap threshold for frequency clustering, relative to `ε_max - ε_min`.
    pub bin_tol_rel: f64,
    /// Matrix elements below this fraction of `max |X|` are treated as zero.
    pub drop_tol_rel: f64,
}

impl Default for BohrOptions {
    fn default() -> Self {
        BohrOptions { bin_tol_rel: 1e-9, drop_tol_rel: 1e-14 }
    }
}

/// Distinct Bohr frequencies (ascending) and the `(n, m)` pairs that share
/// each one. Pair `(n, m)` has frequency `ε_m - ε_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrSpectrum {
    pub frequencies: Vec<f64>,
    pub pair_groups: Vec<Vec<(usize, usize)>>,
}

/// Groups every pair with a non-negligible `<n|X|m>` by its frequency.
/// `x_eigen` is the coupling operator in the eigenbasis of `eig`.
pub fn enumerate_bohr(eig: &EigenSystem, x_eigen: &ArrayView2<C64>, opts: &BohrOptions) -> BohrSpectrum {
    let e = &eig.energies;
    let n = e.len();
    let span = match (e.first(), e.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    let bin_tol = opts.bin_tol_rel * span;
    let drop_tol = opts.drop_tol_rel * linalg::max_abs(x_eigen);

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if x_eigen[(i, j)].norm() > drop_tol {
                let w = if i == j { 0.0 } else { e[j] - e[i] };
                pairs.push((w, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut frequencies = Vec::new();
    let mut pair_groups: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut start = 0;
    for k in 1..=pairs.len() {
        if k == pairs.len() || pairs[k].0 - pairs[k - 1].0 > bin_tol {
            let lo = pairs[start].0;
            let hi = pairs[k - 1].0;
            // midpoint keeps the set exactly symmetric under ω -> -ω
            frequencies.push(0.5 * (lo + hi));
            pair_groups.push(pairs[start..k].iter().map(|&(_, i, j)| (i, j)).collect());
            start = k;
        }
    }
    BohrSpectrum { frequencies, pair_groups }
}

/// Sparse matrix as a list of `(row, col, value)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOperator {
    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros((self.dim, self.dim));
        self.scatter_into(&mut out, ONE);
        out
    }

    /// `out[i, j] += scale * value` for each entry.
    pub fn scatter_into(&self, out: &mut CMatrix, scale: C64) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += scale * v;
        }
    }

    pub fn adjoint(&self) -> SparseOperator {
        SparseOperator { dim: self.dim, entries: self.entries.iter().map(|&(i, j, v)| (j, i, v.conj())).collect() }
    }
}

/// `(L_ω)_{nm} = <n|X|m>` for the pairs in group `ω`, zero elsewhere.
pub fn lindblad_operators(x_eigen: &ArrayView2<C64>, groups: &[Vec<(usize, usize)>]) -> Result<Vec<SparseOperator>> {
    let n = x_eigen.nrows();
    let mut seen = vec![false; n * n];
    groups
        .iter()
        .map(|group| {
            let mut entries = Vec::with_capacity(group.len());
            for &(i, j) in group {
                if i >= n || j >= n {
                    return Err(Error::Dimension { expected: n, found: i.max(j) + 1 });
                }
                if std::mem::replace(&mut seen[i * n + j], true) {
                    return Err(Error::OverlappingGroups(i, j));
                }
                entries.push((i, j, x_eigen[(i, j)]));
            }
            Ok(SparseOperator { dim: n, entries })
        })
        .collect()
}

/// The Davies decomposition: Bohr frequencies, Lindblad operators (in the
/// eigenbasis) and their rates.
#[derive(Debug, Clone)]
pub struct BohrDecomposition {
    pub frequencies: Vec<f64>,
    pub pair_groups: Vec<Vec<(usize, usize)>>,
    pub lindblads: Vec<SparseOperator>,
    pub rates: Vec<f64>,
    /// The coupling operator in the eigenbasis.
    pub x_eigen: CMatrix,
}

impl BohrDecomposition {
    /// Builds the decomposition for coupling operator `x` given in the
    /// original (site) basis.
    pub fn build(eig: &EigenSystem, x: &ArrayView2<C64>, coupling: &CouplingParams, opts: &BohrOptions) -> Result<Self> {
        if x.nrows() != eig.dim() {
            return Err(Error::Dimension { expected: eig.dim(), found: x.nrows() });
        }
        coupling.validate()?;
        let x_eigen = eig.to_eigenbasis(x);
        let spectrum = enumerate_bohr(eig, &x_eigen.view(), opts);
        let lindblads = lindblad_operators(&x_eigen.view(), &spectrum.pair_groups)?;
        let rates = spectrum.frequencies.iter().map(|&w| coupling_gamma(w, coupling)).collect();
        Ok(BohrDecomposition {
            frequencies: spectrum.frequencies,
            pair_groups: spectrum.pair_groups,
            lindblads,
            rates,
            x_eigen,
        })
    }

    /// Assembles a decomposition from explicit operators and rates. Used for
    /// toy problems that do not come from a Hamiltonian.
    pub fn from_parts(dim: usize, operators: Vec<CMatrix>, rates: Vec<f64>) -> Result<Self> {
        if operators.len() != rates.len() {
            return Err(Error::Dimension { expected: operators.len(), found: rates.len() });
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::Parameter(format!("rates must be non-negative, got {r}")));
        }
        let mut lindblads = Vec::with_capacity(operators.len());
        for op in &operators {
            if op.dim() != (dim, dim) {
                return Err(Error::Dimension { expected: dim, found: op.nrows() });
            }
            let entries = op.indexed_iter().filter(|(_, v)| **v != ZERO).map(|((i, j), &v)| (i, j, v)).collect();
            lindblads.push(SparseOperator { dim, entries });
        }
        let mut x_eigen = CMatrix::zeros((dim, dim));
        for l in &lindblads {
            l.scatter_into(&mut x_eigen, ONE);
        }
        let k = operators.len();
        Ok(BohrDecomposition {
            frequencies: (0..k).map(|i| i as f64).collect(),
            pair_groups: lindblads.iter().map(|l| l.entries.iter().map(|&(i, j, _)| (i, j)).collect()).collect(),
            lindblads,
            rates,
            x_eigen,
        })
    }

    pub fn dim(&self) -> usize {
        self.x_eigen.nrows()
    }

    /// `N_B`, the number of Bohr frequencies with a nonzero operator.
    pub fn n_bohr(&self) -> usize {
        self.frequencies.len()
    }

    /// Number of frequencies whose rate is at least `floor * max rate`.
    pub fn n_bohr_above_rate(&self, floor: f64) -> usize {
        let top = self.rates.iter().cloned().fold(0.0, f64::max);
        self.rates.iter().filter(|&&r| r >= floor * top).count()
    }

    /// `Σ_ω L_ω` as a dense matrix.
    pub fn operator_sum(&self) -> CMatrix {
        let mut out = CMatrix::zeros((self.dim(), self.dim()));
        for l in &self.lindblads {
            l.scatter_into(&mut out, ONE);
        }
        out
    }

    /// `max_ω ‖L_{-ω} - L_ω^H‖_max`. `None` if some `-ω` is missing.
    pub fn adjoint_pairing_error(&self) -> Option<f64> {
        let k = self.frequencies.len();
        let mut worst = 0.0_f64;
        for a in 0..k {
            let b = k - 1 - a;
            if self.frequencies[b] != -self.frequencies[a] {
                return None;
            }
            let d = self.lindblads[b].to_dense() - self.lindblads[a].adjoint().to_dense();
            worst = worst.max(linalg::max_abs(&d.view()));
        }
        Some(worst)
    }
}

/// Normalized Boltzmann weights, computed with the spectrum shifted by its
/// minimum.
pub fn gibbs_weights(energies: &[f64], kbt: f64) -> Vec<f64> {
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|&e| (-(e - e_min) / kbt).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// The Gibbs state of `h` at temperature `kbt`, in the basis of `h`.
pub fn thermal_state(h: &ArrayView2<C64>, kbt: f64) -> Result<DensityMatrix> {
    if !(kbt > 0.0) {
        return Err(Error::Parameter(format!("kbt must be positive, got {kbt}")));
    }
    let eig = eigendecompose(h)?;
    let p = gibbs_weights(&eig.energies, kbt);
    let diag = Array2::from_diag(&ndarray::Array1::from_iter(p.iter().map(|&x| C64::new(x, 0.0))));
    let mut rho = eig.from_eigenbasis(&diag.view());
    linalg::hermitize(&mut rho);
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// The Gibbs state expressed directly in the eigenbasis of `eig`.
pub fn thermal_state_eigenbasis(eig: &EigenSystem, kbt: f64) -> DensityMatrix {
    let p = gibbs_weights(&eig.energies, kbt);
    let diag = Array2::from_diag(&ndarray::Array1::from_iter(p.iter().map(|&x| C64::new(x, 0.0))));
    DensityMatrix::from_matrix_unchecked(diag)
}
