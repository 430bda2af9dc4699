//! Full and stochastically bundled Lindblad dissipators.
//!
//! Both act on density matrices in the eigenbasis of the system Hamiltonian
//! and share the form `Σ_k (A_k ρ A_k^H - ½{A_k^H A_k, ρ})`. The
//! anticommutator part only needs `G = Σ_k A_k^H A_k`, which is precomputed
//! once per dissipator.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::linalg::{self, gemm, ONE, ZERO};
use crate::model::DensityMatrix;
use crate::spectral::{BohrDecomposition, SparseOperator};
use crate::{CMatrix, Error, Result, C64};

/// A linear map `ρ -> Dρ`.
pub trait Dissipator: Send + Sync {
    fn dim(&self) -> usize;

    /// Overwrites `out` with `Dρ`.
    fn apply_into(&self, rho: &ArrayView2<C64>, out: &mut CMatrix);

    fn apply(&self, rho: &ArrayView2<C64>) -> CMatrix {
        let mut out = CMatrix::zeros((self.dim(), self.dim()));
        self.apply_into(rho, &mut out);
        out
    }
}

/// The zero dissipator (closed-system evolution).
#[derive(Debug, Clone, Copy)]
pub struct NoDissipator(pub usize);

impl Dissipator for NoDissipator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, _rho: &ArrayView2<C64>, out: &mut CMatrix) {
        out.fill(ZERO);
    }
}

/// `out = J - ½(Gρ + ρG)` given `J` already in `out`, for Hermitian `ρ`, `G`.
fn subtract_anticommutator(g: &Anticommutator, rho: &ArrayView2<C64>, out: &mut CMatrix) {
    let n = rho.nrows();
    match g {
        Anticommutator::Diagonal(d) => {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] -= rho[(i, j)] * (0.5 * (d[i] + d[j]));
                }
            }
        }
        Anticommutator::Dense(g) => {
            let mut a = CMatrix::zeros((n, n));
            gemm(ONE, &g.view(), rho, ZERO, &mut a);
            // ρG = (Gρ)^H
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] -= (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Anticommutator {
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

impl Anticommutator {
    fn from_dense(g: CMatrix) -> Self {
        let n = g.nrows();
        let off_diag = (0..n).any(|i| (0..n).any(|j| i != j && g[(i, j)] != ZERO));
        if off_diag {
            Anticommutator::Dense(g)
        } else {
            Anticommutator::Diagonal((0..n).map(|i| g[(i, i)].re).collect())
        }
    }

    fn to_dense(&self) -> CMatrix {
        match self {
            Anticommutator::Dense(g) => g.clone(),
            Anticommutator::Diagonal(d) => {
                CMatrix::from_diag(&ndarray::Array1::from_iter(d.iter().map(|&x| C64::new(x, 0.0))))
            }
        }
    }
}

/// How the full dissipator evaluates its jump terms `Σ_ω γ L_ω ρ L_ω^H`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FullStrategy {
    /// Exploit the sparsity of `L_ω` in the eigenbasis.
    #[default]
    Sparse,
    /// Two dense matrix products per Lindblad operator, `O(N_B N³)`.
    Dense,
}

/// The deterministic Davies dissipator `Σ_ω γ(ω) (L_ω ρ L_ω^H - ½{L_ω^H L_ω, ρ})`.
#[derive(Debug, Clone)]
pub struct DaviesDissipator {
    dim: usize,
    /// `√γ(ω) L_ω`, with entries sorted by row.
    weighted: Vec<SparseOperator>,
    g: Anticommutator,
    strategy: FullStrategy,
}

impl DaviesDissipator {
    pub fn new(decomp: &BohrDecomposition) -> Self {
        Self::with_strategy(decomp, FullStrategy::Sparse)
    }

    pub fn with_strategy(decomp: &BohrDecomposition, strategy: FullStrategy) -> Self {
        let dim = decomp.dim();
        let weighted: Vec<SparseOperator> = decomp
            .lindblads
            .iter()
            .zip(&decomp.rates)
            .map(|(l, &rate)| {
                let s = rate.sqrt();
                let mut entries: Vec<_> = l.entries.iter().map(|&(i, j, v)| (i, j, v * s)).collect();
                entries.sort_by_key(|&(i, j, _)| (i, j));
                SparseOperator { dim, entries }
            })
            .collect();
        // G = Σ L^H L: (L^H L)_{jl} = Σ_i conj(L_ij) L_il over entries sharing row i.
        let mut g = CMatrix::zeros((dim, dim));
        for op in &weighted {
            for row in op.entries.chunk_by(|a, b| a.0 == b.0) {
                for &(_, j, a) in row {
                    for &(_, l, b) in row {
                        g[(j, l)] += a.conj() * b;
                    }
                }
            }
        }
        DaviesDissipator { dim, weighted, g: Anticommutator::from_dense(g), strategy }
    }

    pub fn strategy(&self) -> FullStrategy {
        self.strategy
    }

    pub fn operator_count(&self) -> usize {
        self.weighted.len()
    }

    /// `Σ_ω γ(ω) L_ω^H L_ω`.
    pub fn anticommutator_matrix(&self) -> CMatrix {
        self.g.to_dense()
    }

    fn jumps_sparse(&self, rho: &ArrayView2<C64>, out: &mut CMatrix) {
        for op in &self.weighted {
            // (L ρ L^H)_{ik} = Σ L_ij ρ_jl conj(L_kl)
            for &(i, j, a) in &op.entries {
                for &(k, l, b) in &op.entries {
                    out[(i, k)] += a * rho[(j, l)] * b.conj();
                }
            }
        }
    }

    fn jumps_dense(&self, rho: &ArrayView2<C64>, out: &mut CMatrix) {
        let n = self.dim;
        let mut l = CMatrix::zeros((n, n));
        let mut l_adj = CMatrix::zeros((n, n));
        let mut t = CMatrix::zeros((n, n));
        for op in &self.weighted {
            for &(i, j, v) in &op.entries {
                l[(i, j)] = v;
                l_adj[(j, i)] = v.conj();
            }
            gemm(ONE, &l.view(), rho, ZERO, &mut t);
            gemm(ONE, &t.view(), &l_adj.view(), ONE, out);
            for &(i, j, _) in &op.entries {
                l[(i, j)] = ZERO;
                l_adj[(j, i)] = ZERO;
            }
        }
    }
}

impl Dissipator for DaviesDissipator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, rho: &ArrayView2<C64>, out: &mut CMatrix) {
        out.fill(ZERO);
        match self.strategy {
            FullStrategy::Sparse => self.jumps_sparse(rho, out),
            FullStrategy::Dense => self.jumps_dense(rho, out),
        }
        subtract_anticommutator(&self.g, rho, out);
    }
}

/// `Dρ` for the full dissipator of `decomp`.
pub fn apply_full_dissipator(rho: &DensityMatrix, decomp: &BohrDecomposition) -> Result<CMatrix> {
    if rho.dim() != decomp.dim() {
        return Err(Error::Dimension { expected: decomp.dim(), found: rho.dim() });
    }
    Ok(DaviesDissipator::new(decomp).apply(&rho.view()))
}

/// Distribution of the random coefficients `r^ω`. Both have zero mean and
/// `E|r|² = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomVectorKind {
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// `e^{iθ}` with `θ` uniform on `[0, 2π)`.
    #[default]
    UnitCircle,
}

pub fn sample_random_vector<R: Rng + ?Sized>(n: usize, kind: RandomVectorKind, rng: &mut R) -> Vec<C64> {
    match kind {
        RandomVectorKind::Rademacher => {
            (0..n).map(|_| if rng.random::<bool>() { ONE } else { -ONE }).collect()
        }
        RandomVectorKind::UnitCircle => (0..n)
            .map(|_| {
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                C64::from_polar(1.0, theta)
            })
            .collect(),
    }
}

/// Supplies the coefficient vector `r_m` for bundle `m`.
pub trait CoefficientSource {
    fn coefficients(&mut self, bundle: usize, n: usize) -> Vec<C64>;

    /// Reproducibility record, if the source has one.
    fn seed_record(&self, _bundles: usize) -> Option<SeedRecord> {
        None
    }
}

/// Counter-based random streams.
///
/// Bundle `m` of realization `r` draws from a ChaCha20 generator seeded with
/// `master_seed` (through `SeedableRng::seed_from_u64`) on stream
/// `r · 2³² + m`, starting at word 0. Any single bundle of any realization
/// can therefore be regenerated in isolation, and the first `M/2` bundles of
/// a size-`M` set are exactly the bundles of the size-`M/2` set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededStreams {
    pub master_seed: u64,
    pub kind: RandomVectorKind,
    pub realization: u32,
}

impl SeededStreams {
    pub fn new(master_seed: u64, kind: RandomVectorKind, realization: u32) -> Self {
        SeededStreams { master_seed, kind, realization }
    }

    pub fn stream_rng(&self, bundle: u32) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(((self.realization as u64) << 32) | bundle as u64);
        rng
    }
}

impl CoefficientSource for SeededStreams {
    fn coefficients(&mut self, bundle: usize, n: usize) -> Vec<C64> {
        let bundle = u32::try_from(bundle).expect("bundle index fits in 32 bits");
        sample_random_vector(n, self.kind, &mut self.stream_rng(bundle))
    }

    fn seed_record(&self, bundles: usize) -> Option<SeedRecord> {
        Some(SeedRecord { master_seed: self.master_seed, kind: self.kind, realization: self.realization, bundles })
    }
}

/// Enough to regenerate a bundled dissipator bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master_seed: u64,
    pub kind: RandomVectorKind,
    pub realization: u32,
    pub bundles: usize,
}

/// Identifies the `(L_ω, γ(ω))` set a dissipator was sampled from.
pub fn decomposition_hash(decomp: &BohrDecomposition) -> String {
    let mut h = Sha256::new();
    h.update((decomp.dim() as u64).to_le_bytes());
    for ((w, rate), l) in decomp.frequencies.iter().zip(&decomp.rates).zip(&decomp.lindblads) {
        h.update(w.to_bits().to_le_bytes());
        h.update(rate.to_bits().to_le_bytes());
        for &(i, j, v) in &l.entries {
            h.update((i as u64).to_le_bytes());
            h.update((j as u64).to_le_bytes());
            h.update(v.re.to_bits().to_le_bytes());
            h.update(v.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(&h.finalize()[..8])
}

/// `M` bundled operators `R_m = Σ_ω (r_m^ω / √M) √γ(ω) L_ω`.
#[derive(Debug, Clone)]
pub struct BundledDissipator {
    pub m: usize,
    pub operators: Vec<CMatrix>,
    pub seed_record: Option<SeedRecord>,
    pub source_hash: String,
    g: Anticommutator,
}

impl BundledDissipator {
    /// Draws `m` coefficient vectors from `source` and bundles them.
    pub fn build(decomp: &BohrDecomposition, m: usize, source: &mut dyn CoefficientSource) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("bundle count must be at least 1".into()));
        }
        let nb = decomp.n_bohr();
        let coeffs: Vec<Vec<C64>> = (0..m).map(|b| source.coefficients(b, nb)).collect();
        let mut bd = Self::from_coefficients(decomp, &coeffs)?;
        bd.seed_record = source.seed_record(m);
        Ok(bd)
    }

    /// Bundles explicit coefficient vectors, one per bundle; `M` is the
    /// number of vectors.
    pub fn from_coefficients(decomp: &BohrDecomposition, coeffs: &[Vec<C64>]) -> Result<Self> {
        let m = coeffs.len();
        if m == 0 {
            return Err(Error::Parameter("bundle count must be at least 1".into()));
        }
        let nb = decomp.n_bohr();
        if nb == 0 {
            return Err(Error::Parameter("cannot bundle an empty set of Lindblad operators".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| c.len() != nb) {
            return Err(Error::Dimension { expected: nb, found: bad.len() });
        }
        let dim = decomp.dim();
        let inv_sqrt_m = 1.0 / (m as f64).sqrt();
        let weights: Vec<f64> = decomp.rates.iter().map(|r| r.sqrt() * inv_sqrt_m).collect();
        let operators: Vec<CMatrix> = coeffs
            .iter()
            .map(|r| {
                let mut op = CMatrix::zeros((dim, dim));
                for ((l, &w), &rw) in decomp.lindblads.iter().zip(&weights).zip(r) {
                    l.scatter_into(&mut op, rw * w);
                }
                op
            })
            .collect();
        let mut g = CMatrix::zeros((dim, dim));
        for op in &operators {
            let adj = linalg::adjoint(&op.view());
            gemm(ONE, &adj.view(), &op.view(), ONE, &mut g);
        }
        linalg::hermitize(&mut g);
        Ok(BundledDissipator {
            m,
            operators,
            seed_record: None,
            source_hash: decomposition_hash(decomp),
            g: Anticommutator::from_dense(g),
        })
    }
}

impl Dissipator for BundledDissipator {
    fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    fn apply_into(&self, rho: &ArrayView2<C64>, out: &mut CMatrix) {
        let n = self.dim();
        out.fill(ZERO);
        let mut t = CMatrix::zeros((n, n));
        for r in &self.operators {
            gemm(ONE, &r.view(), rho, ZERO, &mut t);
            let r_adj = r.t().mapv(|z| z.conj());
            gemm(ONE, &t.view(), &r_adj.view(), ONE, out);
        }
        subtract_anticommutator(&self.g, rho, out);
    }
}

/// `D_{1..M} ρ`.
pub fn apply_bundled(rho: &DensityMatrix, bd: &BundledDissipator) -> Result<CMatrix> {
    if rho.dim() != bd.dim() {
        return Err(Error::Dimension { expected: bd.dim(), found: rho.dim() });
    }
    Ok(bd.apply(&rho.view()))
}
