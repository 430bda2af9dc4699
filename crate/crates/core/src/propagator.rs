//! Fixed-step fourth-order Runge–Kutta integration of the master equation
//! `dρ/dt = -i[H, ρ] + Dρ`.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::dissipator::Dissipator;
use crate::linalg::{self, gemm, ONE, ZERO};
use crate::model::DensityMatrix;
use crate::{CMatrix, Error, Result, C64};

/// Relative mismatch tolerated when `record_every / dt` or `t_final / record_every`
/// must be whole numbers.
const GRID_TOL: f64 = 1e-9;

/// Absolute imaginary residue tolerated in an expectation value, scaled by
/// `max(1, |value|)`.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub record_every: f64,
    pub t_final: f64,
}

fn whole_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let k = r.round();
    ((r - k).abs() <= GRID_TOL * k.max(1.0)).then_some(k as usize)
}

impl PropagationConfig {
    pub fn new(dt: f64, record_every: f64, t_final: f64) -> Result<Self> {
        let cfg = PropagationConfig { dt, record_every, t_final };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.record_every.is_finite() && self.record_every > 0.0) {
            return Err(Error::Parameter(format!("record_every must be positive, got {}", self.record_every)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Parameter(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if whole_ratio(self.record_every, self.dt).is_none_or(|k| k == 0) {
            return Err(Error::Parameter(format!(
                "record_every ({}) must be a whole multiple of dt ({})",
                self.record_every, self.dt
            )));
        }
        if whole_ratio(self.t_final, self.record_every).is_none() {
            return Err(Error::Parameter(format!(
                "t_final ({}) must be a whole multiple of record_every ({})",
                self.t_final, self.record_every
            )));
        }
        Ok(())
    }

    /// Steps between recorded samples.
    pub fn stride(&self) -> usize {
        whole_ratio(self.record_every, self.dt).unwrap_or(1).max(1)
    }

    /// Recorded samples after `t = 0`.
    pub fn n_records(&self) -> usize {
        whole_ratio(self.t_final, self.record_every).unwrap_or(0)
    }

    pub fn n_steps(&self) -> usize {
        self.n_records() * self.stride()
    }
}

/// The coherent part of the generator.
#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    /// Diagonal in the working basis (the energy eigenbasis).
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Diagonal(e) => e.len(),
            Hamiltonian::Dense(h) => h.nrows(),
        }
    }

    /// `out += -i[H, ρ]`.
    pub fn add_commutator(&self, rho: &ArrayView2<C64>, out: &mut CMatrix) {
        let n = rho.nrows();
        match self {
            Hamiltonian::Diagonal(e) => {
                for i in 0..n {
                    for j in 0..n {
                        // -i (E_i - E_j) ρ_ij
                        let z = rho[(i, j)] * (e[i] - e[j]);
                        out[(i, j)] += C64::new(z.im, -z.re);
                    }
                }
            }
            Hamiltonian::Dense(h) => {
                let mut a = CMatrix::zeros((n, n));
                gemm(ONE, &h.view(), rho, ZERO, &mut a);
                // [H, ρ] = Hρ - (Hρ)^H for Hermitian H, ρ
                for i in 0..n {
                    for j in 0..n {
                        let z = a[(i, j)] - a[(j, i)].conj();
                        out[(i, j)] += C64::new(z.im, -z.re);
                    }
                }
            }
        }
    }

    pub fn expectation(&self, rho: &ArrayView2<C64>) -> C64 {
        match self {
            Hamiltonian::Diagonal(e) => e.iter().enumerate().map(|(i, &ei)| rho[(i, i)] * ei).sum(),
            Hamiltonian::Dense(h) => linalg::trace_of_product(rho, &h.view()),
        }
    }
}

/// Writes `-i[H, ρ] + Dρ` into `out`.
pub fn lme_rhs(h: &Hamiltonian, d: &dyn Dissipator, rho: &ArrayView2<C64>, out: &mut CMatrix) {
    d.apply_into(rho, out);
    h.add_commutator(rho, out);
}

/// Scratch space for [`rk4_step`].
#[derive(Debug, Clone)]
pub struct Rk4Workspace {
    k: CMatrix,
    stage: CMatrix,
    acc: CMatrix,
}

impl Rk4Workspace {
    pub fn new(n: usize) -> Self {
        Rk4Workspace { k: CMatrix::zeros((n, n)), stage: CMatrix::zeros((n, n)), acc: CMatrix::zeros((n, n)) }
    }
}

/// Per-step RK4 amplification `|R(iz)|` of a free coherence rotating at
/// angular frequency `ω`, with `z = ω·δt`. Exact propagation keeps it at 1.
pub fn rk4_amplification(omega: f64, dt: f64) -> f64 {
    let z = omega * dt;
    C64::new(1.0 - z * z / 2.0 + z.powi(4) / 24.0, z - z.powi(3) / 6.0).norm()
}

/// Smallest acceptable amplification for the fastest coherence before a
/// run is flagged as under-resolved.
pub const MIN_RK4_AMPLIFICATION: f64 = 0.95;

/// Flags step sizes that damp the fastest Bohr coherence artificially.
pub fn step_size_warning(energies: &[f64], dt: f64) -> Option<String> {
    let (lo, hi) = (energies.first()?, energies.last()?);
    let omega = hi - lo;
    let amp = rk4_amplification(omega, dt);
    (amp < MIN_RK4_AMPLIFICATION).then(|| {
        format!(
            "dt = {dt} under-resolves the fastest Bohr frequency ({omega:.3}): ω·dt = {:.2}, RK4 keeps {amp:.3} of its coherence per step",
            omega * dt
        )
    })
}

/// One classical RK4 step followed by re-Hermitization. The trace is not
/// renormalized.
pub fn rk4_step(h: &Hamiltonian, d: &dyn Dissipator, rho: &mut CMatrix, dt: f64, ws: &mut Rk4Workspace) {
    let Rk4Workspace { k, stage, acc } = ws;
    // k1
    lme_rhs(h, d, &rho.view(), k);
    acc.zip_mut_with(k, |a, &x| *a = x);
    ndarray::Zip::from(&mut *stage).and(&*rho).and(&*k).for_each(|s, &r, &x| *s = r + x * (0.5 * dt));
    // k2
    lme_rhs(h, d, &stage.view(), k);
    acc.zip_mut_with(k, |a, &x| *a += x * 2.0);
    ndarray::Zip::from(&mut *stage).and(&*rho).and(&*k).for_each(|s, &r, &x| *s = r + x * (0.5 * dt));
    // k3
    lme_rhs(h, d, &stage.view(), k);
    acc.zip_mut_with(k, |a, &x| *a += x * 2.0);
    ndarray::Zip::from(&mut *stage).and(&*rho).and(&*k).for_each(|s, &r, &x| *s = r + x * dt);
    // k4
    lme_rhs(h, d, &stage.view(), k);
    acc.zip_mut_with(k, |a, &x| *a += x);
    rho.zip_mut_with(acc, |r, &a| *r += a * (dt / 6.0));
    linalg::hermitize(rho);
}

/// Expectation values recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub energy: f64,
    pub position: f64,
    pub purity: f64,
}

fn real_part(what: &'static str, z: C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_RESIDUE_TOL * z.re.abs().max(1.0) {
        return Err(Error::HermiticityDrift { what, residue: z.im });
    }
    Ok(z.re)
}

/// `Tr ρH`, `Tr ρX` and `Tr ρ²`, rejecting values with a significant
/// imaginary part.
pub fn observables(rho: &ArrayView2<C64>, h: &Hamiltonian, x: &ArrayView2<C64>) -> Result<Observables> {
    Ok(Observables {
        energy: real_part("energy", h.expectation(rho))?,
        position: real_part("position", linalg::trace_of_product(rho, x))?,
        purity: real_part("purity", linalg::trace_of_product(rho, rho))?,
    })
}

/// Sampled observables of one propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub position: Vec<f64>,
    pub purity: Vec<f64>,
    /// Largest `|Tr ρ(t) - Tr ρ(0)|` over the recorded samples.
    pub max_trace_drift: f64,
    #[serde(skip)]
    pub final_rho: CMatrix,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            energy: Vec::with_capacity(n),
            position: Vec::with_capacity(n),
            purity: Vec::with_capacity(n),
            max_trace_drift: 0.0,
            final_rho: CMatrix::zeros((0, 0)),
        }
    }

    fn push(&mut self, t: f64, o: Observables) {
        self.times.push(t);
        self.energy.push(o.energy);
        self.position.push(o.position);
        self.purity.push(o.purity);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, which: crate::stats::Observable) -> &[f64] {
        use crate::stats::Observable;
        match which {
            Observable::Energy => &self.energy,
            Observable::Position => &self.position,
            Observable::Purity => &self.purity,
        }
    }
}

/// Propagates `ρ(0)` and records observables every `record_every`.
pub fn evolve(
    h: &Hamiltonian,
    x: &ArrayView2<C64>,
    d: &dyn Dissipator,
    rho0: &DensityMatrix,
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    evolve_combined(h, x, &[(1.0, d)], rho0, cfg, |_, _| {})
}

/// Propagates `ρ(0)` under each dissipator in lockstep and records
/// observables of the weighted combination `Σ_k w_k ρ_k(t)`; `observer` sees
/// each recorded combination.
///
/// With weights `(2, -1)` on `(D_M, D_{M/2})` this is the density-matrix level
/// first-order jackknife.
pub fn evolve_combined(
    h: &Hamiltonian,
    x: &ArrayView2<C64>,
    members: &[(f64, &dyn Dissipator)],
    rho0: &DensityMatrix,
    cfg: &PropagationConfig,
    mut observer: impl FnMut(f64, &CMatrix),
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = rho0.dim();
    if members.is_empty() {
        return Err(Error::Parameter("at least one dissipator is required".into()));
    }
    for expected in [h.dim(), x.nrows(), x.ncols()] {
        if expected != n {
            return Err(Error::Dimension { expected, found: n });
        }
    }
    if let Some((_, d)) = members.iter().find(|(_, d)| d.dim() != n) {
        return Err(Error::Dimension { expected: d.dim(), found: n });
    }

    let stride = cfg.stride();
    let n_records = cfg.n_records();
    let mut states: Vec<CMatrix> = members.iter().map(|_| rho0.matrix().clone()).collect();
    let mut ws = Rk4Workspace::new(n);
    let mut traj = Trajectory::with_capacity(n_records + 1);
    let trace0 = rho0.trace();

    let combine = |states: &[CMatrix]| -> CMatrix {
        if members.len() == 1 && members[0].0 == 1.0 {
            return states[0].clone();
        }
        let mut out = CMatrix::zeros((n, n));
        for ((w, _), s) in members.iter().zip(states) {
            out.scaled_add(C64::new(*w, 0.0), s);
        }
        out
    };

    let mut record = |t: f64, states: &[CMatrix], traj: &mut Trajectory| -> Result<CMatrix> {
        let rho = combine(states);
        traj.push(t, observables(&rho.view(), h, x)?);
        traj.max_trace_drift = traj.max_trace_drift.max((linalg::trace(&rho.view()) - trace0).norm());
        observer(t, &rho);
        Ok(rho)
    };

    let mut last = record(0.0, &states, &mut traj)?;
    let mut step = 0usize;
    for rec in 1..=n_records {
        for _ in 0..stride {
            step += 1;
            for (state, (_, d)) in states.iter_mut().zip(members) {
                rk4_step(h, *d, state, cfg.dt, &mut ws);
                if !linalg::is_finite(&state.view()) {
                    return Err(Error::Blowup { step, time: step as f64 * cfg.dt });
                }
            }
        }
        last = record(rec as f64 * cfg.record_every, &states, &mut traj)?;
    }
    traj.final_rho = last;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplification_matches_taylor_polynomial() {
        assert_eq!(rk4_amplification(0.0, 0.1), 1.0);
        assert!((rk4_amplification(1.0, 8f64.sqrt()) - 1.0).abs() < 1e-12);
        assert!(rk4_amplification(8.6, 0.25) < 0.7);
        assert!(step_size_warning(&[0.28, 8.87], 0.25).is_some());
        assert!(step_size_warning(&[0.28, 8.87], 0.125).is_none());
    }
    use crate::dissipator::{DaviesDissipator, NoDissipator};
    use crate::spectral::BohrDecomposition;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rabi_population(dt: f64, omega: f64, t: f64) -> f64 {
        let h = Hamiltonian::Dense(array![[c(0.0, 0.0), c(0.5 * omega, 0.0)], [c(0.5 * omega, 0.0), c(0.0, 0.0)]]);
        let x = array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let rho0 = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let cfg = PropagationConfig::new(dt, t, t).unwrap();
        let traj = evolve(&h, &x.view(), &NoDissipator(2), &rho0, &cfg).unwrap();
        *traj.position.last().unwrap()
    }

    #[test]
    fn rabi_oscillation_is_fourth_order() {
        let (omega, t) = (1.3_f64, 4.0);
        let exact = (0.5 * omega * t).sin().powi(2);
        let e1 = (rabi_population(0.2, omega, t) - exact).abs();
        let e2 = (rabi_population(0.1, omega, t) - exact).abs();
        assert!(e2 < 1e-4, "{e2}");
        let ratio = e1 / e2;
        assert!((8.0..=32.0).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn zero_generator_leaves_state_unchanged() {
        let h = Hamiltonian::Diagonal(vec![0.0; 3]);
        let rho = DensityMatrix::new(array![
            [c(0.5, 0.0), c(0.1, 0.1), c(0.0, 0.0)],
            [c(0.1, -0.1), c(0.3, 0.0), c(0.05, 0.0)],
            [c(0.0, 0.0), c(0.05, 0.0), c(0.2, 0.0)]
        ])
        .unwrap();
        let x = CMatrix::eye(3);
        let traj = evolve(&h, &x.view(), &NoDissipator(3), &rho, &PropagationConfig::new(0.5, 1.0, 5.0).unwrap()).unwrap();
        assert_eq!(&traj.final_rho, rho.matrix());
        assert_eq!(traj.len(), 6);
    }

    #[test]
    fn diagonal_and_dense_hamiltonians_agree() {
        let e = vec![-0.3, 0.4, 1.1];
        let rho = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.64), c(0.48, 0.0)]).unwrap();
        let mut a = CMatrix::zeros((3, 3));
        let mut b = CMatrix::zeros((3, 3));
        Hamiltonian::Diagonal(e.clone()).add_commutator(&rho.view(), &mut a);
        let dense = CMatrix::from_diag(&ndarray::Array1::from_iter(e.iter().map(|&v| c(v, 0.0))));
        Hamiltonian::Dense(dense).add_commutator(&rho.view(), &mut b);
        assert!(linalg::max_abs_diff(&a.view(), &b.view()) < 1e-15);
    }

    #[test]
    fn eigenprojector_is_stationary() {
        let h = Hamiltonian::Diagonal(vec![0.0, 1.0, 2.5]);
        let rho = DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let x = CMatrix::eye(3);
        let traj = evolve(&h, &x.view(), &NoDissipator(3), &rho, &PropagationConfig::new(0.1, 1.0, 3.0).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(&traj.final_rho.view(), &rho.view()) < 1e-15);
        assert!(traj.energy.iter().all(|&e| (e - 1.0).abs() < 1e-15));
    }

    #[test]
    fn amplitude_damping_matches_exponential() {
        let gamma = 0.4;
        let l = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let decomp = BohrDecomposition::from_parts(2, vec![l], vec![gamma]).unwrap();
        let d = DaviesDissipator::new(&decomp);
        let h = Hamiltonian::Diagonal(vec![0.0, 1.0]);
        let x = array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let rho0 = DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let traj = evolve(&h, &x.view(), &d, &rho0, &PropagationConfig::new(0.05, 1.0, 5.0).unwrap()).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.position) {
            assert!((p - (-gamma * t).exp()).abs() < 1e-8, "t={t}");
        }
        assert!(traj.max_trace_drift < 1e-14);
    }

    #[test]
    fn zero_final_time_records_initial_state_only() {
        let h = Hamiltonian::Diagonal(vec![0.0, 1.0]);
        let rho = DensityMatrix::maximally_mixed(2);
        let x = CMatrix::eye(2);
        let traj = evolve(&h, &x.view(), &NoDissipator(2), &rho, &PropagationConfig::new(0.25, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.purity, vec![0.5]);
    }

    #[test]
    fn blowup_is_reported_with_step() {
        // A huge anti-damping "rate" drives the state to infinity.
        let l = array![[c(1e200, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let decomp = BohrDecomposition::from_parts(2, vec![l], vec![1e200]).unwrap();
        let d = DaviesDissipator::new(&decomp);
        let h = Hamiltonian::Diagonal(vec![0.0, 1.0]);
        let rho0 = DensityMatrix::pure(&[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let x = CMatrix::eye(2);
        let err = evolve(&h, &x.view(), &d, &rho0, &PropagationConfig::new(0.5, 1.0, 2.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Blowup { step: 1, .. }), "{err:?}");
    }

    #[test]
    fn imaginary_residue_is_rejected() {
        let rho = array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        let x = array![[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let err = observables(&rho.view(), &Hamiltonian::Diagonal(vec![0.0, 0.0]), &x.view()).unwrap_err();
        assert!(matches!(err, Error::HermiticityDrift { what: "position", .. }));
    }

    #[test]
    fn config_grid_validation() {
        assert!(PropagationConfig::new(0.3, 1.0, 10.0).is_err());
        assert!(PropagationConfig::new(0.25, 1.0, 10.5).is_err());
        assert!(PropagationConfig::new(0.0, 1.0, 10.0).is_err());
        let cfg = PropagationConfig::new(0.125, 1.0, 10.0).unwrap();
        assert_eq!((cfg.stride(), cfg.n_records(), cfg.n_steps()), (8, 10, 80));
    }
}
