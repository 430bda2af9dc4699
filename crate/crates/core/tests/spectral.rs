//! Eigendecomposition, Bohr-frequency and coupling-function properties on
//! the benchmark models, checked against independent oracles.

use std::collections::HashSet;

use bundled_lindblad::scenario::{ScenarioConfig, ScenarioKind};
use bundled_lindblad::spectral::{
    coupling_gamma, eigendecompose, enumerate_bohr, gibbs_weights, thermal_state, BohrDecomposition, BohrOptions,
    CouplingParams,
};
use bundled_lindblad::{model, CMatrix, C64};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn table1_model(kind: ScenarioKind) -> model::SpinOscillatorModel {
    let cfg = ScenarioConfig::preset(kind);
    let grid = model::build_grid(cfg.x0, cfg.dx, cfg.nx).unwrap();
    let morse = model::MorseParams::new(cfg.v_inf, cfg.a, cfg.u_max, cfg.mass).unwrap();
    model::build_model(grid, morse, cfg.s, cfg.gap, cfg.alpha).unwrap()
}

/// Cyclic Jacobi rotations for a real symmetric matrix; returns sorted
/// eigenvalues.
fn jacobi_eigenvalues(mut a: Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn adjoint(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

#[test]
fn hamiltonians_are_hermitian() {
    for kind in [ScenarioKind::Cooling, ScenarioKind::Heating] {
        let m = table1_model(kind);
        assert!(max_abs(&(&m.hamiltonian - &adjoint(&m.hamiltonian))) <= 1e-12);
    }
}

#[test]
fn eigenvalues_agree_with_jacobi_oracle() {
    for kind in [ScenarioKind::Cooling, ScenarioKind::Heating] {
        let m = table1_model(kind);
        // The Table 1 Hamiltonians are real symmetric.
        assert!(m.hamiltonian.iter().all(|z| z.im == 0.0));
        let oracle = jacobi_eigenvalues(m.hamiltonian.mapv(|z| z.re));
        let eig = eigendecompose(&m.hamiltonian.view()).unwrap();
        for (a, b) in eig.energies.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn ground_state_near_morse_estimate() {
    let m = table1_model(ScenarioKind::Cooling);
    let eig = eigendecompose(&m.hamiltonian.view()).unwrap();
    assert_eq!(eig.energies.len(), 31);
    let (v_inf, a, mass) = (4.0_f64, 0.2_f64, 1.0_f64);
    let w0 = a * (2.0 * v_inf / mass).sqrt();
    let estimate = w0 / 2.0 - (w0 / 2.0).powi(2) / (4.0 * v_inf);
    assert!((estimate - 0.278).abs() < 1e-3);
    assert!((eig.energies[0] - estimate).abs() <= 0.1 * estimate, "ε0 = {}", eig.energies[0]);
}

#[test]
fn eigensystem_invariants_on_models() {
    for kind in [ScenarioKind::Cooling, ScenarioKind::Heating] {
        let m = table1_model(kind);
        let eig = eigendecompose(&m.hamiltonian.view()).unwrap();
        let n = eig.dim();
        let v = &eig.kets;
        let gram = adjoint(v).dot(v);
        assert!(max_abs(&(gram - CMatrix::eye(n))) <= 1e-10);
        assert!(eig.energies.windows(2).all(|w| w[0] <= w[1]));
        let hv = m.hamiltonian.dot(v);
        for k in 0..n {
            for i in 0..n {
                let r = hv[(i, k)] - v[(i, k)] * eig.energies[k];
                assert!(r.norm() <= 1e-8 * eig.energies[k].abs().max(1.0));
            }
        }
        let rebuilt = eig.from_eigenbasis(&CMatrix::from_diag(&ndarray::Array1::from_iter(
            eig.energies.iter().map(|&e| C64::new(e, 0.0)),
        )).view());
        assert!(max_abs(&(&rebuilt - &m.hamiltonian)) <= 1e-8 * max_abs(&m.hamiltonian));
    }
}

#[test]
fn random_hermitian_is_diagonalized() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for _ in 0..20 {
        let mut h = CMatrix::zeros((5, 5));
        for i in 0..5 {
            h[(i, i)] = C64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in (i + 1)..5 {
                let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let eig = eigendecompose(&h.view()).unwrap();
        let d = eig.to_eigenbasis(&h.view());
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { C64::new(eig.energies[i], 0.0) } else { C64::new(0.0, 0.0) };
                assert!((d[(i, j)] - want).norm() <= 1e-10);
            }
        }
    }
}

fn decomposition(kind: ScenarioKind, opts: &BohrOptions) -> BohrDecomposition {
    let cfg = ScenarioConfig::preset(kind);
    let m = table1_model(kind);
    let eig = eigendecompose(&m.hamiltonian.view()).unwrap();
    BohrDecomposition::build(&eig, &m.x_operator.view(), &cfg.coupling(), opts).unwrap()
}

#[test]
fn davies_completeness_and_adjoint_pairing() {
    for kind in [ScenarioKind::Cooling, ScenarioKind::Heating] {
        let d = decomposition(kind, &BohrOptions::default());
        assert!(max_abs(&(d.operator_sum() - &d.x_eigen)) <= 1e-10);
        assert!(d.adjoint_pairing_error().unwrap() <= 1e-10);
        assert!(d.frequencies.windows(2).all(|w| w[0] < w[1]));
        assert!(d.frequencies.contains(&0.0));
    }
}

#[test]
fn coupled_pairs_are_partitioned() {
    let d = decomposition(ScenarioKind::Cooling, &BohrOptions::default());
    let mut seen = HashSet::new();
    for group in &d.pair_groups {
        for &pair in group {
            assert!(seen.insert(pair), "pair {pair:?} in two groups");
        }
    }
    let tol = 1e-14 * max_abs(&d.x_eigen);
    let n = d.dim();
    for i in 0..n {
        for j in 0..n {
            assert_eq!(d.x_eigen[(i, j)].norm() > tol, seen.contains(&(i, j)), "pair ({i}, {j})");
        }
    }
}

#[test]
fn halving_bin_tolerance_is_stable() {
    let base = BohrOptions::default();
    let halved = BohrOptions { bin_tol_rel: base.bin_tol_rel / 2.0, ..base };
    let m = table1_model(ScenarioKind::Cooling);
    let eig = eigendecompose(&m.hamiltonian.view()).unwrap();
    let x = eig.to_eigenbasis(&m.x_operator.view());
    let a = enumerate_bohr(&eig, &x.view(), &base).frequencies.len() as f64;
    let b = enumerate_bohr(&eig, &x.view(), &halved).frequencies.len() as f64;
    assert!((a - b).abs() / a < 0.02, "{a} vs {b}");
}

#[test]
fn coupling_function_values() {
    let p = CouplingParams::new(0.02, 2f64.sqrt(), 1.0).unwrap();
    assert_eq!(coupling_gamma(0.0, &p), 0.02);
    let w = 2f64.sqrt();
    let want = 0.02 * (-0.5f64).exp() * (w / 2.0).exp();
    assert!((coupling_gamma(w, &p) - want).abs() < 1e-15);
    assert!((coupling_gamma(w, &p) - 0.0246).abs() < 1e-4);
}

#[test]
fn detailed_balance_at_both_temperatures() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for kbt in [0.25, 1.0] {
        let p = CouplingParams::new(0.02, 2f64.sqrt(), kbt).unwrap();
        for _ in 0..100 {
            let w: f64 = rng.random_range(-5.0..5.0);
            let g = coupling_gamma(w, &p);
            assert!((g - (w / kbt).exp() * coupling_gamma(-w, &p)).abs() <= 1e-12 * g);
        }
    }
}

#[test]
fn two_level_gibbs_populations() {
    let w = gibbs_weights(&[0.0, 1.0], 1.0);
    let e = (-1.0f64).exp();
    assert!((w[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
    assert!((w[1] - e / (1.0 + e)).abs() < 1e-15);
    assert!((w[1] - 0.269).abs() < 1e-3);
}

#[test]
fn thermal_state_is_a_density_matrix() {
    let m = table1_model(ScenarioKind::Heating);
    let rho = thermal_state(&m.hamiltonian.view(), 1.0).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
    let eig = eigendecompose(&rho.view()).unwrap();
    assert!(eig.energies[0] >= -1e-12);
    // Extreme temperatures stay finite thanks to the ground-state shift.
    let cold = thermal_state(&m.hamiltonian.view(), 1e-3).unwrap();
    assert!(cold.matrix().iter().all(|z| z.re.is_finite()));
}

#[test]
fn cold_state_concentrates_on_low_levels() {
    for (xi, low_weight_min, low_weight_max) in [(0.7, 0.9, 1.0), (3.4, 0.0, 0.5)] {
        let c = model::initial_amplitudes(
            &eigendecompose(&table1_model(ScenarioKind::Cooling).hamiltonian.view()).unwrap().energies,
            xi,
        );
        let total: f64 = c.iter().map(|x| x * x).sum();
        let low: f64 = c[..3].iter().map(|x| x * x).sum::<f64>() / total;
        assert!((low_weight_min..=low_weight_max).contains(&low), "ξ = {xi}: low-level weight {low}");
    }
}
