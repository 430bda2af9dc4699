//! Statistical and structural properties of the full and bundled
//! dissipators.

use bundled_lindblad::dissipator::{
    sample_random_vector, BundledDissipator, CoefficientSource, DaviesDissipator, Dissipator, FullStrategy,
    RandomVectorKind, SeededStreams,
};
use bundled_lindblad::scenario::{ScenarioConfig, ScenarioKind, System};
use bundled_lindblad::spectral::{thermal_state_eigenbasis, BohrDecomposition};
use bundled_lindblad::{CMatrix, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_matrix(n: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    CMatrix::from_shape_fn((n, n), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_density(n: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let a = random_matrix(n, rng);
    let rho = a.dot(&a.t().mapv(|z| z.conj()));
    let tr: C64 = rho.diag().iter().sum();
    rho / tr
}

fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn trace(a: &CMatrix) -> C64 {
    a.diag().iter().sum()
}

fn hermiticity(a: &CMatrix) -> f64 {
    max_abs(&(a - &a.t().mapv(|z| z.conj())))
}

/// Three random Lindblad operators with random rates on a 4-level system.
fn toy_set(seed: u64) -> BohrDecomposition {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ops = (0..3).map(|_| random_matrix(4, &mut rng)).collect();
    let rates = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
    BohrDecomposition::from_parts(4, ops, rates).unwrap()
}

/// Mean and per-entry variance of `D_{1..M} ρ` over `draws` independent bundles.
fn bundled_moments(
    decomp: &BohrDecomposition,
    rho: &CMatrix,
    m: usize,
    draws: usize,
    kind: RandomVectorKind,
    seed: u64,
) -> (CMatrix, Vec<f64>) {
    let n = decomp.dim();
    let mut sum = CMatrix::zeros((n, n));
    let mut sum_sq = vec![0.0; n * n];
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = CMatrix::zeros((n, n));
    for _ in 0..draws {
        let coeffs: Vec<_> = (0..m).map(|_| sample_random_vector(decomp.n_bohr(), kind, &mut rng)).collect();
        let bd = BundledDissipator::from_coefficients(decomp, &coeffs).unwrap();
        bd.apply_into(&rho.view(), &mut out);
        sum += &out;
        for (s, z) in sum_sq.iter_mut().zip(out.iter()) {
            *s += z.norm_sqr();
        }
    }
    let k = draws as f64;
    let mean = sum / C64::new(k, 0.0);
    let var = sum_sq.iter().zip(mean.iter()).map(|(s, mu)| (s / k - mu.norm_sqr()) * k / (k - 1.0)).collect();
    (mean, var)
}

#[test]
fn single_bundle_average_is_unbiased() {
    let decomp = toy_set(1);
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let rho = random_density(4, &mut rng);
    let full = DaviesDissipator::new(&decomp).apply(&rho.view());
    let draws = 100_000;
    for (kind, seed) in [(RandomVectorKind::UnitCircle, 10), (RandomVectorKind::Rademacher, 11)] {
        let (mean, var) = bundled_moments(&decomp, &rho, 1, draws, kind, seed);
        let err = frobenius(&(&mean - &full)) / frobenius(&full);
        let se = (var.iter().sum::<f64>() / draws as f64).sqrt() / frobenius(&full);
        assert!(err <= 5.0 * se, "{kind:?}: error {err:.2e}, standard error {se:.2e}");
        assert!(err <= 5.0 * 10f64.powf(-2.5), "{kind:?}: error {err:.2e}");
    }
}

#[test]
fn both_kinds_share_expectation() {
    let decomp = toy_set(4);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let rho = random_density(4, &mut rng);
    let draws = 50_000;
    let (a, va) = bundled_moments(&decomp, &rho, 1, draws, RandomVectorKind::UnitCircle, 20);
    let (b, vb) = bundled_moments(&decomp, &rho, 1, draws, RandomVectorKind::Rademacher, 21);
    let se = ((va.iter().sum::<f64>() + vb.iter().sum::<f64>()) / draws as f64).sqrt();
    assert!(frobenius(&(&a - &b)) <= 5.0 * se);
}

#[test]
fn variance_halves_when_bundles_double() {
    let decomp = toy_set(6);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let rho = random_density(4, &mut rng);
    let draws = 10_000;
    for (m, seed) in [(1, 30), (2, 31), (4, 32)] {
        let (_, v1) = bundled_moments(&decomp, &rho, m, draws, RandomVectorKind::UnitCircle, seed);
        let (_, v2) = bundled_moments(&decomp, &rho, 2 * m, draws, RandomVectorKind::UnitCircle, seed + 100);
        let ratio = v1[1] / v2[1];
        assert!((1.7..=2.3).contains(&ratio), "M = {m}: variance ratio {ratio:.3}");
    }
}

#[test]
fn random_vectors_have_identity_covariance() {
    for kind in [RandomVectorKind::UnitCircle, RandomVectorKind::Rademacher] {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let n = 3;
        let draws = 100_000;
        let mut acc = CMatrix::zeros((n, n));
        for _ in 0..draws {
            let r = sample_random_vector(n, kind, &mut rng);
            for i in 0..n {
                for j in 0..n {
                    acc[(i, j)] += r[i] * r[j].conj();
                }
            }
        }
        let mean = acc / C64::new(draws as f64, 0.0);
        let err = max_abs(&(mean - CMatrix::eye(n)));
        assert!(err <= 5.0 * 3.0 * 10f64.powf(-2.5), "{kind:?}: {err}");
    }
}

#[test]
fn gibbs_state_is_stationary_under_full_dissipator() {
    for kind in [ScenarioKind::Cooling, ScenarioKind::Heating] {
        let cfg = ScenarioConfig::preset(kind);
        let system = System::build(&cfg).unwrap();
        let rho_eq = thermal_state_eigenbasis(&system.eigen, cfg.kbt);
        for strategy in [FullStrategy::Sparse, FullStrategy::Dense] {
            let d = DaviesDissipator::with_strategy(&system.decomposition, strategy).apply(&rho_eq.view());
            assert!(max_abs(&d) <= 1e-8, "{kind:?} {strategy:?}: {}", max_abs(&d));
        }
    }
}

#[test]
fn full_dissipator_is_traceless_and_hermitian_on_model() {
    let system = System::build(&ScenarioConfig::preset(ScenarioKind::Cooling)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let rho = random_density(system.dim(), &mut rng);
    let sparse = DaviesDissipator::with_strategy(&system.decomposition, FullStrategy::Sparse).apply(&rho.view());
    let dense = DaviesDissipator::with_strategy(&system.decomposition, FullStrategy::Dense).apply(&rho.view());
    let scale = frobenius(&rho);
    assert!(trace(&sparse).norm() <= 1e-12 * scale);
    assert!(hermiticity(&sparse) <= 1e-12);
    assert!(max_abs(&(&sparse - &dense)) <= 1e-13);
}

#[test]
fn identity_hook_reproduces_full_dissipator_on_model() {
    let system = System::build(&ScenarioConfig::preset(ScenarioKind::Cooling)).unwrap();
    let decomp = &system.decomposition;
    let m = decomp.n_bohr();
    let s = C64::new((m as f64).sqrt(), 0.0);
    struct Identity(C64);
    impl CoefficientSource for Identity {
        fn coefficients(&mut self, bundle: usize, n: usize) -> Vec<C64> {
            (0..n).map(|w| if w == bundle { self.0 } else { C64::new(0.0, 0.0) }).collect()
        }
    }
    let bd = BundledDissipator::build(decomp, m, &mut Identity(s)).unwrap();
    assert!(bd.seed_record.is_none());
    let full = DaviesDissipator::new(decomp).apply(&system.rho0.view());
    let got = bd.apply(&system.rho0.view());
    assert!(max_abs(&(&got - &full)) <= 1e-14 * max_abs(&full).max(1.0));
}

#[test]
fn bundled_operators_record_their_provenance() {
    let system = System::build(&ScenarioConfig::preset(ScenarioKind::Cooling)).unwrap();
    let mut src = SeededStreams::new(99, RandomVectorKind::Rademacher, 5);
    let bd = BundledDissipator::build(&system.decomposition, 4, &mut src).unwrap();
    assert_eq!(bd.operators.len(), 4);
    let rec = bd.seed_record.unwrap();
    assert_eq!((rec.master_seed, rec.realization, rec.bundles, rec.kind), (99, 5, 4, RandomVectorKind::Rademacher));
    let again = BundledDissipator::build(&system.decomposition, 4, &mut SeededStreams::new(99, RandomVectorKind::Rademacher, 5)).unwrap();
    assert_eq!(bd.operators, again.operators);
    assert_eq!(bd.source_hash, again.source_hash);
    assert_eq!(bd.source_hash.len(), 16);
    let json = serde_json::to_string(&rec).unwrap();
    assert_eq!(serde_json::from_str::<bundled_lindblad::dissipator::SeedRecord>(&json).unwrap(), rec);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bundled_dissipator_preserves_trace_and_hermiticity(
        seed in any::<u64>(),
        m in 1usize..6,
        n in 2usize..6,
        n_ops in 1usize..5,
        rademacher in any::<bool>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let ops = (0..n_ops).map(|_| random_matrix(n, &mut rng)).collect();
        let rates = (0..n_ops).map(|_| rng.random_range(0.0..2.0)).collect();
        let decomp = BohrDecomposition::from_parts(n, ops, rates).unwrap();
        let rho = random_density(n, &mut rng);
        let kind = if rademacher { RandomVectorKind::Rademacher } else { RandomVectorKind::UnitCircle };
        let bd = BundledDissipator::build(&decomp, m, &mut SeededStreams::new(seed, kind, 0)).unwrap();
        let out = bd.apply(&rho.view());
        let scale = frobenius(&rho);
        prop_assert!(trace(&out).norm() <= 1e-12 * scale.max(1.0) * 10.0);
        prop_assert!(hermiticity(&out) <= 1e-12 * max_abs(&out).max(1.0));
        let full = DaviesDissipator::new(&decomp).apply(&rho.view());
        prop_assert!(trace(&full).norm() <= 1e-12 * scale.max(1.0) * 10.0);
        prop_assert!(hermiticity(&full) <= 1e-12 * max_abs(&full).max(1.0));
    }
}
