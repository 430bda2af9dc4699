//! Quick analytic-identity checks behind the `validate` subcommand.

use ndarray::array;
use serde::Serialize;

use crate::dissipator::{BundledDissipator, DaviesDissipator, Dissipator, NoDissipator, RandomVectorKind, SeededStreams};
use crate::linalg;
use crate::model::{DensityMatrix, STENCIL};
use crate::propagator::{evolve, Hamiltonian, PropagationConfig};
use crate::scenario::{ScenarioConfig, ScenarioKind, System};
use crate::spectral::{coupling_gamma, thermal_state_eigenbasis};
use crate::stats::jackknife1_matrix;
use crate::{Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SelfTestResult {
    match f() {
        Ok((passed, detail)) => SelfTestResult { name, passed, detail },
        Err(e) => SelfTestResult { name, passed: false, detail: format!("error: {e}") },
    }
}

fn stencil() -> Result<(bool, String)> {
    // Σ a_|m| = 0 and Σ a_|m| m² = 2.
    let sum = STENCIL[0] + 2.0 * (STENCIL[1] + STENCIL[2] + STENCIL[3]);
    let second = 2.0 * (STENCIL[1] + 4.0 * STENCIL[2] + 9.0 * STENCIL[3]);
    let ok = sum.abs() < 1e-14 && (second - 2.0).abs() < 1e-14;
    Ok((ok, format!("Σa = {sum:.1e}, Σa m² = {second}")))
}

fn detailed_balance(cfg: &ScenarioConfig) -> Result<(bool, String)> {
    let p = cfg.coupling();
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let w = -5.0 + 0.1 * k as f64 + 0.037;
        let lhs = coupling_gamma(w, &p);
        let rhs = (w / p.kbt).exp() * coupling_gamma(-w, &p);
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    Ok((worst <= 1e-12, format!("max relative residual {worst:.1e} at kT = {}", p.kbt)))
}

fn completeness(system: &System) -> Result<(bool, String)> {
    let d = &system.decomposition;
    let sum_err = linalg::max_abs_diff(&d.operator_sum().view(), &d.x_eigen.view());
    let pair_err = d.adjoint_pairing_error().unwrap_or(f64::INFINITY);
    Ok((
        sum_err <= 1e-10 && pair_err <= 1e-10,
        format!("N = {}, N_B = {}, ‖ΣL − X‖ = {sum_err:.1e}, ‖L(−ω) − L(ω)†‖ = {pair_err:.1e}", system.dim(), d.n_bohr()),
    ))
}

fn gibbs_stationary(system: &System, kbt: f64) -> Result<(bool, String)> {
    let rho = thermal_state_eigenbasis(&system.eigen, kbt);
    let d = DaviesDissipator::new(&system.decomposition).apply(&rho.view());
    let err = linalg::max_abs(&d.view());
    Ok((err <= 1e-8, format!("‖D ρ_eq‖_max = {err:.1e}")))
}

fn bundled_lindblad_form(system: &System) -> Result<(bool, String)> {
    let mut src = SeededStreams::new(7, RandomVectorKind::UnitCircle, 0);
    let bd = BundledDissipator::build(&system.decomposition, 8, &mut src)?;
    let d = bd.apply(&system.rho0.view());
    let tr = linalg::trace(&d.view()).norm();
    let herm = linalg::hermiticity_error(&d.view());
    Ok((tr <= 1e-12 && herm <= 1e-12, format!("|Tr Dρ| = {tr:.1e}, ‖Dρ − (Dρ)†‖ = {herm:.1e}")))
}

fn rk4_order() -> Result<(bool, String)> {
    let omega = 1.0_f64;
    let t = 10.0;
    let h = Hamiltonian::Dense(array![
        [C64::new(0.0, 0.0), C64::new(0.5 * omega, 0.0)],
        [C64::new(0.5 * omega, 0.0), C64::new(0.0, 0.0)]
    ]);
    let x = array![[C64::new(0.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    let rho0 = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)])?;
    let exact = (0.5 * omega * t).sin().powi(2);
    let err = |dt: f64| -> Result<f64> {
        let traj = evolve(&h, &x.view(), &NoDissipator(2), &rho0, &PropagationConfig::new(dt, t, t)?)?;
        Ok((traj.position[1] - exact).abs())
    };
    let ratio = err(0.2)? / err(0.1)?;
    Ok(((8.0..=32.0).contains(&ratio), format!("error ratio {ratio:.2} when dt halves")))
}

fn jackknife_trace(system: &System) -> Result<(bool, String)> {
    let thermal = thermal_state_eigenbasis(&system.eigen, 1.0);
    let jk = jackknife1_matrix(system.rho0.matrix(), thermal.matrix())?;
    let tr = linalg::trace(&jk.view());
    let err = (tr - C64::new(1.0, 0.0)).norm();
    Ok((err <= 1e-10, format!("|Tr(2ρ_a − ρ_b) − 1| = {err:.1e}")))
}

/// Runs every check; failures are reported, not raised.
pub fn run_self_tests() -> Vec<SelfTestResult> {
    let cooling = ScenarioConfig::preset(ScenarioKind::Cooling);
    let heating = ScenarioConfig::preset(ScenarioKind::Heating);
    let mut out = vec![
        check("seven-point stencil moments", stencil),
        check("detailed balance (cold bath)", || detailed_balance(&cooling)),
        check("detailed balance (hot bath)", || detailed_balance(&heating)),
        check("RK4 fourth-order convergence", rk4_order),
    ];
    for (label, cfg) in [("spinless", &cooling), ("spin-1/2", &heating)] {
        match System::build(cfg) {
            Ok(system) => {
                let expected = cfg.dimension();
                out.push(SelfTestResult {
                    name: if label == "spinless" { "dimension (spinless)" } else { "dimension (spin-1/2)" },
                    passed: system.dim() == expected,
                    detail: format!("N = {}", system.dim()),
                });
                out.push(check(
                    if label == "spinless" { "Davies completeness (spinless)" } else { "Davies completeness (spin-1/2)" },
                    || completeness(&system),
                ));
                out.push(check(
                    if label == "spinless" { "Gibbs state stationary (spinless)" } else { "Gibbs state stationary (spin-1/2)" },
                    || gibbs_stationary(&system, cfg.kbt),
                ));
                if label == "spinless" {
                    out.push(check("bundled dissipator trace/Hermiticity", || bundled_lindblad_form(&system)));
                    out.push(check("jackknife preserves trace", || jackknife_trace(&system)));
                }
            }
            Err(e) => out.push(SelfTestResult { name: "model construction", passed: false, detail: e.to_string() }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_self_tests_pass() {
        let results = run_self_tests();
        assert!(results.len() >= 10);
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
