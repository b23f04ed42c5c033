use std::f64::consts::PI;

use cqed_core::classical::{cavity_field_general, collective_params};
use cqed_core::quantum::{
    build_hamiltonian, collapse_operators, convergence_check, max_abs, observables, photon_gain_rate,
    site_hamiltonian, solve, steady_state, steady_state_with, Atom, DickeCouplings, HilbertSpace, Operator,
    RabiConvention, SolverMethod, SolverOptions,
};
use cqed_core::{AtomConfig, SystemParams};
use num_complex::Complex64;
use proptest::prelude::*;

const MHZ: f64 = 2.0 * PI * 1e6;

fn classical_n_p(p: &SystemParams, cfg: &AtomConfig) -> f64 {
    let cc = collective_params(cfg).unwrap();
    cavity_field_general(p, &cc, cfg.n_atoms).unwrap().n_p
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn decoupled_hamiltonian_is_diagonal() {
    let p = SystemParams { i_l: 0.0, ..SystemParams::reference() };
    let p = SystemParams { delta_c: 3.0 * MHZ, ..p };
    let hs = HilbertSpace::new(3).unwrap();
    let h = site_hamiltonian(&p, &hs, [0.0, 0.0], [c(0.0), c(0.0)]);
    for a1 in 0..2 {
        for a2 in 0..2 {
            for n in 0..=3 {
                let i = hs.index(a1, a2, n);
                let want = -p.delta_a * (a1 + a2) as f64 - p.delta_c * n as f64;
                assert!((h[(i, i)] - c(want)).norm() < 1e-6);
            }
        }
    }
    let off = &h - Operator::from_diagonal(&h.diagonal());
    assert_eq!(max_abs(&off), 0.0);
}

#[test]
fn destructive_pattern_couples_only_the_antisymmetric_state() {
    let d = DickeCouplings::new(8.0 * MHZ, 1.0, 0.0, PI);
    assert!(d.g_plus.abs() < 1e-9 * d.g_minus);
    assert!(d.drive_minus.norm() == 0.0);
    assert!(d.drive_plus.norm() > 0.0);
}

#[test]
fn dicke_form_equals_site_form() {
    let p = SystemParams::reference();
    let hs = HilbertSpace::new(3).unwrap();
    let rabi = RabiConvention::FieldMatched.rabi_frequency(&p);
    for &(phi_y, phi_z) in &[(0.0, 0.0), (0.7, 2.1), (PI, PI), (5.9, 0.3)] {
        let h = build_hamiltonian(&p, &AtomConfig::pair(phi_y, phi_z), &hs).unwrap();
        let drives = [
            Complex64::from_polar(rabi / 2.0, phi_y / 2.0),
            Complex64::from_polar(rabi / 2.0, -phi_y / 2.0),
        ];
        let site = site_hamiltonian(&p, &hs, [p.g, p.g * phi_z.cos()], drives);
        assert!(max_abs(&(&h - &site)) <= 1e-12 * max_abs(&h), "φ = ({phi_y}, {phi_z})");
    }
}

#[test]
fn collapse_operators_follow_the_rates() {
    let p = SystemParams { kappa: 0.0, ..SystemParams::reference() };
    let hs = HilbertSpace::new(2).unwrap();
    let ops = collapse_operators(&p, &hs);
    assert_eq!(ops.len(), 3);
    assert_eq!(max_abs(&ops[0]), 0.0);
    let sigma = hs.sigma(Atom::First) * c(p.gamma.sqrt());
    assert_eq!(ops[1], sigma);
}

#[test]
fn undriven_system_relaxes_to_ground() {
    let p = SystemParams::reference();
    let hs = HilbertSpace::new(3).unwrap();
    let h = site_hamiltonian(&p, &hs, [p.g, p.g], [c(0.0), c(0.0)]);
    let ss = steady_state(&h, &collapse_operators(&p, &hs)).unwrap();
    let g0 = hs.index(0, 0, 0);
    assert!((ss.rho[(g0, g0)] - c(1.0)).norm() < 1e-12);
    assert!(ss.n_p.abs() < 1e-12 && ss.p_exc.abs() < 1e-12);
}

#[test]
fn zero_drive_converges_at_lowest_cutoff() {
    let p = SystemParams { i_l: 0.0, ..SystemParams::reference() };
    let report = convergence_check(&p, &AtomConfig::pair(0.0, 0.0), &[1, 2]).unwrap();
    assert_eq!(report.converged_at, Some(1));
}

#[test]
fn no_dissipation_is_rejected() {
    let p = SystemParams::reference();
    let hs = HilbertSpace::new(1).unwrap();
    let h = build_hamiltonian(&p, &AtomConfig::pair(0.0, 0.0), &hs).unwrap();
    let zero = Operator::zeros(hs.dim(), hs.dim());
    assert!(steady_state(&h, &[zero]).is_err());
    assert!(steady_state(&h, &[]).is_err());
}

#[test]
fn constructive_point_matches_classical() {
    let p = SystemParams::reference();
    let cfg = AtomConfig::pair(0.0, 0.0);
    let (ss, obs) = solve(&p, &cfg, 5, RabiConvention::FieldMatched).unwrap();
    let cl = classical_n_p(&p, &cfg);
    assert!((obs.n_p - cl).abs() / cl < 0.02, "quantum {} classical {cl}", obs.n_p);
    assert!(obs.p_exc < 1e-3, "{}", obs.p_exc);
    assert!(ss.converged);
}

#[test]
fn antisymmetric_state_is_fed_only_by_double_excitation() {
    // With φ_y = φ_z = 0, |−⟩ is neither driven nor coupled; independent
    // decay of |ee⟩ feeds it at Γ·P_ee and it empties at Γ, so P_− = P_ee.
    let p = SystemParams::reference();
    let (ss, obs) = solve(&p, &AtomConfig::pair(0.0, 0.0), 5, RabiConvention::FieldMatched).unwrap();
    let hs = ss.hilbert;
    let ee = hs.sigma(Atom::First).adjoint() * hs.sigma(Atom::Second).adjoint() * hs.sigma(Atom::Second) * hs.sigma(Atom::First);
    let p_ee = cqed_core::quantum::expectation(&ee, &ss.rho).re;
    assert!(p_ee > 0.0);
    assert!((obs.pop_minus - p_ee).abs() <= 1e-6 * p_ee + 1e-15, "{} vs {p_ee}", obs.pop_minus);
    assert!(obs.pop_minus / obs.pop_plus < 1e-4, "{}", obs.pop_minus / obs.pop_plus);
}

#[test]
fn large_cutoff_routes_to_krylov_solver() {
    let p = SystemParams::reference();
    let cfg = AtomConfig::pair(0.0, 0.0);
    let hs = HilbertSpace::new(10).unwrap();
    assert!(hs.dim() * hs.dim() > cqed_core::quantum::DIRECT_LIMIT);
    let (big, _) = solve(&p, &cfg, 10, RabiConvention::FieldMatched).unwrap();
    let (six, _) = solve(&p, &cfg, 6, RabiConvention::FieldMatched).unwrap();
    assert!((big.n_p - six.n_p).abs() < 1e-6 * six.n_p);
}

#[test]
fn saturation_convention_runs_hotter() {
    let p = SystemParams::reference();
    let cfg = AtomConfig::pair(0.0, 0.0);
    let (_, matched) = solve(&p, &cfg, 5, RabiConvention::FieldMatched).unwrap();
    let (_, sat) = solve(&p, &cfg, 5, RabiConvention::SaturationIntensity).unwrap();
    let ratio = sat.n_p / matched.n_p;
    // (Ω_sat / Ω_matched)² in the weak-drive regime.
    let want = (p.rabi_frequency() / p.field_rabi_frequency()).powi(2);
    assert!((ratio / want - 1.0).abs() < 1e-3, "{ratio} vs {want}");
}

#[test]
fn destructive_pattern_suppresses_output() {
    let p = SystemParams::reference();
    let (_, bright) = solve(&p, &AtomConfig::pair(0.0, 0.0), 5, RabiConvention::FieldMatched).unwrap();
    let (_, dark) = solve(&p, &AtomConfig::pair(0.0, PI), 5, RabiConvention::FieldMatched).unwrap();
    assert!(dark.p_exc > 0.0);
    // Residual output comes from the doubly excited state, which decays
    // into |−⟩; it is at the 10⁻⁵ level, not zero.
    assert!(dark.r_d < 1e-4 * bright.r_d, "{}", dark.r_d / bright.r_d);
}

#[test]
fn cutoff_study() {
    let p = SystemParams::reference();
    let report = convergence_check(&p, &AtomConfig::pair(0.0, 0.0), &[1, 3, 5, 6]).unwrap();
    let n: Vec<f64> = report.rows.iter().map(|r| r.n_p).collect();
    assert!(n[0] < n[1] && n[1] < n[2], "truncation underestimates: {n:?}");
    assert!(report.rows[3].rel_change.unwrap() < 1e-6);
    assert!(report.rows[2].rel_change.unwrap() > 1e-6);
    assert_eq!(report.converged_at, Some(5));
    assert!(convergence_check(&p, &AtomConfig::pair(0.0, 0.0), &[3, 2]).is_err());
}

#[test]
fn iterative_solver_agrees_with_direct() {
    let p = SystemParams::reference();
    let hs = HilbertSpace::new(4).unwrap();
    let h = build_hamiltonian(&p, &AtomConfig::pair(0.9, 1.3), &hs).unwrap();
    let cs = collapse_operators(&p, &hs);
    let direct = steady_state_with(&h, &cs, &SolverOptions { method: SolverMethod::Direct, ..Default::default() }).unwrap();
    let iter = steady_state_with(&h, &cs, &SolverOptions { method: SolverMethod::Iterative, ..Default::default() }).unwrap();
    assert!(max_abs(&(&direct.rho - &iter.rho)) < 1e-8);
    assert!((direct.n_p - iter.n_p).abs() < 1e-8 * direct.n_p);
}

#[test]
fn weaker_drive_tightens_agreement() {
    let p = SystemParams::reference();
    let cfg = AtomConfig::pair(0.4, 0.8);
    let dev = |p: &SystemParams| {
        let (_, obs) = solve(p, &cfg, 5, RabiConvention::FieldMatched).unwrap();
        let cl = classical_n_p(p, &cfg);
        (obs.n_p - cl).abs() / cl
    };
    let full = dev(&p);
    let weak = dev(&SystemParams { i_l: p.i_l / 100.0, ..p });
    assert!(weak < full, "weak {weak} full {full}");
}

#[test]
fn single_atom_leaves_second_atom_dark() {
    let p = SystemParams::reference();
    let (ss, obs) = solve(&p, &AtomConfig::single(), 5, RabiConvention::FieldMatched).unwrap();
    let e2 = cqed_core::quantum::expectation(&(ss.hilbert.sigma(Atom::Second).adjoint() * ss.hilbert.sigma(Atom::Second)), &ss.rho);
    assert!(e2.norm() < 1e-14);
    let cl = classical_n_p(&p, &AtomConfig::single());
    assert!((obs.n_p - cl).abs() / cl < 0.02);
}

fn random_params() -> impl Strategy<Value = (SystemParams, f64, f64)> {
    (0.5f64..15.0, 0.05f64..5.0, 1.0f64..10.0, -200.0f64..200.0, -2.0f64..2.0, 0.01f64..4.0, 0.0f64..6.3, 0.0f64..6.3)
        .prop_map(|(g, kappa, gamma, delta_a, delta_c, i_l, phi_y, phi_z)| {
            let p = SystemParams {
                g: g * MHZ,
                kappa: kappa * MHZ,
                gamma: gamma * MHZ,
                delta_a: delta_a * MHZ,
                delta_c: delta_c * MHZ,
                i_l: i_l * 10.0,
                ..SystemParams::reference()
            };
            (p, phi_y, phi_z)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian((p, phi_y, phi_z) in random_params()) {
        let hs = HilbertSpace::new(3).unwrap();
        let h = build_hamiltonian(&p, &AtomConfig::pair(phi_y, phi_z), &hs).unwrap();
        prop_assert!(max_abs(&(&h - h.adjoint())) <= 1e-12 * max_abs(&h));
    }

    #[test]
    fn dicke_coupling_identity(g in 1e5f64..1e9, phi_z in -10.0f64..10.0) {
        let d = DickeCouplings::new(g, 0.0, 0.0, phi_z);
        let h_par = (1.0 + phi_z.cos().powi(2)) / 2.0;
        let lhs = d.g_plus.powi(2) + d.g_minus.powi(2);
        prop_assert!((lhs - 2.0 * g * g * h_par).abs() <= 1e-14 * g * g);
    }

    #[test]
    fn steady_state_is_physical((p, phi_y, phi_z) in random_params()) {
        let hs = HilbertSpace::new(4).unwrap();
        let h = build_hamiltonian(&p, &AtomConfig::pair(phi_y, phi_z), &hs).unwrap();
        let ss = steady_state(&h, &collapse_operators(&p, &hs)).unwrap();
        prop_assert!((ss.trace() - c(1.0)).norm() < 1e-10);
        prop_assert!(ss.hermiticity_error() < 1e-10);
        prop_assert!(ss.min_eigenvalue() > -1e-10);
        prop_assert!(ss.residual <= 1e-10);
        let gain = photon_gain_rate(&ss, &h);
        let loss = 2.0 * p.kappa * ss.n_p;
        prop_assert!((gain - loss).abs() <= 1e-8 * loss.max(1e-300) + 1e-12 * p.kappa, "gain {} loss {}", gain, loss);
        let obs = observables(&ss, &p);
        prop_assert!((obs.r_d - p.eta * p.kappa * ss.n_p).abs() <= 1e-12 * obs.r_d.abs().max(1.0));
    }
}
