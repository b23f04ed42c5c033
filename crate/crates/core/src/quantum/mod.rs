//! Tavis-Cummings master equation for two driven atoms in the cavity.
//!
//! The Hamiltonian (ħ = 1, rad/s) is
//!
//! ```text
//! H = −Δ Σ_n σ_n†σ_n − δ a†a + Σ_± g_± (a S_±† + a† S_±) + H_L
//! H_L = (√2 Ω_L / 2) [cos(φ_y/2) S_+ + i sin(φ_y/2) S_− + h.c.]
//! ```
//!
//! with Dicke operators S_± = (σ_1 ± σ_2)/√2 and g_± = g(1 ± cos φ_z)/√2.
//! Expanded in the site basis the drive reads
//! (Ω_L/2)(e^{iφ_y/2} σ_1 + e^{−iφ_y/2} σ_2) + h.c., i.e. atom 2 carries
//! the phase +φ_y/2 on its raising operator. Dissipation is photon loss
//! √(2κ) a and spontaneous emission √Γ σ_n.

mod liouvillian;
mod operators;
mod solver;

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use liouvillian::{liouvillian, unvectorize, vectorize, CsrMatrix};
pub use operators::{expectation, max_abs, Atom, Dicke, HilbertSpace, Operator};
pub use solver::{SolverMethod, SolverOptions, DIRECT_LIMIT};

use crate::classical::detection_rate;
use crate::error::{Error, Result};
use crate::params::{AtomConfig, SystemParams};

/// Fock cutoff used unless the caller asks otherwise.
pub const DEFAULT_N_MAX: usize = 5;

/// Relative change in n_p between successive cutoffs accepted as converged.
pub const CUTOFF_TOL: f64 = 1e-6;

/// How the drive Rabi frequency is obtained from the parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RabiConvention {
    /// Ω = g0 E_L / E_vac: the same field the classical model is driven with.
    #[default]
    FieldMatched,
    /// Ω = Γ sqrt(I_L / (2 I_sat)).
    SaturationIntensity,
}

impl RabiConvention {
    pub fn rabi_frequency(self, p: &SystemParams) -> f64 {
        match self {
            RabiConvention::FieldMatched => p.field_rabi_frequency(),
            RabiConvention::SaturationIntensity => p.rabi_frequency(),
        }
    }
}

/// Couplings of the symmetric and antisymmetric Dicke channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeCouplings {
    pub g_plus: f64,
    pub g_minus: f64,
    /// Coefficient of S_+ in H_L.
    pub drive_plus: Complex64,
    /// Coefficient of S_− in H_L.
    pub drive_minus: Complex64,
}

impl DickeCouplings {
    pub fn new(g: f64, rabi: f64, phi_y: f64, phi_z: f64) -> Self {
        let cz = phi_z.cos();
        let amp = std::f64::consts::SQRT_2 * rabi / 2.0;
        Self {
            g_plus: g * (1.0 + cz) * FRAC_1_SQRT_2,
            g_minus: g * (1.0 - cz) * FRAC_1_SQRT_2,
            drive_plus: Complex64::new(amp * (phi_y / 2.0).cos(), 0.0),
            drive_minus: Complex64::new(0.0, amp * (phi_y / 2.0).sin()),
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn bare_hamiltonian(p: &SystemParams, hs: &HilbertSpace) -> Operator {
    hs.excitation() * re(-p.delta_a) + hs.number() * re(-p.delta_c)
}

/// Hamiltonian with the default [`RabiConvention`].
pub fn build_hamiltonian(p: &SystemParams, cfg: &AtomConfig, hs: &HilbertSpace) -> Result<Operator> {
    build_hamiltonian_with(p, cfg, hs, RabiConvention::default())
}

/// Two atoms are assembled in the Dicke form; a single atom uses the site
/// form with atom 2 uncoupled and undriven (it stays in |g⟩).
pub fn build_hamiltonian_with(
    p: &SystemParams,
    cfg: &AtomConfig,
    hs: &HilbertSpace,
    convention: RabiConvention,
) -> Result<Operator> {
    cfg.validate()?;
    let rabi = convention.rabi_frequency(p);
    if cfg.n_atoms == 1 {
        return Ok(site_hamiltonian(p, hs, [p.g, 0.0], [re(rabi / 2.0), re(0.0)]));
    }
    let dc = DickeCouplings::new(p.g, rabi, cfg.phi_y, cfg.phi_z);
    let a = hs.annihilation();
    let ad = a.adjoint();
    let mut h = bare_hamiltonian(p, hs);
    for (which, g_pm, drive) in [
        (Dicke::Plus, dc.g_plus, dc.drive_plus),
        (Dicke::Minus, dc.g_minus, dc.drive_minus),
    ] {
        let s = hs.dicke_lowering(which);
        let sd = s.adjoint();
        h += (&a * &sd + &ad * &s) * re(g_pm);
        let drive_term = &s * drive;
        h += &drive_term + drive_term.adjoint();
    }
    Ok(h)
}

/// Site-basis Hamiltonian with per-atom couplings `g_n` and drive
/// coefficients `d_n` multiplying σ_n (h.c. added).
pub fn site_hamiltonian(
    p: &SystemParams,
    hs: &HilbertSpace,
    couplings: [f64; 2],
    drives: [Complex64; 2],
) -> Operator {
    let a = hs.annihilation();
    let ad = a.adjoint();
    let mut h = bare_hamiltonian(p, hs);
    for (atom, g_n, d_n) in [(Atom::First, couplings[0], drives[0]), (Atom::Second, couplings[1], drives[1])] {
        let s = hs.sigma(atom);
        h += (&a * s.adjoint() + &ad * &s) * re(g_n);
        let drive_term = &s * d_n;
        h += &drive_term + drive_term.adjoint();
    }
    h
}

/// √(2κ) a, √Γ σ_1, √Γ σ_2.
pub fn collapse_operators(p: &SystemParams, hs: &HilbertSpace) -> Vec<Operator> {
    vec![
        hs.annihilation() * re((2.0 * p.kappa).sqrt()),
        hs.sigma(Atom::First) * re(p.gamma.sqrt()),
        hs.sigma(Atom::Second) * re(p.gamma.sqrt()),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub hilbert: HilbertSpace,
    pub rho: Operator,
    /// ⟨a†a⟩.
    pub n_p: f64,
    /// Σ_n ⟨σ_n†σ_n⟩.
    pub p_exc: f64,
    /// Population of the highest Fock level is at most [`CUTOFF_TOL`] · n_p.
    pub converged: bool,
    /// ‖𝓛ρ‖ / ‖𝓛‖_F.
    pub residual: f64,
}

impl SteadyState {
    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.rho - self.rho.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * re(0.5);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn top_fock_population(&self) -> f64 {
        expectation(&self.hilbert.top_fock_projector(), &self.rho).re
    }
}

pub fn steady_state(h: &Operator, c_ops: &[Operator]) -> Result<SteadyState> {
    steady_state_with(h, c_ops, &SolverOptions::default())
}

pub fn steady_state_with(h: &Operator, c_ops: &[Operator], opts: &SolverOptions) -> Result<SteadyState> {
    let hs = HilbertSpace::from_dim(h.nrows())?;
    if c_ops.iter().all(|c| max_abs(c) == 0.0) {
        return Err(Error::NoUniqueSteadyState("no non-zero collapse operator".into()));
    }
    let d = hs.dim();
    let l = liouvillian(h, c_ops);
    let sol = solver::solve_null_space(&l, d, opts)?;
    let rho = unvectorize(&sol.vec_rho, d);
    let n_p = expectation(&hs.number(), &rho).re;
    let p_exc = expectation(&hs.excitation(), &rho).re;
    let top = expectation(&hs.top_fock_projector(), &rho).re;
    Ok(SteadyState {
        hilbert: hs,
        rho,
        n_p,
        p_exc,
        converged: top.abs() <= CUTOFF_TOL * n_p.abs(),
        residual: sol.residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub n_p: f64,
    /// η κ ⟨a†a⟩ (1/s).
    pub r_d: f64,
    pub p_exc: f64,
    /// ⟨|+⟩⟨+|⟩.
    pub pop_plus: f64,
    /// ⟨|−⟩⟨−|⟩.
    pub pop_minus: f64,
}

pub fn observables(ss: &SteadyState, p: &SystemParams) -> Observables {
    let hs = &ss.hilbert;
    Observables {
        n_p: ss.n_p,
        r_d: detection_rate(ss.n_p.max(0.0), p),
        p_exc: ss.p_exc,
        pop_plus: expectation(&hs.dicke_projector(Dicke::Plus), &ss.rho).re,
        pop_minus: expectation(&hs.dicke_projector(Dicke::Minus), &ss.rho).re,
    }
}

/// Coherent photon production rate i⟨[H, a†a]⟩; equals the loss 2κ n_p in
/// steady state.
pub fn photon_gain_rate(ss: &SteadyState, h: &Operator) -> f64 {
    let n = ss.hilbert.number();
    let comm = h * &n - &n * h;
    (Complex64::i() * expectation(&comm, &ss.rho)).re
}

/// Builds and solves the model at one configuration.
pub fn solve(
    p: &SystemParams,
    cfg: &AtomConfig,
    n_max: usize,
    convention: RabiConvention,
) -> Result<(SteadyState, Observables)> {
    let hs = HilbertSpace::new(n_max)?;
    let h = build_hamiltonian_with(p, cfg, &hs, convention)?;
    let ss = steady_state(&h, &collapse_operators(p, &hs))?;
    let obs = observables(&ss, p);
    Ok((ss, obs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub n_max: usize,
    pub n_p: f64,
    /// |n_p − previous| / |n_p| against the preceding cutoff.
    pub rel_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<CutoffRow>,
    /// Smallest listed cutoff whose n_p agrees with the next one within
    /// [`CUTOFF_TOL`].
    pub converged_at: Option<usize>,
}

fn rel_change(new: f64, old: f64) -> f64 {
    let diff = (new - old).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / new.abs().max(old.abs())
    }
}

/// n_p for each cutoff in an increasing list.
pub fn convergence_check(p: &SystemParams, cfg: &AtomConfig, n_max_list: &[usize]) -> Result<ConvergenceReport> {
    if n_max_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("cutoff list must be strictly increasing".into()));
    }
    let mut rows: Vec<CutoffRow> = Vec::with_capacity(n_max_list.len());
    for &n_max in n_max_list {
        let (ss, _) = solve(p, cfg, n_max, RabiConvention::default())?;
        let rel = rows.last().map(|prev| rel_change(ss.n_p, prev.n_p));
        rows.push(CutoffRow { n_max, n_p: ss.n_p, rel_change: rel });
    }
    let converged_at = rows
        .windows(2)
        .find(|w| w[1].rel_change.is_some_and(|r| r < CUTOFF_TOL))
        .map(|w| w[0].n_max);
    Ok(ConvergenceReport { rows, converged_at })
}
