//! Classical steady-state model of driven dipoles radiating into the cavity.
//!
//! The atoms are treated as polarizable particles. Per round trip they
//! scatter the driving field (weighted with g0) and the intracavity standing
//! wave (weighted with g) back into the mode, and the mirrors return r² of
//! the circulating field. Solving that self-consistency gives the cavity
//! field in closed form.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csv::{sig9, write_header};
use crate::error::{Error, Result};
use crate::params::{constants, AtomConfig, SystemParams};

/// Atomic line function 𝓛(Δ) = (−2ΔΓ + iΓ²)/(Γ² + 4Δ²).
pub fn line_function(delta_a: f64, gamma: f64) -> Complex64 {
    let den = gamma * gamma + 4.0 * delta_a * delta_a;
    Complex64::new(-2.0 * delta_a * gamma / den, gamma * gamma / den)
}

/// Position-averaged coupling factors of the drive (𝒢) and the cavity (ℋ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveCouplings {
    pub g_par: Complex64,
    pub h_par: f64,
}

impl CollectiveCouplings {
    const TOL: f64 = 1e-12;

    pub fn new(g_par: Complex64, h_par: f64) -> Result<Self> {
        if !(h_par.is_finite() && (-Self::TOL..=1.0 + Self::TOL).contains(&h_par)) {
            return Err(Error::param("h_par", format!("must lie in [0, 1], got {h_par}")));
        }
        if !(g_par.norm() <= h_par.max(0.0).sqrt() + Self::TOL) {
            return Err(Error::param(
                "g_par",
                format!("|g_par| = {} exceeds sqrt(h_par) = {}", g_par.norm(), h_par.max(0.0).sqrt()),
            ));
        }
        Ok(Self { g_par, h_par })
    }

    /// All atoms at antinodes, driven in phase.
    pub fn uniform() -> Self {
        Self { g_par: Complex64::new(1.0, 0.0), h_par: 1.0 }
    }

    /// Two atoms, the first pinned to a cavity antinode.
    pub fn two_atom(phi_y: f64, phi_z: f64) -> Self {
        let cz = phi_z.cos();
        Self {
            g_par: 0.5 * (1.0 + Complex64::from_polar(1.0, phi_y) * cz),
            h_par: 0.5 * (1.0 + cz * cz),
        }
    }

    /// Generic sums over atom phases (k·y_n, k·z_n).
    pub fn from_phases(phases: &[(f64, f64)]) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::UnsupportedAtomCount(0));
        }
        let n = phases.len() as f64;
        let (g, h) = phases.iter().fold((Complex64::new(0.0, 0.0), 0.0), |(g, h), &(py, pz)| {
            let cz = pz.cos();
            (g + Complex64::from_polar(cz, py), h + cz * cz)
        });
        Ok(Self { g_par: g / n, h_par: h / n })
    }
}

/// Collective parameters of an [`AtomConfig`].
pub fn collective_params(cfg: &AtomConfig) -> Result<CollectiveCouplings> {
    cfg.validate()?;
    match cfg.n_atoms {
        1 => Ok(CollectiveCouplings::uniform()),
        2 => Ok(CollectiveCouplings::two_atom(cfg.phi_y, cfg.phi_z)),
        n => Err(Error::UnsupportedAtomCount(n)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldResult {
    /// Complex cavity field amplitude (V/m).
    pub e_c: Complex64,
    /// Mean intracavity photon number.
    pub n_p: f64,
    /// Detected count rate (1/s).
    pub r_d: f64,
}

impl FieldResult {
    fn from_field(e_c: Complex64, p: &SystemParams) -> Self {
        let n_p = photon_number(e_c, p);
        Self { e_c, n_p, r_d: detection_rate(n_p, p) }
    }

    fn zero() -> Self {
        Self { e_c: Complex64::new(0.0, 0.0), n_p: 0.0, r_d: 0.0 }
    }
}

/// Mean photon number of a cavity field, n_p = 2ε0|E_c|²V/(ħω_L).
pub fn photon_number(e_c: Complex64, p: &SystemParams) -> f64 {
    2.0 * constants::VACUUM_PERMITTIVITY * e_c.norm_sqr() * p.mode_volume()
        / (constants::HBAR * p.laser_angular_frequency())
}

/// Detected count rate R_D = η κ n_p.
pub fn detection_rate(n_p: f64, p: &SystemParams) -> f64 {
    p.eta * p.kappa * n_p
}

/// Cavity field of N in-phase atoms at antinodes, resonant drive (δ = 0):
/// E_c = −(E_L/2)(g0/g) · N / (i/(2C𝓛) + N).
///
/// An empty cavity (N = 0) or an uncoupled one (g = 0) has zero field. The
/// lossless cavity (κ = 0, C = ∞) is handled exactly.
pub fn cavity_field_simple(p: &SystemParams, n_atoms: usize) -> FieldResult {
    if n_atoms == 0 || p.g == 0.0 {
        return FieldResult::zero();
    }
    let n = n_atoms as f64;
    let line = line_function(p.delta_a, p.gamma);
    let c = p.cooperativity();
    let loss = if c.is_infinite() {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::i() / (2.0 * c * line)
    };
    let e_c = -(p.drive_field_amplitude() / 2.0) * (p.g0 / p.g) * n / (loss + n);
    FieldResult::from_field(e_c, p)
}

/// Cavity field for arbitrary collective couplings and laser-cavity detuning:
/// E_c = −(E_L/2)(g0/g) · N𝒢 / (i/(2C𝓛) + δ/(2κC𝓛) + Nℋ).
///
/// Evaluated with numerator and denominator multiplied by g², so that κ = 0
/// and g = 0 stay finite. The denominator only vanishes when Nℋ = 0 and
/// κ = δ = 0 (no atom coupled to a lossless, resonant cavity).
pub fn cavity_field_general(
    p: &SystemParams,
    cc: &CollectiveCouplings,
    n_atoms: usize,
) -> Result<FieldResult> {
    if n_atoms == 0 {
        return Err(Error::UnsupportedAtomCount(0));
    }
    let n = n_atoms as f64;
    let line = line_function(p.delta_a, p.gamma);
    let g2 = p.g * p.g;
    let den = Complex64::new(p.delta_c, p.kappa) * (p.gamma / 2.0) / line + n * cc.h_par * g2;
    if den.norm() < 1e-300 {
        return Err(Error::SingularConfiguration);
    }
    let e_c = -(p.drive_field_amplitude() / 2.0) * p.g0 * p.g * n * cc.g_par / den;
    Ok(FieldResult::from_field(e_c, p))
}

/// Field the atoms scatter into the mode during one round trip,
/// E_M = [iN𝓛/2](g0𝒢E_L/Γ + gℋ·2E_c/Γ) g τ.
pub fn mode_scattering_field(
    p: &SystemParams,
    cc: &CollectiveCouplings,
    n_atoms: usize,
    e_c: Complex64,
) -> Complex64 {
    let n = n_atoms as f64;
    let line = line_function(p.delta_a, p.gamma);
    let drive = p.g0 * cc.g_par * p.drive_field_amplitude() / p.gamma;
    let backaction = p.g * cc.h_par * 2.0 * e_c / p.gamma;
    Complex64::i() * n * line / 2.0 * (drive + backaction) * p.g * p.round_trip_time()
}

/// Relative residual of the round-trip condition E_c = 2E_M + r²E_c, with
/// the detuning phase iδτ added to the mirror factor when δ ≠ 0.
pub fn round_trip_residual(
    p: &SystemParams,
    cc: &CollectiveCouplings,
    n_atoms: usize,
    e_c: Complex64,
) -> f64 {
    let e_m = mode_scattering_field(p, cc, n_atoms, e_c);
    let mirror = Complex64::new(p.mirror_reflectivity_sq(), p.delta_c * p.round_trip_time());
    (e_c - (2.0 * e_m + mirror * e_c)).norm() / e_c.norm()
}

/// Free-space expectation for N constructively scattering atoms given the
/// single-atom rate: N² scaling.
pub fn free_space_rate(one_atom_rate: f64, n_atoms: usize) -> f64 {
    (n_atoms * n_atoms) as f64 * one_atom_rate
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScanAxis {
    /// Atom separation along the cavity axis (m); φ_z = 2πΔ_z/λ_L.
    DeltaZ,
    /// Relative drive phase (rad), evaluated for both φ_z = 0 and φ_z = π.
    PhiY,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub axis_value: f64,
    pub phi_y: f64,
    pub phi_z: f64,
    pub n_p: f64,
    pub r_d: f64,
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid("grid contains non-finite values".into()));
    }
    let increasing = grid.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = grid.windows(2).all(|w| w[1] <= w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidGrid("grid is not monotone".into()));
    }
    Ok(())
}

/// Phase pairs (φ_y, φ_z) visited by a scan, in output order.
pub fn scan_points(
    p: &SystemParams,
    axis: ScanAxis,
    grid: &[f64],
    fixed: &AtomConfig,
) -> Vec<(f64, f64, f64)> {
    match axis {
        ScanAxis::DeltaZ => grid
            .iter()
            .map(|&dz| (dz, fixed.phi_y, TAU * dz / p.lambda_l))
            .collect(),
        ScanAxis::PhiY => [0.0, PI]
            .iter()
            .flat_map(|&pz| grid.iter().map(move |&py| (py, py, pz)))
            .collect(),
    }
}

/// Evaluates the general model along one axis. Rows come out in grid order
/// (for φ_y scans: the whole φ_z = 0 branch, then the φ_z = π branch).
pub fn scan(
    p: &SystemParams,
    axis: ScanAxis,
    grid: &[f64],
    fixed: &AtomConfig,
) -> Result<Vec<ScanRow>> {
    check_grid(grid)?;
    fixed.validate()?;
    scan_points(p, axis, grid, fixed)
        .into_par_iter()
        .map(|(axis_value, phi_y, phi_z)| {
            let cfg = AtomConfig { phi_y, phi_z, ..*fixed };
            let cc = collective_params(&cfg)?;
            let f = cavity_field_general(p, &cc, cfg.n_atoms)?;
            Ok(ScanRow { axis_value, phi_y, phi_z, n_p: f.n_p, r_d: f.r_d })
        })
        .collect()
}

pub const SCAN_COLUMNS: [&str; 5] = ["axis_value", "phi_y", "phi_z", "n_p", "r_d_per_ms"];

/// Writes scan rows; `n_p_scale` only affects the displayed photon number.
pub fn write_scan_csv<W: Write>(w: &mut W, rows: &[ScanRow], n_p_scale: f64) -> std::io::Result<()> {
    write_header(w, &SCAN_COLUMNS)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            sig9(r.axis_value),
            sig9(r.phi_y),
            sig9(r.phi_z),
            sig9(r.n_p * n_p_scale),
            sig9(r.r_d * 1e-3)
        )?;
    }
    Ok(())
}
