//! Physical parameters, unit conversion at the config boundary and derived
//! quantities shared by the classical and quantum models.
//!
//! Config files quote ordinary frequencies in MHz, lengths in µm,
//! intensities in mW/cm² and the detection efficiency in percent.
//! [`SystemParams`] stores everything in coherent SI units with angular
//! rates, so the factor 2π is applied exactly once, in [`RawConfig`].

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values.
pub mod constants {
    /// Speed of light in vacuum, m/s (exact).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Vacuum permittivity ε0, F/m (8.85418781e-12).
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    /// Reduced Planck constant ħ, J·s (1.05457182e-34).
    pub const HBAR: f64 = 1.054_571_817e-34;
}

use constants::{HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};

/// Red-detuned conveyor-belt lattice wavelength (m).
pub const LAMBDA_RED_TRAP: f64 = 1030e-9;
/// Blue-detuned intracavity lattice wavelength (m).
pub const LAMBDA_BLUE_TRAP: f64 = 845.5e-9;

const MHZ_TO_RAD_S: f64 = TAU * 1e6;
const UM_TO_M: f64 = 1e-6;
const MW_PER_CM2_TO_W_PER_M2: f64 = 10.0;
const PERCENT: f64 = 1e-2;

/// Physical parameter set in SI units with angular rates (rad/s).
///
/// Fields are public so that limit studies (κ → 0, g → 0) can build
/// variants with struct-update syntax; [`SystemParams::validate`] checks the
/// invariants required of a physical configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Maximum atom-field coupling, weighting the drive (rad/s).
    pub g0: f64,
    /// Effective atom-cavity coupling (rad/s).
    pub g: f64,
    /// Cavity field decay rate (rad/s).
    pub kappa: f64,
    /// Atomic population relaxation rate Γ (rad/s).
    pub gamma: f64,
    /// Laser-atom detuning Δ = ω_L − ω_0 (rad/s).
    pub delta_a: f64,
    /// Laser-cavity detuning δ = ω_L − ω_c (rad/s).
    pub delta_c: f64,
    /// Driving wavelength (m).
    pub lambda_l: f64,
    /// Cavity length (m).
    pub ell0: f64,
    /// Cavity waist (m).
    pub w_c: f64,
    /// Overall detection efficiency.
    pub eta: f64,
    /// Driving intensity (W/m²).
    pub i_l: f64,
    /// Saturation intensity (W/m²).
    pub i_sat: f64,
}

impl SystemParams {
    /// The two-atom cesium setup: {g0, κ, Γ} = 2π × {18, 0.4, 5.2} MHz,
    /// effective g = 2π × 8 MHz, Δ = 2π × 100 MHz, δ = 0, I_L = 2 mW/cm².
    pub fn reference() -> Self {
        RawConfig::reference()
            .system_params()
            .expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be finite and > 0, got {v}")))
            }
        }
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be finite, got {v}")))
            }
        }
        positive("g0", self.g0)?;
        positive("g", self.g)?;
        positive("kappa", self.kappa)?;
        positive("gamma", self.gamma)?;
        finite("delta_a", self.delta_a)?;
        finite("delta_c", self.delta_c)?;
        positive("lambda_l", self.lambda_l)?;
        positive("ell0", self.ell0)?;
        positive("w_c", self.w_c)?;
        positive("i_sat", self.i_sat)?;
        if !(self.i_l.is_finite() && self.i_l >= 0.0) {
            return Err(Error::param("i_l", format!("must be finite and >= 0, got {}", self.i_l)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::param("eta", format!("must lie in [0, 1], got {}", self.eta)));
        }
        let r2 = self.mirror_reflectivity_sq();
        if !(r2 > 0.0 && r2 <= 1.0) {
            return Err(Error::param(
                "kappa",
                format!("derived mirror reflectivity r² = {r2} is outside (0, 1]"),
            ));
        }
        Ok(())
    }

    /// Round-trip time τ = 2ℓ0/c.
    pub fn round_trip_time(&self) -> f64 {
        2.0 * self.ell0 / SPEED_OF_LIGHT
    }

    /// Field reflectivity squared, r² = 1 − κτ.
    pub fn mirror_reflectivity_sq(&self) -> f64 {
        1.0 - self.kappa * self.round_trip_time()
    }

    /// Cooperativity C = g²/(κΓ).
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.kappa * self.gamma)
    }

    /// Cavity mode volume V = π w_c² ℓ0 / 4.
    pub fn mode_volume(&self) -> f64 {
        PI * self.w_c * self.w_c * self.ell0 / 4.0
    }

    /// Driving-field amplitude from intensity, E_L = sqrt(2 I_L / (c ε0)).
    pub fn drive_field_amplitude(&self) -> f64 {
        (2.0 * self.i_l / (SPEED_OF_LIGHT * VACUUM_PERMITTIVITY)).sqrt()
    }

    /// Rabi frequency from the saturation intensity, Ω_L = Γ sqrt(I_L / (2 I_sat)).
    pub fn rabi_frequency(&self) -> f64 {
        self.gamma * (self.i_l / (2.0 * self.i_sat)).sqrt()
    }

    /// Angular frequency of the driving laser, ω_L = 2πc/λ_L.
    pub fn laser_angular_frequency(&self) -> f64 {
        TAU * SPEED_OF_LIGHT / self.lambda_l
    }

    /// Single-photon field amplitude sqrt(ħω_L / (2 ε0 V)).
    pub fn vacuum_field(&self) -> f64 {
        (HBAR * self.laser_angular_frequency() / (2.0 * VACUUM_PERMITTIVITY * self.mode_volume()))
            .sqrt()
    }

    /// Rabi frequency of the drive implied by the classical field E_L on the
    /// transition that couples with g0: Ω = g0 E_L / E_vac.
    ///
    /// This is the drive that makes the quantum and classical models describe
    /// the same physical field.
    pub fn field_rabi_frequency(&self) -> f64 {
        self.g0 * self.drive_field_amplitude() / self.vacuum_field()
    }

    pub fn derived(&self) -> Derived {
        Derived {
            round_trip_time_s: self.round_trip_time(),
            r_squared: self.mirror_reflectivity_sq(),
            cooperativity: self.cooperativity(),
            mode_volume_m3: self.mode_volume(),
            drive_field_v_per_m: self.drive_field_amplitude(),
            rabi_frequency_rad_s: self.rabi_frequency(),
            field_rabi_frequency_rad_s: self.field_rabi_frequency(),
        }
    }

    /// Converts back to config units.
    pub fn to_raw(&self) -> (RawSystem, RawDrive) {
        (
            RawSystem {
                g0: self.g0 / MHZ_TO_RAD_S,
                g: self.g / MHZ_TO_RAD_S,
                kappa: self.kappa / MHZ_TO_RAD_S,
                gamma: self.gamma / MHZ_TO_RAD_S,
                ell0: self.ell0 / UM_TO_M,
                w_c: self.w_c / UM_TO_M,
                eta: self.eta / PERCENT,
            },
            RawDrive {
                lambda_l: self.lambda_l / UM_TO_M,
                delta_a: self.delta_a / MHZ_TO_RAD_S,
                delta_c: self.delta_c / MHZ_TO_RAD_S,
                i_l: self.i_l / MW_PER_CM2_TO_W_PER_M2,
                i_sat: self.i_sat / MW_PER_CM2_TO_W_PER_M2,
            },
        )
    }
}

/// Derived quantities, as dumped by `--print-derived`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub round_trip_time_s: f64,
    pub r_squared: f64,
    pub cooperativity: f64,
    pub mode_volume_m3: f64,
    pub drive_field_v_per_m: f64,
    pub rabi_frequency_rad_s: f64,
    pub field_rabi_frequency_rad_s: f64,
}

/// Positions of the emitters, expressed as relative phases.
///
/// Atom 1 sits at a cavity antinode. For a single atom the phases are
/// ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomConfig {
    pub n_atoms: usize,
    /// Relative driving-laser phase (rad).
    pub phi_y: f64,
    /// Relative cavity phase (rad).
    pub phi_z: f64,
    /// Distance along the drive axis the phase was derived from (m).
    pub delta_y: Option<f64>,
    /// Distance along the cavity axis the phase was derived from (m).
    pub delta_z: Option<f64>,
}

impl AtomConfig {
    pub fn single() -> Self {
        Self { n_atoms: 1, phi_y: 0.0, phi_z: 0.0, delta_y: None, delta_z: None }
    }

    pub fn pair(phi_y: f64, phi_z: f64) -> Self {
        Self { n_atoms: 2, phi_y, phi_z, delta_y: None, delta_z: None }
    }

    /// Phases φ = 2πΔ/λ_L, reduced to [0, 2π).
    pub fn from_distances(n_atoms: usize, delta_y: f64, delta_z: f64, lambda_l: f64) -> Result<Self> {
        if !(lambda_l.is_finite() && lambda_l > 0.0) {
            return Err(Error::param("lambda_l", "must be finite and > 0"));
        }
        for (field, v) in [("delta_y", delta_y), ("delta_z", delta_z)] {
            if !v.is_finite() {
                return Err(Error::param(field, "must be finite"));
            }
        }
        let cfg = Self {
            n_atoms,
            phi_y: distance_phase(delta_y, lambda_l),
            phi_z: distance_phase(delta_z, lambda_l),
            delta_y: Some(delta_y),
            delta_z: Some(delta_z),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Atoms separated by whole lattice sites of the conveyor belt (period
    /// λ_rDT/2 along y) and the intracavity lattice (period λ_bDT/2 along z).
    pub fn from_lattice_sites(sites_y: i64, sites_z: i64, lambda_l: f64) -> Result<Self> {
        Self::from_distances(
            2,
            sites_y as f64 * LAMBDA_RED_TRAP / 2.0,
            sites_z as f64 * LAMBDA_BLUE_TRAP / 2.0,
            lambda_l,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n_atoms) {
            return Err(Error::UnsupportedAtomCount(self.n_atoms));
        }
        if !self.phi_y.is_finite() {
            return Err(Error::param("phi_y", "must be finite"));
        }
        if !self.phi_z.is_finite() {
            return Err(Error::param("phi_z", "must be finite"));
        }
        Ok(())
    }

    /// Phases that actually enter the models: zero for a single atom.
    pub fn effective_phases(&self) -> (f64, f64) {
        if self.n_atoms == 1 {
            (0.0, 0.0)
        } else {
            (self.phi_y, self.phi_z)
        }
    }
}

pub fn distance_phase(distance: f64, lambda_l: f64) -> f64 {
    (TAU * distance / lambda_l).rem_euclid(TAU)
}

/// `[system]` section: MHz, µm, percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub g0: f64,
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub ell0: f64,
    pub w_c: f64,
    pub eta: f64,
}

/// `[drive]` section: µm, MHz, mW/cm².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDrive {
    pub lambda_l: f64,
    pub delta_a: f64,
    #[serde(default)]
    pub delta_c: f64,
    pub i_l: f64,
    pub i_sat: f64,
}

/// `[atoms]` section. Distances in µm override the phases when present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAtoms {
    #[serde(default = "two")]
    pub n_atoms: usize,
    #[serde(default)]
    pub phi_y: f64,
    #[serde(default)]
    pub phi_z: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_z: Option<f64>,
}

fn two() -> usize {
    2
}

impl Default for RawAtoms {
    fn default() -> Self {
        Self { n_atoms: 2, phi_y: 0.0, phi_z: 0.0, delta_y: None, delta_z: None }
    }
}

/// Human-readable parameter file, TOML or JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub system: RawSystem,
    #[serde(default)]
    pub atoms: RawAtoms,
    pub drive: RawDrive,
}

impl RawConfig {
    pub fn reference() -> Self {
        Self {
            system: RawSystem {
                g0: 18.0,
                g: 8.0,
                kappa: 0.4,
                gamma: 5.2,
                ell0: 155.0,
                w_c: 23.0,
                eta: 6.0,
            },
            atoms: RawAtoms::default(),
            drive: RawDrive { lambda_l: 0.8523, delta_a: 100.0, delta_c: 0.0, i_l: 2.0, i_sat: 1.1 },
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let (s, d) = (&self.system, &self.drive);
        for (field, v) in [
            ("g0", s.g0),
            ("g", s.g),
            ("kappa", s.kappa),
            ("gamma", s.gamma),
            ("ell0", s.ell0),
            ("w_c", s.w_c),
            ("eta", s.eta),
            ("lambda_l", d.lambda_l),
            ("delta_a", d.delta_a),
            ("delta_c", d.delta_c),
            ("i_l", d.i_l),
            ("i_sat", d.i_sat),
        ] {
            if !v.is_finite() {
                return Err(Error::param(field, format!("must be finite, got {v}")));
            }
        }
        let p = SystemParams {
            g0: s.g0 * MHZ_TO_RAD_S,
            g: s.g * MHZ_TO_RAD_S,
            kappa: s.kappa * MHZ_TO_RAD_S,
            gamma: s.gamma * MHZ_TO_RAD_S,
            delta_a: d.delta_a * MHZ_TO_RAD_S,
            delta_c: d.delta_c * MHZ_TO_RAD_S,
            lambda_l: d.lambda_l * UM_TO_M,
            ell0: s.ell0 * UM_TO_M,
            w_c: s.w_c * UM_TO_M,
            eta: s.eta * PERCENT,
            i_l: d.i_l * MW_PER_CM2_TO_W_PER_M2,
            i_sat: d.i_sat * MW_PER_CM2_TO_W_PER_M2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn atom_config(&self) -> Result<AtomConfig> {
        let a = &self.atoms;
        match (a.delta_y, a.delta_z) {
            (None, None) => {
                let cfg = AtomConfig { n_atoms: a.n_atoms, phi_y: a.phi_y, phi_z: a.phi_z, delta_y: None, delta_z: None };
                cfg.validate()?;
                Ok(cfg)
            }
            (dy, dz) => AtomConfig::from_distances(
                a.n_atoms,
                dy.unwrap_or(0.0) * UM_TO_M,
                dz.unwrap_or(0.0) * UM_TO_M,
                self.drive.lambda_l * UM_TO_M,
            ),
        }
    }
}
