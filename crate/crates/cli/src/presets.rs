//! Named parameter sets for the standard figures and the rate table.

use std::f64::consts::{PI, TAU};

use clap::ValueEnum;
use cqed_core::trace::LossScenario;
use cqed_core::{SystemParams, TelegraphModel};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Two/one/zero-atom loss trace, 5 ms bins.
    Fig2,
    /// Δz scan at three cavity decay rates.
    Fig3a,
    /// φy scan for both axial patterns.
    Fig3b,
    /// Fast-hopping telegraph trace, 50 µs bins.
    Fig4d,
    /// Cooled telegraph trace, five times slower hopping.
    Fig4e,
    /// One- and two-atom detection rates.
    Table,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4d => "fig4d",
            Preset::Fig4e => "fig4e",
            Preset::Table => "table",
        }
    }

    pub fn is_scan(self) -> bool {
        matches!(self, Preset::Fig3a | Preset::Fig3b | Preset::Table)
    }
}

/// Points of the fine classical grids.
pub const SCAN_POINTS: usize = 201;

/// Every n-th classical point is also solved quantum mechanically.
pub const QUANTUM_STRIDE: usize = 20;

/// Count-rate levels of the two-atom telegraph signal (1/s).
pub const R_HIGH: f64 = 12e3;
pub const R_LOW: f64 = 2e3;

/// Measured one-atom count rate (1/s) that the free-space row of the table
/// scales by N².
pub const MEASURED_ONE_ATOM_RATE: f64 = 9e3;

/// Hopping rate before cooling (1/s).
pub const FIG4D_RATE: f64 = 25.0;
/// Hopping rate with cavity cooling (1/s).
pub const FIG4E_RATE: f64 = 5.0;
pub const FIG4_DURATION: f64 = 10.0;
pub const FIG4_BIN_WIDTH: f64 = 50e-6;

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// A cavity-decay scenario of the Δz scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KappaScenario {
    pub label: &'static str,
    pub params: SystemParams,
    /// n_p of this scenario is multiplied by the free-space display scale.
    pub free_space: bool,
}

/// The given κ, a lossless proxy κ = 10⁻⁴Γ, and a free-space proxy κ = 100Γ.
pub fn fig3a_scenarios(p: &SystemParams) -> [KappaScenario; 3] {
    let p = *p;
    [
        KappaScenario { label: "cavity", params: p, free_space: false },
        KappaScenario { label: "lossless", params: SystemParams { kappa: 1e-4 * p.gamma, ..p }, free_space: false },
        KappaScenario { label: "free_space", params: SystemParams { kappa: 100.0 * p.gamma, ..p }, free_space: true },
    ]
}

pub fn fig3a_grid(p: &SystemParams) -> Vec<f64> {
    linspace(0.0, p.lambda_l / 2.0, SCAN_POINTS)
}

pub fn fig3b_grid() -> Vec<f64> {
    linspace(0.0, TAU, SCAN_POINTS)
}

pub fn telegraph(rate: f64) -> TelegraphModel {
    TelegraphModel { rate_cd: rate, rate_dc: rate, r_high: R_HIGH, r_low: R_LOW, r_bg: 0.0 }
}

pub fn fig4d() -> TelegraphModel {
    telegraph(FIG4D_RATE)
}

pub fn fig4e() -> TelegraphModel {
    telegraph(FIG4E_RATE)
}

/// Regions of 1.7, 2.2 and 1.1 s with a 0.5 ms⁻¹ background read off the
/// empty-cavity level; the two-atom levels include it.
pub fn fig2() -> LossScenario {
    let r_bg = 0.5e3;
    LossScenario {
        two_atom: TelegraphModel { rate_cd: 5.0, rate_dc: 5.0, r_high: R_HIGH - r_bg, r_low: R_LOW - r_bg, r_bg },
        one_atom_rate: MEASURED_ONE_ATOM_RATE - r_bg,
        durations: [1.7, 2.2, 1.1],
        bin_width: 5e-3,
    }
}

/// The 5×5 (φy, φz) grid of the quantum-classical cross-check.
pub fn correspondence_grid() -> Vec<(f64, f64)> {
    let axis = linspace(0.0, PI, 5);
    axis.iter().flat_map(|&y| axis.iter().map(move |&z| (y, z))).collect()
}
