//! Shared fixtures for the criterion benches.

use cqed_core::hmm::HmmModel;
use cqed_core::trace::{synth_telegraph_trace, PhotonTrace};
use cqed_core::TelegraphModel;

/// A 10 s telegraph trace at 50 µs bins (200 000 bins) and the model that generated it.
pub fn telegraph_fixture() -> (PhotonTrace, HmmModel) {
    let m = TelegraphModel { rate_cd: 5.0, rate_dc: 5.0, r_high: 12e3, r_low: 2e3, r_bg: 0.0 };
    let bw = 50e-6;
    let (_, t) = synth_telegraph_trace(&m, 10.0, bw, 0).expect("valid model");
    let init = HmmModel::symmetric([m.r_high * bw, m.r_low * bw], 1.0 - (-m.rate_cd * bw).exp());
    (t, init)
}

pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1).max(1) as f64).collect()
}
