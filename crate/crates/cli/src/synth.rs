use std::path::Path;

use cqed_core::trace::{synth_loss_scenario, synth_telegraph_trace, write_trace_csv, PhotonTrace, SeedSpec, TraceSidecar};
use cqed_core::TelegraphModel;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::presets::{self, Preset};
use crate::SynthArgs;

/// Telegraph synthesis settings; count rates in 1/ms, jump rates in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub rate_cd: f64,
    pub rate_dc: f64,
    pub r_high: f64,
    pub r_low: f64,
    pub r_bg: f64,
    /// Seconds.
    pub duration: f64,
    /// Seconds.
    pub bin_width: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self::from_model(&presets::fig4e(), presets::FIG4_DURATION, presets::FIG4_BIN_WIDTH)
    }
}

impl SynthConfig {
    pub fn from_model(m: &TelegraphModel, duration: f64, bin_width: f64) -> Self {
        Self {
            rate_cd: m.rate_cd,
            rate_dc: m.rate_dc,
            r_high: m.r_high * 1e-3,
            r_low: m.r_low * 1e-3,
            r_bg: m.r_bg * 1e-3,
            duration,
            bin_width,
        }
    }

    pub fn model(&self) -> TelegraphModel {
        TelegraphModel {
            rate_cd: self.rate_cd,
            rate_dc: self.rate_dc,
            r_high: self.r_high * 1e3,
            r_low: self.r_low * 1e3,
            r_bg: self.r_bg * 1e3,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => toml::from_str(&text).map_err(|e| e.to_string()),
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn overrides(args: &SynthArgs) -> bool {
    [args.rate_cd, args.rate_dc, args.r_high, args.r_low, args.r_bg, args.duration, args.bin_width]
        .iter()
        .any(Option::is_some)
        || args.config.is_some()
}

fn apply_flags(mut c: SynthConfig, args: &SynthArgs) -> SynthConfig {
    let set = |field: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *field = v;
        }
    };
    set(&mut c.rate_cd, args.rate_cd);
    set(&mut c.rate_dc, args.rate_dc);
    set(&mut c.r_high, args.r_high);
    set(&mut c.r_low, args.r_low);
    set(&mut c.r_bg, args.r_bg);
    set(&mut c.duration, args.duration);
    set(&mut c.bin_width, args.bin_width);
    c
}

fn trace_csv(t: &PhotonTrace) -> Vec<u8> {
    let mut w = Vec::new();
    write_trace_csv(&mut w, t).expect("in-memory write");
    w
}

pub fn run(args: &SynthArgs) -> CliResult<(Outputs, serde_json::Value, serde_json::Value)> {
    let seed = SeedSpec { seed: args.seed, trace_id: args.trace_id };
    let stem = args.stem.clone().unwrap_or_else(|| args.preset.map_or("trace", Preset::name).to_string());
    let mut out = Outputs::default();

    let (trace, sidecar, snapshot) = match args.preset {
        Some(Preset::Fig2) => {
            if overrides(args) {
                return Err(CliError::Config("preset `fig2` takes no model flags or config".into()));
            }
            let scenario = presets::fig2();
            let lt = synth_loss_scenario(&scenario, seed)?;
            let mut side = TraceSidecar::for_trace(&lt.trace, seed);
            side.preset = Some("fig2".into());
            side.scenario = Some(scenario);
            side.regions = lt.regions;
            (lt.trace, side, json!({ "preset": "fig2", "scenario": scenario }))
        }
        preset @ (None | Some(Preset::Fig4d) | Some(Preset::Fig4e)) => {
            let base = match (preset, &args.config) {
                (Some(Preset::Fig4d), _) => {
                    SynthConfig::from_model(&presets::fig4d(), presets::FIG4_DURATION, presets::FIG4_BIN_WIDTH)
                }
                (Some(_), _) => SynthConfig::default(),
                (None, Some(path)) => SynthConfig::load(path)?,
                (None, None) => SynthConfig::default(),
            };
            if preset.is_some() && args.config.is_some() {
                return Err(CliError::Config("--config cannot be combined with a preset".into()));
            }
            let cfg = apply_flags(base, args);
            let model = cfg.model();
            let (_, t) = synth_telegraph_trace(&model, cfg.duration, cfg.bin_width, seed)?;
            let mut side = TraceSidecar::for_trace(&t, seed);
            side.preset = preset.map(|p| p.name().to_string());
            side.model = Some(model);
            (t, side, json!({ "preset": preset, "synth": cfg }))
        }
        Some(other) => {
            return Err(CliError::Config(format!("preset `{}` belongs to `scan`", other.name())));
        }
    };

    out.add(format!("{stem}.csv"), trace_csv(&trace))?;
    out.add(format!("{stem}.json"), (serde_json::to_string_pretty(&sidecar)? + "\n").into_bytes())?;
    println!(
        "{} bins of {} s, {} counts, mean rate {:.3} 1/ms",
        trace.len(),
        trace.bin_width,
        trace.total_counts(),
        trace.mean_rate() * 1e-3
    );
    let snapshot = json!({ "synth": snapshot, "trace_id": args.trace_id, "stem": stem });
    let summary = json!({ "n_bins": trace.len(), "total_counts": trace.total_counts() });
    Ok((out, snapshot, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_units_round_trip() {
        let m = presets::fig4d();
        let c = SynthConfig::from_model(&m, 1.0, 1e-3);
        assert_eq!(c.model(), m);
        assert_eq!(c.rate_cd, presets::FIG4D_RATE);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c: SynthConfig = toml::from_str("rate_cd = 3.0").unwrap();
        assert_eq!(c.rate_cd, 3.0);
        assert_eq!(c.bin_width, SynthConfig::default().bin_width);
        assert!(toml::from_str::<SynthConfig>("rate = 3.0").is_err());
    }
}
