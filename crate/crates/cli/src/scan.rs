use std::f64::consts::TAU;

use cqed_core::classical::{cavity_field_simple, free_space_rate, scan, write_scan_csv, ScanAxis, ScanRow, SCAN_COLUMNS};
use cqed_core::csv::{sig9, write_header};
use cqed_core::quantum::{solve, Observables, RabiConvention};
use cqed_core::{AtomConfig, RawConfig, SystemParams};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::presets::{self, Preset};
use crate::{Axis, Rabi, ScanArgs};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuantumRow {
    pub classical: ScanRow,
    pub quantum: Observables,
    pub converged: bool,
}

impl QuantumRow {
    /// |n_p^q − n_p^c| / max(n_p^c, 10⁻⁶).
    pub fn rel_dev(&self) -> f64 {
        (self.quantum.n_p - self.classical.n_p).abs() / self.classical.n_p.max(1e-6)
    }
}

pub const QUANTUM_EXTRA_COLUMNS: [&str; 4] = ["n_p_quantum", "p_exc", "pop_plus", "pop_minus"];

/// Every `stride`-th row of each φ_z branch, plus the branch's last row.
fn subsample(rows: &[ScanRow], stride: usize) -> Vec<ScanRow> {
    rows.chunk_by(|a, b| a.phi_z == b.phi_z)
        .flat_map(|branch| {
            let mut picked: Vec<ScanRow> = branch.iter().step_by(stride).copied().collect();
            if (branch.len() - 1) % stride != 0 {
                picked.extend(branch.last().copied());
            }
            picked
        })
        .collect()
}

pub fn quantum_rows(
    p: &SystemParams,
    rows: &[ScanRow],
    n_atoms: usize,
    stride: usize,
    n_max: usize,
    rabi: RabiConvention,
) -> CliResult<Vec<QuantumRow>> {
    subsample(rows, stride)
        .into_par_iter()
        .map(|row| {
            let cfg = AtomConfig { n_atoms, phi_y: row.phi_y, phi_z: row.phi_z, delta_y: None, delta_z: None };
            let (ss, obs) = solve(p, &cfg, n_max, rabi)?;
            Ok(QuantumRow { classical: row, quantum: obs, converged: ss.converged })
        })
        .collect()
}

pub fn write_quantum_csv(rows: &[QuantumRow], compare: bool) -> Vec<u8> {
    let mut cols: Vec<&str> = SCAN_COLUMNS.iter().chain(&QUANTUM_EXTRA_COLUMNS).copied().collect();
    if compare {
        cols.push("rel_dev");
    }
    let mut w = Vec::new();
    write_header(&mut w, &cols).expect("in-memory write");
    for r in rows {
        let c = &r.classical;
        let q = &r.quantum;
        let mut fields = vec![c.axis_value, c.phi_y, c.phi_z, c.n_p, c.r_d * 1e-3, q.n_p, q.p_exc, q.pop_plus, q.pop_minus];
        if compare {
            fields.push(r.rel_dev());
        }
        let line: Vec<String> = fields.into_iter().map(sig9).collect();
        w.extend_from_slice(line.join(",").as_bytes());
        w.push(b'\n');
    }
    w
}

fn scan_csv(rows: &[ScanRow], scale: f64) -> Vec<u8> {
    let mut w = Vec::new();
    write_scan_csv(&mut w, rows, scale).expect("in-memory write");
    w
}

fn parse_grid(spec: &str, axis: Axis) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Config(format!("--grid `{spec}` must be START:STOP:POINTS"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(CliError::Config("--grid needs at least one point".into()));
    }
    let unit = match axis {
        Axis::DeltaZ => 1e-6,
        Axis::PhiY => 1.0,
    };
    Ok(presets::linspace(start * unit, stop * unit, n))
}

fn axis_of(a: Axis) -> ScanAxis {
    match a {
        Axis::DeltaZ => ScanAxis::DeltaZ,
        Axis::PhiY => ScanAxis::PhiY,
    }
}

struct Quantum<'a> {
    args: &'a ScanArgs,
    rabi: RabiConvention,
    max_rel_dev: f64,
    unconverged: usize,
    points: usize,
}

impl Quantum<'_> {
    fn enabled(&self) -> bool {
        self.args.quantum || self.args.compare_classical
    }

    fn run(&mut self, p: &SystemParams, rows: &[ScanRow], n_atoms: usize) -> CliResult<Vec<u8>> {
        let q = quantum_rows(p, rows, n_atoms, self.args.quantum_stride, self.args.nmax, self.rabi)?;
        self.points += q.len();
        self.unconverged += q.iter().filter(|r| !r.converged).count();
        self.max_rel_dev = q.iter().map(QuantumRow::rel_dev).fold(self.max_rel_dev, f64::max);
        Ok(write_quantum_csv(&q, self.args.compare_classical))
    }
}

fn table(p: &SystemParams, out: &mut Outputs) -> CliResult<serde_json::Value> {
    let one = cavity_field_simple(p, 1).r_d;
    let two = cavity_field_simple(p, 2).r_d;
    let free = free_space_rate(presets::MEASURED_ONE_ATOM_RATE, 2);
    let mut w = Vec::new();
    write_header(&mut w, &["case", "n_atoms", "r_d_per_ms"])?;
    for (case, n, r) in [("model", 1, one), ("model", 2, two), ("free_space", 2, free)] {
        w.extend_from_slice(format!("{case},{n},{}\n", sig9(r * 1e-3)).as_bytes());
    }
    out.add("table.csv", w)?;
    println!("N  model R_D (1/ms)  free space (1/ms)");
    println!("1  {:>16.2}  {:>17.0}", one * 1e-3, presets::MEASURED_ONE_ATOM_RATE * 1e-3);
    println!("2  {:>16.2}  {:>17.0}", two * 1e-3, free * 1e-3);
    println!("R_D(1)/R_D(2) = {:.4}", one / two);
    Ok(json!({ "r_d_one_per_ms": one * 1e-3, "r_d_two_per_ms": two * 1e-3, "ratio": one / two, "free_space_per_ms": free * 1e-3 }))
}

/// Returns the outputs, a config snapshot and a summary.
pub fn run(args: &ScanArgs) -> CliResult<(Outputs, serde_json::Value, serde_json::Value)> {
    if args.quantum_stride == 0 {
        return Err(CliError::Config("--quantum-stride must be at least 1".into()));
    }
    if !(args.free_space_scale.is_finite() && args.free_space_scale > 0.0) {
        return Err(CliError::Config("--free-space-scale must be finite and > 0".into()));
    }
    let raw = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::reference(),
    };
    let p = raw.system_params()?;
    let atoms = raw.atom_config()?;
    if args.print_derived {
        println!("{}", serde_json::to_string_pretty(&p.derived())?);
    }
    let rabi = match args.rabi {
        Rabi::Field => RabiConvention::FieldMatched,
        Rabi::Saturation => RabiConvention::SaturationIntensity,
    };
    let mut q = Quantum { args, rabi, max_rel_dev: 0.0, unconverged: 0, points: 0 };
    let mut out = Outputs::default();
    let mut summary = json!({});

    match args.preset {
        None => {
            let axis = args.axis;
            let grid = match &args.grid {
                Some(spec) => parse_grid(spec, axis)?,
                None => match axis {
                    Axis::DeltaZ => presets::linspace(0.0, p.lambda_l / 2.0, 101),
                    Axis::PhiY => presets::linspace(0.0, TAU, 101),
                },
            };
            let rows = scan(&p, axis_of(axis), &grid, &atoms)?;
            out.add("scan.csv", scan_csv(&rows, args.free_space_scale))?;
            if q.enabled() {
                out.add("scan_quantum.csv", q.run(&p, &rows, atoms.n_atoms)?)?;
            }
        }
        Some(Preset::Fig3a) => {
            let pair = AtomConfig::pair(atoms.phi_y, 0.0);
            for s in presets::fig3a_scenarios(&p) {
                let rows = scan(&s.params, ScanAxis::DeltaZ, &presets::fig3a_grid(&s.params), &pair)?;
                let scale = if s.free_space { args.free_space_scale } else { 1.0 };
                out.add(format!("fig3a_{}.csv", s.label), scan_csv(&rows, scale))?;
                if q.enabled() && s.label == "cavity" {
                    out.add("fig3a_cavity_quantum.csv", q.run(&s.params, &rows, 2)?)?;
                }
            }
        }
        Some(Preset::Fig3b) => {
            let rows = scan(&p, ScanAxis::PhiY, &presets::fig3b_grid(), &AtomConfig::pair(0.0, 0.0))?;
            out.add("fig3b.csv", scan_csv(&rows, 1.0))?;
            if q.enabled() {
                out.add("fig3b_quantum.csv", q.run(&p, &rows, 2)?)?;
            }
        }
        Some(Preset::Table) => summary = table(&p, &mut out)?,
        Some(other) => {
            return Err(CliError::Config(format!("preset `{}` belongs to `synth`", other.name())));
        }
    }

    if q.enabled() {
        if q.unconverged > 0 {
            eprintln!("warning: {} of {} quantum points not converged at n_max = {}", q.unconverged, q.points, args.nmax);
        }
        if args.compare_classical {
            println!("max relative deviation quantum vs classical: {:.3e}", q.max_rel_dev);
        }
        summary = json!({ "quantum_points": q.points, "unconverged": q.unconverged, "max_rel_dev": q.max_rel_dev });
    }
    let snapshot = json!({
        "config": raw,
        "preset": args.preset,
        "axis": args.axis,
        "grid": args.grid,
        "quantum": q.enabled(),
        "nmax": args.nmax,
        "quantum_stride": args.quantum_stride,
        "rabi": args.rabi,
        "free_space_scale": args.free_space_scale,
    });
    Ok((out, snapshot, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_units_follow_axis() {
        let g = parse_grid("0:0.4:3", Axis::DeltaZ).unwrap();
        assert!((g[2] - 0.4e-6).abs() < 1e-18);
        assert_eq!(parse_grid("0:2:3", Axis::PhiY).unwrap(), [0.0, 1.0, 2.0]);
        for bad in ["0:1", "a:1:3", "0:1:0", "0:1:2:3"] {
            assert!(matches!(parse_grid(bad, Axis::PhiY), Err(CliError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn subsample_keeps_branch_ends() {
        let p = SystemParams::reference();
        let rows = scan(&p, ScanAxis::PhiY, &presets::linspace(0.0, 1.0, 6), &AtomConfig::pair(0.0, 0.0)).unwrap();
        assert_eq!(rows.len(), 12);
        let picked = subsample(&rows, 2);
        let axis: Vec<f64> = picked.iter().map(|r| r.axis_value).collect();
        assert_eq!(axis, [0.0, 0.4, 0.8, 1.0, 0.0, 0.4, 0.8, 1.0]);
        assert_eq!(subsample(&rows, 1).len(), 12);
    }
}
