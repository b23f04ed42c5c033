use std::path::{Path, PathBuf};

use cqed_core::hmm::{analyze, write_posteriors_csv, HmmModel, HmmReport, HmmResult};
use cqed_core::trace::{load_trace, PhotonTrace, TraceSidecar};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Outputs;
use crate::AnalyzeArgs;

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub source: String,
    pub start_bin: usize,
    pub end_bin: usize,
    #[serde(flatten)]
    pub hmm: HmmReport,
}

fn parse_bins(spec: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Config(format!("--bins `{spec}` must be START:END"));
    let (a, b) = spec.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn select(args: &AnalyzeArgs, trace: &PhotonTrace, side: &TraceSidecar) -> CliResult<(usize, usize)> {
    match (&args.region, &args.bins) {
        (Some(_), Some(_)) => Err(CliError::Config("--region and --bins are exclusive".into())),
        (Some(label), None) => side
            .regions
            .iter()
            .find(|r| r.label == *label)
            .map(|r| (r.start_bin, r.end_bin))
            .ok_or_else(|| CliError::Config(format!("trace has no region `{label}`"))),
        (None, Some(spec)) => parse_bins(spec),
        (None, None) => Ok((0, trace.len())),
    }
}

fn initial_model(args: &AnalyzeArgs, trace: &PhotonTrace) -> CliResult<Option<HmmModel>> {
    if args.init_means.is_none() && args.init_switch.is_none() {
        return Ok(None);
    }
    let guess = HmmModel::initial_guess(&trace.counts)?;
    let means = match &args.init_means {
        Some(v) => [v[0], v[1]],
        None => guess.emit_means,
    };
    let m = HmmModel::symmetric(means, args.init_switch.unwrap_or(guess.trans[0][1]));
    m.validate()?;
    Ok(Some(m))
}

struct Analysis {
    stem: String,
    report: AnalyzeReport,
    result: HmmResult,
    bin_width: f64,
}

fn analyze_one(args: &AnalyzeArgs, path: &Path) -> CliResult<Analysis> {
    let (full, side) = load_trace(path).map_err(|e| match CliError::from(e) {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let (start, end) = select(args, &full, &side)?;
    let trace = full.slice(start..end)?;
    let result = analyze(&trace, initial_model(args, &trace)?, args.max_iter, args.tol)?;
    let mut stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trace").to_string();
    if let Some(label) = &args.region {
        stem = format!("{stem}_{label}");
    } else if args.bins.is_some() {
        stem = format!("{stem}_{start}_{end}");
    }
    let report = AnalyzeReport {
        source: path.display().to_string(),
        start_bin: start,
        end_bin: end,
        hmm: HmmReport::new(&result, trace.bin_width),
    };
    Ok(Analysis { stem, report, result, bin_width: trace.bin_width })
}

pub fn run(args: &AnalyzeArgs) -> CliResult<(Outputs, serde_json::Value, serde_json::Value)> {
    if let Some(v) = &args.init_means {
        if v.len() != 2 {
            return Err(CliError::Config("--init-means takes HIGH,LOW".into()));
        }
    }
    let analyses: Vec<Analysis> = args.traces.par_iter().map(|p| analyze_one(args, p)).collect::<CliResult<_>>()?;
    let mut out = Outputs::default();
    let mut summary = Vec::new();
    for a in &analyses {
        let r = &a.report.hmm;
        println!(
            "{}: rate_cd {:.3} ± {:.3} 1/s, rate_dc {:.3} ± {:.3} 1/s, {} iterations{}",
            a.stem,
            r.rate_cd.rate_per_s,
            r.rate_cd.stderr_per_s,
            r.rate_dc.rate_per_s,
            r.rate_dc.stderr_per_s,
            r.n_iter,
            if r.converged { "" } else { " (not converged)" }
        );
        if r.degenerate {
            eprintln!("warning: {}: degenerate fit, the two states are not separated", a.stem);
        }
        out.add(format!("{}_hmm.json", a.stem), (serde_json::to_string_pretty(&a.report)? + "\n").into_bytes())?;
        let mut w = Vec::new();
        write_posteriors_csv(&mut w, &a.result, a.bin_width)?;
        out.add(format!("{}_posteriors.csv", a.stem), w)?;
        summary.push(json!({ "stem": a.stem, "degenerate": r.degenerate, "rate_cd": r.rate_cd, "rate_dc": r.rate_dc }));
    }
    let traces: Vec<&PathBuf> = args.traces.iter().collect();
    let snapshot = json!({
        "traces": traces,
        "region": args.region,
        "bins": args.bins,
        "max_iter": args.max_iter,
        "tol": args.tol,
        "init_means": args.init_means,
        "init_switch": args.init_switch,
    });
    Ok((out, snapshot, json!(summary)))
}
