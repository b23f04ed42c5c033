//! Synthetic SPCM photon-count traces.
//!
//! Two atoms hop between the λ pattern (constructive, high count rate) and
//! the λ/2 pattern (destructive, low count rate). The hopping is a
//! two-state continuous-time Markov chain; detected photons are Poisson
//! counts of the piecewise-constant rate integrated over each bin.
//!
//! Random numbers come from ChaCha8 keyed by the user seed. Each trace owns
//! a block of 16 ChaCha streams (`16·trace_id + purpose`), so the telegraph
//! path and the photon counts of a trace are reproducible independently of
//! each other and of other traces.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::csv::{read_table, write_header};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternState {
    /// λ pattern, φ_z = 0.
    Constructive = 0,
    /// λ/2 pattern, φ_z = π.
    Destructive = 1,
}

impl PatternState {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Self::Constructive),
            1 => Some(Self::Destructive),
            _ => None,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Self::Constructive => Self::Destructive,
            Self::Destructive => Self::Constructive,
        }
    }
}

/// Rates in 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelegraphModel {
    /// Constructive → destructive jump rate.
    pub rate_cd: f64,
    /// Destructive → constructive jump rate.
    pub rate_dc: f64,
    /// Detected rate in the constructive state, background excluded.
    pub r_high: f64,
    /// Detected rate in the destructive state, background excluded.
    pub r_low: f64,
    pub r_bg: f64,
}

impl TelegraphModel {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("rate_cd", self.rate_cd),
            ("rate_dc", self.rate_dc),
            ("r_high", self.r_high),
            ("r_low", self.r_low),
            ("r_bg", self.r_bg),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if self.r_high < self.r_low {
            return Err(Error::param("r_high", "must be >= r_low"));
        }
        Ok(())
    }

    pub fn exit_rate(&self, s: PatternState) -> f64 {
        match s {
            PatternState::Constructive => self.rate_cd,
            PatternState::Destructive => self.rate_dc,
        }
    }

    /// Total detected rate (signal + background) in a state.
    pub fn detected_rate(&self, s: PatternState) -> f64 {
        self.r_bg
            + match s {
                PatternState::Constructive => self.r_high,
                PatternState::Destructive => self.r_low,
            }
    }

    /// Stationary probability of the constructive state,
    /// rate_dc / (rate_cd + rate_dc); 1 when both rates vanish.
    pub fn stationary_constructive(&self) -> f64 {
        let total = self.rate_cd + self.rate_dc;
        if total == 0.0 {
            1.0
        } else {
            self.rate_dc / total
        }
    }
}

/// RNG key of one trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub trace_id: u64,
}

impl From<u64> for SeedSpec {
    fn from(seed: u64) -> Self {
        Self { seed, trace_id: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    InitialState = 0,
    Telegraph = 1,
    Counts = 2,
}

impl SeedSpec {
    pub fn rng(&self, purpose: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trace_id.wrapping_mul(16).wrapping_add(purpose as u64));
        rng
    }
}

/// Piecewise-constant state path on [0, duration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelegraphPath {
    pub duration: f64,
    /// (switch time, state entered); the first entry starts at 0.
    pub segments: Vec<(f64, PatternState)>,
}

impl TelegraphPath {
    pub fn constant(duration: f64, state: PatternState) -> Self {
        Self { duration, segments: vec![(0.0, state)] }
    }

    fn segment_end(&self, i: usize) -> f64 {
        self.segments.get(i + 1).map_or(self.duration, |s| s.0)
    }

    /// Completed and censored dwell times with their states.
    pub fn dwells(&self) -> Vec<(PatternState, f64)> {
        (0..self.segments.len()).map(|i| (self.segments[i].1, self.segment_end(i) - self.segments[i].0)).collect()
    }

    pub fn time_in(&self, s: PatternState) -> f64 {
        self.dwells().iter().filter(|d| d.0 == s).map(|d| d.1).sum()
    }

    pub fn switch_count(&self) -> usize {
        self.segments.len() - 1
    }
}

/// Samples a telegraph path with exponential dwell times. Without an
/// explicit initial state it is drawn from the stationary distribution.
pub fn sample_telegraph(
    m: &TelegraphModel,
    duration: f64,
    initial: Option<PatternState>,
    seed: impl Into<SeedSpec>,
) -> Result<TelegraphPath> {
    m.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::param("duration", format!("must be finite and > 0, got {duration}")));
    }
    let seed = seed.into();
    let state0 = initial.unwrap_or_else(|| {
        let u: f64 = seed.rng(Stream::InitialState).random();
        if u < m.stationary_constructive() {
            PatternState::Constructive
        } else {
            PatternState::Destructive
        }
    });
    let mut rng = seed.rng(Stream::Telegraph);
    let mut segments = vec![(0.0, state0)];
    let (mut t, mut state) = (0.0, state0);
    loop {
        let rate = m.exit_rate(state);
        if rate == 0.0 {
            break;
        }
        let dwell: f64 = Exp::new(rate).expect("positive finite rate").sample(&mut rng);
        t += dwell;
        if t >= duration {
            break;
        }
        state = state.other();
        segments.push((t, state));
    }
    Ok(TelegraphPath { duration, segments })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonTrace {
    /// Seconds.
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Majority state per bin, when known.
    pub truth_path: Option<Vec<PatternState>>,
    pub seed: u64,
}

impl PhotonTrace {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(Error::param("bin_width", "must be finite and > 0"));
        }
        if self.counts.is_empty() {
            return Err(Error::param("counts", "trace has no bins"));
        }
        if let Some(t) = &self.truth_path {
            if t.len() != self.counts.len() {
                return Err(Error::param("truth_path", "length differs from counts"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.counts.len() as f64 * self.bin_width
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Mean detected rate (1/s).
    pub fn mean_rate(&self) -> f64 {
        self.total_counts() as f64 / self.duration()
    }

    /// Bins `range`, keeping the seed.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.counts.len() {
            return Err(Error::param("range", format!("{range:?} is outside 0..{}", self.counts.len())));
        }
        Ok(Self {
            bin_width: self.bin_width,
            counts: self.counts[range.clone()].to_vec(),
            truth_path: self.truth_path.as_ref().map(|t| t[range].to_vec()),
            seed: self.seed,
        })
    }

    /// Sums `factor` adjacent bins, dropping an incomplete tail. The truth
    /// label is dropped since it is not defined at the coarser resolution.
    pub fn rebin(&self, factor: usize) -> Result<Self> {
        if factor == 0 || factor > self.counts.len() {
            return Err(Error::param("factor", format!("must lie in 1..={}", self.counts.len())));
        }
        Ok(Self {
            bin_width: self.bin_width * factor as f64,
            counts: self.counts.chunks_exact(factor).map(|c| c.iter().sum()).collect(),
            truth_path: None,
            seed: self.seed,
        })
    }
}

/// A piece of constant detected rate (1/s, background included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSegment {
    pub start: f64,
    pub rate: f64,
    pub state: Option<PatternState>,
}

fn bin_count(duration: f64, bin_width: f64) -> usize {
    (duration / bin_width + 1e-9).floor() as usize
}

/// Poisson counts of a piecewise-constant rate. Bins straddling a switch
/// use the exact time-weighted mean rate. Returns counts and the majority
/// state per bin (ties go to the lower state index; `None` where any part
/// of the bin has no state).
fn integrate_counts(
    segments: &[RateSegment],
    duration: f64,
    bin_width: f64,
    rng: &mut impl Rng,
) -> (Vec<u64>, Vec<Option<PatternState>>) {
    let n_bins = bin_count(duration, bin_width);
    let mut counts = Vec::with_capacity(n_bins);
    let mut labels = Vec::with_capacity(n_bins);
    let mut seg = 0;
    for b in 0..n_bins {
        let (t0, t1) = (b as f64 * bin_width, (b + 1) as f64 * bin_width);
        while seg + 1 < segments.len() && segments[seg + 1].start <= t0 {
            seg += 1;
        }
        let mut expected = 0.0;
        let mut occupancy = [0.0f64; 2];
        let mut unlabeled = false;
        let mut k = seg;
        while k < segments.len() && segments[k].start < t1 {
            let a = segments[k].start.max(t0);
            let e = segments.get(k + 1).map_or(t1, |s| s.start.min(t1));
            let overlap = (e - a).max(0.0);
            expected += overlap * segments[k].rate;
            match segments[k].state {
                Some(s) => occupancy[s.index()] += overlap,
                None => unlabeled = true,
            }
            k += 1;
        }
        counts.push(poisson(expected, rng));
        labels.push(if unlabeled {
            None
        } else if occupancy[0] >= occupancy[1] {
            Some(PatternState::Constructive)
        } else {
            Some(PatternState::Destructive)
        });
    }
    (counts, labels)
}

fn poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn telegraph_segments(path: &TelegraphPath, m: &TelegraphModel, offset: f64) -> Vec<RateSegment> {
    path.segments
        .iter()
        .map(|&(t, s)| RateSegment { start: offset + t, rate: m.detected_rate(s), state: Some(s) })
        .collect()
}

/// Bins a telegraph path into Poisson counts.
pub fn synth_counts(
    path: &TelegraphPath,
    m: &TelegraphModel,
    bin_width: f64,
    seed: impl Into<SeedSpec>,
) -> Result<PhotonTrace> {
    m.validate()?;
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::param("bin_width", "must be finite and > 0"));
    }
    if bin_count(path.duration, bin_width) == 0 {
        return Err(Error::param("bin_width", "longer than the trace"));
    }
    let seed = seed.into();
    let segments = telegraph_segments(path, m, 0.0);
    let (counts, labels) = integrate_counts(&segments, path.duration, bin_width, &mut seed.rng(Stream::Counts));
    Ok(PhotonTrace {
        bin_width,
        counts,
        truth_path: Some(labels.into_iter().map(|l| l.expect("every bin is labeled")).collect()),
        seed: seed.seed,
    })
}

/// Telegraph path and counts in one go.
pub fn synth_telegraph_trace(
    m: &TelegraphModel,
    duration: f64,
    bin_width: f64,
    seed: impl Into<SeedSpec>,
) -> Result<(TelegraphPath, PhotonTrace)> {
    let seed = seed.into();
    let path = sample_telegraph(m, duration, None, seed)?;
    let trace = synth_counts(&path, m, bin_width, seed)?;
    Ok((path, trace))
}

/// Two atoms, then one, then an empty cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossScenario {
    /// Hopping pair; its `r_bg` is the background of all three regions.
    pub two_atom: TelegraphModel,
    /// Single-atom detected rate, background excluded (1/s).
    pub one_atom_rate: f64,
    /// Region durations (s): two atoms, one atom, empty.
    pub durations: [f64; 3],
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub n_atoms: u8,
    /// First bin of the region.
    pub start_bin: usize,
    /// One past the last bin.
    pub end_bin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTrace {
    pub trace: PhotonTrace,
    pub path: TelegraphPath,
    pub regions: Vec<Region>,
}

pub fn synth_loss_scenario(s: &LossScenario, seed: impl Into<SeedSpec>) -> Result<LossTrace> {
    s.two_atom.validate()?;
    if s.durations.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::param("durations", "region durations must be finite and > 0"));
    }
    if !(s.one_atom_rate.is_finite() && s.one_atom_rate >= 0.0) {
        return Err(Error::param("one_atom_rate", "must be finite and >= 0"));
    }
    if !(s.bin_width.is_finite() && s.bin_width > 0.0) {
        return Err(Error::param("bin_width", "must be finite and > 0"));
    }
    let seed = seed.into();
    let [d1, d2, d3] = s.durations;
    let path = sample_telegraph(&s.two_atom, d1, None, seed)?;
    let mut segments = telegraph_segments(&path, &s.two_atom, 0.0);
    segments.push(RateSegment { start: d1, rate: s.one_atom_rate + s.two_atom.r_bg, state: None });
    segments.push(RateSegment { start: d1 + d2, rate: s.two_atom.r_bg, state: None });
    let total = d1 + d2 + d3;
    let (counts, _) = integrate_counts(&segments, total, s.bin_width, &mut seed.rng(Stream::Counts));
    let n = counts.len();
    let b1 = bin_count(d1, s.bin_width).min(n);
    let b2 = bin_count(d1 + d2, s.bin_width).min(n);
    let regions = vec![
        Region { label: "i".into(), n_atoms: 2, start_bin: 0, end_bin: b1 },
        Region { label: "ii".into(), n_atoms: 1, start_bin: b1, end_bin: b2 },
        Region { label: "iii".into(), n_atoms: 0, start_bin: b2, end_bin: n },
    ];
    Ok(LossTrace {
        trace: PhotonTrace { bin_width: s.bin_width, counts, truth_path: None, seed: seed.seed },
        path,
        regions,
    })
}

/// JSON sidecar stored next to a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub schema: u32,
    pub bin_width_s: f64,
    pub n_bins: usize,
    pub seed: u64,
    pub trace_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<TelegraphModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<LossScenario>,
    #[serde(default)]
    pub regions: Vec<Region>,
}

impl TraceSidecar {
    pub fn for_trace(trace: &PhotonTrace, seed: SeedSpec) -> Self {
        Self {
            schema: 1,
            bin_width_s: trace.bin_width,
            n_bins: trace.len(),
            seed: seed.seed,
            trace_id: seed.trace_id,
            preset: None,
            model: None,
            scenario: None,
            regions: Vec::new(),
        }
    }
}

pub fn write_trace_csv<W: Write>(w: &mut W, trace: &PhotonTrace) -> std::io::Result<()> {
    match &trace.truth_path {
        Some(truth) => {
            write_header(w, &["bin_index", "t_start_s", "counts", "truth_state"])?;
            for (i, (c, s)) in trace.counts.iter().zip(truth).enumerate() {
                writeln!(w, "{i},{},{c},{}", i as f64 * trace.bin_width, s.index())?;
            }
        }
        None => {
            write_header(w, &["bin_index", "t_start_s", "counts"])?;
            for (i, c) in trace.counts.iter().enumerate() {
                writeln!(w, "{i},{},{c}", i as f64 * trace.bin_width)?;
            }
        }
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(r: R, bin_width: f64, seed: u64) -> Result<PhotonTrace> {
    let (header, rows) = read_table(r)?;
    let has_truth = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["bin_index", "t_start_s", "counts"] => false,
        ["bin_index", "t_start_s", "counts", "truth_state"] => true,
        other => return Err(Error::Parse(format!("unexpected trace header {other:?}"))),
    };
    let mut counts = Vec::with_capacity(rows.len());
    let mut truth = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let idx: usize = row[0].parse().map_err(|_| Error::Parse(format!("bad bin_index `{}`", row[0])))?;
        if idx != i {
            return Err(Error::Parse(format!("bin_index {idx} out of sequence at row {i}")));
        }
        counts.push(row[2].parse().map_err(|_| Error::Parse(format!("bad count `{}`", row[2])))?);
        if has_truth {
            let s = row[3]
                .parse::<usize>()
                .ok()
                .and_then(PatternState::from_index)
                .ok_or_else(|| Error::Parse(format!("bad truth_state `{}`", row[3])))?;
            truth.push(s);
        }
    }
    let trace = PhotonTrace { bin_width, counts, truth_path: has_truth.then_some(truth), seed };
    trace.validate()?;
    Ok(trace)
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn save_trace(dir: &Path, stem: &str, trace: &PhotonTrace, sidecar: &TraceSidecar) -> Result<[PathBuf; 2]> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut f = std::io::BufWriter::new(fs::File::create(&csv_path)?);
    write_trace_csv(&mut f, trace)?;
    f.flush()?;
    let json_path = sidecar_path(&csv_path);
    fs::write(&json_path, serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok([csv_path, json_path])
}

pub fn load_trace(csv_path: &Path) -> Result<(PhotonTrace, TraceSidecar)> {
    let sidecar: TraceSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
    let trace = read_trace_csv(BufReader::new(fs::File::open(csv_path)?), sidecar.bin_width_s, sidecar.seed)?;
    if trace.len() != sidecar.n_bins {
        return Err(Error::Parse(format!("sidecar lists {} bins, CSV has {}", sidecar.n_bins, trace.len())));
    }
    Ok((trace, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rate: f64) -> TelegraphModel {
        TelegraphModel { rate_cd: rate, rate_dc: rate, r_high: 12e3, r_low: 2e3, r_bg: 0.0 }
    }

    #[test]
    fn zero_rates_give_a_single_segment() {
        let m = model(0.0);
        let p = sample_telegraph(&m, 3.0, Some(PatternState::Destructive), 1).unwrap();
        assert_eq!(p.segments, vec![(0.0, PatternState::Destructive)]);
        let p = sample_telegraph(&m, 3.0, None, 1).unwrap();
        assert_eq!(p.segments, vec![(0.0, PatternState::Constructive)]);
    }

    #[test]
    fn rejects_invalid_models() {
        let mut m = model(1.0);
        m.r_low = 20e3;
        assert!(sample_telegraph(&m, 1.0, None, 0).is_err());
        assert!(sample_telegraph(&model(1.0), 0.0, None, 0).is_err());
        let bad = TelegraphModel { rate_cd: -1.0, ..model(1.0) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_constructive_state_mean_counts() {
        let m = model(0.0);
        let path = TelegraphPath::constant(50.0, PatternState::Constructive);
        let t = synth_counts(&path, &m, 5e-3, 3).unwrap();
        assert_eq!(t.len(), 10_000);
        let mean = t.total_counts() as f64 / t.len() as f64;
        // Poisson(60): 3σ of the mean over 10^4 bins is 0.23.
        assert!((mean - 60.0).abs() < 3.0 * (60.0f64 / 1e4).sqrt(), "{mean}");
    }

    #[test]
    fn low_level_mean_counts_at_fine_resolution() {
        let m = TelegraphModel { r_low: 1.5e3, r_bg: 0.5e3, ..model(0.0) };
        let path = TelegraphPath::constant(20.0, PatternState::Destructive);
        let t = synth_counts(&path, &m, 50e-6, 4).unwrap();
        let mean = t.total_counts() as f64 / t.len() as f64;
        assert!((mean - 0.1).abs() < 3.0 * (0.1 / t.len() as f64).sqrt(), "{mean}");
    }

    #[test]
    fn zero_rates_give_zero_counts() {
        let m = TelegraphModel { rate_cd: 5.0, rate_dc: 5.0, r_high: 0.0, r_low: 0.0, r_bg: 0.0 };
        let (_, t) = synth_telegraph_trace(&m, 2.0, 1e-3, 9).unwrap();
        assert_eq!(t.total_counts(), 0);
    }

    #[test]
    fn straddling_bin_uses_time_weighted_rate_and_majority_label() {
        let path = TelegraphPath {
            duration: 1.0,
            segments: vec![(0.0, PatternState::Constructive), (0.3, PatternState::Destructive)],
        };
        let m = TelegraphModel { rate_cd: 1.0, rate_dc: 1.0, r_high: 10.0, r_low: 0.0, r_bg: 0.0 };
        let segs = telegraph_segments(&path, &m, 0.0);
        let mut rng = SeedSpec::from(0).rng(Stream::Counts);
        let (_, labels) = integrate_counts(&segs, 1.0, 1.0, &mut rng);
        assert_eq!(labels, vec![Some(PatternState::Destructive)]);
        let path = TelegraphPath {
            duration: 1.0,
            segments: vec![(0.0, PatternState::Destructive), (0.5, PatternState::Constructive)],
        };
        let segs = telegraph_segments(&path, &m, 0.0);
        let (_, labels) = integrate_counts(&segs, 1.0, 1.0, &mut rng);
        assert_eq!(labels, vec![Some(PatternState::Constructive)]);
    }

    #[test]
    fn trace_csv_layout() {
        let t = PhotonTrace {
            bin_width: 0.5,
            counts: vec![3, 0],
            truth_path: Some(vec![PatternState::Constructive, PatternState::Destructive]),
            seed: 1,
        };
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &t).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "# schema=1\nbin_index,t_start_s,counts,truth_state\n0,0,3,0\n1,0.5,0,1\n"
        );
        assert_eq!(read_trace_csv(buf.as_slice(), 0.5, 1).unwrap(), t);
    }

    #[test]
    fn malformed_trace_files_are_rejected() {
        assert!(read_trace_csv("# schema=1\nbin_index,t_start_s,counts\n".as_bytes(), 1.0, 0).is_err());
        assert!(read_trace_csv("# schema=1\nbin_index,t_start_s,counts\n1,0,3\n".as_bytes(), 1.0, 0).is_err());
        assert!(read_trace_csv("# schema=1\nbin_index,t_start_s,counts\n0,0,-3\n".as_bytes(), 1.0, 0).is_err());
        assert!(read_trace_csv("# schema=1\nbin,t,counts\n0,0,3\n".as_bytes(), 1.0, 0).is_err());
    }

    #[test]
    fn slicing_and_rebinning() {
        let t = PhotonTrace { bin_width: 1.0, counts: vec![1, 2, 3, 4, 5], truth_path: None, seed: 0 };
        assert_eq!(t.rebin(2).unwrap().counts, vec![3, 7]);
        assert_eq!(t.rebin(2).unwrap().bin_width, 2.0);
        assert_eq!(t.slice(1..3).unwrap().counts, vec![2, 3]);
        assert!(t.slice(3..3).is_err());
        assert!(t.rebin(0).is_err());
    }

    #[test]
    fn stream_separation() {
        let s = SeedSpec { seed: 7, trace_id: 2 };
        let a: u64 = s.rng(Stream::Telegraph).random();
        let b: u64 = s.rng(Stream::Counts).random();
        let c: u64 = SeedSpec { seed: 7, trace_id: 3 }.rng(Stream::Telegraph).random();
        assert!(a != b && a != c);
        assert_eq!(a, s.rng(Stream::Telegraph).random::<u64>());
    }
}
