//! Two-state Poisson hidden Markov model for binned photon counts.
//!
//! State 0 is the constructive (bright) pattern and state 1 the destructive
//! (dim) one; fitted models are reordered so that state 0 always carries the
//! larger emission mean. Forward and backward passes are normalized per bin,
//! which keeps 10 s traces at 50 µs resolution (2·10⁵ bins) well inside
//! double-precision range.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::csv::{sig9, write_header};
use crate::error::{Error, Result};
use crate::trace::{PatternState, PhotonTrace};

/// Lower bound on Poisson means (counts/bin).
pub const MEAN_FLOOR: f64 = 1e-12;
/// Switch probability per bin of the default initial guess.
pub const DEFAULT_SWITCH_PROB: f64 = 1e-3;
/// Emission means closer than this (counts/bin) count as collapsed.
pub const SEPARATION_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HmmModel {
    /// Per-bin transition probabilities, `trans[from][to]`.
    pub trans: [[f64; 2]; 2],
    /// Poisson means (counts/bin).
    pub emit_means: [f64; 2],
    pub initial: [f64; 2],
}

impl HmmModel {
    /// Symmetric switching with probability `p_switch` per bin and a
    /// uniform initial distribution.
    pub fn symmetric(emit_means: [f64; 2], p_switch: f64) -> Self {
        Self {
            trans: [[1.0 - p_switch, p_switch], [p_switch, 1.0 - p_switch]],
            emit_means,
            initial: [0.5, 0.5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-9;
        let prob = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        for row in &self.trans {
            if !row.iter().all(|&x| prob(x)) || (row[0] + row[1] - 1.0).abs() > TOL {
                return Err(Error::InvalidModel(format!("transition row {row:?} is not a distribution")));
            }
        }
        if !self.initial.iter().all(|&x| prob(x)) || (self.initial[0] + self.initial[1] - 1.0).abs() > TOL {
            return Err(Error::InvalidModel(format!("initial {:?} is not a distribution", self.initial)));
        }
        if !self.emit_means.iter().all(|&m| m.is_finite() && m >= 0.0) {
            return Err(Error::InvalidModel(format!("emission means {:?} must be >= 0", self.emit_means)));
        }
        Ok(())
    }

    /// Stationary distribution of the transition matrix.
    pub fn stationary(&self) -> [f64; 2] {
        let (a, b) = (self.trans[0][1], self.trans[1][0]);
        if a + b == 0.0 {
            self.initial
        } else {
            [b / (a + b), a / (a + b)]
        }
    }

    /// Initial guess from the data: emission means from a median split of
    /// window-summed counts, switch probability [`DEFAULT_SWITCH_PROB`].
    ///
    /// Windows hold about ten expected counts, so sparse fine-binned traces
    /// (often 0 or 1 count per bin) still separate into a bright and a dim
    /// half. At least 20 windows are kept.
    pub fn initial_guess(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::param("counts", "trace has no bins"));
        }
        let n = counts.len();
        let mean = counts.iter().sum::<u64>() as f64 / n as f64;
        let mut window = if mean > 0.0 { (10.0 / mean).ceil() as usize } else { 1 };
        window = window.clamp(1, (n / 20).max(1));
        let mut sums: Vec<u64> = counts.chunks_exact(window).map(|c| c.iter().sum()).collect();
        if sums.is_empty() {
            sums = counts.to_vec();
            window = 1;
        }
        sums.sort_unstable();
        let half = sums.len() / 2;
        let avg = |s: &[u64]| s.iter().sum::<u64>() as f64 / s.len().max(1) as f64 / window as f64;
        let (low, high) = if half == 0 { (avg(&sums), avg(&sums)) } else { (avg(&sums[..half]), avg(&sums[half..])) };
        Ok(Self::symmetric([high.max(MEAN_FLOOR), low.max(MEAN_FLOOR)], DEFAULT_SWITCH_PROB))
    }

    fn floored_means(&self) -> [f64; 2] {
        [self.emit_means[0].max(MEAN_FLOOR), self.emit_means[1].max(MEAN_FLOOR)]
    }

    fn swapped(&self) -> Self {
        Self {
            trans: [[self.trans[1][1], self.trans[1][0]], [self.trans[0][1], self.trans[0][0]]],
            emit_means: [self.emit_means[1], self.emit_means[0]],
            initial: [self.initial[1], self.initial[0]],
        }
    }
}

/// Per-bin log Poisson emission probabilities.
struct Emissions {
    log_p: Vec<[f64; 2]>,
}

impl Emissions {
    fn new(counts: &[u64], m: &HmmModel) -> Self {
        let max_k = counts.iter().copied().max().unwrap_or(0) as usize;
        let mut ln_fact = vec![0.0; max_k + 1];
        for k in 1..=max_k {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let mu = m.floored_means();
        let ln_mu = [mu[0].ln(), mu[1].ln()];
        let log_p = counts
            .iter()
            .map(|&k| {
                let kf = k as f64;
                let lf = ln_fact[k as usize];
                [kf * ln_mu[0] - mu[0] - lf, kf * ln_mu[1] - mu[1] - lf]
            })
            .collect();
        Self { log_p }
    }

    /// Emission ratios scaled by the per-bin maximum, and that maximum.
    fn scaled(&self, t: usize) -> ([f64; 2], f64) {
        let [a, b] = self.log_p[t];
        let o = a.max(b);
        ([(a - o).exp(), (b - o).exp()], o)
    }
}

/// Output of the forward-backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub posteriors: Vec<[f64; 2]>,
    /// From the forward scaling factors.
    pub log_likelihood: f64,
    /// From the independently normalized backward pass.
    pub backward_log_likelihood: f64,
    /// Expected transition counts Σ_t ξ_t(i, j).
    pub expected_transitions: [[f64; 2]; 2],
}

fn check_inputs(counts: &[u64], m: &HmmModel) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::param("counts", "trace has no bins"));
    }
    m.validate()
}

pub fn forward_backward(trace: &PhotonTrace, m: &HmmModel) -> Result<Smoothed> {
    forward_backward_counts(&trace.counts, m)
}

pub fn forward_backward_counts(counts: &[u64], m: &HmmModel) -> Result<Smoothed> {
    check_inputs(counts, m)?;
    let em = Emissions::new(counts, m);
    let n = counts.len();
    let a = m.trans;

    let mut alpha = vec![[0.0; 2]; n];
    let mut log_lik = 0.0;
    for t in 0..n {
        let (e, o) = em.scaled(t);
        let mut next = if t == 0 {
            [m.initial[0] * e[0], m.initial[1] * e[1]]
        } else {
            let p = alpha[t - 1];
            [
                (p[0] * a[0][0] + p[1] * a[1][0]) * e[0],
                (p[0] * a[0][1] + p[1] * a[1][1]) * e[1],
            ]
        };
        let c = next[0] + next[1];
        if !(c > 0.0) {
            return Err(Error::InvalidModel(format!("observation at bin {t} has zero probability under the model")));
        }
        next[0] /= c;
        next[1] /= c;
        alpha[t] = next;
        log_lik += c.ln() + o;
    }

    let mut beta = vec![[1.0; 2]; n];
    let mut back_log = 0.0;
    for t in (0..n.saturating_sub(1)).rev() {
        let (e, o) = em.scaled(t + 1);
        let b = beta[t + 1];
        let u = [
            a[0][0] * e[0] * b[0] + a[0][1] * e[1] * b[1],
            a[1][0] * e[0] * b[0] + a[1][1] * e[1] * b[1],
        ];
        let d = u[0] + u[1];
        if !(d > 0.0) {
            return Err(Error::InvalidModel(format!("observation at bin {} has zero probability under the model", t + 1)));
        }
        beta[t] = [u[0] / d, u[1] / d];
        back_log += d.ln() + o;
    }
    let (e0, o0) = em.scaled(0);
    back_log += (m.initial[0] * e0[0] * beta[0][0] + m.initial[1] * e0[1] * beta[0][1]).ln() + o0;

    let posteriors: Vec<[f64; 2]> = alpha
        .iter()
        .zip(&beta)
        .map(|(al, be)| {
            let g = [al[0] * be[0], al[1] * be[1]];
            let s = g[0] + g[1];
            [g[0] / s, g[1] / s]
        })
        .collect();

    let mut xi = [[0.0; 2]; 2];
    for t in 0..n.saturating_sub(1) {
        let (e, _) = em.scaled(t + 1);
        let mut local = [[0.0; 2]; 2];
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                local[i][j] = alpha[t][i] * a[i][j] * e[j] * beta[t + 1][j];
                s += local[i][j];
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                xi[i][j] += local[i][j] / s;
            }
        }
    }

    Ok(Smoothed { posteriors, log_likelihood: log_lik, backward_log_likelihood: back_log, expected_transitions: xi })
}

/// Most probable state path. Ties go to the lower state index.
pub fn viterbi(trace: &PhotonTrace, m: &HmmModel) -> Result<Vec<PatternState>> {
    viterbi_counts(&trace.counts, m)
}

pub fn viterbi_counts(counts: &[u64], m: &HmmModel) -> Result<Vec<PatternState>> {
    check_inputs(counts, m)?;
    let em = Emissions::new(counts, m);
    let n = counts.len();
    let ln_a = m.trans.map(|row| row.map(f64::ln));
    let mut score = [m.initial[0].ln() + em.log_p[0][0], m.initial[1].ln() + em.log_p[0][1]];
    let mut back = vec![[0u8; 2]; n];
    for t in 1..n {
        let mut next = [f64::NEG_INFINITY; 2];
        for j in 0..2 {
            let mut best = (score[0] + ln_a[0][j], 0u8);
            let alt = score[1] + ln_a[1][j];
            if alt > best.0 {
                best = (alt, 1);
            }
            next[j] = best.0 + em.log_p[t][j];
            back[t][j] = best.1;
        }
        score = next;
    }
    let mut state = if score[1] > score[0] { 1u8 } else { 0u8 };
    let mut path = vec![PatternState::Constructive; n];
    for t in (0..n).rev() {
        path[t] = PatternState::from_index(state as usize).expect("two states");
        state = back[t][state as usize];
    }
    Ok(path)
}

/// Jump rates (1/s) from per-bin switch probabilities,
/// rate = −ln(1 − p)/Δt: the exact two-state embedding.
pub fn jump_rates(m: &HmmModel, bin_width: f64) -> Result<(f64, f64)> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::param("bin_width", "must be finite and > 0"));
    }
    let rate = |p: f64| -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!("switch probability {p} outside [0, 1]")));
        }
        if p == 1.0 {
            return Err(Error::InfiniteRate(p));
        }
        Ok(-(-p).ln_1p() / bin_width)
    };
    Ok((rate(m.trans[0][1])?, rate(m.trans[1][0])?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmResult {
    pub posteriors: Vec<[f64; 2]>,
    pub viterbi_path: Vec<PatternState>,
    pub log_likelihood: f64,
    pub fitted: HmmModel,
    /// (constructive → destructive, destructive → constructive), 1/s.
    pub rates: (f64, f64),
    /// rate / sqrt(expected number of jumps) per direction.
    pub rate_stderr: (f64, f64),
    pub n_iter: usize,
    pub converged: bool,
    /// Log-likelihood of the initial model and of every update.
    pub loglik_history: Vec<f64>,
    /// Log-likelihood of a single Poisson level at the sample mean.
    pub single_state_log_likelihood: f64,
    /// The two states did not separate (see [`is_degenerate`]).
    pub degenerate: bool,
}

/// A fit is degenerate when the emission means collapse below
/// [`SEPARATION_FLOOR`], or when the second state does not pay for its
/// three extra parameters under BIC: 2(ℓ₂ − ℓ₁) < 3 ln T.
pub fn is_degenerate(m: &HmmModel, log_lik: f64, single_log_lik: f64, n_bins: usize) -> bool {
    (m.emit_means[0] - m.emit_means[1]).abs() < SEPARATION_FLOOR
        || 2.0 * (log_lik - single_log_lik) < 3.0 * (n_bins as f64).ln()
}

fn single_state_log_likelihood(counts: &[u64]) -> f64 {
    let n = counts.len() as f64;
    let mu = (counts.iter().sum::<u64>() as f64 / n).max(MEAN_FLOOR);
    let ln_mu = mu.ln();
    let mut ln_fact = 0.0;
    let mut cache = vec![0.0f64];
    counts
        .iter()
        .map(|&k| {
            let k = k as usize;
            while cache.len() <= k {
                ln_fact += (cache.len() as f64).ln();
                cache.push(ln_fact);
            }
            k as f64 * ln_mu - mu - cache[k]
        })
        .sum()
}

fn m_step(counts: &[u64], s: &Smoothed, prev: &HmmModel) -> HmmModel {
    let mut next = *prev;
    next.initial = s.posteriors[0];
    for i in 0..2 {
        let row = s.expected_transitions[i][0] + s.expected_transitions[i][1];
        if row > 0.0 {
            next.trans[i] = [s.expected_transitions[i][0] / row, s.expected_transitions[i][1] / row];
        }
        let (w, wk) = counts
            .iter()
            .zip(&s.posteriors)
            .fold((0.0, 0.0), |(w, wk), (&k, g)| (w + g[i], wk + g[i] * k as f64));
        if w > 0.0 {
            next.emit_means[i] = (wk / w).max(MEAN_FLOOR);
        }
    }
    next
}

/// Expectation-maximization from `init` until the log-likelihood gain of an
/// update falls below `tol` or `max_iter` updates were made.
pub fn baum_welch(trace: &PhotonTrace, init: &HmmModel, max_iter: usize, tol: f64) -> Result<HmmResult> {
    trace.validate()?;
    if max_iter == 0 {
        return Err(Error::param("max_iter", "must be at least 1"));
    }
    let counts = &trace.counts;
    let mut model = *init;
    let mut smoothed = forward_backward_counts(counts, &model)?;
    let mut history = vec![smoothed.log_likelihood];
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < max_iter {
        let next = m_step(counts, &smoothed, &model);
        let next_smoothed = forward_backward_counts(counts, &next)?;
        let gain = next_smoothed.log_likelihood - smoothed.log_likelihood;
        history.push(next_smoothed.log_likelihood);
        model = next;
        smoothed = next_smoothed;
        n_iter += 1;
        if gain < tol {
            converged = true;
            break;
        }
    }

    if model.emit_means[1] > model.emit_means[0] {
        model = model.swapped();
        smoothed.posteriors.iter_mut().for_each(|p| p.swap(0, 1));
        let x = smoothed.expected_transitions;
        smoothed.expected_transitions = [[x[1][1], x[1][0]], [x[0][1], x[0][0]]];
    }
    let viterbi_path = viterbi_counts(counts, &model)?;
    let rates = jump_rates(&model, trace.bin_width)?;
    let stderr = |rate: f64, jumps: f64| if jumps > 0.0 { rate / jumps.sqrt() } else { f64::NAN };
    let x = smoothed.expected_transitions;
    let single = single_state_log_likelihood(counts);
    Ok(HmmResult {
        degenerate: is_degenerate(&model, smoothed.log_likelihood, single, counts.len()),
        posteriors: smoothed.posteriors,
        viterbi_path,
        log_likelihood: smoothed.log_likelihood,
        fitted: model,
        rates,
        rate_stderr: (stderr(rates.0, x[0][1]), stderr(rates.1, x[1][0])),
        n_iter,
        converged,
        loglik_history: history,
        single_state_log_likelihood: single,
    })
}

/// Dwell times of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDwells {
    pub dwells_s: Vec<f64>,
    pub mean_s: f64,
    /// Standard error of the mean; NaN with fewer than two dwells.
    pub stderr_s: f64,
    /// (lower edge in s, count) over 20 equal-width bins.
    pub histogram: Vec<(f64, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellStats {
    pub constructive: StateDwells,
    pub destructive: StateDwells,
}

const DWELL_HISTOGRAM_BINS: usize = 20;

fn summarize(dwells: Vec<f64>) -> StateDwells {
    let n = dwells.len() as f64;
    let mean = if dwells.is_empty() { f64::NAN } else { dwells.iter().sum::<f64>() / n };
    let stderr = if dwells.len() < 2 {
        f64::NAN
    } else {
        (dwells.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
    };
    let max = dwells.iter().copied().fold(0.0, f64::max);
    let width = if max > 0.0 { max / DWELL_HISTOGRAM_BINS as f64 } else { 1.0 };
    let mut hist: Vec<(f64, usize)> = (0..DWELL_HISTOGRAM_BINS).map(|i| (i as f64 * width, 0)).collect();
    for d in &dwells {
        let i = ((d / width) as usize).min(DWELL_HISTOGRAM_BINS - 1);
        hist[i].1 += 1;
    }
    StateDwells { dwells_s: dwells, mean_s: mean, stderr_s: stderr, histogram: hist }
}

/// Run lengths of a state path. The first and last runs are included even
/// though they are truncated by the trace edges.
pub fn dwell_statistics(path: &[PatternState], bin_width: f64) -> DwellStats {
    let mut per_state: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut iter = path.iter().peekable();
    while let Some(&s) = iter.next() {
        let mut len = 1usize;
        while iter.peek() == Some(&&s) {
            iter.next();
            len += 1;
        }
        per_state[s.index()].push(len as f64 * bin_width);
    }
    let [c, d] = per_state;
    DwellStats { constructive: summarize(c), destructive: summarize(d) }
}

/// Default analysis: data-driven initial guess, then Baum-Welch.
pub fn analyze(trace: &PhotonTrace, init: Option<HmmModel>, max_iter: usize, tol: f64) -> Result<HmmResult> {
    let init = match init {
        Some(m) => m,
        None => HmmModel::initial_guess(&trace.counts)?,
    };
    baum_welch(trace, &init, max_iter, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate_per_s: f64,
    pub stderr_per_s: f64,
}

/// JSON report written by the analyzer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmReport {
    pub schema: u32,
    pub bin_width_s: f64,
    pub n_bins: usize,
    pub fitted: HmmModel,
    pub rate_cd: RateEstimate,
    pub rate_dc: RateEstimate,
    pub log_likelihood: f64,
    pub single_state_log_likelihood: f64,
    pub n_iter: usize,
    pub converged: bool,
    pub degenerate: bool,
    pub mean_dwell_constructive_s: f64,
    pub mean_dwell_destructive_s: f64,
}

impl HmmReport {
    pub fn new(result: &HmmResult, bin_width: f64) -> Self {
        let dwell = dwell_statistics(&result.viterbi_path, bin_width);
        Self {
            schema: 1,
            bin_width_s: bin_width,
            n_bins: result.posteriors.len(),
            fitted: result.fitted,
            rate_cd: RateEstimate { rate_per_s: result.rates.0, stderr_per_s: result.rate_stderr.0 },
            rate_dc: RateEstimate { rate_per_s: result.rates.1, stderr_per_s: result.rate_stderr.1 },
            log_likelihood: result.log_likelihood,
            single_state_log_likelihood: result.single_state_log_likelihood,
            n_iter: result.n_iter,
            converged: result.converged,
            degenerate: result.degenerate,
            mean_dwell_constructive_s: dwell.constructive.mean_s,
            mean_dwell_destructive_s: dwell.destructive.mean_s,
        }
    }
}

pub fn write_posteriors_csv<W: Write>(w: &mut W, result: &HmmResult, bin_width: f64) -> std::io::Result<()> {
    write_header(w, &["bin_index", "t_start_s", "p_constructive", "p_destructive", "viterbi_state"])?;
    for (i, (p, s)) in result.posteriors.iter().zip(&result.viterbi_path).enumerate() {
        writeln!(w, "{i},{},{},{},{}", i as f64 * bin_width, sig9(p[0]), sig9(p[1]), s.index())?;
    }
    Ok(())
}
