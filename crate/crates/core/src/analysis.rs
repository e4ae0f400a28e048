//! Estimators over run records: speed fits, span tails, occupation counts,
//! separation verdicts and empirical gap histograms.
//!
//! Speed and stationary estimates discard the first half of the samples as burn-in.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{RunRecord, RunStatus};
use crate::error::{invalid, Error, Result};
use crate::majorant::CloudDecomposition;
use crate::model::Club;
use crate::rational;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 20;

/// Fitted slope with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub slope: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Mean of per-replica slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooledEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
}

impl PooledEstimate {
    /// `|mean - target|` measured in standard errors; infinite when SE is 0 and the mean is off.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

fn ls_slope(t: &[f64], y: &[f64]) -> Option<f64> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sxy += (a - tm) * (b - ym);
        sxx += (a - tm) * (a - tm);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares slope of `y` against `t` over the whole input.
/// The SE is the spread of the slopes fitted on [`BATCHES`] contiguous batches.
pub fn fit_slope(t: &[f64], y: &[f64]) -> Result<SpeedEstimate> {
    if t.len() != y.len() {
        return Err(invalid("time and value series differ in length"));
    }
    if t.len() < 2 * BATCHES {
        return Err(Error::InsufficientData(format!(
            "{} samples, need at least {}",
            t.len(),
            2 * BATCHES
        )));
    }
    let slope = ls_slope(t, y).ok_or_else(|| Error::InsufficientData("clock does not advance".into()))?;
    let size = t.len() / BATCHES;
    let mut batch = Vec::with_capacity(BATCHES);
    for b in 0..BATCHES {
        let end = if b + 1 == BATCHES { t.len() } else { (b + 1) * size };
        let s = ls_slope(&t[b * size..end], &y[b * size..end])
            .ok_or_else(|| Error::InsufficientData(format!("batch {b} spans no time")))?;
        batch.push(s);
    }
    Ok(SpeedEstimate {
        slope,
        std_error: mean_and_se(&batch).1,
        samples: t.len(),
    })
}

/// Speed of particle `label` (1-based) over the second half of the run.
pub fn fit_speed(record: &RunRecord, label: usize) -> Result<SpeedEstimate> {
    if label == 0 || label > record.n() {
        return Err(invalid(format!("particle {label} out of range 1..={}", record.n())));
    }
    let start = record.len() / 2;
    let y: Vec<f64> = record.particle_series(label)[start..].iter().map(|&v| v as f64).collect();
    fit_slope(&record.clocks()[start..], &y)
}

/// Pools slopes from independent replicas. A single replica keeps its own SE.
pub fn pool(estimates: &[SpeedEstimate]) -> Result<PooledEstimate> {
    match estimates {
        [] => Err(Error::InsufficientData("no replicas to pool".into())),
        [one] => Ok(PooledEstimate {
            mean: one.slope,
            std_error: one.std_error,
            replicas: 1,
        }),
        _ => {
            let slopes: Vec<f64> = estimates.iter().map(|e| e.slope).collect();
            let (mean, std_error) = mean_and_se(&slopes);
            Ok(PooledEstimate {
                mean,
                std_error,
                replicas: estimates.len(),
            })
        }
    }
}

/// Empirical tail `s ↦ P(Δ ≥ s)` of a span series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanTail {
    pub samples: usize,
    /// `tail[s]` for `s = 0..=max`; zero beyond.
    pub tail: Vec<f64>,
    /// Minus the log-linear slope over levels with at least 30 samples.
    pub decay_rate: Option<f64>,
}

impl SpanTail {
    pub fn at(&self, s: usize) -> f64 {
        self.tail.get(s).copied().unwrap_or(0.0)
    }

    /// True if the tail vanishes from `s = 1` or the fitted rate is positive.
    pub fn decays(&self) -> bool {
        self.at(1) == 0.0 || self.decay_rate.is_some_and(|r| r > 0.0)
    }
}

pub fn span_tail_of(series: &[i64]) -> Result<SpanTail> {
    if series.is_empty() {
        return Err(Error::InsufficientData("empty span series".into()));
    }
    if series.iter().any(|&v| v < 0) {
        return Err(invalid("spans are nonnegative"));
    }
    let max = *series.iter().max().unwrap() as usize;
    let mut counts = vec![0usize; max + 1];
    for &v in series {
        counts[v as usize] += 1;
    }
    let total = series.len();
    let mut at_least = vec![0usize; max + 1];
    let mut acc = 0;
    for s in (0..=max).rev() {
        acc += counts[s];
        at_least[s] = acc;
    }
    let tail: Vec<f64> = at_least.iter().map(|&c| c as f64 / total as f64).collect();
    let (levels, logs): (Vec<f64>, Vec<f64>) = at_least
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= 30)
        .map(|(s, &c)| (s as f64, (c as f64 / total as f64).ln()))
        .unzip();
    let decay_rate = if levels.len() >= 2 { ls_slope(&levels, &logs).map(|s| -s) } else { None };
    Ok(SpanTail {
        samples: total,
        tail,
        decay_rate,
    })
}

/// Span tail of `cloud` over the second half of the run.
pub fn span_tail(record: &RunRecord, cloud: Club) -> Result<SpanTail> {
    if cloud.first == 0 || cloud.last > record.n() || cloud.first > cloud.last {
        return Err(invalid("cloud out of range"));
    }
    let series: Vec<i64> = (record.len() / 2..record.len())
        .map(|s| {
            let x = record.positions(s);
            x[cloud.last - 1] - x[cloud.first - 1]
        })
        .collect();
    span_tail_of(&series)
}

/// `ℒ_n(x) = #{i ≤ n : X_i ≤ x}` for a series `X_0..X_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationReport {
    pub threshold: f64,
    pub horizon: usize,
    pub count: usize,
    /// `count / (n + 1)`.
    pub fraction: f64,
}

pub fn occupation(series: &[f64], threshold: f64) -> Result<OccupationReport> {
    if series.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    if series.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(invalid("occupation needs a nonnegative series"));
    }
    let count = series.iter().filter(|&&v| v <= threshold).count();
    Ok(OccupationReport {
        threshold,
        horizon: series.len() - 1,
        count,
        fraction: count as f64 / series.len() as f64,
    })
}

/// Occupation of `[0, n^γ]` against the bound `n^{1/2 + γ + 4ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationBound {
    pub gamma: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub report: OccupationReport,
    pub within: bool,
}

pub fn occupation_bound(series: &[f64], gamma: f64, epsilon: f64) -> Result<OccupationBound> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(invalid("gamma must lie in (0, 1/2)"));
    }
    if !(epsilon > 0.0 && epsilon < (1.0 - 2.0 * gamma) / 4.0) {
        return Err(invalid("epsilon must lie in (0, (1 - 2 gamma) / 4)"));
    }
    if series.len() < 2 {
        return Err(Error::InsufficientData("need n >= 1".into()));
    }
    let n = (series.len() - 1) as f64;
    let report = occupation(series, n.powf(gamma))?;
    let bound = n.powf(0.5 + gamma + 4.0 * epsilon);
    Ok(OccupationBound {
        gamma,
        epsilon,
        bound,
        report,
        within: (report.count as f64) < bound,
    })
}

/// Number of indices where the series equals zero.
pub fn zero_hits(series: &[i64]) -> usize {
    series.iter().filter(|&&v| v == 0).count()
}

/// Exponents for the same-speed separation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationOptions {
    /// Near-threshold is `n^threshold_exponent`.
    pub threshold_exponent: f64,
    /// Allowed near fraction is `n^{-budget_exponent}`.
    pub budget_exponent: f64,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        SeparationOptions {
            threshold_exponent: 0.1,
            budget_exponent: 0.05,
        }
    }
}

/// Verdict for the gap `L_j` between clouds `j` and `j+1` (1-based `gap`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GapVerdict {
    Diverging {
        gap: usize,
        predicted_slope: f64,
        fit: SpeedEstimate,
    },
    SameSpeed {
        gap: usize,
        non_degenerate: bool,
        threshold: f64,
        near_fraction: f64,
        budget: f64,
        zero_hits: usize,
        zero_hits_second_half: usize,
    },
}

impl GapVerdict {
    /// Diverging gaps: within `z` SE of the prediction. Same-speed gaps: near fraction under budget.
    pub fn passes(&self, z: f64) -> bool {
        match self {
            GapVerdict::Diverging { predicted_slope, fit, .. } => {
                (fit.slope - predicted_slope).abs() <= z * fit.std_error
            }
            GapVerdict::SameSpeed {
                near_fraction, budget, ..
            } => near_fraction < budget,
        }
    }
}

pub fn separation_check(
    record: &RunRecord,
    decomposition: &CloudDecomposition,
    options: SeparationOptions,
) -> Result<Vec<GapVerdict>> {
    let clouds = &decomposition.clouds;
    if decomposition.boundary.last() != Some(&record.n()) {
        return Err(invalid("decomposition does not match the record"));
    }
    let horizon = record.event_count.max(1) as f64;
    let start = record.len() / 2;
    let mut out = Vec::with_capacity(clouds.len().saturating_sub(1));
    for j in 0..clouds.len().saturating_sub(1) {
        let (top, bottom) = (clouds[j].last - 1, clouds[j + 1].first - 1);
        let series: Vec<i64> = (0..record.len())
            .map(|s| {
                let x = record.positions(s);
                x[bottom] - x[top]
            })
            .collect();
        if decomposition.slopes[j] != decomposition.slopes[j + 1] {
            let y: Vec<f64> = series[start..].iter().map(|&v| v as f64).collect();
            out.push(GapVerdict::Diverging {
                gap: j + 1,
                predicted_slope: rational::to_f64(&(&decomposition.slopes[j] - &decomposition.slopes[j + 1])),
                fit: fit_slope(&record.clocks()[start..], &y)?,
            });
        } else {
            let threshold = horizon.powf(options.threshold_exponent);
            let near = series.iter().filter(|&&v| v as f64 <= threshold).count();
            out.push(GapVerdict::SameSpeed {
                gap: j + 1,
                non_degenerate: decomposition
                    .non_degenerate
                    .as_ref()
                    .is_some_and(|f| f[j] && f[j + 1]),
                threshold,
                near_fraction: near as f64 / series.len() as f64,
                budget: horizon.powf(-options.budget_exponent),
                zero_hits: zero_hits(&series),
                zero_hits_second_half: zero_hits(&series[start..]),
            });
        }
    }
    Ok(out)
}

/// How samples are weighted in an empirical gap histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// By holding time; estimates the continuous-time law.
    Time,
    /// One unit per sample; estimates the jump-chain law.
    Events,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub state: Vec<i64>,
    pub weight: f64,
}

/// Normalized histogram of gap vectors, sorted by state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapHistogram {
    pub weighting: Weighting,
    pub entries: Vec<HistogramEntry>,
}

impl GapHistogram {
    fn point_mass(weighting: Weighting, state: Vec<i64>) -> Self {
        GapHistogram {
            weighting,
            entries: vec![HistogramEntry { state, weight: 1.0 }],
        }
    }

    pub fn mass(&self, state: &[i64]) -> f64 {
        self.entries
            .binary_search_by(|e| e.state.as_slice().cmp(state))
            .map(|i| self.entries[i].weight)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// Total variation distance to a reference given on a truncated support.
    /// Mass off the support, on either side, is lumped into one extra cell.
    pub fn tv_distance(&self, reference: &[(Vec<i64>, f64)]) -> f64 {
        let mut diff = 0.0;
        let mut ref_rest = 1.0;
        let mut emp_rest = self.total();
        for (state, q) in reference {
            let p = self.mass(state);
            diff += (p - q).abs();
            ref_rest -= q;
            emp_rest -= p;
        }
        0.5 * (diff + (emp_rest - ref_rest.max(0.0)).abs())
    }
}

/// Gap histogram over the second half of the run.
/// A frozen run is a point mass at its final gaps.
pub fn empirical_stationary(record: &RunRecord, weighting: Weighting) -> Result<GapHistogram> {
    if record.is_empty() {
        return Err(Error::InsufficientData("empty record".into()));
    }
    let last_gaps = record.final_configuration().gaps().values().to_vec();
    if record.status == RunStatus::Frozen {
        return Ok(GapHistogram::point_mass(weighting, last_gaps));
    }
    let clocks = record.clocks();
    let mut acc: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    let mut total = 0.0;
    for s in record.len() / 2..record.len() {
        let w = match weighting {
            Weighting::Events => 1.0,
            Weighting::Time => clocks.get(s + 1).copied().unwrap_or(record.final_clock) - clocks[s],
        };
        if w > 0.0 {
            let g = record.configuration(s).gaps().values().to_vec();
            *acc.entry(g).or_insert(0.0) += w;
            total += w;
        }
    }
    if total <= 0.0 {
        return Ok(GapHistogram::point_mass(weighting, last_gaps));
    }
    Ok(GapHistogram {
        weighting,
        entries: acc
            .into_iter()
            .map(|(state, w)| HistogramEntry { state, weight: w / total })
            .collect(),
    })
}

/// `state,weight` with gap components joined by `;`.
pub fn write_histogram_csv<W: Write>(hist: &GapHistogram, mut w: W) -> io::Result<()> {
    writeln!(w, "state,weight")?;
    for e in &hist.entries {
        let state: Vec<String> = e.state.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{},{}", state.join(";"), e.weight)?;
    }
    Ok(())
}
