//! Empirical MIR / AMIR estimation from realized sequences.
//!
//! The AMIR estimator needs only one paired sequence: with a memory horizon
//! `C`, every step `t > C` contributes one sample of
//! `(x_{t-C..t-1}, y_{t-C..t-1}, x_t, y_t)` to a plug-in estimate of
//! `I(X_t; Y_t | X_{t-C..t-1}, Y_{t-C..t-1})`.
//!
//! Plug-in estimates are pure functions of the count tables: zero cells
//! contribute nothing and no bias correction is applied. All summations run
//! in a fixed key order so results are bit-reproducible.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::exact_mir_hidden_pair;
use crate::exact::stationary_distribution;
use crate::processes::draw;
use crate::processes::{rng_for, HiddenMarkovPair};
use crate::types::{ConvergenceTrace, PairedSymbolSequence, RealPairedSequence};

/// Minimum sample count for the kNN estimator.
pub const KNN_MIN_SAMPLES: usize = 100;
/// Sandwich gap used for the exact MIR attached to AEP traces.
pub const AEP_REFERENCE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    PluginDiscrete,
    KnnContinuous,
    BinnedContinuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinCount {
    /// `ceil(sqrt(n))` equal-width bins per axis.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// History depth `C`.
    pub memory: usize,
    pub kind: EstimatorKind,
    pub knn_k: usize,
    pub bin_count: BinCount,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { memory: 1, kind: EstimatorKind::PluginDiscrete, knn_k: 4, bin_count: BinCount::Auto }
    }
}

impl EstimatorConfig {
    pub fn plugin(memory: usize) -> Self {
        EstimatorConfig { memory, ..Default::default() }
    }

    pub fn knn(k: usize) -> Self {
        EstimatorConfig { memory: 0, kind: EstimatorKind::KnnContinuous, knn_k: k, ..Default::default() }
    }

    pub fn binned(bin_count: BinCount) -> Self {
        EstimatorConfig { memory: 0, kind: EstimatorKind::BinnedContinuous, bin_count, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// Bits per step.
    pub value: f64,
    /// Windows or samples that entered the estimate.
    pub n_effective: usize,
    pub config: EstimatorConfig,
    /// The kNN estimate sits at its ceiling `psi(N) - psi(k)`, as for `y = x`.
    pub saturated: bool,
}

/// Plug-in `I(A; B | context)` over `(context, a, b)` samples, in bits.
fn plugin_conditional_mi<I>(samples: I) -> (f64, usize)
where
    I: IntoIterator<Item = (usize, usize, usize)>,
{
    let mut cab: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    let mut ca: HashMap<(usize, usize), u64> = HashMap::new();
    let mut cb: HashMap<(usize, usize), u64> = HashMap::new();
    let mut c: HashMap<usize, u64> = HashMap::new();
    let mut total = 0usize;
    for (ctx, a, b) in samples {
        *cab.entry((ctx, a, b)).or_default() += 1;
        *ca.entry((ctx, a)).or_default() += 1;
        *cb.entry((ctx, b)).or_default() += 1;
        *c.entry(ctx).or_default() += 1;
        total += 1;
    }
    let n = total as f64;
    let mi: f64 = cab
        .iter()
        .map(|(&(ctx, a, b), &k)| {
            let k = k as f64;
            let ratio = k * c[&ctx] as f64 / (ca[&(ctx, a)] as f64 * cb[&(ctx, b)] as f64);
            k / n * ratio.log2()
        })
        .sum();
    (mi, total)
}

/// Single-sequence plug-in AMIR with memory `config.memory`.
pub fn estimate_amir_single_sequence(seq: &PairedSymbolSequence, config: &EstimatorConfig) -> Result<EstimateResult> {
    if config.kind != EstimatorKind::PluginDiscrete {
        return Err(Error::InvalidInput("the single-sequence AMIR estimator is plug-in discrete only".into()));
    }
    let c = config.memory;
    if seq.len() <= c + 1 {
        return Err(Error::InsufficientData(format!("sequence of length {} is too short for memory {c}", seq.len())));
    }
    let ny = seq.y().alphabet().size();
    let (xs, ys) = (seq.x().values(), seq.y().values());
    let joint: Vec<usize> = xs.iter().zip(ys).map(|(x, y)| x * ny + y).collect();
    let mut ids: HashMap<&[usize], usize> = HashMap::new();
    let samples: Vec<(usize, usize, usize)> = (c..joint.len())
        .map(|t| {
            let next = ids.len();
            let ctx = *ids.entry(&joint[t - c..t]).or_insert(next);
            (ctx, xs[t], ys[t])
        })
        .collect();
    let (value, n_effective) = plugin_conditional_mi(samples);
    Ok(EstimateResult { value: value.max(0.0), n_effective, config: *config, saturated: false })
}

/// Direct block estimate `(1/n) I(X_1..X_n; Y_1..Y_n)` using the first `n`
/// steps of every sequence as one sample.
///
/// This needs many independent realizations. The plug-in value can never
/// exceed `log2(sequences.len()) / n`, so with few sequences the estimate is
/// capped by the sample count, not by the process.
pub fn estimate_mir_block(sequences: &[PairedSymbolSequence], block_length: usize) -> Result<EstimateResult> {
    if sequences.len() < 2 {
        return Err(Error::InsufficientData("block MIR needs at least 2 sequences".into()));
    }
    if block_length == 0 {
        return Err(Error::InvalidInput("block length must be positive".into()));
    }
    if let Some(i) = sequences.iter().position(|s| s.len() < block_length) {
        return Err(Error::InsufficientData(format!("sequence {i} is shorter than block length {block_length}")));
    }
    let mut ids: HashMap<&[usize], usize> = HashMap::new();
    let samples: Vec<(usize, usize, usize)> = sequences
        .iter()
        .map(|s| {
            let next = ids.len();
            let xb = *ids.entry(&s.x().values()[..block_length]).or_insert(next);
            let next = ids.len();
            let yb = *ids.entry(&s.y().values()[..block_length]).or_insert(next);
            (0, xb, yb)
        })
        .collect();
    let (mi, n_effective) = plugin_conditional_mi(samples);
    Ok(EstimateResult {
        value: mi.max(0.0) / block_length as f64,
        n_effective,
        config: EstimatorConfig::plugin(0),
        saturated: false,
    })
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n
}

/// `psi(m)` for `m = 1..=n` (index `m`).
fn digamma_table(n: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut t = vec![0.0; n + 1];
    t[1] = -EULER_GAMMA;
    for m in 2..=n {
        t[m] = t[m - 1] + 1.0 / (m - 1) as f64;
    }
    t
}

/// Distance (max-norm) to the k-th nearest neighbour of every point.
fn kth_neighbour_distances(x: &[f64], y: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; n];
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    for (pos, &i) in order.iter().enumerate() {
        best.clear();
        let kth = |best: &Vec<f64>| if best.len() == k { best[k - 1] } else { f64::INFINITY };
        let offer = |best: &mut Vec<f64>, d: f64| {
            if best.len() < k || d < best[k - 1] {
                let at = best.partition_point(|&b| b <= d);
                best.insert(at, d);
                best.truncate(k);
            }
        };
        let (mut lo, mut hi) = (pos, pos + 1);
        let (mut left_open, mut right_open) = (true, true);
        while left_open || right_open {
            if left_open {
                if lo == 0 {
                    left_open = false;
                } else {
                    let j = order[lo - 1];
                    let dx = x[i] - x[j];
                    if dx >= kth(&best) {
                        left_open = false;
                    } else {
                        offer(&mut best, dx.max((y[i] - y[j]).abs()));
                        lo -= 1;
                    }
                }
            }
            if right_open {
                if hi == n {
                    right_open = false;
                } else {
                    let j = order[hi];
                    let dx = x[j] - x[i];
                    if dx >= kth(&best) {
                        right_open = false;
                    } else {
                        offer(&mut best, dx.max((y[i] - y[j]).abs()));
                        hi += 1;
                    }
                }
            }
        }
        out[i] = best[k - 1];
    }
    out
}

/// Points other than the centre strictly within `radius` along one axis.
fn strict_neighbour_count(sorted: &[f64], centre: f64, radius: f64) -> usize {
    let below = sorted.partition_point(|&v| v <= centre - radius);
    let within = sorted.partition_point(|&v| v < centre + radius);
    within.saturating_sub(below).saturating_sub(1)
}

/// Kraskov–Stögbauer–Grassberger estimator (first variant), in bits.
fn knn_mutual_information(x: &[f64], y: &[f64], k: usize) -> (f64, bool) {
    let n = x.len();
    let eps = kth_neighbour_distances(x, y, k);
    let mut sx = x.to_vec();
    let mut sy = y.to_vec();
    sx.sort_by(f64::total_cmp);
    sy.sort_by(f64::total_cmp);
    let psi = digamma_table(n);
    let marginal: f64 = (0..n)
        .map(|i| {
            let nx = strict_neighbour_count(&sx, x[i], eps[i]);
            let ny = strict_neighbour_count(&sy, y[i], eps[i]);
            psi[nx + 1] + psi[ny + 1]
        })
        .sum::<f64>()
        / n as f64;
    let nats = psi[k] + psi[n] - marginal;
    let ceiling = psi[n] - psi[k];
    (nats / std::f64::consts::LN_2, nats >= ceiling - 1e-9)
}

fn bin_indices(v: &[f64], bins: usize) -> Vec<usize> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    v.iter().map(|&a| (((a - lo) / width) as usize).min(bins - 1)).collect()
}

/// MI of an i.i.d. real-valued pair sequence, by kNN or equal-width binning.
pub fn estimate_mi_continuous(seq: &RealPairedSequence, config: &EstimatorConfig) -> Result<EstimateResult> {
    let n = seq.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} samples")));
    }
    if variance(seq.x()) == 0.0 || variance(seq.y()) == 0.0 {
        return Err(Error::DegenerateData("x or y has zero variance".into()));
    }
    match config.kind {
        EstimatorKind::KnnContinuous => {
            if n < KNN_MIN_SAMPLES {
                return Err(Error::InsufficientData(format!(
                    "kNN estimation needs at least {KNN_MIN_SAMPLES} samples, got {n}"
                )));
            }
            if config.knn_k == 0 || config.knn_k >= n {
                return Err(Error::InvalidInput(format!("k = {} must be in 1..{n}", config.knn_k)));
            }
            let (value, saturated) = knn_mutual_information(seq.x(), seq.y(), config.knn_k);
            Ok(EstimateResult { value, n_effective: n, config: *config, saturated })
        }
        EstimatorKind::BinnedContinuous => {
            let bins = match config.bin_count {
                BinCount::Auto => (n as f64).sqrt().ceil() as usize,
                BinCount::Fixed(0) => return Err(Error::InvalidInput("bin count must be positive".into())),
                BinCount::Fixed(b) => b,
            };
            let bx = bin_indices(seq.x(), bins);
            let by = bin_indices(seq.y(), bins);
            let (value, n_effective) = plugin_conditional_mi(bx.into_iter().zip(by).map(|(a, b)| (0, a, b)));
            Ok(EstimateResult { value: value.max(0.0), n_effective, config: *config, saturated: false })
        }
        EstimatorKind::PluginDiscrete => {
            Err(Error::InvalidInput("continuous MI needs a knn or binned estimator".into()))
        }
    }
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { 0.5 * (values[m - 1] + values[m]) })
}

/// Per-seed traces plus their per-length median.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub per_seed: Vec<ConvergenceTrace>,
    pub median: ConvergenceTrace,
}

/// Runs `estimator` on prefixes of one realization per seed.
///
/// `sampler(n, seed)` draws a realization of length `n`; `estimator(&sample, m)`
/// estimates from its first `m` steps. Seeds run in parallel, results are
/// reduced in seed order. A failed cell is left missing.
pub fn convergence_study<S, F, E>(
    sampler: F,
    estimator: E,
    n_grid: &[usize],
    seeds: &[u64],
    reference: Option<f64>,
) -> Result<ConvergenceStudy>
where
    S: Send,
    F: Fn(usize, u64) -> Result<S> + Sync,
    E: Fn(&S, usize) -> Result<f64> + Sync,
{
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("n grid must be nonempty and strictly increasing".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed is required".into()));
    }
    let max_n = *n_grid.last().expect("nonempty");
    let cells: Vec<Vec<Option<f64>>> = seeds
        .par_iter()
        .map(|&seed| match sampler(max_n, seed) {
            Ok(sample) => n_grid.iter().map(|&n| estimator(&sample, n).ok().filter(|v| v.is_finite())).collect(),
            Err(_) => vec![None; n_grid.len()],
        })
        .collect();
    let per_seed = cells
        .iter()
        .map(|row| ConvergenceTrace::new(n_grid.to_vec(), row.clone(), reference))
        .collect::<Result<Vec<_>>>()?;
    let medians =
        (0..n_grid.len()).map(|i| median(&mut cells.iter().filter_map(|row| row[i]).collect::<Vec<_>>())).collect();
    let median = ConvergenceTrace::new(n_grid.to_vec(), medians, reference)?;
    Ok(ConvergenceStudy { per_seed, median })
}

/// Per-length median across seeds; see [`convergence_study`].
pub fn convergence_trace<S, F, E>(
    sampler: F,
    estimator: E,
    n_grid: &[usize],
    seeds: &[u64],
    reference: Option<f64>,
) -> Result<ConvergenceTrace>
where
    S: Send,
    F: Fn(usize, u64) -> Result<S> + Sync,
    E: Fn(&S, usize) -> Result<f64> + Sync,
{
    Ok(convergence_study(sampler, estimator, n_grid, seeds, reference)?.median)
}

/// Samples one trajectory and tracks
/// `(1/m) log2 [ p(x_1..x_m, y_1..y_m) / (p(x_1..x_m) p(y_1..y_m)) ]` for every `m <= n`.
///
/// The `x`-terms cancel between the joint and `x`-marginal likelihoods, leaving
/// `sum_t log2 E(x_t, y_t) - log2 p(y_1..y_m)`; the output likelihood comes from
/// the scaled forward recursion, accumulated in log space.
pub fn aep_log_ratio_trace(model: &HiddenMarkovPair, n: usize, seed: u64) -> Result<ConvergenceTrace> {
    if n == 0 {
        return Err(Error::InvalidInput("trace length must be at least 1".into()));
    }
    let mu = stationary_distribution(model.hidden())?.probabilities;
    let reference = exact_mir_hidden_pair(model, AEP_REFERENCE_GAP)?.mir;
    let p = model.hidden().transition();
    let e = model.emission();
    let nx = mu.len();
    let mut rng = rng_for(seed);
    let mut state = draw(&mut rng, &mu);
    let mut belief = mu.clone();
    let mut log_emission = 0.0;
    let mut log_output = 0.0;
    let mut estimates = Vec::with_capacity(n);
    for m in 1..=n {
        if m > 1 {
            state = draw(&mut rng, &p[state]);
            belief = (0..nx).map(|j| belief.iter().zip(p).map(|(b, row)| b * row[j]).sum()).collect();
        }
        let y = draw(&mut rng, &e[state]);
        log_emission += e[state][y].log2();
        let weighted: Vec<f64> = belief.iter().zip(e).map(|(b, row)| b * row[y]).collect();
        let scale: f64 = weighted.iter().sum();
        log_output += scale.log2();
        belief = weighted.into_iter().map(|w| w / scale).collect();
        let ratio = (log_emission - log_output) / m as f64;
        if !ratio.is_finite() {
            return Err(Error::Numeric(format!("non-finite log-likelihood ratio at step {m}")));
        }
        estimates.push(Some(ratio));
    }
    ConvergenceTrace::new((1..=n).collect(), estimates, Some(reference))
}
