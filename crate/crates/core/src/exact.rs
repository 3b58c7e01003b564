//! Exact and bounded rates for finite-state processes.
//!
//! For a jointly-Markov pair the infinite conditioning in AMIR collapses to
//! the previous joint state, so
//! `AMIR = sum_s mu(s) I(X'; Y' | s)` over joint states `s`, and
//! `MIR = H(X) + H(Y) - H(X, Y)` whenever both marginals are Markov.
//! Hidden-pair outputs are not Markov; their entropy rate is bracketed by
//! the conditional-entropy sandwich
//! `H(Y_n | Y_1..Y_{n-1}, X_1) <= H(Y) <= H(Y_n | Y_1..Y_{n-1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Marginal, Result};
use crate::info::{mutual_information_unchecked, neg_p_log2_p};
use crate::processes::{lift_to_joint_pair, HiddenMarkovPair, JointMarkovPair, MarkovChain};
use crate::types::{RateMethod, RateReport};

pub const POWER_ITERATION_TOLERANCE: f64 = 1e-12;
pub const POWER_ITERATION_CAP: usize = 1_000_000;
pub const STATIONARY_RESIDUAL_LIMIT: f64 = 1e-10;
/// Threshold below which a conditional MI counts as zero.
pub const EQUALITY_THRESHOLD: f64 = 1e-9;
/// Tolerance for the marginal Markov-property check.
pub const MARKOV_CHECK_TOLERANCE: f64 = 1e-9;
/// Enumeration budget for the sandwich bounds, as `log2` of the number of output paths.
pub const SANDWICH_PATH_BITS: f64 = 25.0;
/// Tolerance attached to exact reports (floating-point round-off only).
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
    /// `max_j |(pi P)_j - pi_j|`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRateBounds {
    pub lower: f64,
    pub upper: f64,
    /// Conditioning depth at which the bounds were taken.
    pub n_used: usize,
    pub converged: bool,
}

impl EntropyRateBounds {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    /// `I(X_n; Y_{n-1} | X_{n-1})` at stationarity.
    pub condition1_violation: f64,
    /// `I(Y_n; X_{n-1} | Y_{n-1})` at stationarity.
    pub condition2_violation: f64,
    pub equal: bool,
}

fn positive_support(transition: &[Vec<f64>]) -> Vec<Vec<usize>> {
    transition.iter().map(|row| row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(j, _)| j).collect()).collect()
}

/// Strongly connected components (Tarjan, iterative). Returns a component id per state.
fn components(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0;
    let mut n_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = n_comp;
                        if w == v {
                            break;
                        }
                    }
                    n_comp += 1;
                }
            }
        }
    }
    (comp, n_comp)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Requires exactly one closed communicating class and that class aperiodic.
/// Transient states are allowed; they carry zero stationary mass.
fn check_unique_aperiodic(chain: &MarkovChain) -> Result<()> {
    let adj = positive_support(chain.transition());
    let (comp, n_comp) = components(&adj);
    let mut closed = vec![true; n_comp];
    for (v, targets) in adj.iter().enumerate() {
        if targets.iter().any(|&w| comp[w] != comp[v]) {
            closed[comp[v]] = false;
        }
    }
    let closed_ids: Vec<usize> = (0..n_comp).filter(|&c| closed[c]).collect();
    if closed_ids.len() != 1 {
        return Err(Error::NoUniqueStationary(format!("chain is reducible with {} closed classes", closed_ids.len())));
    }
    let class = closed_ids[0];
    let members: Vec<usize> = (0..adj.len()).filter(|&v| comp[v] == class).collect();
    let mut level = vec![usize::MAX; adj.len()];
    level[members[0]] = 0;
    let mut queue = std::collections::VecDeque::from([members[0]]);
    let mut period = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            } else {
                period = gcd(period, (level[v] + 1).abs_diff(level[w]));
            }
        }
    }
    if period != 1 {
        return Err(Error::NoUniqueStationary(format!("chain is periodic with period {period}")));
    }
    Ok(())
}

fn step(pi: &[f64], transition: &[Vec<f64>]) -> Vec<f64> {
    let mut next = vec![0.0; pi.len()];
    for (p, row) in pi.iter().zip(transition) {
        if *p == 0.0 {
            continue;
        }
        for (acc, t) in next.iter_mut().zip(row) {
            *acc += p * t;
        }
    }
    next
}

fn residual(pi: &[f64], transition: &[Vec<f64>]) -> f64 {
    step(pi, transition).iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Solves `pi (P - I) = 0`, `sum pi = 1` by Gaussian elimination with partial pivoting.
fn solve_stationary(transition: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = transition.len();
    // rows of (P^T - I), last equation replaced by normalization
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| transition[j][i] - if i == j { 1.0 } else { 0.0 }).collect();
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                        *v -= f * p;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect())
}

pub fn stationary_distribution(chain: &MarkovChain) -> Result<StationaryDistribution> {
    check_unique_aperiodic(chain)?;
    let p = chain.transition();
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut converged = false;
    for _ in 0..POWER_ITERATION_CAP {
        let next = step(&pi, p);
        let delta = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if delta <= POWER_ITERATION_TOLERANCE {
            converged = true;
            break;
        }
    }
    let normalize = |v: &mut Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
    };
    normalize(&mut pi);
    let mut res = residual(&pi, p);
    // A tiny step size also occurs on slowly mixing chains far from equilibrium,
    // so the direct solve is always tried and the better fixed point kept.
    match solve_stationary(p) {
        Some(mut solved) => {
            normalize(&mut solved);
            let solved_res = residual(&solved, p);
            if !converged || solved_res < res {
                pi = solved;
                res = solved_res;
            }
        }
        None if !converged => {
            return Err(Error::NoUniqueStationary("linear solve for the stationary law is singular".into()))
        }
        None => {}
    }
    if res > STATIONARY_RESIDUAL_LIMIT {
        return Err(Error::NoUniqueStationary(format!("stationary residual {res:e} above limit")));
    }
    Ok(StationaryDistribution { probabilities: pi, residual: res })
}

/// `sum_i mu_i H(P_i)` in bits per step.
pub fn entropy_rate(chain: &MarkovChain) -> Result<f64> {
    let mu = stationary_distribution(chain)?.probabilities;
    Ok(weighted_row_entropy(&mu, chain.transition()))
}

fn weighted_row_entropy(mu: &[f64], rows: &[Vec<f64>]) -> f64 {
    mu.iter().zip(rows).map(|(m, row)| m * row.iter().copied().map(neg_p_log2_p).sum::<f64>()).sum()
}

fn reshape(row: &[f64], cols: usize) -> Vec<Vec<f64>> {
    row.chunks(cols).map(<[f64]>::to_vec).collect()
}

fn amir_from_stationary(pair: &JointMarkovPair, mu: &[f64]) -> f64 {
    let ny = pair.y_alphabet().size();
    mu.iter()
        .zip(pair.joint_chain().transition())
        .filter(|(m, _)| **m > 0.0)
        .map(|(m, row)| m * mutual_information_unchecked(&reshape(row, ny)))
        .sum::<f64>()
        .max(0.0)
}

/// AMIR of a jointly-Markov pair: `sum_s mu(s) I(X'; Y' | s)`. Exact regardless of
/// whether the marginals are Markov.
pub fn exact_amir_joint(pair: &JointMarkovPair) -> Result<f64> {
    let mu = stationary_distribution(pair.joint_chain())?.probabilities;
    Ok(amir_from_stationary(pair, &mu))
}

/// Stationary law of `(s_0, m_1, .., m_d)` marginal-symbol paths, flattened as
/// `hist[path][current joint state]`, where `m_k` is the `which` marginal.
fn marginal_paths(pair: &JointMarkovPair, mu: &[f64], which: Marginal, depth: usize) -> Vec<Vec<f64>> {
    let k = mu.len();
    let size = match which {
        Marginal::X => pair.x_alphabet().size(),
        Marginal::Y => pair.y_alphabet().size(),
    };
    let symbol = |s: usize| match which {
        Marginal::X => pair.split(s).0,
        Marginal::Y => pair.split(s).1,
    };
    let r = pair.joint_chain().transition();
    // depth 1: path = (m_0)
    let mut paths: Vec<Vec<f64>> = vec![vec![0.0; k]; size];
    for (s, &m) in mu.iter().enumerate() {
        paths[symbol(s)][s] += m;
    }
    for _ in 1..depth {
        let mut next = vec![vec![0.0; k]; paths.len() * size];
        for (h, dist) in paths.iter().enumerate() {
            for (s, &m) in dist.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                for (s2, &t) in r[s].iter().enumerate() {
                    if t > 0.0 {
                        next[h * size + symbol(s2)][s2] += m * t;
                    }
                }
            }
        }
        paths = next;
    }
    paths
}

/// Largest deviation between `p(m_n | m_{n-1})` and `p(m_n | m_{n-d}..m_{n-1})` for `d = 2, 3`.
fn markov_deviation(pair: &JointMarkovPair, mu: &[f64], which: Marginal) -> f64 {
    let size = match which {
        Marginal::X => pair.x_alphabet().size(),
        Marginal::Y => pair.y_alphabet().size(),
    };
    let mass = |paths: &[Vec<f64>]| -> Vec<f64> { paths.iter().map(|d| d.iter().sum()).collect() };
    let pair_mass = mass(&marginal_paths(pair, mu, which, 2));
    let one_step = |prev: usize, next: usize| {
        let total: f64 = (0..size).map(|c| pair_mass[prev * size + c]).sum();
        if total > 0.0 {
            pair_mass[prev * size + next] / total
        } else {
            0.0
        }
    };
    let mut worst: f64 = 0.0;
    for depth in 3..=4 {
        let m = mass(&marginal_paths(pair, mu, which, depth));
        for (h, chunk) in m.chunks(size).enumerate() {
            let total: f64 = chunk.iter().sum();
            if total <= 1e-300 {
                continue;
            }
            let prev = h % size;
            for (next, &p) in chunk.iter().enumerate() {
                worst = worst.max((p / total - one_step(prev, next)).abs());
            }
        }
    }
    worst
}

/// Entropies of the stationary `(X_0, Y_0, X_1, Y_1)` law needed for the rates.
struct OneStepEntropies {
    x0: f64,
    y0: f64,
    x0y0: f64,
    x0x1: f64,
    y0y1: f64,
    x0y0x1: f64,
    x0y0y1: f64,
}

fn one_step_entropies(pair: &JointMarkovPair, mu: &[f64]) -> OneStepEntropies {
    let nx = pair.x_alphabet().size();
    let ny = pair.y_alphabet().size();
    let r = pair.joint_chain().transition();
    let mut x0 = vec![0.0; nx];
    let mut y0 = vec![0.0; ny];
    let mut x0x1 = vec![0.0; nx * nx];
    let mut y0y1 = vec![0.0; ny * ny];
    let mut x0y0x1 = vec![0.0; nx * ny * nx];
    let mut x0y0y1 = vec![0.0; nx * ny * ny];
    for (s, &m) in mu.iter().enumerate() {
        let (a, b) = pair.split(s);
        x0[a] += m;
        y0[b] += m;
        for (s2, &t) in r[s].iter().enumerate() {
            let (a2, b2) = pair.split(s2);
            let w = m * t;
            x0x1[a * nx + a2] += w;
            y0y1[b * ny + b2] += w;
            x0y0x1[s * nx + a2] += w;
            x0y0y1[s * ny + b2] += w;
        }
    }
    let h = |v: &[f64]| v.iter().copied().map(neg_p_log2_p).sum::<f64>();
    OneStepEntropies {
        x0: h(&x0),
        y0: h(&y0),
        x0y0: h(mu),
        x0x1: h(&x0x1),
        y0y1: h(&y0y1),
        x0y0x1: h(&x0y0x1),
        x0y0y1: h(&x0y0y1),
    }
}

/// Exact rates of a jointly-Markov pair whose marginals are both Markov.
///
/// Fails with [`Error::MarginalNotMarkov`] (carrying the still-exact AMIR)
/// when either marginal has memory beyond one step.
pub fn exact_rates_joint_markov(pair: &JointMarkovPair) -> Result<RateReport> {
    let mu = stationary_distribution(pair.joint_chain())?.probabilities;
    let amir = amir_from_stationary(pair, &mu);
    for which in [Marginal::X, Marginal::Y] {
        let deviation = markov_deviation(pair, &mu, which);
        if deviation > MARKOV_CHECK_TOLERANCE {
            return Err(Error::MarginalNotMarkov { marginal: which, deviation, amir_bits: amir });
        }
    }
    let e = one_step_entropies(pair, &mu);
    let hx = e.x0x1 - e.x0;
    let hy = e.y0y1 - e.y0;
    let hxy = weighted_row_entropy(&mu, pair.joint_chain().transition());
    let mir = hx + hy - hxy;
    Ok(RateReport {
        entropy_rate_x: hx,
        entropy_rate_y: hy,
        entropy_rate_xy: hxy,
        mir,
        amir,
        mir_gap_terms: mir - amir,
        method: RateMethod::Exact,
        tolerance: EXACT_TOLERANCE,
        converged: true,
        entropy_rate_y_lower: None,
        entropy_rate_y_upper: None,
    })
}

/// The two conditional MI terms whose vanishing makes MIR and AMIR equal.
pub fn equality_conditions_check(pair: &JointMarkovPair) -> Result<EqualityReport> {
    let mu = stationary_distribution(pair.joint_chain())?.probabilities;
    let e = one_step_entropies(pair, &mu);
    // I(X1; Y0 | X0) = H(X0,X1) + H(X0,Y0) - H(X0,Y0,X1) - H(X0)
    let c1 = (e.x0x1 + e.x0y0 - e.x0y0x1 - e.x0).max(0.0);
    let c2 = (e.y0y1 + e.x0y0 - e.x0y0y1 - e.y0).max(0.0);
    Ok(EqualityReport {
        condition1_violation: c1,
        condition2_violation: c2,
        equal: c1 < EQUALITY_THRESHOLD && c2 < EQUALITY_THRESHOLD,
    })
}

/// `sum_{x0} mu(x0) I(X_1; Y_1 | X_0 = x0)` with joint `P[x0,x1] E[x1,y1]`.
pub fn exact_amir_hidden_pair(model: &HiddenMarkovPair) -> Result<f64> {
    let mu = stationary_distribution(model.hidden())?.probabilities;
    let e = model.emission();
    Ok(mu
        .iter()
        .zip(model.hidden().transition())
        .map(|(m, row)| {
            let joint: Vec<Vec<f64>> = row.iter().zip(e).map(|(p, er)| er.iter().map(|v| p * v).collect()).collect();
            m * mutual_information_unchecked(&joint)
        })
        .sum::<f64>()
        .max(0.0))
}

/// Per-depth block entropies of the hidden-pair output.
struct BlockEntropies {
    /// `H(Y_1..Y_m)` for `m = 1..=depth`.
    unconditional: Vec<f64>,
    /// `H(Y_1..Y_m | X_1 = x)`, indexed `[x][m-1]`.
    given_start: Vec<Vec<f64>>,
}

fn block_entropies(model: &HiddenMarkovPair, mu: &[f64], depth: usize) -> BlockEntropies {
    let nx = model.x_alphabet().size();
    let ny = model.y_alphabet().size();
    let mut walk = BlockWalk {
        nx,
        ny,
        depth,
        mu,
        emission: model.emission(),
        transition: model.hidden().transition(),
        // level m holds alpha[x1 * nx + x] = p(y_1..y_{m+1}, X_{m+1} = x | X_1 = x1)
        levels: vec![0.0; depth * nx * nx],
        acc: BlockEntropies { unconditional: vec![0.0; depth], given_start: vec![vec![0.0; depth]; nx] },
    };
    for y in 0..ny {
        for x1 in 0..nx {
            for x in 0..nx {
                walk.levels[x1 * nx + x] = if x == x1 { walk.emission[x][y] } else { 0.0 };
            }
        }
        walk.visit(0);
    }
    walk.acc
}

struct BlockWalk<'a> {
    nx: usize,
    ny: usize,
    depth: usize,
    mu: &'a [f64],
    emission: &'a [Vec<f64>],
    transition: &'a [Vec<f64>],
    levels: Vec<f64>,
    acc: BlockEntropies,
}

impl BlockWalk<'_> {
    fn visit(&mut self, m: usize) {
        let nx = self.nx;
        let block = nx * nx;
        let alpha = &self.levels[m * block..(m + 1) * block];
        let mut total = 0.0;
        for x1 in 0..nx {
            let q: f64 = alpha[x1 * nx..(x1 + 1) * nx].iter().sum();
            total += self.mu[x1] * q;
            self.acc.given_start[x1][m] += neg_p_log2_p(q);
        }
        if total == 0.0 {
            return;
        }
        self.acc.unconditional[m] += neg_p_log2_p(total);
        if m + 1 == self.depth {
            return;
        }
        // predicted[x1 * nx + x2] = sum_x alpha[x1][x] P[x][x2], shared by every next symbol
        let mut predicted = vec![0.0; block];
        for x1 in 0..nx {
            for x in 0..nx {
                let a = alpha[x1 * nx + x];
                if a == 0.0 {
                    continue;
                }
                for (x2, t) in self.transition[x].iter().enumerate() {
                    predicted[x1 * nx + x2] += a * t;
                }
            }
        }
        for y in 0..self.ny {
            let next = &mut self.levels[(m + 1) * block..(m + 2) * block];
            for x1 in 0..nx {
                for x2 in 0..nx {
                    next[x1 * nx + x2] = self.emission[x2][y] * predicted[x1 * nx + x2];
                }
            }
            self.visit(m + 1);
        }
    }
}

/// Sandwich bounds `(upper_m, lower_m)` on the output entropy rate for `m = 1..=depth`.
pub fn hmm_output_entropy_bounds_by_depth(model: &HiddenMarkovPair, depth: usize) -> Result<Vec<(f64, f64)>> {
    let mu = stationary_distribution(model.hidden())?.probabilities;
    let blocks = block_entropies(model, &mu, depth);
    Ok((0..depth)
        .map(|i| {
            let prev = |v: &[f64]| if i == 0 { 0.0 } else { v[i - 1] };
            let upper = blocks.unconditional[i] - prev(&blocks.unconditional);
            let lower: f64 = mu.iter().zip(&blocks.given_start).map(|(w, h)| w * (h[i] - prev(h))).sum();
            (upper, lower)
        })
        .collect())
}

/// Largest conditioning depth whose enumeration fits the path budget.
pub fn sandwich_depth_cap(output_symbols: usize) -> usize {
    if output_symbols <= 1 {
        1
    } else {
        ((SANDWICH_PATH_BITS / (output_symbols as f64).log2()).floor() as usize).max(1)
    }
}

/// Deepens the sandwich until `upper - lower <= gap_tolerance` or the depth cap is hit.
pub fn hmm_output_entropy_rate(model: &HiddenMarkovPair, gap_tolerance: f64) -> Result<EntropyRateBounds> {
    sandwich(model, gap_tolerance, sandwich_depth_cap(model.y_alphabet().size()))
}

fn sandwich(model: &HiddenMarkovPair, gap_tolerance: f64, cap: usize) -> Result<EntropyRateBounds> {
    if gap_tolerance.is_nan() || gap_tolerance <= 0.0 {
        return Err(Error::InvalidInput(format!("gap tolerance must be positive, got {gap_tolerance}")));
    }
    let mut depth = cap.min(4);
    loop {
        let bounds = hmm_output_entropy_bounds_by_depth(model, depth)?;
        let hit = bounds.iter().position(|(u, l)| u - l <= gap_tolerance);
        if hit.is_some() || depth == cap {
            let i = hit.unwrap_or(depth - 1);
            let (upper, lower) = bounds[i];
            let lower = lower.max(0.0).min(upper);
            return Ok(EntropyRateBounds { lower, upper, n_used: i + 1, converged: hit.is_some() });
        }
        depth = cap.min(depth + 4);
    }
}

/// MIR of a hidden pair through the sandwich-bounded output entropy rate.
pub fn exact_mir_hidden_pair(model: &HiddenMarkovPair, gap_tolerance: f64) -> Result<RateReport> {
    let bounds = hmm_output_entropy_rate(model, gap_tolerance)?;
    mir_from_bounds(model, bounds)
}

fn mir_from_bounds(model: &HiddenMarkovPair, bounds: EntropyRateBounds) -> Result<RateReport> {
    let hx = entropy_rate(model.hidden())?;
    let hy = bounds.midpoint();
    let hxy = entropy_rate(lift_to_joint_pair(model).joint_chain())?;
    let amir = exact_amir_hidden_pair(model)?;
    let mir = hx + hy - hxy;
    Ok(RateReport {
        entropy_rate_x: hx,
        entropy_rate_y: hy,
        entropy_rate_xy: hxy,
        mir,
        amir,
        mir_gap_terms: mir - amir,
        method: RateMethod::Bounded,
        tolerance: 0.5 * bounds.gap() + EXACT_TOLERANCE,
        converged: bounds.converged,
        entropy_rate_y_lower: Some(bounds.lower),
        entropy_rate_y_upper: Some(bounds.upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(rows: Vec<Vec<f64>>) -> MarkovChain {
        MarkovChain::new(rows, None).unwrap()
    }

    fn reference_chain() -> MarkovChain {
        chain(vec![vec![0.8, 0.2], vec![0.4, 0.6]])
    }

    fn h2(p: f64) -> f64 {
        neg_p_log2_p(p) + neg_p_log2_p(1.0 - p)
    }

    // (2/3) H(0.8, 0.2) + (1/3) H(0.4, 0.6)
    fn reference_rate() -> f64 {
        2.0 / 3.0 * h2(0.2) + 1.0 / 3.0 * h2(0.4)
    }

    #[test]
    fn stationary_examples() {
        let s = stationary_distribution(&reference_chain()).unwrap();
        assert!((s.probabilities[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((s.probabilities[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(s.residual <= STATIONARY_RESIDUAL_LIMIT);
        let s = stationary_distribution(&chain(vec![vec![0.5, 0.5], vec![0.5, 0.5]])).unwrap();
        assert_eq!(s.probabilities, vec![0.5, 0.5]);
    }

    #[test]
    fn reducible_and_periodic_chains_rejected() {
        let id = chain(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(stationary_distribution(&id), Err(Error::NoUniqueStationary(m)) if m.contains("reducible")));
        let cycle = chain(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(stationary_distribution(&cycle), Err(Error::NoUniqueStationary(m)) if m.contains("periodic")));
        assert!(entropy_rate(&cycle).is_err());
    }

    #[test]
    fn transient_states_get_zero_mass() {
        // state 2 leaks into the closed class {0, 1} and is never re-entered
        let c = chain(vec![vec![0.8, 0.2, 0.0], vec![0.4, 0.6, 0.0], vec![0.5, 0.0, 0.5]]);
        let s = stationary_distribution(&c).unwrap();
        assert!(s.probabilities[2].abs() < 1e-12);
        assert!((s.probabilities[0] - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn slow_mixing_chain_uses_solver() {
        for eps in [1e-9, 1e-12] {
            let c = chain(vec![vec![1.0 - eps, eps], vec![2.0 * eps, 1.0 - 2.0 * eps]]);
            let s = stationary_distribution(&c).unwrap();
            assert!((s.probabilities[0] - 2.0 / 3.0).abs() < 1e-3, "{eps}: {:?}", s.probabilities);
        }
    }

    #[test]
    fn entropy_rate_examples() {
        for k in 1..5 {
            let c = chain(vec![vec![1.0 / k as f64; k]; k]);
            assert!((entropy_rate(&c).unwrap() - (k as f64).log2()).abs() < 1e-12);
        }
        let h = entropy_rate(&reference_chain()).unwrap();
        assert!((h - reference_rate()).abs() < 1e-12);
        assert!((h - 0.8049).abs() < 5e-5);
        let mut last = f64::INFINITY;
        for eps in [0.2, 0.1, 0.01, 0.001, 1e-6] {
            let h = entropy_rate(&chain(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])).unwrap();
            assert!(h < last);
            last = h;
        }
        assert!(last < 1e-4);
    }

    fn identity_coupling(c: &MarkovChain) -> JointMarkovPair {
        let n = c.states();
        let mut rows = vec![vec![0.0; n * n]; n * n];
        for x in 0..n {
            for y in 0..n {
                for x2 in 0..n {
                    rows[x * n + y][x2 * n + x2] = c.transition()[x][x2];
                }
            }
        }
        JointMarkovPair::new(n, n, rows).unwrap()
    }

    #[test]
    fn joint_independent_pair_has_zero_rates() {
        let q = chain(vec![vec![0.3, 0.3, 0.4], vec![0.9, 0.05, 0.05], vec![0.2, 0.5, 0.3]]);
        let r = exact_rates_joint_markov(&JointMarkovPair::independent(&reference_chain(), &q).unwrap()).unwrap();
        assert!(r.mir.abs() < 1e-12 && r.amir.abs() < 1e-12);
        assert!(r.invariant_violation().is_none());
    }

    #[test]
    fn joint_identity_coupling_equals_entropy_rate() {
        let r = exact_rates_joint_markov(&identity_coupling(&reference_chain())).unwrap();
        assert!((r.mir - reference_rate()).abs() < 1e-12);
        assert!((r.amir - reference_rate()).abs() < 1e-12);
    }

    #[test]
    fn lifted_hmm_output_is_not_markov() {
        let lifted = lift_to_joint_pair(&HiddenMarkovPair::reference_model());
        match exact_rates_joint_markov(&lifted) {
            Err(Error::MarginalNotMarkov { marginal, amir_bits, .. }) => {
                assert_eq!(marginal, Marginal::Y);
                assert!((amir_bits - 0.0892).abs() < 5e-5, "{amir_bits}");
            }
            other => panic!("expected marginal-not-markov, got {other:?}"),
        }
        let amir = exact_amir_joint(&lifted).unwrap();
        assert!((amir - exact_amir_hidden_pair(&HiddenMarkovPair::reference_model()).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn hidden_amir_examples() {
        let amir = exact_amir_hidden_pair(&HiddenMarkovPair::reference_model()).unwrap();
        // independent evaluation: x0 = 0 branch [[.56,.24],[.06,.14]], x0 = 1 branch [[.28,.12],[.18,.42]]
        let branch = |j: [[f64; 2]; 2]| {
            let px = [j[0][0] + j[0][1], j[1][0] + j[1][1]];
            let py = [j[0][0] + j[1][0], j[0][1] + j[1][1]];
            (0..2)
                .flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| j[a][b] * (j[a][b] / (px[a] * py[b])).log2())
                .sum::<f64>()
        };
        let oracle =
            2.0 / 3.0 * branch([[0.56, 0.24], [0.06, 0.14]]) + 1.0 / 3.0 * branch([[0.28, 0.12], [0.18, 0.42]]);
        assert!((amir - oracle).abs() < 1e-14);
        assert!((amir - 0.0892).abs() < 5e-5);

        let uniform = HiddenMarkovPair::new(reference_chain(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(exact_amir_hidden_pair(&uniform).unwrap().abs() < 1e-15);
        let ident = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((exact_amir_hidden_pair(&ident).unwrap() - reference_rate()).abs() < 1e-12);
    }

    #[test]
    fn sandwich_examples() {
        let ident = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let b = hmm_output_entropy_rate(&ident, 1e-9).unwrap();
        assert_eq!(b.n_used, 2);
        assert!((b.upper - reference_rate()).abs() < 1e-12 && (b.lower - reference_rate()).abs() < 1e-12);

        let uniform = HiddenMarkovPair::new(reference_chain(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let b = hmm_output_entropy_rate(&uniform, 1e-9).unwrap();
        assert_eq!(b.n_used, 1);
        assert!((b.upper - 1.0).abs() < 1e-12 && (b.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_reference_model() {
        // brute-force enumeration to depth 15 gives H(Y) = 0.98437652934768
        let b = hmm_output_entropy_rate(&HiddenMarkovPair::reference_model(), 1e-3).unwrap();
        assert!(b.converged);
        assert!(b.gap() <= 1e-3);
        assert!(b.lower <= 0.984_376_529_347_68 && 0.984_376_529_347_68 <= b.upper, "{b:?}");
        let tight = hmm_output_entropy_rate(&HiddenMarkovPair::reference_model(), 1e-10).unwrap();
        assert!((tight.midpoint() - 0.984_376_529_347_68).abs() < 1e-10);
    }

    #[test]
    fn sandwich_monotone() {
        let bounds = hmm_output_entropy_bounds_by_depth(&HiddenMarkovPair::reference_model(), 12).unwrap();
        for w in bounds.windows(2) {
            assert!(w[1].0 <= w[0].0 + 1e-12, "upper increased: {w:?}");
            assert!(w[1].1 >= w[0].1 - 1e-12, "lower decreased: {w:?}");
        }
    }

    #[test]
    fn sandwich_rejects_bad_tolerance() {
        assert!(hmm_output_entropy_rate(&HiddenMarkovPair::reference_model(), 0.0).is_err());
        assert!(hmm_output_entropy_rate(&HiddenMarkovPair::reference_model(), f64::NAN).is_err());
    }

    #[test]
    fn sandwich_cap_flags_nonconvergence() {
        assert_eq!(sandwich_depth_cap(2), 25);
        assert_eq!(sandwich_depth_cap(4), 12);
        // near-deterministic hidden chain with noisy output mixes slowly
        let model = HiddenMarkovPair::new(
            chain(vec![vec![0.999, 0.001], vec![0.001, 0.999]]),
            vec![vec![0.51, 0.49], vec![0.49, 0.51]],
        )
        .unwrap();
        // a reduced cap keeps the test fast; the cap logic is the same
        let b = sandwich(&model, 1e-15, 10).unwrap();
        assert!(!b.converged);
        assert_eq!(b.n_used, 10);
        let report = mir_from_bounds(&model, b.clone()).unwrap();
        assert!(!report.converged);
        assert!(report.tolerance >= 0.5 * b.gap());
    }

    #[test]
    fn hidden_mir_examples() {
        let r = exact_mir_hidden_pair(&HiddenMarkovPair::reference_model(), 1e-3).unwrap();
        assert!((r.mir - 0.1035).abs() <= 0.002, "{r:?}");
        assert!(r.amir < r.mir);
        assert!(r.invariant_violation().is_none(), "{:?}", r.invariant_violation());
        assert_eq!(r.method, RateMethod::Bounded);

        let ident = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = exact_mir_hidden_pair(&ident, 1e-6).unwrap();
        assert!((r.mir - reference_rate()).abs() < 1e-12);
        let uniform = HiddenMarkovPair::new(reference_chain(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = exact_mir_hidden_pair(&uniform, 1e-6).unwrap();
        assert!(r.mir.abs() < 1e-12);
    }

    #[test]
    fn equality_check_examples() {
        let q = chain(vec![vec![0.1, 0.9], vec![0.7, 0.3]]);
        let r = equality_conditions_check(&JointMarkovPair::independent(&reference_chain(), &q).unwrap()).unwrap();
        assert!(r.equal);
        // i.i.d. pair: every joint row identical
        let row = vec![0.1, 0.2, 0.3, 0.15, 0.15, 0.1];
        let iid = JointMarkovPair::new(2, 3, vec![row; 6]).unwrap();
        let r = equality_conditions_check(&iid).unwrap();
        assert!(r.equal && r.condition1_violation < 1e-12 && r.condition2_violation < 1e-12);
        let r = equality_conditions_check(&lift_to_joint_pair(&HiddenMarkovPair::reference_model())).unwrap();
        assert!(!r.equal);
        assert!(r.condition2_violation > 1e-3);
    }
}
