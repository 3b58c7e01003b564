//! Test-side generators and brute-force oracles. Nothing here calls into the
//! library's numeric code, so agreement is an independent check.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn random_stochastic(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| random_distribution(rng, k)).collect()
}

pub fn random_permutation(rng: &mut ChaCha8Rng, k: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    for i in (1..k).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

/// Positive `rows x cols` matrix with the given row and column sums (both summing to 1).
pub fn sinkhorn(rng: &mut ChaCha8Rng, row_sums: &[f64], col_sums: &[f64]) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> =
        row_sums.iter().map(|_| col_sums.iter().map(|_| rng.random_range(0.1..1.0)).collect()).collect();
    for _ in 0..100_000 {
        for (row, &r) in m.iter_mut().zip(row_sums) {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v *= r / s);
        }
        let mut worst: f64 = 0.0;
        for (j, &c) in col_sums.iter().enumerate() {
            let s: f64 = m.iter().map(|row| row[j]).sum();
            worst = worst.max((s - c).abs());
            m.iter_mut().for_each(|row| row[j] *= c / s);
        }
        if worst < 1e-16 {
            break;
        }
    }
    m
}

/// Row-major joint transition over `x * ny + y` from a rule `(x, y) -> p(x', y')`.
pub fn joint_transition<F>(nx: usize, ny: usize, mut next: F) -> Vec<Vec<f64>>
where
    F: FnMut(usize, usize) -> Vec<Vec<f64>>,
{
    let mut t = vec![vec![0.0; nx * ny]; nx * ny];
    for x in 0..nx {
        for y in 0..ny {
            let m = next(x, y);
            for x2 in 0..nx {
                for y2 in 0..ny {
                    t[x * ny + y][x2 * ny + y2] = m[x2][y2];
                }
            }
        }
    }
    t
}

/// Pair whose X marginal follows `P`, Y marginal follows `Q`, with a random coupling per joint state.
pub fn coupled_pair(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> (usize, usize, Vec<Vec<f64>>) {
    let p = random_stochastic(rng, nx);
    let q = random_stochastic(rng, ny);
    let t = joint_transition(nx, ny, |x, y| sinkhorn(rng, &p[x], &q[y]));
    (nx, ny, t)
}

/// `Y_{n+1} = h(X_n)` for a permutation `h`; the Y marginal is a relabeled, delayed copy of X.
pub fn lagged_copy_pair(rng: &mut ChaCha8Rng, k: usize, swap_roles: bool) -> (usize, usize, Vec<Vec<f64>>) {
    let p = random_stochastic(rng, k);
    let h = random_permutation(rng, k);
    let t = joint_transition(k, k, |x, y| {
        let mut m = vec![vec![0.0; k]; k];
        for a in 0..k {
            if swap_roles {
                // X_{n+1} = h(Y_n), Y follows P
                m[h[y]][a] = p[y][a];
            } else {
                m[a][h[x]] = p[x][a];
            }
        }
        m
    });
    (k, k, t)
}

/// Every step draws `(X, Y)` afresh from `joint`.
pub fn iid_pair(joint: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (nx, ny) = (joint.len(), joint[0].len());
    joint_transition(nx, ny, |_, _| joint.to_vec())
}

pub fn stationary(t: &[Vec<f64>]) -> Vec<f64> {
    let n = t.len();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; n];
        for (i, row) in t.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                next[j] += pi[i] * v;
            }
        }
        let delta = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if delta < 1e-17 {
            break;
        }
    }
    pi
}

/// Entropy in bits of a distribution given as weights keyed by outcome.
pub fn entropy_of<K: Ord>(weights: &BTreeMap<K, f64>) -> f64 {
    weights.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn marginal<T, K: Ord, F: Fn(&T) -> K>(joint: &[(T, f64)], key: F) -> BTreeMap<K, f64> {
    let mut m = BTreeMap::new();
    for (outcome, p) in joint {
        *m.entry(key(outcome)).or_insert(0.0) += p;
    }
    m
}

/// `H(A | B)` over a joint list, with `A` and `B` read by key functions.
pub fn cond_entropy<T, KA: Ord, KB: Ord, FA, FB>(joint: &[(T, f64)], a: FA, b: FB) -> f64
where
    FA: Fn(&T) -> KA,
    FB: Fn(&T) -> KB,
{
    entropy_of(&marginal(joint, |o| (a(o), b(o)))) - entropy_of(&marginal(joint, b))
}

/// Stationary rates of a jointly Markov pair, computed from the two-step law
/// `p(x0, y0, x1, y1)`. Valid as MIR only when both marginals are Markov.
#[derive(Debug, Clone, Copy)]
pub struct PairOracle {
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub mir: f64,
    pub amir: f64,
    /// `I(X1; Y0 | X0)`
    pub c1: f64,
    /// `I(Y1; X0 | Y0)`
    pub c2: f64,
}

pub fn pair_oracle(nx: usize, ny: usize, t: &[Vec<f64>]) -> PairOracle {
    let pi = stationary(t);
    let mut two_step = Vec::new();
    for s0 in 0..nx * ny {
        for s1 in 0..nx * ny {
            let p = pi[s0] * t[s0][s1];
            if p > 0.0 {
                two_step.push(((s0 / ny, s0 % ny, s1 / ny, s1 % ny), p));
            }
        }
    }
    let j = &two_step;
    let hx = cond_entropy(j, |o| o.2, |o| o.0);
    let hy = cond_entropy(j, |o| o.3, |o| o.1);
    let hxy = cond_entropy(j, |o| (o.2, o.3), |o| (o.0, o.1));
    let hx_given_s = cond_entropy(j, |o| o.2, |o| (o.0, o.1));
    let hy_given_s = cond_entropy(j, |o| o.3, |o| (o.0, o.1));
    PairOracle {
        hx,
        hy,
        hxy,
        mir: hx + hy - hxy,
        amir: hx_given_s + hy_given_s - hxy,
        c1: hx - hx_given_s,
        c2: hy - hy_given_s,
    }
}

pub fn mi_oracle(joint: &[Vec<f64>]) -> f64 {
    let list: Vec<((usize, usize), f64)> =
        joint.iter().enumerate().flat_map(|(a, row)| row.iter().enumerate().map(move |(b, &p)| ((a, b), p))).collect();
    entropy_of(&marginal(&list, |o| o.0)) + entropy_of(&marginal(&list, |o| o.1)) - entropy_of(&marginal(&list, |o| *o))
}

/// Plug-in `I(X_t; Y_t | X_{t-c..t-1}, Y_{t-c..t-1})` by direct enumeration of
/// the empirical window distribution, using probabilities and linear scans.
pub fn brute_force_plugin_cmi(x: &[usize], y: &[usize], c: usize) -> f64 {
    type Window = (Vec<(usize, usize)>, usize, usize);
    let windows: Vec<Window> = (c..x.len()).map(|t| ((t - c..t).map(|s| (x[s], y[s])).collect(), x[t], y[t])).collect();
    let n = windows.len() as f64;
    let prob = |pred: &dyn Fn(&Window) -> bool| windows.iter().filter(|w| pred(w)).count() as f64 / n;
    let mut seen: Vec<&Window> = Vec::new();
    let mut total = 0.0;
    for w in &windows {
        if seen.contains(&w) {
            continue;
        }
        seen.push(w);
        let p_all = prob(&|v| v == w);
        let p_c = prob(&|v| v.0 == w.0);
        let p_xc = prob(&|v| v.0 == w.0 && v.1 == w.1);
        let p_yc = prob(&|v| v.0 == w.0 && v.2 == w.2);
        total += p_all * (p_all * p_c / (p_xc * p_yc)).log2();
    }
    total
}

/// Reference hidden pair used throughout the tests.
pub const HMM_P: [[f64; 2]; 2] = [[0.8, 0.2], [0.4, 0.6]];
pub const HMM_E: [[f64; 2]; 2] = [[0.7, 0.3], [0.3, 0.7]];

/// `(1/n) I(X_1..X_n; Y_1..Y_n)` of the reference pair by enumerating all `4^n` joint paths.
pub fn hmm_block_mi_oracle(n: usize) -> f64 {
    let mu = [2.0 / 3.0, 1.0 / 3.0];
    let mut joint: Vec<((usize, usize), f64)> = Vec::with_capacity(1 << (2 * n));
    for xs in 0..1usize << n {
        for ys in 0..1usize << n {
            let bit = |v: usize, i: usize| (v >> i) & 1;
            let mut p = mu[bit(xs, 0)] * HMM_E[bit(xs, 0)][bit(ys, 0)];
            for i in 1..n {
                p *= HMM_P[bit(xs, i - 1)][bit(xs, i)] * HMM_E[bit(xs, i)][bit(ys, i)];
            }
            joint.push(((xs, ys), p));
        }
    }
    let hx = entropy_of(&marginal(&joint, |o| o.0));
    let hy = entropy_of(&marginal(&joint, |o| o.1));
    let hxy = entropy_of(&marginal(&joint, |o| *o));
    (hx + hy - hxy) / n as f64
}

/// All `2^edges` graphs as bit masks with the stationary flip-chain law:
/// returns `p(g0, g1)` for the uniform start and independent edge flips.
pub fn graph_two_step(edges: usize, flip: f64) -> Vec<((u32, u32), f64)> {
    let states = 1u32 << edges;
    let mut out = Vec::new();
    for g0 in 0..states {
        for g1 in 0..states {
            let flips = (g0 ^ g1).count_ones() as i32;
            let p = flip.powi(flips) * (1.0 - flip).powi(edges as i32 - flips) / states as f64;
            out.push(((g0, g1), p));
        }
    }
    out
}
