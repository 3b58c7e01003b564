//! Process definitions and seeded samplers.
//!
//! Every sampler is a pure function of its arguments: the same seed always
//! yields the same realization. Multi-sequence experiments derive one seed
//! per sequence with [`substream_seed`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::stationary_distribution;
use crate::info::{check_distribution, check_stochastic};
use crate::types::{Alphabet, PairedSymbolSequence, RealPairedSequence, SymbolSequence};

/// Mixes a substream index into a master seed (splitmix64 finalizer).
pub fn substream_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF draw from a probability vector.
pub(crate) fn draw<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Finite-state Markov chain with row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    alphabet: Alphabet,
    transition: Vec<Vec<f64>>,
    initial: Option<Vec<f64>>,
}

impl MarkovChain {
    pub fn new(transition: Vec<Vec<f64>>, initial: Option<Vec<f64>>) -> Result<Self> {
        let k = transition.len();
        let alphabet = Alphabet::new(k)?;
        check_stochastic("transition", &transition, k)?;
        if let Some(init) = &initial {
            if init.len() != k {
                return Err(Error::InvalidDistribution(format!(
                    "initial distribution has {} entries, expected {k}",
                    init.len()
                )));
            }
            check_distribution("initial distribution", init)?;
        }
        Ok(MarkovChain { alphabet, transition, initial })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn states(&self) -> usize {
        self.alphabet.size()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn initial(&self) -> Option<&[f64]> {
        self.initial.as_deref()
    }

    /// The explicit initial distribution, or the stationary one when unset.
    pub fn start_distribution(&self) -> Result<Vec<f64>> {
        match &self.initial {
            Some(p) => Ok(p.clone()),
            None => Ok(stationary_distribution(self)?.probabilities),
        }
    }
}

/// Pair process whose joint state `(x, y)` is Markov. Product index is `x * |Y| + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMarkovPair {
    x_alphabet: Alphabet,
    y_alphabet: Alphabet,
    joint: MarkovChain,
}

impl JointMarkovPair {
    pub fn new(x_states: usize, y_states: usize, joint_transition: Vec<Vec<f64>>) -> Result<Self> {
        let x_alphabet = Alphabet::new(x_states)?;
        let y_alphabet = Alphabet::new(y_states)?;
        let k = x_states * y_states;
        if joint_transition.len() != k {
            return Err(Error::InvalidDistribution(format!(
                "joint transition has {} rows, expected {x_states} x {y_states} = {k}",
                joint_transition.len()
            )));
        }
        let joint = MarkovChain::new(joint_transition, None)?;
        Ok(JointMarkovPair { x_alphabet, y_alphabet, joint })
    }

    /// `R = P ⊗ Q`: two chains evolving independently.
    pub fn independent(x: &MarkovChain, y: &MarkovChain) -> Result<Self> {
        let (nx, ny) = (x.states(), y.states());
        let mut rows = vec![vec![0.0; nx * ny]; nx * ny];
        for (a, b, a2, b2) in quad(nx, ny) {
            rows[a * ny + b][a2 * ny + b2] = x.transition[a][a2] * y.transition[b][b2];
        }
        Self::new(nx, ny, rows)
    }

    pub fn x_alphabet(&self) -> Alphabet {
        self.x_alphabet
    }

    pub fn y_alphabet(&self) -> Alphabet {
        self.y_alphabet
    }

    pub fn joint_chain(&self) -> &MarkovChain {
        &self.joint
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        x * self.y_alphabet.size() + y
    }

    #[inline]
    pub fn split(&self, state: usize) -> (usize, usize) {
        (state / self.y_alphabet.size(), state % self.y_alphabet.size())
    }
}

fn quad(nx: usize, ny: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..nx)
        .flat_map(move |a| (0..ny).flat_map(move |b| (0..nx).flat_map(move |a2| (0..ny).map(move |b2| (a, b, a2, b2)))))
}

/// Hidden chain `X` with per-step emission `Y_i ~ emission[X_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenMarkovPair {
    hidden: MarkovChain,
    emission: Vec<Vec<f64>>,
    y_alphabet: Alphabet,
}

impl HiddenMarkovPair {
    pub fn new(hidden: MarkovChain, emission: Vec<Vec<f64>>) -> Result<Self> {
        if emission.len() != hidden.states() {
            return Err(Error::InvalidDistribution(format!(
                "emission has {} rows, expected one per hidden state ({})",
                emission.len(),
                hidden.states()
            )));
        }
        let y_alphabet = Alphabet::new(emission.first().map_or(0, Vec::len))?;
        check_stochastic("emission", &emission, y_alphabet.size())?;
        Ok(HiddenMarkovPair { hidden, emission, y_alphabet })
    }

    /// The two-state model used for the worked HMM example.
    pub fn reference_model() -> Self {
        let hidden = MarkovChain::new(vec![vec![0.8, 0.2], vec![0.4, 0.6]], None).expect("valid chain");
        HiddenMarkovPair::new(hidden, vec![vec![0.7, 0.3], vec![0.3, 0.7]]).expect("valid emission")
    }

    pub fn hidden(&self) -> &MarkovChain {
        &self.hidden
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    pub fn x_alphabet(&self) -> Alphabet {
        self.hidden.alphabet()
    }

    pub fn y_alphabet(&self) -> Alphabet {
        self.y_alphabet
    }
}

/// `X_i ~ N(0,1)` i.i.d., `Y_i = a X_i + b N_i` with independent standard normal `N_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPairProcess {
    signal: f64,
    noise: f64,
}

impl GaussianPairProcess {
    pub fn new(signal_coefficient: f64, noise_coefficient: f64) -> Result<Self> {
        if !signal_coefficient.is_finite() || !noise_coefficient.is_finite() {
            return Err(Error::InvalidInput("gaussian coefficients must be finite".into()));
        }
        if noise_coefficient == 0.0 {
            return Err(Error::InvalidInput("noise coefficient b must be nonzero".into()));
        }
        Ok(GaussianPairProcess { signal: signal_coefficient, noise: noise_coefficient })
    }

    pub fn signal_coefficient(&self) -> f64 {
        self.signal
    }

    pub fn noise_coefficient(&self) -> f64 {
        self.noise
    }

    /// `0.5 log2((a² + b²) / b²)`, the per-step MI (and both rates, the pairs being i.i.d.).
    pub fn mutual_information_bits(&self) -> f64 {
        let (a2, b2) = (self.signal * self.signal, self.noise * self.noise);
        0.5 * ((a2 + b2) / b2).log2()
    }
}

/// Undirected simple graph as a bitset over the `n(n-1)/2` node pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    words: Vec<u64>,
    len: usize,
}

impl EdgeSet {
    pub fn empty(len: usize) -> Self {
        EdgeSet { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut set = EdgeSet::empty(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                set.flip(i);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, edge: usize) -> bool {
        self.words[edge / 64] >> (edge % 64) & 1 == 1
    }

    #[inline]
    pub fn flip(&mut self, edge: usize) {
        self.words[edge / 64] ^= 1 << (edge % 64);
    }

    pub fn edge_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `0`/`1` string, edge 0 first.
    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|e| if self.get(e) { '1' } else { '0' }).collect()
    }
}

/// Markov chain on graphs: every edge flips independently with a fixed probability per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyGraphProcess {
    node_count: usize,
    flip_probability: f64,
}

impl ToyGraphProcess {
    pub fn new(node_count: usize, flip_probability: f64) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidInput("node count must be positive".into()));
        }
        if !(0.0..=1.0).contains(&flip_probability) {
            return Err(Error::InvalidInput(format!("flip probability {flip_probability} outside [0, 1]")));
        }
        Ok(ToyGraphProcess { node_count, flip_probability })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn flip_probability(&self) -> f64 {
        self.flip_probability
    }

    pub fn edge_count(&self) -> usize {
        self.node_count * (self.node_count - 1) / 2
    }
}

pub fn sample_markov(chain: &MarkovChain, n: usize, seed: u64) -> Result<SymbolSequence> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let start = chain.start_distribution()?;
    let mut rng = rng_for(seed);
    Ok(SymbolSequence::new(chain.alphabet(), walk(&mut rng, chain, &start, n)).expect("symbols in range"))
}

fn walk<R: Rng>(rng: &mut R, chain: &MarkovChain, start: &[f64], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut state = draw(rng, start);
    out.push(state);
    for _ in 1..n {
        state = draw(rng, &chain.transition[state]);
        out.push(state);
    }
    out
}

/// Samples the hidden chain from its stationary law, then emits `y_i` from row `x_i`.
pub fn sample_hidden_pair(model: &HiddenMarkovPair, n: usize, seed: u64) -> Result<PairedSymbolSequence> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let start = stationary_distribution(&model.hidden)?.probabilities;
    let mut rng = rng_for(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let mut state = draw(&mut rng, &start);
    for i in 0..n {
        if i > 0 {
            state = draw(&mut rng, &model.hidden.transition[state]);
        }
        xs.push(state);
        ys.push(draw(&mut rng, &model.emission[state]));
    }
    PairedSymbolSequence::new(
        SymbolSequence::new(model.x_alphabet(), xs)?,
        SymbolSequence::new(model.y_alphabet(), ys)?,
    )
}

/// Samples a jointly-Markov pair from its stationary law and splits the product states.
pub fn sample_joint_pair(pair: &JointMarkovPair, n: usize, seed: u64) -> Result<PairedSymbolSequence> {
    let joint = sample_markov(&pair.joint, n, seed)?;
    let (xs, ys): (Vec<usize>, Vec<usize>) = joint.values().iter().map(|&s| pair.split(s)).unzip();
    PairedSymbolSequence::new(SymbolSequence::new(pair.x_alphabet, xs)?, SymbolSequence::new(pair.y_alphabet, ys)?)
}

pub fn sample_gaussian_pair(process: &GaussianPairProcess, n: usize, seed: u64) -> Result<RealPairedSequence> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let mut rng = rng_for(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.sample(StandardNormal);
        let noise: f64 = rng.sample(StandardNormal);
        xs.push(x);
        ys.push(process.signal * x + process.noise * noise);
    }
    RealPairedSequence::new(xs, ys)
}

/// First snapshot: each edge present with probability 1/2. Then independent per-edge flips.
pub fn sample_graph_process(process: &ToyGraphProcess, n: usize, seed: u64) -> Result<Vec<EdgeSet>> {
    if n == 0 {
        return Err(Error::InvalidInput("sequence length must be at least 1".into()));
    }
    let edges = process.edge_count();
    let mut rng = rng_for(seed);
    let mut current = EdgeSet::empty(edges);
    for e in 0..edges {
        if rng.random_bool(0.5) {
            current.flip(e);
        }
    }
    let mut out = Vec::with_capacity(n);
    out.push(current.clone());
    for _ in 1..n {
        for e in 0..edges {
            if rng.random_bool(process.flip_probability) {
                current.flip(e);
            }
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// `R[(x,y),(x',y')] = P[x,x'] * E[x',y']`.
pub fn lift_to_joint_pair(model: &HiddenMarkovPair) -> JointMarkovPair {
    let nx = model.x_alphabet().size();
    let ny = model.y_alphabet().size();
    let p = model.hidden.transition();
    let e = model.emission();
    let mut rows = vec![vec![0.0; nx * ny]; nx * ny];
    for (x, y, x2, y2) in quad(nx, ny) {
        rows[x * ny + y][x2 * ny + y2] = p[x][x2] * e[x2][y2];
    }
    JointMarkovPair::new(nx, ny, rows).expect("product of stochastic matrices is stochastic")
}

/// On-disk process definition, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProcessDefinition {
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
    /// Joint transition over the product alphabet, index `x * y_states + y`.
    MarkovPair {
        x_states: usize,
        y_states: usize,
        transition: Vec<Vec<f64>>,
    },
    Hmm {
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
    },
    Gaussian {
        a: f64,
        b: f64,
    },
    Graph {
        nodes: usize,
        flip_p: f64,
    },
}

/// A validated process.
#[derive(Debug, Clone, PartialEq)]
pub enum Process {
    Markov(MarkovChain),
    MarkovPair(JointMarkovPair),
    Hmm(HiddenMarkovPair),
    Gaussian(GaussianPairProcess),
    Graph(ToyGraphProcess),
}

impl Process {
    pub fn kind(&self) -> &'static str {
        match self {
            Process::Markov(_) => "markov",
            Process::MarkovPair(_) => "markov-pair",
            Process::Hmm(_) => "hmm",
            Process::Gaussian(_) => "gaussian",
            Process::Graph(_) => "graph",
        }
    }
}

impl ProcessDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("process definition: {e}")))
    }

    pub fn build(&self) -> Result<Process> {
        Ok(match self.clone() {
            ProcessDefinition::Markov { transition, initial } => {
                Process::Markov(MarkovChain::new(transition, initial)?)
            }
            ProcessDefinition::MarkovPair { x_states, y_states, transition } => {
                Process::MarkovPair(JointMarkovPair::new(x_states, y_states, transition)?)
            }
            ProcessDefinition::Hmm { transition, emission } => {
                Process::Hmm(HiddenMarkovPair::new(MarkovChain::new(transition, None)?, emission)?)
            }
            ProcessDefinition::Gaussian { a, b } => Process::Gaussian(GaussianPairProcess::new(a, b)?),
            ProcessDefinition::Graph { nodes, flip_p } => Process::Graph(ToyGraphProcess::new(nodes, flip_p)?),
        })
    }
}

pub fn load_process(text: &str) -> Result<Process> {
    ProcessDefinition::from_json(text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::mutual_information_unchecked;

    fn reference_chain() -> MarkovChain {
        MarkovChain::new(vec![vec![0.8, 0.2], vec![0.4, 0.6]], None).unwrap()
    }

    #[test]
    fn markov_sampling_is_deterministic() {
        let chain = MarkovChain::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], None).unwrap();
        let a = sample_markov(&chain, 4, 11).unwrap();
        let b = sample_markov(&chain, 4, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn forced_cycle_alternates() {
        let chain = MarkovChain::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], Some(vec![1.0, 0.0])).unwrap();
        let s = sample_markov(&chain, 6, 3).unwrap();
        assert_eq!(s.values(), &[0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn periodic_chain_without_initial_errors() {
        let chain = MarkovChain::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], None).unwrap();
        assert!(matches!(sample_markov(&chain, 3, 0), Err(Error::NoUniqueStationary(_))));
    }

    #[test]
    fn zero_length_rejected() {
        assert!(sample_markov(&reference_chain(), 0, 0).is_err());
    }

    #[test]
    fn long_run_frequencies_match_stationary() {
        // pi P = pi with 0.2 pi0 = 0.4 pi1 gives (2/3, 1/3)
        let s = sample_markov(&reference_chain(), 1_000_000, 7).unwrap();
        let zeros = s.values().iter().filter(|&&v| v == 0).count() as f64 / 1e6;
        assert!((zeros - 2.0 / 3.0).abs() < 0.005, "{zeros}");
    }

    #[test]
    fn hmm_output_frequency() {
        // (2/3)(0.7) + (1/3)(0.3)
        let model = HiddenMarkovPair::reference_model();
        let s = sample_hidden_pair(&model, 1_000_000, 5).unwrap();
        let p0 = s.y().values().iter().filter(|&&v| v == 0).count() as f64 / 1e6;
        assert!((p0 - 0.566_666_666).abs() < 0.005, "{p0}");
    }

    #[test]
    fn hmm_length_and_identity_emission() {
        let model = HiddenMarkovPair::reference_model();
        let s = sample_hidden_pair(&model, 4000, 1).unwrap();
        assert_eq!(s.len(), 4000);
        let ident = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = sample_hidden_pair(&ident, 500, 2).unwrap();
        assert_eq!(s.x().values(), s.y().values());
    }

    #[test]
    fn emission_shape_checked() {
        let err = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0]]).unwrap_err();
        assert!(err.to_string().contains("emission"));
        let err = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0, 0.0], vec![0.5, 0.4]]).unwrap_err();
        assert!(err.to_string().contains("emission row 1"), "{err}");
    }

    fn correlation(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn gaussian_correlation() {
        // a / sqrt(a^2 + b^2) = 0.8
        let p = GaussianPairProcess::new(0.8, 0.6).unwrap();
        let s = sample_gaussian_pair(&p, 100_000, 9).unwrap();
        assert!((correlation(s.x(), s.y()) - 0.8).abs() < 0.01);
        let p = GaussianPairProcess::new(0.0, 1.0).unwrap();
        let s = sample_gaussian_pair(&p, 100_000, 9).unwrap();
        assert!(correlation(s.x(), s.y()).abs() < 0.01);
    }

    #[test]
    fn gaussian_determinism_and_validation() {
        let p = GaussianPairProcess::new(0.8, 0.6).unwrap();
        let a = sample_gaussian_pair(&p, 1000, 4).unwrap();
        let b = sample_gaussian_pair(&p, 1000, 4).unwrap();
        assert!(a.x().iter().zip(b.x()).all(|(u, v)| u.to_bits() == v.to_bits()));
        assert!(a.y().iter().zip(b.y()).all(|(u, v)| u.to_bits() == v.to_bits()));
        assert!(GaussianPairProcess::new(0.8, 0.0).is_err());
        let mi = GaussianPairProcess::new(0.8, 0.6).unwrap().mutual_information_bits();
        assert!((mi - 0.5 * (1.0f64 / 0.36).log2()).abs() < 1e-12);
    }

    #[test]
    fn lift_product_formula() {
        let lifted = lift_to_joint_pair(&HiddenMarkovPair::reference_model());
        let r = lifted.joint_chain().transition();
        for y in 0..2 {
            assert!((r[lifted.index(0, y)][lifted.index(0, 0)] - 0.56).abs() < 1e-15);
        }
    }

    #[test]
    fn lift_marginalizes_to_hidden_transition() {
        let model = HiddenMarkovPair::new(
            MarkovChain::new(vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.25, 0.25], vec![0.2, 0.2, 0.6]], None).unwrap(),
            vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.05, 0.95]],
        )
        .unwrap();
        let lifted = lift_to_joint_pair(&model);
        let r = lifted.joint_chain().transition();
        for x in 0..3 {
            for y in 0..2 {
                for x2 in 0..3 {
                    let m: f64 = (0..2).map(|y2| r[lifted.index(x, y)][lifted.index(x2, y2)]).sum();
                    assert!((m - model.hidden().transition()[x][x2]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn lift_special_emissions() {
        let ident = HiddenMarkovPair::new(reference_chain(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let l = lift_to_joint_pair(&ident);
        let r = l.joint_chain().transition();
        let p = reference_chain();
        for (x, y, x2, y2) in quad(2, 2) {
            let want = if y2 == x2 { p.transition()[x][x2] } else { 0.0 };
            assert_eq!(r[l.index(x, y)][l.index(x2, y2)], want);
        }
        let uniform = HiddenMarkovPair::new(reference_chain(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let l = lift_to_joint_pair(&uniform);
        let r = l.joint_chain().transition();
        for (x, y, x2, y2) in quad(2, 2) {
            assert_eq!(r[l.index(x, y)][l.index(x2, y2)], p.transition()[x][x2] / 2.0);
        }
    }

    #[test]
    fn frozen_graph_process() {
        let g = ToyGraphProcess::new(5, 0.0).unwrap();
        let s = sample_graph_process(&g, 50, 1).unwrap();
        assert!(s.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(s[0].len(), 10);
    }

    #[test]
    fn graph_process_deterministic() {
        let g = ToyGraphProcess::new(4, 0.3).unwrap();
        let a = sample_graph_process(&g, 3, 17).unwrap();
        let b = sample_graph_process(&g, 3, 17).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.len() == 6));
    }

    #[test]
    fn memoryless_graph_process() {
        let g = ToyGraphProcess::new(3, 0.5).unwrap();
        let s = sample_graph_process(&g, 100_000, 21).unwrap();
        for e in 0..3 {
            let mut counts = [[0.0; 2]; 2];
            for w in s.windows(2) {
                counts[w[0].get(e) as usize][w[1].get(e) as usize] += 1.0;
            }
            let total: f64 = counts.iter().flatten().sum();
            let joint: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|c| c / total).collect()).collect();
            assert!(mutual_information_unchecked(&joint) < 0.01);
        }
    }

    #[test]
    fn edge_set_bits() {
        let mut e = EdgeSet::empty(70);
        e.flip(3);
        e.flip(65);
        assert!(e.get(3) && e.get(65) && !e.get(4));
        assert_eq!(e.edge_count(), 2);
        assert_eq!(EdgeSet::from_bits(&[true, false, true]).to_bit_string(), "101");
    }

    #[test]
    fn substreams_differ() {
        let seeds: Vec<u64> = (0..100).map(|i| substream_seed(1, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(substream_seed(1, 5), substream_seed(1, 5));
    }

    #[test]
    fn json_definitions() {
        let p = load_process(r#"{"kind":"hmm","transition":[[0.8,0.2],[0.4,0.6]],"emission":[[0.7,0.3],[0.3,0.7]]}"#)
            .unwrap();
        assert_eq!(p, Process::Hmm(HiddenMarkovPair::reference_model()));
        assert_eq!(p.kind(), "hmm");
        let p = load_process(r#"{"kind":"gaussian","a":0.8,"b":0.6}"#).unwrap();
        assert!(matches!(p, Process::Gaussian(_)));
        let p = load_process(r#"{"kind":"graph","nodes":4,"flip_p":0.1}"#).unwrap();
        assert!(matches!(p, Process::Graph(g) if g.edge_count() == 6));
        let p = load_process(r#"{"kind":"markov","transition":[[0.5,0.5],[1.0,0.0]]}"#).unwrap();
        assert!(matches!(p, Process::Markov(_)));
        let p = load_process(r#"{"kind":"markov-pair","x_states":1,"y_states":2,"transition":[[0.5,0.5],[0.5,0.5]]}"#)
            .unwrap();
        assert!(matches!(p, Process::MarkovPair(_)));
    }

    #[test]
    fn json_validation_names_row() {
        let err = load_process(r#"{"kind":"markov","transition":[[0.5,0.5],[0.5,0.4]]}"#).unwrap_err();
        assert!(err.to_string().contains("transition row 1"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(load_process(r#"{"kind":"bogus"}"#).is_err());
        assert!(load_process(r#"{"kind":"gaussian","a":1.0}"#).is_err());
    }
}
