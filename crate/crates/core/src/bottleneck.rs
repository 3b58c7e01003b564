//! Temporal information-bottleneck scoring of per-snapshot encoders.
//!
//! For a target process `Y`, input `X` and representation `Z = encoder(X)`:
//! accuracy is the rate shared by `Y` and `Z`, compression the rate shared by
//! `X` and `Z`, and the overall score their ratio. Rates are the
//! single-sequence AMIR estimates with memory `C`, which equal MIR under
//! Markov inputs.
//!
//! The decoder output `Ŷ` does not enter any of the three metrics.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_amir_single_sequence, EstimatorConfig};
use crate::processes::{sample_graph_process, EdgeSet, ToyGraphProcess};
use crate::types::{Alphabet, PairedSymbolSequence, SymbolSequence};

/// Compression at or below this makes the overall score undefined.
pub const MIN_COMPRESSION_BITS: f64 = 1e-9;

/// Causal map from an input sequence to an equal-length representation sequence.
///
/// `Z_i` may depend on `X_1..X_i` only.
pub trait TemporalEncoder {
    fn encode(&self, x: &SymbolSequence) -> Result<SymbolSequence>;
}

/// Per-snapshot symbol map `Z_i = table[X_i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolMapEncoder {
    table: Vec<usize>,
    output: Alphabet,
}

impl SymbolMapEncoder {
    pub fn new(table: Vec<usize>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidInput("symbol map must cover at least one symbol".into()));
        }
        let output = Alphabet::new(table.iter().max().map_or(1, |m| m + 1))?;
        Ok(SymbolMapEncoder { table, output })
    }

    pub fn identity(symbols: usize) -> Self {
        SymbolMapEncoder { table: (0..symbols).collect(), output: Alphabet::new(symbols.max(1)).expect("nonzero") }
    }

    pub fn constant(symbols: usize) -> Self {
        SymbolMapEncoder { table: vec![0; symbols], output: Alphabet::new(1).expect("nonzero") }
    }
}

impl TemporalEncoder for SymbolMapEncoder {
    fn encode(&self, x: &SymbolSequence) -> Result<SymbolSequence> {
        if x.alphabet().size() > self.table.len() {
            return Err(Error::InvalidInput(format!(
                "encoder covers {} symbols but input alphabet has {}",
                self.table.len(),
                x.alphabet().size()
            )));
        }
        SymbolSequence::new(self.output, x.values().iter().map(|&v| self.table[v]).collect())
    }
}

/// `Z_i = f(X_{i-w+1}..X_i)`; the window is shorter at the start of the sequence.
pub struct CausalWindowEncoder<F> {
    width: usize,
    output: Alphabet,
    f: F,
}

impl<F: Fn(&[usize]) -> usize> CausalWindowEncoder<F> {
    pub fn new(width: usize, output_symbols: usize, f: F) -> Result<Self> {
        if width == 0 {
            return Err(Error::InvalidInput("window width must be positive".into()));
        }
        Ok(CausalWindowEncoder { width, output: Alphabet::new(output_symbols)?, f })
    }
}

impl<F: Fn(&[usize]) -> usize> TemporalEncoder for CausalWindowEncoder<F> {
    fn encode(&self, x: &SymbolSequence) -> Result<SymbolSequence> {
        let v = x.values();
        let z = (0..v.len()).map(|i| (self.f)(&v[(i + 1).saturating_sub(self.width)..=i])).collect();
        SymbolSequence::new(self.output, z)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckReport {
    /// Rate shared by target and representation, bits/step.
    pub accuracy: f64,
    /// Rate shared by input and representation, bits/step.
    pub compression: f64,
    /// `accuracy / compression`, `None` when compression is (numerically) zero.
    pub overall: Option<f64>,
    pub alpha_threshold: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct BottleneckJson {
    accuracy_bits: f64,
    compression_bits: f64,
    overall: Option<f64>,
    overall_defined: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    alpha_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    alpha_met: Option<bool>,
}

impl BottleneckReport {
    fn new(accuracy: f64, compression: f64) -> Self {
        let overall = (compression > MIN_COMPRESSION_BITS).then(|| accuracy / compression);
        BottleneckReport { accuracy, compression, overall, alpha_threshold: None }
    }

    /// Attaches an accuracy target `alpha`; the report flags whether it is met.
    pub fn with_alpha(mut self, alpha: Option<f64>) -> Self {
        self.alpha_threshold = alpha;
        self
    }

    pub fn overall_defined(&self) -> bool {
        self.overall.is_some()
    }

    pub fn alpha_met(&self) -> Option<bool> {
        self.alpha_threshold.map(|a| self.accuracy >= a)
    }

    pub fn to_json(&self) -> String {
        let j = BottleneckJson {
            accuracy_bits: self.accuracy,
            compression_bits: self.compression,
            overall: self.overall,
            overall_defined: self.overall_defined(),
            alpha_bits: self.alpha_threshold,
            alpha_met: self.alpha_met(),
        };
        serde_json::to_string_pretty(&j).expect("report serializes")
    }
}

pub fn score_encoder(
    x: &SymbolSequence,
    y: &SymbolSequence,
    encoder: &dyn TemporalEncoder,
    config: &EstimatorConfig,
) -> Result<BottleneckReport> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!("x has {} steps but y has {}", x.len(), y.len())));
    }
    let z = encoder.encode(x)?;
    if z.len() != x.len() {
        return Err(Error::InvalidInput("encoder changed the sequence length".into()));
    }
    let accuracy = estimate_amir_single_sequence(&PairedSymbolSequence::new(y.clone(), z.clone())?, config)?.value;
    let compression = estimate_amir_single_sequence(&PairedSymbolSequence::new(x.clone(), z)?, config)?.value;
    Ok(BottleneckReport::new(accuracy, compression))
}

/// Readers that turn each graph snapshot into one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphEncoderKind {
    /// Quartile of the edge count under the stationary `Binomial(E, 1/2)` law; 4 symbols.
    EdgeCountBucket,
    /// Presence of one designated edge.
    FixedEdgeProbe(usize),
    /// One symbol per distinct graph, numbered in order of first appearance.
    IdentityHash,
}

/// `floor(4 * P(K < count))` for `K ~ Binomial(edges, 1/2)`, capped at 3.
fn edge_count_bucket(count: usize, edges: usize) -> usize {
    let mut below = 0.0;
    let mut coeff = 1.0;
    let half_pow = 0.5f64.powi(edges as i32);
    for k in 0..count {
        below += coeff * half_pow;
        coeff = coeff * (edges - k) as f64 / (k + 1) as f64;
    }
    ((4.0 * below).floor() as usize).min(3)
}

pub fn encode_graph_sequence(graphs: &[EdgeSet], kind: GraphEncoderKind) -> Result<SymbolSequence> {
    let first = graphs.first().ok_or_else(|| Error::InvalidInput("empty graph sequence".into()))?;
    let edges = first.len();
    if let Some(i) = graphs.iter().position(|g| g.len() != edges) {
        return Err(Error::InvalidInput(format!("snapshot {i} has {} edge slots, expected {edges}", graphs[i].len())));
    }
    match kind {
        GraphEncoderKind::EdgeCountBucket => SymbolSequence::new(
            Alphabet::new(4)?,
            graphs.iter().map(|g| edge_count_bucket(g.edge_count(), edges)).collect(),
        ),
        GraphEncoderKind::FixedEdgeProbe(edge) => {
            if edge >= edges {
                return Err(Error::InvalidInput(format!("probe edge {edge} outside 0..{edges}")));
            }
            SymbolSequence::new(Alphabet::new(2)?, graphs.iter().map(|g| g.get(edge) as usize).collect())
        }
        GraphEncoderKind::IdentityHash => {
            let mut ids: HashMap<&EdgeSet, usize> = HashMap::new();
            let values = graphs
                .iter()
                .map(|g| {
                    let next = ids.len();
                    *ids.entry(g).or_insert(next)
                })
                .collect();
            Ok(SymbolSequence::from_values(values))
        }
    }
}

/// How the target `Y_i` is read off snapshot `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRule {
    EdgeIndicator(usize),
}

impl TargetRule {
    pub fn apply(&self, graphs: &[EdgeSet]) -> Result<SymbolSequence> {
        match *self {
            TargetRule::EdgeIndicator(edge) => encode_graph_sequence(graphs, GraphEncoderKind::FixedEdgeProbe(edge))
                .map_err(|_| Error::InvalidInput(format!("target edge {edge} outside the graph"))),
        }
    }
}

/// Samples the graph process, reads `Y` with `target` and `X` with `encoder_kind`,
/// and scores the identity representation `Z = X`.
pub fn bottleneck_experiment(
    process: &ToyGraphProcess,
    target: TargetRule,
    encoder_kind: GraphEncoderKind,
    n: usize,
    seed: u64,
    config: &EstimatorConfig,
) -> Result<BottleneckReport> {
    let graphs = sample_graph_process(process, n, seed)?;
    let y = target.apply(&graphs)?;
    let x = encode_graph_sequence(&graphs, encoder_kind)?;
    let identity = SymbolMapEncoder::identity(x.alphabet().size());
    score_encoder(&x, &y, &identity, config)
}
