//! Shared value types: alphabets, aligned sequences, rate reports and
//! convergence traces.
//!
//! Containers are 0-based; documentation refers to time steps 1-based, so
//! `values[0]` is the first snapshot.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite symbol set `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidInput("alphabet size must be at least 1".into()));
        }
        Ok(Alphabet(size))
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    alphabet: Alphabet,
    values: Vec<usize>,
}

impl SymbolSequence {
    pub fn new(alphabet: Alphabet, values: Vec<usize>) -> Result<Self> {
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, &v)| v >= alphabet.size()) {
            return Err(Error::InvalidInput(format!(
                "symbol {v} at position {i} is outside alphabet of size {}",
                alphabet.size()
            )));
        }
        Ok(SymbolSequence { alphabet, values })
    }

    /// Builds a sequence whose alphabet is the smallest one containing every value.
    pub fn from_values(values: Vec<usize>) -> Self {
        let size = values.iter().copied().max().map_or(1, |m| m + 1);
        SymbolSequence { alphabet: Alphabet(size), values }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Aligned realization `(x_1..x_n, y_1..y_n)` of a discrete pair process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedSymbolSequence {
    x: SymbolSequence,
    y: SymbolSequence,
}

impl PairedSymbolSequence {
    pub fn new(x: SymbolSequence, y: SymbolSequence) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!("paired sequences differ in length ({} vs {})", x.len(), y.len())));
        }
        Ok(PairedSymbolSequence { x, y })
    }

    pub fn x(&self) -> &SymbolSequence {
        &self.x
    }

    pub fn y(&self) -> &SymbolSequence {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Prefix of the first `n` steps.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        PairedSymbolSequence {
            x: SymbolSequence { alphabet: self.x.alphabet, values: self.x.values[..n].to_vec() },
            y: SymbolSequence { alphabet: self.y.alphabet, values: self.y.values[..n].to_vec() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealPairedSequence {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl RealPairedSequence {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!("paired sequences differ in length ({} vs {})", x.len(), y.len())));
        }
        if let Some(i) = x.iter().chain(y.iter()).position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value at flat index {i}")));
        }
        Ok(RealPairedSequence { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        RealPairedSequence { x: self.x[..n].to_vec(), y: self.y[..n].to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    Exact,
    Bounded,
    Estimated,
}

/// Entropy rates, MIR and AMIR of a pair process, all in bits per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub entropy_rate_x: f64,
    pub entropy_rate_y: f64,
    pub entropy_rate_xy: f64,
    pub mir: f64,
    pub amir: f64,
    /// `mir - amir`: the two conditional MI terms that separate the rates.
    pub mir_gap_terms: f64,
    pub method: RateMethod,
    pub tolerance: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entropy_rate_y_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entropy_rate_y_upper: Option<f64>,
}

impl RateReport {
    /// Returns a description of the first violated invariant, if any.
    pub fn invariant_violation(&self) -> Option<String> {
        let tol = self.tolerance;
        let fields = [
            ("entropy_rate_x", self.entropy_rate_x),
            ("entropy_rate_y", self.entropy_rate_y),
            ("entropy_rate_xy", self.entropy_rate_xy),
            ("mir", self.mir),
            ("amir", self.amir),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite() || *v < -tol) {
            return Some(format!("{name} = {v} is negative or non-finite"));
        }
        if self.amir > self.mir + tol {
            return Some(format!("amir {} exceeds mir {} by more than {tol}", self.amir, self.mir));
        }
        let decomposed = self.entropy_rate_x + self.entropy_rate_y - self.entropy_rate_xy;
        if (decomposed - self.mir).abs() > tol {
            return Some(format!("mir {} differs from H(X)+H(Y)-H(X,Y) = {decomposed}", self.mir));
        }
        None
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RateReport serializes")
    }
}

/// Per-length estimates, optionally with an exact reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    n_values: Vec<usize>,
    estimates: Vec<Option<f64>>,
    reference: Option<f64>,
}

impl ConvergenceTrace {
    pub fn new(n_values: Vec<usize>, estimates: Vec<Option<f64>>, reference: Option<f64>) -> Result<Self> {
        if n_values.len() != estimates.len() {
            return Err(Error::InvalidInput(format!(
                "trace has {} lengths but {} estimates",
                n_values.len(),
                estimates.len()
            )));
        }
        if n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("trace lengths must be strictly increasing".into()));
        }
        Ok(ConvergenceTrace { n_values, estimates, reference })
    }

    pub fn n_values(&self) -> &[usize] {
        &self.n_values
    }

    pub fn estimates(&self) -> &[Option<f64>] {
        &self.estimates
    }

    pub fn reference(&self) -> Option<f64> {
        self.reference
    }

    pub fn len(&self) -> usize {
        self.n_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_values.is_empty()
    }

    pub fn last_estimate(&self) -> Option<f64> {
        self.estimates.last().copied().flatten()
    }

    /// Absolute error against the reference at each point.
    pub fn errors(&self) -> Option<Vec<Option<f64>>> {
        let r = self.reference?;
        Some(self.estimates.iter().map(|e| e.map(|v| (v - r).abs())).collect())
    }

    /// CSV with header `n,estimate,reference`; missing cells are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,estimate,reference\n");
        let reference = self.reference.map(|r| r.to_string()).unwrap_or_default();
        for (n, e) in self.n_values.iter().zip(&self.estimates) {
            let e = e.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{n},{e},{reference}\n"));
        }
        out
    }
}
