//! Shannon entropy and mutual information in bits, plus the probability
//! validation shared by every module.

use crate::error::{Error, Result};

/// Inputs whose mass differs from 1 by more than this are rejected, never renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// `-p log2 p` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn neg_p_log2_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

pub(crate) fn check_distribution(what: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidDistribution(format!("{what} entry {i} is {v}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("{what} sums to {total}, expected 1")));
    }
    Ok(())
}

/// Checks that `rows` is a `rows.len() x cols` row-stochastic matrix. Errors name the row.
pub(crate) fn check_stochastic(what: &str, rows: &[Vec<f64>], cols: usize) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} has no rows")));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidDistribution(format!(
                "{what} row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidDistribution(format!("{what} row {i} entry {j} is {v}")));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "{what} row {i} sums to {total}, expected 1 within {NORMALIZATION_TOLERANCE:e}"
            )));
        }
    }
    Ok(())
}

/// Entropy of a probability vector, in bits.
pub fn entropy_bits(distribution: &[f64]) -> Result<f64> {
    check_distribution("distribution", distribution)?;
    Ok(distribution.iter().copied().map(neg_p_log2_p).sum())
}

/// Mutual information of a joint probability matrix (rows = first variable), in bits.
pub fn mutual_information_bits(joint: &[Vec<f64>]) -> Result<f64> {
    let cols = joint.first().map_or(0, Vec::len);
    if cols == 0 || joint.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidDistribution("joint matrix must be rectangular and nonempty".into()));
    }
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    check_distribution("joint", &flat)?;
    Ok(mutual_information_unchecked(joint))
}

/// MI of a (possibly sub-normalized) nonnegative table, assumed valid.
pub(crate) fn mutual_information_unchecked(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map_or(0, Vec::len);
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let h_joint: f64 = joint.iter().flatten().copied().map(neg_p_log2_p).sum();
    let h_rows: f64 = rows.into_iter().map(neg_p_log2_p).sum();
    let h_cols: f64 = col_sums.into_iter().map(neg_p_log2_p).sum();
    h_rows + h_cols - h_joint
}
