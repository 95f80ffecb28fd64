//! Exact finite-dimensional and asymptotic moments of trace words in
//! partial transposes of a multipartite Wishart matrix.
//!
//! For an `m×n` bit matrix `ε` the random variable of interest is
//! `X_ε = tr(W^{ε_1} ⋯ W^{ε_m})`, where row `ε_i` selects which tensor legs
//! of the `i`-th Wishart factor are transposed. Its `k`-th moment is the
//! exact rational
//!
//! ```text
//! E(X_ε^k) = Σ_{σ ∈ S_{km}} (p/D)^{#σ} ∏_j d_j^{f_{k,j}(ε,σ)},
//! ```
//!
//! with `f_{k,j}` an exponent read off from the join of two pairings of
//! `[±km]`. Everything here is exact rational arithmetic; convert with
//! [`ExactValue::to_f64`] when a float is wanted.

mod clt;
mod engine;
mod report;
mod value;

pub use clt::{
    centered_exact_moment, clt_limit_moment, exact_s_moment, kernel_gap_bound,
    kernel_invariance_gap, limit_centered_moment, limit_mixed_moment, technical_identity_check,
    IdentityVariant, SMoment, WordCache,
};
pub use engine::{exact_moment, exact_moment_with_dump, f_exponent, variance_exact, TermRecord};
pub use report::{classify_sigma, split_check, word_kernel, SigmaReport, SplitReport};
pub use value::ExactValue;

use thiserror::Error;

use crate::combinat::CombinatError;

/// Errors from the exact moment engine.
#[derive(Debug, Error)]
pub enum MomentError {
    #[error(transparent)]
    Combinat(#[from] CombinatError),
    #[error("invalid epsilon matrix: {0}")]
    InvalidEpsilon(String),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("kernel mismatch: the two words have different kernels")]
    KernelMismatch,
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("i/o error during term dump: {0}")]
    Io(#[from] std::io::Error),
}

/// The Z₂-valued `m×n` matrix `ε` selecting which tensor legs of which
/// Wishart factor are transposed. Row `i` is the transpose pattern of the
/// `i`-th factor of the trace word; column `j` controls leg `j` across the
/// word.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct EpsilonMatrix {
    m: usize,
    n: usize,
    bits: Vec<u8>,
}

impl EpsilonMatrix {
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self, MomentError> {
        if rows.is_empty() {
            return Err(MomentError::InvalidEpsilon("no rows".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(MomentError::InvalidEpsilon("empty row".into()));
        }
        let mut bits = Vec::with_capacity(rows.len() * n);
        for row in &rows {
            if row.len() != n {
                return Err(MomentError::InvalidEpsilon(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    n
                )));
            }
            for &b in row {
                if b > 1 {
                    return Err(MomentError::InvalidEpsilon(format!("bit {b} not in {{0,1}}")));
                }
                bits.push(b);
            }
        }
        Ok(EpsilonMatrix {
            m: rows.len(),
            n,
            bits,
        })
    }

    /// Convenience constructor from strings of `0`/`1`, one per row.
    pub fn from_row_strs(rows: &[&str]) -> Result<Self, MomentError> {
        let parsed: Result<Vec<Vec<u8>>, MomentError> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(MomentError::InvalidEpsilon(format!(
                            "illegal character {other:?}"
                        ))),
                    })
                    .collect()
            })
            .collect();
        EpsilonMatrix::from_rows(parsed?)
    }

    /// Word length `m` (number of factors in the trace word).
    pub fn word_len(&self) -> usize {
        self.m
    }

    /// Number of tensor legs `n`.
    pub fn legs(&self) -> usize {
        self.n
    }

    pub fn bit(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.n + col]
    }

    /// Row `ε_i ∈ {0,1}ⁿ`.
    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.n..(i + 1) * self.n]
    }

    /// Column `ε′_j ∈ {0,1}^m`.
    pub fn col(&self, j: usize) -> Vec<u8> {
        (0..self.m).map(|i| self.bit(i, j)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..self.m).map(move |i| self.row(i))
    }

    /// Sub-word keeping the given rows, in the order listed.
    pub fn restrict(&self, keep: &[usize]) -> Result<EpsilonMatrix, MomentError> {
        if keep.is_empty() {
            return Err(MomentError::InvalidEpsilon("empty restriction".into()));
        }
        let rows = keep
            .iter()
            .map(|&i| {
                if i >= self.m {
                    Err(MomentError::IndexOutOfRange(format!("row {i} of {}", self.m)))
                } else {
                    Ok(self.row(i).to_vec())
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        EpsilonMatrix::from_rows(rows)
    }

    /// Canonical text form, rows joined with commas: `00,11`.
    pub fn render(&self) -> String {
        self.rows()
            .map(|r| r.iter().map(|b| char::from(b'0' + b)).collect::<String>())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Dimension data: the tensor leg sizes `d = (d₁,…,dₙ)` and the sample
/// count `p`, with the derived total dimension `D = ∏ dⱼ`, finite ratio
/// `p/D` and minimum `μ(d)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DimSpec {
    d: Vec<u64>,
    p: u64,
}

impl DimSpec {
    pub fn new(d: Vec<u64>, p: u64) -> Result<Self, MomentError> {
        if d.is_empty() {
            return Err(MomentError::InvalidDims("empty dimension vector".into()));
        }
        if d.iter().any(|&x| x == 0) {
            return Err(MomentError::InvalidDims("dimensions must be positive".into()));
        }
        if p == 0 {
            return Err(MomentError::InvalidDims("p must be positive".into()));
        }
        Ok(DimSpec { d, p })
    }

    pub fn legs(&self) -> usize {
        self.d.len()
    }

    pub fn dims(&self) -> &[u64] {
        &self.d
    }

    pub fn dim(&self, j: usize) -> u64 {
        self.d[j]
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Total dimension `D = ∏ dⱼ`.
    pub fn total_dim(&self) -> u128 {
        self.d.iter().map(|&x| x as u128).product()
    }

    /// The exact finite ratio `c = p/D`.
    pub fn ratio(&self) -> ExactValue {
        let d = ExactValue::from_big(num::BigRational::from_integer(num::BigInt::from(
            self.total_dim(),
        )));
        &ExactValue::from_int(self.p as i64) / &d
    }

    /// `μ(d) = min_j dⱼ`.
    pub fn mu(&self) -> u64 {
        *self.d.iter().min().expect("non-empty")
    }

    fn check_legs(&self, eps: &EpsilonMatrix) -> Result<(), MomentError> {
        if eps.legs() != self.legs() {
            return Err(MomentError::InvalidDims(format!(
                "epsilon has {} legs but dims has {}",
                eps.legs(),
                self.legs()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_accessors() {
        let eps = EpsilonMatrix::from_row_strs(&["00", "11", "01"]).unwrap();
        assert_eq!(eps.word_len(), 3);
        assert_eq!(eps.legs(), 2);
        assert_eq!(eps.row(1), &[1, 1]);
        assert_eq!(eps.col(1), vec![0, 1, 1]);
        assert_eq!(eps.render(), "00,11,01");
        let sub = eps.restrict(&[2, 0]).unwrap();
        assert_eq!(sub.render(), "01,00");
    }

    #[test]
    fn epsilon_rejects_bad_input() {
        assert!(EpsilonMatrix::from_row_strs(&[]).is_err());
        assert!(EpsilonMatrix::from_row_strs(&["01", "0"]).is_err());
        assert!(EpsilonMatrix::from_row_strs(&["0a"]).is_err());
        assert!(EpsilonMatrix::from_rows(vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn dims_derived_quantities() {
        let dims = DimSpec::new(vec![2, 3], 5).unwrap();
        assert_eq!(dims.total_dim(), 6);
        assert_eq!(dims.ratio(), ExactValue::from_ratio(5, 6));
        assert_eq!(dims.mu(), 2);
        assert!(DimSpec::new(vec![], 1).is_err());
        assert!(DimSpec::new(vec![2, 0], 1).is_err());
        assert!(DimSpec::new(vec![2], 0).is_err());
    }
}
