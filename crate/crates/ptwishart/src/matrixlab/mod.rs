//! Monte Carlo side of the artifact: Ginibre sampling, Wishart matrices,
//! partial transposes by tensor-index permutation, mixed traces, the
//! centered CLT average `s_d`, and Hermitian spectra.
//!
//! Complex Gaussian convention: an entry `g` has independent real and
//! imaginary parts of mean 0 and variance 1/2, so `E|g|² = 1`. Sampling is
//! deterministic per `(seed, stream)` through a splittable counter-based
//! generator, so parallel estimates are reproducible regardless of worker
//! count.

mod mc;

pub use mc::{mc_estimate, McEstimate};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::moments::EpsilonMatrix;

/// Dense complex matrix used throughout the simulator.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Errors from the simulator.
#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not Hermitian within {tolerance:e} (max deviation {deviation:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("empty transpose subset")]
    EmptySubset,
}

/// Row-major flattening of `[d₁]×⋯×[dₙ]` with the first factor most
/// significant, matching the Kronecker-product reading of `A₁⊗⋯⊗Aₙ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorLayout {
    dims: Vec<usize>,
}

impl TensorLayout {
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(!dims.is_empty() && dims.iter().all(|&d| d >= 1));
        TensorLayout { dims }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn legs(&self) -> usize {
        self.dims.len()
    }

    /// Matrix side `D = ∏ dⱼ`.
    pub fn side(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dims.len());
        multi
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn unflat(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0usize; self.dims.len()];
        for (slot, &d) in multi.iter_mut().zip(&self.dims).rev() {
            let (m, d) = (slot, d);
            *m = flat % d;
            flat /= d;
        }
        multi
    }

    /// All multi-indices in flat order, as a lookup table.
    fn digit_table(&self) -> Vec<Vec<usize>> {
        (0..self.side()).map(|i| self.unflat(i)).collect()
    }
}

/// A `rows × cols` matrix of independent standard complex Gaussians,
/// deterministic in `(seed, stream)`.
pub fn sample_ginibre_stream(
    rows: usize,
    cols: usize,
    seed: u64,
    stream: u64,
) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let normal = Normal::new(0.0f64, 0.5f64.sqrt()).expect("valid std dev");
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        entries.push(Complex64::new(re, im));
    }
    ComplexMatrix::from_vec(rows, cols, entries)
}

/// A `rows × cols` Ginibre sample on the default stream.
pub fn sample_ginibre(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    sample_ginibre_stream(rows, cols, seed, 0)
}

/// The Wishart matrix `W = (1/D)·G·G*`.
pub fn wishart(g: &ComplexMatrix, layout: &TensorLayout) -> Result<ComplexMatrix, MatrixError> {
    let side = layout.side();
    if g.nrows() != side {
        return Err(MatrixError::ShapeMismatch(format!(
            "G has {} rows, layout side is {side}",
            g.nrows()
        )));
    }
    Ok(g * g.adjoint() / Complex64::new(side as f64, 0.0))
}

/// Applies the transposes selected by `sigma` legwise: entry
/// `(i₁…iₙ, j₁…jₙ)` is read from the source at `(i′, j′)` with
/// `(i′ₗ, j′ₗ) = (jₗ, iₗ)` where `sigmaₗ = 1`. Implemented as an
/// index-permutation copy, never as permutation matrices.
pub fn partial_transpose(
    a: &ComplexMatrix,
    sigma: &[u8],
    layout: &TensorLayout,
) -> Result<ComplexMatrix, MatrixError> {
    let side = layout.side();
    if a.nrows() != side || a.ncols() != side {
        return Err(MatrixError::ShapeMismatch(format!(
            "matrix is {}×{}, layout side is {side}",
            a.nrows(),
            a.ncols()
        )));
    }
    if sigma.len() != layout.legs() {
        return Err(MatrixError::ShapeMismatch(format!(
            "sigma has {} legs, layout has {}",
            sigma.len(),
            layout.legs()
        )));
    }
    if sigma.iter().all(|&b| b == 0) {
        return Ok(a.clone());
    }
    let digits = layout.digit_table();
    let mut out = ComplexMatrix::zeros(side, side);
    let mut src_row = vec![0usize; layout.legs()];
    let mut src_col = vec![0usize; layout.legs()];
    for row in 0..side {
        for col in 0..side {
            for l in 0..layout.legs() {
                if sigma[l] != 0 {
                    src_row[l] = digits[col][l];
                    src_col[l] = digits[row][l];
                } else {
                    src_row[l] = digits[row][l];
                    src_col[l] = digits[col][l];
                }
            }
            out[(row, col)] = a[(layout.flat(&src_row), layout.flat(&src_col))];
        }
    }
    Ok(out)
}

/// The normalized trace `tr(W^{ε_1} ⋯ W^{ε_m}) = Tr(⋯)/D` of the product
/// of partial transposes of one Wishart sample.
pub fn mixed_trace(
    w: &ComplexMatrix,
    word: &EpsilonMatrix,
    layout: &TensorLayout,
) -> Result<Complex64, MatrixError> {
    if word.legs() != layout.legs() {
        return Err(MatrixError::ShapeMismatch(format!(
            "word has {} legs, layout has {}",
            word.legs(),
            layout.legs()
        )));
    }
    let mut transposed: std::collections::HashMap<&[u8], ComplexMatrix> = Default::default();
    for row in word.rows() {
        if !transposed.contains_key(row) {
            transposed.insert(row, partial_transpose(w, row, layout)?);
        }
    }
    let mut rows = word.rows();
    let first = rows.next().expect("word is non-empty");
    let mut acc = transposed[first].clone();
    for row in rows {
        acc *= &transposed[row];
    }
    Ok(acc.trace() / Complex64::new(layout.side() as f64, 0.0))
}

/// The centered average `s = |B|^{-1/2} Σ_{x∈B} (W^x − c·Id)` of one
/// Wishart sample over the transpose subset `B`.
pub fn build_s(
    w: &ComplexMatrix,
    b: &[Vec<u8>],
    c: f64,
    layout: &TensorLayout,
) -> Result<ComplexMatrix, MatrixError> {
    if b.is_empty() {
        return Err(MatrixError::EmptySubset);
    }
    let side = layout.side();
    let mut acc = ComplexMatrix::zeros(side, side);
    for row in b {
        acc += partial_transpose(w, row, layout)?;
    }
    let shift = Complex64::new(c * b.len() as f64, 0.0);
    for i in 0..side {
        acc[(i, i)] -= shift;
    }
    Ok(acc / Complex64::new((b.len() as f64).sqrt(), 0.0))
}

/// Eigenvalues of a Hermitian matrix, ascending. Rejects matrices that are
/// not Hermitian within `1e-8`.
pub fn spectrum(a: &ComplexMatrix) -> Result<Vec<f64>, MatrixError> {
    const TOL: f64 = 1e-8;
    if a.nrows() != a.ncols() {
        return Err(MatrixError::ShapeMismatch(format!(
            "{}×{} is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let adj = a.adjoint();
    let deviation = (a - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > TOL {
        return Err(MatrixError::NotHermitian {
            deviation,
            tolerance: TOL,
        });
    }
    let hermitized = (a + adj) / Complex64::new(2.0, 0.0);
    let mut eigen: Vec<f64> = hermitized.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigen.sort_by(f64::total_cmp);
    Ok(eigen)
}

/// One histogram bin of a spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct HistBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    pub density: f64,
}

/// Equal-width histogram; `density` integrates to one over the sampled
/// range.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistBin> {
    assert!(bins >= 1);
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let width = span / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = values.len() as f64;
    counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistBin {
            bin_left: lo + i as f64 * width,
            bin_right: lo + (i + 1) as f64 * width,
            count,
            density: count as f64 / (total * width),
        })
        .collect()
}
