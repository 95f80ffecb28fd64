//! Exact and Monte Carlo moment computations for partial transposes of
//! multipartite Wishart random matrices.
//!
//! The crate is organized around four engines:
//!
//! * [`combinat`] — permutations of the signed index set `[±N]`, set
//!   partitions, joins of pairings, and guarded exhaustive enumeration.
//!   Every exact formula below reduces to cycle counts computed here.
//! * [`moments`] — the exact finite-dimensional moment engine: joint
//!   moments `E(X_ε^k)` of trace words in partial transposes, exact
//!   variances, asymptotic limit moments, and the exact moments of the
//!   centered CLT averages `s_d`.
//! * [`wick`] — a brute-force oracle that recomputes `E(X_ε^k)` from the
//!   raw Gaussian expansion and the Wick formula. It shares no code with
//!   the moment engine's exponent machinery and is used at tiny sizes to
//!   certify it.
//! * [`matrixlab`] — a Monte Carlo simulator: Ginibre sampling, Wishart
//!   matrices, partial transposes by tensor-index permutation, mixed trace
//!   estimation, and Hermitian spectra.
//!
//! All exact results are rational numbers ([`moments::ExactValue`]);
//! floating point appears only on explicit conversion.

pub mod combinat;
pub mod matrixlab;
pub mod moments;
pub mod wick;
