//! Monte Carlo estimation of `E(X_ε^k)`.
//!
//! Samples are split into fixed-size substreams keyed by `(seed,
//! stream-id)` and merged in stream order with count-weighted mean and
//! variance combination, so the estimate is identical for any worker
//! count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::moments::{DimSpec, EpsilonMatrix};

use super::{mixed_trace, sample_ginibre_stream, wishart, MatrixError, TensorLayout};

/// Samples per substream; fixed so that the stream split does not depend
/// on the thread count.
const STREAM_LEN: u64 = 1024;

/// A seeded Monte Carlo estimate of one moment.
#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    /// Standard error of the real part: sample std / √samples.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    /// Largest `|Im X_ε^k|` seen; `X_ε` is real-valued, so this is a
    /// numerical-noise gauge.
    pub max_imag: f64,
}

impl McEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.mean_re, self.mean_im)
    }
}

#[derive(Clone, Copy)]
struct StreamStats {
    n: u64,
    mean: Complex64,
    m2_re: f64,
    max_imag: f64,
}

impl StreamStats {
    fn empty() -> Self {
        StreamStats {
            n: 0,
            mean: Complex64::new(0.0, 0.0),
            m2_re: 0.0,
            max_imag: 0.0,
        }
    }

    fn push(&mut self, x: Complex64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        let delta2_re = x.re - self.mean.re;
        self.m2_re += delta.re * delta2_re;
        self.max_imag = self.max_imag.max(x.im.abs());
    }

    fn merge(self, other: StreamStats) -> StreamStats {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.n as f64 / n as f64);
        let m2_re = self.m2_re
            + other.m2_re
            + delta.re * delta.re * (self.n as f64 * other.n as f64 / n as f64);
        StreamStats {
            n,
            mean,
            m2_re,
            max_imag: self.max_imag.max(other.max_imag),
        }
    }
}

/// Empirical mean of `X_ε^k` over independent Wishart samples.
pub fn mc_estimate(
    eps: &EpsilonMatrix,
    k: usize,
    dims: &DimSpec,
    samples: u64,
    seed: u64,
) -> Result<McEstimate, MatrixError> {
    assert!(samples >= 2, "need at least two samples for a standard error");
    assert!(k >= 1, "power k must be positive");
    let layout = TensorLayout::new(dims.dims().iter().map(|&d| d as usize).collect());
    if eps.legs() != layout.legs() {
        return Err(MatrixError::ShapeMismatch(format!(
            "word has {} legs, dims has {}",
            eps.legs(),
            layout.legs()
        )));
    }
    let side = layout.side();
    let p = dims.p() as usize;
    let n_streams = samples.div_ceil(STREAM_LEN);
    let per_stream: Vec<StreamStats> = (0..n_streams)
        .into_par_iter()
        .map(|stream| {
            let count = STREAM_LEN.min(samples - stream * STREAM_LEN);
            let mut stats = StreamStats::empty();
            for draw in 0..count {
                let g = sample_ginibre_stream(side, p, seed, stream * STREAM_LEN + draw);
                let w = wishart(&g, &layout).expect("shapes agree");
                let x = mixed_trace(&w, eps, &layout).expect("shapes agree");
                stats.push(x.powu(k as u32));
            }
            stats
        })
        .collect();
    let total = per_stream
        .into_iter()
        .fold(StreamStats::empty(), StreamStats::merge);
    let variance = total.m2_re / (total.n - 1) as f64;
    Ok(McEstimate {
        mean_re: total.mean.re,
        mean_im: total.mean.im,
        stderr: (variance / total.n as f64).sqrt(),
        samples: total.n,
        seed,
        max_imag: total.max_imag,
    })
}
