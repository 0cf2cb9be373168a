//! FFT-backed transforms: periodic Fourier and the sine/cosine (DST-I/DCT-I)
//! pair used on Dirichlet intervals.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub type C64 = Complex64;

/// Forward/inverse complex FFT of one length.
#[derive(Clone)]
pub struct PeriodicFft {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicFft").field("n", &self.n).finish()
    }
}

impl PeriodicFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X_m = Σ_j x_j e^{−2πi jm/n}` in place.
    pub fn forward(&self, buf: &mut [C64]) {
        self.fwd.process(buf);
    }

    /// Inverse including the `1/n` factor, in place.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

/// Signed angular frequencies of an `n`-point periodic grid with spacing `h`.
/// The Nyquist entry is reported as negative.
pub fn fft_frequencies(n: usize, h: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / (n as f64 * h);
    (0..n)
        .map(|m| {
            let s = if m >= n.div_ceil(2) { m as i64 - n as i64 } else { m as i64 };
            s as f64 * base
        })
        .collect()
}

/// Sine series on an interval split into `m` cells (`m + 1` nodes with
/// zero endpoints): `f(y_j) = Σ_{p=1}^{m−1} b_p sin(π p j / m)`.
#[derive(Clone, Debug)]
pub struct SineTransform {
    m: usize,
    fft: PeriodicFft,
}

impl SineTransform {
    /// `nodes` counts both endpoints.
    pub fn new(nodes: usize) -> Self {
        let m = nodes - 1;
        Self { m, fft: PeriodicFft::new(2 * m) }
    }

    pub fn nodes(&self) -> usize {
        self.m + 1
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.m
    }

    fn odd_extension(&self, vals: impl Fn(usize) -> C64) -> Vec<C64> {
        let m = self.m;
        let mut buf = vec![C64::new(0.0, 0.0); 2 * m];
        for j in 1..m {
            let v = vals(j);
            buf[j] = v;
            buf[2 * m - j] = -v;
        }
        buf
    }

    /// Coefficients `b_1..b_{m−1}` from nodal values (length `m + 1`, endpoints ignored).
    /// Returned vector has length `m + 1` with zero entries at 0 and `m`.
    pub fn analyze(&self, nodal: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut buf = self.odd_extension(|j| nodal[j]);
        self.fft.forward(&mut buf);
        let scale = C64::new(0.0, 1.0 / m as f64);
        let mut out = vec![C64::new(0.0, 0.0); m + 1];
        for p in 1..m {
            out[p] = buf[p] * scale;
        }
        out
    }

    /// Nodal values (length `m + 1`, zero endpoints) from coefficients.
    pub fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut buf = self.odd_extension(|p| coeffs[p]);
        self.fft.forward(&mut buf);
        let mut out = vec![C64::new(0.0, 0.0); m + 1];
        for j in 1..m {
            out[j] = buf[j] * C64::new(0.0, 0.5);
        }
        out
    }

    /// Values at all `m + 1` nodes of `Σ_{p=1}^{m−1} a_p cos(π p j / m)`.
    pub fn cosine_synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut buf = vec![C64::new(0.0, 0.0); 2 * m];
        for p in 1..m {
            buf[p] = coeffs[p];
            buf[2 * m - p] = coeffs[p];
        }
        self.fft.forward(&mut buf);
        (0..=m).map(|j| buf[j] * 0.5).collect()
    }
}
