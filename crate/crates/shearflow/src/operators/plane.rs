//! 𝔍_k on the whole line.
//!
//! Two independent realizations on a periodic grid:
//!
//! * the Fourier multiplier `arctan(η/k)`;
//! * direct quadrature of the principal value. Writing `d = y − y'` and
//!   folding the odd kernel gives
//!   `𝔍f(y) = (i sgn k / 2) ∫_0^∞ e^{−|k|d} (f(y−d) − f(y+d))/d dd`,
//!   whose integrand is smooth at `d = 0` (limit `−2f'(y)`). The bracket is
//!   sampled on the grid, interpolated by degree-6 polynomials on panels of
//!   six cells and integrated against `e^{−|k|d}` exactly up to Gauss error.
//!   The resulting stencil is folded onto the periodic grid, which makes it a
//!   circulant and lets it be applied by FFT.

use crate::domains::{GridBasis, YGrid};
use crate::error::{Error, Result};
use crate::operators::norm::LinearOperator;
use crate::quadrature::UnitRule;
use crate::spectral::{fft_frequencies, PeriodicFft, C64};

const PANEL: usize = 6;
const GAUSS_POINTS: usize = 12;
/// Kernel cut-off: `e^{−|k|D}` with `|k|D` at this value is below double precision.
const DECAY_CUTOFF: f64 = 40.0;
/// Eighth-order central first-derivative coefficients.
const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

#[derive(Debug, Clone)]
pub struct PlaneJk {
    pub k: f64,
    fft: PeriodicFft,
    spacing: f64,
    exact: Vec<f64>,
    quadrature: Vec<C64>,
}

impl PlaneJk {
    pub fn new(grid: &YGrid, k: f64) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::ZeroWavenumber);
        }
        if grid.basis != GridBasis::FourierPeriodic {
            return Err(Error::Unsupported("whole-line 𝔍_k needs a periodic grid".into()));
        }
        let n = grid.len();
        let h = grid.spacing();
        let exact = fft_frequencies(n, h)
            .iter()
            .enumerate()
            .map(|(m, &eta)| if 2 * m == n { 0.0 } else { (eta / k).atan() })
            .collect();
        let fft = PeriodicFft::new(n);
        let quadrature = quadrature_symbol(&fft, h, k);
        Ok(Self { k, fft, spacing: h, exact, quadrature })
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// `arctan(η/k)` at the grid frequencies (Nyquist set to 0).
    pub fn multiplier_symbol(&self) -> &[f64] {
        &self.exact
    }

    /// Discrete symbol realized by the quadrature stencil.
    pub fn quadrature_symbol(&self) -> &[C64] {
        &self.quadrature
    }

    fn filter(&self, f: &[C64], sym: impl Fn(usize) -> C64) -> Vec<C64> {
        let mut buf = f.to_vec();
        self.fft.forward(&mut buf);
        for (m, v) in buf.iter_mut().enumerate() {
            *v *= sym(m);
        }
        self.fft.inverse(&mut buf);
        buf
    }

    pub fn apply_multiplier(&self, f: &[C64]) -> Vec<C64> {
        self.filter(f, |m| C64::new(self.exact[m], 0.0))
    }

    pub fn apply_quadrature(&self, f: &[C64]) -> Vec<C64> {
        self.filter(f, |m| self.quadrature[m])
    }

    /// Fraction of `‖f‖²` carried outside the resolved band `|η| ≤ η_Nyquist / 3`.
    pub fn spectral_tail(&self, f: &[C64]) -> f64 {
        let mut buf = f.to_vec();
        self.fft.forward(&mut buf);
        let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = buf
            .iter()
            .enumerate()
            .filter(|(m, _)| !self.in_band(*m))
            .map(|(_, v)| v.norm_sqr())
            .sum();
        tail / total
    }

    /// View using the quadrature path on the resolved band `|η| ≤ η_Nyquist / 3`.
    ///
    /// Outside that band the degree-6 interpolation of grid-scale oscillations
    /// is meaningless, and [`crate::operators::apply_jk`] rejects profiles with
    /// energy there.
    pub fn quadrature_operator(&self) -> PlaneOp<'_> {
        PlaneOp { jk: self, exact: false }
    }

    /// View using the multiplier path.
    pub fn multiplier_operator(&self) -> PlaneOp<'_> {
        PlaneOp { jk: self, exact: true }
    }

    fn in_band(&self, m: usize) -> bool {
        let n = self.len();
        6 * m.min(n - m) <= n
    }
}

/// Borrowed [`LinearOperator`] view of a [`PlaneJk`].
pub struct PlaneOp<'a> {
    jk: &'a PlaneJk,
    exact: bool,
}

impl LinearOperator for PlaneOp<'_> {
    fn dim(&self) -> usize {
        self.jk.len()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        if self.exact {
            self.jk.apply_multiplier(x)
        } else {
            self.jk.filter(x, |m| if self.jk.in_band(m) { self.jk.quadrature[m] } else { C64::new(0.0, 0.0) })
        }
    }

    fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        if self.exact {
            self.jk.apply_multiplier(x)
        } else {
            self.jk.filter(x, |m| if self.jk.in_band(m) { self.jk.quadrature[m].conj() } else { C64::new(0.0, 0.0) })
        }
    }
}

/// Product-integration weights `W_j ≈ ∫_0^D e^{−a d} ℓ_j(d) dd` for samples at `d = j h`.
fn product_weights(a: f64, h: f64) -> Vec<f64> {
    let reach = DECAY_CUTOFF / a;
    let panels = ((reach / h) / PANEL as f64).ceil().max(1.0) as usize;
    let rule = UnitRule::gauss(GAUSS_POINTS);
    let mut w = vec![0.0; panels * PANEL + 1];
    // Lagrange basis values at the Gauss points of one panel, in cell units
    let lag: Vec<[f64; PANEL + 1]> = rule
        .nodes
        .iter()
        .map(|&x| {
            let t = x * PANEL as f64;
            let mut l = [1.0; PANEL + 1];
            for (i, li) in l.iter_mut().enumerate() {
                for j in 0..=PANEL {
                    if j != i {
                        *li *= (t - j as f64) / (i as f64 - j as f64);
                    }
                }
            }
            l
        })
        .collect();
    let width = PANEL as f64 * h;
    for p in 0..panels {
        let d0 = p as f64 * width;
        for (g, (&x, &wg)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let e = (-a * (d0 + x * width)).exp() * wg * width;
            for i in 0..=PANEL {
                w[p * PANEL + i] += e * lag[g][i];
            }
        }
    }
    w
}

fn quadrature_symbol(fft: &PeriodicFft, h: f64, k: f64) -> Vec<C64> {
    let n = fft.len();
    let w = product_weights(k.abs(), h);
    // stencil R with (𝔍f)_i = (i sgn k / 2) Σ_m R(m) f_{i+m}
    let mut r = vec![C64::new(0.0, 0.0); n];
    let wrap = |m: i64| m.rem_euclid(n as i64) as usize;
    for (j, &wj) in w.iter().enumerate().skip(1) {
        let c = wj / (j as f64 * h);
        r[wrap(-(j as i64))] += c;
        r[wrap(j as i64)] -= c;
    }
    // s(0) = −2 f'(y) by central differences
    for (m, &cm) in FD8.iter().enumerate() {
        let c = 2.0 * w[0] * cm / h;
        r[wrap(m as i64 + 1)] -= c;
        r[wrap(-(m as i64 + 1))] += c;
    }
    // Σ_m R(m) e^{2πi pm/n} = conj(FFT(R))_p for real R
    fft.forward(&mut r);
    let pref = C64::new(0.0, 0.5 * k.signum());
    r.iter().map(|v| pref * v.conj()).collect()
}
