//! Decay-rate fits and regime-scaling verdicts.
//!
//! Rates are read from `E_k`, an energy, so they are twice the amplitude
//! rate. Scaling slopes do not see the factor; absolute comparisons are made
//! against `2λ_k` and `2cλ_k`.

use serde::{Deserialize, Serialize};

use crate::domains::{build_grid, DomainKind, DomainSpec, RateFamily};
use crate::error::{Error, Result};
use crate::linear::{max_step, ModeSolver, ModeState};
use crate::multipliers::{eval_lambda, HypoCoefficients};
use crate::pool::par_map;
use crate::spectral::C64;

/// Share of the horizon discarded as initial transient.
pub const TRANSIENT_FRACTION: f64 = 0.1;
pub const MIN_SAMPLES: usize = 10;
pub const SLOPE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `v ≈ A e^{−rate·t}`
    Exponential,
    /// `v ≈ A ⟨cλt⟩^{−rate}`
    PolynomialOrderJ { c_lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    pub model: FitModel,
    pub points: usize,
}

/// Least-squares `(intercept, slope, rms residual)` of `y` on `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Some((icpt, slope, (rss / n).sqrt()))
}

/// Fit a decay rate to `(t, value)` samples after dropping the first
/// [`TRANSIENT_FRACTION`] of the time span.
pub fn fit_decay_rate(series: &[(f64, f64)], model: FitModel) -> Result<RateFit> {
    if series.len() < MIN_SAMPLES {
        return Err(Error::Fit(format!("need at least {MIN_SAMPLES} samples, got {}", series.len())));
    }
    if let Some(&(t, v)) = series.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!("nonpositive value {v:e} at t={t}")));
    }
    let t0 = series.first().unwrap().0;
    let t1 = series.last().unwrap().0;
    let lo = t0 + TRANSIENT_FRACTION * (t1 - t0);
    let window: Vec<&(f64, f64)> = series.iter().filter(|(t, _)| *t >= lo).collect();
    let x: Vec<f64> = window
        .iter()
        .map(|(t, _)| match model {
            FitModel::Exponential => *t,
            FitModel::PolynomialOrderJ { c_lambda } => 0.5 * (1.0 + (c_lambda * t).powi(2)).ln(),
        })
        .collect();
    let y: Vec<f64> = window.iter().map(|(_, v)| v.ln()).collect();
    let (_, slope, residual) =
        linear_fit(&x, &y).ok_or_else(|| Error::Fit(format!("degenerate window [{lo}, {t1}]")))?;
    Ok(RateFit { rate: -slope, window: (lo, t1), residual, model, points: x.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    EnhancedDissipation,
    TaylorDispersion,
    ChannelHeatRate,
}

impl Regime {
    /// Expected `(slope_vs_k, slope_vs_nu)` of `log λ`.
    pub fn expected(self) -> (f64, f64) {
        match self {
            Regime::EnhancedDissipation => (2.0 / 3.0, 1.0 / 3.0),
            Regime::TaylorDispersion => (2.0, -1.0),
            Regime::ChannelHeatRate => (0.0, 1.0),
        }
    }

    pub fn classify(family: RateFamily, nu: f64, k: f64) -> Self {
        match (k.abs() >= nu, family) {
            (true, _) => Regime::EnhancedDissipation,
            (false, RateFamily::Plane) => Regime::TaylorDispersion,
            (false, RateFamily::Channel) => Regime::ChannelHeatRate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::EnhancedDissipation => "enhanced-dissipation",
            Regime::TaylorDispersion => "taylor-dispersion",
            Regime::ChannelHeatRate => "channel-heat-rate",
        }
    }
}

/// One `(ν, k)` run of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub k: f64,
    pub nu: f64,
    pub horizon: f64,
    pub fitted_rate: f64,
    /// `2cλ_k`, the certified energy rate.
    pub expected_rate: f64,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerdict {
    pub regime: Regime,
    pub domain: DomainKind,
    pub slope_vs_k: f64,
    pub slope_vs_nu: f64,
    pub expected: (f64, f64),
    pub tolerance: f64,
    pub pass: bool,
    pub points: Vec<ScanPoint>,
}

/// Knobs of a regime scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// y-resolution; `None` picks the domain default.
    pub resolution: Option<usize>,
    /// Horizon `T = horizon_factor / λ_k`, capped where `e^{−νk²t³/3}` has removed 30 e-folds.
    pub horizon_factor: f64,
    pub samples: usize,
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { resolution: None, horizon_factor: 6.0, samples: 200, workers: 1 }
    }
}

/// Default y-grid for scans: `(spec, resolution)`.
pub fn scan_domain(kind: DomainKind, nu: f64, resolution: Option<usize>) -> Result<(DomainSpec, usize)> {
    Ok(match kind {
        DomainKind::Plane => (DomainSpec::plane(nu, 20.0)?, resolution.unwrap_or(512)),
        DomainKind::BetaPlane => (DomainSpec::beta_plane(nu, 1.0, 20.0)?, resolution.unwrap_or(512)),
        DomainKind::HalfPlane => (DomainSpec::half_plane(nu, 10.0)?, resolution.unwrap_or(1025)),
        DomainKind::Channel => (DomainSpec::channel(nu)?, resolution.unwrap_or(129)),
    })
}

/// One-node impulse at the grid node nearest the middle of the domain.
///
/// Its spectrum is flat over the resolved band, so the measured rate is that
/// of the slowest-decaying resolved component: the semigroup rate the
/// multipliers bound, rather than the rate of one particular smooth datum.
pub fn broadband_profile(kind: DomainKind, resolution: Option<usize>) -> Result<impl Fn(f64) -> C64 + Sync> {
    let (spec, n) = scan_domain(kind, 1e-3, resolution)?;
    let grid = build_grid(&spec, n)?;
    let (lo, hi) = spec.y_bounds();
    let mid = if kind.is_whole_line() { 0.0 } else { 0.5 * (lo + hi) };
    let h = grid.spacing();
    let y0 = grid.nodes.iter().cloned().min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs())).unwrap();
    let amp = h.sqrt().recip();
    Ok(move |y: f64| if (y - y0).abs() < 0.25 * h { C64::new(amp, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Evolve one mode and fit the exponential rate of `E_k`.
pub fn measure_rate(
    spec: DomainSpec,
    resolution: usize,
    k: f64,
    profile: &dyn Fn(f64) -> C64,
    coeffs: &HypoCoefficients,
    opts: &ScanOptions,
) -> Result<ScanPoint> {
    let family = spec.kind.rate_family();
    let lambda = eval_lambda(family, spec.nu, k)?;
    let horizon = (opts.horizon_factor / lambda).min((45.0 / (spec.nu * k * k)).cbrt());
    let state = ModeState::from_fn(spec, resolution, k, profile)?;
    let solver = ModeSolver::new(spec, state.grid.clone(), k, *coeffs)?;
    let samples = opts.samples.max(MIN_SAMPLES);
    let per = ((horizon / samples as f64) / max_step(&spec, k)).ceil().max(1.0) as usize;
    let dt = horizon / (per * samples) as f64;
    let mut s = state;
    let mut series = vec![(0.0, solver.breakdown(&s).e_k)];
    for _ in 0..samples {
        for _ in 0..per {
            solver.step(&mut s, dt)?;
        }
        series.push((s.t, solver.breakdown(&s).e_k));
    }
    let fit = fit_decay_rate(&series, FitModel::Exponential)?;
    Ok(ScanPoint {
        k,
        nu: spec.nu,
        horizon,
        fitted_rate: fit.rate,
        expected_rate: 2.0 * coeffs.c * lambda,
        lambda,
        residual: fit.residual,
    })
}

fn spans_decade(v: &[f64]) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0, f64::max);
    lo > 0.0 && hi / lo >= 10.0 * (1.0 - 1e-9)
}

/// Run every `(ν, k)` pair, regress `log rate` on `log k` and `log ν`, and
/// compare the slopes with the regime's multiplier.
pub fn regime_scan(
    kind: DomainKind,
    nu_list: &[f64],
    k_list: &[f64],
    profile: &(dyn Fn(f64) -> C64 + Sync),
    coeffs: &HypoCoefficients,
    opts: ScanOptions,
) -> Result<ScalingVerdict> {
    if !spans_decade(nu_list) || !spans_decade(k_list) {
        return Err(Error::InvalidArgument("ν and k lists must each span at least a decade".into()));
    }
    let family = kind.rate_family();
    let regime = Regime::classify(family, nu_list[0], k_list[0]);
    for &nu in nu_list {
        for &k in k_list {
            if Regime::classify(family, nu, k) != regime {
                return Err(Error::InvalidArgument(format!(
                    "mixed regimes: (ν={nu}, k={k}) is not {}",
                    regime.name()
                )));
            }
        }
    }
    let jobs: Vec<(f64, f64)> = nu_list.iter().flat_map(|&nu| k_list.iter().map(move |&k| (nu, k))).collect();
    let run = |&(nu, k): &(f64, f64)| -> Result<ScanPoint> {
        let (spec, n) = scan_domain(kind, nu, opts.resolution)?;
        measure_rate(spec, n, k, profile, coeffs, &opts)
    };
    let results = par_map(&jobs, opts.workers, run);
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let (slope_vs_k, slope_vs_nu) = scaling_slopes(&points)?;
    let expected = regime.expected();
    let pass = (slope_vs_k - expected.0).abs() <= SLOPE_TOLERANCE && (slope_vs_nu - expected.1).abs() <= SLOPE_TOLERANCE;
    Ok(ScalingVerdict { regime, domain: kind, slope_vs_k, slope_vs_nu, expected, tolerance: SLOPE_TOLERANCE, pass, points })
}

/// Least-squares slopes of `log rate = a + s_k log k + s_ν log ν`.
pub fn scaling_slopes(points: &[ScanPoint]) -> Result<(f64, f64)> {
    if let Some(p) = points.iter().find(|p| !(p.fitted_rate > 0.0)) {
        return Err(Error::Fit(format!("nonpositive rate {:e} at (ν={}, k={})", p.fitted_rate, p.nu, p.k)));
    }
    let rows: Vec<[f64; 3]> = points.iter().map(|p| [1.0, p.k.ln(), p.nu.ln()]).collect();
    let rhs: Vec<f64> = points.iter().map(|p| p.fitted_rate.ln()).collect();
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for (r, b) in rows.iter().zip(&rhs) {
        for i in 0..3 {
            atb[i] += r[i] * b;
            for j in 0..3 {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let x = solve3(ata, atb).ok_or_else(|| Error::Fit("scan points do not determine both slopes".into()))?;
    Ok((x[1], x[2]))
}

/// Gaussian elimination with partial pivoting for a 3×3 system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for j in c..3 {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|j| a[c][j] * x[j]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Geometric grid of `n` points from `lo` to `hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{default_profile, kelvin_factor};
    use crate::quadrature::UnitRule;

    fn sampled(f: impl Fn(f64) -> f64, t1: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_exponential() {
        let fit = fit_decay_rate(&sampled(|t| 5.0 * (-3.0 * t).exp(), 4.0, 50), FitModel::Exponential).unwrap();
        assert!((fit.rate - 3.0).abs() < 1e-8);
        assert!(fit.residual < 1e-10);
        assert!((fit.window.0 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let fit = fit_decay_rate(&sampled(|_| 2.5, 1.0, 20), FitModel::Exponential).unwrap();
        assert!(fit.rate.abs() < 1e-14);
    }

    #[test]
    fn polynomial_model_recovers_order() {
        let cl = 0.7;
        let s = sampled(|t| (1.0 + (cl * t).powi(2)).powf(-1.5), 30.0, 40);
        let fit = fit_decay_rate(&s, FitModel::PolynomialOrderJ { c_lambda: cl }).unwrap();
        assert!((fit.rate - 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(fit_decay_rate(&sampled(|t| (-t).exp(), 1.0, 5), FitModel::Exponential).is_err());
        assert!(fit_decay_rate(&sampled(|t| 1.0 - t, 1.0, 20), FitModel::Exponential).is_err());
        let flat: Vec<(f64, f64)> = (0..20).map(|_| (1.0, 1.0)).collect();
        assert!(fit_decay_rate(&flat, FitModel::Exponential).is_err());
    }

    #[test]
    fn kelvin_norm_rate_matches_cubic_asymptotics() {
        // ‖ω(t)‖² from the closed form by quadrature over η, Gaussian data
        let (nu, k) = (1e-3, 1.0);
        let rule = UnitRule::gauss(30);
        let energy = |t: f64| {
            let centre = -k * t;
            let mut s = 0.0;
            for p in -12..12 {
                let lo = centre + p as f64;
                s += rule.integrate(lo, lo + 1.0, |eta| {
                    let a = (-(eta + k * t).powi(2) / 4.0).exp() * kelvin_factor(nu, k, eta, t);
                    a * a
                });
            }
            s
        };
        let t1 = 40.0;
        let exact = fit_decay_rate(&sampled(energy, t1, 81), FitModel::Exponential).unwrap();
        let asymptotic =
            fit_decay_rate(&sampled(|t| (-2.0 * nu * k * k * t.powi(3) / 3.0).exp(), t1, 81), FitModel::Exponential).unwrap();
        assert!((exact.rate / asymptotic.rate - 1.0).abs() < 0.2, "{} vs {}", exact.rate, asymptotic.rate);
    }

    #[test]
    fn rescaling_leaves_rate_unchanged() {
        let s = sampled(|t| (-0.3 * t - 0.01 * t * t).exp(), 10.0, 30);
        let scaled: Vec<_> = s.iter().map(|&(t, v)| (t, 1e7 * v)).collect();
        let a = fit_decay_rate(&s, FitModel::Exponential).unwrap().rate;
        let b = fit_decay_rate(&scaled, FitModel::Exponential).unwrap().rate;
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn slopes_of_a_power_law() {
        let points: Vec<ScanPoint> = [1e-3, 1e-2]
            .iter()
            .flat_map(|&nu| {
                [0.1, 0.3, 1.0].into_iter().map(move |k: f64| ScanPoint {
                    k,
                    nu,
                    horizon: 1.0,
                    fitted_rate: 2.0 * nu.cbrt() * k.powf(2.0 / 3.0),
                    expected_rate: 0.0,
                    lambda: 0.0,
                    residual: 0.0,
                })
            })
            .collect();
        let (sk, sn) = scaling_slopes(&points).unwrap();
        assert!((sk - 2.0 / 3.0).abs() < 1e-12 && (sn - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn scan_rejects_mixed_or_narrow_lists() {
        let prof = default_profile(DomainKind::Channel);
        let c = HypoCoefficients::default();
        let o = ScanOptions::default();
        assert!(regime_scan(DomainKind::Channel, &[1e-3, 1e-2], &[1e-4, 1e-1], &prof, &c, o).is_err());
        assert!(regime_scan(DomainKind::Channel, &[1e-3, 2e-3], &[1e-1, 1.0], &prof, &c, o).is_err());
    }

    #[test]
    fn channel_heat_rate_scan() {
        let prof = default_profile(DomainKind::Channel);
        let nus = [1e-3, 1e-2];
        let opts = ScanOptions { resolution: Some(65), samples: 60, ..Default::default() };
        let v = regime_scan(DomainKind::Channel, &nus, &[1e-5, 1e-4], &prof, &HypoCoefficients::default(), opts).unwrap();
        assert_eq!(v.regime, Regime::ChannelHeatRate);
        assert!(v.pass, "{v:?}");
        // first sine mode: energy rate 2ν(π/2)²
        for p in &v.points {
            let heat = 2.0 * p.nu * (std::f64::consts::PI / 2.0).powi(2);
            assert!((p.fitted_rate / heat - 1.0).abs() < 0.05, "{p:?}");
        }
    }
}
