//! Mode energies `E_k`, their dissipation components, the global functionals
//! assembled over a discrete k-ladder, and the stability threshold.
//!
//! Per-mode quantities are evaluated from spectral coefficients:
//!
//! * whole-line grids store the sheared transform `Ŵ(ξ)` with `ω̂(η) = Ŵ(η + s)`,
//!   where `s` is the accumulated shear `kt`; the y-frequency of bin `ξ` is `q = ξ − s`;
//! * sine grids store `b_p` with `ω(y_j) = Σ b_p sin(κ_p (y_j − lo))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domains::{DomainKind, GridBasis, RateFamily, YGrid};
use crate::error::{Error, Result};
use crate::multipliers::{ghost_from_rate, lambda_unchecked, weights_unchecked, HypoCoefficients, Weights};
use crate::operators::GalerkinJk;
use crate::spectral::{fft_frequencies, SineTransform, C64};

/// `E_k` and the unweighted dissipation components of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub k: f64,
    pub nu: f64,
    pub e_k: f64,
    /// `ν‖∇_k ω‖²`
    pub d_gamma: f64,
    /// `να‖∇_k ∂_y ω‖²`
    pub d_alpha: f64,
    /// `λ_k‖ω‖²`
    pub d_beta: f64,
    /// `k²‖∇_k φ‖²`
    pub d_tau: f64,
    /// `αk²‖∇_k ∂_y φ‖²`
    pub d_tau_alpha: f64,
    pub omega_sq: f64,
    pub dy_omega_sq: f64,
    pub alpha: f64,
}

impl EnergyBreakdown {
    pub fn zero(k: f64, nu: f64) -> Self {
        Self {
            k,
            nu,
            e_k: 0.0,
            d_gamma: 0.0,
            d_alpha: 0.0,
            d_beta: 0.0,
            d_tau: 0.0,
            d_tau_alpha: 0.0,
            omega_sq: 0.0,
            dy_omega_sq: 0.0,
            alpha: 0.0,
        }
    }

    /// `D_k = D_γ + c_α D_α + c_β D_β + c_τ D_τ + c_τ c_α D_τα`.
    pub fn dissipation(&self, c: &HypoCoefficients) -> f64 {
        self.d_gamma
            + c.c_alpha * self.d_alpha
            + c.c_beta * self.d_beta
            + c.c_tau * self.d_tau
            + c.c_tau * c.c_alpha * self.d_tau_alpha
    }

    /// Reference norm `‖ω‖² + c_α α‖∂_yω‖²` of the equivalence bounds.
    pub fn reference_norm(&self, c: &HypoCoefficients) -> f64 {
        self.omega_sq + c.c_alpha * self.alpha * self.dy_omega_sq
    }

    /// Every quadratic quantity multiplied by `f`.
    pub fn scaled(&self, f: f64) -> Self {
        Self {
            e_k: self.e_k * f,
            d_gamma: self.d_gamma * f,
            d_alpha: self.d_alpha * f,
            d_beta: self.d_beta * f,
            d_tau: self.d_tau * f,
            d_tau_alpha: self.d_tau_alpha * f,
            omega_sq: self.omega_sq * f,
            dy_omega_sq: self.dy_omega_sq * f,
            ..*self
        }
    }
}

/// Quadratic building blocks of one mode.
#[derive(Debug, Clone, Copy, Default)]
struct Quadratics {
    omega: f64,
    dy: f64,
    dyy: f64,
    /// `Re⟨ikω, ∂_yω⟩`
    cross: f64,
    /// `Re⟨𝔍ω, ω⟩`
    jk: f64,
    /// `Re⟨𝔍∂_yω, ∂_yω⟩`
    jk_dy: f64,
    grad_phi: f64,
    grad_dy_phi: f64,
}

#[derive(Debug, Clone)]
struct FourierRepr {
    xi: Vec<f64>,
    /// Parseval factor `h/N`.
    scale: f64,
}

#[derive(Debug, Clone)]
struct SineRepr {
    half_length: f64,
    kappa: Vec<f64>,
    transform: SineTransform,
    jk: GalerkinJk,
    /// `C[p][q] = κ_q ∫ sin(κ_p y) cos(κ_q y) dy`, rows and columns `1..m`.
    cross: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Repr {
    Fourier(FourierRepr),
    Sine(Box<SineRepr>),
}

/// Cached evaluator of `E_k`, `D_k` and `dE_k/dt` for one `(kind, grid, ν, k)`.
#[derive(Debug, Clone)]
pub struct ModeEnergy {
    pub kind: DomainKind,
    pub k: f64,
    pub nu: f64,
    pub coeffs: HypoCoefficients,
    pub weights: Weights,
    pub lambda: f64,
    repr: Repr,
}

impl ModeEnergy {
    pub fn new(kind: DomainKind, grid: &YGrid, nu: f64, k: f64, coeffs: HypoCoefficients) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::ZeroWavenumber);
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::ViscosityOutOfRange(nu));
        }
        let family = kind.rate_family();
        let weights = weights_unchecked(nu, k, family);
        let lambda = lambda_unchecked(family, nu, k);
        let repr = match (kind.is_whole_line(), grid.basis) {
            (true, GridBasis::FourierPeriodic) => {
                let n = grid.len();
                let h = grid.spacing();
                Repr::Fourier(FourierRepr { xi: fft_frequencies(n, h), scale: h / n as f64 })
            }
            (false, GridBasis::SineDirichlet) => {
                let n = grid.len();
                let m = n - 1;
                let length = grid.length();
                let base = std::f64::consts::PI / length;
                let kappa: Vec<f64> = (0..n).map(|p| base * p as f64).collect();
                let mut cross = vec![0.0; (m + 1) * (m + 1)];
                for p in 1..m {
                    for q in 1..m {
                        if (p + q) % 2 == 1 {
                            let (pf, qf) = (p as f64, q as f64);
                            cross[p * (m + 1) + q] = kappa[q] * (length / std::f64::consts::PI) * 2.0 * pf / (pf * pf - qf * qf);
                        }
                    }
                }
                let jk = GalerkinJk::new(kind, k, &grid.nodes)?;
                Repr::Sine(Box::new(SineRepr {
                    half_length: 0.5 * length,
                    kappa,
                    transform: SineTransform::new(n),
                    jk,
                    cross,
                }))
            }
            _ => return Err(Error::Unsupported(format!("{} on a {:?} grid", kind.name(), grid.basis))),
        };
        Ok(Self { kind, k, nu, coeffs, weights, lambda, repr })
    }

    /// Number of spectral coefficients expected.
    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Fourier(f) => f.xi.len(),
            Repr::Sine(s) => s.kappa.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn beta_term(&self) -> f64 {
        if self.weights.beta_in_energy {
            self.coeffs.c_beta * self.weights.beta
        } else {
            0.0
        }
    }

    /// Pointwise energy density `e(q)` on the whole line.
    fn density(&self, q: f64) -> f64 {
        let c = &self.coeffs;
        let a = self.weights.alpha;
        let at = (q / self.k).atan();
        1.0 + c.c_alpha * a * q * q + self.beta_term() * self.k * q + c.c_tau * at + c.c_tau * c.c_alpha * a * q * q * at
    }

    /// `de/dq`.
    fn density_slope(&self, q: f64) -> f64 {
        let c = &self.coeffs;
        let a = self.weights.alpha;
        let k = self.k;
        let qq = q * q + k * k;
        let at = (q / k).atan();
        2.0 * c.c_alpha * a * q
            + self.beta_term() * k
            + c.c_tau * k / qq
            + c.c_tau * c.c_alpha * a * (2.0 * q * at + q * q * k / qq)
    }

    fn quadratics(&self, coef: &[C64], shift: f64) -> Quadratics {
        let k = self.k;
        let k2 = k * k;
        let mut out = Quadratics::default();
        match &self.repr {
            Repr::Fourier(f) => {
                for (w, &xi) in coef.iter().zip(&f.xi) {
                    let a2 = w.norm_sqr() * f.scale;
                    if a2 == 0.0 {
                        continue;
                    }
                    let q = xi - shift;
                    let q2 = q * q;
                    let big_q = q2 + k2;
                    let at = (q / k).atan();
                    out.omega += a2;
                    out.dy += q2 * a2;
                    out.dyy += q2 * q2 * a2;
                    out.cross += k * q * a2;
                    out.jk += at * a2;
                    out.jk_dy += at * q2 * a2;
                    out.grad_phi += a2 / big_q;
                    out.grad_dy_phi += q2 * a2 / big_q;
                }
            }
            Repr::Sine(s) => {
                for (b, &kap) in coef.iter().zip(&s.kappa) {
                    let a2 = b.norm_sqr() * s.half_length;
                    let kap2 = kap * kap;
                    out.omega += a2;
                    out.dy += kap2 * a2;
                    out.dyy += kap2 * kap2 * a2;
                    out.grad_phi += a2 / (kap2 + k2);
                    out.grad_dy_phi += kap2 * a2 / (kap2 + k2);
                }
                if out.omega > 0.0 {
                    out.cross = self.sine_cross(s, coef, coef).re;
                    let nodal = s.transform.synthesize(coef);
                    let dy = s.transform.cosine_synthesize(&scale_by(coef, &s.kappa));
                    out.jk = s.jk.jk_form(&nodal);
                    out.jk_dy = s.jk.jk_form(&dy);
                }
            }
        }
        out
    }

    /// `⟨ikf, ∂_y g⟩` for sine coefficient vectors.
    fn sine_cross(&self, s: &SineRepr, f: &[C64], g: &[C64]) -> C64 {
        let n = s.kappa.len();
        let mut acc = C64::new(0.0, 0.0);
        for p in 1..n - 1 {
            if f[p] == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &s.cross[p * n..(p + 1) * n];
            let mut inner = C64::new(0.0, 0.0);
            // only p + q odd contributes
            let mut q = if p % 2 == 0 { 1 } else { 2 };
            while q < n - 1 {
                inner += g[q].conj() * row[q];
                q += 2;
            }
            acc += f[p] * inner;
        }
        acc * C64::new(0.0, self.k)
    }

    fn assemble(&self, q: &Quadratics) -> EnergyBreakdown {
        let c = &self.coeffs;
        let a = self.weights.alpha;
        let k2 = self.k * self.k;
        let e_k = q.omega + c.c_alpha * a * q.dy + self.beta_term() * q.cross + c.c_tau * q.jk + c.c_tau * c.c_alpha * a * q.jk_dy;
        EnergyBreakdown {
            k: self.k,
            nu: self.nu,
            e_k,
            d_gamma: self.nu * (q.dy + k2 * q.omega),
            d_alpha: self.nu * a * (q.dyy + k2 * q.dy),
            d_beta: self.lambda * q.omega,
            d_tau: k2 * q.grad_phi,
            d_tau_alpha: a * k2 * q.grad_dy_phi,
            omega_sq: q.omega,
            dy_omega_sq: q.dy,
            alpha: a,
        }
    }

    /// `E_k` and dissipation components of the state `coef` (shift ignored on sine grids).
    pub fn breakdown(&self, coef: &[C64], shift: f64) -> EnergyBreakdown {
        self.assemble(&self.quadratics(coef, shift))
    }

    /// `‖ω‖² + c_τ Re⟨𝔍ω, ω⟩`, the integrand of the supremum functional.
    pub fn sup_part(&self, coef: &[C64], shift: f64) -> f64 {
        let q = self.quadratics(coef, shift);
        q.omega + self.coeffs.c_tau * q.jk
    }

    /// `D_τ = k²‖∇_kφ‖²` alone, without the 𝔍-forms.
    pub fn damping(&self, coef: &[C64], shift: f64) -> f64 {
        let k2 = self.k * self.k;
        match &self.repr {
            Repr::Fourier(f) => {
                coef.iter().zip(&f.xi).map(|(w, &xi)| w.norm_sqr() / ((xi - shift).powi(2) + k2)).sum::<f64>() * f.scale * k2
            }
            Repr::Sine(s) => {
                coef.iter().zip(&s.kappa).map(|(b, &kap)| b.norm_sqr() / (kap * kap + k2)).sum::<f64>() * s.half_length * k2
            }
        }
    }

    /// Time derivative of `E_k` along `ċoef = dot` with the shift moving at `shift_rate`.
    pub fn derivative(&self, coef: &[C64], dot: &[C64], shift: f64, shift_rate: f64) -> f64 {
        match &self.repr {
            Repr::Fourier(f) => {
                let mut acc = 0.0;
                for ((w, wd), &xi) in coef.iter().zip(dot).zip(&f.xi) {
                    let q = xi - shift;
                    let a2 = w.norm_sqr();
                    let explicit = if a2 > 0.0 { -shift_rate * self.density_slope(q) * a2 } else { 0.0 };
                    acc += explicit + 2.0 * self.density(q) * (w.conj() * wd).re;
                }
                acc * f.scale
            }
            Repr::Sine(s) => {
                let c = &self.coeffs;
                let a = self.weights.alpha;
                let mut acc = 0.0;
                for ((b, bd), &kap) in coef.iter().zip(dot).zip(&s.kappa) {
                    acc += 2.0 * (1.0 + c.c_alpha * a * kap * kap) * (b.conj() * bd).re * s.half_length;
                }
                let bt = self.beta_term();
                if bt != 0.0 {
                    acc += bt * (self.sine_cross(s, dot, coef).re + self.sine_cross(s, coef, dot).re);
                }
                let nodal = s.transform.synthesize(coef);
                let nodal_dot = s.transform.synthesize(dot);
                let dy = s.transform.cosine_synthesize(&scale_by(coef, &s.kappa));
                let dy_dot = s.transform.cosine_synthesize(&scale_by(dot, &s.kappa));
                acc += 2.0 * c.c_tau * s.jk.jk_bilinear(&nodal, &nodal_dot).re;
                acc += 2.0 * c.c_tau * c.c_alpha * a * s.jk.jk_bilinear(&dy, &dy_dot).re;
                acc
            }
        }
    }
}

fn scale_by(v: &[C64], s: &[f64]) -> Vec<C64> {
    v.iter().zip(s).map(|(a, b)| a * b).collect()
}

/// Energy breakdown of a single mode state, building a fresh evaluator.
pub fn mode_energy(state: &crate::linear::ModeState, coeffs: &HypoCoefficients, kind: DomainKind) -> Result<EnergyBreakdown> {
    if kind != state.spec.kind {
        return Err(Error::InvalidArgument(format!("state lives on {}, not {}", state.spec.kind.name(), kind.name())));
    }
    let eval = ModeEnergy::new(kind, &state.grid, state.spec.nu, state.k, *coeffs)?;
    Ok(eval.breakdown(&state.coeffs, state.shift()))
}

/// Time weight of mode `k` in the global energy: `⟨cλt⟩^{2J}/M_k(t) ⟨k⟩^{2m}` on
/// plane-type domains and `e^{2cλt}⟨k⟩^{2m}` on the channel.
pub fn energy_weight(family: RateFamily, nu: f64, k: f64, c: &HypoCoefficients, t: f64) -> f64 {
    let sobolev = (1.0 + k * k).powf(c.m);
    let lam = lambda_unchecked(family, nu, k);
    let u = c.c * lam * t;
    match family {
        RateFamily::Plane => (1.0 + u * u).powf(c.j) / ghost_from_rate(lam, c.c, c.j, t) * sobolev,
        RateFamily::Channel => (2.0 * u).exp() * sobolev,
    }
}

/// One represented mode at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSample {
    pub k: f64,
    pub breakdown: EnergyBreakdown,
    /// `‖ω_k‖² + c_τ Re⟨𝔍ω_k, ω_k⟩`
    pub sup_part: f64,
}

const COMPONENTS: [&str; 5] = ["gamma", "alpha", "beta", "tau", "tau_alpha"];

/// Instantaneous integrands of the dissipation functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Integrands {
    t: f64,
    d1: f64,
    components: [f64; 5],
    /// Per-mode `(D_γ, D_τ)` for the supremum functionals.
    per_mode: Vec<(f64, f64, f64)>,
}

/// Running time integrals of the dissipation functionals, accumulated with the trapezoid rule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DissipationHistory {
    last: Option<Integrands>,
    pub d1: f64,
    pub components: [f64; 5],
    /// `(k, ∫D_γ, ∫D_τ)` per represented mode.
    pub per_mode: Vec<(f64, f64, f64)>,
    pub samples: usize,
}

impl DissipationHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add the integrands at time `t`; `t` must not decrease.
    pub fn record(&mut self, t: f64, samples: &[ModeSample], bin_width: f64, family: RateFamily, c: &HypoCoefficients) -> Result<()> {
        let mut now = Integrands { t, d1: 0.0, components: [0.0; 5], per_mode: Vec::with_capacity(samples.len()) };
        for s in samples.iter().filter(|s| s.k != 0.0) {
            let b = &s.breakdown;
            let w = energy_weight(family, b.nu, s.k, c, t) * bin_width;
            let comps = [b.d_gamma, b.d_alpha, b.d_beta, b.d_tau, b.d_tau_alpha];
            now.d1 += w * b.dissipation(c);
            for (acc, v) in now.components.iter_mut().zip(comps) {
                *acc += w * v;
            }
            now.per_mode.push((s.k, b.d_gamma, b.d_tau));
        }
        match &self.last {
            None => {
                self.per_mode = now.per_mode.iter().map(|&(k, _, _)| (k, 0.0, 0.0)).collect();
            }
            Some(prev) => {
                let dt = t - prev.t;
                if dt < 0.0 {
                    return Err(Error::InvalidArgument(format!("history time went backwards: {} -> {t}", prev.t)));
                }
                if prev.per_mode.len() != now.per_mode.len() {
                    return Err(Error::InvalidArgument("mode ladder changed between records".into()));
                }
                self.d1 += 0.5 * dt * (prev.d1 + now.d1);
                for i in 0..5 {
                    self.components[i] += 0.5 * dt * (prev.components[i] + now.components[i]);
                }
                for ((acc, p), n) in self.per_mode.iter_mut().zip(&prev.per_mode).zip(&now.per_mode) {
                    acc.1 += 0.5 * dt * (p.1 + n.1);
                    acc.2 += 0.5 * dt * (p.2 + n.2);
                }
            }
        }
        self.last = Some(now);
        self.samples += 1;
        Ok(())
    }

    pub fn last_time(&self) -> Option<f64> {
        self.last.as_ref().map(|l| l.t)
    }
}

/// Global energy and dissipation functionals at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalEnergyReport {
    pub time: f64,
    pub e1: f64,
    pub e2: f64,
    pub e_total: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_total: f64,
    /// Component dissipations, keyed `gamma`, `alpha`, `beta`, `tau`, `tau_alpha`,
    /// and (plane-type domains) `gamma_2`, `tau_2`.
    pub d_star: BTreeMap<String, f64>,
}

/// Assemble the global functionals from per-mode samples and the running history.
///
/// The k-integral is a Riemann sum with weight `bin_width`; `k = 0` is excluded.
/// The supremum functionals exist on plane-type domains only.
pub fn global_energy(
    samples: &[ModeSample],
    history: &DissipationHistory,
    bin_width: f64,
    kind: DomainKind,
    c: &HypoCoefficients,
    t: f64,
) -> Result<GlobalEnergyReport> {
    let Some(last) = history.last_time() else {
        return Err(Error::InvalidArgument("dissipation history is empty".into()));
    };
    if (last - t).abs() > 1e-12 * t.abs().max(1.0) {
        return Err(Error::InvalidArgument(format!("history recorded up to t={last}, asked for t={t}")));
    }
    let family = kind.rate_family();
    let mut e1 = 0.0;
    let mut e2: f64 = 0.0;
    for s in samples.iter().filter(|s| s.k != 0.0) {
        e1 += energy_weight(family, s.breakdown.nu, s.k, c, t) * s.breakdown.e_k * bin_width;
        e2 = e2.max(s.sup_part);
    }
    let mut d_star: BTreeMap<String, f64> =
        COMPONENTS.iter().zip(history.components).map(|(n, v)| (n.to_string(), v)).collect();
    let (e2, d2) = if family == RateFamily::Plane {
        let g2 = history.per_mode.iter().map(|m| m.1).fold(0.0, f64::max);
        let t2 = history.per_mode.iter().map(|m| m.2).fold(0.0, f64::max);
        let d2 = history.per_mode.iter().map(|m| m.1 + c.c_tau * m.2).fold(0.0, f64::max);
        d_star.insert("gamma_2".into(), g2);
        d_star.insert("tau_2".into(), t2);
        (e2, d2)
    } else {
        (0.0, 0.0)
    };
    Ok(GlobalEnergyReport {
        time: t,
        e1,
        e2,
        e_total: e1 + e2,
        d1: history.d1,
        d2,
        d_total: history.d1 + d2,
        d_star,
    })
}

/// Which norm the threshold constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Weighted Sobolev norm plus `‖ω_in,k‖_{L^∞_k L²_y}`.
    PlaneWithLinfty,
    ChannelSobolevOnly,
}

impl NormKind {
    pub fn for_domain(kind: DomainKind) -> Self {
        match kind {
            DomainKind::Channel => NormKind::ChannelSobolevOnly,
            _ => NormKind::PlaneWithLinfty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub delta: f64,
    pub norm_kind: NormKind,
}

impl ThresholdSpec {
    pub fn epsilon(&self, nu: f64) -> Result<f64> {
        threshold_epsilon(nu, self.delta, self.norm_kind)
    }
}

/// `δ ν^{1/2} / (1 + ln(1/ν)^{1/2})`.
pub fn threshold_epsilon(nu: f64, delta: f64, _kind: NormKind) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::ViscosityOutOfRange(nu));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    Ok(delta * nu.sqrt() / (1.0 + (1.0 / nu).ln().sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_grid, DomainSpec};
    use crate::multipliers::equivalence_constants;
    use crate::spectral::PeriodicFft;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn plane_grid() -> YGrid {
        build_grid(&DomainSpec::plane(0.01, 20.0).unwrap(), 256).unwrap()
    }

    fn channel_grid(n: usize) -> YGrid {
        build_grid(&DomainSpec::channel(0.01).unwrap(), n).unwrap()
    }

    fn fourier_of(grid: &YGrid, f: impl Fn(f64) -> C64) -> Vec<C64> {
        let mut buf: Vec<C64> = grid.nodes.iter().map(|&y| f(y)).collect();
        PeriodicFft::new(grid.len()).forward(&mut buf);
        buf
    }

    fn random_sine(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let mut b = vec![C64::new(0.0, 0.0); n];
        for (p, v) in b.iter_mut().enumerate().take(n - 1).skip(1) {
            let decay = 1.0 / (1.0 + (p as f64 / 6.0).powi(4));
            *v = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * decay;
        }
        b
    }

    #[test]
    fn zero_state_gives_zero() {
        let g = channel_grid(33);
        let e = ModeEnergy::new(DomainKind::Channel, &g, 0.01, 1.0, HypoCoefficients::default()).unwrap();
        let b = e.breakdown(&vec![C64::new(0.0, 0.0); 33], 0.0);
        assert_eq!(b.e_k, 0.0);
        assert_eq!(b.dissipation(&HypoCoefficients::default()), 0.0);
    }

    #[test]
    fn degenerate_coefficients_give_l2_norm() {
        let c = HypoCoefficients { c_alpha: 0.0, c_beta: 0.0, c_tau: 0.0, ..Default::default() };
        let g = plane_grid();
        let e = ModeEnergy::new(DomainKind::Plane, &g, 0.01, 0.5, c).unwrap();
        let coef = fourier_of(&g, |y| C64::new((-y * y).exp(), 0.0));
        let b = e.breakdown(&coef, 0.0);
        // ∫ e^{−2y²} dy = sqrt(π/2)
        assert!((b.e_k - (PI / 2.0).sqrt()).abs() < 1e-12);
        assert!((b.omega_sq - b.e_k).abs() < 1e-15);
    }

    #[test]
    fn plane_quadratics_match_physical_space() {
        let g = plane_grid();
        let k = 0.7;
        let e = ModeEnergy::new(DomainKind::Plane, &g, 0.01, k, HypoCoefficients::default()).unwrap();
        let coef = fourier_of(&g, |y| C64::new((-y * y).exp(), 0.0));
        let b = e.breakdown(&coef, 0.0);
        // ∫ |∂_y e^{−y²}|² = ∫ 4y² e^{−2y²} = sqrt(π/2)
        assert!((b.dy_omega_sq - (PI / 2.0).sqrt()).abs() < 1e-12);
        let expect = 0.01 * ((PI / 2.0).sqrt() + k * k * (PI / 2.0).sqrt());
        assert!((b.d_gamma - expect).abs() < 1e-12);
    }

    #[test]
    fn shift_matches_sheared_profile() {
        // E_k of W with shift s equals E_k of e^{−isy}W with shift 0
        let g = plane_grid();
        let e = ModeEnergy::new(DomainKind::Plane, &g, 0.01, 1.3, HypoCoefficients::default()).unwrap();
        let h = g.spacing();
        let s = 2.0 * PI / (g.len() as f64 * h) * 5.0;
        let w = fourier_of(&g, |y| C64::new((-y * y / 2.0).exp(), 0.0));
        let sheared = fourier_of(&g, |y| C64::from_polar((-y * y / 2.0).exp(), -s * y));
        let a = e.breakdown(&w, s);
        let b = e.breakdown(&sheared, 0.0);
        assert!((a.e_k - b.e_k).abs() < 1e-12 * a.e_k.abs());
        assert!((a.d_tau - b.d_tau).abs() < 1e-12 * a.d_tau);
    }

    #[test]
    fn sine_cross_term_matches_quadrature() {
        let g = channel_grid(129);
        let k = 0.9;
        let c = HypoCoefficients { c_alpha: 0.0, c_tau: 0.0, c_beta: 1.0, ..Default::default() };
        let e = ModeEnergy::new(DomainKind::Channel, &g, 0.01, k, c).unwrap();
        // ω = sin(π(y+1)/2) + i sin(π(y+1)): Re⟨ikω, ω'⟩ by direct quadrature
        let f = |y: f64| C64::new((PI * (y + 1.0) / 2.0).sin(), (PI * (y + 1.0)).sin());
        let df = |y: f64| C64::new(PI / 2.0 * (PI * (y + 1.0) / 2.0).cos(), PI * (PI * (y + 1.0)).cos());
        let nodal: Vec<C64> = g.nodes.iter().map(|&y| f(y)).collect();
        let coef = SineTransform::new(129).analyze(&nodal);
        let rule = crate::quadrature::UnitRule::gauss(40);
        let oracle = rule.integrate(-1.0, 1.0, |y| (C64::new(0.0, k) * f(y) * df(y).conj()).re);
        let b = e.breakdown(&coef, 0.0);
        let beta = e.weights.beta;
        assert!(((b.e_k - b.omega_sq) / beta - oracle).abs() < 1e-10, "{} vs {oracle}", (b.e_k - b.omega_sq) / beta);
    }

    #[test]
    fn channel_low_k_drops_cross_term_but_keeps_d_beta() {
        let nu = 0.01;
        let k = nu / 2.0;
        let g = channel_grid(65);
        let c = HypoCoefficients { c_alpha: 0.0, c_tau: 0.0, ..Default::default() };
        let e = ModeEnergy::new(DomainKind::Channel, &g, nu, k, c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = random_sine(65, &mut rng);
        let br = e.breakdown(&b, 0.0);
        assert!((br.e_k - br.omega_sq).abs() < 1e-15 * br.omega_sq);
        assert!((c.c_beta * br.d_beta - c.c_beta * nu * br.omega_sq).abs() < 1e-15);
    }

    #[test]
    fn norm_equivalence_on_random_states() {
        let c = HypoCoefficients::default();
        let (lo, hi) = equivalence_constants(&c, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = channel_grid(65);
        for &k in &[0.003, 0.05, 1.0, 20.0] {
            let e = ModeEnergy::new(DomainKind::Channel, &g, 0.01, k, c).unwrap();
            for _ in 0..5 {
                let b = e.breakdown(&random_sine(65, &mut rng), 0.0);
                let r = b.reference_norm(&c);
                assert!(b.e_k >= lo * r && b.e_k <= hi * r, "k={k}: {} not in [{}, {}]", b.e_k, lo * r, hi * r);
            }
        }
        let g = plane_grid();
        for &k in &[0.003, 0.05, 1.0, 20.0] {
            let e = ModeEnergy::new(DomainKind::Plane, &g, 0.01, k, c).unwrap();
            for _ in 0..5 {
                let s = rng.gen::<f64>() * 3.0;
                let coef = fourier_of(&g, |y| C64::new((-(y - s).powi(2)).exp(), s * (-(y * y)).exp()));
                let b = e.breakdown(&coef, 0.0);
                let r = b.reference_norm(&c);
                assert!(b.e_k >= lo * r && b.e_k <= hi * r);
            }
        }
    }

    #[test]
    fn gamma_dissipation_controls_alpha_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = channel_grid(65);
        for &(nu, k) in &[(0.01, 0.001), (0.01, 0.5), (0.001, 10.0)] {
            let e = ModeEnergy::new(DomainKind::Channel, &g, nu, k, HypoCoefficients::default()).unwrap();
            let b = e.breakdown(&random_sine(65, &mut rng), 0.0);
            assert!(b.d_gamma >= e.lambda * b.alpha * b.dy_omega_sq);
        }
    }

    #[test]
    fn channel_poincare() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = channel_grid(65);
        let e = ModeEnergy::new(DomainKind::Channel, &g, 0.01, 1.0, HypoCoefficients::default()).unwrap();
        for _ in 0..10 {
            let b = e.breakdown(&random_sine(65, &mut rng), 0.0);
            assert!(b.omega_sq <= b.dy_omega_sq);
        }
    }

    #[test]
    fn derivative_matches_finite_difference_of_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = channel_grid(65);
        let e = ModeEnergy::new(DomainKind::Channel, &g, 0.01, 0.8, HypoCoefficients::default()).unwrap();
        let b = random_sine(65, &mut rng);
        let d = random_sine(65, &mut rng);
        let step = 1e-5;
        let plus: Vec<C64> = b.iter().zip(&d).map(|(x, y)| x + y * step).collect();
        let minus: Vec<C64> = b.iter().zip(&d).map(|(x, y)| x - y * step).collect();
        let fd = (e.breakdown(&plus, 0.0).e_k - e.breakdown(&minus, 0.0).e_k) / (2.0 * step);
        let exact = e.derivative(&b, &d, 0.0, 0.0);
        assert!((fd - exact).abs() < 1e-7 * exact.abs().max(1.0), "{fd} vs {exact}");

        let g = plane_grid();
        let e = ModeEnergy::new(DomainKind::Plane, &g, 0.01, 0.8, HypoCoefficients::default()).unwrap();
        let w = fourier_of(&g, |y| C64::new((-y * y).exp(), 0.0));
        let zero = vec![C64::new(0.0, 0.0); w.len()];
        let fd = (e.breakdown(&w, 0.3 + 1e-5).e_k - e.breakdown(&w, 0.3 - 1e-5).e_k) / 2e-5;
        let exact = e.derivative(&w, &zero, 0.3, 1.0);
        assert!((fd - exact).abs() < 1e-7 * exact.abs(), "{fd} vs {exact}");
    }

    #[test]
    fn threshold_examples() {
        let e = threshold_epsilon((-1.0f64).exp(), 1.0, NormKind::PlaneWithLinfty).unwrap();
        assert!((e - (-0.5f64).exp() / 2.0).abs() < 1e-12);
        let e = threshold_epsilon(1e-4, 1.0, NormKind::ChannelSobolevOnly).unwrap();
        let expect = 1e-2 / (1.0 + (4.0 * 10f64.ln()).sqrt());
        assert!((e - expect).abs() < 1e-15 && (e - 2.48e-3).abs() < 1e-5);
        assert!(threshold_epsilon(1.0, 1.0, NormKind::PlaneWithLinfty).is_err());
        let spec = ThresholdSpec { delta: 1.0, norm_kind: NormKind::PlaneWithLinfty };
        assert!(spec.epsilon(1e-3).unwrap() < spec.epsilon(1e-2).unwrap());
    }

    #[test]
    fn global_energy_single_mode_and_pairs() {
        let c = HypoCoefficients::default();
        let g = plane_grid();
        let k = 0.4;
        let w = fourier_of(&g, |y| C64::new((-y * y).exp(), 0.0));
        let mut samples = Vec::new();
        for kk in [k, -k] {
            let e = ModeEnergy::new(DomainKind::Plane, &g, 0.01, kk, c).unwrap();
            // ω_{−k} = conj(ω_k): conj in y-space flips the y-spectrum
            let coef: Vec<C64> = if kk > 0.0 { w.clone() } else { w.iter().map(|v| v.conj()).collect() };
            let b = e.breakdown(&coef, 0.0);
            samples.push(ModeSample { k: kk, breakdown: b, sup_part: e.sup_part(&coef, 0.0) });
        }
        let mut hist = DissipationHistory::new();
        hist.record(0.0, &samples[..1], 0.1, RateFamily::Plane, &c).unwrap();
        let rep = global_energy(&samples[..1], &hist, 0.1, DomainKind::Plane, &c, 0.0).unwrap();
        let expect = (1.0 + k * k).powf(c.m) * samples[0].breakdown.e_k * 0.1;
        assert!((rep.e1 - expect).abs() < 1e-14);
        assert_eq!(rep.d_total, 0.0);

        let mut hist = DissipationHistory::new();
        hist.record(0.0, &samples, 0.1, RateFamily::Plane, &c).unwrap();
        let rep = global_energy(&samples, &hist, 0.1, DomainKind::Plane, &c, 0.0).unwrap();
        assert!((samples[0].sup_part - samples[1].sup_part).abs() < 1e-12);
        assert!((rep.e2 - samples[0].sup_part).abs() < 1e-12);
        assert!((rep.e_total - rep.e1 - rep.e2).abs() < 1e-15);
    }

    #[test]
    fn history_trapezoid_and_errors() {
        let c = HypoCoefficients::default();
        let mut b = EnergyBreakdown::zero(1.0, 0.01);
        b.d_tau = 2.0;
        let s = [ModeSample { k: 1.0, breakdown: b, sup_part: 0.0 }];
        let mut h = DissipationHistory::new();
        assert!(global_energy(&s, &h, 1.0, DomainKind::Channel, &c, 0.0).is_err());
        h.record(0.0, &s, 1.0, RateFamily::Channel, &c).unwrap();
        h.record(1.0, &s, 1.0, RateFamily::Channel, &c).unwrap();
        let w0 = energy_weight(RateFamily::Channel, 0.01, 1.0, &c, 0.0);
        let w1 = energy_weight(RateFamily::Channel, 0.01, 1.0, &c, 1.0);
        let expect = 0.5 * (2.0 * w0 + 2.0 * w1);
        assert!((h.components[3] - expect).abs() < 1e-14);
        assert!(h.record(0.5, &s, 1.0, RateFamily::Channel, &c).is_err());
        let zero = [ModeSample { k: 0.0, breakdown: EnergyBreakdown::zero(0.0, 0.01), sup_part: 0.0 }];
        let mut h = DissipationHistory::new();
        h.record(0.0, &zero, 1.0, RateFamily::Channel, &c).unwrap();
        let rep = global_energy(&zero, &h, 1.0, DomainKind::Channel, &c, 0.0).unwrap();
        assert_eq!(rep.e_total, 0.0);
    }
}
