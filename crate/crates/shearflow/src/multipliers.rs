//! Decay multipliers `λ_k`, hypocoercive weights, the ghost multiplier and
//! coefficient feasibility checks.

use serde::{Deserialize, Serialize};

use crate::domains::RateFamily;
use crate::error::{Error, Result};

fn check_nu_k(nu: f64, k: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::ViscosityOutOfRange(nu));
    }
    if k == 0.0 || !k.is_finite() {
        return Err(Error::ZeroWavenumber);
    }
    Ok(())
}

/// Decay rate `λ(ν, k)`.
pub fn eval_lambda(family: RateFamily, nu: f64, k: f64) -> Result<f64> {
    check_nu_k(nu, k)?;
    Ok(lambda_unchecked(family, nu, k))
}

pub(crate) fn lambda_unchecked(family: RateFamily, nu: f64, k: f64) -> f64 {
    let a = k.abs();
    if a >= nu {
        nu.cbrt() * a.powf(2.0 / 3.0)
    } else {
        match family {
            RateFamily::Plane => a * a / nu,
            RateFamily::Channel => nu,
        }
    }
}

/// Hypocoercive weights at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    /// False where the channel energy drops the cross term (|k| < ν).
    pub beta_in_energy: bool,
}

/// `(α, β, A, B)` for one wavenumber.
pub fn eval_weights(nu: f64, k: f64, family: RateFamily) -> Result<Weights> {
    check_nu_k(nu, k)?;
    Ok(weights_unchecked(nu, k, family))
}

pub(crate) fn weights_unchecked(nu: f64, k: f64, family: RateFamily) -> Weights {
    let ak = k.abs();
    let high = ak >= nu;
    let a = if high { nu.cbrt() / ak.cbrt() } else { 1.0 };
    let b = match (family, high) {
        (_, true) | (RateFamily::Channel, false) => nu.powf(1.0 / 6.0) * ak.powf(-2.0 / 3.0),
        (RateFamily::Plane, false) => nu.powf(-0.5),
    };
    Weights { alpha: a * a, beta: b * b, a, b, beta_in_energy: high || family == RateFamily::Plane }
}

/// `∫₀^u s²/(1+s²)² ds`.
pub fn ghost_antiderivative(u: f64) -> f64 {
    0.5 * (u.atan() - u / (1.0 + u * u))
}

/// Ghost multiplier `M_k(t)` solving `Ṁ = cJ²λ (cλt)²/⟨cλt⟩⁴ M`, `M(0) = 1`,
/// with the plane-family rate.
pub fn ghost_multiplier(nu: f64, k: f64, c: f64, j: f64, t: f64) -> Result<f64> {
    check_nu_k(nu, k)?;
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let lam = lambda_unchecked(RateFamily::Plane, nu, k);
    Ok(ghost_from_rate(lam, c, j, t))
}

pub(crate) fn ghost_from_rate(lam: f64, c: f64, j: f64, t: f64) -> f64 {
    (j * j * ghost_antiderivative(c * lam * t)).exp()
}

/// Energy coefficients. Missing fields deserialize to the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HypoCoefficients {
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_tau: f64,
    /// Decay constant in the weights `⟨cλt⟩^J` and `e^{cλt}`.
    pub c: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub m: f64,
    #[serde(rename = "K0")]
    pub k0: f64,
}

/// Decay constant obtained from the calibration sweep (largest passing value, halved).
pub const CALIBRATED_C: f64 = 0.0156;

impl Default for HypoCoefficients {
    fn default() -> Self {
        Self {
            c_alpha: 1.0 / 1024.0,
            c_beta: 1.0 / 32.0,
            c_tau: 1.0 / 4096.0,
            c: CALIBRATED_C,
            j: 1.0,
            m: 0.75,
            k0: 64.0,
        }
    }
}

/// Whether a violated constraint blocks experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintRole {
    /// Sizing, positivity and norm-equivalence requirements.
    Structural,
    /// Young-absorption ratios of the proof; the certificate checks the resulting inequality directly.
    Absorption,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
    pub role: ConstraintRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checks: Vec<ConstraintCheck>,
    /// `max(K₀, 32(1 + ‖𝔍‖))`.
    pub k0_effective: f64,
    pub jk_norm: f64,
    pub c0: f64,
    pub c1: f64,
    /// Lower equivalence constant: `c_lo (‖ω‖² + c_α α‖∂ω‖²) ≤ E_k`.
    pub c_lo: f64,
    /// Upper equivalence constant: `E_k ≤ c_hi (‖ω‖² + c_α α‖∂ω‖²)`.
    pub c_hi: f64,
}

impl FeasibilityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn structural_ok(&self) -> bool {
        self.checks.iter().filter(|c| c.role == ConstraintRole::Structural).all(|c| c.holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    /// Error naming the first violated structural constraint.
    pub fn require_structural(&self) -> Result<()> {
        match self.checks.iter().find(|c| c.role == ConstraintRole::Structural && !c.holds) {
            None => Ok(()),
            Some(c) => Err(Error::Infeasible(format!("{} (value {:e}, bound {:e})", c.name, c.value, c.bound))),
        }
    }
}

/// Norm-equivalence constants for a given bound on `‖𝔍_k‖`.
pub fn equivalence_constants(c: &HypoCoefficients, jk_norm: f64) -> (f64, f64) {
    let tj = c.c_tau * jk_norm;
    let lo = (1.0 - tj - c.c_beta * c.c_beta / (2.0 * c.c_alpha * (1.0 - tj))).min(0.5 * (1.0 - tj));
    let hi = (1.0 + tj + c.c_beta * c.c_beta / (2.0 * c.c_alpha)).max(1.5 + tj);
    (lo, hi)
}

/// Feasibility report using the whole-line bound `‖𝔍_k‖ ≤ π/2`.
pub fn validate_coefficients(c: &HypoCoefficients) -> FeasibilityReport {
    validate_coefficients_with_norm(c, std::f64::consts::FRAC_PI_2)
}

pub fn validate_coefficients_with_norm(c: &HypoCoefficients, jk_norm: f64) -> FeasibilityReport {
    let k0 = c.k0.max(32.0 * (1.0 + jk_norm));
    let mut checks = Vec::new();
    let mut push = |name: &str, value: f64, bound: f64, holds: bool, role| {
        checks.push(ConstraintCheck { name: name.to_string(), value, bound, holds, role });
    };
    use ConstraintRole::*;
    let positive = c.c_alpha > 0.0 && c.c_beta > 0.0 && c.c_tau > 0.0 && c.c > 0.0;
    push("coefficients positive", positive as u8 as f64, 1.0, positive, Structural);
    push("c_tau < 1/(32 K0)", c.c_tau, 1.0 / (32.0 * k0), c.c_tau < 1.0 / (32.0 * k0), Structural);
    let ca_bound = (1.0 / (8.0 * k0)).min(1.0);
    push("c_alpha < min(1/(8 K0), 1)", c.c_alpha, ca_bound, c.c_alpha < ca_bound, Structural);
    let r1 = c.c_alpha / c.c_beta;
    push("c_alpha/c_beta < 1/(25 K0)", r1, 1.0 / (25.0 * k0), r1 < 1.0 / (25.0 * k0), Absorption);
    let r2 = c.c_beta * c.c_beta / (2.0 * c.c_alpha);
    let b2 = 1.0 / (25.0 * k0 * k0);
    push("c_beta^2/(2 c_alpha) < 1/(25 K0^2)", r2, b2, r2 < b2, Absorption);
    let eq_bound = 0.25 * c.c_alpha + 0.25 * (1.0 - c.c_tau);
    push("c_beta^2 <= c_alpha/4 + (1-c_tau)/4", c.c_beta * c.c_beta, eq_bound, c.c_beta * c.c_beta <= eq_bound, Structural);
    push("c_beta <= 1", c.c_beta, 1.0, c.c_beta <= 1.0, Structural);
    let tj = c.c_tau * jk_norm;
    let pos_bound = 2.0 * c.c_alpha * (1.0 - tj) * (1.0 - tj);
    push(
        "c_beta^2 < 2 c_alpha (1 - c_tau |J|)^2",
        c.c_beta * c.c_beta,
        pos_bound,
        c.c_beta * c.c_beta < pos_bound,
        Structural,
    );
    push("m in (1/2, 1)", c.m, 1.0, c.m > 0.5 && c.m < 1.0, Structural);
    push("J >= 1", c.j, 1.0, c.j >= 1.0, Structural);
    push("c in (0, 1)", c.c, 1.0, c.c > 0.0 && c.c < 1.0, Structural);
    let (c_lo, c_hi) = equivalence_constants(c, jk_norm);
    FeasibilityReport { checks, k0_effective: k0, jk_norm, c0: c.c_beta / (2.0 * c_hi), c1: 0.25, c_lo, c_hi }
}
