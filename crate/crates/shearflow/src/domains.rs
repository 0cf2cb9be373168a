//! Domain descriptions, discrete y-grids and the Green's functions of
//! `Δ_k = ∂_y² − k²` for each geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of the perturbation problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Plane,
    HalfPlane,
    Channel,
    BetaPlane,
}

impl DomainKind {
    /// Plane and β-plane share the whole-line y-direction.
    pub fn is_whole_line(self) -> bool {
        matches!(self, DomainKind::Plane | DomainKind::BetaPlane)
    }

    /// Rate multiplier family used for λ_k.
    pub fn rate_family(self) -> RateFamily {
        match self {
            DomainKind::Channel => RateFamily::Channel,
            _ => RateFamily::Plane,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Plane => "plane",
            DomainKind::HalfPlane => "half-plane",
            DomainKind::Channel => "channel",
            DomainKind::BetaPlane => "beta-plane",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "plane" => Ok(DomainKind::Plane),
            "half-plane" | "halfplane" => Ok(DomainKind::HalfPlane),
            "channel" => Ok(DomainKind::Channel),
            "beta-plane" | "betaplane" => Ok(DomainKind::BetaPlane),
            other => Err(Error::InvalidDomain(format!("unknown domain '{other}'"))),
        }
    }
}

/// Which decay multiplier applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateFamily {
    Plane,
    Channel,
}

/// Physical domain plus parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub nu: f64,
    pub coriolis_b: f64,
    /// Half-width for whole-line domains, length for the half-plane, 1 for the channel.
    pub y_extent: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, nu: f64, coriolis_b: f64, y_extent: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::ViscosityOutOfRange(nu));
        }
        match kind {
            DomainKind::BetaPlane if coriolis_b == 0.0 || !coriolis_b.is_finite() => {
                return Err(Error::InvalidDomain("beta-plane needs a nonzero Coriolis parameter".into()))
            }
            DomainKind::BetaPlane => {}
            _ if coriolis_b != 0.0 => {
                return Err(Error::InvalidDomain("Coriolis parameter only allowed on the beta-plane".into()))
            }
            _ => {}
        }
        let y_extent = if kind == DomainKind::Channel { 1.0 } else { y_extent };
        if !(y_extent > 0.0) || !y_extent.is_finite() {
            return Err(Error::InvalidDomain(format!("y extent must be positive, got {y_extent}")));
        }
        Ok(Self { kind, nu, coriolis_b, y_extent })
    }

    pub fn plane(nu: f64, ly: f64) -> Result<Self> {
        Self::new(DomainKind::Plane, nu, 0.0, ly)
    }

    pub fn half_plane(nu: f64, ly: f64) -> Result<Self> {
        Self::new(DomainKind::HalfPlane, nu, 0.0, ly)
    }

    pub fn channel(nu: f64) -> Result<Self> {
        Self::new(DomainKind::Channel, nu, 0.0, 1.0)
    }

    pub fn beta_plane(nu: f64, coriolis_b: f64, ly: f64) -> Result<Self> {
        Self::new(DomainKind::BetaPlane, nu, coriolis_b, ly)
    }

    /// Interval `[lo, hi]` occupied by the discrete domain.
    pub fn y_bounds(&self) -> (f64, f64) {
        match self.kind {
            DomainKind::Plane | DomainKind::BetaPlane => (-self.y_extent, self.y_extent),
            DomainKind::HalfPlane => (0.0, self.y_extent),
            DomainKind::Channel => (-1.0, 1.0),
        }
    }

    /// Largest |y| on the discrete domain.
    pub fn y_max(&self) -> f64 {
        let (lo, hi) = self.y_bounds();
        lo.abs().max(hi.abs())
    }
}

/// Spectral basis attached to a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridBasis {
    /// Periodic Fourier basis on a truncated interval; data must decay before the edges.
    FourierPeriodic,
    /// Sine series vanishing at both endpoints.
    SineDirichlet,
}

/// Discrete y-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct YGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub basis: GridBasis,
    pub resolution: usize,
    pub lo: f64,
    pub hi: f64,
}

impl YGrid {
    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Length of the underlying interval.
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

pub const MIN_RESOLUTION: usize = 8;
/// Minimum truncation extent for the unbounded directions.
pub const MIN_TRUNCATION: f64 = 10.0;

/// Build the grid matching `spec`.
///
/// Whole-line domains get `n` equispaced periodic nodes on `[−Ly, Ly)`.
/// Half-plane and channel get `n` nodes including both endpoints, where
/// the sine basis vanishes.
pub fn build_grid(spec: &DomainSpec, resolution: usize) -> Result<YGrid> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall { got: resolution, min: MIN_RESOLUTION });
    }
    if spec.kind != DomainKind::Channel && spec.y_extent < MIN_TRUNCATION {
        return Err(Error::InvalidDomain(format!(
            "truncation extent {} below {MIN_TRUNCATION}",
            spec.y_extent
        )));
    }
    let (lo, hi) = spec.y_bounds();
    let n = resolution;
    match spec.kind {
        DomainKind::Plane | DomainKind::BetaPlane => {
            let h = (hi - lo) / n as f64;
            let nodes = (0..n).map(|j| lo + j as f64 * h).collect();
            Ok(YGrid { nodes, weights: vec![h; n], basis: GridBasis::FourierPeriodic, resolution: n, lo, hi })
        }
        DomainKind::HalfPlane | DomainKind::Channel => {
            let h = (hi - lo) / (n - 1) as f64;
            let mut nodes: Vec<f64> = (0..n).map(|j| lo + j as f64 * h).collect();
            nodes[n - 1] = hi;
            let mut weights = vec![h; n];
            weights[0] = 0.5 * h;
            weights[n - 1] = 0.5 * h;
            Ok(YGrid { nodes, weights, basis: GridBasis::SineDirichlet, resolution: n, lo, hi })
        }
    }
}

/// `1 − e^{−x}` without cancellation.
#[inline]
pub(crate) fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Green's function of `Δ_k` for one geometry, in the normalization that
/// defines the 𝔍_k kernel.
///
/// On the whole line and half-line the kernel is twice the fundamental
/// solution, so `Δ_k (G ∗ f) = 2 f` there; on the channel it is the exact
/// Dirichlet Green's function. [`GreenKernel::inverse_scale`] returns that factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKernel {
    pub domain_kind: DomainKind,
    pub k: f64,
}

impl GreenKernel {
    #[inline]
    pub fn a(&self) -> f64 {
        self.k.abs()
    }

    /// Factor `s` with `Δ_k ∫ G f = s f`.
    pub fn inverse_scale(&self) -> f64 {
        match self.domain_kind {
            DomainKind::Channel => 1.0,
            _ => 2.0,
        }
    }

    /// `G_k(y, y')`.
    pub fn evaluate(&self, y: f64, yp: f64) -> f64 {
        let a = self.a();
        let d = (y - yp).abs();
        let (lo, hi) = if y < yp { (y, yp) } else { (yp, y) };
        match self.domain_kind {
            DomainKind::Plane | DomainKind::BetaPlane => -(-a * d).exp() / a,
            DomainKind::HalfPlane => {
                if lo <= 0.0 {
                    return 0.0;
                }
                -(-a * d).exp() * one_minus_exp_neg(2.0 * a * lo) / a
            }
            DomainKind::Channel => {
                if lo <= -1.0 || hi >= 1.0 {
                    return 0.0;
                }
                let p = one_minus_exp_neg(2.0 * a * (1.0 - hi)) * one_minus_exp_neg(2.0 * a * (1.0 + lo))
                    / one_minus_exp_neg(4.0 * a);
                -(-a * d).exp() * p / (2.0 * a)
            }
        }
    }

    /// `(∂_y + ∂_{y'}) G_k(y, y')`, the kernel of the commutator `[∂_y, 𝔍_k]`
    /// before division by `2i(y − y')`. Identically zero on the whole line.
    pub fn commutator_kernel(&self, y: f64, yp: f64) -> f64 {
        let a = self.a();
        match self.domain_kind {
            DomainKind::Plane | DomainKind::BetaPlane => 0.0,
            DomainKind::HalfPlane => -2.0 * (-a * (y + yp)).exp(),
            DomainKind::Channel => {
                // sinh(a σ) / sinh(2a) in overflow-free form
                let s = y + yp;
                let m = s.abs();
                s.signum() * (a * (m - 2.0)).exp() * one_minus_exp_neg(2.0 * a * m) / one_minus_exp_neg(4.0 * a)
            }
        }
    }
}

/// Green's kernel for `spec` at wavenumber `k ≠ 0`.
pub fn green_kernel(spec: &DomainSpec, k: f64) -> Result<GreenKernel> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::ZeroWavenumber);
    }
    Ok(GreenKernel { domain_kind: spec.kind, k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_grid_hits_both_walls() {
        let g = build_grid(&DomainSpec::channel(0.1).unwrap(), 129).unwrap();
        assert_eq!(g.len(), 129);
        assert_eq!(g.nodes[0], -1.0);
        assert_eq!(g.nodes[128], 1.0);
        assert_eq!(g.basis, GridBasis::SineDirichlet);
    }

    #[test]
    fn plane_grid_covers_truncation() {
        let g = build_grid(&DomainSpec::plane(0.1, 20.0).unwrap(), 256).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.nodes[0], -20.0);
        assert!((g.nodes[255] + g.spacing() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn half_plane_grid_starts_at_wall() {
        let g = build_grid(&DomainSpec::half_plane(0.1, 20.0).unwrap(), 256).unwrap();
        assert_eq!(g.nodes[0], 0.0);
        assert_eq!(g.basis, GridBasis::SineDirichlet);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = DomainSpec::channel(0.1).unwrap();
        assert!(matches!(build_grid(&spec, 7), Err(Error::ResolutionTooSmall { .. })));
        assert!(DomainSpec::plane(0.1, -1.0).is_err());
        assert!(DomainSpec::plane(1.5, 20.0).is_err());
        assert!(DomainSpec::new(DomainKind::BetaPlane, 0.1, 0.0, 20.0).is_err());
        assert!(DomainSpec::new(DomainKind::Plane, 0.1, 1.0, 20.0).is_err());
        assert!(green_kernel(&spec, 0.0).is_err());
    }

    #[test]
    fn plane_kernel_value() {
        let g = green_kernel(&DomainSpec::plane(0.1, 20.0).unwrap(), 1.0).unwrap();
        assert_eq!(g.evaluate(0.0, 0.0), -1.0);
    }

    #[test]
    fn half_plane_kernel_value() {
        let g = green_kernel(&DomainSpec::half_plane(0.1, 20.0).unwrap(), 2.0).unwrap();
        // e^{-k|y-y'|} - e^{-k(y+y')} expanded at y = y' = 1
        let expanded = -(1.0 - (-4.0f64).exp()) / 2.0;
        assert!((g.evaluate(1.0, 1.0) - expanded).abs() < 1e-15);
        let direct = -((-2.0 * 0.7f64).exp() - (-2.0 * 2.3f64).exp()) / 2.0;
        assert!((g.evaluate(1.5, 0.8) - direct).abs() < 1e-15);
    }

    #[test]
    fn channel_kernel_matches_hyperbolic_form() {
        let spec = DomainSpec::channel(0.1).unwrap();
        for &k in &[0.3, 1.0, 4.0] {
            let g = green_kernel(&spec, k).unwrap();
            for &(y, yp) in &[(-0.5, 0.2), (0.7, -0.1), (0.3, 0.3)] {
                let (lo, hi) = if y < yp { (y, yp) } else { (yp, y) };
                let reference = -((k * (1.0 - hi)).sinh() * (k * (1.0 + lo)).sinh()) / (k * (2.0 * k).sinh());
                assert!((g.evaluate(y, yp) - reference).abs() < 1e-14);
            }
        }
        let g = green_kernel(&spec, 1.0).unwrap();
        for j in 0..=20 {
            let yp = -1.0 + 0.1 * j as f64;
            assert_eq!(g.evaluate(-1.0, yp), 0.0);
            assert_eq!(g.evaluate(yp, 1.0), 0.0);
        }
    }

    #[test]
    fn channel_commutator_kernel_is_sinh_ratio() {
        let spec = DomainSpec::channel(0.1).unwrap();
        let g = green_kernel(&spec, 0.8).unwrap();
        for &(y, yp) in &[(-0.5f64, 0.2f64), (0.7, 0.9), (-0.9, -0.4)] {
            let reference = (0.8 * (y + yp)).sinh() / (1.6f64).sinh();
            assert!((g.commutator_kernel(y, yp) - reference).abs() < 1e-14);
        }
    }

    #[test]
    fn channel_commutator_kernel_is_the_symmetric_derivative() {
        let spec = DomainSpec::channel(0.1).unwrap();
        let g = green_kernel(&spec, 1.3).unwrap();
        let e = 1e-5;
        for &(y, yp) in &[(-0.5, 0.2), (0.6, -0.3)] {
            let fd = (g.evaluate(y + e, yp + e) - g.evaluate(y - e, yp - e)) / (2.0 * e);
            assert!((fd - g.commutator_kernel(y, yp)).abs() < 1e-8);
        }
    }

    #[test]
    fn kernels_are_symmetric() {
        for spec in [
            DomainSpec::plane(0.1, 20.0).unwrap(),
            DomainSpec::half_plane(0.1, 20.0).unwrap(),
            DomainSpec::channel(0.1).unwrap(),
        ] {
            let g = green_kernel(&spec, 0.7).unwrap();
            for &(y, yp) in &[(0.1, 0.5), (0.9, 0.2), (0.33, 0.77)] {
                assert_eq!(g.evaluate(y, yp), g.evaluate(yp, y));
            }
        }
    }
}
