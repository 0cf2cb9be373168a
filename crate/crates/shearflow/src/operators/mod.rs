//! Discrete per-mode operators: `Δ_k` and its inverse, 𝔍_k on each geometry,
//! the commutator `[∂_y, 𝔍_k]`, and operator-norm estimation.

pub mod galerkin;
pub mod laplacian;
pub mod norm;
pub mod plane;

pub use galerkin::{GalerkinJk, MeshPolicy};
pub use laplacian::{apply_laplacian_k, derivative_y, solve_poisson_k};
pub use norm::{estimate_operator_norm, DenseOperator, LinearOperator, NormEstimate};
pub use plane::PlaneJk;

use crate::domains::{DomainKind, YGrid};
use crate::error::{Error, Result};
use crate::spectral::C64;

/// Spectral tail fraction above which a whole-line profile counts as unresolved.
pub const PLANE_TAIL_LIMIT: f64 = 1e-12;
/// Relative disagreement between a grid and its every-other-node subgrid that flags an unresolved profile.
pub const SUBGRID_LIMIT: f64 = 5e-2;

fn relative_gap(fine: &[C64], coarse: &[C64], stride: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, c) in coarse.iter().enumerate() {
        let f = fine[(i * stride).min(fine.len() - 1)];
        num += (f - c).norm_sqr();
        den += f.norm_sqr();
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

fn subgrid(nodes: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = nodes.iter().step_by(2).copied().collect();
    if nodes.len() % 2 == 0 {
        s.push(*nodes.last().unwrap());
    }
    s
}

fn galerkin_checked(kind: DomainKind, k: f64, grid: &YGrid, profile: &[C64], commutator: bool) -> Result<Vec<C64>> {
    let run = |nodes: &[f64], f: &[C64]| -> Result<Vec<C64>> {
        let g = GalerkinJk::new(kind, k, nodes)?;
        Ok(if commutator { g.apply_commutator(f) } else { g.apply(f) })
    };
    let fine = run(&grid.nodes, profile)?;
    let coarse_nodes = subgrid(&grid.nodes);
    if coarse_nodes.len() >= 3 {
        let mut coarse_f: Vec<C64> = profile.iter().step_by(2).copied().collect();
        if grid.len() % 2 == 0 {
            coarse_f.push(*profile.last().unwrap());
        }
        let coarse = run(&coarse_nodes, &coarse_f)?;
        let gap = relative_gap(&fine, &coarse, 2);
        if gap > SUBGRID_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "profile unresolved: grid and subgrid results differ by {gap:.3e}"
            )));
        }
    }
    Ok(fine)
}

/// 𝔍_k applied to nodal values on `grid`.
///
/// Whole-line grids use the direct quadrature path (see [`PlaneJk`]); the
/// half-line and channel use the Galerkin discretization on the grid nodes.
/// A self-consistency check rejects profiles the grid does not resolve.
pub fn apply_jk(kind: DomainKind, k: f64, grid: &YGrid, profile: &[C64]) -> Result<Vec<C64>> {
    if profile.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: profile.len() });
    }
    if kind.is_whole_line() {
        let jk = PlaneJk::new(grid, k)?;
        let tail = jk.spectral_tail(profile);
        if tail > PLANE_TAIL_LIMIT {
            return Err(Error::InvalidArgument(format!("profile unresolved: spectral tail {tail:.3e}")));
        }
        Ok(jk.apply_quadrature(profile))
    } else {
        galerkin_checked(kind, k, grid, profile, false)
    }
}

/// `[∂_y, 𝔍_k]` applied to nodal values; identically zero on the whole line.
pub fn apply_jk_commutator(kind: DomainKind, k: f64, grid: &YGrid, profile: &[C64]) -> Result<Vec<C64>> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    if profile.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: profile.len() });
    }
    if kind.is_whole_line() {
        return Ok(vec![C64::new(0.0, 0.0); profile.len()]);
    }
    galerkin_checked(kind, k, grid, profile, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_grid, DomainSpec};

    #[test]
    fn plane_commutator_vanishes() {
        let g = build_grid(&DomainSpec::plane(0.1, 20.0).unwrap(), 64).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new((-y * y).exp(), 0.0)).collect();
        let c = apply_jk_commutator(DomainKind::Plane, 1.0, &g, &f).unwrap();
        assert!(c.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn plane_rejects_rough_profile() {
        let g = build_grid(&DomainSpec::plane(0.1, 20.0).unwrap(), 64).unwrap();
        let f: Vec<C64> = (0..64).map(|i| C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        assert!(apply_jk(DomainKind::Plane, 1.0, &g, &f).is_err());
    }

    #[test]
    fn channel_apply_accepts_smooth_profile() {
        let g = build_grid(&DomainSpec::channel(0.1).unwrap(), 65).unwrap();
        let f: Vec<C64> =
            g.nodes.iter().map(|&y| C64::new((std::f64::consts::PI * (y + 1.0) / 2.0).sin(), 0.0)).collect();
        let out = apply_jk(DomainKind::Channel, 1.0, &g, &f).unwrap();
        assert_eq!(out.len(), 65);
    }
}
