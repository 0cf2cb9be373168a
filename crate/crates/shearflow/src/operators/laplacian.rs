use crate::domains::{GridBasis, YGrid};
use crate::error::{Error, Result};
use crate::spectral::{fft_frequencies, PeriodicFft, SineTransform, C64};

fn check_len(grid: &YGrid, profile: &[C64]) -> Result<()> {
    if profile.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), got: profile.len() });
    }
    Ok(())
}

/// Multiply the spectral representation of `profile` by `symbol(freq)`.
/// Periodic grids pass the signed frequency η, sine grids pass κ_p = πp/L.
fn spectral_multiply(grid: &YGrid, profile: &[C64], symbol: impl Fn(f64) -> f64) -> Vec<C64> {
    match grid.basis {
        GridBasis::FourierPeriodic => {
            let n = grid.len();
            let fft = PeriodicFft::new(n);
            let freqs = fft_frequencies(n, grid.spacing());
            let mut buf = profile.to_vec();
            fft.forward(&mut buf);
            for (v, &eta) in buf.iter_mut().zip(&freqs) {
                *v *= symbol(eta);
            }
            fft.inverse(&mut buf);
            buf
        }
        GridBasis::SineDirichlet => {
            let st = SineTransform::new(grid.len());
            let mut b = st.analyze(profile);
            let base = std::f64::consts::PI / grid.length();
            for (p, v) in b.iter_mut().enumerate() {
                *v *= symbol(base * p as f64);
            }
            st.synthesize(&b)
        }
    }
}

/// `(∂_y² − k²) f`, spectrally, with the grid's boundary conditions.
pub fn apply_laplacian_k(grid: &YGrid, k: f64, profile: &[C64]) -> Result<Vec<C64>> {
    check_len(grid, profile)?;
    Ok(spectral_multiply(grid, profile, |q| -(q * q + k * k)))
}

/// Solve `Δ_k φ = ω`; `φ` vanishes at the ends of a sine grid.
pub fn solve_poisson_k(grid: &YGrid, k: f64, omega: &[C64]) -> Result<Vec<C64>> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    check_len(grid, omega)?;
    Ok(spectral_multiply(grid, omega, |q| -1.0 / (q * q + k * k)))
}

/// `∂_y f` at the grid nodes. On sine grids this is the cosine series, so the
/// endpoint values are meaningful.
pub fn derivative_y(grid: &YGrid, profile: &[C64]) -> Result<Vec<C64>> {
    check_len(grid, profile)?;
    match grid.basis {
        GridBasis::FourierPeriodic => {
            let n = grid.len();
            let fft = PeriodicFft::new(n);
            let freqs = fft_frequencies(n, grid.spacing());
            let mut buf = profile.to_vec();
            fft.forward(&mut buf);
            for (m, v) in buf.iter_mut().enumerate() {
                // the Nyquist mode has no odd partner
                *v *= if 2 * m == n { C64::new(0.0, 0.0) } else { C64::new(0.0, freqs[m]) };
            }
            fft.inverse(&mut buf);
            Ok(buf)
        }
        GridBasis::SineDirichlet => {
            let st = SineTransform::new(grid.len());
            let mut b = st.analyze(profile);
            let base = std::f64::consts::PI / grid.length();
            for (p, v) in b.iter_mut().enumerate() {
                *v *= base * p as f64;
            }
            Ok(st.cosine_synthesize(&b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_grid, DomainSpec};
    use std::f64::consts::PI;

    fn rel(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn channel_eigenfunction() {
        let g = build_grid(&DomainSpec::channel(0.1).unwrap(), 129).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new((PI * (y + 1.0) / 2.0).sin(), 0.0)).collect();
        let lf = apply_laplacian_k(&g, 0.5, &f).unwrap();
        let expect: Vec<C64> = f.iter().map(|v| v * -((PI / 2.0).powi(2) + 0.25)).collect();
        assert!(rel(&lf, &expect) < 1e-10, "{}", rel(&lf, &expect));
        let phi = solve_poisson_k(&g, 1.0, &f).unwrap();
        let expect: Vec<C64> = f.iter().map(|v| v * (-1.0 / ((PI / 2.0).powi(2) + 1.0))).collect();
        assert!(rel(&phi, &expect) < 1e-12);
    }

    #[test]
    fn plane_gaussian_laplacian() {
        let g = build_grid(&DomainSpec::plane(0.1, 20.0).unwrap(), 512).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new((-y * y).exp(), 0.0)).collect();
        let lf = apply_laplacian_k(&g, 1.0, &f).unwrap();
        let expect: Vec<C64> =
            g.nodes.iter().map(|&y| C64::new((4.0 * y * y - 3.0) * (-y * y).exp(), 0.0)).collect();
        assert!(rel(&lf, &expect) < 1e-10);
    }

    #[test]
    fn round_trip_recovers_profile() {
        for spec in [DomainSpec::plane(0.1, 20.0).unwrap(), DomainSpec::half_plane(0.1, 20.0).unwrap()] {
            let g = build_grid(&spec, 256).unwrap();
            let f: Vec<C64> =
                g.nodes.iter().map(|&y| C64::new(y * (-(y - 3.0).powi(2)).exp(), (-(y - 4.0).powi(2)).exp())).collect();
            let phi = solve_poisson_k(&g, 0.7, &f).unwrap();
            let back = apply_laplacian_k(&g, 0.7, &phi).unwrap();
            assert!(rel(&back, &f) < 1e-8);
        }
    }

    #[test]
    fn half_plane_stream_function_vanishes_at_wall() {
        let g = build_grid(&DomainSpec::half_plane(0.1, 20.0).unwrap(), 129).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new(y * (-y).exp(), 1.0 - (-y).exp())).collect();
        let phi = solve_poisson_k(&g, 2.0, &f).unwrap();
        assert_eq!(phi[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn plane_poisson_residual() {
        let g = build_grid(&DomainSpec::plane(0.1, 20.0).unwrap(), 2048).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new((-y * y).exp(), 0.0)).collect();
        let phi = solve_poisson_k(&g, 1.0, &f).unwrap();
        // residual through an independent second-difference stencil
        let h = g.spacing();
        let n = g.len();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 2..n - 2 {
            let d2 = (-phi[i + 2] + 16.0 * phi[i + 1] - 30.0 * phi[i] + 16.0 * phi[i - 1] - phi[i - 2]) / (12.0 * h * h);
            num += (d2 - phi[i] - f[i]).norm_sqr();
            den += f[i].norm_sqr();
        }
        assert!((num / den).sqrt() < 1e-6, "{}", (num / den).sqrt());
    }

    #[test]
    fn derivative_matches_cosine_and_gaussian() {
        let g = build_grid(&DomainSpec::channel(0.1).unwrap(), 65).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new((PI * (y + 1.0)).sin(), 0.0)).collect();
        let d = derivative_y(&g, &f).unwrap();
        for (y, v) in g.nodes.iter().zip(&d) {
            assert!((v.re - PI * (PI * (y + 1.0)).cos()).abs() < 1e-11);
        }
        let g = build_grid(&DomainSpec::plane(0.1, 20.0).unwrap(), 512).unwrap();
        let f: Vec<C64> = g.nodes.iter().map(|&y| C64::new((-y * y).exp(), 0.0)).collect();
        let d = derivative_y(&g, &f).unwrap();
        for (y, v) in g.nodes.iter().zip(&d) {
            assert!((v.re + 2.0 * y * (-y * y).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_mismatch_and_zero_k() {
        let g = build_grid(&DomainSpec::channel(0.1).unwrap(), 33).unwrap();
        let f = vec![C64::new(0.0, 0.0); 32];
        assert!(matches!(apply_laplacian_k(&g, 1.0, &f), Err(Error::GridMismatch { .. })));
        let f = vec![C64::new(0.0, 0.0); 33];
        assert!(matches!(solve_poisson_k(&g, 0.0, &f), Err(Error::ZeroWavenumber)));
    }
}
