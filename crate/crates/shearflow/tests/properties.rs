use proptest::prelude::*;

use shearflow::domains::{build_grid, green_kernel, DomainKind, DomainSpec, RateFamily};
use shearflow::linear::{default_profile, gaussian_bump, max_step, ModeState, Propagator};
use shearflow::multipliers::{eval_lambda, eval_weights, ghost_multiplier};
use shearflow::operators::{apply_laplacian_k, GalerkinJk};
use shearflow::quadrature::adaptive;
use shearflow::spectral::C64;

fn spec_of(kind: DomainKind, nu: f64) -> DomainSpec {
    match kind {
        DomainKind::Plane => DomainSpec::plane(nu, 20.0).unwrap(),
        DomainKind::HalfPlane => DomainSpec::half_plane(nu, 10.0).unwrap(),
        _ => DomainSpec::channel(nu).unwrap(),
    }
}

/// `∫ G(y, y') f(y') dy'` split at the kink `y' = y`.
fn convolve(kind: DomainKind, k: f64, y: f64, lo: f64, hi: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let g = green_kernel(&spec_of(kind, 0.1), k).unwrap();
    let integrand = |yp: f64| g.evaluate(y, yp) * f(yp);
    adaptive(lo, y, 1e-13, &integrand) + adaptive(y, hi, 1e-13, &integrand)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn green_kernel_inverts_the_mode_laplacian(
        which in 0usize..3,
        k in 0.3f64..4.0,
        c in -0.3f64..0.3,
        dy in -0.2f64..0.2,
    ) {
        let kind = [DomainKind::Plane, DomainKind::HalfPlane, DomainKind::Channel][which];
        let (center, lo, hi) = match kind {
            DomainKind::Plane => (c, c - 8.0, c + 8.0),
            DomainKind::HalfPlane => (2.0 + c, 0.0, 10.0 + c),
            _ => (c, -1.0, 1.0),
        };
        let f = move |y: f64| (-6.0 * (y - center).powi(2)).exp();
        let y = center + dy;
        let h = 1e-3;
        let u = |y: f64| convolve(kind, k, y, lo, hi, &f);
        let lap = (u(y + h) - 2.0 * u(y) + u(y - h)) / (h * h) - k * k * u(y);
        let s = green_kernel(&spec_of(kind, 0.1), k).unwrap().inverse_scale();
        prop_assert!((lap - s * f(y)).abs() < 1e-4, "{kind:?} k={k}: {lap} vs {}", s * f(y));
    }

    #[test]
    fn lambda_is_even_monotone_and_continuous(nu in 1e-6f64..0.5, k in 1e-8f64..10.0, channel in any::<bool>()) {
        let fam = if channel { RateFamily::Channel } else { RateFamily::Plane };
        let l = eval_lambda(fam, nu, k).unwrap();
        prop_assert_eq!(l, eval_lambda(fam, nu, -k).unwrap());
        prop_assert!(l > 0.0);
        if fam == RateFamily::Plane {
            prop_assert!(eval_lambda(fam, nu, 1.01 * k).unwrap() >= l);
        }
        let below = eval_lambda(fam, nu, nu * (1.0 - 1e-12)).unwrap();
        let at = eval_lambda(fam, nu, nu).unwrap();
        prop_assert!((below - at).abs() < 1e-9 * at);
        let w = eval_weights(nu, k, fam).unwrap();
        prop_assert!((w.alpha - w.a * w.a).abs() <= 1e-15 * w.alpha && (w.beta - w.b * w.b).abs() <= 1e-15 * w.beta);
    }

    #[test]
    fn ghost_multiplier_stays_in_its_band(nu in 1e-5f64..0.5, k in 1e-4f64..10.0, j in 0.0f64..2.0, t in 0.0f64..1e6) {
        let m = ghost_multiplier(nu, k, 0.1, j, t).unwrap();
        let cap = (std::f64::consts::PI * j * j / 4.0).exp();
        prop_assert!((1.0..=cap * (1.0 + 1e-12)).contains(&m));
        prop_assert!(ghost_multiplier(nu, k, 0.1, j, t * 1.5 + 1.0).unwrap() >= m);
    }

    #[test]
    fn stream_function_inverts_vorticity_with_impermeable_walls(k in 0.2f64..6.0, c in -0.4f64..0.4, w in 0.15f64..0.4) {
        let s = ModeState::from_fn(spec_of(DomainKind::Channel, 0.01), 257, k, gaussian_bump(DomainKind::Channel, c, w)).unwrap();
        let phi = s.phi();
        let omega = s.omega();
        let lap = apply_laplacian_k(&s.grid, k, &phi).unwrap();
        let scale = omega.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in lap.iter().zip(&omega) {
            prop_assert!((a - b).norm() < 1e-10 * scale);
        }
        // u_y = ikφ carries no flux through either wall
        let uy: Vec<C64> = phi.iter().map(|p| C64::new(0.0, k) * p).collect();
        prop_assert!(uy[0].norm() < 1e-14 * scale && uy[uy.len() - 1].norm() < 1e-14 * scale);
    }

    #[test]
    fn inviscid_flow_is_an_isometry(which in 0usize..3, k in 0.1f64..3.0, t in 0.1f64..4.0) {
        let kind = [DomainKind::Plane, DomainKind::HalfPlane, DomainKind::Channel][which];
        let spec = DomainSpec { nu: 1e-300, ..spec_of(kind, 0.01) };
        let res = if kind == DomainKind::Channel { 129 } else { 512 };
        let mut s = ModeState::from_fn(spec, res, k, default_profile(kind)).unwrap();
        let n0 = s.norm_sq();
        let prop = Propagator::new(spec, s.grid.clone(), k).unwrap();
        let steps = (t / max_step(&spec, k)).ceil().max(1.0) as usize;
        for _ in 0..steps {
            prop.step(&mut s, 0.0, t / steps as f64).unwrap();
        }
        prop_assert!((s.norm_sq() - n0).abs() < 1e-11 * n0);
    }
}

/// Relative gap between `∂_y(𝔍f) − 𝔍(∂_y f)` by centred differences and the
/// assembled commutator, over nodes inside `window`. `f` returns value and derivative.
fn commutator_gap(kind: DomainKind, k: f64, nodes: &[f64], f: impl Fn(f64) -> (f64, f64), window: (f64, f64)) -> f64 {
    let h = nodes[1] - nodes[0];
    let (fv, dfv): (Vec<C64>, Vec<C64>) = nodes.iter().map(|&y| f(y)).map(|(a, b)| (C64::new(a, 0.0), C64::new(b, 0.0))).unzip();
    let gal = GalerkinJk::new(kind, k, nodes).unwrap();
    let (jf, jdf, comm) = (gal.apply(&fv), gal.apply(&dfv), gal.apply_commutator(&fv));
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..nodes.len() - 1 {
        if nodes[i] < window.0 || nodes[i] > window.1 {
            continue;
        }
        let fd = (jf[i + 1] - jf[i - 1]) / (2.0 * h) - jdf[i];
        num += (fd - comm[i]).norm_sqr();
        den += comm[i].norm_sqr();
    }
    (num / den).sqrt()
}

#[test]
fn commutator_matches_finite_differences() {
    let a = std::f64::consts::FRAC_PI_2;
    let n = 801;
    let h = 2.0 / (n + 1) as f64;
    let channel: Vec<f64> = (1..=n).map(|i| -1.0 + i as f64 * h).collect();
    let bump = |y: f64| {
        let s = (a * (y + 1.0)).sin();
        (s * (1.0 + 0.5 * y), a * (a * (y + 1.0)).cos() * (1.0 + 0.5 * y) + 0.5 * s)
    };
    let half: Vec<f64> = (1..=2400).map(|i| i as f64 * 0.0025).collect();
    let decay = |y: f64| {
        let g = (-y * y).exp();
        (y * g, (1.0 - 2.0 * y * y) * g)
    };
    for k in [0.5, 2.0] {
        let gap = commutator_gap(DomainKind::Channel, k, &channel, bump, (-0.8, 0.8));
        assert!(gap < 1e-4, "channel k={k}: relative gap {gap:.3e}");
        let gap = commutator_gap(DomainKind::HalfPlane, k, &half, decay, (0.2, 2.5));
        assert!(gap < 1e-4, "half-plane k={k}: relative gap {gap:.3e}");
    }
}

#[test]
fn built_grids_are_strictly_increasing() {
    for kind in [DomainKind::Plane, DomainKind::HalfPlane, DomainKind::Channel] {
        let g = build_grid(&spec_of(kind, 0.01), 64).unwrap();
        assert!(g.nodes.windows(2).all(|w| w[1] > w[0]));
    }
}
