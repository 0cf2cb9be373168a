//! Acceptance suites. Each criterion runs its experiment, tabulates the
//! evidence and returns a verdict; the CLI writes the tables out and the
//! acceptance harness prints one line per criterion.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{broadband_profile, logspace, regime_scan, Regime, ScalingVerdict, ScanOptions};
use crate::domains::{build_grid, DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::linear::{
    beta_identities, default_profile, kelvin_oracle, max_step, natural_horizon, run_decay_certificate, ModeSolver,
    ModeState,
};
use crate::multipliers::{ghost_antiderivative, ghost_multiplier, HypoCoefficients};
use crate::nonlinear::{linear_consistency, run_bootstrap_experiment, BootstrapOptions};
use crate::operators::{estimate_operator_norm, GalerkinJk, MeshPolicy, PlaneJk};
use crate::pool::par_map;
use crate::quadrature::{adaptive, UnitRule};
use crate::spectral::{fft_frequencies, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Fails only in a part documented as unattainable.
    KnownRed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::KnownRed => "KNOWN-RED",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Rows of one CSV artifact. Cells are preformatted so output is bit-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub status: Status,
    pub summary: String,
    pub elapsed_s: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

/// Overrides shared by every suite. `None` keeps the criterion's own grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteParams {
    pub coeffs: HypoCoefficients,
    pub nu: Option<f64>,
    pub kind: Option<DomainKind>,
    pub resolution: Option<usize>,
    pub horizon: Option<f64>,
    pub workers: usize,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            coeffs: HypoCoefficients::default(),
            nu: None,
            kind: None,
            resolution: None,
            horizon: None,
            workers: crate::pool::default_workers(),
            seed: 20_240_601,
        }
    }
}

impl SuiteParams {
    fn nus(&self, default: &[f64]) -> Vec<f64> {
        self.nu.map(|v| vec![v]).unwrap_or_else(|| default.to_vec())
    }

    fn kinds(&self, default: &[DomainKind]) -> Vec<DomainKind> {
        match self.kind {
            Some(k) if default.contains(&k) => vec![k],
            Some(_) => Vec::new(),
            None => default.to_vec(),
        }
    }
}

fn timed(id: u8, title: &str, run: impl FnOnce() -> Result<(Status, String, Vec<Table>)>) -> CriterionOutcome {
    let t0 = Instant::now();
    let (status, summary, tables) = run().unwrap_or_else(|e| (Status::Fail, format!("error: {e}"), Vec::new()));
    CriterionOutcome { id, title: title.into(), status, summary, elapsed_s: t0.elapsed().as_secs_f64(), tables }
}

/// Certificate geometry per domain: `(spec, resolution)`.
pub fn certificate_domain(kind: DomainKind, nu: f64, resolution: Option<usize>) -> Result<(DomainSpec, usize)> {
    Ok(match kind {
        DomainKind::Plane => (DomainSpec::plane(nu, 20.0)?, resolution.unwrap_or(512)),
        DomainKind::BetaPlane => (DomainSpec::beta_plane(nu, 1.0, 20.0)?, resolution.unwrap_or(512)),
        DomainKind::HalfPlane => (DomainSpec::half_plane(nu, 10.0)?, resolution.unwrap_or(1025)),
        DomainKind::Channel => (DomainSpec::channel(nu)?, resolution.unwrap_or(513)),
    })
}

fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

// ---------------------------------------------------------------------------
// 1. Plane 𝔍_k paths
// ---------------------------------------------------------------------------

/// A named real profile in y.
pub type Profile = (String, Box<dyn Fn(f64) -> f64 + Sync>);

/// Seeded test profiles: three Gaussians and two algebraically decaying bumps.
pub fn seeded_profiles(seed: u64) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Profile> = Vec::new();
    for i in 0..5 {
        let c: f64 = rng.gen_range(-1.0..1.0);
        let w: f64 = rng.gen_range(0.7..1.5);
        if i < 3 {
            out.push((format!("gauss(c={c:.3},w={w:.3})"), Box::new(move |y| (-((y - c) / w).powi(2)).exp())));
        } else {
            let p = 4 + i;
            out.push((format!("poly{p}(c={c:.3},w={w:.3})"), Box::new(move |y| (1.0 + ((y - c) / w).powi(2)).powi(-p))));
        }
    }
    out
}

pub fn plane_equivalence(p: &SuiteParams) -> CriterionOutcome {
    timed(1, "plane 𝔍_k quadrature vs arctan multiplier", || {
        let grid = build_grid(&DomainSpec::plane(0.01, 20.0)?, p.resolution.unwrap_or(1024))?;
        let mut errs = Table::new("plane_jk_equivalence", &["profile", "k", "rel_l2_error"]);
        let mut norms = Table::new("plane_jk_norms", &["k", "quadrature_norm", "multiplier_norm"]);
        let mut worst_err = 0.0f64;
        let mut worst_norm = 0.0f64;
        for k in [0.01, 0.1, 1.0, 10.0] {
            let jk = PlaneJk::new(&grid, k)?;
            for (name, f) in seeded_profiles(p.seed) {
                let v: Vec<C64> = grid.nodes.iter().map(|&y| C64::new(f(y), 0.0)).collect();
                let e = rel_l2(&jk.apply_quadrature(&v), &jk.apply_multiplier(&v));
                worst_err = worst_err.max(e);
                errs.push(vec![name, num(k), num(e)]);
            }
            let q = estimate_operator_norm(&jk.quadrature_operator(), 400)?.norm;
            let m = estimate_operator_norm(&jk.multiplier_operator(), 400)?.norm;
            worst_norm = worst_norm.max(q).max(m);
            norms.push(vec![num(k), num(q), num(m)]);
        }
        let ok = worst_err < 1e-6 && worst_norm <= FRAC_PI_2 + 0.01;
        Ok((
            Status::from_bool(ok),
            format!("max rel error {worst_err:.2e} (< 1e-6), max norm {worst_norm:.6} (≤ π/2 + 0.01)"),
            vec![errs, norms],
        ))
    })
}

// ---------------------------------------------------------------------------
// 2. Uniform operator bounds
// ---------------------------------------------------------------------------

pub fn operator_bounds(p: &SuiteParams) -> CriterionOutcome {
    timed(2, "half-plane/channel ‖𝔍_k‖ ≤ 2, ‖[∂_y,𝔍_k]‖/|k| ≤ 4", || {
        let kinds = p.kinds(&[DomainKind::HalfPlane, DomainKind::Channel]);
        let jobs: Vec<(DomainKind, f64)> =
            kinds.iter().flat_map(|&d| (0..19).map(move |i| (d, 10f64.powf(-3.0 + i as f64 / 3.0)))).collect();
        let rows = par_map(&jobs, p.workers, |&(kind, k)| -> Result<[f64; 6]> {
            let mut out = [0.0; 6];
            for level in 0..2u32 {
                let g = GalerkinJk::with_policy(kind, k, MeshPolicy::new(level))?;
                out[3 * level as usize] = g.len() as f64;
                out[3 * level as usize + 1] = estimate_operator_norm(&g.jk_operator(), 400)?.norm;
                out[3 * level as usize + 2] = estimate_operator_norm(&g.commutator_operator(), 400)?.norm / k;
            }
            Ok(out)
        });
        let mut t = Table::new(
            "operator_bounds",
            &["domain", "k", "nodes", "jk_norm", "commutator_over_k", "nodes_fine", "jk_norm_fine", "commutator_over_k_fine"],
        );
        let (mut max_j, mut max_c, mut max_change) = (0.0f64, 0.0f64, 0.0f64);
        for (&(kind, k), r) in jobs.iter().zip(rows) {
            let r = r?;
            max_j = max_j.max(r[1]).max(r[4]);
            max_c = max_c.max(r[2]).max(r[5]);
            max_change = max_change.max((r[4] / r[1] - 1.0).abs()).max((r[5] / r[2] - 1.0).abs());
            t.push(vec![kind.name().into(), num(k), num(r[0]), num(r[1]), num(r[2]), num(r[3]), num(r[4]), num(r[5])]);
        }
        let ok = !jobs.is_empty() && max_j <= 2.0 && max_c <= 4.0 && max_change < 0.1;
        Ok((
            Status::from_bool(ok),
            format!("max ‖𝔍‖ {max_j:.4}, max commutator/|k| {max_c:.4}, max change under refinement {:.1}%", 100.0 * max_change),
            vec![t],
        ))
    })
}

// ---------------------------------------------------------------------------
// 3. Kelvin oracle
// ---------------------------------------------------------------------------

/// Relative L² gap between the plane solver and the closed form at `t`,
/// for `ω₀ = e^{−y²}`, with the oracle inverted by quadrature on every
/// eighth node.
///
/// The initial coefficients are the exact transform, not an FFT of samples:
/// at strong decay the slowest Kelvin branch sits where the Gaussian is
/// below round-off, and FFT noise there would dominate the answer.
pub fn kelvin_gap(nu: f64, k: f64, t: f64, resolution: usize) -> Result<f64> {
    let spec = DomainSpec::plane(nu, 20.0)?;
    let mut s = ModeState::from_fn(spec, resolution, k, |y| C64::new((-y * y).exp(), 0.0))?;
    let (lo, h) = (s.grid.lo, s.grid.spacing());
    s.coeffs = fft_frequencies(s.grid.len(), h)
        .into_iter()
        .map(|xi| C64::from_polar(PI.sqrt() * (-xi * xi / 4.0).exp() / h, xi * lo))
        .collect();
    let solver = ModeSolver::new(spec, s.grid.clone(), k, HypoCoefficients::default())?;
    let steps = (t / max_step(&spec, k)).ceil() as usize;
    for _ in 0..steps {
        solver.step(&mut s, t / steps as f64)?;
    }
    let omega = s.omega();
    let f0 = |eta: f64| C64::new(PI.sqrt() * (-eta * eta / 4.0).exp(), 0.0);
    let oracle = kelvin_oracle(nu, k, f0, t)?;
    let rule = UnitRule::gauss(40);
    let (mut num2, mut den) = (0.0, 0.0);
    for (j, &y) in s.grid.nodes.iter().enumerate().step_by(8) {
        let mut re = 0.0;
        let mut im = 0.0;
        for panel in 0..40 {
            let lo = -k * t - 20.0 + panel as f64;
            re += rule.integrate(lo, lo + 1.0, |e| (oracle(e) * C64::from_polar(1.0, e * y)).re);
            im += rule.integrate(lo, lo + 1.0, |e| (oracle(e) * C64::from_polar(1.0, e * y)).im);
        }
        let exact = C64::new(re, im) / (2.0 * PI);
        num2 += (omega[j] - exact).norm_sqr();
        den += exact.norm_sqr();
    }
    Ok((num2 / den).sqrt())
}

pub fn kelvin_match(p: &SuiteParams) -> CriterionOutcome {
    timed(3, "plane solver vs Kelvin closed form", || {
        let n = p.resolution.unwrap_or(512);
        let jobs: Vec<(f64, f64, f64)> = p
            .nus(&[1e-2, 1e-3])
            .into_iter()
            .flat_map(|nu| [0.1, 1.0, 4.0].into_iter().flat_map(move |k| [1.0, 5.0, 10.0].map(|t| (nu, k, t))))
            .collect();
        let gaps = par_map(&jobs, p.workers, |&(nu, k, t)| kelvin_gap(nu, k, t, n));
        let mut tab = Table::new("kelvin_match", &["nu", "k", "t", "rel_l2_error"]);
        let mut worst = 0.0f64;
        for (&(nu, k, t), g) in jobs.iter().zip(gaps) {
            let g = g?;
            worst = worst.max(g);
            tab.push(vec![num(nu), num(k), num(t), num(g)]);
        }
        Ok((Status::from_bool(worst < 1e-6), format!("max rel L² error {worst:.2e} (< 1e-6)"), vec![tab]))
    })
}

// ---------------------------------------------------------------------------
// 4. Linear decay certificates
// ---------------------------------------------------------------------------

pub const CERT_NUS: [f64; 6] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2];
pub const CERT_KS: [f64; 6] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0];

pub fn linear_certificates(p: &SuiteParams) -> CriterionOutcome {
    timed(4, "per-mode decay certificates", || {
        let kinds = p.kinds(&[DomainKind::Plane, DomainKind::HalfPlane, DomainKind::Channel]);
        let nus = p.nus(&CERT_NUS);
        let jobs: Vec<(DomainKind, f64, f64)> = kinds
            .iter()
            .flat_map(|&d| nus.iter().flat_map(move |&nu| CERT_KS.iter().map(move |&k| (d, nu, k))))
            .collect();
        let certs = par_map(&jobs, p.workers, |&(kind, nu, k)| {
            let (spec, n) = certificate_domain(kind, nu, p.resolution)?;
            let s = ModeState::from_fn(spec, n, k, default_profile(kind))?;
            let horizon = p.horizon.unwrap_or(natural_horizon(&spec, k)?);
            run_decay_certificate(&s, &p.coeffs, p.coeffs.c, horizon)
        });
        let mut tab = Table::new(
            "linear_certificates",
            &["domain", "nu", "k", "lambda", "horizon", "steps", "differential_margin", "integrated_margin", "e_final_over_e0", "pass"],
        );
        let mut failed = 0;
        for (&(kind, nu, k), c) in jobs.iter().zip(certs) {
            let c = c?;
            let md = c.differential_margin.iter().cloned().fold(f64::INFINITY, f64::min);
            let mi = c.integrated_margin.iter().cloned().fold(f64::INFINITY, f64::min);
            let ratio = c.e_k_series.last().copied().unwrap_or(0.0) / c.e_k_series[0];
            failed += usize::from(!c.passed());
            tab.push(vec![
                kind.name().into(),
                num(nu),
                num(k),
                num(c.lambda),
                num(c.times.last().copied().unwrap_or(0.0)),
                c.steps.to_string(),
                num(md),
                num(mi),
                num(ratio),
                c.passed().to_string(),
            ]);
        }
        Ok((
            Status::from_bool(failed == 0 && !jobs.is_empty()),
            format!("{}/{} certificates pass with c = {}", jobs.len() - failed, jobs.len(), p.coeffs.c),
            vec![tab],
        ))
    })
}

// ---------------------------------------------------------------------------
// 5. Rate scaling
// ---------------------------------------------------------------------------

fn scan_row(tab: &mut Table, v: &ScalingVerdict, resolution: &str) {
    for pt in &v.points {
        tab.push(vec![
            v.domain.name().into(),
            v.regime.name().into(),
            resolution.into(),
            num(pt.k),
            num(pt.nu),
            num(pt.fitted_rate),
            num(pt.expected_rate),
        ]);
    }
}

pub fn rate_scaling(p: &SuiteParams) -> CriterionOutcome {
    timed(5, "decay-rate scaling slopes", || {
        let nus = [1e-4, 3e-4, 1e-3];
        let high = logspace(4e-3, 1.0, 6);
        let low = logspace(1e-6, 2.5e-5, 5);
        // (domain, k-list, asserted)
        let scans = [(DomainKind::Plane, &high, true), (DomainKind::Plane, &low, false), (DomainKind::Channel, &low, true)];
        let mut points = Table::new("rate_scaling", &["domain", "regime", "resolution", "k", "nu", "fitted_rate", "expected_rate"]);
        let mut slopes = Table::new(
            "rate_slopes",
            &["domain", "regime", "slope_vs_k", "slope_vs_nu", "expected_k", "expected_nu", "slope_shift_on_doubling", "pass"],
        );
        let mut lines = Vec::new();
        let mut asserted_ok = true;
        let mut known_ok = true;
        for (kind, ks, asserted) in scans {
            let base = crate::diagnostics::scan_domain(kind, 1e-3, p.resolution)?.1;
            let mut verdicts = Vec::new();
            for n in [base, 2 * base - usize::from(!kind.is_whole_line())] {
                let opts = ScanOptions { resolution: Some(n), workers: p.workers, ..Default::default() };
                let prof = broadband_profile(kind, Some(n))?;
                let v = regime_scan(kind, &nus, ks, &prof, &p.coeffs, opts)?;
                scan_row(&mut points, &v, &n.to_string());
                verdicts.push(v);
            }
            let (v, fine) = (&verdicts[0], &verdicts[1]);
            let shift = (v.slope_vs_k - fine.slope_vs_k).abs().max((v.slope_vs_nu - fine.slope_vs_nu).abs());
            let pass = v.pass && fine.pass && shift < 0.02;
            slopes.push(vec![
                kind.name().into(),
                v.regime.name().into(),
                num(v.slope_vs_k),
                num(v.slope_vs_nu),
                num(v.expected.0),
                num(v.expected.1),
                num(shift),
                pass.to_string(),
            ]);
            let tag = if asserted { "" } else { " [known red]" };
            lines.push(format!(
                "{} {}: ({:.3}, {:.3}) vs ({:.3}, {:.3}){tag}",
                kind.name(),
                v.regime.name(),
                v.slope_vs_k,
                v.slope_vs_nu,
                v.expected.0,
                v.expected.1
            ));
            if asserted {
                asserted_ok &= pass;
            } else {
                known_ok &= pass || v.regime != Regime::TaylorDispersion;
            }
        }
        let status = match (asserted_ok, known_ok) {
            (false, _) => Status::Fail,
            (true, false) => Status::KnownRed,
            (true, true) => Status::Pass,
        };
        Ok((status, lines.join("; "), vec![points, slopes]))
    })
}

// ---------------------------------------------------------------------------
// 6. ν-uniform inviscid damping
// ---------------------------------------------------------------------------

/// `∫₀ᵀ k²‖∇_kφ_k‖² dt` by the trapezoid rule on the solver's steps.
pub fn damping_integral(spec: DomainSpec, resolution: usize, k: f64, horizon: f64) -> Result<f64> {
    let mut s = ModeState::from_fn(spec, resolution, k, default_profile(spec.kind))?;
    let solver = ModeSolver::new(spec, s.grid.clone(), k, HypoCoefficients::default())?;
    let steps = (horizon / max_step(&spec, k)).ceil() as usize;
    let dt = horizon / steps as f64;
    let mut last = solver.damping(&s);
    let mut acc = 0.0;
    for _ in 0..steps {
        solver.step(&mut s, dt)?;
        let d = solver.damping(&s);
        acc += 0.5 * dt * (last + d);
        last = d;
    }
    Ok(acc)
}

pub fn inviscid_damping(p: &SuiteParams) -> CriterionOutcome {
    timed(6, "ν-uniform inviscid damping integral", || {
        let horizon = p.horizon.unwrap_or(50.0);
        let kinds = p.kinds(&[DomainKind::Plane, DomainKind::Channel]);
        let nus = [1e-2, 1e-3, 1e-4];
        let jobs: Vec<(DomainKind, f64)> = kinds.iter().flat_map(|&d| nus.iter().map(move |&nu| (d, nu))).collect();
        let vals = par_map(&jobs, p.workers, |&(kind, nu)| {
            let (spec, n) = certificate_domain(kind, nu, p.resolution)?;
            damping_integral(spec, n, 1.0, horizon)
        });
        let mut tab = Table::new("inviscid_damping", &["domain", "nu", "k", "horizon", "damping_integral"]);
        let mut spread = Vec::new();
        let mut ok = !kinds.is_empty();
        for (i, kind) in kinds.iter().enumerate() {
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for (j, &nu) in nus.iter().enumerate() {
                let v = match &vals[i * nus.len() + j] {
                    Ok(v) => *v,
                    Err(e) => return Err(Error::Fit(format!("damping run failed: {e}"))),
                };
                lo = lo.min(v);
                hi = hi.max(v);
                tab.push(vec![kind.name().into(), num(nu), num(1.0), num(horizon), num(v)]);
            }
            ok &= lo > 0.0 && hi / lo < 2.0;
            spread.push(format!("{} max/min {:.3}", kind.name(), hi / lo));
        }
        Ok((Status::from_bool(ok), format!("{} (< 2)", spread.join(", ")), vec![tab]))
    })
}

// ---------------------------------------------------------------------------
// 7. β-plane
// ---------------------------------------------------------------------------

pub fn beta_plane(p: &SuiteParams) -> CriterionOutcome {
    timed(7, "β-plane cancellations and certificates", || {
        let n = p.resolution.unwrap_or(256);
        let mut ids = Table::new("beta_identities", &["nu", "b", "k", "steps", "worst_identity", "worst_rate_change"]);
        let mut worst_id = 0.0f64;
        for nu in p.nus(&[1e-2, 1e-3]) {
            for b in [0.5, 2.0] {
                for k in [0.3, 1.0] {
                    let spec = DomainSpec::beta_plane(nu, b, 20.0)?;
                    let mut s = ModeState::from_fn(spec, n, k, |y| {
                        C64::new((-(y - 1.0).powi(2)).exp(), 0.3 * y * (-y * y).exp())
                    })?;
                    let solver = ModeSolver::new(spec, s.grid.clone(), k, p.coeffs)?;
                    let (mut w, mut wr) = (0.0f64, 0.0f64);
                    let steps = 200;
                    for _ in 0..=steps {
                        let id = beta_identities(&solver, &s)?;
                        w = w.max(id.worst());
                        wr = wr.max(id.energy_rate);
                        solver.step(&mut s, max_step(&spec, k))?;
                    }
                    worst_id = worst_id.max(w).max(wr);
                    ids.push(vec![num(nu), num(b), num(k), steps.to_string(), num(w), num(wr)]);
                }
            }
        }
        let jobs: Vec<(f64, f64)> =
            p.nus(&[1e-3, 1e-2]).into_iter().flat_map(|nu| [1e-4, 1e-1, 1.0].map(|k| (nu, k))).collect();
        let pairs = par_map(&jobs, p.workers, |&(nu, k)| -> Result<(bool, bool, f64)> {
            let beta = DomainSpec::beta_plane(nu, 1.0, 20.0)?;
            let plane = DomainSpec::plane(nu, 20.0)?;
            let horizon = natural_horizon(&plane, k)?;
            let run = |spec: DomainSpec| {
                let s = ModeState::from_fn(spec, 512, k, default_profile(spec.kind))?;
                run_decay_certificate(&s, &p.coeffs, p.coeffs.c, horizon)
            };
            let (cb, cp) = (run(beta)?, run(plane)?);
            let gap = cb
                .e_k_series
                .iter()
                .zip(&cp.e_k_series)
                .map(|(a, b)| (a - b).abs() / cp.e_k_series[0])
                .fold(0.0, f64::max);
            Ok((cb.passed(), cp.passed(), gap))
        });
        let mut certs = Table::new("beta_certificates", &["nu", "k", "beta_pass", "plane_pass", "max_energy_gap"]);
        let mut all = true;
        let mut worst_gap = 0.0f64;
        for (&(nu, k), r) in jobs.iter().zip(pairs) {
            let (bp, pp, gap) = r?;
            all &= bp && pp && gap < 1e-10;
            worst_gap = worst_gap.max(gap);
            certs.push(vec![num(nu), num(k), bp.to_string(), pp.to_string(), num(gap)]);
        }
        let ok = worst_id < 1e-8 && all;
        Ok((
            Status::from_bool(ok),
            format!("worst identity {worst_id:.2e} (< 1e-8); certificates match plane to {worst_gap:.1e}"),
            vec![ids, certs],
        ))
    })
}

// ---------------------------------------------------------------------------
// 8. Ghost multiplier
// ---------------------------------------------------------------------------

pub fn ghost_bounds(p: &SuiteParams) -> CriterionOutcome {
    let _ = p;
    timed(8, "ghost multiplier limit and bounds", || {
        let mut lim = Table::new("ghost_limit", &["J", "closed_form", "quadrature", "rel_error"]);
        let mut worst = 0.0f64;
        for j in [0.5f64, 1.0, 1.5, 2.0, 3.0] {
            // s = u/(1−u) maps [0, 1) onto [0, ∞)
            let integral = adaptive(0.0, 1.0, 1e-14, &|u: f64| {
                if u >= 1.0 {
                    return 0.0;
                }
                let s = u / (1.0 - u);
                s * s / (1.0 + s * s).powi(2) / (1.0 - u).powi(2)
            });
            let oracle = (j * j * integral).exp();
            let closed = (j * j * FRAC_PI_4).exp();
            let far = (j * j * ghost_antiderivative(1e300)).exp();
            let e = ((closed - oracle) / oracle).abs().max(((far - oracle) / oracle).abs());
            worst = worst.max(e);
            lim.push(vec![num(j), num(closed), num(oracle), num(e)]);
        }
        let mut grid = Table::new("ghost_bounds", &["J", "lambda", "t", "M", "upper"]);
        let mut bounds_ok = true;
        let mut checked = 0usize;
        for j in [0.25f64, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let upper = (4.0 * j * j / 3.0).exp();
            for k in logspace(1e-4, 1e2, 13) {
                for t in std::iter::once(0.0).chain(logspace(1e-3, 1e9, 49)) {
                    let m = ghost_multiplier(1e-3, k, 0.1, j, t)?;
                    checked += 1;
                    let ok = (1.0..=upper).contains(&m);
                    bounds_ok &= ok;
                    if !ok || t == 0.0 || t == 1e9 {
                        grid.push(vec![num(j), num(k), num(t), num(m), num(upper)]);
                    }
                }
            }
        }
        Ok((
            Status::from_bool(worst < 1e-6 && bounds_ok),
            format!("limit error {worst:.1e} (< 1e-6); 1 ≤ M ≤ e^(4J²/3) on {checked} points: {bounds_ok}"),
            vec![lim, grid],
        ))
    })
}

// ---------------------------------------------------------------------------
// 9. Nonlinear bootstrap
// ---------------------------------------------------------------------------

pub fn nonlinear_bootstrap(p: &SuiteParams) -> CriterionOutcome {
    timed(9, "nonlinear bootstrap at desk scale", || {
        let nu = p.nu.unwrap_or(0.05);
        let kind = p.kind.unwrap_or(DomainKind::Channel);
        let spec = match kind {
            DomainKind::Channel => DomainSpec::channel(nu)?,
            DomainKind::Plane => DomainSpec::plane(nu, 10.0)?,
            DomainKind::HalfPlane => DomainSpec::half_plane(nu, 10.0)?,
            DomainKind::BetaPlane => return Err(Error::Unsupported("bootstrap on the β-plane".into())),
        };
        let opts = BootstrapOptions { ny: p.resolution.unwrap_or(65), ..Default::default() };
        let horizon = p.horizon.unwrap_or(10.0 / (p.coeffs.c * nu));
        let m = run_bootstrap_experiment(spec, 0.5, horizon, &p.coeffs, opts)?;
        let drift = linear_consistency(spec, 1e-8, 1.0, &p.coeffs, opts)?;
        let mut tab = Table::new("bootstrap_energy", &["t", "E", "D", "E_over_E0", "bootstrap_over_E0"]);
        for &(t, e, d) in &m.series {
            tab.push(vec![num(t), num(e), num(d), num(e / m.e0), num((e + 2.0 * p.coeffs.c * d) / m.e0)]);
        }
        let mut energy = Table::new(
            "energy_timeseries",
            &["t", "E1", "E2", "E", "D_gamma", "D_alpha", "D_beta", "D_tau", "D_tau_alpha", "D2"],
        );
        for r in &m.reports {
            let part = |key: &str| num(r.d_star.get(key).copied().unwrap_or(0.0));
            energy.push(vec![
                num(r.time),
                num(r.e1),
                num(r.e2),
                num(r.e_total),
                part("gamma"),
                part("alpha"),
                part("beta"),
                part("tau"),
                part("tau_alpha"),
                num(r.d2),
            ]);
        }
        let ok = m.passed() && drift < 1e-5 && m.max_divergence < 1e-8;
        Ok((
            Status::from_bool(ok),
            format!(
                "{} steps to t={horizon:.0}: 𝓔 ≤ 2𝓔(0) {}, 𝓔 + 2c𝓓 ≤ 2𝓔(0) {}, masked {:.1e}, div u {:.1e}; small-amplitude drift {drift:.1e} (< 1e-5)",
                m.steps, m.threshold_ok, m.bootstrap_ok, m.max_masked_fraction, m.max_divergence
            ),
            vec![tab, energy],
        ))
    })
}

/// Every criterion in order.
pub fn run_all(p: &SuiteParams) -> Vec<CriterionOutcome> {
    vec![
        plane_equivalence(p),
        operator_bounds(p),
        kelvin_match(p),
        linear_certificates(p),
        rate_scaling(p),
        inviscid_damping(p),
        beta_plane(p),
        ghost_bounds(p),
        nonlinear_bootstrap(p),
    ]
}
