//! Mode-by-mode evolution of the linearized Couette problem.
//!
//! Whole-line domains use Kelvin's sheared variables: with `ω = e^{−ikty} W`,
//! each Fourier bin of `W` evolves by a scalar ODE, which is integrated
//! exactly. Half-plane and channel use a sine basis with Strang splitting:
//! exact diffusion per mode around an exact nodal transport phase.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domains::{build_grid, DomainKind, DomainSpec, GridBasis, YGrid};
use crate::energy::{EnergyBreakdown, ModeEnergy};
use crate::error::{Error, Result};
use crate::multipliers::{validate_coefficients, HypoCoefficients};
use crate::spectral::{fft_frequencies, PeriodicFft, SineTransform, C64};

/// Relative norm growth per step tolerated before a step is declared unstable.
const GROWTH_TOLERANCE: f64 = 1e-10;

/// One Fourier-in-x mode of the vorticity.
///
/// `coeffs` holds the sheared transform `Ŵ` on whole-line grids and the
/// sine coefficients `b_p` otherwise; nodal `ω` and `φ` are derived on demand.
#[derive(Debug, Clone)]
pub struct ModeState {
    pub spec: DomainSpec,
    pub k: f64,
    pub t: f64,
    pub grid: Arc<YGrid>,
    pub coeffs: Vec<C64>,
}

impl ModeState {
    /// State at `t = 0` from nodal values of `ω_k`.
    pub fn from_profile(spec: DomainSpec, grid: Arc<YGrid>, k: f64, profile: &[C64]) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::ZeroWavenumber);
        }
        if profile.len() != grid.len() {
            return Err(Error::GridMismatch { expected: grid.len(), got: profile.len() });
        }
        let coeffs = match grid.basis {
            GridBasis::FourierPeriodic => {
                let mut buf = profile.to_vec();
                PeriodicFft::new(grid.len()).forward(&mut buf);
                buf
            }
            GridBasis::SineDirichlet => SineTransform::new(grid.len()).analyze(profile),
        };
        Ok(Self { spec, k, t: 0.0, grid, coeffs })
    }

    /// State at `t = 0` sampling `f` on a fresh grid.
    pub fn from_fn(spec: DomainSpec, resolution: usize, k: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        let grid = Arc::new(build_grid(&spec, resolution)?);
        let profile: Vec<C64> = grid.nodes.iter().map(|&y| f(y)).collect();
        Self::from_profile(spec, grid, k, &profile)
    }

    /// Accumulated shear `kt` of the Kelvin representation; zero on sine grids.
    pub fn shift(&self) -> f64 {
        match self.grid.basis {
            GridBasis::FourierPeriodic => self.k * self.t,
            GridBasis::SineDirichlet => 0.0,
        }
    }

    fn nodal(&self, coeffs: &[C64]) -> Vec<C64> {
        match self.grid.basis {
            GridBasis::FourierPeriodic => {
                let mut buf = coeffs.to_vec();
                PeriodicFft::new(self.grid.len()).inverse(&mut buf);
                let s = self.shift();
                buf.iter().zip(&self.grid.nodes).map(|(w, &y)| w * C64::from_polar(1.0, -s * y)).collect()
            }
            GridBasis::SineDirichlet => SineTransform::new(self.grid.len()).synthesize(coeffs),
        }
    }

    /// Nodal `ω_k`.
    pub fn omega(&self) -> Vec<C64> {
        self.nodal(&self.coeffs)
    }

    /// Nodal `φ_k` solving `Δ_kφ = ω` with the domain's boundary conditions.
    pub fn phi(&self) -> Vec<C64> {
        let k2 = self.k * self.k;
        let freqs = self.frequencies();
        let c: Vec<C64> = self.coeffs.iter().zip(&freqs).map(|(v, &q)| -v / (q * q + k2)).collect();
        self.nodal(&c)
    }

    /// y-frequency attached to each coefficient at the current time.
    fn frequencies(&self) -> Vec<f64> {
        match self.grid.basis {
            GridBasis::FourierPeriodic => {
                let s = self.shift();
                fft_frequencies(self.grid.len(), self.grid.spacing()).into_iter().map(|x| x - s).collect()
            }
            GridBasis::SineDirichlet => {
                let base = std::f64::consts::PI / self.grid.length();
                (0..self.grid.len()).map(|p| base * p as f64).collect()
            }
        }
    }

    /// `‖ω_k‖₂²`.
    pub fn norm_sq(&self) -> f64 {
        coeff_norm_sq(&self.grid, &self.coeffs)
    }
}

fn coeff_norm_sq(grid: &YGrid, coeffs: &[C64]) -> f64 {
    let s: f64 = coeffs.iter().map(|v| v.norm_sqr()).sum();
    match grid.basis {
        GridBasis::FourierPeriodic => s * grid.spacing() / grid.len() as f64,
        GridBasis::SineDirichlet => s * 0.5 * grid.length(),
    }
}

/// Largest step allowed by `|k| y_max dt ≤ 1/2`.
pub fn max_step(spec: &DomainSpec, k: f64) -> f64 {
    0.5 / (k.abs() * spec.y_max())
}

/// Time stepping for one `(spec, grid, k)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub spec: DomainSpec,
    pub k: f64,
    grid: Arc<YGrid>,
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    Kelvin { xi: Vec<f64> },
    Sine { transform: SineTransform, kappa: Vec<f64> },
}

impl Propagator {
    pub fn new(spec: DomainSpec, grid: Arc<YGrid>, k: f64) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::ZeroWavenumber);
        }
        let backend = match (spec.kind.is_whole_line(), grid.basis) {
            (true, GridBasis::FourierPeriodic) => Backend::Kelvin { xi: fft_frequencies(grid.len(), grid.spacing()) },
            (false, GridBasis::SineDirichlet) => {
                let base = std::f64::consts::PI / grid.length();
                Backend::Sine {
                    transform: SineTransform::new(grid.len()),
                    kappa: (0..grid.len()).map(|p| base * p as f64).collect(),
                }
            }
            _ => return Err(Error::Unsupported(format!("{} on a {:?} grid", spec.kind.name(), grid.basis))),
        };
        Ok(Self { spec, k, grid, backend })
    }

    pub fn grid(&self) -> &Arc<YGrid> {
        &self.grid
    }

    fn check(&self, state: &ModeState, dt: f64) -> Result<()> {
        if state.k != self.k || state.coeffs.len() != self.grid.len() {
            return Err(Error::GridMismatch { expected: self.grid.len(), got: state.coeffs.len() });
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        let limit = max_step(&self.spec, self.k);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, limit });
        }
        Ok(())
    }

    /// Advance by `dt` with Coriolis parameter `b` (whole-line only).
    pub fn step(&self, state: &mut ModeState, b: f64, dt: f64) -> Result<()> {
        self.check(state, dt)?;
        let before = state.norm_sq();
        let k = self.k;
        let nu = self.spec.nu;
        match &self.backend {
            Backend::Kelvin { xi } => {
                let s = k * state.t;
                for (w, &x) in state.coeffs.iter_mut().zip(xi) {
                    let qs = x - s;
                    let qe = qs - k * dt;
                    let decay = -nu * (k * k * dt + dt * (qs * qs + qs * qe + qe * qe) / 3.0);
                    let phase = b / k * ((qs / k).atan() - (qe / k).atan());
                    *w *= C64::from_polar(decay.exp(), phase);
                }
            }
            Backend::Sine { transform, kappa } => {
                if b != 0.0 {
                    return Err(Error::Unsupported("Coriolis term on a bounded domain".into()));
                }
                let half: Vec<f64> = kappa.iter().map(|kp| (-0.5 * nu * dt * (kp * kp + k * k)).exp()).collect();
                state.coeffs.iter_mut().zip(&half).for_each(|(v, d)| *v *= d);
                let mut nodal = transform.synthesize(&state.coeffs);
                for (v, &y) in nodal.iter_mut().zip(&self.grid.nodes) {
                    *v *= C64::from_polar(1.0, -k * y * dt);
                }
                state.coeffs = transform.analyze(&nodal);
                state.coeffs.iter_mut().zip(&half).for_each(|(v, d)| *v *= d);
            }
        }
        state.t += dt;
        let after = state.norm_sq();
        if !after.is_finite() || after > before * (1.0 + GROWTH_TOLERANCE) + f64::MIN_POSITIVE {
            return Err(Error::Instability { before, after });
        }
        Ok(())
    }

    /// Time derivative of the coefficients under the semi-discrete generator,
    /// and the rate at which the Kelvin shift moves.
    pub fn generator(&self, state: &ModeState, b: f64) -> (Vec<C64>, f64) {
        let k = self.k;
        let nu = self.spec.nu;
        match &self.backend {
            Backend::Kelvin { xi } => {
                let s = state.shift();
                let dot = state
                    .coeffs
                    .iter()
                    .zip(xi)
                    .map(|(w, &x)| {
                        let q = x - s;
                        let big_q = q * q + k * k;
                        w * C64::new(-nu * big_q, b * k / big_q)
                    })
                    .collect();
                (dot, k)
            }
            Backend::Sine { transform, kappa } => {
                let nodal = transform.synthesize(&state.coeffs);
                let moved: Vec<C64> =
                    nodal.iter().zip(&self.grid.nodes).map(|(v, &y)| v * C64::new(0.0, -k * y)).collect();
                let mut dot = transform.analyze(&moved);
                for ((d, v), kp) in dot.iter_mut().zip(&state.coeffs).zip(kappa) {
                    *d -= v * (nu * (kp * kp + k * k));
                }
                (dot, 0.0)
            }
        }
    }
}

/// One step of the linearized system.
pub fn step_linear(state: &ModeState, dt: f64) -> Result<ModeState> {
    step_linear_beta(state, 0.0, dt)
}

/// One step of the β-plane linearized system with Coriolis parameter `coriolis_b`.
pub fn step_linear_beta(state: &ModeState, coriolis_b: f64, dt: f64) -> Result<ModeState> {
    let prop = Propagator::new(state.spec, state.grid.clone(), state.k)?;
    let mut next = state.clone();
    prop.step(&mut next, coriolis_b, dt)?;
    Ok(next)
}

/// Decay factor of the exact plane solution: `ω̂(t,η) = ω̂₀(η + kt) · kelvin_factor`.
pub fn kelvin_factor(nu: f64, k: f64, eta: f64, t: f64) -> f64 {
    let e0 = eta + k * t;
    (-nu * (k * k * t + (e0 * e0 * e0 - eta * eta * eta) / (3.0 * k))).exp()
}

/// Exact y-spectrum of the linearized plane problem at time `t`.
pub fn kelvin_oracle<F: Fn(f64) -> C64>(nu: f64, k: f64, omega_hat0: F, t: f64) -> Result<impl Fn(f64) -> C64> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(move |eta: f64| omega_hat0(eta + k * t) * kelvin_factor(nu, k, eta, t))
}

/// Solver for one mode with a cached energy evaluator.
#[derive(Debug, Clone)]
pub struct ModeSolver {
    pub propagator: Propagator,
    pub energy: ModeEnergy,
}

impl ModeSolver {
    pub fn new(spec: DomainSpec, grid: Arc<YGrid>, k: f64, coeffs: HypoCoefficients) -> Result<Self> {
        let energy = ModeEnergy::new(spec.kind, &grid, spec.nu, k, coeffs)?;
        Ok(Self { propagator: Propagator::new(spec, grid, k)?, energy })
    }

    pub fn step(&self, state: &mut ModeState, dt: f64) -> Result<()> {
        self.propagator.step(state, self.propagator.spec.coriolis_b, dt)
    }

    pub fn breakdown(&self, state: &ModeState) -> EnergyBreakdown {
        self.energy.breakdown(&state.coeffs, state.shift())
    }

    /// Exact `dE_k/dt` of the discrete energy under the semi-discrete generator.
    pub fn energy_rate(&self, state: &ModeState) -> f64 {
        self.energy_rate_with(state, self.propagator.spec.coriolis_b)
    }

    pub fn energy_rate_with(&self, state: &ModeState, b: f64) -> f64 {
        let (dot, shift_rate) = self.propagator.generator(state, b);
        self.energy.derivative(&state.coeffs, &dot, state.shift(), shift_rate)
    }

    /// `D_τ` alone.
    pub fn damping(&self, state: &ModeState) -> f64 {
        self.energy.damping(&state.coeffs, state.shift())
    }
}

/// The β-plane cancellations, each normalized by the natural product of norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaIdentities {
    /// `Re⟨ω, ikφ⟩ / (‖ω‖ ‖kφ‖)`
    pub l2: f64,
    /// `Re⟨∂ω, ik∂φ⟩ / (‖∂ω‖ ‖k∂φ‖)`
    pub gradient: f64,
    /// `(Re⟨ikω, ik∂φ⟩ + Re⟨(ik)²φ, ∂ω⟩) / (‖kω‖‖k∂φ‖ + ‖k²φ‖‖∂ω‖)`
    pub cross: f64,
    /// `(Re⟨𝔍ω, ikφ⟩ + Re⟨𝔍ikφ, ω⟩) / (2 ‖ω‖ ‖kφ‖)`, with `‖𝔍‖ ≤ π/2` absorbed
    pub jk: f64,
    /// Same pair for `∂ω`, `∂φ`.
    pub jk_dy: f64,
    /// `|dE/dt(𝔟) − dE/dt(0)| / |dE/dt(0)|`
    pub energy_rate: f64,
}

impl BetaIdentities {
    pub fn worst(&self) -> f64 {
        [self.l2, self.gradient, self.cross, self.jk, self.jk_dy].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Evaluate the β-plane cancellations on a whole-line state, by direct
/// quadrature in y-frequency of each inner product.
pub fn beta_identities(solver: &ModeSolver, state: &ModeState) -> Result<BetaIdentities> {
    if state.grid.basis != GridBasis::FourierPeriodic {
        return Err(Error::Unsupported("β-plane identities need a whole-line grid".into()));
    }
    let k = state.k;
    let b = solver.propagator.spec.coriolis_b;
    let freqs = state.frequencies();
    let i = C64::new(0.0, 1.0);
    let ik = C64::new(0.0, k);
    let mut sums = [C64::new(0.0, 0.0); 7];
    let mut norms = [0.0f64; 6];
    for (w, &q) in state.coeffs.iter().zip(&freqs) {
        let om = *w;
        let phi = -om / (q * q + k * k);
        let d_om = i * q * om;
        let d_phi = i * q * phi;
        let j = (q / k).atan();
        sums[0] += om * (ik * phi).conj();
        sums[1] += d_om * (ik * d_phi).conj();
        sums[2] += ik * om * (ik * d_phi).conj();
        sums[3] += ik * ik * phi * d_om.conj();
        sums[4] += j * om * (ik * phi).conj() + j * ik * phi * om.conj();
        sums[5] += j * d_om * (ik * d_phi).conj() + j * ik * d_phi * d_om.conj();
        norms[0] += om.norm_sqr();
        norms[1] += (k * phi).norm_sqr();
        norms[2] += d_om.norm_sqr();
        norms[3] += (k * d_phi).norm_sqr();
        norms[4] += (k * om).norm_sqr();
        norms[5] += (k * k * phi).norm_sqr();
    }
    let n = norms.map(f64::sqrt);
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let with_b = solver.energy_rate_with(state, b);
    let without = solver.energy_rate_with(state, 0.0);
    Ok(BetaIdentities {
        l2: ratio(sums[0].re, n[0] * n[1]),
        gradient: ratio(sums[1].re, n[2] * n[3]),
        cross: ratio(sums[2].re + sums[3].re, n[4] * n[3] + n[5] * n[2]),
        jk: ratio(sums[4].re, std::f64::consts::PI * n[0] * n[1]),
        jk_dy: ratio(sums[5].re, std::f64::consts::PI * n[2] * n[3]),
        energy_rate: ratio((with_b - without).abs(), without.abs()),
    })
}

/// Knobs of a certificate run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateOptions {
    pub horizon: f64,
    /// Number of instants at which `E_k` and the differential inequality are checked.
    pub samples: usize,
    /// Upper bound on the number of time steps.
    pub max_steps: usize,
    /// Relative slack of the integrated inequality.
    pub tolerance: f64,
}

impl CertificateOptions {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, samples: 400, max_steps: 200_000, tolerance: 1e-3 }
    }
}

/// Horizon long enough to see the decay: `10/λ_k`, cut at the time where the
/// shear-diffusion factor `e^{−νk²t³/3}` has removed about 30 e-folds of energy.
pub fn natural_horizon(spec: &DomainSpec, k: f64) -> Result<f64> {
    let lam = crate::multipliers::eval_lambda(spec.kind.rate_family(), spec.nu, k)?;
    Ok((10.0 / lam).min((45.0 / (spec.nu * k * k)).cbrt()))
}

/// Record of a certificate run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub k: f64,
    pub nu: f64,
    pub lambda: f64,
    pub c: f64,
    pub c0: f64,
    pub c1: f64,
    pub times: Vec<f64>,
    pub e_k_series: Vec<f64>,
    pub dissipation_series: Vec<f64>,
    /// `∫₀ᵗ e^{2cλs} D_τ ds` at each sample.
    pub damping_integral: Vec<f64>,
    /// Slack of `dE/dt ≤ −c₀λE − c₁D` at each sample, relative to `c₀λE + c₁D`.
    pub differential_margin: Vec<f64>,
    /// Slack of the integrated inequality at each sample, relative to `E_k(0)`.
    pub integrated_margin: Vec<f64>,
    pub differential_ok: bool,
    pub integrated_ok: bool,
    /// Worst slack over both inequalities.
    pub margin: f64,
    pub first_failure: Option<f64>,
    pub steps: usize,
    pub dt: f64,
}

impl DecayCertificate {
    pub fn passed(&self) -> bool {
        self.differential_ok && self.integrated_ok
    }
}

/// Band allowed for rounding in the differential inequality, relative to its scale.
const DIFFERENTIAL_BAND: f64 = 1e-9;

/// Integrate `initial` to `horizon` and check both decay inequalities with decay constant `c`.
pub fn run_decay_certificate(initial: &ModeState, coeffs: &HypoCoefficients, c: f64, horizon: f64) -> Result<DecayCertificate> {
    run_decay_certificate_with(initial, coeffs, c, CertificateOptions::new(horizon))
}

pub fn run_decay_certificate_with(
    initial: &ModeState,
    coeffs: &HypoCoefficients,
    c: f64,
    opts: CertificateOptions,
) -> Result<DecayCertificate> {
    let coeffs = HypoCoefficients { c, ..*coeffs };
    let report = validate_coefficients(&coeffs);
    report.require_structural()?;
    if !(opts.horizon > 0.0) || opts.samples < 2 {
        return Err(Error::InvalidArgument("certificate needs a positive horizon and at least two samples".into()));
    }
    let solver = ModeSolver::new(initial.spec, initial.grid.clone(), initial.k, coeffs)?;
    let lambda = solver.energy.lambda;
    let (c0, c1) = (report.c0, report.c1);

    let cfl = max_step(&initial.spec, initial.k);
    let per_sample = ((opts.horizon / opts.samples as f64) / cfl).ceil().max(1.0) as usize;
    let steps = per_sample * opts.samples;
    if steps > opts.max_steps {
        return Err(Error::ResolutionCap { got: steps, cap: opts.max_steps });
    }
    let dt = opts.horizon / steps as f64;

    let mut state = initial.clone();
    let mut cert = DecayCertificate {
        k: initial.k,
        nu: initial.spec.nu,
        lambda,
        c,
        c0,
        c1,
        times: Vec::with_capacity(opts.samples + 1),
        e_k_series: Vec::with_capacity(opts.samples + 1),
        dissipation_series: Vec::with_capacity(opts.samples + 1),
        damping_integral: Vec::with_capacity(opts.samples + 1),
        differential_margin: Vec::with_capacity(opts.samples + 1),
        integrated_margin: Vec::with_capacity(opts.samples + 1),
        differential_ok: true,
        integrated_ok: true,
        margin: f64::INFINITY,
        first_failure: None,
        steps,
        dt,
    };
    let e0 = solver.breakdown(&state).e_k;
    let mut integral = 0.0;
    let mut prev_damp = solver.damping(&state);
    for sample in 0..=opts.samples {
        if sample > 0 {
            for _ in 0..per_sample {
                let t0 = state.t;
                solver.step(&mut state, dt)?;
                let damp = solver.damping(&state);
                let w0 = (2.0 * c * lambda * t0).exp();
                let w1 = (2.0 * c * lambda * state.t).exp();
                integral += 0.5 * dt * (w0 * prev_damp + w1 * damp);
                prev_damp = damp;
            }
        }
        let bd = solver.breakdown(&state);
        let d = bd.dissipation(&coeffs);
        let rate = solver.energy_rate(&state);
        let target = c0 * lambda * bd.e_k + c1 * d;
        let diff = if target > 0.0 || rate != 0.0 {
            (-target - rate) / target.max(f64::MIN_POSITIVE) + DIFFERENTIAL_BAND * (1.0 + rate.abs() / target.max(f64::MIN_POSITIVE))
        } else {
            0.0
        };
        let lhs = (2.0 * c * lambda * state.t).exp() * bd.e_k + 0.25 * coeffs.c_tau * integral;
        let integ = if e0 > 0.0 { (e0 * (1.0 + opts.tolerance) - lhs) / e0 } else { -lhs };
        if diff < 0.0 {
            cert.differential_ok = false;
            cert.first_failure.get_or_insert(state.t);
        }
        if integ < 0.0 {
            cert.integrated_ok = false;
            cert.first_failure.get_or_insert(state.t);
        }
        cert.margin = cert.margin.min(diff).min(integ);
        cert.times.push(state.t);
        cert.e_k_series.push(bd.e_k);
        cert.dissipation_series.push(d);
        cert.damping_integral.push(integral);
        cert.differential_margin.push(diff);
        cert.integrated_margin.push(integ);
    }
    Ok(cert)
}

/// Outcome of the decay-constant calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Largest bracketed `c` for which every case passed.
    pub largest_passing: f64,
    /// Smallest bracketed `c` seen to fail.
    pub smallest_failing: f64,
    /// `largest_passing / 2`, the value to use.
    pub chosen: f64,
}

/// Bisect (geometrically) for the largest `c` in `[lo, hi]` passing every certificate in `cases`.
pub fn calibrate_decay_constant(
    cases: &[(ModeState, f64)],
    coeffs: &HypoCoefficients,
    lo: f64,
    hi: f64,
    iterations: usize,
) -> Result<Calibration> {
    let all_pass = |c: f64| -> Result<bool> {
        for (state, horizon) in cases {
            if !run_decay_certificate(state, coeffs, c, *horizon)?.passed() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if !all_pass(lo)? {
        return Err(Error::Infeasible(format!("certificates fail already at c = {lo}")));
    }
    let (mut a, mut b) = (lo, hi);
    if all_pass(hi)? {
        return Ok(Calibration { largest_passing: hi, smallest_failing: f64::INFINITY, chosen: hi / 2.0 });
    }
    for _ in 0..iterations {
        let mid = (a * b).sqrt();
        if all_pass(mid)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Calibration { largest_passing: a, smallest_failing: b, chosen: a / 2.0 })
}

/// Default initial data per domain: `(1+y²)^{−4}` on the whole line,
/// `y e^{−y²/4}` on the half-line and `sin(π(y+1)/2)` on the channel.
pub fn default_profile(kind: DomainKind) -> fn(f64) -> C64 {
    match kind {
        DomainKind::Plane | DomainKind::BetaPlane => |y| C64::new((1.0 + y * y).powi(-4), 0.0),
        DomainKind::HalfPlane => |y| C64::new(y * (-y * y / 4.0).exp(), 0.0),
        DomainKind::Channel => |y| C64::new((std::f64::consts::PI * (y + 1.0) / 2.0).sin(), 0.0),
    }
}

/// Fourier transform `∫(1+y²)^{−4} e^{−iηy} dy`.
pub fn default_plane_spectrum(eta: f64) -> f64 {
    let a = eta.abs();
    std::f64::consts::PI / 48.0 * (-a).exp() * (a * a * a + 6.0 * a * a + 15.0 * a + 15.0)
}

/// Gaussian bump centred at `center` with width `width`, tapered to vanish on walls.
pub fn gaussian_bump(kind: DomainKind, center: f64, width: f64) -> impl Fn(f64) -> C64 {
    move |y: f64| {
        let g = (-((y - center) / width).powi(2)).exp();
        let taper = match kind {
            DomainKind::Channel => (std::f64::consts::PI * (y + 1.0) / 2.0).sin(),
            DomainKind::HalfPlane => 1.0 - (-y * y / (width * width)).exp(),
            _ => 1.0,
        };
        C64::new(g * taper, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::UnitRule;
    use std::f64::consts::PI;

    fn plane(nu: f64) -> DomainSpec {
        DomainSpec::plane(nu, 20.0).unwrap()
    }

    fn gaussian_state(nu: f64, k: f64, n: usize) -> ModeState {
        ModeState::from_fn(plane(nu), n, k, |y| C64::new((-y * y).exp(), 0.0)).unwrap()
    }

    fn run(state: &ModeState, t: f64) -> ModeState {
        let prop = Propagator::new(state.spec, state.grid.clone(), state.k).unwrap();
        let steps = (t / max_step(&state.spec, state.k)).ceil() as usize;
        let dt = t / steps as f64;
        let mut s = state.clone();
        for _ in 0..steps {
            prop.step(&mut s, 0.0, dt).unwrap();
        }
        s
    }

    #[test]
    fn oracle_is_identity_at_zero_and_transport_when_inviscid() {
        let f = |eta: f64| C64::new((-eta * eta).exp(), 0.0);
        let o = kelvin_oracle(0.01, 1.0, f, 0.0).unwrap();
        assert_eq!(o(0.3), f(0.3));
        let o = kelvin_oracle(0.0, 2.0, f, 1.5).unwrap();
        assert_eq!(o(0.3), f(3.3));
        assert!(kelvin_oracle(0.01, 0.0, f, 1.0).is_err());
    }

    #[test]
    fn oracle_solves_the_pde_by_finite_differences() {
        // ∂_t ω̂ = k ∂_η ω̂ − ν(k² + η²) ω̂
        let (nu, k) = (0.03, 0.7);
        let f = |eta: f64| C64::new((-eta * eta / 2.0).exp(), eta * (-eta * eta).exp());
        let h = 1e-4;
        for &(t, eta) in &[(0.5, 0.2), (2.0, -1.0), (4.0, 3.0)] {
            let at = |tt: f64, e: f64| kelvin_oracle(nu, k, f, tt).unwrap()(e);
            let dt = (at(t + h, eta) - at(t - h, eta)) / (2.0 * h);
            let de = (at(t, eta + h) - at(t, eta - h)) / (2.0 * h);
            let rhs = de * k - at(t, eta) * (nu * (k * k + eta * eta));
            assert!((dt - rhs).norm() < 1e-7 * (1.0 + dt.norm()), "t={t} eta={eta}");
        }
    }

    #[test]
    fn inviscid_norm_conserved() {
        for spec in [DomainSpec::channel(0.01).unwrap(), DomainSpec::half_plane(0.01, 10.0).unwrap()] {
            let spec = DomainSpec { nu: 1e-300, ..spec };
            let s = ModeState::from_fn(spec, 129, 1.5, default_profile(spec.kind)).unwrap();
            let n0 = s.norm_sq();
            let after = run(&s, 1.0);
            assert!((after.norm_sq() - n0).abs() < 1e-12 * n0);
        }
        let spec = DomainSpec { nu: 1e-300, ..plane(0.01) };
        let s = ModeState::from_fn(spec, 256, 1.5, default_profile(spec.kind)).unwrap();
        assert!((run(&s, 2.0).norm_sq() - s.norm_sq()).abs() < 1e-13 * s.norm_sq());
    }

    #[test]
    fn plane_matches_kelvin_oracle_in_physical_space() {
        let (nu, k) = (0.01, 1.0);
        let s = gaussian_state(nu, k, 512);
        let t = 5.0;
        let after = run(&s, t);
        let omega = after.omega();
        // independent inverse transform by Gauss quadrature over η
        let f0 = |eta: f64| C64::new(PI.sqrt() * (-eta * eta / 4.0).exp(), 0.0);
        let oracle = kelvin_oracle(nu, k, f0, t).unwrap();
        let rule = UnitRule::gauss(40);
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, &y) in after.grid.nodes.iter().enumerate().step_by(8) {
            let mut val = C64::new(0.0, 0.0);
            let centre = -k * t;
            for p in 0..40 {
                let lo = centre - 20.0 + p as f64;
                val += C64::new(rule.integrate(lo, lo + 1.0, |e| (oracle(e) * C64::from_polar(1.0, e * y)).re), 0.0);
                val += C64::new(0.0, rule.integrate(lo, lo + 1.0, |e| (oracle(e) * C64::from_polar(1.0, e * y)).im));
            }
            val /= 2.0 * PI;
            num += (omega[j] - val).norm_sqr();
            den += val.norm_sqr();
        }
        assert!((num / den).sqrt() < 1e-8, "{}", (num / den).sqrt());
    }

    #[test]
    fn viscous_norm_nonincreasing_and_phi_consistent() {
        let spec = DomainSpec::channel(0.01).unwrap();
        let mut s = ModeState::from_fn(spec, 65, 1.0, default_profile(spec.kind)).unwrap();
        let prop = Propagator::new(spec, s.grid.clone(), 1.0).unwrap();
        let mut last = s.norm_sq();
        for _ in 0..100 {
            prop.step(&mut s, 0.0, 0.05).unwrap();
            assert!(s.norm_sq() <= last);
            last = s.norm_sq();
        }
        let back = crate::operators::apply_laplacian_k(&s.grid, 1.0, &s.phi()).unwrap();
        let omega = s.omega();
        let err: f64 = back.iter().zip(&omega).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10);
        assert!(omega[0].norm() < 1e-14 && omega[64].norm() < 1e-14);
    }

    #[test]
    fn step_rejects_bad_input() {
        let s = gaussian_state(0.01, 1.0, 64);
        assert!(matches!(step_linear(&s, 1.0), Err(Error::StepTooLarge { .. })));
        assert!(step_linear(&s, -0.01).is_err());
    }

    #[test]
    fn zero_coriolis_matches_plain_step() {
        let s = gaussian_state(0.01, 0.6, 128);
        let a = step_linear(&s, 0.01).unwrap();
        let b = step_linear_beta(&s, 0.0, 0.01).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
    }

    #[test]
    fn generator_matches_step_difference() {
        for spec in [DomainSpec::channel(0.02).unwrap(), plane(0.02)] {
            let s = ModeState::from_fn(spec, 129, 0.8, default_profile(spec.kind)).unwrap();
            let solver = ModeSolver::new(spec, s.grid.clone(), 0.8, HypoCoefficients::default()).unwrap();
            let h = 1e-4;
            let mut fwd = s.clone();
            solver.step(&mut fwd, h).unwrap();
            let e0 = solver.breakdown(&s).e_k;
            let e1 = solver.breakdown(&fwd).e_k;
            let rate = solver.energy_rate(&s);
            let quotient = (e1 - e0) / h;
            assert!((quotient - rate).abs() < 1e-3 * rate.abs(), "{}: {quotient} vs {rate}", spec.kind.name());
        }
    }

    #[test]
    fn beta_identities_vanish() {
        let spec = DomainSpec::beta_plane(0.01, 0.5, 20.0).unwrap();
        let mut s = ModeState::from_fn(spec, 256, 0.7, |y| C64::new((-(y - 1.0).powi(2)).exp(), 0.3 * y * (-y * y).exp()))
            .unwrap();
        let solver = ModeSolver::new(spec, s.grid.clone(), 0.7, HypoCoefficients::default()).unwrap();
        for _ in 0..20 {
            let ids = beta_identities(&solver, &s).unwrap();
            assert!(ids.worst() < 1e-12, "{ids:?}");
            assert!(ids.energy_rate < 1e-10);
            solver.step(&mut s, 0.02).unwrap();
        }
    }

    #[test]
    fn zero_state_certificate_passes() {
        let spec = DomainSpec::channel(0.01).unwrap();
        let s = ModeState::from_fn(spec, 33, 1.0, |_| C64::new(0.0, 0.0)).unwrap();
        let cert = run_decay_certificate(&s, &HypoCoefficients::default(), 0.001, 1.0).unwrap();
        assert!(cert.passed());
    }

    #[test]
    fn plane_spectrum_matches_quadrature() {
        let rule = UnitRule::gauss(40);
        for &eta in &[0.0, 0.7, 3.0] {
            let mut v = 0.0;
            for p in -60..60 {
                let lo = p as f64 * 0.5;
                v += rule.integrate(lo, lo + 0.5, |y| (1.0 + y * y).powi(-4) * (eta * y).cos());
            }
            assert!((v - default_plane_spectrum(eta)).abs() < 1e-9);
        }
    }
}
