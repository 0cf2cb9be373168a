//! Pseudospectral solver for the full perturbation system.
//!
//! The x-direction is a period `Lx = 2π/Δk` sampled at `nx` points; only the
//! modes `k_j = jΔk`, `0 ≤ j < nx/2`, are stored and the negative half follows
//! from conjugate symmetry. Each nonzero mode reuses the linear machinery
//! (Kelvin frame on the whole line, sine basis on bounded domains). Products
//! are formed on the physical grid after truncating both directions by the
//! 2/3 rule.
//!
//! In the Kelvin frame the shear phases `e^{−ikty}` multiply across a product,
//! so the nonlinearity can be assembled entirely from sheared profiles.
//!
//! Time stepping is second-order integrating-factor Runge-Kutta: the linear
//! part is propagated exactly, the nonlinearity enters explicitly.

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domains::{build_grid, DomainKind, DomainSpec, GridBasis, YGrid};
use crate::energy::{global_energy, DissipationHistory, GlobalEnergyReport, ModeEnergy, ModeSample, NormKind};
use crate::error::{Error, Result};
use crate::linear::{default_profile, ModeState, Propagator};
use crate::multipliers::{lambda_unchecked, HypoCoefficients};
use crate::spectral::{fft_frequencies, PeriodicFft, SineTransform, C64};

/// Masked-band energy fraction above which a field counts as under-resolved.
pub const ALIAS_LIMIT: f64 = 1e-8;
/// `𝓔(t) / 𝓔(0)` at which a run is aborted.
pub const BLOW_UP_FACTOR: f64 = 1e6;
pub const CHECKPOINT_VERSION: u32 = 1;
const CHECKPOINT_MAGIC: &str = "shearflow-checkpoint";

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Discrete x-wavenumbers `jΔk` for `0 ≤ j < nx/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub dk: f64,
    pub nx: usize,
}

impl Ladder {
    pub fn new(dk: f64, nx: usize) -> Result<Self> {
        if !(dk > 0.0 && dk.is_finite()) {
            return Err(Error::InvalidArgument(format!("mode spacing must be positive, got {dk}")));
        }
        if nx < 8 || nx % 2 != 0 {
            return Err(Error::InvalidArgument(format!("x resolution must be even and at least 8, got {nx}")));
        }
        Ok(Self { dk, nx })
    }

    /// Spacing `ν/4`, fine enough to resolve `|k| < ν`.
    pub fn for_viscosity(nu: f64, nx: usize) -> Result<Self> {
        Self::new(nu / 4.0, nx)
    }

    /// Number of stored modes, `k = 0` included.
    pub fn len(&self) -> usize {
        self.nx / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self, j: usize) -> f64 {
        j as f64 * self.dk
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.dk
    }

    /// Largest wavenumber of the ladder, `(nx/2) Δk`.
    pub fn k_max(&self) -> f64 {
        self.nx as f64 / 2.0 * self.dk
    }

    /// 2/3 rule: `3j < nx`.
    pub fn kept(&self, j: usize) -> bool {
        3 * j < self.nx
    }
}

/// Spectral y-representation shared by all modes.
#[derive(Debug, Clone)]
enum YBasis {
    Sine { transform: SineTransform, kappa: Vec<f64>, half_length: f64 },
    Fourier { fft: PeriodicFft, xi: Vec<f64>, scale: f64 },
}

/// Sheared (whole line) or lab-frame (sine) nodal profiles entering the product.
struct Nodal {
    dx_omega: Vec<C64>,
    dy_omega: Vec<C64>,
    /// `u_x = −∂_yφ`
    ux: Vec<C64>,
    /// `u_y = ikφ`
    uy: Vec<C64>,
}

impl YBasis {
    fn new(grid: &YGrid) -> Self {
        let n = grid.len();
        match grid.basis {
            GridBasis::SineDirichlet => {
                let base = std::f64::consts::PI / grid.length();
                YBasis::Sine {
                    transform: SineTransform::new(n),
                    kappa: (0..n).map(|p| base * p as f64).collect(),
                    half_length: 0.5 * grid.length(),
                }
            }
            GridBasis::FourierPeriodic => YBasis::Fourier {
                fft: PeriodicFft::new(n),
                xi: fft_frequencies(n, grid.spacing()),
                scale: grid.spacing() / n as f64,
            },
        }
    }

    fn len(&self) -> usize {
        match self {
            YBasis::Sine { kappa, .. } => kappa.len(),
            YBasis::Fourier { xi, .. } => xi.len(),
        }
    }

    /// 2/3 rule in y: sine index `3p < 2m`, Fourier index `3|m| < n`.
    fn kept(&self, p: usize) -> bool {
        match self {
            YBasis::Sine { transform, .. } => 3 * p < 2 * transform.cells(),
            YBasis::Fourier { xi, .. } => {
                let n = xi.len();
                3 * p.min(n - p) < n
            }
        }
    }

    fn weight(&self) -> f64 {
        match self {
            YBasis::Sine { half_length, .. } => *half_length,
            YBasis::Fourier { scale, .. } => *scale,
        }
    }

    /// y-frequency of coefficient `p` at shear `shift`.
    fn freq(&self, p: usize, shift: f64) -> f64 {
        match self {
            YBasis::Sine { kappa, .. } => kappa[p],
            YBasis::Fourier { xi, .. } => xi[p] - shift,
        }
    }

    fn to_nodal(&self, coeffs: &[C64], derivative: bool) -> Vec<C64> {
        match self {
            YBasis::Sine { transform, .. } => {
                if derivative {
                    transform.cosine_synthesize(coeffs)
                } else {
                    transform.synthesize(coeffs)
                }
            }
            YBasis::Fourier { fft, .. } => {
                let mut buf = coeffs.to_vec();
                fft.inverse(&mut buf);
                buf
            }
        }
    }

    fn from_nodal(&self, nodal: &[C64]) -> Vec<C64> {
        match self {
            YBasis::Sine { transform, .. } => transform.analyze(nodal),
            YBasis::Fourier { fft, .. } => {
                let mut buf = nodal.to_vec();
                fft.forward(&mut buf);
                buf
            }
        }
    }

    /// Dealiased nodal profiles of one mode.
    fn nodal(&self, coeffs: &[C64], k: f64, shift: f64) -> Nodal {
        let n = self.len();
        let ik = C64::new(0.0, k);
        // On sine grids ∂_y maps sin to cos with the same coefficient times κ;
        // on periodic grids it multiplies by iq.
        let sine = matches!(self, YBasis::Sine { .. });
        let mut w = vec![ZERO; n];
        let mut dw = vec![ZERO; n];
        let mut phi = vec![ZERO; n];
        let mut dphi = vec![ZERO; n];
        for p in 0..n {
            if !self.kept(p) || coeffs[p] == ZERO {
                continue;
            }
            let q = self.freq(p, shift);
            let denom = q * q + k * k;
            let ph = if denom > 0.0 { -coeffs[p] / denom } else { ZERO };
            let d = if sine { C64::new(q, 0.0) } else { C64::new(0.0, q) };
            w[p] = coeffs[p];
            dw[p] = d * coeffs[p];
            phi[p] = ph;
            dphi[p] = d * ph;
        }
        let omega = self.to_nodal(&w, false);
        let phi = self.to_nodal(&phi, false);
        Nodal {
            dx_omega: omega.iter().map(|v| ik * v).collect(),
            dy_omega: self.to_nodal(&dw, true),
            ux: self.to_nodal(&dphi, true).iter().map(|v| -v).collect(),
            uy: phi.iter().map(|v| ik * v).collect(),
        }
    }

    /// `(‖f‖², ‖∂_y f‖²)` of one mode.
    fn norms(&self, coeffs: &[C64], shift: f64) -> (f64, f64) {
        let (mut a, mut b) = (0.0, 0.0);
        for (p, v) in coeffs.iter().enumerate() {
            let q = self.freq(p, shift);
            a += v.norm_sqr();
            b += q * q * v.norm_sqr();
        }
        (a * self.weight(), b * self.weight())
    }
}

/// Spectral field on the ladder together with its running dissipation integrals.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub t: f64,
    /// `k = 0` coefficients in the grid's basis (unsheared).
    pub mean: Vec<C64>,
    /// Modes `j = 1 .. nx/2 − 1`; `modes[j − 1]` has `k = jΔk`.
    pub modes: Vec<ModeState>,
    pub history: DissipationHistory,
    /// `𝓔` at the first recorded time.
    pub e0: Option<f64>,
    /// Largest masked-band energy fraction seen by the nonlinearity.
    pub max_masked_fraction: f64,
}

/// Output of [`compute_nonlinearity`]: `ℕ𝕃_k` for every stored mode.
#[derive(Debug, Clone)]
pub struct NonlinearTerm {
    pub mean: Vec<C64>,
    pub modes: Vec<Vec<C64>>,
    /// Fraction of `‖ω‖²` carried by modes outside the 2/3 band.
    pub masked_fraction: f64,
}

/// Cached transforms, propagators and energy evaluators for one configuration.
#[derive(Debug, Clone)]
pub struct FieldSolver {
    pub spec: DomainSpec,
    pub grid: Arc<YGrid>,
    pub ladder: Ladder,
    pub coeffs: HypoCoefficients,
    basis: YBasis,
    xfft: PeriodicFft,
    props: Vec<Propagator>,
    energies: Vec<ModeEnergy>,
}

impl FieldSolver {
    pub fn new(spec: DomainSpec, ny: usize, ladder: Ladder, coeffs: HypoCoefficients) -> Result<Self> {
        let grid = Arc::new(build_grid(&spec, ny)?);
        let mut props = Vec::new();
        let mut energies = Vec::new();
        for j in 1..ladder.len() {
            let k = ladder.k(j);
            props.push(Propagator::new(spec, grid.clone(), k)?);
            energies.push(ModeEnergy::new(spec.kind, &grid, spec.nu, k, coeffs)?);
        }
        Ok(Self { basis: YBasis::new(&grid), xfft: PeriodicFft::new(ladder.nx), spec, grid, ladder, coeffs, props, energies })
    }

    /// x-coordinates of the physical grid, `[0, Lx)`.
    pub fn x_nodes(&self) -> Vec<f64> {
        let h = self.ladder.period() / self.ladder.nx as f64;
        (0..self.ladder.nx).map(|i| i as f64 * h).collect()
    }

    /// Recommended step `min(0.5/(K_max y_max), 0.1/λ_max)`.
    pub fn default_step(&self) -> f64 {
        let kmax = self.ladder.k_max();
        let lam = lambda_unchecked(self.spec.kind.rate_family(), self.spec.nu, kmax);
        (0.5 / (kmax * self.spec.y_max())).min(0.1 / lam)
    }

    pub fn zero_state(&self) -> Result<FieldState> {
        self.state_from_spectra(vec![ZERO; self.grid.len()], vec![vec![ZERO; self.grid.len()]; self.ladder.len() - 1])
    }

    /// Field sampled from a real function of `(x, y)` and projected on the 2/3 band.
    pub fn initial_state(&self, f: impl Fn(f64, f64) -> f64) -> Result<FieldState> {
        let nx = self.ladder.nx;
        let xs = self.x_nodes();
        let ny = self.grid.len();
        let mut spectra = vec![vec![ZERO; ny]; self.ladder.len()];
        let mut buf = vec![ZERO; nx];
        for (iy, &y) in self.grid.nodes.iter().enumerate() {
            for (b, &x) in buf.iter_mut().zip(&xs) {
                *b = C64::new(f(x, y), 0.0);
            }
            self.xfft.forward(&mut buf);
            for (j, s) in spectra.iter_mut().enumerate() {
                s[iy] = buf[j] / nx as f64;
            }
        }
        let mut modal: Vec<Vec<C64>> = spectra
            .iter()
            .enumerate()
            .map(|(j, nodal)| if self.ladder.kept(j) { self.mask_y(self.basis.from_nodal(nodal)) } else { vec![ZERO; ny] })
            .collect();
        let mean = modal.remove(0);
        self.state_from_spectra(mean, modal)
    }

    fn mask_y(&self, mut c: Vec<C64>) -> Vec<C64> {
        for (p, v) in c.iter_mut().enumerate() {
            if !self.basis.kept(p) {
                *v = ZERO;
            }
        }
        c
    }

    fn state_from_spectra(&self, mean: Vec<C64>, modes: Vec<Vec<C64>>) -> Result<FieldState> {
        let modes = modes
            .into_iter()
            .enumerate()
            .map(|(i, coeffs)| ModeState { spec: self.spec, k: self.ladder.k(i + 1), t: 0.0, grid: self.grid.clone(), coeffs })
            .collect();
        let mut state = FieldState { t: 0.0, mean, modes, history: DissipationHistory::new(), e0: None, max_masked_fraction: 0.0 };
        self.record(&mut state)?;
        Ok(state)
    }

    /// Multiply every coefficient by `s`, restarting the history at the current time.
    pub fn rescale(&self, state: &mut FieldState, s: f64) -> Result<()> {
        state.mean.iter_mut().for_each(|v| *v *= s);
        for m in &mut state.modes {
            m.coeffs.iter_mut().for_each(|v| *v *= s);
        }
        state.history = DissipationHistory::new();
        state.e0 = None;
        self.record(state).map(|_| ())
    }

    /// Mode samples scaled to the transform `ω̂_k = Lx c_k`.
    pub fn samples(&self, state: &FieldState) -> Vec<ModeSample> {
        let l2 = self.ladder.period().powi(2);
        state
            .modes
            .iter()
            .zip(&self.energies)
            .map(|(m, e)| ModeSample {
                k: m.k,
                breakdown: e.breakdown(&m.coeffs, m.shift()).scaled(l2),
                sup_part: e.sup_part(&m.coeffs, m.shift()) * l2,
            })
            .collect()
    }

    /// Riemann weight of one stored mode: it stands for both `±k`.
    fn bin_width(&self) -> f64 {
        2.0 * self.ladder.dk
    }

    fn record(&self, state: &mut FieldState) -> Result<GlobalEnergyReport> {
        let samples = self.samples(state);
        let family = self.spec.kind.rate_family();
        state.history.record(state.t, &samples, self.bin_width(), family, &self.coeffs)?;
        let report = global_energy(&samples, &state.history, self.bin_width(), self.spec.kind, &self.coeffs, state.t)?;
        if state.e0.is_none() {
            state.e0 = Some(report.e_total);
        }
        Ok(report)
    }

    /// Global functionals at the state's current time.
    pub fn report(&self, state: &FieldState) -> Result<GlobalEnergyReport> {
        let samples = self.samples(state);
        global_energy(&samples, &state.history, self.bin_width(), self.spec.kind, &self.coeffs, state.t)
    }

    /// Physical `L²` norm over one x-period, `(Lx Σ_k ‖ω_k‖²)^{1/2}`.
    pub fn l2_norm(&self, state: &FieldState) -> f64 {
        let lx = self.ladder.period();
        let mut s = self.basis.norms(&state.mean, 0.0).0;
        for m in &state.modes {
            s += 2.0 * self.basis.norms(&m.coeffs, m.shift()).0;
        }
        (lx * s).sqrt()
    }

    /// Threshold norm `Σ_{j≤1} ‖⟨∂_x⟩^m ⟨∂_x/ν⟩^{−j/3} ∂_y^j ω‖₂`, plus
    /// `sup_k ‖ω̂_k‖₂` on plane-type domains.
    pub fn threshold_norm(&self, state: &FieldState) -> f64 {
        let lx = self.ladder.period();
        let nu = self.spec.nu;
        let m = self.coeffs.m;
        let (w0, d0) = self.basis.norms(&state.mean, 0.0);
        let (mut a, mut b) = (w0, d0);
        let mut sup = w0.sqrt();
        for mode in &state.modes {
            let k = mode.k;
            let (w, d) = self.basis.norms(&mode.coeffs, mode.shift());
            let sob = (1.0 + k * k).powf(m);
            a += 2.0 * sob * w;
            b += 2.0 * sob * d * (1.0 + (k / nu).powi(2)).powf(-1.0 / 3.0);
            sup = sup.max(w.sqrt());
        }
        let base = (lx * a).sqrt() + (lx * b).sqrt();
        match NormKind::for_domain(self.spec.kind) {
            NormKind::ChannelSobolevOnly => base,
            NormKind::PlaneWithLinfty => base + lx * sup,
        }
    }

    /// Real vorticity on the physical grid, indexed `[iy][ix]`. On whole-line
    /// grids the values are in the sheared coordinate `x − ty`.
    pub fn physical(&self, state: &FieldState) -> Vec<Vec<f64>> {
        let ny = self.grid.len();
        let mut spectra = vec![self.basis.to_nodal(&state.mean, false)];
        spectra.extend(state.modes.iter().map(|m| self.basis.to_nodal(&m.coeffs, false)));
        (0..ny).map(|iy| self.synthesize_x(&spectra, iy).iter().map(|v| v.re).collect()).collect()
    }

    fn synthesize_x(&self, spectra: &[Vec<C64>], iy: usize) -> Vec<C64> {
        let nx = self.ladder.nx;
        let mut buf = vec![ZERO; nx];
        buf[0] = spectra[0][iy];
        for j in 1..spectra.len() {
            buf[j] = spectra[j][iy];
            buf[nx - j] = spectra[j][iy].conj();
        }
        self.xfft.inverse(&mut buf);
        buf.iter_mut().for_each(|v| *v *= nx as f64);
        buf
    }

    /// Relative L² size of `∂_x u_x + ∂_y u_y` for the dealiased velocity,
    /// with `∂_y u_y` taken by re-analysing the nodal `u_y`.
    pub fn divergence_residual(&self, state: &FieldState) -> f64 {
        let sine = matches!(self.basis, YBasis::Sine { .. });
        let (mut num, mut den) = (0.0, 0.0);
        let mut add = |coeffs: &[C64], k: f64, shift: f64| {
            let n = self.basis.nodal(coeffs, k, shift);
            let mut c = self.basis.from_nodal(&n.uy);
            for (p, v) in c.iter_mut().enumerate() {
                let q = self.basis.freq(p, shift);
                *v *= if sine { C64::new(q, 0.0) } else { C64::new(0.0, q) };
            }
            let dy_uy = self.basis.to_nodal(&c, true);
            for (ux, dy) in n.ux.iter().zip(&dy_uy) {
                let dx = C64::new(0.0, k) * ux;
                num += (dx + dy).norm_sqr();
                den += dx.norm_sqr() + dy.norm_sqr();
            }
        };
        add(&state.mean, 0.0, 0.0);
        for m in &state.modes {
            add(&m.coeffs, m.k, m.shift());
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            0.0
        }
    }

    fn masked_fraction(&self, state: &FieldState) -> f64 {
        let mut total = 0.0;
        let mut masked = 0.0;
        let mut add = |j: usize, c: &[C64]| {
            let mult = if j == 0 { 1.0 } else { 2.0 };
            for (p, v) in c.iter().enumerate() {
                let e = mult * v.norm_sqr();
                total += e;
                if !(self.ladder.kept(j) && self.basis.kept(p)) {
                    masked += e;
                }
            }
        };
        add(0, &state.mean);
        for (i, m) in state.modes.iter().enumerate() {
            add(i + 1, &m.coeffs);
        }
        if total > 0.0 {
            masked / total
        } else {
            0.0
        }
    }

    /// `ℕ𝕃 = −u·∇ω`, dealiased, without the resolution check.
    pub fn nonlinearity(&self, state: &FieldState) -> NonlinearTerm {
        let nx = self.ladder.nx;
        let ny = self.grid.len();
        let nmodes = self.ladder.len();
        let mut nodal: Vec<Nodal> = Vec::with_capacity(nmodes);
        nodal.push(self.basis.nodal(&state.mean, 0.0, 0.0));
        for (i, m) in state.modes.iter().enumerate() {
            if self.ladder.kept(i + 1) {
                nodal.push(self.basis.nodal(&m.coeffs, m.k, m.shift()));
            }
        }
        let active = nodal.len();
        let mut out_nodal = vec![vec![ZERO; ny]; nmodes];
        let mut fields: [Vec<C64>; 4] = Default::default();
        for iy in 0..ny {
            let pick = |f: fn(&Nodal) -> &Vec<C64>| {
                let spectra: Vec<C64> = nodal.iter().map(|n| f(n)[iy]).collect();
                spectra
            };
            let columns = [pick(|n| &n.ux), pick(|n| &n.uy), pick(|n| &n.dx_omega), pick(|n| &n.dy_omega)];
            for (dst, col) in fields.iter_mut().zip(&columns) {
                let mut buf = vec![ZERO; nx];
                buf[0] = col[0];
                for j in 1..active {
                    buf[j] = col[j];
                    buf[nx - j] = col[j].conj();
                }
                self.xfft.inverse(&mut buf);
                *dst = buf;
            }
            // nx² from the two unnormalized syntheses, 1/nx from the analysis
            let scale = nx as f64;
            let mut prod: Vec<C64> = (0..nx)
                .map(|i| C64::new(-(fields[0][i].re * fields[2][i].re + fields[1][i].re * fields[3][i].re) * scale, 0.0))
                .collect();
            self.xfft.forward(&mut prod);
            for (j, o) in out_nodal.iter_mut().enumerate() {
                if self.ladder.kept(j) {
                    o[iy] = prod[j];
                }
            }
        }
        let mut out: Vec<Vec<C64>> =
            out_nodal.iter().map(|n| self.mask_y(self.basis.from_nodal(n))).collect();
        let mean = out.remove(0);
        NonlinearTerm { mean, modes: out, masked_fraction: self.masked_fraction(state) }
    }

    fn propagate(&self, state: &mut FieldState, dt: f64) -> Result<()> {
        let nu = self.spec.nu;
        for (p, v) in state.mean.iter_mut().enumerate() {
            let q = self.basis.freq(p, 0.0);
            *v *= (-nu * q * q * dt).exp();
        }
        for (m, prop) in state.modes.iter_mut().zip(&self.props) {
            prop.step(m, self.spec.coriolis_b, dt)?;
        }
        state.t += dt;
        Ok(())
    }
}

fn axpy(state: &mut FieldState, a: f64, term: &NonlinearTerm) {
    state.mean.iter_mut().zip(&term.mean).for_each(|(v, n)| *v += n * a);
    for (m, n) in state.modes.iter_mut().zip(&term.modes) {
        m.coeffs.iter_mut().zip(n).for_each(|(v, d)| *v += d * a);
    }
}

/// `ℕ𝕃_k` for every stored mode; fails if the field has more than
/// [`ALIAS_LIMIT`] of its energy outside the 2/3 band.
pub fn compute_nonlinearity(solver: &FieldSolver, field: &FieldState) -> Result<NonlinearTerm> {
    let term = solver.nonlinearity(field);
    if term.masked_fraction > ALIAS_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "under-resolved field: {:.3e} of the energy lies in the dealiased band",
            term.masked_fraction
        )));
    }
    Ok(term)
}

/// One integrating-factor RK2 step. Records the dissipation history and
/// returns the global functionals at the new time.
pub fn step_nonlinear(solver: &FieldSolver, field: &mut FieldState, dt: f64) -> Result<GlobalEnergyReport> {
    let n0 = solver.nonlinearity(field);
    let mut stage = field.clone();
    axpy(&mut stage, dt, &n0);
    solver.propagate(&mut stage, dt)?;
    let n1 = solver.nonlinearity(&stage);

    let mut next = field.clone();
    axpy(&mut next, 0.5 * dt, &n0);
    solver.propagate(&mut next, dt)?;
    axpy(&mut next, 0.5 * dt, &n1);
    next.max_masked_fraction = field.max_masked_fraction.max(n0.masked_fraction).max(n1.masked_fraction);

    let report = solver.record(&mut next)?;
    let e0 = next.e0.unwrap_or(0.0);
    let limit = BLOW_UP_FACTOR * e0;
    if !report.e_total.is_finite() || (report.e_total > limit && report.e_total > 0.0) {
        return Err(Error::BlowUp { t: next.t, energy: report.e_total, limit });
    }
    *field = next;
    Ok(report)
}

/// Record of a bootstrap run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapMonitor {
    pub e0: f64,
    /// `(t, 𝓔(t), 𝓓(t))`
    pub series: Vec<(f64, f64, f64)>,
    pub reports: Vec<GlobalEnergyReport>,
    /// `𝓔(t) ≤ 2𝓔(0)` so far.
    pub threshold_ok: bool,
    pub first_violation: Option<f64>,
    /// `𝓔(t) + 2c𝓓(t) ≤ 2𝓔(0)` so far.
    pub bootstrap_ok: bool,
    pub first_bootstrap_violation: Option<f64>,
    pub max_masked_fraction: f64,
    /// Worst [`FieldSolver::divergence_residual`] over the reported times.
    pub max_divergence: f64,
    /// Set when the dealias monitor exceeded [`ALIAS_LIMIT`].
    pub under_resolved: bool,
    pub initial_norm: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub steps: usize,
}

impl BootstrapMonitor {
    fn new(e0: f64) -> Self {
        Self {
            e0,
            series: Vec::new(),
            reports: Vec::new(),
            threshold_ok: true,
            first_violation: None,
            bootstrap_ok: true,
            first_bootstrap_violation: None,
            max_masked_fraction: 0.0,
            max_divergence: 0.0,
            under_resolved: false,
            initial_norm: 0.0,
            epsilon: 0.0,
            dt: 0.0,
            steps: 0,
        }
    }

    fn observe(&mut self, r: &GlobalEnergyReport, c: f64) {
        let slack = 1e-12 * self.e0;
        if r.e_total > 2.0 * self.e0 + slack {
            self.threshold_ok = false;
            self.first_violation.get_or_insert(r.time);
        }
        if r.e_total + 2.0 * c * r.d_total > 2.0 * self.e0 + slack {
            self.bootstrap_ok = false;
            self.first_bootstrap_violation.get_or_insert(r.time);
        }
        self.series.push((r.time, r.e_total, r.d_total));
    }

    pub fn passed(&self) -> bool {
        self.threshold_ok && self.bootstrap_ok
    }
}

/// Knobs of a bootstrap run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub nx: usize,
    pub ny: usize,
    /// Threshold constant `δ` in `ε = δν^{1/2}/(1 + ln(1/ν)^{1/2})`.
    pub delta: f64,
    /// Keep every `report_every`-th report in the monitor.
    pub report_every: usize,
    pub max_steps: usize,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { nx: 64, ny: 65, delta: 1.0, report_every: 50, max_steps: 1_000_000 }
    }
}

/// Initial vorticity: the domain's default profile in y under a Gaussian
/// envelope of width `Lx/16` centred in the period.
pub fn bootstrap_profile(kind: DomainKind, period: f64) -> impl Fn(f64, f64) -> f64 {
    let prof = default_profile(kind);
    let centre = 0.5 * period;
    let width = period / 16.0;
    move |x, y| (-((x - centre) / width).powi(2)).exp() * prof(y).re
}

/// Evolve data of size `amplitude_ratio · ε(ν)` (threshold norm) to `horizon`
/// and monitor the bootstrap inequalities.
pub fn run_bootstrap_experiment(
    spec: DomainSpec,
    amplitude_ratio: f64,
    horizon: f64,
    coeffs: &HypoCoefficients,
    opts: BootstrapOptions,
) -> Result<BootstrapMonitor> {
    if !(0.0..=4.0).contains(&amplitude_ratio) {
        return Err(Error::InvalidArgument(format!("amplitude ratio must lie in [0, 4], got {amplitude_ratio}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let ladder = Ladder::for_viscosity(spec.nu, opts.nx)?;
    let solver = FieldSolver::new(spec, opts.ny, ladder, *coeffs)?;
    let epsilon = crate::energy::threshold_epsilon(spec.nu, opts.delta, NormKind::for_domain(spec.kind))?;
    let mut field = solver.initial_state(bootstrap_profile(spec.kind, ladder.period()))?;
    let norm = solver.threshold_norm(&field);
    let target = amplitude_ratio * epsilon;
    solver.rescale(&mut field, if norm > 0.0 { target / norm } else { 0.0 })?;

    let dt0 = solver.default_step();
    let steps = (horizon / dt0).ceil() as usize;
    if steps > opts.max_steps {
        return Err(Error::ResolutionCap { got: steps, cap: opts.max_steps });
    }
    let dt = horizon / steps as f64;
    let first = solver.report(&field)?;
    let mut monitor = BootstrapMonitor::new(first.e_total);
    monitor.initial_norm = solver.threshold_norm(&field);
    monitor.epsilon = epsilon;
    monitor.dt = dt;
    monitor.steps = steps;
    monitor.observe(&first, coeffs.c);
    monitor.reports.push(first);
    monitor.max_divergence = solver.divergence_residual(&field);
    for step in 1..=steps {
        let r = step_nonlinear(&solver, &mut field, dt)?;
        monitor.observe(&r, coeffs.c);
        if step % opts.report_every.max(1) == 0 || step == steps {
            monitor.reports.push(r);
            monitor.max_divergence = monitor.max_divergence.max(solver.divergence_residual(&field));
        }
    }
    monitor.max_masked_fraction = field.max_masked_fraction;
    monitor.under_resolved = field.max_masked_fraction > ALIAS_LIMIT;
    Ok(monitor)
}

/// Relative deviation at time `t` between a nonlinear run started at threshold
/// norm `amplitude` and the superposed linear evolution of the same data.
pub fn linear_consistency(spec: DomainSpec, amplitude: f64, t: f64, coeffs: &HypoCoefficients, opts: BootstrapOptions) -> Result<f64> {
    let ladder = Ladder::for_viscosity(spec.nu, opts.nx)?;
    let solver = FieldSolver::new(spec, opts.ny, ladder, *coeffs)?;
    let mut field = solver.initial_state(bootstrap_profile(spec.kind, ladder.period()))?;
    let norm = solver.threshold_norm(&field);
    if norm == 0.0 {
        return Err(Error::InvalidArgument("initial profile vanishes".into()));
    }
    solver.rescale(&mut field, amplitude / norm)?;
    let mut linear = field.clone();
    let steps = (t / solver.default_step()).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    for _ in 0..steps {
        step_nonlinear(&solver, &mut field, dt)?;
        solver.propagate(&mut linear, dt)?;
    }
    let pairs = std::iter::once((&field.mean, &linear.mean))
        .chain(field.modes.iter().map(|m| &m.coeffs).zip(linear.modes.iter().map(|m| &m.coeffs)));
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in pairs {
        for (x, y) in a.iter().zip(b) {
            num += (x - y).norm_sqr();
            den += y.norm_sqr();
        }
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { 0.0 })
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    spec: DomainSpec,
    ny: usize,
    ladder: Ladder,
    t: f64,
    mean: Vec<C64>,
    modes: Vec<Vec<C64>>,
    history: DissipationHistory,
    e0: Option<f64>,
    max_masked_fraction: f64,
}

/// Write a versioned text checkpoint: one header line, then JSON.
pub fn write_checkpoint(w: &mut impl Write, solver: &FieldSolver, state: &FieldState) -> Result<()> {
    let cp = Checkpoint {
        spec: solver.spec,
        ny: solver.grid.len(),
        ladder: solver.ladder,
        t: state.t,
        mean: state.mean.clone(),
        modes: state.modes.iter().map(|m| m.coeffs.clone()).collect(),
        history: state.history.clone(),
        e0: state.e0,
        max_masked_fraction: state.max_masked_fraction,
    };
    writeln!(w, "{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}")?;
    serde_json::to_writer(&mut *w, &cp).map_err(|e| Error::Checkpoint(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Read a checkpoint written by [`write_checkpoint`], rebuilding the solver with `coeffs`.
pub fn read_checkpoint(r: &mut impl BufRead, coeffs: HypoCoefficients) -> Result<(FieldSolver, FieldState)> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(CHECKPOINT_MAGIC) {
        return Err(Error::Checkpoint("missing checkpoint header".into()));
    }
    let version: u32 = parts.next().and_then(|v| v.parse().ok()).ok_or_else(|| Error::Checkpoint("bad version".into()))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let cp: Checkpoint = serde_json::from_reader(r).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let solver = FieldSolver::new(cp.spec, cp.ny, cp.ladder, coeffs)?;
    if cp.modes.len() + 1 != cp.ladder.len() || cp.mean.len() != cp.ny || cp.modes.iter().any(|m| m.len() != cp.ny) {
        return Err(Error::Checkpoint("coefficient layout does not match the ladder".into()));
    }
    let modes = cp
        .modes
        .into_iter()
        .enumerate()
        .map(|(i, coeffs)| ModeState { spec: cp.spec, k: cp.ladder.k(i + 1), t: cp.t, grid: solver.grid.clone(), coeffs })
        .collect();
    let state = FieldState {
        t: cp.t,
        mean: cp.mean,
        modes,
        history: cp.history,
        e0: cp.e0,
        max_masked_fraction: cp.max_masked_fraction,
    };
    Ok((solver, state))
}
