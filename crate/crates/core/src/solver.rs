//! Pseudo-spectral RK4 integration of the b-equation
//!
//! ```text
//! m_t + u m_x + b u_x m = 0,   m = u - u_xx,
//! ```
//!
//! in velocity form
//! `u_t = -u u_x - d_x (1 - d_xx)^{-1} ((b/2) u^2 + ((3-b)/2) u_x^2)`
//! or in momentum form `m_t = -(u m)_x + (1 - b) u_x m`. Quadratic products
//! are formed pointwise and projected with the 2/3 rule.
//!
//! The step size is `cfl * min(dx / max(1, |u|_inf), 1 / |u_x|_inf)`, so it
//! shrinks as the slope steepens. A run stops with
//! [`Verdict::BlowupDetected`] when `|u_x|_inf` crosses its threshold or the
//! accumulated `int |u_x|_inf dt` passes its cap while the step has
//! collapsed, and with [`Verdict::ResolutionLost`] when the top octave
//! below the dealiasing cutoff holds too much energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristics::{CharCloud, DEFAULT_PARTICLES};
use crate::diagnostics::{diag_record, DiagRecord, RecordInputs};
use crate::error::{config, Error, Result};
use crate::lp::{build_lp_basis, LPBasis};
use crate::spectral::{fourier_eval, GridSpec, RealField, DEFAULT_DECAY_TOLERANCE};

/// Default dealiasing fraction (2/3 rule).
pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// The step counts as collapsed once it falls below this fraction of the
/// first step.
pub const DT_COLLAPSE_FACTOR: f64 = 1e-3;

/// The family parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BParams {
    pub b: f64,
}

impl BParams {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return config(format!("b must be finite, got {b}"));
        }
        Ok(Self { b })
    }
}

/// Which state(s) a run evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Velocity,
    Momentum,
    /// Both forms in lockstep; records carry the gap between them.
    Both,
}

/// A single evolution equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Velocity,
    Momentum,
}

/// Coefficient of `u_x^2` inside the nonlocal term of the velocity form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlocalSign {
    /// `(3 - b)/2`, the coefficient obtained by expanding the momentum form.
    Derived,
    /// `(b - 3)/2`.
    AsPrinted,
}

impl NonlocalSign {
    pub fn coefficient(self, b: f64) -> f64 {
        match self {
            NonlocalSign::Derived => 0.5 * (3.0 - b),
            NonlocalSign::AsPrinted => 0.5 * (b - 3.0),
        }
    }
}

/// Particle tracking request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tracking {
    /// Distinguished label whose trajectory `y(t, x0)` feeds the sign checks.
    pub x0: f64,
    #[serde(default = "default_particles")]
    pub particles: usize,
}

fn default_particles() -> usize {
    DEFAULT_PARTICLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub dealias_fraction: f64,
    #[serde(with = "crate::serde_ext")]
    pub blowup_slope_threshold: f64,
    #[serde(with = "crate::serde_ext")]
    pub blowup_integral_threshold: f64,
    /// Largest admissible energy fraction in the top octave below the cutoff.
    pub tail_energy_threshold: f64,
    pub form: Form,
    /// Records per unit time; 0 records only the start and the end.
    pub cadence: f64,
    /// Sequence exponent of the recorded `B^{3/2}_{2,q}` norm.
    #[serde(with = "crate::serde_ext")]
    pub besov_q: f64,
    /// Boundary-decay guard on `u0`; `None` disables it (torus data).
    #[serde(with = "crate::serde_ext::off")]
    pub decay_tolerance: Option<f64>,
    pub tracking: Option<Tracking>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            t_end: 1.0,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
            blowup_slope_threshold: 1e4,
            blowup_integral_threshold: 1e3,
            tail_energy_threshold: 1e-6,
            form: Form::Velocity,
            cadence: 10.0,
            besov_q: 2.0,
            decay_tolerance: Some(DEFAULT_DECAY_TOLERANCE),
            tracking: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return config(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return config(format!("t_end must be finite and nonnegative, got {}", self.t_end));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return config(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            ));
        }
        for (name, v) in [
            ("blowup_slope_threshold", self.blowup_slope_threshold),
            ("blowup_integral_threshold", self.blowup_integral_threshold),
            ("tail_energy_threshold", self.tail_energy_threshold),
        ] {
            if !(v > 0.0) {
                return config(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.cadence.is_finite() && self.cadence >= 0.0) {
            return config(format!("cadence must be finite and nonnegative, got {}", self.cadence));
        }
        if !(self.besov_q >= 1.0) {
            return config(format!("besov_q must be >= 1 or inf, got {}", self.besov_q));
        }
        if let Some(tol) = self.decay_tolerance {
            if !(tol > 0.0) {
                return config(format!("decay_tolerance must be positive, got {tol}"));
            }
        }
        if let Some(tr) = &self.tracking {
            if tr.particles == 0 || !tr.x0.is_finite() {
                return config("tracking needs a finite x0 and at least one particle");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Completed,
    BlowupDetected,
    ResolutionLost,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Completed => "completed",
            Verdict::BlowupDetected => "blowup_detected",
            Verdict::ResolutionLost => "resolution_lost",
        }
    }
}

/// Solver-side quantities logged next to each [`DiagRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub t: f64,
    /// Last step size taken (0 before the first step).
    pub dt: f64,
    pub slope_integral: f64,
    pub tail_fraction: f64,
    /// `max |u_velocity - (1 - d_xx)^{-1} m_momentum|` when both forms run.
    pub cross_form_gap: Option<f64>,
    pub transport_residual: Option<f64>,
    /// Sign of `m` carried along every characteristic.
    pub particle_signs_ok: Option<bool>,
    pub flow_ordered: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<DiagRecord>,
    pub monitors: Vec<Monitor>,
    pub verdict: Verdict,
    pub verdict_time: f64,
    pub steps: usize,
    pub final_velocity: RealField,
    pub final_cloud: Option<CharCloud>,
}

impl RunResult {
    /// Running supremum of the energy-inequality ratio over the records.
    pub fn energy_ratio_sup(&self) -> f64 {
        self.records.iter().map(|r| r.energy_ratio).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Precomputed spectral data shared by every tendency evaluation.
struct Kernel {
    grid: GridSpec,
    cutoff: usize,
    k: Vec<f64>,
}

impl Kernel {
    fn new(grid: &GridSpec, fraction: f64) -> Self {
        let k = (0..grid.half_len()).map(|j| grid.wavenumber(j as i64)).collect();
        Self {
            grid: grid.clone(),
            cutoff: grid.cutoff_index(fraction),
            k,
        }
    }

    fn ik(&self, j: usize) -> Complex64 {
        if j == self.grid.num_points() / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, self.k[j])
        }
    }

    fn derivative_of(&self, half: &[Complex64]) -> Vec<f64> {
        let d = half.iter().enumerate().map(|(j, c)| c * self.ik(j)).collect();
        self.grid.irfft(d)
    }

    /// Velocity-form tendency and the raw half spectrum of `u`.
    fn velocity(&self, u: &[f64], b: f64, coef: f64) -> (Vec<f64>, Vec<Complex64>) {
        let uh = self.grid.rfft(u);
        let ux = self.derivative_of(&uh);
        let adv: Vec<f64> = u.iter().zip(&ux).map(|(a, d)| a * d).collect();
        let quad: Vec<f64> = u
            .iter()
            .zip(&ux)
            .map(|(a, d)| 0.5 * b * a * a + coef * d * d)
            .collect();
        let ah = self.grid.rfft(&adv);
        let qh = self.grid.rfft(&quad);
        let out: Vec<Complex64> = (0..uh.len())
            .map(|j| {
                if j > self.cutoff {
                    return Complex64::new(0.0, 0.0);
                }
                let kk = self.k[j];
                -ah[j] - self.ik(j) * qh[j] / (1.0 + kk * kk)
            })
            .collect();
        (self.grid.irfft(out), uh)
    }

    /// Momentum-form tendency and the raw half spectrum of `u`.
    fn momentum(&self, m: &[f64], b: f64) -> (Vec<f64>, Vec<Complex64>) {
        let mh = self.grid.rfft(m);
        let uh: Vec<Complex64> =
            mh.iter().zip(&self.k).map(|(c, kk)| c / (1.0 + kk * kk)).collect();
        let u = self.grid.irfft(uh.clone());
        let ux = self.derivative_of(&uh);
        let flux: Vec<f64> = u.iter().zip(m).map(|(a, c)| a * c).collect();
        let stretch: Vec<f64> = ux.iter().zip(m).map(|(a, c)| a * c).collect();
        let fh = self.grid.rfft(&flux);
        let sh = self.grid.rfft(&stretch);
        let out: Vec<Complex64> = (0..mh.len())
            .map(|j| {
                if j > self.cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    -self.ik(j) * fh[j] + (1.0 - b) * sh[j]
                }
            })
            .collect();
        (self.grid.irfft(out), uh)
    }

    fn tendency(&self, eq: Equation, y: &[f64], b: f64, coef: f64) -> (Vec<f64>, Vec<Complex64>) {
        match eq {
            Equation::Velocity => self.velocity(y, b, coef),
            Equation::Momentum => self.momentum(y, b),
        }
    }

    fn project(&self, y: &[f64]) -> Vec<f64> {
        let mut h = self.grid.rfft(y);
        h.iter_mut().skip(self.cutoff + 1).for_each(|c| *c = Complex64::new(0.0, 0.0));
        self.grid.irfft(h)
    }

    /// One RK4 step; also returns the velocity half spectra of the four stages.
    fn rk4(
        &self,
        eq: Equation,
        y: &[f64],
        b: f64,
        coef: f64,
        dt: f64,
    ) -> Result<(Vec<f64>, [Vec<Complex64>; 4])> {
        let axpy = |a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(v, d)| v + a * d).collect() };
        let (k1, h1) = self.tendency(eq, y, b, coef);
        let (k2, h2) = self.tendency(eq, &axpy(0.5 * dt, &k1), b, coef);
        let (k3, h3) = self.tendency(eq, &axpy(0.5 * dt, &k2), b, coef);
        let (k4, h4) = self.tendency(eq, &axpy(dt, &k3), b, coef);
        let next: Vec<f64> = (0..y.len())
            .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if let Some(index) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok((self.project(&next), [h1, h2, h3, h4]))
    }
}

/// `du/dt` in velocity form with the derived coefficient and the 2/3 rule.
pub fn rhs_velocity(u: &RealField, b: f64) -> RealField {
    rhs_velocity_with(u, b, NonlocalSign::Derived, DEFAULT_DEALIAS_FRACTION)
}

pub fn rhs_velocity_with(u: &RealField, b: f64, sign: NonlocalSign, fraction: f64) -> RealField {
    let kernel = Kernel::new(u.grid(), fraction);
    let (out, _) = kernel.velocity(u.samples(), b, sign.coefficient(b));
    RealField::from_raw(u.grid(), out)
}

/// Velocity tendency of `u` with every quadratic product kept: the field is
/// refined to a grid twice as fine first, so the result lives on that grid.
pub fn resolved_velocity_tendency(u: &RealField, b: f64) -> Result<(RealField, RealField)> {
    let fine = crate::spectral::refine(u, 2)?;
    let dudt = rhs_velocity(&fine, b);
    Ok((fine, dudt))
}

/// `dm/dt = -(u m)_x + (1 - b) u_x m` with `u = (1 - d_xx)^{-1} m`.
pub fn rhs_momentum(m: &RealField, b: f64) -> RealField {
    rhs_momentum_with(m, b, DEFAULT_DEALIAS_FRACTION)
}

pub fn rhs_momentum_with(m: &RealField, b: f64, fraction: f64) -> RealField {
    let kernel = Kernel::new(m.grid(), fraction);
    let (out, _) = kernel.momentum(m.samples(), b);
    RealField::from_raw(m.grid(), out)
}

/// One classical RK4 step followed by the 2/3-rule projection. A non-finite
/// result is reported as [`Error::NonFinite`], the blow-up signal.
pub fn step_rk4(state: &RealField, b: f64, dt: f64, eq: Equation) -> Result<RealField> {
    step_rk4_with(state, b, dt, eq, DEFAULT_DEALIAS_FRACTION)
}

pub fn step_rk4_with(
    state: &RealField,
    b: f64,
    dt: f64,
    eq: Equation,
    fraction: f64,
) -> Result<RealField> {
    if !(dt > 0.0 && dt.is_finite()) {
        return config(format!("time step must be positive, got {dt}"));
    }
    let kernel = Kernel::new(state.grid(), fraction);
    let coef = NonlocalSign::Derived.coefficient(b);
    let (next, _) = kernel.rk4(eq, state.samples(), b, coef, dt)?;
    Ok(RealField::from_raw(state.grid(), next))
}

/// Outcome of one [`Simulation::advance`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvent {
    pub recorded: bool,
    pub finished: Option<Verdict>,
}

struct Probe {
    umax: f64,
    slope: f64,
    tail: f64,
}

/// A run in progress, advanced one step at a time.
pub struct Simulation {
    kernel: Kernel,
    b: f64,
    coef: f64,
    cfg: SolverConfig,
    basis: Option<LPBasis>,
    vel: Option<Vec<f64>>,
    mom: Option<Vec<f64>>,
    t: f64,
    steps: usize,
    slope_integral: f64,
    first_dt: Option<f64>,
    last_dt: f64,
    next_record: u64,
    cloud: Option<CharCloud>,
    m0: RealField,
    m0_at_labels: Vec<f64>,
    records: Vec<DiagRecord>,
    monitors: Vec<Monitor>,
    verdict: Option<(Verdict, f64)>,
}

impl Simulation {
    pub fn new(u0: &RealField, b: BParams, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let b = BParams::new(b.b)?.b;
        let grid = u0.grid().clone();
        if let Some(tol) = cfg.decay_tolerance {
            let edge = u0.boundary_magnitude(2.0 * grid.dx());
            if edge > tol {
                return config(format!(
                    "initial data does not decay at the boundary: |u| = {edge:e} > {tol:e}"
                ));
            }
        }
        let kernel = Kernel::new(&grid, cfg.dealias_fraction);
        let u = kernel.project(u0.samples());
        let m = {
            let h = grid.rfft(&u);
            let mh = h.iter().zip(&kernel.k).map(|(c, kk)| c * (1.0 + kk * kk)).collect();
            grid.irfft(mh)
        };
        let (vel, mom) = match cfg.form {
            Form::Velocity => (Some(u), None),
            Form::Momentum => (None, Some(m.clone())),
            Form::Both => (Some(u), Some(m.clone())),
        };
        let m0 = RealField::from_raw(&grid, m);
        let cloud = match &cfg.tracking {
            Some(tr) => Some(CharCloud::equispaced(&grid, tr.particles, Some(tr.x0))?),
            None => None,
        };
        let m0_at_labels = match &cloud {
            Some(c) => sample(&grid, &grid.rfft(m0.samples()), c.x0()),
            None => Vec::new(),
        };
        let mut sim = Self {
            kernel,
            b,
            coef: NonlocalSign::Derived.coefficient(b),
            basis: build_lp_basis(&grid).ok(),
            cfg,
            vel,
            mom,
            t: 0.0,
            steps: 0,
            slope_integral: 0.0,
            first_dt: None,
            last_dt: 0.0,
            next_record: 1,
            cloud,
            m0,
            m0_at_labels,
            records: Vec::new(),
            monitors: Vec::new(),
            verdict: None,
        };
        sim.record();
        Ok(sim)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.kernel.grid
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn last_dt(&self) -> f64 {
        self.last_dt
    }

    pub fn slope_integral(&self) -> f64 {
        self.slope_integral
    }

    pub fn basis(&self) -> Option<&LPBasis> {
        self.basis.as_ref()
    }

    pub fn cloud(&self) -> Option<&CharCloud> {
        self.cloud.as_ref()
    }

    pub fn records(&self) -> &[DiagRecord] {
        &self.records
    }

    pub fn monitors(&self) -> &[Monitor] {
        &self.monitors
    }

    pub fn verdict(&self) -> Option<(Verdict, f64)> {
        self.verdict
    }

    pub fn is_finished(&self) -> bool {
        self.verdict.is_some()
    }

    fn velocity_half(&self) -> Vec<Complex64> {
        match (&self.vel, &self.mom) {
            (Some(u), _) => self.kernel.grid.rfft(u),
            (None, Some(m)) => {
                let mh = self.kernel.grid.rfft(m);
                mh.iter().zip(&self.kernel.k).map(|(c, kk)| c / (1.0 + kk * kk)).collect()
            }
            (None, None) => unreachable!("a run always evolves one form"),
        }
    }

    /// Current velocity `u`.
    pub fn velocity(&self) -> RealField {
        let grid = &self.kernel.grid;
        let samples = match &self.vel {
            Some(u) => u.clone(),
            None => grid.irfft(self.velocity_half()),
        };
        RealField::from_raw(grid, samples).with_time(self.t)
    }

    /// Current momentum `m`; the evolved state in momentum form, otherwise
    /// `u - u_xx`.
    pub fn momentum(&self) -> RealField {
        let grid = &self.kernel.grid;
        let samples = match &self.mom {
            Some(m) => m.clone(),
            None => {
                let h = self.velocity_half();
                grid.irfft(h.iter().zip(&self.kernel.k).map(|(c, kk)| c * (1.0 + kk * kk)).collect())
            }
        };
        RealField::from_raw(grid, samples).with_time(self.t)
    }

    /// Velocity-form tendency at the current state.
    pub fn velocity_tendency(&self) -> RealField {
        let u = self.velocity();
        let (out, _) = self.kernel.velocity(u.samples(), self.b, self.coef);
        RealField::from_raw(&self.kernel.grid, out)
    }

    fn probe(&self) -> Probe {
        let grid = &self.kernel.grid;
        let half = self.velocity_half();
        let u = grid.irfft(half.clone());
        let ux = self.kernel.derivative_of(&half);
        let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let slope = ux.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let total: f64 = weighted_energy(grid, &half, 0, half.len() - 1);
        let lo = self.kernel.cutoff / 2 + 1;
        let tail = if total > 0.0 && lo <= self.kernel.cutoff {
            weighted_energy(grid, &half, lo, self.kernel.cutoff) / total
        } else {
            0.0
        };
        let (umax, slope) = if umax.is_finite() && slope.is_finite() {
            (umax, slope)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        Probe { umax, slope, tail }
    }

    fn classify(&self, p: &Probe) -> Option<Verdict> {
        if p.slope > self.cfg.blowup_slope_threshold {
            return Some(Verdict::BlowupDetected);
        }
        let collapsed = self
            .first_dt
            .is_some_and(|d0| self.last_dt > 0.0 && self.last_dt < DT_COLLAPSE_FACTOR * d0);
        if self.slope_integral > self.cfg.blowup_integral_threshold && collapsed {
            return Some(Verdict::BlowupDetected);
        }
        if p.tail > self.cfg.tail_energy_threshold {
            return Some(Verdict::ResolutionLost);
        }
        None
    }

    fn next_record_time(&self) -> Option<f64> {
        if self.cfg.cadence > 0.0 {
            let t = self.next_record as f64 / self.cfg.cadence;
            (t < self.cfg.t_end).then_some(t)
        } else {
            None
        }
    }

    fn finish(&mut self, v: Verdict) {
        self.verdict = Some((v, self.t));
        if self.records.last().is_none_or(|r| r.t < self.t) {
            self.record();
        }
    }

    /// Takes one step, or concludes the run.
    pub fn advance(&mut self) -> Result<StepEvent> {
        if let Some((v, _)) = self.verdict {
            return Ok(StepEvent { recorded: false, finished: Some(v) });
        }
        let probe = self.probe();
        if let Some(v) = self.classify(&probe) {
            self.finish(v);
            return Ok(StepEvent { recorded: true, finished: Some(v) });
        }
        let remaining = self.cfg.t_end - self.t;
        if remaining <= 1e-12 * self.cfg.t_end.max(1.0) {
            self.t = self.t.max(self.cfg.t_end);
            self.finish(Verdict::Completed);
            return Ok(StepEvent { recorded: true, finished: Some(Verdict::Completed) });
        }
        let dx = self.kernel.grid.dx();
        let mut dt = self.cfg.cfl * (dx / probe.umax.max(1.0)).min(1.0 / probe.slope);
        let mut landing = None;
        if dt >= remaining {
            dt = remaining;
            landing = Some(self.cfg.t_end);
        }
        if let Some(tr) = self.next_record_time() {
            if self.t + dt >= tr {
                dt = tr - self.t;
                landing = Some(tr);
            }
        }

        let stepped = self.step_states(dt);
        if let Err(err) = stepped {
            return match err {
                Error::NonFinite { .. } => {
                    self.finish(Verdict::BlowupDetected);
                    Ok(StepEvent { recorded: true, finished: Some(Verdict::BlowupDetected) })
                }
                other => Err(other),
            };
        }
        self.first_dt.get_or_insert(dt);
        self.last_dt = dt;
        self.steps += 1;
        self.slope_integral += probe.slope * dt;
        self.t = landing.unwrap_or(self.t + dt);

        let mut recorded = false;
        if landing.is_some() && landing != Some(self.cfg.t_end) {
            self.next_record += 1;
            self.record();
            recorded = true;
        }
        Ok(StepEvent { recorded, finished: None })
    }

    fn step_states(&mut self, dt: f64) -> Result<()> {
        let mut stages = None;
        let mut next_vel = None;
        let mut next_mom = None;
        if let Some(u) = &self.vel {
            let (n, h) = self.kernel.rk4(Equation::Velocity, u, self.b, self.coef, dt)?;
            next_vel = Some(n);
            stages = Some(h);
        }
        if let Some(m) = &self.mom {
            let (n, h) = self.kernel.rk4(Equation::Momentum, m, self.b, self.coef, dt)?;
            next_mom = Some(n);
            stages.get_or_insert(h);
        }
        if let (Some(cloud), Some(h)) = (self.cloud.as_mut(), stages.as_ref()) {
            cloud.advect_stages(&self.kernel.grid, [&h[0], &h[1], &h[2], &h[3]], dt);
        }
        if next_vel.is_some() {
            self.vel = next_vel;
        }
        if next_mom.is_some() {
            self.mom = next_mom;
        }
        Ok(())
    }

    fn record(&mut self) {
        let u = self.velocity();
        let dudt = self.velocity_tendency();
        let evolved_m = self.mom.is_some().then(|| self.momentum());
        let rec = diag_record(&RecordInputs {
            t: self.t,
            u: &u,
            dudt: &dudt,
            b: self.b,
            basis: self.basis.as_ref(),
            besov_q: self.cfg.besov_q,
            cloud: self.cloud.as_ref(),
            momentum: evolved_m.as_ref(),
        });
        let probe = self.probe();
        let grid = &self.kernel.grid;
        let cross_form_gap = match (&self.vel, &self.mom) {
            (Some(v), Some(m)) => {
                let mh = grid.rfft(m);
                let uh = mh.iter().zip(&self.kernel.k).map(|(c, kk)| c / (1.0 + kk * kk)).collect();
                let um = grid.irfft(uh);
                Some(v.iter().zip(&um).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
            }
            _ => None,
        };
        let (transport_residual, particle_signs_ok, flow_ordered) = match &self.cloud {
            Some(cloud) => {
                let m = self.momentum();
                let mh = grid.rfft(m.samples());
                let now = sample(grid, &mh, cloud.y());
                let tol = crate::diagnostics::SIGN_TOLERANCE * self.m0.max_abs().max(m.max_abs());
                let res = (0..cloud.len())
                    .map(|i| (now[i] * (self.b * cloud.log_jacobian()[i]).exp() - self.m0_at_labels[i]).abs())
                    .fold(0.0f64, f64::max);
                // Signs are only resolved above the transport error itself.
                let tol = tol.max(res);
                let signs = (0..cloud.len()).all(|i| {
                    let start = self.m0_at_labels[i];
                    now[i].abs() <= tol || start.abs() <= tol || now[i].signum() == start.signum()
                });
                let ordered = cloud.check_order() == crate::characteristics::FlowCheck::Ordered;
                (Some(res), Some(signs), Some(ordered))
            }
            None => (None, None, None),
        };
        self.monitors.push(Monitor {
            t: self.t,
            dt: self.last_dt,
            slope_integral: self.slope_integral,
            tail_fraction: probe.tail,
            cross_form_gap,
            transport_residual,
            particle_signs_ok,
            flow_ordered,
        });
        self.records.push(rec);
    }

    /// Consumes the simulation; an unfinished run reports its current time.
    pub fn into_result(self) -> RunResult {
        let (verdict, verdict_time) = self.verdict.unwrap_or((Verdict::Completed, self.t));
        let final_velocity = self.velocity();
        RunResult {
            records: self.records,
            monitors: self.monitors,
            verdict,
            verdict_time,
            steps: self.steps,
            final_velocity,
            final_cloud: self.cloud,
        }
    }
}

fn weighted_energy(grid: &GridSpec, half: &[Complex64], lo: usize, hi: usize) -> f64 {
    let nyq = grid.num_points() / 2;
    (lo..=hi)
        .map(|j| {
            let w = if j == 0 || j == nyq { 1.0 } else { 2.0 };
            w * half[j].norm_sqr()
        })
        .sum()
}

fn sample(grid: &GridSpec, half: &[Complex64], xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| fourier_eval(grid, half, x, 0)).collect()
}

/// Integrates `u0` until `t_end` or an early verdict.
pub fn run(u0: &RealField, b: BParams, cfg: SolverConfig) -> Result<RunResult> {
    let mut sim = Simulation::new(u0, b, cfg)?;
    while !sim.is_finished() {
        sim.advance()?;
    }
    Ok(sim.into_result())
}
