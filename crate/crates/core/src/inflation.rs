//! The frequency-comb initial data behind norm inflation, and the Riccati
//! comparison for the slope at the origin.
//!
//! With an even bump `phi~` supported inside the plateau of `phi`,
//! `h_n` has transform `i 2^{-n} xi phi~(2^{-n} xi)`, lives in the single
//! Littlewood-Paley block `n`, and is odd. The comb
//!
//! ```text
//! u0 = -+ sum_{n=2}^{N} h_n / (ln N 2^{2n} n^{2/(1+q)})
//! ```
//!
//! (minus for `b < 1`, plus for `b > 1`) has `B^{3/2}_{2,q}` norm of order
//! `1/ln N` while `u0_x(0) ln N = d sum n^{-2/(1+q)}` with
//! `d = (1/2pi) int eta^2 phi~(eta) d eta`. At odd states the slope at the
//! origin obeys `d/dt u_x(t,0) >= ((1-b)/2) u_x^2 - 2 (ln N)^2` while the
//! Besov norm stays below `ln N`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{origin_slope_identity_residual, DiagRecord};
use crate::error::{config, Result};
use crate::lp::{build_lp_basis, BesovSpec, CHI_OUTER, LP_DEALIAS_FRACTION};
use crate::solver::{resolved_velocity_tendency, BParams, Simulation, SolverConfig, Verdict};
use crate::spectral::{derivative, fourier_eval, GridSpec, RealField};

/// Slack on the initial slope used by the comparison test.
pub const COMPARISON_DELTA: f64 = 0.05;

/// Plateau of `phi` on which `phi~` must be supported.
pub const PLATEAU: (f64, f64) = (CHI_OUTER, 1.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignCase {
    /// `b < 1`: the comb enters with a minus sign and `u0_x(0) > 0`.
    NegativeComb,
    /// `b > 1`: plus sign and `u0_x(0) < 0`.
    PositiveComb,
}

impl SignCase {
    pub fn for_b(b: f64) -> Option<Self> {
        if b < 1.0 {
            Some(SignCase::NegativeComb)
        } else if b > 1.0 {
            Some(SignCase::PositiveComb)
        } else {
            None
        }
    }

    fn sign(self) -> f64 {
        match self {
            SignCase::NegativeComb => -1.0,
            SignCase::PositiveComb => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationConfig {
    /// Comb length `N`.
    pub n: u32,
    #[serde(with = "crate::serde_ext")]
    pub q: f64,
    pub b: f64,
    pub sign_case: SignCase,
    #[serde(default = "default_center")]
    pub bump_center: f64,
    #[serde(default = "default_halfwidth")]
    pub bump_halfwidth: f64,
    /// Rescale `u0` so that its `B^{3/2}_{2,q}` norm is exactly `1/ln N`.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_center() -> f64 {
    1.42
}

fn default_halfwidth() -> f64 {
    0.07
}

fn default_true() -> bool {
    true
}

impl InflationConfig {
    /// Defaults for the given `(N, q, b)` with the sign case implied by `b`.
    pub fn new(n: u32, q: f64, b: f64) -> Result<Self> {
        let Some(sign_case) = SignCase::for_b(b) else {
            return config("the comb construction needs b != 1");
        };
        let cfg = Self {
            n,
            q,
            b,
            sign_case,
            bump_center: default_center(),
            bump_halfwidth: default_halfwidth(),
            normalize: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return config(format!("comb length N must be >= 2, got {}", self.n));
        }
        if !(self.q > 1.0) {
            return config(format!("q must lie in (1, inf], got {}", self.q));
        }
        if !self.b.is_finite() || self.b == 1.0 {
            return config(format!("the comb construction needs a finite b != 1, got {}", self.b));
        }
        if SignCase::for_b(self.b) != Some(self.sign_case) {
            return config(format!(
                "sign case {:?} does not match b = {} (negative_comb for b < 1, positive_comb for b > 1)",
                self.sign_case, self.b
            ));
        }
        if !(self.bump_halfwidth > 0.0) {
            return config("bump_halfwidth must be positive");
        }
        let (lo, hi) = self.support();
        if lo < PLATEAU.0 {
            return config(format!("bump support reaches {lo}, below the plateau start {}", PLATEAU.0));
        }
        if hi > PLATEAU.1 {
            return config(format!("bump support reaches {hi}, beyond the plateau end {}", PLATEAU.1));
        }
        Ok(())
    }

    /// Support `[c - h, c + h]` of `phi~` on the positive axis.
    pub fn support(&self) -> (f64, f64) {
        (self.bump_center - self.bump_halfwidth, self.bump_center + self.bump_halfwidth)
    }

    /// Checks that block `n` of the comb sits below the dealiasing cutoff.
    pub fn check_resolved(&self, n: u32, grid: &GridSpec) -> Result<()> {
        let top = 2f64.powi(n as i32) * self.support().1;
        let limit = LP_DEALIAS_FRACTION * grid.k_max();
        if top > limit {
            return config(format!(
                "frequency {top} of block {n} exceeds the dealiasing cutoff {limit} of the grid"
            ));
        }
        Ok(())
    }
}

/// `phi~(k) = exp(-1 / (1 - t^2))`, `t = (|k| - c) / h`, zero for `|t| >= 1`.
pub fn bump_profile(cfg: &InflationConfig, k: f64) -> f64 {
    let t = (k.abs() - cfg.bump_center) / cfg.bump_halfwidth;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// `phi~` sampled at the half-spectrum wavenumbers of the grid.
pub fn build_bump(cfg: &InflationConfig, grid: &GridSpec) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok((0..grid.half_len())
        .map(|j| bump_profile(cfg, grid.wavenumber(j as i64)))
        .collect())
}

/// `h_n`, built from its transform.
pub fn build_hn(n: u32, cfg: &InflationConfig, grid: &GridSpec) -> Result<RealField> {
    cfg.validate()?;
    if n < 1 {
        return config("block index n must be >= 1");
    }
    cfg.check_resolved(n, grid)?;
    Ok(RealField::from_raw(grid, grid.irfft(hn_half(n, cfg, grid))))
}

fn hn_half(n: u32, cfg: &InflationConfig, grid: &GridSpec) -> Vec<num_complex::Complex64> {
    let scale = 2f64.powi(-(n as i32));
    let dx = grid.dx();
    (0..grid.half_len())
        .map(|j| {
            let k = grid.wavenumber(j as i64);
            let coeff = scale * k * bump_profile(cfg, scale * k);
            // Continuous-convention coefficient i*coeff, converted to a raw DFT value.
            let alt = if j % 2 == 0 { 1.0 } else { -1.0 };
            num_complex::Complex64::new(0.0, coeff * alt / dx)
        })
        .collect()
}

/// The comb before normalisation, and the factor applied to it.
#[derive(Debug, Clone)]
pub struct CombData {
    pub u0: RealField,
    /// Multiplier applied to the raw comb (1 without normalisation).
    pub normalization: f64,
    /// `B^{3/2}_{2,q}` norm of the raw comb.
    pub raw_besov: f64,
}

/// Builds `u0`, rescaled to `||u0||_{B^{3/2}_{2,q}} = 1/ln N` when requested.
pub fn build_u0(cfg: &InflationConfig, grid: &GridSpec) -> Result<CombData> {
    cfg.validate()?;
    cfg.check_resolved(cfg.n, grid)?;
    let ln_n = cfg.ln_n();
    let sign = cfg.sign_case.sign();
    let mut half = vec![num_complex::Complex64::new(0.0, 0.0); grid.half_len()];
    for n in 2..=cfg.n {
        let weight = sign / (ln_n * 4f64.powi(n as i32) * (n as f64).powf(2.0 / (1.0 + cfg.q)));
        for (acc, c) in half.iter_mut().zip(hn_half(n, cfg, grid)) {
            *acc += c * weight;
        }
    }
    let raw = RealField::from_raw(grid, grid.irfft(half));
    let basis = build_lp_basis(grid)?;
    let raw_besov = basis.besov_norm(&raw, &BesovSpec::l2(1.5, cfg.q))?;
    let normalization = if cfg.normalize { 1.0 / (ln_n * raw_besov) } else { 1.0 };
    Ok(CombData {
        u0: raw.scaled(normalization),
        normalization,
        raw_besov,
    })
}

/// Value of the Riccati comparison solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiccatiValue {
    Finite(f64),
    /// The solution left every bounded set at `time`.
    BlownUp { time: f64 },
}

/// Exact solution of `v' = a v^2 - c`, `a = (1-b)/2`, `c = 2 (ln N)^2`,
/// `v(0) = v0`, at time `t >= 0`.
pub fn riccati_comparison(v0: f64, b: f64, ln_n: f64, t: f64) -> Result<RiccatiValue> {
    if b == 1.0 {
        return config("the Riccati comparison needs b != 1");
    }
    if !(v0.is_finite() && b.is_finite() && ln_n.is_finite() && t >= 0.0) {
        return config("riccati_comparison needs finite v0, b, ln N and t >= 0");
    }
    let t_star = riccati_blowup_time(v0, b, ln_n)?;
    if let Some(ts) = t_star {
        if t >= ts {
            return Ok(RiccatiValue::BlownUp { time: ts });
        }
    }
    let a = 0.5 * (1.0 - b);
    let c = 2.0 * ln_n * ln_n;
    if c == 0.0 {
        return Ok(RiccatiValue::Finite(v0 / (1.0 - a * v0 * t)));
    }
    let v = if a > 0.0 {
        let g = (c / a).sqrt();
        if v0 == g {
            g
        } else {
            let r = (v0 - g) / (v0 + g);
            let e = (2.0 * a * g * t).exp();
            if v0 == -g {
                -g
            } else {
                g * (1.0 + r * e) / (1.0 - r * e)
            }
        }
    } else {
        let beta = (c / -a).sqrt();
        let omega = (-c * a).sqrt();
        beta * ((v0 / beta).atan() - omega * t).tan()
    };
    Ok(RiccatiValue::Finite(v))
}

/// Blow-up time of the comparison solution, if it has one.
pub fn riccati_blowup_time(v0: f64, b: f64, ln_n: f64) -> Result<Option<f64>> {
    if b == 1.0 {
        return config("the Riccati comparison needs b != 1");
    }
    let a = 0.5 * (1.0 - b);
    let c = 2.0 * ln_n * ln_n;
    if c == 0.0 {
        return Ok((a * v0 > 0.0).then(|| 1.0 / (a * v0)));
    }
    if a > 0.0 {
        let g = (c / a).sqrt();
        Ok((v0 > g).then(|| ((v0 + g) / (v0 - g)).ln() / (2.0 * (a * c).sqrt())))
    } else {
        let beta = (c / -a).sqrt();
        let omega = (-c * a).sqrt();
        Ok(Some(((v0 / beta).atan() + std::f64::consts::FRAC_PI_2) / omega))
    }
}

/// One observation of the inflation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationSample {
    pub t: f64,
    pub ux0: f64,
    /// `d/dt u_x(t, 0)` from the solver tendency.
    pub ux0_rate: f64,
    pub besov_32_q: f64,
    pub sobolev_32: f64,
    /// Comparison solution at `t` (`None` once it has blown up).
    pub riccati: Option<f64>,
    /// `besov_32_q <= ln N`, the regime of the comparison inequality.
    pub in_regime: bool,
    pub comparison_ok: bool,
    pub rate_inequality_ok: bool,
    /// Origin-slope identity residual for the exact tendency of the state.
    pub identity_residual: f64,
    /// The same residual for the solver's truncated tendency.
    pub solver_identity_residual: f64,
    pub oddness_defect: f64,
    pub u_at_0: f64,
    pub uxx_at_0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationSummary {
    pub ln_n: f64,
    pub normalization: f64,
    pub initial_ux0: f64,
    /// Starting value of the comparison solution.
    pub riccati_v0: f64,
    pub riccati_blowup_time: Option<f64>,
    pub initial_besov: f64,
    pub peak_besov: f64,
    pub peak_besov_ratio: f64,
    /// Largest `|u_x(t,0)| / |u0_x(0)|` over the records.
    pub slope_growth_factor: f64,
    pub comparison_violations: usize,
    pub rate_inequality_violations: usize,
    pub max_identity_residual: f64,
    pub max_solver_identity_residual: f64,
    pub max_oddness_defect: f64,
    pub max_origin_value: f64,
    pub records: usize,
    pub steps: usize,
    pub verdict_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflationReport {
    pub config: InflationConfig,
    pub half_length: f64,
    pub num_points: usize,
    pub solver: SolverConfig,
    /// Path of the time-series CSV, filled in by whoever writes it.
    pub series_file: Option<String>,
    pub summary: InflationSummary,
    pub verdict: Verdict,
    /// What a desk-scale run can and cannot certify.
    pub note: String,
    #[serde(skip)]
    pub series: Vec<InflationSample>,
    /// Solver diagnostics at the same record times.
    #[serde(skip)]
    pub records: Vec<DiagRecord>,
    #[serde(skip)]
    pub final_velocity: Option<RealField>,
}

/// CSV header for [`InflationSample`] rows.
pub const SERIES_HEADER: &str = "t,ux0,ux0_rate,besov_32_q,sobolev_32,riccati,in_regime,comparison_ok,rate_inequality_ok,identity_residual,solver_identity_residual,oddness_defect,u_at_0,uxx_at_0";

impl InflationSample {
    pub fn csv_row(&self) -> String {
        let riccati = self.riccati.map_or_else(|| "blown_up".to_string(), |v| format!("{v:e}"));
        format!(
            "{:e},{:e},{:e},{:e},{:e},{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
            self.t,
            self.ux0,
            self.ux0_rate,
            self.besov_32_q,
            self.sobolev_32,
            riccati,
            self.in_regime,
            self.comparison_ok,
            self.rate_inequality_ok,
            self.identity_residual,
            self.solver_identity_residual,
            self.oddness_defect,
            self.u_at_0,
            self.uxx_at_0
        )
    }
}

/// Runs the comb through the solver and checks the comparison property at
/// every record.
pub fn inflation_experiment(
    cfg: &InflationConfig,
    grid: &GridSpec,
    solver: &SolverConfig,
) -> Result<InflationReport> {
    cfg.validate()?;
    let comb = build_u0(cfg, grid)?;
    let solver = SolverConfig {
        besov_q: cfg.q,
        decay_tolerance: None,
        tracking: None,
        ..solver.clone()
    };
    let ln_n = cfg.ln_n();
    let mut sim = Simulation::new(&comb.u0, BParams::new(cfg.b)?, solver.clone())?;
    let basis = build_lp_basis(grid)?;
    let spec = BesovSpec::l2(1.5, cfg.q);

    let u0x0 = derivative(&comb.u0, 1)?.at_origin();
    let v0 = u0x0 - COMPARISON_DELTA * u0x0.abs();
    let t_star = riccati_blowup_time(v0, cfg.b, ln_n)?;
    let eps_num = 1e-3 * ln_n * ln_n;

    let observe = |sim: &Simulation| -> Result<InflationSample> {
        let u = sim.velocity();
        let dudt = sim.velocity_tendency();
        let half = grid.rfft(u.samples());
        let ux0 = fourier_eval(grid, &half, 0.0, 1);
        let rate = fourier_eval(grid, &grid.rfft(dudt.samples()), 0.0, 1);
        let besov = basis.besov_norm(&u, &spec)?;
        let riccati = match riccati_comparison(v0, cfg.b, ln_n, sim.time())? {
            RiccatiValue::Finite(v) => Some(v),
            RiccatiValue::BlownUp { .. } => None,
        };
        let in_regime = besov <= ln_n;
        let comparison_ok = !in_regime || riccati.is_none_or(|v| ux0 >= v);
        let rate_bound = 0.5 * (1.0 - cfg.b) * ux0 * ux0 - 2.0 * ln_n * ln_n - eps_num;
        let rate_inequality_ok = !in_regime || rate >= rate_bound;
        let (fine, exact) = resolved_velocity_tendency(&u, cfg.b)?;
        let identity_residual = origin_slope_identity_residual(&fine, cfg.b, &exact).unwrap_or(f64::INFINITY);
        let solver_identity_residual = origin_slope_identity_residual(&u, cfg.b, &dudt).unwrap_or(f64::INFINITY);
        Ok(InflationSample {
            t: sim.time(),
            ux0,
            ux0_rate: rate,
            besov_32_q: besov,
            sobolev_32: crate::lp::sobolev_norm(&u, 1.5),
            riccati,
            in_regime,
            comparison_ok,
            rate_inequality_ok,
            identity_residual,
            solver_identity_residual,
            oddness_defect: u.oddness_defect(),
            u_at_0: fourier_eval(grid, &half, 0.0, 0),
            uxx_at_0: fourier_eval(grid, &half, 0.0, 2),
        })
    };

    let mut series = vec![observe(&sim)?];
    while !sim.is_finished() {
        let ev = sim.advance()?;
        if ev.recorded {
            series.push(observe(&sim)?);
        }
    }
    let steps = sim.steps();
    let (verdict, verdict_time) = sim.verdict().expect("finished run has a verdict");
    let final_velocity = sim.velocity();
    let records = sim.records().to_vec();

    let initial_besov = series[0].besov_32_q;
    let peak_besov = series.iter().map(|s| s.besov_32_q).fold(0.0, f64::max);
    let growth = series
        .iter()
        .map(|s| s.ux0.abs() / u0x0.abs())
        .fold(0.0, f64::max);
    let summary = InflationSummary {
        ln_n,
        normalization: comb.normalization,
        initial_ux0: u0x0,
        riccati_v0: v0,
        riccati_blowup_time: t_star,
        initial_besov,
        peak_besov,
        peak_besov_ratio: peak_besov / initial_besov,
        slope_growth_factor: growth,
        comparison_violations: series.iter().filter(|s| !s.comparison_ok).count(),
        rate_inequality_violations: series.iter().filter(|s| !s.rate_inequality_ok).count(),
        max_identity_residual: series.iter().map(|s| s.identity_residual).fold(0.0, f64::max),
        max_solver_identity_residual: series
            .iter()
            .map(|s| s.solver_identity_residual)
            .fold(0.0, f64::max),
        max_oddness_defect: series.iter().map(|s| s.oddness_defect).fold(0.0, f64::max),
        max_origin_value: series
            .iter()
            .map(|s| s.u_at_0.abs().max(s.uxx_at_0.abs()))
            .fold(0.0, f64::max),
        records: series.len(),
        steps,
        verdict_time,
    };
    Ok(InflationReport {
        config: cfg.clone(),
        half_length: grid.half_length(),
        num_points: grid.num_points(),
        solver,
        series_file: None,
        summary,
        verdict,
        note: "Fixed-N run: demonstrates growth of u_x(t,0) and of the Besov norm together with the \
               comparison property; the N -> infinity inflation is only supported through the \
               scaling laws of the initial data."
            .to_string(),
        series,
        records,
        final_velocity: Some(final_velocity),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_lp_basis, phi};
    use crate::spectral::make_grid;

    fn cfg(n: u32, q: f64, b: f64) -> InflationConfig {
        InflationConfig::new(n, q, b).unwrap()
    }

    #[test]
    fn bump_support_and_plateau() {
        let c = cfg(4, 2.0, -2.0);
        assert!(bump_profile(&c, 1.42) > 0.0);
        assert!(bump_profile(&c, -1.42) > 0.0);
        assert_eq!(bump_profile(&c, 1.30), 0.0);
        let g = make_grid(40.0, 4096).unwrap();
        let samples = build_bump(&c, &g).unwrap();
        for (j, s) in samples.iter().enumerate() {
            let k = g.wavenumber(j as i64);
            assert!((s * phi(k) - s).abs() <= 1e-14);
        }
    }

    #[test]
    fn config_guards() {
        assert!(InflationConfig::new(10, 2.0, 1.0).is_err());
        assert!(InflationConfig::new(1, 2.0, -2.0).is_err());
        assert!(InflationConfig::new(10, 1.0, -2.0).is_err());
        let mut c = cfg(4, 2.0, -2.0);
        c.sign_case = SignCase::PositiveComb;
        assert!(c.validate().is_err());
        let mut c = cfg(4, 2.0, -2.0);
        c.bump_halfwidth = 0.14;
        assert!(c.validate().is_err());
        let g = make_grid(40.0, 1024).unwrap();
        assert!(build_u0(&cfg(12, 2.0, -2.0), &g).is_err());
    }

    #[test]
    fn hn_is_odd_and_single_block() {
        let g = make_grid(40.0, 1 << 14).unwrap();
        let c = cfg(6, 2.0, -2.0);
        let basis = build_lp_basis(&g).unwrap();
        let h = build_hn(6, &c, &g).unwrap();
        assert!(h.oddness_defect() <= 1e-12 * h.max_abs().max(1.0));
        let d6 = basis.dyadic_block(&h, 6).unwrap();
        assert!(d6.max_diff(&h) <= 1e-12 * h.max_abs());
        for j in [-1, 0, 1, 2, 3, 4, 5, 7] {
            assert!(basis.dyadic_block(&h, j).unwrap().max_abs() <= 1e-12 * h.max_abs(), "j = {j}");
        }
    }

    #[test]
    fn u0_is_odd_and_normalized() {
        let g = make_grid(40.0, 1 << 14).unwrap();
        let c = cfg(8, f64::INFINITY, -2.0);
        let data = build_u0(&c, &g).unwrap();
        assert!(data.u0.oddness_defect() <= 1e-12);
        assert!(data.u0.at_origin().abs() <= 1e-12);
        let basis = build_lp_basis(&g).unwrap();
        let norm = basis.besov_norm(&data.u0, &BesovSpec::l2(1.5, f64::INFINITY)).unwrap();
        assert!((norm * c.ln_n() - 1.0).abs() < 1e-12);
        assert!(derivative(&data.u0, 1).unwrap().at_origin() > 0.0);
        let pos = build_u0(&cfg(8, f64::INFINITY, 3.0), &g).unwrap();
        assert!(derivative(&pos.u0, 1).unwrap().at_origin() < 0.0);
    }

    #[test]
    fn riccati_equilibrium_and_decay() {
        let ln_n = 2.0;
        let b = -1.0;
        let gamma = 8.0f64.sqrt();
        assert_eq!(riccati_comparison(gamma, b, ln_n, 3.0).unwrap(), RiccatiValue::Finite(gamma));
        let mut last = gamma * 0.5;
        for i in 1..=20 {
            let t = i as f64 * 10.0 / gamma / 20.0;
            match riccati_comparison(0.5 * gamma, b, ln_n, t).unwrap() {
                RiccatiValue::Finite(v) => {
                    assert!(v < last);
                    last = v;
                }
                RiccatiValue::BlownUp { .. } => panic!("no blow-up below the equilibrium"),
            }
        }
        assert!(riccati_comparison(1.0, 1.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn riccati_negative_a_runs_to_minus_infinity() {
        let t_star = riccati_blowup_time(-1.0, 3.0, 1.0).unwrap().unwrap();
        let RiccatiValue::Finite(v) = riccati_comparison(-1.0, 3.0, 1.0, 0.999 * t_star).unwrap() else {
            panic!("finite before the blow-up time");
        };
        assert!(v < -100.0);
        assert!(matches!(
            riccati_comparison(-1.0, 3.0, 1.0, t_star).unwrap(),
            RiccatiValue::BlownUp { .. }
        ));
    }
}
