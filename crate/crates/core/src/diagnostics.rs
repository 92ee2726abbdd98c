//! Conserved, monotone and sign functionals of the momentum `m = u - u_xx`,
//! and the per-record diagnostic row written by the solver.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristics::CharCloud;
use crate::error::{config, Error, Result};
use crate::lp::{sobolev_from_half, BesovSpec, LPBasis};
use crate::spectral::{fourier_eval, fourier_eval_pair, make_grid, GridSpec, RealField};

/// Fixed CSV column order of [`DiagRecord`].
pub const CSV_HEADER: &str =
    "t,H0,H1,H2,mL1,ux_at_0,min_ux,max_ux,sobolev_32,besov_32_q,energy_ratio,uux_at_yx0,sign_ok";

/// Oddness tolerance required by [`origin_slope_identity_residual`].
pub const ODDNESS_TOLERANCE: f64 = 1e-10;

/// Relative tolerance of [`sign_predicate`].
pub const SIGN_TOLERANCE: f64 = 1e-10;

/// Integrand of the third conserved functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2Variant {
    /// `m_x m^{-2-1/b} + b^2 m^{-1/b}`, linear in `m_x`.
    AsPrinted,
    /// `m_x^2 m^{-2-1/b} + b^2 m^{-1/b}`.
    Squared,
}

/// `int m dx`.
pub fn conserved_h0(m: &RealField) -> f64 {
    m.grid().dx() * m.samples().iter().sum::<f64>()
}

/// `int m^{1/b} dx`, or `None` unless `m > 0` everywhere.
pub fn conserved_h1(m: &RealField, b: f64) -> Result<Option<f64>> {
    if b == 0.0 {
        return config("H1 needs b != 0");
    }
    if !strictly_positive(m) {
        return Ok(None);
    }
    let p = 1.0 / b;
    Ok(Some(m.grid().dx() * m.samples().iter().map(|v| v.powf(p)).sum::<f64>()))
}

/// Third functional with the chosen integrand, or `None` unless `m > 0`.
pub fn conserved_h2(m: &RealField, b: f64, variant: H2Variant) -> Result<Option<f64>> {
    if b == 0.0 {
        return config("H2 needs b != 0");
    }
    if !strictly_positive(m) {
        return Ok(None);
    }
    let mx = crate::spectral::derivative(m, 1)?;
    let e = -2.0 - 1.0 / b;
    let sum: f64 = m
        .samples()
        .iter()
        .zip(mx.samples())
        .map(|(&v, &d)| {
            let grad = match variant {
                H2Variant::AsPrinted => d,
                H2Variant::Squared => d * d,
            };
            grad * v.powf(e) + b * b * v.powf(-1.0 / b)
        })
        .sum();
    Ok(Some(m.grid().dx() * sum))
}

fn strictly_positive(m: &RealField) -> bool {
    m.samples().iter().all(|v| *v > 0.0)
}

/// `int |m| dx`.
pub fn m_l1(m: &RealField) -> f64 {
    m.grid().dx() * m.samples().iter().map(|v| v.abs()).sum::<f64>()
}

/// Sign pattern about `x0`: for `b >= 1`, `m <= 0` left of `x0` and `m >= 0`
/// right of it; for `b <= 1` the mirror image (either pattern at `b = 1`).
/// Samples within `1e-10 max|m|` of zero count as either sign.
pub fn sign_predicate(m: &RealField, x0: f64, b: f64) -> bool {
    let tol = SIGN_TOLERANCE * m.max_abs();
    let grid = m.grid();
    let pattern = |orient: f64| {
        m.samples().iter().enumerate().all(|(i, &v)| {
            let x = grid.x(i);
            let s = orient * v;
            (x < x0 || s >= -tol) && (x > x0 || s <= tol)
        })
    };
    (b >= 1.0 && pattern(1.0)) || (b <= 1.0 && pattern(-1.0))
}

/// `(u^2 - u_x^2)` at the tracked point `y(t, x0)` of the cloud.
pub fn uux_at_characteristic(u: &RealField, cloud: &CharCloud) -> Option<f64> {
    let y = cloud.marked_position()?;
    let grid = u.grid();
    let (v, d) = fourier_eval_pair(grid, &grid.rfft(u.samples()), y);
    Some(v * v - d * d)
}

/// `|d/dx (du/dt)(0) - [((1-b)/2) u_x(0)^2 - (1 - d_xx)^{-1}((b/2)u^2 + ((3-b)/2)u_x^2)(0)]|`
/// for odd `u`. The products on the right are formed alias-free on a
/// doubled grid, so the residual measures how far `dudt` departs from the
/// exact differentiated equation.
pub fn origin_slope_identity_residual(u: &RealField, b: f64, dudt: &RealField) -> Result<f64> {
    let defect = u.oddness_defect();
    if defect > ODDNESS_TOLERANCE {
        return Err(Error::Precondition(format!(
            "u must be odd to {ODDNESS_TOLERANCE:e}, defect {defect:e}"
        )));
    }
    let grid = u.grid();
    let lhs = fourier_eval(grid, &grid.rfft(dudt.samples()), 0.0, 1);
    let (ux0, nonlocal) = origin_nonlocal(u, b)?;
    Ok((lhs - (0.5 * (1.0 - b) * ux0 * ux0 - nonlocal)).abs())
}

/// `(u_x(0), (1 - d_xx)^{-1}((b/2)u^2 + ((3-b)/2)u_x^2)(0))` with the quadratic
/// products computed without aliasing.
fn origin_nonlocal(u: &RealField, b: f64) -> Result<(f64, f64)> {
    let grid = u.grid();
    let m = grid.num_points();
    let fine = make_grid(grid.half_length(), 2 * m)?;
    let half = grid.rfft(u.samples());
    let mut pad_u = vec![Complex64::new(0.0, 0.0); fine.half_len()];
    let mut pad_ux = pad_u.clone();
    for j in 0..m / 2 {
        let k = grid.wavenumber(j as i64);
        pad_u[j] = half[j] * 2.0;
        pad_ux[j] = half[j] * Complex64::new(0.0, k) * 2.0;
    }
    // The Nyquist mode of the coarse grid splits evenly between +-k on the fine grid.
    pad_u[m / 2] = half[m / 2];
    let uf = fine.irfft(pad_u);
    let uxf = fine.irfft(pad_ux);
    let q: Vec<f64> = uf
        .iter()
        .zip(&uxf)
        .map(|(v, d)| 0.5 * b * v * v + 0.5 * (3.0 - b) * d * d)
        .collect();
    let mut qh = fine.rfft(&q);
    for (j, c) in qh.iter_mut().enumerate() {
        let k = fine.wavenumber(j as i64);
        *c /= 1.0 + k * k;
    }
    let nonlocal = fine_point_value(&fine, &qh);
    let ux0 = fourier_eval(grid, &half, 0.0, 1);
    Ok((ux0, nonlocal))
}

/// Value at `x = 0` of the field with raw half spectrum `half`, Nyquist included.
fn fine_point_value(grid: &GridSpec, half: &[Complex64]) -> f64 {
    let m = grid.num_points();
    let base = fourier_eval(grid, half, 0.0, 0);
    let nyq = half[m / 2].re * if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
    base + nyq / m as f64
}

/// One row of the run time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub h0: f64,
    /// `None` when the functional is undefined (sign-changing `m` or `b = 0`).
    pub h1: Option<f64>,
    /// Squared variant; `None` when undefined.
    pub h2: Option<f64>,
    pub m_l1: f64,
    pub ux_at_0: f64,
    pub min_ux: f64,
    pub max_ux: f64,
    pub sobolev_32: f64,
    /// `None` when the grid is too coarse for a Littlewood-Paley basis.
    pub besov_32_q: Option<f64>,
    pub energy_ratio: f64,
    /// `None` when no characteristic is tracked.
    pub uux_at_yx0: Option<f64>,
    pub sign_ok: Option<bool>,
}

impl DiagRecord {
    /// Comma-separated row in [`CSV_HEADER`] order. Numbers use the
    /// shortest round-trip representation.
    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let num = |s: &mut String, v: f64| {
            let _ = write!(s, "{v:e}");
        };
        num(&mut s, self.t);
        for v in [Some(self.h0), self.h1, self.h2] {
            s.push(',');
            match v {
                Some(v) => num(&mut s, v),
                None => s.push_str("invalid"),
            }
        }
        for v in [self.m_l1, self.ux_at_0, self.min_ux, self.max_ux, self.sobolev_32] {
            s.push(',');
            num(&mut s, v);
        }
        s.push(',');
        match self.besov_32_q {
            Some(v) => num(&mut s, v),
            None => s.push_str("invalid"),
        }
        s.push(',');
        num(&mut s, self.energy_ratio);
        s.push(',');
        match self.uux_at_yx0 {
            Some(v) => num(&mut s, v),
            None => s.push_str("na"),
        }
        s.push(',');
        s.push_str(match self.sign_ok {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        });
        s
    }
}

/// Inputs for one diagnostic record.
pub struct RecordInputs<'a> {
    pub t: f64,
    pub u: &'a RealField,
    /// Tendency `du/dt` at the same state.
    pub dudt: &'a RealField,
    pub b: f64,
    pub basis: Option<&'a LPBasis>,
    pub besov_q: f64,
    pub cloud: Option<&'a CharCloud>,
    /// Evolved momentum when the run carries one; otherwise `m` is formed
    /// as `u - u_xx`, whose round-off grows like `k_max^2`.
    pub momentum: Option<&'a RealField>,
}

/// Evaluates every column of [`DiagRecord`].
pub fn diag_record(inp: &RecordInputs<'_>) -> DiagRecord {
    let u = inp.u;
    let grid = u.grid();
    let half = grid.rfft(u.samples());
    let nyquist = grid.num_points() / 2;
    let mut ux_half = half.clone();
    let mut m_half = half.clone();
    for (j, (d, mm)) in ux_half.iter_mut().zip(m_half.iter_mut()).enumerate() {
        let k = grid.wavenumber(j as i64);
        *d *= if j == nyquist { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) };
        *mm *= 1.0 + k * k;
    }
    let ux = grid.irfft(ux_half);
    let m = match inp.momentum {
        Some(m) => m.clone(),
        None => RealField::from_raw(grid, grid.irfft(m_half)),
    };
    let (min_ux, max_ux) = ux
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let slope = min_ux.abs().max(max_ux.abs());

    let sob = sobolev_from_half(grid, &half, 1.5);
    let dudt_half = grid.rfft(inp.dudt.samples());
    let mut cross = 0.0;
    for (j, (a, c)) in half.iter().zip(&dudt_half).enumerate() {
        let k = grid.wavenumber(j as i64);
        let w = if j == 0 || j == nyquist { 1.0 } else { 2.0 };
        cross += w * (1.0 + k * k).powf(1.5) * (a.conj() * c).re;
    }
    let d_energy = 2.0 * cross * grid.dx() / grid.num_points() as f64;
    let energy_ratio = if sob > 0.0 { d_energy / ((slope + 1.0) * sob * sob) } else { 0.0 };

    let besov = inp
        .basis
        .map(|basis| basis.besov_from_half(&half, &BesovSpec::l2(1.5, inp.besov_q)));

    let (uux, sign_ok) = match inp.cloud.and_then(|c| c.marked_position()) {
        Some(y) => {
            let (v, d) = fourier_eval_pair(grid, &half, y);
            (Some(v * v - d * d), Some(sign_predicate(&m, y, inp.b)))
        }
        None => (None, None),
    };

    DiagRecord {
        t: inp.t,
        h0: conserved_h0(&m),
        h1: conserved_h1(&m, inp.b).ok().flatten(),
        h2: conserved_h2(&m, inp.b, H2Variant::Squared).ok().flatten(),
        m_l1: m_l1(&m),
        ux_at_0: ux[grid.origin_index()],
        min_ux,
        max_ux,
        sobolev_32: sob,
        besov_32_q: besov,
        energy_ratio,
        uux_at_yx0: uux,
        sign_ok,
    }
}
