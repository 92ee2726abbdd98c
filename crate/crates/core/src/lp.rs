//! Discrete Littlewood-Paley frame and Besov/Sobolev norms.
//!
//! The low-frequency cutoff `chi` equals 1 on `|k| <= 3/4`, vanishes for
//! `|k| >= 4/3` and moves between the two through a smooth step built from
//! the integral of the mollifier `exp(-1/(t(1-t)))`. The annulus function is
//! `phi(k) = chi(k/2) - chi(k)`, supported in `3/4 <= |k| <= 8/3` and equal
//! to 1 on `4/3 <= |k| <= 3/2`. Block symbols telescope:
//! `chi(2^{-(j+1)} k) = chi(k) + sum_{j'=0}^{j} phi(2^{-j'} k)`.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::spectral::quadrature::gauss_legendre_unit;
use crate::spectral::{GridSpec, RealField};

/// Inner radius of the transition band of `chi`.
pub const CHI_INNER: f64 = 0.75;
/// Outer radius of the support of `chi`.
pub const CHI_OUTER: f64 = 4.0 / 3.0;
/// Outer radius of the support of `phi`.
pub const PHI_OUTER: f64 = 8.0 / 3.0;
/// Dealiasing fraction the basis is tied to.
pub const LP_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

fn mollifier(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

struct StepRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

fn step_rule() -> &'static StepRule {
    static RULE: OnceLock<StepRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre_unit(32);
        let panels = 16;
        let mut total = 0.0;
        for p in 0..panels {
            let a = p as f64 / panels as f64;
            let h = 1.0 / panels as f64;
            for (x, w) in nodes.iter().zip(&weights) {
                total += w * h * mollifier(a + h * x);
            }
        }
        StepRule {
            nodes,
            weights,
            total,
        }
    })
}

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`, `C^inf` in between,
/// with `step(t) + step(1 - t) = 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    if t > 0.5 {
        return 1.0 - smooth_step(1.0 - t);
    }
    let rule = step_rule();
    let panels = 4;
    let h = t / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * h * mollifier(a + h * x);
        }
    }
    (acc / rule.total).clamp(0.0, 0.5)
}

/// Low-frequency cutoff `chi(k)`.
pub fn chi(k: f64) -> f64 {
    let a = k.abs();
    if a <= CHI_INNER {
        1.0
    } else if a >= CHI_OUTER {
        0.0
    } else {
        1.0 - smooth_step((a - CHI_INNER) / (CHI_OUTER - CHI_INNER))
    }
}

/// Annulus function `phi(k) = chi(k/2) - chi(k)`.
pub fn phi(k: f64) -> f64 {
    chi(0.5 * k) - chi(k)
}

/// Besov space parameters; only `p = 2` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    /// Block-sequence exponent; `f64::INFINITY` selects the sup norm.
    pub r: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let spec = Self { s, p, r };
        spec.validate()?;
        Ok(spec)
    }

    /// `B^s_{2,r}`.
    pub fn l2(s: f64, r: f64) -> Self {
        Self { s, p: 2.0, r }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p != 2.0 {
            return config(format!("only p = 2 Besov norms are supported, got p = {}", self.p));
        }
        if !(self.r >= 1.0) {
            return config(format!("block exponent r must be >= 1 or infinite, got {}", self.r));
        }
        if !self.s.is_finite() {
            return config("regularity s must be finite");
        }
        Ok(())
    }
}

/// Littlewood-Paley frame sampled on the half spectrum of a grid.
#[derive(Debug, Clone)]
pub struct LPBasis {
    grid: GridSpec,
    j_max: i32,
    /// `cumulative[j + 1][idx] = chi(2^{-(j+1)} k_idx)` for `j = -1..=j_max`.
    cumulative: Vec<Vec<f64>>,
}

/// Builds the frame for a grid.
///
/// `j_max` is the smallest block index whose cumulative cutoff covers the
/// dealiased band `|k| <= (2/3) k_max`.
pub fn build_lp_basis(grid: &GridSpec) -> Result<LPBasis> {
    let k_max = grid.k_max();
    if k_max < PHI_OUTER {
        return config(format!(
            "grid too coarse for dyadic blocks: k_max = {k_max} < 8/3"
        ));
    }
    let band = LP_DEALIAS_FRACTION * k_max;
    let mut j_max = 0i32;
    while CHI_INNER * 2f64.powi(j_max + 1) < band {
        j_max += 1;
    }
    let ks: Vec<f64> = (0..grid.half_len()).map(|j| grid.wavenumber(j as i64)).collect();
    let cumulative = (-1..=j_max)
        .map(|j| {
            let scale = 2f64.powi(-(j + 1));
            ks.iter().map(|k| chi(scale * k)).collect()
        })
        .collect();
    Ok(LPBasis {
        grid: grid.clone(),
        j_max,
        cumulative,
    })
}

impl LPBasis {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// `chi` sampled on the half spectrum.
    pub fn chi_samples(&self) -> &[f64] {
        &self.cumulative[0]
    }

    fn check(&self, j: i32) -> Result<()> {
        if j > self.j_max {
            Err(Error::Block { j, j_max: self.j_max })
        } else {
            Ok(())
        }
    }

    /// Symbol of `Delta_j` on the half spectrum (all zeros for `j <= -2`).
    pub fn block_symbol(&self, j: i32) -> Result<Vec<f64>> {
        self.check(j)?;
        let n = self.grid.half_len();
        Ok(match j {
            j if j <= -2 => vec![0.0; n],
            -1 => self.cumulative[0].clone(),
            j => {
                let hi = &self.cumulative[(j + 1) as usize];
                let lo = &self.cumulative[j as usize];
                hi.iter().zip(lo).map(|(a, b)| a - b).collect()
            }
        })
    }

    /// Symbol of `S_j` on the half spectrum.
    pub fn cutoff_symbol(&self, j: i32) -> Result<Vec<f64>> {
        self.check(j)?;
        Ok(if j <= -2 {
            vec![0.0; self.grid.half_len()]
        } else {
            self.cumulative[(j + 1) as usize].clone()
        })
    }

    /// Residual `max |chi + sum_j phi_j - 1|` over `|k| <= (2/3) k_max`.
    pub fn partition_residual(&self) -> f64 {
        let jc = self.grid.cutoff_index(LP_DEALIAS_FRACTION);
        let mut sum = self.cumulative[0].clone();
        for j in 0..=self.j_max {
            let phi_j = self.block_symbol(j).expect("in range");
            sum.iter_mut().zip(&phi_j).for_each(|(s, p)| *s += p);
        }
        sum.iter().take(jc + 1).fold(0.0, |a, v| a.max((v - 1.0).abs()))
    }

    fn filtered(&self, f: &RealField, symbol: &[f64]) -> RealField {
        let grid = f.grid();
        let mut half = grid.rfft(f.samples());
        half.iter_mut().zip(symbol).for_each(|(c, s)| *c *= *s);
        RealField::from_raw(grid, grid.irfft(half))
    }

    /// `Delta_j f`.
    pub fn dyadic_block(&self, f: &RealField, j: i32) -> Result<RealField> {
        let sym = self.block_symbol(j)?;
        Ok(self.filtered(f, &sym))
    }

    /// `S_j f`.
    pub fn low_freq_cutoff(&self, f: &RealField, j: i32) -> Result<RealField> {
        let sym = self.cutoff_symbol(j)?;
        Ok(self.filtered(f, &sym))
    }

    /// Grid L2 norms `||Delta_j f||` for `j = -1..=j_max`.
    pub fn block_norms(&self, f: &RealField) -> Vec<f64> {
        let half = self.grid.rfft(f.samples());
        self.block_norms_from_half(&half)
    }

    pub(crate) fn block_norms_from_half(&self, half: &[Complex64]) -> Vec<f64> {
        (-1..=self.j_max)
            .map(|j| {
                let sym = self.block_symbol(j).expect("in range");
                let filtered: Vec<Complex64> =
                    half.iter().zip(&sym).map(|(c, s)| c * s).collect();
                self.grid.half_spectrum_energy(&filtered).sqrt()
            })
            .collect()
    }

    /// `|| (2^{js} ||Delta_j f||_{L2})_j ||_{l^r}`.
    pub fn besov_norm(&self, f: &RealField, spec: &BesovSpec) -> Result<f64> {
        spec.validate()?;
        let half = self.grid.rfft(f.samples());
        Ok(self.besov_from_half(&half, spec))
    }

    pub(crate) fn besov_from_half(&self, half: &[Complex64], spec: &BesovSpec) -> f64 {
        let norms = self.block_norms_from_half(half);
        let weighted = norms
            .iter()
            .enumerate()
            .map(|(idx, n)| 2f64.powf(spec.s * (idx as f64 - 1.0)) * n);
        sequence_norm(weighted, spec.r)
    }
}

/// `l^r` norm of a nonnegative sequence (`r = inf` gives the maximum).
pub fn sequence_norm(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `||f||_{H^s}^2 = (1/2pi) int (1 + k^2)^s |F f|^2 dk`, evaluated on the grid spectrum.
pub fn sobolev_norm(f: &RealField, s: f64) -> f64 {
    let grid = f.grid();
    sobolev_from_half(grid, &grid.rfft(f.samples()), s)
}

pub(crate) fn sobolev_from_half(grid: &GridSpec, half: &[Complex64], s: f64) -> f64 {
    let weighted: Vec<Complex64> = half
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let k = grid.wavenumber(j as i64);
            c * (1.0 + k * k).powf(0.5 * s)
        })
        .collect();
    grid.half_spectrum_energy(&weighted).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_shapes() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(phi(1.4), 1.0);
        assert_eq!(phi(-1.45), 1.0);
        assert_eq!(phi(0.74), 0.0);
        assert_eq!(phi(2.7), 0.0);
        for i in 0..=400 {
            let k = i as f64 * 0.01;
            assert!((0.0..=1.0).contains(&chi(k)));
            assert!((0.0..=1.0).contains(&phi(k)));
            assert_eq!(chi(k), chi(-k));
            assert_eq!(phi(k), phi(-k));
        }
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = smooth_step(i as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn partition_of_unity() {
        let grid = make_grid(40.0, 4096).unwrap();
        let basis = build_lp_basis(&grid).unwrap();
        assert!(basis.partition_residual() <= 1e-12);
        assert_eq!(basis.chi_samples()[0], 1.0);
        // j_max = 7 covers the dealiased band up to (2/3) k_max = 107.2
        assert_eq!(basis.j_max(), 7);
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = make_grid(40.0, 16).unwrap();
        assert!(matches!(build_lp_basis(&grid), Err(Error::Config(_))));
    }

    #[test]
    fn plateau_mode_sits_in_one_block() {
        let grid = make_grid(40.0, 4096).unwrap();
        let basis = build_lp_basis(&grid).unwrap();
        let target = 1.4 * 32.0;
        let j = (target * 40.0 / PI).round();
        let k = j * PI / 40.0;
        assert!((k / 32.0 - 1.4).abs() < 0.05);
        let f = RealField::from_fn(&grid, |x| (k * x).cos());
        let d5 = basis.dyadic_block(&f, 5).unwrap();
        assert!(d5.max_diff(&f) < 1e-12, "{}", d5.max_diff(&f));
        for jj in [-1, 0, 1, 2, 3, 4, 6, 7] {
            assert!(basis.dyadic_block(&f, jj).unwrap().max_abs() < 1e-12, "block {jj}");
        }
        assert!(basis.dyadic_block(&f, -3).unwrap().max_abs() == 0.0);
        assert!(matches!(basis.dyadic_block(&f, 8), Err(Error::Block { j: 8, j_max: 7 })));
    }

    #[test]
    fn constants_live_in_the_low_block() {
        let grid = make_grid(20.0, 512).unwrap();
        let basis = build_lp_basis(&grid).unwrap();
        let f = RealField::from_fn(&grid, |_| 3.0);
        assert!(basis.dyadic_block(&f, -1).unwrap().max_diff(&f) < 1e-14);
        for j in 0..=basis.j_max() {
            assert!(basis.dyadic_block(&f, j).unwrap().max_abs() < 1e-14);
            assert!(basis.low_freq_cutoff(&f, j).unwrap().max_diff(&f) < 1e-14);
        }
    }

    #[test]
    fn besov_single_block_and_zero() {
        let grid = make_grid(40.0, 4096).unwrap();
        let basis = build_lp_basis(&grid).unwrap();
        assert_eq!(basis.besov_norm(&RealField::zeros(&grid), &BesovSpec::l2(1.5, 2.0)).unwrap(), 0.0);
        let k = (1.4 * 16.0 * 40.0 / PI).round() * PI / 40.0;
        let f = RealField::from_fn(&grid, |x| (k * x).sin());
        for r in [1.0, 2.0, 3.5, f64::INFINITY] {
            let b = basis.besov_norm(&f, &BesovSpec::l2(0.7, r)).unwrap();
            let expected = 2f64.powf(4.0 * 0.7) * f.l2_norm();
            assert!((b - expected).abs() < 1e-10 * expected);
        }
        let bad = BesovSpec { s: 1.0, p: 3.0, r: 2.0 };
        assert!(matches!(basis.besov_norm(&f, &bad), Err(Error::Config(_))));
        assert!(BesovSpec::new(1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn sobolev_single_mode() {
        let grid = make_grid(PI, 64).unwrap();
        let f = RealField::from_fn(&grid, |x| (3.0 * x).cos());
        let s = 1.5;
        let expected = (10f64.powf(s) * f.l2_norm().powi(2)).sqrt();
        assert!((sobolev_norm(&f, s) - expected).abs() < 1e-12);
        assert_eq!(sobolev_norm(&RealField::zeros(&grid), 2.0), 0.0);
    }
}
