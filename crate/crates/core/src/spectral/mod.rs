//! Periodic grids, Fourier transforms and the spectral operators used by
//! every other module.
//!
//! The whole line is truncated to the periodic box `[-L, L)` sampled at
//! `M` points `x_i = -L + i dx`. Spectral coefficients follow the
//! continuous convention
//!
//! ```text
//! F(k_j) = dx * sum_i f(x_i) exp(-i k_j x_i),   f(x) = (1/2L) * sum_j F(k_j) exp(i k_j x)
//! ```
//!
//! with `k_j = j pi / L`, so that `F` approximates the whole-line transform
//! and `(1/2L) sum |F|^2` is the grid L2 norm squared.

pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{config, Error, Result};

pub use quadrature::{
    kernel_convolve_quadrature, u2_minus_ux2, u_from_m, u_from_m_quadrature, UFromM,
    QUADRATURE_ORACLE_LIMIT,
};

/// Default boundary-decay tolerance for fields that stand in for functions on the line.
pub const DEFAULT_DECAY_TOLERANCE: f64 = 1e-10;

struct FftPair {
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

/// Uniform periodic grid on `[-L, L)` with `M` points.
#[derive(Clone)]
pub struct GridSpec {
    half_length: f64,
    num_points: usize,
    fft: Arc<FftPair>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("half_length", &self.half_length)
            .field("num_points", &self.num_points)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.num_points == other.num_points
    }
}

/// Builds a grid on `[-L, L)` with `M` points.
///
/// `M` must be a power of two, at least 16, and `L` positive and finite.
pub fn make_grid(half_length: f64, num_points: usize) -> Result<GridSpec> {
    if !(half_length.is_finite() && half_length > 0.0) {
        return config(format!("half length must be positive, got {half_length}"));
    }
    if num_points < 16 || !num_points.is_power_of_two() {
        return config(format!(
            "number of points must be a power of two >= 16, got {num_points}"
        ));
    }
    let mut planner = RealFftPlanner::<f64>::new();
    let fft = FftPair {
        forward: planner.plan_fft_forward(num_points),
        inverse: planner.plan_fft_inverse(num_points),
    };
    Ok(GridSpec {
        half_length,
        num_points,
        fft: Arc::new(fft),
    })
}

impl GridSpec {
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    /// Grid spacing `2L / M` (exact: `M` is a power of two).
    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.num_points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.x(i)).collect()
    }

    /// Index of the sample sitting at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.num_points / 2
    }

    /// Length of the half spectrum, `M/2 + 1`.
    pub fn half_len(&self) -> usize {
        self.num_points / 2 + 1
    }

    /// Wavenumber `j pi / L` of a signed mode index.
    pub fn wavenumber(&self, j: i64) -> f64 {
        j as f64 * std::f64::consts::PI / self.half_length
    }

    /// Largest resolvable wavenumber `(M/2) pi / L`.
    pub fn k_max(&self) -> f64 {
        self.wavenumber(self.num_points as i64 / 2)
    }

    /// Wavenumbers in FFT order, `j = 0, 1, .., M/2-1, -M/2, .., -1`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.wavenumber(signed_index(i, self.num_points))).collect()
    }

    /// Highest half-spectrum index retained by a dealiasing filter keeping
    /// `|k| <= fraction * k_max`.
    pub fn cutoff_index(&self, fraction: f64) -> usize {
        let j = (fraction * (self.num_points / 2) as f64).floor() as usize;
        j.min(self.num_points / 2)
    }

    /// Raw half-spectrum DFT `sum_i f_i exp(-2 pi i j i / M)`, `j = 0..=M/2`.
    pub(crate) fn rfft(&self, samples: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(samples.len(), self.num_points);
        let mut input = samples.to_vec();
        let mut output = self.fft.forward.make_output_vec();
        self.fft
            .forward
            .process(&mut input, &mut output)
            .expect("forward FFT length mismatch");
        output
    }

    /// Inverse of [`GridSpec::rfft`], normalised so that `irfft(rfft(f)) = f`.
    pub(crate) fn irfft(&self, mut half: Vec<Complex64>) -> Vec<f64> {
        debug_assert_eq!(half.len(), self.half_len());
        let last = half.len() - 1;
        half[0].im = 0.0;
        half[last].im = 0.0;
        let mut output = self.fft.inverse.make_output_vec();
        self.fft
            .inverse
            .process(&mut half, &mut output)
            .expect("inverse FFT length mismatch");
        let scale = 1.0 / self.num_points as f64;
        output.iter_mut().for_each(|v| *v *= scale);
        output
    }

    /// Applies a Fourier multiplier given on the half spectrum as a function
    /// of `(index, k)`.
    pub(crate) fn apply_multiplier<F>(&self, samples: &[f64], symbol: F) -> Vec<f64>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let mut half = self.rfft(samples);
        for (j, c) in half.iter_mut().enumerate() {
            *c *= symbol(j, self.wavenumber(j as i64));
        }
        self.irfft(half)
    }

    /// Grid L2 norm squared computed from a raw half spectrum.
    pub(crate) fn half_spectrum_energy(&self, half: &[Complex64]) -> f64 {
        let m = self.num_points;
        let mut sum = 0.0;
        for (j, c) in half.iter().enumerate() {
            let w = if j == 0 || j == m / 2 { 1.0 } else { 2.0 };
            sum += w * c.norm_sqr();
        }
        sum * self.dx() / m as f64
    }
}

fn signed_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// A sampled real periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
    time: Option<f64>,
}

impl RealField {
    pub fn new(grid: &GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.num_points() {
            return Err(Error::Shape {
                expected: grid.num_points(),
                got: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
            time: None,
        })
    }

    /// Wraps samples already known to be valid (internal fast path).
    pub(crate) fn from_raw(grid: &GridSpec, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.num_points());
        Self {
            grid: grid.clone(),
            samples,
            time: None,
        }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self::from_raw(grid, vec![0.0; grid.num_points()])
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, (0..grid.num_points()).map(|i| f(grid.x(i))).collect())
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = Some(t);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Max-norm distance to another field on the same grid.
    pub fn max_diff(&self, other: &RealField) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Grid quadrature `dx * sum f_i^2`, square-rooted.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Largest sample magnitude within `width` of either end of the box.
    pub fn boundary_magnitude(&self, width: f64) -> f64 {
        let l = self.grid.half_length();
        self.samples
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.x(*i).abs() >= l - width)
            .fold(0.0, |a, (_, v)| a.max(v.abs()))
    }

    /// Boundary-decay guard: the field is below `tol` at the box edge.
    pub fn decays_at_boundary(&self, tol: f64) -> bool {
        self.boundary_magnitude(2.0 * self.grid.dx()) <= tol
    }

    pub fn scaled(&self, factor: f64) -> RealField {
        Self::from_raw(&self.grid, self.samples.iter().map(|v| v * factor).collect())
    }

    pub fn at_origin(&self) -> f64 {
        self.samples[self.grid.origin_index()]
    }

    /// `max_i |f(x_i) + f(-x_i)|`, the departure from oddness.
    ///
    /// The point `x = -L` has no mirror image on the grid and is skipped.
    pub fn oddness_defect(&self) -> f64 {
        let m = self.samples.len();
        (1..m).fold(0.0, |a, i| a.max((self.samples[i] + self.samples[m - i]).abs()))
    }

    /// `max_i |f(x_i) - f(-x_i)|`, the departure from evenness.
    pub fn evenness_defect(&self) -> f64 {
        let m = self.samples.len();
        (1..m).fold(0.0, |a, i| a.max((self.samples[i] - self.samples[m - i]).abs()))
    }
}

/// Fourier coefficients of a field, full spectrum in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.num_points() {
            return Err(Error::Shape {
                expected: grid.num_points(),
                got: coefficients.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            coefficients,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Coefficients in FFT order (`j = 0..M/2-1, -M/2..-1`).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient of the signed mode `j`, `-M/2 <= j < M/2`.
    pub fn coefficient(&self, j: i64) -> Complex64 {
        let m = self.grid.num_points() as i64;
        self.coefficients[j.rem_euclid(m) as usize]
    }

    /// `(1/2L) sum |F_j|^2`, equal to the grid L2 norm squared of the field.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
            / (2.0 * self.grid.half_length())
    }

    /// Largest violation of `F(-k) = conj(F(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.grid.num_points() as i64;
        (0..m)
            .map(|j| (self.coefficient(j) - self.coefficient(-j).conj()).norm())
            .fold(0.0, f64::max)
    }
}

fn alternating(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform in the continuous convention.
pub fn to_spectral(f: &RealField) -> SpectralField {
    let grid = f.grid();
    let m = grid.num_points();
    let dx = grid.dx();
    let half = grid.rfft(f.samples());
    let mut coefficients = vec![Complex64::new(0.0, 0.0); m];
    for (i, c) in coefficients.iter_mut().enumerate() {
        let j = signed_index(i, m);
        let raw = if j >= 0 {
            half[j as usize]
        } else if j == -(m as i64) / 2 {
            half[m / 2]
        } else {
            half[(-j) as usize].conj()
        };
        *c = raw * (dx * alternating(j));
    }
    SpectralField {
        grid: grid.clone(),
        coefficients,
    }
}

/// Inverse transform; returns the real part when the input is not Hermitian.
pub fn to_real(spec: &SpectralField) -> RealField {
    let grid = spec.grid();
    let m = grid.num_points();
    let dx = grid.dx();
    let mut half = vec![Complex64::new(0.0, 0.0); grid.half_len()];
    for (j, h) in half.iter_mut().enumerate() {
        let jj = j as i64;
        let plus = spec.coefficient(jj);
        let minus = if j == m / 2 { plus } else { spec.coefficient(-jj) };
        *h = (plus + minus.conj()) * 0.5 * (alternating(jj) / dx);
    }
    RealField::from_raw(grid, grid.irfft(half))
}

/// Spectral derivative of order 1, 2 or 3; the Nyquist mode is dropped for odd orders.
pub fn derivative(f: &RealField, order: u32) -> Result<RealField> {
    if !(1..=3).contains(&order) {
        return config(format!("derivative order must be 1, 2 or 3, got {order}"));
    }
    let grid = f.grid();
    let nyquist = grid.num_points() / 2;
    let out = grid.apply_multiplier(f.samples(), |j, k| {
        if order % 2 == 1 && j == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k).powu(order)
        }
    });
    Ok(RealField::from_raw(grid, out))
}

/// `(1 - d^2/dx^2)^{-1} f`, the multiplier `1 / (1 + k^2)`.
pub fn helmholtz_inverse(f: &RealField) -> RealField {
    let grid = f.grid();
    let out = grid.apply_multiplier(f.samples(), |_, k| Complex64::new(1.0 / (1.0 + k * k), 0.0));
    RealField::from_raw(grid, out)
}

/// `(1 - d^2/dx^2) f`.
pub fn helmholtz_forward(f: &RealField) -> RealField {
    let grid = f.grid();
    let out = grid.apply_multiplier(f.samples(), |_, k| Complex64::new(1.0 + k * k, 0.0));
    RealField::from_raw(grid, out)
}

/// Zeroes every mode with `|k| > fraction * k_max`.
pub fn dealias(f: &RealField, fraction: f64) -> RealField {
    let grid = f.grid();
    let jc = grid.cutoff_index(fraction);
    let out = grid.apply_multiplier(f.samples(), |j, _| {
        Complex64::new(if j <= jc { 1.0 } else { 0.0 }, 0.0)
    });
    RealField::from_raw(grid, out)
}

/// Trigonometric interpolant of `f` resampled on a grid `factor` times finer.
pub fn refine(f: &RealField, factor: usize) -> Result<RealField> {
    if factor == 0 {
        return config("refinement factor must be positive");
    }
    let grid = f.grid();
    let m = grid.num_points();
    let fine = make_grid(grid.half_length(), factor * m)?;
    let half = grid.rfft(f.samples());
    let mut padded = vec![Complex64::new(0.0, 0.0); fine.half_len()];
    let scale = factor as f64;
    for j in 0..m / 2 {
        padded[j] = half[j] * scale;
    }
    // The coarse Nyquist mode splits evenly between +-k on the finer grid.
    padded[m / 2] = if factor == 1 { half[m / 2] } else { half[m / 2] * (0.5 * scale) };
    Ok(RealField::from_raw(&fine, fine.irfft(padded)))
}

/// Evaluates the trigonometric interpolant of `f` at an arbitrary point.
pub fn evaluate_at(f: &RealField, x: f64) -> f64 {
    let grid = f.grid();
    let half = grid.rfft(f.samples());
    fourier_eval(grid, &half, x, 0)
}

/// Evaluates the `order`-th derivative of the trigonometric interpolant
/// described by a raw half spectrum at `x` (Nyquist mode ignored).
pub(crate) fn fourier_eval(grid: &GridSpec, half: &[Complex64], x: f64, order: u32) -> f64 {
    let m = grid.num_points();
    let turns = (x + grid.half_length()) / (2.0 * grid.half_length());
    let step = cis_turns(turns);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut sum = 0.0;
    for (j, c) in half.iter().enumerate().take(m / 2) {
        let k = grid.wavenumber(j as i64);
        let sym = Complex64::new(0.0, k).powu(order);
        let term = (c * sym * phase).re;
        sum += if j == 0 { term } else { 2.0 * term };
        phase *= step;
        if j % 64 == 63 {
            phase = cis_turns(turns * (j + 1) as f64);
        }
    }
    sum / m as f64
}

/// `exp(2 pi i t)`, exact at quarter turns so that grid points and the origin
/// do not pick up phase round-off.
fn cis_turns(t: f64) -> Complex64 {
    let r = t - t.floor();
    let q = 4.0 * r;
    if q == q.trunc() {
        return match q as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, std::f64::consts::TAU * r)
}

/// Value and first derivative of the interpolant in a single pass.
pub(crate) fn fourier_eval_pair(grid: &GridSpec, half: &[Complex64], x: f64) -> (f64, f64) {
    let m = grid.num_points();
    let turns = (x + grid.half_length()) / (2.0 * grid.half_length());
    let step = cis_turns(turns);
    let mut phase = Complex64::new(1.0, 0.0);
    let mut value = half[0].re;
    let mut slope = 0.0;
    for (j, c) in half.iter().enumerate().take(m / 2).skip(1) {
        phase *= step;
        if j % 64 == 0 {
            phase = cis_turns(turns * j as f64);
        }
        let z = c * phase;
        value += 2.0 * z.re;
        slope -= 2.0 * grid.wavenumber(j as i64) * z.im;
    }
    (value / m as f64, slope / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn refine_reproduces_band_limited_samples() {
        let g = make_grid(PI, 64).unwrap();
        let f = RealField::from_fn(&g, |x| (3.0 * x).sin() + 0.5 * (7.0 * x).cos() + (32.0 * x).cos());
        let fine = refine(&f, 4).unwrap();
        let expect = RealField::from_fn(fine.grid(), |x| (3.0 * x).sin() + 0.5 * (7.0 * x).cos() + (32.0 * x).cos());
        assert!(fine.max_diff(&expect) < 1e-12);
        assert!(refine(&f, 0).is_err());
    }

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(40.0, 1024).unwrap();
        assert_eq!(g.dx(), 0.078125);
        assert!((g.k_max() - 12.8 * PI).abs() < 1e-12);
        assert_eq!(g.x(0), -40.0);
        assert_eq!(g.x(g.origin_index()), 0.0);
        let big = make_grid(50.0, 1 << 18).unwrap();
        assert!((big.dx() - 3.814697265625e-4).abs() < 1e-15);
        assert_eq!(big.dx() * big.num_points() as f64, 100.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(make_grid(40.0, 1000), Err(Error::Config(_))));
        assert!(matches!(make_grid(40.0, 8), Err(Error::Config(_))));
        assert!(matches!(make_grid(0.0, 1024), Err(Error::Config(_))));
        assert!(matches!(make_grid(-1.0, 1024), Err(Error::Config(_))));
    }

    #[test]
    fn wavenumber_layout() {
        let g = make_grid(PI, 16).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[1], 1.0);
        assert_eq!(k[8], -8.0);
        assert_eq!(k[15], -1.0);
    }

    #[test]
    fn field_validation() {
        let g = make_grid(10.0, 16).unwrap();
        assert!(matches!(
            RealField::new(&g, vec![0.0; 15]),
            Err(Error::Shape { expected: 16, got: 15 })
        ));
        let mut bad = vec![0.0; 16];
        bad[3] = f64::NAN;
        assert!(matches!(RealField::new(&g, bad), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn cosine_has_single_mode_pair() {
        let g = make_grid(40.0, 256).unwrap();
        let f = RealField::from_fn(&g, |x| (3.0 * PI * x / 40.0).cos());
        let s = to_spectral(&f);
        for j in -128..128i64 {
            let c = s.coefficient(j).norm();
            if j.abs() == 3 {
                assert!((c - 40.0).abs() < 1e-10, "mode {j}: {c}");
            } else {
                assert!(c < 1e-11, "mode {j}: {c}");
            }
        }
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = make_grid(5.0, 64).unwrap();
        let s = to_spectral(&RealField::zeros(&g));
        assert!(s.coefficients().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn gaussian_transform_matches_analytic() {
        let g = make_grid(40.0, 4096).unwrap();
        let f = RealField::from_fn(&g, |x| (-x * x).exp());
        let s = to_spectral(&f);
        let peak = PI.sqrt();
        let mut worst: f64 = 0.0;
        for j in -200..200i64 {
            let k = g.wavenumber(j);
            if k.abs() > 10.0 {
                continue;
            }
            let exact = PI.sqrt() * (-k * k / 4.0).exp();
            worst = worst.max((s.coefficient(j) - exact).norm() / peak);
        }
        assert!(worst < 1e-10, "relative error {worst}");
        assert!(s.hermitian_defect() < 1e-13);
    }

    #[test]
    fn sine_derivative_exact() {
        let g = make_grid(PI, 64).unwrap();
        let f = RealField::from_fn(&g, |x| (5.0 * x).sin());
        let d = derivative(&f, 1).unwrap();
        let exact = RealField::from_fn(&g, |x| 5.0 * (5.0 * x).cos());
        assert!(d.max_diff(&exact) < 1e-12);
        let c = RealField::from_fn(&g, |_| 2.5);
        for order in 1..=3 {
            assert!(derivative(&c, order).unwrap().max_abs() < 1e-13);
        }
        assert!(matches!(derivative(&f, 0), Err(Error::Config(_))));
        assert!(matches!(derivative(&f, 4), Err(Error::Config(_))));
    }

    #[test]
    fn gaussian_second_derivative() {
        let g = make_grid(40.0, 4096).unwrap();
        let f = RealField::from_fn(&g, |x| (-x * x).exp());
        let d2 = derivative(&f, 2).unwrap();
        let exact = RealField::from_fn(&g, |x| (4.0 * x * x - 2.0) * (-x * x).exp());
        assert!(d2.max_diff(&exact) < 1e-10, "{}", d2.max_diff(&exact));
    }

    #[test]
    fn helmholtz_on_cosine() {
        let g = make_grid(PI, 64).unwrap();
        let f = RealField::from_fn(&g, |x| (4.0 * x).cos());
        let u = helmholtz_inverse(&f);
        let exact = RealField::from_fn(&g, |x| (4.0 * x).cos() / 17.0);
        assert!(u.max_diff(&exact) < 1e-14);
        assert_eq!(helmholtz_inverse(&RealField::zeros(&g)).max_abs(), 0.0);
    }

    #[test]
    fn fourier_evaluation_off_grid() {
        let g = make_grid(PI, 64).unwrap();
        let f = RealField::from_fn(&g, |x| (3.0 * x).sin() + 0.5 * (7.0 * x).cos());
        for &x in &[0.1234f64, -2.9, 1.7] {
            let exact = (3.0 * x).sin() + 0.5 * (7.0 * x).cos();
            assert!((evaluate_at(&f, x) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn value_and_slope_in_one_pass() {
        let g = make_grid(PI, 256).unwrap();
        let f = RealField::from_fn(&g, |x| (3.0 * x).sin() + 0.5 * (70.0 * x).cos());
        let half = g.rfft(f.samples());
        for &x in &[0.1234f64, -2.9, 1.7, 3.1] {
            let (v, d) = fourier_eval_pair(&g, &half, x);
            assert!((v - fourier_eval(&g, &half, x, 0)).abs() < 1e-12);
            let exact = 3.0 * (3.0 * x).cos() - 35.0 * (70.0 * x).sin();
            assert!((d - exact).abs() < 1e-11, "{d} {exact}");
        }
    }

    #[test]
    fn oddness_defect_detects_symmetry() {
        let g = make_grid(10.0, 128).unwrap();
        let odd = RealField::from_fn(&g, |x| x * (-x * x).exp());
        assert!(odd.oddness_defect() < 1e-15);
        let even = RealField::from_fn(&g, |x| (-x * x).exp());
        assert!(even.evenness_defect() < 1e-15);
        assert!(even.oddness_defect() > 1.0);
    }
}
