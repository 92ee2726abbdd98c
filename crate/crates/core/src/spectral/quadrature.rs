//! Slow, FFT-free quadrature routes for the exponential kernel
//! `p(x) = exp(-|x|) / 2`.
//!
//! Plain trapezoidal sums lose two orders of accuracy at the kernel's kink,
//! so every panel `[x_l, x_l + dx]` is integrated as a product rule: the
//! field is replaced by its degree-7 local Lagrange interpolant and the
//! exponential weight is integrated exactly (Gauss-Legendre on the panel).

use crate::error::{Error, Result};
use crate::spectral::{derivative, helmholtz_inverse, GridSpec, RealField, DEFAULT_DECAY_TOLERANCE};

/// Largest grid the O(M^2) kernel oracle accepts.
pub const QUADRATURE_ORACLE_LIMIT: usize = 8192;

const STENCIL_LO: i64 = -3;
const STENCIL_LEN: usize = 8;
const IMAGE_TAIL: f64 = 1e-14;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = 0.5 * (1.0 - z);
        weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (nodes, weights)
}

fn lagrange_basis(sigma: f64) -> [f64; STENCIL_LEN] {
    let mut out = [0.0; STENCIL_LEN];
    for (a, o) in out.iter_mut().enumerate() {
        let xa = (STENCIL_LO + a as i64) as f64;
        let mut v = 1.0;
        for b in 0..STENCIL_LEN {
            if b != a {
                let xb = (STENCIL_LO + b as i64) as f64;
                v *= (sigma - xb) / (xa - xb);
            }
        }
        *o = v;
    }
    out
}

/// Product-integration machinery for one grid.
struct PanelRule {
    dx: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `int_0^dx exp(-s) l_a(s/dx) ds`
    decaying: [f64; STENCIL_LEN],
    /// `int_0^dx exp(+s) l_a(s/dx) ds`
    growing: [f64; STENCIL_LEN],
}

impl PanelRule {
    fn new(dx: f64) -> Self {
        let (nodes, weights) = gauss_legendre_unit(16);
        let mut decaying = [0.0; STENCIL_LEN];
        let mut growing = [0.0; STENCIL_LEN];
        for (&s, &w) in nodes.iter().zip(&weights) {
            let basis = lagrange_basis(s);
            for a in 0..STENCIL_LEN {
                decaying[a] += w * dx * (-dx * s).exp() * basis[a];
                growing[a] += w * dx * (dx * s).exp() * basis[a];
            }
        }
        Self {
            dx,
            nodes,
            weights,
            decaying,
            growing,
        }
    }

    fn stencil(samples: &[f64], l: usize) -> [f64; STENCIL_LEN] {
        let m = samples.len() as i64;
        let mut out = [0.0; STENCIL_LEN];
        for (a, o) in out.iter_mut().enumerate() {
            *o = samples[(l as i64 + STENCIL_LO + a as i64).rem_euclid(m) as usize];
        }
        out
    }

    /// Panel moments `(int e^{-s} f, int e^{+s} f)` over every panel.
    fn moments(&self, samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = samples.len();
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        for l in 0..m {
            let st = Self::stencil(samples, l);
            plus[l] = st.iter().zip(&self.decaying).map(|(a, b)| a * b).sum();
            minus[l] = st.iter().zip(&self.growing).map(|(a, b)| a * b).sum();
        }
        (plus, minus)
    }

    /// `int_a^b w(s) f(x_l + s) ds` for `0 <= a <= b <= dx` with the local interpolant.
    fn partial(&self, samples: &[f64], l: usize, a: f64, b: f64, w: impl Fn(f64) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let st = Self::stencil(samples, l);
        let mut sum = 0.0;
        for (&node, &weight) in self.nodes.iter().zip(&self.weights) {
            let s = a + (b - a) * node;
            let basis = lagrange_basis(s / self.dx);
            let f: f64 = st.iter().zip(basis.iter()).map(|(v, c)| v * c).sum();
            sum += weight * (b - a) * w(s) * f;
        }
        sum
    }
}

/// Amplitude `sum_{n>=0} e^{-2Ln}` of the periodised kernel, truncated once
/// the next image drops below the tail tolerance.
fn image_amplitude(half_length: f64) -> f64 {
    let q = (-2.0 * half_length).exp();
    let mut amp = 1.0;
    let mut term = q;
    while term >= IMAGE_TAIL {
        amp += term;
        term *= q;
    }
    amp
}

/// Direct O(M^2) quadrature of `p * f` with the periodised kernel.
///
/// Independent of every FFT path; intended as the oracle for
/// [`helmholtz_inverse`]. Refuses grids with more than
/// [`QUADRATURE_ORACLE_LIMIT`] points.
pub fn kernel_convolve_quadrature(f: &RealField) -> Result<RealField> {
    let grid = f.grid();
    let m = grid.num_points();
    if m > QUADRATURE_ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            m,
            limit: QUADRATURE_ORACLE_LIMIT,
        });
    }
    let dx = grid.dx();
    let rule = PanelRule::new(dx);
    let (plus, minus) = rule.moments(f.samples());
    // For a panel a cyclic distance z in [0, 2L) to the right of x_i the
    // periodised kernel is amp/2 * (e^{-z} + e^{z - 2L}).
    let amp = image_amplitude(grid.half_length());
    let two_l = 2.0 * grid.half_length();
    let decay: Vec<f64> = (0..m).map(|d| 0.5 * amp * (-(d as f64) * dx).exp()).collect();
    let grow: Vec<f64> = (0..m).map(|d| 0.5 * amp * ((d as f64) * dx - two_l).exp()).collect();
    let mut out = vec![0.0; m];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for d in 0..m {
            let l = if i + d >= m { i + d - m } else { i + d };
            acc += decay[d] * plus[l] + grow[d] * minus[l];
        }
        *o = acc;
    }
    Ok(RealField::from_raw(grid, out))
}

/// Left and right exponential integrals at every grid point,
/// `A_i = int_{-inf}^{x_i} e^{-(x_i - s)} m ds` and `B_i = int_{x_i}^{inf} e^{-(s - x_i)} m ds`
/// for the periodic extension of `m`.
fn one_sided_integrals(grid: &GridSpec, rule: &PanelRule, samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = samples.len();
    let dx = grid.dx();
    let (plus, minus) = rule.moments(samples);
    let shrink = (-dx).exp();
    let closure = 1.0 / (1.0 - (-2.0 * grid.half_length()).exp());

    let sweep_left = |start: f64| {
        let mut a = vec![0.0; m + 1];
        a[0] = start;
        for i in 0..m {
            a[i + 1] = shrink * a[i] + shrink * minus[i];
        }
        a
    };
    let a0 = sweep_left(0.0)[m] * closure;
    let mut left = sweep_left(a0);
    left.truncate(m);

    let sweep_right = |start: f64| {
        let mut b = vec![0.0; m + 1];
        b[m] = start;
        for i in (0..m).rev() {
            b[i] = shrink * b[i + 1] + plus[i];
        }
        b
    };
    let b_end = sweep_right(0.0)[0] * closure;
    let mut right = sweep_right(b_end);
    right.truncate(m);
    (left, right)
}

/// `u` and `u_x` recovered from `m = u - u_xx` through the half-line
/// exponential integrals `u = (A + B)/2`, `u_x = (B - A)/2`.
pub fn u_from_m_quadrature(m: &RealField) -> (RealField, RealField) {
    let grid = m.grid();
    let rule = PanelRule::new(grid.dx());
    let (left, right) = one_sided_integrals(grid, &rule, m.samples());
    let u = left.iter().zip(&right).map(|(a, b)| 0.5 * (a + b)).collect();
    let ux = left.iter().zip(&right).map(|(a, b)| 0.5 * (b - a)).collect();
    (RealField::from_raw(grid, u), RealField::from_raw(grid, ux))
}

/// Velocity recovered from a momentum density by both routes.
#[derive(Debug, Clone)]
pub struct UFromM {
    pub u: RealField,
    pub ux: RealField,
    /// Max-norm gap between the spectral and quadrature routes (on `u` and `u_x`).
    pub quadrature_gap: f64,
    /// `false` when `m` does not decay below the guard tolerance at the box edge,
    /// in which case the whole-line formulas only describe the periodic extension.
    pub decay_ok: bool,
}

/// Recovers `u`, `u_x` from `m` spectrally and cross-checks against the quadrature route.
pub fn u_from_m(m: &RealField) -> UFromM {
    let u = helmholtz_inverse(m);
    let ux = derivative(&u, 1).expect("order 1 is valid");
    let (uq, uxq) = u_from_m_quadrature(m);
    let quadrature_gap = u.max_diff(&uq).max(ux.max_diff(&uxq));
    UFromM {
        u,
        ux,
        quadrature_gap,
        decay_ok: m.decays_at_boundary(DEFAULT_DECAY_TOLERANCE),
    }
}

/// `(u^2 - u_x^2)(x)` evaluated as the product of the two weighted integrals
/// `int_{-inf}^x e^s m ds * int_x^inf e^{-s} m ds`.
pub fn u2_minus_ux2(m: &RealField, x: f64) -> Result<f64> {
    let (left, right) = one_sided_factors(m, x)?;
    Ok(left * right)
}

/// The two factors `e^{-x} int_{-inf}^x e^s m ds` and `e^{x} int_x^inf e^{-s} m ds`.
pub fn one_sided_factors(m: &RealField, x: f64) -> Result<(f64, f64)> {
    let grid = m.grid();
    let l = grid.half_length();
    if !(x >= -l && x < l) {
        return Err(Error::Domain { x, lo: -l, hi: l });
    }
    let dx = grid.dx();
    let rule = PanelRule::new(dx);
    let (left, right) = one_sided_integrals(grid, &rule, m.samples());
    let n = grid.num_points();
    let panel = (((x + l) / dx).floor() as usize).min(n - 1);
    let tau = x - grid.x(panel);
    let next = (panel + 1) % n;
    let a = (-tau).exp() * left[panel]
        + rule.partial(m.samples(), panel, 0.0, tau, |s| (-(tau - s)).exp());
    let b = (-(dx - tau)).exp() * right[next]
        + rule.partial(m.samples(), panel, tau, dx, |s| (-(s - tau)).exp());
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn gaussian_pair(grid: &GridSpec) -> (RealField, RealField) {
        let u = RealField::from_fn(grid, |x| (-x * x).exp());
        let m = RealField::from_fn(grid, |x| (3.0 - 4.0 * x * x) * (-x * x).exp());
        (u, m)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_unit(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(31)).sum();
        assert!((s - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_oracle_matches_spectral_helmholtz() {
        let grid = make_grid(40.0, 4096).unwrap();
        let f = RealField::from_fn(&grid, |x| (-x * x).exp());
        let q = kernel_convolve_quadrature(&f).unwrap();
        let s = helmholtz_inverse(&f);
        assert!(q.max_diff(&s) < 1e-9, "gap {}", q.max_diff(&s));
    }

    #[test]
    fn quadrature_oracle_on_cosine_and_zero() {
        let grid = make_grid(std::f64::consts::PI, 256).unwrap();
        let f = RealField::from_fn(&grid, |x| (3.0 * x).cos());
        let q = kernel_convolve_quadrature(&f).unwrap();
        let exact = RealField::from_fn(&grid, |x| (3.0 * x).cos() / 10.0);
        let dx = grid.dx();
        assert!(q.max_diff(&exact) < dx * dx);
        let z = kernel_convolve_quadrature(&RealField::zeros(&grid)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn quadrature_oracle_refuses_large_grids() {
        let grid = make_grid(40.0, 16384).unwrap();
        let err = kernel_convolve_quadrature(&RealField::zeros(&grid)).unwrap_err();
        assert_eq!(err, Error::OracleTooLarge { m: 16384, limit: 8192 });
    }

    #[test]
    fn recovers_gaussian_velocity() {
        let grid = make_grid(40.0, 4096).unwrap();
        let (u_exact, m) = gaussian_pair(&grid);
        let r = u_from_m(&m);
        assert!(r.decay_ok);
        assert!(r.u.max_diff(&u_exact) < 1e-9);
        assert!(r.quadrature_gap < 1e-8, "gap {}", r.quadrature_gap);
        let ux_exact = RealField::from_fn(&grid, |x| -2.0 * x * (-x * x).exp());
        assert!(r.ux.max_diff(&ux_exact) < 1e-9);
    }

    #[test]
    fn zero_and_even_momentum() {
        let grid = make_grid(30.0, 1024).unwrap();
        let r = u_from_m(&RealField::zeros(&grid));
        assert_eq!(r.u.max_abs(), 0.0);
        assert_eq!(r.ux.max_abs(), 0.0);
        let m = RealField::from_fn(&grid, |x| 1.0 / (x * x).exp());
        let r = u_from_m(&m);
        assert!(r.u.evenness_defect() < 1e-12);
        assert!(r.ux.oddness_defect() < 1e-12);
        let (uq, uxq) = u_from_m_quadrature(&m);
        assert!(uq.evenness_defect() < 1e-12);
        assert!(uxq.oddness_defect() < 1e-12);
    }

    #[test]
    fn decay_warning_flags_periodic_data() {
        let grid = make_grid(10.0, 256).unwrap();
        let m = RealField::from_fn(&grid, |x| 1.0 + 0.1 * (std::f64::consts::PI * x / 10.0).cos());
        assert!(!u_from_m(&m).decay_ok);
    }

    #[test]
    fn factorisation_identity_matches_velocity() {
        let grid = make_grid(40.0, 4096).unwrap();
        let (_, m) = gaussian_pair(&grid);
        let x = 0.5f64;
        let u = (-x * x).exp();
        let ux = -2.0 * x * u;
        let v = u2_minus_ux2(&m, x).unwrap();
        assert!((v - (u * u - ux * ux)).abs() < 1e-8, "{v}");
        // on-grid evaluation against the spectral route
        let r = u_from_m(&m);
        for &i in &[100usize, 2048, 2100, 3000] {
            let x = grid.x(i);
            let lhs = u2_minus_ux2(&m, x).unwrap();
            let rhs = r.u.samples()[i].powi(2) - r.ux.samples()[i].powi(2);
            assert!((lhs - rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn factorisation_zero_and_sign() {
        let grid = make_grid(30.0, 1024).unwrap();
        assert_eq!(u2_minus_ux2(&RealField::zeros(&grid), 0.3).unwrap(), 0.0);
        let m = RealField::from_fn(&grid, |x| (-(x - 1.0).powi(2)).exp());
        for &x in &[-29.0, -3.0, 0.0, 1.0, 2.5, 29.9] {
            assert!(u2_minus_ux2(&m, x).unwrap() >= 0.0);
        }
        assert!(matches!(u2_minus_ux2(&m, 30.0), Err(Error::Domain { .. })));
        assert!(matches!(u2_minus_ux2(&m, -30.1), Err(Error::Domain { .. })));
    }
}
