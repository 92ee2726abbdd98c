//! Lagrangian particle tracking along the flow of `u`.
//!
//! Each particle carries its label `x0`, its position `y(t, x0)` solving
//! `dy/dt = u(t, y)`, and `log y_x = int_0^t u_x(t', y(t', x0)) dt'`.
//! When the cloud is stepped together with the PDE the four RK4 stages use
//! the matching intermediate PDE states, so the pair (field, particles) is
//! integrated as one ODE system.

use num_complex::Complex64;

use crate::error::{config, Result};
use crate::spectral::{fourier_eval, fourier_eval_pair, GridSpec, RealField};

/// Above this many particles the interpolant switches from direct Fourier
/// evaluation to local Lagrange interpolation.
pub const FOURIER_PARTICLE_LIMIT: usize = 10_000;

/// Default number of equispaced particles.
pub const DEFAULT_PARTICLES: usize = 257;

const LOCAL_STENCIL: usize = 8;

/// Result of an ordering check after a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowCheck {
    Ordered,
    /// Particles `first_index` and `first_index + 1` crossed or collided.
    Degenerate { first_index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharCloud {
    x0: Vec<f64>,
    y: Vec<f64>,
    log_jacobian: Vec<f64>,
    t: f64,
    marked: Option<usize>,
    degenerate_steps: usize,
}

impl CharCloud {
    /// Particles labelled by `x0`, all starting at their labels.
    pub fn new(x0: Vec<f64>) -> Result<Self> {
        if x0.is_empty() {
            return config("particle cloud must not be empty");
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return config("particle labels must be finite");
        }
        let n = x0.len();
        Ok(Self {
            y: x0.clone(),
            x0,
            log_jacobian: vec![0.0; n],
            t: 0.0,
            marked: None,
            degenerate_steps: 0,
        })
    }

    /// `count` particles at cell centres of an even partition of the box,
    /// plus the distinguished point `x0` inserted in order when given.
    pub fn equispaced(grid: &GridSpec, count: usize, x0: Option<f64>) -> Result<Self> {
        if count == 0 {
            return config("particle count must be positive");
        }
        let l = grid.half_length();
        let h = 2.0 * l / count as f64;
        let mut labels: Vec<f64> = (0..count).map(|i| -l + (i as f64 + 0.5) * h).collect();
        let mut marked = None;
        if let Some(p) = x0 {
            if !(-l..l).contains(&p) {
                return config(format!("distinguished point {p} lies outside [-{l}, {l})"));
            }
            let at = labels.partition_point(|v| *v < p);
            if labels.get(at) != Some(&p) {
                labels.insert(at, p);
            }
            marked = Some(at);
        }
        let mut cloud = Self::new(labels)?;
        cloud.marked = marked;
        Ok(cloud)
    }

    /// Marks particle `index` as the distinguished trajectory `y(t, x0)`.
    pub fn with_marked(mut self, index: usize) -> Result<Self> {
        if index >= self.x0.len() {
            return config(format!("marked index {index} out of range"));
        }
        self.marked = Some(index);
        Ok(self)
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn log_jacobian(&self) -> &[f64] {
        &self.log_jacobian
    }

    /// `y_x = exp(log_jacobian)` per particle.
    pub fn jacobian(&self) -> Vec<f64> {
        self.log_jacobian.iter().map(|v| v.exp()).collect()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    pub fn marked(&self) -> Option<usize> {
        self.marked
    }

    /// Current position of the distinguished particle.
    pub fn marked_position(&self) -> Option<f64> {
        self.marked.map(|i| self.y[i])
    }

    /// Number of steps after which the ordering check failed.
    pub fn degenerate_steps(&self) -> usize {
        self.degenerate_steps
    }

    /// Checks that positions are strictly increasing wherever labels are.
    pub fn check_order(&self) -> FlowCheck {
        for i in 0..self.len().saturating_sub(1) {
            if self.x0[i] < self.x0[i + 1] && self.y[i] >= self.y[i + 1] {
                return FlowCheck::Degenerate { first_index: i };
            }
        }
        FlowCheck::Ordered
    }

    /// One RK4 step in a frozen velocity field.
    pub fn advect(&mut self, u: &RealField, dt: f64) -> Result<FlowCheck> {
        if !(dt.is_finite() && dt >= 0.0) {
            return config(format!("time step must be finite and nonnegative, got {dt}"));
        }
        let half = u.grid().rfft(u.samples());
        let stages = [&half[..], &half[..], &half[..], &half[..]];
        Ok(self.advect_stages(u.grid(), stages, dt))
    }

    /// One RK4 step where stage `s` samples the velocity whose raw half
    /// spectrum is `stages[s]`.
    pub(crate) fn advect_stages(
        &mut self,
        grid: &GridSpec,
        stages: [&[Complex64]; 4],
        dt: f64,
    ) -> FlowCheck {
        let n = self.len();
        let (k1, j1) = sample_velocity(grid, stages[0], &self.y);
        let probe: Vec<f64> = (0..n).map(|i| self.y[i] + 0.5 * dt * k1[i]).collect();
        let (k2, j2) = sample_velocity(grid, stages[1], &probe);
        let probe: Vec<f64> = (0..n).map(|i| self.y[i] + 0.5 * dt * k2[i]).collect();
        let (k3, j3) = sample_velocity(grid, stages[2], &probe);
        let probe: Vec<f64> = (0..n).map(|i| self.y[i] + dt * k3[i]).collect();
        let (k4, j4) = sample_velocity(grid, stages[3], &probe);
        for i in 0..n {
            self.y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            self.log_jacobian[i] += dt / 6.0 * (j1[i] + 2.0 * j2[i] + 2.0 * j3[i] + j4[i]);
        }
        self.t += dt;
        let check = self.check_order();
        if check != FlowCheck::Ordered {
            self.degenerate_steps += 1;
        }
        check
    }

    /// Second- or fourth-order finite-difference estimate of `y_x` at
    /// interior particles (`None` where the stencil does not fit or labels
    /// are not uniformly spaced).
    pub fn finite_difference_jacobian(&self) -> Vec<Option<f64>> {
        let n = self.len();
        let uniform = |a: usize, b: usize| {
            let h = self.x0[a + 1] - self.x0[a];
            (a..b).all(|i| ((self.x0[i + 1] - self.x0[i]) - h).abs() <= 1e-12 * h.abs().max(1.0))
        };
        (0..n)
            .map(|i| {
                if i >= 2 && i + 2 < n && uniform(i - 2, i + 2) {
                    let h = self.x0[i + 1] - self.x0[i];
                    let d = (-self.y[i + 2] + 8.0 * self.y[i + 1] - 8.0 * self.y[i - 1]
                        + self.y[i - 2])
                        / (12.0 * h);
                    Some(d)
                } else if i >= 1 && i + 1 < n && uniform(i - 1, i + 1) {
                    let h = self.x0[i + 1] - self.x0[i];
                    Some((self.y[i + 1] - self.y[i - 1]) / (2.0 * h))
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Velocity and slope at each position.
fn sample_velocity(grid: &GridSpec, half: &[Complex64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    if ys.len() < FOURIER_PARTICLE_LIMIT {
        ys.iter().map(|&y| fourier_eval_pair(grid, half, y)).unzip()
    } else {
        let u = grid.irfft(half.to_vec());
        let nyquist = grid.num_points() / 2;
        let slope_half: Vec<Complex64> = half
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if j == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, grid.wavenumber(j as i64))
                }
            })
            .collect();
        let ux = grid.irfft(slope_half);
        ys.iter()
            .map(|&y| (local_interpolate(grid, &u, y), local_interpolate(grid, &ux, y)))
            .unzip()
    }
}

/// Eight-point barycentric Lagrange interpolation on the periodic grid.
fn local_interpolate(grid: &GridSpec, samples: &[f64], x: f64) -> f64 {
    let m = grid.num_points() as i64;
    let dx = grid.dx();
    let s = (x + grid.half_length()) / dx;
    let base = s.floor();
    let frac = s - base;
    let base = base as i64;
    let offsets = -(LOCAL_STENCIL as i64 / 2 - 1)..=(LOCAL_STENCIL as i64 / 2);
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, off) in offsets.enumerate() {
        let diff = frac - off as f64;
        let idx = (base + off).rem_euclid(m) as usize;
        if diff == 0.0 {
            return samples[idx];
        }
        let w = binomial_sign(k) / diff;
        num += w * samples[idx];
        den += w;
    }
    num / den
}

fn binomial_sign(k: usize) -> f64 {
    let n = LOCAL_STENCIL - 1;
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    if k % 2 == 0 {
        c
    } else {
        -c
    }
}

/// `max_i |m(t, y_i) exp(b log y_x,i) - m0(x0_i)|`.
pub fn transport_identity_residual(cloud: &CharCloud, m: &RealField, m0: &RealField, b: f64) -> f64 {
    let grid = m.grid();
    let half = grid.rfft(m.samples());
    let half0 = grid.rfft(m0.samples());
    (0..cloud.len())
        .map(|i| {
            let now = fourier_eval(grid, &half, cloud.y[i], 0);
            let start = fourier_eval(grid, &half0, cloud.x0[i], 0);
            (now * (b * cloud.log_jacobian[i]).exp() - start).abs()
        })
        .fold(0.0, f64::max)
}

/// Whether `m(t, y_i)` and `m0(x0_i)` share their sign (zero counts as
/// either) for every particle, with magnitudes below `tol` treated as zero.
pub fn sign_transport_ok(cloud: &CharCloud, m: &RealField, m0: &RealField, tol: f64) -> bool {
    let grid = m.grid();
    let half = grid.rfft(m.samples());
    let half0 = grid.rfft(m0.samples());
    (0..cloud.len()).all(|i| {
        let now = fourier_eval(grid, &half, cloud.y[i], 0);
        let start = fourier_eval(grid, &half0, cloud.x0[i], 0);
        now.abs() <= tol || start.abs() <= tol || now.signum() == start.signum()
    })
}
