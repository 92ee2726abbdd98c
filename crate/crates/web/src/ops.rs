//! The demo operations in plain Rust, so they can be tested natively.

use bfamily_core::inflation::{riccati_blowup_time, riccati_comparison, RiccatiValue};
use bfamily_core::lp::build_lp_basis;
use bfamily_core::profiles::Profile;
use bfamily_core::solver::{BParams, Simulation, SolverConfig, Verdict};
use bfamily_core::spectral::{derivative, make_grid, RealField};
use bfamily_core::Result;

/// Box used by the block-norm explorer.
pub const PACKET_BOX: (f64, usize) = (20.0, 2048);

/// `(j, ||Delta_j f||)` for `f = a exp(-(x/w)^2) cos(k x)`, `j = -1..=j_max`.
pub fn packet_block_norms(amplitude: f64, width: f64, wavenumber: f64) -> Result<Vec<(i32, f64)>> {
    let grid = make_grid(PACKET_BOX.0, PACKET_BOX.1)?;
    let basis = build_lp_basis(&grid)?;
    let f = RealField::from_fn(&grid, |x| amplitude * (-(x / width).powi(2)).exp() * (wavenumber * x).cos());
    Ok((-1..).zip(basis.block_norms(&f)).collect())
}

/// Samples of the comparison solution on `[0, t_end]`; `None` once it has
/// left every bounded set.
pub fn riccati_curve(b: f64, ln_n: f64, v0: f64, t_end: f64, samples: usize) -> Result<Vec<(f64, Option<f64>)>> {
    let n = samples.max(2);
    (0..n)
        .map(|i| {
            let t = t_end * i as f64 / (n - 1) as f64;
            Ok((
                t,
                match riccati_comparison(v0, b, ln_n, t)? {
                    RiccatiValue::Finite(v) => Some(v),
                    RiccatiValue::BlownUp { .. } => None,
                },
            ))
        })
        .collect()
}

pub fn riccati_blowup(b: f64, ln_n: f64, v0: f64) -> Result<Option<f64>> {
    riccati_blowup_time(v0, b, ln_n)
}

/// A running simulation from a pair of momentum lumps.
pub struct Breaking {
    sim: Simulation,
}

impl Breaking {
    pub fn new(b: f64, left: f64, right: f64, num_points: usize) -> Result<Self> {
        let grid = make_grid(40.0, num_points)?;
        let u0 = Profile::MomentumPair { left, right, separation: 2.0, width: 1.0 }.build(&grid)?;
        let cfg = SolverConfig {
            t_end: 20.0,
            cadence: 0.0,
            blowup_slope_threshold: 0.05 * grid.k_max(),
            ..SolverConfig::default()
        };
        Ok(Self { sim: Simulation::new(&u0, BParams::new(b)?, cfg)? })
    }

    /// Steps until `t` is reached or the run concludes.
    pub fn advance_to(&mut self, t: f64) -> Result<Option<Verdict>> {
        while self.sim.time() < t {
            if let Some(v) = self.sim.advance()?.finished {
                return Ok(Some(v));
            }
        }
        Ok(self.sim.verdict().map(|(v, _)| v))
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn points(&self) -> Vec<f64> {
        self.sim.grid().points()
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.sim.velocity().into_samples()
    }

    pub fn max_slope(&self) -> f64 {
        derivative(&self.sim.velocity(), 1).map_or(0.0, |d| d.max_abs())
    }
}
