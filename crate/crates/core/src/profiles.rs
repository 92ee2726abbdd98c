//! Named initial data used by the manifests and the tests.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::spectral::{helmholtz_inverse, GridSpec, RealField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `u0 = a exp(-((x - c) / w)^2)`.
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `u0 = a sech^2((x - c) / w)`.
    Sech2 {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `m0 = l exp(-((x + s/2) / w)^2) + r exp(-((x - s/2) / w)^2)`, `u0 = (1 - d_xx)^{-1} m0`.
    MomentumPair {
        left: f64,
        right: f64,
        separation: f64,
        width: f64,
    },
    /// `m0 = a exp(-((x - c) / w)^2)` with `a > 0`, so `m0 >= 0` everywhere.
    PositiveMomentum {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `m0 = mean + a cos(pi n x / L)`; periodic data, positive when `mean > |a|`.
    TorusMomentum { mean: f64, amplitude: f64, mode: u32 },
    /// `u0 = a cos(pi n x / L)`.
    Cosine { amplitude: f64, mode: u32 },
}

fn gaussian(x: f64, c: f64, w: f64) -> f64 {
    let z = (x - c) / w;
    (-z * z).exp()
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Profile::Gaussian { amplitude, width, center }
            | Profile::Sech2 { amplitude, width, center } => {
                if !finite(&[amplitude, width, center]) || width <= 0.0 {
                    return config("profile needs finite parameters and a positive width");
                }
            }
            Profile::PositiveMomentum { amplitude, width, center } => {
                if !finite(&[amplitude, width, center]) || width <= 0.0 || amplitude <= 0.0 {
                    return config("positive_momentum needs a positive amplitude and width");
                }
            }
            Profile::MomentumPair { left, right, separation, width } => {
                if !finite(&[left, right, separation, width]) || width <= 0.0 || separation <= 0.0 {
                    return config("momentum_pair needs a positive separation and width");
                }
            }
            Profile::TorusMomentum { mean, amplitude, .. } => {
                if !finite(&[mean, amplitude]) {
                    return config("torus_momentum needs finite parameters");
                }
            }
            Profile::Cosine { amplitude, .. } => {
                if !amplitude.is_finite() {
                    return config("cosine needs a finite amplitude");
                }
            }
        }
        Ok(())
    }

    /// Samples `u0` on the grid.
    pub fn build(&self, grid: &GridSpec) -> Result<RealField> {
        self.validate()?;
        let l = grid.half_length();
        let u = match *self {
            Profile::Gaussian { amplitude, width, center } => {
                RealField::from_fn(grid, |x| amplitude * gaussian(x, center, width))
            }
            Profile::Sech2 { amplitude, width, center } => RealField::from_fn(grid, |x| {
                let s = 1.0 / ((x - center) / width).cosh();
                amplitude * s * s
            }),
            Profile::Cosine { amplitude, mode } => {
                let k = std::f64::consts::PI * mode as f64 / l;
                RealField::from_fn(grid, |x| amplitude * (k * x).cos())
            }
            Profile::MomentumPair { .. } | Profile::PositiveMomentum { .. } | Profile::TorusMomentum { .. } => {
                helmholtz_inverse(&self.momentum(grid)?)
            }
        };
        Ok(u)
    }

    /// `m0` sampled on the grid, for the profiles that are specified through it.
    pub fn momentum(&self, grid: &GridSpec) -> Result<RealField> {
        self.validate()?;
        let l = grid.half_length();
        match *self {
            Profile::MomentumPair { left, right, separation, width } => Ok(RealField::from_fn(grid, |x| {
                left * gaussian(x, -0.5 * separation, width) + right * gaussian(x, 0.5 * separation, width)
            })),
            Profile::PositiveMomentum { amplitude, width, center } => {
                Ok(RealField::from_fn(grid, |x| amplitude * gaussian(x, center, width)))
            }
            Profile::TorusMomentum { mean, amplitude, mode } => {
                let k = std::f64::consts::PI * mode as f64 / l;
                Ok(RealField::from_fn(grid, |x| mean + amplitude * (k * x).cos()))
            }
            _ => config("this profile is specified through u0, not m0"),
        }
    }

    /// The point where `m0` changes sign, when it changes sign exactly once.
    pub fn sign_change(&self) -> Option<f64> {
        match *self {
            Profile::MomentumPair { left, right, separation, width } if left * right < 0.0 => {
                Some(width * width * (left.abs() / right.abs()).ln() / (2.0 * separation))
            }
            _ => None,
        }
    }
}
