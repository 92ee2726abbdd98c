//! Run manifests: a TOML file naming the experiment, its grid, the equation
//! parameter, solver settings and exactly one source of initial data.
//!
//! ```toml
//! kind = "simulate"          # simulate | inflate | analyze | sweep
//! name = "ch_positive"       # optional, defaults to the kind
//! b = 2.0
//! out = "runs/ch_positive"   # run directory
//!
//! [grid]
//! half_length = 40.0
//! num_points = 8192
//!
//! [solver]                   # any SolverConfig field; omitted ones take defaults
//! t_end = 10.0
//! cadence = 10.0             # records per unit time
//!
//! [initial.profile]          # or [initial.inflation], or initial.file = "u0.bfsn"
//! name = "positive_momentum"
//! amplitude = 0.5
//! width = 1.0
//! ```
//!
//! `kind = "sweep"` adds a `[sweep]` table (`base`, `parameter`, `values`);
//! `kind = "analyze"` reads `initial.file` and an optional `[analyze]` table.

use std::path::{Path, PathBuf};

use bfamily_core::inflation::{InflationConfig, SignCase};
use bfamily_core::profiles::Profile;
use bfamily_core::solver::SolverConfig;
use bfamily_core::spectral::{make_grid, GridSpec};
use serde::{Deserialize, Serialize};

use crate::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Inflate,
    Analyze,
    Sweep,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Inflate => "inflate",
            ExperimentKind::Analyze => "analyze",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub half_length: f64,
    pub num_points: usize,
}

impl GridParams {
    pub fn build(&self) -> LabResult<GridSpec> {
        Ok(make_grid(self.half_length, self.num_points)?)
    }
}

/// Parameters of the frequency comb; `b` comes from the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationSpec {
    pub n: u32,
    #[serde(with = "bfamily_core::serde_ext")]
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_case: Option<SignCase>,
    #[serde(default = "default_center")]
    pub bump_center: f64,
    #[serde(default = "default_halfwidth")]
    pub bump_halfwidth: f64,
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

impl InflationSpec {
    pub fn config(&self, b: f64) -> LabResult<InflationConfig> {
        if b == 1.0 {
            return Err(LabError::Config(
                "the comb construction requires b != 1 (there is no sign case at b = 1)".into(),
            ));
        }
        let sign_case = match (self.sign_case, SignCase::for_b(b)) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) => return Err(LabError::Config("b must differ from 1".into())),
        };
        let cfg = InflationConfig {
            n: self.n,
            q: self.q,
            b,
            sign_case,
            bump_center: self.bump_center,
            bump_halfwidth: self.bump_halfwidth,
            normalize: self.normalize,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<InflationSpec>,
    /// Snapshot file; relative paths resolve against the manifest's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl InitialData {
    fn sources(&self) -> usize {
        self.profile.is_some() as usize + self.inflation.is_some() as usize + self.file.is_some() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    N,
    Q,
    B,
    TEnd,
    NumPoints,
    HalfLength,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::N => "n",
            SweepParameter::Q => "q",
            SweepParameter::B => "b",
            SweepParameter::TEnd => "t_end",
            SweepParameter::NumPoints => "num_points",
            SweepParameter::HalfLength => "half_length",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Kind of every member run: simulate or inflate.
    pub base: ExperimentKind,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSpec {
    #[serde(default = "default_orders")]
    pub s: Vec<f64>,
    #[serde(default = "default_q")]
    pub q: Vec<f64>,
}

impl Default for AnalyzeSpec {
    fn default() -> Self {
        Self { s: default_orders(), q: default_q() }
    }
}

fn default_orders() -> Vec<f64> {
    vec![1.5]
}

fn default_q() -> Vec<f64> {
    vec![2.0, f64::INFINITY]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Run directory (the parent of the member runs for a sweep).
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridParams>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyze: Option<AnalyzeSpec>,
}

impl RunManifest {
    pub fn from_toml(text: &str) -> LabResult<Self> {
        let m: RunManifest = toml::from_str(text).map_err(|e| LabError::Config(e.message().to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Normalised text: every default filled in, fixed key order.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifests serialise")
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.as_str().to_string())
    }

    pub fn b(&self) -> LabResult<f64> {
        self.b
            .ok_or_else(|| LabError::Config(format!("kind = \"{}\" needs the equation parameter b", self.kind.as_str())))
    }

    pub fn grid(&self) -> LabResult<GridSpec> {
        self.grid
            .ok_or_else(|| LabError::Config(format!("kind = \"{}\" needs a [grid] table", self.kind.as_str())))?
            .build()
    }

    pub fn validate(&self) -> LabResult<()> {
        let cfg = |msg: String| Err(LabError::Config(msg));
        self.solver.validate()?;
        if let Some(b) = self.b {
            if !b.is_finite() {
                return cfg(format!("b must be finite, got {b}"));
            }
        }
        let sources = self.initial.sources();
        match self.kind {
            ExperimentKind::Simulate | ExperimentKind::Inflate => {
                self.b()?;
                self.grid()?;
                if sources != 1 {
                    return cfg(format!(
                        "exactly one initial-data source (initial.profile, initial.inflation or initial.file) is required, found {sources}"
                    ));
                }
                if let Some(p) = &self.initial.profile {
                    p.validate()?;
                }
                if let Some(spec) = &self.initial.inflation {
                    spec.config(self.b()?)?;
                }
                if self.kind == ExperimentKind::Inflate && self.initial.inflation.is_none() {
                    return cfg("kind = \"inflate\" takes its initial data from [initial.inflation]".into());
                }
                if self.sweep.is_some() || self.analyze.is_some() {
                    return cfg(format!("[sweep] and [analyze] do not apply to kind = \"{}\"", self.kind.as_str()));
                }
            }
            ExperimentKind::Analyze => {
                if self.initial.file.is_none() || sources != 1 {
                    return cfg("kind = \"analyze\" reads exactly one snapshot from initial.file".into());
                }
                if let Some(a) = &self.analyze {
                    if a.s.is_empty() || a.q.is_empty() {
                        return cfg("[analyze] needs at least one s and one q".into());
                    }
                    if a.q.iter().any(|q| !(*q >= 1.0)) {
                        return cfg("[analyze] q values must be >= 1 or inf".into());
                    }
                }
            }
            ExperimentKind::Sweep => {
                let Some(sweep) = &self.sweep else {
                    return cfg("kind = \"sweep\" needs a [sweep] table".into());
                };
                if !matches!(sweep.base, ExperimentKind::Simulate | ExperimentKind::Inflate) {
                    return cfg("sweep.base must be \"simulate\" or \"inflate\"".into());
                }
                if sweep.values.is_empty() {
                    return cfg("sweep.values is empty".into());
                }
                for v in &sweep.values {
                    self.member(*v)?.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Member run of a sweep for one parameter value.
    pub fn member(&self, value: f64) -> LabResult<RunManifest> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| LabError::Config("not a sweep manifest".into()))?;
        let mut m = self.clone();
        m.kind = sweep.base;
        m.sweep = None;
        m.name = Some(format!("{}_{}_{}", self.display_name(), sweep.parameter.as_str(), value));
        m.out = self.out.join(format!("{}_{}", sweep.parameter.as_str(), value));
        let integer = |what: &str| -> LabResult<u64> {
            if value >= 0.0 && value.fract() == 0.0 && value.is_finite() {
                Ok(value as u64)
            } else {
                Err(LabError::Config(format!("sweep over {what} needs nonnegative integers, got {value}")))
            }
        };
        match sweep.parameter {
            SweepParameter::N | SweepParameter::Q => {
                let spec = m.initial.inflation.as_mut().ok_or_else(|| {
                    LabError::Config("sweeping n or q needs [initial.inflation]".into())
                })?;
                if sweep.parameter == SweepParameter::N {
                    spec.n = integer("n")? as u32;
                } else {
                    spec.q = value;
                }
            }
            SweepParameter::B => m.b = Some(value),
            SweepParameter::TEnd => m.solver.t_end = value,
            SweepParameter::NumPoints | SweepParameter::HalfLength => {
                let g = m
                    .grid
                    .as_mut()
                    .ok_or_else(|| LabError::Config("sweeping the grid needs a [grid] table".into()))?;
                if sweep.parameter == SweepParameter::NumPoints {
                    g.num_points = integer("num_points")? as usize;
                } else {
                    g.half_length = value;
                }
            }
        }
        Ok(m)
    }

    /// Resolves a relative `initial.file` against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(f) = &self.initial.file {
            if f.is_relative() {
                self.initial.file = Some(base.join(f));
            }
        }
    }
}

pub fn parse_manifest(path: &Path) -> LabResult<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
    let mut m = RunManifest::from_toml(&text)?;
    if let Some(dir) = path.parent() {
        m.resolve_paths(dir);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "simulate"
b = 2.0
out = "runs/x"

[grid]
half_length = 20.0
num_points = 256

[initial.profile]
name = "gaussian"
amplitude = 0.1
width = 1.0
"#;

    #[test]
    fn normalised_form_is_a_fixed_point() {
        let m = RunManifest::from_toml(MINIMAL).unwrap();
        let text = m.to_toml();
        let again = RunManifest::from_toml(&text).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.to_toml(), text);
        assert!(text.contains("tail_energy_threshold"));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = format!("viscosity = 0.1\n{MINIMAL}");
        let err = RunManifest::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("viscosity"), "{err}");
        let text = MINIMAL.replace("width = 1.0", "width = 1.0\nviscosity = 2");
        assert!(RunManifest::from_toml(&text).unwrap_err().to_string().contains("viscosity"));
    }

    #[test]
    fn inflate_at_b_one_is_rejected() {
        let text = r#"
kind = "inflate"
b = 1.0
out = "runs/i"
[grid]
half_length = 40.0
num_points = 4096
[initial.inflation]
n = 4
q = "inf"
"#;
        let err = RunManifest::from_toml(text).unwrap_err().to_string();
        assert!(err.contains("b != 1"), "{err}");
    }

    #[test]
    fn exactly_one_source() {
        let none = MINIMAL.replace("[initial.profile]\nname = \"gaussian\"\namplitude = 0.1\nwidth = 1.0\n", "");
        assert!(RunManifest::from_toml(&none).is_err());
        let two = format!("{MINIMAL}\n[initial.inflation]\nn = 4\nq = 2.0\n");
        assert!(RunManifest::from_toml(&two).unwrap_err().to_string().contains("exactly one"));
    }

    #[test]
    fn infinity_survives_the_round_trip() {
        let text = r#"
kind = "inflate"
b = -2.0
out = "runs/i"
[grid]
half_length = 40.0
num_points = 4096
[solver]
blowup_slope_threshold = inf
decay_tolerance = "off"
[initial.inflation]
n = 4
q = inf
"#;
        let m = RunManifest::from_toml(text).unwrap();
        assert!(m.initial.inflation.as_ref().unwrap().q.is_infinite());
        assert_eq!(m.solver.decay_tolerance, None);
        assert_eq!(RunManifest::from_toml(&m.to_toml()).unwrap(), m);
    }
}
