//! Executes manifests and writes run directories.
//!
//! A simulate run directory holds `manifest.toml` (the normalised echo),
//! `diagnostics.csv`, `monitors.csv`, `final.bfsn` and `summary.json`.
//! Inflate runs add `series.csv` and replace the summary by `report.json`.
//! A sweep writes one such directory per value plus `summary.csv`.

use std::path::{Path, PathBuf};

use bfamily_core::diagnostics::{DiagRecord, CSV_HEADER};
use bfamily_core::inflation::{build_u0, inflation_experiment, InflationReport, SERIES_HEADER};
use bfamily_core::solver::{run, BParams, Monitor, RunResult, Verdict};
use bfamily_core::spectral::RealField;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyze::{csv as norms_csv, norm_table, print_table};
use crate::manifest::{AnalyzeSpec, ExperimentKind, RunManifest};
use crate::snapshot::Snapshot;
use crate::{LabError, LabResult};

pub const MONITOR_HEADER: &str =
    "t,dt,slope_integral,tail_fraction,cross_form_gap,transport_residual,particle_signs_ok,flow_ordered";

pub const SUMMARY_HEADER: &str = "name,parameter,value,verdict,verdict_time,steps,h0_drift,max_slope,growth_factor,peak_besov_ratio,comparison_violations,dir";

/// Scalar outcome of one run, as written to `summary.json` and sweep summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub kind: ExperimentKind,
    pub b: f64,
    pub verdict: Verdict,
    pub verdict_time: f64,
    pub steps: usize,
    pub records: usize,
    /// `|H0(t_end) - H0(0)| / max(|H0(0)|, ||m0||_L1)`.
    pub h0_drift: f64,
    /// Largest `||u_x||_inf` over the records.
    pub max_slope: f64,
    pub energy_ratio_sup: f64,
    pub growth_factor: Option<f64>,
    pub peak_besov_ratio: Option<f64>,
    pub comparison_violations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
    /// Text printed by an analyze run.
    pub table: Option<String>,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> LabResult<()> {
    std::fs::write(path, contents).map_err(LabError::io(path))
}

fn prepare_dir(dir: &Path) -> LabResult<()> {
    std::fs::create_dir_all(dir).map_err(LabError::io(dir))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map_or_else(|| "na".to_string(), f)
}

pub fn diagnostics_csv(records: &[DiagRecord]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn monitors_csv(monitors: &[Monitor]) -> String {
    let mut out = format!("{MONITOR_HEADER}\n");
    for m in monitors {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            num(m.t),
            num(m.dt),
            num(m.slope_integral),
            num(m.tail_fraction),
            opt(m.cross_form_gap, num),
            opt(m.transport_residual, num),
            opt(m.particle_signs_ok, |b| b.to_string()),
            opt(m.flow_ordered, |b| b.to_string()),
        ));
    }
    out
}

fn record_stats(records: &[DiagRecord]) -> (f64, f64, f64) {
    let h0_start = records.first().map_or(0.0, |r| r.h0);
    let h0_end = records.last().map_or(0.0, |r| r.h0);
    // Odd data have H0 = 0, so the scale falls back to ||m0||_L1.
    let scale = records.first().map_or(0.0, |r| r.h0.abs().max(r.m_l1));
    let drift = if scale > 0.0 { (h0_end - h0_start).abs() / scale } else { (h0_end - h0_start).abs() };
    let slope = records
        .iter()
        .map(|r| r.min_ux.abs().max(r.max_ux.abs()))
        .fold(0.0, f64::max);
    let ratio = records.iter().map(|r| r.energy_ratio).fold(f64::NEG_INFINITY, f64::max);
    (drift, slope, ratio)
}

/// Initial velocity described by the manifest.
pub fn initial_velocity(m: &RunManifest) -> LabResult<RealField> {
    let grid = m.grid()?;
    if let Some(p) = &m.initial.profile {
        return Ok(p.build(&grid)?);
    }
    if let Some(spec) = &m.initial.inflation {
        return Ok(build_u0(&spec.config(m.b()?)?, &grid)?.u0);
    }
    if let Some(path) = &m.initial.file {
        let snap = Snapshot::read(path)?;
        if snap.samples.len() != grid.num_points() || snap.half_length != grid.half_length() {
            return Err(LabError::Config(format!(
                "snapshot {} holds M = {}, L = {} but the manifest grid is M = {}, L = {}",
                path.display(),
                snap.samples.len(),
                snap.half_length,
                grid.num_points(),
                grid.half_length()
            )));
        }
        return snap.to_field();
    }
    Err(LabError::Config("no initial data".into()))
}

fn echo(m: &RunManifest, dir: &Path) -> LabResult<()> {
    write(&dir.join("manifest.toml"), m.to_toml())
}

fn simulate(m: &RunManifest) -> LabResult<Outcome> {
    let u0 = initial_velocity(m)?;
    let b = m.b()?;
    let result: RunResult = run(&u0, BParams::new(b)?, m.solver.clone())?;
    let dir = m.out.clone();
    prepare_dir(&dir)?;
    echo(m, &dir)?;
    write(&dir.join("diagnostics.csv"), diagnostics_csv(&result.records))?;
    write(&dir.join("monitors.csv"), monitors_csv(&result.monitors))?;
    Snapshot::of(&result.final_velocity, result.verdict_time).write(&dir.join("final.bfsn"))?;
    let (h0_drift, max_slope, energy_ratio_sup) = record_stats(&result.records);
    let summary = RunSummary {
        name: m.display_name(),
        kind: m.kind,
        b,
        verdict: result.verdict,
        verdict_time: result.verdict_time,
        steps: result.steps,
        records: result.records.len(),
        h0_drift,
        max_slope,
        energy_ratio_sup,
        growth_factor: None,
        peak_besov_ratio: None,
        comparison_violations: None,
    };
    write(&dir.join("summary.json"), to_json(&summary))?;
    Ok(Outcome { dir, summary, table: None })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialise");
    s.push('\n');
    s
}

fn inflate(m: &RunManifest) -> LabResult<Outcome> {
    let b = m.b()?;
    let spec = m
        .initial
        .inflation
        .as_ref()
        .ok_or_else(|| LabError::Config("inflate needs [initial.inflation]".into()))?;
    let cfg = spec.config(b)?;
    let grid = m.grid()?;
    let mut report: InflationReport = inflation_experiment(&cfg, &grid, &m.solver)?;
    report.series_file = Some("series.csv".into());
    let dir = m.out.clone();
    prepare_dir(&dir)?;
    echo(m, &dir)?;
    write(&dir.join("diagnostics.csv"), diagnostics_csv(&report.records))?;
    let mut series = format!("{SERIES_HEADER}\n");
    for s in &report.series {
        series.push_str(&s.csv_row());
        series.push('\n');
    }
    write(&dir.join("series.csv"), series)?;
    if let Some(u) = &report.final_velocity {
        Snapshot::of(u, report.summary.verdict_time).write(&dir.join("final.bfsn"))?;
    }
    write(&dir.join("report.json"), to_json(&report))?;
    let (h0_drift, max_slope, energy_ratio_sup) = record_stats(&report.records);
    let summary = RunSummary {
        name: m.display_name(),
        kind: m.kind,
        b,
        verdict: report.verdict,
        verdict_time: report.summary.verdict_time,
        steps: report.summary.steps,
        records: report.records.len(),
        h0_drift,
        max_slope,
        energy_ratio_sup,
        growth_factor: Some(report.summary.slope_growth_factor),
        peak_besov_ratio: Some(report.summary.peak_besov_ratio),
        comparison_violations: Some(report.summary.comparison_violations),
    };
    Ok(Outcome { dir, summary, table: None })
}

fn analyze(m: &RunManifest) -> LabResult<Outcome> {
    let path = m
        .initial
        .file
        .as_ref()
        .ok_or_else(|| LabError::Config("analyze needs initial.file".into()))?;
    let snap = Snapshot::read(path)?;
    let u = snap.to_field()?;
    let spec = m.analyze.clone().unwrap_or_default();
    let rows = norm_table(&u, &spec)?;
    let dir = m.out.clone();
    prepare_dir(&dir)?;
    echo(m, &dir)?;
    write(&dir.join("norms.csv"), norms_csv(&rows))?;
    let summary = RunSummary {
        name: m.display_name(),
        kind: m.kind,
        b: m.b.unwrap_or(f64::NAN),
        verdict: Verdict::Completed,
        verdict_time: snap.t,
        steps: 0,
        records: 0,
        h0_drift: 0.0,
        max_slope: 0.0,
        energy_ratio_sup: 0.0,
        growth_factor: None,
        peak_besov_ratio: None,
        comparison_violations: None,
    };
    Ok(Outcome { dir, summary, table: Some(print_table(&rows)) })
}

/// Norm table of a snapshot file, without a manifest.
pub fn analyze_file(path: &Path, spec: &AnalyzeSpec) -> LabResult<String> {
    let u = Snapshot::read(path)?.to_field()?;
    Ok(print_table(&norm_table(&u, spec)?))
}

fn sweep(m: &RunManifest, jobs: usize) -> LabResult<Vec<Outcome>> {
    let spec = m.sweep.as_ref().ok_or_else(|| LabError::Config("missing [sweep]".into()))?;
    let members: Vec<(f64, RunManifest)> = spec
        .values
        .iter()
        .map(|&v| m.member(v).map(|mm| (v, mm)))
        .collect::<LabResult<_>>()?;
    prepare_dir(&m.out)?;
    echo(m, &m.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LabError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<LabResult<Outcome>> =
        pool.install(|| members.par_iter().map(|(_, mm)| execute_single(mm)).collect());
    let outcomes: Vec<Outcome> = outcomes.into_iter().collect::<LabResult<_>>()?;
    let mut table = format!("{SUMMARY_HEADER}\n");
    for ((value, _), o) in members.iter().zip(&outcomes) {
        let s = &o.summary;
        let dir = o.dir.strip_prefix(&m.out).unwrap_or(&o.dir);
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.name,
            spec.parameter.as_str(),
            value,
            s.verdict.as_str(),
            num(s.verdict_time),
            s.steps,
            num(s.h0_drift),
            num(s.max_slope),
            opt(s.growth_factor, num),
            opt(s.peak_besov_ratio, num),
            opt(s.comparison_violations, |c| c.to_string()),
            dir.display(),
        ));
    }
    write(&m.out.join("summary.csv"), table)?;
    Ok(outcomes)
}

fn execute_single(m: &RunManifest) -> LabResult<Outcome> {
    match m.kind {
        ExperimentKind::Simulate => simulate(m),
        ExperimentKind::Inflate => inflate(m),
        ExperimentKind::Analyze => analyze(m),
        ExperimentKind::Sweep => Err(LabError::Config("nested sweeps are not supported".into())),
    }
}

/// Runs a validated manifest. Blow-up and resolution loss are outcomes, not
/// errors; only configuration and I/O problems return `Err`.
pub fn execute(m: &RunManifest, jobs: usize) -> LabResult<Vec<Outcome>> {
    m.validate()?;
    match m.kind {
        ExperimentKind::Sweep => sweep(m, jobs),
        _ => Ok(vec![execute_single(m)?]),
    }
}
