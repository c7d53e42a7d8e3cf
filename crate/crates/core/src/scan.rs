//! Parameter sweeps over independent steady-state solves.
//!
//! Grid points are immutable task descriptions handed to a bounded rayon
//! pool; results are collected in axis order, so the worker count never
//! changes the output. When deviations are requested the uncoupled baseline
//! pass runs to completion before the coupled pass starts.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Axis, Grid, ScanConfig, TruncationPolicy};
use crate::error::{Error, Result};
use crate::liouvillian::{ModelKind, ModelParams};
use crate::observables::{deviation, find_mollow_windows, photon_stats, MollowWindows, Observable, Probe, ProbedStats};
use crate::steadystate::{converge_truncation, solve_model, SolveMethod, SolverOptions, SteadyState, TruncationCap};

/// One output row. Field names and order are the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub axis: f64,
    pub n_a: f64,
    pub g2: Option<f64>,
    pub d_na: Option<f64>,
    pub d_g2: Option<f64>,
    pub residual: f64,
    pub n_cavity: usize,
    /// Mechanical truncation, 0 for models without a mechanical mode.
    pub n_mech: usize,
}

/// Physicality record of one accepted steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub axis: f64,
    pub baseline: bool,
    pub residual: f64,
    pub accepted_tolerance: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: Option<f64>,
    pub method: SolveMethod,
}

impl Diagnostics {
    pub fn of(axis: f64, baseline: bool, s: &SteadyState<f64>) -> Self {
        Self {
            axis,
            baseline,
            residual: s.residual,
            accepted_tolerance: s.accepted_tolerance,
            trace_error: s.trace_error,
            hermiticity_error: s.hermiticity_error,
            min_eigenvalue: s.min_eigenvalue,
            method: s.method,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub index: usize,
    pub axis_value: f64,
    pub baseline: bool,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub model: ModelKind,
    pub axis: Axis,
    pub axis_label: String,
    pub log_axis: bool,
    /// Fully resolved configuration; replaying it reproduces the run.
    pub config: ScanConfig,
    pub config_toml: String,
    pub version: String,
    pub wall_time_s: f64,
    pub windows: Option<MollowWindows<f64>>,
    /// Detuning held fixed for coupling and temperature sweeps.
    pub window_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Uncoupled reference rows (one per grid point, or a single row at the
    /// window for coupling sweeps).
    pub baseline: Vec<ScanRow>,
    pub diagnostics: Vec<Diagnostics>,
    pub metadata: ScanMetadata,
    pub failure: Option<ScanFailure>,
}

impl ScanResult {
    pub fn axis_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.axis).collect()
    }
}

/// How each grid point is solved.
#[derive(Debug, Clone, Copy)]
pub struct PointPolicy {
    pub truncation: TruncationPolicy,
    pub tolerance: f64,
    pub observable: Observable,
    pub cap: TruncationCap,
    pub solver: SolverOptions,
}

impl PointPolicy {
    pub fn from_config(cfg: &ScanConfig) -> Self {
        let r = cfg.resolved();
        Self {
            truncation: r.truncation.unwrap(),
            tolerance: r.truncation_tol.unwrap(),
            observable: r.truncation_observable.unwrap(),
            cap: r.truncation_cap(),
            solver: r.solver_options(),
        }
    }

    pub fn fixed() -> Self {
        Self {
            truncation: TruncationPolicy::Fixed,
            tolerance: f64::INFINITY,
            observable: Observable::MeanPhoton,
            cap: TruncationCap::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Solved grid point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub params: ModelParams<f64>,
    pub stats: ProbedStats<f64>,
    pub state: SteadyState<f64>,
}

impl PointResult {
    fn row(&self, axis: f64, kind: ModelKind) -> ScanRow {
        let dims = self.state.space.dims();
        ScanRow {
            axis,
            n_a: self.stats.stats.n_a,
            g2: self.stats.stats.g2,
            d_na: None,
            d_g2: None,
            residual: self.state.residual,
            n_cavity: kind.cavity_slot().map_or(0, |s| dims[s]),
            n_mech: if kind.is_oms() { *dims.last().unwrap() } else { 0 },
        }
    }
}

/// Solves one parameter point under `policy`.
pub fn solve_point(kind: ModelKind, params: &ModelParams<f64>, policy: &PointPolicy) -> Result<PointResult> {
    let state = match policy.truncation {
        TruncationPolicy::Fixed => solve_model(kind, params, &policy.solver)?,
        TruncationPolicy::Ladder => {
            converge_truncation(
                kind,
                params,
                policy.observable,
                (params.n_cavity, params.n_mech),
                policy.tolerance,
                policy.cap,
                &policy.solver,
            )?
            .state
        }
    };
    let stats = photon_stats(&state)?;
    Ok(PointResult { params: params.clone(), stats: ProbedStats { probe: Probe::of(params), stats }, state })
}

/// Parameters with the target's internal coupling switched off.
pub fn uncoupled(params: &ModelParams<f64>) -> ModelParams<f64> {
    ModelParams { g: 0.0, g_m: 0.0, ..params.clone() }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start {workers} workers: {e}")))
}

/// Solves every parameter set in order on `workers` threads.
pub fn solve_all(
    kind: ModelKind,
    points: &[ModelParams<f64>],
    policy: &PointPolicy,
    workers: usize,
) -> Result<Vec<Result<PointResult>>> {
    Ok(pool(workers)?.install(|| points.par_iter().map(|p| solve_point(kind, p, policy)).collect()))
}

/// Window table written by `calibrate` and read back by scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowTable {
    pub model: ModelKind,
    pub grid: Grid,
    pub windows: MollowWindows<f64>,
    pub axis: Vec<f64>,
    pub n_a: Vec<f64>,
}

impl WindowTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Locates the Mollow windows from an uncoupled detuning scan.
///
/// At zero internal coupling the target's matter degree of freedom is
/// decoupled from the cavity, so its truncation is set to the minimum.
pub fn calibrate(cfg: &ScanConfig) -> Result<WindowTable> {
    let r = cfg.resolved();
    let kind = r.kind();
    if !kind.has_source() || !kind.has_cavity() {
        return Err(Error::Configuration(format!("calibration needs a cascaded model, not {kind}")));
    }
    let grid = r.calibration_grid();
    grid.validate("calibration grid")?;
    let mut base = uncoupled(&r.params());
    base.n_mech = 2;
    let axis = grid.points();
    let points: Vec<ModelParams<f64>> = axis.iter().map(|&d| ModelParams { delta: d, ..base.clone() }).collect();
    let policy = PointPolicy::from_config(&r);
    let mut n_a = Vec::with_capacity(axis.len());
    for (k, res) in solve_all(kind, &points, &policy, r.workers.unwrap())?.into_iter().enumerate() {
        let point = res.map_err(|e| Error::ScanPoint { index: k, axis_value: axis[k], source: Box::new(e) })?;
        n_a.push(point.stats.stats.n_a);
    }
    let windows = find_mollow_windows(&axis, &n_a)?;
    Ok(WindowTable { model: kind, grid, windows, axis, n_a })
}

fn failure(index: usize, axis_value: f64, baseline: bool, err: &Error) -> ScanFailure {
    ScanFailure { index, axis_value, baseline, kind: err.kind().to_string(), message: err.to_string() }
}

/// Runs the sweep described by `cfg`.
///
/// Configuration and calibration problems are returned as errors. A failing
/// grid point stops the sweep: the result then holds the rows before it in
/// axis order and a [`ScanFailure`] marker.
pub fn run_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    let started = Instant::now();
    cfg.validate()?;
    let r = cfg.resolved();
    let kind = r.kind();
    let axis = r.axis();
    let grid = r.grid();
    let values = grid.points();
    let workers = r.workers.unwrap();
    let policy = PointPolicy::from_config(&r);
    let base = r.params();

    let (windows, window_delta) = match (axis, r.window, r.window_delta) {
        (Axis::Delta, _, _) => (None, None),
        (_, _, Some(d)) => (None, Some(d)),
        (_, Some(named), None) => {
            let table = match &r.windows_file {
                Some(path) => {
                    let t = WindowTable::load(path)?;
                    // Windows of the zero-temperature spectrum serve the thermal model too.
                    let compatible = t.model == kind || (t.model == ModelKind::CascadedJC && kind == ModelKind::CascadedJCThermal);
                    if !compatible {
                        return Err(Error::Configuration(format!("window table for {} used with {kind}", t.model)));
                    }
                    t
                }
                None => calibrate(&r)?,
            };
            (Some(table.windows), Some(table.windows.get(named)))
        }
        (_, None, None) => unreachable!("resolved sweeps always carry a window"),
    };

    let mut metadata = ScanMetadata {
        model: kind,
        axis,
        axis_label: axis.label().to_string(),
        log_axis: grid.spacing == crate::config::Spacing::Log,
        config_toml: r.to_toml_string(),
        config: r.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: 0.0,
        windows,
        window_delta,
    };

    let point_params = |value: f64| {
        let mut p = base.clone();
        if let Some(d) = window_delta {
            p.delta = d;
        }
        axis.set(&mut p, value);
        p
    };
    let coupled: Vec<ModelParams<f64>> = values.iter().map(|&v| point_params(v)).collect();

    let mut result = ScanResult { rows: Vec::new(), baseline: Vec::new(), diagnostics: Vec::new(), metadata: metadata.clone(), failure: None };

    // Baseline pass.
    let mut baseline_points: Vec<PointResult> = Vec::new();
    if r.deviations.unwrap() {
        let (baseline_params, baseline_axis): (Vec<ModelParams<f64>>, Vec<f64>) = match axis {
            Axis::G | Axis::GM => (vec![uncoupled(&point_params(values[0]))], vec![0.0]),
            Axis::Delta | Axis::NTh => (coupled.iter().map(uncoupled).collect(), values.clone()),
        };
        for (k, res) in solve_all(kind, &baseline_params, &policy, workers)?.into_iter().enumerate() {
            match res {
                Ok(point) => {
                    result.baseline.push(point.row(baseline_axis[k], kind));
                    result.diagnostics.push(Diagnostics::of(baseline_axis[k], true, &point.state));
                    baseline_points.push(point);
                }
                Err(e) => {
                    result.failure = Some(failure(k, baseline_axis[k], true, &e));
                    metadata.wall_time_s = started.elapsed().as_secs_f64();
                    result.metadata = metadata;
                    return Ok(result);
                }
            }
        }
    }

    // Coupled pass.
    for (k, res) in solve_all(kind, &coupled, &policy, workers)?.into_iter().enumerate() {
        let outcome = res.and_then(|point| {
            let mut row = point.row(values[k], kind);
            if !baseline_points.is_empty() {
                let reference = &baseline_points[if baseline_points.len() == 1 { 0 } else { k }];
                let (d_na, d_g2) = deviation(&point.stats, &reference.stats)?;
                row.d_na = Some(d_na);
                row.d_g2 = d_g2;
            }
            Ok((row, Diagnostics::of(values[k], false, &point.state)))
        });
        match outcome {
            Ok((row, diag)) => {
                result.rows.push(row);
                result.diagnostics.push(diag);
            }
            Err(e) => {
                result.failure = Some(failure(k, values[k], false, &e));
                break;
            }
        }
    }
    metadata.wall_time_s = started.elapsed().as_secs_f64();
    result.metadata = metadata;
    Ok(result)
}
