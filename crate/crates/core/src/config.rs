//! Flat key-value scan configuration.
//!
//! A configuration is a TOML document with top-level scalar keys only.
//! Unknown keys are rejected. Every key is optional; [`ScanConfig::resolved`]
//! fills in the defaults so that the resolved document, echoed into the
//! output, replays the run exactly.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LuOptions, Ordering};
use crate::liouvillian::{ModelKind, ModelParams};
use crate::observables::{NamedWindow, Observable};
use crate::steadystate::{SolverOptions, TruncationCap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Delta,
    G,
    GM,
    NTh,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Delta => "delta",
            Axis::G => "g",
            Axis::GM => "g_m",
            Axis::NTh => "n_th",
        }
    }

    /// Axis label for plots; rates are in units of the cavity decay.
    pub fn label(self) -> &'static str {
        match self {
            Axis::Delta => "Δ/κ",
            Axis::G => "g/κ",
            Axis::GM => "g_m/κ",
            Axis::NTh => "n̄_th",
        }
    }

    pub fn set(self, params: &mut ModelParams<f64>, value: f64) {
        match self {
            Axis::Delta => params.delta = value,
            Axis::G => params.g = value,
            Axis::GM => params.g_m = value,
            Axis::NTh => params.n_th = value,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "delta" => Ok(Axis::Delta),
            "g" => Ok(Axis::G),
            "g_m" | "g-m" => Ok(Axis::GM),
            "n_th" | "n-th" => Ok(Axis::NTh),
            other => Err(Error::Configuration(format!("unknown axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    Fixed,
    Ladder,
}

/// Grid of axis values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn validate(&self, what: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Configuration(format!("{what}: count {} must be at least 2", self.count)));
        }
        if !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Configuration(format!("{what}: need finite min < max, got {} and {}", self.min, self.max)));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(Error::Configuration(format!("{what}: log spacing needs min > 0")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                match (k, self.spacing) {
                    (0, _) => self.min,
                    (k, _) if k + 1 == self.count => self.max,
                    (_, Spacing::Linear) => self.min + (self.max - self.min) * t,
                    (_, Spacing::Log) => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Scan configuration as written by the user. Rates are in units of the
/// cavity decay rate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub model: Option<ModelKind>,
    pub axis: Option<Axis>,
    pub axis_min: Option<f64>,
    pub axis_max: Option<f64>,
    pub axis_count: Option<usize>,
    pub axis_spacing: Option<Spacing>,

    /// Named Mollow window for coupling and temperature sweeps.
    pub window: Option<NamedWindow>,
    /// Explicit detuning for coupling and temperature sweeps.
    pub window_delta: Option<f64>,
    /// Window table written by `calibrate`; otherwise a calibration scan runs first.
    pub windows_file: Option<PathBuf>,
    pub calibration_min: Option<f64>,
    pub calibration_max: Option<f64>,
    pub calibration_count: Option<usize>,

    /// Bundle an uncoupled baseline and report deviations from it.
    pub deviations: Option<bool>,

    pub gamma_s: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_m: Option<f64>,
    pub omega_drive: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub delta: Option<f64>,
    pub delta_s: Option<f64>,
    pub delta_a: Option<f64>,
    pub g: Option<f64>,
    pub g_m: Option<f64>,
    pub omega_m: Option<f64>,
    pub n_th: Option<f64>,
    pub n_cavity: Option<usize>,
    pub n_mech: Option<usize>,

    pub truncation: Option<TruncationPolicy>,
    pub truncation_tol: Option<f64>,
    pub truncation_observable: Option<Observable>,
    pub max_cavity: Option<usize>,
    pub max_mech: Option<usize>,

    pub solver_tolerance: Option<f64>,
    pub fill_cap: Option<usize>,
    pub ordering: Option<Ordering>,

    pub workers: Option<usize>,
    pub title: Option<String>,
}

/// Default truncations per model.
pub fn default_truncation(kind: ModelKind) -> (usize, usize) {
    match kind {
        ModelKind::CascadedOMS => (4, 6),
        ModelKind::ClassicalJC | ModelKind::ClassicalOMS => (4, 6),
        _ => (8, 2),
    }
}

impl ScanConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Configuration(e.to_string().trim().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat scalar configuration always serializes")
    }

    pub fn kind(&self) -> ModelKind {
        self.model.unwrap_or(ModelKind::CascadedJC)
    }

    pub fn axis(&self) -> Axis {
        self.axis.unwrap_or(Axis::Delta)
    }

    /// Copy with every default written out.
    pub fn resolved(&self) -> Self {
        let kind = self.kind();
        let axis = self.axis();
        let base = ModelParams::<f64>::default();
        let (nc, nm) = default_truncation(kind);
        let (min, max, count, spacing) = match axis {
            Axis::Delta => (-20.0, 20.0, 401, Spacing::Linear),
            Axis::G | Axis::GM => (1e-3, 1e-1, 21, Spacing::Log),
            Axis::NTh => (0.0, 0.2, 5, Spacing::Linear),
        };
        let is_sweep = axis != Axis::Delta;
        let coupling = match kind {
            k if k.is_jc() => self.g.unwrap_or(0.0),
            k if k.is_oms() => self.g_m.unwrap_or(0.0),
            _ => 0.0,
        };
        let mu1 = self.mu1.unwrap_or_else(|| self.mu2.map_or(base.mu1, |m2| 1.0 - m2));
        Self {
            model: Some(kind),
            axis: Some(axis),
            axis_min: Some(self.axis_min.unwrap_or(min)),
            axis_max: Some(self.axis_max.unwrap_or(max)),
            axis_count: Some(self.axis_count.unwrap_or(count)),
            axis_spacing: Some(self.axis_spacing.unwrap_or(spacing)),
            window: if is_sweep && self.window_delta.is_none() {
                Some(self.window.unwrap_or(NamedWindow::HalfRight))
            } else {
                self.window
            },
            window_delta: self.window_delta,
            windows_file: self.windows_file.clone(),
            calibration_min: Some(self.calibration_min.unwrap_or(-20.0)),
            calibration_max: Some(self.calibration_max.unwrap_or(20.0)),
            calibration_count: Some(self.calibration_count.unwrap_or(401)),
            deviations: Some(self.deviations.unwrap_or(is_sweep || coupling != 0.0)),
            gamma_s: Some(self.gamma_s.unwrap_or(base.gamma_s)),
            gamma: Some(self.gamma.unwrap_or(base.gamma)),
            gamma_m: Some(self.gamma_m.unwrap_or(base.gamma_m)),
            omega_drive: Some(self.omega_drive.unwrap_or(base.omega_drive)),
            mu1: Some(mu1),
            mu2: Some(self.mu2.unwrap_or(1.0 - mu1)),
            delta: Some(self.delta.unwrap_or(base.delta)),
            delta_s: Some(self.delta_s.unwrap_or(base.delta_s)),
            delta_a: self.delta_a,
            g: Some(self.g.unwrap_or(0.0)),
            g_m: Some(self.g_m.unwrap_or(0.0)),
            omega_m: Some(self.omega_m.unwrap_or(base.omega_m)),
            n_th: Some(self.n_th.unwrap_or(0.0)),
            n_cavity: Some(self.n_cavity.unwrap_or(nc)),
            n_mech: Some(self.n_mech.unwrap_or(nm)),
            truncation: Some(self.truncation.unwrap_or(TruncationPolicy::Fixed)),
            truncation_tol: Some(self.truncation_tol.unwrap_or(1e-6)),
            truncation_observable: Some(self.truncation_observable.unwrap_or(Observable::MeanPhoton)),
            max_cavity: Some(self.max_cavity.unwrap_or(TruncationCap::default().n_cavity)),
            max_mech: Some(self.max_mech.unwrap_or(TruncationCap::default().n_mech)),
            solver_tolerance: Some(self.solver_tolerance.unwrap_or(SolverOptions::default().tolerance)),
            fill_cap: Some(self.fill_cap.unwrap_or(SolverOptions::default().lu.max_fill)),
            ordering: Some(self.ordering.unwrap_or_default()),
            workers: Some(self.workers.unwrap_or(1)),
            title: self.title.clone(),
        }
    }

    pub fn grid(&self) -> Grid {
        let r = self.resolved();
        Grid {
            min: r.axis_min.unwrap(),
            max: r.axis_max.unwrap(),
            count: r.axis_count.unwrap(),
            spacing: r.axis_spacing.unwrap(),
        }
    }

    pub fn calibration_grid(&self) -> Grid {
        let r = self.resolved();
        Grid {
            min: r.calibration_min.unwrap(),
            max: r.calibration_max.unwrap(),
            count: r.calibration_count.unwrap(),
            spacing: Spacing::Linear,
        }
    }

    /// Base model parameters, before the axis value is applied.
    pub fn params(&self) -> ModelParams<f64> {
        let r = self.resolved();
        ModelParams {
            kappa: 1.0,
            gamma_s: r.gamma_s.unwrap(),
            gamma: r.gamma.unwrap(),
            gamma_m: r.gamma_m.unwrap(),
            omega_drive: r.omega_drive.unwrap(),
            mu1: r.mu1.unwrap(),
            mu2: r.mu2.unwrap(),
            delta: r.delta.unwrap(),
            delta_s: r.delta_s.unwrap(),
            delta_a: r.delta_a,
            g: r.g.unwrap(),
            g_m: r.g_m.unwrap(),
            omega_m: r.omega_m.unwrap(),
            n_th: r.n_th.unwrap(),
            n_cavity: r.n_cavity.unwrap(),
            n_mech: r.n_mech.unwrap(),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let r = self.resolved();
        let defaults = SolverOptions::default();
        SolverOptions {
            tolerance: r.solver_tolerance.unwrap(),
            lu: LuOptions { max_fill: r.fill_cap.unwrap(), ordering: r.ordering.unwrap(), ..defaults.lu },
            ..defaults
        }
    }

    pub fn truncation_cap(&self) -> TruncationCap {
        let r = self.resolved();
        TruncationCap { n_cavity: r.max_cavity.unwrap(), n_mech: r.max_mech.unwrap() }
    }

    /// Checks cross-key consistency.
    pub fn validate(&self) -> Result<()> {
        let r = self.resolved();
        let kind = r.kind();
        let axis = r.axis();
        self.grid().validate("axis grid")?;
        if !kind.has_cavity() {
            return Err(Error::Configuration(format!("{kind} has no target cavity to scan")));
        }
        match axis {
            Axis::G if !kind.is_jc() => return Err(Error::Configuration(format!("axis g needs a Jaynes–Cummings model, not {kind}"))),
            Axis::GM if !kind.is_oms() => return Err(Error::Configuration(format!("axis g_m needs an optomechanical model, not {kind}"))),
            Axis::NTh if kind != ModelKind::CascadedJCThermal => {
                return Err(Error::Configuration(format!("axis n_th needs {}, not {kind}", ModelKind::CascadedJCThermal)))
            }
            _ => {}
        }
        if axis == Axis::Delta && (self.window.is_some() || self.window_delta.is_some()) {
            return Err(Error::Configuration("window keys apply only to coupling and temperature sweeps".into()));
        }
        if self.window.is_some() && self.window_delta.is_some() {
            return Err(Error::Configuration("window and window_delta are mutually exclusive".into()));
        }
        if r.window.is_some() && self.windows_file.is_none() {
            self.calibration_grid().validate("calibration grid")?;
            if !kind.has_source() {
                return Err(Error::Configuration("named windows need a cascaded model with a Mollow source".into()));
            }
        }
        if self.mu1.is_some() && self.mu2.is_some() && (r.mu1.unwrap() + r.mu2.unwrap() - 1.0).abs() > 1e-12 {
            return Err(Error::Configuration("mu1 + mu2 must equal 1".into()));
        }
        if r.workers == Some(0) {
            return Err(Error::Configuration("workers must be at least 1".into()));
        }
        if !(r.truncation_tol.unwrap() > 0.0) {
            return Err(Error::Configuration("truncation_tol must be positive".into()));
        }
        if !(r.solver_tolerance.unwrap() > 0.0) {
            return Err(Error::Configuration("solver_tolerance must be positive".into()));
        }
        let mut probe = r.params();
        axis.set(&mut probe, r.grid().points()[0]);
        probe.validate_for(kind)
    }
}
