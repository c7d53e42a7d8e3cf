//! Self-checks run by the `check` and `oracle` commands.

use serde::{Deserialize, Serialize};

use crate::config::ScanConfig;
use crate::error::{Error, Result};
use crate::liouvillian::{assemble, ModelKind, ModelParams};
use crate::observables::photon_stats;
use crate::oracle::{evaluate, na_closed_form, Discrepancy, OracleInput, OracleValues};
use crate::scan::uncoupled;
use crate::steadystate::{solve_model, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, tolerance }
    }
}

/// Small-truncation variant of `base` with a nonzero value for every
/// coupling the model has.
fn small_params(kind: ModelKind, base: &ModelParams<f64>) -> ModelParams<f64> {
    let mut p = ModelParams { n_cavity: 3, n_mech: 3, g: 0.0, g_m: 0.0, n_th: 0.0, ..base.clone() };
    if kind.is_jc() {
        p.g = if base.g != 0.0 { base.g } else { 0.1 };
    }
    if kind.is_oms() {
        p.g_m = if base.g_m != 0.0 { base.g_m } else { 0.1 };
    }
    if kind == ModelKind::CascadedJCThermal {
        p.n_th = if base.n_th != 0.0 { base.n_th } else { 0.1 };
    }
    p
}

fn max_diff(a: &[crate::Cplx<f64>], b: &[crate::Cplx<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Structural and physical invariants on small instances built from the
/// physics parameters of `cfg`.
pub fn run_checks(cfg: &ScanConfig) -> Result<Vec<CheckOutcome>> {
    let r = cfg.resolved();
    let base = r.params();
    let opts = r.solver_options();
    let mut out = Vec::new();

    for kind in ModelKind::ALL {
        let p = small_params(kind, &base);
        let l = assemble(kind, &p)?;
        out.push(CheckOutcome::at_most(format!("trace_annihilation/{kind}"), l.trace_defect() / l.max_abs(), 1e-12));
        let s = solve_model(kind, &p, &opts)?;
        let neg = s.min_eigenvalue.map_or(0.0, |e| (-e).max(0.0));
        let worst = s.trace_error.max(s.hermiticity_error).max(neg);
        out.push(CheckOutcome::at_most(format!("physicality/{kind}"), worst, 1e-10));
    }

    let target = ModelParams { n_cavity: 4, ..uncoupled(&base) };
    let mut worst = 0.0f64;
    for delta in [-5.0, 0.0, 2.5] {
        let p = ModelParams { delta, delta_a: None, n_th: 0.0, ..target.clone() };
        let numeric = photon_stats(&solve_model(ModelKind::CascadedJC, &p, &opts)?)?.n_a;
        let analytic = na_closed_form(&OracleInput::from_params(&p));
        worst = worst.max(Discrepancy::new("n_a", analytic, numeric).relative_error);
    }
    out.push(CheckOutcome::at_most("oracle/n_a", worst, 1e-4));

    // Reflecting all detunings is an antiunitary symmetry of the JC model.
    let sym = ModelParams { delta_s: 0.0, delta_a: None, n_th: 0.0, n_cavity: 4, ..small_params(ModelKind::CascadedJC, &base) };
    let plus = photon_stats(&solve_model(ModelKind::CascadedJC, &ModelParams { delta: 3.0, ..sym.clone() }, &opts)?)?.n_a;
    let minus = photon_stats(&solve_model(ModelKind::CascadedJC, &ModelParams { delta: -3.0, ..sym }, &opts)?)?.n_a;
    out.push(CheckOutcome::at_most("jc_detuning_symmetry", (plus - minus).abs() / plus.abs(), 1e-8));

    let p = small_params(ModelKind::CascadedJC, &base);
    let cold = solve_model(ModelKind::CascadedJC, &p, &opts)?;
    let thermal = solve_model(ModelKind::CascadedJCThermal, &p, &opts)?;
    out.push(CheckOutcome::at_most("thermal_at_zero_temperature", max_diff(&cold.rho, &thermal.rho), 1e-12));
    Ok(out)
}

/// Closed forms next to the numerical solution at the configured point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub input: OracleInput<f64>,
    pub closed_forms: OracleValues<f64>,
    pub numeric_n_a: f64,
    pub numeric_g2: Option<f64>,
    pub discrepancies: Vec<Discrepancy>,
}

/// Compares the uncoupled-target closed forms with a steady-state solve.
/// The resonant forms are compared only when the detuning is zero.
pub fn oracle_report(cfg: &ScanConfig, opts: &SolverOptions) -> Result<OracleReport> {
    let r = cfg.resolved();
    let base = r.params();
    if base.n_th != 0.0 {
        return Err(Error::Configuration("closed forms hold at zero temperature only".into()));
    }
    let p = ModelParams { delta_a: None, ..uncoupled(&base) };
    let input = OracleInput::from_params(&p);
    let closed_forms = evaluate(&input)?;
    let stats = photon_stats(&solve_model(ModelKind::CascadedJC, &p, opts)?)?;
    let mut discrepancies = vec![Discrepancy::new("n_a", closed_forms.na_closed_form, stats.n_a)];
    if p.delta == 0.0 {
        discrepancies.push(Discrepancy::new("n_a_resonant", closed_forms.na_resonant, stats.n_a));
        if let Some(g2) = stats.g2 {
            discrepancies.push(Discrepancy::new("g2_resonant", closed_forms.g2_resonant, g2));
        }
    }
    Ok(OracleReport { input, closed_forms, numeric_n_a: stats.n_a, numeric_g2: stats.g2, discrepancies })
}
