//! Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL
//! line each.
//!
//! Runs without the libtest harness so that every criterion reports even
//! when an earlier one fails. A small list of criteria is known to be out of
//! reach of the model as specified; those still run at full tolerance and
//! print FAIL, and only an unexpected outcome (a new failure, or a known
//! failure that starts passing) makes the process exit nonzero.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use mollow_core::config::ScanConfig;
use mollow_core::liouvillian::{assemble, ModelKind, ModelParams};
use mollow_core::observables::NamedWindow;
use mollow_core::oracle::{na_closed_form, OracleInput};
use mollow_core::scan::{calibrate, run_scan, solve_point, Diagnostics, PointPolicy, ScanResult, WindowTable};
use mollow_core::Result;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

/// Sub-checks that fail for reasons analysed in the project notes.
const KNOWN_FAILURES: &[(&str, &str)] = &[
    ("5b", "with the thermal model as specified d_g2 at n_th = 0.2 is of order 1e-7, far below 1e-2"),
    ("8a", "at the captioned drive Omega = 0.6 kappa the saturated atom pulls the peaks inward to about +-2.2 kappa"),
];

struct Check {
    id: String,
    description: String,
    passed: bool,
    detail: String,
}

struct Suite {
    checks: Vec<Check>,
    diagnostics: Vec<Diagnostics>,
    windows_jc: PathBuf,
    windows_oms: PathBuf,
    _dir: tempfile::TempDir,
}

impl Suite {
    fn record(&mut self, id: &str, description: &str, passed: bool, detail: String) {
        self.checks.push(Check { id: id.into(), description: description.into(), passed, detail });
    }

    fn scan(&mut self, text: &str) -> Result<ScanResult> {
        let res = run_scan(&ScanConfig::from_toml_str(text)?)?;
        self.diagnostics.extend(res.diagnostics.iter().copied());
        if let Some(f) = &res.failure {
            return Err(mollow_core::Error::Configuration(format!("scan stopped at point {}: {}", f.index, f.message)));
        }
        Ok(res)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn write_table(table: &WindowTable, path: &Path) {
    std::fs::write(path, serde_json::to_string(table).unwrap()).unwrap();
}

/// Local maxima of a sampled curve, strongest first.
fn local_maxima(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks: Vec<(f64, f64)> = (1..y.len() - 1).filter(|&k| y[k] > y[k - 1] && y[k] >= y[k + 1]).map(|k| (x[k], y[k])).collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks
}

fn criterion_1(s: &mut Suite) -> Result<()> {
    let started = Instant::now();
    let res = s.scan(
        "model = \"cascaded-jc\"\naxis = \"delta\"\naxis_min = -20.0\naxis_max = 20.0\naxis_count = 201\n\
         g = 0.0\ngamma_s = 0.02\ngamma = 0.001\nomega_drive = 8.0\nmu1 = 0.5\nmu2 = 0.5\n\
         n_cavity = 4\ntruncation = \"ladder\"\ntruncation_tol = 1e-6\n",
    )?;
    let params = ModelParams::<f64> { gamma_s: 0.02, omega_drive: 8.0, mu1: 0.5, mu2: 0.5, ..Default::default() };
    let worst = res
        .rows
        .iter()
        .map(|r| rel(r.n_a, na_closed_form(&OracleInput { delta: r.axis, ..OracleInput::from_params(&params) })))
        .fold(0.0, f64::max);
    let secs = started.elapsed().as_secs_f64();
    s.record(
        "1",
        "numerical n_a matches the closed form on 201 detunings",
        res.rows.len() == 201 && worst <= 1e-4 && secs < 300.0,
        format!("max relative error {worst:.2e} (tol 1e-4), {} points, {secs:.1} s", res.rows.len()),
    );
    Ok(())
}

/// `d_g2` at coupling `value` in the named window.
fn window_deviation(s: &mut Suite, model: &str, axis: &str, value: f64, window: NamedWindow, extra: &str) -> Result<f64> {
    let table = if model == "cascaded-oms" { &s.windows_oms } else { &s.windows_jc };
    let text = format!(
        "model = \"{model}\"\naxis = \"{axis}\"\naxis_min = 0.0\naxis_max = {value:?}\naxis_count = 2\naxis_spacing = \"linear\"\n\
         window = \"{window}\"\nwindows_file = {:?}\n{extra}",
        table.display().to_string()
    );
    let res = s.scan(&text)?;
    res.rows[1].d_g2.ok_or_else(|| mollow_core::Error::Comparison("g2 undefined".into()))
}

const LADDER_G2: &str = "truncation = \"ladder\"\ntruncation_tol = 1e-6\ntruncation_observable = \"g2\"\n";

fn criterion_2(s: &mut Suite) -> Result<()> {
    let d = window_deviation(s, "cascaded-jc", "g", 0.01, NamedWindow::HalfRight, LADDER_G2)?;
    s.record(
        "2",
        "JC halfway-window d_g2 at g = 0.01 is 0.0735 +-15%",
        rel(d, 0.0735) <= 0.15,
        format!("d_g2 = {d:.5}, relative offset {:.3}", rel(d, 0.0735)),
    );
    Ok(())
}

fn criterion_3(s: &mut Suite) -> Result<()> {
    let d = window_deviation(s, "cascaded-oms", "g_m", 0.01, NamedWindow::HalfRight, &format!("omega_m = 5.0\ngamma_m = 0.001\n{LADDER_G2}"))?;
    s.record(
        "3",
        "OMS halfway-window d_g2 at g_m = 0.01 is 0.0136 +-15%",
        rel(d, 0.0136) <= 0.15,
        format!("d_g2 = {d:.5}, relative offset {:.3}", rel(d, 0.0136)),
    );
    Ok(())
}

fn criterion_4(s: &mut Suite) -> Result<()> {
    let table = WindowTable::load(&s.windows_jc)?;
    let policy = PointPolicy::fixed();
    let mut g2 = Vec::new();
    for w in NamedWindow::ALL {
        let p = ModelParams::<f64> { delta: table.windows.get(w), ..Default::default() };
        let point = solve_point(ModelKind::CascadedJC, &p, &policy)?;
        s.diagnostics.push(Diagnostics::of(p.delta, false, &point.state));
        g2.push((w, point.stats.stats.g2.unwrap_or(f64::NAN)));
    }
    let get = |w: NamedWindow| g2.iter().find(|(x, _)| *x == w).unwrap().1;
    let detail = g2.iter().map(|(w, v)| format!("{w} {v:.4}")).collect::<Vec<_>>().join(", ");
    s.record("4a", "central window is bunched (g2 > 1)", get(NamedWindow::Center) > 1.0, detail.clone());
    s.record(
        "4b",
        "side windows are antibunched (g2 < 1)",
        get(NamedWindow::SideLeft) < 1.0 && get(NamedWindow::SideRight) < 1.0,
        detail.clone(),
    );
    s.record(
        "4c",
        "halfway windows are superbunched (g2 > 2)",
        get(NamedWindow::HalfLeft) > 2.0 && get(NamedWindow::HalfRight) > 2.0,
        detail,
    );
    Ok(())
}

fn criterion_5(s: &mut Suite) -> Result<()> {
    let text = format!(
        "model = \"cascaded-jc-thermal\"\naxis = \"n_th\"\naxis_min = 0.0\naxis_max = 0.2\naxis_count = 5\n\
         g = 0.01\nwindow = \"half_right\"\nwindows_file = {:?}\n{LADDER_G2}",
        s.windows_jc.display().to_string()
    );
    let res = s.scan(&text)?;
    let pick: Vec<(f64, f64)> = res
        .rows
        .iter()
        .filter(|r| [0.0, 0.05, 0.1, 0.2].iter().any(|&t| (r.axis - t).abs() < 1e-12))
        .map(|r| (r.axis, r.d_g2.unwrap_or(f64::NAN)))
        .collect();
    let monotone = pick.len() == 4 && pick.windows(2).all(|w| w[1].1 <= w[0].1);
    let detail = pick.iter().map(|(t, d)| format!("n_th {t}: {d:.3e}")).collect::<Vec<_>>().join(", ");
    s.record("5a", "thermal d_g2 at g = 0.01 is non-increasing in n_th", monotone, detail.clone());
    let last = pick.last().map_or(f64::NAN, |p| p.1);
    s.record("5b", "thermal d_g2 at n_th = 0.2 stays >= 0.01", last >= 0.01, detail);

    let window = WindowTable::load(&s.windows_jc)?.windows.half_right;
    let p = ModelParams::<f64> { delta: window, g: 0.01, ..Default::default() };
    let policy = PointPolicy::fixed();
    let cold = solve_point(ModelKind::CascadedJC, &p, &policy)?;
    let thermal = solve_point(ModelKind::CascadedJCThermal, &p, &policy)?;
    let dn = rel(thermal.stats.stats.n_a, cold.stats.stats.n_a);
    let dg = rel(thermal.stats.stats.g2.unwrap(), cold.stats.stats.g2.unwrap());
    s.record(
        "5c",
        "thermal model at n_th = 0 reproduces the zero-temperature model",
        dn <= 1e-10 && dg <= 1e-10,
        format!("relative differences n_a {dn:.1e}, g2 {dg:.1e} (tol 1e-10)"),
    );
    Ok(())
}

fn criterion_6(s: &mut Suite) -> Result<()> {
    let text = format!(
        "model = \"cascaded-jc\"\naxis = \"g\"\naxis_min = 0.001\naxis_max = 0.1\naxis_count = 21\naxis_spacing = \"log\"\n\
         window = \"half_right\"\nwindows_file = {:?}\n",
        s.windows_jc.display().to_string()
    );
    let res = s.scan(&text)?;
    let base = res.baseline[0];
    let mut worst_margin = f64::INFINITY;
    let mut ok = res.rows.len() == 21;
    for r in &res.rows {
        let rg = r.d_g2.unwrap_or(f64::NAN) / base.g2.unwrap_or(f64::NAN);
        let rn = r.d_na.unwrap_or(f64::NAN) / base.n_a;
        ok &= rg > rn;
        worst_margin = worst_margin.min(rg / rn);
    }
    s.record(
        "6",
        "relative d_g2 exceeds relative d_na on the whole g ladder",
        ok,
        format!("smallest ratio of relative deviations {worst_margin:.2}"),
    );
    Ok(())
}

fn asymmetry(res: &ScanResult) -> (f64, f64) {
    let n = res.rows.len();
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..n / 2 {
        let (a, b) = (res.rows[k], res.rows[n - 1 - k]);
        assert!((a.axis + b.axis).abs() < 1e-12);
        worst.0 = worst.0.max(rel(a.n_a, b.n_a));
        if let (Some(x), Some(y)) = (a.g2, b.g2) {
            worst.1 = worst.1.max(rel(x, y));
        }
    }
    worst
}

fn criterion_7(s: &mut Suite) -> Result<()> {
    let grid = "axis = \"delta\"\naxis_min = -20.0\naxis_max = 20.0\naxis_count = 81\ndeviations = false\n";
    let jc = s.scan(&format!("model = \"cascaded-jc\"\ng = 0.1\n{grid}"))?;
    let (an, ag) = asymmetry(&jc);
    s.record(
        "7a",
        "JC spectra symmetric about zero detuning",
        an <= 1e-8 && ag <= 1e-8,
        format!("max relative asymmetry n_a {an:.1e}, g2 {ag:.1e} (tol 1e-8)"),
    );

    let oms = s.scan(&format!("model = \"cascaded-oms\"\ng_m = 0.3\nomega_m = 5.0\ngamma_m = 0.001\n{grid}"))?;
    let (an, ag) = asymmetry(&oms);
    s.record(
        "7b",
        "OMS spectra measurably asymmetric at g_m = 0.3",
        an.max(ag) > 1e-3,
        format!("max relative asymmetry n_a {an:.2e}, g2 {ag:.2e} (threshold 1e-3)"),
    );

    let jl = window_deviation(s, "cascaded-jc", "g", 0.1, NamedWindow::HalfLeft, "")?;
    let jr = window_deviation(s, "cascaded-jc", "g", 0.1, NamedWindow::HalfRight, "")?;
    let spread = (jl - jr).abs() / jl.max(jr);
    s.record(
        "7c",
        "JC left and right statistics-peak deviations agree within 1%",
        spread <= 0.01,
        format!("d_g2 left {jl:.5}, right {jr:.5}, spread {spread:.1e}"),
    );

    let oms_extra = "omega_m = 5.0\ngamma_m = 0.001\n";
    let ol = window_deviation(s, "cascaded-oms", "g_m", 0.3, NamedWindow::HalfLeft, oms_extra)?;
    let or = window_deviation(s, "cascaded-oms", "g_m", 0.3, NamedWindow::HalfRight, oms_extra)?;
    let spread = (ol - or).abs() / ol.max(or);
    s.record(
        "7d",
        "OMS left and right statistics-peak deviations differ by more than 5% at g_m = 0.3",
        spread > 0.05,
        format!("d_g2 left {ol:.5}, right {or:.5}, spread {spread:.3}"),
    );
    Ok(())
}

fn classical(s: &mut Suite, g: f64, omega: f64) -> Result<ScanResult> {
    s.scan(&format!(
        "model = \"classical-jc\"\naxis = \"delta\"\naxis_min = -6.0\naxis_max = 6.0\naxis_count = 241\n\
         g = {g:?}\ngamma = 0.001\nomega_drive = {omega:?}\ndeviations = false\n\
         n_cavity = 4\ntruncation = \"ladder\"\ntruncation_tol = 1e-6\n"
    ))
}

fn criterion_8(s: &mut Suite) -> Result<()> {
    let step = 12.0 / 240.0;
    let strong = classical(s, 3.0, 0.6)?;
    let peaks = local_maxima(&strong.axis_values(), &strong.rows.iter().map(|r| r.n_a).collect::<Vec<_>>());
    let mut two: Vec<f64> = peaks.iter().take(2).map(|p| p.0).collect();
    two.sort_by(f64::total_cmp);
    let at_pm3 = two.len() == 2 && (two[0] + 3.0).abs() <= step && (two[1] - 3.0).abs() <= step;

    // The same scan at weak drive shows where the vacuum Rabi peaks sit.
    let weak = classical(s, 3.0, 0.01)?;
    let weak_peaks = local_maxima(&weak.axis_values(), &weak.rows.iter().map(|r| r.n_a).collect::<Vec<_>>());
    let mut weak_two: Vec<f64> = weak_peaks.iter().take(2).map(|p| p.0).collect();
    weak_two.sort_by(f64::total_cmp);
    s.record(
        "8a",
        "classical JC at g = 3 has n_a peaks at +-3 within one grid step",
        at_pm3,
        format!("peaks at {two:?} (step {step}); at Omega = 0.01 the peaks sit at {weak_two:?}"),
    );

    let coupled = classical(s, 0.01, 0.6)?;
    let bare = classical(s, 0.0, 0.6)?;
    let worst = coupled.rows.iter().zip(&bare.rows).map(|(a, b)| rel(a.n_a, b.n_a)).fold(0.0, f64::max);
    s.record(
        "8b",
        "classical JC at g = 0.01 is indistinguishable from g = 0",
        worst < 1e-2,
        format!("max relative n_a difference {worst:.2e} (tol 1e-2)"),
    );
    Ok(())
}

fn criterion_9(s: &mut Suite) -> Result<()> {
    let mut worst = [0.0f64; 3];
    let mut min_eig = f64::INFINITY;
    for d in &s.diagnostics {
        worst[0] = worst[0].max(d.trace_error);
        worst[1] = worst[1].max(d.hermiticity_error);
        worst[2] = worst[2].max(d.residual);
        if let Some(e) = d.min_eigenvalue {
            min_eig = min_eig.min(e);
        }
    }
    let unchecked = s.diagnostics.iter().filter(|d| d.min_eigenvalue.is_none()).count();
    s.record(
        "9a",
        "every accepted steady state is physical",
        worst[0] <= 1e-10 && worst[1] <= 1e-10 && worst[2] <= 1e-10 && min_eig >= -1e-8 && unchecked == 0,
        format!(
            "{} states: trace {:.1e}, hermiticity {:.1e}, residual {:.1e}, min eigenvalue {min_eig:.1e}",
            s.diagnostics.len(),
            worst[0],
            worst[1],
            worst[2]
        ),
    );

    let mut runner = TestRunner::deterministic();
    let knobs = (-3.0..3.0f64, -1.0..1.0f64, 0.0..4.0f64, 0.05..0.95f64, 0.0..1.0f64, -2.0..2.0f64, 0.0..0.5f64)
        .prop_map(|(a, b, c, d, e, f, g)| vec![a, b, c, d, e, f, g]);
    let seeds = proptest::collection::vec(-1.0..1.0f64, 17);
    let mut err = 0.0f64;
    for _ in 0..16 {
        let k = knobs.new_tree(&mut runner).unwrap().current();
        let seed = seeds.new_tree(&mut runner).unwrap().current();
        for kind in ModelKind::ALL {
            let p = common::params_for(kind, &k);
            let l = assemble(kind, &p)?;
            let rho = common::random_density(l.space.total_dim(), &seed);
            let got = l.apply_to(&rho.v)?;
            let want = common::rhs(kind, &p, &rho);
            err = err.max(got.iter().zip(&want.v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
    }
    s.record(
        "9b",
        "superoperator matches the dense master equation at n_cavity = 3",
        err <= 1e-12,
        format!("max deviation {err:.1e} over 16 random draws per model (tol 1e-12)"),
    );
    Ok(())
}

type Criterion = fn(&mut Suite) -> Result<()>;

fn main() -> ExitCode {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let windows_jc = dir.path().join("windows-jc.json");
    let windows_oms = dir.path().join("windows-oms.json");
    let jc = calibrate(&ScanConfig::from_toml_str("model = \"cascaded-jc\"\n").unwrap()).expect("JC calibration");
    let oms = calibrate(&ScanConfig::from_toml_str("model = \"cascaded-oms\"\n").unwrap()).expect("OMS calibration");
    write_table(&jc, &windows_jc);
    write_table(&oms, &windows_oms);
    println!("calibrated windows (JC): {:?}", jc.windows);

    let mut suite = Suite { checks: Vec::new(), diagnostics: Vec::new(), windows_jc, windows_oms, _dir: dir };
    let criteria: [(&str, Criterion); 9] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
    ];
    for (id, run) in criteria {
        let t = Instant::now();
        if let Err(e) = run(&mut suite) {
            suite.record(id, "criterion raised an error", false, e.to_string());
        }
        eprintln!("  criterion {id} took {:.1} s", t.elapsed().as_secs_f64());
    }

    let mut unexpected = 0;
    for c in &suite.checks {
        let known = KNOWN_FAILURES.iter().find(|(id, _)| *id == c.id);
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        let note = match (c.passed, known) {
            (false, Some((_, why))) => format!(" [known: {why}]"),
            (false, None) => {
                unexpected += 1;
                String::new()
            }
            (true, Some(_)) => {
                unexpected += 1;
                " [listed as a known failure but passed]".into()
            }
            (true, None) => String::new(),
        };
        println!("{verdict} {:<3} {}: {}{note}", c.id, c.description, c.detail);
    }
    let passed = suite.checks.iter().filter(|c| c.passed).count();
    let known = suite.checks.iter().filter(|c| !c.passed && KNOWN_FAILURES.iter().any(|k| k.0 == c.id)).count();
    println!(
        "acceptance: {passed}/{} passed, {known} known failures, {unexpected} unexpected, {:.0} s",
        suite.checks.len(),
        started.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
