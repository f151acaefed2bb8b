//! Config-driven experiments with CSV tables, a JSON summary and
//! pass/fail checks.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{Complex, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::advdiff::{build_advdiff_system, AdvDiffConfig, Mesh1D, Stabilization};
use crate::audit::{audited_run, fmt_f64, AuditedRun, LedgerReport, LEDGER_CSV_HEADER};
use crate::config::{
    ConsLawModelKind, ExperimentConfig, ExperimentKind, InitialShape, OdeProblem, TimeSpec,
};
use crate::conslaw::{
    build_conslaw_system, build_nonconservative_system, pressure_primitive_map, Burgers1D,
    ConsLawStabilization, Euler1D, NonconservativeScheme, PeriodicFemSpace,
};
use crate::error::{Error, Result};
use crate::integrator::{consistent_initial_rate, StatePair};
use crate::linear_analysis::{
    amplification_matrix_complex, observed_order, spectral_radius_complex,
};
use crate::models::{Logistic, Oscillator, ScalarLinear};
use crate::newton::NewtonSettings;
use crate::params::{params_from_rho_inf, GenAlphaParams};
use crate::second_order::{
    consistent_initial_acceleration, second_order_identity_residual, second_order_identity_scale,
    step_second_order, SecondOrderState,
};

/// One asserted quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: None,
            upper: Some(upper),
            passed: value <= upper,
        }
    }

    pub fn within(name: &str, value: f64, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: Some(lower),
            upper: Some(upper),
            passed: value >= lower && value <= upper,
        }
    }

    pub fn describe(&self) -> String {
        let bound = match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => format!("in [{lo:e}, {hi:e}]"),
            (None, Some(hi)) => format!("<= {hi:e}"),
            (Some(lo), None) => format!(">= {lo:e}"),
            (None, None) => String::new(),
        };
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} {}: {:e} {bound}", self.name, self.value)
    }
}

/// A CSV table held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub kind: ExperimentKind,
    pub checks: Vec<Check>,
    pub summary: Value,
    pub tables: Vec<Table>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    /// Summary JSON including the checks and the overall verdict.
    pub fn summary_json(&self) -> Value {
        json!({
            "experiment": self.kind.name(),
            "passed": self.passed(),
            "checks": self.checks,
            "results": self.summary,
        })
    }

    /// Writes `summary.json` and, when `csv` is set, every table into `dir`.
    pub fn write(&self, dir: &Path, csv: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        if csv {
            for t in &self.tables {
                let path = dir.join(&t.file_name);
                fs::write(&path, t.to_csv())?;
                written.push(path);
            }
        }
        let path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&self.summary_json())
            .map_err(|e| Error::Io(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        written.push(path);
        Ok(written)
    }
}

/// Process exit code for a finished or failed experiment.
pub fn exit_code(result: &Result<ExperimentOutcome>) -> i32 {
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(_) => 1,
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let params = config.integrator.build_params()?;
    match config.kind {
        ExperimentKind::OdeConvergence => ode_convergence(config, &params),
        ExperimentKind::AmplificationSweep => amplification_sweep(config, &params),
        ExperimentKind::SecondOrderIdentity => second_order_identity(config, &params),
        ExperimentKind::AdvdiffBalance => advdiff_balance(config, &params),
        ExperimentKind::ConslawBalance => conslaw_balance(config, &params),
        ExperimentKind::NonconservativeCompare => nonconservative_compare(config, &params),
    }
}

fn newton_or(config: &ExperimentConfig, fallback: NewtonSettings) -> NewtonSettings {
    config.integrator.newton.unwrap_or(fallback)
}

fn step_sizes(config: &ExperimentConfig) -> Result<Vec<f64>> {
    config
        .integrator
        .time
        .as_ref()
        .and_then(TimeSpec::step_sizes)
        .ok_or_else(|| {
            Error::Configuration(format!(
                "{} needs a single-run time specification",
                config.kind.name()
            ))
        })
}

fn ode_convergence(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
) -> Result<ExperimentOutcome> {
    let (dt_list, t_final) = match &config.integrator.time {
        Some(TimeSpec::Refinement { dt_list, t_final }) => (dt_list.clone(), *t_final),
        _ => {
            return Err(Error::Configuration(
                "ode-convergence needs dt_list and t_final".into(),
            ))
        }
    };
    let newton = newton_or(config, NewtonSettings::default());
    let report = match config.problem {
        OdeProblem::Linear => {
            let sys = ScalarLinear::new(config.lambda);
            let u0 = DVector::from_element(1, 1.0);
            observed_order(
                &sys,
                |t| DVector::from_element(1, sys.exact(1.0, t)),
                &u0,
                t_final,
                &dt_list,
                params,
                &newton,
            )?
        }
        OdeProblem::Logistic => {
            let sys = Logistic {
                rate: config.lambda.abs(),
            };
            let u0 = DVector::from_element(1, 0.1);
            observed_order(
                &sys,
                |t| DVector::from_element(1, sys.exact(0.1, t)),
                &u0,
                t_final,
                &dt_list,
                params,
                &newton,
            )?
        }
    };
    let mut rows = Vec::new();
    for (i, (dt, err)) in report.dt_values.iter().zip(&report.errors).enumerate() {
        let local = if i == 0 {
            String::new()
        } else {
            let prev = report.errors[i - 1];
            fmt_f64((prev / err).ln() / (report.dt_values[i - 1] / dt).ln())
        };
        rows.push(format!("{},{},{}", fmt_f64(*dt), fmt_f64(*err), local));
    }
    let band = config
        .tolerance
        .unwrap_or(if config.expect_order >= 2.0 { 0.1 } else { 0.2 });
    let order = report.observed_order.unwrap_or(f64::NAN);
    Ok(ExperimentOutcome {
        kind: config.kind,
        checks: vec![Check::within(
            "observed_order",
            order,
            config.expect_order - band,
            config.expect_order + band,
        )],
        summary: json!({
            "params": params,
            "observed_order": report.observed_order,
            "degenerate": report.degenerate,
            "dt_values": report.dt_values,
            "errors": report.errors,
        }),
        tables: vec![Table {
            file_name: "convergence.csv".into(),
            header: "dt,error,observed_order".into(),
            rows,
        }],
    })
}

fn amplification_sweep(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
) -> Result<ExperimentOutcome> {
    let sweep = &config.sweep;
    let cases: Vec<(Option<f64>, GenAlphaParams)> = match &sweep.rho_list {
        Some(list) => list
            .iter()
            .map(|&r| params_from_rho_inf(r).map(|p| (Some(r), p)))
            .collect::<Result<_>>()?,
        None => vec![(params.rho_inf, *params)],
    };
    let step = (sweep.log10_z_max - sweep.log10_z_min) / (sweep.z_points - 1) as f64;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut limits = Vec::new();
    for (rho, p) in &cases {
        let mut last = f64::NAN;
        for k in 0..sweep.z_points {
            let z = -(10f64).powf(sweep.log10_z_min + k as f64 * step);
            let radius =
                spectral_radius_complex(&amplification_matrix_complex(Complex::new(z, 0.0), p)?);
            worst = worst.max(radius);
            last = radius;
            let rho_text = rho.map(fmt_f64).unwrap_or_default();
            rows.push(format!("{},{},{}", fmt_f64(z), rho_text, fmt_f64(radius)));
        }
        limits.push(json!({ "rho_inf": rho, "params": p, "radius_at_largest_z": last }));
    }
    let tol = config.tolerance.unwrap_or(1e-12);
    Ok(ExperimentOutcome {
        kind: config.kind,
        checks: vec![Check::at_most("max_spectral_radius", worst, 1.0 + tol)],
        summary: json!({ "max_spectral_radius": worst, "cases": limits }),
        tables: vec![Table {
            file_name: "amplification.csv".into(),
            header: "z,rho,spectral_radius".into(),
            rows,
        }],
    })
}

fn second_order_identity(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
) -> Result<ExperimentOutcome> {
    let dts = step_sizes(config)?;
    let newton = newton_or(config, NewtonSettings::default());
    let sys = Oscillator::new(config.omega);
    let u0 = DVector::from_element(1, 1.0);
    let v0 = DVector::from_element(1, 0.0);
    let a0 = consistent_initial_acceleration(&sys, &u0, &v0, 0.0, &newton)?;
    let mut state = SecondOrderState::new(u0, v0, a0, 0.0)?;
    let mut rows = Vec::with_capacity(dts.len());
    let mut worst: f64 = 0.0;
    for (n, &dt) in dts.iter().enumerate() {
        let next = step_second_order(&sys, &state, dt, params, &newton)?;
        let scaled = second_order_identity_residual(&state, &next, dt, params)?
            / second_order_identity_scale(&state, &next, params);
        worst = worst.max(scaled);
        rows.push(format!(
            "{},{},{},{}",
            n,
            fmt_f64(next.t),
            fmt_f64(next.u[0]),
            fmt_f64(scaled)
        ));
        state = next;
    }
    let error = (state.u[0] - sys.exact(1.0, 0.0, state.t)).abs();
    Ok(ExperimentOutcome {
        kind: config.kind,
        checks: vec![Check::at_most(
            "max_scaled_identity_residual",
            worst,
            config.tolerance.unwrap_or(1e-13),
        )],
        summary: json!({
            "params": params,
            "steps": dts.len(),
            "t_final": state.t,
            "final_error": error,
            "max_scaled_identity_residual": worst,
        }),
        tables: vec![Table {
            file_name: "identity.csv".into(),
            header: "step,t,u,identity_residual_scaled".into(),
            rows,
        }],
    })
}

fn ledger_table(report: &LedgerReport) -> Table {
    let mut buf = Vec::new();
    report.write_csv(&mut buf).expect("in-memory write");
    let text = String::from_utf8(buf).expect("ascii");
    let mut lines = text.lines();
    let header = lines.next().unwrap_or(LEDGER_CSV_HEADER).to_string();
    Table {
        file_name: "ledger.csv".into(),
        header,
        rows: lines.map(str::to_string).collect(),
    }
}

fn ledger_summary(run: &AuditedRun, report: &LedgerReport) -> Value {
    json!({
        "certified": report.certified,
        "uniform_dt": report.uniform_dt,
        "second_order": report.second_order,
        "steps": report.steps,
        "initial_shifted_total": report.initial_shifted_total,
        "final_shifted_total": report.final_shifted_total,
        "final_drift": report.final_drift,
        "max_drift": report.max_drift,
        "max_shift_mismatch": report.max_shift_mismatch,
        "max_newton_iterations": run.max_newton_iterations,
    })
}

/// Drift is asserted only for certified ledgers; uncertified runs are
/// reported as demonstrations.
fn balance_checks(config: &ExperimentConfig, report: &LedgerReport) -> Vec<Check> {
    if report.certified {
        vec![Check::at_most(
            "max_drift",
            report.max_abs_drift(),
            config.tolerance.unwrap_or(1e-12),
        )]
    } else {
        Vec::new()
    }
}

fn bump(x: f64) -> f64 {
    (-((x - 0.5) / 0.1).powi(2)).exp()
}

fn advdiff_balance(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
) -> Result<ExperimentOutcome> {
    let dts = step_sizes(config)?;
    let s = &config.spatial;
    let newton = newton_or(config, NewtonSettings::tight());
    let (forcing, h_left, h_right) = (s.forcing, s.h_left, s.h_right);
    let initial: fn(f64) -> f64 = match s.initial {
        InitialShape::Bump => bump,
        InitialShape::Sine => |x| (PI * x).sin(),
        InitialShape::Zero => |_| 0.0,
    };
    let stabilization = if s.stabilization {
        Stabilization::Supg { dt: dts[0] }
    } else {
        Stabilization::None
    };
    let cfg = AdvDiffConfig::homogeneous(s.a, s.kappa)
        .with_forcing(move |_, _| forcing)
        .with_boundary_flux(move |_| h_left, move |_| h_right)
        .with_initial(initial)
        .with_stabilization(stabilization);
    let sys = build_advdiff_system(&Mesh1D::uniform(s.n_elements)?, &cfg)?;
    let u0 = sys.initial_condition()?;
    let rate = consistent_initial_rate(&sys, &u0, 0.0, &newton)?;
    let run = audited_run(&sys, StatePair::new(u0, rate, 0.0)?, &dts, params, &newton)?;
    let report = run.ledger.report()?;
    let mut summary = ledger_summary(&run, &report);
    summary["tau"] = json!(sys.tau());
    summary["load_total"] = json!(dts
        .iter()
        .map(|dt| dt * sys.load_integral(0.0))
        .sum::<f64>());
    Ok(ExperimentOutcome {
        kind: config.kind,
        checks: balance_checks(config, &report),
        summary,
        tables: vec![ledger_table(&report)],
    })
}

/// Euler initial data: density `1 + amplitude sin`, uniform velocity and
/// pressure `1 + pressure_amplitude sin`.
pub fn euler_initial(config: &ExperimentConfig, model: &Euler1D, x: f64) -> DVector<f64> {
    let s = &config.spatial;
    let wave = (2.0 * PI * x).sin();
    model.conserved(
        1.0 + s.amplitude * wave,
        s.velocity,
        1.0 + s.pressure_amplitude * wave,
    )
}

fn conslaw_balance(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
) -> Result<ExperimentOutcome> {
    let dts = step_sizes(config)?;
    let s = &config.spatial;
    let newton = newton_or(config, NewtonSettings::tight());
    let space = PeriodicFemSpace::new(s.n_elements)?;
    let run = match s.model {
        ConsLawModelKind::Burgers => {
            let stab = if s.stabilization {
                ConsLawStabilization::Streamline { speed: s.amplitude }
            } else {
                ConsLawStabilization::None
            };
            let sys = build_conslaw_system(space, Burgers1D::new(s.viscosity)?, stab)?;
            let amp = s.amplitude;
            let u0 =
                space.interpolate(1, |x| DVector::from_element(1, amp * (2.0 * PI * x).sin()))?;
            let rate = consistent_initial_rate(&sys, &u0, 0.0, &newton)?;
            audited_run(&sys, StatePair::new(u0, rate, 0.0)?, &dts, params, &newton)?
        }
        ConsLawModelKind::Euler => {
            let model = Euler1D::new(s.gamma_gas)?;
            let stab = if s.stabilization {
                ConsLawStabilization::Streamline {
                    speed: s.velocity.abs() + s.gamma_gas.sqrt(),
                }
            } else {
                ConsLawStabilization::None
            };
            let sys = build_conslaw_system(space, model, stab)?;
            let u0 = space.interpolate(3, |x| euler_initial(config, &model, x))?;
            let rate = consistent_initial_rate(&sys, &u0, 0.0, &newton)?;
            audited_run(&sys, StatePair::new(u0, rate, 0.0)?, &dts, params, &newton)?
        }
    };
    let report = run.ledger.report()?;
    Ok(ExperimentOutcome {
        kind: config.kind,
        checks: balance_checks(config, &report),
        summary: ledger_summary(&run, &report),
        tables: vec![ledger_table(&report)],
    })
}

/// Runs the Euler problem in pressure-primitive variables with one scheme.
pub fn nonconservative_run(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
    scheme: NonconservativeScheme,
) -> Result<AuditedRun> {
    let dts = step_sizes(config)?;
    let s = &config.spatial;
    let newton = newton_or(config, NewtonSettings::tight());
    let space = PeriodicFemSpace::new(s.n_elements)?;
    let model = Euler1D::new(s.gamma_gas)?;
    let map = pressure_primitive_map(s.gamma_gas, s.r_gas)?;
    let runner = build_nonconservative_system(space, model, map, scheme)?;
    let v0 = space.interpolate(3, |x| {
        map.from_conserved(&euler_initial(config, &model, x))
            .expect("initial data is admissible")
    })?;
    // Both schemes start from the rate of the standard residual.
    let rate = consistent_initial_rate(runner.system(), &v0, 0.0, &newton)?;
    audited_run(
        &runner,
        StatePair::new(v0, rate, 0.0)?,
        &dts,
        params,
        &newton,
    )
}

fn nonconservative_compare(
    config: &ExperimentConfig,
    params: &GenAlphaParams,
) -> Result<ExperimentOutcome> {
    let s = &config.spatial;
    if !(s.amplitude.abs() < 1.0 && s.pressure_amplitude.abs() < 1.0) {
        return Err(Error::Configuration(
            "Euler amplitudes must be below 1 to keep density and pressure positive".into(),
        ));
    }
    let standard = nonconservative_run(config, params, NonconservativeScheme::Standard)?;
    let modified = nonconservative_run(config, params, NonconservativeScheme::Modified)?;
    let rs = standard.ledger.report()?;
    let rm = modified.ledger.report()?;
    let rows = rs
        .rows
        .iter()
        .zip(&rm.rows)
        .map(|(a, b)| {
            format!(
                "{},{},{},{},{}",
                a.step,
                fmt_f64(a.t_alpha_f),
                a.component,
                fmt_f64(a.drift),
                fmt_f64(b.drift)
            )
        })
        .collect();
    Ok(ExperimentOutcome {
        kind: config.kind,
        checks: vec![Check::at_most(
            "modified_max_drift",
            rm.max_abs_drift(),
            config.tolerance.unwrap_or(1e-12),
        )],
        summary: json!({
            "standard": ledger_summary(&standard, &rs),
            "modified": ledger_summary(&modified, &rm),
        }),
        tables: vec![Table {
            file_name: "compare.csv".into(),
            header: "step,t_alpha_f,component,drift_standard,drift_modified".into(),
            rows,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn convergence_passes_and_fails() {
        let good = "[experiment]\nkind = ode-convergence\n[integrator]\nrho_inf = 0.5\ndt_list = 0.1,0.05,0.025,0.0125,0.00625\nt_final = 1\n";
        let out = run_experiment(&parse_config(good).unwrap()).unwrap();
        assert_eq!(out.exit_code(), 0, "{:?}", out.checks);
        let bad = "[experiment]\nkind = ode-convergence\n[integrator]\nalpha_m = 0.8333333333333334\nalpha_f = 0.6666666666666666\ngamma = 0.9166666666666667\ndt_list = 0.1,0.05,0.025,0.0125,0.00625\nt_final = 1\n";
        let out = run_experiment(&parse_config(bad).unwrap()).unwrap();
        assert_eq!(out.exit_code(), 2);
        assert_eq!(exit_code(&Ok(out)), 2);
    }

    #[test]
    fn runtime_error_maps_to_one() {
        let text = "[experiment]\nkind = ode-convergence\n[integrator]\nrho_inf = 0.5\ndt_list = 0.3,0.2,0.1\nt_final = 1\n";
        let result = run_experiment(&parse_config(text).unwrap());
        assert_eq!(exit_code(&result), 1);
    }

    #[test]
    fn sweep_is_stable() {
        let text = "[experiment]\nkind = amplification-sweep\nrho_list = 0, 0.5, 1\nz_points = 11\n[integrator]\nrho_inf = 0.5\n";
        let out = run_experiment(&parse_config(text).unwrap()).unwrap();
        assert!(out.passed(), "{:?} {}", out.checks, out.summary);
        assert_eq!(out.tables[0].rows.len(), 33);
    }

    #[test]
    fn check_formatting() {
        let c = Check::within("order", 2.0, 1.9, 2.1);
        assert!(c.passed);
        assert!(c.describe().starts_with("PASS order"));
        assert!(!Check::at_most("drift", 1.0, 0.5).passed);
    }
}
