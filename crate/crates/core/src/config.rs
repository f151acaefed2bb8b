//! Experiment configuration in a small INI dialect.
//!
//! ```text
//! # comment
//! [experiment]
//! kind = ode-convergence
//!
//! [integrator]
//! rho_inf = 0.5
//! dt_list = 0.1, 0.05, 0.025, 0.0125, 0.00625
//! t_final = 1
//! ```
//!
//! Sections are `[experiment]`, `[integrator]`, `[spatial]` and `[output]`.
//! Values may be wrapped in double quotes. Everything after `#` is ignored.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::newton::NewtonSettings;
use crate::params::{make_params, params_from_rho_inf, GenAlphaParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OdeConvergence,
    AmplificationSweep,
    AdvdiffBalance,
    ConslawBalance,
    NonconservativeCompare,
    SecondOrderIdentity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::OdeConvergence => "ode-convergence",
            Self::AmplificationSweep => "amplification-sweep",
            Self::AdvdiffBalance => "advdiff-balance",
            Self::ConslawBalance => "conslaw-balance",
            Self::NonconservativeCompare => "nonconservative-compare",
            Self::SecondOrderIdentity => "second-order-identity",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ode-convergence" => Self::OdeConvergence,
            "amplification-sweep" => Self::AmplificationSweep,
            "advdiff-balance" => Self::AdvdiffBalance,
            "conslaw-balance" => Self::ConslawBalance,
            "nonconservative-compare" => Self::NonconservativeCompare,
            "second-order-identity" => Self::SecondOrderIdentity,
            other => return Err(format!("unknown experiment kind '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeProblem {
    /// `u' = lambda u`.
    Linear,
    Logistic,
}

impl FromStr for OdeProblem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "linear" => Ok(Self::Linear),
            "logistic" => Ok(Self::Logistic),
            other => Err(format!(
                "unknown problem '{other}' (expected linear or logistic)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsLawModelKind {
    Burgers,
    Euler,
}

impl FromStr for ConsLawModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "burgers" => Ok(Self::Burgers),
            "euler" => Ok(Self::Euler),
            other => Err(format!(
                "unknown model '{other}' (expected burgers or euler)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialShape {
    /// `exp(-((x - 1/2) / width)^2)` with width 0.1.
    Bump,
    Sine,
    Zero,
}

impl FromStr for InitialShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bump" => Ok(Self::Bump),
            "sine" => Ok(Self::Sine),
            "zero" => Ok(Self::Zero),
            other => Err(format!(
                "unknown initial shape '{other}' (expected bump, sine or zero)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ParamSpec {
    RhoInf(f64),
    Explicit {
        alpha_m: f64,
        alpha_f: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TimeSpec {
    /// `n_steps` steps of size `dt`.
    Uniform { dt: f64, n_steps: usize },
    /// One run per entry, each reaching `t_final`.
    Refinement { dt_list: Vec<f64>, t_final: f64 },
    /// Explicit per-step sizes.
    Schedule { steps: Vec<f64> },
}

impl TimeSpec {
    /// Step sizes of a single run; `None` for refinement studies.
    pub fn step_sizes(&self) -> Option<Vec<f64>> {
        match self {
            Self::Uniform { dt, n_steps } => Some(vec![*dt; *n_steps]),
            Self::Schedule { steps } => Some(steps.clone()),
            Self::Refinement { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub params: ParamSpec,
    pub beta: Option<f64>,
    /// Absent only for experiments that do not integrate in time.
    pub time: Option<TimeSpec>,
    /// `None` leaves the choice to the experiment.
    pub newton: Option<NewtonSettings>,
}

impl IntegratorConfig {
    pub fn build_params(&self) -> Result<GenAlphaParams> {
        let p = match self.params {
            ParamSpec::RhoInf(r) => params_from_rho_inf(r)?,
            ParamSpec::Explicit {
                alpha_m,
                alpha_f,
                gamma,
            } => make_params(alpha_m, alpha_f, gamma)?,
        };
        match self.beta {
            Some(b) => p.with_beta(b),
            None => Ok(p.with_default_beta()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    /// Falls back to the integrator parameters when absent.
    pub rho_list: Option<Vec<f64>>,
    pub log10_z_min: f64,
    pub log10_z_max: f64,
    pub z_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialConfig {
    pub n_elements: usize,
    pub model: ConsLawModelKind,
    pub a: f64,
    pub kappa: f64,
    pub viscosity: f64,
    pub gamma_gas: f64,
    pub r_gas: f64,
    pub amplitude: f64,
    /// Mean flow speed of the Euler initial data.
    pub velocity: f64,
    /// Amplitude of the pressure perturbation in the Euler initial data.
    pub pressure_amplitude: f64,
    /// Constant body force for advection-diffusion.
    pub forcing: f64,
    pub h_left: f64,
    pub h_right: f64,
    pub initial: InitialShape,
    pub stabilization: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub problem: OdeProblem,
    pub lambda: f64,
    pub omega: f64,
    pub expect_order: f64,
    /// Overrides the experiment's default acceptance tolerance.
    pub tolerance: Option<f64>,
    pub sweep: SweepConfig,
    pub integrator: IntegratorConfig,
    pub spatial: SpatialConfig,
    pub output: OutputConfig,
}

struct Entry {
    value: String,
    line: usize,
}

/// Key-value pairs of one section, consumed as they are read so that
/// leftovers can be reported as unknown.
struct Section {
    name: &'static str,
    header_line: usize,
    entries: BTreeMap<String, Entry>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl Section {
    fn take_raw(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<(T, usize)>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((v, e.line)))
                .map_err(|_| {
                    parse_err(
                        e.line,
                        format!("[{}] {key}: expected {what}, got '{}'", self.name, e.value),
                    )
                }),
        }
    }

    fn f64(&mut self, key: &str) -> Result<Option<(f64, usize)>> {
        let v = self.take::<f64>(key, "a number")?;
        if let Some((x, line)) = v {
            if !x.is_finite() {
                return Err(parse_err(
                    line,
                    format!("[{}] {key}: value must be finite", self.name),
                ));
            }
        }
        Ok(v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.map_or(default, |(v, _)| v))
    }

    fn usize(&mut self, key: &str) -> Result<Option<(usize, usize)>> {
        self.take::<usize>(key, "a nonnegative integer")
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take_raw(key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" | "on" | "yes" => Ok(true),
                "false" | "off" | "no" => Ok(false),
                _ => Err(parse_err(
                    e.line,
                    format!(
                        "[{}] {key}: expected true or false, got '{}'",
                        self.name, e.value
                    ),
                )),
            },
        }
    }

    fn enum_of<T: FromStr<Err = String>>(&mut self, key: &str) -> Result<Option<(T, usize)>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((v, e.line)))
                .map_err(|m| parse_err(e.line, format!("[{}] {key}: {m}", self.name))),
        }
    }

    fn list(&mut self, key: &str) -> Result<Option<(Vec<String>, usize)>> {
        Ok(self.take_raw(key).map(|e| {
            let items = e
                .value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            (items, e.line)
        }))
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        match self.list(key)? {
            None => Ok(None),
            Some((items, line)) => {
                let values = items
                    .iter()
                    .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| {
                        parse_err(
                            line,
                            format!(
                                "[{}] {key}: expected a comma-separated list of numbers",
                                self.name
                            ),
                        )
                    })?;
                Ok(Some((values, line)))
            }
        }
    }

    fn missing(&self, key: &str) -> Error {
        parse_err(
            self.header_line,
            format!("[{}] missing required key '{key}'", self.name),
        )
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, e)) => Err(parse_err(
                e.line,
                format!("[{}] unknown key '{key}'", self.name),
            )),
        }
    }
}

const SECTIONS: [&str; 4] = ["experiment", "integrator", "spatial", "output"];

fn split_sections(text: &str) -> Result<BTreeMap<&'static str, Section>> {
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, "unterminated section header"))?
                .trim();
            let known = SECTIONS
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| parse_err(line, format!("unknown section [{name}]")))?;
            if sections.contains_key(known) {
                return Err(parse_err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                known,
                Section {
                    name: known,
                    header_line: line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(known);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key = value, got '{content}'")))?;
        let key = key.trim();
        let mut value = value.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        }
        if key.is_empty() {
            return Err(parse_err(line, "empty key"));
        }
        let section = current
            .and_then(|name| sections.get_mut(name))
            .ok_or_else(|| {
                parse_err(
                    line,
                    format!("key '{key}' appears before any section header"),
                )
            })?;
        if section.entries.contains_key(key) {
            return Err(parse_err(
                line,
                format!("[{}] duplicate key '{key}'", section.name),
            ));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(sections)
}

fn section(sections: &mut BTreeMap<&'static str, Section>, name: &'static str) -> Section {
    sections.remove(name).unwrap_or(Section {
        name,
        header_line: 0,
        entries: BTreeMap::new(),
    })
}

fn parse_params(s: &mut Section) -> Result<ParamSpec> {
    let rho = s.f64("rho_inf")?;
    let am = s.f64("alpha_m")?;
    let af = s.f64("alpha_f")?;
    let g = s.f64("gamma")?;
    let explicit = [am, af, g];
    if let Some((rho, line)) = rho {
        if let Some((_, l)) = explicit.iter().flatten().next() {
            return Err(parse_err(
                *l.max(&line),
                "rho_inf and alpha_m/alpha_f/gamma are mutually exclusive",
            ));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(parse_err(
                line,
                format!("rho_inf must lie in [0, 1], got {rho}"),
            ));
        }
        return Ok(ParamSpec::RhoInf(rho));
    }
    match explicit {
        [Some((alpha_m, _)), Some((alpha_f, _)), Some((gamma, _))] => Ok(ParamSpec::Explicit {
            alpha_m,
            alpha_f,
            gamma,
        }),
        [None, None, None] => Err(s.missing("rho_inf")),
        _ => {
            let absent = ["alpha_m", "alpha_f", "gamma"]
                .iter()
                .zip(&explicit)
                .find(|(_, v)| v.is_none())
                .map(|(k, _)| *k)
                .unwrap_or("gamma");
            Err(s.missing(absent))
        }
    }
}

fn parse_schedule(items: &[String], line: usize, n_steps: Option<usize>) -> Result<Vec<f64>> {
    let (body, repeat) = match items.last().map(String::as_str) {
        Some("repeat") => (&items[..items.len() - 1], true),
        _ => (items, false),
    };
    let pattern = body
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite()))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| {
            parse_err(
                line,
                "dt_schedule: expected positive numbers, optionally ending in 'repeat'",
            )
        })?;
    if pattern.is_empty() {
        return Err(parse_err(line, "dt_schedule is empty"));
    }
    match (repeat, n_steps) {
        (true, Some(n)) => Ok(pattern.iter().copied().cycle().take(n).collect()),
        (true, None) => Err(parse_err(line, "dt_schedule with 'repeat' needs n_steps")),
        (false, Some(n)) if n != pattern.len() => Err(parse_err(
            line,
            format!(
                "dt_schedule lists {} steps but n_steps = {n}",
                pattern.len()
            ),
        )),
        (false, _) => Ok(pattern),
    }
}

fn parse_time(s: &mut Section) -> Result<Option<TimeSpec>> {
    let dt = s.f64("dt")?;
    let dt_list = s.f64_list("dt_list")?;
    let schedule = s.list("dt_schedule")?;
    let n_steps = s.usize("n_steps")?;
    let t_final = s.f64("t_final")?;
    let given: Vec<usize> = [
        dt.map(|v| v.1),
        dt_list.as_ref().map(|v| v.1),
        schedule.as_ref().map(|v| v.1),
    ]
    .into_iter()
    .flatten()
    .collect();
    if given.len() > 1 {
        return Err(parse_err(
            given[1],
            "dt, dt_list and dt_schedule are mutually exclusive",
        ));
    }
    if let Some((n, line)) = n_steps {
        if n == 0 {
            return Err(parse_err(line, "n_steps must be at least 1"));
        }
    }
    if let Some((items, line)) = schedule {
        return Ok(Some(TimeSpec::Schedule {
            steps: parse_schedule(&items, line, n_steps.map(|v| v.0))?,
        }));
    }
    if let Some((dt_list, line)) = dt_list {
        if dt_list.iter().any(|d| *d <= 0.0) {
            return Err(parse_err(line, "dt_list entries must be positive"));
        }
        let (t_final, _) = t_final.ok_or_else(|| s.missing("t_final"))?;
        return Ok(Some(TimeSpec::Refinement { dt_list, t_final }));
    }
    let (dt, line) = match dt {
        Some(v) => v,
        None if n_steps.is_none() && t_final.is_none() => return Ok(None),
        None => return Err(s.missing("dt")),
    };
    if dt <= 0.0 {
        return Err(parse_err(line, format!("dt must be positive, got {dt}")));
    }
    let n_steps = match (n_steps, t_final) {
        (Some(_), Some((_, l))) => {
            return Err(parse_err(
                l,
                "n_steps and t_final are mutually exclusive with dt",
            ));
        }
        (Some((n, _)), None) => n,
        (None, Some((t, l))) => {
            let n = (t / dt).round();
            if n < 1.0 || (n * dt - t).abs() > 1e-9 * t.abs() {
                return Err(parse_err(
                    l,
                    format!("t_final {t} is not a multiple of dt {dt}"),
                ));
            }
            n as usize
        }
        (None, None) => return Err(s.missing("n_steps")),
    };
    Ok(Some(TimeSpec::Uniform { dt, n_steps }))
}

fn parse_newton(s: &mut Section) -> Result<Option<NewtonSettings>> {
    let abs = s.f64("newton_abs_tol")?;
    let rel = s.f64("newton_rel_tol")?;
    let iters = s.usize("newton_max_iters")?;
    if abs.is_none() && rel.is_none() && iters.is_none() {
        return Ok(None);
    }
    let d = NewtonSettings::default();
    let settings = NewtonSettings {
        abs_tol: abs.map_or(d.abs_tol, |v| v.0),
        rel_tol: rel.map_or(d.rel_tol, |v| v.0),
        max_iters: iters.map_or(d.max_iters, |v| v.0),
    };
    let line = [abs.map(|v| v.1), rel.map(|v| v.1), iters.map(|v| v.1)]
        .into_iter()
        .flatten()
        .max()
        .unwrap_or(0);
    settings
        .validate()
        .map_err(|e| parse_err(line, e.to_string()))?;
    Ok(Some(settings))
}

/// Parses and validates a configuration.
/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut sections = split_sections(text)?;
    let mut exp = section(&mut sections, "experiment");
    let mut int = section(&mut sections, "integrator");
    let mut spa = section(&mut sections, "spatial");
    let mut out = section(&mut sections, "output");

    let (kind, _) = exp
        .enum_of::<ExperimentKind>("kind")?
        .ok_or_else(|| exp.missing("kind"))?;
    let problem = exp
        .enum_of::<OdeProblem>("problem")?
        .map_or(OdeProblem::Linear, |v| v.0);
    let lambda = exp.f64_or("lambda", -1.0)?;
    let omega = exp.f64_or("omega", 1.0)?;
    let expect_order = exp.f64_or("expect_order", 2.0)?;
    let tolerance = match exp.f64("tolerance")? {
        Some((t, line)) if t <= 0.0 => return Err(parse_err(line, "tolerance must be positive")),
        other => other.map(|v| v.0),
    };
    let sweep = SweepConfig {
        rho_list: exp.f64_list("rho_list")?.map(|v| v.0),
        log10_z_min: exp.f64_or("log10_z_min", -2.0)?,
        log10_z_max: exp.f64_or("log10_z_max", 8.0)?,
        z_points: exp.usize("z_points")?.map_or(41, |v| v.0),
    };
    exp.finish()?;

    let params = parse_params(&mut int)?;
    let beta = int.f64("beta")?.map(|v| v.0);
    let time = parse_time(&mut int)?;
    let newton = parse_newton(&mut int)?;
    int.finish()?;

    let spatial = SpatialConfig {
        n_elements: spa.usize("n_elements")?.map_or(32, |v| v.0),
        model: spa
            .enum_of::<ConsLawModelKind>("model")?
            .map_or(ConsLawModelKind::Burgers, |v| v.0),
        a: spa.f64_or("a", 1.0)?,
        kappa: spa.f64_or("kappa", 0.01)?,
        viscosity: spa.f64_or("viscosity", 0.0)?,
        gamma_gas: spa.f64_or("gamma_gas", 1.4)?,
        r_gas: spa.f64_or("r_gas", 1.0)?,
        amplitude: spa.f64_or("amplitude", 0.1)?,
        velocity: spa.f64_or("velocity", 0.1)?,
        pressure_amplitude: spa.f64_or("pressure_amplitude", 0.1)?,
        forcing: spa.f64_or("forcing", 0.0)?,
        h_left: spa.f64_or("h_left", 0.0)?,
        h_right: spa.f64_or("h_right", 0.0)?,
        initial: spa
            .enum_of::<InitialShape>("initial")?
            .map_or(InitialShape::Bump, |v| v.0),
        stabilization: spa.bool_or("stabilization", false)?,
    };
    spa.finish()?;

    let output = OutputConfig {
        directory: out.take_raw("directory").map(|e| PathBuf::from(e.value)),
        csv: out.bool_or("csv", true)?,
    };
    out.finish()?;

    let config = ExperimentConfig {
        kind,
        problem,
        lambda,
        omega,
        expect_order,
        tolerance,
        sweep,
        integrator: IntegratorConfig {
            params,
            beta,
            time,
            newton,
        },
        spatial,
        output,
    };
    check_requirements(&config)?;
    Ok(config)
}

/// Experiment-specific consistency checks that need the whole config.
fn check_requirements(c: &ExperimentConfig) -> Result<()> {
    let conf = |m: String| Err(Error::Configuration(m));
    let time = c.integrator.time.as_ref();
    match c.kind {
        ExperimentKind::OdeConvergence => {
            if let Some(TimeSpec::Refinement { dt_list, .. }) = time {
                if dt_list.len() < 3 {
                    return conf("ode-convergence needs at least three dt_list entries".into());
                }
            } else {
                return conf("ode-convergence needs dt_list and t_final".into());
            }
        }
        ExperimentKind::AmplificationSweep => {
            if c.sweep.z_points < 2 || c.sweep.log10_z_min >= c.sweep.log10_z_max {
                return conf(
                    "amplification-sweep needs z_points >= 2 and log10_z_min < log10_z_max".into(),
                );
            }
            if let Some(list) = &c.sweep.rho_list {
                if list.is_empty() || list.iter().any(|r| !(0.0..=1.0).contains(r)) {
                    return conf("rho_list entries must lie in [0, 1]".into());
                }
            }
        }
        _ => match time {
            None => {
                return conf(format!(
                    "{} needs dt (with n_steps or t_final) or dt_schedule",
                    c.kind.name()
                ))
            }
            Some(TimeSpec::Refinement { .. }) => {
                return conf(format!(
                    "{} runs a single trajectory; use dt or dt_schedule",
                    c.kind.name()
                ));
            }
            Some(_) => {}
        },
    }
    if matches!(
        c.kind,
        ExperimentKind::AdvdiffBalance
            | ExperimentKind::ConslawBalance
            | ExperimentKind::NonconservativeCompare
    ) && c.spatial.n_elements < 2
    {
        return conf("n_elements must be at least 2".into());
    }
    c.integrator.build_params().map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sweep_gets_defaults() {
        let c =
            parse_config("[experiment]\nkind = amplification-sweep\n[integrator]\nrho_inf = 0.5\n")
                .unwrap();
        assert_eq!(c.kind, ExperimentKind::AmplificationSweep);
        assert_eq!(c.sweep.rho_list, None);
        assert_eq!(c.sweep.z_points, 41);
        assert_eq!(c.integrator.time, None);
        assert_eq!(c.spatial.n_elements, 32);
        assert!(c.output.csv);
    }

    #[test]
    fn rho_and_gamma_conflict() {
        let err = parse_config("[experiment]\nkind = amplification-sweep\n[integrator]\nrho_inf = 0.5\ngamma = 0.5\ndt = 1\nn_steps = 1\n")
            .unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("mutually exclusive"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeating_schedule() {
        let c = parse_config(
            "[experiment]\nkind = conslaw-balance\n[integrator]\nrho_inf = 0.5\ndt_schedule = \"0.001,0.002,repeat\"\nn_steps = 5\n",
        )
        .unwrap();
        assert_eq!(
            c.integrator.time.unwrap().step_sizes().unwrap(),
            vec![0.001, 0.002, 0.001, 0.002, 0.001]
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            (
                "[experiment]\nkind = ode-convergence\nbogus = 1\n",
                3,
                "unknown key",
            ),
            (
                "[experiment]\nkind = amplification-sweep\n[integrator]\nrho_inf = abc\n",
                4,
                "expected a number",
            ),
            (
                "[experiment]\n\n[integrator]\nrho_inf = 0.5\n",
                1,
                "missing required key 'kind'",
            ),
            ("[nowhere]\n", 1, "unknown section"),
            ("kind = x\n", 1, "before any section"),
            ("[experiment]\nkind\n", 2, "key = value"),
        ];
        for (text, want_line, fragment) in cases {
            match parse_config(text).unwrap_err() {
                Error::Parse { line, message } => {
                    assert_eq!(line, want_line, "{text:?}: {message}");
                    assert!(message.contains(fragment), "{message}");
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_explicit_triple() {
        let c = parse_config(
            "# leading\n[experiment]\nkind = ode-convergence # trailing\n[integrator]\nalpha_m = 0.5\nalpha_f = 0.5\ngamma = 0.75\ndt_list = 0.1, 0.05, 0.025\nt_final = 1\n",
        )
        .unwrap();
        assert_eq!(
            c.integrator.params,
            ParamSpec::Explicit {
                alpha_m: 0.5,
                alpha_f: 0.5,
                gamma: 0.75
            }
        );
        assert!(!c.integrator.build_params().unwrap().is_second_order());
    }

    #[test]
    fn incomplete_triple_is_missing_key() {
        let err = parse_config("[experiment]\nkind = amplification-sweep\n[integrator]\nalpha_m = 0.5\nalpha_f = 0.5\ndt = 1\nn_steps = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
    }

    #[test]
    fn convergence_needs_a_list() {
        let err = parse_config("[experiment]\nkind = ode-convergence\n[integrator]\nrho_inf = 0.5\ndt = 0.1\nn_steps = 10\n")
            .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn t_final_sets_step_count() {
        let c = parse_config("[experiment]\nkind = second-order-identity\n[integrator]\nrho_inf = 0\ndt = 0.01\nt_final = 1\n")
            .unwrap();
        assert_eq!(
            c.integrator.time,
            Some(TimeSpec::Uniform {
                dt: 0.01,
                n_steps: 100
            })
        );
    }
}
