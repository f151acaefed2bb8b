//! Step-by-step ledger of the fully discrete balance law
//!
//! ```text
//! ∫ U+_{n+alpha_f} - ∫ U-_{n+alpha_f} = dt ∫ S_{n+alpha_f} - dt (outflow)_{n+alpha_f}
//! ```
//!
//! with `U± = U + (alpha_f - 1/2) dt U'` at `t_{n+1}` and `t_n`. Summed over
//! a run, the shifted totals telescope only when consecutive steps share the
//! same shift, i.e. on a uniform temporal mesh.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::advdiff::AdvDiffSystem;
use crate::conslaw::{
    ConsLawSystem, ConservationLawModel, NonconservativeRunner, NonconservativeSystem, VariableMap,
};
use crate::error::{check_dim, Error, Result};
use crate::integrator::{blend, integrate, StatePair, Stepper};
use crate::newton::{inf_norm, NewtonSettings};
use crate::params::GenAlphaParams;

/// Quantities the ledger needs from a discretization. All integrals use the
/// discretization's own quadrature.
pub trait BalanceSystem {
    fn components(&self) -> usize;

    /// `∫` of the shifted state `U + shift U'` (or its nonconservative analogue).
    fn shifted_total(&self, state: &StatePair, shift: f64) -> Result<DVector<f64>>;

    /// `∫ S` (plus applied boundary fluxes) at the stage state.
    fn source_integral(&self, u_af: &DVector<f64>, t: f64) -> Result<DVector<f64>>;

    /// Outflow boundary flux at the stage state.
    fn outflow_integral(&self, _u_af: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(DVector::zeros(self.components()))
    }
}

impl BalanceSystem for AdvDiffSystem {
    fn components(&self) -> usize {
        1
    }

    fn shifted_total(&self, state: &StatePair, shift: f64) -> Result<DVector<f64>> {
        let shifted = &state.u + &state.u_dot * shift;
        Ok(DVector::from_element(1, self.total_quantity(&shifted)?))
    }

    fn source_integral(&self, _u_af: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_element(1, self.load_integral(t)))
    }

    fn outflow_integral(&self, u_af: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_element(1, self.outflow_flux(u_af, t)?))
    }
}

impl<M: ConservationLawModel> BalanceSystem for ConsLawSystem<M> {
    fn components(&self) -> usize {
        ConsLawSystem::components(self)
    }

    fn shifted_total(&self, state: &StatePair, shift: f64) -> Result<DVector<f64>> {
        let shifted = &state.u + &state.u_dot * shift;
        crate::conslaw::total_conserved(self.space(), self.components(), &shifted)
    }

    fn source_integral(&self, u_af: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        ConsLawSystem::source_integral(self, u_af, t)
    }
}

impl<M: ConservationLawModel, V: VariableMap> BalanceSystem for NonconservativeSystem<M, V> {
    fn components(&self) -> usize {
        NonconservativeSystem::components(self)
    }

    fn shifted_total(&self, state: &StatePair, shift: f64) -> Result<DVector<f64>> {
        self.shifted_conserved_total(state, shift)
    }

    fn source_integral(&self, v_af: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        NonconservativeSystem::source_integral(self, v_af, t)
    }
}

impl<M: ConservationLawModel, V: VariableMap> BalanceSystem for NonconservativeRunner<M, V> {
    fn components(&self) -> usize {
        self.system().components()
    }

    fn shifted_total(&self, state: &StatePair, shift: f64) -> Result<DVector<f64>> {
        self.system().shifted_conserved_total(state, shift)
    }

    fn source_integral(&self, v_af: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        self.system().source_integral(v_af, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub n: usize,
    pub t_alpha_f: f64,
    pub dt: f64,
    /// `∫ U-_{n+alpha_f}`.
    pub shifted_total_minus: Vec<f64>,
    /// `∫ U+_{n+alpha_f}`.
    pub shifted_total_plus: Vec<f64>,
    /// `dt ∫ S_{n+alpha_f}`.
    pub source_integral: Vec<f64>,
    /// `dt` times the outflow flux at `U_{n+alpha_f}`.
    pub boundary_outflow: Vec<f64>,
    /// `|U+_{n-1+alpha_f} - U-_{n+alpha_f}|_inf` on the coefficients; zero for
    /// the first entry.
    pub shift_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceLedger {
    pub components: usize,
    pub alpha_f: f64,
    pub n_begin: usize,
    pub entries: Vec<LedgerEntry>,
    pub uniform_dt: bool,
    pub second_order: bool,
    source_accum: DVector<f64>,
    outflow_accum: DVector<f64>,
    last_plus: Option<DVector<f64>>,
}

impl BalanceLedger {
    pub fn new(components: usize, params: &GenAlphaParams) -> Self {
        Self {
            components,
            alpha_f: params.alpha_f,
            n_begin: 0,
            entries: Vec::new(),
            uniform_dt: true,
            second_order: params.is_second_order(),
            source_accum: DVector::zeros(components),
            outflow_accum: DVector::zeros(components),
            last_plus: None,
        }
    }

    /// Valid only under a uniform mesh with second-order parameters.
    pub fn certified(&self) -> bool {
        self.uniform_dt && self.second_order
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest coefficient-level mismatch between consecutive shifted states.
    pub fn max_shift_mismatch(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0, |m, e| m.max(e.shift_mismatch))
    }

    /// Appends step `state_n -> state_np1`.
    pub fn record_step<B: BalanceSystem + ?Sized>(
        &mut self,
        system: &B,
        state_n: &StatePair,
        state_np1: &StatePair,
        dt: f64,
    ) -> Result<()> {
        check_dim(self.components, system.components())?;
        check_dim(state_n.dimension(), state_np1.dimension())?;
        let shift = (self.alpha_f - 0.5) * dt;
        let minus = system.shifted_total(state_n, shift)?;
        let plus = system.shifted_total(state_np1, shift)?;
        let u_af = blend(&state_n.u, &state_np1.u, self.alpha_f);
        let t_af = state_n.t + self.alpha_f * dt;
        let source = system.source_integral(&u_af, t_af)? * dt;
        let outflow = system.outflow_integral(&u_af, t_af)? * dt;
        check_dim(self.components, source.len())?;
        check_dim(self.components, outflow.len())?;

        let shift_mismatch = match &self.last_plus {
            Some(prev_plus) => {
                check_dim(prev_plus.len(), state_n.dimension())?;
                inf_norm(&(prev_plus - (&state_n.u + &state_n.u_dot * shift)))
            }
            None => 0.0,
        };
        if let Some(first) = self.entries.first() {
            if (dt - first.dt).abs() > 1e-14 * first.dt.abs() {
                self.uniform_dt = false;
            }
        }
        self.source_accum += &source;
        self.outflow_accum += &outflow;
        self.last_plus = Some(&state_np1.u + &state_np1.u_dot * shift);
        self.entries.push(LedgerEntry {
            n: self.n_begin + self.entries.len(),
            t_alpha_f: t_af,
            dt,
            shifted_total_minus: minus.iter().copied().collect(),
            shifted_total_plus: plus.iter().copied().collect(),
            source_integral: source.iter().copied().collect(),
            boundary_outflow: outflow.iter().copied().collect(),
            shift_mismatch,
        });
        Ok(())
    }

    /// Drift over entries `[begin, end)`:
    /// `plus(end - 1) - minus(begin) - Σ source + Σ outflow`.
    pub fn drift_between(&self, begin: usize, end: usize) -> Result<DVector<f64>> {
        if begin >= end || end > self.entries.len() {
            return Err(if self.entries.is_empty() {
                Error::EmptyLedger
            } else {
                Error::Domain(format!(
                    "invalid ledger range [{begin}, {end}) of {}",
                    self.entries.len()
                ))
            });
        }
        let mut drift = vec_of(&self.entries[end - 1].shifted_total_plus)
            - vec_of(&self.entries[begin].shifted_total_minus);
        for e in &self.entries[begin..end] {
            drift -= vec_of(&e.source_integral);
            drift += vec_of(&e.boundary_outflow);
        }
        Ok(drift)
    }

    /// Drift recomputed from the stored entries.
    pub fn recompute_drift(&self) -> Result<DVector<f64>> {
        self.drift_between(0, self.entries.len())
    }

    /// Running drift after every entry.
    fn running_drift(&self) -> Vec<DVector<f64>> {
        let mut src = DVector::zeros(self.components);
        let mut out = DVector::zeros(self.components);
        let start = self.entries.first().map(|e| vec_of(&e.shifted_total_minus));
        self.entries
            .iter()
            .map(|e| {
                src += vec_of(&e.source_integral);
                out += vec_of(&e.boundary_outflow);
                vec_of(&e.shifted_total_plus) - start.as_ref().expect("nonempty") - &src + &out
            })
            .collect()
    }

    pub fn report(&self) -> Result<LedgerReport> {
        let drift = ledger_drift(self)?;
        let running = self.running_drift();
        let mut max_drift = vec![0.0_f64; self.components];
        let mut rows = Vec::with_capacity(self.entries.len() * self.components);
        let mut src = DVector::zeros(self.components);
        let mut out = DVector::zeros(self.components);
        for (entry, d) in self.entries.iter().zip(&running) {
            src += vec_of(&entry.source_integral);
            out += vec_of(&entry.boundary_outflow);
            for c in 0..self.components {
                max_drift[c] = max_drift[c].max(d[c].abs());
                rows.push(LedgerRow {
                    step: entry.n,
                    t_alpha_f: entry.t_alpha_f,
                    component: c,
                    shifted_total_minus: entry.shifted_total_minus[c],
                    source_accum: src[c],
                    outflow_accum: out[c],
                    drift: d[c],
                });
            }
        }
        let first = &self.entries[0];
        let last = &self.entries[self.entries.len() - 1];
        Ok(LedgerReport {
            certified: self.certified(),
            uniform_dt: self.uniform_dt,
            second_order: self.second_order,
            steps: self.entries.len(),
            initial_shifted_total: first.shifted_total_minus.clone(),
            final_shifted_total: last.shifted_total_plus.clone(),
            final_drift: drift.iter().copied().collect(),
            max_drift,
            max_shift_mismatch: self.max_shift_mismatch(),
            rows,
        })
    }
}

fn vec_of(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Drift over the whole ledger, from the incremental accumulators.
pub fn ledger_drift(ledger: &BalanceLedger) -> Result<DVector<f64>> {
    let (first, last) = match (ledger.entries.first(), ledger.entries.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::EmptyLedger),
    };
    Ok(
        vec_of(&last.shifted_total_plus)
            - vec_of(&first.shifted_total_minus)
            - &ledger.source_accum
            + &ledger.outflow_accum,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub step: usize,
    pub t_alpha_f: f64,
    pub component: usize,
    pub shifted_total_minus: f64,
    pub source_accum: f64,
    pub outflow_accum: f64,
    /// Running drift after this step.
    pub drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerReport {
    pub certified: bool,
    pub uniform_dt: bool,
    pub second_order: bool,
    pub steps: usize,
    pub initial_shifted_total: Vec<f64>,
    pub final_shifted_total: Vec<f64>,
    pub final_drift: Vec<f64>,
    /// Per-component maximum of the running drift.
    pub max_drift: Vec<f64>,
    pub max_shift_mismatch: f64,
    #[serde(skip)]
    pub rows: Vec<LedgerRow>,
}

pub const LEDGER_CSV_HEADER: &str =
    "step,t_alpha_f,component,shifted_total_minus,source_accum,outflow_accum,drift";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl LedgerReport {
    pub fn max_abs_drift(&self) -> f64 {
        self.max_drift.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{LEDGER_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.step,
                fmt_f64(r.t_alpha_f),
                r.component,
                fmt_f64(r.shifted_total_minus),
                fmt_f64(r.source_accum),
                fmt_f64(r.outflow_accum),
                fmt_f64(r.drift)
            )?;
        }
        Ok(())
    }
}

pub fn report(ledger: &BalanceLedger) -> Result<LedgerReport> {
    ledger.report()
}

/// Outcome of [`audited_run`].
#[derive(Debug, Clone)]
pub struct AuditedRun {
    pub final_state: StatePair,
    pub ledger: BalanceLedger,
    pub max_newton_iterations: usize,
}

/// Integrates through `dts`, recording every step in a fresh ledger.
pub fn audited_run<S: Stepper + BalanceSystem + ?Sized>(
    system: &S,
    initial: StatePair,
    dts: &[f64],
    params: &GenAlphaParams,
    newton: &NewtonSettings,
) -> Result<AuditedRun> {
    let mut ledger = BalanceLedger::new(BalanceSystem::components(system), params);
    let mut max_newton_iterations = 0;
    let final_state = integrate(
        system,
        initial,
        dts,
        params,
        newton,
        |_, a, b, dt, stats| {
            max_newton_iterations = max_newton_iterations.max(stats.iterations);
            ledger.record_step(system, a, b, dt)
        },
    )?;
    Ok(AuditedRun {
        final_state,
        ledger,
        max_newton_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advdiff::{build_advdiff_system, AdvDiffConfig, Mesh1D};
    use crate::integrator::{consistent_initial_rate, integrate};
    use crate::newton::NewtonSettings;
    use crate::params::{make_params, params_from_rho_inf};

    fn run(config: AdvDiffConfig, dts: &[f64], params: &GenAlphaParams) -> BalanceLedger {
        let mesh = Mesh1D::uniform(16).unwrap();
        let sys = build_advdiff_system(&mesh, &config).unwrap();
        let newton = NewtonSettings::default();
        let u0 = sys.initial_condition().unwrap();
        let rate = consistent_initial_rate(&sys, &u0, 0.0, &newton).unwrap();
        let mut ledger = BalanceLedger::new(1, params);
        integrate(
            &sys,
            StatePair::new(u0, rate, 0.0).unwrap(),
            dts,
            params,
            &newton,
            |_, a, b, dt, _| ledger.record_step(&sys, a, b, dt),
        )
        .unwrap();
        ledger
    }

    #[test]
    fn empty_ledger() {
        let ledger = BalanceLedger::new(1, &params_from_rho_inf(0.5).unwrap());
        assert_eq!(ledger_drift(&ledger).unwrap_err(), Error::EmptyLedger);
        assert!(ledger.report().is_err());
    }

    #[test]
    fn quiescent_step_has_no_terms() {
        let p = params_from_rho_inf(0.5).unwrap();
        let ledger = run(AdvDiffConfig::homogeneous(0.0, 1.0), &[0.01], &p);
        let e = &ledger.entries[0];
        assert_eq!(e.source_integral, vec![0.0]);
        assert_eq!(e.boundary_outflow, vec![0.0]);
        let rep = ledger.report().unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!(rep.certified);
    }

    #[test]
    fn unit_forcing_adds_dt_per_step() {
        let p = params_from_rho_inf(0.5).unwrap();
        let ledger = run(
            AdvDiffConfig::homogeneous(0.0, 1.0).with_forcing(|_, _| 1.0),
            &[0.01; 20],
            &p,
        );
        for e in &ledger.entries {
            assert!((e.source_integral[0] - 0.01).abs() < 1e-17);
        }
        let rep = ledger.report().unwrap();
        let growth = rep.final_shifted_total[0] - rep.initial_shifted_total[0];
        assert!((growth - 0.2).abs() < 1e-12);
        assert!(rep.max_abs_drift() < 1e-12);
    }

    #[test]
    fn nonuniform_run_is_uncertified() {
        let p = params_from_rho_inf(0.5).unwrap();
        let cfg = AdvDiffConfig::homogeneous(1.0, 0.01)
            .with_initial(|x| (-100.0 * (x - 0.5) * (x - 0.5)).exp());
        let dts: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 0.001 } else { 0.002 })
            .collect();
        let ledger = run(cfg.clone(), &dts, &p);
        assert!(!ledger.certified());
        assert!(ledger.recompute_drift().unwrap().amax() > 1e-10);
        assert!(ledger.max_shift_mismatch() > 1e-10);
        let certified = run(cfg, &[0.001; 40], &p);
        assert!(certified.certified());
        assert!(certified.recompute_drift().unwrap().amax() < 1e-12);
    }

    #[test]
    fn first_order_params_are_uncertified() {
        let p = make_params(0.5, 0.5, 0.75).unwrap();
        let ledger = run(AdvDiffConfig::homogeneous(1.0, 0.1), &[0.01; 3], &p);
        assert!(ledger.uniform_dt);
        assert!(!ledger.certified());
    }

    #[test]
    fn csv_layout() {
        let p = params_from_rho_inf(0.5).unwrap();
        let ledger = run(
            AdvDiffConfig::homogeneous(0.0, 1.0).with_forcing(|_, _| 1.0),
            &[0.01; 2],
            &p,
        );
        let mut buf = Vec::new();
        ledger.report().unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], LEDGER_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 7);
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
