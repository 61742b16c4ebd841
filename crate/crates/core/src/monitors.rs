//! Inequality monitors: fit the smallest constants that make each of the
//! three monitored bounds hold over a diagnostic series, and report
//! per-record margins plus a pass/fail verdict.
//!
//! A "pass" with an astronomically large constant would be meaningless, so
//! feasibility is capped at `C_CAP`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::integrate::{DiagnosticRecord, PairRecord};

/// Largest admissible fitted constant.
pub const C_CAP: f64 = 1e6;
/// Absolute width at which the envelope bisection stops.
pub const BISECT_TOL: f64 = 1e-6;
/// Values below this floor are treated as zero in ratio fits.
pub const E_FLOOR: f64 = 1e-14;
/// Slack shielding discrete-derivative checks from round-off:
/// absolute part...
pub const SLACK_ABS: f64 = 1e-8;
/// ...plus this times the local magnitude scale.
pub const SLACK_REL: f64 = 1e-6;
/// Default decay requirement: ||phi(T)|| / max_t ||phi(t)|| must not exceed this.
pub const DECAY_THRESHOLD: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    T1,
    T2,
    T3,
}

/// One margin sample: the bound holds at t iff lhs <= rhs.
/// `ratio` is rhs/lhs, None where the lhs vanishes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MarginPoint {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

fn margin(t: f64, lhs: f64, rhs: f64) -> MarginPoint {
    let ratio = if lhs > 0.0 { Some(rhs / lhs) } else { None };
    MarginPoint { t, lhs, rhs, ratio }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem_id: TheoremId,
    pub fitted_constants: BTreeMap<String, f64>,
    /// Fraction of records where the fitted bound holds; 1.0 whenever pass.
    pub satisfaction_fraction: f64,
    pub margins: Vec<MarginPoint>,
    /// Exponential rate of the squared-L2 error series (decay analyses only).
    pub decay_rate: Option<f64>,
    pub pass: bool,
    pub reason: Option<String>,
}

impl TheoremReport {
    fn fail(theorem_id: TheoremId, reason: impl Into<String>) -> Self {
        TheoremReport {
            theorem_id,
            fitted_constants: BTreeMap::new(),
            satisfaction_fraction: 0.0,
            margins: Vec::new(),
            decay_rate: None,
            pass: false,
            reason: Some(reason.into()),
        }
    }
}

/// Smallest C >= 0 with (E_{j+1} - E_j)/dt <= C E_j + g_j (+ round-off slack)
/// at every sample, found by direct maximization of ((dE/dt) - g)/E over
/// samples with E above the floor.
pub fn groenwall_fit(ts: &[f64], es: &[f64], gs: &[f64]) -> Result<f64> {
    if ts.len() < 2 {
        return Err(CoreError::BadSeries(format!(
            "need at least 2 samples for a derivative fit, got {}",
            ts.len()
        )));
    }
    if ts.len() != es.len() || ts.len() != gs.len() {
        return Err(CoreError::BadSeries("t, E, g series lengths differ".into()));
    }
    if es.iter().any(|&e| !e.is_finite() || e < 0.0) {
        return Err(CoreError::BadSeries("E must be finite and >= 0".into()));
    }
    let mut c_min = 0.0f64;
    for j in 0..ts.len() - 1 {
        let dt = ts[j + 1] - ts[j];
        if !(dt > 0.0) {
            return Err(CoreError::BadSeries(format!("time grid not increasing at sample {j}")));
        }
        if es[j] <= E_FLOOR {
            continue;
        }
        let deriv = (es[j + 1] - es[j]) / dt;
        let slack = SLACK_ABS + SLACK_REL * (deriv.abs() + gs[j].abs() + es[j]);
        let c = (deriv - gs[j] - slack) / es[j];
        c_min = c_min.max(c);
    }
    Ok(c_min)
}

/// Least-squares slope of -log(series) over the final half of the records.
/// The series is floored at 1e-300 before taking logs.
pub fn decay_rate_fit(ts: &[f64], vs: &[f64]) -> Result<f64> {
    if ts.len() < 4 {
        return Err(CoreError::BadSeries(format!(
            "need at least 4 samples for a decay fit, got {}",
            ts.len()
        )));
    }
    if ts.len() != vs.len() {
        return Err(CoreError::BadSeries("t and value series lengths differ".into()));
    }
    let start = ts.len() / 2;
    let tail_t = &ts[start..];
    let tail_v = &vs[start..];
    let n = tail_t.len() as f64;
    let ys: Vec<f64> = tail_v.iter().map(|&v| -(v.max(1e-300)).ln()).collect();
    let mean_t = tail_t.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in tail_t.iter().zip(ys.iter()) {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        return Err(CoreError::BadSeries("degenerate time grid in decay fit".into()));
    }
    Ok(num / den)
}

/// Two-parameter least-squares envelope Q(t) <= A e^{rt}: r from a log-linear
/// regression, A lifted so the bound holds at every record. Diagnostic only.
pub fn fit_exponential_envelope(ts: &[f64], qs: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(qs.iter())
        .filter(|(_, &q)| q > E_FLOOR)
        .map(|(&t, &q)| (t, q.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &pts {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        return None;
    }
    let r = num / den;
    let log_a = pts
        .iter()
        .map(|(t, y)| y - r * t)
        .fold(f64::NEG_INFINITY, f64::max);
    Some((log_a.exp(), r))
}

/// Regularity monitor. Forms Q(t) = ||w||^2_{Hs} + int_0^t ||grad w||^2_{Hs}
/// and finds, by bisection, the smallest single constant C with
/// Q(t) <= C e^{Ct} at every record. Also reports the differential-inequality
/// fit of E = hs_sq against g = forcing_hs_sq and a two-parameter envelope.
pub fn monitor_theorem1(records: &[DiagnosticRecord]) -> Result<TheoremReport> {
    if records.is_empty() {
        return Err(CoreError::BadSeries("empty diagnostic series".into()));
    }
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let qs: Vec<f64> = records.iter().map(|r| r.hs_sq + r.cum_grad_hs).collect();
    if qs.iter().any(|q| !q.is_finite()) {
        return Ok(TheoremReport::fail(TheoremId::T1, "non-finite H^s energy in series"));
    }

    let feasible = |c: f64| qs.iter().zip(ts.iter()).all(|(&q, &t)| q <= c * (c * t).exp());

    let mut constants = BTreeMap::new();
    let c = if qs.iter().all(|&q| q <= 0.0) {
        0.0
    } else {
        // grow an upper bracket, then bisect: feasibility is monotone in C
        let mut hi = 1.0;
        while !feasible(hi) {
            hi *= 2.0;
            if hi > C_CAP {
                let mut rep = TheoremReport::fail(
                    TheoremId::T1,
                    format!("no feasible envelope constant below cap {C_CAP:.1e}"),
                );
                rep.margins = ts.iter().zip(qs.iter()).map(|(&t, &q)| margin(t, q, f64::NAN)).collect();
                return Ok(rep);
            }
        }
        let mut lo = 0.0;
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    constants.insert("C".to_string(), c);

    let es: Vec<f64> = records.iter().map(|r| r.hs_sq).collect();
    let gs: Vec<f64> = records.iter().map(|r| r.forcing_hs_sq).collect();
    if let Ok(gc) = groenwall_fit(&ts, &es, &gs) {
        constants.insert("gronwall_C".to_string(), gc);
    }
    if let Some((a, r)) = fit_exponential_envelope(&ts, &qs) {
        constants.insert("envelope_amplitude".to_string(), a);
        constants.insert("envelope_rate".to_string(), r);
    }

    let margins: Vec<MarginPoint> = ts
        .iter()
        .zip(qs.iter())
        .map(|(&t, &q)| margin(t, q, c * (c * t).exp()))
        .collect();
    let satisfied = margins.iter().filter(|m| m.lhs <= m.rhs).count();
    let satisfaction_fraction = satisfied as f64 / margins.len() as f64;
    let pass = c <= C_CAP && satisfaction_fraction == 1.0;
    Ok(TheoremReport {
        theorem_id: TheoremId::T1,
        fitted_constants: constants,
        satisfaction_fraction,
        margins,
        decay_rate: None,
        pass,
        reason: None,
    })
}

/// Error-bound monitor. LHS(t) = ||phi||^2 + nu int ||grad phi||^2;
/// RHS base = ||phi(0)||^2 + int ||f||^2_{Hs}. The fitted C is the largest
/// ratio LHS/RHS over the records. When the base vanishes while the error
/// does not, the bound cannot hold for any finite C and the report says so.
pub fn monitor_theorem2(pair: &[PairRecord]) -> Result<TheoremReport> {
    if pair.is_empty() {
        return Err(CoreError::BadSeries("empty pair series".into()));
    }
    let phi0_sq = pair[0].phi_l2_sq;
    let lhs: Vec<f64> = pair.iter().map(|r| r.phi_l2_sq + r.cum_nu_grad_phi).collect();
    let base: Vec<f64> = pair.iter().map(|r| phi0_sq + r.cum_forcing_hs).collect();
    if lhs.iter().chain(base.iter()).any(|v| !v.is_finite()) {
        return Ok(TheoremReport::fail(TheoremId::T2, "non-finite error series"));
    }

    let max_lhs = lhs.iter().cloned().fold(0.0, f64::max);
    let usable = base.iter().any(|&b| b > E_FLOOR);
    if !usable {
        if max_lhs <= E_FLOOR {
            // both sides vanish identically: the bound holds with C = 0
            let mut constants = BTreeMap::new();
            constants.insert("C".to_string(), 0.0);
            let margins = pair.iter().map(|r| margin(r.t, r.phi_l2_sq + r.cum_nu_grad_phi, 0.0)).collect();
            return Ok(TheoremReport {
                theorem_id: TheoremId::T2,
                fitted_constants: constants,
                satisfaction_fraction: 1.0,
                margins,
                decay_rate: None,
                pass: true,
                reason: None,
            });
        }
        let mut rep = TheoremReport::fail(
            TheoremId::T2,
            format!(
                "bound vacuously violated: zero initial error and zero forcing, \
                 but the model discrepancy drives max LHS = {max_lhs:.3e} > 0"
            ),
        );
        rep.margins = pair
            .iter()
            .zip(lhs.iter())
            .map(|(r, &l)| margin(r.t, l, 0.0))
            .collect();
        return Ok(rep);
    }

    let mut c = 0.0f64;
    for (l, b) in lhs.iter().zip(base.iter()) {
        if *b > E_FLOOR {
            c = c.max(l / b);
        } else if *l > E_FLOOR {
            // error before any forcing has acted: no finite C covers it
            let rep = TheoremReport::fail(
                TheoremId::T2,
                "bound vacuously violated: nonzero error while the bound base is still zero".to_string(),
            );
            return Ok(rep);
        }
    }
    let margins: Vec<MarginPoint> = pair
        .iter()
        .zip(lhs.iter().zip(base.iter()))
        .map(|(r, (&l, &b))| margin(r.t, l, c * b))
        .collect();
    let satisfied = margins.iter().filter(|m| m.lhs <= m.rhs * (1.0 + 1e-12) + E_FLOOR).count();
    let satisfaction_fraction = satisfied as f64 / margins.len() as f64;
    let pass = c.is_finite() && c <= C_CAP && satisfaction_fraction == 1.0;
    let mut constants = BTreeMap::new();
    constants.insert("C".to_string(), c);
    Ok(TheoremReport {
        theorem_id: TheoremId::T2,
        fitted_constants: constants,
        satisfaction_fraction,
        margins,
        decay_rate: None,
        pass,
        reason: None,
    })
}

/// Asymptotic-convergence monitor. Fits the smallest (C1, C2) with
/// ||phi(t)||^2 <= C1 eps^2 + C2 F/nu at every record, where
/// F = int_0^T ||f||^2_{Hs}; with a constant right-hand side this is an exact
/// two-variable linear program over the records. With zero forcing it also
/// fits the decay rate of the squared error over the tail half and requires
/// ||phi(T)|| / max_t ||phi(t)|| <= decay_threshold.
pub fn monitor_theorem3(pair: &[PairRecord], nu: f64, decay_threshold: f64) -> Result<TheoremReport> {
    if pair.len() < 2 {
        return Err(CoreError::BadSeries("pair series too short".into()));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(CoreError::invalid("nu", format!("must be > 0, got {nu}")));
    }
    let ts: Vec<f64> = pair.iter().map(|r| r.t).collect();
    let phi_sq: Vec<f64> = pair.iter().map(|r| r.phi_l2_sq).collect();
    if phi_sq.iter().any(|v| !v.is_finite()) {
        return Ok(TheoremReport::fail(TheoremId::T3, "non-finite error series"));
    }
    let eps_sq = phi_sq[0];
    let f_total = pair.last().unwrap().cum_forcing_hs;
    let forcing_zero = f_total <= E_FLOOR;
    let m = phi_sq.iter().cloned().fold(0.0, f64::max);
    let m_end = *phi_sq.last().unwrap();

    let mut constants = BTreeMap::new();

    if eps_sq <= E_FLOOR && forcing_zero {
        if m <= E_FLOOR {
            constants.insert("C1".to_string(), 0.0);
            constants.insert("C2".to_string(), 0.0);
            let margins = pair.iter().map(|r| margin(r.t, r.phi_l2_sq, 0.0)).collect();
            return Ok(TheoremReport {
                theorem_id: TheoremId::T3,
                fitted_constants: constants,
                satisfaction_fraction: 1.0,
                margins,
                decay_rate: None,
                pass: true,
                reason: Some("identical data, identical forcing: error is identically zero".into()),
            });
        }
        constants.insert("max_phi_l2_sq".to_string(), m);
        let mut rep = TheoremReport::fail(
            TheoremId::T3,
            format!(
                "degenerate: zero initial separation and zero forcing, error is bounded \
                 by closure drift only (max ||phi||^2 = {m:.3e})"
            ),
        );
        rep.fitted_constants = constants;
        rep.margins = pair.iter().map(|r| margin(r.t, r.phi_l2_sq, 0.0)).collect();
        return Ok(rep);
    }

    // minimize C1 + C2 subject to C1*eps^2 + C2*(F/nu) >= max_t ||phi||^2:
    // the optimum puts all weight on the larger coefficient.
    let a = eps_sq;
    let b = f_total / nu;
    let (c1, c2) = if b <= E_FLOOR {
        (m / a, 0.0)
    } else if a <= E_FLOOR {
        (0.0, m / b)
    } else if a >= b {
        (m / a, 0.0)
    } else {
        (0.0, m / b)
    };
    constants.insert("C1".to_string(), c1);
    constants.insert("C2".to_string(), c2);
    constants.insert("C2_nu".to_string(), c2 * nu);

    let rhs = c1 * a + c2 * b;
    let margins: Vec<MarginPoint> = pair.iter().map(|r| margin(r.t, r.phi_l2_sq, rhs)).collect();
    let satisfied = margins.iter().filter(|mp| mp.lhs <= mp.rhs * (1.0 + 1e-12) + E_FLOOR).count();
    let satisfaction_fraction = satisfied as f64 / margins.len() as f64;

    let mut pass = c1.is_finite() && c2.is_finite() && c1 <= C_CAP && c2 <= C_CAP && satisfaction_fraction == 1.0;
    let mut decay_rate = None;
    let mut reason = None;
    if forcing_zero {
        let lambda = decay_rate_fit(&ts, &phi_sq)?;
        decay_rate = Some(lambda);
        let decay_ratio = if m > 0.0 { (m_end / m).sqrt() } else { 0.0 };
        constants.insert("decay_ratio".to_string(), decay_ratio);
        if !(lambda > 0.0 && decay_ratio <= decay_threshold) {
            pass = false;
            reason = Some(format!(
                "decay requirement failed: lambda = {lambda:.4e}, \
                 ||phi(T)||/max||phi|| = {decay_ratio:.4} (threshold {decay_threshold})"
            ));
        }
    }

    Ok(TheoremReport {
        theorem_id: TheoremId::T3,
        fitted_constants: constants,
        satisfaction_fraction,
        margins,
        decay_rate,
        pass,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_ts(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn groenwall_fit_decaying_series_gives_zero() {
        let ts = uniform_ts(2001, 1e-3);
        let es: Vec<f64> = ts.iter().map(|t| (-t).exp()).collect();
        let gs = vec![0.0; ts.len()];
        let c = groenwall_fit(&ts, &es, &gs).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn groenwall_fit_recovers_exponential_rate() {
        let ts = uniform_ts(2001, 1e-3);
        let es: Vec<f64> = ts.iter().map(|t| (2.0 * t).exp()).collect();
        let gs = vec![0.0; ts.len()];
        let c = groenwall_fit(&ts, &es, &gs).unwrap();
        assert!((c - 2.0).abs() < 5e-3, "fitted {c}");
    }

    #[test]
    fn groenwall_fit_rejects_bad_input() {
        assert!(groenwall_fit(&[0.0], &[1.0], &[0.0]).is_err());
        assert!(groenwall_fit(&[0.0, 1.0], &[1.0, -1.0], &[0.0, 0.0]).is_err());
        assert!(groenwall_fit(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn decay_fit_exact_exponential() {
        let ts = uniform_ts(100, 0.05);
        let vs: Vec<f64> = ts.iter().map(|t| (-3.0 * t).exp()).collect();
        let lambda = decay_rate_fit(&ts, &vs).unwrap();
        assert!((lambda - 3.0).abs() < 1e-9, "lambda {lambda}");
    }

    #[test]
    fn decay_fit_constant_series_is_zero() {
        let ts = uniform_ts(10, 0.5);
        let vs = vec![2.5; 10];
        assert_eq!(decay_rate_fit(&ts, &vs).unwrap(), 0.0);
    }

    #[test]
    fn decay_fit_needs_four_points() {
        assert!(decay_rate_fit(&[0.0, 1.0, 2.0], &[1.0, 0.5, 0.25]).is_err());
    }

    fn synthetic_records(ts: &[f64], hs: &[f64], grad: &[f64], forcing: &[f64]) -> Vec<DiagnosticRecord> {
        let mut cum_grad = 0.0;
        let mut cum_forcing = 0.0;
        let mut out = Vec::new();
        for i in 0..ts.len() {
            if i > 0 {
                let dt = ts[i] - ts[i - 1];
                cum_grad += 0.5 * dt * (grad[i - 1] + grad[i]);
                cum_forcing += 0.5 * dt * (forcing[i - 1] + forcing[i]);
            }
            out.push(DiagnosticRecord {
                t: ts[i],
                l2_sq: hs[i],
                hs_sq: hs[i],
                grad_hs_sq: grad[i],
                forcing_hs_sq: forcing[i],
                cum_grad_hs: cum_grad,
                cum_forcing_hs: cum_forcing,
                divergence_residual: 0.0,
            });
        }
        out
    }

    #[test]
    fn theorem1_zero_series_passes_at_floor() {
        let ts = uniform_ts(11, 0.1);
        let zeros = vec![0.0; 11];
        let recs = synthetic_records(&ts, &zeros, &zeros, &zeros);
        let rep = monitor_theorem1(&recs).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.fitted_constants["C"], 0.0);
        assert_eq!(rep.satisfaction_fraction, 1.0);
    }

    #[test]
    fn theorem1_binding_constraint_at_t_zero_for_decaying_energy() {
        // Q grows slower than any e^{Q(0) t} envelope, so minimal C = Q(0)
        let ts = uniform_ts(101, 0.1);
        let hs: Vec<f64> = ts.iter().map(|t| 100.0 * (-0.4 * t).exp()).collect();
        let grad: Vec<f64> = hs.iter().map(|h| 2.0 * h).collect();
        let zeros = vec![0.0; ts.len()];
        let recs = synthetic_records(&ts, &hs, &grad, &zeros);
        let q0 = recs[0].hs_sq + recs[0].cum_grad_hs;
        let rep = monitor_theorem1(&recs).unwrap();
        assert!(rep.pass);
        let c = rep.fitted_constants["C"];
        assert!((c - q0).abs() <= BISECT_TOL, "C = {c}, Q(0) = {q0}");
    }

    #[test]
    fn theorem1_reports_failure_beyond_cap() {
        // Q blowing up faster than C e^{Ct} for any C <= cap is impossible for
        // finite series; force failure with an enormous early value instead.
        let ts = vec![0.0, 1.0];
        let hs = vec![1e7, 1e7];
        let zeros = vec![0.0; 2];
        let recs = synthetic_records(&ts, &hs, &zeros, &zeros);
        let rep = monitor_theorem1(&recs).unwrap();
        assert!(!rep.pass);
        assert!(rep.reason.is_some());
    }

    fn synthetic_pair(ts: &[f64], phi: &[f64], grad_phi: &[f64], forcing: &[f64], nu: f64) -> Vec<PairRecord> {
        let mut cum_nu = 0.0;
        let mut cum_f = 0.0;
        let mut out = Vec::new();
        for i in 0..ts.len() {
            if i > 0 {
                let dt = ts[i] - ts[i - 1];
                cum_nu += 0.5 * dt * nu * (grad_phi[i - 1] + grad_phi[i]);
                cum_f += 0.5 * dt * (forcing[i - 1] + forcing[i]);
            }
            out.push(PairRecord {
                t: ts[i],
                phi_l2_sq: phi[i],
                grad_phi_l2_sq: grad_phi[i],
                cum_nu_grad_phi: cum_nu,
                forcing_hs_sq: forcing[i],
                cum_forcing_hs: cum_f,
            });
        }
        out
    }

    #[test]
    fn theorem2_zero_error_zero_base_passes_with_zero_constant() {
        let ts = uniform_ts(6, 0.2);
        let zeros = vec![0.0; 6];
        let pair = synthetic_pair(&ts, &zeros, &zeros, &zeros, 0.1);
        let rep = monitor_theorem2(&pair).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.fitted_constants["C"], 0.0);
    }

    #[test]
    fn theorem2_contraction_gives_c_at_most_one() {
        let ts = uniform_ts(51, 0.2);
        let eps_sq = 1e-6;
        let phi: Vec<f64> = ts.iter().map(|t| eps_sq * (-0.4 * t).exp()).collect();
        // grad energy consistent with pure viscous decay: nu||grad phi||^2 = -d/dt(phi)/2
        let grad: Vec<f64> = phi.iter().map(|p| 2.0 * p).collect();
        let zeros = vec![0.0; ts.len()];
        let pair = synthetic_pair(&ts, &phi, &grad, &zeros, 0.1);
        let rep = monitor_theorem2(&pair).unwrap();
        assert!(rep.pass);
        let c = rep.fitted_constants["C"];
        assert!(c <= 1.0 + 1e-9, "C = {c}");
        assert!(c >= 1.0 - 1e-12, "ratio at t=0 is exactly 1, C = {c}");
    }

    #[test]
    fn theorem2_flags_vacuous_violation() {
        let ts = uniform_ts(6, 0.2);
        let phi: Vec<f64> = ts.iter().map(|t| 1e-8 * t).collect();
        let zeros = vec![0.0; 6];
        let pair = synthetic_pair(&ts, &phi, &zeros, &zeros, 0.1);
        let rep = monitor_theorem2(&pair).unwrap();
        assert!(!rep.pass);
        assert!(rep.reason.as_deref().unwrap_or("").contains("vacuously violated"));
    }

    #[test]
    fn theorem3_trivial_pass_when_identical() {
        let ts = uniform_ts(8, 0.5);
        let zeros = vec![0.0; 8];
        let pair = synthetic_pair(&ts, &zeros, &zeros, &zeros, 0.1);
        let rep = monitor_theorem3(&pair, 0.1, DECAY_THRESHOLD).unwrap();
        assert!(rep.pass);
        assert!(rep.decay_rate.is_none());
    }

    #[test]
    fn theorem3_degenerate_closure_drift_is_flagged() {
        let ts = uniform_ts(8, 0.5);
        let phi: Vec<f64> = ts.iter().map(|t| 1e-9 * t).collect();
        let zeros = vec![0.0; 8];
        let pair = synthetic_pair(&ts, &phi, &zeros, &zeros, 0.1);
        let rep = monitor_theorem3(&pair, 0.1, DECAY_THRESHOLD).unwrap();
        assert!(!rep.pass);
        assert!(rep.reason.as_deref().unwrap().contains("degenerate"));
        assert!(rep.fitted_constants.contains_key("max_phi_l2_sq"));
    }

    #[test]
    fn theorem3_pure_decay_passes_with_c1_only() {
        let ts = uniform_ts(81, 0.5);
        let eps_sq = 1e-6;
        let phi: Vec<f64> = ts.iter().map(|t| eps_sq * (-0.4 * t).exp()).collect();
        let zeros = vec![0.0; ts.len()];
        let pair = synthetic_pair(&ts, &phi, &zeros, &zeros, 0.1);
        let rep = monitor_theorem3(&pair, 0.1, DECAY_THRESHOLD).unwrap();
        assert!(rep.pass, "reason: {:?}", rep.reason);
        assert_eq!(rep.fitted_constants["C2"], 0.0);
        assert!((rep.fitted_constants["C1"] - 1.0).abs() < 1e-12);
        let lambda = rep.decay_rate.unwrap();
        assert!((lambda - 0.4).abs() < 1e-9, "lambda {lambda}");
    }

    #[test]
    fn theorem3_forced_case_uses_c2() {
        let ts = uniform_ts(21, 0.5);
        let phi: Vec<f64> = ts.iter().map(|t| 1e-4 * (1.0 - (-t).exp())).collect();
        let grad = vec![0.0; ts.len()];
        let forcing = vec![0.01; ts.len()];
        let pair = synthetic_pair(&ts, &phi, &grad, &forcing, 0.1);
        let rep = monitor_theorem3(&pair, 0.1, DECAY_THRESHOLD).unwrap();
        assert!(rep.pass, "reason {:?}", rep.reason);
        // F/nu = 0.01*10/0.1 = 1 >> eps^2 ~ 0, so all weight on C2
        assert_eq!(rep.fitted_constants["C1"], 0.0);
        assert!(rep.fitted_constants["C2"] > 0.0);
        assert!((rep.fitted_constants["C2_nu"] - rep.fitted_constants["C2"] * 0.1).abs() < 1e-18);
        assert!(rep.decay_rate.is_none());
    }
}
