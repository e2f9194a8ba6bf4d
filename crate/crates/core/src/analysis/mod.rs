//! Saturation certificates, slack minimization, precision comparisons,
//! the forward audit of extended-relation minima and state divergences.

pub mod ensemble;
pub mod minimize;
pub mod scan;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{evaluate, type_1_2, URReport, UrId, Variant};
use crate::error::{Result, UrError};
use crate::kernel::{gram, Tolerances};
use crate::moments::centered_image;
use crate::quantum::{GaussianParams, Observable, QuantumState};

pub use ensemble::{Ensemble, EnsembleSpec, Instance, Quadrature};
pub use minimize::{minimize_slack, Budget, MinimizationResult, MinimizeProblem, Slot};
pub use scan::{universal_scan, ScanSpec, ScanSummary, UrScanResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationStatus {
    Saturated,
    Unsaturated,
    /// A centered vector vanishes, so proportionality is vacuous.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationCertificate {
    pub status: SaturationStatus,
    pub is_saturated: bool,
    /// `lambda` with `chi_2 = lambda chi_1`, when both vectors are nonzero.
    #[serde(with = "crate::serde_util::option_complex")]
    pub proportionality_lambda: Option<Complex64>,
    /// `sigma_min / sigma_max` of the stacked pair `[chi_1 chi_2]`.
    pub residual: f64,
    /// Determinant of the 2x2 Gram matrix, equal to the (1,2)a slack.
    pub gram_determinant: f64,
}

/// Tests `(X - <X>_2) psi_2 = lambda (X - <X>_1) psi_1` through the Gram
/// determinant, with the same criterion as the (1,2)a saturation flag.
pub fn saturation_1_2a(x: &Observable, psi1: &QuantumState, psi2: &QuantumState, tol: &Tolerances) -> Result<SaturationCertificate> {
    let report = type_1_2(x, psi1, psi2, Variant::A, tol)?;
    let (p1, p2) = (psi1.as_pure().expect("checked pure"), psi2.as_pure().expect("checked pure"));
    let (c1, c2) = (centered_image(x, p1), centered_image(x, p2));
    let floor = |psi: &crate::quantum::PureState| 1e-10 * x.apply(psi.amplitudes()).norm().max(1.0);
    let degenerate = c1.norm() <= floor(p1) || c2.norm() <= floor(p2);
    let g = gram(&[c1.clone(), c2.clone()])?;
    let ev = g.eigenvalues()?;
    let residual = if ev[1] > 0.0 { (ev[0].max(0.0) / ev[1]).sqrt() } else { 0.0 };
    let gram_determinant = report.slack;
    if degenerate {
        return Ok(SaturationCertificate {
            status: SaturationStatus::Degenerate,
            is_saturated: true,
            proportionality_lambda: None,
            residual,
            gram_determinant,
        });
    }
    let lambda = c1.dotc(&c2) / c1.norm_squared();
    let status = if report.saturated {
        SaturationStatus::Saturated
    } else {
        SaturationStatus::Unsaturated
    };
    Ok(SaturationCertificate {
        status,
        is_saturated: report.saturated,
        proportionality_lambda: Some(lambda),
        residual,
        gram_determinant,
    })
}

/// `sqrt(max(0, slack))` of the (1,2) relation in the chosen variant.
pub fn divergence(x: &Observable, psi1: &QuantumState, psi2: &QuantumState, variant: Variant, tol: &Tolerances) -> Result<f64> {
    Ok(type_1_2(x, psi1, psi2, variant, tol)?.slack.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: usize,
    pub slack_a: f64,
    pub slack_b: f64,
    /// Compared values under the chosen measure.
    pub value_a: f64,
    pub value_b: f64,
    pub params: Option<Vec<GaussianParams>>,
    pub report_a: URReport,
    pub report_b: URReport,
}

/// Quantity compared by [`compare_precision`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMeasure {
    /// `lhs - rhs`.
    #[default]
    Absolute,
    /// `1 - rhs / lhs`, zero when `lhs` vanishes.
    Relative,
}

impl PrecisionMeasure {
    pub fn value(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            PrecisionMeasure::Absolute => lhs - rhs,
            PrecisionMeasure::Relative if lhs == 0.0 => 0.0,
            PrecisionMeasure::Relative => (lhs - rhs) / lhs.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionStats {
    pub ur_a: UrId,
    pub ur_b: UrId,
    pub measure: PrecisionMeasure,
    pub ensemble_size: usize,
    pub a_below_b: usize,
    pub b_below_a: usize,
    pub ties: usize,
    /// `(a_below_b + ties / 2) / ensemble_size`.
    pub fraction_a_below_b: f64,
    /// Instances where either relation is violated; expected to be zero.
    pub violations: usize,
    /// Largest `value_b - value_a` among instances with `value_a < value_b`.
    pub counterexample_a_below_b: Option<Counterexample>,
    /// Largest `value_a - value_b` among instances with `value_b < value_a`.
    pub counterexample_b_below_a: Option<Counterexample>,
}

fn check_compatible(a: &UrId, b: &UrId, inst: &Instance) -> Result<()> {
    for ur in [a, b] {
        let sig = ur.signature();
        if !sig.observables.admits(inst.observables.len()) || !sig.states.admits(inst.states.len()) {
            return Err(UrError::input(format!(
                "{ur} cannot be evaluated on {} observables and {} states",
                inst.observables.len(),
                inst.states.len()
            )));
        }
    }
    Ok(())
}

/// Evaluates both relations on every ensemble member and records which
/// value of `measure` is smaller. Values within `tol.slack * scale` count as ties.
pub fn compare_precision(
    ur_a: &UrId,
    ur_b: &UrId,
    ensemble: &Ensemble,
    measure: PrecisionMeasure,
    tol: &Tolerances,
) -> Result<PrecisionStats> {
    if ensemble.is_empty() {
        return Err(UrError::input("empty ensemble"));
    }
    check_compatible(ur_a, ur_b, &ensemble.instance(0)?)?;
    let rows: Vec<(f64, f64, bool)> = (0..ensemble.len())
        .into_par_iter()
        .map(|i| {
            let inst = ensemble.instance(i)?;
            let a = crate::catalog::evaluate_sides(ur_a, &inst.observables, &inst.states, tol)?;
            let b = crate::catalog::evaluate_sides(ur_b, &inst.observables, &inst.states, tol)?;
            let holds = |(l, r): (f64, f64)| l - r >= -tol.slack * Tolerances::scale(l, r);
            Ok((measure.value(a.0, a.1), measure.value(b.0, b.1), holds(a) && holds(b)))
        })
        .collect::<Result<_>>()?;
    let (mut ab, mut ba, mut ties, mut violations) = (0, 0, 0, 0);
    let (mut best_ab, mut best_ba) = (None::<(usize, f64)>, None::<(usize, f64)>);
    for (i, &(sa, sb, ok)) in rows.iter().enumerate() {
        if !ok {
            violations += 1;
        }
        if (sa - sb).abs() <= tol.slack * sa.abs().max(sb.abs()).max(1.0) {
            ties += 1;
        } else if sa < sb {
            ab += 1;
            if best_ab.is_none_or(|(_, d)| sb - sa > d) {
                best_ab = Some((i, sb - sa));
            }
        } else {
            ba += 1;
            if best_ba.is_none_or(|(_, d)| sa - sb > d) {
                best_ba = Some((i, sa - sb));
            }
        }
    }
    let example = |best: Option<(usize, f64)>| -> Result<Option<Counterexample>> {
        best.map(|(i, _)| {
            let inst = ensemble.instance(i)?;
            let report_a = evaluate(ur_a, &inst.observables, &inst.states, tol)?;
            let report_b = evaluate(ur_b, &inst.observables, &inst.states, tol)?;
            Ok(Counterexample {
                index: i,
                slack_a: report_a.slack,
                slack_b: report_b.slack,
                value_a: measure.value(report_a.lhs, report_a.rhs),
                value_b: measure.value(report_b.lhs, report_b.rhs),
                params: inst.params.clone(),
                report_a,
                report_b,
            })
        })
        .transpose()
    };
    let n = rows.len();
    Ok(PrecisionStats {
        ur_a: *ur_a,
        ur_b: *ur_b,
        measure,
        ensemble_size: n,
        a_below_b: ab,
        b_below_a: ba,
        ties,
        fraction_a_below_b: (ab as f64 + 0.5 * ties as f64) / n as f64,
        violations,
        counterexample_a_below_b: example(best_ab)?,
        counterexample_b_below_a: example(best_ba)?,
    })
}

/// Amplification between the extended-relation threshold and the per-state
/// Schrodinger threshold in [`remark1_audit`].
pub const REMARK1_AMPLIFICATION: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Remark1Instance {
    pub index: usize,
    pub extended_slack: f64,
    pub schrodinger_slacks: [f64; 2],
    pub params: Option<Vec<GaussianParams>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Remark1Report {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub ensemble_size: usize,
    /// Instances with extended slack at most `epsilon`.
    pub near_minimal: usize,
    /// Near-minimal instances where some Schrodinger slack exceeds `epsilon_prime`.
    pub violations: Vec<Remark1Instance>,
    /// Instance with both Schrodinger relations saturated and the largest
    /// extended slack above `epsilon`.
    pub non_inverse: Option<Remark1Instance>,
}

/// For every `(X, Y, psi_1, psi_2)` with extended-Schrodinger slack `<= epsilon`
/// checks that both single-state Schrodinger slacks are `<= 10 epsilon`, and
/// looks for the converse failing.
pub fn remark1_audit(ensemble: &Ensemble, epsilon: f64, tol: &Tolerances) -> Result<Remark1Report> {
    let eps_prime = REMARK1_AMPLIFICATION * epsilon;
    let rows: Vec<Remark1Instance> = (0..ensemble.len())
        .into_par_iter()
        .map(|i| {
            let inst = ensemble.instance(i)?;
            if inst.observables.len() < 2 || inst.states.len() < 2 {
                return Err(UrError::input("audit needs two observables and two states per instance"));
            }
            let obs = &inst.observables[..2];
            let ext = crate::catalog::evaluate_sides(&UrId::ExtendedSchrodinger, obs, &inst.states[..2], tol)?;
            let s1 = crate::catalog::evaluate_sides(&UrId::Schrodinger, obs, &inst.states[..1], tol)?;
            let s2 = crate::catalog::evaluate_sides(&UrId::Schrodinger, obs, &inst.states[1..2], tol)?;
            Ok(Remark1Instance {
                index: i,
                extended_slack: ext.0 - ext.1,
                schrodinger_slacks: [s1.0 - s1.1, s2.0 - s2.1],
                params: inst.params,
            })
        })
        .collect::<Result<_>>()?;
    let near: Vec<&Remark1Instance> = rows.iter().filter(|r| r.extended_slack <= epsilon).collect();
    let violations = near
        .iter()
        .filter(|r| r.schrodinger_slacks.iter().any(|&s| s > eps_prime))
        .map(|r| (*r).clone())
        .collect();
    let non_inverse = rows
        .iter()
        .filter(|r| r.schrodinger_slacks.iter().all(|&s| s.abs() <= tol.slack) && r.extended_slack > epsilon)
        .max_by(|a, b| a.extended_slack.total_cmp(&b.extended_slack).then(b.index.cmp(&a.index)))
        .cloned();
    Ok(Remark1Report {
        epsilon,
        epsilon_prime: eps_prime,
        ensemble_size: rows.len(),
        near_minimal: near.len(),
        violations,
        non_inverse,
    })
}
