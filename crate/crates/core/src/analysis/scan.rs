//! Universal-validity scans: every selected relation on seeded random inputs.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{evaluate, evaluate_sides, Count, URReport, UrId};
use crate::error::{Result, UrError};
use crate::kernel::Tolerances;
use crate::quantum::sample::{derive_seed, rng, sample_density, sample_hermitian, sample_pure};
use crate::quantum::{Observable, QuantumState};

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub size: usize,
    pub seed: u64,
    pub dim_min: usize,
    pub dim_max: usize,
    pub max_observables: usize,
    pub max_states: usize,
    /// Draw density matrices (with probability 1/2 per slot) where admitted.
    pub mixed: bool,
    /// Observables kept fixed across instances; only states are random then.
    pub observables: Option<Arc<[Observable]>>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            size: 1000,
            seed: 0,
            dim_min: 2,
            dim_max: 12,
            max_observables: 4,
            max_states: 4,
            mixed: true,
            observables: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrScanResult {
    pub ur_id: UrId,
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    pub errors: usize,
    pub first_error: Option<String>,
    /// Smallest `slack / max(|lhs|, |rhs|, 1)` over the ensemble.
    pub worst_scaled_slack: Option<f64>,
    pub worst_index: Option<usize>,
    pub worst_report: Option<URReport>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub seed: u64,
    pub size: usize,
    pub results: Vec<UrScanResult>,
    pub total_violations: usize,
    pub total_errors: usize,
}

fn name_hash(s: &str) -> u64 {
    // FNV-1a
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn draw_count<R: Rng>(g: &mut R, c: Count, max: usize) -> usize {
    match c {
        Count::Exact(k) => k,
        Count::AtLeast(k) => g.random_range(k..=max.max(k)),
    }
}

struct Drawn {
    ur: UrId,
    observables: Vec<Observable>,
    states: Vec<QuantumState>,
}

/// Inputs of instance `index` for `ur`; a pure function of the spec seed,
/// the relation name and the index.
fn draw(spec: &ScanSpec, ur: &UrId, index: usize) -> Result<Drawn> {
    let seed = derive_seed(derive_seed(spec.seed, name_hash(&ur.name())), index as u64);
    let mut g = rng(seed);
    let sig = ur.signature();
    let observables: Vec<Observable> = match &spec.observables {
        Some(fixed) => {
            let n = match sig.observables {
                Count::Exact(k) => k,
                Count::AtLeast(_) => fixed.len(),
            };
            fixed[..n].to_vec()
        }
        None => {
            let d = g.random_range(spec.dim_min..=spec.dim_max);
            let n = draw_count(&mut g, sig.observables, spec.max_observables);
            (0..n)
                .map(|k| Observable::from_hermitian(format!("H{k}"), sample_hermitian(d, derive_seed(seed, k as u64))))
                .collect()
        }
    };
    let d = observables[0].dim();
    let m = draw_count(&mut g, sig.states, spec.max_states);
    let states = (0..m)
        .map(|k| {
            let s = derive_seed(seed, (1000 + k) as u64);
            if spec.mixed && sig.mixed_allowed && g.random_bool(0.5) {
                sample_density(d, s).into()
            } else {
                sample_pure(d, s).into()
            }
        })
        .collect();
    let ur = if ur.has_free_order() {
        ur.with_order(g.random_range(1..=observables.len()))
    } else {
        *ur
    };
    Ok(Drawn { ur, observables, states })
}

fn scan_one(spec: &ScanSpec, ur: &UrId, tol: &Tolerances) -> Result<UrScanResult> {
    let mut result = UrScanResult {
        ur_id: *ur,
        name: ur.name(),
        instances: spec.size,
        violations: 0,
        errors: 0,
        first_error: None,
        worst_scaled_slack: None,
        worst_index: None,
        worst_report: None,
        skipped: None,
    };
    if let Some(fixed) = &spec.observables {
        let need = ur.signature().observables.min();
        if fixed.len() < need {
            result.instances = 0;
            result.skipped = Some(format!("needs {need} observables, {} given", fixed.len()));
            return Ok(result);
        }
    }
    let rows: Vec<std::result::Result<f64, String>> = (0..spec.size)
        .into_par_iter()
        .map(|i| {
            let d = draw(spec, ur, i).map_err(|e| e.to_string())?;
            let (lhs, rhs) = evaluate_sides(&d.ur, &d.observables, &d.states, tol).map_err(|e| format!("instance {i}: {e}"))?;
            Ok((lhs - rhs) / Tolerances::scale(lhs, rhs))
        })
        .collect();
    for (i, row) in rows.iter().enumerate() {
        match row {
            Ok(s) => {
                if *s < -tol.slack {
                    result.violations += 1;
                }
                if result.worst_scaled_slack.is_none_or(|w| *s < w) {
                    result.worst_scaled_slack = Some(*s);
                    result.worst_index = Some(i);
                }
            }
            Err(e) => {
                result.errors += 1;
                if result.first_error.is_none() {
                    result.first_error = Some(e.clone());
                }
            }
        }
    }
    if let Some(i) = result.worst_index {
        let d = draw(spec, ur, i)?;
        result.worst_report = Some(evaluate(&d.ur, &d.observables, &d.states, tol)?);
    }
    Ok(result)
}

/// Scans each relation in `urs` over `spec.size` random instances.
pub fn universal_scan(urs: &[UrId], spec: &ScanSpec, tol: &Tolerances) -> Result<ScanSummary> {
    if spec.size == 0 {
        return Err(UrError::input("scan needs at least one instance"));
    }
    if spec.observables.is_none() && (spec.dim_min < 1 || spec.dim_min > spec.dim_max) {
        return Err(UrError::input(format!("bad dimension range {}..={}", spec.dim_min, spec.dim_max)));
    }
    if spec.observables.as_ref().is_some_and(|o| o.is_empty()) {
        return Err(UrError::input("fixed observable list is empty"));
    }
    let results: Vec<UrScanResult> = urs.iter().map(|ur| scan_one(spec, ur, tol)).collect::<Result<_>>()?;
    Ok(ScanSummary {
        seed: spec.seed,
        size: spec.size,
        total_violations: results.iter().map(|r| r.violations).sum(),
        total_errors: results.iter().map(|r| r.errors).sum(),
        results,
    })
}
