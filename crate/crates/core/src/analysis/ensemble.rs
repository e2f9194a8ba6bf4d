//! Seeded instance generators shared by comparisons, audits and scans.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};
use crate::quantum::sample::{derive_seed, rng, sample_density, sample_hermitian, sample_pure};
use crate::quantum::{fock_operators, gaussian_state, GaussianParams, HilbertDim, Observable, QuantumState, DEFAULT_TAIL_TOL};

/// One set of inputs for a relation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub observables: Arc<[Observable]>,
    pub states: Vec<QuantumState>,
    /// Gaussian parameters of each state, when the states come from that family.
    pub params: Option<Vec<GaussianParams>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    Q,
    P,
}

fn default_alpha_max() -> f64 {
    1.0
}

fn default_r_max() -> f64 {
    0.6
}

fn default_same_squeezing_every() -> usize {
    4
}

fn default_dim() -> usize {
    crate::quantum::DEFAULT_HILBERT_DIM
}

fn default_observables() -> usize {
    2
}

fn default_states() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// `(q, p)` with two random Gaussian states. Every
    /// `same_squeezing_every`-th pair shares `(r, phi)` and differs only in
    /// displacement.
    GaussianPairs {
        size: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default = "default_alpha_max")]
        alpha_max: f64,
        #[serde(default = "default_r_max")]
        r_max: f64,
        #[serde(default = "default_same_squeezing_every")]
        same_squeezing_every: usize,
    },
    /// Random Hermitian observables with random states.
    Random {
        size: usize,
        #[serde(default)]
        seed: u64,
        dim: usize,
        #[serde(default = "default_observables")]
        observables: usize,
        #[serde(default = "default_states")]
        states: usize,
        #[serde(default)]
        mixed: bool,
    },
    /// One quadrature with coherent pairs on a square grid of
    /// `Re alpha, Im alpha` in `[min, max]`.
    CoherentGrid {
        observable: Quadrature,
        #[serde(default = "default_dim")]
        dim: usize,
        min: f64,
        max: f64,
        step: f64,
    },
}

/// Materialized ensemble; instances are produced on demand.
#[derive(Debug, Clone)]
pub struct Ensemble {
    spec: EnsembleSpec,
    shared: Option<Arc<[Observable]>>,
    grid: Vec<f64>,
}

const MAX_DRAWS: usize = 1000;

fn grid_points(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !min.is_finite() || !max.is_finite() || max < min {
        return Err(UrError::input(format!("bad grid [{min}, {max}] step {step}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

impl Ensemble {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        let mut grid = Vec::new();
        let shared: Option<Arc<[Observable]>> = match &spec {
            EnsembleSpec::GaussianPairs { dim, .. } => {
                let (q, p) = fock_operators(HilbertDim::new(*dim)?);
                Some(vec![q, p].into())
            }
            EnsembleSpec::CoherentGrid {
                observable,
                dim,
                min,
                max,
                step,
            } => {
                grid = grid_points(*min, *max, *step)?;
                let (q, p) = fock_operators(HilbertDim::new(*dim)?);
                Some(vec![if *observable == Quadrature::Q { q } else { p }].into())
            }
            EnsembleSpec::Random {
                dim,
                observables,
                states,
                ..
            } => {
                if *dim < 1 || *observables < 1 || *states < 1 {
                    return Err(UrError::input("random ensemble needs dim, observables and states >= 1"));
                }
                None
            }
        };
        Ok(Self { spec, shared, grid })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        match &self.spec {
            EnsembleSpec::GaussianPairs { size, .. } | EnsembleSpec::Random { size, .. } => *size,
            EnsembleSpec::CoherentGrid { .. } => self.grid.len().pow(4),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn instance(&self, index: usize) -> Result<Instance> {
        match &self.spec {
            EnsembleSpec::GaussianPairs {
                seed,
                dim,
                alpha_max,
                r_max,
                same_squeezing_every,
                ..
            } => {
                let d = HilbertDim::new(*dim)?;
                let mut g = rng(derive_seed(*seed, index as u64));
                let tied = *same_squeezing_every > 0 && index.is_multiple_of(*same_squeezing_every);
                let (a, b) = (random_gaussian(&mut g, d, *alpha_max, *r_max)?, random_gaussian(&mut g, d, *alpha_max, *r_max)?);
                let b = if tied {
                    let p = GaussianParams { r: a.0.r, phi: a.0.phi, ..b.0 };
                    (p, gaussian_state(&p, d, DEFAULT_TAIL_TOL)?.into())
                } else {
                    b
                };
                Ok(Instance {
                    observables: self.shared.clone().expect("shared observables"),
                    states: vec![a.1, b.1],
                    params: Some(vec![a.0, b.0]),
                })
            }
            EnsembleSpec::CoherentGrid { dim, .. } => {
                let d = HilbertDim::new(*dim)?;
                let k = self.grid.len();
                let idx = [index / (k * k * k), (index / (k * k)) % k, (index / k) % k, index % k];
                let a1 = Complex64::new(self.grid[idx[0]], self.grid[idx[1]]);
                let a2 = Complex64::new(self.grid[idx[2]], self.grid[idx[3]]);
                let params = vec![GaussianParams::coherent(a1), GaussianParams::coherent(a2)];
                let states = params
                    .iter()
                    .map(|p| gaussian_state(p, d, DEFAULT_TAIL_TOL).map(QuantumState::from))
                    .collect::<Result<_>>()?;
                Ok(Instance {
                    observables: self.shared.clone().expect("shared observables"),
                    states,
                    params: Some(params),
                })
            }
            EnsembleSpec::Random {
                seed,
                dim,
                observables,
                states,
                mixed,
                ..
            } => {
                let s = derive_seed(*seed, index as u64);
                Ok(random_instance(*dim, *observables, *states, *mixed, s))
            }
        }
    }
}

/// Uniform Gaussian parameters, redrawn until the state fits the truncation.
pub fn random_gaussian<R: Rng>(g: &mut R, dim: HilbertDim, alpha_max: f64, r_max: f64) -> Result<(GaussianParams, QuantumState)> {
    let mut last = None;
    for _ in 0..MAX_DRAWS {
        let p = GaussianParams {
            alpha: Complex64::new(g.random_range(-alpha_max..=alpha_max), g.random_range(-alpha_max..=alpha_max)),
            r: g.random_range(0.0..=r_max),
            phi: g.random_range(0.0..std::f64::consts::TAU),
        };
        match gaussian_state(&p, dim, DEFAULT_TAIL_TOL) {
            Ok(s) => return Ok((p, s.into())),
            Err(e @ UrError::Truncation { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| UrError::input("no admissible Gaussian draw")))
}

/// `n` random Hermitian observables and `m` random states of dimension `dim`.
/// With `mixed`, odd-numbered states are density matrices.
pub fn random_instance(dim: usize, n: usize, m: usize, mixed: bool, seed: u64) -> Instance {
    let observables: Vec<Observable> = (0..n)
        .map(|k| Observable::from_hermitian(format!("H{k}"), sample_hermitian(dim, derive_seed(seed, k as u64))))
        .collect();
    let states = (0..m)
        .map(|k| {
            let s = derive_seed(seed, (1000 + k) as u64);
            if mixed && k % 2 == 1 {
                sample_density(dim, s).into()
            } else {
                sample_pure(dim, s).into()
            }
        })
        .collect();
    Instance {
        observables: observables.into(),
        states,
        params: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_pairs_are_deterministic_and_tied() {
        let spec = EnsembleSpec::GaussianPairs {
            size: 8,
            seed: 3,
            dim: 64,
            alpha_max: 1.0,
            r_max: 0.6,
            same_squeezing_every: 4,
        };
        let e = Ensemble::new(spec).unwrap();
        let a = e.instance(4).unwrap();
        let b = e.instance(4).unwrap();
        assert_eq!(a.states, b.states);
        let p = a.params.unwrap();
        assert_eq!((p[0].r, p[0].phi), (p[1].r, p[1].phi));
        let p = e.instance(5).unwrap().params.unwrap();
        assert_ne!(p[0].r, p[1].r);
    }

    #[test]
    fn coherent_grid_enumerates_pairs() {
        let e = Ensemble::new(EnsembleSpec::CoherentGrid {
            observable: Quadrature::P,
            dim: 64,
            min: -2.0,
            max: 2.0,
            step: 1.0,
        })
        .unwrap();
        assert_eq!(e.len(), 625);
        let first = e.instance(0).unwrap().params.unwrap();
        assert_eq!(first[0].alpha, Complex64::new(-2.0, -2.0));
        let last = e.instance(624).unwrap().params.unwrap();
        assert_eq!(last[1].alpha, Complex64::new(2.0, 2.0));
        assert_eq!(e.instance(0).unwrap().observables[0].name(), "p");
    }

    #[test]
    fn random_instances_respect_shape() {
        let i = random_instance(5, 3, 4, true, 1);
        assert_eq!(i.observables.len(), 3);
        assert!(i.states[0].is_pure() && !i.states[1].is_pure());
        assert!(i.states.iter().all(|s| s.dim() == 5));
    }
}
