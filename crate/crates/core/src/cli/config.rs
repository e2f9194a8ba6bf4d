//! JSON run configuration and the builder vocabulary for observables and states.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{EnsembleSpec, PrecisionMeasure, Slot};
use crate::catalog::{UrId, Variant};
use crate::error::{Result, UrError};
use crate::kernel::Tolerances;
use crate::quantum::{
    fock_operators, fock_state, gaussian_state, quad_mix, quad_plus, spin_operators, DensityMatrix, GaussianParams, HilbertDim,
    Observable, PureState, QuantumState, DEFAULT_TAIL_TOL,
};
use crate::serde_util::{pairs_to_vector, rows_to_matrix};

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    FockQ,
    FockP,
    /// `p^2 - q^2`
    QuadPlus,
    /// `pq + qp`
    QuadMix,
    SpinJx {
        j: f64,
    },
    SpinJy {
        j: f64,
    },
    SpinJz {
        j: f64,
    },
    RawMatrix {
        #[serde(default)]
        name: Option<String>,
        matrix: Vec<Vec<Pair>>,
    },
}

impl ObservableSpec {
    pub fn build(&self, dim: HilbertDim) -> Result<Observable> {
        Ok(match self {
            ObservableSpec::FockQ => fock_operators(dim).0,
            ObservableSpec::FockP => fock_operators(dim).1,
            ObservableSpec::QuadPlus => quad_plus(dim),
            ObservableSpec::QuadMix => quad_mix(dim),
            ObservableSpec::SpinJx { j } => spin_operators(*j)?.0,
            ObservableSpec::SpinJy { j } => spin_operators(*j)?.1,
            ObservableSpec::SpinJz { j } => spin_operators(*j)?.2,
            ObservableSpec::RawMatrix { name, matrix } => {
                let m = rows_to_matrix(matrix).ok_or_else(|| UrError::input("raw_matrix rows have different lengths"))?;
                Observable::new(name.clone().unwrap_or_else(|| "raw".into()), m)?
            }
        })
    }
}

fn zero_pair() -> Pair {
    [0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Coherent {
        #[serde(default = "zero_pair")]
        alpha: Pair,
    },
    Squeezed {
        #[serde(default = "zero_pair")]
        alpha: Pair,
        r: f64,
        #[serde(default)]
        phi: f64,
    },
    FockN {
        k: usize,
    },
    RawVector {
        amplitudes: Vec<Pair>,
        #[serde(default)]
        normalize: bool,
    },
    RawDensity {
        matrix: Vec<Vec<Pair>>,
    },
}

impl StateSpec {
    pub fn build(&self, dim: HilbertDim) -> Result<QuantumState> {
        let alpha = |a: &Pair| num_complex::Complex64::new(a[0], a[1]);
        Ok(match self {
            StateSpec::Coherent { alpha: a } => gaussian_state(&GaussianParams::coherent(alpha(a)), dim, DEFAULT_TAIL_TOL)?.into(),
            StateSpec::Squeezed { alpha: a, r, phi } => {
                gaussian_state(&GaussianParams::squeezed(alpha(a), *r, *phi), dim, DEFAULT_TAIL_TOL)?.into()
            }
            StateSpec::FockN { k } => fock_state(*k, dim)?.into(),
            StateSpec::RawVector { amplitudes, normalize } => {
                let v = pairs_to_vector(amplitudes);
                if *normalize {
                    PureState::normalized(v)?.into()
                } else {
                    PureState::new(v)?.into()
                }
            }
            StateSpec::RawDensity { matrix } => {
                let m = rows_to_matrix(matrix).ok_or_else(|| UrError::input("raw_density rows have different lengths"))?;
                DensityMatrix::new(m)?.into()
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::Coherent { alpha } => format!("coherent({}, {})", alpha[0], alpha[1]),
            StateSpec::Squeezed { alpha, r, phi } => format!("squeezed({}, {}; r={r}, phi={phi})", alpha[0], alpha[1]),
            StateSpec::FockN { k } => format!("fock_n({k})"),
            StateSpec::RawVector { .. } => "raw_vector".into(),
            StateSpec::RawDensity { .. } => "raw_density".into(),
        }
    }
}

/// One explicit check: a relation with indices into the observable and state lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub ur: UrId,
    pub observables: Vec<usize>,
    pub states: Vec<usize>,
}

fn default_dim_min() -> usize {
    2
}

fn default_dim_max() -> usize {
    12
}

fn default_max_observables() -> usize {
    4
}

fn default_max_states() -> usize {
    4
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    #[serde(default = "default_dim_min")]
    pub dim_min: usize,
    #[serde(default = "default_dim_max")]
    pub dim_max: usize,
    #[serde(default = "default_max_observables")]
    pub max_observables: usize,
    #[serde(default = "default_max_states")]
    pub max_states: usize,
    #[serde(default = "default_true")]
    pub mixed: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            dim_min: default_dim_min(),
            dim_max: default_dim_max(),
            max_observables: default_max_observables(),
            max_states: default_max_states(),
            mixed: true,
        }
    }
}

fn default_max_iterations() -> usize {
    2000
}

fn default_restarts() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeOptions {
    pub ur: UrId,
    pub slots: Vec<Slot>,
    #[serde(default)]
    pub init: Option<Vec<GaussianParams>>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareOptions {
    pub ur_a: UrId,
    pub ur_b: UrId,
    /// Random ensembles take their seed from the run seed.
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub measure: PrecisionMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceOptions {
    #[serde(default = "default_variant")]
    pub variant: Variant,
}

fn default_variant() -> Variant {
    Variant::A
}

impl Default for DivergenceOptions {
    fn default() -> Self {
        Self { variant: Variant::A }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Scan,
    Minimize,
    Compare,
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub hilbert_dim: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub ensemble_size: Option<usize>,
    #[serde(default)]
    pub urs: Vec<UrId>,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub scan: Option<ScanOptions>,
    #[serde(default)]
    pub minimize: Option<MinimizeOptions>,
    #[serde(default)]
    pub compare: Option<CompareOptions>,
    #[serde(default)]
    pub divergence: Option<DivergenceOptions>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| UrError::Config(e.to_string()))
    }

    pub fn dim(&self) -> Result<HilbertDim> {
        HilbertDim::new(self.hilbert_dim.unwrap_or(crate::quantum::DEFAULT_HILBERT_DIM))
            .map_err(|e| UrError::Config(e.to_string()))
    }

    pub fn build_observables(&self) -> Result<Vec<Observable>> {
        let dim = self.dim()?;
        self.observables.iter().map(|o| o.build(dim)).collect()
    }

    pub fn build_states(&self) -> Result<Vec<QuantumState>> {
        let dim = self.dim()?;
        self.states.iter().map(|s| s.build(dim)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builders() {
        let cfg = RunConfig::from_json(
            r#"{
                "hilbert_dim": 16,
                "urs": ["schrodinger", {"characteristic": {"order": 2}}],
                "observables": [{"builder": "fock_q"}, {"builder": "spin_jz", "j": 0.5},
                                {"builder": "raw_matrix", "name": "Z", "matrix": [[[1,0],[0,0]],[[0,0],[-1,0]]]}],
                "states": [{"builder": "coherent", "alpha": [0.5, 0]}, {"builder": "fock_n", "k": 2},
                           {"builder": "raw_vector", "amplitudes": [[1,0],[1,0]], "normalize": true}]
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.urs[1], UrId::Characteristic { order: Some(2) });
        let obs = cfg.build_observables().unwrap();
        assert_eq!(obs[1].dim(), 2);
        assert_eq!(obs[2].name(), "Z");
        let states = cfg.build_states().unwrap();
        assert_eq!(states[0].dim(), 16);
        assert_eq!(states[2].dim(), 2);
    }

    #[test]
    fn rejects_unknown_fields_and_builders() {
        assert!(matches!(RunConfig::from_json(r#"{"hilbert": 3}"#), Err(UrError::Config(_))));
        assert!(matches!(RunConfig::from_json(r#"{"observables": [{"builder": "nope"}]}"#), Err(UrError::Config(_))));
    }

    #[test]
    fn unnormalized_raw_vector_is_input_error() {
        let s = StateSpec::RawVector {
            amplitudes: vec![[1.0, 0.0], [1.0, 0.0]],
            normalize: false,
        };
        assert!(matches!(s.build(HilbertDim::new(2).unwrap()), Err(UrError::Input(_))));
    }
}
