//! Second moments of observable tuples, the Robertson matrix and the two
//! Gram constructions over per-observable states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};
use crate::kernel::{gram, CMatrix, CVector, HermitianMatrix, RMatrix, Tolerances};
use crate::quantum::{Observable, PureState, QuantumState};

const RESIDUE_TOL: f64 = 1e-10;

/// Means, uncertainty matrix `sigma` and mean-commutator matrix
/// `C_jk = -(i/2) <[X_j, X_k]>` in one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub means: Vec<f64>,
    pub sigma: RMatrix,
    pub c: RMatrix,
}

impl MomentSet {
    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.sigma[(i, i)]
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.sigma[(i, j)]
    }

    /// `<[X_i, X_j]>`, purely imaginary.
    pub fn mean_commutator(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(0.0, 2.0 * self.c[(i, j)])
    }

    /// `<X_i^2>`.
    pub fn second_moment(&self, i: usize) -> f64 {
        self.sigma[(i, i)] + self.means[i] * self.means[i]
    }

    /// `sigma + i C`.
    pub fn robertson(&self) -> HermitianMatrix {
        let n = self.n();
        HermitianMatrix::from_hermitian_unchecked(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.sigma[(i, j)], self.c[(i, j)])
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramKind {
    /// `sigma + i C` in a single (possibly mixed) state.
    Robertson,
    /// Gram of `(X_k - <X_k>_k) |psi_k>`.
    Centered,
    /// Gram of `X_k |psi_k>`.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub observables: Vec<String>,
    pub states: Vec<String>,
}

/// A physical choice of positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramUR {
    pub kind: GramKind,
    pub matrix: HermitianMatrix,
    pub provenance: Provenance,
}

pub(crate) fn check_dims(observables: &[&Observable], states: &[&QuantumState]) -> Result<usize> {
    let d = observables
        .first()
        .map(|o| o.dim())
        .or_else(|| states.first().map(|s| s.dim()))
        .ok_or_else(|| UrError::input("no observables or states"))?;
    for o in observables {
        if o.dim() != d {
            return Err(UrError::input(format!(
                "observable {} has dimension {}, expected {d}",
                o.name(),
                o.dim()
            )));
        }
    }
    for (k, s) in states.iter().enumerate() {
        if s.dim() != d {
            return Err(UrError::input(format!("state #{k} has dimension {}, expected {d}", s.dim())));
        }
    }
    Ok(d)
}

fn residue_check(what: &str, residue: f64, scale: f64) -> Result<()> {
    if residue > RESIDUE_TOL * scale.max(1.0) {
        return Err(UrError::Numeric(format!("{what}: imaginary residue {residue:.3e}")));
    }
    Ok(())
}

/// Moments of `observables` in `state`; expectations are `Tr(rho .)` for
/// mixed states.
pub fn moment_set(observables: &[Observable], state: &QuantumState) -> Result<MomentSet> {
    if observables.is_empty() {
        return Err(UrError::input("moment set of an empty observable list"));
    }
    let refs: Vec<&Observable> = observables.iter().collect();
    check_dims(&refs, &[state])?;
    let n = observables.len();
    // second[(i, j)] = <X_i X_j>
    let mut second = CMatrix::zeros(n, n);
    let mut means = Vec::with_capacity(n);
    match state {
        QuantumState::Pure(psi) => {
            let images: Vec<CVector> = observables.iter().map(|x| x.apply(psi.amplitudes())).collect();
            for (i, x) in images.iter().enumerate() {
                means.push(psi.amplitudes().dotc(x));
                for (j, y) in images.iter().enumerate() {
                    second[(i, j)] = x.dotc(y);
                }
            }
        }
        QuantumState::Mixed(rho) => {
            for (i, x) in observables.iter().enumerate() {
                means.push(rho.expect(x.matrix()));
                for (j, y) in observables.iter().enumerate() {
                    second[(i, j)] = rho.expect(&(x.matrix() * y.matrix()));
                }
            }
        }
    }
    let scale = second.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    for m in &means {
        residue_check("mean value", m.im.abs(), scale.sqrt())?;
    }
    let means: Vec<f64> = means.iter().map(|m| m.re).collect();
    let mut sigma = RMatrix::zeros(n, n);
    let mut c = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (xy, yx) = (second[(i, j)], second[(j, i)]);
            let sym = (xy + yx) * 0.5;
            residue_check("symmetrized product", sym.im.abs(), scale)?;
            sigma[(i, j)] = sym.re - means[i] * means[j];
            // -(i/2)(xy - yx)
            let comm = (xy - yx) * Complex64::new(0.0, -0.5);
            residue_check("commutator", comm.im.abs(), scale)?;
            c[(i, j)] = comm.re;
        }
    }
    Ok(MomentSet { means, sigma, c })
}

fn names(observables: &[Observable]) -> Vec<String> {
    observables.iter().map(|o| o.name().to_string()).collect()
}

/// `R = sigma + i C`, certified positive semidefinite.
pub fn robertson_matrix(observables: &[Observable], state: &QuantumState) -> Result<GramUR> {
    let ms = moment_set(observables, state)?;
    let matrix = ms.robertson();
    if !matrix.is_psd(&Tolerances::default())? {
        return Err(UrError::Numeric("Robertson matrix failed its positivity audit".into()));
    }
    Ok(GramUR {
        kind: GramKind::Robertson,
        matrix,
        provenance: Provenance {
            observables: names(observables),
            states: vec![state.kind_label().to_string()],
        },
    })
}

fn pure_slots<'a>(observables: &[Observable], states: &'a [QuantumState]) -> Result<Vec<&'a PureState>> {
    if observables.is_empty() || observables.len() != states.len() {
        return Err(UrError::input(format!(
            "need one state per observable, got {} observables and {} states",
            observables.len(),
            states.len()
        )));
    }
    let orefs: Vec<&Observable> = observables.iter().collect();
    let srefs: Vec<&QuantumState> = states.iter().collect();
    check_dims(&orefs, &srefs)?;
    states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.as_pure().ok_or_else(|| {
                UrError::Unsupported(format!("Gram construction needs pure states; slot #{k} is mixed"))
            })
        })
        .collect()
}

/// `(X_k - <psi_k|X_k|psi_k>) |psi_k>`.
pub fn centered_image(x: &Observable, psi: &PureState) -> CVector {
    let v = x.apply(psi.amplitudes());
    let mean = psi.amplitudes().dotc(&v).re;
    v - psi.amplitudes() * Complex64::new(mean, 0.0)
}

/// Gram matrix of the centered vectors `(X_k - <X_k>_k)|psi_k>`.
pub fn gram_centered(observables: &[Observable], states: &[QuantumState]) -> Result<GramUR> {
    let slots = pure_slots(observables, states)?;
    let vectors: Vec<CVector> = observables.iter().zip(&slots).map(|(x, psi)| centered_image(x, psi)).collect();
    Ok(GramUR {
        kind: GramKind::Centered,
        matrix: gram(&vectors)?,
        provenance: Provenance {
            observables: names(observables),
            states: slots.iter().map(|_| "pure".to_string()).collect(),
        },
    })
}

/// Gram matrix of `X_k |psi_k>`.
pub fn gram_raw(observables: &[Observable], states: &[QuantumState]) -> Result<GramUR> {
    let slots = pure_slots(observables, states)?;
    let vectors: Vec<CVector> = observables.iter().zip(&slots).map(|(x, psi)| x.apply(psi.amplitudes())).collect();
    Ok(GramUR {
        kind: GramKind::Raw,
        matrix: gram(&vectors)?,
        provenance: Provenance {
            observables: names(observables),
            states: slots.iter().map(|_| "pure".to_string()).collect(),
        },
    })
}

/// Gram matrix of `X v_k` for one observable and arbitrary (unnormalized)
/// vectors, as produced by [`transform_states`].
pub fn gram_raw_vectors(x: &Observable, vectors: &[CVector]) -> Result<HermitianMatrix> {
    if let Some(bad) = vectors.iter().position(|v| v.len() != x.dim()) {
        return Err(UrError::input(format!("vector #{bad} does not match observable dimension")));
    }
    let images: Vec<CVector> = vectors.iter().map(|v| x.apply(v)).collect();
    gram(&images)
}

#[derive(Debug, Clone)]
pub struct TransformedObservables {
    pub observables: Vec<Observable>,
    pub determinant: f64,
}

impl TransformedObservables {
    pub fn is_singular(&self) -> bool {
        self.determinant.abs() <= 1e-12
    }
}

/// `X'_i = sum_j Lambda_ij X_j`.
pub fn transform_observables(lambda: &RMatrix, observables: &[Observable]) -> Result<TransformedObservables> {
    let n = observables.len();
    if lambda.nrows() != n || lambda.ncols() != n {
        return Err(UrError::input(format!(
            "transformation is {}x{}, expected {n}x{n}",
            lambda.nrows(),
            lambda.ncols()
        )));
    }
    let refs: Vec<&Observable> = observables.iter().collect();
    let d = check_dims(&refs, &[])?;
    let out = (0..n)
        .map(|i| {
            let m = observables
                .iter()
                .enumerate()
                .fold(CMatrix::zeros(d, d), |acc, (j, x)| acc + x.matrix().scale(lambda[(i, j)]));
            Observable::from_hermitian(format!("X'{i}"), HermitianMatrix::from_hermitian_unchecked(m))
        })
        .collect();
    Ok(TransformedObservables {
        observables: out,
        determinant: lambda.determinant(),
    })
}

#[derive(Debug, Clone)]
pub struct TransformedStates {
    /// Raw linear images, not renormalized.
    pub vectors: Vec<CVector>,
    pub determinant: Complex64,
}

impl TransformedStates {
    pub fn is_singular(&self) -> bool {
        self.determinant.norm() <= 1e-12
    }
}

/// `psi'_i = sum_k U*_ik psi_k`, so that the raw Gram matrix of one observable
/// transforms as `U G U^dagger`.
pub fn transform_states(u: &CMatrix, states: &[PureState]) -> Result<TransformedStates> {
    let m = states.len();
    if m == 0 || u.nrows() != m || u.ncols() != m {
        return Err(UrError::input(format!(
            "transformation is {}x{}, expected {m}x{m}",
            u.nrows(),
            u.ncols()
        )));
    }
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(UrError::input("states have different dimensions"));
    }
    let vectors = (0..m)
        .map(|i| {
            states
                .iter()
                .enumerate()
                .fold(CVector::zeros(d), |acc, (k, s)| acc + s.amplitudes() * u[(i, k)].conj())
        })
        .collect();
    Ok(TransformedStates {
        vectors,
        determinant: u.determinant(),
    })
}
