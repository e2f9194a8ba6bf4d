//! States and observables on truncated and finite Hilbert spaces.
//!
//! The oscillator lives in the number basis `|0>, .., |N-1>` with
//! `a|n> = sqrt(n)|n-1>`, `q = (a + a^dagger)/sqrt(2)` and
//! `p = (a - a^dagger)/(i sqrt(2))`, so `[q, p] = i` away from the top level.

pub mod sample;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};
use crate::kernel::{CMatrix, CVector, HermitianMatrix, Tolerances};

/// Maximum weight a Gaussian state may have above level `N - 3`.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

pub const DEFAULT_HILBERT_DIM: usize = 64;

const NORM_TOL: f64 = 1e-12;

/// Truncation dimension of the oscillator, `2 <= N <= 512`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct HilbertDim(usize);

impl HilbertDim {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=512).contains(&n) {
            return Err(UrError::input(format!("Hilbert dimension {n} outside 2..=512")));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for HilbertDim {
    fn default() -> Self {
        Self(DEFAULT_HILBERT_DIM)
    }
}

impl TryFrom<usize> for HilbertDim {
    type Error = UrError;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<HilbertDim> for usize {
    fn from(d: HilbertDim) -> usize {
        d.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    name: String,
    matrix: HermitianMatrix,
}

impl Observable {
    pub fn new(name: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        let name = name.into();
        let matrix = HermitianMatrix::new(matrix)
            .map_err(|e| UrError::input(format!("observable {name}: {e}")))?;
        Ok(Self { name, matrix })
    }

    pub fn from_hermitian(name: impl Into<String>, matrix: HermitianMatrix) -> Self {
        Self {
            name: name.into(),
            matrix,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        self.matrix() * v
    }
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(UrError::input("state dimension must be at least 2"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(UrError::input("state has non-finite amplitudes"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(UrError::input(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(UrError::input("cannot normalize a zero or non-finite vector"));
        }
        Self::new(amplitudes.unscale(norm))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `<psi|A|psi>`.
    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        self.amplitudes.dotc(&(a * &self.amplitudes))
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            matrix: HermitianMatrix::from_hermitian_unchecked((&m + m.adjoint()).scale(0.5)),
        }
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
}

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let matrix = HermitianMatrix::new(m)?;
        if matrix.dim() < 2 {
            return Err(UrError::input("state dimension must be at least 2"));
        }
        let trace = matrix.matrix().trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(UrError::input(format!("density matrix trace {trace} differs from 1")));
        }
        if !matrix.is_psd(&Tolerances::default())? {
            return Err(UrError::input("density matrix is not positive semidefinite"));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    /// `Tr(rho A)`.
    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        let rho = self.matrix();
        let n = rho.nrows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += rho[(i, j)] * a[(j, i)];
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.dim(),
            QuantumState::Mixed(d) => d.dim(),
        }
    }

    pub fn expect(&self, a: &CMatrix) -> Complex64 {
        match self {
            QuantumState::Pure(p) => p.expect(a),
            QuantumState::Mixed(d) => d.expect(a),
        }
    }

    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            QuantumState::Pure(p) => Some(p),
            QuantumState::Mixed(_) => None,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure(_))
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            QuantumState::Pure(_) => "pure",
            QuantumState::Mixed(_) => "mixed",
        }
    }
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(d: DensityMatrix) -> Self {
        QuantumState::Mixed(d)
    }
}

/// Truncated annihilation operator.
pub fn annihilation(dim: HilbertDim) -> CMatrix {
    let n = dim.get();
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// Dimensionless quadratures `(q, p)`.
pub fn fock_operators(dim: HilbertDim) -> (Observable, Observable) {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + &ad).scale(s);
    let p = (&a - &ad) * Complex64::new(0.0, -s);
    (
        Observable::from_hermitian("q", HermitianMatrix::from_hermitian_unchecked(q)),
        Observable::from_hermitian("p", HermitianMatrix::from_hermitian_unchecked(p)),
    )
}

fn symmetrized(m: CMatrix) -> HermitianMatrix {
    HermitianMatrix::from_hermitian_unchecked((&m + m.adjoint()).scale(0.5))
}

/// `p^2 - q^2` built from the truncated quadratures.
pub fn quad_plus(dim: HilbertDim) -> Observable {
    let (q, p) = fock_operators(dim);
    let m = p.matrix() * p.matrix() - q.matrix() * q.matrix();
    Observable::from_hermitian("p2-q2", symmetrized(m))
}

/// `pq + qp` built from the truncated quadratures.
pub fn quad_mix(dim: HilbertDim) -> Observable {
    let (q, p) = fock_operators(dim);
    let m = p.matrix() * q.matrix() + q.matrix() * p.matrix();
    Observable::from_hermitian("pq+qp", symmetrized(m))
}

/// Angular momentum matrices for spin `j` in the basis `m = j, j-1, .., -j`.
pub fn spin_operators(j: f64) -> Result<(Observable, Observable, Observable)> {
    let two_j = 2.0 * j;
    if !(two_j >= 1.0 && (two_j - two_j.round()).abs() < 1e-12) {
        return Err(UrError::input(format!("spin j = {j} is not a positive half-integer")));
    }
    let dim = two_j.round() as usize + 1;
    if dim > 64 {
        return Err(UrError::input(format!("spin j = {j} exceeds dimension 64")));
    }
    let m_of = |k: usize| j - k as f64;
    let mut jz = CMatrix::zeros(dim, dim);
    let mut jplus = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        jz[(k, k)] = Complex64::new(m_of(k), 0.0);
        if k + 1 < dim {
            // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, with |m+1> one row above
            let m = m_of(k + 1);
            jplus[(k, k + 1)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus).scale(0.5);
    let jy = (&jplus - &jminus) * Complex64::new(0.0, -0.5);
    Ok((
        Observable::from_hermitian("Jx", HermitianMatrix::from_hermitian_unchecked(jx)),
        Observable::from_hermitian("Jy", HermitianMatrix::from_hermitian_unchecked(jy)),
        Observable::from_hermitian("Jz", HermitianMatrix::from_hermitian_unchecked(jz)),
    ))
}

/// Parameters of a displaced squeezed vacuum `D(alpha) S(r e^{i phi}) |0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    #[serde(with = "crate::serde_util::complex")]
    pub alpha: Complex64,
    pub r: f64,
    pub phi: f64,
}

impl GaussianParams {
    pub fn coherent(alpha: Complex64) -> Self {
        Self { alpha, r: 0.0, phi: 0.0 }
    }

    pub fn squeezed(alpha: Complex64, r: f64, phi: f64) -> Self {
        Self { alpha, r, phi }
    }
}

/// Number-basis amplitudes of `D(alpha) S(xi)|0>` for levels `0..len`.
///
/// The state is annihilated by `(a - alpha) cosh r + (a^dagger - alpha^*) e^{i phi} sinh r`,
/// which gives a three-term forward recurrence seeded by `<0|D S|0>`.
fn gaussian_amplitudes(params: &GaussianParams, len: usize) -> Vec<Complex64> {
    let GaussianParams { alpha, r, phi } = *params;
    let (ch, sh) = (r.cosh(), r.sinh());
    let rot = Complex64::from_polar(1.0, phi);
    let gamma = alpha * ch + alpha.conj() * rot * sh;
    let c0 = (-0.5 * alpha.norm_sqr() - 0.5 * alpha.conj() * alpha.conj() * rot * r.tanh()).exp() / ch.sqrt();
    let mut c = Vec::with_capacity(len);
    c.push(c0);
    for n in 0..len.saturating_sub(1) {
        let prev = if n == 0 { Complex64::new(0.0, 0.0) } else { c[n - 1] };
        let next = (gamma * c[n] - rot * sh * (n as f64).sqrt() * prev) / (ch * ((n + 1) as f64).sqrt());
        c.push(next);
    }
    c
}

/// Gaussian state truncated to `dim` levels and renormalized. Fails when the
/// weight above level `dim - 3` exceeds `tail_tol`.
pub fn gaussian_state(params: &GaussianParams, dim: HilbertDim, tail_tol: f64) -> Result<PureState> {
    let n = dim.get();
    if !(params.alpha.re.is_finite() && params.alpha.im.is_finite() && params.r.is_finite() && params.phi.is_finite()) {
        return Err(UrError::input("non-finite Gaussian parameters"));
    }
    let mut ext = (2 * n).max(n + 64);
    let amps = loop {
        let amps = gaussian_amplitudes(params, ext);
        let top: f64 = amps[ext - 8..].iter().map(|z| z.norm_sqr()).sum();
        if top < 1e-40 || ext >= 1 << 16 {
            break amps;
        }
        ext *= 2;
    };
    // cumulative weight from the top down: tail_from[k] = sum_{l >= k} |c_l|^2
    let mut tail_from = vec![0.0; amps.len() + 1];
    for k in (0..amps.len()).rev() {
        tail_from[k] = tail_from[k + 1] + amps[k].norm_sqr();
    }
    let level = n - 3;
    let tail = tail_from[level + 1];
    if !tail.is_finite() || tail > tail_tol {
        let required_dim = (0..amps.len())
            .find(|&k| tail_from[k + 1] <= tail_tol)
            .map_or(amps.len(), |k| k + 3);
        return Err(UrError::Truncation {
            tail,
            level,
            tolerance: tail_tol,
            required_dim,
        });
    }
    PureState::normalized(DVector::from_column_slice(&amps[..n]))
}

pub fn coherent_state(alpha: Complex64, dim: HilbertDim) -> Result<PureState> {
    gaussian_state(&GaussianParams::coherent(alpha), dim, DEFAULT_TAIL_TOL)
}

pub fn squeezed_state(alpha: Complex64, r: f64, phi: f64, dim: HilbertDim) -> Result<PureState> {
    gaussian_state(&GaussianParams::squeezed(alpha, r, phi), dim, DEFAULT_TAIL_TOL)
}

/// Number state `|k>`.
pub fn fock_state(k: usize, dim: HilbertDim) -> Result<PureState> {
    if k >= dim.get() {
        return Err(UrError::input(format!("level {k} outside dimension {}", dim.get())));
    }
    let mut v = CVector::zeros(dim.get());
    v[k] = Complex64::new(1.0, 0.0);
    PureState::new(v)
}
