//! Finite-dimensional Hermitian matrix machinery.
//!
//! Gram matrices, positivity, the real/imaginary split of a Hermitian
//! matrix, characteristic coefficients (sums of principal minors) and the
//! two characteristic-coefficient gaps over sums of positive semidefinite
//! matrices.

use nalgebra::{ComplexField, DMatrix, DVector, Hessenberg, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, UrError};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Largest matrix order accepted by [`char_coeffs`].
pub const MAX_CHAR_ORDER: usize = 32;

/// Above this order the characteristic coefficients come from the
/// Hessenberg characteristic polynomial instead of minor enumeration.
pub const MINOR_ENUMERATION_LIMIT: usize = 8;

/// Numerical tolerances shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance, scaled by the Frobenius norm.
    pub herm: f64,
    /// Relative eigenvalue floor for positive semidefiniteness.
    pub psd: f64,
    /// Relative slack floor, scaled by `max(|lhs|, |rhs|, 1)`.
    pub slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-10,
            slack: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn scale(lhs: f64, rhs: f64) -> f64 {
        lhs.abs().max(rhs.abs()).max(1.0)
    }

    /// Smallest slack still counted as "holds".
    pub fn slack_floor(&self, lhs: f64, rhs: f64) -> f64 {
        -self.slack * Self::scale(lhs, rhs)
    }

    pub fn is_saturated(&self, lhs: f64, rhs: f64) -> bool {
        (lhs - rhs).abs() <= self.slack * Self::scale(lhs, rhs)
    }

    pub fn psd_floor(&self, norm: f64) -> f64 {
        -self.psd * norm.max(1.0)
    }
}

/// A complex matrix that is Hermitian within tolerance. The stored matrix is
/// symmetrized, so it is exactly Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().herm)
    }

    pub fn with_tolerance(m: CMatrix, rel_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(UrError::input(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(UrError::input("matrix has dimension 0"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(UrError::input("matrix has non-finite entries"));
        }
        let norm = m.norm();
        let adjoint = m.adjoint();
        let defect = (&m - &adjoint).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if defect > rel_tol * norm {
            return Err(UrError::input(format!(
                "matrix is not Hermitian: max |M - M^dagger| = {defect:.3e}"
            )));
        }
        Ok(Self((m + adjoint).scale(0.5)))
    }

    /// Wraps a matrix the caller has built Hermitian by construction.
    pub(crate) fn from_hermitian_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn from_real_symmetric(s: &RMatrix) -> Result<Self> {
        Self::new(s.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Eigenvalues in ascending order together with the eigenvector columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        let eig = SymmetricEigen::try_new(self.0.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| UrError::Numeric("Hermitian eigen-solver did not converge".into()))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.0)
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    pub fn is_psd(&self, tol: &Tolerances) -> Result<bool> {
        let values = self.eigenvalues()?;
        let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(values[0] >= tol.psd_floor(norm))
    }

    /// Checks positivity and clamps the slightly negative eigenvalues to 0.
    /// `index` names the matrix in the error.
    pub fn certify_psd(&self, tol: &Tolerances, index: usize) -> Result<HermitianMatrix> {
        let (values, vectors) = self.eigen()?;
        let norm = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if values[0] < tol.psd_floor(norm) {
            return Err(UrError::NotPsd {
                index,
                reason: format!("minimum eigenvalue {:.3e} (norm {norm:.3e})", values[0]),
            });
        }
        if values[0] >= 0.0 {
            return Ok(self.clone());
        }
        let clamped = DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v.max(0.0), 0.0)),
        );
        let rebuilt = &vectors * CMatrix::from_diagonal(&clamped) * vectors.adjoint();
        Ok(Self((&rebuilt + rebuilt.adjoint()).scale(0.5)))
    }

    /// `U H U^dagger`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<HermitianMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(UrError::input("conjugating matrix has the wrong shape"));
        }
        let m = u * &self.0 * u.adjoint();
        Ok(Self((&m + m.adjoint()).scale(0.5)))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        if self.dim() != other.dim() {
            return Err(UrError::input("dimension mismatch in Hermitian sum"));
        }
        Ok(Self(&self.0 + &other.0))
    }
}

/// Real symmetric and real antisymmetric parts of a Hermitian matrix,
/// `H = S + iA`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymAsymPair {
    pub s: RMatrix,
    pub a: RMatrix,
}

impl SymAsymPair {
    pub fn recombine(&self) -> CMatrix {
        CMatrix::from_fn(self.s.nrows(), self.s.ncols(), |i, j| {
            Complex64::new(self.s[(i, j)], self.a[(i, j)])
        })
    }
}

/// Characteristic coefficients `C_1 .. C_n` of an `n x n` matrix, with the
/// implicit `C_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffVector {
    coeffs: Vec<f64>,
}

impl CharCoeffVector {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `C_r`, for `0 <= r <= n`.
    pub fn order(&self, r: usize) -> f64 {
        match r {
            0 => 1.0,
            r => self.coeffs[r - 1],
        }
    }

    /// `C_1 .. C_n`.
    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Gram matrix `G_ij = <v_i|v_j>`; vectors need not be normalized.
pub fn gram(vectors: &[CVector]) -> Result<HermitianMatrix> {
    let first = vectors
        .first()
        .ok_or_else(|| UrError::input("Gram matrix of an empty vector list"))?;
    if let Some(bad) = vectors.iter().position(|v| v.len() != first.len()) {
        return Err(UrError::input(format!(
            "vector #{bad} has dimension {}, expected {}",
            vectors[bad].len(),
            first.len()
        )));
    }
    let n = vectors.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = Complex64::new(vectors[i].norm_squared(), 0.0);
        for j in (i + 1)..n {
            let z = vectors[i].dotc(&vectors[j]);
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    Ok(HermitianMatrix::from_hermitian_unchecked(g))
}

pub fn split(h: &HermitianMatrix) -> SymAsymPair {
    let m = h.matrix();
    SymAsymPair {
        s: m.map(|z| z.re),
        a: m.map(|z| z.im),
    }
}

/// Smallest eigenvalue; `H >= 0` iff this is at least
/// `-tol_psd * max(1, ||H||)`.
pub fn min_eigenvalue(h: &HermitianMatrix) -> Result<f64> {
    Ok(h.eigenvalues()?[0])
}

fn check_char_shape(n: usize, m: usize) -> Result<()> {
    if n != m {
        return Err(UrError::input(format!("characteristic coefficients of a {n}x{m} matrix")));
    }
    if n == 0 || n > MAX_CHAR_ORDER {
        return Err(UrError::input(format!(
            "characteristic coefficients need 1 <= n <= {MAX_CHAR_ORDER}, got {n}"
        )));
    }
    Ok(())
}

/// Characteristic coefficients, `det(M - x) = sum_r C_r (-x)^(n-r)`.
///
/// Sums principal minors up to order 8 and uses the Hessenberg
/// characteristic polynomial above. Complex coefficients are reduced to
/// their real parts, which is exact for real and Hermitian input.
pub fn char_coeffs<T>(m: &DMatrix<T>) -> Result<CharCoeffVector>
where
    T: ComplexField<RealField = f64> + Copy,
{
    check_char_shape(m.nrows(), m.ncols())?;
    if m.nrows() <= MINOR_ENUMERATION_LIMIT {
        char_coeffs_by_minors(m)
    } else {
        char_coeffs_by_hessenberg(m)
    }
}

/// `C_r` as the sum of all `r x r` principal minors.
pub fn char_coeffs_by_minors<T>(m: &DMatrix<T>) -> Result<CharCoeffVector>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = m.nrows();
    check_char_shape(n, m.ncols())?;
    if n > 16 {
        return Err(UrError::input("minor enumeration is limited to n <= 16"));
    }
    let mut sums = vec![T::zero(); n];
    let mut idx = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        idx.clear();
        idx.extend((0..n).filter(|&k| mask & (1 << k) != 0));
        let r = idx.len();
        let minor = DMatrix::from_fn(r, r, |i, j| m[(idx[i], idx[j])]);
        sums[r - 1] += minor.determinant();
    }
    Ok(CharCoeffVector::from_coeffs(sums.into_iter().map(|z| z.real()).collect()))
}

/// Characteristic coefficients from the characteristic polynomial of the
/// unitarily similar upper Hessenberg form.
pub fn char_coeffs_by_hessenberg<T>(m: &DMatrix<T>) -> Result<CharCoeffVector>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let n = m.nrows();
    check_char_shape(n, m.ncols())?;
    let h = Hessenberg::new(m.clone()).h();
    // polys[k] holds det(x - H_k) for the leading k x k block, lowest degree first.
    let mut polys: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    polys.push(vec![T::one()]);
    for k in 1..=n {
        let prev = &polys[k - 1];
        let mut p = vec![T::zero(); k + 1];
        let hkk = h[(k - 1, k - 1)];
        for (d, &c) in prev.iter().enumerate() {
            p[d + 1] += c;
            p[d] -= hkk * c;
        }
        let mut sub = T::one();
        for i in (1..k).rev() {
            sub *= h[(i, i - 1)];
            let factor = h[(i - 1, k - 1)] * sub;
            for (d, &c) in polys[i - 1].iter().enumerate() {
                p[d] -= factor * c;
            }
        }
        polys.push(p);
    }
    let p = &polys[n];
    let coeffs = (1..=n)
        .map(|r| {
            let c = p[n - r].real();
            if r % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    Ok(CharCoeffVector::from_coeffs(coeffs))
}

fn certified_sum_inputs(h_list: &[HermitianMatrix], r: usize, tol: &Tolerances) -> Result<Vec<HermitianMatrix>> {
    let first = h_list
        .first()
        .ok_or_else(|| UrError::input("empty matrix list"))?;
    let n = first.dim();
    if let Some(bad) = h_list.iter().position(|h| h.dim() != n) {
        return Err(UrError::input(format!(
            "matrix #{bad} has dimension {}, expected {n}",
            h_list[bad].dim()
        )));
    }
    if r == 0 || r > n {
        return Err(UrError::input(format!("order r = {r} outside 1..={n}")));
    }
    h_list
        .iter()
        .enumerate()
        .map(|(i, h)| h.certify_psd(tol, i))
        .collect()
}

fn sum_all(hs: &[HermitianMatrix]) -> CMatrix {
    let n = hs[0].dim();
    hs.iter().fold(CMatrix::zeros(n, n), |acc, h| acc + h.matrix())
}

/// `(C_r(S_1 + .. + S_m), C_r(A_1 + .. + A_m))` for `H_mu = S_mu + i A_mu`.
pub fn entangled_char_sides(h_list: &[HermitianMatrix], r: usize, tol: &Tolerances) -> Result<(f64, f64)> {
    let hs = certified_sum_inputs(h_list, r, tol)?;
    let total = HermitianMatrix::from_hermitian_unchecked(sum_all(&hs));
    let parts = split(&total);
    Ok((char_coeffs(&parts.s)?.order(r), char_coeffs(&parts.a)?.order(r)))
}

/// `C_r(sum S_mu) - C_r(sum A_mu)`, nonnegative for psd inputs.
pub fn entangled_char_gap(h_list: &[HermitianMatrix], r: usize, tol: &Tolerances) -> Result<f64> {
    let (lhs, rhs) = entangled_char_sides(h_list, r, tol)?;
    Ok(lhs - rhs)
}

/// `(C_r(sum H_mu), sum C_r(H_mu))`.
pub fn superadditive_char_sides(h_list: &[HermitianMatrix], r: usize, tol: &Tolerances) -> Result<(f64, f64)> {
    let hs = certified_sum_inputs(h_list, r, tol)?;
    let lhs = char_coeffs(&sum_all(&hs))?.order(r);
    let mut rhs = 0.0;
    for h in &hs {
        rhs += char_coeffs(h.matrix())?.order(r);
    }
    Ok((lhs, rhs))
}

/// `C_r(sum H_mu) - sum C_r(H_mu)`, nonnegative for psd inputs and zero at `r = 1`.
pub fn superadditive_char_gap(h_list: &[HermitianMatrix], r: usize, tol: &Tolerances) -> Result<f64> {
    let (lhs, rhs) = superadditive_char_sides(h_list, r, tol)?;
    Ok(lhs - rhs)
}

/// Elementary symmetric polynomials `e_1 .. e_n` of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (k, &v) in values.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e.remove(0);
    e
}
