//! Seeded random ensembles. Every sampler is a pure function of its seed;
//! ChaCha8 streams are portable, so outputs are reproducible bit-for-bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, PureState, QuantumState};
use crate::kernel::{CMatrix, CVector, HermitianMatrix, RMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Pure,
    Density,
    Hermitian,
    Psd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampled {
    State(QuantumState),
    Matrix(HermitianMatrix),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mix of a base seed and an index, for per-instance streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    // filled row by row so the stream order does not depend on storage order
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

pub fn complex_gaussian_vector(dim: usize, seed: u64) -> CVector {
    let mut r = rng(seed);
    DVector::from_iterator(dim, (0..dim).map(|_| complex_normal(&mut r)))
}

/// Haar-random unit vector.
pub fn sample_pure(dim: usize, seed: u64) -> PureState {
    PureState::normalized(complex_gaussian_vector(dim, seed)).expect("Gaussian vector is nonzero")
}

/// Ginibre-induced density matrix `G G^dagger / Tr(G G^dagger)` of the given rank.
pub fn sample_density_rank(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
    let g = ginibre(dim, rank.clamp(1, dim), &mut rng(seed));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m.unscale(tr);
    DensityMatrix {
        matrix: HermitianMatrix::from_hermitian_unchecked((&m + m.adjoint()).scale(0.5)),
    }
}

pub fn sample_density(dim: usize, seed: u64) -> DensityMatrix {
    sample_density_rank(dim, dim, seed)
}

/// `(M + M^dagger) / 2` with `M` Ginibre.
pub fn sample_hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    let m = ginibre(dim, dim, &mut rng(seed));
    HermitianMatrix::from_hermitian_unchecked((&m + m.adjoint()).scale(0.5))
}

/// `M M^dagger` with `M` Ginibre.
pub fn sample_psd(dim: usize, seed: u64) -> HermitianMatrix {
    sample_psd_rank(dim, dim, seed)
}

/// `M M^dagger` with `M` a `dim x rank` Ginibre matrix.
pub fn sample_psd_rank(dim: usize, rank: usize, seed: u64) -> HermitianMatrix {
    let g = ginibre(dim, rank.clamp(1, dim), &mut rng(seed));
    let m = &g * g.adjoint();
    HermitianMatrix::from_hermitian_unchecked((&m + m.adjoint()).scale(0.5))
}

/// Haar unitary from the phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    let qr = ginibre(n, n, &mut rng(seed)).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Haar orthogonal matrix.
pub fn haar_orthogonal(n: usize, seed: u64) -> RMatrix {
    let mut r = rng(seed);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = StandardNormal.sample(&mut r);
        }
    }
    let qr = m.qr();
    let (q, rr) = (qr.q(), qr.r());
    let mut o = q;
    for j in 0..n {
        if rr[(j, j)] < 0.0 {
            for i in 0..n {
                o[(i, j)] = -o[(i, j)];
            }
        }
    }
    o
}

pub fn sample(kind: SampleKind, dim: usize, seed: u64) -> Sampled {
    match kind {
        SampleKind::Pure => Sampled::State(QuantumState::Pure(sample_pure(dim, seed))),
        SampleKind::Density => Sampled::State(QuantumState::Mixed(sample_density(dim, seed))),
        SampleKind::Hermitian => Sampled::Matrix(sample_hermitian(dim, seed)),
        SampleKind::Psd => Sampled::Matrix(sample_psd(dim, seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::min_eigenvalue;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(sample(SampleKind::Pure, 4, 7), sample(SampleKind::Pure, 4, 7));
        assert_ne!(sample(SampleKind::Pure, 4, 7), sample(SampleKind::Pure, 4, 8));
        assert_eq!(sample_density(5, 1), sample_density(5, 1));
    }

    #[test]
    fn density_is_valid() {
        for seed in 0..20 {
            let rho = sample_density(4, seed);
            let tr = rho.matrix().trace();
            assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
            let h = HermitianMatrix::new(rho.matrix().clone()).unwrap();
            assert!(min_eigenvalue(&h).unwrap() >= -1e-12);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn hermitian_and_psd_shapes() {
        let h = sample_hermitian(3, 11);
        assert_eq!(h.matrix(), &h.matrix().adjoint());
        let p = sample_psd_rank(5, 2, 3);
        let ev = p.eigenvalues().unwrap();
        assert!(ev[0].abs() < 1e-12 && ev[2].abs() < 1e-12 && ev[3] > 1e-6);
    }

    #[test]
    fn haar_matrices_are_unitary() {
        let u = haar_unitary(4, 5);
        let defect = (u.adjoint() * &u - CMatrix::identity(4, 4)).norm();
        assert!(defect < 1e-13);
        let o = haar_orthogonal(5, 5);
        assert!((o.transpose() * &o - RMatrix::identity(5, 5)).norm() < 1e-13);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::BTreeSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
