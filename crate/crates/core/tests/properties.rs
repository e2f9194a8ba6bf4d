use num_complex::Complex64;
use proptest::prelude::*;

use urlab::analysis::{divergence, minimize_slack, Budget, MinimizeProblem, Slot};
use urlab::catalog::{characteristic, evaluate, robertson, type_1_2, type_2_2, UrId, Variant};
use urlab::kernel::{RMatrix, Tolerances};
use urlab::moments::{moment_set, transform_observables};
use urlab::quantum::sample::{derive_seed, haar_orthogonal, sample_density, sample_hermitian, sample_pure};
use urlab::quantum::{fock_operators, squeezed_state, GaussianParams, HilbertDim, Observable, QuantumState};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn observables(n: usize, dim: usize, seed: u64) -> Vec<Observable> {
    (0..n as u64)
        .map(|k| Observable::from_hermitian(format!("X{k}"), sample_hermitian(dim, derive_seed(seed, k))))
        .collect()
}

fn state(dim: usize, seed: u64, mixed: bool) -> QuantumState {
    if mixed {
        sample_density(dim, seed).into()
    } else {
        sample_pure(dim, seed).into()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn robertson_slack_scales_with_det_squared(
        seed in any::<u64>(),
        n in 2usize..=4,
        dim in 2usize..=7,
        mixed in any::<bool>(),
        entries in proptest::collection::vec(-1.5f64..1.5, 16),
    ) {
        let xs = observables(n, dim, seed);
        let rho = state(dim, seed ^ 0xabc, mixed);
        let lam = RMatrix::from_fn(n, n, |i, j| entries[i * 4 + j]);
        let t = transform_observables(&lam, &xs).unwrap();
        let base = robertson(&xs, &rho, &tol()).unwrap();
        let moved = robertson(&t.observables, &rho, &tol()).unwrap();
        let factor = t.determinant * t.determinant;
        let size = base.lhs.abs().max(base.rhs.abs()).max(1.0) * factor.max(1.0);
        prop_assert!((moved.slack - factor * base.slack).abs() <= 1e-9 * size);
        if !t.is_singular() {
            prop_assert!(moved.holds());
        }
    }

    #[test]
    fn characteristic_slack_is_orthogonally_invariant(
        seed in any::<u64>(),
        n in 2usize..=5,
        dim in 2usize..=7,
        mixed in any::<bool>(),
    ) {
        let xs = observables(n, dim, seed);
        let rho = state(dim, seed ^ 0x5a5a, mixed);
        let o = haar_orthogonal(n, seed ^ 1);
        let t = transform_observables(&o, &xs).unwrap();
        for r in 1..=n {
            let a = characteristic(&xs, &rho, r, &tol()).unwrap();
            let b = characteristic(&t.observables, &rho, r, &tol()).unwrap();
            let size = a.lhs.abs().max(a.rhs.abs()).max(1.0);
            prop_assert!((a.slack - b.slack).abs() <= 1e-9 * size, "r={r}: {} vs {}", a.slack, b.slack);
        }
    }

    #[test]
    fn saturated_2_2a_implies_2_2b_holds(seed in any::<u64>(), dim in 2usize..=6) {
        let xs = observables(2, dim, seed);
        let (a, b) = (state(dim, seed ^ 7, false), state(dim, seed ^ 8, false));
        let ra = type_2_2(&xs[0], &xs[1], &a, &b, Variant::A, &tol()).unwrap();
        let rb = type_2_2(&xs[0], &xs[1], &a, &b, Variant::B, &tol()).unwrap();
        prop_assert!(ra.holds());
        if ra.saturated {
            prop_assert!(rb.holds());
        }
    }

    #[test]
    fn divergence_is_symmetric_and_nonnegative(
        seed in any::<u64>(),
        dim in 2usize..=8,
        variant_b in any::<bool>(),
    ) {
        let x = &observables(1, dim, seed)[0];
        let (a, b) = (state(dim, seed ^ 3, false), state(dim, seed ^ 4, false));
        let v = if variant_b { Variant::B } else { Variant::A };
        let d12 = divergence(x, &a, &b, v, &tol()).unwrap();
        let d21 = divergence(x, &b, &a, v, &tol()).unwrap();
        prop_assert!(d12 >= 0.0);
        prop_assert!((d12 - d21).abs() <= 1e-9 * d12.max(1.0));
    }

    #[test]
    fn reports_are_real_and_finite(seed in any::<u64>(), dim in 2usize..=6) {
        let xs = observables(3, dim, seed);
        let states: Vec<QuantumState> = (0..3).map(|k| state(dim, seed ^ (k + 100), false)).collect();
        for ur in UrId::catalog() {
            let sig = ur.signature();
            let n = sig.observables.min().max(if ur.has_free_order() { 2 } else { 0 }).min(3);
            let m = sig.states.min().min(3);
            if !sig.observables.admits(n) || !sig.states.admits(m) {
                continue;
            }
            let rep = evaluate(&ur, &xs[..n], &states[..m], &tol()).unwrap();
            prop_assert!(rep.lhs.is_finite() && rep.rhs.is_finite() && rep.slack.is_finite(), "{}", rep.name);
            prop_assert!(rep.holds(), "{} slack {}", rep.name, rep.slack);
        }
    }
}

#[test]
fn moment_set_is_real_with_antisymmetric_commutators() {
    for seed in 0..200u64 {
        let dim = 2 + (seed % 9) as usize;
        let xs = observables(4, dim, seed);
        let ms = moment_set(&xs, &state(dim, seed, seed % 2 == 0)).unwrap();
        for i in 0..4 {
            assert!(ms.variance(i) >= -1e-12);
            for j in 0..4 {
                assert!((ms.covariance(i, j) - ms.covariance(j, i)).abs() <= 1e-12);
                assert!((ms.c[(i, j)] + ms.c[(j, i)]).abs() <= 1e-12);
                assert!(ms.mean_commutator(i, j).re == 0.0);
            }
        }
    }
}

#[test]
fn minimizer_never_reports_a_violation() {
    let dim = HilbertDim::new(64).unwrap();
    let (q, p) = fock_operators(dim);
    for (k, ur) in [UrId::Schrodinger, UrId::ExtendedSchrodinger, UrId::EntangledHeisenberg].into_iter().enumerate() {
        let slots = if ur == UrId::Schrodinger { vec![Slot::Free] } else { vec![Slot::Free, Slot::Free] };
        let res = minimize_slack(&MinimizeProblem {
            ur,
            observables: vec![q.clone(), p.clone()],
            slots,
            dim,
            init: None,
            budget: Budget { max_iterations: 600, restarts: 3 },
            seed: 31 + k as u64,
            tol: tol(),
        })
        .unwrap();
        assert!(res.report.holds(), "{}", res.report.slack);
        assert!(res.slack >= -tol().slack * Tolerances::scale(res.report.lhs, res.report.rhs));
    }
}

/// On Gaussian pairs with `phi = 0`, `d(X; psi_1, psi_2)` for `X` in `{q, p}`
/// vanishes only on the diagonal.
#[test]
fn divergence_vanishes_only_on_the_diagonal() {
    let dim = HilbertDim::new(64).unwrap();
    let (q, p) = fock_operators(dim);
    let axis = |lo: f64, hi: f64, step: f64| -> Vec<f64> {
        let k = ((hi - lo) / step).round() as usize;
        (0..=k).map(|i| lo + step * i as f64).collect()
    };
    let mut params = Vec::new();
    for re in axis(-0.5, 0.5, 0.1) {
        for im in axis(-0.5, 0.5, 0.1) {
            for r in axis(0.0, 0.3, 0.1) {
                params.push(GaussianParams::squeezed(Complex64::new(re, im), r, 0.0));
            }
        }
    }
    // Every 5th point keeps the grid pairwise check affordable.
    let points: Vec<(GaussianParams, QuantumState)> = params
        .iter()
        .step_by(5)
        .map(|g| (*g, squeezed_state(g.alpha, g.r, g.phi, dim).unwrap().into()))
        .collect();
    let mut off_diagonal_zeros = 0usize;
    for x in [&q, &p] {
        for (i, (gi, a)) in points.iter().enumerate() {
            for (gj, b) in points.iter().skip(i) {
                let d = divergence(x, a, b, Variant::A, &tol()).unwrap();
                let same = (gi.alpha - gj.alpha).norm() < 1e-12 && (gi.r - gj.r).abs() < 1e-12;
                if same {
                    assert!(d <= 1e-6, "diagonal d = {d}");
                } else if d <= 1e-6 {
                    off_diagonal_zeros += 1;
                }
            }
        }
    }
    assert_eq!(off_diagonal_zeros, 0);
}

/// The triangle inequality is not claimed for the divergence; this records how
/// often it fails on random triples.
#[test]
fn triangle_inequality_rate_is_reported() {
    let mut failures = 0usize;
    let total = 300usize;
    for seed in 0..total as u64 {
        let dim = 4;
        let x = &observables(1, dim, seed)[0];
        let s: Vec<QuantumState> = (0..3).map(|k| state(dim, derive_seed(seed, k), false)).collect();
        let d = |a: usize, b: usize| divergence(x, &s[a], &s[b], Variant::A, &tol()).unwrap();
        if d(0, 2) > d(0, 1) + d(1, 2) + 1e-12 {
            failures += 1;
        }
    }
    println!("triangle inequality failures: {failures}/{total}");
}

#[test]
fn type_1_2_variants_agree_on_identical_states() {
    for seed in 0..100u64 {
        let dim = 2 + (seed % 7) as usize;
        let x = &observables(1, dim, seed)[0];
        let psi = state(dim, seed ^ 9, false);
        for v in [Variant::A, Variant::B] {
            let rep = type_1_2(x, &psi, &psi, v, &tol()).unwrap();
            assert!(rep.saturated, "{v:?} slack {}", rep.slack);
        }
    }
}
