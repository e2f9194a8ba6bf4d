//! Acceptance suite. One PASS/FAIL line per criterion; exits 1 if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use urlab::analysis::{
    compare_precision, minimize_slack, remark1_audit, universal_scan, Budget, Ensemble, EnsembleSpec, MinimizeProblem, PrecisionMeasure,
    Quadrature, ScanSpec, Slot,
};
use urlab::catalog::{
    characteristic, entangled_heisenberg, extended_schrodinger, lemma2_ur, robertson, schrodinger, type_2_m, type_3_1, Lemma2Flavor, URReport,
    UrId,
};
use urlab::cli::config::RunConfig;
use urlab::cli::run_scan;
use urlab::kernel::{char_coeffs, entangled_char_sides, split, superadditive_char_gap, superadditive_char_sides, HermitianMatrix, RMatrix, Tolerances};
use urlab::moments::{gram_raw_vectors, moment_set, robertson_matrix, transform_observables, transform_states};
use urlab::quantum::sample::{derive_seed, haar_orthogonal, haar_unitary, rng, sample_density, sample_hermitian, sample_psd_rank, sample_pure};
use urlab::quantum::{coherent_state, fock_operators, squeezed_state, GaussianParams, HilbertDim, Observable, QuantumState};

use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn obs(dim: usize, seed: u64) -> Observable {
    Observable::from_hermitian(format!("H{seed}"), sample_hermitian(dim, seed))
}

fn pure(dim: usize, seed: u64) -> QuantumState {
    sample_pure(dim, seed).into()
}

fn mixed(dim: usize, seed: u64) -> QuantumState {
    sample_density(dim, seed).into()
}

/// `|a - b|` measured against the size of every quantity the two reports carry.
fn slack_close(a: &URReport, b_slack: f64, b: &URReport, rel: f64) -> bool {
    let size = [a.lhs, a.rhs, b.lhs, b.rhs, 1.0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (a.slack - b_slack).abs() <= rel * size
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn criterion_1() -> Outcome {
    let dim = HilbertDim::new(128).unwrap();
    let (q, p) = fock_operators(dim);
    let alpha = Complex64::new(0.4, -0.3);
    let mut worst = 0.0f64;
    let mut saturated_at_zero = false;
    for r in [0.0, 0.5, 1.0] {
        let c: QuantumState = coherent_state(alpha, dim).unwrap().into();
        let s: QuantumState = squeezed_state(Complex64::new(0.0, 0.0), r, 0.0, dim).unwrap().into();
        let rep = extended_schrodinger(&q, &p, &c, &s, &tol()).unwrap();
        let want = 0.25 * ((2.0 * r).cosh() - 1.0);
        let err = if want == 0.0 { rep.slack.abs() } else { (rep.slack - want).abs() / want };
        worst = worst.max(err);
        if r == 0.0 {
            saturated_at_zero = rep.saturated;
        }
    }
    outcome(worst <= 1e-6 && saturated_at_zero, format!("worst error {worst:.2e}, saturated at r=0: {saturated_at_zero} (N=128)"))
}

fn criterion_2() -> Outcome {
    let dim = HilbertDim::new(128).unwrap();
    let (q, p) = fock_operators(dim);
    let mut worst = 0.0f64;
    let mut zero_err = f64::INFINITY;
    for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let c: QuantumState = coherent_state(Complex64::new(-0.2, 0.5), dim).unwrap().into();
        let s: QuantumState = squeezed_state(Complex64::new(0.0, 0.0), r, 0.0, dim).unwrap().into();
        let rep = entangled_heisenberg(&q, &p, &c, &s, &tol()).unwrap();
        let err = (2.0 * rep.lhs - 0.5 * (2.0 * r).cosh()).abs();
        worst = worst.max(err);
        if r == 0.0 {
            zero_err = (2.0 * rep.lhs - 2.0 * rep.rhs).abs();
        }
    }
    outcome(worst <= 1e-6 && zero_err <= 1e-8, format!("worst |2 lhs - cosh(2r)/2| {worst:.2e}, equality gap at r=0 {zero_err:.2e}"))
}

fn criterion_3() -> Outcome {
    let spec = ScanSpec {
        size: 10_000,
        seed: 2024,
        ..ScanSpec::default()
    };
    let start = Instant::now();
    let summary = universal_scan(&UrId::catalog(), &spec, &tol()).unwrap();
    let elapsed = start.elapsed();
    let worst = summary
        .results
        .iter()
        .filter_map(|r| r.worst_scaled_slack)
        .fold(f64::INFINITY, f64::min);
    outcome(
        summary.total_violations == 0 && summary.total_errors == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{} relations x 10^4, violations {}, errors {}, worst scaled slack {worst:.2e}, {:.1}s",
            summary.results.len(),
            summary.total_violations,
            summary.total_errors,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    const N: u64 = 1000;
    const REL: f64 = 1e-10;
    let t = tol();
    let mut failures: Vec<&str> = Vec::new();
    let mut check = |name: &'static str, ok: bool| {
        if !ok && !failures.contains(&name) {
            failures.push(name);
        }
    };
    for i in 0..N {
        let seed = derive_seed(404, i);
        let d = 2 + (seed % 11) as usize;
        let (x, y) = (obs(d, seed), obs(d, seed ^ 1));
        let psi = pure(d, seed ^ 2);
        let rho = if i % 2 == 0 { mixed(d, seed ^ 3) } else { psi.clone() };

        let s = schrodinger(&x, &y, &psi, &t).unwrap();
        let e = extended_schrodinger(&x, &y, &psi, &psi, &t).unwrap();
        check("extended_schrodinger(psi, psi) = schrodinger", close(e.lhs, s.lhs, REL) && close(e.rhs, s.rhs, REL));

        let t31 = type_3_1(&x, &y, &y, &psi, &t).unwrap();
        check("type_3_1(Z=Y) slack = 2 schrodinger slack", slack_close(&t31, 2.0 * s.slack, &s, REL));
        let s_rho = schrodinger(&x, &y, &rho, &t).unwrap();

        let psi2 = pure(d, seed ^ 4);
        let m2 = type_2_m(&x, &y, &[psi.clone(), psi2.clone()], &t).unwrap();
        let e2 = extended_schrodinger(&x, &y, &psi, &psi2, &t).unwrap();
        check("type_2_m(m=2) = 2 extended_schrodinger", close(m2.lhs, 2.0 * e2.lhs, REL) && close(m2.rhs, 2.0 * e2.rhs, REL));

        let n = 2 + (seed % 3) as usize;
        let xs: Vec<Observable> = (0..n as u64).map(|k| obs(d, seed ^ (16 + k))).collect();
        let ch = characteristic(&xs, &rho, n, &t).unwrap();
        let ro = robertson(&xs, &rho, &t).unwrap();
        check("characteristic(r=n) = robertson", slack_close(&ch, ro.slack, &ro, REL));

        let r2 = robertson(&[x.clone(), y.clone()], &rho, &t).unwrap();
        check("robertson(n=2) = schrodinger", slack_close(&r2, s_rho.slack, &s_rho, REL));

        let r = 1 + (seed as usize / 7) % n;
        let mats = vec![robertson_matrix(&xs, &rho).unwrap()];
        let l = lemma2_ur(&mats, r, Lemma2Flavor::Entangled, &t).unwrap();
        let c = characteristic(&xs, &rho, r, &t).unwrap();
        check("lemma2_ur(m=1) = characteristic", close(l.lhs, c.lhs, REL) && close(l.rhs, c.rhs, REL));
    }
    if failures.is_empty() {
        outcome(true, "6 reductions x 10^3 instances at 1e-10")
    } else {
        outcome(false, format!("failing: {}", failures.join("; ")))
    }
}

fn criterion_5() -> Outcome {
    const N: u64 = 10_000;
    let t = tol();
    let (mut rur, mut cur, mut la, mut lb, mut first_order) = (0usize, 0usize, 0usize, 0usize, 0.0f64);
    for i in 0..N {
        let seed = derive_seed(505, i);
        let mut g = rng(seed);
        let n = g.random_range(1..=8usize);
        let m = g.random_range(1..=3usize);
        let hs: Vec<HermitianMatrix> = (0..m as u64)
            .map(|k| {
                let rank = g.random_range(1..=n);
                sample_psd_rank(n, rank, derive_seed(seed, k))
            })
            .collect();
        let floor = |a: f64, b: f64| -t.slack * Tolerances::scale(a, b);

        let parts = split(&hs[0]);
        let (ds, da) = (parts.s.determinant(), parts.a.determinant());
        if ds - da < floor(ds, da) {
            rur += 1;
        }
        let (cs, ca) = (char_coeffs(&parts.s).unwrap(), char_coeffs(&parts.a).unwrap());
        for r in 1..=n {
            if cs.order(r) - ca.order(r) < floor(cs.order(r), ca.order(r)) {
                cur += 1;
            }
        }
        for r in 1..=n {
            let (al, ar) = entangled_char_sides(&hs, r, &t).unwrap();
            let (bl, br) = superadditive_char_sides(&hs, r, &t).unwrap();
            if al - ar < floor(al, ar) {
                la += 1;
            }
            if bl - br < floor(bl, br) {
                lb += 1;
            }
        }
        first_order = first_order.max(superadditive_char_gap(&hs, 1, &t).unwrap().abs());
    }
    outcome(
        rur + cur + la + lb == 0 && first_order <= 1e-12,
        format!("violations matRUR {rur}, matCUR {cur}, lemma2a {la}, lemma2b {lb}; max |r=1 gap| {first_order:.1e}"),
    )
}

fn criterion_6() -> (Outcome, String) {
    let ensemble = Ensemble::new(EnsembleSpec::CoherentGrid {
        observable: Quadrature::P,
        dim: 64,
        min: -2.0,
        max: 2.0,
        step: 1.0,
    })
    .unwrap();
    let abs = compare_precision(&UrId::Type12A, &UrId::Type12B, &ensemble, PrecisionMeasure::Absolute, &tol()).unwrap();
    let rel = compare_precision(&UrId::Type12A, &UrId::Type12B, &ensemble, PrecisionMeasure::Relative, &tol()).unwrap();
    let pass = abs.counterexample_a_below_b.is_some() && abs.counterexample_b_below_a.is_some();
    let info = format!(
        "relative measure 1 - rhs/lhs: a<b {}, b<a {}, ties {}",
        rel.a_below_b, rel.b_below_a, rel.ties
    );
    (
        outcome(
            pass,
            format!(
                "absolute slack over {} pairs: a<b {}, b<a {}, ties {}",
                abs.ensemble_size, abs.a_below_b, abs.b_below_a, abs.ties
            ),
        ),
        info,
    )
}

fn criterion_7() -> Outcome {
    let ensemble = Ensemble::new(EnsembleSpec::GaussianPairs {
        size: 10_000,
        seed: 707,
        dim: 64,
        alpha_max: 1.0,
        r_max: 0.6,
        same_squeezing_every: 4,
    })
    .unwrap();
    let report = remark1_audit(&ensemble, 1e-8, &tol()).unwrap();
    let non_inverse = report.non_inverse.as_ref().map(|n| n.extended_slack);
    outcome(
        report.violations.is_empty() && non_inverse.is_some(),
        format!(
            "near-minimal {}, violations {}, non-inverse extended slack {:?}",
            report.near_minimal,
            report.violations.len(),
            non_inverse
        ),
    )
}

fn criterion_8() -> Outcome {
    let dim = HilbertDim::new(64).unwrap();
    let (q, p) = fock_operators(dim);
    let problem = MinimizeProblem {
        ur: UrId::ExtendedSchrodinger,
        observables: vec![q, p],
        slots: vec![Slot::Fixed(GaussianParams::coherent(Complex64::new(0.0, 0.0))), Slot::Free],
        dim,
        init: None,
        budget: Budget::default(),
        seed: 808,
        tol: tol(),
    };
    let res = minimize_slack(&problem).unwrap();
    // (dp)^2 + (dq)^2 of the free state equals 1 + 4 slack when the fixed state is coherent.
    let sum = 1.0 + 4.0 * res.slack;
    let r = res.params[1].r;
    outcome(
        (sum - 1.0).abs() <= 1e-6 && r.abs() <= 1e-3,
        format!("(dq)^2 + (dp)^2 = {sum:.9}, r = {r:.2e}, converged {}", res.converged),
    )
}

fn max_abs_c(m: &nalgebra::DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn max_abs_r(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.abs()))
}

fn symplectic(seed: u64) -> RMatrix {
    let mut g = rng(seed);
    let (a, b, c): (f64, f64, f64) = (g.random_range(-2.0..2.0), g.random_range(-2.0..2.0), g.random_range(0.3..2.0));
    // det [[c, a], [b, (1 + a b) / c]] = 1
    RMatrix::from_row_slice(2, 2, &[c, a, b, (1.0 + a * b) / c])
}

fn criterion_9() -> Outcome {
    const N: u64 = 1000;
    let mut worst_obs = 0.0f64;
    let mut worst_states = 0.0f64;
    let mut worst_det = 0.0f64;
    for i in 0..N {
        let seed = derive_seed(909, i);
        let mut g = rng(seed);
        let d = g.random_range(2..=8usize);
        let kind = i % 4;
        let n = if kind == 2 { 2 } else { g.random_range(1..=4usize) };
        let xs: Vec<Observable> = (0..n as u64).map(|k| obs(d, seed ^ (32 + k))).collect();
        let lam = match kind {
            0 => RMatrix::from_fn(n, n, |_, _| g.random_range(-1.5..1.5)),
            1 => haar_orthogonal(n, seed),
            2 => symplectic(seed),
            _ => RMatrix::from_fn(n, n, |_, _| g.random_range(-1.5..1.5)),
        };
        let state = if i % 2 == 0 { mixed(d, seed ^ 5) } else { pure(d, seed ^ 5) };
        let base = moment_set(&xs, &state).unwrap();
        let t = transform_observables(&lam, &xs).unwrap();
        let moved = moment_set(&t.observables, &state).unwrap();
        let size = max_abs_r(&base.sigma).max(max_abs_r(&base.c)).max(1.0) * max_abs_r(&lam).max(1.0).powi(2);
        let es = max_abs_r(&(&moved.sigma - &lam * &base.sigma * lam.transpose())) / size;
        let ec = max_abs_r(&(&moved.c - &lam * &base.c * lam.transpose())) / size;
        worst_obs = worst_obs.max(es).max(ec);
        let dr = base.robertson().matrix().determinant().re;
        let dr2 = moved.robertson().matrix().determinant().re;
        let want = t.determinant * t.determinant * dr;
        worst_det = worst_det.max((dr2 - want).abs() / dr2.abs().max(want.abs()).max(1.0));

        let m = g.random_range(1..=4usize);
        let states: Vec<_> = (0..m as u64).map(|k| sample_pure(d, seed ^ (64 + k))).collect();
        let u = if kind == 3 {
            haar_unitary(m, seed)
        } else {
            nalgebra::DMatrix::from_fn(m, m, |_, _| Complex64::new(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)))
        };
        let x = &xs[0];
        let vecs: Vec<_> = states.iter().map(|s| s.amplitudes().clone()).collect();
        let gram = gram_raw_vectors(x, &vecs).unwrap();
        let ts = transform_states(&u, &states).unwrap();
        let moved = gram_raw_vectors(x, &ts.vectors).unwrap();
        let want = &u * gram.matrix() * u.adjoint();
        let size = max_abs_c(gram.matrix()).max(1.0) * max_abs_c(&u).max(1.0).powi(2);
        worst_states = worst_states.max(max_abs_c(&(moved.matrix() - want)) / size);
    }
    outcome(
        worst_obs <= 1e-10 && worst_states <= 1e-10 && worst_det <= 1e-10,
        format!("observables {worst_obs:.1e}, det law {worst_det:.1e}, states {worst_states:.1e} over 10^3 draws"),
    )
}

fn criterion_10() -> Outcome {
    let config = RunConfig::from_json(
        r#"{"command": "scan", "seed": 1010, "ensemble_size": 500,
            "urs": ["schrodinger", "robertson", "type_2_m", {"lemma2": {"flavor": "entangled", "choice": "centered", "order": null}}]}"#,
    )
    .unwrap();
    let a = run_scan(&config).unwrap().to_json();
    let b = run_scan(&config).unwrap().to_json();
    outcome(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut all = true;
    let mut report = |k: usize, o: Outcome| {
        all &= o.pass;
        println!("criterion {k:>2}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    let (six, info) = criterion_6();
    report(6, six);
    println!("criterion  6: info ({info})");
    report(7, criterion_7());
    report(8, criterion_8());
    report(9, criterion_9());
    report(10, criterion_10());
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
