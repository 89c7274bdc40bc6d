//! The evaluator against exhaustive enumeration.

mod common;

use num_complex::Complex;
use rand::Rng;
use smoothcount::evaluator::{conditional_expectation, smoothed_expectation, EvalOptions};
use smoothcount::interpolation::{taylor_coefficients, WorkOptions};
use smoothcount::model::{PartialAssignment, ProbabilityVector, SparseSystem};
use smoothcount::oracle::{brute_force_expectation, brute_force_p, DEFAULT_CAP};
use smoothcount::testgen::rng;
use smoothcount::zerofree::max_delta;

use common::{certified_instance, random_integer_system, relative, solution_probability};

fn sequential() -> EvalOptions<f64> {
    EvalOptions { work: WorkOptions { parallel: false, ..Default::default() }, ..Default::default() }
}

#[test]
fn evaluator_within_epsilon_of_oracle() {
    let mut r = rng(11);
    let mut interpolated = 0;
    for t in 0..60 {
        let n = 4 + t % 9;
        let (s, p, _) = certified_instance(&mut r, n, 1 + t % 5);
        let eps = [1e-1, 1e-2, 1e-3][t % 3];
        let est = smoothed_expectation(&s, &p, eps, &sequential()).unwrap();
        let exact = brute_force_expectation(&s, &p, DEFAULT_CAP).unwrap();
        assert!(relative(est.value(), exact) <= eps, "instance {t}: {} vs {exact}", est.value());
        assert!((est.log_value - exact.ln()).abs() <= est.tail_bound + 1e-12);
        interpolated += usize::from(est.degree < n);
    }
    assert!(interpolated > 10, "only {interpolated} instances used a truncated series");
}

#[test]
fn full_coefficients_match_horner_of_oracle() {
    let mut r = rng(12);
    for _ in 0..20 {
        let n = r.gen_range(2..=12);
        let (s, p, _) = certified_instance(&mut r, n, 3);
        let x = p.odds();
        let series = taylor_coefficients(&s, &x, n, &WorkOptions::default()).unwrap();
        let a0 = series.log_a0.exp();
        let coeffs: Vec<f64> = series.with_constant().iter().map(|c| c * a0).collect();
        for _ in 0..10 {
            let z = Complex::from_polar(r.gen_range(0.0..2.0), r.gen_range(0.0..std::f64::consts::TAU));
            let horner = coeffs.iter().rev().fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c);
            let zx: Vec<Complex<f64>> = x.iter().map(|&v| z * v).collect();
            let direct = brute_force_p(&s, &zx, DEFAULT_CAP).unwrap();
            assert!((horner - direct).norm() <= 1e-10 * direct.norm().max(1.0));
        }
    }
}

#[test]
fn law_of_total_expectation() {
    let mut r = rng(13);
    let mut checked = 0;
    for _ in 0..80 {
        let n = r.gen_range(3..=10);
        let (s, p, _) = certified_instance(&mut r, n, 2);
        let eps = 1e-3;
        let opts = sequential();
        let (Ok(e1), Ok(e0), Ok(e)) = (
            conditional_expectation(&s, &p, &PartialAssignment::from_pairs([(0, true)]).unwrap(), eps, &opts),
            conditional_expectation(&s, &p, &PartialAssignment::from_pairs([(0, false)]).unwrap(), eps, &opts),
            smoothed_expectation(&s, &p, eps, &opts),
        ) else {
            continue;
        };
        let p1 = p.as_slice()[0];
        let mixed = p1 * e1.value() + (1.0 - p1) * e0.value();
        let slack = e.tail_bound.max(e1.tail_bound).max(e0.tail_bound) * 2.0 + 1e-12;
        assert!((mixed.ln() - e.log_value).abs() <= slack, "{mixed} vs {}", e.value());
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} instances had certified branches");
}

#[test]
fn increasing_gamma_never_increases_expectation() {
    let mut r = rng(14);
    for _ in 0..30 {
        let n = r.gen_range(2..=10);
        let (s, p, _) = certified_instance(&mut r, n, 3);
        let base = brute_force_expectation(&s, &p, DEFAULT_CAP).unwrap();
        let mut gamma = s.gamma().to_vec();
        let i = r.gen_range(0..gamma.len());
        gamma[i] *= r.gen_range(1.0..4.0);
        let heavier = s.with_gamma(gamma).unwrap();
        let more = brute_force_expectation(&heavier, &p, DEFAULT_CAP).unwrap();
        assert!(more <= base * (1.0 + 1e-14));
        if let Ok(est) = smoothed_expectation(&heavier, &p, 1e-3, &sequential()) {
            assert!(est.log_value - est.tail_bound <= base.ln() + 1e-12);
        }
    }
}

#[test]
fn expectation_bounds_solution_probability() {
    let mut r = rng(15);
    let mut checked = 0;
    for _ in 0..150 {
        let n = r.gen_range(3..=10);
        let gamma = r.gen_range(0.01..0.3);
        let s = random_integer_system(&mut r, n, 3, 2, gamma);
        let p = ProbabilityVector::uniform(n, r.gen_range(0.02..0.2)).unwrap();
        let Ok(est) = smoothed_expectation(&s, &p, 1e-3, &sequential()) else { continue };
        let prob = solution_probability(&s, &p);
        assert!(est.log_value + est.tail_bound >= prob.ln() - 1e-12);
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} certified instances");
}

#[test]
fn parallel_matches_sequential() {
    let mut r = rng(16);
    let (s, p, _) = loop {
        let (s, p, d) = certified_instance(&mut r, 20, 6);
        if d > 0.3 {
            break (s, p, d);
        }
    };
    let eps = 1e-4;
    let seq = smoothed_expectation(&s, &p, eps, &sequential()).unwrap();
    assert!(seq.degree >= 4, "degree {} too small to split chunks", seq.degree);
    for threads in [2, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let par = pool.install(|| smoothed_expectation(&s, &p, eps, &EvalOptions::default()).unwrap());
        assert!((par.log_value - seq.log_value).abs() <= 1e-12);
        assert_eq!(par.degree, seq.degree);
    }
}

#[test]
fn oracle_identity_between_expectation_and_polynomial() {
    let mut r = rng(17);
    for _ in 0..100 {
        let n = r.gen_range(1..=10);
        let (s, p, _) = certified_instance(&mut r, n, 3);
        let z: Vec<Complex<f64>> = p.odds().iter().map(|&v| Complex::new(v, 0.0)).collect();
        let poly = brute_force_p(&s, &z, DEFAULT_CAP).unwrap();
        assert!(poly.im.abs() <= 1e-15 * poly.re && poly.re > 0.0);
        let via_p = p.log_complement_product().exp() * poly.re;
        assert!(relative(via_p, brute_force_expectation(&s, &p, DEFAULT_CAP).unwrap()) <= 1e-12);
    }
}

#[test]
fn nonvanishing_inside_certified_polydisc() {
    let mut r = rng(18);
    for _ in 0..20 {
        let n = r.gen_range(1..=8);
        let (s, p, _) = certified_instance(&mut r, n, 3);
        let x = p.odds();
        let d = max_delta(&s, &x).unwrap();
        let rho: Vec<f64> = x.iter().map(|v| v / (1.0 - d)).collect();
        for _ in 0..200 {
            let z: Vec<Complex<f64>> = rho
                .iter()
                .map(|&q| Complex::from_polar(q * r.gen_range(0.0..1.0f64).sqrt(), r.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            assert!(brute_force_p(&s, &z, DEFAULT_CAP).unwrap().norm() > 0.0);
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut r = rng(19);
    for _ in 0..10 {
        let (s, p, _) = certified_instance(&mut r, 8, 3);
        let s32 = SparseSystem::<f32>::new(
            s.n_rows(),
            s.n_cols(),
            s.entries().map(|(i, j, a)| (i, j, a as f32)),
            s.beta().iter().map(|&b| b as f32).collect(),
            s.gamma().iter().map(|&g| g as f32).collect(),
        )
        .unwrap();
        let p32 = ProbabilityVector::new(p.as_slice().iter().map(|&v| v as f32).collect()).unwrap();
        let opts = EvalOptions::<f32> { work: WorkOptions { parallel: false, ..Default::default() }, ..Default::default() };
        let (Ok(e32), Ok(e64)) = (smoothed_expectation(&s32, &p32, 1e-2, &opts), smoothed_expectation(&s, &p, 1e-2, &sequential()))
        else {
            continue;
        };
        assert!((f64::from(e32.log_value) - e64.log_value).abs() < 2e-2);
    }
}
