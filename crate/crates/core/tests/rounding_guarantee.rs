mod common;

use rand::Rng;
use smoothcount::hypergraph::{coverage_penalty, perfect_matching_instance, GammaChoice, Hypergraph};
use smoothcount::oracle::{brute_force_expectation, DEFAULT_CAP};
use smoothcount::rounding::{derandomize, RoundingOptions};
use smoothcount::testgen::{certify_by_shrinking, random_probabilities, random_system, rng, SystemShape};

#[test]
fn hypergraph_rounding_meets_guarantee() {
    for (h, gamma) in [(Hypergraph::complete_graph(4), GammaChoice::Fixed(0.025 / 2.0)), (Hypergraph::fano(), GammaChoice::auto())] {
        let inst = perfect_matching_instance(&h, gamma).unwrap();
        let eps = 0.05;
        let r = derandomize(&inst.system, &inst.p, eps, &RoundingOptions::default()).unwrap();
        let exact = brute_force_expectation(&inst.system, &inst.p, DEFAULT_CAP).unwrap();
        assert!(r.achieved >= (1.0 - eps) * exact);
        let chosen: Vec<usize> = (0..r.x0.len()).filter(|&s| r.x0[s]).collect();
        let f = coverage_penalty(&h, &chosen).unwrap() as f64;
        assert!((r.penalty - inst.gamma * f).abs() < 1e-12);
    }
}

#[test]
fn k4_rounding_finds_a_perfect_matching() {
    let h = Hypergraph::complete_graph(4);
    let inst = perfect_matching_instance(&h, GammaChoice::Fixed(0.025 / 2.0)).unwrap();
    let r = derandomize(&inst.system, &inst.p, 0.05, &RoundingOptions::default()).unwrap();
    let chosen: Vec<usize> = (0..6).filter(|&s| r.x0[s]).collect();
    assert_eq!(coverage_penalty(&h, &chosen).unwrap(), 0);
}

#[test]
fn random_nonnegative_rounding() {
    let mut r = rng(31);
    let mut done = 0;
    while done < 8 {
        let n = r.gen_range(3..=10);
        let shape = SystemShape { nonnegative: true, ..SystemShape::new(n, r.gen_range(1..=4)) };
        let s = random_system(&mut r, &shape);
        let p = random_probabilities(&mut r, n, (0.1, 0.6));
        let Some(p) = certify_by_shrinking(&s, &p, 0.05) else { continue };
        let eps = 0.05;
        let out = derandomize(&s, &p, eps, &RoundingOptions::default()).unwrap();
        let exact = brute_force_expectation(&s, &p, DEFAULT_CAP).unwrap();
        assert!(out.achieved >= (1.0 - eps) * exact, "{} < {}", out.achieved, exact);
        done += 1;
    }
}
