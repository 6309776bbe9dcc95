//! Power-iteration eigenvalues against a dense nonsymmetric eigensolve.

use std::sync::Arc;

use nalgebra::DMatrix;
use thermoscope::config::OperatorConfig;
use thermoscope::transfer_op::{leading_eigenpair, subleading_modulus, UlamGeometry, UlamMatrix};
use thermoscope::{CircleMap, Potential};

fn dense_moduli(u: &UlamMatrix) -> Vec<f64> {
    let n = u.dim();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, j, v) in u.triplets() {
        m[(i, j)] += v;
    }
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

fn ratios(map: &CircleMap, phi: &Potential, n: usize) -> (f64, f64, f64, f64) {
    let cfg = OperatorConfig {
        ulam_n: n,
        ..OperatorConfig::default()
    };
    let u = UlamGeometry::new(map, &cfg).unwrap().matrix(map, phi).unwrap();
    let lead = leading_eigenpair(&u, &cfg).unwrap();
    let sub = subleading_modulus(&u, &lead, &cfg).unwrap();
    let dense = dense_moduli(&u);
    (lead.lambda, dense[0], sub.gap_ratio, dense[1] / dense[0])
}

#[test]
fn gap_ratio_matches_dense_eigenvalues() {
    let map = Arc::new(CircleMap::linear(&[2.0, 2.0]).unwrap());
    let phi = Potential::trig_series(vec![0.0, 0.6], vec![0.3]);
    for n in [32, 64, 128, 256] {
        let (lambda, dense_lambda, ratio, dense_ratio) = ratios(&map, &phi, n);
        assert!((lambda - dense_lambda).abs() < 1e-9 * dense_lambda, "N = {n}: {lambda} vs {dense_lambda}");
        assert!((ratio - dense_ratio).abs() < 1e-6, "N = {n}: {ratio} vs {dense_ratio}");
    }
}

#[test]
fn mixed_slopes_against_dense() {
    let map = Arc::new(CircleMap::linear(&[2.0, 4.0, 4.0]).unwrap());
    let phi = Potential::geometric(&map).scale(0.7).plus(1.0, &Potential::trig_series(vec![0.0, 0.2], vec![]));
    let (lambda, dense_lambda, ratio, dense_ratio) = ratios(&map, &phi, 96);
    assert!((lambda - dense_lambda).abs() < 1e-9 * dense_lambda);
    assert!((ratio - dense_ratio).abs() < 1e-6, "{ratio} vs {dense_ratio}");
}

#[test]
fn doubling_zero_potential_gap() {
    let map = CircleMap::linear(&[2.0, 2.0]).unwrap();
    let (lambda, _, ratio, dense_ratio) = ratios(&map, &Potential::zero(), 64);
    assert!((lambda - 2.0).abs() < 1e-12);
    assert!(ratio <= 0.51, "{ratio}");
    assert!(dense_ratio <= 0.51, "{dense_ratio}");
}
