//! Birkhoff averages of potentials along periodic orbits.

use rayon::prelude::*;
use serde::Serialize;

use crate::circle_map::{decode_itinerary, itinerary_count, CircleMap, PeriodicPoint};
use crate::error::Result;
use crate::potential::Potential;

/// An orbit attaining an extreme average.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitExtreme {
    pub value: f64,
    pub itinerary: Vec<usize>,
    pub point: f64,
}

/// Largest and smallest periodic-orbit averages up to some period.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSummary {
    pub max: OrbitExtreme,
    pub min: OrbitExtreme,
    /// Largest period actually enumerated.
    pub period: usize,
    pub orbits: usize,
    /// Enumeration stopped because both bounds reached the sampled sup/inf of `phi`.
    pub early_exit: bool,
}

impl OrbitSummary {
    pub fn spread(&self) -> f64 {
        self.max.value - self.min.value
    }
}

/// `(1/n) S_n phi` along a periodic orbit, with one-sided values taken inside
/// the branches of the itinerary.
pub fn orbit_average(map: &CircleMap, phi: &Potential, p: &PeriodicPoint) -> f64 {
    let s: f64 = p
        .orbit
        .iter()
        .zip(&p.itinerary)
        .map(|(&y, &m)| phi.eval_on_branch(map, m, y))
        .sum();
    s / p.orbit.len() as f64
}

/// Birkhoff sum `sum_{i<n} phi(f^i x)` along the forward orbit.
pub fn birkhoff_sum(map: &CircleMap, phi: &Potential, x: f64, n: usize) -> f64 {
    map.orbit(x, n).into_iter().map(|y| phi.eval(y)).sum()
}

fn is_canonical_rotation(w: &[usize]) -> bool {
    let n = w.len();
    (1..n).all(|r| {
        for i in 0..n {
            let (a, b) = (w[i], w[(i + r) % n]);
            if a != b {
                return a < b;
            }
        }
        true
    })
}

/// Extremes of periodic-orbit averages over all periods `1..=max_period`.
///
/// Only one itinerary per cyclic rotation class is solved. Enumeration stops
/// early once the maximum and minimum reach the sampled sup and inf of `phi`,
/// since no invariant measure can exceed those.
pub fn orbit_extremes(map: &CircleMap, phi: &Potential, max_period: usize, cap: usize) -> Result<OrbitSummary> {
    let k = map.degree();
    let sup = phi.sampled_sup(map, 4096);
    let inf = phi.sampled_inf(map, 4096);
    let mut best_max: Option<OrbitExtreme> = None;
    let mut best_min: Option<OrbitExtreme> = None;
    let mut orbits = 0;
    let mut period = 0;
    let mut early_exit = false;
    for n in 1..=max_period.max(1) {
        let count = itinerary_count(k, n, cap)?;
        let found: Vec<(f64, usize, f64)> = (0..count)
            .into_par_iter()
            .filter_map(|idx| {
                let w = decode_itinerary(idx, k, n);
                is_canonical_rotation(&w).then(|| {
                    map.periodic_point(&w)
                        .map(|p| (orbit_average(map, phi, &p) + 0.0, idx, p.point))
                })
            })
            .collect::<Result<_>>()?;
        period = n;
        orbits += found.len();
        for &(v, idx, pt) in &found {
            if best_max.as_ref().map_or(true, |b| v > b.value) {
                best_max = Some(OrbitExtreme {
                    value: v,
                    itinerary: decode_itinerary(idx, k, n),
                    point: pt,
                });
            }
            if best_min.as_ref().map_or(true, |b| v < b.value) {
                best_min = Some(OrbitExtreme {
                    value: v,
                    itinerary: decode_itinerary(idx, k, n),
                    point: pt,
                });
            }
        }
        let hi = best_max.as_ref().map_or(f64::NEG_INFINITY, |b| b.value);
        let lo = best_min.as_ref().map_or(f64::INFINITY, |b| b.value);
        if hi >= sup - 1e-12 && lo <= inf + 1e-12 {
            early_exit = n < max_period;
            break;
        }
    }
    Ok(OrbitSummary {
        max: best_max.expect("period 1 always yields orbits"),
        min: best_min.expect("period 1 always yields orbits"),
        period,
        orbits,
        early_exit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn rotations() {
        assert!(is_canonical_rotation(&[0, 0, 1]));
        assert!(!is_canonical_rotation(&[0, 1, 0]));
        assert!(is_canonical_rotation(&[1, 1]));
    }

    #[test]
    fn doubling_indicator_extremes() {
        let map = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let phi = Potential::indicator(0.5, 1.0).unwrap();
        let s = orbit_extremes(&map, &phi, 10, 1 << 12).unwrap();
        assert_eq!(s.max.value, 1.0);
        assert_eq!(s.max.itinerary, vec![1]);
        assert_eq!(s.min.value, 0.0);
        assert!(s.early_exit);
    }

    #[test]
    fn mp_geometric_max_at_neutral_point() {
        let map = Arc::new(CircleMap::manneville_pomeau(1.0).unwrap());
        let phi = Potential::geometric(&map);
        let s = orbit_extremes(&map, &phi, 6, 1 << 12).unwrap();
        assert_eq!(s.max.value, 0.0);
        assert_eq!(s.max.point, 0.0);
        assert!(s.min.value < -1.0);
    }

    #[test]
    fn birkhoff_sums() {
        let map = Arc::new(CircleMap::linear(&[2.0, 2.0]).unwrap());
        let g = Potential::geometric(&map);
        assert!((birkhoff_sum(&map, &g, 0.1234, 9) + 9.0 * 2f64.ln()).abs() < 1e-13);
        assert_eq!(birkhoff_sum(&map, &Potential::constant(0.3), 0.77, 4), 0.3 * 4.0);
    }
}
