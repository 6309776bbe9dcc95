//! Reference computations that avoid the transfer-operator pipeline:
//! symbolic pressure of locally constant potentials, periodic-orbit pressure
//! sums, brute-force Legendre conjugates, and exact checks of the
//! Manneville-Pomeau coefficients.

use num_rational::Rational64;
use serde::Serialize;

use crate::circle_map::{decode_itinerary, itinerary_count, CircleMap, MpParams};
use crate::error::{Error, Result};
use crate::potential::Potential;

/// A locally constant potential on the full shift: branch `m` carries weight `e^{c_m}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolicModel {
    pub weights: Vec<f64>,
}

impl SymbolicModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Domain(format!("weights must be positive and finite: {weights:?}")));
        }
        Ok(Self { weights })
    }

    /// Branch values `c_m` of the potential.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|c| c.exp()).collect())
    }

    /// `t` times the geometric potential of a linear map with the given slopes.
    pub fn geometric(slopes: &[f64], t: f64) -> Result<Self> {
        Self::new(slopes.iter().map(|s| s.powf(-t)).collect())
    }

    pub fn pressure(&self) -> f64 {
        pressure_locally_constant(&self.weights)
    }
}

/// `log sum_m w_m`.
pub fn pressure_locally_constant(weights: &[f64]) -> f64 {
    weights.iter().sum::<f64>().ln()
}

/// `(1/n) log sum_{f^n x = x} e^{S_n phi(x)}`, summing over all `k^n`
/// itineraries (points on cylinder boundaries are counted once per itinerary).
pub fn pressure_periodic_orbits(map: &CircleMap, phi: &Potential, n: usize, cap: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("period must be positive".into()));
    }
    let k = map.degree();
    let count = itinerary_count(k, n, cap)?;
    let mut sums = Vec::with_capacity(count);
    for idx in 0..count {
        let w = decode_itinerary(idx, k, n);
        let p = map.periodic_point(&w)?;
        let s: f64 = p
            .orbit
            .iter()
            .zip(&p.itinerary)
            .map(|(&y, &m)| phi.eval_on_branch(map, m, y))
            .sum();
        sums.push(s);
    }
    let top = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = sums.iter().map(|s| (s - top).exp()).sum();
    Ok((top + total.ln()) / n as f64)
}

/// Conjugate value at one `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ConjugateValue {
    Finite(f64),
    /// The objective keeps increasing beyond the sampled window.
    Unbounded,
}

impl ConjugateValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            ConjugateValue::Finite(v) => Some(*v),
            ConjugateValue::Unbounded => None,
        }
    }
}

/// `sup_t (s t - g(t))` over the samples, by direct maximization. When the
/// maximum sits at an end of the grid and the objective is still strictly
/// increasing there, the conjugate is reported unbounded.
pub fn conjugate_bruteforce(ts: &[f64], gs: &[f64], ss: &[f64]) -> Result<Vec<ConjugateValue>> {
    if ts.is_empty() || ts.len() != gs.len() {
        return Err(Error::Domain("need matching nonempty t and g samples".into()));
    }
    let n = ts.len();
    Ok(ss
        .iter()
        .map(|&s| {
            let obj: Vec<f64> = ts.iter().zip(gs).map(|(t, g)| s * t - g).collect();
            let mut best = 0;
            for i in 1..n {
                if obj[i] > obj[best] {
                    best = i;
                }
            }
            let scale = obj[best].abs().max(1.0) * 1e-12;
            let rising_right = best == n - 1 && n > 1 && obj[n - 1] > obj[n - 2] + scale;
            let rising_left = best == 0 && n > 1 && obj[0] > obj[1] + scale;
            if rising_left || rising_right {
                ConjugateValue::Unbounded
            } else {
                ConjugateValue::Finite(obj[best])
            }
        })
        .collect())
}

/// Residuals of the conditions defining the intermittent family
/// `g(0) = 0`, `g(1/2) = 1`, `g'(0) = 1`, `g''(1/2) = 0`, and the minimum of `g'`
/// on `(0, 1/2]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientRecord {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    /// Exact rational arithmetic was used.
    pub exact: bool,
    /// `a` and `b` as reduced fractions when exact.
    pub a_exact: Option<String>,
    pub b_exact: Option<String>,
    pub residual_g0: f64,
    pub residual_g_half: f64,
    pub residual_dg0: f64,
    pub residual_d2g_half: f64,
    /// Relative distance between these coefficients and the ones the map
    /// uses, together with the map's own `|g(1/2) - 1|` (floating point).
    pub map_mismatch: f64,
    pub min_dg: f64,
    pub argmin_dg: f64,
}

impl CoefficientRecord {
    /// Largest residual of the defining conditions.
    pub fn max_residual(&self) -> f64 {
        [
            self.residual_g0,
            self.residual_g_half,
            self.residual_dg0,
            self.residual_d2g_half,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rpow(base: Rational64, e: i64) -> Rational64 {
    let mut r = Rational64::from_integer(1);
    for _ in 0..e {
        r *= base;
    }
    r
}

fn rat_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Verifies the coefficient formulas at `alpha`: exactly in rational
/// arithmetic for integer `alpha`, in floating point otherwise (residuals are
/// then expected at the `1e-14` level).
pub fn verify_mp_coefficients(alpha: Rational64) -> Result<CoefficientRecord> {
    let zero = Rational64::from_integer(0);
    let one = Rational64::from_integer(1);
    if alpha < zero || alpha > one {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1]")));
    }
    let af = rat_to_f64(alpha);
    let params = MpParams::new(af)?;
    let mut rec = if alpha.is_integer() {
        let al = alpha.to_integer();
        let half = Rational64::new(1, 2);
        let c = Rational64::from_integer(4 + al) / Rational64::from_integer(4 + 2 * al);
        let b = one / (rpow(half, 3 + al) - c * rpow(half, 2 + al));
        let a = -b * c;
        let g = |y: Rational64| y + a * rpow(y, 3 + al) + b * rpow(y, 4 + al);
        // g'(0) = 1 + (3+al) a 0^(2+al) + (4+al) b 0^(3+al), exponents positive.
        let dg0 = one + Rational64::from_integer(3 + al) * a * rpow(zero, 2 + al)
            + Rational64::from_integer(4 + al) * b * rpow(zero, 3 + al);
        let d2g_half = Rational64::from_integer((3 + al) * (2 + al)) * a * rpow(half, 1 + al)
            + Rational64::from_integer((4 + al) * (3 + al)) * b * rpow(half, 2 + al);
        let res = |r: Rational64| rat_to_f64(r).abs();
        CoefficientRecord {
            alpha: af,
            a: rat_to_f64(a),
            b: rat_to_f64(b),
            exact: true,
            a_exact: Some(a.to_string()),
            b_exact: Some(b.to_string()),
            residual_g0: res(g(zero)),
            residual_g_half: res(g(half) - one),
            residual_dg0: res(dg0 - one),
            residual_d2g_half: res(d2g_half),
            map_mismatch: 0.0,
            min_dg: 0.0,
            argmin_dg: 0.0,
        }
    } else {
        let c = (4.0 + af) / (4.0 + 2.0 * af);
        let b = 1.0 / (0.5f64.powf(3.0 + af) - c * 0.5f64.powf(2.0 + af));
        let a = -b * c;
        let g = |y: f64| y + a * y.powf(3.0 + af) + b * y.powf(4.0 + af);
        let d2g_half = (3.0 + af) * (2.0 + af) * a * 0.5f64.powf(1.0 + af)
            + (4.0 + af) * (3.0 + af) * b * 0.5f64.powf(2.0 + af);
        CoefficientRecord {
            alpha: af,
            a,
            b,
            exact: false,
            a_exact: None,
            b_exact: None,
            residual_g0: g(0.0).abs(),
            residual_g_half: (g(0.5) - 1.0).abs(),
            residual_dg0: (1.0 + (3.0 + af) * a * 0f64.powf(2.0 + af) - 1.0).abs(),
            residual_d2g_half: d2g_half.abs() / b.abs().max(1.0),
            map_mismatch: 0.0,
            min_dg: 0.0,
            argmin_dg: 0.0,
        }
    };
    // The map's own coefficients must reproduce the reference ones.
    rec.map_mismatch = (params.a - rec.a).abs().max((params.b - rec.b).abs()) / rec.b.abs().max(1.0);
    rec.map_mismatch = rec.map_mismatch.max((params.g(0.5) - 1.0).abs());
    let (a, b) = (rec.a, rec.b);
    let dg = |y: f64| 1.0 + (3.0 + af) * a * y.powf(2.0 + af) + (4.0 + af) * b * y.powf(3.0 + af);
    let samples = 20_000;
    let (mut best_y, mut best) = (0.0, dg(0.0));
    for i in 1..=samples {
        let y = 0.5 * i as f64 / samples as f64;
        let v = dg(y);
        if v < best {
            best = v;
            best_y = y;
        }
    }
    rec.min_dg = best;
    rec.argmin_dg = best_y;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_pressures() {
        assert!((pressure_locally_constant(&[1.0, 1.0]) - 2f64.ln()).abs() < 1e-15);
        let t: f64 = 0.7;
        let m = SymbolicModel::geometric(&[2.0, 4.0, 4.0], t).unwrap();
        assert!((m.pressure() - (2f64.powf(-t) + 2.0 * 4f64.powf(-t)).ln()).abs() < 1e-14);
        assert!(SymbolicModel::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn conjugate_of_affine_is_flagged() {
        let ts: Vec<f64> = (0..11).map(|i| i as f64 - 5.0).collect();
        let gs: Vec<f64> = ts.iter().map(|t| 0.3 * t).collect();
        let v = conjugate_bruteforce(&ts, &gs, &[0.3, 0.5, 0.0]).unwrap();
        assert_eq!(v[0], ConjugateValue::Finite(0.0));
        assert_eq!(v[1], ConjugateValue::Unbounded);
        assert_eq!(v[2], ConjugateValue::Unbounded);
    }

    #[test]
    fn exact_coefficients() {
        let r = verify_mp_coefficients(Rational64::from_integer(1)).unwrap();
        assert_eq!((r.a, r.b), (20.0, -24.0));
        assert_eq!(r.max_residual(), 0.0);
        assert!(r.map_mismatch < 1e-14);
        assert_eq!((r.argmin_dg, r.min_dg), (0.0, 1.0));
        let r = verify_mp_coefficients(Rational64::from_integer(0)).unwrap();
        assert_eq!((r.a, r.b), (8.0, -8.0));
        assert_eq!(r.max_residual(), 0.0);
    }
}
