//! Real observables on the circle.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::circle_map::{wrap, CircleMap, Side};
use crate::error::{Error, Result};

/// Regularity class a potential is declared to belong to. Metadata only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", content = "exponent", rename_all = "snake_case")]
pub enum Regularity {
    BoundedVariation,
    Hoelder(f64),
    Smooth,
}

impl Regularity {
    fn rank(&self) -> (u8, f64) {
        match *self {
            Regularity::BoundedVariation => (0, 0.0),
            Regularity::Hoelder(a) => (1, a),
            Regularity::Smooth => (2, 0.0),
        }
    }

    /// The weaker of two tags.
    pub fn weakest(self, other: Self) -> Self {
        let (a, b) = (self.rank(), other.rank());
        if a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1) {
            self
        } else {
            other
        }
    }

    /// Exponent used for essential-radius bounds: the Hoelder exponent, or 1.
    pub fn exponent(&self) -> f64 {
        match *self {
            Regularity::Hoelder(a) => a,
            _ => 1.0,
        }
    }
}

/// Closed-form description of a potential.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Descriptor {
    Geometric,
    Constant { value: f64 },
    TrigSeries { cos: Vec<f64>, sin: Vec<f64> },
    Indicator { interval: [f64; 2] },
    Combo { terms: Vec<(f64, Descriptor)> },
}

#[derive(Clone, Debug)]
enum Kind {
    Geometric(Arc<CircleMap>),
    Constant(f64),
    Trig { cos: Vec<f64>, sin: Vec<f64> },
    Indicator { a: f64, b: f64 },
    Combo(Vec<(f64, Potential)>),
}

/// A real-valued observable `phi` on the circle.
#[derive(Clone, Debug)]
pub struct Potential {
    kind: Kind,
}

impl Potential {
    /// `phi = -log |Df|`.
    pub fn geometric(map: &Arc<CircleMap>) -> Self {
        Self {
            kind: Kind::Geometric(Arc::clone(map)),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self { kind: Kind::Constant(c) }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `sum_k cos[k] cos(2 pi k x) + sin[k] sin(2 pi k x)`, `k` counted from 0.
    pub fn trig_series(cos: Vec<f64>, sin: Vec<f64>) -> Self {
        Self {
            kind: Kind::Trig { cos, sin },
        }
    }

    /// Indicator of the half-open arc `[a, b)` with `0 <= a < b <= 1`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Domain(format!("degenerate indicator interval [{a}, {b})")));
        }
        Ok(Self {
            kind: Kind::Indicator { a, b },
        })
    }

    /// Pointwise linear combination.
    pub fn combine(terms: Vec<(f64, Potential)>) -> Result<Self> {
        if terms.is_empty() {
            return Ok(Self::zero());
        }
        if let Some((w, _)) = terms.iter().find(|(w, _)| !w.is_finite()) {
            return Err(Error::Domain(format!("non-finite weight {w}")));
        }
        Ok(Self {
            kind: Kind::Combo(terms),
        })
    }

    /// The potential `t phi`.
    pub fn scale(&self, t: f64) -> Self {
        match &self.kind {
            Kind::Constant(c) => Self::constant(t * c),
            Kind::Combo(terms) => Self {
                kind: Kind::Combo(terms.iter().map(|(w, p)| (w * t, p.clone())).collect()),
            },
            _ => Self {
                kind: Kind::Combo(vec![(t, self.clone())]),
            },
        }
    }

    /// `self + w * other`.
    pub fn plus(&self, w: f64, other: &Potential) -> Self {
        Self {
            kind: Kind::Combo(vec![(1.0, self.clone()), (w, other.clone())]),
        }
    }

    pub fn descriptor(&self) -> Descriptor {
        match &self.kind {
            Kind::Geometric(_) => Descriptor::Geometric,
            Kind::Constant(c) => Descriptor::Constant { value: *c },
            Kind::Trig { cos, sin } => Descriptor::TrigSeries {
                cos: cos.clone(),
                sin: sin.clone(),
            },
            Kind::Indicator { a, b } => Descriptor::Indicator { interval: [*a, *b] },
            Kind::Combo(terms) => Descriptor::Combo {
                terms: terms.iter().map(|(w, p)| (*w, p.descriptor())).collect(),
            },
        }
    }

    pub fn regularity(&self) -> Regularity {
        match &self.kind {
            Kind::Geometric(map) => match map.kind() {
                crate::circle_map::MapKind::MannevillePomeau { .. } => Regularity::Hoelder(1.0),
                _ => Regularity::BoundedVariation,
            },
            Kind::Constant(_) | Kind::Trig { .. } => Regularity::Smooth,
            Kind::Indicator { .. } => Regularity::BoundedVariation,
            Kind::Combo(terms) => terms
                .iter()
                .filter(|(w, _)| *w != 0.0)
                .map(|(_, p)| p.regularity())
                .fold(Regularity::Smooth, Regularity::weakest),
        }
    }

    /// The constant value, when the potential is a literal constant (or a
    /// combination of constants).
    pub fn as_constant(&self) -> Option<f64> {
        match &self.kind {
            Kind::Constant(c) => Some(*c),
            Kind::Combo(terms) => terms
                .iter()
                .map(|(w, p)| p.as_constant().map(|c| w * c))
                .sum::<Option<f64>>(),
            _ => None,
        }
    }

    /// Value at `x`, using the right-hand limit at discontinuities.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, Side::Right)
    }

    /// One-sided value at `x`.
    pub fn eval_side(&self, x: f64, side: Side) -> f64 {
        match &self.kind {
            Kind::Geometric(map) => -map.deriv(x, side).abs().ln(),
            Kind::Constant(c) => *c,
            Kind::Trig { cos, sin } => trig(cos, sin, wrap(x)),
            Kind::Indicator { a, b } => {
                let x = wrap(x);
                let inside = match side {
                    Side::Right => *a <= x && x < *b,
                    Side::Left => {
                        let xl = if x == 0.0 { 1.0 } else { x };
                        *a < xl && xl <= *b
                    }
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Combo(terms) => terms.iter().map(|(w, p)| w * p.eval_side(x, side)).sum(),
        }
    }

    /// Value at the lifted point `y` of branch `m`, with one-sided limits taken
    /// from inside the branch domain.
    pub fn eval_on_branch(&self, map: &CircleMap, m: usize, y: f64) -> f64 {
        let br = &map.branches()[m];
        match &self.kind {
            Kind::Geometric(own) => -own.branches()[m].derivative(y).abs().ln(),
            Kind::Combo(terms) => terms
                .iter()
                .map(|(w, p)| w * p.eval_on_branch(map, m, y))
                .sum(),
            _ => {
                let side = if y >= br.hi - 1e-13 { Side::Left } else { Side::Right };
                self.eval_side(y, side)
            }
        }
    }

    /// Supremum estimate over a uniform sample grid plus break points (both sides).
    pub fn sampled_sup(&self, map: &CircleMap, samples: usize) -> f64 {
        self.sampled_values(map, samples).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Infimum estimate, as [`Potential::sampled_sup`].
    pub fn sampled_inf(&self, map: &CircleMap, samples: usize) -> f64 {
        self.sampled_values(map, samples).fold(f64::INFINITY, f64::min)
    }

    fn sampled_values<'a>(&'a self, map: &'a CircleMap, samples: usize) -> impl Iterator<Item = f64> + 'a {
        let grid = (0..samples).map(move |i| self.eval(i as f64 / samples as f64));
        let breaks = map
            .branches()
            .iter()
            .flat_map(move |b| [self.eval_on_branch(map, b.index, b.lo), self.eval_on_branch(map, b.index, b.hi)]);
        grid.chain(breaks)
    }
}

fn trig(cos: &[f64], sin: &[f64], x: f64) -> f64 {
    let c: f64 = cos
        .iter()
        .enumerate()
        .map(|(k, a)| a * (TAU * k as f64 * x).cos())
        .sum();
    let s: f64 = sin
        .iter()
        .enumerate()
        .map(|(k, a)| a * (TAU * k as f64 * x).sin())
        .sum();
    c + s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_values() {
        let d = Arc::new(CircleMap::linear(&[2.0, 2.0]).unwrap());
        let g = Potential::geometric(&d);
        assert_eq!(g.eval(0.37), -(2f64.ln()));
        let f = Arc::new(CircleMap::linear(&[2.0, 4.0, 4.0]).unwrap());
        assert_eq!(Potential::geometric(&f).eval(0.6), -(4f64.ln()));
        assert_eq!(Potential::geometric(&f).regularity(), Regularity::BoundedVariation);
        let mp = Arc::new(CircleMap::manneville_pomeau(1.0).unwrap());
        let g = Potential::geometric(&mp);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.regularity(), Regularity::Hoelder(1.0));
    }

    #[test]
    fn indicator_sides() {
        let p = Potential::indicator(0.5, 1.0).unwrap();
        assert_eq!(p.eval(0.75), 1.0);
        assert_eq!(p.eval(0.25), 0.0);
        assert_eq!(p.eval(0.0), 0.0);
        assert_eq!(p.eval_side(0.0, Side::Left), 1.0);
        assert_eq!(p.eval_side(0.5, Side::Left), 0.0);
        assert_eq!(p.eval_side(0.5, Side::Right), 1.0);
        let d = CircleMap::linear(&[2.0, 2.0]).unwrap();
        assert_eq!(p.eval_on_branch(&d, 0, 0.5), 0.0);
        assert_eq!(p.eval_on_branch(&d, 1, 1.0), 1.0);
        assert!(Potential::indicator(0.5, 0.5).is_err());
        assert!(Potential::indicator(-0.1, 0.5).is_err());
    }

    #[test]
    fn scaling_and_combination() {
        let c = Potential::constant(1.5).scale(-2.0);
        assert_eq!(c.as_constant(), Some(-3.0));
        let d = Arc::new(CircleMap::linear(&[2.0, 2.0]).unwrap());
        let g = Potential::geometric(&d);
        let z = Potential::combine(vec![(1.0, g.clone()), (-1.0, g.clone())]).unwrap();
        assert_eq!(z.eval(0.3), 0.0);
        let combo = Potential::combine(vec![(2.0, Potential::indicator(0.0, 0.5).unwrap()), (1.0, Potential::trig_series(vec![0.0, 1.0], vec![]))]).unwrap();
        assert_eq!(combo.regularity(), Regularity::BoundedVariation);
        assert!(matches!(combo.descriptor(), Descriptor::Combo { .. }));
        assert!(Potential::combine(vec![(f64::NAN, g)]).is_err());
    }

    #[test]
    fn trig_series_values() {
        let p = Potential::trig_series(vec![0.5, 1.0], vec![0.0, 2.0]);
        assert!((p.eval(0.25) - (0.5 + 2.0)).abs() < 1e-15);
        assert!((p.eval(0.0) - 1.5).abs() < 1e-15);
    }
}
