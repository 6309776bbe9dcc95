//! Full-branch circle maps with break points.
//!
//! Circle points are represented by their coordinate in `[0, 1)`. Each branch
//! is stored in *lifted* coordinates: its domain is a closed arc `[lo, hi]`
//! with `lo` in `[0, 1)` and `hi` possibly equal to `1` (or beyond, when the
//! arc wraps), and its forward map is a monotone real function whose range has
//! length exactly one. Reducing the range modulo one gives the circle map.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

const BREAK_TOL: f64 = 1e-14;
const INVERSE_TOL: f64 = 1e-14;
const NEUTRAL_TOL: f64 = 1e-9;
const FIXED_DERIV_TOL: f64 = 1e-9;
const PERIODIC_TOL: f64 = 1e-12;

/// Reduces a real number to the canonical circle representative in `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed shortest displacement from `b` to `a` on the circle, in `[-1/2, 1/2]`.
pub fn circle_diff(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - d.round()
}

/// Distance between two circle points.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    circle_diff(a, b).abs()
}

/// Which one-sided limit to take at a break point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Coefficients of the intermittent family `g(y) = y + a y^(3+alpha) + b y^(4+alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MpParams {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
}

impl MpParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1]")));
        }
        let ratio = (4.0 + alpha) / (4.0 + 2.0 * alpha);
        let b = 1.0 / (0.5f64.powf(3.0 + alpha) - ratio * 0.5f64.powf(2.0 + alpha));
        let a = -b * ratio;
        Ok(Self { alpha, a, b })
    }

    /// The half-branch `g` on `[0, 1/2]`.
    pub fn g(&self, y: f64) -> f64 {
        y + self.a * y.powf(3.0 + self.alpha) + self.b * y.powf(4.0 + self.alpha)
    }

    pub fn dg(&self, y: f64) -> f64 {
        let al = self.alpha;
        1.0 + (3.0 + al) * self.a * y.powf(2.0 + al) + (4.0 + al) * self.b * y.powf(3.0 + al)
    }

    /// Inverse of `g` on `[0, 1/2]` for a target in `[0, 1]`.
    pub fn g_inv(&self, v: f64) -> Result<f64> {
        if v <= 0.0 {
            return Ok(0.0);
        }
        if v >= 1.0 {
            return Ok(0.5);
        }
        solve_monotone(|y| self.g(y), |y| self.dg(y), v, 0.0, 0.5, v.min(0.5))
    }
}

/// The forward law of one branch, in lifted coordinates.
#[derive(Clone, Debug)]
pub enum BranchLaw {
    /// `F(y) = start + slope (y - lo)`.
    Linear { slope: f64 },
    /// Left half `g(y)` on `[0, 1/2]`.
    MpLeft(MpParams),
    /// Right half `1 - g(1 - y)` on `[1/2, 1]`.
    MpRight(MpParams),
    /// `F(y) = sum c_i y^i` in absolute lifted coordinates.
    Polynomial(Vec<f64>),
}

/// One full branch `f|J_m`.
#[derive(Clone, Debug)]
pub struct Branch {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub increasing: bool,
    law: BranchLaw,
    /// Lifted value `F(lo)`.
    start: f64,
}

impl Branch {
    fn new(index: usize, lo: f64, hi: f64, law: BranchLaw, start: f64) -> Self {
        let mut b = Self {
            index,
            lo,
            hi,
            increasing: true,
            law,
            start,
        };
        b.start = match b.law {
            BranchLaw::Linear { .. } => start,
            _ => {
                let s = b.forward_raw(lo);
                if (s - s.round()).abs() < 1e-12 {
                    s.round()
                } else {
                    s
                }
            }
        };
        b.increasing = b.forward(hi) > b.forward(lo);
        b
    }

    fn forward_raw(&self, y: f64) -> f64 {
        match &self.law {
            BranchLaw::Linear { slope } => self.start + slope * (y - self.lo),
            BranchLaw::MpLeft(p) => p.g(y),
            BranchLaw::MpRight(p) => 1.0 - p.g(1.0 - y),
            BranchLaw::Polynomial(c) => horner(c, y),
        }
    }

    /// Lifted forward map.
    pub fn forward(&self, y: f64) -> f64 {
        self.forward_raw(y)
    }

    /// Signed derivative of the lifted forward map.
    pub fn derivative(&self, y: f64) -> f64 {
        match &self.law {
            BranchLaw::Linear { slope } => *slope,
            BranchLaw::MpLeft(p) => p.dg(y),
            BranchLaw::MpRight(p) => p.dg(1.0 - y),
            BranchLaw::Polynomial(c) => horner_deriv(c, y),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Lower end of the lifted range (a half-open interval of length one).
    pub fn range_lo(&self) -> f64 {
        if self.increasing {
            self.start
        } else {
            self.start - 1.0
        }
    }

    pub fn law(&self) -> &BranchLaw {
        &self.law
    }

    /// Solves `F(y) = v` for a lifted target `v` in the closed range.
    pub fn solve_lifted(&self, v: f64) -> Result<f64> {
        match &self.law {
            BranchLaw::Linear { slope } => {
                let y = self.lo + (v - self.start) / slope;
                Ok(y.clamp(self.lo, self.hi))
            }
            BranchLaw::MpLeft(p) => p.g_inv(v),
            BranchLaw::MpRight(p) => Ok(1.0 - p.g_inv(1.0 - v)?),
            BranchLaw::Polynomial(_) => {
                let f0 = self.forward(self.lo);
                let f1 = self.forward(self.hi);
                let guess = self.lo + (v - f0) / (f1 - f0) * self.width();
                solve_monotone(
                    |y| self.forward(y),
                    |y| self.derivative(y),
                    v,
                    self.lo,
                    self.hi,
                    guess.clamp(self.lo, self.hi),
                )
            }
        }
    }

    /// The preimage in this branch of the circle point `x`.
    ///
    /// The range is treated as half-open at its upper end, so an endpoint
    /// ambiguity resolves to the end of the domain at which the range starts.
    /// With `prefer_upper` the ambiguity resolves the other way.
    pub fn inverse(&self, x: f64, prefer_upper: bool) -> Result<f64> {
        let r0 = self.range_lo();
        let mut u = wrap(x - r0);
        if prefer_upper && u < BREAK_TOL {
            u = 1.0;
        }
        self.solve_lifted(r0 + u)
    }

    fn contains_lifted(&self, y: f64) -> bool {
        y >= self.lo - 1e-12 && y <= self.hi + 1e-12
    }
}

fn horner(c: &[f64], y: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * y + ci)
}

fn horner_deriv(c: &[f64], y: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &ci)| acc * y + i as f64 * ci)
}

/// Bracketed Newton iteration with bisection fallback for a monotone function
/// on `[lo, hi]`.
pub(crate) fn solve_monotone(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    target: f64,
    lo: f64,
    hi: f64,
    guess: f64,
) -> Result<f64> {
    let increasing = f(hi) >= f(lo);
    let (mut a, mut b) = (lo, hi);
    let mut y = guess.clamp(lo, hi);
    for _ in 0..400 {
        let r = f(y) - target;
        if r == 0.0 {
            return Ok(y);
        }
        if (r < 0.0) == increasing {
            a = y;
        } else {
            b = y;
        }
        if b - a <= INVERSE_TOL {
            return Ok(0.5 * (a + b));
        }
        let d = df(y);
        let newton = y - r / d;
        let next = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - y).abs() <= 0.25 * INVERSE_TOL {
            return Ok(next);
        }
        y = next;
    }
    Err(Error::Numeric(format!(
        "inverse branch did not converge for target {target} on [{lo}, {hi}]"
    )))
}

/// Construction provenance of a map.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapKind {
    LinearFullBranch { slopes: Vec<f64> },
    MannevillePomeau { alpha: f64, a: f64, b: f64 },
    PiecewisePoly,
}

/// A point of period `n` together with its symbolic itinerary.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPoint {
    /// Canonical circle coordinate.
    pub point: f64,
    /// Zero-based branch indices `w_0 .. w_{n-1}`.
    pub itinerary: Vec<usize>,
    /// Lifted orbit points `f^i(x)` inside the closure of `J_{w_i}`.
    pub orbit: Vec<f64>,
}

/// A transitive full-branch local diffeomorphism of the circle.
#[derive(Clone, Debug)]
pub struct CircleMap {
    branches: Vec<Branch>,
    kind: MapKind,
    neutral: Vec<f64>,
    warnings: Vec<String>,
}

impl fmt::Display for CircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::LinearFullBranch { slopes } => write!(f, "linear full-branch map, slopes {slopes:?}"),
            MapKind::MannevillePomeau { alpha, .. } => write!(f, "Manneville-Pomeau map, alpha = {alpha}"),
            MapKind::PiecewisePoly => write!(f, "piecewise-polynomial map of degree {}", self.degree()),
        }
    }
}

impl CircleMap {
    /// Piecewise-linear full-branch map with branch `m` of slope `slopes[m]` on
    /// an arc of width `1 / slopes[m]`, branches laid out from `0`.
    pub fn linear(slopes: &[f64]) -> Result<Self> {
        if slopes.len() < 2 {
            return Err(Error::InvalidMap("need at least two branches".into()));
        }
        if let Some(s) = slopes.iter().find(|s| !s.is_finite() || **s < 1.0) {
            return Err(Error::InvalidMap(format!("slope {s} is not >= 1")));
        }
        let width_sum: f64 = slopes.iter().map(|s| 1.0 / s).sum();
        if (width_sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMap(format!(
                "branch widths sum to {width_sum}, expected 1"
            )));
        }
        let mut lo = 0.0;
        let mut branches = Vec::with_capacity(slopes.len());
        for (m, &s) in slopes.iter().enumerate() {
            let hi = if m + 1 == slopes.len() { 1.0 } else { lo + 1.0 / s };
            branches.push(Branch::new(m, lo, hi, BranchLaw::Linear { slope: s }, 0.0));
            lo = hi;
        }
        Self::assemble(
            branches,
            MapKind::LinearFullBranch {
                slopes: slopes.to_vec(),
            },
        )
    }

    /// The intermittent two-branch map `f_alpha`.
    pub fn manneville_pomeau(alpha: f64) -> Result<Self> {
        let p = MpParams::new(alpha)?;
        let branches = vec![
            Branch::new(0, 0.0, 0.5, BranchLaw::MpLeft(p), 0.0),
            Branch::new(1, 0.5, 1.0, BranchLaw::MpRight(p), 0.0),
        ];
        Self::assemble(
            branches,
            MapKind::MannevillePomeau {
                alpha,
                a: p.a,
                b: p.b,
            },
        )
    }

    /// Piecewise-polynomial map from explicit contiguous domains `[a, b]`
    /// (lifted; the first `a` in `[0, 1)` and the total length one) and
    /// polynomial coefficients in the absolute coordinate.
    pub fn piecewise_poly(pieces: &[((f64, f64), Vec<f64>)]) -> Result<Self> {
        if pieces.len() < 2 {
            return Err(Error::InvalidMap("need at least two branches".into()));
        }
        let first = pieces[0].0 .0;
        if !(0.0..1.0).contains(&first) {
            return Err(Error::InvalidMap(format!("first domain starts at {first}, outside [0, 1)")));
        }
        let mut branches = Vec::with_capacity(pieces.len());
        let mut prev_hi = first;
        for (m, ((a, b), coeffs)) in pieces.iter().enumerate() {
            if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMap(format!("branch {m}: bad coefficients")));
            }
            if !(b > a) {
                return Err(Error::InvalidMap(format!("branch {m}: empty domain [{a}, {b}]")));
            }
            if (a - prev_hi).abs() > 1e-12 {
                return Err(Error::InvalidMap(format!(
                    "branch {m}: domain starts at {a}, previous ends at {prev_hi}"
                )));
            }
            prev_hi = *b;
            branches.push(Branch::new(m, *a, *b, BranchLaw::Polynomial(coeffs.clone()), 0.0));
        }
        if (prev_hi - first - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMap(format!(
                "domains cover length {}, expected 1",
                prev_hi - first
            )));
        }
        for br in &branches {
            let span = (br.forward(br.hi) - br.forward(br.lo)).abs();
            if (span - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidMap(format!(
                    "branch {} is not full: image length {span}",
                    br.index
                )));
            }
            let sign = br.derivative(br.lo).signum();
            for i in 0..=1000 {
                let y = br.lo + br.width() * i as f64 / 1000.0;
                let d = br.derivative(y);
                if d == 0.0 || d.signum() != sign || !d.is_finite() {
                    return Err(Error::InvalidMap(format!(
                        "branch {} has a critical point near {y}",
                        br.index
                    )));
                }
            }
        }
        Self::assemble(branches, MapKind::PiecewisePoly)
    }

    fn assemble(branches: Vec<Branch>, kind: MapKind) -> Result<Self> {
        let mut map = Self {
            branches,
            kind,
            neutral: Vec::new(),
            warnings: Vec::new(),
        };
        for m in 0..map.degree() {
            let x = map.branches[m].lo;
            let dl = map.deriv(x, Side::Left).abs();
            let dr = map.deriv(x, Side::Right).abs();
            if dl < 1.0 - 1e-12 || dr < 1.0 - 1e-12 {
                map.warnings
                    .push(format!("|Df| < 1 at break point {}", wrap(x)));
            }
            if circle_dist(map.eval(x), x) < 1e-12 && (dl - dr).abs() > FIXED_DERIV_TOL {
                map.warnings.push(format!(
                    "one-sided derivatives {dl} and {dr} disagree at fixed break point {}",
                    wrap(x)
                ));
            }
        }
        map.neutral = map.find_neutral_fixed_points()?;
        Ok(map)
    }

    pub fn degree(&self) -> usize {
        self.branches.len()
    }

    /// `h_top(f) = log deg(f)`.
    pub fn topological_entropy(&self) -> f64 {
        (self.degree() as f64).ln()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch(&self, m: usize) -> Result<&Branch> {
        self.branches
            .get(m)
            .ok_or_else(|| Error::Domain(format!("branch index {m} out of range")))
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Construction-time warnings about the class invariants.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Break points `x_1 < ... < x_k` as circle coordinates.
    pub fn break_points(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.branches.iter().map(|b| wrap(b.lo)).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Finds the branch containing `x` on the given side, returning the branch
    /// index and the lifted coordinate of `x` in its domain.
    pub fn locate(&self, x: f64, side: Side) -> (usize, f64) {
        let lo0 = self.branches[0].lo;
        let xl = lo0 + wrap(x - lo0);
        let m = self
            .branches
            .partition_point(|b| b.lo <= xl + BREAK_TOL)
            .saturating_sub(1);
        let at_break = (xl - self.branches[m].lo).abs() <= BREAK_TOL;
        if side == Side::Left && at_break {
            if m == 0 {
                let last = self.degree() - 1;
                (last, self.branches[last].hi)
            } else {
                (m - 1, self.branches[m - 1].hi)
            }
        } else if at_break {
            (m, self.branches[m].lo)
        } else {
            (m, xl)
        }
    }

    /// `f(x)` reduced to `[0, 1)`.
    pub fn eval(&self, x: f64) -> f64 {
        let (m, y) = self.locate(x, Side::Right);
        wrap(self.branches[m].forward(y))
    }

    /// One-sided derivative at `x`.
    pub fn deriv(&self, x: f64, side: Side) -> f64 {
        let (m, y) = self.locate(x, side);
        self.branches[m].derivative(y)
    }

    /// The unique `y` in `J_m` with `f(y) = x`, as a circle coordinate.
    pub fn inverse_branch(&self, m: usize, x: f64) -> Result<f64> {
        Ok(wrap(self.branch(m)?.inverse(x, false)?))
    }

    /// Forward orbit `x, f(x), ..., f^{n-1}(x)`.
    pub fn orbit(&self, x: f64, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let mut y = wrap(x);
        for _ in 0..n {
            out.push(y);
            y = self.eval(y);
        }
        out
    }

    /// `(1/n) sum_{i<n} log |Df(f^i x)|`, taking derivatives from the right.
    pub fn lyapunov_avg(&self, x: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("n must be >= 1".into()));
        }
        let s: f64 = self
            .orbit(x, n)
            .into_iter()
            .map(|y| self.deriv(y, Side::Right).abs().ln())
            .sum();
        Ok(s / n as f64)
    }

    /// Neutral fixed points: `f(p) = p` with `|Df(p)| = 1`.
    pub fn neutral_fixed_points(&self) -> &[f64] {
        &self.neutral
    }

    fn find_neutral_fixed_points(&self) -> Result<Vec<f64>> {
        let mut found: Vec<f64> = Vec::new();
        let push = |p: f64, found: &mut Vec<f64>| {
            let p = wrap(p);
            if !found.iter().any(|q| circle_dist(*q, p) < 1e-9) {
                found.push(p);
            }
        };
        for br in &self.branches {
            // Break points first, where neutral points of the class usually sit.
            for (y, side) in [(br.lo, Side::Right), (br.hi, Side::Left)] {
                let d = br.derivative(y).abs();
                let _ = side;
                if circle_dist(br.forward(y), y) < NEUTRAL_TOL && (d - 1.0).abs() < NEUTRAL_TOL {
                    push(y, &mut found);
                }
            }
            // Interior: local minima of | |DF| - 1 | on a fine grid, refined.
            let samples = 2000;
            let h = br.width() / samples as f64;
            let dev = |y: f64| (br.derivative(y).abs() - 1.0).abs();
            for i in 1..samples {
                let y = br.lo + h * i as f64;
                let (l, c, r) = (dev(y - h), dev(y), dev(y + h));
                if c <= l && c <= r && c < 1e-2 {
                    let p = golden_min(&dev, y - h, y + h);
                    if dev(p) < NEUTRAL_TOL && circle_dist(br.forward(p), p) < NEUTRAL_TOL {
                        push(p, &mut found);
                    }
                }
            }
        }
        found.sort_by(f64::total_cmp);
        Ok(found)
    }

    fn inverse_chain(&self, itinerary: &[usize], x: f64, prefer_upper: bool, orbit: &mut [f64]) -> Result<(f64, f64)> {
        let mut cur = x;
        let mut dpsi = 1.0;
        let mut first = 0.0;
        for i in (0..itinerary.len()).rev() {
            let br = &self.branches[itinerary[i]];
            let y = br.inverse(cur, prefer_upper)?;
            orbit[i] = y;
            dpsi /= br.derivative(y);
            cur = wrap(y);
            first = y;
        }
        Ok((first, dpsi))
    }

    /// The point of period `n` with the given itinerary (zero-based branch
    /// indices), together with its lifted orbit.
    pub fn periodic_point(&self, itinerary: &[usize]) -> Result<PeriodicPoint> {
        let n = itinerary.len();
        if n == 0 {
            return Err(Error::Domain("empty itinerary".into()));
        }
        if let Some(m) = itinerary.iter().find(|&&m| m >= self.degree()) {
            return Err(Error::Domain(format!("branch index {m} out of range")));
        }
        let mut orbit = vec![0.0; n];
        let last = &self.branches[itinerary[n - 1]];
        let anchor = wrap(last.range_lo());
        // Cylinder endpoints are fixed exactly when the chain closes on the anchor.
        for prefer_upper in [false, true] {
            let (p0, _) = self.inverse_chain(itinerary, anchor, prefer_upper, &mut orbit)?;
            if circle_dist(p0, anchor) < BREAK_TOL * 10.0 {
                return Ok(self.finish_periodic(itinerary, orbit));
            }
        }
        let br0 = &self.branches[itinerary[0]];
        let mut x = wrap(0.5 * (br0.lo + br0.hi));
        let (p, _) = self.inverse_chain(itinerary, x, false, &mut orbit)?;
        x = wrap(p);
        let mut resid = f64::INFINITY;
        for _ in 0..500 {
            let (p, dpsi) = self.inverse_chain(itinerary, x, false, &mut orbit)?;
            let r = circle_diff(p, x);
            resid = r.abs();
            if resid <= 0.1 * PERIODIC_TOL {
                break;
            }
            let denom = dpsi - 1.0;
            let newton = if denom.abs() > 1e-12 { wrap(x - r / denom) } else { wrap(p) };
            let (pn, _) = self.inverse_chain(itinerary, newton, false, &mut orbit)?;
            x = if circle_diff(pn, newton).abs() < resid { newton } else { wrap(p) };
        }
        if resid > PERIODIC_TOL {
            // Bisection on the residual across the first branch.
            let (mut a, mut b) = (br0.lo, br0.hi);
            let res = |y: f64, orbit: &mut [f64]| -> Result<f64> {
                let (p, _) = self.inverse_chain(itinerary, wrap(y), false, orbit)?;
                Ok(circle_diff(p, wrap(y)))
            };
            let mut ra = res(a, &mut orbit)?;
            for _ in 0..200 {
                let c = 0.5 * (a + b);
                let rc = res(c, &mut orbit)?;
                if (rc <= 0.0) == (ra <= 0.0) {
                    a = c;
                    ra = rc;
                } else {
                    b = c;
                }
                if b - a < 1e-15 {
                    break;
                }
            }
            x = wrap(0.5 * (a + b));
            let (p, _) = self.inverse_chain(itinerary, x, false, &mut orbit)?;
            resid = circle_dist(p, x);
            if resid > 1e-9 {
                return Err(Error::Numeric(format!(
                    "periodic point for itinerary {:?} did not converge (residual {resid:e})",
                    itinerary
                )));
            }
        }
        self.inverse_chain(itinerary, x, false, &mut orbit)?;
        Ok(self.finish_periodic(itinerary, orbit))
    }

    fn finish_periodic(&self, itinerary: &[usize], orbit: Vec<f64>) -> PeriodicPoint {
        let mut point = wrap(orbit[0]);
        if 1.0 - point < PERIODIC_TOL {
            point = 0.0;
        }
        debug_assert!(orbit
            .iter()
            .zip(itinerary)
            .all(|(y, &m)| self.branches[m].contains_lifted(*y)));
        PeriodicPoint {
            point,
            itinerary: itinerary.to_vec(),
            orbit,
        }
    }

    /// All points of period `n`, one per itinerary in `{0..k}^n`.
    pub fn periodic_points(&self, n: usize, cap: usize) -> Result<Vec<PeriodicPoint>> {
        let count = itinerary_count(self.degree(), n, cap)?;
        (0..count)
            .map(|idx| self.periodic_point(&decode_itinerary(idx, self.degree(), n)))
            .collect()
    }
}

/// `k^n`, or a resource error when it exceeds `cap`.
pub fn itinerary_count(k: usize, n: usize, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain("period must be >= 1".into()));
    }
    let mut c: usize = 1;
    for _ in 0..n {
        c = c
            .checked_mul(k)
            .filter(|c| *c <= cap)
            .ok_or_else(|| Error::ResourceCap(format!("{k}^{n} itineraries exceed cap {cap}")))?;
    }
    Ok(c)
}

/// Base-`k` digits of `idx`, most significant first.
pub fn decode_itinerary(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for slot in w.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
    w
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..100 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn doubling_layout() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        assert_eq!(f.break_points(), vec![0.0, 0.5]);
        assert_eq!(f.degree(), 2);
        assert!(close(f.eval(0.3), 0.6, 1e-15));
        assert_eq!(f.deriv(0.77, Side::Left), 2.0);
        assert!(close(f.inverse_branch(0, 0.6).unwrap(), 0.3, 1e-15));
        assert!(close(f.inverse_branch(1, 0.6).unwrap(), 0.8, 1e-15));
        assert!(f.neutral_fixed_points().is_empty());
    }

    #[test]
    fn three_branch_layout() {
        let f = CircleMap::linear(&[2.0, 4.0, 4.0]).unwrap();
        assert_eq!(f.break_points(), vec![0.0, 0.5, 0.75]);
        assert_eq!(f.degree(), 3);
        assert!(close(f.eval(0.625), 0.5, 1e-15));
        assert!(close(f.lyapunov_avg(0.0, 7).unwrap(), 2f64.ln(), 1e-15));
        assert!(f.neutral_fixed_points().is_empty());
        // The fixed break point 0 has one-sided slopes 2 and 4.
        assert!(f.warnings().iter().any(|w| w.contains("disagree")));
    }

    #[test]
    fn rejects_bad_slopes() {
        assert!(matches!(CircleMap::linear(&[2.0, 3.0]), Err(Error::InvalidMap(_))));
        assert!(matches!(CircleMap::linear(&[0.5, 2.0]), Err(Error::InvalidMap(_))));
        assert!(matches!(CircleMap::linear(&[1.0]), Err(Error::InvalidMap(_))));
    }

    #[test]
    fn mp_coefficients_alpha_one() {
        let p = MpParams::new(1.0).unwrap();
        assert!(close(p.a, 20.0, 1e-12));
        assert!(close(p.b, -24.0, 1e-12));
        assert!(close(p.g(0.5), 1.0, 1e-14));
        assert!(close(p.dg(0.5), 3.5, 1e-13));
        assert!(MpParams::new(1.5).is_err());
        assert!(MpParams::new(-0.1).is_err());
    }

    #[test]
    fn mp_map_basics() {
        let f = CircleMap::manneville_pomeau(1.0).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.deriv(0.0, Side::Right), 1.0);
        assert_eq!(f.deriv(0.0, Side::Left), 1.0);
        assert!(close(f.deriv(0.5, Side::Left), 3.5, 1e-13));
        assert!(close(f.deriv(0.5, Side::Right), 3.5, 1e-13));
        assert!(close(f.inverse_branch(0, 1.0 - 1e-16).unwrap(), 0.5, 1e-12));
        assert_eq!(f.neutral_fixed_points(), &[0.0]);
        assert_eq!(f.lyapunov_avg(0.0, 5).unwrap(), 0.0);
        for alpha in [0.0, 0.25, 0.5, 0.75] {
            let f = CircleMap::manneville_pomeau(alpha).unwrap();
            assert_eq!(f.eval(0.0), 0.0);
            assert!(close(f.deriv(0.0, Side::Right), 1.0, 1e-15));
        }
    }

    #[test]
    fn doubling_periodic_points() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let p1 = f.periodic_points(1, 1 << 20).unwrap();
        assert_eq!(p1.len(), 2);
        assert!(p1.iter().all(|p| p.point == 0.0));
        let p2 = f.periodic_points(2, 1 << 20).unwrap();
        let pts: Vec<f64> = p2.iter().map(|p| p.point).collect();
        for (got, want) in pts.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0]) {
            assert!(close(*got, want, 1e-12), "{pts:?}");
        }
    }

    #[test]
    fn mp_fixed_points_merge_at_zero() {
        let f = CircleMap::manneville_pomeau(1.0).unwrap();
        let p = f.periodic_points(1, 16).unwrap();
        assert_eq!(p[0].point, 0.0);
        assert_eq!(p[1].point, 0.0);
        assert_eq!(p[1].orbit[0], 1.0);
    }

    #[test]
    fn period_cap() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        assert!(matches!(f.periodic_points(11, 1024), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn piecewise_poly_doubling() {
        let f = CircleMap::piecewise_poly(&[((0.0, 0.5), vec![0.0, 2.0]), ((0.5, 1.0), vec![-1.0, 2.0])]).unwrap();
        assert!(close(f.eval(0.3), 0.6, 1e-15));
        assert!(close(f.eval(0.8), 0.6, 1e-15));
        assert!(close(f.inverse_branch(1, 0.6).unwrap(), 0.8, 1e-14));
        // A critical point is rejected.
        let bad = CircleMap::piecewise_poly(&[((0.0, 0.5), vec![0.0, 0.0, 4.0]), ((0.5, 1.0), vec![-1.0, 2.0])]);
        assert!(matches!(bad, Err(Error::InvalidMap(_))));
        // Non-full branch.
        let bad = CircleMap::piecewise_poly(&[((0.0, 0.5), vec![0.0, 1.5]), ((0.5, 1.0), vec![-1.0, 2.0])]);
        assert!(matches!(bad, Err(Error::InvalidMap(_))));
    }
}
