//! The weighted transfer operator `(L g)(x) = sum_{f(y)=x} e^{phi(y)} g(y)`.
//!
//! Two finite representations are provided:
//!
//! * grid functions with exact preimage sums at the nodes (used for the
//!   norm-growth pressure estimate `lim (1/n) log ||L^n 1||`), and
//! * the Ulam matrix, i.e. the projection of `L` onto functions constant on
//!   the cells of a partition. Entry `(i, j)` is the average over cell `i` of
//!   `L 1_{cell j}`, computed by midpoint quadrature in the image variable.
//!
//! Every partition contains the break points and the neutral fixed points of
//! the map and is refined geometrically towards the latter.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::circle_map::{wrap, CircleMap};
use crate::config::{AnalysisConfig, OperatorConfig};
use crate::error::{Error, Result};
use crate::orbits::orbit_extremes;
use crate::potential::{Potential, Regularity};

const NODE_MERGE: f64 = 1e-14;

/// A partition of the circle into arcs `[edges[i], edges[i+1])`, with
/// `edges[0] = 0` and a final edge at `1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    edges: Vec<f64>,
}

impl Partition {
    /// Uniform partition into `n` cells, refined to the map's break points and
    /// neutral fixed points, plus `neutral_levels` dyadic layers around each
    /// neutral point.
    pub fn for_map(map: &CircleMap, n: usize, neutral_levels: usize) -> Self {
        let mut pts: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        pts.extend(map.break_points());
        let h = 1.0 / n as f64;
        for &p in map.neutral_fixed_points() {
            pts.push(p);
            for k in 1..=neutral_levels {
                let d = h * 0.5f64.powi(k as i32);
                pts.push(wrap(p + d));
                pts.push(wrap(p - d));
            }
        }
        Self::from_points(pts)
    }

    /// Partition with the given node set (0 is always added).
    pub fn from_points(mut pts: Vec<f64>) -> Self {
        pts.push(0.0);
        for p in pts.iter_mut() {
            *p = wrap(*p);
        }
        pts.sort_by(f64::total_cmp);
        let mut edges: Vec<f64> = Vec::with_capacity(pts.len() + 1);
        for p in pts {
            if p > 1.0 - NODE_MERGE {
                continue;
            }
            if edges.last().map_or(true, |&q| p - q > NODE_MERGE) {
                edges.push(p);
            }
        }
        edges.push(1.0);
        Self { edges }
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_points((0..n).map(|i| i as f64 / n as f64).collect())
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Left endpoints of the cells.
    pub fn nodes(&self) -> &[f64] {
        &self.edges[..self.cells()]
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        (self.edges[i], self.edges[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Index of the cell containing the circle point `x`.
    pub fn cell_of(&self, x: f64) -> usize {
        let x = wrap(x);
        self.edges
            .partition_point(|&e| e <= x)
            .saturating_sub(1)
            .min(self.cells() - 1)
    }
}

/// A function sampled at the nodes of a partition, interpolated linearly
/// (periodically) between them.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    partition: Arc<Partition>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(partition: Arc<Partition>, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.cells() {
            return Err(Error::Domain(format!(
                "{} values for {} nodes",
                values.len(),
                partition.cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("grid function has non-finite values".into()));
        }
        Ok(Self { partition, values })
    }

    pub fn from_fn(partition: Arc<Partition>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = partition.nodes().iter().map(|&x| f(x)).collect();
        Self::new(partition, values)
    }

    pub fn constant(partition: Arc<Partition>, c: f64) -> Self {
        let n = partition.cells();
        Self {
            partition,
            values: vec![c; n],
        }
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn nodes(&self) -> &[f64] {
        self.partition.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interpolate(&self, x: f64) -> f64 {
        let (c, frac) = interp_slot(&self.partition, x);
        let next = (c + 1) % self.values.len();
        self.values[c] * (1.0 - frac) + self.values[next] * frac
    }

    /// Writes `(node, value)` rows.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "node,value")?;
        for (x, v) in self.nodes().iter().zip(&self.values) {
            writeln!(out, "{x:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

fn interp_slot(p: &Partition, x: f64) -> (usize, f64) {
    let x = wrap(x);
    let c = p.cell_of(x);
    let (a, b) = p.bounds(c);
    (c, ((x - a) / (b - a)).clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug)]
struct Preimage {
    branch: usize,
    y: f64,
    cell: usize,
    frac: f64,
}

/// Preimages of every grid node under every branch, with interpolation slots.
#[derive(Clone, Debug)]
pub struct GrowthGeometry {
    partition: Arc<Partition>,
    degree: usize,
    pre: Vec<Preimage>,
}

impl GrowthGeometry {
    pub fn new(map: &CircleMap, partition: Arc<Partition>) -> Result<Self> {
        let k = map.degree();
        let mut pre = Vec::with_capacity(partition.cells() * k);
        for &x in partition.nodes() {
            for br in map.branches() {
                let y = br.inverse(x, false)?;
                let (cell, frac) = interp_slot(&partition, y);
                pre.push(Preimage {
                    branch: br.index,
                    y,
                    cell,
                    frac,
                });
            }
        }
        Ok(Self {
            partition,
            degree: k,
            pre,
        })
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    fn weights(&self, map: &CircleMap, phi: &Potential) -> Vec<f64> {
        self.pre
            .iter()
            .map(|p| phi.eval_on_branch(map, p.branch, p.y).exp())
            .collect()
    }

    fn apply_weighted(&self, weights: &[f64], g: &[f64], out: &mut [f64]) {
        let n = g.len();
        for (node, slot) in out.iter_mut().enumerate() {
            let base = node * self.degree;
            *slot = (0..self.degree)
                .map(|m| {
                    let p = &self.pre[base + m];
                    let gv = g[p.cell] * (1.0 - p.frac) + g[(p.cell + 1) % n] * p.frac;
                    weights[base + m] * gv
                })
                .sum();
        }
    }

    /// `L_phi g` at the nodes.
    pub fn apply(&self, map: &CircleMap, phi: &Potential, g: &GridFunction) -> Result<GridFunction> {
        if g.partition() != &self.partition {
            return Err(Error::Domain("grid function lives on a different partition".into()));
        }
        let w = self.weights(map, phi);
        let mut out = vec![0.0; g.values.len()];
        self.apply_weighted(&w, &g.values, &mut out);
        GridFunction::new(Arc::clone(&self.partition), out)
    }

    /// Averaged slope of `n -> log ||L^n 1||_inf` over the last `window` steps.
    pub fn growth_rate(&self, map: &CircleMap, phi: &Potential, n_max: usize, window: usize) -> Result<GrowthEstimate> {
        if window < 2 || n_max < window {
            return Err(Error::Domain(format!(
                "need n_max >= window >= 2, got n_max = {n_max}, window = {window}"
            )));
        }
        let w = self.weights(map, phi);
        let mut g = vec![1.0; self.partition.cells()];
        let mut next = vec![0.0; g.len()];
        let mut increments = Vec::with_capacity(n_max);
        for step in 0..n_max {
            self.apply_weighted(&w, &g, &mut next);
            let norm = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !norm.is_finite() || norm <= 0.0 {
                return Err(Error::Numeric(format!(
                    "norm growth overflowed or vanished at step {}",
                    step + 1
                )));
            }
            increments.push(norm.ln());
            for (gi, ni) in g.iter_mut().zip(&next) {
                *gi = ni / norm;
            }
        }
        let tail = &increments[n_max - window..];
        let pressure = tail.iter().sum::<f64>() / window as f64;
        let drift = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - tail.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(GrowthEstimate {
            pressure,
            drift,
            low_confidence: drift > 1e-6 * pressure.abs().max(1.0),
            increments,
        })
    }
}

/// Result of the norm-growth pressure estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub pressure: f64,
    /// Spread of the per-step log-growth over the averaging window.
    pub drift: f64,
    pub low_confidence: bool,
    /// `log ||L^{n} 1|| - log ||L^{n-1} 1||` for `n = 1..=n_max`.
    #[serde(skip)]
    pub increments: Vec<f64>,
}

/// `L_phi g` with preimages computed on the fly.
pub fn apply(map: &CircleMap, phi: &Potential, g: &GridFunction) -> Result<GridFunction> {
    GrowthGeometry::new(map, Arc::clone(g.partition()))?.apply(map, phi, g)
}

/// Pressure estimate from the growth of `||L^n 1||_inf`.
pub fn growth_rate_pressure(map: &CircleMap, phi: &Potential, cfg: &OperatorConfig) -> Result<GrowthEstimate> {
    let part = Arc::new(Partition::for_map(map, cfg.growth_grid(), cfg.neutral_levels));
    GrowthGeometry::new(map, part)?.growth_rate(map, phi, cfg.growth_n_max, cfg.growth_window)
}

#[derive(Clone, Debug)]
struct Piece {
    slot: usize,
    branch: usize,
    dx: f64,
    /// Offset into `UlamGeometry::quad_y`.
    quad: usize,
}

/// Potential-independent part of an Ulam discretization: the partition, the
/// sparsity pattern and the quadrature nodes.
#[derive(Clone, Debug)]
pub struct UlamGeometry {
    partition: Arc<Partition>,
    row_ptr: Arc<Vec<usize>>,
    col_idx: Arc<Vec<usize>>,
    pieces: Vec<Piece>,
    quad_y: Vec<f64>,
    quad_n: usize,
}

impl UlamGeometry {
    pub fn new(map: &CircleMap, cfg: &OperatorConfig) -> Result<Self> {
        let part = Partition::for_map(map, cfg.ulam_n.max(map.degree()), cfg.neutral_levels);
        Self::with_partition(map, Arc::new(part), cfg.quad_subdiv.max(1))
    }

    pub fn with_partition(map: &CircleMap, partition: Arc<Partition>, quad_n: usize) -> Result<Self> {
        let edges = partition.edges();
        let mut raw: Vec<(usize, usize, usize, f64, Vec<f64>)> = Vec::new();
        for br in map.branches() {
            let r0 = br.range_lo();
            let mut targets: Vec<f64> = edges.iter().map(|&e| r0 + wrap(e - r0)).collect();
            targets.push(r0);
            targets.push(r0 + 1.0);
            let mut ys: Vec<f64> = targets
                .iter()
                .map(|&v| br.solve_lifted(v))
                .collect::<Result<_>>()?;
            let shift_lo = br.lo.floor() as i64 - 1;
            let shift_hi = br.hi.ceil() as i64 + 1;
            for &e in &edges[..edges.len() - 1] {
                for j in shift_lo..=shift_hi {
                    let y = e + j as f64;
                    if y > br.lo && y < br.hi {
                        ys.push(y);
                    }
                }
            }
            ys.push(br.lo);
            ys.push(br.hi);
            ys.sort_by(f64::total_cmp);
            ys.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
            for w in ys.windows(2) {
                let (y0, y1) = (w[0], w[1]);
                let (f0, f1) = (br.forward(y0), br.forward(y1));
                let (xa, xb) = if f0 <= f1 { (f0, f1) } else { (f1, f0) };
                let dx = xb - xa;
                if dx <= 0.0 {
                    continue;
                }
                let j = partition.cell_of(0.5 * (y0 + y1));
                let i = partition.cell_of(0.5 * (xa + xb));
                let yq = (0..quad_n)
                    .map(|q| br.solve_lifted(xa + (q as f64 + 0.5) * dx / quad_n as f64))
                    .collect::<Result<Vec<_>>>()?;
                raw.push((i, j, br.index, dx, yq));
            }
        }
        raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let n = partition.cells();
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::new();
        let mut pieces = Vec::with_capacity(raw.len());
        let mut quad_y = Vec::with_capacity(raw.len() * quad_n);
        let mut last: Option<(usize, usize)> = None;
        for (i, j, branch, dx, yq) in raw {
            if last != Some((i, j)) {
                col_idx.push(j);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
            pieces.push(Piece {
                slot: col_idx.len() - 1,
                branch,
                dx,
                quad: quad_y.len(),
            });
            quad_y.extend(yq);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            partition,
            row_ptr: Arc::new(row_ptr),
            col_idx: Arc::new(col_idx),
            pieces,
            quad_y,
            quad_n,
        })
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    /// Assembles the Ulam matrix of `L_phi`.
    pub fn matrix(&self, map: &CircleMap, phi: &Potential) -> Result<UlamMatrix> {
        let mut values = vec![0.0; self.col_idx.len()];
        for p in &self.pieces {
            let ys = &self.quad_y[p.quad..p.quad + self.quad_n];
            let s: f64 = ys.iter().map(|&y| phi.eval_on_branch(map, p.branch, y).exp()).sum();
            values[p.slot] += p.dx * s / self.quad_n as f64;
        }
        for i in 0..self.partition.cells() {
            let w = self.partition.width(i);
            for v in &mut values[self.row_ptr[i]..self.row_ptr[i + 1]] {
                *v /= w;
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("Ulam matrix has non-finite entries".into()));
        }
        Ok(UlamMatrix {
            partition: Arc::clone(&self.partition),
            row_ptr: Arc::clone(&self.row_ptr),
            col_idx: Arc::clone(&self.col_idx),
            values,
        })
    }
}

/// Nonnegative sparse (CSR) matrix approximating `L_phi` on cell averages.
#[derive(Clone, Debug)]
pub struct UlamMatrix {
    partition: Arc<Partition>,
    row_ptr: Arc<Vec<usize>>,
    col_idx: Arc<Vec<usize>>,
    values: Vec<f64>,
}

impl UlamMatrix {
    pub fn dim(&self) -> usize {
        self.partition.cells()
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, col, weight)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
        }
        d
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.values[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// `out = M x`.
    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|k| self.values[k] * x[self.col_idx[k]])
                .sum();
        }
    }

    /// `out = M^T x`.
    pub fn mul_transpose(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "row,col,weight")?;
        for (i, j, v) in self.triplets() {
            writeln!(out, "{i},{j},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Outcome of a positive power iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerResult {
    pub eigenvalue: f64,
    /// Collatz-Wielandt bracket `[min (Mx)_i/x_i, max (Mx)_i/x_i]`.
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

fn positive_power(n: usize, apply: impl Fn(&[f64], &mut [f64]), max_iter: usize, tol: f64) -> Result<PowerResult> {
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let (mut lower, mut upper, mut lambda) = (0.0, f64::INFINITY, 0.0);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter.max(1) {
        iterations = it;
        apply(&x, &mut y);
        let norm = y.iter().fold(0.0f64, |m, v| m.max(*v));
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Numeric(format!("power iteration broke down at step {it}")));
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (xi, yi) in x.iter().zip(&y) {
            if *xi > 1e-280 {
                let r = yi / xi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        lower = lo;
        upper = hi;
        lambda = norm;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if hi - lo <= tol * hi {
            converged = true;
            break;
        }
    }
    Ok(PowerResult {
        eigenvalue: lambda,
        lower,
        upper,
        iterations,
        converged,
        vector: x,
    })
}

/// Spectral radius of a nonnegative Ulam matrix by power iteration.
pub fn spectral_radius(u: &UlamMatrix, cfg: &OperatorConfig) -> Result<PowerResult> {
    positive_power(u.dim(), |x, y| u.mul(x, y), cfg.power_max_iter, cfg.power_tol)
}

/// Leading eigendata `(lambda, h, nu)` of an Ulam matrix.
#[derive(Clone, Debug, Serialize)]
pub struct LeadingEigen {
    pub lambda: f64,
    /// Cell values of the eigenfunction, normalized so `sum h_i nu_i = 1`.
    pub h: Vec<f64>,
    /// Conformal-measure weights of the cells, summing to one.
    pub nu: Vec<f64>,
    pub right: PowerResult,
    pub left: PowerResult,
    /// `max(||Mh - lambda h||, ||nu M - lambda nu||) / lambda` (sup norms, relative).
    pub residual: f64,
}

impl LeadingEigen {
    pub fn converged(&self) -> bool {
        self.right.converged && self.left.converged
    }
}

/// Power iteration on `M` and `M^T`.
pub fn leading_eigenpair(u: &UlamMatrix, cfg: &OperatorConfig) -> Result<LeadingEigen> {
    let right = positive_power(u.dim(), |x, y| u.mul(x, y), cfg.power_max_iter, cfg.power_tol)?;
    let left = positive_power(u.dim(), |x, y| u.mul_transpose(x, y), cfg.power_max_iter, cfg.power_tol)?;
    let lambda = right.eigenvalue;
    let total: f64 = left.vector.iter().sum();
    let nu: Vec<f64> = left.vector.iter().map(|v| v / total).collect();
    let pairing: f64 = right.vector.iter().zip(&nu).map(|(h, n)| h * n).sum();
    let h: Vec<f64> = right.vector.iter().map(|v| v / pairing).collect();
    let n = u.dim();
    let mut tmp = vec![0.0; n];
    u.mul(&h, &mut tmp);
    let hn = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r1 = tmp.iter().zip(&h).fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs())) / hn;
    u.mul_transpose(&nu, &mut tmp);
    let nn = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r2 = tmp.iter().zip(&nu).fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs())) / nn;
    Ok(LeadingEigen {
        lambda,
        h,
        nu,
        right,
        left,
        residual: r1.max(r2) / lambda,
    })
}

/// Estimate of the second largest eigenvalue modulus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Subleading {
    pub modulus: f64,
    pub gap_ratio: f64,
    /// Modulus implied by the average norm growth over the final iterations.
    pub growth_modulus: f64,
    pub iterations: usize,
    /// Leading-pair residual too large for a reliable deflation.
    pub deflation_flagged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Power iteration on the deflated matrix `M - lambda h nu^T`, finished by a
/// two-dimensional Rayleigh-Ritz step so that complex or sign-alternating
/// subleading pairs are resolved.
pub fn subleading_modulus(u: &UlamMatrix, lead: &LeadingEigen, cfg: &OperatorConfig) -> Result<Subleading> {
    let n = u.dim();
    let flagged = lead.residual > 1e-6;
    if n <= 1 {
        return Ok(Subleading {
            modulus: 0.0,
            gap_ratio: 0.0,
            growth_modulus: 0.0,
            iterations: 0,
            deflation_flagged: flagged,
        });
    }
    let (h, nu) = (&lead.h, &lead.nu);
    let project = |v: &mut [f64]| {
        let c = dot(nu, v);
        for (vi, hi) in v.iter_mut().zip(h) {
            *vi -= c * hi;
        }
    };
    let apply = |x: &[f64], out: &mut [f64]| {
        u.mul(x, out);
        project(out);
    };
    // Deterministic pseudo-random start.
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    project(&mut x);
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; n];
    let iters = cfg.subleading_max_iter.max(8);
    let window = (iters / 10).max(4);
    let mut logs = Vec::with_capacity(iters);
    for it in 0..iters {
        apply(&x, &mut y);
        let ny = norm2(&y);
        if ny <= 1e-15 * lead.lambda || !ny.is_finite() {
            // The deflated operator annihilated the iterate: no subleading spectrum.
            return Ok(Subleading {
                modulus: 0.0,
                gap_ratio: 0.0,
                growth_modulus: 0.0,
                iterations: it + 1,
                deflation_flagged: flagged,
            });
        }
        logs.push(ny.ln());
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    let growth_modulus = (logs[iters - window..].iter().sum::<f64>() / window as f64).exp();
    // Rayleigh-Ritz on span{x, Bx}.
    apply(&x, &mut y);
    let a11 = dot(&x, &y);
    let mut q2: Vec<f64> = y.iter().zip(&x).map(|(yi, xi)| yi - a11 * xi).collect();
    let nq = norm2(&q2);
    let modulus = if nq <= 1e-10 * norm2(&y) {
        a11.abs()
    } else {
        q2.iter_mut().for_each(|v| *v /= nq);
        let mut bq2 = vec![0.0; n];
        apply(&q2, &mut bq2);
        let a12 = dot(&x, &bq2);
        let a21 = dot(&q2, &y);
        let a22 = dot(&q2, &bq2);
        let tr = a11 + a22;
        let det = a11 * a22 - a12 * a21;
        let disc = tr * tr / 4.0 - det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
        } else {
            det.abs().sqrt()
        }
    };
    Ok(Subleading {
        modulus,
        gap_ratio: modulus / lead.lambda,
        growth_modulus,
        iterations: iters,
        deflation_flagged: flagged,
    })
}

/// Essential-radius bound paired with the spectral radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssentialBound {
    /// `exp P(phi)` from norm growth.
    pub rho: f64,
    /// `exp P(phi - alpha log|Df|)` from norm growth.
    pub bound: f64,
    pub alpha: f64,
    /// `P(phi) - P(phi - alpha log|Df|)`.
    pub margin: f64,
    /// Gap certificate: `margin` exceeds the configured certificate margin.
    pub certificate: bool,
    /// For bounded-variation potentials, `exp(max periodic average of phi)`;
    /// an upper bound only.
    pub bv_bound: Option<f64>,
}

/// `exp(P(phi - alpha log|Df|))` compared against `exp(P(phi))`.
pub fn ess_radius_bound(map: &CircleMap, phi: &Potential, alpha: f64, cfg: &AnalysisConfig) -> Result<EssentialBound> {
    let part = Arc::new(Partition::for_map(map, cfg.operator.growth_grid(), cfg.operator.neutral_levels));
    let gg = GrowthGeometry::new(map, part)?;
    let bv_bound = match phi.regularity() {
        Regularity::BoundedVariation => {
            let period = cfg.period_for_degree(map.degree());
            Some(orbit_extremes(map, phi, period, cfg.period_cap)?.max.value.exp())
        }
        _ => None,
    };
    ess_bound_from(&gg, map, phi, alpha, cfg, bv_bound)
}

pub(crate) fn ess_bound_from(
    gg: &GrowthGeometry,
    map: &CircleMap,
    phi: &Potential,
    alpha: f64,
    cfg: &AnalysisConfig,
    bv_bound: Option<f64>,
) -> Result<EssentialBound> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("Hoelder exponent {alpha} outside (0, 1]")));
    }
    let geo = Potential::geometric(&Arc::new(map.clone()));
    let shifted = phi.plus(alpha, &geo);
    let op = &cfg.operator;
    let p = gg.growth_rate(map, phi, op.growth_n_max, op.growth_window)?;
    let q = gg.growth_rate(map, &shifted, op.growth_n_max, op.growth_window)?;
    let margin = p.pressure - q.pressure;
    Ok(EssentialBound {
        rho: p.pressure.exp(),
        bound: q.pressure.exp(),
        alpha,
        margin,
        certificate: margin > cfg.certificate_margin,
        bv_bound,
    })
}

/// Spectral data of `L_phi` from its Ulam discretization.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub lambda: f64,
    pub log_lambda: f64,
    pub subleading: f64,
    pub gap_ratio: f64,
    pub ess: EssentialBound,
    pub converged: bool,
    pub leading_iterations: usize,
    pub residual: f64,
    pub deflation_flagged: bool,
    #[serde(skip)]
    pub partition: Arc<Partition>,
    /// Eigenfunction cell values.
    #[serde(skip)]
    pub h: Vec<f64>,
    /// Conformal-measure cell weights.
    #[serde(skip)]
    pub nu: Vec<f64>,
}

impl SpectralReport {
    /// Equilibrium-state cell weights `h_i nu_i`.
    pub fn equilibrium(&self) -> Vec<f64> {
        self.h.iter().zip(&self.nu).map(|(h, n)| h * n).collect()
    }

    /// The eigenfunction as a grid function on the cell midpoints' partition
    /// nodes (node value = average of the two adjacent cells).
    pub fn eigenfunction(&self) -> GridFunction {
        let n = self.h.len();
        let values = (0..n).map(|i| 0.5 * (self.h[i] + self.h[(i + n - 1) % n])).collect();
        GridFunction {
            partition: Arc::clone(&self.partition),
            values,
        }
    }

    /// Writes `(cell_lo, cell_hi, h, nu)` rows.
    pub fn write_eigenvectors_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "cell_lo,cell_hi,h,nu")?;
        for i in 0..self.h.len() {
            let (a, b) = self.partition.bounds(i);
            writeln!(out, "{a:.16e},{b:.16e},{:.16e},{:.16e}", self.h[i], self.nu[i])?;
        }
        Ok(())
    }
}

/// Leading and subleading eigendata plus the essential-radius comparison.
pub fn spectral_report(map: &CircleMap, phi: &Potential, cfg: &AnalysisConfig) -> Result<SpectralReport> {
    let geom = UlamGeometry::new(map, &cfg.operator)?;
    let u = geom.matrix(map, phi)?;
    spectral_report_with(map, phi, &u, cfg)
}

pub(crate) fn spectral_report_with(map: &CircleMap, phi: &Potential, u: &UlamMatrix, cfg: &AnalysisConfig) -> Result<SpectralReport> {
    let lead = leading_eigenpair(u, &cfg.operator)?;
    let sub = subleading_modulus(u, &lead, &cfg.operator)?;
    let ess = ess_radius_bound(map, phi, phi.regularity().exponent(), cfg)?;
    Ok(SpectralReport {
        lambda: lead.lambda,
        log_lambda: lead.lambda.ln(),
        subleading: sub.modulus,
        gap_ratio: sub.gap_ratio,
        ess,
        converged: lead.converged(),
        leading_iterations: lead.right.iterations,
        residual: lead.residual,
        deflation_flagged: sub.deflation_flagged,
        partition: Arc::clone(u.partition()),
        h: lead.h,
        nu: lead.nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(n: usize) -> OperatorConfig {
        OperatorConfig {
            ulam_n: n,
            ..OperatorConfig::default()
        }
    }

    #[test]
    fn partition_contains_breaks_and_neutral_layers() {
        let f = CircleMap::linear(&[2.0, 4.0, 4.0]).unwrap();
        let p = Partition::for_map(&f, 6, 12);
        assert!(p.edges().contains(&0.75));
        assert!(p.edges().contains(&0.5));
        let mp = CircleMap::manneville_pomeau(1.0).unwrap();
        let p = Partition::for_map(&mp, 8, 3);
        assert_eq!(p.cells(), 8 + 6);
        assert!(p.edges().contains(&(1.0 / 64.0)));
        assert!(p.edges().contains(&(1.0 - 1.0 / 64.0)));
        assert_eq!(p.cell_of(0.0), 0);
        assert_eq!(p.cell_of(0.999_999_9), p.cells() - 1);
    }

    #[test]
    fn doubling_two_cell_matrices() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let g = UlamGeometry::new(&f, &small_cfg(2)).unwrap();
        let m0 = g.matrix(&f, &Potential::zero()).unwrap();
        assert_eq!(m0.dim(), 2);
        for s in m0.row_sums() {
            assert!((s - 2.0).abs() < 1e-14);
        }
        let half = g.matrix(&f, &Potential::constant(-(2f64.ln()))).unwrap();
        for s in half.row_sums() {
            assert!((s - 1.0).abs() < 1e-14);
        }
        let d = m0.to_dense();
        assert!((d[0][0] - 1.0).abs() < 1e-14 && (d[1][0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mp_two_cell_column_of_zero_cell_hits_both_rows() {
        let f = CircleMap::manneville_pomeau(1.0).unwrap();
        let cfg = OperatorConfig {
            ulam_n: 2,
            neutral_levels: 0,
            ..OperatorConfig::default()
        };
        let m = UlamGeometry::new(&f, &cfg).unwrap().matrix(&f, &Potential::zero()).unwrap();
        let d = m.to_dense();
        assert!(d[0][0] > 0.0 && d[1][0] > 0.0);
    }

    #[test]
    fn apply_examples() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let part = Arc::new(Partition::for_map(&f, 16, 0));
        let one = GridFunction::constant(Arc::clone(&part), 1.0);
        let t = 0.7;
        let out = apply(&f, &Potential::constant(-t * 2f64.ln()), &one).unwrap();
        for v in out.values() {
            assert!((v - 2f64.powf(1.0 - t)).abs() < 1e-14);
        }
        let mp = Arc::new(CircleMap::manneville_pomeau(1.0).unwrap());
        let part = Arc::new(Partition::for_map(&mp, 16, 2));
        let one = GridFunction::constant(Arc::clone(&part), 1.0);
        let out = apply(&mp, &Potential::geometric(&mp), &one).unwrap();
        assert!((out.values()[0] - (1.0 + 1.0 / 3.5)).abs() < 1e-12, "{:?}", &out.values()[..3]);
        let deg = apply(&mp, &Potential::zero(), &one).unwrap();
        assert!(deg.values().iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn growth_rate_domain_errors() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let cfg = OperatorConfig {
            growth_n_max: 5,
            growth_window: 10,
            ulam_n: 8,
            ..OperatorConfig::default()
        };
        assert!(matches!(growth_rate_pressure(&f, &Potential::zero(), &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn leading_pair_of_doubling() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let cfg = small_cfg(32);
        let g = UlamGeometry::new(&f, &cfg).unwrap();
        let t = -1.3;
        let u = g.matrix(&f, &Potential::constant(-t * 2f64.ln())).unwrap();
        let lead = leading_eigenpair(&u, &cfg).unwrap();
        assert!((lead.lambda - 2f64.powf(1.0 - t)).abs() < 1e-12);
        assert!(lead.nu.iter().all(|v| (v - 1.0 / 32.0).abs() < 1e-12));
        assert!(lead.h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let sub = subleading_modulus(&u, &lead, &cfg).unwrap();
        assert!(sub.gap_ratio < 1e-6);
    }
}
