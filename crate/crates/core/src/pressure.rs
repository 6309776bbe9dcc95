//! Pressure curves `t -> P(f, t phi)`, maximum ergodic averages, the
//! hyperbolic/expanding classification and phase-transition detection.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::circle_map::{CircleMap, Side};
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::orbits::{orbit_extremes, OrbitExtreme, OrbitSummary};
use crate::output::{ext_real, num, opt_ext_real};
use crate::potential::{Descriptor, Potential};
use crate::transfer_op::{
    ess_bound_from, leading_eigenpair, spectral_radius, subleading_modulus, EssentialBound, GrowthGeometry,
    Partition, UlamGeometry,
};

/// Pressure of a single potential from all estimators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureEstimate {
    /// Reconciled value: Ulam log-eigenvalue on the base partition.
    pub pressure: f64,
    pub ulam: f64,
    /// Ulam log-eigenvalue on the doubled partition.
    pub ulam_fine: f64,
    pub growth: f64,
    pub growth_drift: f64,
    /// Largest pairwise discrepancy between the estimators, widened by the
    /// power-iteration bracket when the iteration did not converge.
    pub confidence: f64,
    pub converged: bool,
    pub low_confidence: bool,
}

/// Discretizations of one map, reused across potentials.
pub struct PressureEngine {
    map: CircleMap,
    cfg: AnalysisConfig,
    ulam: UlamGeometry,
    ulam_fine: UlamGeometry,
    growth: GrowthGeometry,
}

impl PressureEngine {
    pub fn new(map: &CircleMap, cfg: &AnalysisConfig) -> Result<Self> {
        let op = &cfg.operator;
        if op.ulam_n < map.degree() {
            return Err(Error::Domain(format!(
                "Ulam size {} below the map degree {}",
                op.ulam_n,
                map.degree()
            )));
        }
        let fine_cfg = crate::config::OperatorConfig {
            ulam_n: 2 * op.ulam_n,
            ..op.clone()
        };
        let (ulam, ulam_fine) = rayon::join(
            || UlamGeometry::new(map, op),
            || UlamGeometry::new(map, &fine_cfg),
        );
        let part = std::sync::Arc::new(Partition::for_map(map, op.growth_grid(), op.neutral_levels));
        Ok(Self {
            map: map.clone(),
            cfg: cfg.clone(),
            ulam: ulam?,
            ulam_fine: ulam_fine?,
            growth: GrowthGeometry::new(map, part)?,
        })
    }

    pub fn map(&self) -> &CircleMap {
        &self.map
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.cfg
    }

    pub fn ulam_geometry(&self) -> &UlamGeometry {
        &self.ulam
    }

    pub fn growth_geometry(&self) -> &GrowthGeometry {
        &self.growth
    }

    pub fn estimate(&self, phi: &Potential) -> Result<PressureEstimate> {
        let op = &self.cfg.operator;
        let (coarse, fine) = rayon::join(
            || -> Result<_> { spectral_radius(&self.ulam.matrix(&self.map, phi)?, op) },
            || -> Result<_> { spectral_radius(&self.ulam_fine.matrix(&self.map, phi)?, op) },
        );
        let (coarse, fine) = (coarse?, fine?);
        let g = self.growth.growth_rate(&self.map, phi, op.growth_n_max, op.growth_window)?;
        let (ulam, ulam_fine) = (coarse.eigenvalue.ln(), fine.eigenvalue.ln());
        let mut confidence = (ulam - ulam_fine)
            .abs()
            .max((ulam - g.pressure).abs())
            .max((ulam_fine - g.pressure).abs());
        let converged = coarse.converged && fine.converged;
        if !coarse.converged && coarse.lower > 0.0 {
            confidence = confidence.max((coarse.upper / coarse.lower).ln());
        }
        Ok(PressureEstimate {
            pressure: ulam,
            ulam,
            ulam_fine,
            growth: g.pressure,
            growth_drift: g.drift,
            confidence,
            converged,
            low_confidence: g.low_confidence || !converged,
        })
    }

    /// Pressure of `t phi` at every `t` of the grid (plus `t = 0`).
    pub fn curve(&self, phi: &Potential, ts: &[f64]) -> Result<PressureCurve> {
        let ts = normalized_grid(ts)?;
        let h_top = self.map.topological_entropy();
        if let Some(c) = phi.as_constant() {
            return Ok(PressureCurve::affine(phi.descriptor(), h_top, c, &ts));
        }
        let points = ts
            .par_iter()
            .map(|&t| self.point(phi, t, false))
            .collect::<Result<Vec<_>>>()?;
        let mut curve = PressureCurve {
            potential: phi.descriptor(),
            h_top,
            affine: false,
            points,
            zones: Vec::new(),
        };
        curve.classify_by_curvature(&self.cfg);
        Ok(curve)
    }

    fn point(&self, phi: &Potential, t: f64, refined: bool) -> Result<CurvePoint> {
        let e = self.estimate(&phi.scale(t))?;
        Ok(CurvePoint {
            t,
            p: e.pressure,
            p_ulam: e.ulam,
            p_ulam_fine: e.ulam_fine,
            p_growth: e.growth,
            confidence: e.confidence,
            converged: e.converged,
            low_confidence: e.low_confidence,
            refined,
        })
    }
}

fn normalized_grid(ts: &[f64]) -> Result<Vec<f64>> {
    if ts.len() < 5 {
        return Err(Error::Domain(format!("t grid needs at least 5 points, got {}", ts.len())));
    }
    if ts.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("t grid has non-finite entries".into()));
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("t grid must be strictly increasing".into()));
    }
    let mut ts = ts.to_vec();
    if !ts.iter().any(|&t| t == 0.0) {
        ts.push(0.0);
        ts.sort_by(f64::total_cmp);
    }
    Ok(ts)
}

/// Reconciled pressure `P(f, phi)` with estimator diagnostics.
pub fn pressure(map: &CircleMap, phi: &Potential, cfg: &AnalysisConfig) -> Result<PressureEstimate> {
    PressureEngine::new(map, cfg)?.estimate(phi)
}

/// Pressure curve over `ts`; `t = 0` is always included.
pub fn pressure_curve(map: &CircleMap, phi: &Potential, ts: &[f64], cfg: &AnalysisConfig) -> Result<PressureCurve> {
    if let Some(c) = phi.as_constant() {
        let ts = normalized_grid(ts)?;
        return Ok(PressureCurve::affine(phi.descriptor(), map.topological_entropy(), c, &ts));
    }
    PressureEngine::new(map, cfg)?.curve(phi, ts)
}

/// Curvature class of a pressure sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    StrictlyConvex,
    Linear,
    Undetermined,
}

impl Zone {
    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::StrictlyConvex => "strictly_convex",
            Zone::Linear => "linear",
            Zone::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    /// Reconciled pressure.
    pub p: f64,
    pub p_ulam: f64,
    pub p_ulam_fine: f64,
    pub p_growth: f64,
    pub confidence: f64,
    pub converged: bool,
    pub low_confidence: bool,
    /// Inserted by transition bisection rather than part of the input grid.
    pub refined: bool,
}

/// Sampled pressure curve.
#[derive(Clone, Debug, Serialize)]
pub struct PressureCurve {
    pub potential: Descriptor,
    pub h_top: f64,
    /// Exactly affine `h_top + t c` (constant or cohomologous potential).
    pub affine: bool,
    pub points: Vec<CurvePoint>,
    pub zones: Vec<Zone>,
}

impl PressureCurve {
    fn affine(potential: Descriptor, h_top: f64, c: f64, ts: &[f64]) -> Self {
        let points = ts
            .iter()
            .map(|&t| {
                let p = h_top + t * c;
                CurvePoint {
                    t,
                    p,
                    p_ulam: p,
                    p_ulam_fine: p,
                    p_growth: p,
                    confidence: 0.0,
                    converged: true,
                    low_confidence: false,
                    refined: false,
                }
            })
            .collect::<Vec<_>>();
        let zones = vec![Zone::Linear; points.len()];
        Self {
            potential,
            h_top,
            affine: true,
            points,
            zones,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ts(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p).collect()
    }

    /// Reconciled value at a sample `t`, if present.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.points.iter().find(|p| (p.t - t).abs() < 1e-12).map(|p| p.p)
    }

    /// Derivative estimates: three-point (nonuniform) stencils, one-sided at the ends.
    pub fn d1(&self) -> Vec<f64> {
        let (t, p) = (self.ts(), self.values());
        let n = t.len();
        (0..n)
            .map(|i| {
                if n < 3 {
                    return (p[n - 1] - p[0]) / (t[n - 1] - t[0]);
                }
                let j = i.clamp(1, n - 2);
                three_point_derivative(&t[j - 1..=j + 1], &p[j - 1..=j + 1], t[i])
            })
            .collect()
    }

    /// Second divided differences `2 (s_right - s_left) / (t_{i+1} - t_{i-1})`;
    /// end values copy their neighbour.
    pub fn d2(&self) -> Vec<f64> {
        divided_second(&self.ts(), &self.values())
    }

    /// `max |P|`, the scale for convexity tolerances.
    pub fn scale(&self) -> f64 {
        let s = self.points.iter().fold(0.0f64, |m, p| m.max(p.p.abs()));
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Smallest normalized second difference `(s_right - s_left) * h_mean`;
    /// on a uniform grid this is `P_{i+1} - 2 P_i + P_{i-1}`.
    pub fn min_second_difference(&self) -> f64 {
        let (t, p) = (self.ts(), self.values());
        (1..t.len().saturating_sub(1))
            .map(|i| {
                let sl = (p[i] - p[i - 1]) / (t[i] - t[i - 1]);
                let sr = (p[i + 1] - p[i]) / (t[i + 1] - t[i]);
                (sr - sl) * 0.5 * (t[i + 1] - t[i - 1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Discrete convexity within `rel_tol * scale`.
    pub fn is_convex(&self, rel_tol: f64) -> bool {
        self.min_second_difference() >= -rel_tol * self.scale()
    }

    fn insert(&mut self, p: CurvePoint) {
        let i = self.points.partition_point(|q| q.t < p.t);
        if self.points.get(i).map_or(false, |q| q.t == p.t) {
            return;
        }
        self.points.insert(i, p);
    }

    fn classify_by_curvature(&mut self, cfg: &AnalysisConfig) {
        let d2 = self.base_d2();
        self.zones = d2
            .iter()
            .map(|&d| {
                if d > cfg.tol_strict {
                    Zone::StrictlyConvex
                } else if d.abs() < cfg.tol_flat {
                    Zone::Linear
                } else {
                    Zone::Undetermined
                }
            })
            .collect();
    }

    /// Second divided differences computed on the input grid only, then
    /// spread to refined points from their nearest base neighbours.
    fn base_d2(&self) -> Vec<f64> {
        let idx: Vec<usize> = (0..self.points.len()).filter(|&i| !self.points[i].refined).collect();
        let t: Vec<f64> = idx.iter().map(|&i| self.points[i].t).collect();
        let p: Vec<f64> = idx.iter().map(|&i| self.points[i].p).collect();
        let d = divided_second(&t, &p);
        self.points
            .iter()
            .map(|q| {
                let j = t.partition_point(|&s| s < q.t).min(t.len() - 1);
                if t[j] == q.t || j == 0 {
                    d[j]
                } else {
                    d[j - 1].min(d[j])
                }
            })
            .collect()
    }

    /// Writes `t,P_norm_growth,P_ulam,P_reconciled,d1,d2,zone,confidence`.
    pub fn write_csv(&self, mut out: impl Write, header: Option<&str>) -> Result<()> {
        if let Some(h) = header {
            writeln!(out, "# {h}")?;
        }
        writeln!(out, "t,P_norm_growth,P_ulam,P_reconciled,d1,d2,zone,confidence")?;
        let (d1, d2) = (self.d1(), self.d2());
        for (i, p) in self.points.iter().enumerate() {
            let zone = self.zones.get(i).map_or("undetermined", Zone::as_str);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                num(p.t),
                num(p.p_growth),
                num(p.p_ulam),
                num(p.p),
                num(d1[i]),
                num(d2[i]),
                zone,
                num(p.confidence)
            )?;
        }
        Ok(())
    }
}

/// Derivative at `x` of the quadratic through three points.
pub(crate) fn three_point_derivative(t: &[f64], p: &[f64], x: f64) -> f64 {
    let (t0, t1, t2) = (t[0], t[1], t[2]);
    let l0 = (2.0 * x - t1 - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (2.0 * x - t0 - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (2.0 * x - t0 - t1) / ((t2 - t0) * (t2 - t1));
    p[0] * l0 + p[1] * l1 + p[2] * l2
}

fn divided_second(t: &[f64], p: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut d: Vec<f64> = (0..n)
        .map(|i| {
            let j = i.clamp(1, n - 2);
            let sl = (p[j] - p[j - 1]) / (t[j] - t[j - 1]);
            let sr = (p[j + 1] - p[j]) / (t[j + 1] - t[j]);
            2.0 * (sr - sl) / (t[j + 1] - t[j - 1])
        })
        .collect();
    d.shrink_to_fit();
    d
}

/// `beta(phi)` over periodic orbits up to `max_period`, with the achieving orbit.
pub fn beta_max(map: &CircleMap, phi: &Potential, max_period: usize, cap: usize) -> Result<OrbitExtreme> {
    Ok(orbit_extremes(map, phi, max_period, cap)?.max)
}

/// Three-valued outcome of a numerical inequality test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// Margin within tolerance of zero: the inequality fails at the boundary.
    Fails,
    /// Margin significantly negative, contradicting the theory's sign; the
    /// numerics cannot be trusted here.
    Undetermined,
}

/// Verdict with the margin it was derived from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    #[serde(serialize_with = "ext_real")]
    pub margin: f64,
    pub tolerance: f64,
    pub pressure: f64,
    /// The competing quantity: `beta(phi)` or `max phi` over neutral points.
    #[serde(serialize_with = "ext_real")]
    pub reference: f64,
    pub note: Option<String>,
}

impl Classification {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    fn from_margin(margin: f64, tolerance: f64, pressure: f64, reference: f64, note: Option<String>) -> Self {
        let verdict = if margin > tolerance {
            Verdict::Holds
        } else if margin >= -tolerance {
            Verdict::Fails
        } else {
            Verdict::Undetermined
        };
        Self {
            verdict,
            margin,
            tolerance,
            pressure,
            reference,
            note,
        }
    }
}

fn decision_tolerance(e: &PressureEstimate, cfg: &AnalysisConfig) -> f64 {
    (cfg.decision_factor * e.confidence).max(cfg.decision_floor)
}

/// Tests `beta(phi) < P(phi)`.
pub fn is_hyperbolic(map: &CircleMap, phi: &Potential, cfg: &AnalysisConfig) -> Result<Classification> {
    let beta = beta_max(map, phi, cfg.period_for_degree(map.degree()), cfg.period_cap)?;
    let e = pressure(map, phi, cfg)?;
    Ok(hyperbolic_from(&e, beta.value, cfg))
}

fn hyperbolic_from(e: &PressureEstimate, beta: f64, cfg: &AnalysisConfig) -> Classification {
    Classification::from_margin(e.pressure - beta, decision_tolerance(e, cfg), e.pressure, beta, None)
}

/// Tests `max_p phi(p) < P(phi)` over the neutral fixed points `p`.
pub fn is_expanding(map: &CircleMap, phi: &Potential, cfg: &AnalysisConfig) -> Result<Classification> {
    let e = pressure(map, phi, cfg)?;
    Ok(expanding_from(map, phi, &e, cfg))
}

fn neutral_sup(map: &CircleMap, phi: &Potential) -> Option<f64> {
    map.neutral_fixed_points()
        .iter()
        .map(|&p| phi.eval_side(p, Side::Left).max(phi.eval_side(p, Side::Right)))
        .reduce(f64::max)
}

fn expanding_from(map: &CircleMap, phi: &Potential, e: &PressureEstimate, cfg: &AnalysisConfig) -> Classification {
    let tol = decision_tolerance(e, cfg);
    match neutral_sup(map, phi) {
        None => Classification {
            verdict: Verdict::Holds,
            margin: f64::INFINITY,
            tolerance: tol,
            pressure: e.pressure,
            reference: f64::NEG_INFINITY,
            note: Some("no neutral fixed points".into()),
        },
        Some(v) => {
            let note = match map.kind() {
                crate::circle_map::MapKind::MannevillePomeau { .. } => None,
                _ => Some("only neutral fixed points are tested; the check is sufficient, not necessary".into()),
            };
            Classification::from_margin(e.pressure - v, tol, e.pressure, v, note)
        }
    }
}

/// Spread of periodic-orbit averages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cohomology {
    pub cohomologous: bool,
    pub spread: f64,
    pub summary: OrbitSummary,
}

/// `phi` is declared cohomologous to a constant when all periodic averages up
/// to `max_period` agree to `1e-9`.
pub fn cohomologous_to_constant(map: &CircleMap, phi: &Potential, max_period: usize, cap: usize) -> Result<Cohomology> {
    let summary = orbit_extremes(map, phi, max_period, cap)?;
    let spread = summary.spread();
    Ok(Cohomology {
        cohomologous: spread < 1e-9,
        spread,
        summary,
    })
}

/// Phase-transition analysis of `t -> P(t phi)`.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionReport {
    pub potential: Descriptor,
    pub h_top: f64,
    pub window: [f64; 2],
    /// `None` when transitions are undefined (cohomologous potential).
    #[serde(serialize_with = "opt_ext_real")]
    pub t1: Option<f64>,
    #[serde(serialize_with = "opt_ext_real")]
    pub t2: Option<f64>,
    pub no_transition: bool,
    pub cohomologous: bool,
    pub spread: f64,
    /// `beta(phi)`: the asymptotic slope as `t -> +inf`.
    pub beta_max: OrbitExtreme,
    /// `-beta(-phi)`: the asymptotic slope as `t -> -inf`.
    pub beta_min: OrbitExtreme,
    pub orbit_period: usize,
    /// Largest `|slope - beta|` over consecutive linear-zone samples.
    pub flat_slope_error: Option<f64>,
    pub zones: Vec<ZoneSample>,
    /// First `t > 0` of the gap sweep where the spectral-gap certificate fails.
    #[serde(serialize_with = "opt_ext_real")]
    pub gap_collapse: Option<f64>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub curve: PressureCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZoneSample {
    pub t: f64,
    pub p: f64,
    pub d2: f64,
    pub zone: Zone,
}

impl TransitionReport {
    /// `t1` as an extended real (`-inf` when undefined).
    pub fn t1_ext(&self) -> f64 {
        self.t1.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn t2_ext(&self) -> f64 {
        self.t2.unwrap_or(f64::INFINITY)
    }
}

/// Locates `t1 < 0 < t2` on the configured window.
pub fn transition_points(map: &CircleMap, phi: &Potential, cfg: &AnalysisConfig) -> Result<TransitionReport> {
    let engine = PressureEngine::new(map, cfg)?;
    transition_points_with(&engine, phi)
}

pub fn transition_points_with(engine: &PressureEngine, phi: &Potential) -> Result<TransitionReport> {
    let cfg = engine.config();
    let map = engine.map();
    if !(cfg.t_min < 0.0 && cfg.t_max > 0.0) {
        return Err(Error::Domain(format!(
            "t window [{}, {}] must contain 0 in its interior",
            cfg.t_min, cfg.t_max
        )));
    }
    let period = cfg.period_for_degree(map.degree());
    let coh = cohomologous_to_constant(map, phi, period, cfg.period_cap)?;
    let h_top = map.topological_entropy();
    let ts = cfg.t_grid();
    let mut warnings = Vec::new();
    if coh.cohomologous {
        let c = coh.summary.max.value;
        let curve = PressureCurve::affine(phi.descriptor(), h_top, c, &normalized_grid(&ts)?);
        let zones = zone_samples(&curve);
        return Ok(TransitionReport {
            potential: phi.descriptor(),
            h_top,
            window: [cfg.t_min, cfg.t_max],
            t1: None,
            t2: None,
            no_transition: true,
            cohomologous: true,
            spread: coh.spread,
            beta_max: coh.summary.max.clone(),
            beta_min: coh.summary.min.clone(),
            orbit_period: coh.summary.period,
            flat_slope_error: None,
            zones,
            gap_collapse: None,
            warnings,
            curve,
        });
    }
    let (bmax, bmin) = (coh.summary.max.value, coh.summary.min.value);
    let mut curve = engine.curve(phi, &ts)?;
    let tol = cfg.tol_flat;
    let t2 = locate_transition(engine, phi, &mut curve, bmax, tol, 1.0)?;
    let t1 = locate_transition(engine, phi, &mut curve, bmin, tol, -1.0)?;
    curve.classify_by_curvature(cfg);
    let d2 = curve.base_d2();
    let mut flat_err: Option<f64> = None;
    for (i, q) in curve.points.iter().enumerate() {
        let inside = q.t > t1 && q.t < t2;
        let z = if inside {
            if q.refined || d2[i] > cfg.tol_strict {
                Zone::StrictlyConvex
            } else {
                Zone::Undetermined
            }
        } else if q.refined || d2[i].abs() < cfg.tol_flat {
            Zone::Linear
        } else {
            Zone::Undetermined
        };
        curve.zones[i] = z;
    }
    // Flat-zone slopes against the asymptotic slopes.
    let base: Vec<usize> = (0..curve.len()).filter(|&i| !curve.points[i].refined).collect();
    for w in base.windows(2) {
        let (a, b) = (&curve.points[w[0]], &curve.points[w[1]]);
        if curve.zones[w[0]] == Zone::Linear && curve.zones[w[1]] == Zone::Linear {
            let slope = (b.p - a.p) / (b.t - a.t);
            let beta = if a.t >= t2 { bmax } else { bmin };
            let e = (slope - beta).abs();
            flat_err = Some(flat_err.map_or(e, |f: f64| f.max(e)));
        }
    }
    if let Some(e) = flat_err {
        if e > 1e-3 {
            warnings.push(format!("linear-zone slope deviates from beta by {e:.3e}"));
        }
    }
    if !curve.is_convex(1e-6) {
        warnings.push(format!(
            "pressure curve fails discrete convexity: min second difference {:.3e}",
            curve.min_second_difference()
        ));
    }
    if let Some(p0) = curve.value_at(0.0) {
        if (p0 - h_top).abs() > 1e-6 {
            warnings.push(format!("P(0) = {p0} differs from log deg = {h_top}"));
        }
    }
    let zones = zone_samples(&curve);
    Ok(TransitionReport {
        potential: phi.descriptor(),
        h_top,
        window: [cfg.t_min, cfg.t_max],
        t1: Some(t1),
        t2: Some(t2),
        no_transition: t1 == f64::NEG_INFINITY && t2 == f64::INFINITY,
        cohomologous: false,
        spread: coh.spread,
        beta_max: coh.summary.max,
        beta_min: coh.summary.min,
        orbit_period: coh.summary.period,
        flat_slope_error: flat_err,
        zones,
        gap_collapse: None,
        warnings,
        curve,
    })
}

fn zone_samples(curve: &PressureCurve) -> Vec<ZoneSample> {
    let d2 = curve.d2();
    curve
        .points
        .iter()
        .zip(&curve.zones)
        .zip(d2)
        .map(|((q, z), d)| ZoneSample {
            t: q.t,
            p: q.p,
            d2: d,
            zone: *z,
        })
        .collect()
}

/// First `t` on the side `sign` of zero where `P(t) - t beta <= tol`, refined
/// by bisection; `sign * inf` when none is found in the window.
fn locate_transition(
    engine: &PressureEngine,
    phi: &Potential,
    curve: &mut PressureCurve,
    beta: f64,
    tol: f64,
    sign: f64,
) -> Result<f64> {
    let gap = |t: f64, p: f64| p - t * beta;
    let mut side: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|q| q.t * sign >= 0.0)
        .map(|q| (q.t, q.p))
        .collect();
    side.sort_by(|a, b| (a.0 * sign).total_cmp(&(b.0 * sign)));
    let Some(k) = side.iter().position(|&(t, p)| t != 0.0 && gap(t, p) <= tol) else {
        return Ok(sign * f64::INFINITY);
    };
    let (mut outer, mut inner) = (side[k].0, side[k - 1].0);
    let steps = engine.config().bisection_steps;
    for _ in 0..steps {
        if (outer - inner).abs() < 1e-6 {
            break;
        }
        let mid = 0.5 * (outer + inner);
        let pt = engine.point(phi, mid, true)?;
        let g = gap(mid, pt.p);
        curve.insert(pt);
        if g <= tol {
            outer = mid;
        } else {
            inner = mid;
        }
    }
    curve.zones.resize(curve.points.len(), Zone::Undetermined);
    Ok(0.5 * (outer + inner))
}

/// One row of a spectral-gap sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapSample {
    pub t: f64,
    pub lambda: f64,
    pub subleading: f64,
    pub ratio: f64,
    pub ess_bound: f64,
    pub certificate: bool,
    pub certificate_margin: f64,
    pub bv_bound: Option<f64>,
    pub converged: bool,
}

/// Leading and subleading Ulam eigenvalues and the essential-radius
/// certificate of `t phi` for every `t`.
pub fn gap_sweep(engine: &PressureEngine, phi: &Potential, ts: &[f64]) -> Result<Vec<GapSample>> {
    let map = engine.map();
    let cfg = engine.config();
    let alpha = phi.regularity().exponent();
    let bv = match phi.regularity() {
        crate::potential::Regularity::BoundedVariation => {
            Some(orbit_extremes(map, phi, cfg.period_for_degree(map.degree()), cfg.period_cap)?)
        }
        _ => None,
    };
    ts.par_iter()
        .map(|&t| {
            let tphi = phi.scale(t);
            let u = engine.ulam_geometry().matrix(map, &tphi)?;
            let lead = leading_eigenpair(&u, &cfg.operator)?;
            let sub = subleading_modulus(&u, &lead, &cfg.operator)?;
            let bv_bound = bv.as_ref().map(|s| (if t >= 0.0 { t * s.max.value } else { t * s.min.value }).exp());
            let ess: EssentialBound = ess_bound_from(engine.growth_geometry(), map, &tphi, alpha, cfg, bv_bound)?;
            Ok(GapSample {
                t,
                lambda: lead.lambda,
                subleading: sub.modulus,
                ratio: sub.gap_ratio,
                ess_bound: ess.bound,
                certificate: ess.certificate,
                certificate_margin: ess.margin,
                bv_bound,
                converged: lead.converged(),
            })
        })
        .collect()
}

/// Writes `t,lambda1,abs_lambda2,ratio,ess_bound,certificate`.
pub fn write_gap_sweep_csv(rows: &[GapSample], mut out: impl Write, header: Option<&str>) -> Result<()> {
    if let Some(h) = header {
        writeln!(out, "# {h}")?;
    }
    writeln!(out, "t,lambda1,abs_lambda2,ratio,ess_bound,certificate")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.t),
            num(r.lambda),
            num(r.subleading),
            num(r.ratio),
            num(r.ess_bound),
            r.certificate
        )?;
    }
    Ok(())
}

/// First positive `t` of a sweep at which the certificate fails.
pub fn gap_collapse(rows: &[GapSample]) -> Option<f64> {
    rows.iter().filter(|r| r.t > 0.0).find(|r| !r.certificate).map(|r| r.t)
}

/// Hyperbolic and expanding verdicts for `t phi` from one pressure estimate.
pub fn classify_at(engine: &PressureEngine, phi: &Potential, t: f64) -> Result<(Classification, Classification)> {
    let map = engine.map();
    let cfg = engine.config();
    let tphi = phi.scale(t);
    let e = engine.estimate(&tphi)?;
    let beta = beta_max(map, &tphi, cfg.period_for_degree(map.degree()), cfg.period_cap)?;
    Ok((hyperbolic_from(&e, beta.value, cfg), expanding_from(map, &tphi, &e, cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn cfg(n: usize) -> AnalysisConfig {
        let mut c = AnalysisConfig::default();
        c.operator.ulam_n = n;
        c
    }

    #[test]
    fn doubling_geometric_curve() {
        let f = Arc::new(CircleMap::linear(&[2.0, 2.0]).unwrap());
        let g = Potential::geometric(&f);
        let curve = pressure_curve(&f, &g, &[-1.0, 0.0, 1.0, 2.0, 3.0], &cfg(64)).unwrap();
        for q in &curve.points {
            assert!((q.p - (1.0 - q.t) * 2f64.ln()).abs() < 1e-12, "{q:?}");
        }
    }

    #[test]
    fn constant_short_circuit() {
        let f = CircleMap::linear(&[2.0, 4.0, 4.0]).unwrap();
        let c = pressure_curve(&f, &Potential::constant(0.5), &[-2.0, -1.0, 1.0, 2.0, 3.0], &cfg(64)).unwrap();
        assert!(c.affine);
        assert_eq!(c.len(), 6);
        assert_eq!(c.value_at(2.0), Some(3f64.ln() + 1.0));
    }

    #[test]
    fn grid_validation() {
        let f = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let z = Potential::trig_series(vec![0.0, 1.0], vec![]);
        assert!(matches!(pressure_curve(&f, &z, &[0.0, 1.0], &cfg(16)), Err(Error::Domain(_))));
        assert!(matches!(
            pressure_curve(&f, &z, &[0.0, 2.0, 1.0, 3.0, 4.0], &cfg(16)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn three_point_stencil_exact_on_quadratics() {
        let t = [0.0, 0.3, 1.0];
        let p: Vec<f64> = t.iter().map(|x| 2.0 * x * x - x + 1.0).collect();
        assert!((three_point_derivative(&t, &p, 0.0) + 1.0).abs() < 1e-12);
        assert!((three_point_derivative(&t, &p, 1.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Classification::from_margin(1.0, 0.1, 0.0, 0.0, None).verdict, Verdict::Holds);
        assert_eq!(Classification::from_margin(0.05, 0.1, 0.0, 0.0, None).verdict, Verdict::Fails);
        assert_eq!(Classification::from_margin(-0.5, 0.1, 0.0, 0.0, None).verdict, Verdict::Undetermined);
    }
}
