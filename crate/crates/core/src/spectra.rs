//! Free energy, the Legendre rate function, interval large-deviation rates
//! and the entropy spectrum of Birkhoff averages.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::{ext_real, num};
use crate::pressure::{three_point_derivative, TransitionReport};

/// `E(t) = P(t phi) - h_top` sampled on the strictly convex zone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeEnergy {
    pub t: Vec<f64>,
    pub e: Vec<f64>,
}

/// Restriction of the reconciled curve to `t1 < t < t2`, shifted by `h_top`.
pub fn free_energy(report: &TransitionReport) -> FreeEnergy {
    let (t1, t2) = (report.t1_ext(), report.t2_ext());
    let (t, e) = report
        .curve
        .points
        .iter()
        .filter(|q| q.t > t1 && q.t < t2)
        .map(|q| (q.t, q.p - report.h_top))
        .unzip();
    FreeEnergy { t, e }
}

/// Value of the rate function at a point of `S_phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RateValue {
    Finite(f64),
    /// On an affine flank whose transition parameter lies outside the window.
    Unresolved,
    Outside,
}

/// Part of `S_phi` a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumZone {
    Interior,
    LeftFlank,
    RightFlank,
    Outside,
}

impl SpectrumZone {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumZone::Interior => "interior",
            SpectrumZone::LeftFlank => "left_flank",
            SpectrumZone::RightFlank => "right_flank",
            SpectrumZone::Outside => "outside",
        }
    }
}

/// Legendre conjugate of the free energy with affine flanks.
#[derive(Clone, Debug, Serialize)]
pub struct RateFunction {
    pub h_top: f64,
    #[serde(serialize_with = "ext_real")]
    pub t1: f64,
    #[serde(serialize_with = "ext_real")]
    pub t2: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `int phi d mu_0`, the slope of `P` at `t = 0`.
    pub s_star: f64,
    /// `S_phi` is a single point.
    pub degenerate: bool,
    /// Mismatch between interior and flank values at `lambda_min`, `lambda_max`.
    pub continuity: [Option<f64>; 2],
    pub warnings: Vec<String>,
    #[serde(skip)]
    vertices: FreeEnergy,
    #[serde(skip)]
    slopes: Vec<f64>,
    /// Samples `(s, I(s))` over `[lambda_min, lambda_max]`.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

/// Builds the rate function from a transition report.
///
/// The interior is the exact conjugate of the piecewise-linear interpolant of
/// the free energy: `I(s) = s t_i - E(t_i)` at the vertex whose adjacent chord
/// slopes bracket `s`. `lambda_min`, `lambda_max` are three-point one-sided
/// derivatives at the ends of the zone.
pub fn rate_function(report: &TransitionReport, s_samples: usize) -> Result<RateFunction> {
    let (bmin, bmax) = (report.beta_min.value, report.beta_max.value);
    let h_top = report.h_top;
    if report.cohomologous || bmax - bmin < 1e-9 {
        let c = 0.5 * (bmin + bmax);
        return Ok(RateFunction {
            h_top,
            t1: report.t1_ext(),
            t2: report.t2_ext(),
            beta_min: c,
            beta_max: c,
            lambda_min: c,
            lambda_max: c,
            s_star: c,
            degenerate: true,
            continuity: [None, None],
            warnings: Vec::new(),
            vertices: FreeEnergy { t: vec![0.0], e: vec![0.0] },
            slopes: Vec::new(),
            samples: vec![(c, 0.0)],
        });
    }
    let fe = free_energy(report);
    let n = fe.t.len();
    if n < 5 {
        return Err(Error::Numeric(format!(
            "strictly convex zone has only {n} samples; widen the window or add samples"
        )));
    }
    let slopes: Vec<f64> = (0..n - 1)
        .map(|j| (fe.e[j + 1] - fe.e[j]) / (fe.t[j + 1] - fe.t[j]))
        .collect();
    let mut warnings = Vec::new();
    if slopes.windows(2).any(|w| w[1] < w[0] - 1e-9) {
        warnings.push("chord slopes of the free energy are not monotone".into());
    }
    let lambda_min = three_point_derivative(&fe.t[..3], &fe.e[..3], fe.t[0]);
    let lambda_max = three_point_derivative(&fe.t[n - 3..], &fe.e[n - 3..], fe.t[n - 1]);
    let z = fe.t.partition_point(|&t| t < 0.0).clamp(1, n - 2);
    let s_star = three_point_derivative(&fe.t[z - 1..=z + 1], &fe.e[z - 1..=z + 1], 0.0);
    let mut rate = RateFunction {
        h_top,
        t1: report.t1_ext(),
        t2: report.t2_ext(),
        beta_min: bmin.min(lambda_min),
        beta_max: bmax.max(lambda_max),
        lambda_min,
        lambda_max,
        s_star,
        degenerate: false,
        continuity: [None, None],
        warnings,
        vertices: fe,
        slopes,
        samples: Vec::new(),
    };
    let m = s_samples.max(2);
    rate.samples = (0..m)
        .map(|i| {
            let s = lambda_min + (lambda_max - lambda_min) * i as f64 / (m - 1) as f64;
            (s, rate.interior(s))
        })
        .collect();
    if rate.t1.is_finite() {
        let flank = h_top + rate.t1 * (lambda_min - rate.beta_min);
        rate.continuity[0] = Some((rate.interior(lambda_min) - flank).abs());
    }
    if rate.t2.is_finite() {
        let flank = h_top + rate.t2 * (lambda_max - rate.beta_max);
        rate.continuity[1] = Some((rate.interior(lambda_max) - flank).abs());
    }
    for (side, c) in ["lambda_min", "lambda_max"].iter().zip(rate.continuity) {
        if let Some(c) = c {
            if c > 1e-2 {
                rate.warnings.push(format!("flank and interior differ by {c:.3e} at {side}"));
            }
        }
    }
    Ok(rate)
}

impl RateFunction {
    /// Conjugate of the interpolated free energy (clamped at zero).
    pub fn interior(&self, s: f64) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        let i = self.slopes.partition_point(|&c| c < s);
        let v = s * self.vertices.t[i] - self.vertices.e[i];
        v.max(0.0)
    }

    pub fn zone(&self, s: f64) -> SpectrumZone {
        let eps = 1e-12;
        if s < self.beta_min - eps || s > self.beta_max + eps {
            SpectrumZone::Outside
        } else if s < self.lambda_min {
            SpectrumZone::LeftFlank
        } else if s > self.lambda_max {
            SpectrumZone::RightFlank
        } else {
            SpectrumZone::Interior
        }
    }

    /// `I(s)` including the affine flanks.
    pub fn eval(&self, s: f64) -> RateValue {
        match self.zone(s) {
            SpectrumZone::Outside => RateValue::Outside,
            SpectrumZone::Interior => RateValue::Finite(self.interior(s)),
            SpectrumZone::LeftFlank if self.t1.is_finite() => {
                RateValue::Finite((self.h_top + self.t1 * (s - self.beta_min)).max(0.0))
            }
            SpectrumZone::RightFlank if self.t2.is_finite() => {
                RateValue::Finite((self.h_top + self.t2 * (s - self.beta_max)).max(0.0))
            }
            _ => RateValue::Unresolved,
        }
    }

    /// `tau_hat(s) = h_top - I(s)`; `None` where `I` is unresolved or `s` is outside `S_phi`.
    pub fn tau_hat(&self, s: f64) -> Option<f64> {
        match self.eval(s) {
            RateValue::Finite(v) => Some(self.h_top - v),
            _ => None,
        }
    }

    /// Sample grid over `S_phi = [beta_min, beta_max]`.
    pub fn spectrum_grid(&self, samples: usize) -> Vec<f64> {
        if self.degenerate {
            return vec![self.beta_min];
        }
        let m = samples.max(2);
        (0..m)
            .map(|i| self.beta_min + (self.beta_max - self.beta_min) * i as f64 / (m - 1) as f64)
            .collect()
    }

    pub fn delta_regions(&self) -> DeltaRegions {
        delta_regions(self)
    }

    /// Writes `s,I,tau_hat,zone` over `S_phi`.
    pub fn write_csv(&self, samples: usize, mut out: impl Write, header: Option<&str>) -> Result<()> {
        if let Some(h) = header {
            writeln!(out, "# {h}")?;
        }
        writeln!(out, "s,I,tau_hat,zone")?;
        for s in self.spectrum_grid(samples) {
            let (i, tau) = match self.eval(s) {
                RateValue::Finite(v) => (num(v), num(self.h_top - v)),
                _ => ("nan".to_string(), "nan".to_string()),
            };
            let zone = match (self.zone(s), self.eval(s)) {
                (_, RateValue::Unresolved) => "unresolved",
                (z, _) => z.as_str(),
            };
            writeln!(out, "{},{},{},{}", num(s), i, tau, zone)?;
        }
        Ok(())
    }
}

/// Interval rate `LD_{phi,a,b} = -inf_{[a,b]} I`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdValue {
    pub requested: [f64; 2],
    /// The request clamped to `S_phi`.
    pub interval: [f64; 2],
    /// `None` when the infimum falls on an unresolved flank.
    pub ld: Option<f64>,
    /// Where the infimum is attained.
    pub argmin: f64,
    pub warnings: Vec<String>,
}

/// `-inf_{s in [a,b]} I(s)`, with `[a,b]` clamped to `S_phi`.
///
/// `I` decreases up to `s*` and increases after it, so the infimum sits at
/// the point of `[a,b]` closest to `s*`.
pub fn ld_interval(rate: &RateFunction, a: f64, b: f64) -> Result<LdValue> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
    }
    let eps = 1e-12;
    let (lo, hi) = (a.max(rate.beta_min), b.min(rate.beta_max));
    if lo > hi + eps {
        return Err(Error::Domain(format!(
            "[{a}, {b}] is disjoint from S_phi = [{}, {}]; the rate is -inf",
            rate.beta_min, rate.beta_max
        )));
    }
    let hi = hi.max(lo);
    let mut warnings = Vec::new();
    if lo > a + eps || hi < b - eps {
        warnings.push(format!("interval clamped to [{lo}, {hi}]"));
    }
    let p = rate.s_star.clamp(lo, hi);
    let ld = match rate.eval(p) {
        RateValue::Finite(v) => Some(-v),
        _ => None,
    };
    Ok(LdValue {
        requested: [a, b],
        interval: [lo, hi],
        ld,
        argmin: p,
        warnings,
    })
}

/// Interval classes from the large-deviation analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Disjoint from `[lambda_min, lambda_max]`.
    #[serde(rename = "delta1")]
    Delta1,
    /// Contains `s*`.
    #[serde(rename = "delta2")]
    Delta2,
    /// Meets the strictly convex part but misses `s*`.
    #[serde(rename = "delta3")]
    Delta3,
}

/// The constants behind the `Delta_1 / Delta_2 / Delta_3` decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaRegions {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub s_star: f64,
}

impl DeltaRegions {
    pub fn classify(&self, a: f64, b: f64) -> Region {
        if a <= self.s_star && self.s_star <= b {
            Region::Delta2
        } else if b < self.lambda_min || a > self.lambda_max {
            Region::Delta1
        } else {
            Region::Delta3
        }
    }
}

pub fn delta_regions(rate: &RateFunction) -> DeltaRegions {
    DeltaRegions {
        lambda_min: rate.lambda_min,
        lambda_max: rate.lambda_max,
        s_star: rate.s_star,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauSample {
    pub s: f64,
    pub tau_hat: Option<f64>,
}

/// Entropy of the set of points whose Birkhoff averages accumulate in `[a,b]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub requested: [f64; 2],
    pub interval: [f64; 2],
    pub ld: Option<f64>,
    /// `h_top + LD`.
    pub h_x: Option<f64>,
    pub region: Region,
    /// `tau_hat` over `S_phi` intersected with the interval.
    pub tau_hat: Vec<TauSample>,
    pub warnings: Vec<String>,
}

/// Samples of `tau_hat` used per interval query.
const TAU_SAMPLES: usize = 21;

pub fn birkhoff_spectrum(rate: &RateFunction, a: f64, b: f64) -> Result<SpectrumResult> {
    let ld = ld_interval(rate, a, b)?;
    let [lo, hi] = ld.interval;
    let tau_hat = if hi - lo < 1e-15 {
        vec![TauSample {
            s: lo,
            tau_hat: rate.tau_hat(lo),
        }]
    } else {
        (0..TAU_SAMPLES)
            .map(|i| {
                let s = lo + (hi - lo) * i as f64 / (TAU_SAMPLES - 1) as f64;
                TauSample { s, tau_hat: rate.tau_hat(s) }
            })
            .collect()
    };
    Ok(SpectrumResult {
        requested: ld.requested,
        interval: ld.interval,
        h_x: ld.ld.map(|v| rate.h_top + v),
        ld: ld.ld,
        region: delta_regions(rate).classify(lo, hi),
        tau_hat,
        warnings: ld.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regions() -> DeltaRegions {
        DeltaRegions {
            lambda_min: 0.1,
            lambda_max: 0.9,
            s_star: 0.5,
        }
    }

    #[test]
    fn region_tests() {
        let d = regions();
        assert_eq!(d.classify(0.4, 0.6), Region::Delta2);
        assert_eq!(d.classify(0.6, 0.8), Region::Delta3);
        assert_eq!(d.classify(0.0, 0.05), Region::Delta1);
        assert_eq!(d.classify(0.95, 1.0), Region::Delta1);
        assert_eq!(d.classify(0.05, 0.2), Region::Delta3);
    }
}
