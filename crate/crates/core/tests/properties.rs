use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use thermoscope::config::OperatorConfig;
use thermoscope::pressure::{beta_max, pressure_curve, transition_points, PressureEngine};
use thermoscope::spectra::{ld_interval, rate_function, RateFunction, RateValue};
use thermoscope::transfer_op::{apply, leading_eigenpair, GridFunction, Partition, UlamGeometry};
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn maps() -> &'static [Arc<CircleMap>] {
    static MAPS: OnceLock<Vec<Arc<CircleMap>>> = OnceLock::new();
    MAPS.get_or_init(|| {
        vec![
            Arc::new(CircleMap::linear(&[2.0, 2.0]).unwrap()),
            Arc::new(CircleMap::linear(&[2.0, 4.0, 4.0]).unwrap()),
            Arc::new(CircleMap::manneville_pomeau(0.5).unwrap()),
        ]
    })
}

fn small(n: usize) -> AnalysisConfig {
    let mut cfg = AnalysisConfig::default();
    cfg.operator.ulam_n = n;
    cfg.operator.neutral_levels = 4;
    cfg
}

fn trig() -> impl Strategy<Value = Potential> {
    (prop::collection::vec(-1.0..1.0f64, 1..4), prop::collection::vec(-1.0..1.0f64, 0..3))
        .prop_map(|(c, s)| Potential::trig_series(c, s))
}

/// Doubling map with the indicator of `[1/2, 1)`, and the intermittent map
/// with a trigonometric potential.
fn rates() -> &'static [RateFunction] {
    static RATES: OnceLock<Vec<RateFunction>> = OnceLock::new();
    RATES.get_or_init(|| {
        let mut cfg = small(128);
        cfg.t_min = -4.0;
        cfg.t_max = 4.0;
        cfg.t_samples = 33;
        let d = CircleMap::linear(&[2.0, 2.0]).unwrap();
        let a = transition_points(&d, &Potential::indicator(0.5, 1.0).unwrap(), &cfg).unwrap();
        let m = CircleMap::manneville_pomeau(1.0).unwrap();
        let b = transition_points(&m, &Potential::trig_series(vec![0.0, 0.5], vec![0.2]), &cfg).unwrap();
        vec![rate_function(&a, 101).unwrap(), rate_function(&b, 101).unwrap()]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transfer_operator_is_linear_and_positive(
        k in 0usize..3,
        phi in trig(),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        u in prop::collection::vec(0.0..1.0f64, 16),
        v in prop::collection::vec(-1.0..1.0f64, 16),
    ) {
        let map = &maps()[k];
        let part = Arc::new(Partition::uniform(16));
        let f = GridFunction::new(part.clone(), u.clone()).unwrap();
        let g = GridFunction::new(part.clone(), v.clone()).unwrap();
        let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let h = GridFunction::new(part, mix).unwrap();
        let (lf, lg, lh) = (apply(map, &phi, &f).unwrap(), apply(map, &phi, &g).unwrap(), apply(map, &phi, &h).unwrap());
        for i in 0..lh.values().len() {
            let expect = a * lf.values()[i] + b * lg.values()[i];
            prop_assert!((lh.values()[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()) * 10.0);
            prop_assert!(lf.values()[i] >= 0.0);
        }
    }

    #[test]
    fn ulam_duality(k in 0usize..3, phi in trig(), seed in 0u64..1000) {
        let map = &maps()[k];
        let cfg = OperatorConfig { ulam_n: 48, neutral_levels: 4, ..OperatorConfig::default() };
        let u = UlamGeometry::new(map, &cfg).unwrap().matrix(map, &phi).unwrap();
        let n = u.dim();
        let x: Vec<f64> = (0..n).map(|i| ((i as u64 * 2654435761 + seed) % 997) as f64 / 997.0).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i as u64 * 40503 + 7 * seed) % 991) as f64 / 991.0 - 0.5).collect();
        let (mut mx, mut mty) = (vec![0.0; n], vec![0.0; n]);
        u.mul(&x, &mut mx);
        u.mul_transpose(&y, &mut mty);
        let lhs: f64 = y.iter().zip(&mx).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&mty).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        let lead = leading_eigenpair(&u, &cfg).unwrap();
        prop_assert!(k == 2 || lead.converged());
        prop_assert!(!lead.converged() || lead.residual < 1e-8, "residual {}", lead.residual);
    }

    #[test]
    fn pressure_is_convex_and_dominates(k in 0usize..2, phi in trig()) {
        let map = &maps()[k];
        let cfg = small(64);
        let ts = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let curve = pressure_curve(map, &phi, &ts, &cfg).unwrap();
        prop_assert!(curve.is_convex(1e-6), "min second difference {}", curve.min_second_difference());
        let p0 = curve.value_at(0.0).unwrap();
        prop_assert!((p0 - (map.degree() as f64).ln()).abs() < 1e-6);
        for q in &curve.points {
            let beta = beta_max(map, &phi.scale(q.t), 8, 1 << 16).unwrap().value;
            prop_assert!(q.p >= beta - 1e-9, "t = {}: P = {} < beta = {}", q.t, q.p, beta);
        }
    }

    #[test]
    fn pressure_shifts_with_constants(k in 0usize..3, phi in trig(), c in -3.0..3.0f64) {
        let map = &maps()[k];
        let engine = PressureEngine::new(map, &small(64)).unwrap();
        let p = engine.estimate(&phi).unwrap().pressure;
        let q = engine.estimate(&phi.plus(1.0, &Potential::constant(c))).unwrap().pressure;
        prop_assert!((q - p - c).abs() < 1e-9, "{q} vs {p} + {c}");
    }

    #[test]
    fn rate_function_properties(r in 0usize..2, u in 0.0..1.0f64, w in 0.0..1.0f64, e in 0.0..0.2f64) {
        let rate = &rates()[r];
        let (lo, hi) = (rate.beta_min, rate.beta_max);
        let s = lo + (hi - lo) * u;
        if let RateValue::Finite(i) = rate.eval(s) {
            prop_assert!(i >= 0.0);
        }
        if let Some(t) = rate.tau_hat(s) {
            prop_assert!(t <= rate.h_top + 1e-12);
        }
        let a = lo + (hi - lo) * u.min(w);
        let b = lo + (hi - lo) * u.max(w);
        let inner = ld_interval(rate, a, b).unwrap();
        let outer = ld_interval(rate, a - e, b + e).unwrap();
        if let (Some(x), Some(y)) = (inner.ld, outer.ld) {
            prop_assert!(x <= y + 1e-12, "LD[{a}, {b}] = {x} > {y}");
            prop_assert!(x <= 0.0);
        }
    }
}

#[test]
fn rate_function_vanishes_at_the_mean() {
    for rate in rates() {
        assert!(rate.interior(rate.s_star) < 1e-6, "{}", rate.interior(rate.s_star));
        assert!(rate.lambda_min < rate.s_star && rate.s_star < rate.lambda_max);
    }
}
