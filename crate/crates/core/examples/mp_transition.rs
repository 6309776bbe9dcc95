//! Phase transition of the geometric potential for the intermittent map
//! `f_alpha` with `alpha = 1`. Writes the curve to `mp_pressure.csv`.

use std::fs::File;
use std::sync::Arc;

use thermoscope::pressure::{transition_points_with, PressureEngine};
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn main() -> thermoscope::Result<()> {
    let map = Arc::new(CircleMap::manneville_pomeau(1.0)?);
    println!("{map}; neutral fixed points {:?}", map.neutral_fixed_points());
    let phi = Potential::geometric(&map);

    let mut cfg = AnalysisConfig::default();
    cfg.t_min = -3.0;
    cfg.t_max = 3.0;
    cfg.t_samples = 61;
    let engine = PressureEngine::new(&map, &cfg)?;
    let report = transition_points_with(&engine, &phi)?;

    println!("t1 = {}, t2 = {:.4}", report.t1_ext(), report.t2_ext());
    println!(
        "beta(phi) = {} at {:?}, min orbit average = {:.6}",
        report.beta_max.value, report.beta_max.itinerary, report.beta_min.value
    );
    for z in report.zones.iter().filter(|z| (z.t * 10.0).fract().abs() < 1e-9 && z.t.abs() <= 3.0) {
        if (z.t * 2.0).fract().abs() < 1e-9 {
            println!("  t = {:>5.2}  P = {:>12.6e}  {:?}", z.t, z.p, z.zone);
        }
    }
    report.curve.write_csv(File::create("mp_pressure.csv")?, None)?;
    println!("curve written to mp_pressure.csv ({} rows)", report.curve.len());
    Ok(())
}
