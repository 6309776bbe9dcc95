//! Large deviations and the entropy spectrum of the frequency of visits to
//! `[1/2, 1)` under the doubling map.

use std::sync::Arc;

use thermoscope::pressure::transition_points;
use thermoscope::spectra::{birkhoff_spectrum, ld_interval, rate_function};
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn binary_entropy(s: f64) -> f64 {
    -(s * s.ln() + (1.0 - s) * (1.0 - s).ln())
}

fn main() -> thermoscope::Result<()> {
    let map = Arc::new(CircleMap::linear(&[2.0, 2.0])?);
    let phi = Potential::indicator(0.5, 1.0)?;
    let cfg = AnalysisConfig::default();

    let report = transition_points(&map, &phi, &cfg)?;
    let rate = rate_function(&report, cfg.s_samples)?;
    println!(
        "S_phi = [{}, {}], lambda_min = {:.5}, lambda_max = {:.5}, s* = {:.12}",
        rate.beta_min, rate.beta_max, rate.lambda_min, rate.lambda_max, rate.s_star
    );

    println!("{:>6} {:>12} {:>12} {:>12}", "s", "I(s)", "h_X(s,s)", "H(s)");
    for s in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95] {
        let r = birkhoff_spectrum(&rate, s, s)?;
        println!("{s:>6.2} {:>12.8} {:>12.8} {:>12.8}", rate.interior(s), r.h_x.unwrap_or(f64::NAN), binary_entropy(s));
    }

    for (a, b) in [(0.4, 0.6), (0.6, 0.9), (0.9, 0.95)] {
        let ld = ld_interval(&rate, a, b)?;
        let region = rate.delta_regions().classify(a, b);
        println!("LD[{a}, {b}] = {:.8} ({region:?})", ld.ld.unwrap_or(f64::NAN));
    }
    match ld_interval(&rate, -1.0, -0.5) {
        Ok(v) => println!("unexpected value {v:?}"),
        Err(e) => println!("[-1, -0.5]: {e}"),
    }
    Ok(())
}
