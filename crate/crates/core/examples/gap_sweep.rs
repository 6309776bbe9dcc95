//! Spectral gap of the Ulam matrix and the essential-radius certificate
//! along `t * (-log|Df|)` for the intermittent map.

use std::sync::Arc;

use thermoscope::pressure::{gap_collapse, gap_sweep, PressureEngine};
use thermoscope::transfer_op::spectral_report;
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn main() -> thermoscope::Result<()> {
    let map = Arc::new(CircleMap::manneville_pomeau(1.0)?);
    let phi = Potential::geometric(&map);
    let cfg = AnalysisConfig::default();
    let engine = PressureEngine::new(&map, &cfg)?;

    let ts = [0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0, 1.2, 1.5, 2.0];
    let rows = gap_sweep(&engine, &phi, &ts)?;
    println!("{:>5} {:>12} {:>12} {:>10} {:>12} {:>6}", "t", "lambda1", "|lambda2|", "ratio", "ess bound", "cert");
    for r in &rows {
        println!(
            "{:>5.2} {:>12.8} {:>12.8} {:>10.6} {:>12.8} {:>6}",
            r.t, r.lambda, r.subleading, r.ratio, r.ess_bound, r.certificate
        );
    }
    println!("certificate first fails at t = {:?}", gap_collapse(&rows));

    // At t = 1 the conformal measure is Lebesgue.
    let report = spectral_report(&map, &phi, &cfg)?;
    let widths: Vec<f64> = (0..report.partition.cells()).map(|i| report.partition.width(i)).collect();
    let dev: f64 = report.nu.iter().zip(&widths).map(|(n, w)| (n - w).abs()).sum();
    println!("t = 1: lambda = {:.8}, total variation distance of nu from Lebesgue = {dev:.2e}", report.lambda);
    Ok(())
}
