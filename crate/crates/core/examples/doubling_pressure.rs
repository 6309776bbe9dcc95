//! Pressure of `t * (-log|Df|)` for the doubling map from both estimators,
//! against the closed form `(1 - t) log 2`.

use std::sync::Arc;

use thermoscope::pressure::PressureEngine;
use thermoscope::transfer_op::{apply, growth_rate_pressure, GridFunction, Partition};
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn main() -> thermoscope::Result<()> {
    let map = Arc::new(CircleMap::linear(&[2.0, 2.0])?);
    let geometric = Potential::geometric(&map);
    let cfg = AnalysisConfig::default();

    // One application of the operator to the constant function.
    let part = Arc::new(Partition::for_map(&map, 8, 0));
    let one = GridFunction::constant(part, 1.0);
    let image = apply(&map, &geometric.scale(0.5), &one)?;
    println!("L_(t=0.5) 1 at the nodes: {:?}", image.values());

    let g = growth_rate_pressure(&map, &geometric.scale(-1.0), &cfg.operator)?;
    println!("norm growth at t = -1: {:.12} (drift {:.1e})", g.pressure, g.drift);

    let engine = PressureEngine::new(&map, &cfg)?;
    let ts: Vec<f64> = (-3..=3).map(f64::from).collect();
    let curve = engine.curve(&geometric, &ts)?;
    println!("{:>5} {:>20} {:>20} {:>10}", "t", "P", "(1-t) log 2", "error");
    for q in &curve.points {
        let exact = (1.0 - q.t) * 2f64.ln();
        println!("{:>5} {:>20.15} {:>20.15} {:>10.1e}", q.t, q.p, exact, (q.p - exact).abs());
    }
    Ok(())
}
