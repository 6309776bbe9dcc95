//! The (2, 4, 4) piecewise-linear map: Ulam pressure against the symbolic
//! formula and the periodic-orbit sum.

use std::sync::Arc;

use thermoscope::oracles::{pressure_periodic_orbits, SymbolicModel};
use thermoscope::pressure::pressure_curve;
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn main() -> thermoscope::Result<()> {
    let slopes = [2.0, 4.0, 4.0];
    let map = Arc::new(CircleMap::linear(&slopes)?);
    for w in map.warnings() {
        println!("note: {w}");
    }
    let geometric = Potential::geometric(&map);
    let mut cfg = AnalysisConfig::default();
    cfg.operator.ulam_n = 4096;

    let ts: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
    let curve = pressure_curve(&map, &geometric, &ts, &cfg)?;
    println!("{:>6} {:>14} {:>14} {:>14}", "t", "Ulam", "symbolic", "orbits n=8");
    for q in &curve.points {
        let symbolic = SymbolicModel::geometric(&slopes, q.t)?.pressure();
        let orbits = pressure_periodic_orbits(&map, &geometric.scale(q.t), 8, 1 << 20)?;
        println!("{:>6.2} {:>14.10} {:>14.10} {:>14.10}", q.t, q.p, symbolic, orbits);
    }
    Ok(())
}
