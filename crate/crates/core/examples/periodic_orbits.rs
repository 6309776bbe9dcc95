//! Periodic orbits by itinerary, extreme orbit averages and the cohomology test.

use std::sync::Arc;

use thermoscope::orbits::orbit_average;
use thermoscope::pressure::{beta_max, cohomologous_to_constant};
use thermoscope::{CircleMap, Potential};

fn main() -> thermoscope::Result<()> {
    let doubling = Arc::new(CircleMap::linear(&[2.0, 2.0])?);
    let indicator = Potential::indicator(0.5, 1.0)?;
    for p in doubling.periodic_points(2, 1 << 10)? {
        println!(
            "itinerary {:?}: x = {:.6}, average of 1_[1/2,1) = {}",
            p.itinerary,
            p.point,
            orbit_average(&doubling, &indicator, &p)
        );
    }
    let c = cohomologous_to_constant(&doubling, &indicator, 10, 1 << 12)?;
    println!("doubling, indicator: spread {} (cohomologous: {})", c.spread, c.cohomologous);
    let c = cohomologous_to_constant(&doubling, &Potential::geometric(&doubling), 10, 1 << 12)?;
    println!("doubling, geometric: spread {:e} (cohomologous: {})", c.spread, c.cohomologous);

    let mp = Arc::new(CircleMap::manneville_pomeau(1.0)?);
    let best = beta_max(&mp, &Potential::geometric(&mp), 12, 1 << 13)?;
    println!("MP geometric: beta = {} attained by {:?} at x = {}", best.value, best.itinerary, best.point);
    Ok(())
}
