//! Hyperbolic and expanding verdicts for `t * (-log|Df|)` on the intermittent map.

use std::sync::Arc;

use thermoscope::pressure::{classify_at, PressureEngine};
use thermoscope::{AnalysisConfig, CircleMap, Potential};

fn main() -> thermoscope::Result<()> {
    let map = Arc::new(CircleMap::manneville_pomeau(1.0)?);
    let phi = Potential::geometric(&map);
    let engine = PressureEngine::new(&map, &AnalysisConfig::default())?;
    for t in [0.0, 0.5, 0.9, 1.0, 2.0] {
        let (hyp, exp) = classify_at(&engine, &phi, t)?;
        println!(
            "t = {t:>4}: P = {:>10.3e}  hyperbolic {:?} (margin {:.2e})  expanding {:?} (margin {:.2e}, tol {:.1e})",
            hyp.pressure, hyp.verdict, hyp.margin, exp.verdict, exp.margin, exp.tolerance
        );
    }
    Ok(())
}
