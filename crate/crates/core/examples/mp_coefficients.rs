//! Exact and floating-point checks of the intermittent family's coefficients,
//! and a few samples of the map with one-sided derivatives.

use num_rational::Rational64;
use thermoscope::oracles::verify_mp_coefficients;
use thermoscope::{CircleMap, Side};

fn main() -> thermoscope::Result<()> {
    for alpha in [
        Rational64::from_integer(0),
        Rational64::new(1, 4),
        Rational64::new(1, 2),
        Rational64::new(3, 4),
        Rational64::from_integer(1),
    ] {
        let r = verify_mp_coefficients(alpha)?;
        println!(
            "alpha = {alpha}: a = {:.15}, b = {:.15}, exact = {}, max residual = {:e}, min g' = {} at {}",
            r.a,
            r.b,
            r.exact,
            r.max_residual(),
            r.min_dg,
            r.argmin_dg
        );
    }
    let map = CircleMap::manneville_pomeau(1.0)?;
    for x in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9] {
        println!(
            "x = {x:<5} f = {:.10}  Df- = {:.6}  Df+ = {:.6}",
            map.eval(x),
            map.deriv(x, Side::Left),
            map.deriv(x, Side::Right)
        );
    }
    Ok(())
}
