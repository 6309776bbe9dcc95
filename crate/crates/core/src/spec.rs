//! JSON descriptions of maps and potentials.
//!
//! ```json
//! {"type": "linear_full_branch", "slopes": [2, 4, 4]}
//! {"type": "manneville_pomeau", "alpha": 1.0}
//! {"type": "piecewise_poly", "branches": [{"domain": [0, 0.5], "coeffs": [0, 2]}, ...]}
//!
//! {"type": "geometric"}
//! {"type": "constant", "value": 0.5}
//! {"type": "trig_series", "cos": [0, 1], "sin": []}
//! {"type": "indicator", "interval": [0.5, 1.0]}
//! {"type": "combo", "terms": [{"weight": 2.0, "potential": {"type": "geometric"}}]}
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::potential::Potential;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    LinearFullBranch { slopes: Vec<f64> },
    MannevillePomeau { alpha: f64 },
    PiecewisePoly { branches: Vec<PolyBranchSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyBranchSpec {
    pub domain: [f64; 2],
    /// Coefficients `c_0, c_1, ...` of `sum c_j y^j`.
    pub coeffs: Vec<f64>,
}

impl MapSpec {
    pub fn build(&self) -> Result<CircleMap> {
        match self {
            MapSpec::LinearFullBranch { slopes } => CircleMap::linear(slopes),
            MapSpec::MannevillePomeau { alpha } => CircleMap::manneville_pomeau(*alpha),
            MapSpec::PiecewisePoly { branches } => {
                let pieces: Vec<_> = branches
                    .iter()
                    .map(|b| ((b.domain[0], b.domain[1]), b.coeffs.clone()))
                    .collect();
                CircleMap::piecewise_poly(&pieces)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Geometric,
    Constant {
        value: f64,
    },
    TrigSeries {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Indicator {
        interval: [f64; 2],
    },
    Combo {
        terms: Vec<TermSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub weight: f64,
    pub potential: PotentialSpec,
}

impl PotentialSpec {
    /// Builds the potential; `geometric` refers to `map`.
    pub fn build(&self, map: &Arc<CircleMap>) -> Result<Potential> {
        match self {
            PotentialSpec::Geometric => Ok(Potential::geometric(map)),
            PotentialSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::Spec(format!("constant {value} is not finite")));
                }
                Ok(Potential::constant(*value))
            }
            PotentialSpec::TrigSeries { cos, sin } => {
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err(Error::Spec("trig coefficients must be finite".into()));
                }
                Ok(Potential::trig_series(cos.clone(), sin.clone()))
            }
            PotentialSpec::Indicator { interval } => Potential::indicator(interval[0], interval[1]),
            PotentialSpec::Combo { terms } => Potential::combine(
                terms
                    .iter()
                    .map(|t| Ok((t.weight, t.potential.build(map)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Spec(format!("{what}: {e}")))
}

pub fn parse_map(text: &str) -> Result<MapSpec> {
    parse(text, "map spec")
}

pub fn parse_potential(text: &str) -> Result<PotentialSpec> {
    parse(text, "potential spec")
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))
}

pub fn load_map(path: &Path) -> Result<MapSpec> {
    parse(&read(path)?, &path.display().to_string())
}

pub fn load_potential(path: &Path) -> Result<PotentialSpec> {
    parse(&read(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_specs() {
        let m = parse_map(r#"{"type": "linear_full_branch", "slopes": [2, 4, 4]}"#).unwrap();
        assert_eq!(m.build().unwrap().degree(), 3);
        let m = parse_map(r#"{"type": "manneville_pomeau", "alpha": 1}"#).unwrap();
        let map = Arc::new(m.build().unwrap());
        let p = parse_potential(
            r#"{"type": "combo", "terms": [{"weight": 2, "potential": {"type": "geometric"}},
                {"weight": 1, "potential": {"type": "indicator", "interval": [0.5, 1]}}]}"#,
        )
        .unwrap();
        let phi = p.build(&map).unwrap();
        assert_eq!(phi.eval(0.0), 0.0);
    }

    #[test]
    fn malformed_json_reports_position() {
        let e = parse_map("{\n  \"type\": \"linear_full_branch\",\n  \"slopes\": [2, 2,]\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert_eq!(e.exit_code(), 2);
        assert!(parse_potential(r#"{"type": "bogus"}"#).is_err());
    }
}
