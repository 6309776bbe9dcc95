//! Numerical thermodynamic formalism for expanding and non-uniformly
//! expanding circle maps.
//!
//! The crate discretizes weighted transfer operators of full-branch circle
//! maps, estimates topological pressure, locates phase transitions of
//! `t -> P(t phi)`, and derives large-deviation rate functions and Birkhoff
//! entropy spectra from the pressure curve.

pub mod circle_map;
pub mod cli;
pub mod config;
pub mod error;
pub mod oracles;
pub mod orbits;
pub mod output;
pub mod potential;
pub mod pressure;
pub mod spec;
pub mod spectra;
pub mod transfer_op;

pub use circle_map::{CircleMap, MapKind, PeriodicPoint, Side};
pub use config::{AnalysisConfig, OperatorConfig};
pub use error::{Error, Result};
pub use potential::{Potential, Regularity};
