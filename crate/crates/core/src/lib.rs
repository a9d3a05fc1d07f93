//! Randomized active-set DCA for max-structured difference-of-convex programs.

pub mod driver;
pub mod error;
pub mod experiments;
pub mod instances;
pub mod lp;
pub mod model;
pub mod numerics;
pub mod oracles;
pub mod rng;
pub mod rules;
pub mod sketch;
pub mod stationarity;
pub mod subproblem;

pub use error::{Error, Result};
