//! DEA efficiency measures under assurance regions.
//!
//! Classic slacks-based (SBM-AR) and BRWZ-AR scores, their closest-target
//! counterparts computed from single-coordinate max-step LPs, zero-data
//! extensions, and a property harness that checks the measures' axioms on
//! a technology.

pub mod ar;
pub mod closest;
pub mod data;
pub mod error;
pub mod frontier;
pub mod lp;
pub mod matrix;
pub mod measures;
pub mod report;
pub mod verify;

pub use ar::{AssumptionReport, AssuranceRegion, RatioBounds};
pub use data::Dataset;
pub use error::{Error, Result};
pub use frontier::{Extent, Ray, Technology};
pub use matrix::Matrix;
pub use report::{EfficiencyReport, Model, SlackProfile};
