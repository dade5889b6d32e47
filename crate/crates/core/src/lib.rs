//! Finite-rate simulation of the asymmetric fast-reaction system
//!
//! ```text
//! ∂t u = Δu - k u^m v,    ∂t v = -k u v
//! ```
//!
//! on intervals and radially symmetric disks or annuli, together with the
//! objects its `k → ∞` limit is measured against: heat-equation references,
//! the self-similar inflow profile, and the annular subsolution barrier.

pub mod barrier;
pub mod error;
pub mod grid;
pub mod lab;
pub mod par;
pub mod profile;
pub mod reference;
pub mod solver;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{BoundaryCondition, BoundarySpec, Field, Geometry, Grid1D, TimeSeries};
pub use par::Execution;
pub use profile::SelfSimilarProfile;
pub use reference::HeatSpec;
pub use solver::{ProblemSpec, State, Trajectory};
