//! Experiment harness: configuration, k-sweeps, the inflow free-boundary
//! experiment and CSV reports.

pub mod config;
pub mod report;
pub mod setup;
pub mod stefan;
pub mod sweep;

pub use config::Config;
pub use report::{emit_csv, fit_power_law, interface_position, parse_csv, PowerLaw, Table};
pub use setup::InitialProfile;
pub use stefan::{stefan_experiment, StefanReport, StefanSpec};
pub use sweep::{sweep, SweepReport, SweepSpec};
