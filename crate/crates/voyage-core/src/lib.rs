//! Fuel- and time-optimal trajectory planning for an unmanned surface
//! vessel in a direction-dependent ocean-current field with discrete
//! refueling ports.
//!
//! The planner discretizes a three-state model (east-west position,
//! north-south position, fuel level) over a Latin-hypercube position
//! sample and uniform fuel/input grids, then runs finite-horizon
//! backward dynamic programming with nearest-neighbor interpolation.
//! Sweeping the scalarization weight `lambda` between the fuel and
//! trip-time objectives traces out Pareto fronts of the tradeoff.
//!
//! Module map:
//!
//! - [`environment`] — ocean world: current field, ports, terminal region.
//! - [`config`] — scenario document parsing and validation.
//! - [`dynamics`] — vessel motion model, cubic fuel-burn law, discrete step.
//! - [`gridgen`] — state mesh (LHS positions, fuel grid), input lattice,
//!   exact nearest-neighbor index.
//! - [`dp`] — backward induction, policy extraction, plan execution,
//!   exact-dynamics rollout, and a brute-force enumeration oracle.
//! - [`pareto`] — lambda sweeps, non-dominated front extraction,
//!   marginal tradeoff metrics.
//! - [`cache`] — versioned mesh/value caches and content hashes.

pub mod cache;
pub mod config;
pub mod dp;
pub mod dynamics;
pub mod environment;
pub mod gridgen;
pub mod pareto;

pub use config::{load_environment, load_scenario, Discretization, Scenario};
pub use dynamics::{State, VehicleParams};
pub use environment::{Bounds, CurrentField, EnvironmentSpec, Port, Position, TerminalRegion};
