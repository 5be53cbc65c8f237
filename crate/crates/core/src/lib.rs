//! Joint uplink/downlink resource partitioning for flexible-duplex
//! multi-cell networks.
//!
//! The crate models a set of cells sharing one time-frequency grid, where
//! every cell decides how much of the grid each of its UL and DL services
//! gets. Interference between cells depends on how much their allocations
//! overlap: UL and DL are placed from opposite ends of the grid, so
//! opposite-direction services only collide once their loads add past one.
//!
//! Layers, bottom up:
//!
//! * [`model`]: scenarios, services, the MRU grid and cell loads.
//! * [`channel`]: pathloss gains and the normalized coupling matrix.
//! * [`interference`]: reuse coupling, SINR, throughput and QoS.
//! * [`solvers`]: fixed-point, SAFP and RMDI max-min solvers.
//! * [`baselines`]: fixed split and traffic-proportional dynamic TDD.
//! * [`harness`]: scenario generation, Monte-Carlo sweeps and aggregation.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod harness;
pub mod interference;
pub mod model;
pub mod parallel;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use parallel::Execution;
