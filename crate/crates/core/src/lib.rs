//! Discrete-event simulator of task offloading from pedestrians to a remote
//! cloud, an edge node at the access point, or a vehicular cloud formed by
//! cars driving through the AP's coverage.
//!
//! A run ([`simulation::Simulation`]) wires together:
//!
//! - [`engine`]: the deterministic event scheduler,
//! - [`mobility`]: Manhattan-grid vehicle movement and the coverage predicate,
//! - [`netmodel`]: FIFO shared-medium wireless links and the core network,
//! - [`compute`]: cloud, edge and vehicle execution,
//! - [`controller`]: beacon registry and the ECFirst / VCCFirst strategies,
//! - [`workload`]: periodic user requests,
//! - [`metrics`]: per-run aggregation.
//!
//! [`experiments`] runs scenarios and sweeps; [`costmodel`] holds the
//! pay-per-request versus edge-capex arithmetic.

pub mod compute;
pub mod config;
pub mod controller;
pub mod costmodel;
pub mod engine;
pub mod experiments;
pub mod metrics;
pub mod mobility;
pub mod netmodel;
pub mod rng;
pub mod simulation;
pub mod task;
pub mod workload;

pub use config::{ArrivalProcess, ConfigError, SimConfig, Strategy};
pub use controller::{Destination, FailureReason, OffloadRecord, Outcome};
pub use experiments::{run_scenario, run_scenario_full, sweep, SweepAxis, SweepPlan, SweepRow};
pub use metrics::RunSummary;
pub use simulation::{ScenarioOutput, Simulation};
pub use task::{LatencyClass, Task, TaskId, UserId, VehicleId};
