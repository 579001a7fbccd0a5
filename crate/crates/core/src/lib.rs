//! Deterministic discrete-event MANET simulator for measuring how long
//! routing paths stay usable and how long they take to repair, plus the
//! analysis that turns sweeps of runs into scaling curves.

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod ground_truth;
pub mod link_estimation;
pub mod lsr;
pub mod metrics;
pub mod mobility;
pub mod olsr;
pub mod output;
pub mod scheduler;
pub mod sweep;

pub use config::{PairSample, Protocol, SimConfig};
pub use engine::{simulate, RunResult, RunSummary};
pub use error::{Error, Result};
pub use ground_truth::NodeId;
