//! Attitude estimation and tracking on SO(3) with an adaptive neural-network
//! stochastic filter, plus the closed-loop simulation harness around it.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attitude;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod filter;
pub mod quat;
pub mod rng;
pub mod sim;
pub mod so3;
pub mod stats;

pub use attitude::{Attitude, Backend};
pub use config::{Setup, SimConfig};
pub use error::{Error, Result};
pub use sim::{run_simulation, Row, RunRecord, CSV_HEADER};
pub use stats::{monte_carlo, steady_state_stats, SummaryStats};
