//! Cooperative single-target tracking and radio jamming by a team of
//! pursuer agents.
//!
//! Each agent runs a Bernoulli particle filter on range/bearing
//! measurements from a cone-shaped sensor, the team fuses its beliefs with
//! covariance intersection, and a GRASP planner picks the next positions
//! and transmit power levels so that at least `n` agents detect the target
//! while no agent is jammed by its teammates.
//!
//! [`sim::run_scenario`] runs the whole loop from a [`config::ScenarioConfig`];
//! the modules underneath can be used on their own.

pub mod cli;
pub mod config;
pub mod control;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod fusion;
pub mod geometry;
mod linalg;
pub mod metrics;
pub mod models;
pub mod sim;

pub use error::{Error, Result};
