//! Semicontinuous multi-agent pedestrian simulator.
//!
//! Each tick every agent samples a desired step length and heading, builds a
//! grid of scaled and rotated candidate steps, drops every candidate that
//! would land on or pass through another body, a wall or an obstacle, and
//! takes the remaining candidate of highest utility. All agents plan against
//! the same snapshot and are then committed together.

pub mod cli;
pub mod config;
pub mod decision;
pub mod engine;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod perception;
pub mod scenarios;
pub mod validation;

pub use error::{Error, Result};
