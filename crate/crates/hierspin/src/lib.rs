//! Mean-field and hierarchical spin systems driven by Ornstein-Uhlenbeck
//! fields: an exact event-driven simulator, the deterministic and stochastic
//! limit objects at the order-1, order-N and order-N^2 timescales, the
//! zero-temperature geometry, and Monte Carlo harnesses that compare them.

pub mod acceptance;
pub mod error;
pub mod harness;
pub mod limits;
pub mod model;
pub mod zerotemp;
pub mod rng;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
