//! Stochastic-geometry model of directional millimeter-wave reflection
//! channels, with a Monte Carlo ray-tracing oracle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod first_order;
pub mod montecarlo;
pub mod geometry;
pub mod pdp;
pub mod quadrature;
pub mod scenario;
pub mod second_order;

pub use error::{Error, Result};
pub use scenario::{BlockageMoments, ImageVariant, Orientation, Scenario};
