//! Steady-state quantum correlations of a two-cavity optomechanical system
//! driven by two-mode squeezed light.
//!
//! The pipeline runs [`model`] (drift and diffusion) → [`solver`] (Lyapunov
//! steady state) → [`gaussian`] (Simon witness and Gaussian discord), and
//! [`sweep`] evaluates it over parameter grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
pub mod sweep;
pub mod cli;
