//! Exponential cubic B-spline collocation for the cubic Klein-Gordon
//! equation `u_tt = u_xx + u - u³` with homogeneous Neumann ends.

pub mod banded;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod hyperbolic;
pub mod solver;
pub mod spline_basis;

pub use error::{Error, Result};
