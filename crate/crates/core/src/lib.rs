//! Caputo fractional operators, capacity certificates for finite-time
//! blow-up of time-fractional dispersive equations, and method-of-lines
//! simulators that observe the blow-up and maximum-principle behaviour.

// `!(x > 0.0)` guards are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blowup_ode;
pub mod capacity;
pub mod error;
pub mod fracops;
pub mod pde_sim;
pub mod quadrature;
pub mod testfn;

pub use error::{Error, Result};
