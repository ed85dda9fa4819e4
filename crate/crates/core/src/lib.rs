//! Infinite-dimensional Lax representation of the 1D Hubbard ladder on an
//! exactly truncated auxiliary space, and the exact steady state of the
//! boundary-driven chain built from it.

pub mod aux_space;
pub mod commute;
pub mod error;
pub mod hubbard;
pub mod io;
pub mod lax;
pub mod lindblad;
pub mod linalg;
pub mod mpo;
pub mod ness;
pub mod observables;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
