//! Time-harmonic Maxwell solutions computed by filtering Yee time-domain runs.
//!
//! The filtered evolution `Pi` maps initial data to initial data; its fixed
//! point is the frequency-domain solution. Writing `Pi nu = S nu + Pi 0` turns
//! the iteration into the linear system `(I - S) nu = Pi 0`, which is solved
//! matrix-free with GMRES or CG.

pub mod analysis;
pub mod error;
pub mod filter;
pub mod grid;
pub mod io;
pub mod timedomain;
pub mod waveholtz;

pub use error::{Error, Result};
