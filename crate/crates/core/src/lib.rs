//! Long-range QED interaction between an excited and a ground-state hydrogen
//! atom: Wick-rotated and resonant pole contributions, van der Waals
//! coefficients and their asymptotic limits.

pub mod atomic;
pub mod basis;
pub mod cache;
pub mod coefficients;
pub mod config;
pub mod constants;
pub mod error;
pub mod exec;
pub mod interaction;
pub mod quadrature;
pub mod response;

pub use error::{Error, Result};
