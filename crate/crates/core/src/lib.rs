//! Tail functions, Lebesgue–Riesz moments, Grand Lebesgue Space norms, Young–Fenchel tail
//! bounds and Young–Orlicz functions for functions on infinite-measure domains.

pub mod bounds;
pub mod error;
pub mod fenchel;
pub mod gls;
pub mod io;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod orlicz;

pub use error::{Error, Result};
