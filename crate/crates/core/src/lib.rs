//! Numerical certification of
//! `E_{pi in S_n} prod_{i in fix(pi)} a_i >= s_2(sqrt(a))` on `[0, inf)^n`.

pub mod combinatorics;
pub mod error;
pub mod fixedpoint;
pub mod flow;
mod linesearch;
pub mod sympoly;
pub mod verify;

pub use error::{Error, Result};
pub use sympoly::Point;
