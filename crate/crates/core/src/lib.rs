pub mod cli;
pub mod collision;
pub mod error;
pub mod grid;
pub mod linear;
pub mod mixture;
pub mod solver;

pub use error::{Error, Result};
