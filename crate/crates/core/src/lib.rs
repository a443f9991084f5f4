pub mod error;
pub mod codes;
pub mod expanders;
pub mod ffield;
pub mod harness;
pub mod recovery;
pub mod sketch;

pub use error::{Error, Result};
