pub mod channel;
pub mod error;
pub mod qudit;
pub mod random;
pub mod tensor;

pub use error::{Error, Result};
pub mod cli;
pub mod measures;
pub mod red;
