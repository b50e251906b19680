pub mod approximator;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod polynomials;
pub mod representations;
pub mod universality;

pub use error::{Error, Result};
