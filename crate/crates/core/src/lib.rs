pub mod constructions;
pub mod error;
pub mod hensel;
pub mod jacobian;
pub mod linalg;
pub mod poly;
pub mod ring;
pub mod sampling;
pub mod text;
pub mod unimodular;

pub use error::{Error, Result};
