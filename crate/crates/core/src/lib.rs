pub mod attention;
pub mod config;
pub mod decode;
pub mod error;
pub mod learn;
pub mod model;
pub mod neural;
pub mod semantics;
pub mod text;
pub mod transitions;

pub use error::{Error, Result};
