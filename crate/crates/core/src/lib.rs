pub mod datagen;
pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod rng;
pub mod solver;
pub mod theory;

pub use error::{Error, Result};
pub use rng::Rng;
