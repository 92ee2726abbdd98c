pub mod characteristics;
pub mod diagnostics;
pub mod error;
pub mod inflation;
pub mod lp;
pub mod profiles;
pub mod serde_ext;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
