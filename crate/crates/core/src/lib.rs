pub mod error;
pub mod geometry;
pub mod quad;
pub mod special;
pub mod basis;
pub mod martingale;
pub mod averaging;
pub mod constants;
pub mod optimize;

pub use error::{Error, Result};
