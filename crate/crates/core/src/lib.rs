pub mod baselines;
pub mod cli;
pub mod compare;
pub mod dwt;
pub mod error;
pub mod frame;
pub mod io;
pub mod metrics;
pub mod scene;
pub mod wtaa;

pub use error::{Error, Result};
pub use frame::{ColorSpace, Frame, Plane, Region};
