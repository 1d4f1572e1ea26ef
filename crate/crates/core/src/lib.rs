pub mod error;
pub mod experiment;
pub mod net;
pub mod objectives;
pub mod ot;
pub mod ppot;
pub mod prototypes;
pub mod scenario;

pub use error::{Error, Result};
