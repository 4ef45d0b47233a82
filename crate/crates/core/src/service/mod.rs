//! Transport adapters over the session library: an HTTP/JSON router and a
//! one-shot batch run. Neither holds business logic; every mutating route
//! and batch step is one [`crate::session::Store`] call.

pub mod batch;
pub mod http;

pub use batch::{run_batch, BatchError, BatchJob, BatchReport};
pub use http::{router, serve, ApiError};
