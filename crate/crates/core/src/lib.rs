//! Exact combinatorics of admissible multidegrees, chip-firing and divisors on
//! finite and metric graphs.

pub mod brill_noether;
pub mod chain;
pub mod chip;
pub mod divisor;
pub mod error;
pub mod graph;
pub mod io;
pub mod metric;
pub mod pct;
pub mod twist_graph;

pub use divisor::{Divisor, TwistVector};
pub use error::{Error, Result};
pub use graph::{EdgeId, GraphSpec, MultiGraph, VertexId};
