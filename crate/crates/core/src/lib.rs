//! Tensor-typed directed multigraph core.
//!
//! A directed multigraph whose vertices and edges carry schema-constrained
//! attributes, including tensor-valued ones (embeddings, histograms, named-axis
//! volumes). On top of the store this crate layers:
//!
//! - a registry of distance metrics over attribute values ([`metrics`]),
//! - threshold calibration from labeled same/different pairs, with the
//!   equal-error-rate anchor, and similarity-edge inference ([`calibration`]),
//! - kernel-smoothed equality comparison per observer scope ([`equality`]),
//! - probability-weighted virtual nodes and direction-superposed edges
//!   ([`superposition`]),
//! - per-cargo flux assignments with Kirchhoff conservation checking and
//!   max-flow feasibility ([`flow`]),
//! - lattice cells updated through independent shard accumulators that
//!   reconcile into one observable value ([`hypergram`]).
//!
//! The crate is `no_std` (with `alloc`); clocks and randomness are injected so
//! callers control reproducibility. Persistence and the CLI live in the
//! companion `ngf-store` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod calibration;
pub mod equality;
mod error;
pub mod flow;
pub mod graph;
pub mod hypergram;
pub mod id;
pub mod metrics;
pub mod schema;
pub mod superposition;
pub mod value;
pub mod vclock;

pub use error::Error;
pub use graph::{Edge, EmbeddingProvenance, Store, Vertex};
pub use id::{EntityId, IdGenerator, IdKind, NanoClock};
pub use schema::TypeSchema;
pub use value::{AttributeValue, AxisRole, ValueDictionary};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
