//! Persistence, interchange formats, and host wiring for the ngf store.
//!
//! The on-disk container (`.ngf`) is a canonical-JSON manifest plus an
//! adjacent binary section holding tensor payloads as little-endian 64-bit
//! floats, length-prefixed, with a CRC32C per section. Saves are
//! deterministic: the same store always serializes to the same bytes.

mod clock;
mod format;
mod jsonl;
mod pairs;
mod scenario;

pub use clock::{system_id_generator, SystemNanoClock};
pub use format::{from_bytes, load, load_with, save, to_bytes, NGF_MAGIC};
pub use jsonl::{export_entities, import_entities};
pub use pairs::{read_calibration_csv, write_calibration_json};
pub use scenario::{FlowScenario, ScenarioEdge};

use ngf_core::Store;

/// Errors from persistence and interchange.
#[derive(Debug, thiserror::Error)]
pub enum StoreIoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("not an ngf file or unsupported container version")]
    VersionMismatch,
    #[error("checksum failure in section `{0}`")]
    ChecksumFailure(String),
    #[error("truncated file: expected {expected} more bytes in {context}")]
    Truncated { context: String, expected: usize },
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(#[from] ngf_core::Error),
}

pub type Result<T> = std::result::Result<T, StoreIoError>;

/// Creates an empty store backed by the system clock and a randomness source
/// that is OS-seeded, or deterministic when `seed` is given.
pub fn new_store(seed: Option<u64>) -> Store {
    Store::new(system_id_generator(seed))
}
