use alloc::string::String;
use alloc::vec::Vec;

use crate::id::EntityId;

/// Errors reported by store, metric, calibration, and flow operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    // --- schema registration and validation ---
    #[error("type `{0}` is already registered")]
    DuplicateType(String),
    #[error("type `{0}` is not registered")]
    UnknownType(String),
    #[error("dictionary for key `{key}` of type `{type_name}` admits no metric")]
    NoAdmissibleMetric { type_name: String, key: String },
    #[error("key `{key}` is not declared for type `{type_name}`")]
    UnknownKey { type_name: String, key: String },
    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),
    #[error("value for key `{key}` violates its dictionary: {reason}")]
    ValueRejected { key: String, reason: String },

    // --- entities ---
    #[error("entity {0} does not exist")]
    UnknownEntity(EntityId),
    #[error("edge endpoint {0} does not reference a vertex or virtual node")]
    DanglingEndpoint(EntityId),
    #[error("vertex {vertex} lacks required attribute `{key}`")]
    MissingAttribute { vertex: EntityId, key: String },
    #[error("attribute `{key}`: {reason}")]
    InvalidAttribute { key: String, reason: String },
    #[error("vertex {vertex} is a constituent of virtual node {vnode}")]
    ConstituentInUse { vertex: EntityId, vnode: EntityId },
    #[error("values are not comparable: {0}")]
    NotComparable(String),

    // --- metrics ---
    #[error("metric expects {expected}, got {got}")]
    MetricKindMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("histogram bin counts differ ({left} vs {right})")]
    BinCountMismatch { left: usize, right: usize },
    #[error("histogram has zero total mass")]
    ZeroMassHistogram,
    #[error("tensor shapes differ")]
    ShapeMismatch,
    #[error("cosine distance is undefined for a zero vector")]
    ZeroVector,
    #[error("sequence metric applied to an empty sequence")]
    EmptySequence,
    #[error("metric `{metric}` is not admissible for field `{field}`")]
    MetricNotAdmissible { metric: String, field: String },

    // --- calibration ---
    #[error("calibration requires at least one pair in each class")]
    EmptyCalibrationClass,
    #[error("alpha must be nonnegative, got {0}")]
    NegativeAlpha(f64),
    #[error("calibration pair distances must be finite")]
    NonFiniteDistance,
    #[error("calibration was produced for metric `{expected}`, not `{got}`")]
    CalibrationMismatch { expected: String, got: String },

    // --- equality kernels ---
    #[error("observer mask is empty")]
    EmptyObserverMask,
    #[error("observer masks differ; functional overlap assumption unmet")]
    MaskMismatch,
    #[error("kernel sigma must be nonnegative")]
    NegativeSigma,
    #[error("cannot annotate an equality edge from a false verdict")]
    VerdictFalse,

    // --- superposition ---
    #[error("virtual node requires at least one constituent")]
    EmptyConstituents,
    #[error("constituent weights must be nonnegative")]
    NegativeWeight,
    #[error("constituent weights total {0}, exceeding unit probability")]
    WeightOverflow(f64),
    #[error("constituent weights total zero")]
    ZeroTotalWeight,
    #[error("duplicate constituent {0}")]
    DuplicateConstituent(EntityId),
    #[error("virtual nodes cannot nest ({0} is itself virtual)")]
    NestedVirtualNode(EntityId),
    #[error("direction amplitudes have squared norm {0}, expected 1")]
    UnnormalizedAmplitudes(f64),
    #[error("amplitudes must be nonnegative")]
    NegativeAmplitude,

    // --- flow ---
    #[error("flux references edge {0} which does not exist")]
    UnknownFluxEdge(EntityId),
    #[error("sources and sinks must be disjoint")]
    SourcesMeetSinks,
    #[error("capacities must be nonnegative")]
    NegativeCapacity,
    #[error("source and sink must differ")]
    SourceIsSink,
    #[error("lattice extents must all be at least 1, got {0:?}")]
    ZeroExtent(Vec<usize>),

    // --- hypergram ---
    #[error("delta kind does not match cell kind")]
    CellKindMismatch,
    #[error("delta shape does not match cell shape")]
    CellShapeMismatch,
    #[error("shard count must be at least 1")]
    ZeroShards,
}
