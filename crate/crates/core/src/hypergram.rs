//! Hyper-histogram cells: typed accumulators updated through causally
//! unmediated shards that reconcile into one observable value.
//!
//! Deltas are restricted to addition, a commutative and associative fold, so
//! the reconciled value is independent of shard assignment and delta
//! interleaving. `accumulate` takes `&self` and is safe for concurrent
//! callers (elementwise atomic adds); `reconcile` takes `&mut self`, so the
//! borrow checker enforces the brief exclusive phase.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::graph::Store;
use crate::id::EntityId;
use crate::{Error, Result};

/// Encoding version token reserved for forward compatibility; this build
/// defines a single encoding.
pub const CELL_ENCODING_V1: &str = "v1";

/// Default shard count for new cells.
pub const DEFAULT_SHARD_COUNT: usize = 8;

/// The value layout of one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellLayout {
    /// The degenerate single-number case.
    Scalar,
    /// Fixed-bin counts.
    Histogram { bins: usize },
    /// Dense row-major tensor.
    Tensor { shape: Vec<usize> },
}

impl CellLayout {
    pub fn payload_len(&self) -> usize {
        match self {
            CellLayout::Scalar => 1,
            CellLayout::Histogram { bins } => *bins,
            CellLayout::Tensor { shape } => shape.iter().product(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CellLayout::Scalar => Ok(()),
            CellLayout::Histogram { bins } if *bins >= 1 => Ok(()),
            CellLayout::Tensor { shape } if !shape.is_empty() && shape.iter().all(|d| *d >= 1) => {
                Ok(())
            }
            _ => Err(Error::CellShapeMismatch),
        }
    }
}

/// A value or delta matching a cell layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellValue {
    Scalar(f64),
    Histogram(Vec<f64>),
    Tensor { shape: Vec<usize>, data: Vec<f64> },
}

impl CellValue {
    fn payload(&self) -> &[f64] {
        match self {
            CellValue::Scalar(v) => core::slice::from_ref(v),
            CellValue::Histogram(counts) => counts,
            CellValue::Tensor { data, .. } => data,
        }
    }

    fn matches(&self, layout: &CellLayout) -> bool {
        match (self, layout) {
            (CellValue::Scalar(_), CellLayout::Scalar) => true,
            (CellValue::Histogram(counts), CellLayout::Histogram { bins }) => counts.len() == *bins,
            (CellValue::Tensor { shape, data }, CellLayout::Tensor { shape: declared }) => {
                shape == declared && data.len() == declared.iter().product::<usize>()
            }
            _ => false,
        }
    }

    fn kind_matches(&self, layout: &CellLayout) -> bool {
        matches!(
            (self, layout),
            (CellValue::Scalar(_), CellLayout::Scalar)
                | (CellValue::Histogram(_), CellLayout::Histogram { .. })
                | (CellValue::Tensor { .. }, CellLayout::Tensor { .. })
        )
    }
}

/// One independent accumulator: an op counter plus an elementwise payload of
/// f64 bits updated by compare-and-swap.
struct Shard {
    ops: AtomicU64,
    payload: Vec<AtomicU64>,
}

impl Shard {
    fn zeroed(len: usize) -> Self {
        Shard {
            ops: AtomicU64::new(0),
            payload: (0..len).map(|_| AtomicU64::new(0f64.to_bits())).collect(),
        }
    }

    fn add(&self, delta: &[f64]) {
        for (slot, d) in self.payload.iter().zip(delta) {
            if *d == 0.0 {
                continue;
            }
            let mut current = slot.load(Ordering::Relaxed);
            loop {
                let next = (f64::from_bits(current) + d).to_bits();
                match slot.compare_exchange_weak(
                    current,
                    next,
                    Ordering::Relaxed,
                    Ordering::Relaxed,
                ) {
                    Ok(_) => break,
                    Err(actual) => current = actual,
                }
            }
        }
        self.ops.fetch_add(1, Ordering::Relaxed);
    }

    fn residue(&self) -> Vec<f64> {
        self.payload
            .iter()
            .map(|slot| f64::from_bits(slot.load(Ordering::Relaxed)))
            .collect()
    }

    fn reset(&mut self) {
        for slot in &mut self.payload {
            *slot.get_mut() = 0f64.to_bits();
        }
        *self.ops.get_mut() = 0;
    }
}

/// A typed lattice cell with sharded, eventually-reconciled accumulators.
pub struct HypergramCell {
    id: EntityId,
    layout: CellLayout,
    shards: Vec<Shard>,
    router: AtomicUsize,
    reconciled: Vec<f64>,
    version: u64,
    encoding: String,
}

impl core::fmt::Debug for HypergramCell {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("HypergramCell")
            .field("id", &self.id)
            .field("layout", &self.layout)
            .field("shards", &self.shards.len())
            .field("version", &self.version)
            .finish()
    }
}

impl HypergramCell {
    pub fn new(id: EntityId, layout: CellLayout, shard_count: usize) -> Result<Self> {
        if shard_count == 0 {
            return Err(Error::ZeroShards);
        }
        layout.validate()?;
        let len = layout.payload_len();
        Ok(HypergramCell {
            id,
            layout,
            shards: (0..shard_count).map(|_| Shard::zeroed(len)).collect(),
            router: AtomicUsize::new(0),
            reconciled: alloc::vec![0.0; len],
            version: 0,
            encoding: CELL_ENCODING_V1.into(),
        })
    }

    pub fn id(&self) -> EntityId {
        self.id
    }

    pub fn layout(&self) -> &CellLayout {
        &self.layout
    }

    pub fn shard_count(&self) -> usize {
        self.shards.len()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn encoding(&self) -> &str {
        &self.encoding
    }

    /// Applies a delta to one shard. The shard hint routes the caller;
    /// absent a hint, shards are assigned round-robin. The reconciled cache
    /// is not touched: the delta becomes visible at the next reconcile.
    pub fn accumulate(&self, delta: &CellValue, shard_hint: Option<usize>) -> Result<()> {
        if !delta.kind_matches(&self.layout) {
            return Err(Error::CellKindMismatch);
        }
        if !delta.matches(&self.layout) {
            return Err(Error::CellShapeMismatch);
        }
        let shard = match shard_hint {
            Some(hint) => hint % self.shards.len(),
            None => self.router.fetch_add(1, Ordering::Relaxed) % self.shards.len(),
        };
        self.shards[shard].add(delta.payload());
        Ok(())
    }

    /// Folds all shard residues into the reconciled cache and returns the
    /// causally observable global value. Bumps the version exactly when new
    /// deltas were incorporated; with no intervening deltas the call is
    /// idempotent.
    pub fn reconcile(&mut self) -> CellValue {
        let pending: u64 = self
            .shards
            .iter_mut()
            .map(|shard| *shard.ops.get_mut())
            .sum();
        if pending > 0 {
            for shard in &mut self.shards {
                for (target, slot) in self.reconciled.iter_mut().zip(&mut shard.payload) {
                    *target += f64::from_bits(*slot.get_mut());
                }
                shard.reset();
            }
            self.version += 1;
        }
        self.observable()
    }

    /// The reconciled cache as last folded; stable between reconciles.
    pub fn observable(&self) -> CellValue {
        match &self.layout {
            CellLayout::Scalar => CellValue::Scalar(self.reconciled[0]),
            CellLayout::Histogram { .. } => CellValue::Histogram(self.reconciled.clone()),
            CellLayout::Tensor { shape } => CellValue::Tensor {
                shape: shape.clone(),
                data: self.reconciled.clone(),
            },
        }
    }

    /// Un-reconciled residues per shard, for persistence: a crash between
    /// reconciles loses nothing.
    pub fn shard_residues(&self) -> Vec<Vec<f64>> {
        self.shards.iter().map(Shard::residue).collect()
    }

    pub fn shard_ops(&self) -> Vec<u64> {
        self.shards
            .iter()
            .map(|s| s.ops.load(Ordering::Relaxed))
            .collect()
    }

    pub fn reconciled_payload(&self) -> &[f64] {
        &self.reconciled
    }

    /// Rebuilds a cell from persisted state.
    pub fn restore(
        id: EntityId,
        layout: CellLayout,
        shard_residues: Vec<Vec<f64>>,
        shard_ops: Vec<u64>,
        reconciled: Vec<f64>,
        version: u64,
        encoding: String,
    ) -> Result<Self> {
        layout.validate()?;
        let len = layout.payload_len();
        if shard_residues.is_empty()
            || shard_residues.len() != shard_ops.len()
            || reconciled.len() != len
            || shard_residues.iter().any(|r| r.len() != len)
        {
            return Err(Error::CellShapeMismatch);
        }
        let shards = shard_residues
            .into_iter()
            .zip(shard_ops)
            .map(|(residue, ops)| Shard {
                ops: AtomicU64::new(ops),
                payload: residue
                    .into_iter()
                    .map(|v| AtomicU64::new(v.to_bits()))
                    .collect(),
            })
            .collect();
        Ok(HypergramCell {
            id,
            layout,
            shards,
            router: AtomicUsize::new(0),
            reconciled,
            version,
            encoding,
        })
    }
}

/// Topology descriptor of a cell lattice. The integer dimensionalities are
/// computed; curvature, fractal dimensionality, spin, and entropy-source
/// attributes are recorded as free-text notes only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDescriptor {
    pub metric_dimensionality: usize,
    pub connectional_dimensionality: usize,
    pub density: f64,
    #[serde(default)]
    pub notes: BTreeMap<String, String>,
}

/// Computes the topology descriptor of a registered lattice: connectional
/// dimensionality is the maximum out-degree over the lattice's typed
/// neighbor edges, density the fraction of possible directed connections
/// materialized. Metric dimensionality and notes pass through as declared.
pub fn describe_topology(
    store: &Store,
    vertex_type: &str,
    edge_type: &str,
    metric_dimensionality: usize,
    notes: BTreeMap<String, String>,
) -> Result<TopologyDescriptor> {
    if store.vertex_schema(vertex_type).is_none() {
        return Err(Error::UnknownType(vertex_type.into()));
    }
    let members: alloc::collections::BTreeSet<EntityId> = store
        .query_vertices(Some(vertex_type), None)
        .map(|v| v.id)
        .collect();
    let mut out_degree: BTreeMap<EntityId, usize> = BTreeMap::new();
    let mut edge_count = 0usize;
    for edge in store.query_edges(Some(edge_type), None) {
        if members.contains(&edge.source) && members.contains(&edge.target) {
            *out_degree.entry(edge.source).or_insert(0) += 1;
            edge_count += 1;
        }
    }
    let connectional_dimensionality = out_degree.values().copied().max().unwrap_or(0);
    let n = members.len();
    let density = if n > 1 {
        edge_count as f64 / (n * (n - 1)) as f64
    } else {
        0.0
    };
    Ok(TopologyDescriptor {
        metric_dimensionality,
        connectional_dimensionality,
        density,
        notes,
    })
}
