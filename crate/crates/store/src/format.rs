//! The `.ngf` container: canonical JSON manifest + binary tensor section.
//!
//! Layout:
//!
//! ```text
//! ╔═══════╦══════════════════════════════╦══════════════════════════════╗
//! ║ magic ║ section "MANI"               ║ section "TENS"               ║
//! ║  4B   ║ len u64 | payload | crc32c   ║ len u64 | payload | crc32c   ║
//! ╚═══════╩══════════════════════════════╩══════════════════════════════╝
//! ```
//!
//! The manifest is JSON with sorted map keys and shortest round-trip float
//! formatting; entities are listed in id order, so two saves of the same
//! store are byte-identical. Tensor payloads (attribute tensors, hypergram
//! shard residues, reconciled cell payloads) live in the binary section as
//! length-prefixed little-endian f64 arrays and are referenced from the
//! manifest by index.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ngf_core::calibration::CalibrationResult;
use ngf_core::equality::KernelDescriptor;
use ngf_core::graph::{Edge, EmbeddingProvenance, ReplicationMeta, SchemaSide, Vertex};
use ngf_core::hypergram::{CellLayout, HypergramCell};
use ngf_core::metrics::MetricDescriptor;
use ngf_core::superposition::{SuperpositionDescriptor, VirtualNode};
use ngf_core::value::AttributeValue;
use ngf_core::{EntityId, IdGenerator, Store, TypeSchema};

use crate::{Result, StoreIoError};

/// File magic for the container.
pub const NGF_MAGIC: [u8; 4] = *b"NGF\0";
const SECTION_MANIFEST: [u8; 4] = *b"MANI";
const SECTION_TENSORS: [u8; 4] = *b"TENS";
const FORMAT_VERSION: u32 = 1;

const CRC32C: crc::Crc<u32> = crc::Crc::<u32>::new(&crc::CRC_32_ISCSI);

// ---------------------------------------------------------------------
// manifest data model
// ---------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    counts: Counts,
    replication: ReplicationMeta,
    vertex_schemas: Vec<TypeSchema>,
    edge_schemas: Vec<TypeSchema>,
    metrics: Vec<MetricDescriptor>,
    kernels: BTreeMap<String, KernelDescriptor>,
    calibrations: Vec<CalibrationEntry>,
    vertices: Vec<ManifestVertex>,
    edges: Vec<ManifestEdge>,
    virtual_nodes: Vec<ManifestVirtualNode>,
    cells: Vec<ManifestCell>,
}

#[derive(Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Counts {
    vertices: usize,
    edges: usize,
    virtual_nodes: usize,
    cells: usize,
    tensors: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationEntry {
    metric: String,
    field: String,
    result: CalibrationResult,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ManifestValue {
    Scalar(f64),
    Enum(String),
    #[serde(rename = "string")]
    Text(String),
    Histogram {
        counts: Vec<f64>,
        normalized: bool,
    },
    Tensor {
        shape: Vec<usize>,
        tensor_ref: usize,
    },
    Composite(BTreeMap<String, ManifestValue>),
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestVertex {
    id: EntityId,
    #[serde(rename = "type")]
    type_name: String,
    attributes: BTreeMap<String, ManifestValue>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    provenance: BTreeMap<String, EmbeddingProvenance>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEdge {
    id: EntityId,
    #[serde(rename = "type")]
    type_name: String,
    source: EntityId,
    target: EntityId,
    attributes: BTreeMap<String, ManifestValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    superposition: Option<SuperpositionDescriptor>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    provenance: BTreeMap<String, EmbeddingProvenance>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestVirtualNode {
    id: EntityId,
    constituents: Vec<(EntityId, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestCell {
    id: EntityId,
    layout: CellLayout,
    shard_ops: Vec<u64>,
    shard_refs: Vec<usize>,
    reconciled_ref: usize,
    version: u64,
    encoding: String,
}

/// Collects externalized f64 arrays in serialization order.
#[derive(Default)]
struct TensorTable {
    arrays: Vec<Vec<f64>>,
}

impl TensorTable {
    fn push(&mut self, data: Vec<f64>) -> usize {
        self.arrays.push(data);
        self.arrays.len() - 1
    }

    fn get(&self, index: usize) -> Result<&[f64]> {
        self.arrays
            .get(index)
            .map(Vec::as_slice)
            .ok_or_else(|| StoreIoError::Manifest(format!("tensor_ref {index} out of range")))
    }
}

fn encode_value(value: &AttributeValue, table: &mut TensorTable) -> ManifestValue {
    match value {
        AttributeValue::Scalar(v) => ManifestValue::Scalar(*v),
        AttributeValue::Enum(token) => ManifestValue::Enum(token.clone()),
        AttributeValue::Text(text) => ManifestValue::Text(text.clone()),
        AttributeValue::Histogram { counts, normalized } => ManifestValue::Histogram {
            counts: counts.clone(),
            normalized: *normalized,
        },
        AttributeValue::Tensor { shape, data } => ManifestValue::Tensor {
            shape: shape.clone(),
            tensor_ref: table.push(data.clone()),
        },
        AttributeValue::Composite(entries) => ManifestValue::Composite(
            entries
                .iter()
                .map(|(k, v)| (k.clone(), encode_value(v, table)))
                .collect(),
        ),
    }
}

fn decode_value(value: &ManifestValue, table: &TensorTable) -> Result<AttributeValue> {
    Ok(match value {
        ManifestValue::Scalar(v) => AttributeValue::Scalar(*v),
        ManifestValue::Enum(token) => AttributeValue::Enum(token.clone()),
        ManifestValue::Text(text) => AttributeValue::Text(text.clone()),
        ManifestValue::Histogram { counts, normalized } => AttributeValue::Histogram {
            counts: counts.clone(),
            normalized: *normalized,
        },
        ManifestValue::Tensor { shape, tensor_ref } => AttributeValue::Tensor {
            shape: shape.clone(),
            data: table.get(*tensor_ref)?.to_vec(),
        },
        ManifestValue::Composite(entries) => AttributeValue::Composite(
            entries
                .iter()
                .map(|(k, v)| Ok((k.clone(), decode_value(v, table)?)))
                .collect::<Result<_>>()?,
        ),
    })
}

fn build_manifest(store: &Store) -> (Manifest, TensorTable) {
    let mut table = TensorTable::default();

    let vertices: Vec<ManifestVertex> = store
        .vertices()
        .map(|v| ManifestVertex {
            id: v.id,
            type_name: v.type_name.clone(),
            attributes: v
                .attributes
                .iter()
                .map(|(k, value)| (k.clone(), encode_value(value, &mut table)))
                .collect(),
            provenance: v.provenance.clone(),
        })
        .collect();

    let edges: Vec<ManifestEdge> = store
        .edges()
        .map(|e| ManifestEdge {
            id: e.id,
            type_name: e.type_name.clone(),
            source: e.source,
            target: e.target,
            attributes: e
                .attributes
                .iter()
                .map(|(k, value)| (k.clone(), encode_value(value, &mut table)))
                .collect(),
            superposition: e.superposition,
            provenance: e.provenance.clone(),
        })
        .collect();

    let virtual_nodes: Vec<ManifestVirtualNode> = store
        .virtual_nodes()
        .map(|node| ManifestVirtualNode {
            id: node.id(),
            constituents: node.constituents().to_vec(),
        })
        .collect();

    let cells: Vec<ManifestCell> = store
        .cells()
        .map(|cell| ManifestCell {
            id: cell.id(),
            layout: cell.layout().clone(),
            shard_ops: cell.shard_ops(),
            shard_refs: cell
                .shard_residues()
                .into_iter()
                .map(|residue| table.push(residue))
                .collect(),
            reconciled_ref: table.push(cell.reconciled_payload().to_vec()),
            version: cell.version(),
            encoding: cell.encoding().to_string(),
        })
        .collect();

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        counts: Counts {
            vertices: vertices.len(),
            edges: edges.len(),
            virtual_nodes: virtual_nodes.len(),
            cells: cells.len(),
            tensors: table.arrays.len(),
        },
        replication: store.replication().clone(),
        vertex_schemas: store.vertex_schemas().cloned().collect(),
        edge_schemas: store.edge_schemas().cloned().collect(),
        metrics: store.metrics().cloned().collect(),
        kernels: store
            .kernels()
            .map(|(name, kernel)| (name.to_string(), kernel.clone()))
            .collect(),
        calibrations: store
            .calibrations()
            .map(|(metric, field, result)| CalibrationEntry {
                metric: metric.to_string(),
                field: field.to_string(),
                result: result.clone(),
            })
            .collect(),
        vertices,
        edges,
        virtual_nodes,
        cells,
    };
    (manifest, table)
}

// ---------------------------------------------------------------------
// binary sections
// ---------------------------------------------------------------------

fn encode_tensor_section(table: &TensorTable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(table.arrays.len() as u64).to_le_bytes());
    for array in &table.arrays {
        out.extend_from_slice(&(array.len() as u64).to_le_bytes());
        for v in array {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn decode_tensor_section(bytes: &[u8]) -> Result<TensorTable> {
    let mut cursor = 0usize;
    let read_u64 = |context: &str, cursor: &mut usize| -> Result<u64> {
        let end = *cursor + 8;
        let slice = bytes
            .get(*cursor..end)
            .ok_or_else(|| StoreIoError::Truncated {
                context: context.to_string(),
                expected: end - bytes.len(),
            })?;
        *cursor = end;
        Ok(u64::from_le_bytes(slice.try_into().expect("8 bytes")))
    };
    let count = read_u64("tensor table header", &mut cursor)? as usize;
    let mut table = TensorTable::default();
    for index in 0..count {
        let len = read_u64(&format!("tensor {index} header"), &mut cursor)? as usize;
        let end = cursor + len * 8;
        let slice = bytes
            .get(cursor..end)
            .ok_or_else(|| StoreIoError::Truncated {
                context: format!("tensor {index} payload"),
                expected: end - bytes.len(),
            })?;
        cursor = end;
        let array = slice
            .chunks_exact(8)
            .map(|chunk| f64::from_le_bytes(chunk.try_into().expect("8 bytes")))
            .collect();
        table.push(array);
    }
    if cursor != bytes.len() {
        return Err(StoreIoError::Manifest(
            "trailing bytes after tensor table".into(),
        ));
    }
    Ok(table)
}

fn write_section(out: &mut Vec<u8>, tag: [u8; 4], payload: &[u8]) {
    out.extend_from_slice(&tag);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&CRC32C.checksum(payload).to_le_bytes());
}

fn read_section<'a>(bytes: &'a [u8], cursor: &mut usize, tag: [u8; 4]) -> Result<&'a [u8]> {
    let name = String::from_utf8_lossy(&tag).to_string();
    let header_end = *cursor + 12;
    let header = bytes
        .get(*cursor..header_end)
        .ok_or_else(|| StoreIoError::Truncated {
            context: format!("section {name} header"),
            expected: header_end.saturating_sub(bytes.len()),
        })?;
    if header[..4] != tag {
        return Err(StoreIoError::Manifest(format!(
            "expected section {name}, found {:?}",
            &header[..4]
        )));
    }
    let len = u64::from_le_bytes(header[4..12].try_into().expect("8 bytes")) as usize;
    let payload_end = header_end + len;
    let crc_end = payload_end + 4;
    let payload = bytes
        .get(header_end..payload_end)
        .ok_or_else(|| StoreIoError::Truncated {
            context: format!("section {name} payload"),
            expected: payload_end.saturating_sub(bytes.len()),
        })?;
    let crc_bytes = bytes
        .get(payload_end..crc_end)
        .ok_or_else(|| StoreIoError::Truncated {
            context: format!("section {name} checksum"),
            expected: crc_end.saturating_sub(bytes.len()),
        })?;
    let stored = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
    if CRC32C.checksum(payload) != stored {
        return Err(StoreIoError::ChecksumFailure(name));
    }
    *cursor = crc_end;
    Ok(payload)
}

// ---------------------------------------------------------------------
// save / load
// ---------------------------------------------------------------------

/// Serializes the store to bytes. Deterministic: identical stores yield
/// identical bytes.
pub fn to_bytes(store: &Store) -> Result<Vec<u8>> {
    let (manifest, table) = build_manifest(store);
    let json = serde_json::to_vec(&manifest)?;
    let tensors = encode_tensor_section(&table);
    let mut out = Vec::with_capacity(4 + json.len() + tensors.len() + 32);
    out.extend_from_slice(&NGF_MAGIC);
    write_section(&mut out, SECTION_MANIFEST, &json);
    write_section(&mut out, SECTION_TENSORS, &tensors);
    Ok(out)
}

/// Writes the store to a `.ngf` file.
pub fn save(store: &Store, path: impl AsRef<Path>) -> Result<()> {
    let bytes = to_bytes(store)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Rebuilds a store from container bytes, using the given id generator for
/// ids drawn after the load.
pub fn from_bytes(bytes: &[u8], ids: IdGenerator) -> Result<Store> {
    if bytes.len() < 4 {
        return Err(StoreIoError::Truncated {
            context: "magic".into(),
            expected: 4 - bytes.len(),
        });
    }
    if bytes[..4] != NGF_MAGIC {
        return Err(StoreIoError::VersionMismatch);
    }
    let mut cursor = 4usize;
    let manifest_bytes = read_section(bytes, &mut cursor, SECTION_MANIFEST)?;
    let tensor_bytes = read_section(bytes, &mut cursor, SECTION_TENSORS)?;
    if cursor != bytes.len() {
        return Err(StoreIoError::Manifest(
            "trailing bytes after sections".into(),
        ));
    }
    let manifest: Manifest = serde_json::from_slice(manifest_bytes)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(StoreIoError::VersionMismatch);
    }
    let table = decode_tensor_section(tensor_bytes)?;

    let counts = Counts {
        vertices: manifest.vertices.len(),
        edges: manifest.edges.len(),
        virtual_nodes: manifest.virtual_nodes.len(),
        cells: manifest.cells.len(),
        tensors: table.arrays.len(),
    };
    if counts != manifest.counts {
        return Err(StoreIoError::Manifest(format!(
            "counts do not match body sections: declared {:?}, found {:?}",
            manifest.counts, counts
        )));
    }

    let mut store = Store::new(ids);
    store.set_replication(manifest.replication.clone());
    for schema in manifest.vertex_schemas {
        store.register_schema(schema, SchemaSide::Vertex)?;
    }
    for schema in manifest.edge_schemas {
        store.register_schema(schema, SchemaSide::Edge)?;
    }
    for vertex in &manifest.vertices {
        let attributes = vertex
            .attributes
            .iter()
            .map(|(k, v)| Ok((k.clone(), decode_value(v, &table)?)))
            .collect::<Result<_>>()?;
        store.restore_vertex(Vertex {
            id: vertex.id,
            type_name: vertex.type_name.clone(),
            attributes,
            provenance: vertex.provenance.clone(),
        })?;
    }
    for node in &manifest.virtual_nodes {
        store.restore_virtual_node(VirtualNode::restore(
            node.id,
            node.constituents.iter().copied(),
        )?)?;
    }
    for edge in &manifest.edges {
        let attributes = edge
            .attributes
            .iter()
            .map(|(k, v)| Ok((k.clone(), decode_value(v, &table)?)))
            .collect::<Result<_>>()?;
        store.restore_edge(Edge {
            id: edge.id,
            type_name: edge.type_name.clone(),
            source: edge.source,
            target: edge.target,
            attributes,
            superposition: edge.superposition,
            provenance: edge.provenance.clone(),
        })?;
    }
    for cell in &manifest.cells {
        let residues = cell
            .shard_refs
            .iter()
            .map(|r| Ok(table.get(*r)?.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        store.restore_cell(HypergramCell::restore(
            cell.id,
            cell.layout.clone(),
            residues,
            cell.shard_ops.clone(),
            table.get(cell.reconciled_ref)?.to_vec(),
            cell.version,
            cell.encoding.clone(),
        )?)?;
    }
    for metric in manifest.metrics {
        store.register_metric(metric)?;
    }
    for (name, kernel) in manifest.kernels {
        store.register_kernel(name, kernel)?;
    }
    for entry in manifest.calibrations {
        store.record_calibration(&entry.metric, &entry.field, entry.result)?;
    }
    Ok(store)
}

/// Loads a store with an explicit id generator.
pub fn load_with(path: impl AsRef<Path>, ids: IdGenerator) -> Result<Store> {
    let bytes = std::fs::read(path)?;
    from_bytes(&bytes, ids)
}

/// Loads a store with system time and OS-seeded randomness.
pub fn load(path: impl AsRef<Path>) -> Result<Store> {
    load_with(path, crate::system_id_generator(None))
}
