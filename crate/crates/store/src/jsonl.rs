//! Entity interchange: JSON-lines, one entity per line.
//!
//! Tensors below 1024 elements are inlined as arrays; larger payloads are
//! externalized to an adjacent binary section (`<path>.bin`, same encoding
//! and checksum as the container's tensor section) and referenced by index.
//! Schemas are not part of the interchange: they must already be registered
//! in the receiving store.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use ngf_core::graph::{Edge, Vertex};
use ngf_core::superposition::SuperpositionDescriptor;
use ngf_core::value::AttributeValue;
use ngf_core::{EntityId, Store};

use crate::{Result, StoreIoError};

/// Tensors with at least this many elements go to the binary sidecar.
pub const INLINE_TENSOR_LIMIT: usize = 1024;

const SIDECAR_MAGIC: [u8; 4] = *b"NGFB";
const CRC32C: crc::Crc<u32> = crc::Crc::<u32>::new(&crc::CRC_32_ISCSI);

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LineValue {
    Scalar(f64),
    Enum(String),
    #[serde(rename = "string")]
    Text(String),
    Histogram {
        counts: Vec<f64>,
        #[serde(default)]
        normalized: bool,
    },
    Tensor {
        shape: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        data: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tensor_ref: Option<usize>,
    },
    Composite(BTreeMap<String, LineValue>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "entity", rename_all = "snake_case")]
enum EntityLine {
    Vertex {
        id: EntityId,
        #[serde(rename = "type")]
        type_name: String,
        #[serde(default)]
        attributes: BTreeMap<String, LineValue>,
    },
    Edge {
        id: EntityId,
        #[serde(rename = "type")]
        type_name: String,
        source: EntityId,
        target: EntityId,
        #[serde(default)]
        attributes: BTreeMap<String, LineValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        superposition: Option<SuperpositionDescriptor>,
    },
}

fn encode_value(value: &AttributeValue, sidecar: &mut Vec<Vec<f64>>) -> LineValue {
    match value {
        AttributeValue::Scalar(v) => LineValue::Scalar(*v),
        AttributeValue::Enum(token) => LineValue::Enum(token.clone()),
        AttributeValue::Text(text) => LineValue::Text(text.clone()),
        AttributeValue::Histogram { counts, normalized } => LineValue::Histogram {
            counts: counts.clone(),
            normalized: *normalized,
        },
        AttributeValue::Tensor { shape, data } => {
            if data.len() < INLINE_TENSOR_LIMIT {
                LineValue::Tensor {
                    shape: shape.clone(),
                    data: Some(data.clone()),
                    tensor_ref: None,
                }
            } else {
                sidecar.push(data.clone());
                LineValue::Tensor {
                    shape: shape.clone(),
                    data: None,
                    tensor_ref: Some(sidecar.len() - 1),
                }
            }
        }
        AttributeValue::Composite(entries) => LineValue::Composite(
            entries
                .iter()
                .map(|(k, v)| (k.clone(), encode_value(v, sidecar)))
                .collect(),
        ),
    }
}

fn decode_value(value: &LineValue, sidecar: &[Vec<f64>]) -> Result<AttributeValue> {
    Ok(match value {
        LineValue::Scalar(v) => AttributeValue::Scalar(*v),
        LineValue::Enum(token) => AttributeValue::Enum(token.clone()),
        LineValue::Text(text) => AttributeValue::Text(text.clone()),
        LineValue::Histogram { counts, normalized } => AttributeValue::Histogram {
            counts: counts.clone(),
            normalized: *normalized,
        },
        LineValue::Tensor {
            shape,
            data,
            tensor_ref,
        } => {
            let data = match (data, tensor_ref) {
                (Some(data), None) => data.clone(),
                (None, Some(index)) => sidecar.get(*index).cloned().ok_or_else(|| {
                    StoreIoError::Manifest(format!("tensor_ref {index} out of range"))
                })?,
                _ => {
                    return Err(StoreIoError::Manifest(
                        "tensor must carry exactly one of data or tensor_ref".into(),
                    ))
                }
            };
            AttributeValue::Tensor {
                shape: shape.clone(),
                data,
            }
        }
        LineValue::Composite(entries) => AttributeValue::Composite(
            entries
                .iter()
                .map(|(k, v)| Ok((k.clone(), decode_value(v, sidecar)?)))
                .collect::<Result<_>>()?,
        ),
    })
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".bin");
    path.with_file_name(name)
}

fn write_sidecar(path: &Path, arrays: &[Vec<f64>]) -> Result<()> {
    let mut payload = Vec::new();
    payload.extend_from_slice(&(arrays.len() as u64).to_le_bytes());
    for array in arrays {
        payload.extend_from_slice(&(array.len() as u64).to_le_bytes());
        for v in array {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(payload.len() + 8);
    out.extend_from_slice(&SIDECAR_MAGIC);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&CRC32C.checksum(&payload).to_le_bytes());
    std::fs::write(path, out)?;
    Ok(())
}

fn read_sidecar(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 || bytes[..4] != SIDECAR_MAGIC {
        return Err(StoreIoError::VersionMismatch);
    }
    let payload = &bytes[4..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().expect("4 bytes"));
    if CRC32C.checksum(payload) != stored {
        return Err(StoreIoError::ChecksumFailure("jsonl sidecar".into()));
    }
    let mut cursor = 0usize;
    let read_u64 = |cursor: &mut usize| -> Result<u64> {
        let end = *cursor + 8;
        let slice = payload
            .get(*cursor..end)
            .ok_or_else(|| StoreIoError::Truncated {
                context: "jsonl sidecar".into(),
                expected: end - payload.len(),
            })?;
        *cursor = end;
        Ok(u64::from_le_bytes(slice.try_into().expect("8 bytes")))
    };
    let count = read_u64(&mut cursor)? as usize;
    let mut arrays = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u64(&mut cursor)? as usize;
        let end = cursor + len * 8;
        let slice = payload
            .get(cursor..end)
            .ok_or_else(|| StoreIoError::Truncated {
                context: "jsonl sidecar".into(),
                expected: end - payload.len(),
            })?;
        cursor = end;
        arrays.push(
            slice
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    Ok(arrays)
}

/// Exports all vertices and edges, vertices first, in id order. Returns the
/// number of lines written.
pub fn export_entities(store: &Store, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let mut sidecar: Vec<Vec<f64>> = Vec::new();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut lines = 0usize;
    for vertex in store.vertices() {
        let line = EntityLine::Vertex {
            id: vertex.id,
            type_name: vertex.type_name.clone(),
            attributes: vertex
                .attributes
                .iter()
                .map(|(k, v)| (k.clone(), encode_value(v, &mut sidecar)))
                .collect(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
        lines += 1;
    }
    for edge in store.edges() {
        let line = EntityLine::Edge {
            id: edge.id,
            type_name: edge.type_name.clone(),
            source: edge.source,
            target: edge.target,
            attributes: edge
                .attributes
                .iter()
                .map(|(k, v)| (k.clone(), encode_value(v, &mut sidecar)))
                .collect(),
            superposition: edge.superposition,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
        lines += 1;
    }
    out.flush()?;
    if !sidecar.is_empty() {
        write_sidecar(&sidecar_path(path), &sidecar)?;
    }
    Ok(lines)
}

/// Imports entities into the store, preserving their ids. Vertices are
/// applied before edges regardless of line order; schemas must already be
/// registered. Returns (vertices, edges) imported.
pub fn import_entities(store: &mut Store, path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut vertices: Vec<EntityLine> = Vec::new();
    let mut edges: Vec<EntityLine> = Vec::new();
    let mut needs_sidecar = false;
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if line.contains("tensor_ref") {
            needs_sidecar = true;
        }
        let entity: EntityLine = serde_json::from_str(&line)?;
        match entity {
            v @ EntityLine::Vertex { .. } => vertices.push(v),
            e @ EntityLine::Edge { .. } => edges.push(e),
        }
    }
    let sidecar = if needs_sidecar {
        read_sidecar(&sidecar_path(path))?
    } else {
        Vec::new()
    };

    let decode_attrs =
        |attrs: &BTreeMap<String, LineValue>| -> Result<BTreeMap<String, AttributeValue>> {
            attrs
                .iter()
                .map(|(k, v)| Ok((k.clone(), decode_value(v, &sidecar)?)))
                .collect()
        };

    let mut imported = (0usize, 0usize);
    for line in &vertices {
        if let EntityLine::Vertex {
            id,
            type_name,
            attributes,
        } = line
        {
            store.restore_vertex(Vertex {
                id: *id,
                type_name: type_name.clone(),
                attributes: decode_attrs(attributes)?,
                provenance: BTreeMap::new(),
            })?;
            imported.0 += 1;
        }
    }
    for line in &edges {
        if let EntityLine::Edge {
            id,
            type_name,
            source,
            target,
            attributes,
            superposition,
        } = line
        {
            store.restore_edge(Edge {
                id: *id,
                type_name: type_name.clone(),
                source: *source,
                target: *target,
                attributes: decode_attrs(attributes)?,
                superposition: *superposition,
                provenance: BTreeMap::new(),
            })?;
            imported.1 += 1;
        }
    }
    Ok(imported)
}
