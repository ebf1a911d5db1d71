//! `ngf` — command-line front end for the tensor-typed multigraph store.
//!
//! Every subcommand maps onto one library operation; the CLI only parses
//! arguments, moves bytes, and prints JSON. Exit codes: 0 success, 1 usage,
//! 2 data/validation, 3 i/o.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use ngf_core::calibration::{calibrate, infer_similarity_edges};
use ngf_core::equality::{
    kernel_compare, EqualityType, KernelDescriptor, KernelKind, ObserverScope,
};
use ngf_core::flow::{check_kirchhoff, generate_topology, max_flow, TopologyKind};
use ngf_core::graph::{ReplicationMeta, SchemaSide};
use ngf_core::hypergram::{describe_topology, CellLayout, CellValue, DEFAULT_SHARD_COUNT};
use ngf_core::metrics::{MetricDescriptor, MetricId};
use ngf_core::value::AttributeValue;
use ngf_core::{EntityId, Store, TypeSchema};
use ngf_store::{
    export_entities, import_entities, load_with, new_store, read_calibration_csv, save,
    system_id_generator, write_calibration_json, FlowScenario, StoreIoError,
};

#[derive(Parser)]
#[command(name = "ngf", version, about = "Tensor-typed multigraph store")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an empty store file.
    Init {
        store: PathBuf,
        #[arg(long, default_value_t = 1)]
        replicas: u32,
        #[arg(long)]
        durability: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Schema registration.
    Schema {
        #[command(subcommand)]
        command: SchemaCommand,
    },
    /// Vertex operations.
    Vertex {
        #[command(subcommand)]
        command: VertexCommand,
    },
    /// Edge operations.
    Edge {
        #[command(subcommand)]
        command: EdgeCommand,
    },
    /// Import entities from JSON-lines.
    Import {
        store: PathBuf,
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export entities as JSON-lines.
    Export { store: PathBuf, file: PathBuf },
    /// Solve the threshold equation from a labeled CSV (distance,label).
    Calibrate {
        pairs: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Record the result in a store under --metric/--field.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        field: Option<String>,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Materialize IS_SIMILAR_AS edges from a recorded calibration.
    InferSimilarity {
        store: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        field: String,
        /// Restrict to vertices of this type.
        #[arg(long = "type")]
        type_name: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare two vertices through a kernel.
    KernelCompare {
        store: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Use a kernel registered under this name.
        #[arg(long)]
        kernel: Option<String>,
        /// Comma-separated field mask (builds an ad-hoc kernel).
        #[arg(long)]
        mask: Option<String>,
        /// Comma-separated per-axis sigma; omitted = dirac.
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value = "representation")]
        equality_type: String,
        #[arg(long, default_value = "cli")]
        observer: String,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Register a metric descriptor.
    Metric {
        #[command(subcommand)]
        command: MetricCommand,
    },
    /// Register a named kernel.
    Kernel {
        #[command(subcommand)]
        command: KernelCommand,
    },
    /// Flow analysis.
    Flow {
        #[command(subcommand)]
        command: FlowCommand,
    },
    /// Hypergram cells.
    Hypergram {
        #[command(subcommand)]
        command: HypergramCommand,
    },
    /// Topology scaffolds and descriptors.
    Topology {
        #[command(subcommand)]
        command: TopologyCommand,
    },
    /// Query entities by type and attribute predicate.
    Query {
        store: PathBuf,
        #[arg(long, default_value = "vertex")]
        entity: String,
        #[arg(long = "type")]
        type_name: Option<String>,
        #[arg(long)]
        key: Option<String>,
        /// JSON attribute value the key must equal.
        #[arg(long)]
        equals: Option<String>,
    },
}

#[derive(Subcommand)]
enum SchemaCommand {
    /// Register a vertex or edge type schema.
    Add {
        store: PathBuf,
        #[arg(long)]
        side: String,
        /// Schema as inline JSON.
        #[arg(long)]
        json: Option<String>,
        /// Schema from a JSON file.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VertexCommand {
    Add {
        store: PathBuf,
        #[arg(long = "type")]
        type_name: String,
        /// Attributes as a JSON object of tagged values.
        #[arg(long)]
        attrs: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum EdgeCommand {
    Add {
        store: PathBuf,
        #[arg(long = "type")]
        type_name: String,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        attrs: Option<String>,
        /// Direction amplitudes fwd,bwd,bidir for a superposed edge.
        #[arg(long)]
        amplitudes: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum MetricCommand {
    Add {
        store: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        field: String,
        /// Sakoe-Chiba window for dtw.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        temporal_axis: Option<usize>,
    },
}

#[derive(Subcommand)]
enum KernelCommand {
    Add {
        store: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        mask: String,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value = "representation")]
        equality_type: String,
        #[arg(long)]
        observer: String,
    },
}

#[derive(Subcommand)]
enum FlowCommand {
    /// Check Kirchhoff conservation and capacity bounds for a scenario.
    Check { store: PathBuf, scenario: PathBuf },
    /// Maximal feasible throughput between two vertices.
    Maxflow {
        store: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        sink: String,
    },
}

#[derive(Subcommand)]
enum HypergramCommand {
    Create {
        store: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        bins: Option<usize>,
        /// Tensor shape like 2x3.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SHARD_COUNT)]
        shards: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    Accumulate {
        store: PathBuf,
        #[arg(long)]
        cell: String,
        /// Delta as tagged JSON, e.g. {"scalar": 1.0}.
        #[arg(long)]
        delta: String,
        #[arg(long)]
        shard: Option<usize>,
    },
    Reconcile {
        store: PathBuf,
        #[arg(long)]
        cell: String,
    },
}

#[derive(Subcommand)]
enum TopologyCommand {
    /// Materialize a dense lattice (or an empty sparse scaffold).
    Generate {
        store: PathBuf,
        /// Lattice extents like 3x3; omit for --sparse.
        #[arg(long)]
        extents: Option<String>,
        #[arg(long, default_value_t = false)]
        sparse: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute the topology descriptor of a registered lattice.
    Describe {
        store: PathBuf,
        #[arg(long, default_value = "cell")]
        vertex_type: String,
        #[arg(long, default_value = "ADJACENT_TO")]
        edge_type: String,
        #[arg(long, default_value_t = 0)]
        metric_dim: usize,
    },
}

// ---------------------------------------------------------------------
// error mapping
// ---------------------------------------------------------------------

enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ngf_core::Error> for CliError {
    fn from(e: ngf_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StoreIoError> for CliError {
    fn from(e: StoreIoError) -> Self {
        match e {
            StoreIoError::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("json: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_id(s: &str) -> CliResult<EntityId> {
    EntityId::from_str(s).map_err(|e| CliError::Usage(format!("bad entity id `{s}`: {e}")))
}

fn parse_attrs(attrs: Option<&str>) -> CliResult<BTreeMap<String, AttributeValue>> {
    match attrs {
        None => Ok(BTreeMap::new()),
        Some(json) => Ok(serde_json::from_str(json)?),
    }
}

fn parse_extents(s: &str) -> CliResult<Vec<usize>> {
    s.split('x')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad extents component `{part}`")))
        })
        .collect()
}

fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number `{part}`")))
        })
        .collect()
}

fn load_store(path: &PathBuf, seed: Option<u64>) -> CliResult<Store> {
    Ok(load_with(path, system_id_generator(seed))?)
}

fn build_kernel(
    store: &Store,
    registered: Option<&str>,
    mask: Option<&str>,
    sigma: Option<&str>,
    equality_type: &str,
    observer: &str,
) -> CliResult<KernelDescriptor> {
    if let Some(name) = registered {
        return store
            .kernel(name)
            .cloned()
            .ok_or_else(|| CliError::Data(format!("no kernel registered under `{name}`")));
    }
    let mask =
        mask.ok_or_else(|| CliError::Usage("either --kernel or --mask is required".into()))?;
    let kind = match sigma {
        None => KernelKind::Dirac,
        Some(s) => KernelKind::Gaussian {
            sigma: parse_floats(s)?,
        },
    };
    let equality_type =
        EqualityType::from_str(equality_type).map_err(|e| CliError::Usage(e.to_string()))?;
    let scope = ObserverScope::new(observer, mask.split(',').map(str::trim))?;
    Ok(KernelDescriptor::new(kind, equality_type, scope)?)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Init {
            store,
            replicas,
            durability,
            seed,
        } => {
            let mut s = new_store(seed);
            s.set_replication(ReplicationMeta {
                replica_count: replicas,
                durability_note: durability,
            });
            save(&s, &store)?;
            println!("initialized {}", store.display());
            Ok(())
        }
        Command::Schema { command } => match command {
            SchemaCommand::Add {
                store,
                side,
                json,
                file,
            } => {
                let side = match side.as_str() {
                    "vertex" => SchemaSide::Vertex,
                    "edge" => SchemaSide::Edge,
                    other => {
                        return Err(CliError::Usage(format!(
                            "--side must be vertex or edge, got `{other}`"
                        )))
                    }
                };
                let text = match (json, file) {
                    (Some(inline), None) => inline,
                    (None, Some(path)) => {
                        std::fs::read_to_string(path).map_err(|e| CliError::Io(e.to_string()))?
                    }
                    _ => {
                        return Err(CliError::Usage(
                            "exactly one of --json or --file is required".into(),
                        ))
                    }
                };
                let schema: TypeSchema = serde_json::from_str(&text)?;
                let mut s = load_store(&store, None)?;
                let name = schema.type_name.clone();
                s.register_schema(schema, side)?;
                save(&s, &store)?;
                println!("registered {name}");
                Ok(())
            }
        },
        Command::Vertex { command } => match command {
            VertexCommand::Add {
                store,
                type_name,
                attrs,
                seed,
            } => {
                let mut s = load_store(&store, seed)?;
                let id = s.add_vertex(&type_name, parse_attrs(attrs.as_deref())?)?;
                save(&s, &store)?;
                println!("{id}");
                Ok(())
            }
        },
        Command::Edge { command } => match command {
            EdgeCommand::Add {
                store,
                type_name,
                source,
                target,
                attrs,
                amplitudes,
                seed,
            } => {
                let mut s = load_store(&store, seed)?;
                let source = parse_id(&source)?;
                let target = parse_id(&target)?;
                let attrs = parse_attrs(attrs.as_deref())?;
                let id = match amplitudes {
                    None => s.add_edge(&type_name, source, target, attrs)?,
                    Some(raw) => {
                        let parts = parse_floats(&raw)?;
                        if parts.len() != 3 {
                            return Err(CliError::Usage(
                                "--amplitudes takes exactly fwd,bwd,bidir".into(),
                            ));
                        }
                        let direction = ngf_core::superposition::DirectionAmplitudes::new(
                            parts[0], parts[1], parts[2],
                        )?;
                        s.add_superposed_edge(
                            &type_name,
                            source,
                            target,
                            attrs,
                            ngf_core::superposition::SuperpositionDescriptor::new(direction),
                        )?
                    }
                };
                save(&s, &store)?;
                println!("{id}");
                Ok(())
            }
        },
        Command::Import { store, file, seed } => {
            let mut s = load_store(&store, seed)?;
            let (vertices, edges) = import_entities(&mut s, &file)?;
            save(&s, &store)?;
            println!("imported {vertices} vertices, {edges} edges");
            Ok(())
        }
        Command::Export { store, file } => {
            let s = load_store(&store, None)?;
            let lines = export_entities(&s, &file)?;
            println!("exported {lines} entities");
            Ok(())
        }
        Command::Calibrate {
            pairs,
            alpha,
            beta,
            store,
            metric,
            field,
            output,
        } => {
            let sample = read_calibration_csv(&pairs)?;
            let result = calibrate(&sample, alpha, beta)?;
            let json = write_calibration_json(&result)?;
            match output {
                Some(path) => {
                    std::fs::write(path, &json).map_err(|e| CliError::Io(e.to_string()))?
                }
                None => println!("{json}"),
            }
            if let Some(store_path) = store {
                let (metric, field) = match (metric, field) {
                    (Some(m), Some(f)) => (m, f),
                    _ => {
                        return Err(CliError::Usage(
                            "--store requires --metric and --field".into(),
                        ))
                    }
                };
                let metric_id =
                    MetricId::from_str(&metric).map_err(|e| CliError::Usage(e.to_string()))?;
                let mut s = load_store(&store_path, None)?;
                if s.metric(&metric, &field).is_none() {
                    s.register_metric(MetricDescriptor::new(metric_id, &field))?;
                }
                s.record_calibration(&metric, &field, result)?;
                save(&s, &store_path)?;
            }
            Ok(())
        }
        Command::InferSimilarity {
            store,
            metric,
            field,
            type_name,
            seed,
        } => {
            let mut s = load_store(&store, seed)?;
            let descriptor = s.metric(&metric, &field).cloned().ok_or_else(|| {
                CliError::Data(format!("no metric registered for ({metric}, {field})"))
            })?;
            let calibration = s.calibration(&metric, &field).cloned().ok_or_else(|| {
                CliError::Data(format!("no calibration recorded for ({metric}, {field})"))
            })?;
            let vertices: Vec<EntityId> = s
                .query_vertices(type_name.as_deref(), None)
                .map(|v| v.id)
                .collect();
            let inference = infer_similarity_edges(&mut s, &vertices, &descriptor, &calibration)?;
            save(&s, &store)?;
            println!(
                "{}",
                serde_json::json!({
                    "edges_created": inference.edges.len(),
                    "skipped": inference.skipped,
                })
            );
            Ok(())
        }
        Command::KernelCompare {
            store,
            a,
            b,
            kernel,
            mask,
            sigma,
            equality_type,
            observer,
            epsilon,
        } => {
            let s = load_store(&store, None)?;
            let descriptor = build_kernel(
                &s,
                kernel.as_deref(),
                mask.as_deref(),
                sigma.as_deref(),
                &equality_type,
                &observer,
            )?;
            let a = parse_id(&a)?;
            let b = parse_id(&b)?;
            let va = s
                .vertex(a)
                .ok_or_else(|| CliError::Data(format!("vertex {a} does not exist")))?;
            let vb = s
                .vertex(b)
                .ok_or_else(|| CliError::Data(format!("vertex {b} does not exist")))?;
            let judgement = kernel_compare(va, vb, &descriptor, epsilon)?;
            println!("{}", serde_json::to_string_pretty(&judgement)?);
            Ok(())
        }
        Command::Metric { command } => match command {
            MetricCommand::Add {
                store,
                metric,
                field,
                window,
                temporal_axis,
            } => {
                let metric_id =
                    MetricId::from_str(&metric).map_err(|e| CliError::Usage(e.to_string()))?;
                let mut descriptor = MetricDescriptor::new(metric_id, &field);
                descriptor.params.window = window;
                descriptor.params.temporal_axis = temporal_axis;
                let mut s = load_store(&store, None)?;
                s.register_metric(descriptor)?;
                save(&s, &store)?;
                println!("registered {metric} on {field}");
                Ok(())
            }
        },
        Command::Kernel { command } => match command {
            KernelCommand::Add {
                store,
                name,
                mask,
                sigma,
                equality_type,
                observer,
            } => {
                let mut s = load_store(&store, None)?;
                let descriptor = build_kernel(
                    &s,
                    None,
                    Some(&mask),
                    sigma.as_deref(),
                    &equality_type,
                    &observer,
                )?;
                s.register_kernel(&name, descriptor)?;
                save(&s, &store)?;
                println!("registered kernel {name}");
                Ok(())
            }
        },
        Command::Flow { command } => match command {
            FlowCommand::Check { store, scenario } => {
                let s = load_store(&store, None)?;
                let scenario = FlowScenario::read(&scenario)?;
                let report = check_kirchhoff(
                    &s,
                    &scenario.assignment(),
                    &scenario.sources,
                    &scenario.sinks,
                )?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                if report.passed {
                    Ok(())
                } else {
                    Err(CliError::Data("kirchhoff check failed".into()))
                }
            }
            FlowCommand::Maxflow {
                store,
                scenario,
                source,
                sink,
            } => {
                let s = load_store(&store, None)?;
                let scenario = FlowScenario::read(&scenario)?;
                let (value, witness) = max_flow(
                    &s,
                    scenario.cargo.clone(),
                    parse_id(&source)?,
                    parse_id(&sink)?,
                    &scenario.capacities(),
                )?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "value": value,
                        "assignment": witness,
                    }))?
                );
                Ok(())
            }
        },
        Command::Hypergram { command } => match command {
            HypergramCommand::Create {
                store,
                kind,
                bins,
                shape,
                shards,
                seed,
            } => {
                let layout = match kind.as_str() {
                    "scalar" => CellLayout::Scalar,
                    "histogram" => CellLayout::Histogram {
                        bins: bins.ok_or_else(|| {
                            CliError::Usage("--bins is required for histogram cells".into())
                        })?,
                    },
                    "tensor" => CellLayout::Tensor {
                        shape: parse_extents(&shape.ok_or_else(|| {
                            CliError::Usage("--shape is required for tensor cells".into())
                        })?)?,
                    },
                    other => {
                        return Err(CliError::Usage(format!(
                            "--kind must be scalar, histogram, or tensor, got `{other}`"
                        )))
                    }
                };
                let mut s = load_store(&store, seed)?;
                let id = s.add_cell(layout, shards)?;
                save(&s, &store)?;
                println!("{id}");
                Ok(())
            }
            HypergramCommand::Accumulate {
                store,
                cell,
                delta,
                shard,
            } => {
                let s = load_store(&store, None)?;
                let cell = parse_id(&cell)?;
                let delta: CellValue = serde_json::from_str(&delta)?;
                let target = s
                    .cell(cell)
                    .ok_or_else(|| CliError::Data(format!("cell {cell} does not exist")))?;
                target.accumulate(&delta, shard)?;
                save(&s, &store)?;
                println!("accumulated");
                Ok(())
            }
            HypergramCommand::Reconcile { store, cell } => {
                let mut s = load_store(&store, None)?;
                let cell = parse_id(&cell)?;
                let target = s
                    .cell_mut(cell)
                    .ok_or_else(|| CliError::Data(format!("cell {cell} does not exist")))?;
                let value = target.reconcile();
                let version = target.version();
                save(&s, &store)?;
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "value": value,
                        "version": version,
                    }))?
                );
                Ok(())
            }
        },
        Command::Topology { command } => match command {
            TopologyCommand::Generate {
                store,
                extents,
                sparse,
                seed,
            } => {
                let kind = match (extents, sparse) {
                    (Some(raw), false) => TopologyKind::DenseLattice {
                        extents: parse_extents(&raw)?,
                    },
                    (None, true) => TopologyKind::Sparse,
                    _ => {
                        return Err(CliError::Usage(
                            "exactly one of --extents or --sparse is required".into(),
                        ))
                    }
                };
                let mut s = load_store(&store, seed)?;
                let topology = generate_topology(&mut s, &kind)?;
                save(&s, &store)?;
                println!(
                    "{}",
                    serde_json::json!({
                        "vertices": topology.vertices.len(),
                        "edges": topology.edges.len(),
                    })
                );
                Ok(())
            }
            TopologyCommand::Describe {
                store,
                vertex_type,
                edge_type,
                metric_dim,
            } => {
                let s = load_store(&store, None)?;
                let descriptor =
                    describe_topology(&s, &vertex_type, &edge_type, metric_dim, BTreeMap::new())?;
                println!("{}", serde_json::to_string_pretty(&descriptor)?);
                Ok(())
            }
        },
        Command::Query {
            store,
            entity,
            type_name,
            key,
            equals,
        } => {
            let s = load_store(&store, None)?;
            let value: Option<AttributeValue> = match equals {
                Some(json) => Some(serde_json::from_str(&json)?),
                None => None,
            };
            let predicate = match (&key, &value) {
                (Some(k), Some(v)) => Some((k.as_str(), v)),
                (None, None) => None,
                _ => {
                    return Err(CliError::Usage(
                        "--key and --equals must be given together".into(),
                    ))
                }
            };
            match entity.as_str() {
                "vertex" => {
                    for vertex in s.query_vertices(type_name.as_deref(), predicate) {
                        println!(
                            "{}",
                            serde_json::json!({
                                "id": vertex.id,
                                "type": vertex.type_name,
                                "attributes": vertex.attributes,
                            })
                        );
                    }
                }
                "edge" => {
                    for edge in s.query_edges(type_name.as_deref(), predicate) {
                        println!(
                            "{}",
                            serde_json::json!({
                                "id": edge.id,
                                "type": edge.type_name,
                                "source": edge.source,
                                "target": edge.target,
                                "attributes": edge.attributes,
                            })
                        );
                    }
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "--entity must be vertex or edge, got `{other}`"
                    )))
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
