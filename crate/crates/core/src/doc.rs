//! On-disk document formats.
//!
//! All documents are schema-versioned JSON, written pretty-printed with
//! stable field and element order so reruns are byte-identical and
//! outputs diff cleanly. Graph documents always carry pixel
//! coordinates; proposal documents always carry normalized [0, 1]
//! coordinates (conversion needs an explicit extent).
//!
//! Writers are atomic: content goes to a temporary file in the target
//! directory which is renamed into place, so a failed run never leaves a
//! partial document behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::aggregate::Representation;
use crate::geom::Point;
use crate::graph::{Extent, LaneGraph, Node, NodeId};
use crate::matching::{GroundTruthPath, PathProposal};
use crate::metrics::{MetricConfig, MetricReport};

pub const SCHEMA_VERSION: &str = "1";

/// Errors raised while reading or writing documents.
#[derive(Debug, thiserror::Error)]
pub enum DocError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported schema version \"{found}\" (supported: \"{SCHEMA_VERSION}\")")]
    SchemaVersion { found: String },

    #[error("field \"{field}\": {message}")]
    Field { field: String, message: String },

    #[error("graph validation failed: {0}")]
    InvalidGraph(String),
}

fn field_error(field: impl Into<String>, message: impl ToString) -> DocError {
    DocError::Field {
        field: field.into(),
        message: message.to_string(),
    }
}

fn check_version(found: &str) -> Result<(), DocError> {
    if found != SCHEMA_VERSION {
        return Err(DocError::SchemaVersion {
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Serialize any document as canonical JSON and atomically replace
/// `path` with it.
pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), DocError> {
    let to_io = |source: std::io::Error| DocError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut bytes = serde_json::to_vec_pretty(value).expect("documents always serialize");
    bytes.push(b'\n');

    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(to_io)?;
    tmp.write_all(&bytes).map_err(to_io)?;
    tmp.persist(path).map_err(|e| to_io(e.error))?;
    Ok(())
}

/// Load and parse a JSON document, reporting line/column on failure.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, DocError> {
    let text = fs::read_to_string(path).map_err(|source| DocError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| DocError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Graph documents (pixel coordinates)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub src: u64,
    pub dst: u64,
}

/// Serialized lane graph. `root` is null only for the empty graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub schema_version: String,
    pub extent: Option<Extent>,
    pub root: Option<u64>,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
}

impl GraphDocument {
    /// Canonical form: nodes ascending by id, edges ascending by
    /// (src, dst).
    pub fn from_graph(g: &LaneGraph) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            extent: g.extent(),
            root: g.root().map(|r| r.0),
            nodes: g
                .nodes()
                .map(|n| NodeDoc {
                    id: n.id.0,
                    x: n.pos.x,
                    y: n.pos.y,
                })
                .collect(),
            edges: g
                .edges()
                .map(|(s, d)| EdgeDoc { src: s.0, dst: d.0 })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<LaneGraph, DocError> {
        check_version(&self.schema_version)?;
        let mut seen = std::collections::BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id) {
                return Err(field_error("nodes", format!("duplicate node id {}", node.id)));
            }
        }
        let mut seen_edges = std::collections::BTreeSet::new();
        for edge in &self.edges {
            if !seen_edges.insert((edge.src, edge.dst)) {
                return Err(field_error(
                    "edges",
                    format!("duplicate edge ({}, {})", edge.src, edge.dst),
                ));
            }
        }
        let graph = LaneGraph::assemble(
            self.nodes
                .iter()
                .map(|n| Node::new(n.id, n.x, n.y)),
            self.edges
                .iter()
                .map(|e| (NodeId(e.src), NodeId(e.dst))),
            self.root.map(NodeId),
            self.extent,
        );
        let report = graph.validate();
        if !report.is_ok() {
            let joined = report
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(DocError::InvalidGraph(joined));
        }
        Ok(graph)
    }
}

pub fn save_graph(g: &LaneGraph, path: &Path) -> Result<(), DocError> {
    save_json(&GraphDocument::from_graph(g), path)
}

pub fn load_graph(path: &Path) -> Result<LaneGraph, DocError> {
    load_json::<GraphDocument>(path)?.to_graph()
}

// ---------------------------------------------------------------------------
// Proposal documents (normalized coordinates)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalEntry {
    pub likelihood: f64,
    pub points: Vec<[f64; 2]>,
}

/// Serialized proposal set as a prediction head would emit it: a
/// likelihood and `n_cp` normalized control points per path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalDocument {
    pub schema_version: String,
    pub representation: String,
    pub n_cp: usize,
    pub proposals: Vec<ProposalEntry>,
}

impl ProposalDocument {
    pub fn from_proposals(props: &[PathProposal], repr: Representation) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            representation: repr.to_string(),
            n_cp: props
                .first()
                .map(|p| p.control_points().len())
                .unwrap_or(0),
            proposals: props
                .iter()
                .map(|p| ProposalEntry {
                    likelihood: p.likelihood(),
                    points: p.control_points().iter().map(|pt| [pt.x, pt.y]).collect(),
                })
                .collect(),
        }
    }

    pub fn representation(&self) -> Result<Representation, DocError> {
        match self.representation.as_str() {
            "polyline" => Ok(Representation::Polyline),
            "bezier" => Ok(Representation::Bezier),
            other => Err(field_error(
                "representation",
                format!("expected \"polyline\" or \"bezier\", got \"{other}\""),
            )),
        }
    }

    pub fn to_proposals(&self) -> Result<Vec<PathProposal>, DocError> {
        check_version(&self.schema_version)?;
        self.proposals
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                if entry.points.len() != self.n_cp {
                    return Err(field_error(
                        format!("proposals[{i}].points"),
                        format!("expected {} points, got {}", self.n_cp, entry.points.len()),
                    ));
                }
                PathProposal::new(
                    entry.likelihood,
                    entry.points.iter().map(|&[x, y]| Point::new(x, y)).collect(),
                )
                .map_err(|e| field_error(format!("proposals[{i}]"), e))
            })
            .collect()
    }

    /// Read the entries as ground-truth paths (likelihoods ignored).
    pub fn to_ground_truths(&self) -> Result<Vec<GroundTruthPath>, DocError> {
        check_version(&self.schema_version)?;
        self.proposals
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                if entry.points.len() != self.n_cp {
                    return Err(field_error(
                        format!("proposals[{i}].points"),
                        format!("expected {} points, got {}", self.n_cp, entry.points.len()),
                    ));
                }
                GroundTruthPath::new(
                    entry.points.iter().map(|&[x, y]| Point::new(x, y)).collect(),
                )
                .map_err(|e| field_error(format!("proposals[{i}]"), e))
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Path set documents (pixel coordinates, self-contained)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub node_ids: Vec<u64>,
    pub points: Vec<[f64; 2]>,
}

/// Decomposition output: every maximal path with its node ids and pixel
/// positions, so downstream steps need no access to the source graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSetDocument {
    pub schema_version: String,
    pub extent: Option<Extent>,
    pub paths: Vec<PathEntry>,
}

impl PathSetDocument {
    pub fn new(extent: Option<Extent>, paths: Vec<PathEntry>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            extent,
            paths,
        }
    }

    pub fn check_version(&self) -> Result<(), DocError> {
        check_version(&self.schema_version)
    }
}

// ---------------------------------------------------------------------------
// Assignment and report documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDoc {
    pub gt: usize,
    pub proposal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentDocument {
    pub schema_version: String,
    pub alpha: f64,
    pub beta: f64,
    pub total_cost: f64,
    pub pairs: Vec<PairDoc>,
    pub cost_matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub config: MetricConfig,
    pub metrics: MetricReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_graph() -> LaneGraph {
        LaneGraph::assemble(
            [
                Node::new(0, 32.0, 64.0),
                Node::new(1, 30.0, 40.0),
                Node::new(2, 40.0, 10.0),
            ],
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))],
            Some(NodeId(0)),
            Some(Extent::new(64, 64)),
        )
    }

    #[test]
    fn graph_round_trip_is_canonical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.json");
        let g = sample_graph();
        save_graph(&g, &path).unwrap();
        let loaded = load_graph(&path).unwrap();
        assert_eq!(g, loaded);

        // Same bytes when saved again.
        let first = fs::read(&path).unwrap();
        save_graph(&loaded, &path).unwrap();
        assert_eq!(first, fs::read(&path).unwrap());
    }

    #[test]
    fn duplicate_node_id_is_named() {
        let doc = GraphDocument {
            schema_version: SCHEMA_VERSION.into(),
            extent: None,
            root: Some(0),
            nodes: vec![
                NodeDoc { id: 3, x: 0.0, y: 0.0 },
                NodeDoc { id: 3, x: 1.0, y: 0.0 },
            ],
            edges: vec![],
        };
        let err = doc.to_graph().unwrap_err();
        assert!(err.to_string().contains("duplicate node id 3"), "{err}");
    }

    #[test]
    fn missing_root_fails_validation() {
        let doc = GraphDocument {
            schema_version: SCHEMA_VERSION.into(),
            extent: None,
            root: Some(9),
            nodes: vec![NodeDoc { id: 0, x: 0.0, y: 0.0 }],
            edges: vec![],
        };
        let err = doc.to_graph().unwrap_err();
        assert!(err.to_string().contains("root"), "{err}");
    }

    #[test]
    fn unsupported_schema_version_rejected() {
        let doc = GraphDocument {
            schema_version: "99".into(),
            extent: None,
            root: None,
            nodes: vec![],
            edges: vec![],
        };
        assert!(matches!(
            doc.to_graph(),
            Err(DocError::SchemaVersion { .. })
        ));
    }

    #[test]
    fn empty_graph_round_trips_with_null_root() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.json");
        save_graph(&LaneGraph::empty(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"root\": null"));
        assert!(load_graph(&path).unwrap().is_empty());
    }

    #[test]
    fn parse_error_reports_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{\n  \"schema_version\": 1,\n}").unwrap();
        let err = load_json::<GraphDocument>(&path).unwrap_err();
        match err {
            DocError::Parse { line, .. } => assert!(line >= 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn proposal_document_round_trip_and_validation() {
        let props = vec![
            PathProposal::new(
                0.9,
                vec![Point::new(0.1, 0.2), Point::new(0.3, 0.4)],
            )
            .unwrap(),
            PathProposal::new(
                0.4,
                vec![Point::new(0.5, 0.6), Point::new(0.7, 0.8)],
            )
            .unwrap(),
        ];
        let doc = ProposalDocument::from_proposals(&props, Representation::Polyline);
        assert_eq!(doc.n_cp, 2);
        assert_eq!(doc.to_proposals().unwrap(), props);
        assert_eq!(doc.representation().unwrap(), Representation::Polyline);

        let mut bad = doc.clone();
        bad.proposals[1].points.pop();
        let err = bad.to_proposals().unwrap_err();
        assert!(err.to_string().contains("proposals[1]"), "{err}");

        let mut out_of_range = doc.clone();
        out_of_range.proposals[0].likelihood = 1.5;
        assert!(out_of_range.to_proposals().is_err());

        let mut bad_repr = doc;
        bad_repr.representation = "wavelet".into();
        assert!(bad_repr.representation().is_err());
    }

    #[test]
    fn ground_truths_ignore_likelihood() {
        let doc = ProposalDocument {
            schema_version: SCHEMA_VERSION.into(),
            representation: "polyline".into(),
            n_cp: 2,
            proposals: vec![ProposalEntry {
                likelihood: 0.0,
                points: vec![[0.1, 0.1], [0.9, 0.9]],
            }],
        };
        let gts = doc.to_ground_truths().unwrap();
        assert_eq!(gts.len(), 1);
        assert_eq!(gts[0].control_points()[1], Point::new(0.9, 0.9));
    }
}
