//! Successor lane graph toolkit.
//!
//! The pipeline mirrors what a set-prediction lane graph model needs
//! around it: decompose a ground-truth graph into maximal-length paths,
//! represent paths as polylines or Bézier curves, match and score
//! proposal sets against ground truth, fuse proposals back into a graph,
//! and benchmark predicted graphs against ground truth.

pub mod aggregate;
pub mod config;
pub mod curve;
pub mod decompose;
pub mod doc;
pub mod error;
pub mod geom;
pub mod graph;
pub mod matching;
pub mod metrics;
pub mod synth;

pub use aggregate::{
    aggregate, filter_paths, proposals_to_graph, Aggregated, AggregateWarning,
    AggregationConfig, Representation,
};
pub use curve::{
    bernstein, bezier_eval, bezier_sample, fit_bezier, resample_polyline, BezierCurve,
    BezierFit, Polyline, DEFAULT_BEZIER_DEGREE, DEFAULT_POLYLINE_POINTS,
};
pub use decompose::{count_paths, decompose, path_to_polyline, NodePath, DEFAULT_MAX_PATHS};
pub use error::{Error, Result};
pub use geom::Point;
pub use graph::{Extent, LaneGraph, Node, NodeId, ValidationReport, ValidationWarning, Violation};
pub use matching::{
    brute_force_assignment, hungarian, match_cost, set_loss, Assignment, GroundTruthPath,
    MatchWeights, PathProposal, SetLoss,
};
pub use config::ToolConfig;
pub use doc::{
    load_graph, load_json, save_graph, save_json, AssignmentDocument, DocError, GraphDocument,
    PathEntry, PathSetDocument, ProposalDocument, ProposalEntry, ReportDocument, SCHEMA_VERSION,
};
pub use metrics::{
    apls, evaluate, geo_scores, graph_iou, interpolate_graph, sda, topo_scores, DenseGraph,
    MetricConfig, MetricReport, PointSource, SdaScore,
};
pub use synth::{generate_synthetic, SyntheticSpec};
