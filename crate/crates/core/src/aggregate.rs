//! Fusion of scored path proposals into a single successor lane graph.
//!
//! Proposals below the likelihood threshold are dropped; the survivors
//! are merged iteratively in descending likelihood order so that
//! high-confidence geometry anchors the graph. Each point of an incoming
//! path either merges onto the nearest node of the graph built from
//! earlier paths (when within `d_max`) or becomes a new node.

use std::collections::BTreeSet;
use std::fmt;

use crate::curve::{bezier_sample, BezierCurve, Polyline, DEFAULT_POLYLINE_POINTS};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::graph::{Extent, LaneGraph, Node, NodeId};
use crate::matching::PathProposal;

/// How a proposal's control points encode the path geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Control points are the polyline vertices themselves.
    Polyline,
    /// Control points define a Bézier curve that is sampled before
    /// aggregation.
    Bezier,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Polyline => write!(f, "polyline"),
            Representation::Bezier => write!(f, "bezier"),
        }
    }
}

/// Parameters of the aggregation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregationConfig {
    /// Minimum likelihood for a proposal to take part.
    pub p_min: f64,
    /// Merge radius in pixels: a point within this distance of an
    /// existing node maps onto that node.
    pub d_max: f64,
    /// Optional resampling count applied to each path before merging;
    /// Bézier proposals are sampled to this many points (default 20).
    pub n_cp_out: Option<usize>,
}

impl AggregationConfig {
    pub fn new(p_min: f64, d_max: f64, n_cp_out: Option<usize>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_min) {
            return Err(Error::InvalidConfig(format!(
                "p_min must be in [0, 1], got {p_min}"
            )));
        }
        if !d_max.is_finite() || d_max < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "d_max must be finite and >= 0, got {d_max}"
            )));
        }
        if let Some(k) = n_cp_out {
            if k < 2 {
                return Err(Error::InvalidConfig(format!(
                    "n_cp_out must be >= 2, got {k}"
                )));
            }
        }
        Ok(Self {
            p_min,
            d_max,
            n_cp_out,
        })
    }
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            p_min: 0.5,
            d_max: 10.0,
            n_cp_out: None,
        }
    }
}

/// Non-fatal findings produced while aggregating.
#[derive(Debug, Clone, PartialEq)]
pub enum AggregateWarning {
    /// An edge was dropped because adding it would have created a cycle
    /// (possible when merges collapse distinct points).
    EdgeDroppedForCycle { src: NodeId, dst: NodeId },
    /// The fused root is further than `d_max` from the bottom center of
    /// the RoI, where the ego pose convention places it.
    RootAwayFromBottomCenter { distance: f64 },
}

impl fmt::Display for AggregateWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateWarning::EdgeDroppedForCycle { src, dst } => {
                write!(f, "edge ({src}, {dst}) dropped to keep the graph acyclic")
            }
            AggregateWarning::RootAwayFromBottomCenter { distance } => {
                write!(
                    f,
                    "root is {distance:.1} px away from the RoI bottom center"
                )
            }
        }
    }
}

/// Result of aggregation: the fused graph plus any warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregated {
    pub graph: LaneGraph,
    pub warnings: Vec<AggregateWarning>,
}

/// Keep exactly the proposals with likelihood >= `p_min`, in their
/// original relative order.
pub fn filter_paths(props: &[PathProposal], p_min: f64) -> Vec<PathProposal> {
    props
        .iter()
        .filter(|p| p.likelihood() >= p_min)
        .cloned()
        .collect()
}

/// Fuse likelihood-scored polylines (in RoI pixel coordinates) into one
/// successor lane graph.
///
/// Paths are processed in descending likelihood order (ties keep input
/// order). Points of each path are matched against the nodes created by
/// *previous* paths, so a path never merges into itself; the first path
/// therefore always seeds the graph as a full chain and its first point
/// becomes the root.
pub fn aggregate(
    paths: &[(f64, Polyline)],
    cfg: &AggregationConfig,
    roi_extent: Extent,
) -> Result<Aggregated> {
    if paths.is_empty() {
        return Err(Error::EmptyProposalSet);
    }
    for (l, _) in paths {
        if !(0.0..=1.0).contains(l) {
            return Err(Error::LikelihoodOutOfRange(*l));
        }
    }

    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| {
        paths[b].0
            .partial_cmp(&paths[a].0)
            .expect("likelihoods are finite")
    });

    let mut positions: Vec<Point> = Vec::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut out_adj: Vec<Vec<usize>> = Vec::new();
    let mut warnings = Vec::new();

    for &path_index in &order {
        let line = &paths[path_index].1;
        let frozen = positions.len(); // merge targets: nodes of previous paths

        let mapped: Vec<usize> = line
            .points()
            .iter()
            .map(|&p| {
                match nearest_node(&positions[..frozen], p) {
                    Some((idx, dist)) if dist <= cfg.d_max => idx,
                    _ => {
                        positions.push(p);
                        out_adj.push(Vec::new());
                        positions.len() - 1
                    }
                }
            })
            .collect();

        for pair in mapped.windows(2) {
            let (src, dst) = (pair[0], pair[1]);
            if src == dst || edges.contains(&(src, dst)) {
                continue;
            }
            if reaches(&out_adj, dst, src) {
                warnings.push(AggregateWarning::EdgeDroppedForCycle {
                    src: NodeId(src as u64),
                    dst: NodeId(dst as u64),
                });
                continue;
            }
            edges.insert((src, dst));
            out_adj[src].push(dst);
        }
    }

    let root = NodeId(0);
    let root_distance = positions[0].distance(roi_extent.bottom_center());
    if root_distance > cfg.d_max {
        warnings.push(AggregateWarning::RootAwayFromBottomCenter {
            distance: root_distance,
        });
    }

    let graph = LaneGraph::assemble(
        positions
            .iter()
            .enumerate()
            .map(|(i, &pos)| Node { id: NodeId(i as u64), pos }),
        edges
            .iter()
            .map(|&(s, d)| (NodeId(s as u64), NodeId(d as u64))),
        Some(root),
        Some(roi_extent),
    );
    debug_assert!(graph.validate().is_ok());

    Ok(Aggregated { graph, warnings })
}

fn nearest_node(positions: &[Point], p: Point) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, &pos) in positions.iter().enumerate() {
        let d = pos.distance(p);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((idx, d)),
        }
    }
    best
}

/// Whether `to` is reachable from `from` along the directed adjacency.
fn reaches(out_adj: &[Vec<usize>], from: usize, to: usize) -> bool {
    if from == to {
        return true;
    }
    let mut seen = vec![false; out_adj.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &s in &out_adj[v] {
            if s == to {
                return true;
            }
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    false
}

/// Full proposal-to-graph pipeline: threshold by likelihood, decode the
/// control-point representation into pixel-space polylines, and
/// aggregate.
pub fn proposals_to_graph(
    props: &[PathProposal],
    repr: Representation,
    cfg: &AggregationConfig,
    roi_extent: Extent,
) -> Result<Aggregated> {
    let kept = filter_paths(props, cfg.p_min);
    if kept.is_empty() {
        return Err(Error::EmptyProposalSet);
    }

    let paths: Vec<(f64, Polyline)> = kept
        .iter()
        .map(|p| Ok((p.likelihood(), decode_proposal(p, repr, cfg, roi_extent)?)))
        .collect::<Result<Vec<_>>>()?;

    aggregate(&paths, cfg, roi_extent)
}

fn decode_proposal(
    prop: &PathProposal,
    repr: Representation,
    cfg: &AggregationConfig,
    roi_extent: Extent,
) -> Result<Polyline> {
    let denorm: Vec<Point> = prop
        .control_points()
        .iter()
        .map(|p| {
            Point::new(
                p.x * f64::from(roi_extent.width),
                p.y * f64::from(roi_extent.height),
            )
        })
        .collect();
    match repr {
        Representation::Polyline => {
            let line = Polyline::new(denorm)?;
            match cfg.n_cp_out {
                Some(k) => crate::curve::resample_polyline(&line, k),
                None => Ok(line),
            }
        }
        Representation::Bezier => {
            let curve = BezierCurve::new(denorm)?;
            bezier_sample(&curve, cfg.n_cp_out.unwrap_or(DEFAULT_POLYLINE_POINTS))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{decompose, path_to_polyline, DEFAULT_MAX_PATHS};

    fn pts(raw: &[(f64, f64)]) -> Polyline {
        Polyline::new(raw.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn extent() -> Extent {
        Extent::new(100, 100)
    }

    fn prop_path(l: f64, raw: &[(f64, f64)]) -> PathProposal {
        PathProposal::new(l, raw.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn filter_keeps_order_and_threshold() {
        let props = vec![
            prop_path(0.9, &[(0.0, 0.0), (1.0, 1.0)]),
            prop_path(0.3, &[(0.0, 0.0), (0.5, 0.5)]),
            prop_path(0.7, &[(0.0, 0.0), (0.2, 0.2)]),
        ];
        let kept = filter_paths(&props, 0.5);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].likelihood(), 0.9);
        assert_eq!(kept[1].likelihood(), 0.7);
        assert_eq!(filter_paths(&props, 0.0).len(), 3);
        assert_eq!(filter_paths(&props, 1.0).len(), 0);
    }

    #[test]
    fn single_path_becomes_chain() {
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let out = aggregate(
            &[(1.0, pts(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]))],
            &cfg,
            extent(),
        )
        .unwrap();
        assert_eq!(out.graph.node_count(), 3);
        assert_eq!(out.graph.edge_count(), 2);
        assert_eq!(out.graph.root(), Some(NodeId(0)));
        assert_eq!(out.graph.position(NodeId(0)).unwrap(), Point::new(0.0, 0.0));
    }

    #[test]
    fn identical_paths_merge_fully() {
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let line = pts(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]);
        let out = aggregate(&[(1.0, line.clone()), (0.8, line)], &cfg, extent()).unwrap();
        assert_eq!(out.graph.node_count(), 3);
        assert_eq!(out.graph.edge_count(), 2);
    }

    #[test]
    fn first_path_is_never_self_merged() {
        // Consecutive points closer than d_max must still form a chain.
        let cfg = AggregationConfig::new(0.5, 10.0, None).unwrap();
        let out = aggregate(
            &[(1.0, pts(&[(0.0, 0.0), (3.0, 0.0), (6.0, 0.0)]))],
            &cfg,
            extent(),
        )
        .unwrap();
        assert_eq!(out.graph.node_count(), 3);
        assert_eq!(out.graph.edge_count(), 2);
    }

    #[test]
    fn shared_prefix_produces_split_node() {
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let a = pts(&[(0.0, 50.0), (20.0, 50.0), (40.0, 30.0)]);
        let b = pts(&[(0.0, 50.0), (20.0, 50.0), (40.0, 70.0)]);
        let out = aggregate(&[(1.0, a), (0.9, b)], &cfg, extent()).unwrap();
        // Duplicate prefix merges; the split happens at (20, 50).
        assert_eq!(out.graph.node_count(), 4);
        let splits = out.graph.split_nodes();
        assert_eq!(splits.len(), 1);
        let split = *splits.iter().next().unwrap();
        assert_eq!(
            out.graph.position(split).unwrap(),
            Point::new(20.0, 50.0)
        );
    }

    #[test]
    fn empty_input_is_an_error() {
        let cfg = AggregationConfig::default();
        assert!(matches!(
            aggregate(&[], &cfg, extent()),
            Err(Error::EmptyProposalSet)
        ));
    }

    #[test]
    fn cycle_guard_drops_offending_edge() {
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let forward = pts(&[(0.0, 0.0), (20.0, 0.0)]);
        let backward = pts(&[(21.0, 0.0), (1.0, 0.0)]);
        let out = aggregate(&[(1.0, forward), (0.9, backward)], &cfg, extent()).unwrap();
        assert_eq!(out.graph.node_count(), 2);
        assert_eq!(out.graph.edge_count(), 1);
        assert!(out
            .warnings
            .iter()
            .any(|w| matches!(w, AggregateWarning::EdgeDroppedForCycle { .. })));
        assert!(out.graph.validate().is_ok());
    }

    #[test]
    fn root_off_bottom_center_warns() {
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let out = aggregate(&[(1.0, pts(&[(0.0, 0.0), (20.0, 0.0)]))], &cfg, extent()).unwrap();
        assert!(out
            .warnings
            .iter()
            .any(|w| matches!(w, AggregateWarning::RootAwayFromBottomCenter { .. })));

        let near_bc = aggregate(
            &[(1.0, pts(&[(50.0, 99.0), (50.0, 50.0)]))],
            &cfg,
            extent(),
        )
        .unwrap();
        assert!(near_bc.warnings.is_empty());
    }

    #[test]
    fn descending_likelihood_defines_root() {
        let cfg = AggregationConfig::new(0.5, 2.0, None).unwrap();
        let low = pts(&[(90.0, 90.0), (80.0, 80.0)]);
        let high = pts(&[(10.0, 10.0), (20.0, 20.0)]);
        let out = aggregate(&[(0.6, low), (0.9, high)], &cfg, extent()).unwrap();
        assert_eq!(out.graph.position(NodeId(0)).unwrap(), Point::new(10.0, 10.0));
    }

    #[test]
    fn proposals_to_graph_thresholds_everything_away() {
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let props = vec![prop_path(0.2, &[(0.1, 0.1), (0.5, 0.5)])];
        assert!(matches!(
            proposals_to_graph(&props, Representation::Polyline, &cfg, extent()),
            Err(Error::EmptyProposalSet)
        ));
    }

    #[test]
    fn degree_one_bezier_becomes_two_node_chain() {
        let cfg = AggregationConfig::new(0.5, 5.0, Some(2)).unwrap();
        let props = vec![prop_path(0.9, &[(0.1, 0.9), (0.9, 0.1)])];
        let out = proposals_to_graph(&props, Representation::Bezier, &cfg, extent()).unwrap();
        assert_eq!(out.graph.node_count(), 2);
        assert_eq!(out.graph.edge_count(), 1);
        assert_eq!(out.graph.position(NodeId(0)).unwrap(), Point::new(10.0, 90.0));
    }

    #[test]
    fn bezier_and_sampled_polyline_agree() {
        let control = [(0.1, 0.9), (0.3, 0.2), (0.7, 0.2), (0.9, 0.9)];
        let k = 8;

        let bezier_prop = prop_path(0.9, &control);
        let cfg_bezier = AggregationConfig::new(0.5, 3.0, Some(k)).unwrap();
        let via_bezier = proposals_to_graph(
            std::slice::from_ref(&bezier_prop),
            Representation::Bezier,
            &cfg_bezier,
            extent(),
        )
        .unwrap();

        // The equivalent polyline proposal: the same curve pre-sampled in
        // normalized space.
        let curve = BezierCurve::new(
            control
                .iter()
                .map(|&(x, y)| Point::new(x, y))
                .collect(),
        )
        .unwrap();
        let sampled = bezier_sample(&curve, k).unwrap();
        let poly_prop = PathProposal::new(0.9, sampled.points().to_vec()).unwrap();
        let cfg_poly = AggregationConfig::new(0.5, 3.0, None).unwrap();
        let via_polyline = proposals_to_graph(
            &[poly_prop],
            Representation::Polyline,
            &cfg_poly,
            extent(),
        )
        .unwrap();

        assert_eq!(
            via_bezier.graph.node_count(),
            via_polyline.graph.node_count()
        );
        assert_eq!(
            via_bezier.graph.edges().collect::<Vec<_>>(),
            via_polyline.graph.edges().collect::<Vec<_>>()
        );
        for (a, b) in via_bezier.graph.nodes().zip(via_polyline.graph.nodes()) {
            assert!(a.pos.distance(b.pos) < 1e-9);
        }
    }

    #[test]
    fn decompose_then_aggregate_round_trips() {
        use crate::graph::Node;
        // Well separated nodes: all pairwise distances exceed 2 * d_max.
        let g = LaneGraph::assemble(
            [
                Node::new(0, 50.0, 95.0),
                Node::new(1, 50.0, 60.0),
                Node::new(2, 20.0, 30.0),
                Node::new(3, 80.0, 30.0),
            ],
            [
                (NodeId(0), NodeId(1)),
                (NodeId(1), NodeId(2)),
                (NodeId(1), NodeId(3)),
            ],
            Some(NodeId(0)),
            Some(extent()),
        );
        let paths = decompose(&g, DEFAULT_MAX_PATHS).unwrap();
        let lines: Vec<(f64, Polyline)> = paths
            .iter()
            .map(|p| (1.0, path_to_polyline(&g, p).unwrap()))
            .collect();
        let cfg = AggregationConfig::new(0.5, 5.0, None).unwrap();
        let out = aggregate(&lines, &cfg, extent()).unwrap();

        let mut original: Vec<(Point, Point)> = g
            .edges()
            .map(|(s, d)| (g.position(s).unwrap(), g.position(d).unwrap()))
            .collect();
        let mut fused: Vec<(Point, Point)> = out
            .graph
            .edges()
            .map(|(s, d)| {
                (
                    out.graph.position(s).unwrap(),
                    out.graph.position(d).unwrap(),
                )
            })
            .collect();
        let key = |(a, b): &(Point, Point)| {
            (
                (a.x * 1e6) as i64,
                (a.y * 1e6) as i64,
                (b.x * 1e6) as i64,
                (b.y * 1e6) as i64,
            )
        };
        original.sort_by_key(key);
        fused.sort_by_key(key);
        assert_eq!(original, fused);
        assert_eq!(out.graph.node_count(), g.node_count());
    }

    #[test]
    fn output_size_is_bounded_by_input_and_runs_are_identical() {
        let cfg = AggregationConfig::new(0.5, 6.0, None).unwrap();
        let paths = vec![
            (0.9, pts(&[(10.0, 90.0), (12.0, 60.0), (20.0, 30.0)])),
            (0.8, pts(&[(10.0, 90.0), (13.0, 61.0), (40.0, 30.0)])),
            (0.7, pts(&[(11.0, 91.0), (30.0, 70.0)])),
        ];
        let total_points: usize = paths.iter().map(|(_, l)| l.points().len()).sum();
        let total_segments: usize = paths.iter().map(|(_, l)| l.points().len() - 1).sum();
        let out = aggregate(&paths, &cfg, extent()).unwrap();
        assert!(out.graph.node_count() <= total_points);
        assert!(out.graph.edge_count() <= total_segments);
        assert_eq!(out, aggregate(&paths, &cfg, extent()).unwrap());
    }

    #[test]
    fn raising_threshold_never_grows_output() {
        let props = vec![
            prop_path(0.9, &[(0.5, 0.95), (0.5, 0.5)]),
            prop_path(0.6, &[(0.5, 0.95), (0.8, 0.5)]),
        ];
        let ext = extent();
        let mut last_nodes = usize::MAX;
        let mut last_edges = usize::MAX;
        for p_min in [0.5, 0.7, 0.95] {
            let cfg = AggregationConfig::new(p_min, 5.0, None).unwrap();
            match proposals_to_graph(&props, Representation::Polyline, &cfg, ext) {
                Ok(out) => {
                    assert!(out.graph.node_count() <= last_nodes);
                    assert!(out.graph.edge_count() <= last_edges);
                    last_nodes = out.graph.node_count();
                    last_edges = out.graph.edge_count();
                }
                Err(Error::EmptyProposalSet) => break,
                Err(other) => panic!("unexpected error {other}"),
            }
        }
    }
}
