//! Dense interpolation of a lane graph.
//!
//! GEO and TOPO compare point samples rather than raw nodes, so every
//! reachable edge is subdivided at a fixed spacing. The result keeps the
//! directed structure: dense points chain along each edge, which lets
//! TOPO walk forward-reachable neighborhoods by graph distance.

use std::collections::BTreeMap;

use crate::geom::Point;
use crate::graph::{LaneGraph, NodeId};

use super::HeapEntry;

/// Where a dense point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSource {
    /// The point is a graph node.
    Node(NodeId),
    /// The point lies on the interior of an edge.
    Edge { src: NodeId, dst: NodeId },
}

/// A lane graph resampled at `interp_dist` spacing along its edges.
#[derive(Debug, Clone)]
pub struct DenseGraph {
    points: Vec<Point>,
    sources: Vec<PointSource>,
    out: Vec<Vec<usize>>,
}

impl DenseGraph {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn sources(&self) -> &[PointSource] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dense point indices whose forward graph distance from `start` is
    /// at most `radius`, `start` included. Ascending index order.
    pub fn forward_ball(&self, start: usize, radius: f64) -> Vec<usize> {
        let mut dist = vec![f64::INFINITY; self.points.len()];
        let mut heap = std::collections::BinaryHeap::new();
        dist[start] = 0.0;
        heap.push(HeapEntry {
            cost: 0.0,
            index: start,
        });
        while let Some(HeapEntry { cost, index }) = heap.pop() {
            if cost > dist[index] || cost > radius {
                continue;
            }
            for &next in &self.out[index] {
                let step = self.points[index].distance(self.points[next]);
                let cand = cost + step;
                if cand < dist[next] && cand <= radius {
                    dist[next] = cand;
                    heap.push(HeapEntry {
                        cost: cand,
                        index: next,
                    });
                }
            }
        }
        (0..self.points.len())
            .filter(|&i| dist[i] <= radius)
            .collect()
    }
}

/// Place points along every reachable edge at spacing `interp_dist` or
/// finer. Each reachable node contributes exactly one point, shared by
/// all its incident edges.
pub fn interpolate_graph(g: &LaneGraph, interp_dist: f64) -> DenseGraph {
    assert!(
        interp_dist > 0.0 && interp_dist.is_finite(),
        "interp_dist must be positive"
    );
    let reachable = g.reachable_nodes();
    let mut points = Vec::new();
    let mut sources = Vec::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut node_index: BTreeMap<NodeId, usize> = BTreeMap::new();

    for &id in &reachable {
        node_index.insert(id, points.len());
        points.push(g.position(id).expect("reachable node exists"));
        sources.push(PointSource::Node(id));
        out.push(Vec::new());
    }

    for (src, dst) in g.reachable_edges() {
        let a = g.position(src).expect("edge endpoint exists");
        let b = g.position(dst).expect("edge endpoint exists");
        let segments = (a.distance(b) / interp_dist).ceil().max(1.0) as usize;
        let mut previous = node_index[&src];
        for i in 1..segments {
            let t = i as f64 / segments as f64;
            let idx = points.len();
            points.push(a * (1.0 - t) + b * t);
            sources.push(PointSource::Edge { src, dst });
            out.push(Vec::new());
            out[previous].push(idx);
            previous = idx;
        }
        let end = node_index[&dst];
        out[previous].push(end);
    }

    DenseGraph {
        points,
        sources,
        out,
    }
}
