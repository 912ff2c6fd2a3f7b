//! Directed lane graph with a designated ego root.
//!
//! A [`LaneGraph`] is a value: once built it is never mutated, every query
//! is a pure function, and all iteration orders are ascending by node id
//! so that downstream output is deterministic.
//!
//! Coordinates are RoI pixels (x right, y down). Normalization to [0, 1]
//! happens only at the matching/loss boundary, never here.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Identifier of a node, unique within one graph.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A graph node: id plus position in RoI pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub pos: Point,
}

impl Node {
    pub fn new(id: u64, x: f64, y: f64) -> Self {
        Self {
            id: NodeId(id),
            pos: Point::new(x, y),
        }
    }
}

/// RoI size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extent {
    pub width: u32,
    pub height: u32,
}

impl Extent {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    /// The ego pose convention places the root at the bottom center.
    pub fn bottom_center(&self) -> Point {
        Point::new(f64::from(self.width) / 2.0, f64::from(self.height))
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Hard invariant violations reported by [`LaneGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The designated root id is not present among the nodes.
    MissingRoot(NodeId),
    /// A non-empty graph has no designated root.
    NoRoot,
    /// An edge references a node id that does not exist.
    DanglingEdge { src: NodeId, dst: NodeId },
    /// An edge from a node to itself.
    SelfLoop(NodeId),
    /// The graph is not acyclic.
    Cycle,
    /// A node position has a NaN or infinite component.
    NonFinitePosition(NodeId),
    /// A node position is negative although the graph is bound to an extent.
    NegativePosition(NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRoot(id) => write!(f, "root node {id} does not exist"),
            Violation::NoRoot => write!(f, "non-empty graph has no root"),
            Violation::DanglingEdge { src, dst } => {
                write!(f, "dangling edge ({src}, {dst})")
            }
            Violation::SelfLoop(id) => write!(f, "self-loop at node {id}"),
            Violation::Cycle => write!(f, "cycle"),
            Violation::NonFinitePosition(id) => {
                write!(f, "non-finite position at node {id}")
            }
            Violation::NegativePosition(id) => {
                write!(f, "negative position at node {id} with known extent")
            }
        }
    }
}

/// Soft findings that do not invalidate a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    /// Nodes that cannot be reached from the root; decomposition and
    /// metrics ignore them.
    UnreachableNodes(Vec<NodeId>),
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::UnreachableNodes(ids) => {
                write!(f, "{} node(s) unreachable from root", ids.len())
            }
        }
    }
}

/// Outcome of [`LaneGraph::validate`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Directed acyclic successor lane graph rooted at the ego pose.
///
/// The empty graph (no nodes, no root) is representable so that "no
/// prediction" can flow through the metric suite; every constructor in
/// this toolkit otherwise produces a rooted graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LaneGraph {
    nodes: BTreeMap<NodeId, Point>,
    out: BTreeMap<NodeId, BTreeSet<NodeId>>,
    root: Option<NodeId>,
    extent: Option<Extent>,
}

impl LaneGraph {
    /// The graph with no nodes at all.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Assemble a graph from parts without checking invariants; call
    /// [`validate`](Self::validate) to check them. Duplicate edges
    /// collapse silently (set semantics).
    pub fn assemble(
        nodes: impl IntoIterator<Item = Node>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        root: Option<NodeId>,
        extent: Option<Extent>,
    ) -> Self {
        let nodes: BTreeMap<NodeId, Point> =
            nodes.into_iter().map(|n| (n.id, n.pos)).collect();
        let mut out: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for (src, dst) in edges {
            out.entry(src).or_default().insert(dst);
        }
        Self {
            nodes,
            out,
            root,
            extent,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(BTreeSet::len).sum()
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn extent(&self) -> Option<Extent> {
        self.extent
    }

    pub fn with_extent(mut self, extent: Option<Extent>) -> Self {
        self.extent = extent;
        self
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn position(&self, id: NodeId) -> Result<Point> {
        self.nodes.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        self.nodes.iter().map(|(&id, &pos)| Node { id, pos })
    }

    /// Edges in ascending (src, dst) order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out
            .iter()
            .flat_map(|(&src, dsts)| dsts.iter().map(move |&dst| (src, dst)))
    }

    /// Successor ids of `v` in ascending order; empty for terminal nodes.
    pub fn successors(&self, v: NodeId) -> Result<Vec<NodeId>> {
        if !self.contains(v) {
            return Err(Error::UnknownNode(v));
        }
        Ok(self
            .out
            .get(&v)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default())
    }

    fn out_degree(&self, v: NodeId) -> usize {
        self.out.get(&v).map(BTreeSet::len).unwrap_or(0)
    }

    /// Nodes reachable from the root (including the root), ascending order.
    pub fn reachable_nodes(&self) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let Some(root) = self.root else {
            return seen;
        };
        if !self.contains(root) {
            return seen;
        }
        let mut queue = VecDeque::from([root]);
        seen.insert(root);
        while let Some(v) = queue.pop_front() {
            if let Some(dsts) = self.out.get(&v) {
                for &dst in dsts {
                    if self.contains(dst) && seen.insert(dst) {
                        queue.push_back(dst);
                    }
                }
            }
        }
        seen
    }

    /// Edges of the subgraph reachable from the root, ascending order.
    pub fn reachable_edges(&self) -> BTreeSet<(NodeId, NodeId)> {
        let reachable = self.reachable_nodes();
        self.edges()
            .filter(|(src, dst)| reachable.contains(src) && reachable.contains(dst))
            .collect()
    }

    /// Reachable nodes with no outgoing edges.
    pub fn terminal_nodes(&self) -> BTreeSet<NodeId> {
        self.reachable_nodes()
            .into_iter()
            .filter(|&v| self.out_degree(v) == 0)
            .collect()
    }

    /// Reachable nodes with out-degree >= 2 (lane splits).
    pub fn split_nodes(&self) -> BTreeSet<NodeId> {
        self.reachable_nodes()
            .into_iter()
            .filter(|&v| self.out_degree(v) >= 2)
            .collect()
    }

    /// Whether the edge relation over existing nodes is acyclic, decided
    /// by attempting a topological order (Kahn's algorithm).
    pub fn is_acyclic(&self) -> bool {
        let mut in_degree: BTreeMap<NodeId, usize> =
            self.nodes.keys().map(|&id| (id, 0)).collect();
        for (src, dst) in self.edges() {
            if self.contains(src) && self.contains(dst) {
                *in_degree.get_mut(&dst).unwrap() += 1;
            }
        }
        let mut queue: VecDeque<NodeId> = in_degree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&id, _)| id)
            .collect();
        let mut visited = 0usize;
        while let Some(v) = queue.pop_front() {
            visited += 1;
            if let Some(dsts) = self.out.get(&v) {
                for dst in dsts {
                    if let Some(d) = in_degree.get_mut(dst) {
                        *d -= 1;
                        if *d == 0 {
                            queue.push_back(*dst);
                        }
                    }
                }
            }
        }
        visited == self.nodes.len()
    }

    /// Check every invariant; an empty violation list means the graph is
    /// valid. Unreachable nodes are reported as a warning, not an error.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        match self.root {
            Some(root) if !self.contains(root) => {
                report.violations.push(Violation::MissingRoot(root));
            }
            None if !self.is_empty() => report.violations.push(Violation::NoRoot),
            _ => {}
        }

        for (&id, pos) in &self.nodes {
            if !pos.is_finite() {
                report.violations.push(Violation::NonFinitePosition(id));
            } else if self.extent.is_some() && (pos.x < 0.0 || pos.y < 0.0) {
                report.violations.push(Violation::NegativePosition(id));
            }
        }

        for (src, dst) in self.edges() {
            if src == dst {
                report.violations.push(Violation::SelfLoop(src));
            }
            if !self.contains(src) || !self.contains(dst) {
                report.violations.push(Violation::DanglingEdge { src, dst });
            }
        }

        if !self.is_acyclic() {
            report.violations.push(Violation::Cycle);
        }

        if report.is_ok() && self.root.is_some() {
            let reachable = self.reachable_nodes();
            let stranded: Vec<NodeId> = self
                .nodes
                .keys()
                .copied()
                .filter(|id| !reachable.contains(id))
                .collect();
            if !stranded.is_empty() {
                report
                    .warnings
                    .push(ValidationWarning::UnreachableNodes(stranded));
            }
        }

        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn graph(
        nodes: &[(u64, f64, f64)],
        edges: &[(u64, u64)],
        root: u64,
    ) -> LaneGraph {
        LaneGraph::assemble(
            nodes.iter().map(|&(id, x, y)| Node::new(id, x, y)),
            edges.iter().map(|&(s, d)| (NodeId(s), NodeId(d))),
            Some(NodeId(root)),
            None,
        )
    }

    fn diamond() -> LaneGraph {
        graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 0.0, 1.0), (3, 1.0, 1.0)],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
            0,
        )
    }

    #[test]
    fn validate_minimal_graph_ok() {
        let g = graph(&[(0, 0.0, 0.0)], &[], 0);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn validate_detects_two_cycle() {
        let g = graph(&[(0, 0.0, 0.0), (1, 1.0, 0.0)], &[(0, 1), (1, 0)], 0);
        assert!(g.validate().violations.contains(&Violation::Cycle));
    }

    #[test]
    fn validate_detects_dangling_edge() {
        let g = graph(&[(0, 0.0, 0.0)], &[(0, 7)], 0);
        let report = g.validate();
        assert!(report.violations.contains(&Violation::DanglingEdge {
            src: NodeId(0),
            dst: NodeId(7)
        }));
    }

    #[test]
    fn validate_detects_self_loop_and_missing_root() {
        let g = LaneGraph::assemble(
            [Node::new(0, 0.0, 0.0)],
            [(NodeId(0), NodeId(0))],
            Some(NodeId(9)),
            None,
        );
        let report = g.validate();
        assert!(report.violations.contains(&Violation::SelfLoop(NodeId(0))));
        assert!(report
            .violations
            .contains(&Violation::MissingRoot(NodeId(9))));
    }

    #[test]
    fn validate_negative_position_only_with_extent() {
        let nodes = [(0, -1.0, 0.0)];
        let free = graph(&nodes, &[], 0);
        assert!(free.validate().is_ok());
        let bound = free.with_extent(Some(Extent::new(64, 64)));
        assert!(bound
            .validate()
            .violations
            .contains(&Violation::NegativePosition(NodeId(0))));
    }

    #[test]
    fn validate_flags_unreachable_as_warning_only() {
        let g = graph(&[(0, 0.0, 0.0), (9, 5.0, 5.0)], &[], 0);
        let report = g.validate();
        assert!(report.is_ok());
        assert_eq!(
            report.warnings,
            vec![ValidationWarning::UnreachableNodes(vec![NodeId(9)])]
        );
    }

    #[test]
    fn empty_graph_is_valid() {
        assert!(LaneGraph::empty().validate().is_ok());
    }

    #[test]
    fn successors_ordering_and_terminals() {
        let g = diamond();
        assert_eq!(g.successors(NodeId(0)).unwrap(), vec![NodeId(1), NodeId(2)]);
        assert_eq!(g.successors(NodeId(3)).unwrap(), Vec::<NodeId>::new());
        let chain = graph(&[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.0)], &[(0, 1), (1, 2)], 0);
        assert_eq!(chain.successors(NodeId(1)).unwrap(), vec![NodeId(2)]);
        assert_eq!(
            chain.successors(NodeId(7)),
            Err(Error::UnknownNode(NodeId(7)))
        );
    }

    #[test]
    fn terminal_nodes_chain_and_diamond() {
        let chain = graph(&[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.0)], &[(0, 1), (1, 2)], 0);
        assert_eq!(chain.terminal_nodes(), BTreeSet::from([NodeId(2)]));
        assert_eq!(diamond().terminal_nodes(), BTreeSet::from([NodeId(3)]));
    }

    #[test]
    fn terminal_nodes_exclude_unreachable_sink() {
        // BFS reachability oracle: walk edges from the root by hand.
        let g = graph(
            &[(0, 0.0, 0.0), (1, 1.0, 0.0), (9, 9.0, 9.0)],
            &[(0, 1)],
            0,
        );
        let mut reach = BTreeSet::from([NodeId(0)]);
        let mut frontier = vec![NodeId(0)];
        while let Some(v) = frontier.pop() {
            for s in g.successors(v).unwrap() {
                if reach.insert(s) {
                    frontier.push(s);
                }
            }
        }
        assert!(!reach.contains(&NodeId(9)));
        assert_eq!(g.terminal_nodes(), BTreeSet::from([NodeId(1)]));
    }

    #[test]
    fn split_nodes_examples() {
        assert_eq!(diamond().split_nodes(), BTreeSet::from([NodeId(0)]));
        let chain = graph(&[(0, 0.0, 0.0), (1, 1.0, 0.0)], &[(0, 1)], 0);
        assert!(chain.split_nodes().is_empty());

        // Out-degree oracle for the two-level split.
        let g = graph(
            &[
                (0, 0.0, 0.0),
                (1, 1.0, 0.0),
                (2, 2.0, 0.0),
                (3, 3.0, 0.0),
                (4, 4.0, 0.0),
            ],
            &[(0, 1), (0, 2), (1, 3), (1, 4)],
            0,
        );
        let expected: BTreeSet<NodeId> = g
            .nodes()
            .filter(|n| g.successors(n.id).unwrap().len() >= 2)
            .map(|n| n.id)
            .collect();
        assert_eq!(expected, BTreeSet::from([NodeId(0), NodeId(1)]));
        assert_eq!(g.split_nodes(), expected);
    }

    #[test]
    fn terminals_and_splits_are_disjoint() {
        for g in [
            diamond(),
            graph(&[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.0)], &[(0, 1), (1, 2)], 0),
        ] {
            assert!(g.terminal_nodes().is_disjoint(&g.split_nodes()));
        }
    }
}
