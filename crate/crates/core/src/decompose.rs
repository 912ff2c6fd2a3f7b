//! Decomposition of a lane graph into its maximal-length paths.
//!
//! A maximal path runs from the ego root to a node with no outgoing
//! edges. Enumeration is depth-first with successors visited in
//! ascending id order, which makes the output the lexicographically
//! sorted list of node-id sequences.

use std::collections::BTreeMap;

use crate::curve::Polyline;
use crate::error::{Error, Result};
use crate::graph::{LaneGraph, NodeId};

/// Default cap on the number of enumerated paths. The model side works
/// with around ten proposals per RoI, so real inputs sit far below this;
/// the cap guards pathological synthetic graphs.
pub const DEFAULT_MAX_PATHS: u64 = 256;

/// An ordered root-to-terminal traversal of a lane graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodePath {
    node_ids: Vec<NodeId>,
}

impl NodePath {
    pub fn node_ids(&self) -> &[NodeId] {
        &self.node_ids
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

impl From<Vec<NodeId>> for NodePath {
    fn from(node_ids: Vec<NodeId>) -> Self {
        Self { node_ids }
    }
}

/// Count root-to-terminal traversals without enumerating them, by dynamic
/// programming over a reverse topological order of the reachable subgraph.
/// Saturates at `u64::MAX`. Errors if the reachable subgraph has a cycle.
pub fn count_paths(g: &LaneGraph) -> Result<u64> {
    let reachable = g.reachable_nodes();
    if reachable.is_empty() {
        return Ok(0);
    }

    // Reverse topological order via Kahn on the reachable subgraph.
    let mut in_degree: BTreeMap<NodeId, usize> =
        reachable.iter().map(|&v| (v, 0)).collect();
    for &v in &reachable {
        for s in g.successors(v)? {
            if reachable.contains(&s) {
                *in_degree.get_mut(&s).unwrap() += 1;
            }
        }
    }
    let mut order = Vec::with_capacity(reachable.len());
    let mut queue: Vec<NodeId> = in_degree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    while let Some(v) = queue.pop() {
        order.push(v);
        for s in g.successors(v)? {
            if let Some(d) = in_degree.get_mut(&s) {
                *d -= 1;
                if *d == 0 {
                    queue.push(s);
                }
            }
        }
    }
    if order.len() != reachable.len() {
        return Err(Error::CycleDetected);
    }

    let mut paths_from: BTreeMap<NodeId, u64> = BTreeMap::new();
    for &v in order.iter().rev() {
        let succ = g.successors(v)?;
        let count = if succ.is_empty() {
            1
        } else {
            succ.iter()
                .filter(|s| reachable.contains(s))
                .map(|s| paths_from[s])
                .fold(0u64, u64::saturating_add)
        };
        paths_from.insert(v, count);
    }
    Ok(paths_from[&g.root().expect("reachable implies root")])
}

/// Enumerate all maximal-length paths of `g`, at most `max_paths` of them.
///
/// Output order is deterministic: lexicographic over node-id sequences.
/// The path count is checked up front so a pathological graph fails fast
/// instead of materializing an exponential path set.
pub fn decompose(g: &LaneGraph, max_paths: u64) -> Result<Vec<NodePath>> {
    let total = count_paths(g)?;
    if total > max_paths {
        return Err(Error::PathBudgetExceeded {
            found: total,
            max: max_paths,
        });
    }

    let Some(root) = g.root() else {
        return Ok(Vec::new());
    };
    if !g.contains(root) {
        return Err(Error::UnknownNode(root));
    }

    let mut paths = Vec::with_capacity(total as usize);
    let mut stack = vec![root];
    dfs(g, &mut stack, &mut paths)?;
    Ok(paths)
}

fn dfs(g: &LaneGraph, stack: &mut Vec<NodeId>, paths: &mut Vec<NodePath>) -> Result<()> {
    let v = *stack.last().expect("stack never empty");
    let succ = g.successors(v)?;
    let succ: Vec<NodeId> = succ.into_iter().filter(|s| g.contains(*s)).collect();
    if succ.is_empty() {
        paths.push(NodePath::from(stack.clone()));
        return Ok(());
    }
    for s in succ {
        stack.push(s);
        dfs(g, stack, paths)?;
        stack.pop();
    }
    Ok(())
}

/// Materialize a path as the polyline of its node positions.
pub fn path_to_polyline(g: &LaneGraph, path: &NodePath) -> Result<Polyline> {
    let points = path
        .node_ids()
        .iter()
        .map(|&id| g.position(id))
        .collect::<Result<Vec<_>>>()?;
    Polyline::new(points)
}
