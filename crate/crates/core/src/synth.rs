//! Seeded synthetic successor lane graphs for tests and benchmarks.
//!
//! Generated graphs mimic the shape of real RoI ground truth: the root
//! sits at the bottom center and lanes grow upward, forking at binary
//! split levels. The same seed always produces the same graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::graph::{Extent, LaneGraph, Node, NodeId};

/// Shape parameters for the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    /// Number of binary split levels; the graph decomposes into exactly
    /// `2^n_splits` maximal paths.
    pub n_splits: u32,
    /// Chain segments between the root, each split, and the terminals.
    pub depth: u32,
    /// Lateral position noise amplitude in pixels.
    pub jitter: f64,
    /// RoI size; the root is placed at its bottom center.
    pub extent: Extent,
}

impl SyntheticSpec {
    pub fn check(&self) -> Result<()> {
        if self.n_splits > 6 {
            return Err(Error::DegenerateSpec(format!(
                "n_splits {} would generate {} paths; limit is 6 levels",
                self.n_splits,
                1u64 << self.n_splits
            )));
        }
        if self.depth == 0 {
            return Err(Error::DegenerateSpec("depth must be >= 1".into()));
        }
        if !self.jitter.is_finite() || self.jitter < 0.0 {
            return Err(Error::DegenerateSpec(format!(
                "jitter must be finite and >= 0, got {}",
                self.jitter
            )));
        }
        if self.extent.width < 16 || self.extent.height < 16 {
            return Err(Error::DegenerateSpec(format!(
                "extent {} is too small to place lanes",
                self.extent
            )));
        }
        Ok(())
    }
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_splits: 1,
            depth: 3,
            jitter: 2.0,
            extent: Extent::new(256, 256),
        }
    }
}

/// Generate a valid DAG rooted at the bottom center of the extent.
/// Deterministic per seed.
pub fn generate_synthetic(seed: u64, spec: &SyntheticSpec) -> Result<LaneGraph> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let width = f64::from(spec.extent.width);
    let height = f64::from(spec.extent.height);
    let levels = spec.n_splits + 1;
    let total_segments = (levels * spec.depth) as f64;
    let y_top = height * 0.05;
    let y_step = (height - y_top) / total_segments;

    let mut nodes = vec![Node {
        id: NodeId(0),
        pos: spec.extent.bottom_center(),
    }];
    let mut edges = Vec::new();

    // Each branch owns a horizontal corridor; children halve it.
    struct Branch {
        parent: u64,
        corridor: (f64, f64),
        y: f64,
        level: u32,
    }
    let mut stack = vec![Branch {
        parent: 0,
        corridor: (0.0, width),
        y: height,
        level: 0,
    }];

    while let Some(branch) = stack.pop() {
        let mut parent = branch.parent;
        let mut y = branch.y;
        let center = (branch.corridor.0 + branch.corridor.1) / 2.0;
        let margin = (branch.corridor.1 - branch.corridor.0) * 0.1;
        for _ in 0..spec.depth {
            y -= y_step;
            let wobble = if spec.jitter > 0.0 {
                rng.gen_range(-spec.jitter..=spec.jitter)
            } else {
                0.0
            };
            let x = (center + wobble)
                .clamp(branch.corridor.0 + margin, branch.corridor.1 - margin)
                .clamp(1.0, width - 1.0);
            let id = nodes.len() as u64;
            nodes.push(Node {
                id: NodeId(id),
                pos: Point::new(x, y.max(0.0)),
            });
            edges.push((NodeId(parent), NodeId(id)));
            parent = id;
        }
        if branch.level < spec.n_splits {
            let mid = (branch.corridor.0 + branch.corridor.1) / 2.0;
            // Push right first so the left child gets smaller node ids.
            stack.push(Branch {
                parent,
                corridor: (mid, branch.corridor.1),
                y,
                level: branch.level + 1,
            });
            stack.push(Branch {
                parent,
                corridor: (branch.corridor.0, mid),
                y,
                level: branch.level + 1,
            });
        }
    }

    let graph = LaneGraph::assemble(nodes, edges, Some(NodeId(0)), Some(spec.extent));
    debug_assert!(graph.validate().is_ok());
    Ok(graph)
}
