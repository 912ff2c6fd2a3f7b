//! Shared fixtures for the benchmark targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lanegraph::curve::{bezier_sample, BezierCurve, Polyline};
use lanegraph::geom::Point;
use lanegraph::graph::{Extent, LaneGraph};
use lanegraph::synth::{generate_synthetic, SyntheticSpec};

/// Random rectangular cost matrix with entries in [0, 100).
pub fn random_cost_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0.0..100.0)).collect())
        .collect()
}

/// 20 points sampled from a random degree-10 curve.
pub fn sampled_curve(seed: u64) -> Polyline {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let control: Vec<Point> = (0..=10)
        .map(|_| Point::new(rng.gen_range(0.0..256.0), rng.gen_range(0.0..256.0)))
        .collect();
    let curve = BezierCurve::new(control).expect("finite control points");
    bezier_sample(&curve, 20).expect("sample count >= 2")
}

/// A mid-sized synthetic RoI graph (8 maximal paths).
pub fn benchmark_graph(seed: u64) -> LaneGraph {
    generate_synthetic(
        seed,
        &SyntheticSpec {
            n_splits: 3,
            depth: 3,
            jitter: 3.0,
            extent: Extent::new(256, 256),
        },
    )
    .expect("valid spec")
}
