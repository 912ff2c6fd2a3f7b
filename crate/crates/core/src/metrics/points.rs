//! Point-set matching shared by GEO, TOPO, and SDA.

use crate::geom::Point;

/// Greedy one-to-one matching of `a` points to `b` points: candidate
/// pairs within `radius` are consumed closest-first. Ties break towards
/// equal indices first (which pins identical graphs to the identity
/// matching), then by ascending `(a, b)` index.
pub fn greedy_match(a: &[Point], b: &[Point], radius: f64) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let d = pa.distance(*pb);
            if d <= radius {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then_with(|| (x.1 != x.2).cmp(&(y.1 != y.2)))
            .then_with(|| x.1.cmp(&y.1))
            .then_with(|| x.2.cmp(&y.2))
    });

    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

/// Precision/recall with the empty-set conventions: an empty prediction
/// is vacuously precise, an empty ground truth vacuously recalled.
pub fn precision_recall(matched: usize, pred_total: usize, gt_total: usize) -> (f64, f64) {
    let precision = if pred_total == 0 {
        1.0
    } else {
        matched as f64 / pred_total as f64
    };
    let recall = if gt_total == 0 {
        1.0
    } else {
        matched as f64 / gt_total as f64
    };
    (precision, recall)
}
