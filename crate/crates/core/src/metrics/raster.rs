//! Image-based graph IoU.
//!
//! Both graphs are drawn into binary masks by dilating every reachable
//! edge segment to `lane_halfwidth`, then compared pixel-wise. A pixel
//! belongs to the mask when its center lies within the halfwidth of any
//! segment.

use crate::geom::{point_segment_distance, Point};
use crate::graph::LaneGraph;

use super::MetricConfig;

/// Rasterize the reachable edges of `g` into a row-major `w * h` mask.
/// Nodes outside the raster extent are clipped; a warning is logged.
pub fn rasterize_mask(g: &LaneGraph, cfg: &MetricConfig) -> Vec<bool> {
    let w = cfg.raster_extent.width as usize;
    let h = cfg.raster_extent.height as usize;
    let hw = cfg.lane_halfwidth;
    assert!(hw > 0.0 && hw.is_finite(), "lane_halfwidth must be positive");
    let mut mask = vec![false; w * h];

    let reachable = g.reachable_nodes();
    let clipped = reachable.iter().any(|&id| {
        let p = g.position(id).expect("reachable node exists");
        p.x < 0.0 || p.y < 0.0 || p.x > w as f64 || p.y > h as f64
    });
    if clipped {
        log::warn!("rasterize: node(s) outside the {}x{} raster extent are clipped", w, h);
    }

    for (src, dst) in g.reachable_edges() {
        let a = g.position(src).expect("edge endpoint exists");
        let b = g.position(dst).expect("edge endpoint exists");
        let x_lo = ((a.x.min(b.x) - hw - 1.0).floor().max(0.0)) as usize;
        let x_hi = ((a.x.max(b.x) + hw + 1.0).ceil().min(w as f64)) as usize;
        let y_lo = ((a.y.min(b.y) - hw - 1.0).floor().max(0.0)) as usize;
        let y_hi = ((a.y.max(b.y) + hw + 1.0).ceil().min(h as f64)) as usize;
        for py in y_lo..y_hi {
            for px in x_lo..x_hi {
                if mask[py * w + px] {
                    continue;
                }
                let center = Point::new(px as f64 + 0.5, py as f64 + 0.5);
                if point_segment_distance(center, a, b) <= hw {
                    mask[py * w + px] = true;
                }
            }
        }
    }
    mask
}

/// Intersection-over-union of the two rasterized masks. Two empty masks
/// count as identical (1.0); one empty mask against a non-empty one
/// scores 0.0.
pub fn graph_iou(pred: &LaneGraph, gt: &LaneGraph, cfg: &MetricConfig) -> f64 {
    let pred_mask = rasterize_mask(pred, cfg);
    let gt_mask = rasterize_mask(gt, cfg);
    let mut intersection = 0u64;
    let mut union = 0u64;
    for (p, g) in pred_mask.iter().zip(&gt_mask) {
        if *p && *g {
            intersection += 1;
        }
        if *p || *g {
            union += 1;
        }
    }
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}
