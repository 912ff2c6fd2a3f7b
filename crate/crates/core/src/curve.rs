//! Polyline and Bézier path representations.
//!
//! Paths decomposed from a lane graph can be carried either as piecewise
//! linear polylines or as Bézier curves over the Bernstein basis. This
//! module provides evaluation (De Casteljau recursion, stable up to the
//! degree-10 default), uniform-parameter sampling, arc-length resampling,
//! and an endpoint-clamped least-squares fit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Default Bézier degree for path representation.
pub const DEFAULT_BEZIER_DEGREE: usize = 10;
/// Default number of polyline sample points.
pub const DEFAULT_POLYLINE_POINTS: usize = 20;

/// Piecewise-linear path through at least two points with positive
/// total arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::PolylineTooShort(points.len()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        let line = Self { points };
        if line.arc_length() <= 0.0 {
            return Err(Error::DegeneratePolyline);
        }
        Ok(line)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        *self.points.last().expect("polyline is never empty")
    }

    /// Cumulative arc length at every vertex; starts at 0.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.points.len());
        let mut total = 0.0;
        cum.push(0.0);
        for pair in self.points.windows(2) {
            total += pair[0].distance(pair[1]);
            cum.push(total);
        }
        cum
    }

    pub fn arc_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|pair| pair[0].distance(pair[1]))
            .sum()
    }
}

/// Bézier curve of degree `control_points.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierCurve {
    control_points: Vec<Point>,
}

impl BezierCurve {
    pub fn new(control_points: Vec<Point>) -> Result<Self> {
        if control_points.len() < 2 {
            return Err(Error::TooFewControlPoints(control_points.len()));
        }
        if control_points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(Self { control_points })
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }

    pub fn degree(&self) -> usize {
        self.control_points.len() - 1
    }

    /// Control points of the derivative curve (degree n-1).
    fn derivative(&self) -> Vec<Point> {
        let n = self.degree() as f64;
        self.control_points
            .windows(2)
            .map(|pair| (pair[1] - pair[0]) * n)
            .collect()
    }
}

/// Bernstein basis polynomial `B_{i,n}(t) = C(n,i) t^i (1-t)^(n-i)`.
pub fn bernstein(i: usize, n: usize, t: f64) -> Result<f64> {
    if i > n {
        return Err(Error::BernsteinIndex { i, n });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfDomain(t));
    }
    Ok(binomial(n, i) * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32))
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

fn de_casteljau(control: &[Point], t: f64) -> Point {
    let mut pts = control.to_vec();
    for level in (1..pts.len()).rev() {
        for i in 0..level {
            // (1-t)*a + t*b keeps both endpoints exact.
            pts[i] = pts[i] * (1.0 - t) + pts[i + 1] * t;
        }
    }
    pts[0]
}

/// Evaluate the curve at `t` in [0, 1] via the De Casteljau recursion.
/// The endpoints are reproduced exactly: `t=0` yields the first control
/// point and `t=1` the last.
pub fn bezier_eval(curve: &BezierCurve, t: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ParameterOutOfDomain(t));
    }
    Ok(de_casteljau(curve.control_points(), t))
}

/// Sample `k >= 2` points at uniform parameter values `t = j / (k-1)`.
pub fn bezier_sample(curve: &BezierCurve, k: usize) -> Result<Polyline> {
    if k < 2 {
        return Err(Error::SampleCountTooSmall(k));
    }
    let points = (0..k)
        .map(|j| de_casteljau(curve.control_points(), j as f64 / (k - 1) as f64))
        .collect();
    Polyline::new(points)
}

/// Resample `p` to `k >= 2` points equally spaced by arc length along `p`.
/// The first and last points are preserved exactly.
pub fn resample_polyline(p: &Polyline, k: usize) -> Result<Polyline> {
    if k < 2 {
        return Err(Error::SampleCountTooSmall(k));
    }
    let cum = p.cumulative_lengths();
    let total = *cum.last().expect("cumulative lengths never empty");
    let pts = p.points();

    let mut out = Vec::with_capacity(k);
    out.push(p.first());
    let mut seg = 0usize;
    for j in 1..k - 1 {
        let target = total * j as f64 / (k - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < target {
            seg += 1;
        }
        let seg_len = cum[seg + 1] - cum[seg];
        let u = if seg_len > 0.0 {
            (target - cum[seg]) / seg_len
        } else {
            0.0
        };
        out.push(pts[seg] * (1.0 - u) + pts[seg + 1] * u);
    }
    out.push(p.last());
    Polyline::new(out)
}

/// Result of a least-squares Bézier fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierFit {
    pub curve: BezierCurve,
    /// Root-mean-square distance between the input points and the curve
    /// at the fitted parameter values.
    pub rmse: f64,
}

const FIT_MAX_ITERS: usize = 24;
const FIT_COARSE_SAMPLES: usize = 256;
const FIT_NEWTON_STEPS: usize = 4;
const FIT_RANK_TOL: f64 = 1e-12;

/// Fit a degree-`degree` Bézier curve to the points of `p`.
///
/// The endpoints are hard-constrained to the polyline's endpoints and the
/// interior control points solve the linear least-squares system under
/// chord-length parameter assignment. Because chord length only
/// approximates the curve's own parameterization, the fit is refined by
/// alternating reprojection of the parameters (nearest point on the
/// current curve) with re-solving; a uniform-parameter start is tried as
/// well and the lower-residual result wins. This makes sample-then-fit
/// round trips reproduce the original control points to machine-level
/// accuracy whenever the data lies on a curve of the requested degree.
pub fn fit_bezier(p: &Polyline, degree: usize) -> Result<BezierFit> {
    if degree < 1 {
        return Err(Error::InvalidConfig("fit degree must be >= 1".into()));
    }
    let pts = p.points();
    if pts.len() < degree + 1 {
        return Err(Error::UnderdeterminedFit {
            points: pts.len(),
            degree,
        });
    }

    let chord = chord_parameters(p);
    // The chord-length system decides degeneracy: if it collapses, the
    // input itself is degenerate for this degree.
    let first = solve_clamped(pts, &chord, degree)?;
    let mut best = refine(pts, first, chord, degree);

    let m = pts.len();
    let uniform: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1) as f64).collect();
    if let Ok(start) = solve_clamped(pts, &uniform, degree) {
        let candidate = refine(pts, start, uniform, degree);
        if candidate.rmse < best.rmse {
            best = candidate;
        }
    }

    Ok(best)
}

fn chord_parameters(p: &Polyline) -> Vec<f64> {
    let cum = p.cumulative_lengths();
    let total = *cum.last().expect("cumulative lengths never empty");
    let mut params: Vec<f64> = cum.into_iter().map(|c| c / total).collect();
    params[0] = 0.0;
    let last = params.len() - 1;
    params[last] = 1.0;
    params
}

fn refine(pts: &[Point], start: BezierFit, mut params: Vec<f64>, degree: usize) -> BezierFit {
    let scale = bounding_diagonal(pts).max(1e-300);
    let mut best = start;
    for _ in 0..FIT_MAX_ITERS {
        if best.rmse <= scale * 1e-14 {
            break;
        }
        reproject_parameters(pts, &best.curve, &mut params);
        match solve_clamped(pts, &params, degree) {
            Ok(fit) if fit.rmse < best.rmse => best = fit,
            Ok(_) => break,
            Err(_) => break,
        }
    }
    best
}

fn bounding_diagonal(pts: &[Point]) -> f64 {
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    (max_x - min_x).hypot(max_y - min_y)
}

/// Solve the endpoint-clamped least-squares system for the interior
/// control points at fixed parameter values.
fn solve_clamped(pts: &[Point], params: &[f64], degree: usize) -> Result<BezierFit> {
    let m = pts.len();
    let n = degree;
    let first = pts[0];
    let last = pts[m - 1];

    if n == 1 {
        let curve = BezierCurve::new(vec![first, last])?;
        return Ok(BezierFit {
            rmse: rms_distance(pts, params, &curve),
            curve,
        });
    }

    // Basis rows; interior columns 1..n form the LS matrix, the clamped
    // endpoint columns move to the right-hand side.
    let mut a = DMatrix::zeros(m, n - 1);
    let mut rhs = DMatrix::zeros(m, 2);
    for (row, (&t, pt)) in params.iter().zip(pts).enumerate() {
        let b0 = bernstein(0, n, t)?;
        let bn = bernstein(n, n, t)?;
        for j in 1..n {
            a[(row, j - 1)] = bernstein(j, n, t)?;
        }
        rhs[(row, 0)] = pt.x - b0 * first.x - bn * last.x;
        rhs[(row, 1)] = pt.y - b0 * first.y - bn * last.y;
    }

    let svd = a.svd(true, true);
    let sv_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sv_max <= 0.0
        || svd
            .singular_values
            .iter()
            .any(|&s| s < sv_max * FIT_RANK_TOL)
    {
        return Err(Error::RankDeficientFit);
    }
    let solution = svd
        .solve(&rhs, sv_max * FIT_RANK_TOL)
        .map_err(|_| Error::RankDeficientFit)?;

    let mut control = Vec::with_capacity(n + 1);
    control.push(first);
    for j in 0..n - 1 {
        control.push(Point::new(solution[(j, 0)], solution[(j, 1)]));
    }
    control.push(last);
    let curve = BezierCurve::new(control)?;
    Ok(BezierFit {
        rmse: rms_distance(pts, params, &curve),
        curve,
    })
}

fn rms_distance(pts: &[Point], params: &[f64], curve: &BezierCurve) -> f64 {
    let sum: f64 = pts
        .iter()
        .zip(params)
        .map(|(p, &t)| {
            let c = de_casteljau(curve.control_points(), t);
            let d = c.distance(*p);
            d * d
        })
        .sum();
    (sum / pts.len() as f64).sqrt()
}

/// Move each interior parameter to the (approximate) nearest point of the
/// curve: coarse scan for a bracket, then a few Newton steps on the
/// squared-distance derivative.
fn reproject_parameters(pts: &[Point], curve: &BezierCurve, params: &mut [f64]) {
    let control = curve.control_points();
    let d1 = curve.derivative();
    let d2: Vec<Point> = if d1.len() >= 2 {
        let n1 = (d1.len() - 1) as f64;
        d1.windows(2).map(|w| (w[1] - w[0]) * n1).collect()
    } else {
        Vec::new()
    };

    let coarse: Vec<Point> = (0..FIT_COARSE_SAMPLES)
        .map(|j| de_casteljau(control, j as f64 / (FIT_COARSE_SAMPLES - 1) as f64))
        .collect();

    let last = params.len() - 1;
    for (i, p) in pts.iter().enumerate() {
        if i == 0 || i == last {
            continue;
        }
        let mut t = {
            let mut best_j = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in coarse.iter().enumerate() {
                let d = c.distance(*p);
                if d < best_d {
                    best_d = d;
                    best_j = j;
                }
            }
            best_j as f64 / (FIT_COARSE_SAMPLES - 1) as f64
        };
        for _ in 0..FIT_NEWTON_STEPS {
            let c = de_casteljau(control, t);
            let cd = if d1.is_empty() {
                Point::new(0.0, 0.0)
            } else {
                de_casteljau(&d1, t)
            };
            let cdd = if d2.is_empty() {
                Point::new(0.0, 0.0)
            } else {
                de_casteljau(&d2, t)
            };
            let diff = c - *p;
            let numer = diff.dot(cd);
            let denom = diff.dot(cdd) + cd.dot(cd);
            if denom == 0.0 {
                break;
            }
            t = (t - numer / denom).clamp(0.0, 1.0);
        }
        params[i] = t;
    }
    params[0] = 0.0;
    params[last] = 1.0;
}
