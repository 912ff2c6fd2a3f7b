//! Bipartite matching between ground-truth paths and path proposals,
//! and the composite set loss computed over the matched pairs.
//!
//! The matching cost between one ground-truth path and one proposal is
//! the weighted sum of per-control-point Manhattan distances plus a
//! classification term on the predicted likelihood. The optimal
//! one-to-one assignment minimizing total cost is found with a shortest
//! augmenting path Hungarian solver; an exhaustive search oracle is kept
//! alongside for verification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Floor applied to logarithm arguments in the cross-entropy term so a
/// saturated likelihood on the wrong target yields a large finite loss
/// instead of infinity. Correct saturated predictions still score an
/// exact zero because their log argument is exactly 1.
pub const BCE_EPSILON: f64 = 1e-7;

/// A predicted path: existence likelihood plus control points on the
/// normalized [0, 1] scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PathProposal {
    likelihood: f64,
    control_points: Vec<Point>,
}

impl PathProposal {
    pub fn new(likelihood: f64, control_points: Vec<Point>) -> Result<Self> {
        if !(0.0..=1.0).contains(&likelihood) {
            return Err(Error::LikelihoodOutOfRange(likelihood));
        }
        check_normalized(&control_points)?;
        Ok(Self {
            likelihood,
            control_points,
        })
    }

    pub fn likelihood(&self) -> f64 {
        self.likelihood
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }
}

/// A ground-truth path in the same normalized control-point form.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthPath {
    control_points: Vec<Point>,
}

impl GroundTruthPath {
    pub fn new(control_points: Vec<Point>) -> Result<Self> {
        check_normalized(&control_points)?;
        Ok(Self { control_points })
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }
}

fn check_normalized(points: &[Point]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyControlPoints);
    }
    for p in points {
        if !p.is_finite() {
            return Err(Error::NonFiniteCoordinate);
        }
        if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
            return Err(Error::CoordinateOutOfRange { x: p.x, y: p.y });
        }
    }
    Ok(())
}

/// Weights balancing the spatial and classification cost contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl MatchWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 || beta < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "match weights must be finite with alpha > 0 and beta >= 0, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

impl Default for MatchWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// One-to-one assignment of ground-truth paths to proposals.
///
/// `pairs` is sorted by ground-truth index; `total_cost` sums the cost
/// matrix entries of the pairs in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

impl Assignment {
    pub fn proposal_for(&self, gt_index: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|(g, _)| *g == gt_index)
            .map(|(_, p)| *p)
    }

    pub fn is_matched_proposal(&self, proposal_index: usize) -> bool {
        self.pairs.iter().any(|(_, p)| *p == proposal_index)
    }
}

/// Matching cost between one ground-truth path and one proposal:
/// `sum_k alpha * ||y_k - a_k||_1 + beta * (1 - l)`.
///
/// The likelihood term enters once, not once per control point.
pub fn match_cost(gt: &GroundTruthPath, prop: &PathProposal, w: &MatchWeights) -> Result<f64> {
    let y = gt.control_points();
    let a = prop.control_points();
    if y.len() != a.len() {
        return Err(Error::ControlPointMismatch {
            gt: y.len(),
            proposal: a.len(),
        });
    }
    let spatial: f64 = y.iter().zip(a).map(|(p, q)| p.distance_l1(*q)).sum();
    Ok(w.alpha * spatial + w.beta * (1.0 - prop.likelihood()))
}

fn check_matrix(costs: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = costs.len();
    if rows == 0 {
        return Ok((0, 0));
    }
    let cols = costs[0].len();
    for (row, r) in costs.iter().enumerate() {
        if r.len() != cols {
            return Err(Error::RaggedCostMatrix {
                row,
                len: r.len(),
                expected: cols,
            });
        }
        for (col, &c) in r.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteCost { row, col });
            }
        }
    }
    if rows > cols {
        return Err(Error::TooManyGroundTruths {
            gts: rows,
            proposals: cols,
        });
    }
    Ok((rows, cols))
}

/// Total cost of `row -> column` choices summed in ascending row order.
/// Both solvers report costs through this one summation order so equal
/// assignments produce bit-equal totals.
fn canonical_total(costs: &[Vec<f64>], row_to_col: &[usize]) -> f64 {
    row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i][j])
        .sum()
}

/// Shortest-augmenting-path Hungarian step: optimal assignment of `rows`
/// rows onto `cols >= rows` columns. Returns row -> column.
fn augmenting_path_solve(costs: &[Vec<f64>], rows: usize, cols: usize) -> Vec<usize> {
    // Column `cols` is the virtual start of each augmenting search.
    let mut col_to_row: Vec<Option<usize>> = vec![None; cols + 1];
    let mut row_potential = vec![0.0f64; rows];
    let mut col_potential = vec![0.0f64; cols + 1];

    for row in 0..rows {
        let mut current = cols;
        col_to_row[current] = Some(row);
        let mut min_reduced = vec![f64::INFINITY; cols];
        let mut previous: Vec<usize> = vec![cols; cols];
        let mut visited = vec![false; cols + 1];

        while let Some(occupant) = col_to_row[current] {
            visited[current] = true;
            let mut delta = f64::INFINITY;
            let mut next = cols;
            for col in 0..cols {
                if visited[col] {
                    continue;
                }
                let reduced = costs[occupant][col] - row_potential[occupant] - col_potential[col];
                if reduced < min_reduced[col] {
                    min_reduced[col] = reduced;
                    previous[col] = current;
                }
                if min_reduced[col] < delta {
                    delta = min_reduced[col];
                    next = col;
                }
            }
            debug_assert!(delta.is_finite(), "augmenting search exhausted all columns");
            for col in 0..=cols {
                if visited[col] {
                    if let Some(r) = col_to_row[col] {
                        row_potential[r] += delta;
                    }
                    col_potential[col] -= delta;
                } else {
                    min_reduced[col] -= delta;
                }
            }
            current = next;
        }

        while current != cols {
            let prev = previous[current];
            col_to_row[current] = col_to_row[prev];
            current = prev;
        }
    }

    let mut row_to_col = vec![usize::MAX; rows];
    for (col, row) in col_to_row.iter().enumerate().take(cols) {
        if let Some(r) = *row {
            row_to_col[r] = col;
        }
    }
    debug_assert!(row_to_col.iter().all(|&c| c != usize::MAX));
    row_to_col
}

/// Optimal assignment minimizing total cost over a `|Y| x n_Q` matrix
/// with `n_Q >= |Y|`. Every ground-truth row is matched.
///
/// When several assignments share the optimal cost, the lexicographically
/// smallest pair list is returned: after the solve, each row in turn is
/// pinned to the smallest column that still completes to the optimal
/// total (exact comparison, which is decisive for the integer-valued
/// matrices where ties actually occur).
pub fn hungarian(costs: &[Vec<f64>]) -> Result<Assignment> {
    let (rows, cols) = check_matrix(costs)?;
    if rows == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
        });
    }

    let mut witness = augmenting_path_solve(costs, rows, cols);
    let optimal = canonical_total(costs, &witness);

    for row in 0..rows {
        let fixed: Vec<usize> = witness[..row].to_vec();
        for col in 0..cols {
            if fixed.contains(&col) {
                continue;
            }
            if col >= witness[row] {
                break; // the witness column already achieves the optimum
            }
            if let Some(candidate) = complete_assignment(costs, rows, cols, &fixed, row, col) {
                if canonical_total(costs, &candidate) == optimal {
                    witness = candidate;
                    break;
                }
            }
        }
    }

    Ok(Assignment {
        pairs: witness.iter().copied().enumerate().collect(),
        total_cost: canonical_total(costs, &witness),
    })
}

/// Re-solve the assignment with rows `0..=row` pinned; returns the full
/// row -> column vector, or None when no completion exists.
fn complete_assignment(
    costs: &[Vec<f64>],
    rows: usize,
    cols: usize,
    fixed: &[usize],
    row: usize,
    col: usize,
) -> Option<Vec<usize>> {
    let used: Vec<usize> = fixed.iter().copied().chain([col]).collect();
    let free_rows: Vec<usize> = (row + 1..rows).collect();
    let free_cols: Vec<usize> = (0..cols).filter(|c| !used.contains(c)).collect();
    if free_rows.len() > free_cols.len() {
        return None;
    }

    let mut full = Vec::with_capacity(rows);
    full.extend_from_slice(&used);
    if !free_rows.is_empty() {
        let sub: Vec<Vec<f64>> = free_rows
            .iter()
            .map(|&r| free_cols.iter().map(|&c| costs[r][c]).collect())
            .collect();
        let sub_solution = augmenting_path_solve(&sub, free_rows.len(), free_cols.len());
        full.extend(sub_solution.into_iter().map(|j| free_cols[j]));
    }
    Some(full)
}

/// Maximum number of ground-truth rows the exhaustive solver accepts.
pub const BRUTE_FORCE_MAX_ROWS: usize = 8;

/// Exhaustive assignment search: walks every injective row -> column map
/// in lexicographic order (with a row-minima bound to skip provably
/// worse branches) and keeps the first strictly best one, which makes
/// ties resolve to the lexicographically smallest pair list.
pub fn brute_force_assignment(costs: &[Vec<f64>]) -> Result<Assignment> {
    let (rows, cols) = check_matrix(costs)?;
    if rows > BRUTE_FORCE_MAX_ROWS {
        return Err(Error::BruteForceTooLarge {
            got: rows,
            max: BRUTE_FORCE_MAX_ROWS,
        });
    }
    if rows == 0 {
        return Ok(Assignment {
            pairs: Vec::new(),
            total_cost: 0.0,
        });
    }

    // Lower bound on the cost contributed by rows i.. regardless of
    // which columns remain available.
    let row_min: Vec<f64> = costs
        .iter()
        .map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let mut suffix_bound = vec![0.0; rows + 1];
    for i in (0..rows).rev() {
        suffix_bound[i] = suffix_bound[i + 1] + row_min[i];
    }

    struct Search<'a> {
        costs: &'a [Vec<f64>],
        rows: usize,
        cols: usize,
        suffix_bound: &'a [f64],
        used: Vec<bool>,
        chosen: Vec<usize>,
        best_cost: f64,
        best: Vec<usize>,
    }

    impl Search<'_> {
        fn run(&mut self, row: usize, partial: f64) {
            if row == self.rows {
                if partial < self.best_cost {
                    self.best_cost = partial;
                    self.best = self.chosen.clone();
                }
                return;
            }
            if partial + self.suffix_bound[row] > self.best_cost {
                return;
            }
            for col in 0..self.cols {
                if self.used[col] {
                    continue;
                }
                self.used[col] = true;
                self.chosen.push(col);
                self.run(row + 1, partial + self.costs[row][col]);
                self.chosen.pop();
                self.used[col] = false;
            }
        }
    }

    let mut search = Search {
        costs,
        rows,
        cols,
        suffix_bound: &suffix_bound,
        used: vec![false; cols],
        chosen: Vec::with_capacity(rows),
        best_cost: f64::INFINITY,
        best: Vec::new(),
    };
    search.run(0, 0.0);

    let best = search.best;
    Ok(Assignment {
        total_cost: canonical_total(costs, &best),
        pairs: best.into_iter().enumerate().collect(),
    })
}

/// Composite loss over a matched set of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SetLoss {
    pub total: f64,
    pub regression: f64,
    pub classification: f64,
    pub assignment: Assignment,
}

/// Match the ground-truth set against the proposal set and compute the
/// composite loss.
///
/// The regression term sums, over matched pairs, the mean squared error
/// across all `2 * n_cp` control-point coordinates (the mean keeps the
/// magnitude independent of the control-point count). The classification
/// term is binary cross-entropy over all proposals with target 1 for
/// matched and 0 for unmatched ones.
pub fn set_loss(
    gts: &[GroundTruthPath],
    props: &[PathProposal],
    w: &MatchWeights,
) -> Result<SetLoss> {
    if gts.len() > props.len() {
        return Err(Error::TooManyGroundTruths {
            gts: gts.len(),
            proposals: props.len(),
        });
    }
    if let Some(n_cp) = gts
        .iter()
        .map(|g| g.control_points().len())
        .chain(props.iter().map(|p| p.control_points().len()))
        .next()
    {
        for g in gts {
            if g.control_points().len() != n_cp {
                return Err(Error::ControlPointMismatch {
                    gt: g.control_points().len(),
                    proposal: n_cp,
                });
            }
        }
        for p in props {
            if p.control_points().len() != n_cp {
                return Err(Error::ControlPointMismatch {
                    gt: n_cp,
                    proposal: p.control_points().len(),
                });
            }
        }
    }

    let costs: Vec<Vec<f64>> = gts
        .iter()
        .map(|gt| {
            props
                .iter()
                .map(|prop| match_cost(gt, prop, w))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let assignment = hungarian(&costs)?;

    let mut regression = 0.0;
    for &(gt_index, prop_index) in &assignment.pairs {
        let y = gts[gt_index].control_points();
        let a = props[prop_index].control_points();
        let sq_sum: f64 = y
            .iter()
            .zip(a)
            .map(|(p, q)| (p.x - q.x).powi(2) + (p.y - q.y).powi(2))
            .sum();
        regression += sq_sum / (2 * y.len()) as f64;
    }

    let mut classification = 0.0;
    for (j, prop) in props.iter().enumerate() {
        let l = prop.likelihood();
        classification += if assignment.is_matched_proposal(j) {
            -(l.max(BCE_EPSILON).ln())
        } else {
            -((1.0 - l).max(BCE_EPSILON).ln())
        };
    }

    Ok(SetLoss {
        total: w.alpha * regression + w.beta * classification,
        regression,
        classification,
        assignment,
    })
}
