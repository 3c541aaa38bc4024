//! Earth mover's distance between equal-size point sets as a minimum-cost
//! perfect matching.

use super::MetricError;
use crate::mesh::{PointSet, Vec3};
use serde::{Deserialize, Serialize};

/// Largest size solved exactly when the solver is [`EmdSolver::Auto`].
pub const EXACT_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundDistance {
    /// Manhattan distance.
    #[default]
    L1,
    /// Euclidean distance.
    L2,
}

impl GroundDistance {
    #[inline]
    pub fn eval(self, a: &Vec3, b: &Vec3) -> f64 {
        match self {
            Self::L1 => (a - b).abs().sum(),
            Self::L2 => (a - b).norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmdSolver {
    /// Hungarian up to [`EXACT_LIMIT`] points, auction above.
    #[default]
    Auto,
    Hungarian,
    Auction,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmdOptions {
    pub ground: GroundDistance,
    pub solver: EmdSolver,
}

/// Mean matched L1 distance under the optimal bijection.
pub fn emd(a: &PointSet, b: &PointSet) -> Result<f64, MetricError> {
    emd_with(a, b, EmdOptions::default())
}

pub fn emd_with(a: &PointSet, b: &PointSet, opts: EmdOptions) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    if a.len() != b.len() {
        return Err(MetricError::SizeMismatch(a.len(), b.len()));
    }
    let k = a.len();
    let cost = |i: usize, j: usize| opts.ground.eval(&a.points[i], &b.points[j]);
    let exact = match opts.solver {
        EmdSolver::Auto => k <= EXACT_LIMIT,
        EmdSolver::Hungarian => true,
        EmdSolver::Auction => false,
    };
    let assignment = if exact {
        hungarian(k, cost)
    } else {
        auction(k, cost)
    };
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
    Ok(total / k as f64)
}

/// Exact minimum-cost assignment (shortest augmenting paths with
/// potentials, O(n^3)). Returns the column assigned to each row.
pub fn hungarian(n: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let c: Vec<f64> = (0..n * n).map(|k| cost(k / n, k % n)).collect();
    // 1-based rows/columns; column 0 is the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|u| *u = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            let row = &c[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}

/// Relative optimality gap the auction targets: the final epsilon is chosen
/// so `n * eps` stays below this fraction of a lower bound on the optimum.
const AUCTION_GAP: f64 = 0.005;
const EPS_FACTOR: f64 = 6.0;

/// Gauss-Seidel forward auction with epsilon scaling. The result costs at
/// most `n * eps_final` more than the optimum.
pub fn auction(n: usize, cost: impl Fn(usize, usize) -> f64 + Sync) -> Vec<usize> {
    if n == 1 {
        return vec![0];
    }
    // lower bound on the optimum: every row pays at least its cheapest entry
    let mut row_min_sum = 0.0;
    let mut col_min = vec![f64::INFINITY; n];
    let mut max_cost: f64 = 0.0;
    for i in 0..n {
        let mut rmin = f64::INFINITY;
        for (j, cm) in col_min.iter_mut().enumerate() {
            let c = cost(i, j);
            rmin = rmin.min(c);
            *cm = cm.min(c);
            max_cost = max_cost.max(c);
        }
        row_min_sum += rmin;
    }
    let lower = row_min_sum.max(col_min.iter().sum());
    if max_cost == 0.0 {
        return (0..n).collect();
    }
    let eps_final = if lower > 0.0 {
        AUCTION_GAP * lower / n as f64
    } else {
        1e-9 * max_cost / n as f64
    };

    let mut price = vec![0.0; n];
    let mut owner = vec![usize::MAX; n];
    let mut assigned = vec![usize::MAX; n];
    let mut eps = (max_cost / 4.0).max(eps_final);
    loop {
        owner.iter_mut().for_each(|o| *o = usize::MAX);
        assigned.iter_mut().for_each(|a| *a = usize::MAX);
        let mut unassigned: Vec<usize> = (0..n).rev().collect();
        while let Some(i) = unassigned.pop() {
            // benefit of object j for person i is -cost - price
            let mut best = f64::NEG_INFINITY;
            let mut second = f64::NEG_INFINITY;
            let mut best_j = 0;
            for j in 0..n {
                let value = -cost(i, j) - price[j];
                if value > best {
                    second = best;
                    best = value;
                    best_j = j;
                } else if value > second {
                    second = value;
                }
            }
            price[best_j] += best - second + eps;
            let prev = owner[best_j];
            owner[best_j] = i;
            assigned[i] = best_j;
            if prev != usize::MAX {
                assigned[prev] = usize::MAX;
                unassigned.push(prev);
            }
        }
        if eps <= eps_final {
            break;
        }
        eps = (eps / EPS_FACTOR).max(eps_final);
    }
    assigned
}
