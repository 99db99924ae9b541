//! Ensemble distance matrices and the discrete Kantorovich problem.
//!
//! [`solve_transport`] runs the transportation simplex: a north-west-corner
//! basis, dual potentials from the basis tree, and pivots chosen by Bland's
//! smallest-index rule for both the entering and the leaving cell, which rules
//! out cycling on degenerate bases. Row `i` ships `n w_i`, every column receives
//! exactly 1.

use crate::euler::FlowState;
use crate::exec::{self, Backend};
use crate::{Error, Result};

/// Tolerance on `sum w = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        if let Some(bad) = w.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("weight {bad} is not a finite nonnegative number")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {sum}")));
        }
        Ok(WeightVector(w))
    }

    /// Normalizes nonnegative scores; fails if all are zero.
    pub fn normalized(scores: Vec<f64>) -> Result<Self> {
        let sum: f64 = scores.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::AllZeroLikelihood);
        }
        WeightVector::new(scores.into_iter().map(|s| s / sum).collect())
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&w| w == self.0[0])
    }

    /// Effective sample size `1 / sum w^2`.
    pub fn effective_size(&self) -> f64 {
        1.0 / self.0.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Euclidean distances between flattened particle states.
pub fn distance_matrix(particles: &[FlowState], backend: Backend) -> Result<Vec<Vec<f64>>> {
    let n = particles.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 particles, got {n}")));
    }
    if particles.iter().any(|p| p.grid() != particles[0].grid()) {
        return Err(Error::InvalidInput("particles live on different grids".into()));
    }
    let upper = exec::map_range(backend, n, |i| {
        (i + 1..n)
            .map(|j| {
                particles[i]
                    .flat()
                    .zip(particles[j].flat())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect::<Vec<f64>>()
    });
    let mut d = vec![vec![0.0; n]; n];
    for (i, row) in upper.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            d[i][i + 1 + k] = v;
            d[i + 1 + k][i] = v;
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    n: usize,
    /// Row-major `n × n`.
    matrix: Vec<f64>,
    objective: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    pivots: usize,
}

impl TransportPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Row and column dual potentials certifying optimality.
    pub fn duals(&self) -> (&[f64], &[f64]) {
        (&self.u, &self.v)
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == if i == j { 1.0 } else { 0.0 }))
    }

    pub fn nonzeros(&self) -> usize {
        self.matrix.iter().filter(|&&t| t > 0.0).count()
    }
}

struct Simplex<'a> {
    n: usize,
    cost: &'a [Vec<f64>],
    x: Vec<f64>,
    basic: Vec<bool>,
}

impl Simplex<'_> {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Duals with `u_0 = 0`, propagated over the basis tree.
    fn duals(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut u = vec![f64::NAN; n];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut stack = vec![(true, 0usize)];
        while let Some((is_row, k)) = stack.pop() {
            for other in 0..n {
                let (i, j) = if is_row { (k, other) } else { (other, k) };
                if !self.basic[self.idx(i, j)] {
                    continue;
                }
                if is_row && v[j].is_nan() {
                    v[j] = self.cost[i][j] - u[i];
                    stack.push((false, j));
                } else if !is_row && u[i].is_nan() {
                    u[i] = self.cost[i][j] - v[j];
                    stack.push((true, i));
                }
            }
        }
        (u, v)
    }

    /// Tree path from column `c` to row `r` as a list of cells.
    fn tree_path(&self, r: usize, c: usize) -> Vec<(usize, usize)> {
        let n = self.n;
        // nodes: rows 0..n, columns n..2n
        let mut parent: Vec<Option<usize>> = vec![None; 2 * n];
        let start = n + c;
        let mut seen = vec![false; 2 * n];
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            if node == r {
                break;
            }
            for other in 0..n {
                let (i, j, next) = if node < n { (node, other, n + other) } else { (other, node - n, other) };
                if self.basic[self.idx(i, j)] && !seen[next] {
                    seen[next] = true;
                    parent[next] = Some(node);
                    queue.push_back(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = r;
        while let Some(p) = parent[node] {
            let cell = if node < n { (node, p - n) } else { (p, node - n) };
            cells.push(cell);
            node = p;
        }
        cells.reverse();
        cells
    }
}

fn north_west_corner(n: usize, supply: &[f64]) -> (Vec<f64>, Vec<bool>) {
    let mut s = supply.to_vec();
    let mut d = vec![1.0f64; n];
    let mut x = vec![0.0; n * n];
    let mut basic = vec![false; n * n];
    let (mut i, mut j) = (0, 0);
    loop {
        let k = i * n + j;
        basic[k] = true;
        if i == n - 1 && j == n - 1 {
            x[k] = d[j].max(0.0);
            break;
        }
        let row_done = j == n - 1 || (i < n - 1 && s[i] <= d[j]);
        if row_done {
            x[k] = s[i].min(d[j]).max(0.0);
            d[j] -= x[k];
            s[i] = 0.0;
            i += 1;
        } else {
            x[k] = d[j];
            s[i] -= d[j];
            d[j] = 0.0;
            j += 1;
        }
    }
    (x, basic)
}

/// Optimal plan with column sums 1 and row sums `n w_i`.
pub fn solve_transport(cost: &[Vec<f64>], weights: &WeightVector) -> Result<TransportPlan> {
    let n = weights.len();
    if cost.len() != n || cost.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("cost matrix is not {n}x{n}")));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("cost matrix has non-finite entries".into()));
    }
    let supply: Vec<f64> = weights.as_slice().iter().map(|w| n as f64 * w).collect();
    let (x, basic) = north_west_corner(n, &supply);
    let mut sx = Simplex { n, cost, x, basic };

    let scale = cost.iter().flatten().fold(1.0f64, |m, c| m.max(c.abs()));
    let tol = 1e-12 * scale;
    let max_pivots = 50 * n * n * n + 1000;
    let mut pivots = 0;
    loop {
        let (u, v) = sx.duals();
        let entering = (0..n * n).find(|&k| {
            let (i, j) = (k / n, k % n);
            !sx.basic[k] && cost[i][j] - u[i] - v[j] < -tol
        });
        let Some(k) = entering else {
            let mut matrix = sx.x;
            for t in &mut matrix {
                if *t < 0.0 {
                    *t = 0.0;
                }
            }
            let objective = (0..n * n).map(|k| matrix[k] * cost[k / n][k % n]).sum();
            return Ok(TransportPlan {
                n,
                matrix,
                objective,
                u,
                v,
                pivots,
            });
        };
        if pivots == max_pivots {
            return Err(Error::TransportNotConverged(pivots));
        }
        pivots += 1;

        let (r, c) = (k / n, k % n);
        // cycle: entering cell (+), then path cells alternating -, +, ...
        let path = sx.tree_path(r, c);
        let minus: Vec<(usize, usize)> = path.iter().copied().step_by(2).collect();
        let theta = minus.iter().map(|&(i, j)| sx.x[sx.idx(i, j)]).fold(f64::INFINITY, f64::min);
        let leaving = minus
            .iter()
            .map(|&(i, j)| sx.idx(i, j))
            .filter(|&m| sx.x[m] == theta)
            .min()
            .expect("cycle has a minus cell");
        for (step, &(i, j)) in path.iter().enumerate() {
            let m = sx.idx(i, j);
            if step % 2 == 0 {
                sx.x[m] -= theta;
            } else {
                sx.x[m] += theta;
            }
        }
        sx.x[k] = theta;
        sx.x[leaving] = 0.0;
        sx.basic[leaving] = false;
        sx.basic[k] = true;
    }
}
