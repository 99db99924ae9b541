//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every monotone path from `(0, 0)` to `(n - 1, m - 1)` with unit steps
/// right, down or diagonal.
pub fn all_paths(n: usize, m: usize) -> Vec<Vec<(usize, usize)>> {
    fn walk(i: usize, j: usize, n: usize, m: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        cur.push((i, j));
        if i == n - 1 && j == m - 1 {
            out.push(cur.clone());
        } else {
            if i + 1 < n && j + 1 < m {
                walk(i + 1, j + 1, n, m, cur, out);
            }
            if i + 1 < n {
                walk(i + 1, j, n, m, cur, out);
            }
            if j + 1 < m {
                walk(i, j + 1, n, m, cur, out);
            }
        }
        cur.pop();
    }
    let mut out = Vec::new();
    walk(0, 0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Minimum alignment distance over all enumerated paths.
pub fn brute_force_dtw(a: &[f64], b: &[f64], q: f64) -> f64 {
    all_paths(a.len(), b.len())
        .iter()
        .map(|p| p.iter().map(|&(i, j)| (a[i] - b[j]).abs().powf(q)).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        .powf(1.0 / q)
}

/// Minimum transport cost over all basic feasible solutions, found by
/// trying every set of `2n - 1` cells as a basis.
pub fn brute_force_transport(cost: &[Vec<f64>], rows: &[f64], cols: &[f64]) -> f64 {
    let n = cost.len();
    let cells = n * n;
    let k = 2 * n - 1;
    let mut best = f64::INFINITY;
    let mut choice: Vec<usize> = (0..k).collect();
    loop {
        if let Some(x) = solve_basis(&choice, n, rows, cols) {
            let obj: f64 = choice.iter().zip(&x).map(|(&c, &v)| cost[c / n][c % n] * v).sum();
            best = best.min(obj);
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if choice[i] != i + cells - k {
                break;
            }
        }
        choice[i] += 1;
        for t in i + 1..k {
            choice[t] = choice[t - 1] + 1;
        }
    }
}

/// Solves the marginal equations restricted to `basis` by Gaussian
/// elimination; `None` if singular or infeasible.
#[allow(clippy::needless_range_loop)]
fn solve_basis(basis: &[usize], n: usize, rows: &[f64], cols: &[f64]) -> Option<Vec<f64>> {
    let k = basis.len();
    // drop the last column equation, which is implied by the others
    let eqs = 2 * n - 1;
    let mut a = vec![vec![0.0; k + 1]; eqs];
    for (c, &cell) in basis.iter().enumerate() {
        let (i, j) = (cell / n, cell % n);
        a[i][c] = 1.0;
        if j < n - 1 {
            a[n + j][c] = 1.0;
        }
    }
    for i in 0..n {
        a[i][k] = rows[i];
    }
    for j in 0..n - 1 {
        a[n + j][k] = cols[j];
    }
    for c in 0..k {
        let piv = (c..eqs).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[piv][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, piv);
        for r in 0..eqs {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for t in c..=k {
                        a[r][t] -= f * a[c][t];
                    }
                }
            }
        }
    }
    let x: Vec<f64> = (0..k).map(|c| a[c][k] / a[c][c]).collect();
    if x.iter().any(|&v| v < -1e-12) {
        return None;
    }
    Some(x)
}

/// Random probability vector of length `n`, sometimes with zero entries.
pub fn random_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut c: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
        .collect();
    if c.iter().all(|&v| v == 0.0) {
        c[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = c.iter().sum();
    c.iter_mut().for_each(|v| *v /= s);
    c
}

use fpetpf::euler::{EulerSolver, FlowState, GasConstants, Grid};
use fpetpf::harness::riemann::{Primitive, RiemannSolution};

pub fn sod_initial(nx: usize) -> FlowState {
    let gas = GasConstants::default();
    let grid = Grid::new_1d(nx, (0.0, 1.0)).unwrap();
    let left: Vec<bool> = (0..nx).map(|i| grid.x(i) <= 0.5).collect();
    let rho: Vec<f64> = left.iter().map(|&l| if l { 1.0 } else { 0.125 }).collect();
    let p: Vec<f64> = left.iter().map(|&l| if l { 1.0 } else { 0.1 }).collect();
    FlowState::from_primitive(grid, &gas, &rho, &[vec![0.0; nx]], &p, 0.0).unwrap()
}

/// Mean absolute density error against the exact solution, and the distance
/// in cells between the numerical and exact shock positions.
pub fn sod_errors(nx: usize, t: f64) -> (f64, f64) {
    let gas = GasConstants::default();
    let state = EulerSolver::new(gas).advance(&sod_initial(nx), t).unwrap();
    let exact = RiemannSolution::solve(Primitive::new(1.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.1), &gas).unwrap();
    let grid = *state.grid();
    let xs: Vec<f64> = (0..nx).map(|i| grid.x(i)).collect();
    let reference = exact.sample_at(&xs, 0.5, t);
    let rho = state.density();
    let l1 = rho.iter().zip(&reference).map(|(a, b)| (a - b.rho).abs()).sum::<f64>() * grid.dx();

    let shock = 0.5 + exact.shock_speed(1).unwrap() * t;
    let mid = 0.5 * (exact.star_densities().1 + 0.125);
    let i = (1..nx).rev().find(|&i| rho[i - 1] >= mid && rho[i] < mid).unwrap();
    let x = xs[i - 1] + (rho[i - 1] - mid) / (rho[i - 1] - rho[i]) * grid.dx();
    (l1, (x - shock).abs() / grid.dx())
}

/// Observed order of accuracy for a smooth density wave advected at unit
/// speed, measured away from the boundaries. Time steps shrink like
/// `dx^(5/3)` so the third-order time error stays below the spatial error.
pub fn advection_order(sizes: &[usize]) -> Vec<f64> {
    let gas = GasConstants::default();
    let t = 0.05;
    let profile = |x: f64| 1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).sin();
    let errors: Vec<f64> = sizes
        .iter()
        .map(|&nx| {
            let grid = Grid::new_1d(nx, (0.0, 1.0)).unwrap();
            let rho: Vec<f64> = (0..nx).map(|i| profile(grid.x(i))).collect();
            let s = FlowState::from_primitive(grid, &gas, &rho, &[vec![1.0; nx]], &vec![1.0; nx], 0.0).unwrap();
            let solver = EulerSolver {
                max_dt: Some(0.5 * grid.dx().powf(5.0 / 3.0)),
                ..EulerSolver::new(gas)
            };
            let out = solver.advance(&s, t).unwrap();
            let inner: Vec<usize> = (0..nx).filter(|&i| (0.3..=0.7).contains(&grid.x(i))).collect();
            inner.iter().map(|&i| (out.density()[i] - profile(grid.x(i) - t)).abs()).sum::<f64>() / inner.len() as f64
        })
        .collect();
    errors
        .windows(2)
        .zip(sizes.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (((n[1] - 1) as f64) / ((n[0] - 1) as f64)).ln())
        .collect()
}

/// Relative change of total mass over a Sod run that ends before any wave
/// reaches the boundary.
pub fn sod_mass_drift(nx: usize) -> f64 {
    let s0 = sod_initial(nx);
    let s1 = EulerSolver::default().advance(&s0, 0.1).unwrap();
    (s1.total_mass() - s0.total_mass()).abs() / s0.total_mass()
}
