//! Error and feature diagnostics for twin experiments.

use crate::euler::FlowState;
use crate::{Error, Result};

// Threshold fractions, each relative to the largest jump of the reference
// (truth) field. Each is the midpoint of the range over which the numerical
// desk-scale truth shows its physical feature count.

/// Density features (shocks, contacts) of 1D runs.
pub const DENSITY_FEATURE_FRACTION: f64 = 0.2;
/// Entropy jumps of 1D runs.
pub const ENTROPY_FEATURE_FRACTION: f64 = 0.15;
/// Pressure jump that marks a shock front.
pub const SHOCK_FRONT_FRACTION: f64 = 0.3;
/// Gradient magnitude of 2D wavefronts.
pub const FRONT_FRACTION: f64 = 0.3;

/// `sum_e |truth - x_e| / (n_e |truth|)` over flattened conserved states.
pub fn relative_avg_error(particles: &[FlowState], truth: &FlowState) -> Result<f64> {
    if particles.is_empty() {
        return Err(Error::InvalidInput("empty ensemble".into()));
    }
    if particles.iter().any(|p| p.grid() != truth.grid()) {
        return Err(Error::InvalidInput("particles and truth live on different grids".into()));
    }
    let norm = truth.flat().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Config("relative error is undefined for a zero truth".into()));
    }
    let total: f64 = particles
        .iter()
        .map(|p| truth.flat().zip(p.flat()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .sum();
    Ok(total / (particles.len() as f64 * norm))
}

/// Largest absolute backward difference.
pub fn max_jump(field: &[f64]) -> f64 {
    field.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Number of maximal runs of consecutive nodes whose backward difference
/// exceeds `threshold` in magnitude.
pub fn feature_count(field: &[f64], threshold: f64) -> usize {
    let mut count = 0;
    let mut inside = false;
    for w in field.windows(2) {
        let above = (w[1] - w[0]).abs() > threshold;
        if above && !inside {
            count += 1;
        }
        inside = above;
    }
    count
}

/// Index of the rightmost node whose backward difference exceeds `threshold`.
pub fn shock_front(field: &[f64], threshold: f64) -> Option<usize> {
    (1..field.len()).rev().find(|&i| (field[i] - field[i - 1]).abs() > threshold)
}

/// Undivided gradient magnitude of a row-major `nx × ny` field from backward
/// differences (zero on the first row and column).
pub fn gradient_magnitude(field: &[f64], nx: usize, ny: usize) -> Vec<f64> {
    let mut out = vec![0.0; nx * ny];
    for i in 1..nx {
        for j in 1..ny {
            let k = i * ny + j;
            let gx = field[k] - field[k - ny];
            let gy = field[k] - field[k - 1];
            out[k] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Number of 8-connected components of the cells where `mask` is set.
pub fn connected_components(mask: &[bool], nx: usize, ny: usize) -> usize {
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = ((k / ny) as isize, (k % ny) as isize);
            for di in -1..=1 {
                for dj in -1..=1 {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= nx as isize || b >= ny as isize {
                        continue;
                    }
                    let m = a as usize * ny + b as usize;
                    if mask[m] && !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
    }
    count
}

/// Connected high-gradient fronts of a 2D field: cells with gradient
/// magnitude above `threshold`.
pub fn front_components(field: &[f64], nx: usize, ny: usize, threshold: f64) -> usize {
    let g = gradient_magnitude(field, nx, ny);
    let mask: Vec<bool> = g.iter().map(|&v| v > threshold).collect();
    connected_components(&mask, nx, ny)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{GasConstants, Grid};

    fn state(rho: &[f64]) -> FlowState {
        let n = rho.len();
        let grid = Grid::new_1d(n, (0.0, 1.0)).unwrap();
        FlowState::from_primitive(grid, &GasConstants::default(), rho, &[vec![0.0; n]], &vec![1.0; n], 0.0).unwrap()
    }

    #[test]
    fn relative_error_examples() {
        let t = state(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(relative_avg_error(&[t.clone(), t.clone()], &t).unwrap(), 0.0);

        let double = FlowState::from_conserved(*t.grid(), t.fields().iter().map(|f| f.iter().map(|v| 2.0 * v).collect()).collect(), 0.0).unwrap();
        assert!((relative_avg_error(&[double], &t).unwrap() - 1.0).abs() < 1e-15);

        let mut bumped = t.clone();
        bumped.fields_mut()[0][3] += 0.5;
        let norm = t.flat().map(|v| v * v).sum::<f64>().sqrt();
        let e = relative_avg_error(&[t.clone(), t.clone(), t.clone(), bumped], &t).unwrap();
        assert!((e - 0.5 / (4.0 * norm)).abs() < 1e-15);

        let zero = FlowState::from_conserved(*t.grid(), vec![vec![0.0; 7]; 3], 0.0).unwrap();
        assert!(matches!(relative_avg_error(&[t], &zero), Err(Error::Config(_))));
    }

    #[test]
    fn feature_count_examples() {
        assert_eq!(feature_count(&[2.0; 10], 0.1), 0);
        assert_eq!(feature_count(&[0.0, 0.0, 1.0, 1.0], 0.5), 1);
        // a smeared jump is one feature
        assert_eq!(feature_count(&[0.0, 0.0, 0.3, 0.7, 1.0, 1.0], 0.2), 1);
        assert_eq!(feature_count(&[0.0, 1.0, 1.0, 0.0], 0.5), 2);
        assert_eq!(shock_front(&[3.0, 3.0, 1.0, 1.0, 0.9], 0.5), Some(2));
        assert_eq!(shock_front(&[1.0; 5], 0.5), None);
    }

    #[test]
    fn rings_and_blobs() {
        let n = 41;
        let disc = |r: f64, c: f64| -> Vec<f64> {
            (0..n * n)
                .map(|k| {
                    let (i, j) = ((k / n) as f64 - c, (k % n) as f64 - c);
                    if i * i + j * j <= r * r { 1.0 } else { 0.0 }
                })
                .collect()
        };
        assert_eq!(front_components(&disc(10.0, 20.0), n, n, 0.5), 1);
        let two: Vec<f64> = disc(5.0, 10.0).iter().zip(disc(5.0, 30.0)).map(|(a, b)| a + b).collect();
        assert_eq!(front_components(&two, n, n, 0.5), 2);
        // concentric rings of an average of two discs
        let avg: Vec<f64> = disc(6.0, 20.0).iter().zip(disc(12.0, 20.0)).map(|(a, b)| 0.5 * (a + b)).collect();
        assert_eq!(front_components(&avg, n, n, 0.25), 2);
    }
}
