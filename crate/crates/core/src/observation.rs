//! Sparse pressure sensors.

use crate::euler::{pressure, FlowState, GasConstants, Grid};
use crate::{Error, Result};

/// Samples pressure at the grid nodes nearest to fixed sensor locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationOperator {
    locations: Vec<(f64, f64)>,
    nodes: Vec<usize>,
}

impl ObservationOperator {
    /// Sensors at physical coordinates `(x, y)`; `y` is ignored on 1D grids.
    pub fn new(grid: &Grid, locations: Vec<(f64, f64)>) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::Config("at least one sensor is required".into()));
        }
        let mut nodes = Vec::with_capacity(locations.len());
        for &(x, y) in &locations {
            if !grid.contains(x, y) {
                return Err(Error::Config(format!("sensor ({x}, {y}) lies outside the domain")));
            }
            let j = if grid.dim() == 2 { grid.nearest_y(y) } else { 0 };
            nodes.push(grid.index(grid.nearest_x(x), j));
        }
        Ok(ObservationOperator { locations, nodes })
    }

    /// Sensors on the tensor lattice `xs × ys` (x-major order).
    pub fn lattice(grid: &Grid, xs: &[f64], ys: &[f64]) -> Result<Self> {
        let locations = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
        ObservationOperator::new(grid, locations)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn locations(&self) -> &[(f64, f64)] {
        &self.locations
    }

    /// Flat grid indices of the sensors.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn apply(&self, state: &FlowState, gas: &GasConstants) -> Result<Vec<f64>> {
        let p = pressure(state, gas)?;
        Ok(self.nodes.iter().map(|&k| p[k]).collect())
    }
}
