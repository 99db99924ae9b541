//! Compressible Euler equations for an ideal polytropic gas on uniform
//! Cartesian grids.
//!
//! Conserved variables are stored field-by-field: density, one momentum field
//! per axis, energy density. In 2D a field is an `nx × ny` matrix stored row
//! major with the x index as the row (`k = i * ny + j`).

mod solver;
mod weno;

pub use solver::EulerSolver;

use crate::{Error, Result};

/// Nodes needed for the five-point WENO stencil plus ghost layers.
pub const MIN_NODES: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    x_range: (f64, f64),
    y_range: Option<(f64, f64)>,
}

impl Grid {
    pub fn new_1d(nx: usize, x_range: (f64, f64)) -> Result<Self> {
        check_axis("x", nx, x_range)?;
        Ok(Grid {
            nx,
            ny: 1,
            x_range,
            y_range: None,
        })
    }

    pub fn new_2d(nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> Result<Self> {
        check_axis("x", nx, x_range)?;
        check_axis("y", ny, y_range)?;
        Ok(Grid {
            nx,
            ny,
            x_range,
            y_range: Some(y_range),
        })
    }

    pub fn dim(&self) -> usize {
        if self.y_range.is_some() {
            2
        } else {
            1
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Node count along y; 1 for one-dimensional grids.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn y_range(&self) -> Option<(f64, f64)> {
        self.y_range
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> Option<f64> {
        self.y_range
            .map(|(a, b)| (b - a) / (self.ny - 1) as f64)
    }

    /// Spacing along `axis` (0 = x, 1 = y).
    pub fn spacing(&self, axis: usize) -> f64 {
        match axis {
            0 => self.dx(),
            _ => self.dy().expect("y spacing requested on a 1D grid"),
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_range.0 + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        match self.y_range {
            Some((a, _)) => a + j as f64 * self.dy().unwrap(),
            None => 0.0,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Index of the node closest to `x` (1D); ties go to the lower index.
    pub fn nearest_x(&self, x: f64) -> usize {
        nearest_node(x, self.x_range.0, self.dx(), self.nx)
    }

    pub fn nearest_y(&self, y: f64) -> usize {
        match self.y_range {
            Some((a, _)) => nearest_node(y, a, self.dy().unwrap(), self.ny),
            None => 0,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let in_x = x >= self.x_range.0 && x <= self.x_range.1;
        match self.y_range {
            Some((a, b)) => in_x && y >= a && y <= b,
            None => in_x,
        }
    }
}

fn nearest_node(x: f64, origin: f64, h: f64, n: usize) -> usize {
    let s = (x - origin) / h;
    let k = (s - 0.5).ceil().max(0.0) as usize;
    k.min(n - 1)
}

fn check_axis(name: &str, n: usize, (a, b): (f64, f64)) -> Result<()> {
    if n < MIN_NODES {
        return Err(Error::InvalidInput(format!(
            "{name} axis needs at least {MIN_NODES} nodes, got {n}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::InvalidInput(format!(
            "{name} axis extent [{a}, {b}] is empty"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    gamma: f64,
}

impl GasConstants {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 1.0 && gamma.is_finite() {
            Ok(GasConstants { gamma })
        } else {
            Err(Error::InvalidInput(format!(
                "adiabatic index must exceed 1, got {gamma}"
            )))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Pressure from conserved quantities at one node.
    #[inline]
    pub fn pressure(&self, rho: f64, momentum_sq: f64, energy: f64) -> f64 {
        (self.gamma - 1.0) * (energy - 0.5 * momentum_sq / rho)
    }

    #[inline]
    pub fn energy(&self, rho: f64, speed_sq: f64, p: f64) -> f64 {
        p / (self.gamma - 1.0) + 0.5 * rho * speed_sq
    }

    #[inline]
    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

impl Default for GasConstants {
    fn default() -> Self {
        GasConstants { gamma: 1.4 }
    }
}

/// Conserved fields on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    grid: Grid,
    fields: Vec<Vec<f64>>,
    time: f64,
}

impl FlowState {
    /// Builds a state from conserved fields `[rho, momentum..., energy]`.
    pub fn from_conserved(grid: Grid, fields: Vec<Vec<f64>>, time: f64) -> Result<Self> {
        let nvars = grid.dim() + 2;
        if fields.len() != nvars {
            return Err(Error::InvalidInput(format!(
                "expected {nvars} conserved fields, got {}",
                fields.len()
            )));
        }
        if let Some(f) = fields.iter().find(|f| f.len() != grid.len()) {
            return Err(Error::InvalidInput(format!(
                "field of length {} on a grid of {} nodes",
                f.len(),
                grid.len()
            )));
        }
        Ok(FlowState { grid, fields, time })
    }

    /// Builds a state from density, velocity components and pressure.
    pub fn from_primitive(
        grid: Grid,
        gas: &GasConstants,
        rho: &[f64],
        velocity: &[Vec<f64>],
        p: &[f64],
        time: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if rho.len() != n || p.len() != n || velocity.len() != grid.dim() {
            return Err(Error::InvalidInput("primitive field shapes do not match the grid".into()));
        }
        if velocity.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidInput("velocity field shape does not match the grid".into()));
        }
        let mut fields = Vec::with_capacity(grid.dim() + 2);
        fields.push(rho.to_vec());
        for v in velocity {
            fields.push(rho.iter().zip(v).map(|(r, u)| r * u).collect());
        }
        fields.push(
            (0..n)
                .map(|k| {
                    let speed_sq: f64 = velocity.iter().map(|v| v[k] * v[k]).sum();
                    gas.energy(rho[k], speed_sq, p[k])
                })
                .collect(),
        );
        FlowState::from_conserved(grid, fields, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// All conserved fields: density, momentum components, energy.
    pub fn fields(&self) -> &[Vec<f64>] {
        &self.fields
    }

    pub fn fields_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.fields
    }

    pub fn into_fields(self) -> Vec<Vec<f64>> {
        self.fields
    }

    pub fn density(&self) -> &[f64] {
        &self.fields[0]
    }

    pub fn momentum(&self, axis: usize) -> &[f64] {
        &self.fields[1 + axis]
    }

    pub fn energy(&self) -> &[f64] {
        &self.fields[self.grid.dim() + 1]
    }

    pub fn velocity(&self, axis: usize) -> Vec<f64> {
        self.momentum(axis)
            .iter()
            .zip(self.density())
            .map(|(m, r)| m / r)
            .collect()
    }

    fn momentum_sq(&self, k: usize) -> f64 {
        (0..self.grid.dim())
            .map(|a| self.fields[1 + a][k] * self.fields[1 + a][k])
            .sum()
    }

    /// Conserved fields laid end to end (the state vector used for distances
    /// and errors).
    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.fields.iter().flatten().copied()
    }

    pub fn total_mass(&self) -> f64 {
        let cell = self.grid.dx() * self.grid.dy().unwrap_or(1.0);
        self.density().iter().sum::<f64>() * cell
    }

    /// Checks that density and pressure are positive everywhere.
    pub fn validate(&self, gas: &GasConstants) -> Result<()> {
        pressure(self, gas).map(|_| ())
    }
}

/// Pressure field from the polytropic equation of state.
pub fn pressure(state: &FlowState, gas: &GasConstants) -> Result<Vec<f64>> {
    let rho = state.density();
    let e = state.energy();
    let mut p = Vec::with_capacity(rho.len());
    for k in 0..rho.len() {
        if !(rho[k] > 0.0) {
            return Err(Error::NonPhysicalState {
                node: k,
                quantity: "density",
                value: rho[k],
            });
        }
        let pk = gas.pressure(rho[k], state.momentum_sq(k), e[k]);
        if !(pk > 0.0) {
            return Err(Error::NonPhysicalState {
                node: k,
                quantity: "pressure",
                value: pk,
            });
        }
        p.push(pk);
    }
    Ok(p)
}

/// Entropy `log(p / rho^gamma)` at every node.
pub fn entropy(state: &FlowState, gas: &GasConstants) -> Result<Vec<f64>> {
    let p = pressure(state, gas)?;
    Ok(p.iter()
        .zip(state.density())
        .map(|(p, r)| (p / r.powf(gas.gamma())).ln())
        .collect())
}
