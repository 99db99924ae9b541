use super::weno::reconstruct;
use super::{pressure, FlowState, GasConstants};
use crate::exec::{self, Backend};
use crate::{Error, Result};

const GHOST: usize = 3;

/// Finite-difference WENO5 solver with global Lax-Friedrichs flux splitting,
/// zeroth-order extrapolation (outflow) boundaries and three-stage SSP-RK3
/// time stepping.
#[derive(Debug, Clone, Copy)]
pub struct EulerSolver {
    pub gas: GasConstants,
    pub cfl: f64,
    /// Optional cap on the substep used by [`EulerSolver::advance`].
    pub max_dt: Option<f64>,
    pub backend: Backend,
}

impl Default for EulerSolver {
    fn default() -> Self {
        EulerSolver {
            gas: GasConstants::default(),
            cfl: 0.45,
            max_dt: None,
            backend: Backend::default(),
        }
    }
}

impl EulerSolver {
    pub fn new(gas: GasConstants) -> Self {
        EulerSolver {
            gas,
            ..Default::default()
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    /// Largest `|u_axis| + c` over the domain, per axis.
    fn wave_speeds(&self, state: &FlowState, p: &[f64]) -> Vec<f64> {
        let rho = state.density();
        (0..state.grid().dim())
            .map(|axis| {
                let m = state.momentum(axis);
                (0..rho.len())
                    .map(|k| (m[k] / rho[k]).abs() + self.gas.sound_speed(rho[k], p[k]))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Stable step size `cfl / sum(alpha_axis / h_axis)`.
    pub fn max_stable_dt(&self, state: &FlowState) -> Result<f64> {
        let p = pressure(state, &self.gas)?;
        let speeds = self.wave_speeds(state, &p);
        let rate: f64 = speeds
            .iter()
            .enumerate()
            .map(|(axis, a)| a / state.grid().spacing(axis))
            .sum();
        Ok(self.cfl / rate)
    }

    /// Time derivative of the conserved fields.
    pub fn rhs(&self, state: &FlowState) -> Result<Vec<Vec<f64>>> {
        let grid = *state.grid();
        let p = pressure(state, &self.gas)?;
        let speeds = self.wave_speeds(state, &p);
        let nvars = grid.dim() + 2;
        let (nx, ny) = (grid.nx(), grid.ny());

        // x sweeps: one line per y index
        let hx = grid.dx();
        let x_lines = exec::map_range(self.backend, ny, |j| {
            let line: Vec<Vec<f64>> = state
                .fields()
                .iter()
                .map(|f| (0..nx).map(|i| f[i * ny + j]).collect())
                .collect();
            line_divergence(&line, 0, speeds[0], hx, &self.gas)
        });
        let mut out = vec![vec![0.0; grid.len()]; nvars];
        for (j, d) in x_lines.iter().enumerate() {
            for (var, dv) in d.iter().enumerate() {
                for i in 0..nx {
                    out[var][i * ny + j] = dv[i];
                }
            }
        }

        if grid.dim() == 2 {
            let hy = grid.dy().unwrap();
            let y_lines = exec::map_range(self.backend, nx, |i| {
                let line: Vec<Vec<f64>> = state
                    .fields()
                    .iter()
                    .map(|f| f[i * ny..(i + 1) * ny].to_vec())
                    .collect();
                line_divergence(&line, 1, speeds[1], hy, &self.gas)
            });
            for (i, d) in y_lines.iter().enumerate() {
                for (var, dv) in d.iter().enumerate() {
                    for j in 0..ny {
                        out[var][i * ny + j] += dv[j];
                    }
                }
            }
        }
        Ok(out)
    }

    /// One SSP-RK3 step of size `dt`.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let bound = self.max_stable_dt(state)?;
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, bound });
        }
        self.step_unchecked(state, dt)
    }

    fn step_unchecked(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        let u0 = state.fields();

        let l0 = self.rhs(state)?;
        let s1 = combine_stage(u0, 0.0, u0, 1.0, &l0, dt);
        let st1 = FlowState::from_conserved(*state.grid(), s1, state.time())?;

        let l1 = self.rhs(&st1)?;
        let s2 = combine_stage(u0, 0.75, st1.fields(), 0.25, &l1, dt);
        let st2 = FlowState::from_conserved(*state.grid(), s2, state.time())?;

        let l2 = self.rhs(&st2)?;
        let s3 = combine_stage(u0, 1.0 / 3.0, st2.fields(), 2.0 / 3.0, &l2, dt);
        let next = FlowState::from_conserved(*state.grid(), s3, state.time() + dt)?;
        next.validate(&self.gas)?;
        Ok(next)
    }

    /// Applies CFL-limited steps until `t_target`; the last step is shortened
    /// to land on it exactly.
    pub fn advance(&self, state: &FlowState, t_target: f64) -> Result<FlowState> {
        if t_target < state.time() {
            return Err(Error::InvalidInput(format!(
                "cannot advance from t = {} back to {t_target}",
                state.time()
            )));
        }
        let mut current = state.clone();
        while current.time() < t_target {
            let mut bound = self.max_stable_dt(&current)?;
            if let Some(cap) = self.max_dt {
                bound = bound.min(cap);
            }
            let remaining = t_target - current.time();
            if remaining <= bound {
                current = self.step_unchecked(&current, remaining)?;
                current.set_time(t_target);
            } else {
                current = self.step_unchecked(&current, bound)?;
            }
        }
        Ok(current)
    }
}

/// `a * base + b * (prev + dt * l)`, fieldwise.
fn combine_stage(base: &[Vec<f64>], a: f64, prev: &[Vec<f64>], b: f64, l: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
    base.iter()
        .zip(prev)
        .zip(l)
        .map(|((u, v), l)| {
            u.iter()
                .zip(v)
                .zip(l)
                .map(|((u, v), l)| a * u + b * (v + dt * l))
                .collect()
        })
        .collect()
}

/// Flux divergence `-dF/dn` along one grid line; `axis` is the line direction.
fn line_divergence(q: &[Vec<f64>], axis: usize, alpha: f64, h: f64, gas: &GasConstants) -> Vec<Vec<f64>> {
    let nvars = q.len();
    let n = q[0].len();
    let dim = nvars - 2;
    let ne = n + 2 * GHOST;

    // conserved values with outflow ghosts, then split fluxes
    let ext = |var: usize, m: usize| -> f64 {
        let k = m.saturating_sub(GHOST).min(n - 1);
        q[var][k]
    };
    let mut f_plus = vec![vec![0.0; ne]; nvars];
    let mut f_minus = vec![vec![0.0; ne]; nvars];
    let mut qv = vec![0.0; nvars];
    let mut flux = vec![0.0; nvars];
    for m in 0..ne {
        for (var, slot) in qv.iter_mut().enumerate() {
            *slot = ext(var, m);
        }
        physical_flux(&qv, axis, dim, gas, &mut flux);
        for var in 0..nvars {
            f_plus[var][m] = 0.5 * (flux[var] + alpha * qv[var]);
            f_minus[var][m] = 0.5 * (flux[var] - alpha * qv[var]);
        }
    }

    let mut out = vec![vec![0.0; n]; nvars];
    for var in 0..nvars {
        let fp = &f_plus[var];
        let fm = &f_minus[var];
        // interface i + 1/2 for i = -1..n-1 sits between ext cells m and m + 1, m = i + 3
        let face = |m: usize| -> f64 {
            reconstruct([fp[m - 2], fp[m - 1], fp[m], fp[m + 1], fp[m + 2]])
                + reconstruct([fm[m + 3], fm[m + 2], fm[m + 1], fm[m], fm[m - 1]])
        };
        let mut left = face(GHOST - 1);
        for (i, o) in out[var].iter_mut().enumerate().take(n) {
            let right = face(i + GHOST);
            *o = -(right - left) / h;
            left = right;
        }
    }
    out
}

fn physical_flux(q: &[f64], axis: usize, dim: usize, gas: &GasConstants, out: &mut [f64]) {
    let rho = q[0];
    let energy = q[dim + 1];
    let momentum_sq: f64 = (0..dim).map(|a| q[1 + a] * q[1 + a]).sum();
    let p = gas.pressure(rho, momentum_sq, energy);
    let un = q[1 + axis] / rho;
    out[0] = q[1 + axis];
    for a in 0..dim {
        out[1 + a] = q[1 + a] * un;
    }
    out[1 + axis] += p;
    out[dim + 1] = un * (energy + p);
}
