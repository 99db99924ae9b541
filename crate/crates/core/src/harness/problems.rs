//! Initial conditions, ensemble sampling and synthetic observations.
//!
//! Random numbers come from ChaCha8 generators seeded with the config seed.
//! Stream 0 produces observation noise; stream `1 + k` produces the draws of
//! initial-condition parameter `k`, so changing one sampling deviation never
//! shifts the draws of another parameter or of the noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{ExperimentConfig, Problem};
use crate::euler::{EulerSolver, FlowState, GasConstants, Grid};
use crate::observation::ObservationOperator;
use crate::{Error, Result};

pub const NOISE_STREAM: u64 = 0;
pub const PARAM_STREAM_BASE: u64 = 1;
/// Redraws allowed per particle before sampling gives up.
pub const MAX_REDRAWS: usize = 1000;

const SHU_OSHER_AMPLITUDE: f64 = 0.2;
const SHU_OSHER_WAVENUMBER: f64 = 10.0 * std::f64::consts::PI;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Whether the parameters describe a physical state with the discontinuity
/// inside the domain.
pub fn params_valid(problem: Problem, p: &[f64]) -> bool {
    let (lo, hi) = problem.extent();
    match problem {
        Problem::Sod | Problem::Toro => {
            p[0] > 0.0 && p[2] > 0.0 && p[3] > 0.0 && p[5] > 0.0 && p[6] > lo && p[6] < hi
        }
        Problem::ShuOsher => {
            p[0] > 0.0 && p[2] > 0.0 && p[3] - SHU_OSHER_AMPLITUDE > 0.0 && p[5] > 0.0 && p[6] > lo && p[6] < hi
        }
        Problem::Blast2d => {
            p[0] > lo && p[0] < hi && p[1] > lo && p[1] < hi && p[2] > 0.0 && p[3] > 0.0 && p[4] > 0.0 && p[5] > 0.0 && p[6] > 0.0
        }
    }
}

/// Piecewise initial state of `problem` with parameters `p` (see
/// [`Problem::param_names`]).
pub fn initial_state(problem: Problem, p: &[f64], grid: &Grid, gas: &GasConstants) -> Result<FlowState> {
    if p.len() != problem.param_names().len() {
        return Err(Error::Config(format!("{problem} takes {} parameters", problem.param_names().len())));
    }
    if !params_valid(problem, p) {
        return Err(Error::Config(format!("parameters {p:?} do not define a physical {problem} state")));
    }
    let n = grid.len();
    let (mut rho, mut u, mut pr) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let v = vec![0.0; n];
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            let k = grid.index(i, j);
            let x = grid.x(i);
            match problem {
                Problem::Sod | Problem::Toro | Problem::ShuOsher => {
                    let left = x <= p[6];
                    let (r, vel, pp) = if left { (p[0], p[1], p[2]) } else { (p[3], p[4], p[5]) };
                    rho[k] = if !left && problem == Problem::ShuOsher {
                        r + SHU_OSHER_AMPLITUDE * (SHU_OSHER_WAVENUMBER * (x - p[6])).sin()
                    } else {
                        r
                    };
                    u[k] = vel;
                    pr[k] = pp;
                }
                Problem::Blast2d => {
                    let (dx, dy) = (x - p[0], grid.y(j) - p[1]);
                    let inside = dx * dx + dy * dy <= p[2] * p[2];
                    (rho[k], pr[k]) = if inside { (p[3], p[4]) } else { (p[5], p[6]) };
                }
            }
        }
    }
    let velocity = if grid.dim() == 1 { vec![u] } else { vec![u, v] };
    FlowState::from_primitive(*grid, gas, &rho, &velocity, &pr, 0.0)
}

/// Initial truth of a configured experiment.
pub fn build_truth(cfg: &ExperimentConfig, gas: &GasConstants) -> Result<FlowState> {
    initial_state(cfg.problem, &cfg.truth, &cfg.grid()?, gas)
}

/// Parameter sets of the initial ensemble.
pub fn sample_parameters(cfg: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    let names = cfg.problem.param_names();
    let mut rngs: Vec<ChaCha8Rng> = (0..names.len())
        .map(|k| stream(cfg.seed, PARAM_STREAM_BASE + k as u64))
        .collect();
    let mut sets = Vec::with_capacity(cfg.ensemble_size);
    for e in 0..cfg.ensemble_size {
        let mut attempt = 0;
        loop {
            let draw: Vec<f64> = (0..names.len())
                .map(|k| {
                    let z: f64 = StandardNormal.sample(&mut rngs[k]);
                    cfg.truth[k] + cfg.sigma[k] * z
                })
                .collect();
            if params_valid(cfg.problem, &draw) {
                sets.push(draw);
                break;
            }
            attempt += 1;
            if attempt == MAX_REDRAWS {
                return Err(Error::Config(format!(
                    "particle {e}: no physical parameter draw in {MAX_REDRAWS} attempts"
                )));
            }
        }
    }
    Ok(sets)
}

/// Initial ensemble of the experiment (uniformly weighted).
pub fn sample_initial_ensemble(cfg: &ExperimentConfig, gas: &GasConstants) -> Result<Vec<FlowState>> {
    let grid = cfg.grid()?;
    sample_parameters(cfg)?
        .iter()
        .map(|p| initial_state(cfg.problem, p, &grid, gas))
        .collect()
}

pub fn observation_operator(cfg: &ExperimentConfig) -> Result<ObservationOperator> {
    ObservationOperator::new(&cfg.grid()?, cfg.problem.sensors())
}

pub fn solver(cfg: &ExperimentConfig, gas: &GasConstants) -> EulerSolver {
    EulerSolver {
        cfl: cfg.cfl,
        ..EulerSolver::new(*gas)
    }
}

/// Truth trajectory summary and the noisy observations served to every filter.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub initial: FlowState,
    /// Observation times `t_1..t_N`.
    pub times: Vec<f64>,
    pub observations: Vec<Vec<f64>>,
    pub noise: Vec<Vec<f64>>,
}

/// Runs the truth through all observation times and records `y_k = H(x_k) + e_k`.
pub fn generate_observations(
    cfg: &ExperimentConfig,
    solver: &EulerSolver,
    obs: &ObservationOperator,
) -> Result<TruthRecord> {
    let gas = solver.gas;
    let initial = build_truth(cfg, &gas)?;
    let mut rng = stream(cfg.seed, NOISE_STREAM);
    let std = cfg.obs_variance.sqrt();
    let mut record = TruthRecord {
        initial: initial.clone(),
        times: Vec::with_capacity(cfg.observation_steps),
        observations: Vec::with_capacity(cfg.observation_steps),
        noise: Vec::with_capacity(cfg.observation_steps),
    };
    let mut truth = initial;
    for k in 1..=cfg.observation_steps {
        let t = cfg.observation_time(k);
        truth = solver.advance(&truth, t)?;
        let z = obs.apply(&truth, &gas)?;
        let eps: Vec<f64> = (0..z.len())
            .map(|_| {
                let n: f64 = StandardNormal.sample(&mut rng);
                std * n
            })
            .collect();
        record.observations.push(z.iter().zip(&eps).map(|(z, e)| z + e).collect());
        record.noise.push(eps);
        record.times.push(t);
    }
    Ok(record)
}
