//! The assimilation loop and its outputs.

use std::fmt;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::diagnostics::{feature_count, max_jump, relative_avg_error, DENSITY_FEATURE_FRACTION};
use super::output;
use super::problems::{generate_observations, observation_operator, sample_initial_ensemble, solver, TruthRecord};
use crate::combine::AlignOptions;
use crate::euler::{EulerSolver, FlowState, GasConstants};
use crate::exec::{self, Backend};
use crate::filters::{assimilate, Ensemble, FilterConfig, FilterKind};
use crate::observation::ObservationOperator;
use crate::{Error, Result};

/// Everything shared by the filters compared on one config: truth,
/// observations and the initial ensemble.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub gas: GasConstants,
    pub solver: EulerSolver,
    pub obs: ObservationOperator,
    pub truth: TruthRecord,
    pub initial: Vec<FlowState>,
    pub backend: Backend,
}

impl Experiment {
    pub fn prepare(cfg: ExperimentConfig, backend: Backend) -> Result<Self> {
        cfg.validate()?;
        let gas = GasConstants::default();
        let solver = solver(&cfg, &gas).with_backend(backend);
        let obs = observation_operator(&cfg)?;
        let initial = sample_initial_ensemble(&cfg, &gas)?;
        let truth = generate_observations(&cfg, &solver, &obs)?;
        Ok(Experiment {
            cfg,
            gas,
            solver,
            obs,
            truth,
            initial,
            backend,
        })
    }

    pub fn filter_config(&self, kind: FilterKind) -> Result<FilterConfig> {
        let mut f = FilterConfig::new(kind, self.cfg.beta_w, vec![self.cfg.obs_variance])?;
        f.align = AlignOptions {
            interpolation: self.cfg.interpolation,
            ..AlignOptions::default()
        };
        f.backend = self.backend;
        Ok(f)
    }

    /// Runs one filter over the whole observation window.
    pub fn run(&self, kind: FilterKind) -> std::result::Result<RunResult, RunFailure> {
        let fcfg = self.filter_config(kind).map_err(|e| RunFailure::new(e, 0, 0.0, self.initial.clone()))?;
        let steps = self.cfg.observation_steps;
        let one_d = self.cfg.problem.dim() == 1;
        let mut out = RunResult {
            kind,
            times: Vec::with_capacity(steps),
            errors: Vec::with_capacity(steps),
            weights: Vec::with_capacity(steps),
            alignments: Vec::with_capacity(steps),
            feature_counts: Vec::new(),
            truth_density: Vec::new(),
            mean_density: Vec::new(),
            final_ensemble: Ensemble::uniform(self.initial.clone())
                .map_err(|e| RunFailure::new(e, 0, 0.0, self.initial.clone()))?,
            final_truth: self.truth.initial.clone(),
        };
        let mut truth = self.truth.initial.clone();
        let mut ensemble = out.final_ensemble.clone();

        for k in 1..=steps {
            let t = self.truth.times[k - 1];
            let fail = |e: Error, particles: &[FlowState]| RunFailure::new(e, k, t, particles.to_vec());

            let forecast = exec::try_map(self.backend, ensemble.particles(), |x| self.solver.advance(x, t))
                .map_err(|e| fail(e, ensemble.particles()))?;
            truth = self.solver.advance(&truth, t).map_err(|e| fail(e, std::slice::from_ref(&truth)))?;
            let forecast = Ensemble::new(forecast, ensemble.weights().clone()).map_err(|e| fail(e, &[]))?;

            if k > self.cfg.skip {
                let step = assimilate(&forecast, &self.truth.observations[k - 1], &self.obs, &fcfg, &self.gas)
                    .map_err(|e| fail(e, forecast.particles()))?;
                out.weights.push(step.weights.as_slice().to_vec());
                out.alignments.push(step.alignments);
                ensemble = step.ensemble;
            } else {
                out.weights.push(forecast.weights().as_slice().to_vec());
                out.alignments.push(0);
                ensemble = forecast;
            }

            out.times.push(t);
            out.errors
                .push(relative_avg_error(ensemble.particles(), &truth).map_err(|e| fail(e, ensemble.particles()))?);
            if one_d {
                let threshold = DENSITY_FEATURE_FRACTION * max_jump(truth.density());
                out.feature_counts.push(
                    ensemble
                        .particles()
                        .iter()
                        .map(|p| feature_count(p.density(), threshold))
                        .collect(),
                );
                out.truth_density.push(truth.density().to_vec());
                let mean = crate::filters::ensemble_mean(&ensemble).map_err(|e| fail(e, &[]))?;
                out.mean_density.push(mean.density().to_vec());
            }
        }
        out.final_ensemble = ensemble;
        out.final_truth = truth;
        Ok(out)
    }

    /// Writes the observation record shared by all runs.
    pub fn write_observations(&self, dir: &Path) -> Result<()> {
        let rows: Vec<(usize, f64, Vec<f64>)> = self
            .truth
            .times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let mut v = self.truth.observations[k].clone();
                v.extend(&self.truth.noise[k]);
                (k + 1, t, v)
            })
            .collect();
        output::write_series(&dir.join("observations.csv"), "c", &rows)
    }
}

/// Per-observation-time record of one filter run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub kind: FilterKind,
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    /// Analysis weights (forecast weights during the skip window).
    pub weights: Vec<Vec<f64>>,
    pub alignments: Vec<usize>,
    /// Density feature count of every particle (1D only).
    pub feature_counts: Vec<Vec<usize>>,
    /// Space-time density of the truth and of the ensemble mean (1D only).
    pub truth_density: Vec<Vec<f64>>,
    pub mean_density: Vec<Vec<f64>>,
    pub final_ensemble: Ensemble,
    pub final_truth: FlowState,
}

impl RunResult {
    /// Writes all run files into `dir`.
    pub fn write(&self, dir: &Path, gas: &GasConstants) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        output::write_errors(&dir.join("errors.csv"), &self.times, &self.errors, &self.alignments)?;
        let weights: Vec<(usize, f64, Vec<f64>)> = self
            .times
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(k, (&t, w))| (k + 1, t, w.clone()))
            .collect();
        output::write_series(&dir.join("weights.csv"), "w", &weights)?;
        output::write_snapshot(&dir.join("truth_final.csv"), &self.final_truth, gas)?;
        for (e, p) in self.final_ensemble.particles().iter().enumerate() {
            output::write_snapshot(&dir.join(format!("particle_{e:03}.csv")), p, gas)?;
        }
        let grid = self.final_truth.grid();
        if grid.dim() == 1 {
            let counts: Vec<(usize, f64, Vec<f64>)> = self
                .times
                .iter()
                .zip(&self.feature_counts)
                .enumerate()
                .map(|(k, (&t, c))| (k + 1, t, c.iter().map(|&v| v as f64).collect()))
                .collect();
            output::write_series(&dir.join("features.csv"), "p", &counts)?;
            output::write_space_time(&dir.join("truth_density.csv"), &self.times, &self.truth_density)?;
            output::write_space_time(&dir.join("mean_density.csv"), &self.times, &self.mean_density)?;
        } else {
            let (nx, ny) = (grid.nx(), grid.ny());
            output::write_ppm(&dir.join("truth_density.ppm"), self.final_truth.density(), nx, ny)?;
            for (e, p) in self.final_ensemble.particles().iter().enumerate() {
                output::write_ppm(&dir.join(format!("particle_{e:03}_density.ppm")), p.density(), nx, ny)?;
            }
        }
        Ok(())
    }
}

/// A run aborted by a numerical or input error, with the states involved.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    /// Observation step (1-based) at which the run failed; 0 before the loop.
    pub step: usize,
    pub time: f64,
    pub particles: Vec<FlowState>,
}

impl RunFailure {
    pub fn new(error: Error, step: usize, time: f64, particles: Vec<FlowState>) -> Self {
        RunFailure {
            error,
            step,
            time,
            particles,
        }
    }

    /// Writes the error and the raw conserved fields of the involved states
    /// under `dir/diagnostic`, returning that directory.
    pub fn dump(&self, dir: &Path) -> Result<PathBuf> {
        let out = dir.join("diagnostic");
        std::fs::create_dir_all(&out)?;
        std::fs::write(
            out.join("error.txt"),
            format!("step {} (t = {}): {}\n", self.step, self.time, self.error),
        )?;
        for (e, p) in self.particles.iter().enumerate() {
            let g = p.grid();
            let rows: Vec<(usize, f64, Vec<f64>)> = (0..g.len())
                .map(|k| {
                    let (i, j) = (k / g.ny(), k % g.ny());
                    let mut v = vec![g.x(i)];
                    if g.dim() == 2 {
                        v.push(g.y(j));
                    }
                    v.extend(p.fields().iter().map(|f| f[k]));
                    (k, p.time(), v)
                })
                .collect();
            output::write_series(&out.join(format!("state_{e:03}.csv")), "c", &rows)?;
        }
        Ok(out)
    }
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run failed at observation step {} (t = {}): {}", self.step, self.time, self.error)
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}
