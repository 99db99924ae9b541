//! `fpetpf` command-line interface.
//!
//! Exit codes: 0 success, 1 I/O or other error, 2 configuration error,
//! 3 numerical failure (the diagnostic dump directory is printed).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fpetpf::combine::{aligned_add_state, align_states, plain_combine, Alignment};
use fpetpf::euler::{pressure, FlowState};
use fpetpf::filters::FilterKind;
use fpetpf::harness::output::{fmt_f64, write_ppm, write_snapshot, write_space_time};
use fpetpf::harness::problems::{build_truth, sample_initial_ensemble, solver};
use fpetpf::harness::riemann::{Primitive, RiemannSolution};
use fpetpf::harness::{Experiment, ExperimentConfig, Problem, RunFailure, Scale};
use fpetpf::{Backend, Error};

#[derive(Parser)]
#[command(name = "fpetpf", version, about = "Feature-preserving ensemble transform particle filter twin experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a twin experiment with one or more filters.
    Run {
        #[command(flatten)]
        common: Common,
        /// Filter to run; repeat to compare filters on the same ensemble and observations.
        #[arg(long, value_name = "KIND")]
        filter: Vec<FilterKind>,
    },
    /// Free run of the truth, compared with the exact solution for Riemann problems.
    Truth {
        #[command(flatten)]
        common: Common,
    },
    /// Aligned and plain combination of two initial-ensemble particles.
    Align {
        #[command(flatten)]
        common: Common,
        /// Mixing coefficient of the first particle.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Indices of the two particles.
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"], default_values_t = [0, 1])]
        particles: Vec<usize>,
        /// Advance both particles to this time before combining.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Config file (flat TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the RNG seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Desk-scale grid and ensemble size (default).
    #[arg(long, conflicts_with = "paper_scale")]
    desk_scale: bool,
    /// Paper-scale grid and ensemble size.
    #[arg(long)]
    paper_scale: bool,
}

enum Failure {
    Config(String),
    Numerical { message: String, dump: PathBuf },
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Config(msg),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let text = std::fs::read_to_string(&self.config)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", self.config.display())))?;
        let scale = match (self.desk_scale, self.paper_scale) {
            (true, _) => Some(Scale::Desk),
            (_, true) => Some(Scale::Paper),
            _ => None,
        };
        let mut cfg = ExperimentConfig::from_toml_str(&text, scale)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn numerical(failure: RunFailure, dir: &Path) -> Failure {
    match failure.dump(dir) {
        Ok(dump) => Failure::Numerical {
            message: failure.to_string(),
            dump,
        },
        Err(e) => Failure::Other(format!("{failure}; writing the diagnostic dump failed: {e}")),
    }
}

fn classify(failure: RunFailure, dir: &Path) -> Failure {
    if failure.error.is_numerical() {
        numerical(failure, dir)
    } else {
        failure.error.into()
    }
}

fn run(common: &Common, filters: &[FilterKind]) -> Result<(), Failure> {
    let cfg = common.load()?;
    let filters = if filters.is_empty() { vec![cfg.filter] } else { filters.to_vec() };
    let out = cfg.output_dir.clone();
    let ex = match Experiment::prepare(cfg, Backend::default()) {
        Ok(ex) => ex,
        Err(e) if e.is_numerical() => return Err(numerical(RunFailure::new(e, 0, 0.0, Vec::new()), &out)),
        Err(e) => return Err(e.into()),
    };
    ex.write_observations(&out)?;
    for kind in filters {
        let dir = out.join(kind.name());
        let result = ex.run(kind).map_err(|f| classify(f, &dir))?;
        result.write(&dir, &ex.gas)?;
        println!(
            "{kind}: final relative error {} after {} steps, {} aligned combinations; output in {}",
            fmt_f64(*result.errors.last().unwrap_or(&f64::NAN)),
            result.times.len(),
            result.alignments.iter().sum::<usize>(),
            dir.display()
        );
    }
    Ok(())
}

fn exact_solution(cfg: &ExperimentConfig, state: &FlowState) -> Result<Option<Vec<Primitive>>, Error> {
    if !matches!(cfg.problem, Problem::Sod | Problem::Toro) {
        return Ok(None);
    }
    let p = &cfg.truth;
    let gas = fpetpf::euler::GasConstants::default();
    let exact = RiemannSolution::solve(Primitive::new(p[0], p[1], p[2]), Primitive::new(p[3], p[4], p[5]), &gas)?;
    let g = state.grid();
    let xs: Vec<f64> = (0..g.nx()).map(|i| g.x(i)).collect();
    Ok(Some(exact.sample_at(&xs, p[6], state.time())))
}

fn truth(common: &Common) -> Result<(), Failure> {
    let cfg = common.load()?;
    let gas = fpetpf::euler::GasConstants::default();
    let solver = solver(&cfg, &gas);
    let out = cfg.output_dir.join("truth");
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    let mut state = build_truth(&cfg, &gas)?;
    let (mut times, mut rows) = (vec![0.0], vec![state.density().to_vec()]);
    for k in 1..=cfg.observation_steps {
        let t = cfg.observation_time(k);
        state = match solver.advance(&state, t) {
            Ok(s) => s,
            Err(e) if e.is_numerical() => return Err(numerical(RunFailure::new(e, k, t, vec![state]), &out)),
            Err(e) => return Err(e.into()),
        };
        times.push(t);
        rows.push(state.density().to_vec());
    }
    write_snapshot(&out.join("truth_final.csv"), &state, &gas)?;
    let g = *state.grid();
    if g.dim() == 1 {
        write_space_time(&out.join("truth_density.csv"), &times, &rows)?;
    } else {
        write_ppm(&out.join("truth_density.ppm"), state.density(), g.nx(), g.ny())?;
        let p = pressure(&state, &gas)?;
        write_ppm(&out.join("truth_pressure.ppm"), &p, g.nx(), g.ny())?;
    }
    println!("truth at t = {} written to {}", fmt_f64(state.time()), out.display());

    if let Some(exact) = exact_solution(&cfg, &state)? {
        let mut text = String::from("x,rho,u,p\n");
        for (i, e) in exact.iter().enumerate() {
            text += &format!("{},{},{},{}\n", fmt_f64(g.x(i)), fmt_f64(e.rho), fmt_f64(e.u), fmt_f64(e.p));
        }
        std::fs::write(out.join("exact_final.csv"), text).map_err(Error::from)?;
        let p = pressure(&state, &gas)?;
        let n = exact.len() as f64;
        let rho_l1 = state.density().iter().zip(&exact).map(|(a, e)| (a - e.rho).abs()).sum::<f64>() / n;
        let p_l1 = p.iter().zip(&exact).map(|(a, e)| (a - e.p).abs()).sum::<f64>() / n;
        println!("mean absolute error vs exact solution: rho {}, p {}", fmt_f64(rho_l1), fmt_f64(p_l1));
    }
    Ok(())
}

fn align(common: &Common, alpha: f64, pick: &[usize], time: f64) -> Result<(), Failure> {
    let cfg = common.load()?;
    let gas = fpetpf::euler::GasConstants::default();
    let out = cfg.output_dir.join("align");
    let particles = sample_initial_ensemble(&cfg, &gas)?;
    if let Some(&bad) = pick.iter().find(|&&i| i >= particles.len()) {
        return Err(Failure::Config(format!("particle {bad} does not exist in an ensemble of {}", particles.len())));
    }
    let solver = solver(&cfg, &gas);
    let mut states = Vec::new();
    for &i in pick {
        let p = particles[i].clone();
        let advanced = match solver.advance(&p, time) {
            Ok(s) => s,
            Err(e) if e.is_numerical() => return Err(numerical(RunFailure::new(e, 0, time, vec![p]), &out)),
            Err(e) => return Err(e.into()),
        };
        states.push(advanced);
    }
    let (x, xh) = (&states[0], &states[1]);
    let alignment = align_states(x, xh, 2.0)?;
    let aligned = aligned_add_state(x, xh, alpha, &alignment, cfg.interpolation)?;
    let plain = plain_combine(x, xh, alpha)?;

    let mut text = String::from("axis,i,j\n");
    match &alignment {
        Alignment::Line(p) => p.pairs().iter().for_each(|(i, j)| text += &format!("x,{i},{j}\n")),
        Alignment::Plane(p) => {
            p.rows.pairs().iter().for_each(|(i, j)| text += &format!("x,{i},{j}\n"));
            p.columns.pairs().iter().for_each(|(i, j)| text += &format!("y,{i},{j}\n"));
        }
    }
    std::fs::create_dir_all(&out).map_err(Error::from)?;
    std::fs::write(out.join("path.csv"), text).map_err(Error::from)?;
    let named = [("first", x), ("second", xh), ("aligned", &aligned), ("plain", &plain)];
    for (name, s) in named {
        if s.validate(&gas).is_ok() {
            write_snapshot(&out.join(format!("{name}.csv")), s, &gas)?;
        }
        let g = s.grid();
        if g.dim() == 2 {
            write_ppm(&out.join(format!("{name}_density.ppm")), s.density(), g.nx(), g.ny())?;
        }
    }
    println!(
        "aligned particles {} and {} at t = {} with alpha = {alpha}; output in {}",
        pick[0],
        pick[1],
        fmt_f64(time),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { common, filter } => run(common, filter),
        Command::Truth { common } => truth(common),
        Command::Align {
            common,
            alpha,
            particles,
            time,
        } => align(common, *alpha, particles, *time),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical { message, dump }) => {
            eprintln!("numerical failure: {message}");
            eprintln!("diagnostic dump: {}", dump.display());
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
