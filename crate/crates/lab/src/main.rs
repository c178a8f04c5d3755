use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use otmax_lab::{config::DEFAULT_EPS, Command, ExperimentConfig, Solver};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Energy,
    Quant1d,
    Sharpness,
    Verify,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Sweep,
    Oracle,
    Radial,
}

/// Transport energies under the constraint rho + rho' <= 1.
#[derive(Debug, Parser)]
#[command(name = "otmax", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 2e-3)]
    h: f64,
    /// One-dimensional sample domain: lo hi.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-2.0, 3.0], allow_negative_numbers = true)]
    domain: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    rays: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolverArg::Oracle)]
    solver: SolverArg,
    /// Perturbation sizes for the sharpness curve.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPS)]
    eps: Vec<f64>,
    /// Radius of the reference ball relative to the unit-mass ball.
    #[arg(long, default_value_t = 1.0)]
    ball_scale: f64,
}

impl Cli {
    fn config(self) -> ExperimentConfig {
        let command = match self.command {
            CommandArg::Energy => Command::Energy,
            CommandArg::Quant1d => Command::Quant1d,
            CommandArg::Sharpness => Command::Sharpness,
            CommandArg::Verify => Command::Verify,
        };
        ExperimentConfig {
            command,
            p: self.p,
            h: self.h,
            domain: [self.domain[0], self.domain[1]],
            rays: self.rays,
            samples: self.samples,
            seed: self.seed,
            input: self.input,
            out: self.out,
            solver: match self.solver {
                SolverArg::Sweep => Solver::Sweep,
                SolverArg::Oracle => Solver::Oracle,
                SolverArg::Radial => Solver::Radial,
            },
            eps: self.eps,
            ball_scale: self.ball_scale,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("OTMAX_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match otmax_lab::run(&cli.config()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
