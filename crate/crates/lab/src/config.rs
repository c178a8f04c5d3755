use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Energy,
    Quant1d,
    Sharpness,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Sweep,
    Oracle,
    Radial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub p: f64,
    pub h: f64,
    /// Interval `[lo, hi]` holding one-dimensional samples.
    pub domain: [f64; 2],
    pub rays: usize,
    pub samples: usize,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub solver: Solver,
    pub eps: Vec<f64>,
    /// Radius of the reference ball relative to the unit-mass ball.
    pub ball_scale: f64,
}

pub const DEFAULT_EPS: [f64; 8] = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            p: 2.0,
            h: 2e-3,
            domain: [-2.0, 3.0],
            rays: 256,
            samples: 100,
            seed: 0,
            input: None,
            out: None,
            solver: Solver::Oracle,
            eps: DEFAULT_EPS.to_vec(),
            ball_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            bail!("p must be greater than 1, got {}", self.p);
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            bail!("h must be positive, got {}", self.h);
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && hi - lo >= 3.0) {
            bail!("domain [{lo}, {hi}] must have length at least 3 to hold unit-mass samples and their transport");
        }
        if self.rays == 0 || self.samples == 0 {
            bail!("ray and sample counts must be positive");
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 0.25)) {
            bail!("eps {e} outside (0, 1/4)");
        }
        if !(self.ball_scale.is_finite() && self.ball_scale > 0.0) {
            bail!("ball scale must be positive, got {}", self.ball_scale);
        }
        if self.command == Command::Energy && self.input.is_none() {
            bail!("energy needs --input");
        }
        Ok(())
    }
}
