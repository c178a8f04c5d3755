use std::io::Write;

use anyhow::Result;
use otmax_core::line::{ball_energy_1d, sharp_example};
use otmax_core::measure::asymmetry;
use otmax_core::{shapes, solve_partial_ot, EdgeFilter, GridDensity};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::random::{sample_rng, unit_mass_density};

/// Samples below this asymmetry are left out of the ratio statistic.
pub const RATIO_THRESHOLD: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quant1dRow {
    pub sample: String,
    pub soft: bool,
    pub asymmetry: f64,
    pub energy: f64,
    pub deficit: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quant1dRun {
    pub rows: Vec<Quant1dRow>,
    /// Smallest `deficit / A^2` over the random samples with `A > 0.05`.
    pub min_ratio: Option<f64>,
    pub min_deficit: f64,
    pub reference_energy: f64,
}

/// Energy of the interval of length `scale`, the reference maximizer.
pub fn reference_energy(p: f64, scale: f64) -> f64 {
    scale.powf(p + 1.0) * ball_energy_1d(p)
}

pub fn evaluate(sample: String, soft: bool, rho: &GridDensity, cfg: &ExperimentConfig) -> Result<Quant1dRow> {
    let energy = solve_partial_ot(rho, cfg.p, EdgeFilter::All)?.energy;
    let a = asymmetry(rho)?;
    let deficit = reference_energy(cfg.p, cfg.ball_scale) - energy;
    let ratio = (a > RATIO_THRESHOLD).then(|| deficit / (a * a));
    Ok(Quant1dRow { sample, soft, asymmetry: a, energy, deficit, ratio })
}

pub fn random_row(cfg: &ExperimentConfig, index: u64) -> Result<Quant1dRow> {
    let mut rng = sample_rng(cfg.seed, index);
    let (rho, soft) = unit_mass_density(&mut rng, cfg.domain, cfg.h)?;
    evaluate(index.to_string(), soft, &rho, cfg)
}

pub fn run_quant1d(cfg: &ExperimentConfig) -> Result<Quant1dRun> {
    let [lo, hi] = cfg.domain;
    let center = 0.5 * (lo + hi);
    let ball = shapes::interval(center - 0.5, center + 0.5, lo, hi, cfg.h)?;
    let sharp = sharp_example(0.05, cfg.p)?.density(lo, hi, cfg.h)?;
    let mut rows =
        vec![evaluate("ball".into(), false, &ball, cfg)?, evaluate("sharp_0.05".into(), false, &sharp, cfg)?];
    let random: Vec<Quant1dRow> =
        (0..cfg.samples as u64).into_par_iter().map(|i| random_row(cfg, i)).collect::<Result<_>>()?;
    let min_ratio = random.iter().filter_map(|r| r.ratio).reduce(f64::min);
    let min_deficit = random.iter().map(|r| r.deficit).fold(f64::INFINITY, f64::min);
    rows.extend(random);
    Ok(Quant1dRun { rows, min_ratio, min_deficit, reference_energy: reference_energy(cfg.p, cfg.ball_scale) })
}

pub fn write_quant1d_csv<W: Write>(run: &Quant1dRun, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in &run.rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
