use std::io::Write;

use anyhow::Result;
use otmax_core::line::sharp_example;
use otmax_core::measure::asymmetry;
use otmax_core::{solve_partial_ot, EdgeFilter};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub eps: f64,
    /// Distance to the best unit interval.
    pub asymmetry: f64,
    /// Distance to the centered unit interval.
    pub centered_distance: f64,
    pub energy: f64,
    pub deficit: f64,
    pub ratio: f64,
    pub ratio_centered: f64,
    pub oracle_energy: Option<f64>,
    pub measured_asymmetry: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessRun {
    pub rows: Vec<SharpnessRow>,
    /// `lim deficit / asymmetry^2 = p 2^(1-p)`.
    pub limit: f64,
    /// `lim deficit / centered_distance^2 = p 2^-(p+1)`.
    pub limit_centered: f64,
}

/// Closed-form curve; the two largest `eps` are also solved on the grid.
pub fn run_sharpness(cfg: &ExperimentConfig) -> Result<SharpnessRun> {
    let p = cfg.p;
    let mut largest = cfg.eps.clone();
    largest.sort_by(|a, b| b.total_cmp(a));
    largest.dedup();
    largest.truncate(2);
    let rows = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let ex = sharp_example(eps, p)?;
            let a = ex.asymmetry();
            let c = ex.centered_distance();
            let deficit = ex.deficit();
            let mut row = SharpnessRow {
                eps,
                asymmetry: a,
                centered_distance: c,
                energy: ex.energy(),
                deficit,
                ratio: deficit / (a * a),
                ratio_centered: deficit / (c * c),
                oracle_energy: None,
                measured_asymmetry: None,
            };
            if largest.contains(&eps) {
                let rho = ex.density(cfg.domain[0], cfg.domain[1], cfg.h)?;
                row.oracle_energy = Some(solve_partial_ot(&rho, p, EdgeFilter::All)?.energy);
                row.measured_asymmetry = Some(asymmetry(&rho)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SharpnessRun { rows, limit: p * 2f64.powf(1.0 - p), limit_centered: p * 2f64.powf(-(p + 1.0)) })
}

pub fn write_sharpness_csv<W: Write>(run: &SharpnessRun, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in &run.rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
