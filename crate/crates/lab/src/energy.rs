use anyhow::{bail, Context, Result};
use otmax_core::flow::interior_ball_check;
use otmax_core::io::Density;
use otmax_core::measure::distance_constant;
use otmax_core::radial::{ball_energy_nd, decompose, radial_energy};
use otmax_core::{solve_line, solve_partial_ot, sweep_rightward, EdgeFilter, SolveOptions};
use serde::Serialize;

use crate::config::{ExperimentConfig, Solver};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyOutput {
    pub solver: Solver,
    pub p: f64,
    pub mass: f64,
    pub energy: f64,
    pub max_distance: Option<f64>,
    pub distance_bound: Option<f64>,
    pub certificate_gap: Option<f64>,
    pub interior_ball_violations: Option<usize>,
    pub interior_ball_worst_gap: Option<f64>,
    /// Energy of the ball of the same mass, for grid densities.
    pub ball_energy: Option<f64>,
}

pub fn run_energy(cfg: &ExperimentConfig, density: &Density) -> Result<EnergyOutput> {
    let p = cfg.p;
    let mass = density.mass();
    let mut out = EnergyOutput {
        solver: cfg.solver,
        p,
        mass,
        energy: 0.0,
        max_distance: None,
        distance_bound: None,
        certificate_gap: None,
        interior_ball_violations: None,
        interior_ball_worst_gap: None,
        ball_energy: None,
    };
    if let Density::Grid(g) = density {
        if mass > 0.0 {
            out.ball_energy = Some(ball_energy_nd(g.dim(), p, mass)?);
        }
    }
    match (cfg.solver, density) {
        (Solver::Sweep, d) => {
            let line = d.as_line().context("the sweep solver needs a one-dimensional density")?;
            let s = sweep_rightward(&line, p).context("rightward sweep failed")?;
            out.energy = s.energy;
            out.max_distance = Some(s.plan.max_distance());
            out.distance_bound = Some(line.measure().inverse_cumulative(mass) + 2.0 * line.h());
        }
        (Solver::Oracle, Density::Grid(g)) => {
            let sol = solve_partial_ot(g, p, EdgeFilter::All).context("flow oracle failed")?;
            let report = sol.report(mass);
            let n = g.dim();
            let check = interior_ball_check(g, &sol.plan)?;
            out.energy = sol.energy;
            out.max_distance = Some(report.max_distance);
            out.distance_bound =
                Some(distance_constant(n) * mass.powf(1.0 / n as f64) + 2.0 * g.grid().cell_diameter());
            out.certificate_gap = Some(sol.certificate_gap);
            out.interior_ball_violations = Some(check.violations.len());
            out.interior_ball_worst_gap = Some(check.worst_gap);
        }
        (Solver::Oracle, Density::Weighted(d)) => {
            let sol = solve_line(d, p, &SolveOptions::default()).context("flow oracle failed")?;
            out.energy = sol.energy;
            out.max_distance = Some(sol.report(mass).max_distance);
            out.certificate_gap = Some(sol.certificate_gap);
        }
        (Solver::Radial, Density::Grid(g)) if g.dim() == 2 => {
            let rd = decompose(g, cfg.rays)?;
            out.energy = radial_energy(&rd, p).context("radial energy failed")?;
        }
        (Solver::Radial, _) => bail!("the radial solver needs a planar grid density"),
    }
    Ok(out)
}
