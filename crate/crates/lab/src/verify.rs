use std::f64::consts::PI;

use anyhow::Result;
use otmax_core::flow::{crossing_mass, interior_ball_check, max_transport_distance};
use otmax_core::line::{profile_dominates, sweep_rightward};
use otmax_core::measure::{cube_approximation, distance_constant};
use otmax_core::radial::{ball_energy_nd, decompose, radial_energy, sphere_measure, star_shape_profile, Ray};
use otmax_core::symmetry::{median_offsets, reflect_plan, symmetrize, Reflection, Side};
use otmax_core::{shapes, solve_line, solve_partial_ot, CellGrid, DiscretePlan, EdgeFilter, GridDensity};
use otmax_core::{Density1D, RadialDensity, SolveOptions, Transfer, WeightedMeasure};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::quant1d::{evaluate, random_row, RATIO_THRESHOLD};
use crate::random::{blob_2d, half_line, sample_rng, unit_mass_density};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Reported without a threshold.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub paper_ref: String,
    pub status: Status,
    pub worst_violation: f64,
    pub tolerance: f64,
}

impl Check {
    fn bounded(check: &str, paper_ref: &str, worst: f64, tolerance: f64) -> Self {
        let status = if worst <= tolerance { Status::Pass } else { Status::Fail };
        Check { check: check.into(), paper_ref: paper_ref.into(), status, worst_violation: worst, tolerance }
    }
}

/// Random samples per randomized check.
pub const VERIFY_SAMPLES: usize = 10;
/// Side of the planar grids used by the suite.
pub const PLANE_CELLS: usize = 32;
pub const ORACLE_TOL: f64 = 1e-9;

pub fn wp(energy: f64, p: f64) -> f64 {
    energy.max(0.0).powf(1.0 / p)
}

/// Disk with its two coordinate symmetries holding bit for bit.
pub fn symmetric_disk(n: usize) -> Result<GridDensity> {
    let disk = shapes::unit_disk(n, 1.0)?;
    let half = symmetrize(&disk, &Reflection::axis(0, 0.0)?, Side::Positive)?.density;
    Ok(symmetrize(&half, &Reflection::axis(1, 0.0)?, Side::Positive)?.density)
}

/// Mass jumping over three empty cells.
pub fn gap_plan() -> Result<(GridDensity, DiscretePlan)> {
    let g = CellGrid::line(0.0, 1.0, 6)?;
    let rho = GridDensity::new(g.clone(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    let plan = DiscretePlan::from_transfers(g, 2.0, vec![Transfer { source: 0, target: 5, mass: 1.0 }])?;
    Ok((rho, plan))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Continuity {
    pub wp_rho: f64,
    pub n: Vec<usize>,
    pub wp_cubes: Vec<f64>,
    pub differences: Vec<f64>,
}

impl Continuity {
    /// Largest excess over `3/n` or over the previous difference.
    pub fn worst_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for (k, (&n, &d)) in self.n.iter().zip(&self.differences).enumerate() {
            worst = worst.max(d - 3.0 / n as f64);
            if k > 0 {
                worst = worst.max(d - self.differences[k - 1]);
            }
        }
        worst
    }
}

pub fn continuity(rho: &GridDensity, p: f64, ns: &[usize]) -> Result<Continuity> {
    let wp_rho = wp(solve_partial_ot(rho, p, EdgeFilter::All)?.energy, p);
    let wp_cubes = ns
        .par_iter()
        .map(|&n| {
            let e = cube_approximation(rho, n)?.indicator;
            Ok(wp(solve_partial_ot(&e, p, EdgeFilter::All)?.energy, p))
        })
        .collect::<Result<Vec<f64>>>()?;
    let differences = wp_cubes.iter().map(|w| (w - wp_rho).abs()).collect();
    Ok(Continuity { wp_rho, n: ns.to_vec(), wp_cubes, differences })
}

/// `W(rho) - (W(rho_1) + W(rho_2)) / 2` for the halves mirrored across the
/// median hyperplane orthogonal to `axis`, with its tolerance `4 diam^p`.
pub fn symmetrization_gap(rho: &GridDensity, axis: usize, p: f64) -> Result<(f64, f64)> {
    let offset = median_offsets(rho)[axis];
    let r = Reflection::axis(axis, offset)?;
    let hi = symmetrize(rho, &r, Side::Positive)?.density.padded(2);
    let lo = symmetrize(rho, &r, Side::Negative)?.density.padded(2);
    let e = solve_partial_ot(rho, p, EdgeFilter::All)?.energy;
    let e1 = solve_partial_ot(&hi, p, EdgeFilter::All)?.energy;
    let e2 = solve_partial_ot(&lo, p, EdgeFilter::All)?.energy;
    Ok((e - 0.5 * (e1 + e2), 4.0 * rho.grid().cell_diameter().powf(p)))
}

/// Rays of the unit-mass disk, some with a hole pushed outward and some
/// diluted, every ray keeping its mass.
pub fn ray_perturbation(rng: &mut impl Rng, n_rays: usize, dr: f64) -> Result<(RadialDensity, RadialDensity)> {
    let r = 1.0 / PI.sqrt();
    let cells = (2.0 * r / dr).ceil() as usize;
    let w = WeightedMeasure::radial(2);
    let q = sphere_measure(2) / n_rays as f64;
    let ray = |k: usize, blocks: &[(f64, f64, f64)]| -> Result<Ray> {
        Ok(Ray { angle: q * k as f64, weight: q, density: Density1D::from_blocks(0.0, dr, cells, w, blocks)? })
    };
    let mut disk = Vec::with_capacity(n_rays);
    let mut pert = Vec::with_capacity(n_rays);
    for k in 0..n_rays {
        disk.push(ray(k, &[(0.0, r, 1.0)])?);
        let blocks = match rng.gen_range(0..3) {
            0 => vec![(0.0, r, 1.0)],
            1 => {
                let a = rng.gen_range(0.0..0.8 * r);
                let b = a + rng.gen_range(0.05..0.2) * r;
                vec![(0.0, a, 1.0), (b, (r * r + b * b - a * a).sqrt(), 1.0)]
            }
            _ => {
                let v: f64 = rng.gen_range(0.6..0.95);
                vec![(0.0, r / v.sqrt(), v)]
            }
        };
        pert.push(ray(k, &blocks)?);
    }
    Ok((RadialDensity::new(2, [0.0; 2], disk)?, RadialDensity::new(2, [0.0; 2], pert)?))
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let p = cfg.p;
    let h = cfg.h;
    let [lo, hi] = cfg.domain;
    let samples = cfg.samples.min(VERIFY_SAMPLES) as u64;
    let mut checks = Vec::new();

    let interval = shapes::interval(0.0, 1.0, lo, hi, h)?;
    let disk = symmetric_disk(PLANE_CELLS)?;
    let interval_sol = solve_partial_ot(&interval, p, EdgeFilter::All)?;
    let disk_sol = solve_partial_ot(&disk, p, EdgeFilter::All)?;

    for (name, rho, sol) in [("interior_ball_interval", &interval, &interval_sol), ("interior_ball_disk", &disk, &disk_sol)] {
        let c = interior_ball_check(rho, &sol.plan)?;
        let mut check = Check::bounded(name, "interior ball condition", c.worst_gap, c.tolerance);
        if !c.violations.is_empty() {
            check.status = Status::Fail;
        }
        checks.push(check);
    }
    {
        let (rho, plan) = gap_plan()?;
        let c = interior_ball_check(&rho, &plan)?;
        let status = if c.violations.is_empty() { Status::Fail } else { Status::Pass };
        checks.push(Check {
            check: "interior_ball_negative_control".into(),
            paper_ref: "interior ball condition".into(),
            status,
            worst_violation: c.worst_gap,
            tolerance: c.tolerance,
        });
    }

    let mut worst = f64::NEG_INFINITY;
    for (rho, sol) in [(&interval, &interval_sol), (&disk, &disk_sol)] {
        let n = rho.dim();
        let bound = distance_constant(n) * rho.mass().powf(1.0 / n as f64) + 2.0 * rho.grid().cell_diameter();
        worst = worst.max(max_transport_distance(&sol.plan) - bound);
    }
    checks.push(Check::bounded("distance_bound", "transport distance bound", worst, 0.0));

    let scaling: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, 1000 + i);
            let (line, _) = unit_mass_density(&mut rng, [-2.0, 3.0], 0.02)?;
            let plane = blob_2d(&mut rng, 16, 1.0 / 16.0)?;
            let mut worst: f64 = 0.0;
            for rho in [line, plane] {
                let n = rho.dim() as f64;
                let e = solve_partial_ot(&rho, p, EdgeFilter::All)?.energy;
                let et = solve_partial_ot(&rho.rescale(2.0)?, p, EdgeFilter::All)?.energy;
                worst = worst.max((et - 2f64.powf(p + n) * e).abs() / et.max(f64::MIN_POSITIVE));
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    checks.push(Check::bounded("scaling_law", "scaling law", scaling.into_iter().fold(0.0, f64::max), 0.02));

    let half = shapes::blocks_1d(&[(0.0, 2.0, 0.5)], -1.0, 3.0, h)?;
    let ns = [4, 8, 16, 32];
    let c = continuity(&half, p, &ns)?;
    checks.push(Check::bounded("continuity_half_density", "continuity under cube approximation", c.worst_violation(), ORACLE_TOL));
    let soft = (0..)
        .find_map(|i| {
            let mut rng = sample_rng(cfg.seed, 2000 + i);
            match unit_mass_density(&mut rng, [-2.0, 3.0], h) {
                Ok((rho, true)) => Some(Ok(rho)),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .expect("an unbounded search finds a soft sample")?;
    let c = continuity(&soft, p, &ns)?;
    checks.push(Check::bounded("continuity_random_soft", "continuity under cube approximation", c.worst_violation(), ORACLE_TOL));

    let mut worst: f64 = 0.0;
    for axis in 0..2 {
        let r = Reflection::axis(axis, 0.0)?;
        let image = reflect_plan(&disk_sol.plan, &r)?;
        let f = image.check_feasibility(&disk);
        worst = worst.max((image.cost() - disk_sol.energy).abs()).max(f.first_marginal_error).max(f.capacity_excess);
    }
    checks.push(Check::bounded("symmetric_invariance", "reflection invariance of optimal plans", worst, ORACLE_TOL));

    // Crossed mass in units of the allowed two cells.
    let mut worst: f64 = 0.0;
    for (rho, sol) in [(&interval, &interval_sol), (&disk, &disk_sol)] {
        let med = median_offsets(rho);
        let origin = [med[0], med.get(1).copied().unwrap_or(0.0)];
        let cm = rho.grid().cell_measure();
        for axis in 0..rho.dim() {
            let mut normal = [0.0; 2];
            normal[axis] = 1.0;
            worst = worst.max(crossing_mass(&sol.plan, normal, origin) / (2.0 * cm));
        }
    }
    checks.push(Check::bounded("non_crossing_ball", "non-crossing of median hyperplanes at maximizers", worst, 1.0));

    let gaps: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, 3000 + i);
            let rho = blob_2d(&mut rng, 12, 1.0 / 12.0)?.padded(4);
            let (gap, tol) = symmetrization_gap(&rho, (i % 2) as usize, p)?;
            Ok(gap - tol)
        })
        .collect::<Result<_>>()?;
    checks.push(Check::bounded(
        "symmetrization_inequality",
        "energy symmetrization inequality",
        gaps.into_iter().fold(f64::NEG_INFINITY, f64::max),
        0.0,
    ));

    let diffs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, 4000 + i);
            let w = if i % 2 == 0 { WeightedMeasure::Constant } else { WeightedMeasure::power(1.0)? };
            let rho = half_line(&mut rng, w, 0.01)?;
            let sweep = sweep_rightward(&rho, p)?;
            let opts = SolveOptions { filter: EdgeFilter::Rightward, prune: true };
            let oracle = solve_line(&sweep.domain, p, &opts)?;
            Ok((sweep.energy - oracle.energy).abs())
        })
        .collect::<Result<_>>()?;
    checks.push(Check::bounded("sweep_oracle_equivalence", "rightward auxiliary problem", diffs.into_iter().fold(0.0, f64::max), ORACLE_TOL));

    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let mut rng = sample_rng(cfg.seed, 5000 + i);
        let w = if i % 2 == 0 { WeightedMeasure::Constant } else { WeightedMeasure::power(1.0)? };
        let rho = half_line(&mut rng, w, 0.01)?;
        let d = profile_dominates(&rho, 200)?;
        worst = f64::max(worst, d.max_violation - d.tolerance);
    }
    checks.push(Check::bounded("profile_domination", "distance profile domination", worst, 0.0));

    let mut rows: Vec<_> = (0..samples).into_par_iter().map(|i| random_row(cfg, i)).collect::<Result<_>>()?;
    rows.push(evaluate("ball".into(), false, &shapes::interval(-0.5, 0.5, lo, hi, h)?, cfg)?);
    let worst_deficit = rows.iter().map(|r| -r.deficit).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::bounded("ball_maximality_1d", "maximality of the ball", worst_deficit, 10.0 * h));
    let worst_ratio = rows
        .iter()
        .filter(|r| r.asymmetry > RATIO_THRESHOLD)
        .map(|r| 1e-3 * r.asymmetry * r.asymmetry - r.deficit)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::bounded("quantitative_deficit_1d", "quantitative maximality", worst_ratio, 0.0));

    let plane = shapes::unit_disk(PLANE_CELLS, 1.0)?;
    let oracle = solve_partial_ot(&plane, p, EdgeFilter::All)?.energy;
    let radial = radial_energy(&decompose(&plane, cfg.rays)?, p)?;
    let ball = ball_energy_nd(2, p, 1.0)?;
    let worst = ((radial - oracle).abs() / oracle).max((oracle - ball).abs() / ball);
    checks.push(Check::bounded("radial_consistency_disk", "radial decomposition of the ball", worst, 0.02));

    let worst = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, 6000 + i);
            let (base, pert) = ray_perturbation(&mut rng, 64, 2e-3)?;
            Ok(radial_energy(&pert, p)? - radial_energy(&base, p)?)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::bounded("ray_maximality", "maximality along rays", worst, 1e-6));

    let mut worst: f64 = 0.0;
    for n in 1..=3usize {
        let dr = 1e-3;
        let r = 0.8;
        let cells = (r / dr) as usize;
        let rho = Density1D::new(0.0, dr, vec![1.0; cells], WeightedMeasure::radial(n))?;
        let s = sweep_rightward(&rho, p)?;
        let end = s.plan.parcels().iter().map(|q| q.target).fold(0.0, f64::max);
        worst = worst.max((end - 2f64.powf(1.0 / n as f64) * r).abs() / dr);
    }
    checks.push(Check::bounded("boundary_factor", "outer radius of the ball image", worst, 1.0));

    let star = star_shape_profile(&shapes::unit_disk(2 * PLANE_CELLS, 1.0)?, cfg.rays)?;
    checks.push(Check {
        check: "star_shape_holder".into(),
        paper_ref: "regularity of the ray lengths".into(),
        status: Status::Info,
        worst_violation: star.holder,
        tolerance: f64::INFINITY,
    });
    Ok(checks)
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.status != Status::Fail)
}
