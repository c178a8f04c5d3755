//! Exact discrete oracle: the constrained problem on a grid as a min-cost flow.

mod engine;
mod plan;

pub use plan::{
    crossing_mass, interior_ball_check, max_transport_distance, BallCheck, BallViolation, DiscretePlan, EnergyReport,
    Feasibility, Transfer,
};

use rayon::prelude::*;

use crate::error::{check_exponent, Error, Result};
use crate::measure::{distance_constant, CellGrid, Density1D, GridDensity, WeightedMeasure};
use engine::{Network, MASS_SCALE};

/// Which source-target pairs a plan may use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EdgeFilter {
    All,
    /// Only `y >= x` along the first coordinate.
    Rightward,
    /// Only pairs on the same closed side of the hyperplane through `origin` with unit `normal`.
    WithinHalfspaces { normal: [f64; 2], origin: [f64; 2] },
}

impl EdgeFilter {
    fn allows(&self, x: [f64; 2], y: [f64; 2]) -> bool {
        match *self {
            EdgeFilter::All => true,
            EdgeFilter::Rightward => y[0] >= x[0],
            EdgeFilter::WithinHalfspaces { normal, origin } => {
                let sx = (x[0] - origin[0]) * normal[0] + (x[1] - origin[1]) * normal[1];
                let sy = (y[0] - origin[0]) * normal[0] + (y[1] - origin[1]) * normal[1];
                sx * sy >= 0.0
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub filter: EdgeFilter,
    /// Drop pairs farther apart than the a priori bound on transport distances.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { filter: EdgeFilter::All, prune: true }
    }
}

#[derive(Clone, Debug)]
pub struct OtSolution {
    pub plan: DiscretePlan,
    pub energy: f64,
    /// Largest violation of dual feasibility or complementary slackness.
    pub certificate_gap: f64,
    /// Whether the accepted solve ran on the pruned edge set.
    pub pruned: bool,
    pub phases: usize,
}

impl OtSolution {
    pub fn report(&self, mass: f64) -> EnergyReport {
        EnergyReport {
            energy_p: self.energy,
            p: self.plan.p(),
            mass,
            max_distance: max_transport_distance(&self.plan),
            certificate_gap: self.certificate_gap,
        }
    }
}

struct Sites {
    grid: CellGrid,
    supply: Vec<i64>,
    capacity: Vec<i64>,
}

/// Problems on more cells than this start from the potentials of the twice coarser problem.
const WARM_START_CELLS: usize = 512;

impl Sites {
    fn coarse_cell(&self, i: usize, coarse: &CellGrid) -> usize {
        let [a0, a1] = self.grid.multi(i);
        coarse.flat(a0 / 2, a1 / 2)
    }

    /// Merges blocks of two cells per axis, summing supplies and capacities.
    fn coarsen(&self) -> Result<Sites> {
        let g = &self.grid;
        let dim = g.dim();
        let [n0, n1] = g.shape();
        let shape = [n0.div_ceil(2), n1.div_ceil(2)];
        let grid = CellGrid::new(dim, 2.0 * g.h(), &g.origin()[..dim], &shape[..dim])?;
        let mut supply = vec![0; grid.len()];
        let mut capacity = vec![0; grid.len()];
        for i in 0..g.len() {
            let c = self.coarse_cell(i, &grid);
            supply[c] += self.supply[i];
            capacity[c] += self.capacity[i];
        }
        Ok(Sites { grid, supply, capacity })
    }
}

/// What one solve hands to the next: final potentials (NaN off the sources),
/// the terminal potential and how far each source cell ships.
struct Warm {
    source: Vec<f64>,
    terminal: f64,
    reach: Vec<f64>,
}

/// Start lifted from the twice coarser problem, if it solves.
fn coarse_start(sites: &Sites, p: f64, opts: &SolveOptions, radius: f64) -> Option<Warm> {
    if sites.grid.len() <= WARM_START_CELLS {
        return None;
    }
    let coarse = sites.coarsen().ok()?;
    let margin = 2.0 * coarse.grid.cell_diameter();
    let (_, w) = solve_sites(&coarse, p, opts, radius + margin).ok()?;
    let parent: Vec<usize> = (0..sites.grid.len()).map(|i| sites.coarse_cell(i, &coarse.grid)).collect();
    let source: Vec<f64> = parent.iter().map(|&c| w.source[c]).collect();
    let usable = (0..source.len()).all(|i| sites.supply[i] == 0 || source[i].is_finite());
    let reach = parent.iter().map(|&c| w.reach[c] + margin).collect();
    usable.then_some(Warm { source, terminal: w.terminal, reach })
}

fn to_units(x: f64) -> i64 {
    (x * MASS_SCALE).round() as i64
}

/// Optimal plan of the constrained problem for a grid density.
pub fn solve_partial_ot(rho: &GridDensity, p: f64, filter: EdgeFilter) -> Result<OtSolution> {
    solve_partial_ot_with(rho, p, &SolveOptions { filter, prune: true })
}

pub fn solve_partial_ot_with(rho: &GridDensity, p: f64, opts: &SolveOptions) -> Result<OtSolution> {
    check_exponent(p)?;
    let grid = rho.grid().clone();
    let cm = grid.cell_measure();
    let sites = Sites {
        supply: rho.values().iter().map(|v| to_units(v * cm)).collect(),
        capacity: rho.values().iter().map(|v| to_units((1.0 - v) * cm)).collect(),
        grid,
    };
    let n = sites.grid.dim();
    let radius = distance_constant(n) * rho.mass().powf(1.0 / n as f64) + 2.0 * sites.grid.cell_diameter();
    Ok(solve_sites(&sites, p, opts, radius)?.0)
}

/// Oracle for a density on a weighted line, with cell masses `gamma(cell)`.
pub fn solve_line(rho: &Density1D, p: f64, opts: &SolveOptions) -> Result<OtSolution> {
    check_exponent(p)?;
    let grid = CellGrid::line(rho.x_lo(), rho.h(), rho.len())?;
    let sites = Sites {
        supply: (0..rho.len()).map(|i| to_units(rho.values()[i] * rho.cell_measure(i))).collect(),
        capacity: (0..rho.len()).map(|i| to_units((1.0 - rho.values()[i]) * rho.cell_measure(i))).collect(),
        grid,
    };
    let w = rho.measure();
    let m = rho.mass();
    let reach = match (opts.filter, w) {
        (EdgeFilter::Rightward, _) => w.inverse_cumulative(m),
        (_, WeightedMeasure::Constant) => m,
        _ => w.inverse_cumulative(2.0 * m),
    };
    Ok(solve_sites(&sites, p, opts, reach + 2.0 * rho.h())?.0)
}

fn pair_cost(grid: &CellGrid, i: usize, j: usize, p: f64) -> f64 {
    grid.distance(i, j).powf(p)
}

/// Edge widenings before falling back to the unrestricted edge set.
const MAX_WIDENINGS: usize = 16;

/// Without pruning every allowed pair is an edge. With pruning, large problems
/// start from the coarse plan's reach per source and widen wherever the dual
/// certificate finds a cheaper pair outside the edge set; small ones use the
/// a priori distance bound.
fn solve_sites(sites: &Sites, p: f64, opts: &SolveOptions, radius: f64) -> Result<(OtSolution, Warm)> {
    let grid = &sites.grid;
    let sources: Vec<usize> = (0..grid.len()).filter(|&i| sites.supply[i] > 0).collect();
    let sinks: Vec<usize> = (0..grid.len()).filter(|&j| sites.capacity[j] > 0).collect();
    let total_supply: i64 = sources.iter().map(|&i| sites.supply[i]).sum();
    let total_cap: i64 = sinks.iter().map(|&j| sites.capacity[j]).sum();
    if total_supply == 0 {
        let sol = OtSolution {
            plan: DiscretePlan::from_transfers(grid.clone(), p, Vec::new())?,
            energy: 0.0,
            certificate_gap: 0.0,
            pruned: opts.prune,
            phases: 0,
        };
        let nan = vec![f64::NAN; grid.len()];
        return Ok((sol, Warm { source: nan.clone(), terminal: 0.0, reach: nan }));
    }
    if total_supply > total_cap {
        return Err(Error::Capacity {
            shortfall: (total_supply - total_cap) as f64 / MASS_SCALE,
            required_extension: None,
        });
    }
    let mut warm = if opts.prune { coarse_start(sites, p, opts, radius) } else { None };
    let mut radii: Option<Vec<f64>> = opts.prune.then(|| match &warm {
        Some(w) => sources.iter().map(|&i| w.reach[i].min(radius)).collect(),
        None => vec![radius; sources.len()],
    });
    let mut widenings = 0;
    loop {
        match run(sites, &sources, &sinks, p, opts, radii.as_deref(), warm.as_ref()) {
            Ok(Attempt::Solved(sol, w)) => return Ok((sol, w)),
            Ok(Attempt::Widen(needed, w)) if widenings < MAX_WIDENINGS => {
                let r = radii.as_mut().expect("an unrestricted solve never widens");
                for (ri, &n) in r.iter_mut().zip(&needed) {
                    if n > *ri {
                        *ri = n.max(2.0 * *ri);
                    }
                }
                warm = Some(w);
                widenings += 1;
            }
            Ok(Attempt::Widen(..)) => radii = None,
            Err(Error::Capacity { .. }) if radii.as_ref().is_some_and(|r| r.iter().any(|&ri| ri < radius)) => {
                radii = Some(vec![radius; sources.len()]);
            }
            Err(Error::Capacity { .. }) | Err(Error::Solver(_)) if radii.is_some() => {
                radii = None;
                warm = None;
            }
            Err(e) => return Err(e),
        }
    }
}

enum Attempt {
    Solved(OtSolution, Warm),
    /// Per source, the distance out to which its edges must reach.
    Widen(Vec<f64>, Warm),
}

fn run(
    sites: &Sites,
    sources: &[usize],
    sinks: &[usize],
    p: f64,
    opts: &SolveOptions,
    radii: Option<&[f64]>,
    warm: Option<&Warm>,
) -> Result<Attempt> {
    let grid = &sites.grid;
    let mut sink_of_cell = vec![u32::MAX; grid.len()];
    for (k, &j) in sinks.iter().enumerate() {
        sink_of_cell[j] = k as u32;
    }
    let h = grid.h();
    let shape = grid.shape();
    let edges: Vec<Vec<(u32, f64)>> = sources
        .par_iter()
        .enumerate()
        .map(|(si, &i)| {
            let radius = radii.map(|r| r[si]);
            let xi = grid.center(i);
            let [a0, a1] = grid.multi(i);
            let (r0, r1) = match radius {
                Some(r) => {
                    let k = (r / h).ceil() as usize + 1;
                    (k, if grid.dim() == 2 { k } else { 0 })
                }
                None => (shape[0], shape[1]),
            };
            let mut list = Vec::new();
            for b0 in a0.saturating_sub(r0)..(a0 + r0 + 1).min(shape[0]) {
                for b1 in a1.saturating_sub(r1)..(a1 + r1 + 1).min(shape[1]) {
                    let j = grid.flat(b0, b1);
                    let k = sink_of_cell[j];
                    if k == u32::MAX {
                        continue;
                    }
                    let xj = grid.center(j);
                    if !opts.filter.allows(xi, xj) {
                        continue;
                    }
                    let d = grid.distance(i, j);
                    if radius.is_some_and(|r| d > r) {
                        continue;
                    }
                    list.push((k, d.powf(p)));
                }
            }
            list
        })
        .collect();
    let mut net = Network::new(
        sources.iter().map(|&i| sites.supply[i]).collect(),
        sinks.iter().map(|&j| sites.capacity[j]).collect(),
        edges,
    );
    if let Some(w) = warm {
        net.warm_start(&sources.iter().map(|&i| w.source[i]).collect::<Vec<_>>(), w.terminal);
    }
    net.solve()?;
    let cert = certificate(&net, sites, sources, sinks, p, opts)?;

    let mut transfers = Vec::new();
    let mut source = vec![f64::NAN; grid.len()];
    let mut reach = vec![f64::NAN; grid.len()];
    for (si, &i) in sources.iter().enumerate() {
        source[i] = net.pot[si];
        reach[i] = 0.0;
        for e in net.edge_start[si]..net.edge_start[si + 1] {
            let f = net.edge_flow[e];
            if f > 0 {
                let target = sinks[net.edge_sink[e] as usize];
                reach[i] = reach[i].max(grid.distance(i, target));
                transfers.push(Transfer { source: i, target, mass: f as f64 / MASS_SCALE });
            }
        }
    }
    let w = Warm { source, terminal: net.pot[sources.len() + sinks.len()], reach };
    if cert.dual_violation > cert.tol {
        let outside = radii.is_some_and(|r| cert.needed.iter().zip(r).any(|(n, r)| n > r));
        if !outside {
            return Err(Error::Solver(format!("dual feasibility violated by {:.3e}", cert.dual_violation)));
        }
        return Ok(Attempt::Widen(cert.needed, w));
    }
    transfers.sort_by_key(|t| (t.source, t.target));
    let plan = DiscretePlan::from_transfers(grid.clone(), p, transfers)?;
    let gap = cert.slackness_gap.max(cert.dual_violation);
    let sol = OtSolution { energy: plan.cost(), plan, certificate_gap: gap, pruned: radii.is_some(), phases: net.phases };
    Ok(Attempt::Solved(sol, w))
}

struct Certificate {
    tol: f64,
    slackness_gap: f64,
    dual_violation: f64,
    /// Per source, the farthest allowed sink with negative reduced cost (0 if none).
    needed: Vec<f64>,
}

/// Complementary slackness on used edges and at the terminal (an error when
/// violated), plus dual feasibility over every allowed pair, in the edge set
/// or not.
fn certificate(
    net: &Network,
    sites: &Sites,
    sources: &[usize],
    sinks: &[usize],
    p: f64,
    opts: &SolveOptions,
) -> Result<Certificate> {
    let grid = &sites.grid;
    let ns = sources.len();
    let t = ns + sinks.len();
    let pot_t = net.pot[t];
    let tol = 1e-9 * pot_t.abs().max(1.0);

    let mut gap: f64 = 0.0;
    for e in 0..net.edge_flow.len() {
        if net.edge_flow[e] > 0 {
            let i = net.edge_src[e] as usize;
            let j = net.edge_sink[e] as usize;
            let rc = net.edge_cost[e] + net.pot[i] - net.pot[ns + j];
            gap = gap.max(rc.abs());
        }
    }
    let mut received = vec![false; sinks.len()];
    for e in 0..net.edge_flow.len() {
        if net.edge_flow[e] > 0 {
            received[net.edge_sink[e] as usize] = true;
        }
    }
    for k in 0..sinks.len() {
        let pj = net.pot[ns + k];
        if net.cap_left[k] > 0 {
            gap = gap.max(pot_t - pj);
        }
        if received[k] {
            gap = gap.max(pj - pot_t);
        }
    }
    if gap > tol {
        return Err(Error::Solver(format!("complementary slackness violated by {gap:.3e}")));
    }
    let per_source: Vec<(f64, f64)> = sources
        .par_iter()
        .enumerate()
        .map(|(si, &i)| {
            let xi = grid.center(i);
            let pi = net.pot[si];
            let (mut w, mut far): (f64, f64) = (0.0, 0.0);
            for (k, &j) in sinks.iter().enumerate() {
                let pj = net.pot[ns + k];
                let xj = grid.center(j);
                if !opts.filter.allows(xi, xj) {
                    continue;
                }
                let rc = pair_cost(grid, i, j, p) + pi - pj;
                w = w.max(-rc);
                if -rc > tol {
                    far = far.max(grid.distance(i, j));
                }
            }
            (w, far)
        })
        .collect();
    let dual_violation = per_source.iter().map(|x| x.0).fold(0.0, f64::max);
    let needed = per_source.into_iter().map(|x| x.1).collect();
    Ok(Certificate { tol, slackness_gap: gap, dual_violation, needed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn unit_interval_energy() {
        let rho = shapes::interval(0.0, 1.0, -1.0, 2.0, 0.01).unwrap();
        let sol = solve_partial_ot(&rho, 2.0, EdgeFilter::All).unwrap();
        assert!((sol.energy - 0.25).abs() < 5e-3, "{}", sol.energy);
        assert!(sol.certificate_gap < 1e-9);
        let f = sol.plan.check_feasibility(&rho);
        assert!(f.first_marginal_error < 1e-9 && f.capacity_excess < 1e-9);
    }

    #[test]
    fn rightward_filter_reproduces_shift() {
        let rho = shapes::interval(0.0, 1.0, -0.5, 2.5, 0.02).unwrap();
        let sol = solve_partial_ot(&rho, 2.0, EdgeFilter::Rightward).unwrap();
        assert!((sol.energy - 1.0).abs() < 1e-9, "{}", sol.energy);
    }

    #[test]
    fn full_box_is_infeasible() {
        let rho = shapes::interval(0.0, 1.0, 0.0, 1.0, 0.1).unwrap();
        assert!(matches!(solve_partial_ot(&rho, 2.0, EdgeFilter::All), Err(Error::Capacity { .. })));
    }

    #[test]
    fn empty_density_costs_nothing() {
        let rho = GridDensity::zeros(CellGrid::line(0.0, 0.1, 10).unwrap());
        let sol = solve_partial_ot(&rho, 2.0, EdgeFilter::All).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert!(sol.plan.transfers().is_empty());
    }

    #[test]
    fn weighted_line_matches_sweep_rightward() {
        let w = WeightedMeasure::power(1.0).unwrap();
        let vals: Vec<f64> = (0..60).map(|i| if (10..40).contains(&i) { ((i % 4) as f64) / 4.0 + 0.25 } else { 0.0 }).collect();
        let rho = Density1D::new(0.0, 0.05, vals, w).unwrap();
        let sweep = crate::line::sweep_rightward(&rho, 2.0).unwrap();
        let ext = sweep.domain.clone();
        let sol = solve_line(&ext, 2.0, &SolveOptions { filter: EdgeFilter::Rightward, prune: true }).unwrap();
        assert!((sol.energy - sweep.energy).abs() < 1e-8 * sweep.energy.max(1.0), "{} vs {}", sol.energy, sweep.energy);
    }

    fn assert_matches_unrestricted(rho: &GridDensity) {
        let fast = solve_partial_ot(rho, 2.0, EdgeFilter::All).unwrap();
        let full = solve_partial_ot_with(rho, 2.0, &SolveOptions { filter: EdgeFilter::All, prune: false }).unwrap();
        assert!((fast.energy - full.energy).abs() < 1e-9 * full.energy, "{} vs {}", fast.energy, full.energy);
        assert!(fast.certificate_gap < 1e-9);
        let f = fast.plan.check_feasibility(rho);
        assert!(f.first_marginal_error < 1e-9 && f.capacity_excess < 1e-9);
    }

    #[test]
    fn warm_started_line_matches_unrestricted() {
        let vals = (0..1001)
            .map(|i| if (300..550).contains(&i) { 0.55 + 0.4 * ((i * 7 % 11) as f64 / 11.0) } else { 0.0 })
            .collect();
        let rho = GridDensity::new(CellGrid::line(-1.0, 0.004, 1001).unwrap(), vals).unwrap();
        assert_matches_unrestricted(&rho);
    }

    #[test]
    fn warm_started_plane_matches_unrestricted() {
        let grid = CellGrid::square([0.0, 0.0], 1.0 / 16.0, 33, 31).unwrap();
        let vals = (0..grid.len())
            .map(|k| {
                let [a, b] = grid.multi(k);
                let inside = (10..22).contains(&a) && (9..21).contains(&b);
                if inside { 0.6 + 0.3 * (((a * 3 + b * 5) % 7) as f64 / 7.0) } else { 0.0 }
            })
            .collect();
        assert_matches_unrestricted(&GridDensity::new(grid, vals).unwrap());
    }

    #[test]
    fn coarsening_keeps_totals() {
        let grid = CellGrid::square([0.5, -1.0], 0.1, 5, 3).unwrap();
        let supply: Vec<i64> = (0..15).collect();
        let capacity: Vec<i64> = (0..15).map(|k| 100 - k).collect();
        let sites = Sites { grid, supply, capacity };
        let coarse = sites.coarsen().unwrap();
        assert_eq!(coarse.grid.shape(), [3, 2]);
        assert_eq!(coarse.grid.center(0), [0.6, -0.9]);
        assert_eq!(coarse.supply.iter().sum::<i64>(), 105);
        assert_eq!(coarse.capacity.iter().sum::<i64>(), 1395);
        assert_eq!(coarse.supply[coarse.grid.flat(2, 1)], 14);
    }

    #[test]
    fn restricted_edges_widen_to_the_optimum() {
        // Within 1.5, a = (0, 0) only reaches c = (0, 1). The optimum sends a
        // to f = (-1.55, 0) so that b = (0.5, 1) can use c instead of e = (1.9, 1).
        let grid = CellGrid::square([-1.625, -0.025], 0.05, 80, 24).unwrap();
        let (a, b) = (grid.flat(32, 0), grid.flat(42, 20));
        let (c, e, f) = (grid.flat(32, 20), grid.flat(70, 20), grid.flat(1, 0));
        let mut supply = vec![0; grid.len()];
        let mut capacity = vec![0; grid.len()];
        supply[a] = 1000;
        supply[b] = 1000;
        for j in [c, e, f] {
            capacity[j] = 1000;
        }
        let sites = Sites { grid, supply, capacity };
        let (sources, sinks) = (vec![a, b], vec![f, c, e]);
        let opts = SolveOptions::default();
        match run(&sites, &sources, &sinks, 2.0, &opts, Some(&[1.5, 1.5]), None).unwrap() {
            Attempt::Widen(needed, _) => assert!((needed[0] - 1.55).abs() < 1e-9 && needed[1] == 0.0, "{needed:?}"),
            Attempt::Solved(..) => panic!("the restricted optimum passed the certificate"),
        }
        let (sol, _) = solve_sites(&sites, 2.0, &opts, 1.5).unwrap();
        let unit = 1000.0 / MASS_SCALE;
        assert!((sol.energy - unit * (1.55f64.powi(2) + 0.25)).abs() < 1e-9 * unit, "{}", sol.energy);
    }
}
