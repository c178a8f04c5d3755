use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::measure::{CellGrid, GridDensity};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transfer {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

/// Transport plan between cell centers of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePlan {
    grid: CellGrid,
    p: f64,
    transfers: Vec<Transfer>,
    cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Feasibility {
    /// Largest `|sent_i - rho_i |cell||`.
    pub first_marginal_error: f64,
    /// Largest `received_j - (1 - rho_j) |cell|`.
    pub capacity_excess: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub energy_p: f64,
    pub p: f64,
    pub mass: f64,
    pub max_distance: f64,
    pub certificate_gap: f64,
}

impl DiscretePlan {
    pub fn from_transfers(grid: CellGrid, p: f64, transfers: Vec<Transfer>) -> Result<Self> {
        for t in &transfers {
            if t.source >= grid.len() || t.target >= grid.len() {
                return Err(domain(format!("transfer {t:?} leaves the grid")));
            }
            if !(t.mass >= 0.0) {
                return Err(domain(format!("transfer {t:?} has negative mass")));
            }
        }
        let cost = transfers.iter().map(|t| t.mass * grid.distance(t.source, t.target).powf(p)).sum();
        Ok(DiscretePlan { grid, p, transfers, cost })
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn transfers(&self) -> &[Transfer] {
        &self.transfers
    }
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn distance(&self, t: &Transfer) -> f64 {
        self.grid.distance(t.source, t.target)
    }

    pub fn mass(&self) -> f64 {
        self.transfers.iter().map(|t| t.mass).sum()
    }

    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut sent = vec![0.0; self.grid.len()];
        let mut received = vec![0.0; self.grid.len()];
        for t in &self.transfers {
            sent[t.source] += t.mass;
            received[t.target] += t.mass;
        }
        (sent, received)
    }

    pub fn check_feasibility(&self, rho: &GridDensity) -> Feasibility {
        let cm = self.grid.cell_measure();
        let (sent, received) = self.marginals();
        let mut f = Feasibility { first_marginal_error: 0.0, capacity_excess: 0.0 };
        for (i, &v) in rho.values().iter().enumerate() {
            f.first_marginal_error = f.first_marginal_error.max((sent[i] - v * cm).abs());
            f.capacity_excess = f.capacity_excess.max(received[i] - (1.0 - v) * cm);
        }
        f
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.grid.dim() == 1 {
            wr.write_record(["source_x", "target_x", "mass"])?;
        } else {
            wr.write_record(["source_x", "source_y", "target_x", "target_y", "mass"])?;
        }
        for t in &self.transfers {
            let a = self.grid.center(t.source);
            let b = self.grid.center(t.target);
            if self.grid.dim() == 1 {
                wr.write_record([a[0].to_string(), b[0].to_string(), t.mass.to_string()])?;
            } else {
                wr.write_record([
                    a[0].to_string(),
                    a[1].to_string(),
                    b[0].to_string(),
                    b[1].to_string(),
                    t.mass.to_string(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn max_transport_distance(plan: &DiscretePlan) -> f64 {
    plan.transfers.iter().filter(|t| t.mass > 0.0).map(|t| plan.distance(t)).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallViolation {
    pub source: usize,
    pub target: usize,
    /// Unused capacity inside the open ball through the target.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallCheck {
    pub checked: usize,
    pub worst_gap: f64,
    pub tolerance: f64,
    pub violations: Vec<BallViolation>,
}

/// For every transfer `x -> y` longer than two cell diameters, the free space
/// strictly closer to `x` than `y` must already be filled.
pub fn interior_ball_check(rho: &GridDensity, plan: &DiscretePlan) -> Result<BallCheck> {
    let g = plan.grid();
    if rho.grid() != g {
        return Err(domain("density and plan live on different grids"));
    }
    let cm = g.cell_measure();
    let (_, received) = plan.marginals();
    let free: Vec<f64> =
        rho.values().iter().zip(&received).map(|(v, r)| ((1.0 - v) * cm - r).max(0.0)).collect();
    let h = g.h();
    let shape = g.shape();
    let tolerance = 3.0 * cm;
    let mut check = BallCheck { checked: 0, worst_gap: 0.0, tolerance, violations: Vec::new() };
    for t in plan.transfers() {
        let r = plan.distance(t);
        if t.mass <= 0.0 || r <= 2.0 * g.cell_diameter() {
            continue;
        }
        check.checked += 1;
        let x = g.center(t.source);
        let [a0, a1] = g.multi(t.source);
        let k = (r / h).ceil() as usize + 1;
        let k1 = if g.dim() == 2 { k } else { 0 };
        let strict = r * (1.0 - 1e-12);
        let mut gap = 0.0;
        for b0 in a0.saturating_sub(k)..(a0 + k + 1).min(shape[0]) {
            for b1 in a1.saturating_sub(k1)..(a1 + k1 + 1).min(shape[1]) {
                let j = g.flat(b0, b1);
                let c = g.center(j);
                if ((c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2)).sqrt() < strict {
                    gap += free[j];
                }
            }
        }
        check.worst_gap = check.worst_gap.max(gap);
        if gap > tolerance {
            check.violations.push(BallViolation { source: t.source, target: t.target, gap });
        }
    }
    Ok(check)
}

/// Mass moved across the hyperplane `<x - origin, normal> = 0`, ignoring
/// transfers with an endpoint within one cell width of it.
pub fn crossing_mass(plan: &DiscretePlan, normal: [f64; 2], origin: [f64; 2]) -> f64 {
    let g = plan.grid();
    let h = g.h();
    let side = |x: [f64; 2]| (x[0] - origin[0]) * normal[0] + (x[1] - origin[1]) * normal[1];
    plan.transfers()
        .iter()
        .filter(|t| {
            let a = side(g.center(t.source));
            let b = side(g.center(t.target));
            a.abs() >= h && b.abs() >= h && a * b < 0.0
        })
        .map(|t| t.mass)
        .sum()
}
