use std::collections::VecDeque;
use std::io::Write;

use serde::Serialize;

use crate::error::{check_exponent, Error, Result};
use crate::measure::Density1D;

/// A piece of mass moved from one cell midpoint to another.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Parcel {
    pub source_cell: usize,
    pub target_cell: usize,
    pub source: f64,
    pub target: f64,
    pub mass: f64,
}

impl Parcel {
    pub fn distance(&self) -> f64 {
        self.target - self.source
    }
}

/// Rightward plan listed in first-in first-out order: both the sources and
/// the targets are nondecreasing along the list.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonePlan {
    parcels: Vec<Parcel>,
    p: f64,
}

impl MonotonePlan {
    pub fn parcels(&self) -> &[Parcel] {
        &self.parcels
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn energy(&self) -> f64 {
        self.parcels.iter().map(|q| q.mass * q.distance().powf(self.p)).sum()
    }

    pub fn mass(&self) -> f64 {
        self.parcels.iter().map(|q| q.mass).sum()
    }

    pub fn max_distance(&self) -> f64 {
        self.parcels.iter().map(Parcel::distance).fold(0.0, f64::max)
    }

    /// Mass sent out of and received by each of `n` cells.
    pub fn marginals(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut out = vec![0.0; n];
        let mut inn = vec![0.0; n];
        for q in &self.parcels {
            out[q.source_cell] += q.mass;
            inn[q.target_cell] += q.mass;
        }
        (out, inn)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["source", "target", "mass"])?;
        for q in &self.parcels {
            wr.write_record([q.source.to_string(), q.target.to_string(), q.mass.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// How the sweep handles mass still queued at the right end of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// Append enough empty cells for the queue to always drain.
    Auto,
    /// Use the grid as given and fail with a capacity error.
    None,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub plan: MonotonePlan,
    pub energy: f64,
    /// The grid the sweep ran on, including appended empty cells.
    pub domain: Density1D,
}

/// Optimal rightward transport: each cell first queues its own mass, then
/// fills its free capacity from the front of the queue.
pub fn sweep_rightward(rho: &Density1D, p: f64) -> Result<Sweep> {
    sweep_rightward_with(rho, p, Extension::Auto)
}

pub fn sweep_rightward_with(rho: &Density1D, p: f64, extension: Extension) -> Result<Sweep> {
    check_exponent(p)?;
    let domain = match extension {
        Extension::None => rho.clone(),
        Extension::Auto => {
            let reach = rho.measure().inverse_cumulative(rho.mass());
            rho.extended((reach / rho.h()).ceil() as usize + 1)
        }
    };
    let mut queue: VecDeque<(usize, f64)> = VecDeque::new();
    let mut parcels = Vec::new();
    for (i, &v) in domain.values().iter().enumerate() {
        let cell = domain.cell_measure(i);
        if v > 0.0 {
            queue.push_back((i, v * cell));
        }
        let mut free = (1.0 - v) * cell;
        while free > 0.0 {
            let Some(front) = queue.front_mut() else { break };
            let take = front.1.min(free);
            parcels.push(Parcel {
                source_cell: front.0,
                target_cell: i,
                source: domain.midpoint(front.0),
                target: domain.midpoint(i),
                mass: take,
            });
            front.1 -= take;
            free -= take;
            if front.1 <= 0.0 {
                queue.pop_front();
            }
        }
    }
    if !queue.is_empty() {
        let shortfall: f64 = queue.iter().map(|q| q.1).sum();
        let end = domain.x_hi();
        let need = domain.measure().advance(end, shortfall) - end;
        return Err(Error::Capacity { shortfall, required_extension: Some(need) });
    }
    let plan = MonotonePlan { parcels, p };
    let energy = plan.energy();
    Ok(Sweep { plan, energy, domain })
}
