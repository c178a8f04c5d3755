use std::io::Write;

use serde::Serialize;

use super::sweep::{sweep_rightward, MonotonePlan};
use crate::error::{domain, Result};
use crate::measure::{Density1D, VolumeProfile, WeightedMeasure};

/// Transport distance of the parcel covering each of `n` evenly spaced volumes.
pub fn distance_profile(rho: &Density1D, plan: &MonotonePlan, n: usize) -> Result<VolumeProfile> {
    if n == 0 {
        return Err(domain("profile needs at least one sample"));
    }
    let total = plan.mass();
    let mut out = VolumeProfile::default();
    let parcels = plan.parcels();
    let mut k = 0;
    let mut before = 0.0;
    for j in 1..=n {
        let v = total * j as f64 / (n + 1) as f64;
        while k + 1 < parcels.len() && before + parcels[k].mass < v {
            before += parcels[k].mass;
            k += 1;
        }
        out.volumes.push(v);
        out.positions.push(rho.volume_inverse(v.min(rho.mass()))?);
        out.distances.push(parcels.get(k).map_or(0.0, |q| q.distance()));
    }
    Ok(out)
}

/// Profile `d(v)` of the interval `[0, l]` of mass `m`: `gamma([V^{-1}(v), V^{-1}(v) + d]) = m`.
pub fn reference_profile(m: f64, measure: WeightedMeasure, volumes: &[f64]) -> Vec<f64> {
    volumes
        .iter()
        .map(|&v| match measure {
            WeightedMeasure::Constant => m,
            _ => measure.inverse_cumulative(v + m) - measure.inverse_cumulative(v),
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Domination {
    pub dominates: bool,
    /// Largest `d_rho(v) - d(v)` over the samples.
    pub max_violation: f64,
    pub tolerance: f64,
    pub reference: Vec<f64>,
    pub profile: VolumeProfile,
}

impl Domination {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["v", "d", "d_rho"])?;
        for ((v, d), dr) in self.profile.volumes.iter().zip(&self.reference).zip(&self.profile.distances) {
            wr.write_record([v.to_string(), d.to_string(), dr.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Compares the rightward distance profile of `rho` against that of the
/// equal-mass interval at the origin, allowing two cells of slack.
pub fn profile_dominates(rho: &Density1D, n_samples: usize) -> Result<Domination> {
    let sweep = sweep_rightward(rho, 2.0)?;
    let profile = distance_profile(rho, &sweep.plan, n_samples)?;
    let reference = reference_profile(rho.mass(), rho.measure(), &profile.volumes);
    let max_violation = profile
        .distances
        .iter()
        .zip(&reference)
        .map(|(dr, d)| dr - d)
        .fold(f64::NEG_INFINITY, f64::max);
    let tolerance = 2.0 * rho.h();
    Ok(Domination { dominates: max_violation <= tolerance, max_violation, tolerance, reference, profile })
}
