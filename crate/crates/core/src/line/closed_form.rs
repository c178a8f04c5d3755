use crate::error::{check_exponent, domain, Result};
use crate::measure::{GridDensity, WeightedMeasure};
use crate::quad::integrate;
use crate::shapes;

/// Energy of the interval `[0, l]` of mass `m` under the rightward shift by volume `m`.
pub fn interval_energy(m: f64, measure: WeightedMeasure, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if !(m.is_finite() && m >= 0.0) {
        return Err(domain(format!("mass must be nonnegative, got {m}")));
    }
    match measure {
        WeightedMeasure::Constant => Ok(m.powf(p + 1.0)),
        _ => {
            let l = measure.inverse_cumulative(m);
            let f = |x: f64| (measure.advance(x, m) - x).powf(p) * measure.weight(x);
            Ok(integrate(f, 0.0, l, 1e-15, 1e-11).value)
        }
    }
}

/// `W_p^p` of the unit interval.
pub fn ball_energy_1d(p: f64) -> f64 {
    2f64.powf(-p)
}

/// The three-block perturbation of the unit interval
/// `chi[-1/2-e, -1/2] + chi[-1/2+e, 1/2-e] + chi[1/2, 1/2+e]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharpExample {
    pub eps: f64,
    pub p: f64,
}

pub fn sharp_example(eps: f64, p: f64) -> Result<SharpExample> {
    check_exponent(p)?;
    if !(eps > 0.0 && eps < 0.25) {
        return Err(domain(format!("perturbation size must lie in (0, 1/4), got {eps}")));
    }
    Ok(SharpExample { eps, p })
}

impl SharpExample {
    pub fn blocks(&self) -> [(f64, f64); 3] {
        let e = self.eps;
        [(-0.5 - e, -0.5), (-0.5 + e, 0.5 - e), (0.5, 0.5 + e)]
    }

    pub fn energy(&self) -> f64 {
        let (e, p) = (self.eps, self.p);
        ball_energy_1d(p) - 4.0 * e * (ball_energy_1d(p) - (0.5 - e).powf(p))
    }

    pub fn deficit(&self) -> f64 {
        ball_energy_1d(self.p) - self.energy()
    }

    /// Distance to the closest unit interval: any window misses at least `eps`
    /// of the mass and `[-1/2 + e, 1/2 + e]` misses exactly that.
    pub fn asymmetry(&self) -> f64 {
        2.0 * self.eps
    }

    /// `L^1` distance to the centered interval `[-1/2, 1/2]`.
    pub fn centered_distance(&self) -> f64 {
        4.0 * self.eps
    }

    /// Rasterization on cells of width `h` covering `[x_lo, x_hi]`.
    pub fn density(&self, x_lo: f64, x_hi: f64, h: f64) -> Result<GridDensity> {
        shapes::union_of_intervals(&self.blocks(), x_lo, x_hi, h)
    }
}
