//! Radial decomposition around a center and energies assembled ray by ray.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_exponent, domain, Error, Result};
use crate::line::sweep_rightward;
use crate::measure::{unit_ball_volume, Density1D, GridDensity, WeightedMeasure};
use crate::quad::integrate;
use crate::symmetry::median_offsets;

/// Surface measure `N omega_N` of the unit sphere in `R^N`.
pub fn sphere_measure(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Density along one direction, on the half-line with weight `r^(N-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    /// Polar angle of the direction (`0` or `pi` on the line).
    pub angle: f64,
    pub weight: f64,
    pub density: Density1D,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialDensity {
    dim: usize,
    center: [f64; 2],
    rays: Vec<Ray>,
}

impl RadialDensity {
    pub fn new(dim: usize, center: [f64; 2], rays: Vec<Ray>) -> Result<Self> {
        if dim == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        let total: f64 = rays.iter().map(|r| r.weight).sum();
        if (total - sphere_measure(dim)).abs() > 1e-9 {
            return Err(domain(format!("ray weights sum to {total}, expected {}", sphere_measure(dim))));
        }
        let w = WeightedMeasure::radial(dim);
        if let Some(r) = rays.iter().find(|r| r.density.measure() != w || r.density.x_lo() != 0.0) {
            return Err(domain(format!("ray at angle {} is not on the radial half-line", r.angle)));
        }
        Ok(RadialDensity { dim, center, rays })
    }

    /// Radially symmetric density with the given profile: two rays on the
    /// line, one ray carrying the whole sphere otherwise.
    pub fn isotropic(dim: usize, profile: Density1D) -> Result<Self> {
        let rays = if dim == 1 {
            vec![
                Ray { angle: 0.0, weight: 1.0, density: profile.clone() },
                Ray { angle: PI, weight: 1.0, density: profile },
            ]
        } else {
            vec![Ray { angle: 0.0, weight: sphere_measure(dim), density: profile }]
        };
        RadialDensity::new(dim, [0.0; 2], rays)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn center(&self) -> [f64; 2] {
        self.center
    }
    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn mass(&self) -> f64 {
        self.rays.iter().map(|r| r.weight * r.density.mass()).sum()
    }
}

fn bilinear(rho: &GridDensity, x: [f64; 2]) -> f64 {
    let g = rho.grid();
    let h = g.h();
    let o = g.origin();
    let [n0, n1] = g.shape();
    let u = (x[0] - o[0]) / h - 0.5;
    let v = (x[1] - o[1]) / h - 0.5;
    let (i, j) = (u.floor(), v.floor());
    let (s, t) = (u - i, v - j);
    let at = |a: f64, b: f64| -> f64 {
        if a < 0.0 || b < 0.0 || a >= n0 as f64 || b >= n1 as f64 {
            0.0
        } else {
            rho.get(a as usize, b as usize)
        }
    };
    (1.0 - s) * (1.0 - t) * at(i, j) + s * (1.0 - t) * at(i + 1.0, j) + (1.0 - s) * t * at(i, j + 1.0)
        + s * t * at(i + 1.0, j + 1.0)
}

/// Samples a planar density along `n_rays` equally spaced directions from its
/// median point, on radial cells of half the grid width.
pub fn decompose(rho: &GridDensity, n_rays: usize) -> Result<RadialDensity> {
    if rho.dim() != 2 {
        return Err(Error::UnsupportedGeometry("decomposition needs a planar grid".into()));
    }
    if n_rays == 0 {
        return Err(domain("at least one ray is needed"));
    }
    let med = median_offsets(rho);
    let center = [med[0], med[1]];
    let g = rho.grid();
    let (lo, hi) = (g.origin(), g.upper());
    let reach = [lo[0], hi[0]]
        .iter()
        .flat_map(|&x| [lo[1], hi[1]].map(|y| ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt()))
        .fold(0.0, f64::max);
    let dr = 0.5 * g.h();
    let n_r = (reach / dr).ceil() as usize;
    let q = 2.0 * PI / n_rays as f64;
    let w = WeightedMeasure::radial(2);
    let rays = (0..n_rays)
        .map(|k| {
            let angle = q * k as f64;
            let (sn, cs) = angle.sin_cos();
            let values = (0..n_r)
                .map(|i| {
                    let r = (i as f64 + 0.5) * dr;
                    bilinear(rho, [center[0] + r * cs, center[1] + r * sn]).clamp(0.0, 1.0)
                })
                .collect();
            Ok(Ray { angle, weight: q, density: Density1D::new(0.0, dr, values, w)? })
        })
        .collect::<Result<Vec<_>>>()?;
    RadialDensity::new(2, center, rays)
}

/// Rightward sweep energy of every ray, in ray order.
pub fn ray_energies(rd: &RadialDensity, p: f64) -> Result<Vec<f64>> {
    check_exponent(p)?;
    rd.rays
        .par_iter()
        .enumerate()
        .map(|(index, ray)| {
            sweep_rightward(&ray.density, p)
                .map(|s| s.energy)
                .map_err(|e| Error::Ray { index, source: Box::new(e) })
        })
        .collect()
}

/// `sum_w q_w W(rho^w)` with every ray transported outward. This is the exact
/// energy when the optimal plan is radial and an upper bound otherwise.
pub fn radial_energy(rd: &RadialDensity, p: f64) -> Result<f64> {
    let energies = ray_energies(rd, p)?;
    Ok(rd.rays.iter().zip(&energies).map(|(r, e)| r.weight * e).sum())
}

/// `W_p^p` of the ball of mass `m` in `R^N`, through its radial map
/// `r -> (r^N + R^N)^(1/N)`.
pub fn ball_energy_nd(n: usize, p: f64, m: f64) -> Result<f64> {
    check_exponent(p)?;
    if n == 0 || !(m > 0.0 && m.is_finite()) {
        return Err(domain("ball energy needs N >= 1 and a positive mass"));
    }
    let nf = n as f64;
    let big_r = (m / unit_ball_volume(n)).powf(1.0 / nf);
    let rn = big_r.powf(nf);
    let f = |r: f64| ((r.powf(nf) + rn).powf(1.0 / nf) - r).powf(p) * r.powf(nf - 1.0);
    let q = integrate(f, 0.0, big_r, 0.0, 1e-12);
    Ok(sphere_measure(n) * q.value)
}

/// Lower bound for the ray length in direction `w` forced by a boundary point
/// at distance `r` in direction `v` with `<v, w> = cos`.
pub fn ray_length_bound(r: f64, cos: f64, n: usize) -> f64 {
    let c = 2f64.powf(1.0 / n as f64);
    let disc = cos * cos - c * (2.0 - c);
    if disc < 0.0 {
        return 0.0;
    }
    (cos + disc.sqrt()) / c * r
}

#[derive(Clone, Debug, Serialize)]
pub struct StarProfile {
    pub angles: Vec<f64>,
    pub masses: Vec<f64>,
    pub lengths: Vec<f64>,
    /// `max |l_v - l_w| / |v - w|^2` over neighbouring directions.
    pub holder: f64,
}

/// Star-shaped radius `l^w` of every ray of an (almost) indicator density.
pub fn star_shape_profile(rho: &GridDensity, n_rays: usize) -> Result<StarProfile> {
    let soft = rho.values().iter().filter(|&&v| v > 0.05 && v < 0.95).count();
    let fraction = soft as f64 / rho.values().len().max(1) as f64;
    if fraction >= 0.05 {
        return Err(Error::Precondition(format!(
            "{:.1}% of the cells are neither empty nor full",
            100.0 * fraction
        )));
    }
    let rd = decompose(rho, n_rays)?;
    let w = WeightedMeasure::radial(2);
    let angles: Vec<f64> = rd.rays.iter().map(|r| r.angle).collect();
    let masses: Vec<f64> = rd.rays.iter().map(|r| r.density.mass()).collect();
    let lengths: Vec<f64> = masses.iter().map(|&m| w.inverse_cumulative(m)).collect();
    let n = lengths.len();
    let mut holder: f64 = 0.0;
    for k in 0..n {
        let next = (k + 1) % n;
        if next == k {
            break;
        }
        let mut dtheta = angles[next] - angles[k];
        if dtheta <= 0.0 {
            dtheta += 2.0 * PI;
        }
        let chord = 2.0 * (0.5 * dtheta).sin();
        holder = holder.max((lengths[next] - lengths[k]).abs() / (chord * chord));
    }
    Ok(StarProfile { angles, masses, lengths, holder })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RayRow {
    pub omega_angle: f64,
    pub m_omega: f64,
    pub ell_omega: f64,
    pub ray_energy: f64,
}

pub fn ray_table(rd: &RadialDensity, p: f64) -> Result<Vec<RayRow>> {
    let energies = ray_energies(rd, p)?;
    let w = WeightedMeasure::radial(rd.dim);
    Ok(rd
        .rays
        .iter()
        .zip(energies)
        .map(|(r, e)| {
            let m = r.density.mass();
            RayRow { omega_angle: r.angle, m_omega: m, ell_omega: w.inverse_cumulative(m), ray_energy: e }
        })
        .collect())
}

pub fn write_ray_csv<W: Write>(rows: &[RayRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}
