//! Reflections across hyperplanes, median cuts and symmetrization.

use crate::error::{domain, Error, Result};
use crate::flow::{DiscretePlan, Transfer};
use crate::measure::{CellGrid, GridDensity};

/// Reflection across `{x : <x - origin, normal> = 0}` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reflection {
    normal: [f64; 2],
    origin: [f64; 2],
}

/// Which open half-space of a [`Reflection`] to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `<x - origin, normal> > 0`.
    Positive,
    Negative,
}

impl Reflection {
    pub fn new(normal: [f64; 2], origin: [f64; 2]) -> Result<Self> {
        let len = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        if (len - 1.0).abs() > 1e-12 {
            return Err(domain(format!("hyperplane normal must have unit length, got {len}")));
        }
        Ok(Reflection { normal, origin })
    }

    /// Hyperplane `x_axis = offset`.
    pub fn axis(axis: usize, offset: f64) -> Result<Self> {
        if axis > 1 {
            return Err(domain(format!("axis {axis} out of range")));
        }
        let mut normal = [0.0; 2];
        normal[axis] = 1.0;
        let mut origin = [0.0; 2];
        origin[axis] = offset;
        Ok(Reflection { normal, origin })
    }

    pub fn normal(&self) -> [f64; 2] {
        self.normal
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn signed_distance(&self, x: [f64; 2]) -> f64 {
        (x[0] - self.origin[0]) * self.normal[0] + (x[1] - self.origin[1]) * self.normal[1]
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        if let Some(a) = self.aligned_axis() {
            let mut y = x;
            y[a] = 2.0 * self.origin[a] - x[a];
            return y;
        }
        let s = 2.0 * self.signed_distance(x);
        [x[0] - s * self.normal[0], x[1] - s * self.normal[1]]
    }

    /// The coordinate axis the normal points along, if any.
    pub fn aligned_axis(&self) -> Option<usize> {
        (0..2).find(|&a| self.normal[a].abs() == 1.0)
    }
}

/// For each axis, the offset splitting the mass of `rho` in half.
pub fn median_offsets(rho: &GridDensity) -> Vec<f64> {
    let g = rho.grid();
    let shape = g.shape();
    let origin = g.origin();
    (0..g.dim())
        .map(|axis| {
            let mut slabs = vec![0.0; shape[axis]];
            for (idx, &v) in rho.values().iter().enumerate() {
                slabs[g.multi(idx)[axis]] += v;
            }
            let total: f64 = slabs.iter().sum();
            if total <= 0.0 {
                return origin[axis] + 0.5 * shape[axis] as f64 * g.h();
            }
            let half = 0.5 * total;
            let mut acc = 0.0;
            for (k, &s) in slabs.iter().enumerate() {
                if s > 0.0 && acc + s >= half {
                    return origin[axis] + g.h() * (k as f64 + (half - acc) / s);
                }
                acc += s;
            }
            origin[axis] + shape[axis] as f64 * g.h()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Symmetrized {
    /// The kept half together with its mirror image.
    pub density: GridDensity,
    /// `mass(density) - mass(rho)`.
    pub mass_defect: f64,
    /// Offset of the cell boundary the hyperplane was snapped to.
    pub offset: f64,
}

fn aligned(refl: &Reflection, rho: &GridDensity) -> Result<usize> {
    match refl.aligned_axis() {
        Some(a) if a < rho.dim() => Ok(a),
        _ => Err(Error::UnsupportedGeometry("symmetrization needs an axis-aligned hyperplane".into())),
    }
}

/// Keeps one side of the hyperplane, snapped to the nearest cell boundary,
/// and mirrors it onto the other side.
pub fn symmetrize(rho: &GridDensity, refl: &Reflection, side: Side) -> Result<Symmetrized> {
    let axis = aligned(refl, rho)?;
    let g = rho.grid();
    let shape = g.shape();
    let n = shape[axis];
    let h = g.h();
    let o = g.origin();
    let b = (((refl.origin()[axis] - o[axis]) / h).round().max(0.0) as usize).min(n);
    let keep_high = (refl.normal()[axis] > 0.0) == (side == Side::Positive);
    let kept = if keep_high { n - b } else { b };
    let offset = o[axis] + b as f64 * h;

    let mut new_shape = shape;
    new_shape[axis] = 2 * kept;
    let mut new_origin = o;
    new_origin[axis] = offset - kept as f64 * h;
    let grid = g.with(h, new_origin, new_shape);
    let mut values = vec![0.0; grid.len()];
    for (idx, v) in values.iter_mut().enumerate() {
        let m = grid.multi(idx);
        let k = m[axis];
        let src = if keep_high {
            if k >= kept { b + (k - kept) } else { b + (kept - 1 - k) }
        } else if k < kept {
            k
        } else {
            b - 1 - (k - kept)
        };
        let mut sm = m;
        sm[axis] = src;
        *v = rho.get(sm[0], sm[1]);
    }
    let density = GridDensity::new(grid, values)?;
    Ok(Symmetrized { mass_defect: density.mass() - rho.mass(), density, offset })
}

fn check_centered(refl: &Reflection, g: &CellGrid) -> Result<usize> {
    let axis = match refl.aligned_axis() {
        Some(a) if a < g.dim() => a,
        _ => return Err(Error::UnsupportedGeometry("reflection must be axis-aligned".into())),
    };
    let mid = g.origin()[axis] + 0.5 * g.shape()[axis] as f64 * g.h();
    if (refl.origin()[axis] - mid).abs() > 1e-9 * g.h() {
        return Err(Error::UnsupportedGeometry("grid is not symmetric about the hyperplane".into()));
    }
    Ok(axis)
}

fn mirror_index(g: &CellGrid, axis: usize, idx: usize) -> usize {
    let mut m = g.multi(idx);
    m[axis] = g.shape()[axis] - 1 - m[axis];
    g.flat(m[0], m[1])
}

/// Image of a plan under a reflection that maps its grid onto itself.
pub fn reflect_plan(plan: &DiscretePlan, refl: &Reflection) -> Result<DiscretePlan> {
    let g = plan.grid();
    let axis = check_centered(refl, g)?;
    let transfers = plan
        .transfers()
        .iter()
        .map(|t| Transfer { source: mirror_index(g, axis, t.source), target: mirror_index(g, axis, t.target), mass: t.mass })
        .collect();
    DiscretePlan::from_transfers(g.clone(), plan.p(), transfers)
}

/// Image of a density under a reflection that maps its grid onto itself.
pub fn reflect_density(rho: &GridDensity, refl: &Reflection) -> Result<GridDensity> {
    let g = rho.grid();
    let axis = check_centered(refl, g)?;
    let values = (0..g.len()).map(|i| rho.values()[mirror_index(g, axis, i)]).collect();
    GridDensity::new(g.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn reflection_is_an_involution() {
        let r = Reflection::new([0.6, 0.8], [0.1, -0.3]).unwrap();
        let x = [0.7, 1.9];
        let y = r.apply(r.apply(x));
        assert!((y[0] - x[0]).abs() < 1e-14 && (y[1] - x[1]).abs() < 1e-14);
        let a = Reflection::axis(0, 0.25).unwrap();
        assert_eq!(a.apply(a.apply([0.375, 2.0])), [0.375, 2.0]);
        assert!(Reflection::new([1.0, 1.0], [0.0, 0.0]).is_err());
    }

    #[test]
    fn median_of_interval() {
        let rho = shapes::interval(0.0, 1.0, -1.0, 2.0, 0.01).unwrap();
        assert!((median_offsets(&rho)[0] - 0.5).abs() < 1e-12);
        let shifted = rho.shifted([7, 0]);
        assert!((median_offsets(&shifted)[0] - 0.57).abs() < 1e-12);
    }

    #[test]
    fn symmetrize_keeps_half_and_mirrors() {
        let g = CellGrid::line(0.0, 1.0, 5).unwrap();
        let rho = GridDensity::new(g, vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let r = Reflection::axis(0, 2.1).unwrap();
        let hi = symmetrize(&rho, &r, Side::Positive).unwrap();
        assert_eq!(hi.offset, 2.0);
        assert_eq!(hi.density.values(), &[0.5, 0.4, 0.3, 0.3, 0.4, 0.5]);
        assert_eq!(hi.density.grid().origin()[0], -1.0);
        let lo = symmetrize(&rho, &r, Side::Negative).unwrap();
        assert_eq!(lo.density.values(), &[0.1, 0.2, 0.2, 0.1]);
        assert!((lo.mass_defect - (0.6 - 1.5)).abs() < 1e-12);
        let flipped = Reflection::new([-1.0, 0.0], [2.1, 0.0]).unwrap();
        assert_eq!(symmetrize(&rho, &flipped, Side::Positive).unwrap().density.values(), lo.density.values());
    }

    #[test]
    fn symmetric_input_is_fixed() {
        let rho = shapes::unit_disk(16, 1.0).unwrap();
        for axis in 0..2 {
            let r = Reflection::axis(axis, 0.0).unwrap();
            let s = symmetrize(&rho, &r, Side::Positive).unwrap();
            assert!(s.mass_defect.abs() < 1e-12);
            for (a, b) in s.density.values().iter().zip(rho.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_hyperplanes_are_rejected() {
        let rho = shapes::unit_disk(8, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = Reflection::new([s, s], [0.0, 0.0]).unwrap();
        assert!(matches!(symmetrize(&rho, &r, Side::Positive), Err(Error::UnsupportedGeometry(_))));
    }
}
