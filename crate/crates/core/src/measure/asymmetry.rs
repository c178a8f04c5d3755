use super::geometry::{disk_rect_area, interval_overlap};
use super::{unit_ball_volume, GridDensity};
use crate::error::{Error, Result};

/// Best-fitting unit-mass ball of a unit-mass density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallFit {
    pub center: [f64; 2],
    pub radius: f64,
    pub asymmetry: f64,
}

const MAX_SCAN: usize = 48;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Fraenkel asymmetry `min_x ||rho - chi_{B(x)}||_{L^1}` over unit-mass balls.
pub fn asymmetry(rho: &GridDensity) -> Result<f64> {
    best_ball(rho).map(|b| b.asymmetry)
}

pub fn best_ball(rho: &GridDensity) -> Result<BallFit> {
    let mass = rho.mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("asymmetry needs unit mass, got {mass}")));
    }
    let dim = rho.dim();
    let g = rho.grid();
    let h = g.h();
    let radius = (1.0 / unit_ball_volume(dim)).powf(1.0 / dim as f64);
    let rc = radius / h;
    let (lo, hi) = rho.support_box().expect("unit mass implies a nonempty support");
    let cells: Vec<([f64; 2], f64)> = rho
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| {
            let m = g.multi(i);
            ([m[0] as f64, m[1] as f64], v)
        })
        .collect();
    let cm = g.cell_measure();
    // Objective in cell units: ||rho - chi_B|| = mass + |B| - 2 int rho chi_B.
    let objective = |c: [f64; 2]| -> f64 {
        let overlap: f64 = if dim == 1 {
            cells.iter().map(|(p, v)| v * interval_overlap(p[0], p[0] + 1.0, c[0] - rc, c[0] + rc)).sum()
        } else {
            cells
                .iter()
                .filter(|(p, _)| (p[0] + 0.5 - c[0]).abs() < rc + 1.0 && (p[1] + 0.5 - c[1]).abs() < rc + 1.0)
                .map(|(p, v)| v * disk_rect_area(c, rc, p[0], p[0] + 1.0, p[1], p[1] + 1.0))
                .sum()
        };
        (mass + 1.0 - 2.0 * overlap * cm).max(0.0)
    };

    let span = 2.0 * rc;
    let (best_c, best_f) = if dim == 1 {
        // Piecewise linear in the center: the minimum sits on a breakpoint k +- rc.
        let a = lo[0] as f64 - span;
        let b = hi[0] as f64 + span;
        let mut best = ([0.5 * (a + b), 0.0], f64::INFINITY);
        let kmin = (a - rc).floor() as i64;
        let kmax = (b + rc).ceil() as i64;
        for k in kmin..=kmax {
            for c in [k as f64 - rc, k as f64 + rc] {
                if c < a || c > b {
                    continue;
                }
                let f = objective([c, 0.0]);
                if f < best.1 {
                    best = ([c, 0.0], f);
                }
            }
        }
        best
    } else {
        let a = [lo[0] as f64 - span, lo[1] as f64 - span];
        let b = [hi[0] as f64 + span, hi[1] as f64 + span];
        let extent = (b[0] - a[0]).max(b[1] - a[1]);
        let stride = (extent / MAX_SCAN as f64).ceil().max(1.0);
        let mut best = ([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], f64::INFINITY);
        let mut x = a[0].floor();
        while x <= b[0] {
            let mut y = a[1].floor();
            while y <= b[1] {
                let f = objective([x, y]);
                if f < best.1 {
                    best = ([x, y], f);
                }
                y += stride;
            }
            x += stride;
        }
        let tol = 1e-6 / h;
        let mut c = best.0;
        let mut width = stride;
        for _ in 0..60 {
            let before = c;
            for axis in 0..2 {
                let line = |t: f64| {
                    let mut q = c;
                    q[axis] = t;
                    objective(q)
                };
                c[axis] = golden_section(line, c[axis] - width, c[axis] + width, tol);
            }
            let moved = (c[0] - before[0]).abs().max((c[1] - before[1]).abs());
            if moved < tol && width <= 1.0 {
                break;
            }
            width = (0.5 * width).max(moved.max(4.0 * tol)).min(stride);
        }
        let f = objective(c);
        if f < best.1 {
            (c, f)
        } else {
            best
        }
    };
    let origin = g.origin();
    let mut center = [origin[0] + best_c[0] * h, 0.0];
    if dim == 2 {
        center[1] = origin[1] + best_c[1] * h;
    }
    Ok(BallFit { center, radius, asymmetry: best_f.min(2.0) })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::CellGrid;
    use crate::shapes;

    #[test]
    fn unit_interval_is_its_own_ball() {
        let rho = shapes::interval(0.0, 1.0, -2.0, 3.0, 0.01).unwrap();
        let fit = best_ball(&rho).unwrap();
        assert!(fit.asymmetry < 1e-12);
        assert!((fit.center[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn split_interval() {
        // Two halves of length 1/2 separated by a gap of length 1: the best
        // window covers one half and misses the other.
        let rho = shapes::union_of_intervals(&[(0.0, 0.5), (1.5, 2.0)], -1.0, 3.0, 0.01).unwrap();
        assert!((asymmetry(&rho).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn asymmetry_bounds_and_mass_check() {
        let rho = shapes::interval(0.0, 2.0, -1.0, 3.0, 0.05).unwrap();
        assert!(asymmetry(&rho).is_err());
        let g = CellGrid::line(0.0, 0.1, 20).unwrap();
        let rho = GridDensity::new(g, vec![0.5; 20]).unwrap();
        let a = asymmetry(&rho).unwrap();
        assert!((0.0..=2.0).contains(&a));
        assert!((a - 1.0).abs() < 1e-12, "{a}");
    }

    #[test]
    fn disk_has_small_asymmetry() {
        let rho = shapes::unit_disk(48, 1.0).unwrap();
        let fit = best_ball(&rho).unwrap();
        // Only the partially covered boundary cells differ from the ball.
        assert!(fit.asymmetry < 0.05, "{}", fit.asymmetry);
        assert!(fit.center[0].abs() < 1e-3 && fit.center[1].abs() < 1e-3);
    }

    #[test]
    fn square_is_asymmetric() {
        let rho = shapes::rectangle([-0.5, -0.5], [0.5, 0.5], 1.0, 0.05).unwrap();
        let a = asymmetry(&rho).unwrap();
        // Square versus the equal-area disk, both centered.
        let r = 1.0 / std::f64::consts::PI.sqrt();
        let inside = disk_rect_area([0.0, 0.0], r, -0.5, 0.5, -0.5, 0.5);
        assert!((a - 2.0 * (1.0 - inside)).abs() < 1e-6, "{a}");
    }

    #[test]
    fn translation_by_cells_is_exact() {
        let rho = shapes::rectangle([-0.4, -0.6], [0.4, 0.65], 1.0, 0.05).unwrap();
        let shifted = rho.shifted([3, -2]);
        assert_eq!(asymmetry(&rho).unwrap(), asymmetry(&shifted).unwrap());
    }
}
