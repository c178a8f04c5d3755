//! Rasterized indicators and blocks with exact fractional cell coverage.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::measure::geometry::{disk_rect_area, interval_overlap};
use crate::measure::{CellGrid, GridDensity};

// Positions in cell units, with intended grid alignments made exact.
fn to_cells(x: f64, origin: f64, h: f64) -> f64 {
    let u = (x - origin) / h;
    if (u - u.round()).abs() < 1e-9 {
        u.round()
    } else {
        u
    }
}

fn cell_count(lo: f64, hi: f64, h: f64) -> Result<usize> {
    if !(hi > lo) || !(h > 0.0) {
        return Err(domain(format!("empty domain [{lo}, {hi}] or bad width {h}")));
    }
    Ok(((hi - lo) / h - 1e-9).ceil() as usize)
}

/// Piecewise-constant blocks `(a, b, value)` on cells of width `h` covering `[x_lo, x_hi]`.
pub fn blocks_1d(blocks: &[(f64, f64, f64)], x_lo: f64, x_hi: f64, h: f64) -> Result<GridDensity> {
    let n = cell_count(x_lo, x_hi, h)?;
    let grid = CellGrid::line(x_lo, h, n)?;
    let cells: Vec<(f64, f64, f64)> =
        blocks.iter().map(|&(lo, hi, v)| (to_cells(lo, x_lo, h), to_cells(hi, x_lo, h), v)).collect();
    let values = (0..n)
        .map(|i| {
            let a = i as f64;
            let covered: f64 = cells.iter().map(|&(lo, hi, v)| v * interval_overlap(a, a + 1.0, lo, hi)).sum();
            covered.min(1.0)
        })
        .collect();
    GridDensity::new(grid, values)
}

pub fn union_of_intervals(parts: &[(f64, f64)], x_lo: f64, x_hi: f64, h: f64) -> Result<GridDensity> {
    let blocks: Vec<_> = parts.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    blocks_1d(&blocks, x_lo, x_hi, h)
}

/// Indicator of `[a, b]` on cells covering `[x_lo, x_hi]`.
pub fn interval(a: f64, b: f64, x_lo: f64, x_hi: f64, h: f64) -> Result<GridDensity> {
    union_of_intervals(&[(a, b)], x_lo, x_hi, h)
}

/// Square `n x n` grid on `[-half, half]^2`.
pub fn centered_square(half: f64, n: usize) -> Result<CellGrid> {
    CellGrid::square([-half, -half], 2.0 * half / n as f64, n, n)
}

pub fn disk(center: [f64; 2], radius: f64, value: f64, grid: CellGrid) -> Result<GridDensity> {
    ellipse(center, [radius, radius], value, grid)
}

/// `value` times the indicator of an axis-aligned ellipse with semi-axes `axes`.
pub fn ellipse(center: [f64; 2], axes: [f64; 2], value: f64, grid: CellGrid) -> Result<GridDensity> {
    if grid.dim() != 2 || !(axes[0] > 0.0 && axes[1] > 0.0) {
        return Err(domain("ellipse needs a planar grid and positive axes"));
    }
    let h = grid.h();
    let o = grid.origin();
    let values = (0..grid.len())
        .map(|idx| {
            let [i0, i1] = grid.multi(idx);
            let x0 = (o[0] + i0 as f64 * h - center[0]) / axes[0];
            let x1 = (o[0] + (i0 + 1) as f64 * h - center[0]) / axes[0];
            let y0 = (o[1] + i1 as f64 * h - center[1]) / axes[1];
            let y1 = (o[1] + (i1 + 1) as f64 * h - center[1]) / axes[1];
            let area = axes[0] * axes[1] * disk_rect_area([0.0, 0.0], 1.0, x0, x1, y0, y1);
            (value * area / (h * h)).min(1.0)
        })
        .collect();
    GridDensity::new(grid, values)
}

/// Disk of the given mass centered at the origin on an `n x n` grid that
/// leaves room for its optimal transport.
pub fn unit_disk(n: usize, mass: f64) -> Result<GridDensity> {
    let r = (mass / PI).sqrt();
    disk([0.0, 0.0], r, 1.0, centered_square(1.5 * r, n)?)
}

/// `value` on the rectangle `[lo, hi]`, with half its larger side as margin.
pub fn rectangle(lo: [f64; 2], hi: [f64; 2], value: f64, h: f64) -> Result<GridDensity> {
    let margin = 0.5 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let origin = [lo[0] - margin, lo[1] - margin];
    let nx = cell_count(origin[0], hi[0] + margin, h)?;
    let ny = cell_count(origin[1], hi[1] + margin, h)?;
    let grid = CellGrid::square(origin, h, nx, ny)?;
    let (u0, u1) = (to_cells(lo[0], origin[0], h), to_cells(hi[0], origin[0], h));
    let (w0, w1) = (to_cells(lo[1], origin[1], h), to_cells(hi[1], origin[1], h));
    let values = (0..grid.len())
        .map(|idx| {
            let [i0, i1] = grid.multi(idx);
            let (a, b) = (i0 as f64, i1 as f64);
            let cover = interval_overlap(a, a + 1.0, u0, u1) * interval_overlap(b, b + 1.0, w0, w1);
            (value * cover).min(1.0)
        })
        .collect();
    GridDensity::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_mass_is_exact() {
        let rho = interval(0.013, 0.987, -1.0, 2.0, 0.01).unwrap();
        assert!((rho.mass() - 0.974).abs() < 1e-12);
        assert_eq!(rho.grid().len(), 300);
    }

    #[test]
    fn disk_mass_is_exact() {
        let rho = unit_disk(32, 1.0).unwrap();
        assert!((rho.mass() - 1.0).abs() < 1e-12);
        let e = ellipse([0.1, 0.0], [0.7, 0.4], 0.5, centered_square(1.0, 40).unwrap()).unwrap();
        assert!((e.mass() - 0.5 * PI * 0.28).abs() < 1e-12);
    }

    #[test]
    fn rectangle_mass() {
        let rho = rectangle([0.0, 0.0], [0.8, 1.25], 0.5, 0.1).unwrap();
        assert!((rho.mass() - 0.5).abs() < 1e-12);
    }
}
