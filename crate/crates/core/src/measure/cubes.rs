use super::GridDensity;
use crate::error::{Error, Result};

/// Indicator replacing each cube's mass by that many full cells.
#[derive(Clone, Debug)]
pub struct CubeApproximation {
    pub indicator: GridDensity,
    /// `1/n`, the guaranteed bound on the transport distance to the indicator.
    pub bound: f64,
    pub cells_per_side: usize,
    /// Mass discrepancy of per-cube rounding before the global correction.
    pub rounding_error: f64,
}

/// Approximates `rho` by an indicator of equal mass (to one cell) built cube by cube,
/// with cubes of diameter at most `1/n`.
pub fn cube_approximation(rho: &GridDensity, n: usize) -> Result<CubeApproximation> {
    let mass = rho.mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("cube approximation needs unit mass, got {mass}")));
    }
    if n == 0 {
        return Err(Error::Domain("cube count parameter must be positive".into()));
    }
    let g = rho.grid();
    let dim = g.dim();
    let side = 1.0 / (n as f64 * (dim as f64).sqrt());
    let k = (side / g.h() * (1.0 + 1e-9)).floor() as usize;
    if k == 0 {
        return Err(Error::Resolution(format!(
            "cube side {side:.3e} is smaller than the cell width {:.3e}",
            g.h()
        )));
    }
    let shape = g.shape();
    let cubes_along = |a: usize| if a < dim { shape[a].div_ceil(k) } else { 1 };
    let (c0, c1) = (cubes_along(0), cubes_along(1));
    let k1 = if dim == 2 { k } else { 1 };

    // Cells of each cube in fill order: decreasing value, then left to right, bottom to top.
    let mut cubes: Vec<Vec<usize>> = Vec::with_capacity(c0 * c1);
    let mut target: Vec<f64> = Vec::with_capacity(c0 * c1);
    for a in 0..c0 {
        for b in 0..c1 {
            let mut cells = Vec::new();
            for i1 in b * k1..((b + 1) * k1).min(shape[1]) {
                for i0 in a * k..((a + 1) * k).min(shape[0]) {
                    cells.push(g.flat(i0, i1));
                }
            }
            let m: f64 = cells.iter().map(|&c| rho.values()[c]).sum();
            cells.sort_by(|&x, &y| rho.values()[y].total_cmp(&rho.values()[x]));
            cubes.push(cells);
            target.push(m);
        }
    }
    // Rounding the running total keeps every prefix of cubes within half a cell.
    let mut running = 0.0;
    let mut rounded_before = 0usize;
    let mut count: Vec<usize> = cubes
        .iter()
        .zip(&target)
        .map(|(cells, &m)| {
            running += m;
            let rounded = (running + 0.5 + 1e-9).floor() as usize;
            let c = rounded.saturating_sub(rounded_before).min(cells.len());
            rounded_before += c;
            c
        })
        .collect();
    let cm = g.cell_measure();
    let placed: usize = count.iter().sum();
    let rounding_error = (placed as f64 * cm - mass).abs();

    let wanted = (target.iter().sum::<f64>() + 1e-9).round() as i64;
    let mut diff = wanted - placed as i64;
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    if diff > 0 {
        order.sort_by(|&x, &y| (target[y] - count[y] as f64).total_cmp(&(target[x] - count[x] as f64)));
        for &c in order.iter().cycle().take(4 * cubes.len()) {
            if diff == 0 {
                break;
            }
            if count[c] < cubes[c].len() {
                count[c] += 1;
                diff -= 1;
            }
        }
    } else if diff < 0 {
        order.sort_by(|&x, &y| (target[x] - count[x] as f64).total_cmp(&(target[y] - count[y] as f64)));
        for &c in order.iter().cycle().take(4 * cubes.len()) {
            if diff == 0 {
                break;
            }
            if count[c] > 0 {
                count[c] -= 1;
                diff += 1;
            }
        }
    }

    let mut values = vec![0.0; g.len()];
    for (cells, &c) in cubes.iter().zip(&count) {
        for &cell in &cells[..c] {
            values[cell] = 1.0;
        }
    }
    Ok(CubeApproximation {
        indicator: GridDensity::new(g.clone(), values)?,
        bound: 1.0 / n as f64,
        cells_per_side: k,
        rounding_error,
    })
}
