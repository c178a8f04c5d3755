//! Seeded random densities. Sample `i` of a run with seed `s` always uses
//! stream `i` of the ChaCha8 generator seeded with `s`.

use otmax_core::{shapes, CellGrid, Density1D, GridDensity, Result, WeightedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// 2 to 6 disjoint blocks of mass 1 in total, centered in `domain` with one
/// unit of free space on each side. Soft samples use values in `[1/2, 1)`.
pub fn unit_mass_blocks(rng: &mut impl Rng, domain: [f64; 2]) -> (Vec<(f64, f64, f64)>, bool) {
    let k = rng.gen_range(2..=6);
    let soft = rng.gen_bool(0.5);
    let widths: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let values: Vec<f64> = (0..k).map(|_| if soft { rng.gen_range(0.5..1.0) } else { 1.0 }).collect();
    let mut gaps: Vec<f64> = (1..k).map(|_| rng.gen_range(0.01..0.5)).collect();
    let mass: f64 = widths.iter().zip(&values).map(|(w, v)| w * v).sum();
    let widths: Vec<f64> = widths.iter().map(|w| w / mass).collect();
    let room = domain[1] - domain[0] - 2.0;
    let spread: f64 = widths.iter().sum();
    let gap_total: f64 = gaps.iter().sum();
    if spread + gap_total > room {
        let shrink = ((room - spread) / gap_total).max(0.0);
        gaps.iter_mut().for_each(|g| *g *= shrink);
    }
    let extent = spread + gaps.iter().sum::<f64>();
    let mut x = 0.5 * (domain[0] + domain[1]) - 0.5 * extent;
    let mut blocks = Vec::with_capacity(k);
    for i in 0..k {
        blocks.push((x, x + widths[i], values[i]));
        x += widths[i];
        if i + 1 < k {
            x += gaps[i];
        }
    }
    (blocks, soft)
}

pub fn unit_mass_density(rng: &mut impl Rng, domain: [f64; 2], h: f64) -> Result<(GridDensity, bool)> {
    let (blocks, soft) = unit_mass_blocks(rng, domain);
    Ok((shapes::blocks_1d(&blocks, domain[0], domain[1], h)?, soft))
}

/// Runs of cells from the origin with values in multiples of 1/20.
pub fn half_line(rng: &mut impl Rng, measure: WeightedMeasure, h: f64) -> Result<Density1D> {
    let runs = rng.gen_range(1..=6);
    let mut values = Vec::new();
    for _ in 0..runs {
        let len = rng.gen_range(1..=((0.25 / h).ceil() as usize).max(1));
        let v = rng.gen_range(0..=20) as f64 / 20.0;
        values.extend(std::iter::repeat(v).take(len));
    }
    Density1D::new(0.0, h, values, measure)
}

/// One to three rectangles of random value in the middle half of an
/// `n x n` grid of width `h`.
pub fn blob_2d(rng: &mut impl Rng, n: usize, h: f64) -> Result<GridDensity> {
    let grid = CellGrid::square([0.0, 0.0], h, n, n)?;
    let mut values = vec![0.0; grid.len()];
    let lo = n / 4;
    let hi = n - n / 4;
    for _ in 0..rng.gen_range(1..=3) {
        let x = rng.gen_range(lo..hi - 1);
        let y = rng.gen_range(lo..hi - 1);
        let w = rng.gen_range(1..=(hi - x));
        let t = rng.gen_range(1..=(hi - y));
        let v = rng.gen_range(1..=8) as f64 / 8.0;
        for i in x..x + w {
            for j in y..y + t {
                let c = &mut values[grid.flat(i, j)];
                *c = (*c + v).min(1.0);
            }
        }
    }
    GridDensity::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_have_unit_mass_and_room() {
        for i in 0..50 {
            let mut rng = sample_rng(3, i);
            let (rho, _) = unit_mass_density(&mut rng, [-2.0, 3.0], 2e-3).unwrap();
            assert!((rho.mass() - 1.0).abs() < 1e-9, "{}", rho.mass());
            let (lo, hi) = rho.support_box().unwrap();
            let g = rho.grid();
            assert!(g.center(lo[0])[0] >= -1.0 - 2e-3 && g.center(hi[0] - 1)[0] <= 2.0 + 2e-3);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut r = sample_rng(9, 2);
        let a: Vec<u32> = (0..4).map(|_| r.gen()).collect();
        let mut r = sample_rng(9, 2);
        let b: Vec<u32> = (0..4).map(|_| r.gen()).collect();
        assert_eq!(a, b);
        let mut r2 = sample_rng(9, 2);
        let mut r3 = sample_rng(9, 3);
        assert_ne!(r2.gen::<u64>(), r3.gen::<u64>());
    }

    #[test]
    fn blobs_stay_inside() {
        let mut rng = sample_rng(1, 0);
        let rho = blob_2d(&mut rng, 20, 0.05).unwrap();
        let (lo, hi) = rho.support_box().unwrap();
        assert!(lo[0] >= 5 && lo[1] >= 5 && hi[0] <= 15 && hi[1] <= 15);
        assert!(rho.mass() > 0.0);
    }
}
