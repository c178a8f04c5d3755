use otmax_core::symmetry::{reflect_density, reflect_plan, symmetrize, Reflection, Side};
use otmax_core::{shapes, solve_line, solve_partial_ot, solve_partial_ot_with, CellGrid, Density1D, EdgeFilter};
use otmax_core::{GridDensity, SolveOptions, WeightedMeasure};
use proptest::prelude::*;

// A few rectangles of random value on a 14 x 14 grid of width 1/8.
fn blob() -> impl Strategy<Value = GridDensity> {
    prop::collection::vec((3usize..8, 3usize..8, 1usize..4, 1usize..4, 1u32..=8), 1..4).prop_map(|rects| {
        let grid = CellGrid::square([0.0, 0.0], 0.125, 14, 14).unwrap();
        let mut values = vec![0.0; grid.len()];
        for (x, y, w, hgt, v) in rects {
            for i in x..x + w {
                for j in y..y + hgt {
                    let c = &mut values[grid.flat(i, j)];
                    *c = (*c + v as f64 / 8.0).min(1.0);
                }
            }
        }
        GridDensity::new(grid, values).unwrap()
    })
}

fn line_runs() -> impl Strategy<Value = Density1D> {
    prop::collection::vec((1usize..12, 0u32..=10), 1..6).prop_map(|runs| {
        let mut values = vec![0.0; 10];
        values.extend(runs.iter().flat_map(|&(n, k)| std::iter::repeat(k as f64 / 10.0).take(n)));
        values.extend(std::iter::repeat(0.0).take(values.len()));
        Density1D::new(-0.2, 0.02, values, WeightedMeasure::Constant).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn plans_are_feasible_with_a_dual_certificate(rho in blob(), p in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let sol = solve_partial_ot(&rho, p, EdgeFilter::All).unwrap();
        let f = sol.plan.check_feasibility(&rho);
        prop_assert!(f.first_marginal_error <= 1e-9);
        prop_assert!(f.capacity_excess <= 1e-9);
        prop_assert!(sol.certificate_gap <= 1e-9, "gap {}", sol.certificate_gap);
        prop_assert!((sol.energy - sol.plan.cost()).abs() <= 1e-12);
    }

    #[test]
    fn pruning_is_lossless(rho in blob(), p in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let pruned = solve_partial_ot_with(&rho, p, &SolveOptions { filter: EdgeFilter::All, prune: true }).unwrap();
        let full = solve_partial_ot_with(&rho, p, &SolveOptions { filter: EdgeFilter::All, prune: false }).unwrap();
        prop_assert!(!full.pruned);
        prop_assert!((pruned.energy - full.energy).abs() <= 1e-9, "{} vs {}", pruned.energy, full.energy);
    }

    #[test]
    fn pruning_is_lossless_on_the_line(rho in line_runs(), p in prop::sample::select(vec![1.5, 2.0, 4.0])) {
        let a = solve_line(&rho, p, &SolveOptions { filter: EdgeFilter::All, prune: true }).unwrap();
        let b = solve_line(&rho, p, &SolveOptions { filter: EdgeFilter::All, prune: false }).unwrap();
        prop_assert!((a.energy - b.energy).abs() <= 1e-9);
        prop_assert!(a.certificate_gap <= 1e-9 && b.certificate_gap <= 1e-9);
    }

    #[test]
    fn energy_scales_with_the_domain(rho in blob(), t in prop::sample::select(vec![0.5, 2.0, 3.0])) {
        let p = 2.0;
        let base = solve_partial_ot(&rho, p, EdgeFilter::All).unwrap().energy;
        let scaled = solve_partial_ot(&rho.rescale(t).unwrap(), p, EdgeFilter::All).unwrap().energy;
        let want = t.powf(p + 2.0) * base;
        prop_assert!((scaled - want).abs() <= 1e-6 * want.max(1e-12), "{scaled} vs {want}");
    }
}

#[test]
fn reflected_optimal_plan_is_optimal() {
    // Mirror one quadrant so the symmetry holds bit for bit.
    let disk = shapes::unit_disk(24, 1.0).unwrap();
    let half = symmetrize(&disk, &Reflection::axis(0, 0.0).unwrap(), Side::Positive).unwrap().density;
    let rho = symmetrize(&half, &Reflection::axis(1, 0.0).unwrap(), Side::Positive).unwrap().density;
    let sol = solve_partial_ot(&rho, 2.0, EdgeFilter::All).unwrap();
    for axis in 0..2 {
        let r = Reflection::axis(axis, 0.0).unwrap();
        let mirrored = reflect_density(&rho, &r).unwrap();
        assert_eq!(mirrored.values(), rho.values());
        let again = solve_partial_ot(&mirrored, 2.0, EdgeFilter::All).unwrap();
        assert_eq!(again.energy, sol.energy);
        let image = reflect_plan(&sol.plan, &r).unwrap();
        let f = image.check_feasibility(&rho);
        assert!(f.first_marginal_error <= 1e-9 && f.capacity_excess <= 1e-9);
        assert!((image.cost() - sol.energy).abs() <= 1e-9);
        let back = reflect_plan(&image, &r).unwrap();
        assert_eq!(back.transfers(), sol.plan.transfers());
    }
}

#[test]
fn refinement_changes_oracle_energy_linearly_in_h() {
    let blocks = [(0.0, 0.3, 1.0), (0.4, 0.8, 0.5), (1.1, 1.3, 0.75)];
    let energies: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&h| {
            let n = (3.0f64 / h).round() as usize;
            let rho = Density1D::from_blocks(-0.5, h, n, WeightedMeasure::Constant, &blocks).unwrap();
            solve_line(&rho, 2.0, &SolveOptions::default()).unwrap().energy
        })
        .collect();
    let d1 = (energies[0] - energies[1]).abs();
    let d2 = (energies[1] - energies[2]).abs();
    assert!(d1 <= 0.04 && d2 <= 0.02, "{energies:?}");
    assert!(d2 <= d1, "{energies:?}");
}

#[test]
fn rightward_oracle_on_the_line_is_no_better_than_free() {
    let rho = shapes::interval(0.0, 1.0, -1.0, 2.5, 0.02).unwrap().to_line().unwrap();
    let free = solve_line(&rho, 2.0, &SolveOptions::default()).unwrap().energy;
    let right = solve_line(&rho, 2.0, &SolveOptions { filter: EdgeFilter::Rightward, prune: true }).unwrap().energy;
    assert!((free - 0.25).abs() < 1e-9, "{free}");
    assert!((right - 1.0).abs() < 1e-9, "{right}");
}
