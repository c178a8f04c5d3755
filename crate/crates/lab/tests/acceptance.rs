use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use otmax_core::flow::{crossing_mass, interior_ball_check, max_transport_distance};
use otmax_core::line::{profile_dominates, sharp_example, sweep_rightward};
use otmax_core::measure::{asymmetry, distance_constant};
use otmax_core::radial::{ball_energy_nd, decompose, radial_energy};
use otmax_core::symmetry::median_offsets;
use otmax_core::{shapes, solve_line, solve_partial_ot, Density1D, EdgeFilter, GridDensity, OtSolution};
use otmax_core::{SolveOptions, WeightedMeasure};
use otmax_lab::random::{blob_2d, half_line, sample_rng, unit_mass_density};
use otmax_lab::verify::{continuity, gap_plan, symmetrization_gap};
use rayon::prelude::*;

type Outcome = Result<(bool, String), anyhow::Error>;

/// Criteria whose stated target is not met by the exact construction.
const EXPECTED_FAILURES: [&str; 1] = ["C5"];
const SEED: u64 = 0;

/// Largest `max_transport_distance - bound` over every plan solved here.
static DISTANCE_EXCESS: Mutex<(f64, usize)> = Mutex::new((f64::NEG_INFINITY, 0));

fn record(rho: &GridDensity, sol: &OtSolution) {
    let n = rho.dim();
    let bound = distance_constant(n) * rho.mass().powf(1.0 / n as f64) + 2.0 * rho.grid().cell_diameter();
    let excess = max_transport_distance(&sol.plan) - bound;
    let mut g = DISTANCE_EXCESS.lock().unwrap();
    g.0 = g.0.max(excess);
    g.1 += 1;
}

fn oracle(rho: &GridDensity, p: f64) -> anyhow::Result<OtSolution> {
    let sol = solve_partial_ot(rho, p, EdgeFilter::All)?;
    record(rho, &sol);
    Ok(sol)
}

fn c1() -> Outcome {
    let start = Instant::now();
    let rho = shapes::interval(0.0, 1.0, -2.0, 3.0, 2e-3)?;
    let e = oracle(&rho, 2.0)?.energy;
    let half = Density1D::new(0.0, 2e-3, vec![1.0; 500], WeightedMeasure::Constant)?;
    let s = sweep_rightward(&half, 2.0)?.energy;
    let secs = start.elapsed().as_secs_f64();
    let ok = (e - 0.25).abs() <= 0.005 && (s - 1.0).abs() <= 1e-6 && secs < 10.0;
    Ok((ok, format!("1D ball energy: oracle {e:.6} (0.25 +- 0.005), sweep {s:.9} (1 +- 1e-6), {secs:.2} s (< 10 s)")))
}

fn c2() -> Outcome {
    let start = Instant::now();
    let diffs: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(SEED, 100 + i);
            let w = match i % 3 {
                0 => WeightedMeasure::Constant,
                k => WeightedMeasure::power(k as f64)?,
            };
            let rho = half_line(&mut rng, w, 0.01)?;
            let sweep = sweep_rightward(&rho, 2.0)?;
            let opts = SolveOptions { filter: EdgeFilter::Rightward, prune: true };
            let o = solve_line(&sweep.domain, 2.0, &opts)?;
            Ok((sweep.energy - o.energy).abs())
        })
        .collect::<Result<_, anyhow::Error>>()?;
    let worst = diffs.iter().fold(0.0f64, |a, &b| a.max(b));
    let secs = start.elapsed().as_secs_f64();
    Ok((worst <= 1e-9 && secs < 60.0, format!("sweep = rightward oracle on 50 densities: worst {worst:.2e} (<= 1e-9), {secs:.2} s (< 60 s)")))
}

fn c3() -> Outcome {
    let rel: Vec<(f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(SEED, 200 + i);
            let (line, _) = unit_mass_density(&mut rng, [-2.0, 3.0], 0.02)?;
            let plane = blob_2d(&mut rng, 16, 1.0 / 16.0)?;
            let mut worst = [0.0f64; 2];
            for (k, rho) in [line, plane].iter().enumerate() {
                let p = 2.0;
                let n = rho.dim() as f64;
                let e = oracle(rho, p)?.energy;
                for t in [2.0, 3.0] {
                    let scaled = rho.rescale(t)?;
                    let et = oracle(&scaled, p)?.energy;
                    worst[k] = worst[k].max((et - t.powf(p + n) * e).abs() / et);
                }
            }
            Ok((worst[0], worst[1]))
        })
        .collect::<Result<_, anyhow::Error>>()?;
    let w1 = rel.iter().map(|r| r.0).fold(0.0, f64::max);
    let w2 = rel.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok((w1 <= 0.02 && w2 <= 0.02, format!("scaling law, t in {{2, 3}}: worst relative error 1D {w1:.2e}, 2D {w2:.2e} (<= 0.02)")))
}

fn c4() -> Outcome {
    let h = 2e-3;
    let rows: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(SEED, i);
            let (rho, _) = unit_mass_density(&mut rng, [-2.0, 3.0], h)?;
            let e = oracle(&rho, 2.0)?.energy;
            Ok((asymmetry(&rho)?, 0.25 - e))
        })
        .collect::<Result<_, anyhow::Error>>()?;
    let min_deficit = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let eligible: Vec<_> = rows.iter().filter(|r| r.0 > 0.05).collect();
    let min_ratio = eligible.iter().map(|r| r.1 / (r.0 * r.0)).fold(f64::INFINITY, f64::min);
    let ok = min_deficit >= -10.0 * h && min_ratio >= 1e-3;
    Ok((
        ok,
        format!(
            "1D ball maximality over 100 densities: min deficit {min_deficit:.3e} (>= {:.0e}), min deficit/A^2 {min_ratio:.4} over {} samples with A > 0.05 (>= 1e-3)",
            -10.0 * h,
            eligible.len()
        ),
    ))
}

fn c5() -> Outcome {
    let ex = sharp_example(1e-3, 2.0)?;
    let a = ex.asymmetry();
    let ratio = ex.deficit() / (a * a);
    let centered = ex.deficit() / ex.centered_distance().powi(2);
    let big = sharp_example(0.05, 2.0)?;
    let rho = big.density(-2.0, 3.0, 2e-3)?;
    let e = oracle(&rho, 2.0)?.energy;
    let rel = (e - big.energy()).abs() / big.energy();
    let measured = asymmetry(&rho)?;
    let ok = (ratio - 0.25).abs() <= 0.01 && rel <= 0.005;
    Ok((
        ok,
        format!(
            "sharpness at eps = 1e-3: deficit/A^2 = {ratio:.4} with A = 2 eps (0.25 +- 0.01); against the centered interval (4 eps) {centered:.4}; \
             eps = 0.05 oracle {e:.6} vs closed form {:.6}, rel {rel:.2e} (<= 5e-3); measured A {measured:.6}",
            big.energy()
        ),
    ))
}

fn c6() -> Outcome {
    let start = Instant::now();
    let rho = shapes::unit_disk(64, 1.0)?;
    let sol = oracle(&rho, 2.0)?;
    let radial = radial_energy(&decompose(&rho, 256)?, 2.0)?;
    let ball = ball_energy_nd(2, 2.0, 1.0)?;
    let r_o = (radial - sol.energy).abs() / sol.energy;
    let r_b = (radial - ball).abs() / ball;
    let o_b = (sol.energy - ball).abs() / ball;
    let secs = start.elapsed().as_secs_f64();
    let ok = r_o <= 0.02 && r_b <= 0.02 && o_b <= 0.02 && secs < 300.0;
    Ok((
        ok,
        format!(
            "64x64 disk: radial {radial:.6}, oracle {:.6}, ball {ball:.6}; radial/oracle {r_o:.2e}, radial/ball {r_b:.2e}, oracle/ball {o_b:.2e} (<= 0.02), {secs:.1} s (< 300 s)",
            sol.energy
        ),
    ))
}

fn c7() -> Outcome {
    let interval = shapes::interval(0.0, 1.0, -2.0, 3.0, 2e-3)?;
    let disk = shapes::unit_disk(64, 1.0)?;
    let mut counts = Vec::new();
    for rho in [&interval, &disk] {
        let sol = oracle(rho, 2.0)?;
        counts.push(interior_ball_check(rho, &sol.plan)?.violations.len());
    }
    let (rho, plan) = gap_plan()?;
    let control = interior_ball_check(&rho, &plan)?.violations.len();
    let ok = counts.iter().all(|&c| c == 0) && control >= 1;
    Ok((ok, format!("interior ball (3 cells): interval {} and disk {} violations (0), gap plan {control} (>= 1)", counts[0], counts[1])))
}

fn c9() -> Outcome {
    let mut crossing = Vec::new();
    for rho in [shapes::interval(0.0, 1.0, -2.0, 3.0, 2e-3)?, shapes::unit_disk(64, 1.0)?] {
        let sol = oracle(&rho, 2.0)?;
        let med = median_offsets(&rho);
        let origin = [med[0], med.get(1).copied().unwrap_or(0.0)];
        let cm = rho.grid().cell_measure();
        for axis in 0..rho.dim() {
            let mut normal = [0.0; 2];
            normal[axis] = 1.0;
            crossing.push(crossing_mass(&sol.plan, normal, origin) / (2.0 * cm));
        }
    }
    let worst_cross = crossing.iter().fold(0.0f64, |a, &b| a.max(b)) + 0.0;
    let gaps: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(SEED, 300 + i);
            let rho = blob_2d(&mut rng, 12, 1.0 / 12.0)?.padded(4);
            let (gap, tol) = symmetrization_gap(&rho, (i % 2) as usize, 2.0)?;
            Ok(gap / tol)
        })
        .collect::<Result<_, anyhow::Error>>()?;
    let worst_sym = gaps.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let ok = worst_cross <= 1.0 && worst_sym <= 1.0;
    Ok((
        ok,
        format!(
            "non-crossing: worst crossing {worst_cross:.3} x 2 cells (<= 1); symmetrization excess over 20 tests {worst_sym:.3} x 4 diam^p (<= 1)"
        ),
    ))
}

fn c10() -> Outcome {
    let worst: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(SEED, 400 + i);
            let w = match i % 3 {
                0 => WeightedMeasure::Constant,
                k => WeightedMeasure::power(k as f64)?,
            };
            let rho = half_line(&mut rng, w, 2e-3)?;
            let d = profile_dominates(&rho, 200)?;
            Ok(d.max_violation / d.tolerance)
        })
        .collect::<Result<_, anyhow::Error>>()?;
    let w = worst.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Ok((w <= 1.0, format!("profile domination on 50 half-line densities: worst d_rho - d = {w:.3} x 2h (<= 1)")))
}

fn c11() -> Outcome {
    let h = 2e-3;
    let ns = [4, 8, 16, 32];
    let half = shapes::blocks_1d(&[(0.0, 2.0, 0.5)], -1.0, 3.0, h)?;
    let soft = (0..)
        .find_map(|i| match unit_mass_density(&mut sample_rng(SEED, 500 + i), [-2.0, 3.0], h) {
            Ok((rho, true)) => Some(Ok(rho)),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        })
        .expect("an unbounded search finds a soft sample")?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, rho) in [("rho = 1/2 on [0, 2]", &half), ("random soft", &soft)] {
        let c = continuity(rho, 2.0, &ns)?;
        ok &= c.worst_violation() <= 1e-9;
        let diffs: Vec<String> = c.differences.iter().map(|d| format!("{d:.4}")).collect();
        parts.push(format!("{name}: |W(E_n) - W(rho)| = [{}]", diffs.join(", ")));
    }
    Ok((ok, format!("continuity, n = 4, 8, 16, 32, nonincreasing and <= 3/n: {}", parts.join("; "))))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("C1", c1),
        ("C2", c2),
        ("C3", c3),
        ("C4", c4),
        ("C5", c5),
        ("C6", c6),
        ("C7", c7),
        ("C9", c9),
        ("C10", c10),
        ("C11", c11),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('C')).collect();
    let selected = |id: &str| only.is_empty() || only.iter().any(|o| o == id);
    let mut failed = Vec::new();
    let mut reported = 0;
    let mut report = |id: &str, ok: bool, line: String| {
        println!("{} {id} {line}", if ok { "PASS" } else { "FAIL" });
        reported += 1;
        if !ok {
            failed.push(id.to_string());
        }
    };
    for (id, f) in criteria {
        if !selected(id) {
            continue;
        }
        let start = Instant::now();
        match f() {
            Ok((ok, line)) => report(id, ok, format!("{line} [{:.1} s]", start.elapsed().as_secs_f64())),
            Err(e) => report(id, false, format!("error: {e}")),
        }
    }
    if selected("C8") {
        let (excess, plans) = *DISTANCE_EXCESS.lock().unwrap();
        let ok = plans > 0 && excess <= 0.0;
        report("C8", ok, format!("distance bound over {plans} optimal plans: worst max distance - bound {excess:.3e} (<= 0)"));
    }

    let unexpected: Vec<_> = failed.iter().filter(|id| !EXPECTED_FAILURES.contains(&id.as_str())).collect();
    println!("{} of {reported} criteria pass; expected failures: {}", reported - failed.len(), EXPECTED_FAILURES.join(", "));
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
