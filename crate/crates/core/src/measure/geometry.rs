//! Exact overlap areas of balls with axis-aligned cells.

use std::f64::consts::FRAC_PI_4;

pub fn interval_overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

// Integral of sqrt(r^2 - t^2) for t in [-r, x].
fn half_chord_integral(x: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    let s = (r * r - x * x).max(0.0).sqrt();
    0.5 * (x * s + r * r * (x / r).clamp(-1.0, 1.0).asin()) + FRAC_PI_4 * r * r
}

// Area of the centered disk of radius r inside {x <= a, y <= b}.
fn quadrant_area(a: f64, b: f64, r: f64) -> f64 {
    if a <= -r || b <= -r {
        return 0.0;
    }
    let a = a.min(r);
    let s = |x: f64| half_chord_integral(x, r);
    let full = |lo: f64, hi: f64| if hi > lo { 2.0 * (s(hi) - s(lo)) } else { 0.0 };
    let partial = |lo: f64, hi: f64| if hi > lo { b * (hi - lo) + s(hi) - s(lo) } else { 0.0 };
    if b >= r {
        return full(-r, a);
    }
    let q = (r * r - b * b).max(0.0).sqrt();
    if b >= 0.0 {
        full(-r, a.min(-q)) + partial(-q, a.min(q)) + full(q, a)
    } else {
        partial(-q, a.min(q))
    }
}

/// Area of the disk `|x - c| < r` inside the rectangle `[x0, x1] x [y0, y1]`.
pub fn disk_rect_area(c: [f64; 2], r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if r <= 0.0 || x1 <= x0 || y1 <= y0 {
        return 0.0;
    }
    let (ax0, ax1, ay0, ay1) = (x0 - c[0], x1 - c[0], y0 - c[1], y1 - c[1]);
    if ax0 >= r || ax1 <= -r || ay0 >= r || ay1 <= -r {
        return 0.0;
    }
    let area = quadrant_area(ax1, ay1, r) - quadrant_area(ax0, ay1, r) - quadrant_area(ax1, ay0, r)
        + quadrant_area(ax0, ay0, r);
    area.clamp(0.0, (x1 - x0) * (y1 - y0))
}
