//! Densities, reference measures and the volume coordinate.

mod asymmetry;
mod cubes;
pub mod geometry;

pub use asymmetry::{asymmetry, best_ball, BallFit};
pub use cubes::{cube_approximation, CubeApproximation};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Values within this distance outside `[0, 1]` are clamped instead of rejected.
pub const VALUE_TOL: f64 = 1e-12;

/// Lebesgue measure of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// `(2 / omega_n)^(1/n)`: a ball of that radius times `m^(1/n)` holds mass `2m`.
pub fn distance_constant(n: usize) -> f64 {
    (2.0 / unit_ball_volume(n)).powf(1.0 / n as f64)
}

/// Reference measure on the line: `w = 1` on all of `R`, or `w(r) = r^k` on `[0, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightedMeasure {
    Constant,
    Power { exponent: f64 },
}

impl Default for WeightedMeasure {
    fn default() -> Self {
        WeightedMeasure::Constant
    }
}

impl WeightedMeasure {
    pub fn power(exponent: f64) -> Result<Self> {
        if exponent.is_finite() && exponent >= 0.0 {
            Ok(WeightedMeasure::Power { exponent })
        } else {
            Err(domain(format!("weight exponent must be finite and >= 0, got {exponent}")))
        }
    }

    /// Radial measure `r^(n-1) dr` of an `n`-dimensional ray.
    pub fn radial(n: usize) -> Self {
        if n <= 1 {
            WeightedMeasure::Constant
        } else {
            WeightedMeasure::Power { exponent: (n - 1) as f64 }
        }
    }

    pub fn is_half_line(&self) -> bool {
        matches!(self, WeightedMeasure::Power { .. })
    }

    pub fn weight(&self, x: f64) -> f64 {
        match *self {
            WeightedMeasure::Constant => 1.0,
            WeightedMeasure::Power { exponent } => {
                if exponent == 0.0 {
                    1.0
                } else {
                    x.max(0.0).powf(exponent)
                }
            }
        }
    }

    /// `gamma([0, x])`, signed for the constant weight.
    pub fn cumulative(&self, x: f64) -> f64 {
        match *self {
            WeightedMeasure::Constant => x,
            WeightedMeasure::Power { exponent } => {
                let k1 = exponent + 1.0;
                x.max(0.0).powf(k1) / k1
            }
        }
    }

    /// Inverse of [`cumulative`](Self::cumulative).
    pub fn inverse_cumulative(&self, v: f64) -> f64 {
        match *self {
            WeightedMeasure::Constant => v,
            WeightedMeasure::Power { exponent } => {
                let k1 = exponent + 1.0;
                (k1 * v.max(0.0)).powf(1.0 / k1)
            }
        }
    }

    pub fn interval(&self, a: f64, b: f64) -> f64 {
        match *self {
            WeightedMeasure::Constant => b - a,
            WeightedMeasure::Power { .. } => self.cumulative(b) - self.cumulative(a),
        }
    }

    /// The point `b >= a` with `gamma([a, b]) = m`.
    pub fn advance(&self, a: f64, m: f64) -> f64 {
        match *self {
            WeightedMeasure::Constant => a + m,
            WeightedMeasure::Power { .. } => self.inverse_cumulative(self.cumulative(a) + m),
        }
    }
}

fn clean_values(values: Vec<f64>) -> Result<Vec<f64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            if !v.is_finite() || v < -VALUE_TOL || v > 1.0 + VALUE_TOL {
                Err(domain(format!("density value {v} at cell {i} is outside [0, 1]")))
            } else {
                Ok(v.clamp(0.0, 1.0))
            }
        })
        .collect()
}

fn check_width(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("cell width must be finite and positive, got {h}")))
    }
}

/// Piecewise-constant density on consecutive cells of width `h` starting at `x_lo`.
#[derive(Clone, Debug, PartialEq)]
pub struct Density1D {
    x_lo: f64,
    h: f64,
    values: Vec<f64>,
    measure: WeightedMeasure,
}

impl Density1D {
    pub fn new(x_lo: f64, h: f64, values: Vec<f64>, measure: WeightedMeasure) -> Result<Self> {
        check_width(h)?;
        if !x_lo.is_finite() {
            return Err(domain("left endpoint must be finite"));
        }
        let x_lo = if measure.is_half_line() {
            if x_lo < -1e-12 {
                return Err(domain(format!("half-line density starts at {x_lo} < 0")));
            }
            x_lo.max(0.0)
        } else {
            x_lo
        };
        Ok(Density1D { x_lo, h, values: clean_values(values)?, measure })
    }

    /// Cells on `[x_lo, x_lo + n h]` holding the `gamma`-average of the given blocks.
    pub fn from_blocks(x_lo: f64, h: f64, n: usize, measure: WeightedMeasure, blocks: &[(f64, f64, f64)]) -> Result<Self> {
        check_width(h)?;
        let mut values = vec![0.0; n];
        for (i, v) in values.iter_mut().enumerate() {
            let a = x_lo + i as f64 * h;
            let b = x_lo + (i + 1) as f64 * h;
            let cell = measure.interval(a, b);
            if cell <= 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for &(lo, hi, val) in blocks {
                let l = lo.max(a);
                let r = hi.min(b);
                if r > l {
                    acc += val * measure.interval(l, r);
                }
            }
            *v = (acc / cell).min(1.0);
        }
        Density1D::new(x_lo, h, values, measure)
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn measure(&self) -> WeightedMeasure {
        self.measure
    }
    pub fn x_hi(&self) -> f64 {
        self.edge(self.values.len())
    }

    /// Left boundary of cell `i` (or right boundary of the last cell for `i = len`).
    pub fn edge(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.h
    }
    pub fn midpoint(&self, i: usize) -> f64 {
        self.x_lo + (i as f64 + 0.5) * self.h
    }
    pub fn cell_measure(&self, i: usize) -> f64 {
        match self.measure {
            WeightedMeasure::Constant => self.h,
            w => w.interval(self.edge(i), self.edge(i + 1)),
        }
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| v * self.cell_measure(i)).sum()
    }

    /// `V_rho(x)`, the mass to the left of `x`.
    pub fn volume(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let a = self.edge(i);
            if x <= a {
                break;
            }
            let b = self.edge(i + 1).min(x);
            acc += v * self.measure.interval(a, b);
        }
        acc
    }

    /// Leftmost `x` with `V_rho(x) = v`.
    pub fn volume_inverse(&self, v: f64) -> Result<f64> {
        let total = self.mass();
        if !(v >= 0.0 && v <= total * (1.0 + 1e-12) + 1e-15) {
            return Err(domain(format!("volume {v} outside [0, {total}]")));
        }
        let mut acc = 0.0;
        let mut last_full = self.x_lo;
        for (i, &val) in self.values.iter().enumerate() {
            if val <= 0.0 {
                continue;
            }
            let a = self.edge(i);
            let cell = val * self.cell_measure(i);
            last_full = self.edge(i + 1);
            if acc + cell >= v {
                let need = ((v - acc) / val).max(0.0);
                return Ok(self.measure.advance(a, need).min(self.edge(i + 1)));
            }
            acc += cell;
        }
        Ok(last_full)
    }

    /// Same density with `extra` empty cells appended on the right.
    pub fn extended(&self, extra: usize) -> Density1D {
        let mut values = self.values.clone();
        values.resize(values.len() + extra, 0.0);
        Density1D { values, ..self.clone() }
    }

    /// Grid view of a density on the unweighted line.
    pub fn to_grid(&self) -> Result<GridDensity> {
        if self.measure != WeightedMeasure::Constant {
            return Err(Error::UnsupportedGeometry("grid view needs the constant weight".into()));
        }
        GridDensity::new(CellGrid::line(self.x_lo, self.h, self.values.len())?, self.values.clone())
    }
}

/// Uniform cell decomposition of a box in `R` or `R^2`.
///
/// Cells are stored row-major: flat index `i0 * shape[1] + i1`, where `i0`
/// runs along the first coordinate. In one dimension `shape[1] == 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    dim: usize,
    h: f64,
    origin: [f64; 2],
    shape: [usize; 2],
}

impl CellGrid {
    pub fn new(dim: usize, h: f64, origin: &[f64], shape: &[usize]) -> Result<Self> {
        check_width(h)?;
        if !(dim == 1 || dim == 2) {
            return Err(Error::UnsupportedGeometry(format!("grids of dimension {dim} are not supported")));
        }
        if origin.len() != dim || shape.len() != dim {
            return Err(domain("origin and shape must have one entry per dimension"));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(domain("grid origin must be finite"));
        }
        let mut o = [0.0; 2];
        let mut s = [1usize; 2];
        o[..dim].copy_from_slice(origin);
        s[..dim].copy_from_slice(shape);
        Ok(CellGrid { dim, h, origin: o, shape: s })
    }

    pub fn line(x_lo: f64, h: f64, n: usize) -> Result<Self> {
        CellGrid::new(1, h, &[x_lo], &[n])
    }

    pub fn square(origin: [f64; 2], h: f64, nx: usize, ny: usize) -> Result<Self> {
        CellGrid::new(2, h, &origin, &[nx, ny])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }
    pub fn cell_diameter(&self) -> f64 {
        self.h * (self.dim as f64).sqrt()
    }

    pub fn flat(&self, i0: usize, i1: usize) -> usize {
        i0 * self.shape[1] + i1
    }
    pub fn multi(&self, idx: usize) -> [usize; 2] {
        [idx / self.shape[1], idx % self.shape[1]]
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let [i0, i1] = self.multi(idx);
        let x = self.origin[0] + (i0 as f64 + 0.5) * self.h;
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, self.origin[1] + (i1 as f64 + 0.5) * self.h]
        }
    }

    /// Upper corner of the box along each axis.
    pub fn upper(&self) -> [f64; 2] {
        [
            self.origin[0] + self.shape[0] as f64 * self.h,
            self.origin[1] + self.shape[1] as f64 * self.h,
        ]
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let ca = self.center(a);
        let cb = self.center(b);
        ((ca[0] - cb[0]).powi(2) + (ca[1] - cb[1]).powi(2)).sqrt()
    }

    pub(crate) fn with(&self, h: f64, origin: [f64; 2], shape: [usize; 2]) -> CellGrid {
        CellGrid { dim: self.dim, h, origin, shape }
    }
}

/// Piecewise-constant density on a [`CellGrid`] with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    grid: CellGrid,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(grid: CellGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(domain(format!("{} values for a grid of {} cells", values.len(), grid.len())));
        }
        Ok(GridDensity { grid, values: clean_values(values)? })
    }

    pub fn zeros(grid: CellGrid) -> Self {
        let n = grid.len();
        GridDensity { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn dim(&self) -> usize {
        self.grid.dim
    }
    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_measure()
    }

    pub fn get(&self, i0: usize, i1: usize) -> f64 {
        self.values[self.grid.flat(i0, i1)]
    }

    /// `x -> rho(x / t)`: same cell values on a grid scaled by `t`.
    pub fn rescale(&self, t: f64) -> Result<GridDensity> {
        if !(t.is_finite() && t > 0.0) {
            return Err(domain(format!("scale factor must be positive, got {t}")));
        }
        let g = &self.grid;
        let grid = g.with(g.h * t, [g.origin[0] * t, g.origin[1] * t], g.shape);
        Ok(GridDensity { grid, values: self.values.clone() })
    }

    /// Translation by a whole number of cells.
    pub fn shifted(&self, cells: [i64; 2]) -> GridDensity {
        let g = &self.grid;
        let mut origin = g.origin;
        for a in 0..g.dim {
            origin[a] += cells[a] as f64 * g.h;
        }
        GridDensity { grid: g.with(g.h, origin, g.shape), values: self.values.clone() }
    }

    /// Same density on a grid padded by `pad` empty cells on every side.
    pub fn padded(&self, pad: usize) -> GridDensity {
        let g = &self.grid;
        let mut shape = g.shape;
        let mut origin = g.origin;
        for a in 0..g.dim {
            shape[a] += 2 * pad;
            origin[a] -= pad as f64 * g.h;
        }
        let grid = g.with(g.h, origin, shape);
        let mut values = vec![0.0; grid.len()];
        let off1 = if g.dim == 2 { pad } else { 0 };
        for i0 in 0..g.shape[0] {
            for i1 in 0..g.shape[1] {
                values[grid.flat(i0 + pad, i1 + off1)] = self.values[g.flat(i0, i1)];
            }
        }
        GridDensity { grid, values }
    }

    /// Index bounding box `[lo, hi)` of the cells with positive value.
    pub fn support_box(&self) -> Option<([usize; 2], [usize; 2])> {
        let mut lo = [usize::MAX; 2];
        let mut hi = [0usize; 2];
        for (idx, &v) in self.values.iter().enumerate() {
            if v > 0.0 {
                let m = self.grid.multi(idx);
                for a in 0..2 {
                    lo[a] = lo[a].min(m[a]);
                    hi[a] = hi[a].max(m[a] + 1);
                }
            }
        }
        (lo[0] != usize::MAX).then_some((lo, hi))
    }

    /// One-dimensional view with the constant weight.
    pub fn to_line(&self) -> Result<Density1D> {
        if self.grid.dim != 1 {
            return Err(Error::UnsupportedGeometry("line view of a two-dimensional density".into()));
        }
        Density1D::new(self.grid.origin[0], self.grid.h, self.values.clone(), WeightedMeasure::Constant)
    }
}

/// Samples of a volume-coordinate profile: at volume `v`, the position
/// `V^{-1}(v)` and a transport distance.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VolumeProfile {
    pub volumes: Vec<f64>,
    pub positions: Vec<f64>,
    pub distances: Vec<f64>,
}
