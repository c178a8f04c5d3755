//! JSON density files and CSV exports.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{CellGrid, Density1D, GridDensity, WeightedMeasure};

/// On-disk density: `values` are row-major with flat index `i0 * shape[1] + i1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub dim: usize,
    pub cell_width: f64,
    pub origin: Vec<f64>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub weight: WeightedMeasure,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    Grid(GridDensity),
    /// One-dimensional density on a power-weighted half-line.
    Weighted(Density1D),
}

impl Density {
    pub fn mass(&self) -> f64 {
        match self {
            Density::Grid(g) => g.mass(),
            Density::Weighted(d) => d.mass(),
        }
    }

    /// Line view of a one-dimensional density, weighted or not.
    pub fn as_line(&self) -> Result<Density1D> {
        match self {
            Density::Grid(g) => g.to_line(),
            Density::Weighted(d) => Ok(d.clone()),
        }
    }
}

impl DensityFile {
    pub fn from_grid(rho: &GridDensity) -> Self {
        let g = rho.grid();
        let d = g.dim();
        DensityFile {
            dim: d,
            cell_width: g.h(),
            origin: g.origin()[..d].to_vec(),
            shape: g.shape()[..d].to_vec(),
            values: rho.values().to_vec(),
            weight: WeightedMeasure::Constant,
        }
    }

    pub fn from_line(rho: &Density1D) -> Self {
        DensityFile {
            dim: 1,
            cell_width: rho.h(),
            origin: vec![rho.x_lo()],
            shape: vec![rho.len()],
            values: rho.values().to_vec(),
            weight: rho.measure(),
        }
    }

    pub fn into_density(self) -> Result<Density> {
        match (self.dim, self.weight) {
            (_, WeightedMeasure::Constant) => {
                let grid = CellGrid::new(self.dim, self.cell_width, &self.origin, &self.shape)?;
                Ok(Density::Grid(GridDensity::new(grid, self.values)?))
            }
            (1, w) => {
                if self.origin.len() != 1 || self.shape != [self.values.len()] {
                    return Err(Error::Format("origin/shape do not match the values".into()));
                }
                Ok(Density::Weighted(Density1D::new(self.origin[0], self.cell_width, self.values, w)?))
            }
            (d, _) => Err(Error::UnsupportedGeometry(format!("weighted densities must be one-dimensional, got {d}"))),
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Density> {
        let f = File::open(path)?;
        let file: DensityFile = serde_json::from_reader(BufReader::new(f))?;
        file.into_density()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.flush()?;
        Ok(())
    }
}

/// Cell centers and values as CSV.
pub fn write_density_csv<W: Write>(rho: &GridDensity, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let g = rho.grid();
    if g.dim() == 1 {
        wr.write_record(["x", "value"])?;
    } else {
        wr.write_record(["x", "y", "value"])?;
    }
    for (i, v) in rho.values().iter().enumerate() {
        let c = g.center(i);
        if g.dim() == 1 {
            wr.write_record([c[0].to_string(), v.to_string()])?;
        } else {
            wr.write_record([c[0].to_string(), c[1].to_string(), v.to_string()])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn grid_round_trip() {
        let rho = shapes::rectangle([0.0, 0.0], [0.5, 0.25], 0.75, 0.125).unwrap();
        let text = serde_json::to_string(&DensityFile::from_grid(&rho)).unwrap();
        let back: DensityFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_density().unwrap(), Density::Grid(rho));
    }

    #[test]
    fn weighted_round_trip_and_default_weight() {
        let w = WeightedMeasure::power(1.0).unwrap();
        let rho = Density1D::new(0.0, 0.1, vec![1.0, 0.5, 0.0], w).unwrap();
        let text = serde_json::to_string(&DensityFile::from_line(&rho)).unwrap();
        assert!(text.contains("\"kind\":\"power\""));
        let back: DensityFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_density().unwrap(), Density::Weighted(rho));

        let plain = r#"{"dim":1,"cell_width":0.5,"origin":[0.0],"shape":[2],"values":[1.0,0.0]}"#;
        let d: DensityFile = serde_json::from_str(plain).unwrap();
        assert!(matches!(d.into_density().unwrap(), Density::Grid(_)));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let bad = r#"{"dim":2,"cell_width":0.5,"origin":[0.0,0.0],"shape":[2,2],"values":[1.0,0.0]}"#;
        let d: DensityFile = serde_json::from_str(bad).unwrap();
        assert!(d.into_density().is_err());
        let weighted2d = r#"{"dim":2,"cell_width":0.5,"origin":[0.0,0.0],"shape":[1,1],"values":[1.0],"weight":{"kind":"power","exponent":1.0}}"#;
        let d: DensityFile = serde_json::from_str(weighted2d).unwrap();
        assert!(matches!(d.into_density(), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rho = shapes::interval(0.0, 0.5, 0.0, 1.0, 0.25).unwrap();
        let mut buf = Vec::new();
        write_density_csv(&rho, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("x,value"));
    }
}
