//! Experiment drivers for the constrained transport energy.

pub mod config;
pub mod energy;
pub mod quant1d;
pub mod random;
pub mod sharpness;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use otmax_core::io::DensityFile;

pub use config::{Command, ExperimentConfig, Solver};

/// Writes to `out`, or to stdout without a path.
pub fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(value: &T, w: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Runs one command. Returns `false` when a verification check failed.
pub fn run(cfg: &ExperimentConfig) -> Result<bool> {
    cfg.validate()?;
    let out = cfg.out.as_deref();
    match cfg.command {
        Command::Energy => {
            let path = cfg.input.as_deref().expect("validated");
            let density = DensityFile::read(path).with_context(|| format!("cannot load {}", path.display()))?;
            let report = energy::run_energy(cfg, &density)?;
            with_output(out, |w| write_json(&report, w))?;
            Ok(true)
        }
        Command::Quant1d => {
            let run = quant1d::run_quant1d(cfg)?;
            with_output(out, |w| quant1d::write_quant1d_csv(&run, w))?;
            match run.min_ratio {
                Some(r) => eprintln!("min deficit/A^2 over samples with A > {}: {r}", quant1d::RATIO_THRESHOLD),
                None => eprintln!("no sample with A > {}", quant1d::RATIO_THRESHOLD),
            }
            eprintln!("min deficit: {}", run.min_deficit);
            Ok(true)
        }
        Command::Sharpness => {
            let run = sharpness::run_sharpness(cfg)?;
            with_output(out, |w| sharpness::write_sharpness_csv(&run, w))?;
            eprintln!("limit of deficit/A^2: {}; against the centered interval: {}", run.limit, run.limit_centered);
            Ok(true)
        }
        Command::Verify => {
            let checks = verify::run_verify(cfg)?;
            with_output(out, |w| write_json(&checks, w))?;
            Ok(verify::all_pass(&checks))
        }
    }
}
