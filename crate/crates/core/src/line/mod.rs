//! Exact one-dimensional energies: the rightward sweep, distance profiles and
//! closed forms for intervals.

mod closed_form;
mod profile;
mod sweep;

pub use closed_form::{ball_energy_1d, interval_energy, sharp_example, SharpExample};
pub use profile::{distance_profile, profile_dominates, reference_profile, Domination};
pub use sweep::{sweep_rightward, sweep_rightward_with, Extension, MonotonePlan, Parcel, Sweep};
