//! Lens data on `S*_+(S0)`: sampling, travelling-time tables, trapped-set
//! estimates, scattering length spectra and two-scene comparison.

mod compare;
mod sample;
mod spectrum;
mod table;
mod trapped;

use thiserror::Error;

pub use compare::{boundary_distance, compare_lens, ComparisonReport, Verdict, TIME_TOLERANCE};
pub use sample::{entry_from_params, sample_phase_sphere, zonal_partition, Entry, SampleMode, SampleSpec};
pub use spectrum::{scattering_spectrum, SpectrumBin, SpectrumOptions};
pub use table::{build_lens_table, trace_sample, LensSample, LensSummary, LensTable, SampleStatus};
pub use trapped::{estimate_trapped, estimate_trapped_region, RegionGrid, TrappedEstimate, TrappedLevel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LensError {
    #[error("bad sampling spec: {0}")]
    BadSpec(String),
    #[error("malformed lens table: {0}")]
    Format(String),
    #[error("tables were not sampled alike: {0}")]
    SpecMismatch(String),
}

#[cfg(test)]
mod tests;
