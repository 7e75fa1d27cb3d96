//! Sweeps, Fisher information and direction-dependence reports built on the
//! dynamics.

pub mod cfi;
pub mod config;
pub mod io;
pub mod presets;
pub mod chirality;
pub mod sweep;

pub use cfi::{amplification_ratio, cfi, cfi_with, gradient, CfiReport, CfiVariant, Ratio};
pub use chirality::{chirality_report, nonreciprocity_roundtrip, ChiralityReport, ChiralityRow, ChiralityTable, RoundTrip, RoundTripReport};
pub use sweep::{linspace, sweep, with_workers, CellStatus, SweepCell, SweepResult, SweepSpec};
pub use presets::{figure2, figure3, figure3_with, AmplificationRow, Figure2, Figure3, PresetOptions, Sign};
pub use config::{ConfigFile, DeltaRange, Overrides, Settings, SignChoice};
