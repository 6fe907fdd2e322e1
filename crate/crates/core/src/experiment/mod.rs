//! Experiment runner: JSON configuration in, CSV and JSON reports out.

mod config;
mod emit;
mod report;
mod run;

pub use config::{
    EssentialParams, ExhaustiveParams, ExperimentConfig, ExpanderParams, ExtractorParams, Format,
    IncidenceParams, IntervalParams, Kind, LineFamilyParams, MomentParams, MultTableParams,
    OutputConfig, PrimeRange, PrimeSelection, SarkozyParams, WeilParams, WellSpacedParams,
    WitnessParams,
};
pub use emit::{emit, format_real, report_from_json, report_json, section_csv};
pub use report::{Cell, ExperimentReport, Provenance, Section};
pub use run::run;
