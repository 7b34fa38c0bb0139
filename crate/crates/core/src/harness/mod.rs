//! Configuration-driven studies: sweeps, time series, histograms and bound
//! comparisons, written as CSV with optional SVG charts.

pub mod config;
pub mod output;
pub mod plot;
pub mod report;
pub mod study;

pub use config::{load_problem, ExperimentConfig, GridUnit, Metric, Problem, ProtocolChoice};
pub use report::{compare_bounds, histogram, BoundComparison, HistogramRow};
pub use study::{compile, simulate, summarize, sweep, ResultRow, SeriesRow, SummaryRow};
