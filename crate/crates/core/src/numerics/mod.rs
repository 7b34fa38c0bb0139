//! Dense linear-algebra engine: exact evolution, sequence unitaries,
//! channel means, noisy trajectories and observables.

pub mod channel;
pub mod dense;
pub mod observe;
pub mod state;

pub use channel::{channel_mean_unitary, mixing_bound, ChannelSource, MeanMode, MixedUnitaryChannel};
pub use channel::{sampled_trace_distance, trace_distance};
pub use dense::{
    error_report, exact_unitary, sequence_unitary, spectral_error, spectral_error_aligned, ErrorReport,
};
pub use observe::{shot_noise, track_exact, track_observables, Checkpoint, Observable, TimeSeries};
pub use state::{expectation, inject_noise, run_statevector, sector_ground_state, NoiseConfig, StateVector};
