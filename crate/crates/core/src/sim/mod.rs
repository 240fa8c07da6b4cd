//! Finite-SNR Monte Carlo of the ARQ-DDF protocols over quasi-static
//! Rayleigh fading.
//!
//! Decoding is modelled by mutual-information outage at the accumulated
//! rate `R1 / l` after `l` rounds; SNR enters with the full `rho` (no 1/2
//! factor), which does not change any exponent.

pub mod channel;
pub mod engine;
pub mod protocol;
pub mod stats;

pub use channel::{sample_channel, ChannelConfig, ChannelDraw, Sampling, SimScenario};
pub use engine::{
    run_point, run_range, run_shard, run_trials, slope_of, write_sim_csv, write_slope_csv, Counts,
    PointEstimate, SimConfig, SlopeRow,
};
pub use protocol::{
    label_cvma, relay_listen_fraction_cvma, relay_listen_fraction_mar, round_outage_mar,
    round_outage_relay, run_trial, ArqTrialOutcome, CvmaLabels, MarOutage, ProtocolConfig,
};
pub use stats::{estimate_slope, wilson, SlopeEstimate, SlopePoint};
