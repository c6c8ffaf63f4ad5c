//! Modulation noise and key rates of OFDM multi-carrier CV-QKD.
//!
//! * [`constellation`]: per-quadrature moments of QPSK, shaped QAM, Gaussian
//! * [`intermod`]: third-order intermodulation tuple counts
//! * [`noise_model`]: closed-form IQ-imbalance and intermodulation noise
//! * [`waveform_oracle`]: Monte Carlo synthesis and demodulation of symbols
//! * [`security`]: Gaussian covariance-matrix key rates
//! * [`pipeline`], [`config`], [`output`]: sweeps, TOML configs, CSV/JSON
//!
//! Data-parallel loops run on rayon when the default `parallel` feature is
//! on; [`Execution::Sequential`] (or building without the feature) runs the
//! same code on one thread with identical results.

pub mod bessel;
pub mod config;
pub mod constellation;
pub mod error;
pub mod exec;
pub mod intermod;
pub mod noise_model;
pub mod output;
pub mod pipeline;
pub mod security;
pub mod waveform_oracle;

pub use config::{OutputFormat, ProtocolKind, Study, SweepSpec};
pub use constellation::{Constellation, FourthMomentConvention, Moments, Protocol};
pub use error::{Error, Result};
pub use exec::Execution;
pub use intermod::{
    count_intermod, count_intermod_with, count_table, IndexRule, IntermodCounts, TupleCounting,
};
pub use noise_model::{
    eps_mod, eps_mod_ratio, eps_multi, worst_subcarrier, IntermodOptions, ModulatorConfig,
    NoiseBudget,
};
pub use pipeline::{
    optimize_n, run_gain, run_noise_vs_n, run_skr_vs_distance, run_study, StudyOutput, SweepResult,
};
pub use security::{
    null_key_threshold, skr_gaussian, skr_protocol, transmittance, Backend, ChannelDetector,
    Detection, SkrPoint,
};
pub use waveform_oracle::{
    bessel_series_field, demodulate_subcarrier, measure_noise, synthesize_field, MeasuredNoise,
    WaveformRun,
};
