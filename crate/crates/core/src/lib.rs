//! Scattering of one- and two-photon pulses on a two-sided atom-cavity
//! system in the bad-cavity regime, and the heralded photon-arrival
//! (QND) figures of merit built on top of it.
//!
//! The effective theory is parameter-free after scaling: the crate works in
//! `c = 1`, `Gamma = g^2/kappa = 1` units, so pulse durations are given in
//! `1/Gamma` and co-moving coordinates in `c/Gamma`. The `oracle` module
//! holds independent finite-kappa and brute-force-quadrature routes used to
//! validate the effective closed forms.
//!
//! ```
//! use qndsim::{default_grid, one_photon_output, PulseSpec};
//!
//! // a d = 40 Gaussian pulse is almost totally reflected: 0.49 % transmits
//! let spec = PulseSpec::gaussian(40.0)?;
//! let out = one_photon_output(&spec, &default_grid(&spec, &spec))?;
//! assert!((out.p_r() - 0.0049).abs() < 5e-4);
//! assert!((out.p_l() + out.p_r() - 1.0).abs() < 1e-6);
//! # Ok::<(), qndsim::Error>(())
//! ```

pub mod error;
pub mod metrics;
pub mod one_photon;
pub mod oracle;
pub mod pulses;
pub mod quad;
pub mod two_photon;

pub use error::{Error, Result};
pub use metrics::{
    conditional_signal_shape, find_duration_for_success, fit_exponential_decay,
    physical_scenario, qnd_metrics, qnd_metrics_detailed, qnd_metrics_with, sweep,
    weak_light_metrics, ConditionalShape, MetricsComputation, PhysicalScenario, QndMetrics,
    SweepMode, WeakLightSpec,
};
pub use one_photon::{
    absorbed_amplitude, one_photon_output, spectral_coefficients, CavityParams, OnePhotonResult,
};
pub use pulses::{default_grid, pulse_amplitude, Grid, PulseSpec, Shape};
pub use two_photon::{
    two_photon_amplitude, two_photon_probabilities, Channel, Side, TwoPhotonResult,
};
