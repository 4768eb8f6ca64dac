//! Three-phase permanent-magnet synchronous machine models with per-phase
//! parameter imbalance.
//!
//! The crate is organised around two independent routes to the same
//! dq-frame voltages:
//!
//! * [`machine`] evaluates the stationary (abc) frame equations directly and
//!   [`transforms`] rotates the result into the dq0 frame.
//! * [`imbalance`] gives closed-form dq-frame voltage deviations for
//!   resistance, magnet flux-linkage and inductance imbalance, added on top
//!   of the ideal dq model.
//!
//! [`sim`] drives the abc model in time (prescribed currents or a
//! voltage-fed RK4 integration), [`harmonics`] extracts the DC and
//! second-harmonic content of the resulting waveforms and
//! [`identification`] inverts measured second-harmonic signatures back into
//! per-phase deviations.

pub mod error;
pub mod harmonics;
pub mod identification;
pub mod imbalance;
mod linalg;
pub mod machine;
pub mod sim;
pub mod transforms;

pub use error::{Error, Result};
pub use harmonics::{compare_waveforms, demodulate, HarmonicDecomposition, WaveformError};
pub use identification::{
    fit_flux, fit_resistance, invert_phasor, predict_current_ripple, predict_steady_ripple,
    steady_ripple_forcing, IdentificationResult, ImbalanceFamily, InvertedDeviations,
    RipplePrediction,
};
pub use imbalance::{
    compose_total, flux_coeffs, flux_delta, inductance_coeffs, inductance_delta, resistance_coeffs,
    resistance_delta, DqVoltageDelta, InductanceCoeffs, SecondHarmonicPhasor,
};
pub use machine::{
    decompose, flux_linkages, ideal_dq_nonsalient, ideal_dq_salient, phase_voltages, torque_abc,
    DqModelOutput, ImbalanceDecomposition, MachineParameters, NonSalientDq, OperatingPoint,
    SalientDq,
};
pub use sim::{run_current_fed, run_voltage_fed, FeedMode, Neutral, SimConfig, TimeSeries};
pub use transforms::{park_forward, park_inverse, AbcVector, Dq0Vector, BETA};
