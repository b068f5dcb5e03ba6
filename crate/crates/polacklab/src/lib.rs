//! A statistical room-acoustics laboratory for late reverberation.
//!
//! The crate models the late part of a room impulse response as exponentially
//! decaying Gaussian noise with frequency-dependent decay `alpha(f)` and
//! magnitude `b(f)`, and provides three layers on top of the model:
//!
//! - **theory** ([`moments`]): closed forms and quadrature for the second
//!   moments of the RIR's Fourier coefficient — per-frequency variances,
//!   cross-covariance, and the cross-frequency autocorrelation;
//! - **experiment** ([`synth`], [`ensemble`]): seeded samplers (plain and
//!   filter-bank based), Monte Carlo moment estimation, circularity and
//!   phase-uniformity hypothesis tests, and STFT phase-whiteness checks;
//! - **consequence** ([`loss`]): the four phase-kept / phase-invariant
//!   spectral losses, SI-SDR, and a phase-substitution experiment showing
//!   what reverberant phase does to waveform-level fidelity.
//!
//! See the `examples/` directory for one runnable program per capability and
//! the `polacklab` binary for the file-producing command-line front end.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod loss;
pub mod moments;
pub mod profile;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod synth;

mod stats;

pub use error::{Error, Result};
