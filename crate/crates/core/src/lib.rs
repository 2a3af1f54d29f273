//! Simulation and analysis of an induced-coherence ("undetected photon")
//! interferometer imaging a knife edge, used to certify transverse
//! position-momentum entanglement of SPDC photon pairs from single-photon
//! interference alone.
//!
//! The crate is organised around the measurement chain:
//!
//! - [`physics`]: double-Gaussian twin-photon densities, conditional and
//!   MGVT variances, and the knife-edge object.
//! - [`sim`]: closed-form single-photon counting rates and Poisson camera
//!   frame stacks under a scanned interferometric phase.
//! - [`fit`]: per-pixel sinusoid fits, visibility maps, row-band cross
//!   sections and the error-function edge-spread fit.
//! - [`entanglement`]: widths to correlation spreads, EPR and MGVT
//!   products with propagated uncertainty, and verdicts.
//! - [`oracle`]: brute-force quadrature checks of every closed form.
//! - [`io`] and [`cli`]: run configuration, the `ICFS` stack container,
//!   CSV/JSON reports and the command implementations behind the `icfs`
//!   binary.
//!
//! All lengths are in metres, wavenumbers in 1/m and angles in radians.

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod fit;
pub mod io;
pub mod oracle;
pub mod physics;
pub mod sim;

pub use error::{Error, Result};
