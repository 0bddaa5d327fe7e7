//! Numerical engine for the non-equilibrium state of a strongly driven
//! optomechanical cavity with resonant polariton interactions.
//!
//! Three mutually cross-validating routes are provided:
//!
//! * [`model`] — closed-form linearized theory: polariton basis, effective
//!   damping rates and quantum-heating occupancies;
//! * [`keldysh`] — frequency-domain Green functions, leading-order and
//!   self-consistent self-energies, Dyson solver, instability analysis;
//! * [`lindblad`] — a truncated two-mode Fock-space master-equation oracle
//!   with quantum-regression spectra.
//!
//! Photon-frame observables (output spectrum, cavity DOS, effective
//! temperature, integrated flux) live in [`spectrum`]; the classical
//! Bessel-series treatment of the two-phonon peak in [`classical`].
//!
//! All rates and energies are in units of the cavity damping `κ = 1`.

pub mod classical;
pub mod error;
pub mod keldysh;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod spectrum;
pub mod window;

pub use error::{Error, Result};
pub use model::{LinearDissipation, Polariton, PolaritonBasis, SystemParams};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
