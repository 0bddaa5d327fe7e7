//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the physical domain (instability, negative radicand, ...).
    Domain(String),
    /// Frequency-window construction or alignment failure.
    Window(String),
    /// Dyson denominator vanished on the grid.
    PoleOnGrid { omega: f64, magnitude: f64 },
    /// NaN/Inf encountered mid-solve.
    NumericalBreakdown(String),
    /// Fock truncation too small for the predicted occupancy.
    Truncation(String),
    /// Requested Liouvillian exceeds the configured dimension cap.
    MemoryBudget { dim: usize, cap: usize },
    /// Linear/eigen solver failed to converge.
    SolverFailure(String),
    /// Integration band extends outside the computed grid.
    BandClipping(String),
    /// Bessel-series cutoff insufficient for the requested tolerance.
    SeriesCutoff(String),
    /// Scenario/configuration error.
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Window(m) => write!(f, "window error: {m}"),
            Error::PoleOnGrid { omega, magnitude } => {
                write!(f, "pole on grid: |denominator| = {magnitude:.3e} at omega = {omega}")
            }
            Error::NumericalBreakdown(m) => write!(f, "numerical breakdown: {m}"),
            Error::Truncation(m) => write!(f, "truncation too small: {m}"),
            Error::MemoryBudget { dim, cap } => {
                write!(f, "dimension {dim} exceeds configured cap {cap}")
            }
            Error::SolverFailure(m) => write!(f, "solver failure: {m}"),
            Error::BandClipping(m) => write!(f, "band clipped by grid: {m}"),
            Error::SeriesCutoff(m) => write!(f, "series cutoff insufficient: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
        }
    }
}

impl std::error::Error for Error {}
