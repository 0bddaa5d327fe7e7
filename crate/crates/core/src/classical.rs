//! Classical radiation-pressure treatment of the two-phonon emission: the
//! Bessel-series cavity field driven by a sinusoidally oscillating mirror,
//! and the classical counterpart of the photon spectrum at `2ωM`.
//!
//! Everything is expressed in reduced parameters: the modulation index
//! `ε = (x0/L0)(ωC/ωM)` and the couplings `G/ωM`, `g/κ`; no lab-frame
//! quantities are needed. Delta peaks are `(center, weight)` pairs, never
//! discretized Lorentzians.

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::C64;
use std::f64::consts::PI;

/// Bessel function of the first kind, integer order, by power series
/// (ample accuracy for the modulation indices `ε ≲ 3` used here).
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let n = order.unsigned_abs() as u64;
    let sign = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let half = x / 2.0;
    // leading term (x/2)^n / n!
    let mut term = 1.0f64;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let x2 = half * half;
    for k in 1..80 {
        term *= -x2 / (k as f64 * (k as f64 + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    sign * sum
}

/// Steady-state cavity field under sinusoidal mirror motion, as the double
/// Bessel series over sideband orders `(n, m)`; the `(n, m)` component
/// oscillates at `(n+m)ωM` in the drive-rotating frame. Amplitudes are in
/// units of the input drive `a_in = 1`.
#[derive(Clone, Debug)]
pub struct ClassicalDriveState {
    pub epsilon: f64,
    pub cutoff: i32,
    /// `true` when `ε` exceeds the small-displacement regime (0.3).
    pub epsilon_warning: bool,
    coeffs: Vec<(i32, i32, C64)>,
    mech_freq: f64,
}

impl ClassicalDriveState {
    /// Raw series coefficients `a_{n,m}`.
    pub fn coefficients(&self) -> &[(i32, i32, C64)] {
        &self.coeffs
    }

    /// Net amplitude of the harmonic at `f·ωM` (rotating frame).
    pub fn harmonic_amplitude(&self, f: i32) -> C64 {
        self.coeffs.iter().filter(|&&(n, m, _)| n + m == f).map(|&(_, _, a)| a).sum()
    }

    /// Field sample at time `t` (rotating frame).
    pub fn field(&self, t: f64) -> C64 {
        self.coeffs
            .iter()
            .map(|&(n, m, a)| {
                let phase = (n + m) as f64 * self.mech_freq * t;
                a * C64::new(phase.cos(), phase.sin())
            })
            .sum()
    }

    /// Time-averaged `|a(t)|²` from the harmonic decomposition.
    pub fn mean_intensity(&self) -> f64 {
        let fmax = 2 * self.cutoff;
        (-fmax..=fmax).map(|f| self.harmonic_amplitude(f).norm_sqr()).sum()
    }

    /// Amplitude of the `e^{+iωMt}` component of `|a(t)|²` (the quadrature
    /// that carries optical damping and spring).
    pub fn intensity_first_harmonic(&self) -> C64 {
        let fmax = 2 * self.cutoff;
        (-fmax..=fmax)
            .map(|f| self.harmonic_amplitude(f) * self.harmonic_amplitude(f - 1).conj())
            .sum()
    }
}

/// Build the Bessel-series field for modulation index `epsilon`, keeping
/// sideband orders `|n|, |m| ≤ cutoff`.
pub fn classical_field(
    params: &SystemParams,
    epsilon: f64,
    cutoff: i32,
) -> Result<ClassicalDriveState> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::Domain("epsilon must be finite and non-negative".into()));
    }
    if cutoff < 4 {
        return Err(Error::SeriesCutoff("cutoff must be at least 4".into()));
    }
    let tail = bessel_j(cutoff, epsilon).abs().max(bessel_j(cutoff + 1, epsilon).abs());
    if tail >= 1e-12 {
        return Err(Error::SeriesCutoff(format!(
            "|J_n({epsilon})| = {tail:.2e} at the cutoff; raise the cutoff"
        )));
    }
    let kappa = params.cavity_damping();
    let mut coeffs = Vec::new();
    for n in -cutoff..=cutoff {
        let jn = bessel_j(n, epsilon);
        if jn.abs() < 1e-18 {
            continue;
        }
        let denom = C64::new(kappa / 2.0, n as f64 * params.mech_freq - params.detuning);
        for m in -cutoff..=cutoff {
            let jm = bessel_j(m, epsilon);
            if jm.abs() < 1e-18 {
                continue;
            }
            let ipow = match (n - m).rem_euclid(4) {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            let a = C64::new(0.0, 1.0) * ipow * jn * jm / denom;
            coeffs.push((n, m, a));
        }
    }
    Ok(ClassicalDriveState {
        epsilon,
        cutoff,
        epsilon_warning: epsilon > 0.3,
        coeffs,
        mech_freq: params.mech_freq,
    })
}

/// A delta-function spectral line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaPeak {
    pub center: f64,
    pub weight: f64,
}

/// Classical counterpart of the two-phonon emission line: a delta peak at
/// `2ωM` of weight `16(G/ωM)²(g/κ)²(n̄ᴹth)²·π`.
pub fn classical_spectrum(params: &SystemParams) -> DeltaPeak {
    let x = (params.many_photon_coupling / params.mech_freq).powi(2);
    let g_ratio = params.single_photon_coupling / params.cavity_damping();
    DeltaPeak {
        center: 2.0 * params.mech_freq,
        weight: 16.0 * x * g_ratio.powi(2) * params.mech_bath_occupancy.powi(2) * PI,
    }
}
