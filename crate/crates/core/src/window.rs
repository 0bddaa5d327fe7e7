//! Frequency windows on a shared uniform lattice.
//!
//! All Green functions and self-energies are sampled on windows whose grid
//! points are integer multiples of one global step. Sums and differences of
//! lattice points are lattice points again, so the frequency-shift
//! arithmetic of the self-energy convolutions is exact index arithmetic and
//! never interpolates.

use crate::error::{Error, Result};
use crate::C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Minimum number of points per window.
pub const MIN_POINTS: usize = 1 << 10;
/// Hard cap guarding against degenerate spacing requests.
pub const MAX_POINTS: usize = 1 << 22;

/// A uniform frequency grid `ω_i = (start + i)·step`, `i = 0..n`, with `n` a
/// power of two. `center` keeps the physical frequency the window was
/// requested around (the nearest lattice point carries the peak).
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyWindow {
    start: i64,
    n: usize,
    step: f64,
    center: f64,
}

impl FrequencyWindow {
    /// Window of at least `2*half_width/step` points centred on `center`,
    /// rounded up to a power of two.
    pub fn new(center: f64, half_width: f64, step: f64) -> Result<Self> {
        if step <= 0.0 || !step.is_finite() || !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::Window("step and half_width must be positive".into()));
        }
        let needed = (2.0 * half_width / step).ceil() as usize + 1;
        let mut n = MIN_POINTS;
        while n < needed {
            n <<= 1;
            if n > MAX_POINTS {
                return Err(Error::Window(format!(
                    "window would need {needed} points (> {MAX_POINTS}); widen the step"
                )));
            }
        }
        let ci = (center / step).round() as i64;
        Ok(FrequencyWindow { start: ci - (n as i64) / 2, n, step, center })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Physical center the window was requested around.
    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Lattice index of the first point.
    #[inline]
    pub fn start_index(&self) -> i64 {
        self.start
    }

    #[inline]
    pub fn omega(&self, i: usize) -> f64 {
        (self.start + i as i64) as f64 * self.step
    }

    pub fn omega_min(&self) -> f64 {
        self.omega(0)
    }

    pub fn omega_max(&self) -> f64 {
        self.omega(self.n - 1)
    }

    pub fn half_width(&self) -> f64 {
        (self.omega_max() - self.omega_min()) / 2.0
    }

    /// All grid frequencies.
    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.omega(i)).collect()
    }

    /// Sample a scalar function on the grid.
    pub fn sample(&self, mut f: impl FnMut(f64) -> C64) -> Vec<C64> {
        (0..self.n).map(|i| f(self.omega(i))).collect()
    }

    /// Index of the grid point nearest to `omega`, if inside the window.
    pub fn index_near(&self, omega: f64) -> Option<usize> {
        let i = (omega / self.step).round() as i64 - self.start;
        (0..self.n as i64).contains(&i).then_some(i as usize)
    }

    /// Window doubled in half-width around the same center (same lattice).
    pub fn extended(&self) -> FrequencyWindow {
        FrequencyWindow {
            start: self.start - (self.n as i64) / 2,
            n: self.n * 2,
            step: self.step,
            center: self.center,
        }
    }

    /// Offset of `inner`'s first point inside `self`, when `inner` is fully
    /// contained and lattice-compatible.
    pub fn offset_of(&self, inner: &FrequencyWindow) -> Result<usize> {
        if (inner.step - self.step).abs() > 1e-15 * self.step {
            return Err(Error::Window("lattice steps differ".into()));
        }
        let off = inner.start - self.start;
        if off < 0 || inner.start + inner.n as i64 > self.start + self.n as i64 {
            return Err(Error::Window("window not contained".into()));
        }
        Ok(off as usize)
    }

    /// Quadratic (three-point) interpolation of sampled `values` at `omega`.
    pub fn interpolate(&self, values: &[f64], omega: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let x = omega / self.step - self.start as f64;
        let i = x.round().clamp(1.0, (self.n - 2) as f64) as usize;
        let t = x - i as f64;
        let (ym, y0, yp) = (values[i - 1], values[i], values[i + 1]);
        y0 + t * (yp - ym) / 2.0 + t * t * (yp - 2.0 * y0 + ym) / 2.0
    }
}

/// A function sampled on a window, as used by the convolution engine.
pub struct Sampled<'a> {
    pub window: &'a FrequencyWindow,
    pub values: &'a [C64],
}

/// Values on lattice indices `start..start+values.len()`.
pub struct LatticeValues {
    pub start: i64,
    pub step: f64,
    pub values: Vec<C64>,
}

impl LatticeValues {
    /// Extract the values on `target`, erroring when the image does not
    /// cover it.
    pub fn onto(&self, target: &FrequencyWindow) -> Result<Vec<C64>> {
        if (self.step - target.step()).abs() > 1e-15 * self.step {
            return Err(Error::Window("lattice steps differ".into()));
        }
        let off = target.start_index() - self.start;
        if off < 0
            || target.start_index() + target.len() as i64 > self.start + self.values.len() as i64
        {
            return Err(Error::Window(format!(
                "convolution image [{:.3}, {:.3}] does not cover target [{:.3}, {:.3}]",
                self.start as f64 * self.step,
                (self.start + self.values.len() as i64 - 1) as f64 * self.step,
                target.omega_min(),
                target.omega_max()
            )));
        }
        Ok(self.values[off as usize..off as usize + target.len()].to_vec())
    }
}

/// FFT-backed linear convolution/correlation engine. One instance caches
/// the FFT plans for a solve.
pub struct ConvolutionEngine {
    planner: FftPlanner<f64>,
}

impl Default for ConvolutionEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl ConvolutionEngine {
    pub fn new() -> Self {
        ConvolutionEngine { planner: FftPlanner::new() }
    }

    fn linear_convolution(&mut self, a: &[C64], b: &[C64]) -> Vec<C64> {
        let out_len = a.len() + b.len() - 1;
        let mut n = 1usize;
        while n < out_len {
            n <<= 1;
        }
        let fft = self.planner.plan_fft_forward(n);
        let ifft = self.planner.plan_fft_inverse(n);
        let mut fa = vec![C64::new(0.0, 0.0); n];
        let mut fb = vec![C64::new(0.0, 0.0); n];
        fa[..a.len()].copy_from_slice(a);
        fb[..b.len()].copy_from_slice(b);
        fft.process(&mut fa);
        fft.process(&mut fb);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        ifft.process(&mut fa);
        let scale = 1.0 / n as f64;
        fa.truncate(out_len);
        for x in fa.iter_mut() {
            *x *= scale;
        }
        fa
    }

    /// `(f ⋆ g)[ω] = ∫ dν/2π f[ν] g[ω-ν]` on the lattice.
    pub fn convolve(&mut self, f: Sampled, g: Sampled) -> LatticeValues {
        let step = f.window.step();
        debug_assert!((g.window.step() - step).abs() <= 1e-15 * step);
        let mut values = self.linear_convolution(f.values, g.values);
        let scale = step / (2.0 * PI);
        for v in values.iter_mut() {
            *v *= scale;
        }
        LatticeValues { start: f.window.start_index() + g.window.start_index(), step, values }
    }

    /// `∫ dν/2π f[ν] g[ν-ω]` on the lattice (cross-correlation).
    pub fn correlate(&mut self, f: Sampled, g: Sampled) -> LatticeValues {
        let step = f.window.step();
        debug_assert!((g.window.step() - step).abs() <= 1e-15 * step);
        let reversed: Vec<C64> = g.values.iter().rev().copied().collect();
        let mut values = self.linear_convolution(f.values, &reversed);
        let scale = step / (2.0 * PI);
        for v in values.iter_mut() {
            *v *= scale;
        }
        LatticeValues {
            start: f.window.start_index() - (g.window.start_index() + g.window.len() as i64 - 1),
            step,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn window_is_power_of_two_on_lattice() {
        let w = FrequencyWindow::new(31.62, 40.0, 0.025).unwrap();
        assert!(w.len() >= MIN_POINTS && w.len().is_power_of_two());
        assert!(w.half_width() >= 40.0);
        for i in (0..w.len()).step_by(97) {
            let ratio = w.omega(i) / w.step();
            assert_relative_eq!(ratio, ratio.round(), epsilon = 1e-9);
        }
        let i = w.index_near(31.62).unwrap();
        assert!((w.omega(i) - 31.62).abs() <= w.step() / 2.0);
    }

    #[test]
    fn window_rejects_bad_input() {
        assert!(FrequencyWindow::new(1.0, -1.0, 0.1).is_err());
        assert!(FrequencyWindow::new(1.0, 1.0, 0.0).is_err());
        assert!(FrequencyWindow::new(1.0, 1e9, 1e-9).is_err());
    }

    #[test]
    fn extended_contains_original() {
        let w = FrequencyWindow::new(10.0, 5.0, 0.01).unwrap();
        let e = w.extended();
        assert_eq!(e.len(), 2 * w.len());
        let off = e.offset_of(&w).unwrap();
        assert_eq!(off, w.len() / 2);
        assert_eq!(e.omega(off), w.omega(0));
    }

    #[test]
    fn convolution_of_lorentzians_matches_closed_form() {
        // L_a ⋆ L_b (widths ka, kb, centers Ea, Eb) = L_{ka+kb} at Ea+Eb,
        // with ∫ L dω/2π = 1 for L = k/((ω-E)² + k²/4)
        let (ea, ka) = (30.0, 0.5);
        let (eb, kb) = (61.0, 0.8);
        let h = 0.02;
        let wa = FrequencyWindow::new(ea, 60.0, h).unwrap();
        let wb = FrequencyWindow::new(eb, 60.0, h).unwrap();
        let lor = |e: f64, k: f64| move |w: f64| C64::new(k / ((w - e).powi(2) + k * k / 4.0), 0.0);
        let fa = wa.sample(lor(ea, ka));
        let fb = wb.sample(lor(eb, kb));
        let mut eng = ConvolutionEngine::new();
        let out = eng
            .convolve(Sampled { window: &wa, values: &fa }, Sampled { window: &wb, values: &fb });
        let target = FrequencyWindow::new(ea + eb, 30.0, h).unwrap();
        let got = out.onto(&target).unwrap();
        let kc = ka + kb;
        for (i, v) in got.iter().enumerate() {
            let w = target.omega(i);
            let expect = kc / ((w - ea - eb).powi(2) + kc * kc / 4.0);
            assert_relative_eq!(v.re, expect, max_relative = 2e-3, epsilon = 1e-4);
        }
    }

    #[test]
    fn correlation_center_arithmetic() {
        // ∫ dν/2π L_a[ν] L_b[ν-ω]: image centered at Ea - Eb
        let (ea, ka) = (63.0, 0.5);
        let (eb, kb) = (31.0, 0.5);
        let h = 0.02;
        let wa = FrequencyWindow::new(ea, 50.0, h).unwrap();
        let wb = FrequencyWindow::new(eb, 50.0, h).unwrap();
        let lor = |e: f64, k: f64| move |w: f64| C64::new(k / ((w - e).powi(2) + k * k / 4.0), 0.0);
        let fa = wa.sample(lor(ea, ka));
        let fb = wb.sample(lor(eb, kb));
        let mut eng = ConvolutionEngine::new();
        let out = eng
            .correlate(Sampled { window: &wa, values: &fa }, Sampled { window: &wb, values: &fb });
        let target = FrequencyWindow::new(ea - eb, 20.0, h).unwrap();
        let got = out.onto(&target).unwrap();
        let kc = ka + kb;
        let peak_expect = kc / (kc * kc / 4.0);
        let imax = got.iter().enumerate().max_by(|a, b| a.1.re.total_cmp(&b.1.re)).unwrap().0;
        assert!((target.omega(imax) - (ea - eb)).abs() <= h);
        assert_relative_eq!(got[imax].re, peak_expect, max_relative = 3e-3);
    }

    #[test]
    fn onto_rejects_uncovered_target() {
        let h = 0.05;
        let wa = FrequencyWindow::new(10.0, 30.0, h).unwrap();
        let fa = wa.sample(|_| C64::new(1.0, 0.0));
        let mut eng = ConvolutionEngine::new();
        let out = eng
            .convolve(Sampled { window: &wa, values: &fa }, Sampled { window: &wa, values: &fa });
        let far = FrequencyWindow::new(5000.0, 30.0, h).unwrap();
        assert!(out.onto(&far).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_quadratics() {
        let w = FrequencyWindow::new(5.0, 30.0, 0.01).unwrap();
        let f = |x: f64| 2.0 + 0.3 * x - 0.7 * x * x;
        let vals: Vec<f64> = (0..w.len()).map(|i| f(w.omega(i))).collect();
        for x in [4.3217, 5.0, 5.9999, 3.5] {
            assert_relative_eq!(w.interpolate(&vals, x), f(x), max_relative = 1e-9);
        }
    }
}
