//! Keldysh Green functions of the two polaritons, second-order (bubble)
//! self-energies and the self-consistent Dyson solver.
//!
//! Conventions: `Gᴿ[ω] = 1/(ω - Eσ + iκσ/2)` for the bare modes, and the
//! Keldysh components carry the occupancy through
//! `Gᴷ = (2n̄+1)(Gᴿ - Gᴬ)`, i.e. `Im Gᴷ ≤ 2 Im Gᴿ ≤ 0`. The same relation
//! defines the interaction-bath occupancy `n̄int` through `Σᴷ` and `Σᴿ`.
//!
//! The second-order self-energies of the resonant `c+†c-c-` vertex are
//! frequency-domain convolutions; evaluated on bare Green functions they
//! collapse to single Lorentzians (the leading-order closed forms), which is
//! the validation contract `bubble_self_energy` is tested against.

use crate::error::{Error, Result};
use crate::model::{LinearDissipation, Polariton, PolaritonBasis};
use crate::window::{ConvolutionEngine, FrequencyWindow, LatticeValues, Sampled};
use crate::C64;
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

/// Bare-mode data anchoring a Green-function set: used for analytic tails
/// outside the sampled windows and for the bath Keldysh block in the Dyson
/// equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailAnchor {
    pub energy: f64,
    pub damping: f64,
    pub occupancy: f64,
}

impl TailAnchor {
    #[inline]
    pub fn retarded(&self, w: f64) -> C64 {
        1.0 / C64::new(w - self.energy, self.damping / 2.0)
    }

    #[inline]
    pub fn keldysh(&self, w: f64) -> C64 {
        2.0 * I * (2.0 * self.occupancy + 1.0) * self.retarded(w).im
    }
}

/// Retarded and Keldysh functions of one polariton on its window.
#[derive(Clone, Debug)]
pub struct GreenComponent {
    pub window: FrequencyWindow,
    pub retarded: Vec<C64>,
    pub keldysh: Vec<C64>,
}

impl GreenComponent {
    /// Advanced function `Gᴬ = (Gᴿ)*` pointwise.
    pub fn advanced(&self) -> Vec<C64> {
        self.retarded.iter().map(|g| g.conj()).collect()
    }

    /// Spectral density `ρ[ω] = -Im Gᴿ[ω]/π`.
    pub fn dos(&self) -> Vec<f64> {
        self.retarded.iter().map(|g| -g.im / PI).collect()
    }
}

/// Full set of polariton Green functions.
#[derive(Clone, Debug)]
pub struct GreenFunctionSet {
    pub minus: GreenComponent,
    pub plus: GreenComponent,
    /// Bare anchors, kept for off-window tails and the bath Keldysh block.
    pub anchors: [TailAnchor; 2],
    /// Set per branch when the Dyson denominator came within ten grid
    /// spacings of a zero: the results there are unresolved, not trusted.
    pub near_pole: [bool; 2],
}

impl GreenFunctionSet {
    #[inline]
    pub fn component(&self, p: Polariton) -> &GreenComponent {
        match p {
            Polariton::Minus => &self.minus,
            Polariton::Plus => &self.plus,
        }
    }

    /// Mode occupancy `⟨cσ†cσ⟩ = (i∫dω/2π Gᴷ - 1)/2`, with the off-window
    /// part of the integral completed by the bare-mode tail.
    pub fn total_occupancy(&self, p: Polariton) -> f64 {
        let c = self.component(p);
        let a = &self.anchors[p.idx()];
        let sum: C64 = c.keldysh.iter().sum();
        let on_window = (I * sum * c.window.step() / (2.0 * PI)).re;
        // the rectangle sum covers [ωmin - h/2, ωmax + h/2]
        let h2 = c.window.step() / 2.0;
        let wl = a.energy - (c.window.omega_min() - h2);
        let wr = c.window.omega_max() + h2 - a.energy;
        let covered = ((2.0 * wr / a.damping).atan() + (2.0 * wl / a.damping).atan()) / PI;
        let tail = (2.0 * a.occupancy + 1.0) * (1.0 - covered);
        (on_window + tail - 1.0) / 2.0
    }
}

/// Retarded/Keldysh self-energies of one polariton.
#[derive(Clone, Debug)]
pub struct SigmaComponent {
    pub window: FrequencyWindow,
    pub retarded: Vec<C64>,
    pub keldysh: Vec<C64>,
}

impl SigmaComponent {
    /// Interaction-induced damping `Γint[ω] = -2 Im Σᴿ[ω]`.
    pub fn gamma_int(&self) -> Vec<f64> {
        self.retarded.iter().map(|s| -2.0 * s.im).collect()
    }

    /// Occupancy of the interaction-induced bath, `Σᴷ = (2n̄int+1)(Σᴿ-Σᴬ)`.
    /// Diverges (±∞) where `Γint` crosses zero while `Σᴷ` stays finite.
    pub fn n_int(&self) -> Vec<f64> {
        self.retarded
            .iter()
            .zip(&self.keldysh)
            .map(|(r, k)| {
                let gamma = -2.0 * r.im;
                let s = -k.im; // iΣᴷ, real and ≥ 0
                if gamma.abs() < 1e-300 {
                    if s == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY * s.signum()
                    }
                } else {
                    (s / gamma - 1.0) / 2.0
                }
            })
            .collect()
    }
}

/// Self-energies for both polaritons.
#[derive(Clone, Debug)]
pub struct SelfEnergySet {
    pub minus: SigmaComponent,
    pub plus: SigmaComponent,
}

impl SelfEnergySet {
    #[inline]
    pub fn component(&self, p: Polariton) -> &SigmaComponent {
        match p {
            Polariton::Minus => &self.minus,
            Polariton::Plus => &self.plus,
        }
    }

    /// Zero self-energies on the given windows.
    pub fn zero(windows: &WindowPair) -> Self {
        let z = |w: &FrequencyWindow| SigmaComponent {
            window: w.clone(),
            retarded: vec![C64::new(0.0, 0.0); w.len()],
            keldysh: vec![C64::new(0.0, 0.0); w.len()],
        };
        SelfEnergySet { minus: z(&windows.minus), plus: z(&windows.plus) }
    }
}

/// The two polariton windows, on a common lattice.
#[derive(Clone, Debug)]
pub struct WindowPair {
    pub minus: FrequencyWindow,
    pub plus: FrequencyWindow,
}

impl WindowPair {
    /// Default windows: half-width `40(κ-+κ+)` around each polariton, grid
    /// spacing a twentieth of the narrowest expected linewidth.
    pub fn auto(basis: &PolaritonBasis, diss: &LinearDissipation, g_tilde: f64) -> Result<Self> {
        Self::with_options(basis, diss, g_tilde, 40.0, 20.0)
    }

    pub fn with_options(
        basis: &PolaritonBasis,
        diss: &LinearDissipation,
        g_tilde: f64,
        half_width_in_linewidths: f64,
        points_per_linewidth: f64,
    ) -> Result<Self> {
        let (km, kp) = (diss.kappa[0], diss.kappa[1]);
        let (cm, cp) = cooperativities(diss, g_tilde);
        let mut narrowest = km.min(kp);
        // widths of the interaction-bath Lorentzians in the distribution
        let gp = km * (1.0 + cp).sqrt();
        narrowest = narrowest.min(gp);
        if cm > -1.0 {
            // floor keeps the point count finite as C- approaches -1
            let gm = ((km + kp) / 2.0 * (1.0 + cm).sqrt()).max((km + kp) / 40.0);
            narrowest = narrowest.min(gm);
        }
        let step = narrowest / points_per_linewidth;
        let half = half_width_in_linewidths * (km + kp);
        Ok(WindowPair {
            minus: FrequencyWindow::new(basis.energy_minus(), half, step)?,
            plus: FrequencyWindow::new(basis.energy_plus(), half, step)?,
        })
    }
}

/// Bare (linear-theory) Green functions on the windows.
pub fn bare_green(
    basis: &PolaritonBasis,
    diss: &LinearDissipation,
    windows: &WindowPair,
) -> GreenFunctionSet {
    let anchor = |p: Polariton| TailAnchor {
        energy: basis.energy(p),
        damping: diss.kappa[p.idx()],
        occupancy: diss.occupancy[p.idx()],
    };
    let component = |p: Polariton, w: &FrequencyWindow| {
        let a = anchor(p);
        GreenComponent {
            window: w.clone(),
            retarded: w.sample(|x| a.retarded(x)),
            keldysh: w.sample(|x| a.keldysh(x)),
        }
    };
    GreenFunctionSet {
        minus: component(Polariton::Minus, &windows.minus),
        plus: component(Polariton::Plus, &windows.plus),
        anchors: [anchor(Polariton::Minus), anchor(Polariton::Plus)],
        near_pole: [false, false],
    }
}

/// Effective cooperativities of the resonant interaction.
pub fn cooperativities(diss: &LinearDissipation, g_tilde: f64) -> (f64, f64) {
    let (km, kp) = (diss.kappa[0], diss.kappa[1]);
    let (n0m, n0p) = (diss.occupancy[0], diss.occupancy[1]);
    let g2 = g_tilde * g_tilde;
    let cm = 16.0 * g2 * (n0m - n0p) / (km * (km + kp));
    let cp = 4.0 * g2 * (2.0 * n0m + 1.0) / (km * kp);
    (cm, cp)
}

/// Closed-form leading-order model: Lorentzian self-energies and the
/// two-bath distribution, evaluable at any frequency (used for sampled
/// self-energies, off-window tails and the anomalous spectrum terms).
#[derive(Clone, Copy, Debug)]
pub struct LeadingOrder {
    pub e_minus: f64,
    pub e_plus: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub n0_minus: f64,
    pub n0_plus: f64,
    pub g_tilde: f64,
}

impl LeadingOrder {
    pub fn new(basis: &PolaritonBasis, diss: &LinearDissipation, g_tilde: f64) -> Self {
        LeadingOrder {
            e_minus: basis.energy_minus(),
            e_plus: basis.energy_plus(),
            kappa_minus: diss.kappa[0],
            kappa_plus: diss.kappa[1],
            n0_minus: diss.occupancy[0],
            n0_plus: diss.occupancy[1],
            g_tilde,
        }
    }

    fn kappa(&self, p: Polariton) -> f64 {
        match p {
            Polariton::Minus => self.kappa_minus,
            Polariton::Plus => self.kappa_plus,
        }
    }

    fn energy(&self, p: Polariton) -> f64 {
        match p {
            Polariton::Minus => self.e_minus,
            Polariton::Plus => self.e_plus,
        }
    }

    fn n0(&self, p: Polariton) -> f64 {
        match p {
            Polariton::Minus => self.n0_minus,
            Polariton::Plus => self.n0_plus,
        }
    }

    /// Retarded self-energy, single Lorentzian per branch.
    pub fn sigma_r(&self, p: Polariton, w: f64) -> C64 {
        let g2 = self.g_tilde * self.g_tilde;
        match p {
            Polariton::Minus => {
                let width = (self.kappa_minus + self.kappa_plus) / 2.0;
                4.0 * g2 * (self.n0_minus - self.n0_plus)
                    / C64::new(w - (self.e_plus - self.e_minus), width)
            }
            Polariton::Plus => {
                2.0 * g2 * (2.0 * self.n0_minus + 1.0)
                    / C64::new(w - 2.0 * self.e_minus, self.kappa_minus)
            }
        }
    }

    /// Keldysh self-energy from the finite product form (regular even where
    /// `n̄int-` diverges at `n̄0- = n̄0+`).
    pub fn sigma_k(&self, p: Polariton, w: f64) -> C64 {
        let g2 = self.g_tilde * self.g_tilde;
        let (fm, fp) = (2.0 * self.n0_minus + 1.0, 2.0 * self.n0_plus + 1.0);
        match p {
            Polariton::Minus => {
                let gam = self.kappa_minus + self.kappa_plus;
                let q = gam / ((w - (self.e_plus - self.e_minus)).powi(2) + gam * gam / 4.0);
                -2.0 * I * g2 * (fp * fm - 1.0) * q
            }
            Polariton::Plus => {
                let q = 2.0 * self.kappa_minus
                    / ((w - 2.0 * self.e_minus).powi(2) + self.kappa_minus.powi(2));
                -I * g2 * (fm * fm + 1.0) * q
            }
        }
    }

    /// Interaction damping `Γint[ω] = -2 Im Σᴿ[ω]`.
    pub fn gamma_int(&self, p: Polariton, w: f64) -> f64 {
        -2.0 * self.sigma_r(p, w).im
    }

    /// Cooperativities per the resonance-point definition.
    pub fn cooperativities(&self) -> (f64, f64) {
        let cm = self.gamma_int(Polariton::Minus, self.e_plus - self.e_minus) / self.kappa_minus;
        let cp = self.gamma_int(Polariton::Plus, 2.0 * self.e_minus) / self.kappa_plus;
        (cm, cp)
    }

    /// Frequency-independent interaction-bath occupancies; `n̄int-`
    /// diverges when `n̄0- = n̄0+` (returned as ±∞, flagged by the caller).
    pub fn n_int(&self) -> (f64, f64) {
        let (n0m, n0p) = (self.n0_minus, self.n0_plus);
        let nint_p = n0m * n0m / (2.0 * n0m + 1.0);
        let d = n0m - n0p;
        let nint_m = if d == 0.0 { f64::INFINITY } else { n0p * (n0m + 1.0) / d };
        (nint_m, nint_p)
    }

    /// Two-bath distribution function at leading order (finite-product
    /// route, valid for any sign and any `n̄int`).
    pub fn n_eff(&self, p: Polariton, w: f64) -> f64 {
        let gamma = self.gamma_int(p, w);
        let s_int = -self.sigma_k(p, w).im; // (2n̄int+1)Γint, finite
        let k = self.kappa(p);
        (k * self.n0(p) + (s_int - gamma) / 2.0) / (k + gamma)
    }

    /// Dressed Green functions with the leading self-energy, any frequency.
    pub fn dressed(&self, p: Polariton, w: f64) -> (C64, C64) {
        let gr = 1.0 / (C64::new(w - self.energy(p), self.kappa(p) / 2.0) - self.sigma_r(p, w));
        let sk_bath = -I * self.kappa(p) * (2.0 * self.n0(p) + 1.0);
        let gk = gr * (self.sigma_k(p, w) + sk_bath) * gr.conj();
        (gr, gk)
    }
}

/// Leading-order self-energies sampled on the windows.
pub fn leading_self_energy(
    basis: &PolaritonBasis,
    diss: &LinearDissipation,
    g_tilde: f64,
    windows: &WindowPair,
) -> SelfEnergySet {
    let lo = LeadingOrder::new(basis, diss, g_tilde);
    let build = |p: Polariton, w: &FrequencyWindow| SigmaComponent {
        window: w.clone(),
        retarded: w.sample(|x| lo.sigma_r(p, x)),
        keldysh: w.sample(|x| lo.sigma_k(p, x)),
    };
    SelfEnergySet {
        minus: build(Polariton::Minus, &windows.minus),
        plus: build(Polariton::Plus, &windows.plus),
    }
}

/// Extend a component onto the doubled window, filling the off-window part
/// with the bare-anchor tails.
fn extend_component(c: &GreenComponent, a: &TailAnchor) -> (FrequencyWindow, Vec<C64>, Vec<C64>) {
    let ext = c.window.extended();
    let mut gr = ext.sample(|x| a.retarded(x));
    let mut gk = ext.sample(|x| a.keldysh(x));
    let off = ext.offset_of(&c.window).expect("extension contains original");
    gr[off..off + c.window.len()].copy_from_slice(&c.retarded);
    gk[off..off + c.window.len()].copy_from_slice(&c.keldysh);
    (ext, gr, gk)
}

/// Second-order (bubble) self-energies from dressed propagators.
///
/// On bare input this reproduces the leading-order closed forms pointwise;
/// inside the self-consistent loop the same convolutions define the
/// dressed-propagator resummation.
pub fn bubble_self_energy(g: &GreenFunctionSet, g_tilde: f64) -> Result<SelfEnergySet> {
    let mut eng = ConvolutionEngine::new();
    bubble_self_energy_with(&mut eng, g, g_tilde)
}

pub(crate) fn bubble_self_energy_with(
    eng: &mut ConvolutionEngine,
    g: &GreenFunctionSet,
    g_tilde: f64,
) -> Result<SelfEnergySet> {
    let g2 = C64::new(g_tilde * g_tilde, 0.0);
    let (wm_ext, gr_m, gk_m) = extend_component(&g.minus, &g.anchors[0]);
    let (wp_ext, gr_p, gk_p) = extend_component(&g.plus, &g.anchors[1]);
    let ga_m: Vec<C64> = gr_m.iter().map(|x| C64::new(0.0, 2.0 * x.im)).collect(); // Gᴿ-Gᴬ
    let ga_p: Vec<C64> = gr_p.iter().map(|x| C64::new(0.0, 2.0 * x.im)).collect();
    let adv_m: Vec<C64> = gr_m.iter().map(|x| x.conj()).collect();

    // Σᴿ+ = 2i g̃² ∫ Gᴷ-[ν] Gᴿ-[ω-ν]
    let conv_rp = eng.convolve(
        Sampled { window: &wm_ext, values: &gk_m },
        Sampled { window: &wm_ext, values: &gr_m },
    );
    // Σᴷ+ = i g̃² ∫ {Gᴷ-Gᴷ- + (Gᴿ-Gᴬ)-(Gᴿ-Gᴬ)-}
    let conv_kp1 = eng.convolve(
        Sampled { window: &wm_ext, values: &gk_m },
        Sampled { window: &wm_ext, values: &gk_m },
    );
    let conv_kp2 = eng.convolve(
        Sampled { window: &wm_ext, values: &ga_m },
        Sampled { window: &wm_ext, values: &ga_m },
    );
    // Σᴿ- = 2i g̃² ∫ {Gᴿ+[ν]Gᴷ-[ν-ω] + Gᴷ+[ν]Gᴬ-[ν-ω]}
    let corr_rm1 = eng.correlate(
        Sampled { window: &wp_ext, values: &gr_p },
        Sampled { window: &wm_ext, values: &gk_m },
    );
    let corr_rm2 = eng.correlate(
        Sampled { window: &wp_ext, values: &gk_p },
        Sampled { window: &wm_ext, values: &adv_m },
    );
    // Σᴷ- = 2i g̃² ∫ {Gᴷ+[ν]Gᴷ-[ν-ω] - (Gᴿ-Gᴬ)+[ν](Gᴿ-Gᴬ)-[ν-ω]}
    let corr_km1 = eng.correlate(
        Sampled { window: &wp_ext, values: &gk_p },
        Sampled { window: &wm_ext, values: &gk_m },
    );
    let corr_km2 = eng.correlate(
        Sampled { window: &wp_ext, values: &ga_p },
        Sampled { window: &wm_ext, values: &ga_m },
    );

    let combine = |a: &LatticeValues,
                   b: Option<(&LatticeValues, f64)>,
                   pref: C64,
                   target: &FrequencyWindow|
     -> Result<Vec<C64>> {
        let mut out = a.onto(target)?;
        if let Some((other, sign)) = b {
            let oth = other.onto(target)?;
            for (x, y) in out.iter_mut().zip(oth) {
                *x += sign * y;
            }
        }
        for x in out.iter_mut() {
            *x *= pref;
        }
        Ok(out)
    };

    let sr_p = combine(&conv_rp, None, 2.0 * I * g2, &g.plus.window)?;
    let mut sk_p = combine(&conv_kp1, Some((&conv_kp2, 1.0)), I * g2, &g.plus.window)?;
    let sr_m = combine(&corr_rm1, Some((&corr_rm2, 1.0)), 2.0 * I * g2, &g.minus.window)?;
    let mut sk_m = combine(&corr_km1, Some((&corr_km2, -1.0)), 2.0 * I * g2, &g.minus.window)?;
    // the stationary Keldysh component is purely imaginary; project out the
    // transform roundoff so the symmetry survives the iteration
    for v in sk_p.iter_mut().chain(sk_m.iter_mut()) {
        *v = C64::new(0.0, v.im);
    }

    Ok(SelfEnergySet {
        minus: SigmaComponent { window: g.minus.window.clone(), retarded: sr_m, keldysh: sk_m },
        plus: SigmaComponent { window: g.plus.window.clone(), retarded: sr_p, keldysh: sk_p },
    })
}

/// Dressed Green functions from the Dyson equation.
///
/// `Gᴿ = 1/((Gᴿ₀)⁻¹ - Σᴿ)`; the Keldysh block adds the bath contribution
/// `Σᴷbath = Gᴷ₀/|Gᴿ₀|²` (pointwise `-iκσ(2n̄0σ+1)` for the bare forms):
/// `Gᴷ = Gᴿ(Σᴷ + Σᴷbath)Gᴬ`.
pub fn dyson_solve(bare: &GreenFunctionSet, sigma: &SelfEnergySet) -> Result<GreenFunctionSet> {
    let solve = |b: &GreenComponent, s: &SigmaComponent| -> Result<(GreenComponent, bool)> {
        if b.window != s.window {
            return Err(Error::Window("self-energy window does not match Green window".into()));
        }
        let n = b.window.len();
        let mut retarded = Vec::with_capacity(n);
        let mut keldysh = Vec::with_capacity(n);
        let mut min_denom = f64::MAX;
        for i in 0..n {
            let denom = 1.0 / b.retarded[i] - s.retarded[i];
            if denom.norm() < 1e-12 {
                return Err(Error::PoleOnGrid {
                    omega: b.window.omega(i),
                    magnitude: denom.norm(),
                });
            }
            min_denom = min_denom.min(denom.norm());
            let gr = 1.0 / denom;
            let sk_bath = b.keldysh[i] / (b.retarded[i] * b.retarded[i].conj());
            let gk = gr * (s.keldysh[i] + sk_bath) * gr.conj();
            if !gr.re.is_finite() || !gr.im.is_finite() || !gk.im.is_finite() {
                return Err(Error::NumericalBreakdown(format!(
                    "non-finite Green function at omega = {}",
                    b.window.omega(i)
                )));
            }
            retarded.push(gr);
            keldysh.push(gk);
        }
        let near_pole = min_denom < 10.0 * b.window.step();
        Ok((GreenComponent { window: b.window.clone(), retarded, keldysh }, near_pole))
    };
    let (minus, pole_m) = solve(&bare.minus, &sigma.minus)?;
    let (plus, pole_p) = solve(&bare.plus, &sigma.plus)?;
    Ok(GreenFunctionSet { minus, plus, anchors: bare.anchors, near_pole: [pole_m, pole_p] })
}

/// Iteration controls for [`self_consistent_solve`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Maximum plain-iteration steps.
    pub n_iter: usize,
    /// Linear mixing toward the new iterate (1.0 = plain iteration).
    pub mixing: f64,
    /// Convergence threshold on the sup-norm delta relative to each array's
    /// peak magnitude.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { n_iter: 20, mixing: 1.0, tol: 1e-8 }
    }
}

/// Per-iteration convergence data. Non-convergence is reported, not raised.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub deltas: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub tol: f64,
}

fn sup_delta(a: &[C64], b: &[C64]) -> f64 {
    let mut peak = 0.0f64;
    let mut diff = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        peak = peak.max(x.norm());
        diff = diff.max((x - y).norm());
    }
    if peak > 0.0 {
        diff / peak
    } else {
        diff
    }
}

fn mix_into(old: &mut GreenComponent, new: &GreenComponent, mixing: f64) {
    if mixing >= 1.0 {
        old.retarded.copy_from_slice(&new.retarded);
        old.keldysh.copy_from_slice(&new.keldysh);
    } else {
        for (o, n) in old.retarded.iter_mut().zip(&new.retarded) {
            *o = (1.0 - mixing) * *o + mixing * n;
        }
        for (o, n) in old.keldysh.iter_mut().zip(&new.keldysh) {
            *o = (1.0 - mixing) * *o + mixing * n;
        }
    }
}

/// Fixed point of `G = Dyson(bare, Σ[G])` by plain (optionally mixed)
/// iteration. Returns the final Green functions, the self-energy that
/// produced them and the convergence history.
pub fn self_consistent_solve(
    basis: &PolaritonBasis,
    diss: &LinearDissipation,
    g_tilde: f64,
    windows: &WindowPair,
    opts: SolveOptions,
) -> Result<(GreenFunctionSet, SelfEnergySet, ConvergenceReport)> {
    let bare = bare_green(basis, diss, windows);
    let mut eng = ConvolutionEngine::new();
    let mut g = bare.clone();
    let mut deltas = Vec::with_capacity(opts.n_iter);
    let mut sigma = SelfEnergySet::zero(windows);
    let mut converged = false;
    for _ in 0..opts.n_iter {
        sigma = bubble_self_energy_with(&mut eng, &g, g_tilde)?;
        let g_new = dyson_solve(&bare, &sigma)?;
        let delta = sup_delta(&g_new.minus.retarded, &g.minus.retarded)
            .max(sup_delta(&g_new.minus.keldysh, &g.minus.keldysh))
            .max(sup_delta(&g_new.plus.retarded, &g.plus.retarded))
            .max(sup_delta(&g_new.plus.keldysh, &g.plus.keldysh));
        if !delta.is_finite() {
            return Err(Error::NumericalBreakdown(format!(
                "non-finite iterate after {} iterations",
                deltas.len()
            )));
        }
        deltas.push(delta);
        mix_into(&mut g.minus, &g_new.minus, opts.mixing);
        mix_into(&mut g.plus, &g_new.plus, opts.mixing);
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    let iterations = deltas.len();
    Ok((g, sigma, ConvergenceReport { deltas, converged, iterations, tol: opts.tol }))
}

/// Polariton spectral densities `ρσ[ω] = -Im Gᴿσ[ω]/π`.
pub fn polariton_dos(g: &GreenFunctionSet) -> (Vec<f64>, Vec<f64>) {
    (g.minus.dos(), g.plus.dos())
}

/// An extracted distribution function with its validity mask.
#[derive(Clone, Debug)]
pub struct Distribution {
    pub values: Vec<f64>,
    /// `true` where the extraction is valid (`|Im Gᴿ|` above floor).
    pub mask: Vec<bool>,
    pub masked_count: usize,
}

impl Distribution {
    /// Value at the grid point nearest `omega` inside `window`.
    pub fn at(&self, window: &FrequencyWindow, omega: f64) -> Option<f64> {
        let i = window.index_near(omega)?;
        self.mask[i].then_some(self.values[i])
    }
}

/// Energy distribution `n̄eff[ω] = (Im Gᴷ/(2 Im Gᴿ) - 1)/2`, masked where
/// the spectral weight is too small to divide by.
pub fn distribution_function(g: &GreenFunctionSet) -> (Distribution, Distribution) {
    let extract = |c: &GreenComponent| {
        let floor = 1e-12 * c.retarded.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
        let mut values = Vec::with_capacity(c.retarded.len());
        let mut mask = Vec::with_capacity(c.retarded.len());
        let mut masked = 0usize;
        for (r, k) in c.retarded.iter().zip(&c.keldysh) {
            if r.im.abs() <= floor {
                values.push(f64::NAN);
                mask.push(false);
                masked += 1;
            } else {
                values.push((k.im / (2.0 * r.im) - 1.0) / 2.0);
                mask.push(true);
            }
        }
        Distribution { values, mask, masked_count: masked }
    };
    (extract(&g.minus), extract(&g.plus))
}

/// Parametric-instability analysis of the `-` polariton.
#[derive(Clone, Copy, Debug)]
pub struct InstabilityReport {
    pub c_minus_eff: f64,
    pub c_plus_eff: f64,
    /// Interaction damping of the `-` polariton is negative (`C-eff < 0`).
    pub negative_damping: bool,
    /// Leading-order instability (`C-eff < -1`).
    pub unstable: bool,
    /// Within 10% of the instability (`-1 ≤ C-eff ≤ -0.9`).
    pub near_threshold: bool,
    /// Pump occupancy `n̄0+` driving the incoherent parametric process.
    pub pump_occupancy: f64,
    /// Threshold `κ-²/(16g̃²)` the pump occupancy is compared against.
    pub threshold_occupancy: f64,
    /// Leading-order `n̄eff-[E-]` from the interaction-bath average.
    pub leading_n_eff_minus: f64,
    /// The same number from the coherently-pumped paramp expression.
    pub paramp_n_minus: f64,
}

/// Build the instability report; instability is a reported state, never an
/// error.
pub fn instability_report(diss: &LinearDissipation, g_tilde: f64) -> InstabilityReport {
    let (cm, cp) = cooperativities(diss, g_tilde);
    let km = diss.kappa[0];
    let n0p = diss.occupancy[1];
    let g2 = g_tilde * g_tilde;
    let threshold = if g2 > 0.0 { km * km / (16.0 * g2) } else { f64::INFINITY };
    // mean - polariton number in the gamma << kappa simplification
    let leading = 16.0 * g2 * n0p / (km * km - 16.0 * g2 * n0p);
    // degenerate-paramp route: |Q|²/(1-|Q|²) with Q = 4i g̃ sqrt(n̄0+)/κ-
    let q = 4.0 * g_tilde * n0p.sqrt() / km;
    let q2 = q * q;
    let paramp = q2 / (1.0 - q2);
    InstabilityReport {
        c_minus_eff: cm,
        c_plus_eff: cp,
        negative_damping: cm < 0.0,
        unstable: cm < -1.0,
        near_threshold: (-1.0..=-0.9).contains(&cm),
        pump_occupancy: n0p,
        threshold_occupancy: threshold,
        leading_n_eff_minus: leading,
        paramp_n_minus: paramp,
    }
}
