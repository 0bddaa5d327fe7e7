//! Brute-force oracle: the truncated two-mode Fock-space master equation
//! for the polaritons, its steady state and quantum-regression emission
//! spectra.
//!
//! The resonant Hamiltonian `E₋n̂₋ + E₊n̂₊ + g̃(c₊†c₋c₋ + h.c.)` conserves
//! the charge `n̂₋ + 2n̂₊`, and the dissipators conserve the ket-bra charge
//! difference, so the Liouvillian is block diagonal: the steady state lives
//! in the zero-difference block and the cavity correlators in the blocks at
//! difference ±1 (for `c₋`) and ±2 (for `c₊`). Block dimensions stay in the
//! hundreds where the naive superoperator would have tens of thousands of
//! rows. The full nonlinear Hamiltonian breaks the symmetry; that mode runs
//! on the whole space under a dimension cap.

use crate::error::{Error, Result};
use crate::keldysh::LeadingOrder;
use crate::linalg::{hermitian_eigenvalues, hessenberg, null_vector, vec_norm, CMatrix, Hessenberg};
use crate::model::{LinearDissipation, Polariton, PolaritonBasis, SystemParams};
use crate::C64;
use rayon::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

/// Which coherent Hamiltonian the oracle evolves under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// `Σσ Eσ n̂σ + g̃(c₊†c₋c₋ + h.c.)` — the resonant interaction only.
    Resonant,
    /// Every cubic term of the polariton-basis nonlinear Hamiltonian.
    /// The normal-ordering linear terms are excluded unless requested.
    Full { include_linear: bool },
}

/// Build options for the Liouvillian.
#[derive(Clone, Copy, Debug)]
pub struct LiouvillianOptions {
    pub n_minus: usize,
    pub n_plus: usize,
    pub hamiltonian: HamiltonianKind,
    /// Cap on the dense block dimension handed to the solver.
    pub dim_cap: usize,
}

impl Default for LiouvillianOptions {
    fn default() -> Self {
        LiouvillianOptions {
            n_minus: 12,
            n_plus: 12,
            hamiltonian: HamiltonianKind::Resonant,
            dim_cap: 4096,
        }
    }
}

/// Sparse operator on the two-mode Fock space; entries `(row, col, amp)`.
#[derive(Clone, Debug)]
struct SpOp {
    triples: Vec<(usize, usize, C64)>,
}

impl SpOp {
    fn from_dense(m: &CMatrix, tol: f64) -> SpOp {
        let mut triples = Vec::new();
        for i in 0..m.n {
            for j in 0..m.n {
                let v = m.at(i, j);
                if v.norm() > tol {
                    triples.push((i, j, v));
                }
            }
        }
        SpOp { triples }
    }
}

/// Snapshot of the parameters the model was built from.
#[derive(Clone, Copy, Debug)]
pub struct ModelSnapshot {
    pub energy: [f64; 2],
    pub kappa: [f64; 2],
    pub occupancy: [f64; 2],
    pub g_tilde: f64,
    pub alpha_d: [f64; 2],
    pub alpha_bar_d: [f64; 2],
}

/// Truncated two-mode Liouvillian.
pub struct LiouvillianModel {
    pub n_minus: usize,
    pub n_plus: usize,
    pub kind: HamiltonianKind,
    pub snapshot: ModelSnapshot,
    dim: usize,
    hamiltonian: SpOp,
    h_by_col: Vec<Vec<(usize, C64)>>,
    h_by_row: Vec<Vec<(usize, C64)>>,
    lower: [SpOp; 2],
    raise: [SpOp; 2],
    /// per-state jump targets `s -> (s∓e, √amp)` of each mode
    lower_to: [Vec<Option<(usize, f64)>>; 2],
    raise_to: [Vec<Option<(usize, f64)>>; 2],
    /// diagonal of X†X for the lowering (0) and raising (1) jump of each mode
    num_lower: [Vec<f64>; 2],
    num_raise: [Vec<f64>; 2],
    charge_conserving: bool,
    dim_cap: usize,
}

impl LiouvillianModel {
    #[inline]
    fn state(&self, nm: usize, np_: usize) -> usize {
        nm * self.n_plus + np_
    }

    #[inline]
    fn decode(&self, s: usize) -> (usize, usize) {
        (s / self.n_plus, s % self.n_plus)
    }

    #[inline]
    fn charge(&self, s: usize) -> i64 {
        let (nm, np_) = self.decode(s);
        nm as i64 + 2 * np_ as i64
    }

    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    /// Pairs `(ket, bra)` with the given ket-bra charge difference; the
    /// whole space when the Hamiltonian is not charge conserving.
    fn block_pairs(&self, k: i64) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for a in 0..self.dim {
            for b in 0..self.dim {
                if !self.charge_conserving || self.charge(a) - self.charge(b) == k {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Dense superoperator matrix restricted to the pair list.
    fn assemble(&self, pairs: &[(usize, usize)]) -> CMatrix {
        let mut index = vec![usize::MAX; self.dim * self.dim];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            index[a * self.dim + b] = i;
        }
        let lookup = |a: usize, b: usize| -> Option<usize> {
            let i = index[a * self.dim + b];
            (i != usize::MAX).then_some(i)
        };
        let mut l = CMatrix::zeros(pairs.len());
        for (j, &(a, b)) in pairs.iter().enumerate() {
            // -i H ρ : H entries with column a feed (r, b)
            for &(r, amp) in &self.h_by_col[a] {
                if let Some(i) = lookup(r, b) {
                    *l.at_mut(i, j) += -I * amp;
                }
            }
            // +i ρ H : H entries with row b feed (a, c)
            for &(c, amp) in &self.h_by_row[b] {
                if let Some(i) = lookup(a, c) {
                    *l.at_mut(i, j) += I * amp;
                }
            }
            for m in 0..2 {
                let (kap, n0) = (self.snapshot.kappa[m], self.snapshot.occupancy[m]);
                let rate_down = kap / 2.0 * (n0 + 1.0);
                let rate_up = kap / 2.0 * n0;
                // 2 X ρ X† (each ladder column has at most one entry)
                if let (Some((ta, amp_a)), Some((tb, amp_b))) =
                    (self.lower_to[m][a], self.lower_to[m][b])
                {
                    if let Some(i) = lookup(ta, tb) {
                        *l.at_mut(i, j) += C64::new(2.0 * rate_down * amp_a * amp_b, 0.0);
                    }
                }
                if let (Some((ta, amp_a)), Some((tb, amp_b))) =
                    (self.raise_to[m][a], self.raise_to[m][b])
                {
                    if let Some(i) = lookup(ta, tb) {
                        *l.at_mut(i, j) += C64::new(2.0 * rate_up * amp_a * amp_b, 0.0);
                    }
                }
                // -{X†X, ρ} pieces are diagonal in the Fock basis
                let anti = rate_down * (self.num_lower[m][a] + self.num_lower[m][b])
                    + rate_up * (self.num_raise[m][a] + self.num_raise[m][b]);
                *l.at_mut(j, j) -= C64::new(anti, 0.0);
            }
        }
        l
    }

    /// Apply the Liouvillian to a dense operator (trace/Hermiticity checks).
    pub fn apply_dense(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        let sp_mul_left = |op: &SpOp, m: &CMatrix, sign: C64, out: &mut CMatrix| {
            for &(r, c, amp) in &op.triples {
                for j in 0..d {
                    let v = sign * amp * m.at(c, j);
                    *out.at_mut(r, j) += v;
                }
            }
        };
        // -i[H, ρ]
        sp_mul_left(&self.hamiltonian, rho, -I, &mut out);
        for &(r, c, amp) in &self.hamiltonian.triples {
            // +i ρH : out[i][c] += i ρ[i][r] amp
            for i in 0..d {
                let v = I * rho.at(i, r) * amp;
                *out.at_mut(i, c) += v;
            }
        }
        for m in 0..2 {
            let (kap, n0) = (self.snapshot.kappa[m], self.snapshot.occupancy[m]);
            for (op, rate, num) in [
                (&self.lower[m], kap / 2.0 * (n0 + 1.0), &self.num_lower[m]),
                (&self.raise[m], kap / 2.0 * n0, &self.num_raise[m]),
            ] {
                // 2XρX†
                for &(r, c, amp) in &op.triples {
                    for &(r2, c2, amp2) in &op.triples {
                        let v = 2.0 * rate * amp * amp2.conj() * rho.at(c, c2);
                        *out.at_mut(r, r2) += v;
                    }
                }
                // -{X†X, ρ}
                for i in 0..d {
                    for j in 0..d {
                        let v = rate * (num[i] + num[j]) * rho.at(i, j);
                        *out.at_mut(i, j) -= v;
                    }
                }
            }
        }
        out
    }
}

/// Assemble the Liouvillian for the polariton master equation.
pub fn build_liouvillian(
    params: &SystemParams,
    basis: &PolaritonBasis,
    diss: &LinearDissipation,
    options: &LiouvillianOptions,
) -> Result<LiouvillianModel> {
    let (nm, np_) = (options.n_minus, options.n_plus);
    if nm < 2 || np_ < 2 {
        return Err(Error::Truncation("need at least two Fock levels per mode".into()));
    }
    let dim = nm * np_;

    // predicted occupancies against the truncation
    let lo = LeadingOrder::new(basis, diss, basis.g_tilde());
    for p in Polariton::BOTH {
        let n_cap = if p == Polariton::Minus { nm } else { np_ };
        let mut predicted = diss.occupancy[p.idx()];
        let n_eff = lo.n_eff(p, basis.energy(p));
        if n_eff.is_finite() && n_eff > 0.0 {
            predicted = predicted.max(n_eff);
        }
        if predicted > n_cap as f64 / 5.0 {
            return Err(Error::Truncation(format!(
                "predicted occupancy {predicted:.2} of the {p:?} polariton exceeds N/5 = {}",
                n_cap as f64 / 5.0
            )));
        }
    }

    let state = |nmi: usize, npi: usize| nmi * np_ + npi;
    // ladder operators of the two modes
    let mut lower_m = Vec::new();
    let mut raise_m = Vec::new();
    let mut lower_p = Vec::new();
    let mut raise_p = Vec::new();
    let mut num_lower = [vec![0.0; dim], vec![0.0; dim]];
    let mut num_raise = [vec![0.0; dim], vec![0.0; dim]];
    for a in 0..nm {
        for b in 0..np_ {
            let s = state(a, b);
            if a >= 1 {
                lower_m.push((state(a - 1, b), s, C64::new((a as f64).sqrt(), 0.0)));
                num_lower[0][s] = a as f64;
            }
            if a + 1 < nm {
                raise_m.push((state(a + 1, b), s, C64::new((a as f64 + 1.0).sqrt(), 0.0)));
                num_raise[0][s] = a as f64 + 1.0;
            }
            if b >= 1 {
                lower_p.push((state(a, b - 1), s, C64::new((b as f64).sqrt(), 0.0)));
                num_lower[1][s] = b as f64;
            }
            if b + 1 < np_ {
                raise_p.push((state(a, b + 1), s, C64::new((b as f64 + 1.0).sqrt(), 0.0)));
                num_raise[1][s] = b as f64 + 1.0;
            }
        }
    }

    let g_tilde = basis.g_tilde();
    let hamiltonian = match options.hamiltonian {
        HamiltonianKind::Resonant => {
            let mut h = Vec::new();
            for a in 0..nm {
                for b in 0..np_ {
                    let s = state(a, b);
                    let diag = basis.energy_minus() * a as f64 + basis.energy_plus() * b as f64;
                    h.push((s, s, C64::new(diag, 0.0)));
                    // g̃ c₊†c₋c₋ : |a,b> -> sqrt(a(a-1)(b+1)) |a-2,b+1>
                    if a >= 2 && b + 1 < np_ {
                        let amp = g_tilde * ((a * (a - 1)) as f64 * (b as f64 + 1.0)).sqrt();
                        h.push((state(a - 2, b + 1), s, C64::new(amp, 0.0)));
                        h.push((s, state(a - 2, b + 1), C64::new(amp, 0.0)));
                    }
                }
            }
            // deduplicate the h.c. double push
            let mut seen = std::collections::HashMap::new();
            for (r, c, v) in h {
                *seen.entry((r, c)).or_insert(C64::new(0.0, 0.0)) = v;
            }
            let triples = seen.into_iter().map(|((r, c), v)| (r, c, v)).collect();
            SpOp { triples }
        }
        HamiltonianKind::Full { include_linear } => {
            // dense operator algebra: H_NL = g d†d (b + b†) in polariton ops
            let dense_of = |triples: &[(usize, usize, C64)]| {
                let mut m = CMatrix::zeros(dim);
                for &(r, c, v) in triples {
                    *m.at_mut(r, c) += v;
                }
                m
            };
            let cm = dense_of(&lower_m);
            let cp = dense_of(&lower_p);
            let cmd = cm.dagger();
            let cpd = cp.dagger();
            let comb = |a_m: f64, a_p: f64, ab_m: f64, ab_p: f64| {
                let mut m = CMatrix::zeros(dim);
                for i in 0..dim * dim {
                    m.data[i] = a_m * cm.data[i]
                        + a_p * cp.data[i]
                        + ab_m * cmd.data[i]
                        + ab_p * cpd.data[i];
                }
                m
            };
            let c_m = basis.coeffs(Polariton::Minus);
            let c_p = basis.coeffs(Polariton::Plus);
            let b_op = comb(c_m.alpha_b, c_p.alpha_b, c_m.alpha_bar_b, c_p.alpha_bar_b);
            let d_op = comb(c_m.alpha_d, c_p.alpha_d, c_m.alpha_bar_d, c_p.alpha_bar_d);
            let x = {
                let bd = b_op.dagger();
                let mut t = CMatrix::zeros(dim);
                for i in 0..dim * dim {
                    t.data[i] = b_op.data[i] + bd.data[i];
                }
                t
            };
            let mut h_nl = d_op.dagger().matmul(&d_op).matmul(&x);
            for v in h_nl.data.iter_mut() {
                *v *= params.single_photon_coupling;
            }
            // d†d and (b+b†) commute exactly but not in the truncated space;
            // hermitize to keep the top-layer artifact from breaking L
            let h_dag = h_nl.dagger();
            for i in 0..dim * dim {
                h_nl.data[i] = (h_nl.data[i] + h_dag.data[i]) / 2.0;
            }
            if !include_linear {
                let nl = basis.nonlinear;
                for (coef, op, opd) in
                    [(nl.a_minus, &cm, &cmd), (nl.a_plus, &cp, &cpd)]
                {
                    for i in 0..dim * dim {
                        h_nl.data[i] -= coef * (op.data[i] + opd.data[i]);
                    }
                }
            }
            for a in 0..nm {
                for b in 0..np_ {
                    let s = state(a, b);
                    *h_nl.at_mut(s, s) +=
                        basis.energy_minus() * a as f64 + basis.energy_plus() * b as f64;
                }
            }
            SpOp::from_dense(&h_nl, 1e-14)
        }
    };

    // the symmetry holds whenever H conserves n- + 2n+ (resonant kind, or
    // the full kind when the nonlinearity vanishes)
    let charge_of = |s: usize| (s / np_) as i64 + 2 * (s % np_) as i64;
    let charge_conserving =
        hamiltonian.triples.iter().all(|&(r, c, _)| charge_of(r) == charge_of(c));

    let mut h_by_col = vec![Vec::new(); dim];
    let mut h_by_row = vec![Vec::new(); dim];
    for &(r, c, v) in &hamiltonian.triples {
        h_by_col[c].push((r, v));
        h_by_row[r].push((c, v));
    }
    let to_map = |op: &[(usize, usize, C64)]| {
        let mut m: Vec<Option<(usize, f64)>> = vec![None; dim];
        for &(r, c, v) in op {
            m[c] = Some((r, v.re));
        }
        m
    };
    let lower_to = [to_map(&lower_m), to_map(&lower_p)];
    let raise_to = [to_map(&raise_m), to_map(&raise_p)];

    let model = LiouvillianModel {
        n_minus: nm,
        n_plus: np_,
        kind: options.hamiltonian,
        snapshot: ModelSnapshot {
            energy: [basis.energy_minus(), basis.energy_plus()],
            kappa: diss.kappa,
            occupancy: diss.occupancy,
            g_tilde,
            alpha_d: [basis.coeffs(Polariton::Minus).alpha_d, basis.coeffs(Polariton::Plus).alpha_d],
            alpha_bar_d: [
                basis.coeffs(Polariton::Minus).alpha_bar_d,
                basis.coeffs(Polariton::Plus).alpha_bar_d,
            ],
        },
        dim,
        hamiltonian,
        h_by_col,
        h_by_row,
        lower: [SpOp { triples: lower_m }, SpOp { triples: lower_p }],
        raise: [SpOp { triples: raise_m }, SpOp { triples: raise_p }],
        lower_to,
        raise_to,
        num_lower,
        num_raise,
        charge_conserving,
        dim_cap: options.dim_cap,
    };
    // solver dimension guard: the zero-difference block is the largest
    let max_block =
        if charge_conserving { model.block_pairs(0).len() } else { dim * dim };
    if max_block > model.dim_cap {
        return Err(Error::MemoryBudget { dim: max_block, cap: model.dim_cap });
    }
    Ok(model)
}

/// Steady state of the master equation.
pub struct SteadyState {
    /// Density operator (Hilbert dim × Hilbert dim), trace one.
    pub rho: CMatrix,
    /// `‖Lρ‖ / (‖L‖∞ ‖ρ‖)` on the solved block.
    pub residual: f64,
    /// Population of the top two Fock layers of either mode.
    pub tail_mass: f64,
    /// `⟨c₋†c₋⟩, ⟨c₊†c₊⟩`.
    pub occupancy: [f64; 2],
    /// Whether the truncation-tail criterion (`< 1e-6`) was met.
    pub tail_ok: bool,
}

impl SteadyState {
    /// Eigenvalue floor of the density operator (positivity proxy).
    pub fn eigenvalue_floor(&self) -> f64 {
        let ev = hermitian_eigenvalues(&self.rho);
        ev.first().copied().unwrap_or(0.0)
    }

    /// Cross correlator `⟨c₊c₋⟩` (vanishes for decoupled modes).
    pub fn cross_correlator(&self, model: &LiouvillianModel) -> C64 {
        // Tr[c₊ c₋ ρ]
        let mut acc = C64::new(0.0, 0.0);
        for &(r1, c1, a1) in &model.lower[1].triples {
            for &(r2, c2, a2) in &model.lower[0].triples {
                if c1 == r2 {
                    // (c₊ c₋)_{r1, c2}
                    acc += a1 * a2 * self.rho.at(c2, r1);
                }
            }
        }
        acc
    }
}

/// Solve `Lρ = 0` on the steady-state block by Hessenberg inverse iteration.
pub fn steady_state(model: &LiouvillianModel) -> Result<SteadyState> {
    let pairs = model.block_pairs(0);
    let l = model.assemble(&pairs);
    let hd = hessenberg(&l);
    let (v, residual) = null_vector(&hd, &l, 12)?;
    if residual > 1e-10 {
        return Err(Error::SolverFailure(format!(
            "steady-state residual {residual:.2e} above 1e-10 of the Liouvillian scale"
        )));
    }
    // degenerate-null-space guard: a second start must converge to the same ray
    let (v2, _) = null_vector(&hd, &l, 13)?;
    let overlap: C64 = v.iter().zip(&v2).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() / (vec_norm(&v) * vec_norm(&v2)) < 0.999 {
        return Err(Error::SolverFailure(
            "degenerate Liouvillian null space (model error for a damped system)".into(),
        ));
    }

    // embed, normalize trace, hermitize
    let d = model.hilbert_dim();
    let mut rho = CMatrix::zeros(d);
    for (&(a, b), &val) in pairs.iter().zip(&v) {
        *rho.at_mut(a, b) = val;
    }
    let tr: C64 = (0..d).map(|i| rho.at(i, i)).sum();
    if tr.norm() < 1e-14 {
        return Err(Error::SolverFailure("steady-state candidate has zero trace".into()));
    }
    for x in rho.data.iter_mut() {
        *x /= tr;
    }
    let rho_h = rho.dagger();
    for i in 0..d * d {
        rho.data[i] = (rho.data[i] + rho_h.data[i]) / 2.0;
    }

    let mut occ = [0.0f64; 2];
    let mut tail = 0.0f64;
    for s in 0..d {
        let (a, b) = model.decode(s);
        let p = rho.at(s, s).re;
        occ[0] += a as f64 * p;
        occ[1] += b as f64 * p;
        if a >= model.n_minus.saturating_sub(2) || b >= model.n_plus.saturating_sub(2) {
            tail += p.abs();
        }
    }
    Ok(SteadyState {
        rho,
        residual,
        tail_mass: tail,
        occupancy: occ,
        tail_ok: tail < 1e-6,
    })
}

/// Emission spectrum on a frequency grid via the quantum regression theorem.
#[derive(Clone, Debug)]
pub struct RegressionSpectrum {
    pub omegas: Vec<f64>,
    pub s_d: Vec<f64>,
    /// Per-frequency solver success.
    pub ok: Vec<bool>,
}

/// `S_d[ω] = 2 Re Tr[d̂ · (-(L+iω))⁻¹ (ρss d̂†)]` with
/// `d̂ = Σσ (α_dσ cσ + ᾱ_dσ cσ†)`.
pub fn regression_spectrum(
    model: &LiouvillianModel,
    ss: &SteadyState,
    grid: &[f64],
) -> Result<RegressionSpectrum> {
    let d = model.hilbert_dim();
    let snap = &model.snapshot;

    struct Channel {
        weight: f64,
        hess: Hessenberg,
        rhs: Vec<C64>,
        trace_pairs: Vec<(usize, f64)>, // (pair index, amplitude)
    }

    let mut channels: Vec<Channel> = Vec::new();
    if model.charge_conserving {
        // per-polariton normal and anomalous channels in their charge blocks
        for (mode, q) in [(0usize, 1i64), (1usize, 2i64)] {
            for (anomalous, k) in [(false, q), (true, -q)] {
                let weight = if anomalous {
                    snap.alpha_bar_d[mode].powi(2)
                } else {
                    snap.alpha_d[mode].powi(2)
                };
                if weight == 0.0 {
                    continue;
                }
                let pairs = model.block_pairs(k);
                if pairs.is_empty() {
                    continue;
                }
                let l = model.assemble(&pairs);
                let mut rhs = vec![C64::new(0.0, 0.0); pairs.len()];
                let mut trace_pairs = Vec::new();
                let e = |s: usize, up: bool| -> Option<(usize, f64)> {
                    let (a, b) = model.decode(s);
                    let (n, cap) =
                        if mode == 0 { (a, model.n_minus) } else { (b, model.n_plus) };
                    if up {
                        (n + 1 < cap).then(|| {
                            let t = if mode == 0 {
                                model.state(a + 1, b)
                            } else {
                                model.state(a, b + 1)
                            };
                            (t, (n as f64 + 1.0).sqrt())
                        })
                    } else {
                        (n >= 1).then(|| {
                            let t = if mode == 0 {
                                model.state(a - 1, b)
                            } else {
                                model.state(a, b - 1)
                            };
                            (t, (n as f64).sqrt())
                        })
                    }
                };
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    if !anomalous {
                        // rhs = ρ c† : (ρc†)_{a,b} = ρ_{a,b+e}·√(n_b+1)
                        if let Some((bp, amp)) = e(b, true) {
                            rhs[i] = ss.rho.at(a, bp) * amp;
                        }
                        // trace: Tr[c X] picks a = b + e with amp √(n_a)
                        if let Some((bp, amp)) = e(b, true) {
                            if bp == a {
                                trace_pairs.push((i, amp));
                            }
                        }
                    } else {
                        // rhs = ρ c : (ρc)_{a,b} = ρ_{a,b-e}·√(n_b)
                        if let Some((bm, amp)) = e(b, false) {
                            rhs[i] = ss.rho.at(a, bm) * amp;
                        }
                        // trace: Tr[c† X] picks b = a + e with amp √(n_b)
                        if let Some((ap, amp)) = e(a, true) {
                            if ap == b {
                                trace_pairs.push((i, amp));
                            }
                        }
                    }
                }
                channels.push(Channel { weight, hess: hessenberg(&l), rhs, trace_pairs });
            }
        }
    } else {
        // full space: one channel with the complete d̂
        let pairs = model.block_pairs(0); // full list when not charge conserving
        let l = model.assemble(&pairs);
        let mut d_op = CMatrix::zeros(d);
        for (m, op) in model.lower.iter().enumerate() {
            for &(r, c, amp) in &op.triples {
                *d_op.at_mut(r, c) += snap.alpha_d[m] * amp;
            }
            for &(r, c, amp) in &model.raise[m].triples {
                *d_op.at_mut(r, c) += snap.alpha_bar_d[m] * amp;
            }
        }
        let d_dag = d_op.dagger();
        let x = ss.rho.matmul(&d_dag);
        let mut rhs = vec![C64::new(0.0, 0.0); pairs.len()];
        let mut trace_pairs = Vec::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            rhs[i] = x.at(a, b);
            let t = d_op.at(b, a);
            if t.norm() > 0.0 {
                trace_pairs.push((i, t.re));
            }
        }
        channels.push(Channel { weight: 1.0, hess: hessenberg(&l), rhs, trace_pairs });
    }

    let results: Vec<(f64, bool)> = grid
        .par_iter()
        .map(|&w| {
            let mut acc = 0.0f64;
            for ch in &channels {
                match ch.hess.solve_shifted(C64::new(0.0, w), &ch.rhs) {
                    Ok(x) => {
                        let mut t = C64::new(0.0, 0.0);
                        for &(i, amp) in &ch.trace_pairs {
                            t += amp * x[i];
                        }
                        // (-(L+iω))⁻¹ = -(L+iω)⁻¹
                        acc += 2.0 * (ch.weight * -t).re;
                    }
                    Err(_) => return (f64::NAN, false),
                }
            }
            if acc.is_finite() {
                (acc, true)
            } else {
                (f64::NAN, false)
            }
        })
        .collect();

    Ok(RegressionSpectrum {
        omegas: grid.to_vec(),
        s_d: results.iter().map(|r| r.0).collect(),
        ok: results.iter().map(|r| r.1).collect(),
    })
}
