//! Scenario execution: drives the solvers over the requested sweeps and
//! emits deterministic CSV tables plus one JSON summary.

use crate::scenario::{DriveCoupling, Scenario, ScenarioKind, Solver};
use omk_core::keldysh::{
    bare_green, cooperativities, distribution_function, dyson_solve, leading_self_energy,
    self_consistent_solve, GreenFunctionSet, LeadingOrder, SelfEnergySet, SolveOptions, WindowPair,
};
use omk_core::lindblad::{build_liouvillian, regression_spectrum, steady_state};
use omk_core::model::{near_2wm_occupancy, Polariton};
use omk_core::spectrum::{cavity_spectrum, integrated_flux, two_phonon_peak};
use omk_core::window::FrequencyWindow;
use omk_core::{Error, Result};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// One CSV cell: finite numbers at 12 significant digits, empty otherwise.
fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::new()
    }
}

fn bool_cell(b: bool) -> String {
    (if b { "true" } else { "false" }).to_string()
}

struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn new(header: Vec<&'static str>) -> Self {
        Csv { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub struct RunArtifacts {
    pub files: Vec<(PathBuf, String)>,
    pub summary: Value,
}

impl RunArtifacts {
    pub fn write(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
        let mut written = Vec::new();
        for (name, content) in &self.files {
            let path = out_dir.join(name);
            std::fs::write(&path, content)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
        }
        let spath = out_dir.join("summary.json");
        let pretty = serde_json::to_string_pretty(&self.summary)
            .map_err(|e| Error::Config(format!("summary serialization: {e}")))?;
        std::fs::write(&spath, pretty + "\n")
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", spath.display())))?;
        written.push(spath);
        Ok(written)
    }
}

/// Per-point soft failure record.
fn soft(idx: usize, at: f64, err: &Error) -> Value {
    json!({ "point": idx, "at": at, "error": err.to_string() })
}

fn window_pair(sc: &Scenario, basis: &omk_core::PolaritonBasis, diss: &omk_core::LinearDissipation, g_tilde: f64) -> Result<WindowPair> {
    WindowPair::with_options(
        basis,
        diss,
        g_tilde,
        sc.window_half_width_linewidths,
        sc.points_per_linewidth,
    )
}

/// Dressed Green functions for the requested solver, with the convergence
/// report when self-consistent.
fn solve_green(
    sc: &Scenario,
    solver: Solver,
    basis: &omk_core::PolaritonBasis,
    diss: &omk_core::LinearDissipation,
    windows: &WindowPair,
) -> Result<(GreenFunctionSet, Option<SelfEnergySet>, Option<Value>)> {
    let g_tilde = basis.g_tilde();
    let pole_diag = |g: &GreenFunctionSet, base: Option<Value>| -> Option<Value> {
        if g.near_pole[0] || g.near_pole[1] {
            let mut v = base.unwrap_or_else(|| json!({}));
            v["near_pole"] = json!({"minus": g.near_pole[0], "plus": g.near_pole[1],
                                     "note": "unstable/unresolved near a Dyson pole"});
            Some(v)
        } else {
            base
        }
    };
    match solver {
        Solver::Linear => Ok((bare_green(basis, diss, windows), None, None)),
        Solver::Leading => {
            let bare = bare_green(basis, diss, windows);
            let sigma = leading_self_energy(basis, diss, g_tilde, windows);
            let g = dyson_solve(&bare, &sigma)?;
            let diag = pole_diag(&g, None);
            Ok((g, Some(sigma), diag))
        }
        Solver::SelfConsistent => {
            let opts = SolveOptions { n_iter: sc.sc_iterations, mixing: sc.sc_mixing, ..Default::default() };
            let (g, sigma, report) = self_consistent_solve(basis, diss, g_tilde, windows, opts)?;
            let diag = json!({
                "converged": report.converged,
                "iterations": report.iterations,
                "final_delta": report.deltas.last().copied().unwrap_or(0.0),
            });
            let diag = pole_diag(&g, Some(diag));
            Ok((g, Some(sigma), diag))
        }
        Solver::Lindblad => Err(Error::Config("lindblad has no Green-function route".into())),
    }
}

pub fn run(sc: &Scenario, scenario_echo: &str) -> Result<RunArtifacts> {
    let mut diagnostics: Vec<Value> = Vec::new();
    let mut files = Vec::new();
    let deltas = sc.delta_over_omega_m.values();

    match sc.kind {
        ScenarioKind::LinearSweep => {
            let mut csv = Csv::new(vec![
                "solver", "delta_over_omega_m", "g_many_over_omega_m", "energy_minus",
                "energy_plus", "kappa_minus", "kappa_plus", "kappa_mech_minus", "kappa_mech_plus",
                "kappa_cav_minus", "kappa_cav_plus", "n0_minus", "n0_plus", "t0_minus", "t0_plus",
                "tcav_minus", "tcav_plus", "g_tilde", "g_a_sum", "a_minus", "alpha_b_minus",
                "alpha_bar_b_minus", "alpha_b_plus", "alpha_bar_b_plus", "alpha_d_minus",
                "alpha_bar_d_minus", "alpha_d_plus", "alpha_bar_d_plus", "near_2wm_occupancy",
            ]);
            for (i, &d) in deltas.iter().enumerate() {
                match sc.system_at(d, sc.drive) {
                    Ok((params, basis, diss)) => {
                        let nl = basis.nonlinear;
                        let cm = basis.coeffs(Polariton::Minus);
                        let cp = basis.coeffs(Polariton::Plus);
                        csv.push(vec![
                            "linear".into(),
                            cell(d),
                            cell(params.many_photon_coupling / sc.omega_m),
                            cell(basis.energy_minus()),
                            cell(basis.energy_plus()),
                            cell(diss.kappa[0]),
                            cell(diss.kappa[1]),
                            cell(diss.kappa_mech[0]),
                            cell(diss.kappa_mech[1]),
                            cell(diss.kappa_cav[0]),
                            cell(diss.kappa_cav[1]),
                            cell(diss.occupancy[0]),
                            cell(diss.occupancy[1]),
                            cell(diss.effective_temperature[0]),
                            cell(diss.effective_temperature[1]),
                            cell(diss.cavity_temperature[0]),
                            cell(diss.cavity_temperature[1]),
                            cell(nl.g_tilde),
                            cell(nl.g_a_sum),
                            cell(nl.a_minus),
                            cell(cm.alpha_b),
                            cell(cm.alpha_bar_b),
                            cell(cp.alpha_b),
                            cell(cp.alpha_bar_b),
                            cell(cm.alpha_d),
                            cell(cm.alpha_bar_d),
                            cell(cp.alpha_d),
                            cell(cp.alpha_bar_d),
                            cell(near_2wm_occupancy(&params)),
                        ]);
                    }
                    Err(e) => {
                        diagnostics.push(soft(i, d, &e));
                        csv.push(vec![String::new(); 29].into_iter().enumerate().map(|(k, s)| {
                            if k == 0 { "linear".into() } else if k == 1 { cell(d) } else { s }
                        }).collect());
                    }
                }
            }
            files.push((PathBuf::from("linear_sweep.csv"), csv.render()));
        }

        ScenarioKind::CooperativitySweep => {
            let mut csv = Csv::new(vec![
                "solver", "delta_over_omega_m", "c_minus_eff", "c_plus_eff", "sc_c_minus_eff",
                "sc_c_plus_eff",
            ]);
            use rayon::prelude::*;
            let results: Vec<_> = deltas
                .par_iter()
                .map(|&d| -> std::result::Result<(f64, f64, f64, f64, Option<Value>), Error> {
                    let (_, basis, diss) = sc.system_at(d, sc.drive)?;
                    let gt = basis.g_tilde();
                    let (cm, cp) = cooperativities(&diss, gt);
                    if sc.solver != Solver::SelfConsistent {
                        return Ok((cm, cp, f64::NAN, f64::NAN, None));
                    }
                    let windows = window_pair(sc, &basis, &diss, gt)?;
                    let (_, sigma, diag) = solve_green(sc, sc.solver, &basis, &diss, &windows)?;
                    let sigma = sigma.expect("self-consistent returns sigma");
                    // dressed cooperativities from the converged self-energy
                    let res_m = basis.energy_plus() - basis.energy_minus();
                    let res_p = 2.0 * basis.energy_minus();
                    let gm = sigma.minus.window.interpolate(&sigma.minus.gamma_int(), res_m);
                    let gp = sigma.plus.window.interpolate(&sigma.plus.gamma_int(), res_p);
                    Ok((cm, cp, gm / diss.kappa[0], gp / diss.kappa[1], diag))
                })
                .collect();
            for (i, r) in results.into_iter().enumerate() {
                let d = deltas[i];
                match r {
                    Ok((cm, cp, scm, scp, diag)) => {
                        if let Some(diag) = diag {
                            diagnostics.push(json!({"point": i, "at": d, "sc": diag}));
                        }
                        csv.push(vec![
                            sc.solver.name().into(),
                            cell(d),
                            cell(cm),
                            cell(cp),
                            cell(scm),
                            cell(scp),
                        ]);
                    }
                    Err(e) => {
                        diagnostics.push(soft(i, d, &e));
                        csv.push(vec![
                            sc.solver.name().into(),
                            cell(d),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                        ]);
                    }
                }
            }
            files.push((PathBuf::from("cooperativity_sweep.csv"), csv.render()));
        }

        ScenarioKind::BathOccupancySweep => {
            let mut csv = Csv::new(vec![
                "solver", "delta_over_omega_m", "n0_minus", "n0_plus", "n_int_minus",
                "n_int_plus", "n_eff_minus", "n_eff_plus",
            ]);
            use rayon::prelude::*;
            let results: Vec<_> = deltas
                .par_iter()
                .map(|&d| -> std::result::Result<([f64; 6], Option<Value>), Error> {
                    let (_, basis, diss) = sc.system_at(d, sc.drive)?;
                    let gt = basis.g_tilde();
                    let lo = LeadingOrder::new(&basis, &diss, gt);
                    let (nim, nip) = lo.n_int();
                    let (nm, npl, diag) = match sc.solver {
                        Solver::Linear => (diss.occupancy[0], diss.occupancy[1], None),
                        Solver::Leading => (
                            lo.n_eff(Polariton::Minus, basis.energy_minus()),
                            lo.n_eff(Polariton::Plus, basis.energy_plus()),
                            None,
                        ),
                        Solver::SelfConsistent => {
                            let windows = window_pair(sc, &basis, &diss, gt)?;
                            let (g, _, diag) = solve_green(sc, sc.solver, &basis, &diss, &windows)?;
                            let (dm, dp) = distribution_function(&g);
                            let nm = dm
                                .at(&g.minus.window, basis.energy_minus())
                                .unwrap_or(f64::NAN);
                            let npl =
                                dp.at(&g.plus.window, basis.energy_plus()).unwrap_or(f64::NAN);
                            (nm, npl, diag)
                        }
                        Solver::Lindblad => {
                            let (params, basis2, diss2) = sc.system_at(d, sc.drive)?;
                            let model =
                                build_liouvillian(&params, &basis2, &diss2, &sc.lindblad_options())?;
                            let ss = steady_state(&model)?;
                            (ss.occupancy[0], ss.occupancy[1], None)
                        }
                    };
                    Ok(([diss.occupancy[0], diss.occupancy[1], nim, nip, nm, npl], diag))
                })
                .collect();
            for (i, r) in results.into_iter().enumerate() {
                let d = deltas[i];
                match r {
                    Ok((vals, diag)) => {
                        if let Some(diag) = diag {
                            diagnostics.push(json!({"point": i, "at": d, "sc": diag}));
                        }
                        let mut row = vec![sc.solver.name().to_string(), cell(d)];
                        row.extend(vals.iter().map(|&v| cell(v)));
                        csv.push(row);
                    }
                    Err(e) => {
                        diagnostics.push(soft(i, d, &e));
                        let mut row = vec![sc.solver.name().to_string(), cell(d)];
                        row.extend(std::iter::repeat_with(String::new).take(6));
                        csv.push(row);
                    }
                }
            }
            files.push((PathBuf::from("bath_occupancy_sweep.csv"), csv.render()));
        }

        ScenarioKind::SpectrumPoint => {
            let d = deltas[0];
            let (params, basis, diss) = sc.system_at(d, sc.drive)?;
            let gt = basis.g_tilde();
            let mut csv = Csv::new(vec![
                "solver", "block", "omega", "s_d", "rho_d", "n_eff_d", "t_eff_d",
            ]);
            if sc.solver == Solver::Lindblad {
                let model = build_liouvillian(&params, &basis, &diss, &sc.lindblad_options())?;
                let ss = steady_state(&model)?;
                diagnostics.push(json!({
                    "lindblad": {
                        "residual": ss.residual,
                        "tail_mass": ss.tail_mass,
                        "occupancy_minus": ss.occupancy[0],
                        "occupancy_plus": ss.occupancy[1],
                    }
                }));
                for (tag, center) in
                    [("minus", basis.energy_minus()), ("plus", basis.energy_plus())]
                {
                    let n = 801usize;
                    let half = sc.band_half_width;
                    let grid: Vec<f64> = (0..n)
                        .map(|k| center - half + 2.0 * half * k as f64 / (n - 1) as f64)
                        .collect();
                    let spec = regression_spectrum(&model, &ss, &grid)?;
                    for (k, &w) in grid.iter().enumerate() {
                        csv.push(vec![
                            "lindblad".into(),
                            tag.into(),
                            cell(w),
                            if spec.ok[k] { cell(spec.s_d[k]) } else { String::new() },
                            String::new(),
                            String::new(),
                            String::new(),
                        ]);
                    }
                }
            } else {
                let windows = window_pair(sc, &basis, &diss, gt)?;
                let (g, _, diag) = solve_green(sc, sc.solver, &basis, &diss, &windows)?;
                if let Some(diag) = diag {
                    diagnostics.push(json!({"sc": diag}));
                }
                let spec = cavity_spectrum(&basis, &diss, &g, gt);
                for (tag, block) in [("minus", &spec.minus), ("plus", &spec.plus)] {
                    for i in 0..block.window.len() {
                        csv.push(vec![
                            sc.solver.name().into(),
                            tag.into(),
                            cell(block.window.omega(i)),
                            cell(block.s_d[i]),
                            cell(block.rho_d[i]),
                            if block.mask[i] { cell(block.n_eff_d[i]) } else { String::new() },
                            if block.mask[i] && !block.t_capped[i] {
                                cell(block.t_eff_d[i])
                            } else {
                                String::new()
                            },
                        ]);
                    }
                }
            }
            files.push((PathBuf::from("spectrum_point.csv"), csv.render()));
        }

        ScenarioKind::FluxVsG => {
            let d = deltas[0];
            let grange = sc.drive_range.expect("validated");
            let gs = grange.values();
            let band = sc.band_half_width;
            // lindblad cross-check indices, evenly spread
            let lb_idx: Vec<usize> = if sc.lindblad_points == 0 {
                vec![]
            } else if sc.lindblad_points >= gs.len() {
                (0..gs.len()).collect()
            } else {
                (0..sc.lindblad_points)
                    .map(|k| k * (gs.len() - 1) / (sc.lindblad_points - 1).max(1))
                    .collect()
            };
            use rayon::prelude::*;
            type FluxRow = ([f64; 6], Option<Value>);
            let results: Vec<std::result::Result<FluxRow, Error>> = gs
                .par_iter()
                .enumerate()
                .map(|(i, &gf)| {
                    let drive = DriveCoupling::OverOmegaM(gf);
                    let (params, basis, diss) = sc.system_at(d, drive)?;
                    let gt = basis.g_tilde();
                    let windows = window_pair(sc, &basis, &diss, gt)?;
                    let (g, _, diag) = solve_green(sc, sc.solver, &basis, &diss, &windows)?;
                    let spec = cavity_spectrum(&basis, &diss, &g, gt);
                    let fm = integrated_flux(&spec, basis.energy_minus(), band)?;
                    let fp = integrated_flux(&spec, basis.energy_plus(), band)?;
                    // linearized reference on the same windows
                    let bare = bare_green(&basis, &diss, &windows);
                    let spec_lin = cavity_spectrum(&basis, &diss, &bare, 0.0);
                    let lm = integrated_flux(&spec_lin, basis.energy_minus(), band)?;
                    let lp = integrated_flux(&spec_lin, basis.energy_plus(), band)?;
                    let (mut qm, mut qp) = (f64::NAN, f64::NAN);
                    if lb_idx.contains(&i) {
                        let model =
                            build_liouvillian(&params, &basis, &diss, &sc.lindblad_options())?;
                        let ss = steady_state(&model)?;
                        for (target, out) in
                            [(basis.energy_minus(), &mut qm), (basis.energy_plus(), &mut qp)]
                        {
                            let n = 601usize;
                            let grid: Vec<f64> = (0..n)
                                .map(|k| target - band + 2.0 * band * k as f64 / (n - 1) as f64)
                                .collect();
                            let spec_lb = regression_spectrum(&model, &ss, &grid)?;
                            // trapezoid on the uniform grid
                            let h = grid[1] - grid[0];
                            let mut acc = 0.0;
                            for k in 0..n - 1 {
                                acc += 0.5 * (spec_lb.s_d[k] + spec_lb.s_d[k + 1]) * h;
                            }
                            *out = acc / (2.0 * std::f64::consts::PI);
                        }
                    }
                    Ok(([fm, fp, lm, lp, qm, qp], diag))
                })
                .collect();
            let mut csv = Csv::new(vec![
                "solver", "g_many_over_omega_m", "flux_minus", "flux_plus", "linear_flux_minus",
                "linear_flux_plus", "lindblad_flux_minus", "lindblad_flux_plus",
            ]);
            for (i, r) in results.into_iter().enumerate() {
                match r {
                    Ok((vals, diag)) => {
                        if let Some(diag) = diag {
                            diagnostics.push(json!({"point": i, "at": gs[i], "sc": diag}));
                        }
                        let mut row = vec![sc.solver.name().to_string(), cell(gs[i])];
                        row.extend(vals.iter().map(|&v| cell(v)));
                        csv.push(row);
                    }
                    Err(e) => {
                        diagnostics.push(soft(i, gs[i], &e));
                        let mut row = vec![sc.solver.name().to_string(), cell(gs[i])];
                        row.extend(std::iter::repeat_with(String::new).take(6));
                        csv.push(row);
                    }
                }
            }
            files.push((PathBuf::from("flux_vs_G.csv"), csv.render()));
        }

        ScenarioKind::InstabilityScan => {
            let mut csv = Csv::new(vec![
                "solver", "delta_over_omega_m", "c_minus_eff", "c_plus_eff", "pump_occupancy",
                "threshold_occupancy", "leading_n_eff_minus", "paramp_n_minus",
                "negative_damping", "near_threshold", "unstable",
            ]);
            for (i, &d) in deltas.iter().enumerate() {
                match sc.system_at(d, sc.drive) {
                    Ok((_, basis, diss)) => {
                        let rep =
                            omk_core::keldysh::instability_report(&diss, basis.g_tilde());
                        csv.push(vec![
                            sc.solver.name().into(),
                            cell(d),
                            cell(rep.c_minus_eff),
                            cell(rep.c_plus_eff),
                            cell(rep.pump_occupancy),
                            cell(rep.threshold_occupancy),
                            cell(rep.leading_n_eff_minus),
                            cell(rep.paramp_n_minus),
                            bool_cell(rep.negative_damping),
                            bool_cell(rep.near_threshold),
                            bool_cell(rep.unstable),
                        ]);
                    }
                    Err(e) => {
                        diagnostics.push(soft(i, d, &e));
                        let mut row = vec![sc.solver.name().to_string(), cell(d)];
                        row.extend(std::iter::repeat_with(String::new).take(9));
                        csv.push(row);
                    }
                }
            }
            files.push((PathBuf::from("instability_scan.csv"), csv.render()));
        }

        ScenarioKind::TwoPhonon => {
            let d = deltas[0];
            let (params, basis, diss) = sc.system_at(d, sc.drive)?;
            let gt = basis.g_tilde();
            let peak = two_phonon_peak(&params);
            // sharp windows resolving the κ- dip around E+
            let step = diss.kappa[0] / sc.points_per_linewidth;
            let windows = WindowPair {
                minus: FrequencyWindow::new(basis.energy_minus(), sc.band_half_width, step)?,
                plus: FrequencyWindow::new(basis.energy_plus(), sc.band_half_width, step)?,
            };
            let bare = bare_green(&basis, &diss, &windows);
            let sigma = leading_self_energy(&basis, &diss, gt, &windows);
            let g = dyson_solve(&bare, &sigma)?;
            let spec = cavity_spectrum(&basis, &diss, &g, gt);
            let spec_lin = cavity_spectrum(&basis, &diss, &bare, 0.0);
            let mut csv = Csv::new(vec![
                "solver", "omega", "s_d", "s_d_linear", "s_d_asymptotic", "rho_d",
            ]);
            let block = &spec.plus;
            for i in 0..block.window.len() {
                let w = block.window.omega(i);
                csv.push(vec![
                    "leading".into(),
                    cell(w),
                    cell(block.s_d[i]),
                    cell(spec_lin.plus.s_d[i]),
                    cell(peak.profile(w)),
                    cell(block.rho_d[i]),
                ]);
            }
            files.push((PathBuf::from("two_phonon.csv"), csv.render()));
            let classical = omk_core::classical::classical_spectrum(&params);
            diagnostics.push(json!({
                "two_phonon": {
                    "center": peak.center,
                    "width": peak.width,
                    "peak_height": peak.peak_height,
                    "gamma_opt": peak.gamma_opt,
                    "integrated_weight": peak.integrated_weight(),
                    "integrated_weight_no_damping": peak.integrated_weight_no_damping(&params),
                    "classical_weight": classical.weight,
                    "warnings": peak.warnings.notes,
                }
            }));
        }

        ScenarioKind::ClassicalCheck => {
            let d = deltas[0];
            let (params, _, _) = sc.system_at(d, sc.drive)?;
            let state =
                omk_core::classical::classical_field(&params, sc.epsilon, sc.series_cutoff)?;
            let mut csv = Csv::new(vec!["solver", "n", "m", "re_a", "im_a"]);
            let mut coeffs: Vec<_> = state
                .coefficients()
                .iter()
                .filter(|(_, _, a)| a.norm() > 1e-16)
                .collect();
            coeffs.sort_by_key(|&&(n, m, _)| (n, m));
            for &&(n, m, a) in &coeffs {
                csv.push(vec![
                    "classical".into(),
                    n.to_string(),
                    m.to_string(),
                    cell(a.re),
                    cell(a.im),
                ]);
            }
            files.push((PathBuf::from("classical_check.csv"), csv.render()));
            // weight identity over a fixed scan
            let mut worst = 0.0f64;
            for gm in [0.002, 0.01, 0.05] {
                for g1 in [0.05, 0.5, 1.5] {
                    for nm in [10.0, 200.0, 1000.0] {
                        let p = omk_core::SystemParams::new(
                            params.detuning,
                            sc.omega_m,
                            gm * sc.omega_m,
                            g1,
                            sc.gamma,
                            nm,
                        )?;
                        let c = omk_core::classical::classical_spectrum(&p);
                        let q = two_phonon_peak(&p).integrated_weight_no_damping(&p);
                        worst = worst.max((c.weight - q).abs() / q.max(1e-300));
                    }
                }
            }
            // parseval on the requested field
            let period = 2.0 * std::f64::consts::PI / sc.omega_m;
            let nq = 4096;
            let mean: f64 = (0..nq)
                .map(|k| state.field(k as f64 * period / nq as f64).norm_sqr())
                .sum::<f64>()
                / nq as f64;
            diagnostics.push(json!({
                "classical_check": {
                    "epsilon": sc.epsilon,
                    "epsilon_warning": state.epsilon_warning,
                    "cutoff": sc.series_cutoff,
                    "parseval_series": state.mean_intensity(),
                    "parseval_quadrature": mean,
                    "weight_identity_worst_rel": worst,
                }
            }));
        }
    }

    let summary = json!({
        "tool": "omk",
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": sc.kind.name(),
        "solver": sc.solver.name(),
        "config": sc.raw,
        "scenario_file": scenario_echo,
        "diagnostics": diagnostics,
        "outputs": files.iter().map(|(p, _)| p.display().to_string()).collect::<Vec<_>>(),
    });
    Ok(RunArtifacts { files, summary })
}
