//! Scenario files: flat `key = value` text, `#` comments.
//!
//! All rates and energies are in units of the cavity damping `κ = 1`;
//! detunings and drive couplings are given relative to `ωM` (anchored by
//! `omega_m_over_kappa`).

use omk_core::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    LinearSweep,
    CooperativitySweep,
    BathOccupancySweep,
    SpectrumPoint,
    FluxVsG,
    InstabilityScan,
    TwoPhonon,
    ClassicalCheck,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "linear_sweep" => Self::LinearSweep,
            "cooperativity_sweep" => Self::CooperativitySweep,
            "bath_occupancy_sweep" => Self::BathOccupancySweep,
            "spectrum_point" => Self::SpectrumPoint,
            "flux_vs_G" | "flux_vs_g" => Self::FluxVsG,
            "instability_scan" => Self::InstabilityScan,
            "two_phonon" => Self::TwoPhonon,
            "classical_check" => Self::ClassicalCheck,
            other => return Err(Error::Config(format!("unknown scenario kind '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::LinearSweep => "linear_sweep",
            Self::CooperativitySweep => "cooperativity_sweep",
            Self::BathOccupancySweep => "bath_occupancy_sweep",
            Self::SpectrumPoint => "spectrum_point",
            Self::FluxVsG => "flux_vs_G",
            Self::InstabilityScan => "instability_scan",
            Self::TwoPhonon => "two_phonon",
            Self::ClassicalCheck => "classical_check",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Linear,
    Leading,
    SelfConsistent,
    Lindblad,
}

impl Solver {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "linear" => Self::Linear,
            "leading" => Self::Leading,
            "self_consistent" => Self::SelfConsistent,
            "lindblad" => Self::Lindblad,
            other => return Err(Error::Config(format!("unknown solver '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Leading => "leading",
            Self::SelfConsistent => "self_consistent",
            Self::Lindblad => "lindblad",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sweep range `start..stop` with `points` samples (inclusive ends).
#[derive(Clone, Copy, Debug)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points)
            .map(|i| {
                self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64
            })
            .collect()
    }
}

/// Drive-strength selection: resonant (`G = G_res(Δ)`) or explicit.
#[derive(Clone, Copy, Debug)]
pub enum DriveCoupling {
    Resonant,
    OverOmegaM(f64),
}

/// Parsed scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub solver: Solver,
    pub omega_m: f64,
    pub gamma: f64,
    pub g_single: f64,
    pub n_mth: f64,
    pub delta_over_omega_m: Range,
    pub drive: DriveCoupling,
    pub drive_range: Option<Range>, // G/ωM sweep (flux_vs_G)
    pub band_half_width: f64,
    pub window_half_width_linewidths: f64,
    pub points_per_linewidth: f64,
    pub sc_iterations: usize,
    pub sc_mixing: f64,
    pub fock_minus: usize,
    pub fock_plus: usize,
    pub lindblad_full_h: bool,
    pub dim_cap: usize,
    pub lindblad_points: usize,
    pub epsilon: f64,
    pub series_cutoff: i32,
    /// Raw key-value view for the summary echo.
    pub raw: BTreeMap<String, String>,
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let key = k.trim().to_string();
        let val = v.trim().to_string();
        if key.is_empty() || val.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", lineno + 1)));
        }
        if map.insert(key.clone(), val).is_some() {
            return Err(Error::Config(format!("duplicate key '{key}'")));
        }
    }
    Ok(map)
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{v}' as number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{v}' as integer"))),
        }
    }

    fn str(&self, key: &str, default: &str) -> String {
        self.map.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    fn range(&self, prefix: &str) -> Result<Option<Range>> {
        let ks = format!("{prefix}_start");
        let ke = format!("{prefix}_stop");
        let kp = format!("{prefix}_points");
        let any = self.map.contains_key(&ks) || self.map.contains_key(&ke) || self.map.contains_key(&kp);
        if !any {
            return Ok(None);
        }
        let start = self.f64(&ks, f64::NAN)?;
        let stop = self.f64(&ke, f64::NAN)?;
        let points = self.usize(&kp, 0)?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::Config(format!("sweep '{prefix}' needs _start and _stop")));
        }
        if points == 0 {
            return Err(Error::Config(format!("sweep '{prefix}' needs _points >= 1")));
        }
        Ok(Some(Range { start, stop, points }))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let map = parse_kv(text)?;
        let r = Reader { map: &map };
        let kind = ScenarioKind::parse(
            map.get("scenario")
                .ok_or_else(|| Error::Config("missing 'scenario' key".into()))?,
        )?;
        let default_solver = match kind {
            ScenarioKind::LinearSweep | ScenarioKind::InstabilityScan => "linear",
            ScenarioKind::CooperativitySweep | ScenarioKind::BathOccupancySweep => "leading",
            ScenarioKind::TwoPhonon => "leading",
            ScenarioKind::ClassicalCheck => "linear",
            _ => "self_consistent",
        };
        let solver = Solver::parse(&r.str("solver", default_solver))?;

        let delta_range = match r.range("delta_over_omega_m")? {
            Some(rg) => rg,
            None => {
                let d = r.f64("delta_over_omega_m", f64::NAN)?;
                if !d.is_finite() {
                    return Err(Error::Config(
                        "need delta_over_omega_m or delta_over_omega_m_start/_stop/_points".into(),
                    ));
                }
                Range { start: d, stop: d, points: 1 }
            }
        };
        let drive = match r.str("g_many", "res").as_str() {
            "res" | "resonant" => DriveCoupling::Resonant,
            other => DriveCoupling::OverOmegaM(other.parse::<f64>().map_err(|_| {
                Error::Config(format!("key 'g_many': expected 'res' or a number, got '{other}'"))
            })?),
        };

        let s = Scenario {
            kind,
            solver,
            omega_m: r.f64("omega_m_over_kappa", 50.0)?,
            gamma: r.f64("gamma_over_kappa", 1e-4)?,
            g_single: r.f64("g_over_kappa", 1.0)?,
            n_mth: r.f64("n_mth", 0.0)?,
            delta_over_omega_m: delta_range,
            drive,
            drive_range: r.range("g_many_over_omega_m")?,
            band_half_width: r.f64("band_half_width", 5.0)?,
            window_half_width_linewidths: r.f64("window_half_width_linewidths", 40.0)?,
            points_per_linewidth: r.f64("points_per_linewidth", 20.0)?,
            sc_iterations: r.usize("sc_iterations", 20)?,
            sc_mixing: r.f64("sc_mixing", 1.0)?,
            fock_minus: r.usize("fock_minus", 12)?,
            fock_plus: r.usize("fock_plus", 12)?,
            lindblad_full_h: r.str("lindblad_hamiltonian", "resonant") == "full",
            dim_cap: r.usize("dim_cap", 4096)?,
            lindblad_points: r.usize("lindblad_points", 0)?,
            epsilon: r.f64("epsilon", 0.1)?,
            series_cutoff: r.usize("series_cutoff", 12)? as i32,
            raw: map,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.omega_m <= 0.0 || self.gamma <= 0.0 {
            return Err(Error::Config("omega_m_over_kappa and gamma_over_kappa must be positive".into()));
        }
        if self.delta_over_omega_m.points == 0 {
            return Err(Error::Config("empty sweep range".into()));
        }
        let dr = self.delta_over_omega_m;
        if dr.start >= 0.0 || dr.stop >= 0.0 {
            return Err(Error::Config("detunings must be negative (red-detuned drive)".into()));
        }
        if self.kind == ScenarioKind::FluxVsG && self.drive_range.is_none() {
            return Err(Error::Config(
                "flux_vs_G needs g_many_over_omega_m_start/_stop/_points".into(),
            ));
        }
        if matches!(self.drive, DriveCoupling::Resonant) {
            for d in self.delta_over_omega_m.values() {
                if !(-2.0..=-0.5).contains(&d) {
                    return Err(Error::Config(format!(
                        "g_many = res needs delta/omega_m in [-2, -0.5]; got {d}"
                    )));
                }
            }
        }
        if self.sc_mixing <= 0.0 || self.sc_mixing > 1.0 {
            return Err(Error::Config("sc_mixing must be in (0, 1]".into()));
        }
        // solver availability against the regime, checked up front
        if self.solver == Solver::Lindblad {
            for d in self.delta_over_omega_m.values() {
                let (params, basis, diss) = self.system_at(d, self.drive)?;
                let opts = self.lindblad_options();
                omk_core::lindblad::build_liouvillian(&params, &basis, &diss, &opts)
                    .map_err(|e| Error::Config(format!("lindblad refused at delta = {d} ωM: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn lindblad_options(&self) -> omk_core::lindblad::LiouvillianOptions {
        omk_core::lindblad::LiouvillianOptions {
            n_minus: self.fock_minus,
            n_plus: self.fock_plus,
            hamiltonian: if self.lindblad_full_h {
                omk_core::lindblad::HamiltonianKind::Full { include_linear: false }
            } else {
                omk_core::lindblad::HamiltonianKind::Resonant
            },
            dim_cap: self.dim_cap,
        }
    }

    /// System parameters, basis and dissipation at a given detuning (in
    /// units of ωM) and drive selection.
    pub fn system_at(
        &self,
        delta_over_wm: f64,
        drive: DriveCoupling,
    ) -> Result<(
        omk_core::SystemParams,
        omk_core::PolaritonBasis,
        omk_core::LinearDissipation,
    )> {
        let delta = delta_over_wm * self.omega_m;
        let g_many = match drive {
            DriveCoupling::Resonant => omk_core::model::g_res(delta, self.omega_m)?,
            DriveCoupling::OverOmegaM(f) => f * self.omega_m,
        };
        let params = omk_core::SystemParams::new(
            delta,
            self.omega_m,
            g_many,
            self.g_single,
            self.gamma,
            self.n_mth,
        )?;
        let basis = omk_core::model::bogoliubov_coefficients(&params);
        let diss = omk_core::model::linear_dissipation(&params, &basis);
        Ok((params, basis, diss))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(
            "scenario = cooperativity_sweep\n# comment\ndelta_over_omega_m_start = -1.9\n\
             delta_over_omega_m_stop = -0.55\ndelta_over_omega_m_points = 10\n",
        )
        .unwrap();
        assert_eq!(s.kind, ScenarioKind::CooperativitySweep);
        assert_eq!(s.delta_over_omega_m.points, 10);
        assert_eq!(s.omega_m, 50.0);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Scenario::parse("scenario = nope\ndelta_over_omega_m = -1\n").is_err());
        assert!(Scenario::parse("delta_over_omega_m = -1\n").is_err());
        assert!(Scenario::parse("scenario = linear_sweep\n").is_err()); // no delta
        assert!(Scenario::parse(
            "scenario = linear_sweep\ndelta_over_omega_m_start = -1\ndelta_over_omega_m_stop = -2\n\
             delta_over_omega_m_points = 0\n"
        )
        .is_err());
        // resonant drive outside its domain
        assert!(Scenario::parse("scenario = linear_sweep\ndelta_over_omega_m = -2.5\n").is_err());
        // positive detuning refused
        assert!(Scenario::parse("scenario = linear_sweep\ndelta_over_omega_m = 1.0\n").is_err());
        // duplicate key
        assert!(Scenario::parse(
            "scenario = linear_sweep\ndelta_over_omega_m = -1\ndelta_over_omega_m = -1\n"
        )
        .is_err());
    }

    #[test]
    fn lindblad_regime_check_at_parse_time() {
        // hot bath at Delta = -0.65 ωM exceeds any feasible truncation
        let err = Scenario::parse(
            "scenario = spectrum_point\nsolver = lindblad\ndelta_over_omega_m = -0.65\n\
             gamma_over_kappa = 1e-3\nn_mth = 650\n",
        );
        match err {
            Err(Error::Config(msg)) => assert!(msg.contains("lindblad refused")),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
