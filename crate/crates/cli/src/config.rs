//! Run configuration. TOML sections with unit-bearing keys; every section
//! defaults to the reference two-ion setup and unknown keys are rejected.

use std::path::{Path, PathBuf};

use rykick::constants::{AMU, ELEMENTARY_CHARGE};
use rykick::dynamics::GatePair;
use rykick::feasibility::{FeasibilityLimits, GateTimeSearch, DEFAULT_EXCURSION_LIMIT};
use rykick::optimizer::{Boundary, Method, OptimizerOptions};
use rykick::trap::{IonSpecies, RydbergStateInfo, TrapParameters};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrapSection {
    /// Static field gradient (V/m²).
    pub gamma_dc: f64,
    /// Rf field gradient amplitude (V/m²).
    pub gamma_rf: f64,
    pub epsilon: f64,
    /// Rf drive frequency Ω_rf/2π (Hz).
    pub omega_rf_hz: f64,
    /// When set, the axial frequency ω_z/2π (Hz) is moved here with the
    /// bare transverse frequency held fixed.
    pub axial_frequency_hz: Option<f64>,
}

impl Default for TrapSection {
    fn default() -> Self {
        let t = TrapParameters::reference();
        Self {
            gamma_dc: t.gamma_dc,
            gamma_rf: t.gamma_rf,
            epsilon: t.epsilon,
            omega_rf_hz: t.omega_rf / (2.0 * std::f64::consts::PI),
            axial_frequency_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeciesSection {
    pub mass_amu: f64,
    /// Charge in units of the elementary charge.
    pub charge_e: f64,
}

impl Default for SpeciesSection {
    fn default() -> Self {
        let ion = IonSpecies::ca40();
        Self { mass_amu: ion.mass / AMU, charge_e: ion.charge / ELEMENTARY_CHARGE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateSection {
    pub label: String,
    pub principal_n: u32,
    /// Static polarizability (C·m²/V).
    #[serde(rename = "polarizability_SI")]
    pub polarizability_si: f64,
    pub lifetime_us: f64,
    /// Field of 10% state admixture (V/m). Unset means the built-in
    /// estimate, which outputs flag as such.
    pub it_field_limit_v_per_m: Option<f64>,
}

impl Default for StateSection {
    fn default() -> Self {
        let s = RydbergStateInfo::ca40_49s();
        Self {
            label: s.label,
            principal_n: s.principal_n,
            polarizability_si: s.polarizability,
            lifetime_us: s.lifetime * 1e6,
            it_field_limit_v_per_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    pub n_ions: usize,
    /// Gate ions, 1-based.
    pub pair: [usize; 2],
    pub t_g_us: f64,
    pub method: Method,
}

impl Default for GateSection {
    fn default() -> Self {
        Self { n_ions: 2, pair: [1, 2], t_g_us: 0.67, method: Method::Slices }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub n_t: usize,
    pub n_f: usize,
    pub boundary: Boundary,
    pub svd_tolerance: f64,
    pub gram_cutoff: f64,
    pub degeneracy_tolerance: f64,
    pub reject_degenerate: bool,
    pub trajectory_points: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        Self {
            n_t: o.n_t,
            n_f: o.n_f,
            boundary: o.boundary,
            svd_tolerance: o.svd_tolerance,
            gram_cutoff: o.gram_cutoff,
            degeneracy_tolerance: o.degeneracy_tolerance,
            reject_degenerate: o.reject_degenerate,
            trajectory_points: o.trajectory_points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsSection {
    /// Largest tolerated excursion in ground-state lengths.
    pub x_max_limit_ground_lengths: f64,
    /// State purity the `scaling` search must keep.
    pub purity_target: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self { x_max_limit_ground_lengths: DEFAULT_EXCURSION_LIMIT, purity_target: 0.97 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingSection {
    pub principal_n: Vec<u32>,
    pub t_min_us: f64,
    pub t_max_us: f64,
    pub scan_step_us: f64,
    pub tolerance_us: f64,
}

impl Default for ScalingSection {
    fn default() -> Self {
        let s = GateTimeSearch::default();
        Self {
            principal_n: vec![49, 55, 60, 65, 70, 75, 80, 85],
            t_min_us: s.t_min * 1e6,
            t_max_us: s.t_max * 1e6,
            scan_step_us: s.scan_step * 1e6,
            tolerance_us: s.tolerance * 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub trap: TrapSection,
    pub species: SpeciesSection,
    pub state: StateSection,
    pub gate: GateSection,
    pub optimizer: OptimizerSection,
    pub limits: LimitsSection,
    pub scaling: ScalingSection,
    pub output: OutputSection,
}

/// Physical objects built from a validated [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub trap: TrapParameters,
    pub species: IonSpecies,
    pub state: RydbergStateInfo,
    pub n_ions: usize,
    pub pair: GatePair,
    pub t_g: f64,
    pub method: Method,
    pub options: OptimizerOptions,
    pub limits: FeasibilityLimits,
    pub purity_target: f64,
    pub search: GateTimeSearch,
    pub scaling_n: Vec<u32>,
    /// The IT field is the built-in estimate rather than a configured value.
    pub it_field_is_estimate: bool,
    /// `trap.axial_frequency_hz` was set.
    pub axial_override: bool,
}

fn positive(v: f64, key: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads `path`, or returns the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
                Self::parse(&text)
            }
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let t = &self.trap;
        let omega_rf = 2.0 * std::f64::consts::PI * positive(t.omega_rf_hz, "trap.omega_rf_hz")?;
        let species = IonSpecies::new(
            positive(self.species.mass_amu, "species.mass_amu")? * AMU,
            positive(self.species.charge_e, "species.charge_e")? * ELEMENTARY_CHARGE,
            Vec::new(),
        )?;
        let mut trap = TrapParameters::for_ion(t.gamma_dc, t.gamma_rf, t.epsilon, omega_rf, &species)?;
        if let Some(f) = t.axial_frequency_hz {
            let wz = 2.0 * std::f64::consts::PI * positive(f, "trap.axial_frequency_hz")?;
            trap = trap.with_axial_frequency(&species, wz)?;
        }
        let s = &self.state;
        let estimate = RydbergStateInfo::ca40_49s().it_field_limit;
        let state = RydbergStateInfo::new(
            &s.label,
            s.principal_n,
            s.polarizability_si,
            positive(s.lifetime_us, "state.lifetime_us")? * 1e-6,
            s.it_field_limit_v_per_m.unwrap_or(estimate),
        )?;
        let species = IonSpecies { rydberg_states: vec![state.clone()], ..species };

        let g = &self.gate;
        if g.pair[0] == 0 || g.pair[1] == 0 {
            return Err(CliError::Config("gate.pair is 1-based".into()));
        }
        let pair = GatePair::new(g.pair[0] - 1, g.pair[1] - 1, g.n_ions)?;
        let t_g = positive(g.t_g_us, "gate.t_g_us")? * 1e-6;

        let o = &self.optimizer;
        let options = OptimizerOptions {
            n_t: o.n_t,
            n_f: o.n_f,
            boundary: o.boundary,
            svd_tolerance: positive(o.svd_tolerance, "optimizer.svd_tolerance")?,
            gram_cutoff: positive(o.gram_cutoff, "optimizer.gram_cutoff")?,
            degeneracy_tolerance: positive(o.degeneracy_tolerance, "optimizer.degeneracy_tolerance")?,
            reject_degenerate: o.reject_degenerate,
            trajectory_points: o.trajectory_points,
        };
        let mut limits = FeasibilityLimits::for_state(&state);
        limits.x_max_limit = positive(self.limits.x_max_limit_ground_lengths, "limits.x_max_limit_ground_lengths")?;
        let purity = self.limits.purity_target;
        if !(purity > 0.0 && purity < 1.0) {
            return Err(CliError::Config(format!("limits.purity_target must lie in (0, 1), got {purity}")));
        }
        let sc = &self.scaling;
        let search = GateTimeSearch {
            t_min: positive(sc.t_min_us, "scaling.t_min_us")? * 1e-6,
            t_max: positive(sc.t_max_us, "scaling.t_max_us")? * 1e-6,
            scan_step: positive(sc.scan_step_us, "scaling.scan_step_us")? * 1e-6,
            tolerance: positive(sc.tolerance_us, "scaling.tolerance_us")? * 1e-6,
            optimizer: options.clone(),
        };
        Ok(Resolved {
            trap,
            species,
            state,
            n_ions: g.n_ions,
            pair,
            t_g,
            method: g.method,
            options,
            limits,
            purity_target: purity,
            search,
            scaling_n: sc.principal_n.clone(),
            it_field_is_estimate: s.it_field_limit_v_per_m.is_none(),
            axial_override: t.axial_frequency_hz.is_some(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_to_the_reference_setup() {
        let r = RunConfig::default().resolve().unwrap();
        let t = TrapParameters::reference();
        assert!((r.trap.omega_rf / t.omega_rf - 1.0).abs() < 1e-15);
        assert_eq!(r.trap.gamma_dc, t.gamma_dc);
        assert_eq!(r.state, RydbergStateInfo::ca40_49s());
        assert_eq!(r.pair, GatePair { first: 0, second: 1 });
        assert!(r.it_field_is_estimate);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[trap]\ngamma_dc = 6e7\nfoo = 1\n").is_err());
        assert!(RunConfig::parse("[nonsense]\n").is_err());
    }

    #[test]
    fn partial_sections_keep_defaults() {
        let c = RunConfig::parse("[gate]\nt_g_us = 1.5\nmethod = \"fourier\"\n").unwrap();
        assert_eq!(c.gate.t_g_us, 1.5);
        assert_eq!(c.gate.method, Method::Fourier);
        assert_eq!(c.gate.pair, [1, 2]);
        assert_eq!(c.trap, TrapSection::default());
    }

    #[test]
    fn invalid_physics_fails_validation() {
        let bad_mass = RunConfig::parse("[species]\nmass_amu = -40.0\n").unwrap();
        assert!(matches!(bad_mass.resolve(), Err(CliError::Config(_))));
        let bad_pair = RunConfig::parse("[gate]\npair = [2, 2]\n").unwrap();
        assert_eq!(bad_pair.resolve().unwrap_err().exit_code(), 2);
        let unstable = RunConfig::parse("[trap]\ngamma_rf = 1e8\n").unwrap();
        assert_eq!(unstable.resolve().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn configured_it_field_is_not_an_estimate() {
        let c = RunConfig::parse("[state]\nit_field_limit_v_per_m = 300.0\n").unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.limits.it_field, 300.0);
        assert!(!r.it_field_is_estimate);
    }
}
