//! Physical feasibility of a gate: Rydberg state mixing by the kick field,
//! spatial excursion, and extrapolation of state properties in `n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{lifetime_survival, GateModes, GatePair, GateReport};
use crate::error::{Error, Result};
use crate::optimizer::{synthesize, Method, OptimizerOptions};
use crate::trap::{IonSpecies, RydbergStateInfo, TrapParameters};

/// Default bound on `|X|max` in ground-state lengths.
pub const DEFAULT_EXCURSION_LIMIT: f64 = 1e4;

/// Admixture fraction at which `it_field_limit` is defined.
pub const REFERENCE_ADMIXTURE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityLimits {
    /// Largest tolerated field (V/m).
    pub it_field: f64,
    /// Largest tolerated excursion (ground-state lengths).
    pub x_max_limit: f64,
    pub reference_n: u32,
    pub reference_it_field: f64,
}

impl FeasibilityLimits {
    pub fn new(it_field: f64, x_max_limit: f64, reference_n: u32, reference_it_field: f64) -> Result<Self> {
        for (v, what) in [(it_field, "it_field"), (x_max_limit, "x_max_limit"), (reference_it_field, "reference_it_field")] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{what} must be positive")));
            }
        }
        Ok(Self { it_field, x_max_limit, reference_n, reference_it_field })
    }

    /// Limits of `state` itself, with the default excursion bound.
    pub fn for_state(state: &RydbergStateInfo) -> Self {
        Self {
            it_field: state.it_field_limit,
            x_max_limit: DEFAULT_EXCURSION_LIMIT,
            reference_n: state.principal_n,
            reference_it_field: state.it_field_limit,
        }
    }

    /// Limits of `reference` extrapolated to level `n`.
    pub fn scaled(reference: &RydbergStateInfo, n: u32) -> Result<Self> {
        let s = scale_state(reference, n)?;
        Ok(Self {
            it_field: s.it_field_limit,
            x_max_limit: DEFAULT_EXCURSION_LIMIT,
            reference_n: reference.principal_n,
            reference_it_field: reference.it_field_limit,
        })
    }
}

/// Power laws in the principal quantum number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaws {
    pub polarizability_exponent: i32,
    pub it_exponent: i32,
    pub lifetime_exponent: i32,
}

pub const SCALING_LAWS: ScalingLaws = ScalingLaws { polarizability_exponent: 7, it_exponent: -5, lifetime_exponent: 3 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub feasible: bool,
    pub it_violation: bool,
    pub excursion_violation: bool,
    /// `it_field / e_max`; infinite for a zero field.
    pub field_margin: f64,
    /// `x_max_limit / x_max`; infinite without motion.
    pub excursion_margin: f64,
}

fn margin(limit: f64, value: f64) -> f64 {
    if value == 0.0 {
        f64::INFINITY
    } else {
        limit / value
    }
}

/// Compares a peak field and excursion with `limits`.
pub fn check_values(e_max: f64, x_max: f64, limits: &FeasibilityLimits) -> Verdict {
    let it_violation = e_max > limits.it_field;
    let excursion_violation = x_max > limits.x_max_limit;
    Verdict {
        feasible: !it_violation && !excursion_violation,
        it_violation,
        excursion_violation,
        field_margin: margin(limits.it_field, e_max),
        excursion_margin: margin(limits.x_max_limit, x_max),
    }
}

pub fn check(report: &GateReport, limits: &FeasibilityLimits) -> Verdict {
    check_values(report.e_max, report.x_max, limits)
}

/// Field tolerated at state purity `purity`, assuming admixture ∝ E² and
/// `it_field` marking 10 % admixture.
pub fn field_for_purity(it_field: f64, purity: f64) -> Result<f64> {
    if !(purity > 0.0 && purity < 1.0) {
        return Err(Error::InvalidInput(format!("purity must lie in (0, 1), got {purity}")));
    }
    Ok(it_field * ((1.0 - purity) / REFERENCE_ADMIXTURE).sqrt())
}

/// Extrapolates polarizability, field limit and lifetime to level `target_n`.
pub fn scale_state(reference: &RydbergStateInfo, target_n: u32) -> Result<RydbergStateInfo> {
    reference.validate()?;
    if target_n < 10 {
        return Err(Error::InvalidInput(format!("principal quantum number {target_n} below 10")));
    }
    if target_n == reference.principal_n {
        return Ok(reference.clone());
    }
    let r = target_n as f64 / reference.principal_n as f64;
    let suffix: String = reference.label.trim_start_matches(|c: char| c.is_ascii_digit()).to_string();
    RydbergStateInfo::new(
        format!("{target_n}{suffix}"),
        target_n,
        reference.polarizability * r.powi(SCALING_LAWS.polarizability_exponent),
        reference.lifetime * r.powi(SCALING_LAWS.lifetime_exponent),
        reference.it_field_limit * r.powi(SCALING_LAWS.it_exponent),
    )
}

/// Search window and resolution for [`minimal_gate_time`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateTimeSearch {
    pub t_min: f64,
    pub t_max: f64,
    /// Coarse grid spacing used to locate the first feasible gate time.
    pub scan_step: f64,
    pub tolerance: f64,
    pub optimizer: OptimizerOptions,
}

impl Default for GateTimeSearch {
    fn default() -> Self {
        Self { t_min: 0.2e-6, t_max: 3.0e-6, scan_step: 20e-9, tolerance: 10e-9, optimizer: OptimizerOptions::default() }
    }
}

fn peak_field(modes: &GateModes, t_g: f64, options: &OptimizerOptions) -> Result<Option<f64>> {
    match synthesize(modes, t_g, Method::Slices, options) {
        Ok((best, _)) => Ok(Some(best.waveform.e_max())),
        Err(Error::EmptyNullSpace) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Shortest two-ion gate time whose optimised slice waveform stays within
/// the field allowed for level `n` at the requested purity.
///
/// The peak field is not monotone in `t_g`, so the first feasible point on a
/// coarse grid is located before bisecting down to `tolerance`.
pub fn minimal_gate_time(
    n: u32,
    trap: &TrapParameters,
    species: &IonSpecies,
    reference: &RydbergStateInfo,
    purity_target: f64,
    search: &GateTimeSearch,
) -> Result<f64> {
    if !(search.t_min > 0.0 && search.t_max > search.t_min && search.scan_step > 0.0 && search.tolerance > 0.0) {
        return Err(Error::InvalidInput("invalid gate-time search window".into()));
    }
    let state = scale_state(reference, n)?;
    let limit = field_for_purity(state.it_field_limit, purity_target)?;
    let modes = GateModes::new(2, GatePair::new(0, 1, 2)?, species, &state, trap)?;
    let steps = ((search.t_max - search.t_min) / search.scan_step).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| (search.t_min + i as f64 * search.scan_step).min(search.t_max)).collect();
    let feasible: Vec<bool> = grid
        .par_iter()
        .map(|&t| Ok(peak_field(&modes, t, &search.optimizer)?.is_some_and(|e| e <= limit)))
        .collect::<Result<_>>()?;
    let first = feasible
        .iter()
        .position(|&f| f)
        .ok_or(Error::NoConvergence { what: "minimal gate time (no feasible point in window)", iterations: grid.len() })?;
    if first == 0 {
        return Ok(grid[0]);
    }
    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    let mut iterations = 0;
    while hi - lo > search.tolerance {
        let mid = 0.5 * (lo + hi);
        if peak_field(&modes, mid, &search.optimizer)?.is_some_and(|e| e <= limit) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
        if iterations > 64 {
            return Err(Error::NoConvergence { what: "minimal gate time bisection", iterations });
        }
    }
    Ok(hi)
}

/// One row of an `n` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u32,
    pub min_t_g: Option<f64>,
    /// Field allowed at the requested purity (V/m).
    pub field_limit: f64,
    pub lifetime_infidelity: Option<f64>,
    pub error: Option<String>,
}

pub fn scaling_scan(
    ns: &[u32],
    trap: &TrapParameters,
    species: &IonSpecies,
    reference: &RydbergStateInfo,
    purity_target: f64,
    search: &GateTimeSearch,
) -> Result<Vec<ScalingRow>> {
    ns.par_iter()
        .map(|&n| {
            let state = scale_state(reference, n)?;
            let field_limit = field_for_purity(state.it_field_limit, purity_target)?;
            Ok(match minimal_gate_time(n, trap, species, reference, purity_target, search) {
                Ok(t) => ScalingRow {
                    n,
                    min_t_g: Some(t),
                    field_limit,
                    lifetime_infidelity: Some(1.0 - lifetime_survival(t, state.lifetime)),
                    error: None,
                },
                Err(e) if !e.is_validation() => {
                    ScalingRow { n, min_t_g: None, field_limit, lifetime_infidelity: None, error: Some(e.to_string()) }
                }
                Err(e) => return Err(e),
            })
        })
        .collect()
}
