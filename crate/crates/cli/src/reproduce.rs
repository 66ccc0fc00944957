//! End-to-end reproduction pipelines.

use rayon::prelude::*;
use rykick::constants::{angular_to_mhz, mhz_to_angular};
use rykick::dynamics::{GateModes, GatePair, Sigma};
use rykick::kick::CommensurateRatio;
use rykick::optimizer::{synthesize, Method};
use rykick::scenario::{SIX_ION_AXIAL_MHZ, TUNED_RATIO};
use rykick::trap::TrapParameters;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{four_kick, optimize, scan_pairs_on, Context, FourKickOutcome, DEFAULT_DISTORTIONS};
use crate::error::CliError;
use crate::output::{sci, sci_opt, Table};
use crate::report::GateRecord;

/// Gate-time grid of the field scan (µs).
pub const SCAN_START_US: f64 = 0.2;
pub const SCAN_END_US: f64 = 3.0;

/// Gate times of the two six-ion scans (µs).
pub const RELAXED_TG_US: f64 = 2.5;
pub const FAST_TG_US: f64 = 2.0;

/// Configurations listed in the frequency table; `R0` mirrors `0R`.
const TABLE_CONFIGURATIONS: [Sigma; 3] = [Sigma::GG, Sigma::GR, Sigma::RR];

fn tuned_ratio() -> Result<CommensurateRatio, CliError> {
    Ok(CommensurateRatio::new(TUNED_RATIO.0, TUNED_RATIO.1)?)
}

/// Two-ion COM and rock frequencies (MHz) of every table configuration.
fn two_ion_frequencies(ctx: &Context, trap: &TrapParameters) -> Result<Vec<[f64; 2]>, CliError> {
    let c = &ctx.cfg;
    let modes = GateModes::new(2, GatePair::new(0, 1, 2)?, &c.species, &c.state, trap)?;
    Ok(TABLE_CONFIGURATIONS
        .iter()
        .map(|&s| {
            let m = modes.of(s);
            [angular_to_mhz(m[0].frequency), angular_to_mhz(m[1].frequency)]
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct FrequencyRow {
    pub configuration: Sigma,
    pub mode: &'static str,
    pub untuned_mhz: f64,
    pub tuned_mhz: f64,
}

#[derive(Debug, Serialize)]
struct Table1Record {
    untuned_trap: TrapParameters,
    tuned_trap: TrapParameters,
    ratio: [u32; 2],
    rows: Vec<FrequencyRow>,
}

/// State-dependent two-ion frequencies before and after commensurate tuning.
pub fn table1(ctx: &mut Context) -> Result<Vec<FrequencyRow>, CliError> {
    let untuned_trap = ctx.cfg.trap.clone();
    let tuned_trap = crate::commands::four_kick_trap(&ctx.cfg, Some(tuned_ratio()?))?;
    let before = two_ion_frequencies(ctx, &untuned_trap)?;
    let after = two_ion_frequencies(ctx, &tuned_trap)?;
    let mut rows = Vec::new();
    let mut table = Table::new(["configuration", "mode", "untuned_mhz", "tuned_mhz"]);
    for (i, &sigma) in TABLE_CONFIGURATIONS.iter().enumerate() {
        for (k, mode) in ["com", "rock"].into_iter().enumerate() {
            table.push(vec![sigma.label().into(), mode.into(), sci(before[i][k]), sci(after[i][k])]);
            rows.push(FrequencyRow { configuration: sigma, mode, untuned_mhz: before[i][k], tuned_mhz: after[i][k] });
        }
    }
    ctx.out.csv("table1.csv", &table)?;
    let record = Table1Record { untuned_trap, tuned_trap, ratio: [TUNED_RATIO.0, TUNED_RATIO.1], rows };
    ctx.out.json("table1.json", &record)?;
    Ok(record.rows)
}

/// Four-kick scheme on the tuned trap with the default distortion scan.
pub fn fig2(ctx: &mut Context) -> Result<FourKickOutcome, CliError> {
    four_kick(ctx, Some(tuned_ratio()?), &DEFAULT_DISTORTIONS, "fig2_")
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub t_g_us: f64,
    pub e_max_v_per_m: Option<f64>,
    pub x_max_ground_lengths: Option<f64>,
    pub closure_residual: Option<f64>,
    pub error: Option<String>,
}

/// Grid `start, start + step, …` up to `end` (µs), built from integer steps.
pub fn gate_time_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Optimal field and excursion of the configured gate along a gate-time grid.
pub fn field_scan(ctx: &Context, grid_us: &[f64], method: Method) -> Result<Vec<ScanPoint>, CliError> {
    let modes = ctx.modes()?;
    let options = &ctx.cfg.options;
    Ok(grid_us
        .par_iter()
        .map(|&t| match synthesize(&modes, t * 1e-6, method, options) {
            Ok((_, r)) => ScanPoint {
                t_g_us: t,
                e_max_v_per_m: Some(r.e_max),
                x_max_ground_lengths: Some(r.x_max),
                closure_residual: Some(r.closure_residual),
                error: None,
            },
            Err(e) => ScanPoint {
                t_g_us: t,
                e_max_v_per_m: None,
                x_max_ground_lengths: None,
                closure_residual: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct Fig3Outcome {
    pub gate: GateRecord,
    pub scan: Vec<ScanPoint>,
}

/// Optimal waveform at `t_g` plus the field scan over gate time.
pub fn fig3(ctx: &mut Context, t_g_us: f64, step_us: f64) -> Result<Fig3Outcome, CliError> {
    let method = ctx.cfg.method;
    let gate = optimize(ctx, t_g_us * 1e-6, method, "fig3_")?;
    if !(step_us > 0.0 && step_us.is_finite()) {
        return Err(CliError::Config(format!("scan step must be positive, got {step_us}")));
    }
    let scan = field_scan(ctx, &gate_time_grid(SCAN_START_US, SCAN_END_US, step_us), method)?;
    let mut table = Table::new(["t_g_us", "e_max_v_per_m", "x_max_ground_lengths", "closure_residual", "error"]);
    for p in &scan {
        table.push(vec![
            sci(p.t_g_us),
            sci_opt(p.e_max_v_per_m),
            sci_opt(p.x_max_ground_lengths),
            sci_opt(p.closure_residual),
            p.error.clone().unwrap_or_default(),
        ]);
    }
    ctx.out.csv("fig3_scan.csv", &table)?;
    Ok(Fig3Outcome { gate, scan })
}

#[derive(Debug, Serialize)]
pub struct Fig4Outcome {
    pub axial_mhz: f64,
    pub relaxed_max_v_per_m: Option<f64>,
    pub fast_max_v_per_m: Option<f64>,
    /// Largest `e_max` at the short gate time over the largest at the long one.
    pub fast_over_relaxed: Option<f64>,
    pub relaxed_all_feasible: bool,
    pub relaxed_max_closure: f64,
    pub relaxed_mirror_asymmetry: f64,
    pub relaxed_symmetric_best: bool,
    pub fast_infeasible_pairs: Vec<[usize; 2]>,
}

/// Six-ion pair scans at the long and short gate time.
pub fn fig4(ctx: &mut Context) -> Result<Fig4Outcome, CliError> {
    let c = &ctx.cfg;
    let trap = if c.axial_override {
        c.trap.clone()
    } else {
        c.trap.with_axial_frequency(&c.species, mhz_to_angular(SIX_ION_AXIAL_MHZ))?
    };
    let axial_mhz = angular_to_mhz(rykick::trap::bare_frequencies(&trap, &c.species)?.omega_z);
    let method = c.method;
    let relaxed = scan_pairs_on(ctx, &trap, 6, RELAXED_TG_US * 1e-6, method, "fig4a_")?;
    let fast = scan_pairs_on(ctx, &trap, 6, FAST_TG_US * 1e-6, method, "fig4b_")?;
    let outcomes = || relaxed.scan.entries.iter().filter_map(|e| e.outcome.as_ref());
    let outcome = Fig4Outcome {
        axial_mhz,
        relaxed_max_v_per_m: relaxed.max_e_max_v_per_m,
        fast_max_v_per_m: fast.max_e_max_v_per_m,
        fast_over_relaxed: relaxed.max_e_max_v_per_m.zip(fast.max_e_max_v_per_m).map(|(a, b)| b / a),
        relaxed_all_feasible: relaxed.scan.entries.iter().all(|e| e.outcome.as_ref().is_some_and(|o| o.verdict.feasible)),
        relaxed_max_closure: outcomes().map(|o| o.closure_residual).fold(0.0, f64::max),
        relaxed_mirror_asymmetry: relaxed.mirror_asymmetry,
        relaxed_symmetric_best: relaxed.ranking.symmetric_best_in_class,
        fast_infeasible_pairs: fast.infeasible_pairs.clone(),
    };
    ctx.out.json("fig4_summary.json", &outcome)?;
    Ok(outcome)
}

pub fn summary<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).unwrap_or_else(|e| json!({ "unserializable": e.to_string() }))
}
