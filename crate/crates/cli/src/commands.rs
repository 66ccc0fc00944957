//! Subcommand implementations. Each writes its artifacts and returns a
//! short JSON summary for stdout.

use std::path::Path;

use rayon::prelude::*;
use rykick::constants::angular_to_mhz;
use rykick::crystal::equilibrium_positions;
use rykick::dynamics::{gate_conditions_with, trajectories, report_from_record, GateModes, GatePair, Sigma};
use rykick::error::Error as CoreError;
use rykick::feasibility::{check, check_values, field_for_purity, scaling_scan, REFERENCE_ADMIXTURE};
use rykick::kick::{build_four_kick, distortion_scan, tune_commensurate, CommensurateRatio, FourKickPlan};
use rykick::optimizer::{synthesize, Method};
use rykick::pair_scan::{interaction_ranking, scan, InteractionRanking, PairScanResult};
use rykick::trap::{bare_frequencies, shifted_frequencies, RydbergStateInfo, TrapParameters};
use rykick::waveform::Waveform;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{sci, sci_opt, Artifacts, Table};
use crate::report::{
    modes_table, one_based, trajectory_table, waveform_table, GateRecord, GateSummary, LimitsSummary, OptimumSummary,
};

/// Amplitude the four-kick calibration starts from (V/m).
const FOUR_KICK_GUESS: f64 = 10.0;

/// Default distortion parameters of the four-kick scan.
pub const DEFAULT_DISTORTIONS: [f64; 7] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0];

pub struct Context {
    pub cfg: Resolved,
    pub out: Artifacts,
}

impl Context {
    pub fn modes(&self) -> Result<GateModes, CliError> {
        Ok(GateModes::new(self.cfg.n_ions, self.cfg.pair, &self.cfg.species, &self.cfg.state, &self.cfg.trap)?)
    }

    fn modes_on(&self, trap: &TrapParameters, n_ions: usize, pair: GatePair) -> Result<GateModes, CliError> {
        Ok(GateModes::new(n_ions, pair, &self.cfg.species, &self.cfg.state, trap)?)
    }

    fn limits(&self) -> LimitsSummary {
        LimitsSummary::of(&self.cfg)
    }
}

fn mhz3(f: &rykick::trap::SecularFrequencies) -> [f64; 3] {
    [angular_to_mhz(f.omega_x), angular_to_mhz(f.omega_y), angular_to_mhz(f.omega_z)]
}

#[derive(Debug, Serialize)]
struct ConfigurationModes {
    sigma: Sigma,
    frequencies_mhz: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ModesRecord {
    n_ions: usize,
    pair: [usize; 2],
    bare_mhz: [f64; 3],
    shifted_mhz: [f64; 3],
    equilibrium_u: Vec<f64>,
    length_scale_m: f64,
    configurations: Vec<ConfigurationModes>,
}

/// `modes`: secular frequencies, equilibrium and the four configurations'
/// transverse modes.
pub fn modes(ctx: &mut Context) -> Result<Value, CliError> {
    let c = &ctx.cfg;
    let bare = bare_frequencies(&c.trap, &c.species)?;
    let shifted = shifted_frequencies(&c.trap, &c.species, &c.state)?;
    let eq = equilibrium_positions(c.n_ions, bare.omega_z, &c.species)?;
    let modes = ctx.modes()?;
    let record = ModesRecord {
        n_ions: c.n_ions,
        pair: one_based(c.pair),
        bare_mhz: mhz3(&bare),
        shifted_mhz: mhz3(&shifted),
        equilibrium_u: eq.u.clone(),
        length_scale_m: eq.length_scale,
        configurations: Sigma::ALL
            .iter()
            .map(|&sigma| ConfigurationModes {
                sigma,
                frequencies_mhz: modes.of(sigma).iter().map(|m| angular_to_mhz(m.frequency)).collect(),
            })
            .collect(),
    };
    ctx.out.csv("modes.csv", &modes_table(&modes))?;
    ctx.out.json("modes.json", &record)?;
    Ok(json!({ "bare_mhz": record.bare_mhz, "shifted_mhz": record.shifted_mhz }))
}

pub fn parse_ratio(text: &str) -> Result<CommensurateRatio, CliError> {
    let (p, q) = text.split_once(':').ok_or_else(|| CliError::Config(format!("ratio must read p:q, got {text}")))?;
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|e| CliError::Config(format!("ratio {text}: {e}")));
    Ok(CommensurateRatio::new(parse(p)?, parse(q)?)?)
}

#[derive(Debug, Serialize)]
struct FourKickRecord {
    tuned: bool,
    ratio: Option<[u32; 2]>,
    trap: TrapParameters,
    kick_duration_us: f64,
    t_g_us: f64,
    amplitude_v_per_m: f64,
    pattern: [f64; 4],
    com_residual_phonons: f64,
    gate: GateSummary,
    limits: LimitsSummary,
}

#[derive(Debug, Serialize)]
pub struct FourKickOutcome {
    pub t_g_us: f64,
    pub delta_phi_rad: f64,
    pub one_excited_closure: f64,
    pub com_residual_phonons: f64,
    pub displacement_loss: f64,
}

/// Two-ion trap of the four-kick scheme: the configured trap, tuned to
/// `ratio` unless `ratio` is `None`.
pub fn four_kick_trap(cfg: &Resolved, ratio: Option<CommensurateRatio>) -> Result<TrapParameters, CliError> {
    Ok(match ratio {
        Some(r) => tune_commensurate(&cfg.trap, &cfg.species, &cfg.state, r)?,
        None => cfg.trap.clone(),
    })
}

/// `four-kick`: calibrated kick train, its trajectories and a distortion scan.
pub fn four_kick(
    ctx: &mut Context,
    ratio: Option<CommensurateRatio>,
    g_values: &[f64],
    prefix: &str,
) -> Result<FourKickOutcome, CliError> {
    let trap = four_kick_trap(&ctx.cfg, ratio)?;
    let pair = GatePair::new(0, 1, 2)?;
    let modes = ctx.modes_on(&trap, 2, pair)?;
    let plan: FourKickPlan = build_four_kick(&modes, FOUR_KICK_GUESS)?;
    let wave = plan.waveform();
    let record = trajectories(&wave, &modes, ctx.cfg.options.trajectory_points);
    let report = report_from_record(&wave, &modes, &record);
    let com = report.residual_phonons(&[Sigma::GG, Sigma::RR], 0);
    let closure = [Sigma::GR, Sigma::RG]
        .iter()
        .flat_map(|&s| report.configuration(s).final_beta.iter().map(|b| b.norm()))
        .fold(0.0, f64::max);

    let mut dist = Table::new(["g", "amplitude_v_per_m", "motional_infidelity", "com_residual_phonons", "delta_phi_rad"]);
    for p in distortion_scan(g_values, &plan, &modes)? {
        dist.push(vec![
            sci(p.g),
            sci(p.amplitude),
            sci(p.infidelity),
            sci(p.report.residual_phonons(&[Sigma::GG, Sigma::RR], 0)),
            sci(p.report.delta_phi),
        ]);
    }
    ctx.out.csv(&format!("{prefix}waveform.csv"), &waveform_table(&wave))?;
    ctx.out.csv(&format!("{prefix}trajectories.csv"), &trajectory_table(&record))?;
    ctx.out.csv(&format!("{prefix}distortion.csv"), &dist)?;
    ctx.out.csv(&format!("{prefix}modes.csv"), &modes_table(&modes))?;
    let json_record = FourKickRecord {
        tuned: ratio.is_some(),
        ratio: ratio.map(|r| [r.p, r.q]),
        trap,
        kick_duration_us: plan.kick_duration * 1e6,
        t_g_us: plan.t_g * 1e6,
        amplitude_v_per_m: plan.amplitude,
        pattern: plan.pattern,
        com_residual_phonons: com,
        gate: GateSummary::new(&report),
        limits: ctx.limits(),
    };
    ctx.out.json(&format!("{prefix}report.json"), &json_record)?;
    Ok(FourKickOutcome {
        t_g_us: plan.t_g * 1e6,
        delta_phi_rad: report.delta_phi,
        one_excited_closure: closure,
        com_residual_phonons: com,
        displacement_loss: report.fidelity.displacement_loss,
    })
}

/// Synthesizes the configured gate and writes waveform, trajectories and report.
pub fn optimize(ctx: &mut Context, t_g: f64, method: Method, prefix: &str) -> Result<GateRecord, CliError> {
    let modes = ctx.modes()?;
    let (best, _) = synthesize(&modes, t_g, method, &ctx.cfg.options)?;
    let record = trajectories(&best.waveform, &modes, ctx.cfg.options.trajectory_points);
    let report = report_from_record(&best.waveform, &modes, &record);
    let gate = GateRecord {
        gate: GateSummary::new(&report),
        optimum: Some(OptimumSummary::new(method, &best)),
        verdict: check(&report, &ctx.cfg.limits),
        limits: ctx.limits(),
    };
    ctx.out.json(&format!("{prefix}waveform.json"), &best.waveform)?;
    ctx.out.csv(&format!("{prefix}waveform.csv"), &waveform_table(&best.waveform))?;
    ctx.out.csv(&format!("{prefix}trajectories.csv"), &trajectory_table(&record))?;
    ctx.out.json(&format!("{prefix}report.json"), &gate)?;
    Ok(gate)
}

/// Reads a waveform written by `optimize` and re-validates it.
pub fn load_waveform(path: &Path) -> Result<Waveform, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let w: Waveform =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(match w {
        Waveform::Slices { t_g, amplitudes } => Waveform::slices(t_g, amplitudes)?,
        Waveform::Fourier { t_g, sine, cosine, zero_endpoint } => Waveform::fourier(t_g, sine, cosine, zero_endpoint)?,
    })
}

/// `simulate`: evaluates an arbitrary waveform on the configured crystal.
pub fn simulate(ctx: &mut Context, waveform: &Path) -> Result<GateRecord, CliError> {
    let w = load_waveform(waveform)?;
    let modes = ctx.modes()?;
    let record = trajectories(&w, &modes, ctx.cfg.options.trajectory_points);
    let report = report_from_record(&w, &modes, &record);
    let gate = GateRecord {
        gate: GateSummary::new(&report),
        optimum: None,
        verdict: check(&report, &ctx.cfg.limits),
        limits: ctx.limits(),
    };
    ctx.out.csv("simulate_trajectories.csv", &trajectory_table(&record))?;
    ctx.out.json("simulate_report.json", &gate)?;
    Ok(gate)
}

/// `n × n` matrix of `e_max` with the upper triangle populated.
pub fn pair_matrix_table(result: &PairScanResult) -> Table {
    let n = result.n_ions;
    let mut header = vec!["ion".to_string()];
    header.extend((1..=n).map(|j| j.to_string()));
    let mut table = Table::new(header);
    let m = result.matrix();
    for (i, row) in m.iter().enumerate() {
        let mut cells = vec![(i + 1).to_string()];
        cells.extend(row.iter().enumerate().map(|(j, v)| if j > i { sci_opt(*v) } else { String::new() }));
        table.push(cells);
    }
    table
}

pub fn pair_list_table(result: &PairScanResult) -> Table {
    let mut table = Table::new([
        "ion_a",
        "ion_b",
        "e_max_v_per_m",
        "x_max_ground_lengths",
        "closure_residual",
        "delta_phi_rad",
        "feasible",
        "error",
    ]);
    for e in &result.entries {
        let [a, b] = one_based(e.pair);
        let o = e.outcome.as_ref();
        table.push(vec![
            a.to_string(),
            b.to_string(),
            sci_opt(o.map(|o| o.e_max)),
            sci_opt(o.map(|o| o.x_max)),
            sci_opt(o.map(|o| o.closure_residual)),
            sci_opt(o.map(|o| o.delta_phi)),
            o.map(|o| o.verdict.feasible.to_string()).unwrap_or_default(),
            e.error.clone().unwrap_or_default(),
        ]);
    }
    table
}

#[derive(Debug, Serialize)]
pub struct PairScanRecord {
    pub n_ions: usize,
    pub t_g_us: f64,
    pub trap: TrapParameters,
    pub max_e_max_v_per_m: Option<f64>,
    pub mirror_asymmetry: f64,
    pub infeasible_pairs: Vec<[usize; 2]>,
    pub ranking: InteractionRanking,
    pub scan: PairScanResult,
    pub limits: LimitsSummary,
}

pub fn pair_scan_record(result: PairScanResult, trap: &TrapParameters, limits: LimitsSummary) -> PairScanRecord {
    PairScanRecord {
        n_ions: result.n_ions,
        t_g_us: result.t_g * 1e6,
        trap: trap.clone(),
        max_e_max_v_per_m: result.max_e_max(),
        mirror_asymmetry: result.mirror_asymmetry(),
        infeasible_pairs: result
            .entries
            .iter()
            .filter(|e| e.outcome.as_ref().is_some_and(|o| !o.verdict.feasible))
            .map(|e| one_based(e.pair))
            .collect(),
        ranking: interaction_ranking(&result),
        scan: result,
        limits,
    }
}

/// Scans every pair of `n_ions` on `trap` and writes matrix, list and record.
pub fn scan_pairs_on(
    ctx: &mut Context,
    trap: &TrapParameters,
    n_ions: usize,
    t_g: f64,
    method: Method,
    prefix: &str,
) -> Result<PairScanRecord, CliError> {
    let c = &ctx.cfg;
    let result = scan(n_ions, trap, &c.species, &c.state, t_g, method, &c.options, &c.limits)?;
    ctx.out.csv(&format!("{prefix}matrix.csv"), &pair_matrix_table(&result))?;
    ctx.out.csv(&format!("{prefix}pairs.csv"), &pair_list_table(&result))?;
    let record = pair_scan_record(result, trap, ctx.limits());
    ctx.out.json(&format!("{prefix}scan.json"), &record)?;
    Ok(record)
}

#[derive(Debug, Serialize)]
struct FeasibilityRecord {
    e_max_v_per_m: f64,
    x_max_ground_lengths: f64,
    verdict: rykick::feasibility::Verdict,
    limits: LimitsSummary,
    gate: Option<GateSummary>,
}

/// `feasibility`: checks given values, or the optimised configured gate.
/// Infeasible gates exit with the infeasible status after writing.
pub fn feasibility(ctx: &mut Context, values: Option<(f64, f64)>, t_g: f64, method: Method) -> Result<Value, CliError> {
    let (e_max, x_max, gate) = match values {
        Some((e, x)) => {
            if !(e >= 0.0 && e.is_finite() && x >= 0.0 && x.is_finite()) {
                return Err(CliError::Config("--e-max and --x-max must be non-negative".into()));
            }
            (e, x, None)
        }
        None => {
            let modes = ctx.modes()?;
            let (best, _) = synthesize(&modes, t_g, method, &ctx.cfg.options)?;
            let report = gate_conditions_with(&best.waveform, &modes, ctx.cfg.options.trajectory_points);
            (report.e_max, report.x_max, Some(GateSummary::new(&report)))
        }
    };
    let verdict = check_values(e_max, x_max, &ctx.cfg.limits);
    let record =
        FeasibilityRecord { e_max_v_per_m: e_max, x_max_ground_lengths: x_max, verdict, limits: ctx.limits(), gate };
    ctx.out.json("feasibility.json", &record)?;
    if !verdict.feasible {
        return Err(CliError::Infeasible(format!(
            "e_max {e_max:.3} V/m against {:.3} V/m, x_max {x_max:.3} against {:.3}",
            ctx.cfg.limits.it_field, ctx.cfg.limits.x_max_limit
        )));
    }
    Ok(json!({ "feasible": true, "e_max_v_per_m": e_max, "field_margin": verdict.field_margin }))
}

/// IT field of the reference level that puts the optimised two-ion gate
/// at `t_g` exactly at the configured purity.
pub fn calibrated_anchor(cfg: &Resolved, t_g: f64) -> Result<f64, CliError> {
    let modes = GateModes::new(2, GatePair::new(0, 1, 2)?, &cfg.species, &cfg.state, &cfg.trap)?;
    let (best, _) = synthesize(&modes, t_g, Method::Slices, &cfg.search.optimizer)?;
    let unit = field_for_purity(1.0, cfg.purity_target)?;
    Ok(best.waveform.e_max() / unit)
}

#[derive(Debug, Serialize)]
struct ScalingRecord {
    reference: RydbergStateInfo,
    purity_target: f64,
    reference_admixture: f64,
    calibrated_at_us: Option<f64>,
    it_field_is_estimate: bool,
    rows: Vec<ScalingEntry>,
}

#[derive(Debug, Serialize)]
pub struct ScalingEntry {
    pub n: u32,
    pub min_tg_us: Option<f64>,
    pub e_max_v_per_m: Option<f64>,
    pub field_limit_v_per_m: f64,
    pub lifetime_infidelity: Option<f64>,
    pub error: Option<String>,
}

/// `scaling`: minimal gate time for every configured `n`.
pub fn scaling(ctx: &mut Context, ns: &[u32], calibrate_at: Option<f64>) -> Result<Vec<ScalingEntry>, CliError> {
    let mut reference = ctx.cfg.state.clone();
    let mut estimate = ctx.cfg.it_field_is_estimate;
    if let Some(t) = calibrate_at {
        reference.it_field_limit = calibrated_anchor(&ctx.cfg, t)?;
        estimate = false;
    }
    let c = &ctx.cfg;
    let rows = scaling_scan(ns, &c.trap, &c.species, &reference, c.purity_target, &c.search)?;
    let entries: Vec<ScalingEntry> = rows
        .into_par_iter()
        .map(|r| {
            let e_max = match r.min_t_g {
                Some(t) => {
                    let state = rykick::feasibility::scale_state(&reference, r.n)?;
                    let modes = GateModes::new(2, GatePair::new(0, 1, 2)?, &c.species, &state, &c.trap)?;
                    Some(synthesize(&modes, t, Method::Slices, &c.search.optimizer)?.0.waveform.e_max())
                }
                None => None,
            };
            Ok::<_, CoreError>(ScalingEntry {
                n: r.n,
                min_tg_us: r.min_t_g.map(|t| t * 1e6),
                e_max_v_per_m: e_max,
                field_limit_v_per_m: r.field_limit,
                lifetime_infidelity: r.lifetime_infidelity,
                error: r.error,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["n", "min_tg_us", "e_max_v_per_m", "field_limit_v_per_m", "lifetime_infidelity", "error"]);
    for e in &entries {
        table.push(vec![
            e.n.to_string(),
            sci_opt(e.min_tg_us),
            sci_opt(e.e_max_v_per_m),
            sci(e.field_limit_v_per_m),
            sci_opt(e.lifetime_infidelity),
            e.error.clone().unwrap_or_default(),
        ]);
    }
    ctx.out.csv("scaling.csv", &table)?;
    let record = ScalingRecord {
        reference,
        purity_target: ctx.cfg.purity_target,
        reference_admixture: REFERENCE_ADMIXTURE,
        calibrated_at_us: calibrate_at.map(|t| t * 1e6),
        it_field_is_estimate: estimate,
        rows: entries,
    };
    ctx.out.json("scaling.json", &record)?;
    Ok(record.rows)
}

