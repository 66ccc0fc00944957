//! Serializable report records in output units (MHz, µs, V/m) and the
//! tables shared by several subcommands.

use rykick::constants::angular_to_mhz;
use rykick::dynamics::{FidelityTerms, GateModes, GatePair, GateReport, Sigma, TrajectoryRecord};
use rykick::feasibility::{FeasibilityLimits, Verdict};
use rykick::optimizer::{Method, OptimalWaveform};
use rykick::waveform::Waveform;
use serde::Serialize;

use crate::config::Resolved;
use crate::output::{sci, Table};

/// Samples per waveform table.
pub const WAVEFORM_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitsSummary {
    pub it_field_v_per_m: f64,
    /// The IT field is the built-in estimate, not a configured value.
    pub it_field_is_estimate: bool,
    pub x_max_limit_ground_lengths: f64,
}

impl LimitsSummary {
    pub fn new(limits: &FeasibilityLimits, it_field_is_estimate: bool) -> Self {
        Self { it_field_v_per_m: limits.it_field, it_field_is_estimate, x_max_limit_ground_lengths: limits.x_max_limit }
    }

    pub fn of(cfg: &Resolved) -> Self {
        Self::new(&cfg.limits, cfg.it_field_is_estimate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigurationSummary {
    pub sigma: Sigma,
    pub frequencies_mhz: Vec<f64>,
    /// `[Re β, Im β]` per mode at the end of the gate.
    pub final_beta: Vec<[f64; 2]>,
    pub mode_phases_rad: Vec<f64>,
    pub phase_rad: f64,
}

/// 1-based ion numbers of a pair.
pub fn one_based(pair: GatePair) -> [usize; 2] {
    [pair.first + 1, pair.second + 1]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateSummary {
    pub pair: [usize; 2],
    pub t_g_us: f64,
    pub e_max_v_per_m: f64,
    pub x_max_ground_lengths: f64,
    pub x_max_abs_ground_lengths: f64,
    pub closure_residual: f64,
    pub delta_phi_rad: f64,
    pub fidelity: FidelityTerms,
    pub configurations: Vec<ConfigurationSummary>,
}

impl GateSummary {
    pub fn new(report: &GateReport) -> Self {
        Self {
            pair: one_based(report.pair),
            t_g_us: report.t_g * 1e6,
            e_max_v_per_m: report.e_max,
            x_max_ground_lengths: report.x_max,
            x_max_abs_ground_lengths: report.x_max_abs,
            closure_residual: report.closure_residual,
            delta_phi_rad: report.delta_phi,
            fidelity: report.fidelity,
            configurations: report
                .configurations
                .iter()
                .map(|c| ConfigurationSummary {
                    sigma: c.sigma,
                    frequencies_mhz: c.mode_frequencies.iter().map(|&w| angular_to_mhz(w)).collect(),
                    final_beta: c.final_beta.iter().map(|b| [b.re, b.im]).collect(),
                    mode_phases_rad: c.mode_phases.clone(),
                    phase_rad: c.phase,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumSummary {
    pub method: Method,
    pub n_parameters: usize,
    pub null_dimension: usize,
    /// Δφ of the unit-norm optimum (rad).
    pub raw_delta_phi_rad: f64,
    pub scale: f64,
    pub negative_phase: bool,
    pub degenerate: bool,
    pub waveform_l2_norm: f64,
}

impl OptimumSummary {
    pub fn new(method: Method, best: &OptimalWaveform) -> Self {
        Self {
            method,
            n_parameters: best.waveform.n_parameters(),
            null_dimension: best.null_dimension,
            raw_delta_phi_rad: best.raw_delta_phi,
            scale: best.scale,
            negative_phase: best.negative_phase,
            degenerate: best.degenerate,
            waveform_l2_norm: best.waveform.l2_norm(),
        }
    }
}

/// Complete record of one gate: summary, optimum (if synthesized),
/// verdict and the limits it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateRecord {
    pub gate: GateSummary,
    pub optimum: Option<OptimumSummary>,
    pub verdict: Verdict,
    pub limits: LimitsSummary,
}

/// `t_us, field_v_per_m` on a uniform grid.
pub fn waveform_table(w: &Waveform) -> Table {
    let (t, e) = w.sample_grid(WAVEFORM_POINTS);
    let mut table = Table::new(["t_us", "field_v_per_m"]);
    for (t, e) in t.iter().zip(&e) {
        table.push(vec![sci(t * 1e6), sci(*e)]);
    }
    table
}

/// `t_us` followed by `Re β` and `Im β` of every configuration and mode.
pub fn trajectory_table(record: &TrajectoryRecord) -> Table {
    let mut header = vec!["t_us".to_string()];
    for sigma in Sigma::ALL {
        for k in 0..record.beta[sigma.index()].len() {
            header.push(format!("{}_mode{}_re", sigma.label(), k + 1));
            header.push(format!("{}_mode{}_im", sigma.label(), k + 1));
        }
    }
    let mut table = Table::new(header);
    for (i, t) in record.times.iter().enumerate() {
        let mut row = vec![sci(t * 1e6)];
        for per_mode in &record.beta {
            for series in per_mode {
                row.push(sci(series[i].re));
                row.push(sci(series[i].im));
            }
        }
        table.push(row);
    }
    table
}

/// One row per configuration and mode: frequency, coupling and eigenvector.
pub fn modes_table(modes: &GateModes) -> Table {
    let n = modes.n_ions;
    let mut header: Vec<String> = ["configuration", "mode", "frequency_mhz", "coupling_w", "ground_length_m"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n).map(|j| format!("b_ion{j}")));
    let mut table = Table::new(header);
    for sigma in Sigma::ALL {
        let s = sigma.index();
        for (k, m) in modes.of(sigma).iter().enumerate() {
            let mut row =
                vec![sigma.label().to_string(), (k + 1).to_string(), sci(angular_to_mhz(m.frequency)), sci(m.w), sci(m.l)];
            row.extend(modes.structures[s].eigenvector(k).into_iter().map(sci));
            table.push(row);
        }
    }
    table
}
