//! Discrete four-kick gate for two ions: commensurate trap tuning, the
//! calibrated square-wave plan, and a finite-switching distortion model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{mode_structure, CrystalState, Direction};
use crate::dynamics::{delta_phi, gate_conditions, GateModes, GatePair, GateReport, Sigma};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::trap::{bare_squared, IonSpecies, RydbergStateInfo, TrapParameters};
use crate::waveform::Waveform;

/// Target relation `q·ν_rock = p·ν_com` in the one-excited configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommensurateRatio {
    pub p: u32,
    pub q: u32,
}

impl CommensurateRatio {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidInput("ratio terms must be positive".into()));
        }
        if p >= q {
            return Err(Error::InvalidInput(format!(
                "rock/COM ratio {p}:{q} is not below 1; the rock mode is always slower"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

fn one_excited_frequencies(trap: &TrapParameters, species: &IonSpecies, state: &RydbergStateInfo) -> Result<(f64, f64)> {
    let pair = GatePair::new(0, 1, 2)?;
    let crystal = CrystalState::new(pair.internal_states(Sigma::GR, 2), species.clone(), state.clone())?;
    let m = mode_structure(Direction::X, &crystal, trap)?;
    Ok((m.frequencies[0], m.frequencies[1]))
}

/// Moves ω_z at fixed bare ω_x until `q ν_rock = p ν_com` holds in the
/// `0R` configuration of a two-ion crystal.
pub fn tune_commensurate(
    trap: &TrapParameters,
    species: &IonSpecies,
    state: &RydbergStateInfo,
    ratio: CommensurateRatio,
) -> Result<TrapParameters> {
    let wx = bare_squared(trap, species)[0].sqrt();
    let at = |wz: f64| -> Result<f64> {
        let t = trap.with_axial_frequency(species, wz)?;
        let (com, rock) = one_excited_frequencies(&t, species, state)?;
        Ok((ratio.q as f64 * rock - ratio.p as f64 * com) / com)
    };
    // ν_rock/ν_com falls from 1 (weak axial) towards 0 (zigzag onset)
    let lo = 1e-3 * wx;
    let mut hi = wx;
    let mut shrink = 0;
    loop {
        match at(hi) {
            Ok(v) if v < 0.0 => break,
            Ok(_) => return Err(Error::NoConvergence { what: "commensurate tuning bracket", iterations: shrink }),
            Err(Error::LinearInstability { .. }) | Err(Error::UnstableTrap(_)) => {
                hi *= 0.999;
                shrink += 1;
                if shrink > 5000 {
                    return Err(Error::UnstableTrap("no stable axial frequency reaches the target ratio".into()));
                }
            }
            Err(e) => return Err(e),
        }
    }
    let wz = bisect(at, lo, hi, 1e-15 * wx, 200)?;
    let tuned = trap.with_axial_frequency(species, wz)?;
    let (com, rock) = one_excited_frequencies(&tuned, species, state)?;
    let residual = (ratio.q as f64 * rock - ratio.p as f64 * com).abs() / com;
    if residual > 1e-10 {
        return Err(Error::NoConvergence { what: "commensurate tuning residual", iterations: 200 });
    }
    Ok(tuned)
}

/// Four constant kicks of alternating sign, each one COM period of the
/// `0R` configuration long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourKickPlan {
    pub kick_duration: f64,
    pub pattern: [f64; 4],
    /// Field magnitude of every kick (V/m).
    pub amplitude: f64,
    pub t_g: f64,
}

pub const FOUR_KICK_PATTERN: [f64; 4] = [1.0, -1.0, 1.0, -1.0];

impl FourKickPlan {
    pub fn waveform(&self) -> Waveform {
        Waveform::Slices { t_g: self.t_g, amplitudes: self.pattern.iter().map(|s| s * self.amplitude).collect() }
    }

    /// The same plan with every kick sign flipped.
    pub fn reversed(&self) -> Self {
        Self { pattern: self.pattern.map(|s| -s), ..self.clone() }
    }
}

/// Builds the four-kick plan on a (tuned) two-ion trap and scales the
/// amplitude so that `|Δφ| = π`.
pub fn build_four_kick(modes: &GateModes, amplitude_guess: f64) -> Result<FourKickPlan> {
    if modes.n_ions != 2 {
        return Err(Error::InvalidInput("the four-kick scheme is defined for two ions".into()));
    }
    if !(amplitude_guess > 0.0 && amplitude_guess.is_finite()) {
        return Err(Error::InvalidInput("amplitude guess must be positive".into()));
    }
    let com = modes.of(Sigma::GR)[0].frequency;
    let kick_duration = 2.0 * std::f64::consts::PI / com;
    let t_g = 4.0 * kick_duration;
    let trial = FourKickPlan { kick_duration, pattern: FOUR_KICK_PATTERN, amplitude: amplitude_guess, t_g };
    let dphi = delta_phi(&trial.waveform(), modes);
    if dphi == 0.0 || !dphi.is_finite() {
        return Err(Error::NoConvergence { what: "four-kick calibration", iterations: 1 });
    }
    let amplitude = amplitude_guess * (std::f64::consts::PI / dphi.abs()).sqrt();
    Ok(FourKickPlan { amplitude, ..trial })
}

/// Number of slices used to represent a distorted kick train.
pub const DISTORTION_SLICES: usize = 4096;

/// `G(t) = (2A/π) arctan(sin(π t / τ_kick) / g)` sampled at slice midpoints.
/// `g → 0` recovers the ideal square kicks.
pub fn distorted_waveform(plan: &FourKickPlan, g: f64, amplitude: f64, n_slices: usize) -> Result<Waveform> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidInput(format!("distortion parameter must be positive, got {g}")));
    }
    let h = plan.t_g / n_slices as f64;
    let amps = (0..n_slices)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            let s = (std::f64::consts::PI * t / plan.kick_duration).sin();
            2.0 * amplitude / std::f64::consts::PI * (s / g).atan()
        })
        .collect();
    Waveform::slices(plan.t_g, amps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionPoint {
    pub g: f64,
    /// Recalibrated amplitude `A` (V/m).
    pub amplitude: f64,
    /// Motional infidelity `1 − F_phase·F_disp` (lifetime excluded).
    pub infidelity: f64,
    pub report: GateReport,
}

/// Evaluates the distorted kick train for every `g`, recalibrating `A` so
/// that `|Δφ| = π` each time.
pub fn distortion_scan(g_values: &[f64], plan: &FourKickPlan, modes: &GateModes) -> Result<Vec<DistortionPoint>> {
    g_values
        .par_iter()
        .map(|&g| {
            let trial = distorted_waveform(plan, g, plan.amplitude, DISTORTION_SLICES)?;
            let dphi = delta_phi(&trial, modes);
            if dphi == 0.0 || !dphi.is_finite() {
                return Err(Error::NoConvergence { what: "distortion calibration", iterations: 1 });
            }
            let amplitude = plan.amplitude * (std::f64::consts::PI / dphi.abs()).sqrt();
            let wave = distorted_waveform(plan, g, amplitude, DISTORTION_SLICES)?;
            let report = gate_conditions(&wave, modes);
            let f = report.fidelity;
            let infidelity = 1.0 - (1.0 - f.phase_error) * (1.0 - f.displacement_loss);
            Ok(DistortionPoint { g, amplitude, infidelity, report })
        })
        .collect()
}
