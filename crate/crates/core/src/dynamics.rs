//! State-dependent phase-space displacements and geometric phases of a
//! two-ion gate driven by a uniform electric field.
//!
//! A field `E(t)` exerts the force `F_k = e E W_k l_k` on mode `k`. The mode
//! displacement is `β_k(t) = −(i/ħ) ∫_0^t F_k e^{−iν_k τ} dτ` and the geometric
//! phase is `(1/ħ²) ∫∫_{τ'<τ} F_k(τ) F_k(τ') sin(ν_k(τ' − τ))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::crystal::{mode_force_factors, mode_structure, CrystalState, Direction, InternalState, ModeStructure};
use crate::error::{Error, Result};
use crate::trap::{IonSpecies, RydbergStateInfo, TrapParameters};
use crate::waveform::Waveform;

/// Internal configuration of the two gate ions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sigma {
    #[serde(rename = "00")]
    GG,
    #[serde(rename = "0R")]
    GR,
    #[serde(rename = "R0")]
    RG,
    #[serde(rename = "RR")]
    RR,
}

impl Sigma {
    pub const ALL: [Sigma; 4] = [Sigma::GG, Sigma::GR, Sigma::RG, Sigma::RR];

    pub fn label(self) -> &'static str {
        match self {
            Sigma::GG => "00",
            Sigma::GR => "0R",
            Sigma::RG => "R0",
            Sigma::RR => "RR",
        }
    }

    /// Whether the first and second gate ion are excited.
    pub fn excitation(self) -> (bool, bool) {
        match self {
            Sigma::GG => (false, false),
            Sigma::GR => (false, true),
            Sigma::RG => (true, false),
            Sigma::RR => (true, true),
        }
    }

    /// Weight in `Δφ = φ_RR + φ_00 − φ_0R − φ_R0`.
    pub fn phase_sign(self) -> f64 {
        match self {
            Sigma::GG | Sigma::RR => 1.0,
            Sigma::GR | Sigma::RG => -1.0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Zero-based indices of the two gate ions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GatePair {
    pub first: usize,
    pub second: usize,
}

impl GatePair {
    pub fn new(first: usize, second: usize, n_ions: usize) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidInput("gate ions must be distinct".into()));
        }
        if first >= n_ions || second >= n_ions {
            return Err(Error::InvalidInput(format!(
                "gate pair ({first}, {second}) outside a {n_ions}-ion crystal"
            )));
        }
        Ok(Self { first, second })
    }

    /// Per-ion labels for configuration `sigma`; spectators stay in the ground state.
    pub fn internal_states(&self, sigma: Sigma, n_ions: usize) -> Vec<InternalState> {
        let mut out = vec![InternalState::Ground; n_ions];
        let (a, b) = sigma.excitation();
        if a {
            out[self.first] = InternalState::Rydberg;
        }
        if b {
            out[self.second] = InternalState::Rydberg;
        }
        out
    }

    /// Mirror image `(N−1−second, N−1−first)` under crystal reflection.
    pub fn mirrored(&self, n_ions: usize) -> Self {
        Self { first: n_ions - 1 - self.second, second: n_ions - 1 - self.first }
    }

    pub fn separation(&self) -> usize {
        self.first.abs_diff(self.second)
    }
}

/// Frequency and force coupling of one mode in one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoupling {
    /// ν_k (rad/s).
    pub frequency: f64,
    pub w: f64,
    /// Ground-state length (m).
    pub l: f64,
}

impl ModeCoupling {
    /// `e W l / ħ`: converts `∫E e^{−iντ}dτ` (V·s/m) into a dimensionless displacement.
    pub fn field_coupling(&self, charge: f64) -> f64 {
        charge * self.w * self.l / HBAR
    }
}

/// Mode data of all four gate configurations along one transverse direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateModes {
    pub n_ions: usize,
    pub pair: GatePair,
    pub charge: f64,
    pub rydberg_state: RydbergStateInfo,
    pub structures: Vec<ModeStructure>,
    pub couplings: Vec<Vec<ModeCoupling>>,
}

impl GateModes {
    pub fn new(
        n_ions: usize,
        pair: GatePair,
        species: &IonSpecies,
        rydberg_state: &RydbergStateInfo,
        trap: &TrapParameters,
    ) -> Result<Self> {
        Self::along(Direction::X, n_ions, pair, species, rydberg_state, trap)
    }

    pub fn along(
        direction: Direction,
        n_ions: usize,
        pair: GatePair,
        species: &IonSpecies,
        rydberg_state: &RydbergStateInfo,
        trap: &TrapParameters,
    ) -> Result<Self> {
        GatePair::new(pair.first, pair.second, n_ions)?;
        let mut structures = Vec::with_capacity(4);
        let mut couplings = Vec::with_capacity(4);
        for sigma in Sigma::ALL {
            let crystal = CrystalState::new(pair.internal_states(sigma, n_ions), species.clone(), rydberg_state.clone())?;
            let modes = mode_structure(direction, &crystal, trap)?;
            let forces = mode_force_factors(&modes, species);
            couplings.push(
                modes
                    .frequencies
                    .iter()
                    .zip(forces)
                    .map(|(&frequency, f)| ModeCoupling { frequency, w: f.w, l: f.l })
                    .collect(),
            );
            structures.push(modes);
        }
        Ok(Self { n_ions, pair, charge: species.charge, rydberg_state: rydberg_state.clone(), structures, couplings })
    }

    pub fn of(&self, sigma: Sigma) -> &[ModeCoupling] {
        &self.couplings[sigma.index()]
    }

    pub fn lowest_frequency(&self) -> f64 {
        self.couplings.iter().flatten().map(|c| c.frequency).fold(f64::INFINITY, f64::min)
    }

    pub fn highest_frequency(&self) -> f64 {
        self.couplings.iter().flatten().map(|c| c.frequency).fold(0.0, f64::max)
    }
}

/// `β_k(t)` for one mode (dimensionless).
pub fn displacement(waveform: &Waveform, mode: &ModeCoupling, charge: f64, t: f64) -> Complex64 {
    let g = mode.field_coupling(charge);
    waveform.exp_moment(-mode.frequency, t) * Complex64::new(0.0, -g)
}

/// Geometric phase `φ_k(t_g)` of one mode (rad).
pub fn geometric_phase(waveform: &Waveform, mode: &ModeCoupling, charge: f64) -> f64 {
    let g = mode.field_coupling(charge);
    if g == 0.0 {
        return 0.0;
    }
    g * g * waveform.phase_kernel(mode.frequency)
}

/// Total phase of configuration `sigma`, summed over modes.
pub fn configuration_phase(waveform: &Waveform, modes: &GateModes, sigma: Sigma) -> f64 {
    modes.of(sigma).iter().map(|m| geometric_phase(waveform, m, modes.charge)).sum()
}

/// `Δφ = φ_RR + φ_00 − φ_0R − φ_R0`.
pub fn delta_phi(waveform: &Waveform, modes: &GateModes) -> f64 {
    Sigma::ALL
        .iter()
        .map(|&s| s.phase_sign() * configuration_phase(waveform, modes, s))
        .sum()
}

/// Sampled displacements of every mode in every configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// `beta[σ][k][i]` at `times[i]`.
    pub beta: Vec<Vec<Vec<Complex64>>>,
    /// Final displacement per configuration and mode.
    pub final_beta: Vec<Vec<Complex64>>,
    /// Phase per configuration and mode at `t_g` (rad).
    pub phases: Vec<Vec<f64>>,
}

pub const DEFAULT_TRAJECTORY_POINTS: usize = 1000;
pub const MIN_POINTS_PER_PERIOD: usize = 200;

/// Number of uniform samples honouring both the requested count and the
/// per-period minimum of the fastest mode.
pub fn trajectory_points(requested: usize, t_g: f64, highest_frequency: f64) -> usize {
    let period = 2.0 * std::f64::consts::PI / highest_frequency;
    let needed = (MIN_POINTS_PER_PERIOD as f64 * t_g / period).ceil() as usize + 1;
    requested.max(needed).max(2)
}

pub fn trajectories(waveform: &Waveform, modes: &GateModes, requested_points: usize) -> TrajectoryRecord {
    let t_g = waveform.t_g();
    let n = trajectory_points(requested_points, t_g, modes.highest_frequency());
    let times: Vec<f64> = (0..n).map(|i| t_g * i as f64 / (n - 1) as f64).collect();
    let mut beta = Vec::with_capacity(4);
    let mut final_beta = Vec::with_capacity(4);
    let mut phases = Vec::with_capacity(4);
    for sigma in Sigma::ALL {
        let mut per_mode = Vec::new();
        let mut finals = Vec::new();
        let mut ph = Vec::new();
        for m in modes.of(sigma) {
            let g = Complex64::new(0.0, -m.field_coupling(modes.charge));
            let series: Vec<Complex64> = waveform
                .exp_moment_grid(-m.frequency, &times)
                .into_iter()
                .map(|v| v * g)
                .collect();
            finals.push(displacement(waveform, m, modes.charge, t_g));
            ph.push(geometric_phase(waveform, m, modes.charge));
            per_mode.push(series);
        }
        beta.push(per_mode);
        final_beta.push(finals);
        phases.push(ph);
    }
    TrajectoryRecord { times, beta, final_beta, phases }
}

/// Loss budget of a gate; every entry lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityTerms {
    pub phase_error: f64,
    pub displacement_loss: f64,
    pub lifetime_loss: f64,
    pub fidelity: f64,
}

/// Per-configuration results inside a [`GateReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationReport {
    pub sigma: Sigma,
    pub mode_frequencies: Vec<f64>,
    pub final_beta: Vec<Complex64>,
    pub mode_phases: Vec<f64>,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub t_g: f64,
    pub pair: GatePair,
    /// `max |β_k^σ(t_g)|` over all modes and configurations.
    pub closure_residual: f64,
    pub delta_phi: f64,
    pub configurations: Vec<ConfigurationReport>,
    /// Peak field (V/m).
    pub e_max: f64,
    /// `max |Im β|` over configurations, modes and time.
    pub x_max: f64,
    /// `max |β|` over configurations, modes and time.
    pub x_max_abs: f64,
    pub fidelity: FidelityTerms,
}

impl GateReport {
    /// Largest residual phonon number `|β|²` of mode `k` over the listed configurations.
    pub fn residual_phonons(&self, sigmas: &[Sigma], k: usize) -> f64 {
        self.configurations
            .iter()
            .filter(|c| sigmas.contains(&c.sigma))
            .map(|c| c.final_beta[k].norm_sqr())
            .fold(0.0, f64::max)
    }

    pub fn configuration(&self, sigma: Sigma) -> &ConfigurationReport {
        &self.configurations[sigma.index()]
    }
}

/// Evaluates closure, phase, field and excursion figures of `waveform`
/// and the zero-temperature fidelity estimate.
pub fn gate_conditions(waveform: &Waveform, modes: &GateModes) -> GateReport {
    gate_conditions_with(waveform, modes, DEFAULT_TRAJECTORY_POINTS)
}

pub fn gate_conditions_with(waveform: &Waveform, modes: &GateModes, trajectory_samples: usize) -> GateReport {
    let record = trajectories(waveform, modes, trajectory_samples);
    report_from_record(waveform, modes, &record)
}

pub fn report_from_record(waveform: &Waveform, modes: &GateModes, record: &TrajectoryRecord) -> GateReport {
    let mut configurations = Vec::with_capacity(4);
    let mut closure: f64 = 0.0;
    let mut x_max: f64 = 0.0;
    let mut x_abs: f64 = 0.0;
    let mut dphi = 0.0;
    for sigma in Sigma::ALL {
        let s = sigma.index();
        for series in &record.beta[s] {
            for b in series {
                x_max = x_max.max(b.im.abs());
                x_abs = x_abs.max(b.norm());
            }
        }
        for b in &record.final_beta[s] {
            closure = closure.max(b.norm());
        }
        let phase: f64 = record.phases[s].iter().sum();
        dphi += sigma.phase_sign() * phase;
        configurations.push(ConfigurationReport {
            sigma,
            mode_frequencies: modes.of(sigma).iter().map(|m| m.frequency).collect(),
            final_beta: record.final_beta[s].clone(),
            mode_phases: record.phases[s].clone(),
            phase,
        });
    }
    let mut report = GateReport {
        t_g: waveform.t_g(),
        pair: modes.pair,
        closure_residual: closure,
        delta_phi: dphi,
        configurations,
        e_max: waveform.e_max(),
        x_max,
        x_max_abs: x_abs,
        fidelity: FidelityTerms { phase_error: 0.0, displacement_loss: 0.0, lifetime_loss: 0.0, fidelity: 1.0 },
    };
    report.fidelity = fidelity_estimate(&report, &modes.rydberg_state, waveform.t_g(), &[]);
    report
}

/// `exp(−2 t_g / τ)`: both gate ions spend the full gate in the Rydberg level.
pub fn lifetime_survival(t_g: f64, lifetime: f64) -> f64 {
    (-2.0 * t_g / lifetime).exp()
}

/// Product of phase, motional-overlap and lifetime factors, averaged over the
/// four configurations. `thermal_nbar[k]` is the mean occupation of mode `k`
/// (missing entries count as zero).
pub fn fidelity_estimate(report: &GateReport, state: &RydbergStateInfo, t_g: f64, thermal_nbar: &[f64]) -> FidelityTerms {
    let overlap: f64 = report
        .configurations
        .iter()
        .map(|c| {
            c.final_beta
                .iter()
                .enumerate()
                .map(|(k, b)| {
                    let nbar = thermal_nbar.get(k).copied().unwrap_or(0.0);
                    (-b.norm_sqr() * (2.0 * nbar + 1.0) / 2.0).exp()
                })
                .product::<f64>()
        })
        .sum::<f64>()
        / report.configurations.len().max(1) as f64;
    let f_disp = overlap.abs().min(1.0);
    let f_phase = ((report.delta_phi.abs() - std::f64::consts::PI) / 2.0).cos().powi(2);
    let f_life = lifetime_survival(t_g, state.lifetime);
    FidelityTerms {
        phase_error: 1.0 - f_phase,
        displacement_loss: 1.0 - f_disp,
        lifetime_loss: 1.0 - f_life,
        fidelity: f_phase * f_disp * f_life,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::phi1;
    use std::f64::consts::PI;

    fn two_ion_modes() -> GateModes {
        let pair = GatePair::new(0, 1, 2).unwrap();
        GateModes::new(2, pair, &IonSpecies::ca40(), &RydbergStateInfo::ca40_49s(), &TrapParameters::reference()).unwrap()
    }

    #[test]
    fn sigma_bookkeeping() {
        let pair = GatePair::new(1, 4, 6).unwrap();
        let s = pair.internal_states(Sigma::RG, 6);
        assert_eq!(s.iter().filter(|x| **x == InternalState::Rydberg).count(), 1);
        assert_eq!(s[1], InternalState::Rydberg);
        assert_eq!(pair.mirrored(6), GatePair { first: 1, second: 4 });
        assert!(GatePair::new(2, 2, 6).is_err());
        assert!(GatePair::new(0, 6, 6).is_err());
        let signs: f64 = Sigma::ALL.iter().map(|s| s.phase_sign()).sum();
        assert_eq!(signs, 0.0);
    }

    #[test]
    fn zero_field_gives_nothing() {
        let modes = two_ion_modes();
        let w = Waveform::zero(0.67e-6, 16).unwrap();
        let r = gate_conditions(&w, &modes);
        assert_eq!(r.closure_residual, 0.0);
        assert_eq!(r.delta_phi, 0.0);
        assert_eq!(r.x_max_abs, 0.0);
    }

    #[test]
    fn symmetric_configurations_leave_rock_mode_alone() {
        let modes = two_ion_modes();
        let w = Waveform::slices(0.67e-6, vec![30.0, -80.0, 55.0, 10.0, -3.0]).unwrap();
        let rec = trajectories(&w, &modes, 300);
        for sigma in [Sigma::GG, Sigma::RR] {
            assert!(rec.beta[sigma.index()][1].iter().all(|b| b.norm() < 1e-12));
        }
        assert!(rec.final_beta[Sigma::GR.index()][1].norm() > 1e-6);
    }

    #[test]
    fn constant_field_displacement_closed_form() {
        let modes = two_ion_modes();
        let m = modes.of(Sigma::GR)[0];
        let (e, t) = (40.0, 0.31e-6);
        let w = Waveform::slices(t, vec![e]).unwrap();
        let g = m.field_coupling(modes.charge);
        let expect = Complex64::new(0.0, -g * e) * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -m.frequency * t))
            / Complex64::new(0.0, m.frequency);
        let got = displacement(&w, &m, modes.charge, t);
        assert!((got - expect).norm() < 1e-12 * expect.norm());
        // same value via the stable φ1 form
        let alt = Complex64::new(0.0, -g * e * t) * phi1(-m.frequency * t);
        assert!((got - alt).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn phase_is_quadratic_in_amplitude() {
        let modes = two_ion_modes();
        let w = Waveform::slices(0.5e-6, vec![10.0, -20.0, 35.0, -5.0, 8.0, 1.0]).unwrap();
        let scaled = w.scaled(-3.0);
        for sigma in Sigma::ALL {
            let a = configuration_phase(&w, &modes, sigma);
            let b = configuration_phase(&scaled, &modes, sigma);
            assert!((b - 9.0 * a).abs() < 1e-13 * b.abs());
        }
        // Δφ is a cancelling sum, so only its absolute error is tiny
        let a = delta_phi(&w, &modes);
        let b = delta_phi(&scaled, &modes);
        let scale = configuration_phase(&scaled, &modes, Sigma::GG).abs();
        assert!((b - 9.0 * a).abs() < 1e-13 * scale);
    }

    #[test]
    fn trajectory_sampling_respects_fastest_mode() {
        let modes = two_ion_modes();
        let w = Waveform::slices(5e-6, vec![1.0]).unwrap();
        let rec = trajectories(&w, &modes, 10);
        let period = 2.0 * PI / modes.highest_frequency();
        assert!(rec.times.len() as f64 >= 200.0 * 5e-6 / period);
        assert_eq!(*rec.times.last().unwrap(), 5e-6);
    }

    #[test]
    fn lifetime_numbers() {
        assert!((lifetime_survival(0.67e-6, 6.2e-6) - 0.8057).abs() < 1e-4);
        assert!(((1.0 - lifetime_survival(0.1e-6, 6.2e-6)) - 0.032).abs() < 1e-3);
        assert!(((1.0 - lifetime_survival(2.5e-6, 190e-6)) - 0.026).abs() < 1e-3);
        assert!(((1.0 - lifetime_survival(0.67e-6, 190e-6)) - 0.0070).abs() < 1e-4);
    }

    #[test]
    fn perfect_gate_fidelity_is_lifetime_only() {
        let modes = two_ion_modes();
        let w = Waveform::zero(0.67e-6, 4).unwrap();
        let mut r = gate_conditions(&w, &modes);
        r.delta_phi = -PI;
        let f = fidelity_estimate(&r, &modes.rydberg_state, 0.67e-6, &[]);
        assert!(f.phase_error.abs() < 1e-15 && f.displacement_loss == 0.0);
        assert!((f.fidelity - 0.806).abs() < 1e-3);
    }

    #[test]
    fn thermal_occupation_increases_loss() {
        let modes = two_ion_modes();
        let w = Waveform::slices(0.67e-6, vec![0.5, -0.5, 0.2]).unwrap();
        let r = gate_conditions(&w, &modes);
        let cold = fidelity_estimate(&r, &modes.rydberg_state, r.t_g, &[]);
        let warm = fidelity_estimate(&r, &modes.rydberg_state, r.t_g, &[0.5, 0.5]);
        assert!(warm.displacement_loss > cold.displacement_loss);
        for v in [warm.phase_error, warm.displacement_loss, warm.lifetime_loss, warm.fidelity] {
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
