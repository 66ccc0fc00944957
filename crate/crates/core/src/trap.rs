//! Pseudopotential secular frequencies of a single ion, with and without the
//! polarizability shift of a Rydberg level.

use serde::{Deserialize, Serialize};

use crate::constants::{mhz_to_angular, AMU, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};

/// Electrode parameters of a linear Paul trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParameters {
    /// Static field gradient (V/m²).
    pub gamma_dc: f64,
    /// rf field gradient (V/m²).
    pub gamma_rf: f64,
    /// Radial asymmetry of the dc confinement.
    pub epsilon: f64,
    /// rf drive angular frequency (rad/s).
    pub omega_rf: f64,
}

impl TrapParameters {
    pub fn new(gamma_dc: f64, gamma_rf: f64, epsilon: f64, omega_rf: f64) -> Result<Self> {
        let trap = Self { gamma_dc, gamma_rf, epsilon, omega_rf };
        trap.validate()?;
        Ok(trap)
    }

    /// Construct and check that the pseudopotential is confining for `ion`.
    pub fn for_ion(
        gamma_dc: f64,
        gamma_rf: f64,
        epsilon: f64,
        omega_rf: f64,
        ion: &IonSpecies,
    ) -> Result<Self> {
        let trap = Self::new(gamma_dc, gamma_rf, epsilon, omega_rf)?;
        bare_frequencies(&trap, ion)?;
        Ok(trap)
    }

    /// Operating point used throughout the examples:
    /// {6.406e7 V/m², 1.123e9 V/m², 0.400, 2π × 14.135 MHz}.
    pub fn reference() -> Self {
        Self {
            gamma_dc: 6.406e7,
            gamma_rf: 1.123e9,
            epsilon: 0.400,
            omega_rf: mhz_to_angular(14.135),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.gamma_dc, self.gamma_rf, self.epsilon, self.omega_rf]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("trap parameters must be finite".into()));
        }
        if self.gamma_dc <= 0.0 || self.gamma_rf <= 0.0 || self.omega_rf <= 0.0 {
            return Err(Error::InvalidInput(
                "gamma_dc, gamma_rf and omega_rf must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Return parameters with the bare axial frequency moved to `omega_z`
    /// while the bare x frequency stays where it is: γ_dc follows from ω_z and
    /// γ_rf is re-solved to hold ω_x.
    pub fn with_axial_frequency(&self, ion: &IonSpecies, omega_z: f64) -> Result<Self> {
        if !(omega_z > 0.0 && omega_z.is_finite()) {
            return Err(Error::InvalidInput("target axial frequency must be positive".into()));
        }
        let [wx2, _, _] = bare_squared(self, ion);
        if wx2 <= 0.0 {
            return Err(Error::UnstableTrap("reference trap is not confining in x".into()));
        }
        let q_over_m = ion.charge / ion.mass;
        let gamma_dc = omega_z * omega_z / (4.0 * q_over_m);
        let rf_term = wx2 + 2.0 * q_over_m * gamma_dc * (1.0 + self.epsilon);
        let gamma_rf = (rf_term / 2.0).sqrt() * self.omega_rf / q_over_m;
        Self::for_ion(gamma_dc, gamma_rf, self.epsilon, self.omega_rf, ion)
    }
}

/// Properties of one Rydberg level used as the gate state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RydbergStateInfo {
    pub label: String,
    pub principal_n: u32,
    /// Static polarizability (C m²/V). Positive values lower the trap frequency.
    pub polarizability: f64,
    /// Radiative lifetime (s).
    pub lifetime: f64,
    /// Field at which the admixture of neighbouring levels reaches the
    /// acceptable limit (V/m).
    pub it_field_limit: f64,
}

impl RydbergStateInfo {
    pub fn new(
        label: impl Into<String>,
        principal_n: u32,
        polarizability: f64,
        lifetime: f64,
        it_field_limit: f64,
    ) -> Result<Self> {
        let state = Self {
            label: label.into(),
            principal_n,
            polarizability,
            lifetime,
            it_field_limit,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.principal_n < 10 {
            return Err(Error::InvalidInput(format!(
                "principal quantum number {} below 10",
                self.principal_n
            )));
        }
        if !(self.polarizability >= 0.0 && self.polarizability.is_finite()) {
            return Err(Error::InvalidInput(
                "polarizability must be finite and non-negative".into(),
            ));
        }
        if !(self.lifetime > 0.0 && self.lifetime.is_finite()) {
            return Err(Error::InvalidInput("lifetime must be positive".into()));
        }
        if !(self.it_field_limit > 0.0 && self.it_field_limit.is_finite()) {
            return Err(Error::InvalidInput("it_field_limit must be positive".into()));
        }
        Ok(())
    }

    /// ⁴⁰Ca⁺ 49S₁/₂: α = 1.3e-30 C m²/V, τ = 6.2 µs.
    ///
    /// The field limit is 150 V/m × √(10/3) ≈ 273.9 V/m: 150 V/m corresponds to
    /// a 3 % admixture and the admixture grows as E². It is a derived estimate.
    pub fn ca40_49s() -> Self {
        Self {
            label: "49S".into(),
            principal_n: 49,
            polarizability: 1.3e-30,
            lifetime: 6.2e-6,
            it_field_limit: 150.0 * (10.0f64 / 3.0).sqrt(),
        }
    }
}

/// An ion species in the trap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    /// Mass (kg).
    pub mass: f64,
    /// Charge (C).
    pub charge: f64,
    pub rydberg_states: Vec<RydbergStateInfo>,
}

impl IonSpecies {
    pub fn new(mass: f64, charge: f64, rydberg_states: Vec<RydbergStateInfo>) -> Result<Self> {
        let ion = Self { mass, charge, rydberg_states };
        ion.validate()?;
        Ok(ion)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput("ion mass must be positive".into()));
        }
        if !(self.charge > 0.0 && self.charge.is_finite()) {
            return Err(Error::InvalidInput("ion charge must be positive".into()));
        }
        self.rydberg_states.iter().try_for_each(RydbergStateInfo::validate)
    }

    /// Singly charged calcium at the standard atomic weight 40.078 u, with the
    /// 49S level.
    pub fn ca40() -> Self {
        Self {
            mass: 40.078 * AMU,
            charge: ELEMENTARY_CHARGE,
            rydberg_states: vec![RydbergStateInfo::ca40_49s()],
        }
    }

    pub fn state(&self, label: &str) -> Option<&RydbergStateInfo> {
        self.rydberg_states.iter().find(|s| s.label == label)
    }
}

/// Secular angular frequencies (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecularFrequencies {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Whether the polarizability shift has been applied.
    pub shifted: bool,
}

impl SecularFrequencies {
    fn from_squares(sq: [f64; 3], shifted: bool) -> Result<Self> {
        const AXES: [&str; 3] = ["x", "y", "z"];
        for (axis, value) in AXES.iter().zip(sq) {
            if !(value > 0.0) {
                let which = if shifted { "shifted" } else { "bare" };
                return Err(Error::UnstableTrap(format!(
                    "{which} squared frequency along {axis} is {value:.6e}"
                )));
            }
        }
        Ok(Self {
            omega_x: sq[0].sqrt(),
            omega_y: sq[1].sqrt(),
            omega_z: sq[2].sqrt(),
            shifted,
        })
    }
}

/// Squared bare secular frequencies [ω_x², ω_y², ω_z²]; may be non-positive.
pub fn bare_squared(trap: &TrapParameters, ion: &IonSpecies) -> [f64; 3] {
    let q_over_m = ion.charge / ion.mass;
    let rf = 2.0 * (q_over_m * trap.gamma_rf / trap.omega_rf).powi(2);
    let dc = 2.0 * q_over_m * trap.gamma_dc;
    [
        rf - dc * (1.0 + trap.epsilon),
        rf - dc * (1.0 - trap.epsilon),
        4.0 * q_over_m * trap.gamma_dc,
    ]
}

/// Reduction of the squared frequencies [x, y, z] caused by polarizability `alpha`.
pub fn polarizability_shift_squared(trap: &TrapParameters, ion: &IonSpecies, alpha: f64) -> [f64; 3] {
    let a = alpha / ion.mass;
    let g_dc2 = trap.gamma_dc * trap.gamma_dc;
    let g_rf2 = trap.gamma_rf * trap.gamma_rf;
    [
        a * (g_rf2 + 2.0 * g_dc2 * (1.0 + trap.epsilon).powi(2)),
        a * (g_rf2 + 2.0 * g_dc2 * (1.0 - trap.epsilon).powi(2)),
        16.0 * a * g_dc2,
    ]
}

pub fn bare_frequencies(trap: &TrapParameters, ion: &IonSpecies) -> Result<SecularFrequencies> {
    SecularFrequencies::from_squares(bare_squared(trap, ion), false)
}

/// Secular frequencies of an ion excited to `state`.
pub fn shifted_frequencies(
    trap: &TrapParameters,
    ion: &IonSpecies,
    state: &RydbergStateInfo,
) -> Result<SecularFrequencies> {
    let bare = bare_squared(trap, ion);
    SecularFrequencies::from_squares(bare, false)?;
    let shift = polarizability_shift_squared(trap, ion, state.polarizability);
    let sq = [bare[0] - shift[0], bare[1] - shift[1], bare[2] - shift[2]];
    SecularFrequencies::from_squares(sq, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular_to_mhz;

    fn ion() -> IonSpecies {
        IonSpecies::ca40()
    }

    #[test]
    fn reference_trap_bare_frequencies() {
        let f = bare_frequencies(&TrapParameters::reference(), &ion()).unwrap();
        assert!((angular_to_mhz(f.omega_x) - 6.000).abs() < 1e-3);
        assert!((angular_to_mhz(f.omega_y) - 6.500).abs() < 1e-3);
        assert!((angular_to_mhz(f.omega_z) - 3.953).abs() < 1e-3);
        assert!(!f.shifted);
    }

    #[test]
    fn symmetric_trap_has_degenerate_radial_modes() {
        let trap = TrapParameters { epsilon: 0.0, ..TrapParameters::reference() };
        let f = bare_frequencies(&trap, &ion()).unwrap();
        assert_eq!(f.omega_x, f.omega_y);
    }

    #[test]
    fn doubling_gamma_dc_scales_axial_by_sqrt2() {
        let base = TrapParameters::reference();
        let doubled = TrapParameters { gamma_dc: 2.0 * base.gamma_dc, ..base };
        let a = bare_frequencies(&base, &ion()).unwrap().omega_z;
        let b = bare_frequencies(&doubled, &ion()).unwrap().omega_z;
        assert!((b / a - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn radial_sum_independent_of_asymmetry() {
        let ion = ion();
        let base = TrapParameters::reference();
        let sum = |eps: f64| {
            let s = bare_squared(&TrapParameters { epsilon: eps, ..base }, &ion);
            s[0] + s[1]
        };
        let reference = sum(0.0);
        for eps in [-0.3, 0.1, 0.4, 0.9] {
            assert!(((sum(eps) - reference) / reference).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_polarizability_is_bitwise_bare() {
        let trap = TrapParameters::reference();
        let state = RydbergStateInfo { polarizability: 0.0, ..RydbergStateInfo::ca40_49s() };
        let bare = bare_frequencies(&trap, &ion()).unwrap();
        let shifted = shifted_frequencies(&trap, &ion(), &state).unwrap();
        assert_eq!(bare.omega_x.to_bits(), shifted.omega_x.to_bits());
        assert_eq!(bare.omega_y.to_bits(), shifted.omega_y.to_bits());
        assert_eq!(bare.omega_z.to_bits(), shifted.omega_z.to_bits());
        assert!(shifted.shifted);
    }

    #[test]
    fn transverse_shift_for_49s() {
        let trap = TrapParameters::reference();
        let bare = bare_frequencies(&trap, &ion()).unwrap();
        let shifted = shifted_frequencies(&trap, &ion(), &RydbergStateInfo::ca40_49s()).unwrap();
        let dx_khz = angular_to_mhz(bare.omega_x - shifted.omega_x) * 1e3;
        assert!((dx_khz - 53.0).abs() < 0.05 * 53.0, "{dx_khz}");
    }

    #[test]
    fn shift_is_monotone_in_polarizability() {
        let trap = TrapParameters::reference();
        let mut last = [0.0; 3];
        for k in 1..20 {
            let state = RydbergStateInfo {
                polarizability: k as f64 * 2e-31,
                ..RydbergStateInfo::ca40_49s()
            };
            let bare = bare_frequencies(&trap, &ion()).unwrap();
            let s = shifted_frequencies(&trap, &ion(), &state).unwrap();
            let d = [bare.omega_x - s.omega_x, bare.omega_y - s.omega_y, bare.omega_z - s.omega_z];
            for i in 0..3 {
                assert!(d[i] > last[i]);
            }
            last = d;
        }
    }

    #[test]
    fn huge_polarizability_destabilises() {
        let state = RydbergStateInfo { polarizability: 1e-27, ..RydbergStateInfo::ca40_49s() };
        let err = shifted_frequencies(&TrapParameters::reference(), &ion(), &state).unwrap_err();
        assert!(matches!(err, Error::UnstableTrap(_)));
    }

    #[test]
    fn weak_rf_is_unstable() {
        let err = TrapParameters::for_ion(6.406e7, 1e8, 0.4, mhz_to_angular(14.135), &ion())
            .unwrap_err();
        assert!(matches!(err, Error::UnstableTrap(_)));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(TrapParameters::new(-1.0, 1e9, 0.0, 1e8).is_err());
        assert!(IonSpecies::new(-1.0, ELEMENTARY_CHARGE, vec![]).is_err());
        assert!(RydbergStateInfo::new("5S", 5, 1e-30, 1e-6, 100.0).is_err());
        assert!(RydbergStateInfo::new("49S", 49, 1e-30, 0.0, 100.0).is_err());
    }

    #[test]
    fn axial_retune_keeps_radial_frequency() {
        let ion = ion();
        let trap = TrapParameters::reference();
        let target = mhz_to_angular(2.0);
        let tuned = trap.with_axial_frequency(&ion, target).unwrap();
        let a = bare_frequencies(&trap, &ion).unwrap();
        let b = bare_frequencies(&tuned, &ion).unwrap();
        assert!((b.omega_z / target - 1.0).abs() < 1e-13);
        assert!((b.omega_x / a.omega_x - 1.0).abs() < 1e-13);
    }
}
