//! Named parameter sets used by the reproduction pipelines.

use serde::{Deserialize, Serialize};

use crate::constants::mhz_to_angular;
use crate::crystal::critical_anisotropy;
use crate::error::Result;
use crate::kick::{tune_commensurate, CommensurateRatio};
use crate::trap::{bare_squared, IonSpecies, RydbergStateInfo, TrapParameters};

/// Axial frequency of the six-ion crystal (MHz). The reference trap is past
/// the zigzag point for six ions; at fixed ω_x this puts the chain at 96% of
/// its critical anisotropy.
pub const SIX_ION_AXIAL_MHZ: f64 = 2.0;

/// Rock/COM ratio of the tuned two-ion trap.
pub const TUNED_RATIO: (u32, u32) = (3, 4);

/// Everything needed to build a crystal: trap, species and gate level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub trap: TrapParameters,
    pub species: IonSpecies,
    pub state: RydbergStateInfo,
    pub n_ions: usize,
}

impl Scenario {
    pub fn new(name: &str, trap: TrapParameters, species: IonSpecies, state: RydbergStateInfo, n_ions: usize) -> Self {
        Self { name: name.to_string(), trap, species, state, n_ions }
    }

    /// Two ions in the reference trap.
    pub fn two_ion_reference() -> Self {
        Self::new("two-ion-reference", TrapParameters::reference(), IonSpecies::ca40(), RydbergStateInfo::ca40_49s(), 2)
    }

    /// Two ions with ω_z moved so that `4 ν_rock = 3 ν_com` in the
    /// one-excited configuration.
    pub fn two_ion_tuned() -> Result<Self> {
        let base = Self::two_ion_reference();
        let trap = tuned_trap(&base.trap, &base.species, &base.state)?;
        Ok(Self { name: "two-ion-tuned".into(), trap, ..base })
    }

    /// Six ions at the axial frequency [`SIX_ION_AXIAL_MHZ`], ω_x unchanged.
    pub fn six_ion() -> Result<Self> {
        let base = Self::two_ion_reference();
        let trap = base.trap.with_axial_frequency(&base.species, mhz_to_angular(SIX_ION_AXIAL_MHZ))?;
        Ok(Self { name: "six-ion".into(), trap, n_ions: 6, ..base })
    }

    /// `ω_z²/ω_x²` of the bare trap.
    pub fn anisotropy(&self) -> f64 {
        let [wx2, _, wz2] = bare_squared(&self.trap, &self.species);
        wz2 / wx2
    }

    /// Anisotropy as a fraction of the zigzag threshold of this crystal.
    pub fn anisotropy_margin(&self) -> Result<f64> {
        Ok(self.anisotropy() / critical_anisotropy(self.n_ions, &self.trap, &self.species)?)
    }
}

pub fn tuned_trap(trap: &TrapParameters, species: &IonSpecies, state: &RydbergStateInfo) -> Result<TrapParameters> {
    tune_commensurate(trap, species, state, CommensurateRatio::new(TUNED_RATIO.0, TUNED_RATIO.1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular_to_mhz;

    #[test]
    fn six_ion_trap_sits_below_zigzag() {
        let s = Scenario::six_ion().unwrap();
        let [wx2, _, wz2] = bare_squared(&s.trap, &s.species);
        assert!((angular_to_mhz(wx2.sqrt()) - 6.0).abs() < 1e-3);
        assert!((angular_to_mhz(wz2.sqrt()) - SIX_ION_AXIAL_MHZ).abs() < 1e-9);
        let m = s.anisotropy_margin().unwrap();
        assert!(m > 0.9 && m < 1.0, "{m}");
    }

    #[test]
    fn reference_trap_is_past_zigzag_for_six() {
        let s = Scenario { n_ions: 6, ..Scenario::two_ion_reference() };
        assert!(s.anisotropy_margin().unwrap() > 1.0);
    }

    #[test]
    fn tuned_trap_keeps_transverse_confinement() {
        let base = Scenario::two_ion_reference();
        let t = Scenario::two_ion_tuned().unwrap();
        let a = bare_squared(&base.trap, &base.species)[0];
        let b = bare_squared(&t.trap, &t.species)[0];
        assert!((a - b).abs() / a < 1e-12);
        assert!(t.anisotropy() != base.anisotropy());
    }
}
