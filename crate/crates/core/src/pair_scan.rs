//! Gate synthesis for every ion pair of a crystal at a fixed gate time.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{GateModes, GatePair};
use crate::error::{Error, Result};
use crate::feasibility::{check, FeasibilityLimits, Verdict};
use crate::optimizer::{synthesize, Method, OptimizerOptions};
use crate::trap::{IonSpecies, RydbergStateInfo, TrapParameters};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub e_max: f64,
    pub x_max: f64,
    pub closure_residual: f64,
    pub delta_phi: f64,
    pub negative_phase: bool,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub pair: GatePair,
    pub outcome: Option<PairOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScanResult {
    pub n_ions: usize,
    pub t_g: f64,
    pub method: Method,
    /// Sorted by `(first, second)` with `first < second`.
    pub entries: Vec<PairEntry>,
}

impl PairScanResult {
    /// Entry of the unordered pair `{a, b}`.
    pub fn get(&self, a: usize, b: usize) -> Option<&PairEntry> {
        let (first, second) = (a.min(b), a.max(b));
        self.entries.iter().find(|e| e.pair.first == first && e.pair.second == second)
    }

    pub fn e_max(&self, a: usize, b: usize) -> Option<f64> {
        self.get(a, b)?.outcome.as_ref().map(|o| o.e_max)
    }

    pub fn max_e_max(&self) -> Option<f64> {
        self.entries.iter().filter_map(|e| e.outcome.as_ref()).map(|o| o.e_max).reduce(f64::max)
    }

    /// Largest relative difference of `e_max` between mirror-image pairs.
    pub fn mirror_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for e in &self.entries {
            let m = e.pair.mirrored(self.n_ions);
            if let (Some(a), Some(b)) = (self.e_max(e.pair.first, e.pair.second), self.e_max(m.first, m.second)) {
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
            }
        }
        worst
    }

    /// Symmetric `n_ions × n_ions` matrix of `e_max`; the diagonal and
    /// failed pairs are `None`.
    pub fn matrix(&self) -> Vec<Vec<Option<f64>>> {
        let mut m = vec![vec![None; self.n_ions]; self.n_ions];
        for e in &self.entries {
            if let Some(o) = &e.outcome {
                m[e.pair.first][e.pair.second] = Some(o.e_max);
                m[e.pair.second][e.pair.first] = Some(o.e_max);
            }
        }
        m
    }
}

/// All `N(N−1)/2` unordered pairs in `(first, second)` order.
pub fn all_pairs(n_ions: usize) -> Vec<GatePair> {
    (0..n_ions)
        .flat_map(|a| ((a + 1)..n_ions).map(move |b| GatePair { first: a, second: b }))
        .collect()
}

fn evaluate_pair(
    pair: GatePair,
    n_ions: usize,
    trap: &TrapParameters,
    species: &IonSpecies,
    state: &RydbergStateInfo,
    t_g: f64,
    method: Method,
    options: &OptimizerOptions,
    limits: &FeasibilityLimits,
) -> Result<PairOutcome> {
    let modes = GateModes::new(n_ions, pair, species, state, trap)?;
    let (best, report) = synthesize(&modes, t_g, method, options)?;
    Ok(PairOutcome {
        e_max: report.e_max,
        x_max: report.x_max,
        closure_residual: report.closure_residual,
        delta_phi: report.delta_phi,
        negative_phase: best.negative_phase,
        verdict: check(&report, limits),
    })
}

/// Optimises every pair independently and in parallel. A failing pair is
/// recorded with its error; the scan itself only fails on invalid input.
#[allow(clippy::too_many_arguments)]
pub fn scan(
    n_ions: usize,
    trap: &TrapParameters,
    species: &IonSpecies,
    state: &RydbergStateInfo,
    t_g: f64,
    method: Method,
    options: &OptimizerOptions,
    limits: &FeasibilityLimits,
) -> Result<PairScanResult> {
    if n_ions < 2 {
        return Err(Error::InvalidInput("a pair scan needs at least two ions".into()));
    }
    if !(t_g > 0.0 && t_g.is_finite()) {
        return Err(Error::InvalidInput("gate time must be positive".into()));
    }
    let entries = all_pairs(n_ions)
        .into_par_iter()
        .map(|pair| match evaluate_pair(pair, n_ions, trap, species, state, t_g, method, options, limits) {
            Ok(o) => PairEntry { pair, outcome: Some(o), error: None },
            Err(e) => PairEntry { pair, outcome: None, error: Some(e.to_string()) },
        })
        .collect();
    Ok(PairScanResult { n_ions, t_g, method, entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationClass {
    pub separation: usize,
    pub symmetric_pair: Option<GatePair>,
    /// The symmetric pair needs strictly less field than every other pair
    /// of the class (`None` when the class has no symmetric pair).
    pub symmetric_is_best: Option<bool>,
    pub mean_asymmetric_e_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRanking {
    /// Successful pairs by ascending `e_max`.
    pub order: Vec<(GatePair, f64)>,
    pub classes: Vec<SeparationClass>,
    pub symmetric_best_in_class: bool,
    /// Mean asymmetric `e_max` never decreases with separation.
    pub asymmetric_monotone_in_separation: bool,
}

pub fn is_mirror_symmetric(pair: GatePair, n_ions: usize) -> bool {
    pair.first + pair.second + 1 == n_ions
}

pub fn interaction_ranking(result: &PairScanResult) -> InteractionRanking {
    let mut order: Vec<(GatePair, f64)> = result
        .entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().map(|o| (e.pair, o.e_max)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut by_sep: BTreeMap<usize, Vec<(GatePair, f64)>> = BTreeMap::new();
    for &(p, e) in &order {
        by_sep.entry(p.separation()).or_default().push((p, e));
    }
    let classes: Vec<SeparationClass> = by_sep
        .iter()
        .map(|(&separation, members)| {
            let sym = members.iter().find(|(p, _)| is_mirror_symmetric(*p, result.n_ions)).copied();
            let others: Vec<f64> = members
                .iter()
                .filter(|(p, _)| !is_mirror_symmetric(*p, result.n_ions))
                .map(|(_, e)| *e)
                .collect();
            let symmetric_is_best = sym.map(|(_, es)| others.iter().all(|&e| es < e));
            let mean_asymmetric_e_max =
                (!others.is_empty()).then(|| others.iter().sum::<f64>() / others.len() as f64);
            SeparationClass { separation, symmetric_pair: sym.map(|(p, _)| p), symmetric_is_best, mean_asymmetric_e_max }
        })
        .collect();
    let symmetric_best_in_class = classes.iter().all(|c| c.symmetric_is_best != Some(false));
    let means: Vec<f64> = classes.iter().filter_map(|c| c.mean_asymmetric_e_max).collect();
    let asymmetric_monotone_in_separation = means.windows(2).all(|w| w[1] >= w[0]);
    InteractionRanking { order, classes, symmetric_best_in_class, asymmetric_monotone_in_separation }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Sigma;
    use std::f64::consts::PI;

    #[test]
    fn pair_enumeration() {
        let p = all_pairs(6);
        assert_eq!(p.len(), 15);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all_pairs(2), vec![GatePair { first: 0, second: 1 }]);
    }

    #[test]
    fn symmetric_pairs_of_six() {
        let sym: Vec<GatePair> = all_pairs(6).into_iter().filter(|p| is_mirror_symmetric(*p, 6)).collect();
        assert_eq!(sym.len(), 3);
        assert!(sym.iter().all(|p| p.mirrored(6) == *p));
    }

    #[test]
    fn two_ion_scan_matches_direct_synthesis() {
        let trap = TrapParameters::reference();
        let ion = IonSpecies::ca40();
        let s = RydbergStateInfo::ca40_49s();
        let opts = OptimizerOptions::default();
        let limits = FeasibilityLimits::for_state(&s);
        let r = scan(2, &trap, &ion, &s, 0.67e-6, Method::Slices, &opts, &limits).unwrap();
        assert_eq!(r.entries.len(), 1);
        let modes = GateModes::new(2, GatePair { first: 0, second: 1 }, &ion, &s, &trap).unwrap();
        let (_, rep) = synthesize(&modes, 0.67e-6, Method::Slices, &opts).unwrap();
        assert_eq!(r.e_max(1, 0).unwrap(), rep.e_max);
        let rank = interaction_ranking(&r);
        assert_eq!(rank.order.len(), 1);
        assert!(rank.symmetric_best_in_class);
    }

    #[test]
    fn failing_pairs_are_recorded() {
        // ω_z above the zigzag point of four ions: every pair fails
        let ion = IonSpecies::ca40();
        let trap = TrapParameters::reference();
        let s = RydbergStateInfo::ca40_49s();
        let r = scan(4, &trap, &ion, &s, 1e-6, Method::Slices, &OptimizerOptions::default(), &FeasibilityLimits::for_state(&s))
            .unwrap();
        assert_eq!(r.entries.len(), 6);
        assert!(r.entries.iter().all(|e| e.outcome.is_none() && e.error.is_some()));
    }

    #[test]
    fn symmetric_pair_leaves_odd_modes_alone() {
        let ion = IonSpecies::ca40();
        let trap = TrapParameters::reference().with_axial_frequency(&ion, 2.0 * PI * 2e6).unwrap();
        let s = RydbergStateInfo::ca40_49s();
        let modes = GateModes::new(6, GatePair::new(1, 4, 6).unwrap(), &ion, &s, &trap).unwrap();
        // mirror-symmetric configurations: the three odd modes feel
        // no uniform force
        for sigma in [Sigma::GG, Sigma::RR] {
            let ws: Vec<f64> = modes.of(sigma).iter().map(|m| m.w).collect();
            let odd = ws.iter().filter(|w| w.abs() < 1e-10).count();
            assert!(odd >= 3, "{sigma:?} {ws:?}");
        }
    }
}
