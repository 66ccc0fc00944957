//! Equilibrium configuration and state-dependent normal modes of a linear
//! ion crystal.
//!
//! Positions are found once from the bare axial frequency; the internal state
//! of each ion only enters through its local secular frequencies on the
//! diagonal of the Hessian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::constants::{coulomb_constant, HBAR};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::trap::{
    bare_squared, polarizability_shift_squared, shifted_frequencies, IonSpecies,
    RydbergStateInfo, TrapParameters,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InternalState {
    Ground,
    Rydberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    X,
    Y,
    Z,
}

impl Direction {
    fn axis(self) -> usize {
        match self {
            Direction::X => 0,
            Direction::Y => 1,
            Direction::Z => 2,
        }
    }

    pub fn is_transverse(self) -> bool {
        !matches!(self, Direction::Z)
    }
}

/// Per-ion internal labels of an N-ion crystal together with the species and
/// the Rydberg level used for excited ions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalState {
    pub internal: Vec<InternalState>,
    pub species: IonSpecies,
    pub rydberg_state: RydbergStateInfo,
}

impl CrystalState {
    pub fn new(
        internal: Vec<InternalState>,
        species: IonSpecies,
        rydberg_state: RydbergStateInfo,
    ) -> Result<Self> {
        if internal.is_empty() {
            return Err(Error::InvalidInput("crystal needs at least one ion".into()));
        }
        species.validate()?;
        rydberg_state.validate()?;
        Ok(Self { internal, species, rydberg_state })
    }

    pub fn all_ground(n_ions: usize, species: IonSpecies, rydberg_state: RydbergStateInfo) -> Result<Self> {
        Self::new(vec![InternalState::Ground; n_ions], species, rydberg_state)
    }

    pub fn n_ions(&self) -> usize {
        self.internal.len()
    }
}

/// Dimensionless equilibrium positions `u_n = z_n / l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPositions {
    pub u: Vec<f64>,
    /// Length scale `l` (m), `l³ = e² / (4π ε0 M ω_z²)`.
    pub length_scale: f64,
}

impl EquilibriumPositions {
    /// Largest absolute dimensionless force at the stored positions.
    pub fn residual(&self) -> f64 {
        axial_forces(&self.u).iter().fold(0.0, |m, f| m.max(f.abs()))
    }
}

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-13;

fn axial_forces(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|m| {
            let coulomb: f64 = (0..n)
                .filter(|&p| p != m)
                .map(|p| {
                    let d = u[m] - u[p];
                    d.signum() / (d * d)
                })
                .sum();
            u[m] - coulomb
        })
        .collect()
}

/// Sum over `p ≠ m` of `1/|u_m − u_p|³`, and the off-diagonal couplings.
fn coulomb_curvature(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut c = DMatrix::zeros(n, n);
    for m in 0..n {
        for p in 0..n {
            if p != m {
                let k = 1.0 / (u[m] - u[p]).abs().powi(3);
                c[(m, p)] = -2.0 * k;
                c[(m, m)] += 2.0 * k;
            }
        }
    }
    c
}

/// Equilibrium of the dimensionless axial potential via damped Newton
/// iteration, seeded with a uniform chain at the central-spacing estimate
/// `2.018 / N^0.559`.
pub fn equilibrium_positions(n_ions: usize, omega_z: f64, species: &IonSpecies) -> Result<EquilibriumPositions> {
    if n_ions == 0 {
        return Err(Error::InvalidInput("n_ions must be at least 1".into()));
    }
    if !(omega_z > 0.0 && omega_z.is_finite()) {
        return Err(Error::InvalidInput("axial frequency must be positive".into()));
    }
    species.validate()?;
    let length_scale = (species.charge * species.charge * coulomb_constant()
        / (species.mass * omega_z * omega_z))
        .cbrt();

    let spacing = 2.018 / (n_ions as f64).powf(0.559);
    let centre = 0.5 * (n_ions as f64 - 1.0);
    let mut u: Vec<f64> = (0..n_ions).map(|m| spacing * (m as f64 - centre)).collect();

    let norm = |f: &[f64]| f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut forces = axial_forces(&u);
    let mut converged = norm(&forces) < NEWTON_TOL;
    for _ in 0..NEWTON_MAX_ITER {
        if converged {
            break;
        }
        let jac = DMatrix::identity(n_ions, n_ions) + coulomb_curvature(&u);
        let rhs = DVector::from_vec(forces.clone());
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::NoConvergence { what: "equilibrium Newton step", iterations: 0 })?;
        let current = norm(&forces);
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x - damping * s).collect();
            let ordered = trial.windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let trial_forces = axial_forces(&trial);
                if norm(&trial_forces) < current || damping < 1e-6 {
                    u = trial;
                    forces = trial_forces;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::NoConvergence { what: "equilibrium line search", iterations: NEWTON_MAX_ITER });
            }
        }
        converged = norm(&forces) < NEWTON_TOL;
    }
    if !converged {
        return Err(Error::NoConvergence { what: "equilibrium positions", iterations: NEWTON_MAX_ITER });
    }
    // restore exact reflection symmetry and zero centre of charge
    let sym: Vec<f64> = (0..n_ions).map(|m| 0.5 * (u[m] - u[n_ions - 1 - m])).collect();
    Ok(EquilibriumPositions { u: sym, length_scale })
}

/// Squared local secular frequency of every ion along `axis`.
fn local_squares(axis: usize, crystal: &CrystalState, trap: &TrapParameters) -> Result<Vec<f64>> {
    let bare = bare_squared(trap, &crystal.species);
    let has_rydberg = crystal.internal.contains(&InternalState::Rydberg);
    let shift = if has_rydberg {
        // validates that the shifted trap is still confining
        shifted_frequencies(trap, &crystal.species, &crystal.rydberg_state)?;
        polarizability_shift_squared(trap, &crystal.species, crystal.rydberg_state.polarizability)
    } else {
        [0.0; 3]
    };
    Ok(crystal
        .internal
        .iter()
        .map(|s| match s {
            InternalState::Ground => bare[axis],
            InternalState::Rydberg => bare[axis] - shift[axis],
        })
        .collect())
}

/// Hessian `B^(j)` of the crystal along `direction`, in units of `M ω_z²`.
pub fn hessian(
    direction: Direction,
    crystal: &CrystalState,
    trap: &TrapParameters,
    positions: &EquilibriumPositions,
) -> Result<DMatrix<f64>> {
    let n = crystal.n_ions();
    if positions.u.len() != n {
        return Err(Error::InvalidInput(format!(
            "positions for {} ions supplied to a crystal of {n}",
            positions.u.len()
        )));
    }
    let bare = bare_squared(trap, &crystal.species);
    if bare.iter().any(|w2| *w2 <= 0.0) {
        return Err(Error::UnstableTrap("bare trap is not confining".into()));
    }
    let wz2 = bare[2];
    let local_z = local_squares(2, crystal, trap)?;
    let mut b_z = coulomb_curvature(&positions.u);
    for m in 0..n {
        b_z[(m, m)] += local_z[m] / wz2;
    }
    if direction == Direction::Z {
        return Ok(b_z);
    }
    let local_r = local_squares(direction.axis(), crystal, trap)?;
    let mut b = b_z * -0.5;
    for m in 0..n {
        b[(m, m)] += (2.0 * local_r[m] + local_z[m]) / (2.0 * wz2);
    }
    Ok(b)
}

/// Normal modes of one direction for one internal configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeStructure {
    pub direction: Direction,
    /// Mode angular frequencies ν_k (rad/s). Descending for transverse
    /// directions, ascending along the axis.
    pub frequencies: Vec<f64>,
    /// Dimensionless eigenvalues μ_k of the Hessian.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the normalised eigenvector of mode `k`.
    pub eigenvectors: DMatrix<f64>,
    pub internal: Vec<InternalState>,
    /// Bare axial frequency used as the frequency unit (rad/s).
    pub omega_z: f64,
}

impl ModeStructure {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }
}

fn sorted_eigen(matrix: &DMatrix<f64>, descending: bool) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (matrix + matrix.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = matrix.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        if descending { y.total_cmp(&x) } else { x.total_cmp(&y) }
    });
    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(lead) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)) {
            if v[lead] < 0.0 {
                v.neg_mut();
            }
        }
        vectors.set_column(k, &v);
        values.push(eig.eigenvalues[src]);
    }
    (values, vectors)
}

/// Eigen-decomposition of the Hessian with `ν_k = √μ_k ω_z`.
pub fn mode_structure(direction: Direction, crystal: &CrystalState, trap: &TrapParameters) -> Result<ModeStructure> {
    let omega_z = bare_squared(trap, &crystal.species)[2].sqrt();
    let positions = equilibrium_positions(crystal.n_ions(), omega_z, &crystal.species)?;
    let b = hessian(direction, crystal, trap, &positions)?;
    let (eigenvalues, eigenvectors) = sorted_eigen(&b, direction.is_transverse());
    if let Some((mode, &mu)) = eigenvalues.iter().enumerate().find(|(_, mu)| !(**mu > 0.0)) {
        return Err(Error::LinearInstability { mode, eigenvalue: mu });
    }
    let frequencies = eigenvalues.iter().map(|mu| mu.sqrt() * omega_z).collect();
    Ok(ModeStructure {
        direction,
        frequencies,
        eigenvalues,
        eigenvectors,
        internal: crystal.internal.clone(),
        omega_z,
    })
}

/// Uniform-force coupling `W_k = Σ_n b_kn` and ground-state length
/// `l_k = √(ħ / (M ν_k))` of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeForce {
    pub w: f64,
    pub l: f64,
}

pub fn mode_force_factors(modes: &ModeStructure, species: &IonSpecies) -> Vec<ModeForce> {
    (0..modes.n_modes())
        .map(|k| ModeForce {
            w: modes.eigenvectors.column(k).sum(),
            l: (HBAR / (species.mass * modes.frequencies[k])).sqrt(),
        })
        .collect()
}

/// Lowest eigenvalue of the all-ground transverse Hessian when ω_z is moved
/// to `√κ ω_x` at fixed ω_x.
fn lowest_transverse_eigenvalue(kappa: f64, n_ions: usize, trap: &TrapParameters, species: &IonSpecies) -> Result<f64> {
    let wx = bare_squared(trap, species)[0].sqrt();
    let tuned = trap.with_axial_frequency(species, wx * kappa.sqrt())?;
    let crystal = CrystalState::all_ground(n_ions, species.clone(), RydbergStateInfo::ca40_49s())?;
    let omega_z = bare_squared(&tuned, species)[2].sqrt();
    let positions = equilibrium_positions(n_ions, omega_z, species)?;
    let b = hessian(Direction::X, &crystal, &tuned, &positions)?;
    let sym = (&b + b.transpose()) * 0.5;
    Ok(SymmetricEigen::new(sym).eigenvalues.min())
}

/// Anisotropy `κ = ω_z²/ω_x²` at which the lowest transverse mode of the
/// all-ground chain softens to zero (onset of the zigzag).
pub fn critical_anisotropy(n_ions: usize, trap: &TrapParameters, species: &IonSpecies) -> Result<f64> {
    if n_ions < 2 {
        return Err(Error::InvalidInput("a single ion has no zigzag transition".into()));
    }
    let f = |kappa: f64| lowest_transverse_eigenvalue(kappa, n_ions, trap, species);
    let mut lo = 1e-3;
    if f(lo)? <= 0.0 {
        return Err(Error::NoConvergence { what: "critical anisotropy lower bracket", iterations: 0 });
    }
    let mut hi = 2.0 * lo;
    let mut tries = 0;
    while f(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 40 {
            return Err(Error::NoConvergence { what: "critical anisotropy upper bracket", iterations: tries });
        }
    }
    let root = bisect(f, lo, hi, 1e-13 * hi, 200)?;
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::angular_to_mhz;
    use crate::trap::bare_frequencies;
    use InternalState::{Ground as G, Rydberg as R};

    fn crystal(internal: Vec<InternalState>) -> CrystalState {
        CrystalState::new(internal, IonSpecies::ca40(), RydbergStateInfo::ca40_49s()).unwrap()
    }

    fn wz() -> f64 {
        bare_frequencies(&TrapParameters::reference(), &IonSpecies::ca40()).unwrap().omega_z
    }

    #[test]
    fn single_ion_sits_at_origin() {
        let eq = equilibrium_positions(1, wz(), &IonSpecies::ca40()).unwrap();
        assert_eq!(eq.u, vec![0.0]);
    }

    #[test]
    fn two_ion_closed_form() {
        let eq = equilibrium_positions(2, wz(), &IonSpecies::ca40()).unwrap();
        let half = 2f64.powf(-2.0 / 3.0);
        assert!((eq.u[0] + half).abs() < 1e-14);
        assert!((eq.u[1] - half).abs() < 1e-14);
        assert!(eq.residual() < 1e-12);
    }

    #[test]
    fn six_ion_chain_symmetric_and_balanced() {
        let eq = equilibrium_positions(6, wz(), &IonSpecies::ca40()).unwrap();
        assert!(eq.residual() < 1e-12);
        assert!(eq.u.windows(2).all(|w| w[1] > w[0]));
        for m in 0..6 {
            assert!((eq.u[m] + eq.u[5 - m]).abs() < 1e-13);
        }
        assert!(eq.u.iter().sum::<f64>().abs() < 1e-13);
    }

    #[test]
    fn larger_chains_converge() {
        for n in [3, 10, 20, 30] {
            let eq = equilibrium_positions(n, wz(), &IonSpecies::ca40()).unwrap();
            assert!(eq.residual() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn length_scale_is_microns() {
        let eq = equilibrium_positions(2, wz(), &IonSpecies::ca40()).unwrap();
        let sep = (eq.u[1] - eq.u[0]) * eq.length_scale;
        // two Ca+ at ~4 MHz axial sit a few microns apart
        assert!(sep > 2e-6 && sep < 4e-6, "{sep}");
    }

    #[test]
    fn two_ion_axial_hessian() {
        let c = crystal(vec![G, G]);
        let eq = equilibrium_positions(2, wz(), &c.species).unwrap();
        let b = hessian(Direction::Z, &c, &TrapParameters::reference(), &eq).unwrap();
        let d3 = (eq.u[1] - eq.u[0]).powi(3);
        let expect = [[1.0 + 2.0 / d3, -2.0 / d3], [-2.0 / d3, 1.0 + 2.0 / d3]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((b[(i, j)] - expect[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn hessians_exactly_symmetric() {
        let trap = TrapParameters::reference().with_axial_frequency(&IonSpecies::ca40(), 2.0 * std::f64::consts::PI * 2e6).unwrap();
        let c = crystal(vec![G, R, G, G, R, G]);
        let eq = equilibrium_positions(6, bare_squared(&trap, &c.species)[2].sqrt(), &c.species).unwrap();
        for dir in [Direction::X, Direction::Y, Direction::Z] {
            let b = hessian(dir, &c, &trap, &eq).unwrap();
            assert_eq!(b, b.transpose());
        }
    }

    #[test]
    fn ground_crystal_has_uniform_transverse_diagonal() {
        let c = crystal(vec![G, G, G, G]);
        let trap = TrapParameters::reference().with_axial_frequency(&c.species, 2.0 * std::f64::consts::PI * 2e6).unwrap();
        let eq = equilibrium_positions(4, bare_squared(&trap, &c.species)[2].sqrt(), &c.species).unwrap();
        let b = hessian(Direction::X, &c, &trap, &eq).unwrap();
        let eq_m = equilibrium_positions(4, 1.0, &c.species).unwrap();
        let _ = eq_m;
        // local terms equal; Coulomb row sums vanish, so the diagonal minus
        // the off-diagonal row sum is constant
        let row = |m: usize| b.row(m).sum();
        for m in 1..4 {
            assert!((row(m) - row(0)).abs() < 1e-12);
        }
    }

    #[test]
    fn table_one_untuned() {
        let trap = TrapParameters::reference();
        let cases = [
            (vec![G, G], [6.000, 4.514]),
            (vec![G, R], [5.974, 4.478]),
            (vec![R, G], [5.974, 4.478]),
            (vec![R, R], [5.947, 4.443]),
        ];
        for (internal, expect) in cases {
            let m = mode_structure(Direction::X, &crystal(internal.clone()), &trap).unwrap();
            for k in 0..2 {
                let got = angular_to_mhz(m.frequencies[k]);
                assert!((got - expect[k]).abs() < 1e-3, "{internal:?} k={k}: {got}");
            }
        }
    }

    #[test]
    fn com_mode_equals_single_ion_frequency() {
        let trap = TrapParameters::reference().with_axial_frequency(&IonSpecies::ca40(), 2.0 * std::f64::consts::PI * 2e6).unwrap();
        let wx = bare_frequencies(&trap, &IonSpecies::ca40()).unwrap().omega_x;
        for n in [2, 3, 6] {
            let m = mode_structure(Direction::X, &crystal(vec![G; n]), &trap).unwrap();
            assert!((m.frequencies[0] / wx - 1.0).abs() < 1e-12);
            let v = m.eigenvector(0);
            for c in &v {
                assert!((c - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_residual_and_orthonormality() {
        let trap = TrapParameters::reference().with_axial_frequency(&IonSpecies::ca40(), 2.0 * std::f64::consts::PI * 2e6).unwrap();
        let c = crystal(vec![G, R, G, G, R, G]);
        let m = mode_structure(Direction::X, &c, &trap).unwrap();
        let eq = equilibrium_positions(6, m.omega_z, &c.species).unwrap();
        let b = hessian(Direction::X, &c, &trap, &eq).unwrap();
        for k in 0..6 {
            let v = m.eigenvectors.column(k);
            let r = &b * v - v * m.eigenvalues[k];
            assert!(r.norm() < 1e-10);
        }
        let gram = m.eigenvectors.transpose() * &m.eigenvectors;
        assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-12);
    }

    #[test]
    fn force_factors_two_ions() {
        let trap = TrapParameters::reference();
        let ion = IonSpecies::ca40();
        let gg = mode_structure(Direction::X, &crystal(vec![G, G]), &trap).unwrap();
        let f = mode_force_factors(&gg, &ion);
        assert!((f[0].w - 2f64.sqrt()).abs() < 1e-14);
        assert!(f[1].w.abs() < 1e-14);
        let gr = mode_structure(Direction::X, &crystal(vec![G, R]), &trap).unwrap();
        let f = mode_force_factors(&gr, &ion);
        assert!(f[1].w.abs() > 1e-3);
        let expect_l = (HBAR / (ion.mass * gr.frequencies[0])).sqrt();
        assert_eq!(f[0].l, expect_l);
    }

    #[test]
    fn two_ion_critical_anisotropy_is_one() {
        let k = critical_anisotropy(2, &TrapParameters::reference(), &IonSpecies::ca40()).unwrap();
        assert!((k - 1.0).abs() < 1e-9, "{k}");
    }

    #[test]
    fn critical_anisotropy_matches_coulomb_matrix_oracle() {
        // closed form: B_x = I/κ − C/2 with C the Coulomb curvature, so κ_crit = 2/λ_max(C)
        let ion = IonSpecies::ca40();
        for n in [3, 4, 6] {
            let eq = equilibrium_positions(n, 1.0, &ion).unwrap();
            let c = coulomb_curvature(&eq.u);
            let lmax = SymmetricEigen::new(c).eigenvalues.max();
            let oracle = 2.0 / lmax;
            let k = critical_anisotropy(n, &TrapParameters::reference(), &ion).unwrap();
            assert!((k / oracle - 1.0).abs() < 1e-9, "N={n}: {k} vs {oracle}");
        }
    }

    #[test]
    fn bracketing_around_critical_point() {
        let ion = IonSpecies::ca40();
        let trap = TrapParameters::reference();
        let kc = critical_anisotropy(6, &trap, &ion).unwrap();
        let wx = bare_frequencies(&trap, &ion).unwrap().omega_x;
        let at = |f: f64| {
            let t = trap.with_axial_frequency(&ion, wx * (f * kc).sqrt()).unwrap();
            mode_structure(Direction::X, &crystal(vec![G; 6]), &t)
        };
        assert!(at(0.99).is_ok());
        assert!(matches!(at(1.01), Err(Error::LinearInstability { .. })));
    }

    #[test]
    fn weak_axial_limit_decouples() {
        let ion = IonSpecies::ca40();
        let trap = TrapParameters::reference();
        let wx = bare_frequencies(&trap, &ion).unwrap().omega_x;
        let t = trap.with_axial_frequency(&ion, wx * 1e-3).unwrap();
        let m = mode_structure(Direction::X, &crystal(vec![G; 4]), &t).unwrap();
        for nu in &m.frequencies {
            assert!((nu / wx - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn reversal_symmetry_for_palindromic_states() {
        let trap = TrapParameters::reference().with_axial_frequency(&IonSpecies::ca40(), 2.0 * std::f64::consts::PI * 2e6).unwrap();
        let a = mode_structure(Direction::X, &crystal(vec![G, R, G, G, G, R]), &trap).unwrap();
        let b = mode_structure(Direction::X, &crystal(vec![R, G, G, G, R, G]), &trap).unwrap();
        for (x, y) in a.frequencies.iter().zip(&b.frequencies) {
            assert!((x / y - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rydberg_never_raises_transverse_frequencies() {
        let trap = TrapParameters::reference().with_axial_frequency(&IonSpecies::ca40(), 2.0 * std::f64::consts::PI * 2e6).unwrap();
        let ground = mode_structure(Direction::X, &crystal(vec![G; 6]), &trap).unwrap();
        for j in 0..6 {
            let mut s = vec![G; 6];
            s[j] = R;
            let excited = mode_structure(Direction::X, &crystal(s), &trap).unwrap();
            for (e, g) in excited.frequencies.iter().zip(&ground.frequencies) {
                assert!(e <= g);
            }
        }
    }
}
