//! Closed-form displacements and phases against adaptive quadrature.

mod common;

use common::{abs_integral, random_waveform, two_ion_modes, Adaptive};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rykick::dynamics::{delta_phi, displacement, geometric_phase, GateModes, GatePair, Sigma};
use rykick::optimizer::{build_closure_system, null_space, phase_matrix, Method, OptimizerOptions};
use rykick::scenario::Scenario;
use rykick::waveform::Waveform;

const T_G: f64 = 0.8e-6;

#[test]
fn displacement_matches_quadrature_on_random_waveforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7a);
    let quad = Adaptive::default();
    let modes = two_ion_modes();
    let mode = modes.couplings[0][0];
    let g = mode.field_coupling(modes.charge);
    for case in 0..120 {
        let w = random_waveform(&mut rng, T_G);
        let nu: f64 = rng.random_range(1e6..5e7);
        let t = if case % 3 == 0 { T_G } else { rng.random_range(0.05..1.0) * T_G };
        let m = rykick::dynamics::ModeCoupling { frequency: nu, ..mode };
        let closed = displacement(&w, &m, modes.charge, t);
        let integrand = |tau: f64| Complex64::from_polar(w.sample(tau), -nu * tau);
        let oracle = quad.over_waveform(&w, &integrand, t, 1e-14 * abs_integral(&w)) * Complex64::new(0.0, -g);
        let scale = g * abs_integral(&w);
        assert!((closed - oracle).norm() < 1e-10 * scale, "case {case}: {closed} vs {oracle}");
    }
}

/// `∫_0^T E(τ) ∫_0^τ E(τ') sin(ν(τ' − τ)) dτ' dτ` with both integrals done
/// numerically: the inner one through running cos/sin moments.
fn nested_phase_oracle(w: &Waveform, nu: f64, quad: &Adaptive) -> f64 {
    let scale = abs_integral(w);
    let tol = 1e-15 * scale;
    let edges = common::edges(w, w.t_g());
    let inner = |tau: f64| -> Complex64 {
        // ∫_0^τ E(τ') e^{iντ'} dτ'
        quad.over_waveform(w, &|s: f64| Complex64::from_polar(w.sample(s), nu * s), tau, tol)
    };
    // sin(ν(τ'−τ)) = Im(e^{iντ'} e^{−iντ})
    let outer = |tau: f64| -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        w.sample(tau) * (inner(tau) * Complex64::from_polar(1.0, -nu * tau)).im
    };
    edges.windows(2).map(|e| quad.real(&outer, e[0], e[1], tol * scale)).sum()
}

#[test]
fn phase_kernel_matches_nested_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a5e);
    let quad = Adaptive::default();
    for case in 0..12 {
        let w = if case % 2 == 0 {
            Waveform::slices(T_G, (0..rng.random_range(3..9)).map(|_| rng.random_range(-50.0..50.0)).collect()).unwrap()
        } else {
            let n = rng.random_range(1..4);
            Waveform::fourier(
                T_G,
                (0..n).map(|_| rng.random_range(-50.0..50.0)).collect(),
                (0..n).map(|_| rng.random_range(-50.0..50.0)).collect(),
                false,
            )
            .unwrap()
        };
        let nu: f64 = rng.random_range(5e6..4e7);
        let closed = w.phase_kernel(nu);
        let oracle = nested_phase_oracle(&w, nu, &quad);
        let scale = abs_integral(&w).powi(2);
        assert!((closed - oracle).abs() < 1e-10 * scale, "case {case}: {closed} vs {oracle}");
    }
}

/// Worst disagreement relative to `|Δφ|` and relative to the scale of the
/// configuration phases that cancel inside it.
fn form_vs_direct(modes: &GateModes, t_g: f64, rng: &mut ChaCha8Rng, cases: usize) -> (f64, f64) {
    let opts = OptimizerOptions { n_t: 96, ..Default::default() };
    let system = build_closure_system(modes, t_g, Method::Slices, &opts).unwrap();
    let basis = null_space(&system, opts.svd_tolerance).unwrap();
    let form = phase_matrix(&basis, modes);
    let (mut rel, mut rel_scale): (f64, f64) = (0.0, 0.0);
    for _ in 0..cases {
        let c: Vec<f64> = (0..basis.dimension()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = basis.combine(&c).unwrap();
        let direct = delta_phi(&w, modes);
        let scale: f64 = Sigma::ALL
            .iter()
            .flat_map(|&s| modes.of(s).iter().map(|m| geometric_phase(&w, m, modes.charge).abs()))
            .sum();
        let err = (form.evaluate(&c) - direct).abs();
        rel = rel.max(err / direct.abs());
        rel_scale = rel_scale.max(err / scale);
    }
    (rel, rel_scale)
}

#[test]
fn quadratic_form_matches_direct_phase_on_random_null_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let two = two_ion_modes();
    for t_g in [0.5e-6, 0.67e-6, 1.3e-6] {
        let (worst, _) = form_vs_direct(&two, t_g, &mut rng, 50);
        assert!(worst < 1e-9, "t_g {t_g}: {worst:e}");
    }
    let six = Scenario::six_ion().unwrap();
    let modes = GateModes::new(6, GatePair::new(0, 2, 6).unwrap(), &six.species, &six.state, &six.trap).unwrap();
    // spectator modes make Δφ a small difference of large phases; the
    // agreement is then limited by rounding of the cancelling terms
    let (worst, worst_scale) = form_vs_direct(&modes, 2.5e-6, &mut rng, 50);
    assert!(worst_scale < 1e-13, "six ions: {worst:e} of Δφ, {worst_scale:e} of the phase scale");
}

#[test]
fn configuration_phase_is_the_sum_of_mode_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let modes = two_ion_modes();
    let w = random_waveform(&mut rng, T_G);
    for sigma in Sigma::ALL {
        let total: f64 = modes.of(sigma).iter().map(|m| geometric_phase(&w, m, modes.charge)).sum();
        assert_eq!(total, rykick::dynamics::configuration_phase(&w, &modes, sigma));
    }
}
