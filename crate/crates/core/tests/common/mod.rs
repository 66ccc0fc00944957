//! Shared helpers: an adaptive quadrature oracle independent of the closed
//! forms, and seeded random waveforms.
#![allow(dead_code)]

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rykick::dynamics::{GateModes, GatePair};
use rykick::trap::{IonSpecies, RydbergStateInfo, TrapParameters};
use rykick::waveform::Waveform;

/// Adaptive bisection with a 10-point Gauss-Legendre rule, refined until the
/// two-panel estimate agrees with the one-panel estimate to `tol`.
pub struct Adaptive {
    rule: GaussLegendre,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self { rule: GaussLegendre::new(NonZeroUsize::new(10).unwrap()) }
    }
}

impl Adaptive {
    pub fn real<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, tol: f64) -> f64 {
        let whole = self.rule.integrate(a, b, f);
        self.refine(f, a, b, whole, tol, 0)
    }

    fn refine<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(a, m, f);
        let right = self.rule.integrate(m, b, f);
        if (left + right - whole).abs() <= tol || depth > 40 {
            return left + right;
        }
        self.refine(f, a, m, left, 0.5 * tol, depth + 1) + self.refine(f, m, b, right, 0.5 * tol, depth + 1)
    }

    pub fn complex<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
        Complex64::new(self.real(&|t| f(t).re, a, b, tol), self.real(&|t| f(t).im, a, b, tol))
    }

    /// Integral over `[0, t]` split at the slice edges of `w`, where the
    /// waveform is discontinuous.
    pub fn over_waveform<F: Fn(f64) -> Complex64>(&self, w: &Waveform, f: &F, t: f64, tol: f64) -> Complex64 {
        edges(w, t).windows(2).map(|e| self.complex(f, e[0], e[1], tol)).sum()
    }
}

/// Integration breakpoints of `w` on `[0, t]`.
pub fn edges(w: &Waveform, t: f64) -> Vec<f64> {
    match w {
        Waveform::Slices { t_g, amplitudes } => {
            let h = t_g / amplitudes.len() as f64;
            let mut e: Vec<f64> = (0..=amplitudes.len()).map(|i| i as f64 * h).filter(|&x| x < t).collect();
            e.push(t);
            e
        }
        Waveform::Fourier { .. } => vec![0.0, t],
    }
}

pub fn random_slices(rng: &mut ChaCha8Rng, t_g: f64) -> Waveform {
    let n = rng.random_range(4..64);
    Waveform::slices(t_g, (0..n).map(|_| rng.random_range(-100.0..100.0)).collect()).unwrap()
}

pub fn random_fourier(rng: &mut ChaCha8Rng, t_g: f64) -> Waveform {
    let n = rng.random_range(1..12);
    let sine = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
    let cosine = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
    Waveform::fourier(t_g, sine, cosine, false).unwrap()
}

pub fn random_waveform(rng: &mut ChaCha8Rng, t_g: f64) -> Waveform {
    if rng.random_bool(0.5) {
        random_slices(rng, t_g)
    } else {
        random_fourier(rng, t_g)
    }
}

/// `∫_0^{t_g} |E|`, the natural scale of a displacement integral.
pub fn abs_integral(w: &Waveform) -> f64 {
    let (t, s) = w.sample_grid(4001);
    let h = t[1] - t[0];
    s.iter().map(|v| v.abs()).sum::<f64>() * h + w.e_max() * h
}

pub fn two_ion_modes() -> GateModes {
    GateModes::new(2, GatePair::new(0, 1, 2).unwrap(), &IonSpecies::ca40(), &RydbergStateInfo::ca40_49s(), &TrapParameters::reference())
        .unwrap()
}
