//! Closed-form single and nested integrals of complex exponentials.
//!
//! Every phase-space quantity in the crate reduces to
//! `∫ e^{ikτ} dτ` or `∫∫_{τ'<τ} e^{iλτ} e^{iκτ'} dτ' dτ`. The helpers here stay
//! accurate through the resonant limits `k → 0`, `κ → 0`.

use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(e^{ix} − 1)/(ix)`, accurate for all real `x` (equals 1 at 0).
pub fn phi1(x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = (0.5 * x).sin();
    Complex64::new(x.sin() / x, 2.0 * s * s / x)
}

/// `∫_a^b e^{ikτ} dτ`.
pub fn exp_integral(k: f64, a: f64, b: f64) -> Complex64 {
    let h = b - a;
    Complex64::from_polar(1.0, k * a) * phi1(k * h) * h
}

/// `(x − sin x)/x²`, used by the self term of a constant slice.
pub fn sinc_defect(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362_880.0)))
    } else {
        (x - x.sin()) / (x * x)
    }
}

/// Moments `M_p(a) = ∫_0^1 s^p e^{ias} ds` for `p = 0..=p_max`.
fn moments(a: f64, p_max: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p_max + 1];
    if a.abs() < 1.0 {
        // power series; terms shrink monotonically
        for (p, slot) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0); // (ia)^q / q!
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..60 {
                let contrib = term / (p + q + 1) as f64;
                acc += contrib;
                if contrib.norm() < 1e-18 * acc.norm() {
                    break;
                }
                term *= I * a / (q + 1) as f64;
            }
            *slot = acc;
        }
    } else {
        let e = Complex64::from_polar(1.0, a);
        out[0] = phi1(a);
        for p in 1..=p_max {
            out[p] = (e - out[p - 1] * p as f64) / (I * a);
        }
    }
    out
}

/// `ψ(a, b) = ∫_0^1 e^{ias} ∫_0^s e^{ibs'} ds' ds`.
pub fn nested_unit(a: f64, b: f64) -> Complex64 {
    if b.abs() >= 1e-3 {
        nested_divided(a, b)
    } else {
        nested_series(a, b)
    }
}

fn nested_divided(a: f64, b: f64) -> Complex64 {
    (phi1(a + b) - phi1(a)) / (I * b)
}

/// Expansion of `e^{ibs'}` in powers of `b`.
fn nested_series(a: f64, b: f64) -> Complex64 {
    const TERMS: usize = 7;
    let m = moments(a, TERMS + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut coeff = Complex64::new(1.0, 0.0); // (ib)^j / (j+1)!
    for j in 0..=TERMS {
        coeff /= (j + 1) as f64;
        acc += coeff * m[j + 1];
        coeff *= I * b;
    }
    acc
}

/// `∫_0^T e^{iλτ} ∫_0^τ e^{iκτ'} dτ' dτ`.
pub fn nested_exp_integral(lambda: f64, kappa: f64, t: f64) -> Complex64 {
    nested_unit(lambda * t, kappa * t) * (t * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl_integral<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
        // 5-point Gauss-Legendre on many panels; independent of the closed forms
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                acc += f(c + 0.5 * h * x) * (0.5 * h * w);
            }
        }
        acc
    }

    #[test]
    fn phi1_limits() {
        assert_eq!(phi1(0.0), Complex64::new(1.0, 0.0));
        let small = phi1(1e-9);
        assert!((small - Complex64::new(1.0, 5e-10)).norm() < 1e-15);
        let x = 2.3;
        let direct = (Complex64::from_polar(1.0, x) - 1.0) / (I * x);
        assert!((phi1(x) - direct).norm() < 1e-15);
    }

    #[test]
    fn sinc_defect_branches_agree() {
        for x in [9.9e-3, 1.01e-2] {
            let direct = (x - f64::sin(x)) / (x * x);
            assert!((sinc_defect(x) - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn nested_matches_quadrature() {
        for &(a, b) in &[
            (0.0, 0.0),
            (3.0, -3.0),
            (5.0, 1e-4),
            (0.3, 2e-4),
            (-12.0, 7.5),
            (25.1, -25.1 + 1e-6),
            (1e-5, 1e-5),
            (0.999, 1e-7),
            (1.001, -5e-4),
        ] {
            let exact = nested_unit(a, b);
            let quad = gl_integral(|s| Complex64::from_polar(1.0, a * s) * phi1(b * s) * s, 0.0, 1.0, 400);
            assert!((exact - quad).norm() < 1e-12, "a={a} b={b}: {exact} vs {quad}");
        }
    }

    #[test]
    fn nested_branch_continuity() {
        for a in [0.2, 0.999, 1.0, 4.0, 40.0] {
            for b in [1e-3, -1e-3] {
                let d = nested_divided(a, b) - nested_series(a, b);
                assert!(d.norm() < 1e-12, "a={a} b={b}: {d}");
            }
        }
    }
}
