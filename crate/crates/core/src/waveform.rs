//! Electric-field waveforms on `[0, t_g]`, either piecewise constant or as a
//! sine/cosine series with frequencies `ω_n = nπ/t_g`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{exp_integral, nested_exp_integral, sinc_defect};

/// Relative tolerance for the `Σ A_c = 0` check on flagged Fourier waveforms.
const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum Waveform {
    /// `n_t` equal slices of constant field (V/m).
    Slices { t_g: f64, amplitudes: Vec<f64> },
    /// `E(t) = Σ_n sine[n]·sin(ω_n t) + cosine[n]·cos(ω_n t)`, `n = 1..=n_f`.
    Fourier {
        t_g: f64,
        sine: Vec<f64>,
        cosine: Vec<f64>,
        zero_endpoint: bool,
    },
}

fn check_duration(t_g: f64) -> Result<()> {
    if t_g > 0.0 && t_g.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("gate time must be positive, got {t_g}")))
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} contain non-finite values")))
    }
}

impl Waveform {
    pub fn slices(t_g: f64, amplitudes: Vec<f64>) -> Result<Self> {
        check_duration(t_g)?;
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput("slice waveform needs at least one slice".into()));
        }
        check_finite(&amplitudes, "slice amplitudes")?;
        Ok(Waveform::Slices { t_g, amplitudes })
    }

    pub fn fourier(t_g: f64, sine: Vec<f64>, cosine: Vec<f64>, zero_endpoint: bool) -> Result<Self> {
        check_duration(t_g)?;
        if sine.len() != cosine.len() || sine.is_empty() {
            return Err(Error::InvalidInput("sine and cosine lists must be equal and non-empty".into()));
        }
        check_finite(&sine, "sine coefficients")?;
        check_finite(&cosine, "cosine coefficients")?;
        if zero_endpoint {
            let norm: f64 = cosine.iter().chain(&sine).map(|a| a * a).sum::<f64>().sqrt();
            let sum: f64 = cosine.iter().sum();
            if sum.abs() > ENDPOINT_TOL * norm.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidInput(format!(
                    "zero-endpoint waveform needs Σ cosine = 0, got {sum:e}"
                )));
            }
        }
        Ok(Waveform::Fourier { t_g, sine, cosine, zero_endpoint })
    }

    /// Identically zero slice waveform.
    pub fn zero(t_g: f64, n_t: usize) -> Result<Self> {
        Self::slices(t_g, vec![0.0; n_t.max(1)])
    }

    pub fn t_g(&self) -> f64 {
        match self {
            Waveform::Slices { t_g, .. } | Waveform::Fourier { t_g, .. } => *t_g,
        }
    }

    /// Angular frequency of Fourier term `n` (1-based).
    pub fn harmonic(t_g: f64, n: usize) -> f64 {
        n as f64 * std::f64::consts::PI / t_g
    }

    /// Field at time `t` (V/m). Slices are left-closed, the final slice
    /// also owns `t_g`.
    pub fn sample(&self, t: f64) -> f64 {
        match self {
            Waveform::Slices { t_g, amplitudes } => {
                let n = amplitudes.len();
                let idx = ((t / t_g) * n as f64).floor();
                let idx = if idx < 0.0 { 0 } else { (idx as usize).min(n - 1) };
                amplitudes[idx]
            }
            Waveform::Fourier { t_g, sine, cosine, .. } => sine
                .iter()
                .zip(cosine)
                .enumerate()
                .map(|(i, (s, c))| {
                    let (sn, cs) = (Self::harmonic(*t_g, i + 1) * t).sin_cos();
                    s * sn + c * cs
                })
                .sum(),
        }
    }

    /// Field on `n_points` uniformly spaced times including both endpoints.
    pub fn sample_grid(&self, n_points: usize) -> (Vec<f64>, Vec<f64>) {
        let n = n_points.max(2);
        let t_g = self.t_g();
        let times: Vec<f64> = (0..n).map(|i| t_g * i as f64 / (n - 1) as f64).collect();
        let values = times.iter().map(|&t| self.sample(t)).collect();
        (times, values)
    }

    /// Peak field magnitude `max_t |E(t)|` (V/m).
    pub fn e_max(&self) -> f64 {
        match self {
            Waveform::Slices { amplitudes, .. } => amplitudes.iter().fold(0.0, |m, a| m.max(a.abs())),
            Waveform::Fourier { t_g, sine, .. } => {
                // dense scan, then golden-section refinement around the best sample
                let n = (64 * sine.len()).max(4096);
                let dt = t_g / n as f64;
                let abs_at = |t: f64| self.sample(t.clamp(0.0, *t_g)).abs();
                let (mut best_t, mut best) = (0.0, abs_at(0.0));
                for i in 1..=n {
                    let t = i as f64 * dt;
                    let v = abs_at(t);
                    if v > best {
                        best = v;
                        best_t = t;
                    }
                }
                let (mut a, mut b) = ((best_t - dt).max(0.0), (best_t + dt).min(*t_g));
                let r = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..60 {
                    let c = b - r * (b - a);
                    let d = a + r * (b - a);
                    if abs_at(c) > abs_at(d) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                best.max(abs_at(0.5 * (a + b)))
            }
        }
    }

    /// `√(∫ E² dt)` in V·s^{1/2}/m.
    pub fn l2_norm(&self) -> f64 {
        match self {
            Waveform::Slices { t_g, amplitudes } => {
                let h = t_g / amplitudes.len() as f64;
                (amplitudes.iter().map(|a| a * a).sum::<f64>() * h).sqrt()
            }
            Waveform::Fourier { t_g, sine, cosine, .. } => {
                let gram = fourier_gram(*t_g, sine.len());
                let c = nalgebra::DVector::from_iterator(
                    2 * sine.len(),
                    sine.iter().chain(cosine.iter()).copied(),
                );
                c.dot(&(&gram * &c)).max(0.0).sqrt()
            }
        }
    }

    /// Same waveform multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Waveform::Slices { t_g, amplitudes } => Waveform::Slices {
                t_g: *t_g,
                amplitudes: amplitudes.iter().map(|a| a * factor).collect(),
            },
            Waveform::Fourier { t_g, sine, cosine, zero_endpoint } => Waveform::Fourier {
                t_g: *t_g,
                sine: sine.iter().map(|a| a * factor).collect(),
                cosine: cosine.iter().map(|a| a * factor).collect(),
                zero_endpoint: *zero_endpoint,
            },
        }
    }

    /// Complex exponential decomposition `E(t) = Σ a_p e^{i w_p t}` of a
    /// Fourier waveform.
    pub(crate) fn exponentials(t_g: f64, sine: &[f64], cosine: &[f64]) -> Vec<(Complex64, f64)> {
        let mut out = Vec::with_capacity(4 * sine.len());
        for (i, (s, c)) in sine.iter().zip(cosine).enumerate() {
            let w = Self::harmonic(t_g, i + 1);
            // sin = (e^{iwt} − e^{−iwt})/(2i), cos = (e^{iwt} + e^{−iwt})/2
            let plus = Complex64::new(0.5 * c, -0.5 * s);
            out.push((plus, w));
            out.push((plus.conj(), -w));
        }
        out
    }

    /// `∫_0^t E(τ) e^{ikτ} dτ`.
    pub fn exp_moment(&self, k: f64, t: f64) -> Complex64 {
        match self {
            Waveform::Slices { t_g, amplitudes } => {
                let n = amplitudes.len();
                let h = t_g / n as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, a) in amplitudes.iter().enumerate() {
                    let start = i as f64 * h;
                    if start >= t {
                        break;
                    }
                    let end = if i + 1 == n { *t_g } else { (i + 1) as f64 * h };
                    acc += exp_integral(k, start, end.min(t)) * *a;
                }
                acc
            }
            Waveform::Fourier { t_g, sine, cosine, .. } => Self::exponentials(*t_g, sine, cosine)
                .into_iter()
                .map(|(a, w)| a * exp_integral(w + k, 0.0, t))
                .sum(),
        }
    }

    /// `exp_moment(k, t)` on an ascending list of times, accumulating slice
    /// contributions instead of re-summing from zero at every point.
    pub fn exp_moment_grid(&self, k: f64, times: &[f64]) -> Vec<Complex64> {
        match self {
            Waveform::Slices { t_g, amplitudes } => {
                let n = amplitudes.len();
                let h = t_g / n as f64;
                let mut out = Vec::with_capacity(times.len());
                let mut done = Complex64::new(0.0, 0.0);
                let mut next = 0usize;
                for &t in times {
                    while next < n && ((next + 1) as f64 * h <= t || next + 1 == n && *t_g <= t) {
                        let end = if next + 1 == n { *t_g } else { (next + 1) as f64 * h };
                        done += exp_integral(k, next as f64 * h, end) * amplitudes[next];
                        next += 1;
                    }
                    let partial = if next < n && t > next as f64 * h {
                        exp_integral(k, next as f64 * h, t) * amplitudes[next]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    out.push(done + partial);
                }
                out
            }
            Waveform::Fourier { .. } => times.iter().map(|&t| self.exp_moment(k, t)).collect(),
        }
    }

    /// `∫_0^{t_g} dτ E(τ) ∫_0^τ E(τ') sin(ν(τ' − τ)) dτ'` in closed form.
    pub fn phase_kernel(&self, nu: f64) -> f64 {
        match self {
            Waveform::Slices { t_g, amplitudes } => {
                let n = amplitudes.len();
                let h = t_g / n as f64;
                let self_term = -h * h * sinc_defect(nu * h);
                let mut history = Complex64::new(0.0, 0.0);
                let mut acc = 0.0;
                for (i, a) in amplitudes.iter().enumerate() {
                    let (start, end) = (i as f64 * h, (i + 1) as f64 * h);
                    let minus = exp_integral(-nu, start, end);
                    acc += a * (history * minus).im + a * a * self_term;
                    history += exp_integral(nu, start, end) * *a;
                }
                acc
            }
            Waveform::Fourier { t_g, sine, cosine, .. } => {
                let terms = Self::exponentials(*t_g, sine, cosine);
                let mut acc = Complex64::new(0.0, 0.0);
                for &(ap, wp) in &terms {
                    for &(aq, wq) in &terms {
                        acc += ap * aq * nested_exp_integral(wp - nu, wq + nu, *t_g);
                    }
                }
                acc.im
            }
        }
    }

    pub fn n_parameters(&self) -> usize {
        match self {
            Waveform::Slices { amplitudes, .. } => amplitudes.len(),
            Waveform::Fourier { sine, .. } => 2 * sine.len(),
        }
    }
}

/// L² Gram matrix of `[sin(ω_1 t)..sin(ω_n t), cos(ω_1 t)..cos(ω_n t)]` on
/// `[0, t_g]`.
pub fn fourier_gram(t_g: f64, n_f: usize) -> DMatrix<f64> {
    let cos_int = |w: f64| exp_integral(w, 0.0, t_g).re;
    let sin_int = |w: f64| exp_integral(w, 0.0, t_g).im;
    let mut g = DMatrix::zeros(2 * n_f, 2 * n_f);
    for m in 0..n_f {
        let wm = Waveform::harmonic(t_g, m + 1);
        for n in 0..n_f {
            let wn = Waveform::harmonic(t_g, n + 1);
            let (d, s) = (wm - wn, wm + wn);
            g[(m, n)] = 0.5 * (cos_int(d) - cos_int(s));
            g[(n_f + m, n_f + n)] = 0.5 * (cos_int(d) + cos_int(s));
            // sin(wm t) cos(wn t)
            let sc = 0.5 * (sin_int(s) + sin_int(d));
            g[(m, n_f + n)] = sc;
            g[(n_f + n, m)] = sc;
        }
    }
    g
}
