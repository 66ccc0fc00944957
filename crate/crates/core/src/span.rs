//! Well-conditioned basis of the closure constraints.
//!
//! A mode of frequency ν imposes `∫ b_j(τ) e^{−iντ} dτ · c_j = 0` on the
//! waveform parameters `c`. Configurations often share almost the same mode
//! frequency, and the raw rows of such a cluster are nearly parallel: their
//! span is fine but its orthogonal complement cannot be resolved in double
//! precision. Replacing each cluster by its Newton divided differences in ν
//! keeps the span and restores the conditioning.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::integrals::exp_integral;

/// Nodes closer than this (in units of `1/t_g`) join a cluster.
const CLUSTER_GAP: f64 = 1.0;
/// Largest cluster width (in units of `1/t_g`); the divided-difference series
/// stays free of cancellation well beyond it.
const CLUSTER_WIDTH: f64 = 4.0;
/// Phase advance of the fastest exponential across one quadrature panel.
const PANEL_PHASE: f64 = 1.0;
const GL_ORDER: usize = 20;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("positive order")))
}

/// A waveform parameter's basis function on `[0, t_g]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Column {
    /// Unit amplitude on `[start, end)`.
    Slice { start: f64, end: f64 },
    Sine { w: f64 },
    Cosine { w: f64 },
}

impl Column {
    fn support(&self, t_g: f64) -> (f64, f64) {
        match *self {
            Column::Slice { start, end } => (start, end),
            _ => (0.0, t_g),
        }
    }

    fn value(&self, t: f64) -> f64 {
        match *self {
            Column::Slice { .. } => 1.0,
            Column::Sine { w } => (w * t).sin(),
            Column::Cosine { w } => (w * t).cos(),
        }
    }

    fn oscillation(&self) -> f64 {
        match *self {
            Column::Slice { .. } => 0.0,
            Column::Sine { w } | Column::Cosine { w } => w.abs(),
        }
    }

    /// `∫ b(τ) e^{−iντ} dτ` in closed form.
    fn exp_row_entry(&self, t_g: f64, nu: f64) -> Complex64 {
        match *self {
            Column::Slice { start, end } => exp_integral(-nu, start, end),
            Column::Sine { w } => {
                (exp_integral(w - nu, 0.0, t_g) - exp_integral(-w - nu, 0.0, t_g)) * Complex64::new(0.0, -0.5)
            }
            Column::Cosine { w } => (exp_integral(w - nu, 0.0, t_g) + exp_integral(-w - nu, 0.0, t_g)) * 0.5,
        }
    }

    /// `∫ b(τ) f(τ) dτ` by composite Gauss-Legendre; `max_rate` bounds the
    /// angular frequency of `f`.
    fn integrate<F: Fn(f64) -> Complex64>(&self, t_g: f64, max_rate: f64, f: F) -> Complex64 {
        let (a, b) = self.support(t_g);
        let rate = max_rate + self.oscillation();
        let panels = ((rate * (b - a) / PANEL_PHASE).ceil() as usize).max(1);
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for &(x, w) in rule().as_node_weight_pairs() {
                let t = lo + 0.5 * h * (x + 1.0);
                acc += f(t) * (self.value(t) * w);
            }
        }
        acc * (0.5 * h)
    }
}

/// Distinct frequencies grouped into clusters of nearly equal values.
pub(crate) fn cluster_frequencies(mut nus: Vec<f64>, t_g: f64, merge_tolerance: f64) -> Vec<Vec<f64>> {
    nus.sort_by(|a, b| a.total_cmp(b));
    nus.dedup_by(|b, a| (*b - *a).abs() <= merge_tolerance * a.abs().max(b.abs()));
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for nu in nus {
        match clusters.last_mut() {
            Some(c) if (nu - c[c.len() - 1]) * t_g < CLUSTER_GAP && (nu - c[0]) * t_g < CLUSTER_WIDTH => c.push(nu),
            _ => clusters.push(vec![nu]),
        }
    }
    clusters
}

/// `h_n(y_1..y_m)` for every prefix `m = 1..=len` and `n = 0..=n_max`.
fn complete_homogeneous(y: &[f64], n_max: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(y.len());
    let mut prev = vec![0.0; n_max + 1];
    prev[0] = 1.0;
    // h_n of the empty set is δ_{n0}; h_n(y_1..y_j) = h_n(y_1..y_{j−1}) + y_j h_{n−1}(y_1..y_j)
    for &yj in y {
        let mut cur = vec![0.0; n_max + 1];
        cur[0] = 1.0;
        for n in 1..=n_max {
            cur[n] = prev[n] + yj * cur[n - 1];
        }
        table.push(cur.clone());
        prev = cur;
    }
    table
}

/// `g[ν_1..ν_m](τ)` of `g(ν) = e^{−iντ}` for the first `m` cluster nodes,
/// divided by `t_g^{m−1}` so every order is of unit size.
struct DividedExp {
    center: f64,
    order: usize,
    h: Vec<f64>,
    t_g: f64,
}

impl DividedExp {
    fn new(nodes: &[f64], order: usize, t_g: f64) -> Self {
        let center = 0.5 * (nodes[0] + nodes[nodes.len() - 1]);
        let shifted: Vec<f64> = nodes.iter().map(|v| v - center).collect();
        let spread = shifted.iter().fold(0.0f64, |m, v| m.max(v.abs())) * t_g;
        // terms fall like spread^n / n!
        let mut n_max = 1;
        let mut term = 1.0;
        while n_max < 400 {
            term *= spread / n_max as f64;
            if term < 1e-18 && n_max as f64 > spread {
                break;
            }
            n_max += 1;
        }
        let table = complete_homogeneous(&shifted[..order], n_max);
        Self { center, order, h: table[order - 1].clone(), t_g }
    }

    fn eval(&self, t: f64) -> Complex64 {
        // e^{−icτ} (−iτ)^{m−1} Σ_n (−iτ)^n h_n / (n+m−1)!
        let z = Complex64::new(0.0, -t);
        let m1 = self.order - 1;
        let mut fact = 1.0;
        for k in 1..=m1 {
            fact *= k as f64;
        }
        let mut zp = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &hn) in self.h.iter().enumerate() {
            if n > 0 {
                zp *= z;
                fact *= (n + m1) as f64;
            }
            acc += zp * (hn / fact);
        }
        let lead = z.powi(m1 as i32) / self.t_g.powi(m1 as i32);
        Complex64::from_polar(1.0, -self.center * t) * lead * acc
    }
}

/// Real rows (re, im per Newton order) spanning the closure constraints of
/// the given frequencies.
pub(crate) fn constraint_rows(clusters: &[Vec<f64>], columns: &[Column], t_g: f64) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for nodes in clusters {
        for order in 1..=nodes.len() {
            let entries: Vec<Complex64> = if order == 1 {
                columns.iter().map(|c| c.exp_row_entry(t_g, nodes[0])).collect()
            } else {
                let d = DividedExp::new(nodes, order, t_g);
                let rate = nodes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                columns.iter().map(|c| c.integrate(t_g, rate, |t| d.eval(t))).collect()
            };
            rows.push(entries.iter().map(|v| v.re).collect());
            rows.push(entries.iter().map(|v| v.im).collect());
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_merges_duplicates_and_close_nodes() {
        let t_g = 1e-6;
        let c = cluster_frequencies(vec![3e7, 1e7, 1e7 * (1.0 + 1e-14), 1e7 + 1e5, 2e7], t_g, 1e-10);
        assert_eq!(c, vec![vec![1e7, 1e7 + 1e5], vec![2e7], vec![3e7]]);
    }

    #[test]
    fn divided_differences_match_direct_formula_for_separated_nodes() {
        // nodes far enough apart that the textbook quotient is accurate
        let t_g = 1e-6;
        let nodes = [2.0e6, 2.3e6, 2.9e6];
        let g = |nu: f64, t: f64| Complex64::from_polar(1.0, -nu * t);
        for &t in &[0.1e-6, 0.55e-6, 1e-6] {
            let d2 = (g(nodes[1], t) - g(nodes[0], t)) / (nodes[1] - nodes[0]);
            let d2b = (g(nodes[2], t) - g(nodes[1], t)) / (nodes[2] - nodes[1]);
            let d3 = (d2b - d2) / (nodes[2] - nodes[0]);
            let e2 = DividedExp::new(&nodes, 2, t_g).eval(t);
            let e3 = DividedExp::new(&nodes, 3, t_g).eval(t);
            assert!((e2 - d2 / t_g).norm() < 1e-12 * d2.norm() / t_g);
            assert!((e3 - d3 / (t_g * t_g)).norm() < 1e-10 * d3.norm() / (t_g * t_g));
        }
    }

    #[test]
    fn confluent_limit_is_the_derivative() {
        let t_g = 1e-6;
        let nu = 3e6;
        let t = 0.7e-6;
        let d = DividedExp::new(&[nu, nu], 2, t_g).eval(t);
        let exact = Complex64::new(0.0, -t) * Complex64::from_polar(1.0, -nu * t) / t_g;
        assert!((d - exact).norm() < 1e-14);
    }

    #[test]
    fn quadrature_reproduces_closed_form_rows() {
        let t_g = 2e-6;
        let nu = 3.7e7;
        let cols = [
            Column::Slice { start: 0.3e-6, end: 0.45e-6 },
            Column::Sine { w: 7.0 * std::f64::consts::PI / t_g },
            Column::Cosine { w: 3.0 * std::f64::consts::PI / t_g },
        ];
        for c in cols {
            let q = c.integrate(t_g, nu, |t| Complex64::from_polar(1.0, -nu * t));
            let exact = c.exp_row_entry(t_g, nu);
            assert!((q - exact).norm() < 1e-14 * t_g, "{c:?}");
        }
    }

    #[test]
    fn newton_rows_span_the_raw_rows() {
        // well separated nodes: both bases are accurate and must agree
        let t_g = 1e-6;
        let clusters = vec![vec![1.0e7, 1.05e7]];
        let n = 24;
        let h = t_g / n as f64;
        let cols: Vec<Column> = (0..n).map(|j| Column::Slice { start: j as f64 * h, end: (j + 1) as f64 * h }).collect();
        let rows = constraint_rows(&clusters, &cols, t_g);
        let raw: Vec<Vec<f64>> = clusters[0]
            .iter()
            .flat_map(|&nu| {
                let e: Vec<Complex64> = cols.iter().map(|c| c.exp_row_entry(t_g, nu)).collect();
                [e.iter().map(|v| v.re).collect::<Vec<_>>(), e.iter().map(|v| v.im).collect()]
            })
            .collect();
        let a = nalgebra::DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        for r in raw {
            let v = nalgebra::DVector::from_vec(r);
            // residual of projecting a raw row onto the Newton span
            let qr = a.transpose().qr();
            let q = qr.q();
            let proj = &q * (q.transpose() * &v);
            assert!((&v - proj).norm() < 1e-10 * v.norm());
        }
    }
}
