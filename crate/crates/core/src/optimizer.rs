//! Null-space waveform synthesis.
//!
//! Closure of every phase-space trajectory is linear in the waveform
//! parameters, so all admissible waveforms form the null space of a real
//! matrix. Within that space the gate phase is a quadratic form; its
//! dominant eigenvector is the waveform reaching `|Δφ| = π` with the least
//! L² energy.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{gate_conditions_with, GateModes, GateReport, ModeCoupling, Sigma, DEFAULT_TRAJECTORY_POINTS};
use crate::error::{Error, Result};
use crate::integrals::{exp_integral, nested_exp_integral, sinc_defect};
use crate::span::{cluster_frequencies, constraint_rows, Column};
use crate::waveform::{fourier_gram, Waveform};

/// Couplings below this fraction of the largest one are treated as zero.
const UNCOUPLED: f64 = 1e-10;
/// Mode frequencies closer than this (relative) impose the same constraint.
const FREQUENCY_MERGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Slices,
    Fourier,
}

/// Extra linear constraints appended to the closure rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    None,
    /// `E(0) = E(t_g) = 0`.
    ZeroEndpoints,
    /// `E(t_g − t) = −E(t)`.
    Antisymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RowLabel {
    Displacement { sigma: Sigma, mode: usize, part: Part },
    Constraint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureSystem {
    pub method: Method,
    pub boundary: Boundary,
    pub t_g: f64,
    pub matrix: DMatrix<f64>,
    pub rows: Vec<RowLabel>,
    /// Well-conditioned rows with the same span as `matrix`: clusters of
    /// nearly equal mode frequencies replaced by divided differences,
    /// followed by the boundary rows.
    pub span: DMatrix<f64>,
}

impl ClosureSystem {
    pub fn n_parameters(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_constraint_rows(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r, RowLabel::Constraint(_))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub n_t: usize,
    pub n_f: usize,
    pub boundary: Boundary,
    /// Relative singular value of the conditioned constraint rows below
    /// which a row counts as dependent.
    pub svd_tolerance: f64,
    /// Relative eigenvalue cutoff when re-orthonormalising a Fourier basis.
    pub gram_cutoff: f64,
    /// Relative gap `(|λ1| − |λ2|)/|λ1|` below which the optimum is flagged degenerate.
    pub degeneracy_tolerance: f64,
    pub reject_degenerate: bool,
    pub trajectory_points: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            n_t: 128,
            n_f: 32,
            boundary: Boundary::ZeroEndpoints,
            svd_tolerance: 1e-10,
            gram_cutoff: 1e-8,
            degeneracy_tolerance: 1e-9,
            reject_degenerate: false,
            trajectory_points: DEFAULT_TRAJECTORY_POINTS,
        }
    }
}

fn check_gate_time(t_g: f64) -> Result<()> {
    if t_g > 0.0 && t_g.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("gate time must be positive, got {t_g}")))
    }
}

fn displacement_rows<F>(modes: &GateModes, n_params: usize, mut entry: F) -> (Vec<Vec<f64>>, Vec<RowLabel>)
where
    F: FnMut(&ModeCoupling, usize) -> Complex64,
{
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for sigma in Sigma::ALL {
        for (k, m) in modes.of(sigma).iter().enumerate() {
            let values: Vec<Complex64> = (0..n_params).map(|j| entry(m, j)).collect();
            rows.push(values.iter().map(|v| v.re).collect());
            labels.push(RowLabel::Displacement { sigma, mode: k, part: Part::Re });
            rows.push(values.iter().map(|v| v.im).collect());
            labels.push(RowLabel::Displacement { sigma, mode: k, part: Part::Im });
        }
    }
    (rows, labels)
}

fn unit_row(n: usize, entries: &[(usize, f64)]) -> Vec<f64> {
    let mut r = vec![0.0; n];
    for &(i, v) in entries {
        r[i] += v;
    }
    r
}

/// Frequencies whose coupling is not lost in rounding.
fn live_frequencies(modes: &GateModes) -> Vec<f64> {
    let all: Vec<&ModeCoupling> = Sigma::ALL.iter().flat_map(|&s| modes.of(s).iter()).collect();
    let largest = all.iter().map(|m| (m.w * m.l).abs()).fold(0.0, f64::max);
    all.iter().filter(|m| (m.w * m.l).abs() > UNCOUPLED * largest).map(|m| m.frequency).collect()
}

#[allow(clippy::too_many_arguments)]
fn to_system(
    method: Method,
    boundary: Boundary,
    t_g: f64,
    modes: &GateModes,
    columns: &[Column],
    rows: Vec<Vec<f64>>,
    labels: Vec<RowLabel>,
) -> ClosureSystem {
    let n = columns.len();
    let matrix = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let clusters = cluster_frequencies(live_frequencies(modes), t_g, FREQUENCY_MERGE);
    let mut span_rows = constraint_rows(&clusters, columns, t_g);
    for (row, label) in rows.iter().zip(&labels) {
        if matches!(label, RowLabel::Constraint(_)) {
            span_rows.push(row.clone());
        }
    }
    let span = DMatrix::from_fn(span_rows.len(), n, |i, j| span_rows[i][j]);
    ClosureSystem { method, boundary, t_g, matrix, rows: labels, span }
}

/// Closure rows for `n_t` slices without any size check.
pub fn assemble_closure_slices(modes: &GateModes, t_g: f64, n_t: usize, boundary: Boundary) -> ClosureSystem {
    let h = t_g / n_t as f64;
    let (mut rows, mut labels) = displacement_rows(modes, n_t, |m, j| {
        exp_integral(-m.frequency, j as f64 * h, (j + 1) as f64 * h) * (m.w * m.l)
    });
    match boundary {
        Boundary::None => {}
        Boundary::ZeroEndpoints => {
            rows.push(unit_row(n_t, &[(0, 1.0)]));
            labels.push(RowLabel::Constraint("first slice".into()));
            rows.push(unit_row(n_t, &[(n_t - 1, 1.0)]));
            labels.push(RowLabel::Constraint("last slice".into()));
        }
        Boundary::Antisymmetric => {
            for j in 0..n_t.div_ceil(2) {
                rows.push(unit_row(n_t, &[(j, 1.0), (n_t - 1 - j, 1.0)]));
                labels.push(RowLabel::Constraint(format!("antisymmetry {j}")));
            }
        }
    }
    let columns: Vec<Column> =
        (0..n_t).map(|j| Column::Slice { start: j as f64 * h, end: (j + 1) as f64 * h }).collect();
    to_system(Method::Slices, boundary, t_g, modes, &columns, rows, labels)
}

fn boundary_row_count(boundary: Boundary, n_params: usize) -> usize {
    match boundary {
        Boundary::None => 0,
        Boundary::ZeroEndpoints => 2,
        Boundary::Antisymmetric => n_params.div_ceil(2),
    }
}

/// Closure system of a slice waveform: `8N` displacement rows plus boundary rows.
pub fn build_closure_system_slices(modes: &GateModes, t_g: f64, n_t: usize, boundary: Boundary) -> Result<ClosureSystem> {
    check_gate_time(t_g)?;
    let required = if boundary == Boundary::Antisymmetric {
        // half the slices are free; they must exceed the closure rows
        2 * (8 * modes.n_ions + 1) + 1
    } else {
        8 * modes.n_ions + boundary_row_count(boundary, n_t) + 2
    };
    if n_t < required {
        return Err(Error::InsufficientSlices { required, got: n_t });
    }
    Ok(assemble_closure_slices(modes, t_g, n_t, boundary))
}

/// `∫_0^{t_g} b_j(τ) e^{−iντ} dτ` for Fourier column `j` (sines first).
fn fourier_column_integral(t_g: f64, n_f: usize, j: usize, nu: f64) -> Complex64 {
    basis_exponentials(t_g, n_f, j)
        .iter()
        .map(|&(a, w)| a * exp_integral(w - nu, 0.0, t_g))
        .sum()
}

/// Exponential decomposition of Fourier column `j`.
fn basis_exponentials(t_g: f64, n_f: usize, j: usize) -> [(Complex64, f64); 2] {
    let (n, is_sine) = if j < n_f { (j + 1, true) } else { (j - n_f + 1, false) };
    let w = Waveform::harmonic(t_g, n);
    if is_sine {
        [(Complex64::new(0.0, -0.5), w), (Complex64::new(0.0, 0.5), -w)]
    } else {
        [(Complex64::new(0.5, 0.0), w), (Complex64::new(0.5, 0.0), -w)]
    }
}

/// Closure rows for `n_f` sine and `n_f` cosine terms without size checks.
pub fn assemble_closure_fourier(modes: &GateModes, t_g: f64, n_f: usize, boundary: Boundary) -> ClosureSystem {
    let n = 2 * n_f;
    let (mut rows, mut labels) =
        displacement_rows(modes, n, |m, j| fourier_column_integral(t_g, n_f, j, m.frequency) * (m.w * m.l));
    match boundary {
        Boundary::None => {}
        Boundary::ZeroEndpoints => {
            rows.push(unit_row(n, &(0..n_f).map(|i| (n_f + i, 1.0)).collect::<Vec<_>>()));
            labels.push(RowLabel::Constraint("start at zero".into()));
            let alternating: Vec<(usize, f64)> =
                (0..n_f).map(|i| (n_f + i, if (i + 1) % 2 == 0 { 1.0 } else { -1.0 })).collect();
            rows.push(unit_row(n, &alternating));
            labels.push(RowLabel::Constraint("end at zero".into()));
        }
        Boundary::Antisymmetric => {
            // odd sines and even cosines are symmetric about t_g/2
            for i in 0..n_f {
                let harmonic = i + 1;
                let col = if harmonic % 2 == 1 { i } else { n_f + i };
                rows.push(unit_row(n, &[(col, 1.0)]));
                labels.push(RowLabel::Constraint(format!("antisymmetry {harmonic}")));
            }
        }
    }
    let columns: Vec<Column> = (0..n)
        .map(|j| {
            let w = Waveform::harmonic(t_g, j % n_f + 1);
            if j < n_f { Column::Sine { w } } else { Column::Cosine { w } }
        })
        .collect();
    to_system(Method::Fourier, boundary, t_g, modes, &columns, rows, labels)
}

/// Closure system of a Fourier waveform with `ω_n = nπ/t_g`, `n = 1..=n_f`.
pub fn build_closure_system_fourier(modes: &GateModes, t_g: f64, n_f: usize, boundary: Boundary) -> Result<ClosureSystem> {
    check_gate_time(t_g)?;
    let required_params = 8 * modes.n_ions + boundary_row_count(boundary, 2 * n_f) + 2;
    let required = if boundary == Boundary::Antisymmetric {
        8 * modes.n_ions + 2
    } else {
        required_params.div_ceil(2)
    };
    if n_f < required {
        return Err(Error::InsufficientTerms { required, got: n_f });
    }
    Ok(assemble_closure_fourier(modes, t_g, n_f, boundary))
}

/// Orthonormal basis of admissible waveform parameter vectors (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSpaceBasis {
    pub method: Method,
    pub boundary: Boundary,
    pub t_g: f64,
    /// Columns are orthonormal in the waveform L² metric up to a constant
    /// factor (Euclidean for slices, Gram metric for Fourier).
    pub vectors: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

impl NullSpaceBasis {
    pub fn dimension(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn n_parameters(&self) -> usize {
        self.vectors.nrows()
    }

    /// Waveform with parameter vector `params`.
    pub fn waveform(&self, params: &[f64]) -> Result<Waveform> {
        params_to_waveform(self.method, self.boundary, self.t_g, params)
    }

    /// Waveform of coefficient vector `c` in this basis.
    pub fn combine(&self, c: &[f64]) -> Result<Waveform> {
        let v = &self.vectors * DVector::from_column_slice(c);
        self.waveform(v.as_slice())
    }
}

fn params_to_waveform(method: Method, boundary: Boundary, t_g: f64, params: &[f64]) -> Result<Waveform> {
    match method {
        Method::Slices => Waveform::slices(t_g, params.to_vec()),
        Method::Fourier => {
            let n_f = params.len() / 2;
            Waveform::fourier(
                t_g,
                params[..n_f].to_vec(),
                params[n_f..].to_vec(),
                boundary == Boundary::ZeroEndpoints,
            )
        }
    }
}

/// Null space of the closure constraints.
///
/// Works on [`ClosureSystem::span`], whose rows are independent by
/// construction, so the rank is the row count; `tolerance` only decides
/// which normalised singular values count as exact dependencies.
/// Fourier bases are then re-orthonormalised in the L² metric.
pub fn null_space(system: &ClosureSystem, tolerance: f64) -> Result<NullSpaceBasis> {
    null_space_with(system, tolerance, OptimizerOptions::default().gram_cutoff)
}

pub fn null_space_with(system: &ClosureSystem, tolerance: f64, gram_cutoff: f64) -> Result<NullSpaceBasis> {
    let n = system.n_parameters();
    let rows: Vec<DVector<f64>> = system
        .span
        .row_iter()
        .filter_map(|r| {
            let norm = r.norm();
            (norm > 0.0).then(|| r.transpose() / norm)
        })
        .collect();
    // pad with zero rows so the SVD returns a complete right basis
    let m = rows.len().max(n);
    let mut a = DMatrix::zeros(m, n);
    for (i, r) in rows.iter().enumerate() {
        a.set_row(i, &r.transpose());
    }
    let svd = SVD::new(a, false, true);
    let v_t = svd.v_t.ok_or(Error::NoConvergence { what: "closure SVD", iterations: 0 })?;
    let sv = svd.singular_values;
    let s_max = sv.iter().cloned().fold(0.0, f64::max);
    let mut by_size: Vec<usize> = (0..sv.len()).collect();
    by_size.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let rank = by_size.iter().take(rows.len()).filter(|&&i| sv[i] > tolerance * s_max).count();
    let mut null: Vec<usize> = by_size[rank..].to_vec();
    null.reverse();
    if null.is_empty() {
        return Err(Error::EmptyNullSpace);
    }
    let mut vectors = DMatrix::zeros(n, null.len());
    for (c, &i) in null.iter().enumerate() {
        vectors.set_column(c, &v_t.row(i).transpose());
    }
    let singular_values = null.iter().map(|&i| sv[i]).collect();
    if system.method == Method::Fourier {
        let gram = fourier_gram(system.t_g, n / 2);
        let reduced = vectors.transpose() * &gram * &vectors;
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let eig = SymmetricEigen::new(reduced);
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > gram_cutoff * top).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        if order.is_empty() {
            return Err(Error::EmptyNullSpace);
        }
        let mut q = DMatrix::zeros(vectors.ncols(), order.len());
        for (c, &i) in order.iter().enumerate() {
            q.set_column(c, &(eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
        }
        vectors = vectors * q;
    }
    Ok(NullSpaceBasis { method: system.method, boundary: system.boundary, t_g: system.t_g, vectors, singular_values })
}

/// Contribution of one mode to the raw phase matrix, without the `±g²` factor.
fn slice_mode_kernel(nu: f64, t_g: f64, n_t: usize) -> DMatrix<f64> {
    let h = t_g / n_t as f64;
    let plus: Vec<Complex64> = (0..n_t).map(|j| exp_integral(nu, j as f64 * h, (j + 1) as f64 * h)).collect();
    let minus: Vec<Complex64> = (0..n_t).map(|j| exp_integral(-nu, j as f64 * h, (j + 1) as f64 * h)).collect();
    let diag = -h * h * sinc_defect(nu * h);
    let mut s = DMatrix::zeros(n_t, n_t);
    for outer in 0..n_t {
        s[(outer, outer)] = diag;
        for inner in 0..outer {
            let v = 0.5 * (plus[inner] * minus[outer]).im;
            s[(outer, inner)] = v;
            s[(inner, outer)] = v;
        }
    }
    s
}

fn fourier_mode_kernel(nu: f64, t_g: f64, n_f: usize) -> DMatrix<f64> {
    let n = 2 * n_f;
    let terms: Vec<[(Complex64, f64); 2]> = (0..n).map(|j| basis_exponentials(t_g, n_f, j)).collect();
    let mut q = DMatrix::zeros(n, n);
    for outer in 0..n {
        for inner in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(ap, wp) in &terms[outer] {
                for &(aq, wq) in &terms[inner] {
                    acc += ap * aq * nested_exp_integral(wp - nu, wq + nu, t_g);
                }
            }
            q[(outer, inner)] = acc.im;
        }
    }
    (&q + q.transpose()) * 0.5
}

/// Matrix `P` with `Δφ = pᵀ P p` for the raw parameter vector `p`.
pub fn raw_phase_matrix(method: Method, t_g: f64, n_params: usize, modes: &GateModes) -> DMatrix<f64> {
    let jobs: Vec<(f64, f64)> = Sigma::ALL
        .iter()
        .flat_map(|&s| {
            modes.of(s).iter().filter_map(move |m| {
                let g = m.field_coupling(modes.charge);
                (g != 0.0).then_some((s.phase_sign() * g * g, m.frequency))
            })
        })
        .collect();
    let parts: Vec<DMatrix<f64>> = jobs
        .par_iter()
        .map(|&(weight, nu)| {
            let k = match method {
                Method::Slices => slice_mode_kernel(nu, t_g, n_params),
                Method::Fourier => fourier_mode_kernel(nu, t_g, n_params / 2),
            };
            k * weight
        })
        .collect();
    let mut p = DMatrix::zeros(n_params, n_params);
    for part in parts {
        p += part;
    }
    p
}

/// Gate phase as a quadratic form on null-space coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseQuadraticForm {
    pub matrix: DMatrix<f64>,
}

impl PhaseQuadraticForm {
    pub fn evaluate(&self, c: &[f64]) -> f64 {
        let v = DVector::from_column_slice(c);
        v.dot(&(&self.matrix * &v))
    }
}

pub fn phase_matrix(basis: &NullSpaceBasis, modes: &GateModes) -> PhaseQuadraticForm {
    let raw = raw_phase_matrix(basis.method, basis.t_g, basis.n_parameters(), modes);
    let p = basis.vectors.transpose() * raw * &basis.vectors;
    PhaseQuadraticForm { matrix: (&p + p.transpose()) * 0.5 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalWaveform {
    /// Unit-norm coefficients in the null-space basis.
    pub coefficients: Vec<f64>,
    pub waveform: Waveform,
    /// Dominant eigenvalue: Δφ of the unit-norm combination (rad).
    pub raw_delta_phi: f64,
    /// Factor `√(π/|λ1|)` applied to reach `|Δφ| = π`.
    pub scale: f64,
    /// The waveform realises `Δφ = −π` (a locally equivalent CZ).
    pub negative_phase: bool,
    pub degenerate: bool,
    pub second_eigenvalue: Option<f64>,
    pub null_dimension: usize,
}

/// Picks the dominant eigenvector of the phase form and scales it to `|Δφ| = π`.
pub fn optimize(form: &PhaseQuadraticForm, basis: &NullSpaceBasis, options: &OptimizerOptions) -> Result<OptimalWaveform> {
    let d = form.matrix.nrows();
    if d == 0 {
        return Err(Error::EmptyNullSpace);
    }
    let eig = SymmetricEigen::new(form.matrix.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]];
    if top == 0.0 || !top.is_finite() {
        return Err(Error::EmptyNullSpace);
    }
    let second = order.get(1).map(|&i| eig.eigenvalues[i]);
    let degenerate = second.is_some_and(|s| (top.abs() - s.abs()) < options.degeneracy_tolerance * top.abs());
    if degenerate && options.reject_degenerate {
        return Err(Error::DegenerateTopEigenvalue { top, second: second.unwrap_or(0.0) });
    }
    let mut c: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    // fix the overall sign: first significant field sample is positive
    let unit = basis.combine(&c)?;
    let (_, samples) = unit.sample_grid(4097);
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(first) = samples.iter().find(|v| v.abs() > 1e-6 * peak) {
        if *first < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let scale = (std::f64::consts::PI / top.abs()).sqrt();
    let waveform = basis.combine(&c)?.scaled(scale);
    Ok(OptimalWaveform {
        coefficients: c,
        waveform,
        raw_delta_phi: top,
        scale,
        negative_phase: top < 0.0,
        degenerate,
        second_eigenvalue: second,
        null_dimension: d,
    })
}

pub fn build_closure_system(modes: &GateModes, t_g: f64, method: Method, options: &OptimizerOptions) -> Result<ClosureSystem> {
    match method {
        Method::Slices => build_closure_system_slices(modes, t_g, options.n_t, options.boundary),
        Method::Fourier => build_closure_system_fourier(modes, t_g, options.n_f, options.boundary),
    }
}

/// Closure system → null space → phase form → optimum → independent report.
pub fn synthesize(modes: &GateModes, t_g: f64, method: Method, options: &OptimizerOptions) -> Result<(OptimalWaveform, GateReport)> {
    let system = build_closure_system(modes, t_g, method, options)?;
    let basis = null_space_with(&system, options.svd_tolerance, options.gram_cutoff)?;
    let form = phase_matrix(&basis, modes);
    let best = optimize(&form, &basis, options)?;
    let report = gate_conditions_with(&best.waveform, modes, options.trajectory_points);
    Ok((best, report))
}
