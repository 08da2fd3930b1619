//! Galerkin estimates of optimal frame bounds for vector-valued Gabor systems.
//!
//! The frame operator `S φ = Σ_γ ⟨φ, f_γ⟩ f_γ` is compressed onto the span of
//! `e_{i,m} = D_b h_m` placed in component `i`, `m < K`. Its quadratic form is
//! `u ↦ ‖A u‖²` where `A` has one row per lattice point and
//! `A_{γ,(i,m)} = ⟨D_b h_m, (f_i)_γ⟩`, so the compressed operator is `A^H A`.
//! Extremal eigenvalues bracket the true bounds from inside.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{GridCapacity, GridSpec, VectorWindow};
use crate::kernel::{basis_table, cross_ambiguity_into, cross_ambiguity_quadrature, KernelMethod};
use crate::lattice::{box_norm, covolume, enumerate_in_metric, LatticeMatrix, LatticePoint, DEFAULT_POINT_BUDGET};

/// Default Galerkin dimension per component.
pub const DEFAULT_K: usize = 64;

/// Galerkin dimension used when refuting frame-ness.
pub const REFUTATION_K: usize = 128;

/// Default ratio threshold for [`is_frame`].
pub const DEFAULT_TOL: f64 = 1e-3;

/// Width of the shell beyond the truncation radius used for the tail estimate.
const TAIL_SHELL: f64 = 3.0;

/// Lattice points per gemm chunk.
const CHUNK: usize = 256;

/// How the infinite lattice sum is truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// Keep `γ` with `√((γ₁/b)² + (2πbγ₂)²) ≤ r`, the phase-space radius in
    /// which dilated Hermite functions are concentrated.
    #[default]
    PhaseSpace,
    /// Keep `γ` with `‖γ‖₂ ≤ r`.
    Euclidean,
}

/// `√(2K+1) + √(2d+1) + 10`.
pub fn default_truncation_radius(galerkin_dim: usize, degree: usize) -> f64 {
    ((2 * galerkin_dim + 1) as f64).sqrt() + ((2 * degree + 1) as f64).sqrt() + 10.0
}

/// A Gabor system `G(f, M(Z²))` together with its discretization.
#[derive(Debug, Clone)]
pub struct GaborSystemSpec {
    pub window: VectorWindow,
    pub matrix: LatticeMatrix,
    pub truncation_radius: f64,
    pub galerkin_dim: usize,
    pub kernel: KernelMethod,
    pub truncation: Truncation,
}

impl GaborSystemSpec {
    pub fn new(window: VectorWindow, matrix: LatticeMatrix, galerkin_dim: usize) -> Result<Self> {
        let truncation_radius = default_truncation_radius(galerkin_dim, window.degree());
        let spec = GaborSystemSpec {
            window,
            matrix,
            truncation_radius,
            galerkin_dim,
            kernel: KernelMethod::default(),
            truncation: Truncation::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The system generated by `h^d` on its default grid.
    pub fn hermite(d: usize, matrix: LatticeMatrix, galerkin_dim: usize) -> Result<Self> {
        let window = crate::hermite::hermite_window(d, GridSpec::default_for(d)?)?;
        GaborSystemSpec::new(window, matrix, galerkin_dim)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        self.truncation_radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kernel(mut self, kernel: KernelMethod) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    /// Same system at another Galerkin dimension; the truncation radius is kept.
    pub fn at_dim(&self, galerkin_dim: usize) -> Result<Self> {
        let mut s = self.clone();
        s.galerkin_dim = galerkin_dim;
        s.validate()?;
        Ok(s)
    }

    /// Same lattice and discretization with a different window.
    pub fn with_window(&self, window: VectorWindow) -> Result<Self> {
        let mut s = self.clone();
        s.window = window;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.galerkin_dim <= self.window.degree() {
            return Err(Error::InvalidArgument(format!(
                "Galerkin dimension {} must exceed window degree {}",
                self.galerkin_dim,
                self.window.degree()
            )));
        }
        if !(self.truncation_radius.is_finite() && self.truncation_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation radius must be positive, got {}",
                self.truncation_radius
            )));
        }
        Ok(())
    }

    fn metric(&self) -> LatticeMatrix {
        let b = self.window.dilation();
        match self.truncation {
            Truncation::PhaseSpace => LatticeMatrix::diag(1.0 / b, 2.0 * PI * b).expect("positive dilation"),
            Truncation::Euclidean => LatticeMatrix::identity(),
        }
    }

    /// Lattice points kept by the truncation, in lexicographic order.
    pub fn points(&self) -> Result<Vec<LatticePoint>> {
        Ok(enumerate_in_metric(&self.matrix, &self.metric(), self.truncation_radius, DEFAULT_POINT_BUDGET)?.points)
    }

    /// Points in the shell just outside the truncation radius.
    fn tail_points(&self) -> Result<Vec<LatticePoint>> {
        let metric = self.metric();
        let outer = enumerate_in_metric(&self.matrix, &metric, self.truncation_radius + TAIL_SHELL, DEFAULT_POINT_BUDGET)?;
        let r = self.truncation_radius;
        Ok(outer
            .points
            .into_iter()
            .filter(|p| {
                let z = metric.apply(p.gamma);
                z[0].hypot(z[1]) > r
            })
            .collect())
    }

    fn columns(&self) -> usize {
        self.window.len() * self.galerkin_dim
    }
}

/// Evaluates rows of `A` for a set of lattice points.
struct RowBuilder<'a> {
    spec: &'a GaborSystemSpec,
    quadrature: Option<(GridSpec, Vec<Vec<f64>>)>,
}

impl<'a> RowBuilder<'a> {
    fn new(spec: &'a GaborSystemSpec, points: &[LatticePoint]) -> Result<Self> {
        let quadrature = match spec.kernel {
            KernelMethod::ClosedForm => None,
            KernelMethod::Quadrature => {
                let b = spec.window.dilation();
                let xi_max = points.iter().map(|p| p.gamma[1].abs()).fold(0.0, f64::max);
                let x_max = points.iter().map(|p| p.gamma[0].abs()).fold(0.0, f64::max);
                let cap = GridCapacity::new(spec.galerkin_dim - 1).with_dilation(b).with_max_frequency(xi_max);
                let base = GridSpec::for_capacity(cap)?;
                // wide enough that every kept atom is resolved in full
                let reach = x_max + b * (((2 * spec.window.degree() + 1) as f64).sqrt() + 10.0);
                let grid = GridSpec::new(base.half_width().max(reach), base.step(), cap)?;
                let basis = basis_table(&grid, spec.galerkin_dim, b);
                Some((grid, basis))
            }
        };
        Ok(RowBuilder { spec, quadrature })
    }

    /// Writes `A_{γ,(i,m)}` into `row` (length `(d+1)K`).
    fn fill(&self, p: &LatticePoint, row: &mut [Complex64], w: &mut Vec<Complex64>) {
        let k = self.spec.galerkin_dim;
        let b = self.spec.window.dilation();
        let cols = self.spec.window.degree() + 1;
        match &self.quadrature {
            None => {
                w.resize(k * cols, Complex64::new(0.0, 0.0));
                cross_ambiguity_into(p.gamma[0] / b, b * p.gamma[1], k, cols, w);
            }
            Some((grid, basis)) => {
                *w = cross_ambiguity_quadrature(grid, basis, b, p.gamma[0], p.gamma[1], cols);
            }
        }
        // ⟨h_m, Σ_n c_n (h_n)_γ⟩ = Σ_n conj(c_n) W_{m,n}
        for (i, c) in self.spec.window.coefficients().iter().enumerate() {
            for m in 0..k {
                let wm = &w[m * cols..m * cols + cols];
                row[i * k + m] = c.iter().zip(wm).map(|(cn, v)| cn.conj() * v).sum();
            }
        }
    }

    fn rows(&self, points: &[LatticePoint]) -> Vec<Complex64> {
        let q = self.spec.columns();
        let mut out = vec![Complex64::new(0.0, 0.0); points.len() * q];
        out.par_chunks_mut(q).zip(points.par_iter()).for_each_init(Vec::new, |w, (row, p)| self.fill(p, row, w));
        out
    }
}

/// `A^H A` accumulated over `points` through two real products:
/// with `Z = [X; Y]` and `Z' = [Y; −X]`, `Re = ZᵀZ` and `Im = ZᵀZ'`.
fn gram(builder: &RowBuilder<'_>, points: &[LatticePoint], q: usize) -> DMatrix<Complex64> {
    let mut re = vec![0.0; q * q];
    let mut im = vec![0.0; q * q];
    for chunk in points.chunks(CHUNK) {
        let rows = builder.rows(chunk);
        let p = chunk.len();
        let mut z = vec![0.0; 2 * p * q];
        let mut zp = vec![0.0; 2 * p * q];
        for (r, v) in rows.iter().enumerate() {
            let (pi, c) = (r / q, r % q);
            z[pi * q + c] = v.re;
            z[(p + pi) * q + c] = v.im;
            zp[pi * q + c] = v.im;
            zp[(p + pi) * q + c] = -v.re;
        }
        let k = 2 * p;
        // SAFETY: all slices are sized for the strides below: z and zp are
        // k×q row-major, re and im are q×q row-major.
        unsafe {
            matrixmultiply::dgemm(
                q, k, q, 1.0,
                z.as_ptr(), 1, q as isize,
                z.as_ptr(), q as isize, 1,
                1.0, re.as_mut_ptr(), q as isize, 1,
            );
            matrixmultiply::dgemm(
                q, k, q, 1.0,
                z.as_ptr(), 1, q as isize,
                zp.as_ptr(), q as isize, 1,
                1.0, im.as_mut_ptr(), q as isize, 1,
            );
        }
    }
    let mut s = DMatrix::from_fn(q, q, |a, b| Complex64::new(re[a * q + b], im[a * q + b]));
    // kill roundoff skew
    for a in 0..q {
        s[(a, a)].im = 0.0;
        for b in a + 1..q {
            let v = 0.5 * (s[(a, b)] + s[(b, a)].conj());
            s[(a, b)] = v;
            s[(b, a)] = v.conj();
        }
    }
    s
}

/// The compressed frame operator over the truncated lattice of `spec`.
pub fn assemble_frame_matrix(spec: &GaborSystemSpec) -> Result<DMatrix<Complex64>> {
    let points = spec.points()?;
    assemble_from_points(spec, &points)
}

/// The compressed frame operator over an explicit set of lattice points.
pub fn assemble_from_points(spec: &GaborSystemSpec, points: &[LatticePoint]) -> Result<DMatrix<Complex64>> {
    spec.validate()?;
    let builder = RowBuilder::new(spec, points)?;
    Ok(gram(&builder, points, spec.columns()))
}

/// Extremal eigenpairs of the compressed operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
    pub tail_bound: f64,
}

/// Extremal eigenvalues of a Hermitian matrix, with a residual check on both eigenpairs.
pub fn hermitian_extremes(s: &DMatrix<Complex64>) -> Result<(f64, f64)> {
    let eig = SymmetricEigen::try_new(s.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigen("Hermitian eigensolver hit its iteration cap".into()))?;
    let (mut lo, mut hi) = (0, 0);
    for (i, v) in eig.eigenvalues.iter().enumerate() {
        if *v < eig.eigenvalues[lo] {
            lo = i;
        }
        if *v > eig.eigenvalues[hi] {
            hi = i;
        }
    }
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for idx in [lo, hi] {
        let v: DVector<Complex64> = eig.eigenvectors.column(idx).into_owned();
        let lam = Complex64::new(eig.eigenvalues[idx], 0.0);
        let res = (s * &v - v.map(|x| x * lam)).norm();
        if !(res < 1e-10 * scale) {
            return Err(Error::Eigen(format!(
                "eigenpair residual {res:e} exceeds 1e-10 of the operator norm {scale:e}"
            )));
        }
    }
    Ok((eig.eigenvalues[lo], eig.eigenvalues[hi]))
}

/// Raw extremal eigenvalues plus the truncation tail estimate.
pub fn galerkin_extremes(spec: &GaborSystemSpec) -> Result<Extremes> {
    spec.validate()?;
    let points = spec.points()?;
    let tail = spec.tail_points()?;
    let builder = RowBuilder::new(spec, &points)?;
    let s = gram(&builder, &points, spec.columns());
    let (lambda_min, lambda_max) = hermitian_extremes(&s)?;
    let tail_bound = if tail.is_empty() {
        0.0
    } else {
        let tb = RowBuilder::new(spec, &tail)?;
        tb.rows(&tail).iter().map(|v| v.norm_sqr()).sum()
    };
    Ok(Extremes { lambda_min, lambda_max, points: points.len(), tail_bound })
}

/// Galerkin frame-bound estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    #[serde(rename = "A_est")]
    pub a_est: f64,
    #[serde(rename = "B_est")]
    pub b_est: f64,
    #[serde(rename = "K")]
    pub galerkin_dim: usize,
    pub converged: bool,
    pub tail_bound: f64,
    pub det: f64,
    pub box_norm: f64,
}

impl FrameBounds {
    /// `B/A`; infinite when `A` vanishes.
    pub fn tightness(&self) -> f64 {
        if self.a_est > 0.0 {
            self.b_est / self.a_est
        } else {
            f64::INFINITY
        }
    }

    pub fn ratio(&self) -> f64 {
        if self.b_est > 0.0 {
            self.a_est / self.b_est
        } else {
            0.0
        }
    }
}

fn half_dim(spec: &GaborSystemSpec) -> usize {
    (spec.galerkin_dim / 2).max(spec.window.degree() + 1)
}

/// Extremal eigenvalues at `K`, with convergence judged against the `K/2` run:
/// both bounds must move by at most 5% of `B_K`.
pub fn frame_bounds(spec: &GaborSystemSpec) -> Result<FrameBounds> {
    let full = galerkin_extremes(spec)?;
    let half = galerkin_extremes(&spec.at_dim(half_dim(spec))?)?;
    let a = full.lambda_min.max(0.0);
    let b = full.lambda_max;
    let a_half = half.lambda_min.max(0.0);
    let converged = (a - a_half).abs() <= 0.05 * b && (b - half.lambda_max).abs() <= 0.05 * b;
    Ok(FrameBounds {
        a_est: a,
        b_est: b,
        galerkin_dim: spec.galerkin_dim,
        converged,
        tail_bound: full.tail_bound,
        det: spec.matrix.det(),
        box_norm: box_norm(&spec.matrix),
    })
}

/// Outcome of the numerical frame test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameVerdict {
    Frame,
    NotFrame,
    Inconclusive,
}

/// Frame if converged with `A/B > tol`; not a frame if converged with
/// `A/B < tol/10` and the ratio does not grow when `K` is raised to
/// `max(2K, 128)`; inconclusive otherwise.
pub fn is_frame(spec: &GaborSystemSpec, tol: f64) -> Result<FrameVerdict> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tol must lie in (0, 1), got {tol}")));
    }
    let fb = frame_bounds(spec)?;
    if !fb.converged {
        return Ok(FrameVerdict::Inconclusive);
    }
    let ratio = fb.ratio();
    if ratio > tol {
        return Ok(FrameVerdict::Frame);
    }
    if ratio >= tol / 10.0 {
        return Ok(FrameVerdict::Inconclusive);
    }
    let refined = galerkin_extremes(&spec.at_dim((2 * spec.galerkin_dim).max(REFUTATION_K))?)?;
    let refined_ratio = refined.lambda_min.max(0.0) / refined.lambda_max;
    if refined_ratio <= ratio && refined_ratio < tol / 10.0 {
        Ok(FrameVerdict::NotFrame)
    } else {
        Ok(FrameVerdict::Inconclusive)
    }
}

/// Vector bounds next to the bounds of each scalar component subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateBounds {
    pub a_vec: f64,
    pub b_vec: f64,
    pub a_components: Vec<f64>,
    pub b_components: Vec<f64>,
    /// `n·Σ B_i − B_vec` with `n` the number of components.
    pub slack: f64,
}

/// Compares `B_vec` with `n·Σ_i B_i`, which Cauchy–Schwarz makes an upper bound.
pub fn component_bound_aggregate(spec: &GaborSystemSpec) -> Result<AggregateBounds> {
    let whole = galerkin_extremes(spec)?;
    let n = spec.window.len();
    let mut a_components = Vec::with_capacity(n);
    let mut b_components = Vec::with_capacity(n);
    for i in 0..n {
        let sub = spec.with_window(spec.window.component(i))?;
        let e = galerkin_extremes(&sub)?;
        a_components.push(e.lambda_min.max(0.0));
        b_components.push(e.lambda_max);
    }
    let slack = n as f64 * b_components.iter().sum::<f64>() - whole.lambda_max;
    Ok(AggregateBounds {
        a_vec: whole.lambda_min.max(0.0),
        b_vec: whole.lambda_max,
        a_components,
        b_components,
        slack,
    })
}

/// `|det M| < 1/(d+1)`: sufficient for the scalar system `G(h_d, M(Z²))` to be a frame.
pub fn gl_predicate(m: &LatticeMatrix, d: usize) -> bool {
    covolume(m) < 1.0 / (d + 1) as f64
}

/// `((1 − ‖M‖/C)², (1 + ‖M‖/C)²) / |det M|`, defined for `‖M‖ ≤ C`.
pub fn theorem1_predicted_bounds(m: &LatticeMatrix, c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidArgument(format!("constant must lie in (0, 1], got {c}")));
    }
    let norm = box_norm(m);
    if norm > c {
        return Err(Error::OutsideGuarantee { norm, constant: c });
    }
    let q = norm / c;
    let det = covolume(m);
    Ok(((1.0 - q).powi(2) / det, (1.0 + q).powi(2) / det))
}
