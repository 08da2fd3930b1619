//! Hermite functions, dilated Hermite systems and the sampling grid they live on.
//!
//! `h_n` is normalized in `L²(R)` with `h_0(x) = π^{-1/4} e^{-x²/2}` and the
//! `(-1)^n` sign convention of the Rodrigues formula, which makes the
//! three-term recurrence below start with a positive slope for `h_1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default grid spacing.
pub const DEFAULT_STEP: f64 = 1.0 / 32.0;

/// Margin (time units) between effective support and grid edge.
pub const SUPPORT_MARGIN: f64 = 6.0;

/// Effective half-width of `D_b h_n`: the classical turning point `√(2n+1)`, dilated.
pub fn effective_support(n: usize, dilation: f64) -> f64 {
    dilation.abs() * ((2 * n + 1) as f64).sqrt()
}

/// Frequency needed to resolve a Nyquist-safe grid for `D_b h_k` modulated up to `max_frequency`.
pub fn nyquist_requirement(max_index: usize, dilation: f64, max_frequency: f64) -> f64 {
    max_frequency.abs() + ((2 * max_index + 1) as f64).sqrt() / (2.0 * PI * dilation.abs()) + 1.0
}

/// What a grid is declared to carry: Hermite indices up to `max_index` at
/// dilation `dilation`, modulated by frequencies up to `max_frequency`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCapacity {
    pub max_index: usize,
    pub dilation: f64,
    pub max_frequency: f64,
}

impl GridCapacity {
    pub fn new(max_index: usize) -> Self {
        GridCapacity { max_index, dilation: 1.0, max_frequency: 0.0 }
    }

    pub fn with_dilation(mut self, dilation: f64) -> Self {
        self.dilation = dilation;
        self
    }

    pub fn with_max_frequency(mut self, max_frequency: f64) -> Self {
        self.max_frequency = max_frequency;
        self
    }
}

/// Uniform discretization of `[-X, X)` with `count` points `x_j = -X + j·step`.
///
/// `count` is always even so that `x = 0` is a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    step: f64,
    count: usize,
    capacity: GridCapacity,
}

impl GridSpec {
    /// Builds a grid covering at least `[-half_width, half_width)`.
    ///
    /// The half-width is rounded up so that it spans an even number of steps.
    /// The Nyquist guard is checked against `capacity`.
    pub fn new(half_width: f64, step: f64, capacity: GridCapacity) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid half_width must be positive, got {half_width}"
            )));
        }
        if !(capacity.dilation.is_finite() && capacity.dilation > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid dilation capacity must be positive, got {}",
                capacity.dilation
            )));
        }
        let mut count = (2.0 * half_width / step - 1e-9).ceil().max(2.0) as usize;
        if count % 2 == 1 {
            count += 1;
        }
        let grid = GridSpec { half_width: count as f64 * step / 2.0, step, count, capacity };
        grid.check_nyquist(capacity.max_index, capacity.dilation, capacity.max_frequency)?;
        Ok(grid)
    }

    /// Default grid for the given capacity: step 1/32 (halved until the Nyquist
    /// guard holds) and half-width `max(b·√(2K+1) + 8, 12·b)`.
    pub fn for_capacity(capacity: GridCapacity) -> Result<Self> {
        let b = capacity.dilation.abs();
        let half_width = (effective_support(capacity.max_index, b) + 8.0).max(12.0 * b.max(1.0));
        let mut step = DEFAULT_STEP;
        let need = nyquist_requirement(capacity.max_index, b, capacity.max_frequency);
        while 1.0 / (2.0 * step) < need {
            step /= 2.0;
        }
        GridSpec::new(half_width, step, capacity)
    }

    /// Default grid for Hermite indices up to `max_index`, no modulation.
    pub fn default_for(max_index: usize) -> Result<Self> {
        GridSpec::for_capacity(GridCapacity::new(max_index))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn capacity(&self) -> GridCapacity {
        self.capacity
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |j| self.point(j))
    }

    /// Index range `[lo, hi)` of grid points inside `[center - radius, center + radius]`.
    pub fn index_range(&self, center: f64, radius: f64) -> (usize, usize) {
        let lo = ((center - radius + self.half_width) / self.step).ceil().max(0.0);
        let hi = ((center + radius + self.half_width) / self.step).floor() + 1.0;
        let lo = (lo as usize).min(self.count);
        let hi = (hi.max(0.0) as usize).min(self.count);
        (lo, hi.max(lo))
    }

    /// Checks the Nyquist guard for `D_b h_k` modulated up to `max_frequency`.
    pub fn check_nyquist(&self, max_index: usize, dilation: f64, max_frequency: f64) -> Result<()> {
        let available = 1.0 / (2.0 * self.step);
        let required = nyquist_requirement(max_index, dilation, max_frequency);
        if available < required {
            return Err(Error::Nyquist { available, required });
        }
        Ok(())
    }

    /// Checks that `D_b h_k` centred at `center` fits with the standard margin.
    pub fn check_support(&self, max_index: usize, dilation: f64, center: f64) -> Result<()> {
        let need = center.abs() + effective_support(max_index, dilation) + SUPPORT_MARGIN;
        if need > self.half_width + 1e-12 {
            return Err(Error::Capacity(format!(
                "index {max_index} at dilation {dilation} centred at {center} needs half-width {need:.3}, grid has {:.3}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Parameters of a dilated Hermite system `h_{n,a}`, `n ≤ max_index`, on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteSpec {
    max_index: usize,
    dilation: f64,
    grid: GridSpec,
}

impl HermiteSpec {
    pub fn new(max_index: usize, dilation: f64, grid: GridSpec) -> Result<Self> {
        if !(dilation.is_finite() && dilation > 0.0) {
            return Err(Error::InvalidArgument(format!("dilation must be positive, got {dilation}")));
        }
        // h_{n,a} = D_{√a} h_n
        grid.check_support(max_index, dilation.sqrt(), 0.0)?;
        Ok(HermiteSpec { max_index, dilation, grid })
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Samples of `h_{n,a}` for `n = 0..=max_index`, one row per index.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        let b = self.dilation.sqrt();
        let scale = b.powf(-0.5);
        let mut rows = vec![vec![0.0; self.grid.count()]; self.max_index + 1];
        let mut buf = vec![0.0; self.max_index + 1];
        for (j, x) in self.grid.points().enumerate() {
            hermite_values(x / b, &mut buf);
            for (row, v) in rows.iter_mut().zip(&buf) {
                row[j] = scale * v;
            }
        }
        rows
    }
}

/// `h_n(x)` via the normalized three-term recurrence.
pub fn eval_hermite(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[n] = h_n(x)` for `n < out.len()`.
pub fn hermite_values(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// `h_{n,a}(x) = |a|^{-1/4} h_n(|a|^{-1/2} x)`.
pub fn dilated_hermite(n: usize, a: f64, x: f64) -> Result<f64> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("dilation must be a nonzero finite real, got {a}")));
    }
    let a = a.abs();
    Ok(a.powf(-0.25) * eval_hermite(n, x / a.sqrt()))
}

/// Evaluates `D_b Σ_n c_n h_n` at `x`; `buf` must hold `coeffs.len()` entries.
pub(crate) fn eval_expansion(coeffs: &[Complex64], dilation: f64, x: f64, buf: &mut [f64]) -> Complex64 {
    hermite_values(x / dilation, buf);
    let s: Complex64 = coeffs.iter().zip(buf.iter()).map(|(c, h)| c * h).sum();
    s / dilation.sqrt()
}

/// A vector-valued window whose components are finite Hermite expansions
/// sharing one dilation: component `i` is `D_b Σ_n c_{i,n} h_n`.
///
/// Samples on `grid` are cached at construction.
#[derive(Debug, Clone)]
pub struct VectorWindow {
    coeffs: Vec<Vec<Complex64>>,
    dilation: f64,
    grid: GridSpec,
    samples: Vec<Vec<Complex64>>,
}

impl VectorWindow {
    /// Window from Hermite coefficient vectors (one per component).
    pub fn from_coefficients(coeffs: Vec<Vec<Complex64>>, dilation: f64, grid: GridSpec) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidArgument("window needs at least one nonempty component".into()));
        }
        if !(dilation.is_finite() && dilation > 0.0) {
            return Err(Error::InvalidArgument(format!("window dilation must be positive, got {dilation}")));
        }
        if coeffs.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("window coefficients must be finite".into()));
        }
        let degree = coeffs.iter().map(|c| c.len() - 1).max().unwrap_or(0);
        grid.check_support(degree, dilation, 0.0)?;
        grid.check_nyquist(degree, dilation, 0.0)?;

        let mut buf = vec![0.0; degree + 1];
        let mut samples = vec![vec![Complex64::new(0.0, 0.0); grid.count()]; coeffs.len()];
        for (j, x) in grid.points().enumerate() {
            for (row, c) in samples.iter_mut().zip(&coeffs) {
                row[j] = eval_expansion(c, dilation, x, &mut buf[..c.len()]);
            }
        }
        Ok(VectorWindow { coeffs, dilation, grid, samples })
    }

    /// Window with real coefficient vectors.
    pub fn from_real_coefficients(coeffs: &[Vec<f64>], dilation: f64, grid: GridSpec) -> Result<Self> {
        let coeffs = coeffs
            .iter()
            .map(|c| c.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        VectorWindow::from_coefficients(coeffs, dilation, grid)
    }

    /// Number of components.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest Hermite index used by any component.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len() - 1).max().unwrap_or(0)
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn samples(&self) -> &[Vec<Complex64>] {
        &self.samples
    }

    /// Effective half-width of the widest component.
    pub fn support(&self) -> f64 {
        effective_support(self.degree(), self.dilation)
    }

    /// Analytic value of component `i` at `x`.
    pub fn eval(&self, i: usize, x: f64) -> Complex64 {
        let c = &self.coeffs[i];
        let mut buf = vec![0.0; c.len()];
        eval_expansion(c, self.dilation, x, &mut buf)
    }

    /// Single-component window made of component `i`.
    pub fn component(&self, i: usize) -> VectorWindow {
        VectorWindow {
            coeffs: vec![self.coeffs[i].clone()],
            dilation: self.dilation,
            grid: self.grid,
            samples: vec![self.samples[i].clone()],
        }
    }

    /// `D_s` applied to every component, resampled on `grid`.
    pub fn dilated(&self, s: f64, grid: GridSpec) -> Result<VectorWindow> {
        if !(s.is_finite() && s != 0.0) {
            return Err(Error::InvalidArgument(format!("dilation must be nonzero, got {s}")));
        }
        VectorWindow::from_coefficients(self.coeffs.clone(), self.dilation * s.abs(), grid)
    }

    /// Exact Gram matrix `⟨f_i, f_j⟩` from the coefficients.
    pub fn gram(&self) -> Vec<Vec<Complex64>> {
        let n = self.len();
        let mut g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = self.coeffs[i]
                    .iter()
                    .zip(&self.coeffs[j])
                    .map(|(a, b)| a * b.conj())
                    .sum();
            }
        }
        g
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    /// `Σ_i ‖f_i‖²`.
    pub fn total_energy(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm_sqr()).sum()
    }
}

/// The window `h^d = (h_0, …, h_d)` sampled on `grid`.
pub fn hermite_window(d: usize, grid: GridSpec) -> Result<VectorWindow> {
    let coeffs: Vec<Vec<Complex64>> = (0..=d)
        .map(|i| {
            let mut c = vec![Complex64::new(0.0, 0.0); i + 1];
            c[i] = Complex64::new(1.0, 0.0);
            c
        })
        .collect();
    VectorWindow::from_coefficients(coeffs, 1.0, grid)
}

/// Discrete residual of `H h_n = (2n+1) h_n`, relative to `‖h_n‖₂`.
pub fn hermite_operator_residual(n: usize, grid: &GridSpec) -> f64 {
    scaled_hermite_operator_residual(n, 1.0, grid).expect("a = 1 is a valid dilation")
}

/// Discrete residual of `H_a h_{n,a} = |a|(2n+1) h_{n,a}` with
/// `H_a f = x² f − a² f''`, relative to `‖h_{n,a}‖₂`.
///
/// Second derivatives are centred differences; the two boundary points are
/// excluded from the norm.
pub fn scaled_hermite_operator_residual(n: usize, a: f64, grid: &GridSpec) -> Result<f64> {
    let h: Vec<f64> = grid
        .points()
        .map(|x| dilated_hermite(n, a, x))
        .collect::<Result<_>>()?;
    let dx2 = grid.step() * grid.step();
    let eigen = a.abs() * (2 * n + 1) as f64;
    let mut res = 0.0;
    let mut norm = 0.0;
    for j in 1..h.len() - 1 {
        let x = grid.point(j);
        let second = (h[j + 1] - 2.0 * h[j] + h[j - 1]) / dx2;
        let r = x * x * h[j] - a * a * second - eigen * h[j];
        res += r * r;
        norm += h[j] * h[j];
    }
    Ok((res / norm).sqrt())
}

/// `d(λ) = ⌊1/(2|λ|) − 1/2⌋`; may be `-1`.
///
/// `1/|λ|` within a few ulps of an odd integer is snapped to it, so inputs
/// like `1.0/3.0` land on the closed end of `(1/(2d+3), 1/(2d+1)]`.
pub fn dlambda(lambda: f64) -> Result<i64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be nonzero and finite, got {lambda}")));
    }
    let mut q = 1.0 / lambda.abs();
    let r = q.round();
    if (q - r).abs() <= 8.0 * f64::EPSILON * q {
        q = r;
    }
    Ok(((q - 1.0) / 2.0).floor() as i64)
}
