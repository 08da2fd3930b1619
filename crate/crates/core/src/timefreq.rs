//! Time-frequency shifts, discrete inner products, the windowed Fourier
//! transform and dilations.
//!
//! Shifts follow the T-then-M order throughout:
//! `f_γ = T_{γ₁} M_{γ₂} f`, i.e. `f_γ(x) = e^{2πiγ₂(x−γ₁)} f(x−γ₁)`.
//! Inner products are linear in the first argument.

use std::f64::consts::PI;
use std::io::{self, Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{eval_expansion, GridSpec, VectorWindow, SUPPORT_MARGIN};

/// A point `γ = (γ₁, γ₂)` of the time-frequency plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TFPoint {
    pub time_shift: f64,
    pub frequency_shift: f64,
}

impl TFPoint {
    pub fn new(time_shift: f64, frequency_shift: f64) -> Self {
        TFPoint { time_shift, frequency_shift }
    }
}

/// Closed form of a signal built from a Hermite window by shifts and dilations:
///
/// `f_i(x) = phase · e^{2πiξ₀(x−x₀)} · (D_b Σ_n c_{i,n} h_n)(x − x₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticForm {
    pub coeffs: Vec<Vec<Complex64>>,
    pub dilation: f64,
    pub shift: TFPoint,
    pub phase: Complex64,
}

impl AnalyticForm {
    fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len() - 1).max().unwrap_or(0)
    }

    fn support(&self) -> f64 {
        self.dilation * ((2 * self.degree() + 1) as f64).sqrt()
    }

    fn sample(&self, grid: &GridSpec) -> Vec<Vec<Complex64>> {
        let mut buf = vec![0.0; self.degree() + 1];
        let TFPoint { time_shift: x0, frequency_shift: xi0 } = self.shift;
        self.coeffs
            .iter()
            .map(|c| {
                grid.points()
                    .map(|x| {
                        let u = x - x0;
                        let carrier = Complex64::from_polar(1.0, 2.0 * PI * xi0 * u);
                        self.phase * carrier * eval_expansion(c, self.dilation, u, &mut buf[..c.len()])
                    })
                    .collect()
            })
            .collect()
    }
}

/// A vector-valued signal sampled on a grid.
#[derive(Debug, Clone)]
pub struct SampledSignal {
    grid: GridSpec,
    components: Vec<Vec<Complex64>>,
    analytic: Option<AnalyticForm>,
    warnings: Vec<String>,
}

impl SampledSignal {
    /// Wraps raw samples; such a signal can be modulated but not translated or dilated.
    pub fn from_samples(grid: GridSpec, components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("signal needs at least one component".into()));
        }
        for c in &components {
            if c.len() != grid.count() {
                return Err(Error::GridMismatch(format!(
                    "component has {} samples, grid has {}",
                    c.len(),
                    grid.count()
                )));
            }
            if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::InvalidArgument("signal samples must be finite".into()));
            }
        }
        Ok(SampledSignal { grid, components, analytic: None, warnings: Vec::new() })
    }

    /// The window as a signal, keeping its closed form.
    pub fn from_window(w: &VectorWindow) -> Self {
        let analytic = AnalyticForm {
            coeffs: w.coefficients().to_vec(),
            dilation: w.dilation(),
            shift: TFPoint::new(0.0, 0.0),
            phase: Complex64::new(1.0, 0.0),
        };
        SampledSignal {
            grid: *w.grid(),
            components: w.samples().to_vec(),
            analytic: Some(analytic),
            warnings: Vec::new(),
        }
    }

    fn from_analytic(grid: GridSpec, form: AnalyticForm, mut warnings: Vec<String>) -> Result<Self> {
        let reach = form.shift.time_shift.abs() + form.support();
        let margin = grid.half_width() - reach;
        if margin < 0.0 {
            return Err(Error::SupportOverflow(format!(
                "signal reaches |x| = {reach:.3} beyond grid half-width {:.3}",
                grid.half_width()
            )));
        }
        if margin < SUPPORT_MARGIN {
            warnings.push(format!(
                "support margin {margin:.3} below {SUPPORT_MARGIN}; tails are truncated by the grid"
            ));
        }
        grid.check_nyquist(form.degree(), form.dilation, form.shift.frequency_shift)?;
        let components = form.sample(&grid);
        Ok(SampledSignal { grid, components, analytic: Some(form), warnings })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn analytic(&self) -> Option<&AnalyticForm> {
        self.analytic.as_ref()
    }

    /// Support-margin warnings accumulated by the operations that built this signal.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Discrete `L²` norm over all components.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.components.iter().flatten().map(|v| v.norm_sqr()).sum();
        (s * self.grid.step()).sqrt()
    }
}

/// `⟨f, g⟩ = Δ Σ_j Σ_i f_i(x_j) · conj(g_i(x_j))`.
pub fn inner(f: &SampledSignal, g: &SampledSignal) -> Result<Complex64> {
    if !same_grid(&f.grid, &g.grid) {
        return Err(Error::GridMismatch("signals live on different grids".into()));
    }
    if f.len() != g.len() {
        return Err(Error::GridMismatch(format!(
            "component counts differ: {} vs {}",
            f.len(),
            g.len()
        )));
    }
    let s: Complex64 = f
        .components
        .iter()
        .zip(&g.components)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| u * v.conj()))
        .sum();
    Ok(s * f.grid.step())
}

fn same_grid(a: &GridSpec, b: &GridSpec) -> bool {
    a.count() == b.count() && a.step() == b.step() && a.half_width() == b.half_width()
}

/// `T_y f`.
pub fn translate(f: &SampledSignal, y: f64) -> Result<SampledSignal> {
    let form = f.analytic.as_ref().ok_or(Error::NotAnalytic("translation"))?;
    let mut form = form.clone();
    form.shift.time_shift += y;
    SampledSignal::from_analytic(f.grid, form, f.warnings.clone())
}

/// `M_ξ f`; exact on samples, so raw signals are accepted too.
pub fn modulate(f: &SampledSignal, xi: f64) -> Result<SampledSignal> {
    match &f.analytic {
        Some(form) => {
            let mut form = form.clone();
            // e^{2πiξx} = e^{2πiξx₀} e^{2πiξ(x−x₀)}
            form.phase *= Complex64::from_polar(1.0, 2.0 * PI * xi * form.shift.time_shift);
            form.shift.frequency_shift += xi;
            SampledSignal::from_analytic(f.grid, form, f.warnings.clone())
        }
        None => {
            let components = f
                .components
                .iter()
                .map(|c| {
                    c.iter()
                        .enumerate()
                        .map(|(j, v)| v * Complex64::from_polar(1.0, 2.0 * PI * xi * f.grid.point(j)))
                        .collect()
                })
                .collect();
            Ok(SampledSignal { grid: f.grid, components, analytic: None, warnings: f.warnings.clone() })
        }
    }
}

/// `T_{γ₁} M_{γ₂} f`.
pub fn tf_shift(f: &SampledSignal, gamma: TFPoint) -> Result<SampledSignal> {
    translate(&modulate(f, gamma.frequency_shift)?, gamma.time_shift)
}

/// `D_a f(x) = |a|^{-1/2} f(x/|a|)`.
pub fn dilate(f: &SampledSignal, a: f64) -> Result<SampledSignal> {
    if !(a.is_finite() && a != 0.0) {
        return Err(Error::InvalidArgument(format!("dilation must be nonzero, got {a}")));
    }
    let form = f.analytic.as_ref().ok_or(Error::NotAnalytic("dilation"))?;
    let a = a.abs();
    let mut form = form.clone();
    form.shift = TFPoint::new(a * form.shift.time_shift, form.shift.frequency_shift / a);
    form.dilation *= a;
    SampledSignal::from_analytic(f.grid, form, f.warnings.clone())
}

/// The window shifted by `γ`, sampled analytically on its own grid.
pub fn tf_shift_window(w: &VectorWindow, gamma: TFPoint) -> Result<SampledSignal> {
    tf_shift(&SampledSignal::from_window(w), gamma)
}

/// Uniform axis `start + k·step`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0 && start.is_finite()) || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "axis needs finite start, positive step and count, got ({start}, {step}, {count})"
            )));
        }
        Ok(Axis { start, step, count })
    }

    /// `[-L, L]` rounded outward to a multiple of `step`, centred on 0.
    pub fn symmetric(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidArgument(format!("axis half-width must be positive, got {half_width}")));
        }
        let n = (half_width / step - 1e-9).ceil() as usize;
        Axis::new(-(n as f64) * step, step, 2 * n + 1)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.start.abs().max(self.end().abs())
    }

    /// Centred on the origin: `start = -(count-1)/2 · step` exactly.
    pub fn is_symmetric(&self) -> bool {
        self.count % 2 == 1 && self.start == -(((self.count - 1) / 2) as f64) * self.step
    }
}

/// Rectangular grid of `(x, ξ)` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: Axis,
    pub xi: Axis,
}

impl Region {
    pub fn new(x: Axis, xi: Axis) -> Self {
        Region { x, xi }
    }

    /// `[-Lx, Lx] × [-Lξ, Lξ]` with a common step.
    pub fn symmetric(x_half_width: f64, xi_half_width: f64, step: f64) -> Result<Self> {
        Ok(Region { x: Axis::symmetric(x_half_width, step)?, xi: Axis::symmetric(xi_half_width, step)? })
    }

    /// `[-L, L]²` with `L = √(2d+1) + 8`, step 1/16.
    pub fn default_for(d: usize) -> Result<Self> {
        let l = ((2 * d + 1) as f64).sqrt() + 8.0;
        Region::symmetric(l, l, 1.0 / 16.0)
    }

    pub fn node_count(&self) -> usize {
        self.x.count * self.xi.count
    }

    pub fn cell_area(&self) -> f64 {
        self.x.step * self.xi.step
    }
}

/// Complex values on a region, stored x-major: `values[i·nξ + k] = F(x_i, ξ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub x: Axis,
    pub xi: Axis,
    pub values: Vec<Complex64>,
}

const FIELD_MAGIC: &[u8; 8] = b"TFFIELD1";

impl SampledField {
    pub fn new(x: Axis, xi: Axis, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != x.count * xi.count {
            return Err(Error::AxisMismatch(format!(
                "{} values for a {}x{} field",
                values.len(),
                x.count,
                xi.count
            )));
        }
        Ok(SampledField { x, xi, values })
    }

    pub fn zeros(region: Region) -> Self {
        SampledField {
            x: region.x,
            xi: region.xi,
            values: vec![Complex64::new(0.0, 0.0); region.node_count()],
        }
    }

    /// Samples `f(x, ξ)` at every node.
    pub fn from_fn<F>(region: Region, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let nxi = region.xi.count;
        let mut values = vec![Complex64::new(0.0, 0.0); region.node_count()];
        values.par_chunks_mut(nxi).enumerate().for_each(|(i, row)| {
            let x = region.x.point(i);
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(x, region.xi.point(k));
            }
        });
        SampledField { x: region.x, xi: region.xi, values }
    }

    pub fn region(&self) -> Region {
        Region::new(self.x, self.xi)
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.xi.count + k]
    }

    pub fn cell_area(&self) -> f64 {
        self.x.step * self.xi.step
    }

    /// Riemann-sum `L²` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    /// Riemann-sum `L¹` norm.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus on the outermost ring of nodes.
    pub fn boundary_max(&self) -> f64 {
        let (nx, nxi) = (self.x.count, self.xi.count);
        let mut m: f64 = 0.0;
        for i in 0..nx {
            for k in 0..nxi {
                if i == 0 || k == 0 || i + 1 == nx || k + 1 == nxi {
                    m = m.max(self.get(i, k).norm());
                }
            }
        }
        m
    }

    /// Node-wise `self − other` on identical axes.
    pub fn sub(&self, other: &SampledField) -> Result<SampledField> {
        if self.x != other.x || self.xi != other.xi {
            return Err(Error::AxisMismatch("fields live on different axes".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(SampledField { x: self.x, xi: self.xi, values })
    }

    /// CSV rows `x,xi,re,im` with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,xi,re,im")?;
        for i in 0..self.x.count {
            for k in 0..self.xi.count {
                let v = self.get(i, k);
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.x.point(i),
                    self.xi.point(k),
                    v.re,
                    v.im
                )?;
            }
        }
        Ok(())
    }

    /// Binary dump: `TFFIELD1`, `nx`, `nξ` (u32 LE), then `x₀, Δx, ξ₀, Δξ`
    /// (f64 LE), then the real column and the imaginary column in x-major order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        let dim = |n: usize| {
            u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "field too large"))
        };
        out.write_all(FIELD_MAGIC)?;
        out.write_all(&dim(self.x.count)?.to_le_bytes())?;
        out.write_all(&dim(self.xi.count)?.to_le_bytes())?;
        for v in [self.x.start, self.x.step, self.xi.start, self.xi.step] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<SampledField> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::InvalidArgument("not a TFFIELD1 stream".into()));
        }
        let mut u = [0u8; 4];
        input.read_exact(&mut u)?;
        let nx = u32::from_le_bytes(u) as usize;
        input.read_exact(&mut u)?;
        let nxi = u32::from_le_bytes(u) as usize;
        let read_f64 = |input: &mut R| -> Result<f64> {
            let mut b = [0u8; 8];
            input.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let (x0, dx) = (read_f64(&mut input)?, read_f64(&mut input)?);
        let (xi0, dxi) = (read_f64(&mut input)?, read_f64(&mut input)?);
        let n = nx * nxi;
        let mut re = Vec::with_capacity(n);
        for _ in 0..n {
            re.push(read_f64(&mut input)?);
        }
        let mut values = Vec::with_capacity(n);
        for r in re {
            values.push(Complex64::new(r, read_f64(&mut input)?));
        }
        SampledField::new(Axis::new(x0, dx, nx)?, Axis::new(xi0, dxi, nxi)?, values)
    }
}

/// `V_f g(x, ξ) = ⟨g, T_x M_ξ f⟩` over `region`.
///
/// Shifted window values are evaluated analytically; the `ξ` sweep at fixed
/// `x` advances the carrier by a complex rotation per node.
pub fn stft(window: &VectorWindow, g: &SampledSignal, region: Region) -> Result<SampledField> {
    let grid = *window.grid();
    if !same_grid(&grid, g.grid()) {
        return Err(Error::GridMismatch("signal and window grids differ".into()));
    }
    if g.len() != window.len() {
        return Err(Error::GridMismatch(format!(
            "signal has {} components, window has {}",
            g.len(),
            window.len()
        )));
    }
    grid.check_nyquist(window.degree(), window.dilation(), region.xi.max_abs())?;
    grid.check_support(window.degree(), window.dilation(), region.x.max_abs())
        .map_err(|e| Error::Capacity(format!("stft region exceeds grid: {e}")))?;

    let reach = window.dilation() * (((2 * window.degree() + 1) as f64).sqrt() + 10.0);
    let coeffs = window.coefficients();
    let nxi = region.xi.count;
    let mut values = vec![Complex64::new(0.0, 0.0); region.node_count()];
    values.par_chunks_mut(nxi).enumerate().for_each(|(ix, row)| {
        let x = region.x.point(ix);
        let (lo, hi) = grid.index_range(x, reach);
        let mut buf = vec![0.0; window.degree() + 1];
        // p_j = Σ_i g_i(x_j) conj(f_i(x_j − x))
        let p: Vec<Complex64> = (lo..hi)
            .map(|j| {
                let u = grid.point(j) - x;
                coeffs
                    .iter()
                    .zip(g.components())
                    .map(|(c, gi)| gi[j] * eval_expansion(c, window.dilation(), u, &mut buf[..c.len()]).conj())
                    .sum()
            })
            .collect();
        // Σ_j p_j e^{−2πiξ(x_j − x)}, ξ = ξ₀ + kΔξ
        let mut carrier: Vec<Complex64> = (lo..hi)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * region.xi.start * (grid.point(j) - x)))
            .collect();
        let rot: Vec<Complex64> = (lo..hi)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * region.xi.step * (grid.point(j) - x)))
            .collect();
        for (k, out) in row.iter_mut().enumerate() {
            if k > 0 && k % 64 == 0 {
                // resynchronize to keep rotation drift at roundoff level
                let xi = region.xi.point(k);
                for (c, j) in carrier.iter_mut().zip(lo..hi) {
                    *c = Complex64::from_polar(1.0, -2.0 * PI * xi * (grid.point(j) - x));
                }
            }
            let s: Complex64 = p.iter().zip(&carrier).map(|(a, b)| a * b).sum();
            *out = s * grid.step();
            for (c, r) in carrier.iter_mut().zip(&rot) {
                *c *= r;
            }
        }
    });
    SampledField::new(region.x, region.xi, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{dilated_hermite, hermite_window, GridCapacity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(d: usize, xi_max: f64) -> GridSpec {
        GridSpec::for_capacity(GridCapacity::new(d).with_max_frequency(xi_max)).unwrap()
    }

    fn dist(a: &SampledSignal, b: &SampledSignal) -> f64 {
        let s: f64 = a
            .components()
            .iter()
            .zip(b.components())
            .flat_map(|(u, v)| u.iter().zip(v).map(|(p, q)| (p - q).norm_sqr()))
            .sum();
        (s * a.grid().step()).sqrt()
    }

    #[test]
    fn shift_examples() {
        let w = hermite_window(0, grid(0, 4.0)).unwrap();
        let f = SampledSignal::from_window(&w);
        let same = tf_shift_window(&w, TFPoint::new(0.0, 0.0)).unwrap();
        assert!(dist(&f, &same) < 1e-15);

        let m = tf_shift_window(&w, TFPoint::new(0.0, 1.3)).unwrap();
        assert!((m.norm() - f.norm()).abs() < 1e-12);
        for j in (0..w.grid().count()).step_by(37) {
            let x = w.grid().point(j);
            let want = f.components()[0][j] * Complex64::from_polar(1.0, 2.0 * PI * 1.3 * x);
            assert!((m.components()[0][j] - want).norm() < 1e-14);
        }

        let t = tf_shift_window(&w, TFPoint::new(1.0, 0.0)).unwrap();
        let ip = inner(&f, &t).unwrap();
        assert!((ip.re - (-0.25f64).exp()).abs() < 1e-12 && ip.im.abs() < 1e-14);
    }

    #[test]
    fn shift_phase_is_t_then_m() {
        let w = hermite_window(1, grid(1, 4.0)).unwrap();
        let g = TFPoint::new(0.7, -1.1);
        let s = tf_shift_window(&w, g).unwrap();
        for j in (0..w.grid().count()).step_by(53) {
            let x = w.grid().point(j);
            let want = Complex64::from_polar(1.0, 2.0 * PI * g.frequency_shift * (x - g.time_shift))
                * crate::hermite::eval_hermite(1, x - g.time_shift);
            assert!((s.components()[1][j] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn inner_examples() {
        let h0 = SampledSignal::from_window(&hermite_window(0, grid(2, 0.0)).unwrap());
        assert!((inner(&h0, &h0).unwrap().re - 1.0).abs() < 1e-10);
        let h2 = SampledSignal::from_window(&hermite_window(2, grid(2, 0.0)).unwrap());
        assert!((inner(&h2, &h2).unwrap().re - 3.0).abs() < 1e-8);

        let gs = grid(0, 0.0);
        let a = VectorWindow::from_real_coefficients(&[vec![1.0], vec![-1.0]], 1.0, gs).unwrap();
        let b = VectorWindow::from_real_coefficients(&[vec![1.0], vec![1.0]], 1.0, gs).unwrap();
        let ip = inner(&SampledSignal::from_window(&a), &SampledSignal::from_window(&b)).unwrap();
        assert!(ip.norm() < 1e-15);
    }

    #[test]
    fn inner_is_linear_in_first_argument() {
        let w = hermite_window(0, grid(0, 2.0)).unwrap();
        let f = SampledSignal::from_window(&w);
        let g = tf_shift_window(&w, TFPoint::new(0.3, 0.4)).unwrap();
        let scaled = SampledSignal::from_samples(
            *f.grid(),
            vec![f.components()[0].iter().map(|v| v * Complex64::i()).collect()],
        )
        .unwrap();
        let lhs = inner(&scaled, &g).unwrap();
        let rhs = Complex64::i() * inner(&f, &g).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = SampledSignal::from_window(&hermite_window(0, grid(0, 0.0)).unwrap());
        let b = SampledSignal::from_window(&hermite_window(0, grid(20, 0.0)).unwrap());
        assert!(matches!(inner(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn support_overflow_and_margin_warning() {
        let w = hermite_window(0, grid(0, 0.0)).unwrap();
        let hw = w.grid().half_width();
        assert!(matches!(
            tf_shift_window(&w, TFPoint::new(hw, 0.0)),
            Err(Error::SupportOverflow(_))
        ));
        let near = tf_shift_window(&w, TFPoint::new(hw - 3.0, 0.0)).unwrap();
        assert_eq!(near.warnings().len(), 1);
        assert!(tf_shift_window(&w, TFPoint::new(1.0, 0.0)).unwrap().warnings().is_empty());
    }

    #[test]
    fn raw_samples_cannot_translate() {
        let g = grid(0, 0.0);
        let f = SampledSignal::from_samples(g, vec![vec![Complex64::new(1.0, 0.0); g.count()]]).unwrap();
        assert!(matches!(translate(&f, 1.0), Err(Error::NotAnalytic(_))));
        assert!(modulate(&f, 1.0).is_ok());
    }

    #[test]
    fn dilate_examples() {
        let g = GridSpec::new(30.0, 1.0 / 32.0, GridCapacity::new(4)).unwrap();
        let f = SampledSignal::from_window(&hermite_window(0, g).unwrap());
        assert!(dist(&dilate(&f, 1.0).unwrap(), &f) < 1e-15);
        // D_b h_0 is h_{0,b²} in the h_{n,a} = D_{√a} h_n parametrisation
        for b in [0.5, 2.0, 3.0] {
            let d = dilate(&f, b).unwrap();
            assert!((d.norm() - f.norm()).abs() < 1e-8);
            for j in (0..g.count()).step_by(41) {
                let want = dilated_hermite(0, b * b, g.point(j)).unwrap();
                assert!((d.components()[0][j].re - want).abs() < 1e-14);
            }
        }
        assert!(dilate(&f, 0.0).is_err());
    }

    #[test]
    fn dilation_commutes_with_shifts() {
        let g = GridSpec::new(30.0, 1.0 / 64.0, GridCapacity::new(6).with_max_frequency(6.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..8 {
            let n = rng.gen_range(0..4);
            let w = VectorWindow::from_real_coefficients(
                &[(0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()],
                1.0,
                g,
            )
            .unwrap();
            let f = SampledSignal::from_window(&w);
            let b = rng.gen_range(0.5..2.0);
            let xi = rng.gen_range(-2.0..2.0);
            let x = rng.gen_range(-3.0..3.0);

            let lhs = modulate(&dilate(&f, b).unwrap(), xi).unwrap();
            let rhs = dilate(&modulate(&f, b * xi).unwrap(), b).unwrap();
            assert!(dist(&lhs, &rhs) < 1e-8);

            let lhs = translate(&dilate(&f, b).unwrap(), x).unwrap();
            let rhs = dilate(&translate(&f, x / b).unwrap(), b).unwrap();
            assert!(dist(&lhs, &rhs) < 1e-8);
        }
    }

    #[test]
    fn shifts_are_unitary() {
        let w = hermite_window(3, grid(3, 3.0)).unwrap();
        let n0 = SampledSignal::from_window(&w).norm();
        for (x, xi) in [(1.0, 0.5), (-2.5, -2.0), (3.0, 2.9)] {
            let s = tf_shift_window(&w, TFPoint::new(x, xi)).unwrap();
            assert!((s.norm() - n0).abs() < 1e-8);
        }
    }

    #[test]
    fn stft_examples_and_isometry() {
        let d = 0;
        let region = Region::default_for(d).unwrap();
        let g = GridSpec::for_capacity(GridCapacity::new(d).with_max_frequency(region.xi.max_abs())).unwrap();
        let g = GridSpec::new(g.half_width() + region.x.max_abs(), g.step(), g.capacity()).unwrap();
        let w = hermite_window(d, g).unwrap();
        let f = SampledSignal::from_window(&w);
        let v = stft(&w, &f, region).unwrap();
        let c = (region.x.count - 1) / 2;
        let k0 = (region.xi.count - 1) / 2;
        assert!((v.get(c, k0) - 1.0).norm() < 1e-12);
        assert!((v.get(c + 16, k0).re - (-0.25f64).exp()).abs() < 1e-12);
        let energy = v.l2_norm().powi(2);
        assert!((energy - 1.0).abs() < 1e-3, "energy {energy}");
    }

    #[test]
    fn field_binary_round_trip() {
        let region = Region::symmetric(1.0, 0.5, 0.25).unwrap();
        let f = SampledField::from_fn(region, |x, xi| Complex64::new(x, xi * x));
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..8], b"TFFIELD1");
        assert_eq!(buf.len(), 16 + 32 + 16 * f.values.len());
        let back = SampledField::read_binary(&buf[..]).unwrap();
        assert_eq!(back, f);

        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("x,xi,re,im"));
        assert_eq!(text.lines().count(), 1 + f.values.len());
    }

    #[test]
    fn symmetric_axis() {
        let a = Axis::symmetric(1.43, 1.0 / 16.0).unwrap();
        assert!(a.is_symmetric());
        assert_eq!(a.count, 47);
        assert_eq!(a.point(23), 0.0);
    }
}
