//! Oscillation-based frame certificates.
//!
//! For a window with orthonormal components the ambiguity function
//! `F = V_f f` reproduces its range under twisted convolution. If the lattice
//! cell `M([−½,½)²)` fits in a disc of radius `r = ‖M‖` and
//! `R = ‖osc_r(F)‖₁ < 1`, sampling on `M(Z²)` is stable and
//! `(1 ∓ R)²/|det M|` are frame bounds.
//!
//! The ambiguity function uses the symmetric phase
//! `F(x, ξ) = e^{−πixξ} Σ_i ⟨f_i, T_x M_ξ f_i⟩`, the normalization under which
//! the kernel `e^{πi(xξ′ − x′ξ)}` makes `F ♯ F = F` hold.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::VectorWindow;
use crate::kernel::cross_ambiguity_into;
use crate::lattice::{box_norm, covolume, LatticeMatrix};
use crate::timefreq::{stft, Region, SampledField, SampledSignal};

/// Relative boundary magnitude above which a field is treated as not decaying.
pub const DECAY_TOL: f64 = 1e-8;

/// Largest admissible Gram defect for certificate windows.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// The ambiguity function of a window with its mass diagnostic.
#[derive(Debug, Clone)]
pub struct AmbiguityField {
    pub field: SampledField,
    pub window_degree: usize,
    /// Riemann-sum `‖F‖²`; equals the number of components for orthonormal windows.
    pub mass_check: f64,
}

/// `[−L b, L b] × [−L/(2πb), L/(2πb)]` with `L = √(2d+1) + 8`.
///
/// The window's ambiguity decays like `e^{−((x/b)² + (2πbξ)²)/4}`, so the
/// frequency extent is scaled to match.
pub fn certificate_region(w: &VectorWindow, step: f64) -> Result<Region> {
    let l = ((2 * w.degree() + 1) as f64).sqrt() + 8.0;
    let b = w.dilation();
    Region::symmetric(l * b, l / (2.0 * PI * b), step)
}

/// Largest `2^{−k}` not above `min(1/16, r/4)`.
pub fn certificate_step(r: f64) -> f64 {
    let cap = (1.0f64 / 16.0).min(r / 4.0);
    let mut step = 1.0f64 / 16.0;
    while step > cap {
        step /= 2.0;
    }
    step
}

/// Ambiguity function from the closed-form Hermite cross-ambiguity.
pub fn ambiguity(w: &VectorWindow, region: Region) -> Result<AmbiguityField> {
    let cols = w.degree() + 1;
    let b = w.dilation();
    let coeffs = w.coefficients();
    let field = SampledField::from_fn(region, |x, xi| {
        let mut tab = [Complex64::new(0.0, 0.0); 64];
        let mut heap;
        let buf: &mut [Complex64] = if cols * cols <= tab.len() {
            &mut tab[..cols * cols]
        } else {
            heap = vec![Complex64::new(0.0, 0.0); cols * cols];
            &mut heap
        };
        cross_ambiguity_into(x / b, b * xi, cols, cols, buf);
        let mut s = Complex64::new(0.0, 0.0);
        for c in coeffs {
            for (m, cm) in c.iter().enumerate() {
                for (n, cn) in c.iter().enumerate() {
                    s += cm * cn.conj() * buf[m * cols + n];
                }
            }
        }
        s * Complex64::from_polar(1.0, -PI * x * xi)
    });
    let mass_check = field.l2_norm().powi(2);
    Ok(AmbiguityField { field, window_degree: w.degree(), mass_check })
}

/// Ambiguity function by grid quadrature, `e^{−πixξ} V_f f`.
///
/// The window grid must carry the region (support and Nyquist).
pub fn ambiguity_quadrature(w: &VectorWindow, region: Region) -> Result<AmbiguityField> {
    let v = stft(w, &SampledSignal::from_window(w), region)?;
    let mut field = v;
    for i in 0..field.x.count {
        let x = field.x.point(i);
        for k in 0..field.xi.count {
            let xi = field.xi.point(k);
            field.values[i * field.xi.count + k] *= Complex64::from_polar(1.0, -PI * x * xi);
        }
    }
    let mass_check = field.l2_norm().powi(2);
    Ok(AmbiguityField { field, window_degree: w.degree(), mass_check })
}

/// Result of a twisted convolution; values within `boundary_ring` nodes of
/// the region edge miss contributions from outside the region.
#[derive(Debug, Clone)]
pub struct TwistedField {
    pub field: SampledField,
    pub boundary_ring: usize,
}

fn check_decay(f: &SampledField) -> Result<()> {
    let peak = f.max_abs();
    if peak == 0.0 {
        return Ok(());
    }
    let rel = f.boundary_max() / peak;
    if rel > DECAY_TOL {
        return Err(Error::InsufficientDecay(rel));
    }
    Ok(())
}

/// `(G ♯ F)(x, ξ) = ∫ G(x′, ξ′) F(x − x′, ξ − ξ′) e^{πi(xξ′ − x′ξ)} dx′ dξ′`
/// as a direct Riemann sum on shared, origin-centred axes.
pub fn twisted_convolve(g: &SampledField, f: &SampledField) -> Result<TwistedField> {
    if g.x != f.x || g.xi != f.xi {
        return Err(Error::AxisMismatch("twisted convolution needs identical axes".into()));
    }
    if !g.x.is_symmetric() || !g.xi.is_symmetric() {
        return Err(Error::AxisMismatch("twisted convolution needs origin-centred axes".into()));
    }
    check_decay(g)?;
    check_decay(f)?;

    let (nx, nxi) = (g.x.count, g.xi.count);
    let (cx, cxi) = ((nx - 1) / 2, (nxi - 1) / 2);
    let xs: Vec<f64> = g.x.points().collect();
    let xis: Vec<f64> = g.xi.points().collect();
    // e1[i][k′] = e^{πi x_i ξ′_k′}, e2[i′][k] = e^{−πi x′_i′ ξ_k}
    let e1: Vec<Complex64> = xs
        .iter()
        .flat_map(|&x| xis.iter().map(move |&xi| Complex64::from_polar(1.0, PI * x * xi)))
        .collect();
    let e2: Vec<Complex64> = e1.iter().map(|v| v.conj()).collect();
    let weight = g.cell_area();

    let mut values = vec![Complex64::new(0.0, 0.0); nx * nxi];
    values.par_chunks_mut(nxi).enumerate().for_each(|(i, out)| {
        let mut gp = vec![Complex64::new(0.0, 0.0); nxi];
        for ip in 0..nx {
            let di = i + cx;
            if di < ip || di - ip >= nx {
                continue;
            }
            let frow = &f.values[(di - ip) * nxi..(di - ip + 1) * nxi];
            let grow = &g.values[ip * nxi..(ip + 1) * nxi];
            if grow.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
                continue;
            }
            for ((p, gv), e) in gp.iter_mut().zip(grow).zip(&e1[i * nxi..(i + 1) * nxi]) {
                *p = gv * e;
            }
            for (k, o) in out.iter_mut().enumerate() {
                // k − k′ + c ∈ [0, nξ)
                let lo = (k + cxi + 1).saturating_sub(nxi);
                let hi = (k + cxi).min(nxi - 1);
                let mut acc = Complex64::new(0.0, 0.0);
                for kp in lo..=hi {
                    acc += gp[kp] * frow[k + cxi - kp];
                }
                *o += acc * e2[ip * nxi + k];
            }
        }
        for o in out.iter_mut() {
            *o *= weight;
        }
    });
    Ok(TwistedField { field: SampledField::new(g.x, g.xi, values)?, boundary_ring: 1 })
}

/// Node offsets `(di, dk)` strictly inside the disc of radius `r`.
fn disc_offsets(f: &SampledField, r: f64) -> Result<Vec<(isize, isize)>> {
    let (hx, hxi) = (f.x.step, f.xi.step);
    let nx = (r / hx).ceil() as isize;
    let nxi = (r / hxi).ceil() as isize;
    let mut offsets = Vec::new();
    for di in -nx..=nx {
        for dk in -nxi..=nxi {
            let d2 = (di as f64 * hx).powi(2) + (dk as f64 * hxi).powi(2);
            if d2 < r * r {
                offsets.push((di, dk));
            }
        }
    }
    if offsets.len() <= 1 {
        return Err(Error::Resolution { radius: r, step: hx.min(hxi) });
    }
    Ok(offsets)
}

/// `osc_r(F)(p) = max |F(p) − F(q)|` over nodes `q` with `|p − q| < r`.
///
/// Neighbours outside the region are ignored. The result is stored in the
/// real part.
pub fn oscillation(f: &SampledField, r: f64) -> Result<SampledField> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let offsets = disc_offsets(f, r)?;
    let (nx, nxi) = (f.x.count as isize, f.xi.count as isize);
    let mut values = vec![Complex64::new(0.0, 0.0); f.values.len()];
    values.par_chunks_mut(nxi as usize).enumerate().for_each(|(i, row)| {
        let i = i as isize;
        for (k, out) in row.iter_mut().enumerate() {
            let k = k as isize;
            let p = f.values[(i * nxi + k) as usize];
            let mut m: f64 = 0.0;
            for &(di, dk) in &offsets {
                let (a, b) = (i + di, k + dk);
                if a < 0 || b < 0 || a >= nx || b >= nxi {
                    continue;
                }
                m = m.max((p - f.values[(a * nxi + b) as usize]).norm());
            }
            *out = Complex64::new(m, 0.0);
        }
    });
    SampledField::new(f.x, f.xi, values)
}

/// `‖osc_r(F)‖₁` as a Riemann sum.
pub fn osc_l1(f: &SampledField, r: f64) -> Result<f64> {
    let osc = oscillation(f, r)?;
    Ok(osc.values.iter().map(|v| v.re).sum::<f64>() * osc.cell_area())
}

/// `∫ |∇F|` by forward differences.
pub fn total_variation(f: &SampledField) -> f64 {
    let (nx, nxi) = (f.x.count, f.xi.count);
    let (hx, hxi) = (f.x.step, f.xi.step);
    let mut tv = 0.0;
    for i in 0..nx {
        for k in 0..nxi {
            let p = f.get(i, k);
            let gx = if i + 1 < nx { (f.get(i + 1, k) - p).norm() / hx } else { 0.0 };
            let gxi = if k + 1 < nxi { (f.get(i, k + 1) - p).norm() / hxi } else { 0.0 };
            tv += gx.hypot(gxi);
        }
    }
    tv * hx * hxi
}

/// Guaranteed frame bounds from the measured oscillation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub r: f64,
    #[serde(rename = "R")]
    pub ratio: f64,
    #[serde(rename = "A_cert")]
    pub a_cert: f64,
    #[serde(rename = "B_cert")]
    pub b_cert: f64,
    pub valid: bool,
    /// Discretization error bar `2·step·TV(F)/|det M|`, reported and not folded in.
    pub eps_disc: f64,
    pub det: f64,
    pub d: usize,
}

fn require_orthonormal(w: &VectorWindow) -> Result<()> {
    let defect = w.orthonormality_defect();
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(())
}

/// Certificate on the default region at step [`certificate_step`]`(‖M‖)`.
pub fn certificate(w: &VectorWindow, m: &LatticeMatrix) -> Result<Certificate> {
    certificate_with_step(w, m, certificate_step(box_norm(m)))
}

pub fn certificate_with_step(w: &VectorWindow, m: &LatticeMatrix, step: f64) -> Result<Certificate> {
    certificate_on_region(w, m, certificate_region(w, step)?)
}

/// Certificate measured on an explicit region; the error bar uses the coarser axis step.
pub fn certificate_on_region(w: &VectorWindow, m: &LatticeMatrix, region: Region) -> Result<Certificate> {
    require_orthonormal(w)?;
    let step = region.x.step.max(region.xi.step);
    let r = box_norm(m);
    let f = ambiguity(w, region)?;
    let ratio = osc_l1(&f.field, r)?;
    let det = covolume(m);
    let valid = ratio < 1.0;
    let a_cert = if valid { (1.0 - ratio).powi(2) / det } else { 0.0 };
    Ok(Certificate {
        r,
        ratio,
        a_cert,
        b_cert: (1.0 + ratio).powi(2) / det,
        valid,
        eps_disc: 2.0 * step * total_variation(&f.field) / det,
        det: m.det(),
        d: w.degree(),
    })
}

/// Lower estimate of the constant `C` with `‖osc_r(F)‖₁ ≤ r/C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CLowerEstimate {
    pub value: f64,
    pub step: f64,
    /// `2·step·TV(F)`, the discretization scale of each measured ratio.
    pub discretization: f64,
}

/// `min_r r/R(r)` over `r_list`, measured on one region at a step fine enough
/// for the smallest radius.
pub fn c_lower_estimate(w: &VectorWindow, r_list: &[f64]) -> Result<CLowerEstimate> {
    require_orthonormal(w)?;
    if r_list.is_empty() {
        return Err(Error::InvalidArgument("radius list is empty".into()));
    }
    let r_min = r_list.iter().copied().fold(f64::INFINITY, f64::min);
    if !(r_min > 0.0) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let step = certificate_step(r_min);
    let f = ambiguity(w, certificate_region(w, step)?)?;
    let mut value = f64::INFINITY;
    for &r in r_list {
        let ratio = osc_l1(&f.field, r)?;
        if ratio == 0.0 {
            return Err(Error::GridFailure(format!("oscillation vanished at r = {r}")));
        }
        value = value.min(r / ratio);
    }
    Ok(CLowerEstimate { value, step, discretization: 2.0 * step * total_variation(&f.field) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{hermite_window, GridCapacity, GridSpec};
    use crate::timefreq::Axis;

    fn window(d: usize) -> VectorWindow {
        hermite_window(d, GridSpec::default_for(d).unwrap()).unwrap()
    }

    fn centre(f: &SampledField) -> Complex64 {
        f.get((f.x.count - 1) / 2, (f.xi.count - 1) / 2)
    }

    #[test]
    fn ambiguity_examples() {
        let w0 = window(0);
        let f = ambiguity(&w0, certificate_region(&w0, 1.0 / 16.0).unwrap()).unwrap();
        assert!((centre(&f.field) - 1.0).norm() < 1e-12);
        let i1 = (f.field.x.count - 1) / 2 + 16;
        let v = f.field.get(i1, (f.field.xi.count - 1) / 2);
        assert!((v.norm() - (-0.25f64).exp()).abs() < 1e-12);
        assert!((f.mass_check - 1.0).abs() < 1e-6);

        let w1 = window(1);
        let f1 = ambiguity(&w1, certificate_region(&w1, 1.0 / 16.0).unwrap()).unwrap();
        assert!((centre(&f1.field) - 2.0).norm() < 1e-6);
        assert!(f1.field.max_abs() <= 2.0 + 1e-12);
        assert!((f1.mass_check - 2.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_ambiguity_matches_quadrature() {
        for d in [0usize, 2] {
            let l = ((2 * d + 1) as f64).sqrt() + 8.0;
            let region = Region::symmetric(l, l / (2.0 * PI), 1.0 / 8.0).unwrap();
            let cap = GridCapacity::new(d).with_max_frequency(region.xi.max_abs());
            let base = GridSpec::for_capacity(cap).unwrap();
            let g = GridSpec::new(base.half_width() + l, base.step(), cap).unwrap();
            let w = hermite_window(d, g).unwrap();
            let a = ambiguity(&w, region).unwrap();
            let b = ambiguity_quadrature(&w, region).unwrap();
            let diff = a.field.sub(&b.field).unwrap().max_abs();
            assert!(diff < 1e-10, "d = {d}: {diff:e}");
        }
    }

    #[test]
    fn twisted_zero_and_axis_checks() {
        let w = window(0);
        let f = ambiguity(&w, certificate_region(&w, 1.0 / 8.0).unwrap()).unwrap().field;
        let zero = SampledField::zeros(f.region());
        let out = twisted_convolve(&zero, &f).unwrap();
        assert_eq!(out.field.max_abs(), 0.0);

        let other = SampledField::zeros(Region::symmetric(2.0, 1.0, 0.125).unwrap());
        assert!(matches!(twisted_convolve(&other, &f), Err(Error::AxisMismatch(_))));

        let flat = SampledField::from_fn(f.region(), |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(twisted_convolve(&flat, &f), Err(Error::InsufficientDecay(_))));
    }

    #[test]
    fn twisted_reduces_to_convolution_on_xi_zero_line() {
        // fields supported on the ξ = 0 row: the phase vanishes and ♯ is plain convolution
        let x = Axis::symmetric(6.0, 0.125).unwrap();
        let xi = Axis::symmetric(0.5, 0.125).unwrap();
        let region = Region::new(x, xi);
        let bump = |s: f64| move |x: f64, xi: f64| {
            if xi == 0.0 { Complex64::new((-(x - s) * (x - s)).exp(), 0.0) } else { Complex64::new(0.0, 0.0) }
        };
        let g = SampledField::from_fn(region, bump(0.5));
        let f = SampledField::from_fn(region, bump(-0.25));
        let out = twisted_convolve(&g, &f).unwrap().field;
        let k0 = (xi.count - 1) / 2;
        for i in 0..x.count {
            let xv = x.point(i);
            let mut direct = 0.0;
            for ip in 0..x.count {
                let xp = x.point(ip);
                direct += (-(xp - 0.5) * (xp - 0.5)).exp() * (-(xv - xp + 0.25) * (xv - xp + 0.25)).exp();
            }
            direct *= x.step * xi.step;
            let got = out.get(i, k0);
            assert!((got.re - direct).abs() < 1e-13 && got.im.abs() < 1e-13);
        }
    }

    #[test]
    fn reproducing_identity_for_gaussian() {
        let w = window(0);
        let mut prev = f64::INFINITY;
        for step in [0.25, 0.125, 0.0625] {
            let f = ambiguity(&w, certificate_region(&w, step).unwrap()).unwrap().field;
            let ff = twisted_convolve(&f, &f).unwrap().field;
            let rel = ff.sub(&f).unwrap().l2_norm() / f.l2_norm();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn oscillation_examples() {
        let region = Region::symmetric(2.0, 2.0, 1.0 / 16.0).unwrap();
        let c = SampledField::from_fn(region, |_, _| Complex64::new(3.0, -1.0));
        assert_eq!(osc_l1(&c, 0.3).unwrap(), 0.0);

        let lin = SampledField::from_fn(region, |x, _| Complex64::new(x, 0.0));
        let r = 0.3;
        let o = oscillation(&lin, r).unwrap();
        let (i, k) = ((region.x.count - 1) / 2, (region.xi.count - 1) / 2);
        let v = o.get(i, k).re;
        assert!(v <= r && r - v <= region.x.step + 1e-12, "{v}");

        let o1 = oscillation(&lin, 0.2).unwrap();
        for (a, b) in o1.values.iter().zip(&o.values) {
            assert!(a.re <= b.re);
        }
        assert!(matches!(oscillation(&lin, 0.05), Err(Error::Resolution { .. })));
        assert!(matches!(oscillation(&lin, 1.0 / 16.0), Err(Error::Resolution { .. })));
    }

    #[test]
    fn ratio_grows_with_radius() {
        let w = window(0);
        let f = ambiguity(&w, certificate_region(&w, 1.0 / 32.0).unwrap()).unwrap().field;
        let mut prev = 0.0;
        for r in [0.05, 0.1, 0.2, 0.3] {
            let v = osc_l1(&f, r).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let r02 = osc_l1(&f, 0.2).unwrap();
        assert!(r02.is_finite() && r02 > 0.0);
    }

    #[test]
    fn certificate_examples() {
        let w = window(0);
        let ok = certificate(&w, &LatticeMatrix::scalar(0.1).unwrap()).unwrap();
        assert!(ok.valid && ok.a_cert > 0.0 && ok.a_cert <= ok.b_cert);
        assert!((ok.a_cert - (1.0 - ok.ratio).powi(2) / 0.01).abs() < 1e-9);

        let crit = certificate(&w, &LatticeMatrix::identity()).unwrap();
        assert!(crit.ratio >= 1.0 && !crit.valid && crit.a_cert == 0.0);

        let twin = VectorWindow::from_real_coefficients(&[vec![1.0], vec![1.0]], 1.0, *w.grid()).unwrap();
        assert!(matches!(
            certificate(&twin, &LatticeMatrix::scalar(0.1).unwrap()),
            Err(Error::NotOrthonormal(_))
        ));

        let json = serde_json::to_string(&ok).unwrap();
        for key in ["\"r\"", "\"R\"", "\"A_cert\"", "\"B_cert\"", "\"valid\"", "\"eps_disc\"", "\"det\"", "\"d\""] {
            assert!(json.contains(key), "{key}");
        }
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ok);
    }

    #[test]
    fn c_lower_examples() {
        let w = window(0);
        let small = c_lower_estimate(&w, &[0.2]).unwrap();
        assert!(small.value > 0.0 && small.value <= 1.0);
        let big = c_lower_estimate(&w, &[0.2, 0.3, 0.4]).unwrap();
        assert!(big.value <= small.value + 1e-15);
        assert!(c_lower_estimate(&w, &[]).is_err());
    }
}
