//! Tightness scans along `t·M₀`, empirical constant estimates and the
//! dilation-covariance check.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frameop::{frame_bounds, FrameBounds, GaborSystemSpec};
use crate::hermite::{hermite_window, GridCapacity, GridSpec};
use crate::kernel::KernelMethod;
use crate::lattice::{box_norm, covolume, LatticeMatrix};

/// Tag of the min-inversion estimator.
pub const THEOREM1_INVERSION: &str = "theorem1-inversion";

/// Usable records needed by [`estimate_cstar`].
pub const MIN_RECORDS: usize = 3;

/// `t = 0.5·2^{−k/2}`, `k = 0..=6`.
pub fn default_t_list() -> Vec<f64> {
    (0..=6).map(|k| 0.5 * 2f64.powf(-(k as f64) / 2.0)).collect()
}

/// One row of a tightness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub d: usize,
    pub t: f64,
    pub box_norm: f64,
    pub det: f64,
    #[serde(rename = "A_est")]
    pub a_est: f64,
    #[serde(rename = "B_est")]
    pub b_est: f64,
    pub tightness: f64,
    /// `‖M_t‖ / (1 − √(A·|det M_t|))`, present when `A·|det M_t| < 1`.
    #[serde(rename = "C_emp")]
    pub c_emp: Option<f64>,
    pub converged: bool,
}

impl ScanRecord {
    pub fn from_bounds(d: usize, t: f64, fb: &FrameBounds) -> Self {
        let det = fb.det.abs();
        let ad = fb.a_est * det;
        let c_emp = (ad < 1.0).then(|| fb.box_norm / (1.0 - ad.sqrt()));
        ScanRecord {
            d,
            t,
            box_norm: fb.box_norm,
            det,
            a_est: fb.a_est,
            b_est: fb.b_est,
            tightness: fb.tightness(),
            c_emp,
            converged: fb.converged,
        }
    }
}

/// Frame bounds of `(h^d, t·M₀)` for each `t`, in the order given.
pub fn tightness_scan(m0: &LatticeMatrix, d: usize, t_list: &[f64], galerkin_dim: usize) -> Result<Vec<ScanRecord>> {
    if t_list.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidArgument("scan parameters t must be positive".into()));
    }
    if t_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("scan parameters t must be strictly descending".into()));
    }
    let window = hermite_window(d, GridSpec::default_for(d)?)?;
    t_list
        .par_iter()
        .map(|&t| {
            let spec = GaborSystemSpec::new(window.clone(), m0.scaled(t)?, galerkin_dim)?;
            Ok(ScanRecord::from_bounds(d, t, &frame_bounds(&spec)?))
        })
        .collect()
}

/// An empirical constant with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEstimate {
    pub d: usize,
    pub value: f64,
    pub t_range: (f64, f64),
    pub method: String,
}

/// `min_t C_emp(t)` over records with `A·|det| < 1`: the largest constant
/// compatible with every measured lower bound under the form
/// `A ≥ (1 − ‖M‖/C)²/|det M|`. A heuristic fit, not a rigorous bound.
pub fn estimate_cstar(records: &[ScanRecord]) -> Result<CEstimate> {
    let usable: Vec<(f64, f64)> = records.iter().filter_map(|r| r.c_emp.map(|c| (r.t, c))).collect();
    if usable.len() < MIN_RECORDS {
        return Err(Error::InsufficientRecords { found: usable.len(), needed: MIN_RECORDS });
    }
    let value = usable.iter().map(|u| u.1).fold(f64::INFINITY, f64::min);
    let lo = usable.iter().map(|u| u.0).fold(f64::INFINITY, f64::min);
    let hi = usable.iter().map(|u| u.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(CEstimate { d: records[0].d, value, t_range: (lo, hi), method: THEOREM1_INVERSION.into() })
}

/// One row of the `√(2d+1)` probe; `c_emp` is absent when too few records were usable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtLawRow {
    pub d: usize,
    #[serde(rename = "C_emp")]
    pub c_emp: Option<f64>,
    pub scaled: Option<f64>,
    pub records: Vec<ScanRecord>,
}

/// `C_emp(d)` and `C_emp(d)·√(2d+1)` for each `d`; reports only.
pub fn sqrt_law_probe(
    d_list: &[usize],
    m0: &LatticeMatrix,
    t_list: &[f64],
    galerkin_dim: usize,
) -> Result<Vec<SqrtLawRow>> {
    if d_list.is_empty() {
        return Err(Error::InvalidArgument("degree list is empty".into()));
    }
    d_list
        .iter()
        .map(|&d| {
            let records = tightness_scan(m0, d, t_list, galerkin_dim)?;
            let c = match estimate_cstar(&records) {
                Ok(e) => Some(e.value),
                Err(Error::InsufficientRecords { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SqrtLawRow { d, c_emp: c, scaled: c.map(|c| c * ((2 * d + 1) as f64).sqrt()), records })
        })
        .collect()
}

/// Largest relative deviation between the bounds of `(h^d, M)` and of
/// `(D_b h^d, diag(b, 1/b)·M)`; both systems use the quadrature kernel and
/// a Galerkin basis dilated like their window.
pub fn dilation_covariance_check(d: usize, m: &LatticeMatrix, b: f64, galerkin_dim: usize) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation must be positive, got {b}")));
    }
    if b == 1.0 {
        return Ok(0.0);
    }
    let build = |dilation: f64, matrix: LatticeMatrix| -> Result<FrameBounds> {
        let grid = GridSpec::for_capacity(GridCapacity::new(d).with_dilation(dilation))?;
        let window = hermite_window(d, grid)?.dilated(dilation, grid)?;
        let spec = GaborSystemSpec::new(window, matrix, galerkin_dim)?.with_kernel(KernelMethod::Quadrature);
        frame_bounds(&spec)
    };
    let base = build(1.0, *m)?;
    let moved = build(b, m.left_mul(&LatticeMatrix::diag(b, 1.0 / b)?)?)?;
    let rel = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) };
    Ok(rel(base.a_est, moved.a_est).max(rel(base.b_est, moved.b_est)))
}

pub const CSV_HEADER: &str = "d,t,box_norm,det,A_est,B_est,tightness,C_emp,converged";

/// Writes scan records as CSV with 17 significant digits.
pub fn write_scan_csv<W: Write>(records: &[ScanRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let c = r.c_emp.unwrap_or(f64::NAN);
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.d, r.t, r.box_norm, r.det, r.a_est, r.b_est, r.tightness, c, r.converged
        )?;
    }
    Ok(())
}

/// Rows of the determinant ladder `det_max·k/steps`, `k = 1..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlRow {
    pub det: f64,
    pub d: usize,
    pub threshold: f64,
    pub frame_guaranteed: bool,
}

pub fn gl_grid(d: usize, det_max: f64, steps: usize) -> Result<Vec<GlRow>> {
    if !(det_max.is_finite() && det_max > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument("det_max must be positive and steps at least 1".into()));
    }
    (1..=steps)
        .map(|k| {
            let det = det_max * k as f64 / steps as f64;
            // a square lattice with the requested covolume
            let m = LatticeMatrix::scalar(det.sqrt())?;
            Ok(GlRow {
                det: covolume(&m),
                d,
                threshold: 1.0 / (d + 1) as f64,
                frame_guaranteed: crate::frameop::gl_predicate(&m, d),
            })
        })
        .collect()
}

pub fn write_gl_csv<W: Write>(rows: &[GlRow], mut out: W) -> io::Result<()> {
    writeln!(out, "det,d,threshold,frame_guaranteed")?;
    for r in rows {
        writeln!(out, "{:.16e},{},{:.16e},{}", r.det, r.d, r.threshold, r.frame_guaranteed)?;
    }
    Ok(())
}

/// Box norm and covolume of `t·M₀`, for reporting.
pub fn scaled_geometry(m0: &LatticeMatrix, t: f64) -> Result<(f64, f64)> {
    let m = m0.scaled(t)?;
    Ok((box_norm(&m), covolume(&m)))
}
