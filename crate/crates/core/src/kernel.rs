//! Cross-ambiguity of Hermite functions, `W_{m,n}(y, ξ) = ⟨h_m, T_y M_ξ h_n⟩`.
//!
//! With `α = (y + 2πiξ)/√2` the ladder operators give
//!
//! ```text
//! W_{0,0}   = e^{−|α|²/2} e^{πiξy}
//! W_{m+1,0} = ᾱ W_{m,0} / √(m+1)
//! W_{m,n+1} = (√m W_{m−1,n} − α W_{m,n}) / √(n+1)
//! ```
//!
//! The quadrature route evaluates the same inner products as grid sums and
//! serves as the reference the recurrence is checked against.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hermite::{hermite_values, GridSpec};

/// How cross-ambiguity entries are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    #[default]
    ClosedForm,
    Quadrature,
}

/// Fills `out[m·cols + n] = W_{m,n}(y, ξ)` for `m < rows`, `n < cols`.
pub fn cross_ambiguity_into(y: f64, xi: f64, rows: usize, cols: usize, out: &mut [Complex64]) {
    debug_assert!(out.len() >= rows * cols);
    if rows == 0 || cols == 0 {
        return;
    }
    let alpha = Complex64::new(y, 2.0 * PI * xi) / SQRT_2;
    let alpha_bar = alpha.conj();
    let w00 = Complex64::from_polar((-0.5 * alpha.norm_sqr()).exp(), PI * xi * y);
    out[0] = w00;
    for m in 1..rows {
        out[m * cols] = alpha_bar * out[(m - 1) * cols] / (m as f64).sqrt();
    }
    for n in 0..cols - 1 {
        let inv = 1.0 / ((n + 1) as f64).sqrt();
        out[n + 1] = -alpha * out[n] * inv;
        for m in 1..rows {
            let up = (m as f64).sqrt() * out[(m - 1) * cols + n];
            out[m * cols + n + 1] = (up - alpha * out[m * cols + n]) * inv;
        }
    }
}

/// `W_{m,n}(y, ξ)` as a row-major `rows × cols` table.
pub fn cross_ambiguity(y: f64, xi: f64, rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    cross_ambiguity_into(y, xi, rows, cols, &mut out);
    out
}

/// Samples `h_m(x_j)` for `m < rows`, one row per index.
pub fn basis_table(grid: &GridSpec, rows: usize, dilation: f64) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; grid.count()]; rows];
    let mut buf = vec![0.0; rows];
    let scale = dilation.sqrt().recip();
    for (j, x) in grid.points().enumerate() {
        hermite_values(x / dilation, &mut buf);
        for (row, v) in table.iter_mut().zip(&buf) {
            row[j] = scale * v;
        }
    }
    table
}

/// Grid-sum version of `⟨D_b h_m, T_y M_ξ D_b h_n⟩` using precomputed basis rows.
///
/// Only nodes within `b(√(2n_max+1) + 10)` of `y` are visited; beyond that the
/// shifted atom is below `e^{−50}`.
pub fn cross_ambiguity_quadrature(
    grid: &GridSpec,
    basis: &[Vec<f64>],
    dilation: f64,
    y: f64,
    xi: f64,
    cols: usize,
) -> Vec<Complex64> {
    let rows = basis.len();
    let reach = dilation * (((2 * cols.max(1) - 1) as f64).sqrt() + 10.0);
    let (lo, hi) = grid.index_range(y, reach);
    let mut buf = vec![0.0; cols];
    let scale = dilation.sqrt().recip();
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for j in lo..hi {
        let x = grid.point(j);
        hermite_values((x - y) / dilation, &mut buf);
        // conj of the carrier, since the shifted atom sits in the second slot
        let carrier = Complex64::from_polar(grid.step() * scale, -2.0 * PI * xi * (x - y));
        for (m, row) in basis.iter().enumerate() {
            let hm = row[j];
            if hm == 0.0 {
                continue;
            }
            let c = carrier * hm;
            for (n, v) in buf.iter().enumerate() {
                out[m * cols + n] += c * *v;
            }
        }
    }
    out
}
