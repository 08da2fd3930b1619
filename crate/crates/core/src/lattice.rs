//! Lattices `Γ = M(Z²)` in the time-frequency plane.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Smallest admissible `|det M|`.
pub const MIN_DET: f64 = 1e-12;

/// Default cap on the number of points returned by [`enumerate`].
pub const DEFAULT_POINT_BUDGET: usize = 10_000_000;

/// Invertible 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeMatrix {
    entries: [f64; 4],
    det: f64,
}

impl LatticeMatrix {
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Result<Self> {
        let entries = [m11, m12, m21, m22];
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        let det = m11 * m22 - m12 * m21;
        if det.abs() <= MIN_DET {
            return Err(Error::Singular(det));
        }
        Ok(LatticeMatrix { entries, det })
    }

    pub fn identity() -> Self {
        LatticeMatrix { entries: [1.0, 0.0, 0.0, 1.0], det: 1.0 }
    }

    pub fn diag(a: f64, b: f64) -> Result<Self> {
        LatticeMatrix::new(a, 0.0, 0.0, b)
    }

    /// `t·I`.
    pub fn scalar(t: f64) -> Result<Self> {
        LatticeMatrix::new(t, 0.0, 0.0, t)
    }

    pub fn entries(&self) -> [f64; 4] {
        self.entries
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// `t·M`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let [a, b, c, d] = self.entries;
        LatticeMatrix::new(t * a, t * b, t * c, t * d)
    }

    /// `L·M` for another 2×2 matrix `L`.
    pub fn left_mul(&self, l: &LatticeMatrix) -> Result<Self> {
        let [a, b, c, d] = l.entries;
        let [p, q, r, s] = self.entries;
        LatticeMatrix::new(a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)
    }

    pub fn inverse(&self) -> LatticeMatrix {
        let [a, b, c, d] = self.entries;
        let inv = 1.0 / self.det;
        LatticeMatrix { entries: [d * inv, -b * inv, -c * inv, a * inv], det: inv }
    }

    #[inline]
    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        let [a, b, c, d] = self.entries;
        [a * z[0] + b * z[1], c * z[0] + d * z[1]]
    }

    /// Spectral norm `‖M‖_op`.
    pub fn operator_norm(&self) -> f64 {
        let [a, b, c, d] = self.entries;
        // largest singular value from the 2x2 Gram matrix
        let p = a * a + c * c;
        let q = a * b + c * d;
        let r = b * b + d * d;
        let mean = 0.5 * (p + r);
        let disc = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (mean + disc).sqrt()
    }
}

impl fmt::Display for LatticeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "{a},{b},{c},{d}")
    }
}

/// Parses the CLI shorthand `"m11,m12,m21,m22"`.
impl FromStr for LatticeMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("bad matrix '{s}': {e}")))?;
        if vals.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "matrix '{s}' must have 4 comma-separated entries, found {}",
                vals.len()
            )));
        }
        LatticeMatrix::new(vals[0], vals[1], vals[2], vals[3])
    }
}

/// JSON form `[[m11,m12],[m21,m22]]`.
impl Serialize for LatticeMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let [a, b, c, d] = self.entries;
        [[a, b], [c, d]].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LatticeMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Nested([[f64; 2]; 2]),
            Short(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Nested([[a, b], [c, d]]) => LatticeMatrix::new(a, b, c, d),
            Repr::Short(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `‖M‖ = sup { ‖Mz‖₂ : ‖z‖_∞ ≤ 1/2 }`.
///
/// A convex function on the square peaks at a vertex, and opposite vertices
/// give equal norms, so two corners suffice.
pub fn box_norm(m: &LatticeMatrix) -> f64 {
    let p = m.apply([0.5, 0.5]);
    let q = m.apply([0.5, -0.5]);
    p[0].hypot(p[1]).max(q[0].hypot(q[1]))
}

/// `|det M|`, the area of the fundamental cell `M([-1/2, 1/2)²)`.
pub fn covolume(m: &LatticeMatrix) -> f64 {
    m.det().abs()
}

/// A lattice point `γ = M k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePoint {
    pub k: [i64; 2],
    pub gamma: [f64; 2],
}

/// Finite truncation of `M(Z²)`, sorted lexicographically by `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePointSet {
    pub points: Vec<LatticePoint>,
    pub cutoff_radius: f64,
    pub generator: LatticeMatrix,
}

impl LatticePointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `{ Mk : k ∈ Z², ‖Mk‖₂ ≤ radius }` with the default point budget.
pub fn enumerate(m: &LatticeMatrix, radius: f64) -> Result<LatticePointSet> {
    enumerate_with_budget(m, radius, DEFAULT_POINT_BUDGET)
}

pub fn enumerate_with_budget(m: &LatticeMatrix, radius: f64, budget: usize) -> Result<LatticePointSet> {
    enumerate_in_metric(m, &LatticeMatrix::identity(), radius, budget)
}

/// `{ Mk : ‖G M k‖₂ ≤ radius }` for a positive-definite reweighting `G` of the plane.
pub fn enumerate_in_metric(
    m: &LatticeMatrix,
    metric: &LatticeMatrix,
    radius: f64,
    budget: usize,
) -> Result<LatticePointSet> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let e = m.left_mul(metric)?;
    let [e11, e12, e21, e22] = e.entries();
    let inv = e.inverse().entries();
    // |k1| ≤ ‖row 1 of E⁻¹‖ · radius
    let k1_max = (inv[0].hypot(inv[1]) * radius).floor();
    if k1_max > 1e9 {
        return Err(Error::Budget { needed: usize::MAX, budget });
    }
    let k1_max = k1_max as i64;

    // columns of E
    let (c1, c2) = ([e11, e21], [e12, e22]);
    let c2n = c2[0] * c2[0] + c2[1] * c2[1];
    let r2 = radius * radius;
    let mut points = Vec::new();
    for k1 in -k1_max..=k1_max {
        let k1f = k1 as f64;
        let b = k1f * (c1[0] * c2[0] + c1[1] * c2[1]);
        let c = k1f * k1f * (c1[0] * c1[0] + c1[1] * c1[1]) - r2;
        let disc = b * b - c2n * c;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let lo = ((-b - sq) / c2n).floor() as i64 - 1;
        let hi = ((-b + sq) / c2n).ceil() as i64 + 1;
        for k2 in lo..=hi {
            let z = e.apply([k1f, k2 as f64]);
            if z[0].hypot(z[1]) <= radius {
                if points.len() == budget {
                    return Err(Error::Budget { needed: budget + 1, budget });
                }
                points.push(LatticePoint { k: [k1, k2], gamma: m.apply([k1f, k2 as f64]) });
            }
        }
    }
    Ok(LatticePointSet { points, cutoff_radius: radius, generator: *m })
}
