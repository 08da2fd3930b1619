//! Numerical analysis of Gabor systems with Hermite windows on lattices `M(Z²)`.
//!
//! The crate estimates optimal frame bounds by Galerkin compression of the
//! frame operator onto a Hermite span, produces oscillation-based frame
//! certificates from the ambiguity function of the window, and scans matrix
//! families to probe how tightness and the admissible constant scale with the
//! window degree.

pub mod certify;
pub mod error;
pub mod frameop;
pub mod hermite;
pub mod kernel;
pub mod lattice;
pub mod scan;
pub mod timefreq;

pub use error::{Error, Result};
pub use frameop::{FrameBounds, FrameVerdict, GaborSystemSpec};
pub use hermite::{hermite_window, GridCapacity, GridSpec, VectorWindow};
pub use kernel::KernelMethod;
pub use lattice::{box_norm, covolume, LatticeMatrix};
pub use timefreq::{Axis, Region, SampledField, SampledSignal, TFPoint};
