//! Bott–Cattaneo–Rossi invariants `Z_k` of long knots `ℝⁿ ↪ ℝⁿ⁺²` (`n` odd).
//!
//! The crate is layered bottom-up:
//!
//! * [`diagram_core`]: BCR diagrams, validation, signs, orientation, cycle reversal.
//! * [`diagram_enum`]: enumeration of diagrams and numbered diagrams up to isomorphism.
//! * [`face_calculus`]: face taxonomy, hidden/principal cancellation involutions, blow-ups.
//! * [`knot_model`]: a small expression language for long knots, with symbolic derivatives.
//! * [`gauss_eval`]: configurations, Gauss maps, the direction map and its Jacobian.
//! * [`zk_engine`]: Monte Carlo integration and signed root counting of `Z_k`.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the precision used by the CLI and the test suites.

pub mod diagram_core;
pub mod diagram_enum;
pub mod face_calculus;
pub mod gauss_eval;
pub mod knot_model;
pub mod linalg;
pub mod zk_engine;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type the numerical layers are generic over.
pub trait Scalar:
    Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Default precision.
pub type Real = f64;
pub type Knot = knot_model::KnotSpec;
pub type Configuration = gauss_eval::Configuration<Real>;
pub type DirectionFamily = gauss_eval::DirectionFamily<Real>;
pub type Propagators = zk_engine::Propagators<Real>;
pub type Estimate = zk_engine::Estimate<Real>;
pub type Matrix = linalg::Matrix<Real>;

pub use diagram_core::{BcrDiagram, Edge, Kind, NumberedDiagram, RawGraph, Vertex};
pub use diagram_enum::{enumerate, enumerate_numbered};
