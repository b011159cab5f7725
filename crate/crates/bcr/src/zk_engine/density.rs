//! Propagator densities on spheres, relative to the round volume.
//!
//! Only densities that are even under the antipode are offered: on the even
//! spheres used here the antipode reverses orientation, so these are exactly
//! the antisymmetric forms.

use serde::Serialize;

use crate::diagram_core::Kind;
use crate::gauss_eval::DirectionFamily;
use crate::knot_model::bump;
use crate::Scalar;

/// Volume of the unit sphere `S^m`.
pub fn sphere_volume(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_volume(m - 2),
    }
}

/// `∫_{S^m} β(‖x − c‖²/δ²)` by Simpson's rule in the polar angle about `c`.
fn bump_mass(m: usize, radius: f64) -> f64 {
    let chord_angle = 2.0 * (radius / 2.0).asin();
    let steps = 8192;
    let h = chord_angle / steps as f64;
    let f = |theta: f64| {
        let s = (2.0 - 2.0 * theta.cos()) / (radius * radius);
        bump(0, s) * theta.sin().powi(m as i32 - 1)
    };
    let mut acc = f(0.0) + f(chord_angle);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sphere_volume(m - 1) * acc * h / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DensityKind<T> {
    Round,
    /// Average of two bumps of chordal radius `radius` at `±center`.
    Bump { center: Vec<T>, radius: T },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagatorDensity<T> {
    pub kind: DensityKind<T>,
    pub sphere_dim: usize,
    /// `1/vol` for the round density, `1/(2·mass of one bump)` otherwise.
    normaliser: T,
}

impl<T: Scalar> PropagatorDensity<T> {
    pub fn round(sphere_dim: usize) -> Self {
        PropagatorDensity { kind: DensityKind::Round, sphere_dim, normaliser: T::lit(1.0 / sphere_volume(sphere_dim)) }
    }

    /// Panics unless `center` is a unit vector of `ℝ^{m+1}` and `0 < radius ≤ 1`.
    pub fn bump(center: Vec<T>, radius: f64) -> Self {
        let m = center.len() - 1;
        assert!(m >= 1 && radius > 0.0 && radius <= 1.0, "bump radius must lie in (0, 1]");
        let l = crate::linalg::norm(&center).to_f64_lossy();
        assert!((l - 1.0).abs() < 1e-12, "bump centre must be a unit vector");
        let normaliser = T::lit(0.5 / bump_mass(m, radius));
        PropagatorDensity { kind: DensityKind::Bump { center, radius: T::lit(radius) }, sphere_dim: m, normaliser }
    }

    pub fn eval(&self, x: &[T]) -> T {
        match &self.kind {
            DensityKind::Round => self.normaliser,
            DensityKind::Bump { center, radius } => {
                let r2 = *radius * *radius;
                let (mut minus, mut plus) = (T::zero(), T::zero());
                for (&a, &c) in x.iter().zip(center) {
                    minus = minus + (a - c) * (a - c);
                    plus = plus + (a + c) * (a + c);
                }
                (bump(0, minus / r2) + bump(0, plus / r2)) * self.normaliser
            }
        }
    }
}

/// One density per label on `S^{n−1}` (internal edges) and on `S^{n+1}`
/// (external edges).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Propagators<T> {
    pub n: usize,
    pub internal: Vec<PropagatorDensity<T>>,
    pub external: Vec<PropagatorDensity<T>>,
}

impl<T: Scalar> Propagators<T> {
    pub fn round(k: usize, n: usize) -> Self {
        Propagators {
            n,
            internal: vec![PropagatorDensity::round(n - 1); 2 * k],
            external: vec![PropagatorDensity::round(n + 1); 2 * k],
        }
    }

    /// Bumps of radius `radius` centred at the vectors of a direction family.
    pub fn bump(centres: &DirectionFamily<T>, radius: f64) -> Self {
        Propagators {
            n: centres.internal[0].len(),
            internal: centres.internal.iter().map(|c| PropagatorDensity::bump(c.clone(), radius)).collect(),
            external: centres.external.iter().map(|c| PropagatorDensity::bump(c.clone(), radius)).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.internal.len() / 2
    }

    pub fn get(&self, kind: Kind, label: usize) -> &PropagatorDensity<T> {
        match kind {
            Kind::Internal => &self.internal[label - 1],
            Kind::External => &self.external[label - 1],
        }
    }

    pub fn is_round(&self) -> bool {
        self.internal.iter().chain(&self.external).all(|d| d.kind == DensityKind::Round)
    }
}
