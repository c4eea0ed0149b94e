use alloc::vec::Vec;

use super::GeneratorError;
use crate::cost::{Dim, Embedding};
use crate::math::Vec3;

use nalgebra::Matrix3;

/// Built-in maps from the design domain to a physical domain.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainMap {
    Identity,
    /// `x ↦ A·x + b`. Periods are mapped by `A`.
    Affine {
        matrix: Matrix3<f64>,
        offset: Vec3,
    },
    /// Unit tetrahedron `{x, y, z ≥ 0, x + y + z ≤ 1}` onto the unit-sphere
    /// octant: the slice `x + y + z = s` goes to the sphere of radius `s`.
    /// With `fit`, the embedding's bounding box is first scaled and
    /// translated into the tetrahedron.
    SphereOctant {
        fit: bool,
    },
}

const DOMAIN_TOL: f64 = 1e-12;

/// Replaces every position by its image under `map`; the graph is untouched.
pub fn apply_map(e: &Embedding, map: &DomainMap) -> Result<Embedding, GeneratorError> {
    match map {
        DomainMap::Identity => Ok(e.clone()),
        DomainMap::Affine { matrix, offset } => {
            let positions: Vec<Vec3> = e.positions.iter().map(|p| matrix * p + offset).collect();
            if e.dim == Dim::Two {
                if let Some(v) = positions.iter().position(|p| p.z.abs() > DOMAIN_TOL) {
                    return Err(GeneratorError::LeavesPlane { vertex: v });
                }
            }
            Ok(Embedding {
                dim: e.dim,
                positions,
                period: e.period.map(|[a, b]| [matrix * a, matrix * b]),
            })
        }
        DomainMap::SphereOctant { fit } => {
            if e.is_periodic() {
                return Err(GeneratorError::PeriodicMap);
            }
            let prepared: Vec<Vec3> = if *fit {
                fit_tetrahedron(&e.positions)
            } else {
                e.positions.clone()
            };
            let mut positions = Vec::with_capacity(prepared.len());
            for (v, p) in prepared.iter().enumerate() {
                let s = p.x + p.y + p.z;
                if p.min() < -DOMAIN_TOL || s > 1.0 + DOMAIN_TOL {
                    return Err(GeneratorError::OutsideDomain { vertex: v });
                }
                let r = p.norm();
                positions.push(if r == 0.0 { *p } else { p * (s / r) });
            }
            Ok(Embedding {
                dim: Dim::Three,
                positions,
                period: None,
            })
        }
    }
}

/// Uniformly scales and translates points so their bounding box touches the
/// coordinate planes and fits inside the unit tetrahedron.
fn fit_tetrahedron(points: &[Vec3]) -> Vec<Vec3> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let (lo, hi) = points
        .iter()
        .fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    let extent = (hi - lo).sum();
    let scale = if extent > 0.0 { 1.0 / extent } else { 1.0 };
    points.iter().map(|p| (p - lo) * scale).collect()
}
