//! Tropical lines used as tropical divisors: a line through a point with a
//! direction `w'` forming a unimodular pair with a wall direction `w`.

use serde::Serialize;
use thiserror::Error;

use super::Point;
use crate::lattice::{cone_coordinates, norm, LatticeVector};
use crate::model::ToricModel;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("direction {complement} is not unimodular with {wall} (det = {det})")]
    NotUnimodular {
        wall: LatticeVector,
        complement: LatticeVector,
        det: i64,
    },
    #[error("the zero vector has no direction")]
    ZeroVector,
    #[error("lines through the origin are not allowed")]
    ThroughOrigin,
    #[error("no suitable unimodular complement of {0} found")]
    NoComplement(LatticeVector),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TropicalLine {
    pub through: Point,
    pub wall: LatticeVector,
    pub direction: LatticeVector,
    /// Intersection with every boundary divisor `D_i`.
    pub profile: Vec<i64>,
    /// When the wall is a ray `u_k`: whether the line meets `D_k` exactly once.
    pub meets_wall_divisor_once: Option<bool>,
}

fn end_profile(model: &ToricModel, d: LatticeVector) -> Vec<i64> {
    let mut profile = vec![0; model.num_rays()];
    for end in [d, -d] {
        let c = cone_coordinates(model.fan(), end).expect("nonzero");
        profile[c.cone] += c.a;
        profile[model.fan().next(c.cone)] += c.b;
    }
    profile
}

fn ray_check(model: &ToricModel, wall: LatticeVector, profile: &[i64]) -> Option<bool> {
    model.fan().ray_index(wall).map(|k| profile[k] == 1)
}

/// The tropical line through `through` in direction `complement`, or in the
/// canonical direction when none is supplied: the unimodular complement of
/// `wall` of smallest norm (ties broken lexicographically) among those meeting
/// the divisor of `wall` once when `wall` is a ray.
pub fn tropical_line(
    model: &ToricModel,
    wall: LatticeVector,
    through: Point,
    complement: Option<LatticeVector>,
) -> Result<TropicalLine, LineError> {
    if wall.is_zero() {
        return Err(LineError::ZeroVector);
    }
    if through.is_origin() {
        return Err(LineError::ThroughOrigin);
    }
    let direction = match complement {
        Some(c) => {
            let det = wall.det(c);
            if det.abs() != 1 {
                return Err(LineError::NotUnimodular {
                    wall,
                    complement: c,
                    det,
                });
            }
            c
        }
        None => canonical_complement(model, wall)?,
    };
    let profile = end_profile(model, direction);
    Ok(TropicalLine {
        through,
        wall,
        direction,
        meets_wall_divisor_once: ray_check(model, wall, &profile),
        profile,
    })
}

fn canonical_complement(
    model: &ToricModel,
    wall: LatticeVector,
) -> Result<LatticeVector, LineError> {
    let w = wall.primitive().ok_or(LineError::ZeroVector)?;
    if w != wall {
        return Err(LineError::NoComplement(wall));
    }
    // Extended Euclid gives one complement; all others differ by multiples of w.
    let (g, a, b) = ext_gcd(w.x, w.y);
    debug_assert_eq!(g.abs(), 1);
    let base = LatticeVector::new(-b * g, a * g);
    (-50..=50)
        .flat_map(|k| [base + k * w, -base + k * w])
        .filter(|&c| {
            w.det(c).abs() == 1 && ray_check(model, w, &end_profile(model, c)) != Some(false)
        })
        .min_by(|&a, &b| {
            norm(model.fan(), a)
                .cmp(&norm(model.fan(), b))
                .then(a.cmp(&b))
        })
        .ok_or(LineError::NoComplement(wall))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}
