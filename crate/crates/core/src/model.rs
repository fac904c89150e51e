//! Toric models: a smooth complete fan together with the number of generic
//! points blown up on each boundary divisor.
//!
//! Exceptional components are addressed as `(i, j)` with `i` the ray index and
//! `0 <= j < blowups[i]`. Positions of the blown-up points are never stored;
//! only their number enters any computation.

use serde::Serialize;
use thiserror::Error;

use crate::lattice::{refine_fan, Fan, FanError, LatticeVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{blowups} blowup multiplicities given for a fan with {rays} rays")]
    LengthMismatch { rays: usize, blowups: usize },
    #[error("blowup multiplicity on ray {0} is negative")]
    NegativeMultiplicity(usize),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// A ray carrying at least one blown-up point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExceptionalDirection {
    pub divisor_index: usize,
    pub direction: LatticeVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ToricModel {
    fan: Fan,
    blowups: Vec<usize>,
}

/// A model over a refined fan, with the image of every old ray index.
#[derive(Clone, Debug)]
pub struct ModelRefinement {
    pub model: ToricModel,
    pub inserted: Vec<LatticeVector>,
    /// `ray_map[i]` is the index in the refined fan of old ray `i`.
    pub ray_map: Vec<usize>,
}

pub fn build_model(fan: Fan, blowups: &[i64]) -> Result<ToricModel, ModelError> {
    if blowups.len() != fan.len() {
        return Err(ModelError::LengthMismatch {
            rays: fan.len(),
            blowups: blowups.len(),
        });
    }
    if let Some(i) = blowups.iter().position(|&l| l < 0) {
        return Err(ModelError::NegativeMultiplicity(i));
    }
    Ok(ToricModel {
        fan,
        blowups: blowups.iter().map(|&l| l as usize).collect(),
    })
}

pub fn exceptional_directions(model: &ToricModel) -> Vec<ExceptionalDirection> {
    model
        .blowups
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0)
        .map(|(i, _)| ExceptionalDirection {
            divisor_index: i,
            direction: model.fan.ray(i),
        })
        .collect()
}

/// Inserts `d` (and whatever subdivision smoothness requires). New rays carry
/// no blowups.
pub fn refine_model(model: &ToricModel, d: LatticeVector) -> Result<ModelRefinement, ModelError> {
    let r = refine_fan(&model.fan, d)?;
    let ray_map: Vec<usize> = model
        .fan
        .rays()
        .iter()
        .map(|&u| r.fan.ray_index(u).expect("old rays survive refinement"))
        .collect();
    let mut blowups = vec![0; r.fan.len()];
    for (old, &new) in ray_map.iter().enumerate() {
        blowups[new] = model.blowups[old];
    }
    Ok(ModelRefinement {
        model: ToricModel {
            fan: r.fan,
            blowups,
        },
        inserted: r.inserted,
        ray_map,
    })
}

/// Refines until every direction in `dirs` (taken up to positive scaling) is
/// a ray. Directions that already are rays are skipped.
pub fn ensure_rays(model: &ToricModel, dirs: &[LatticeVector]) -> Result<ToricModel, ModelError> {
    let mut current = model.clone();
    for &d in dirs {
        let Some(p) = d.primitive() else {
            return Err(FanError::ZeroVector.into());
        };
        if current.fan.ray_index(p).is_none() {
            current = refine_model(&current, p)?.model;
        }
    }
    Ok(current)
}

impl ToricModel {
    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn blowups(&self) -> &[usize] {
        &self.blowups
    }

    pub fn num_rays(&self) -> usize {
        self.fan.len()
    }

    pub fn blowups_on(&self, i: usize) -> usize {
        self.blowups[i]
    }

    pub fn total_exceptional(&self) -> usize {
        self.blowups.iter().sum()
    }

    pub fn is_toric(&self) -> bool {
        self.total_exceptional() == 0
    }

    /// All exceptional components `(i, j)` in ray-major order.
    pub fn exceptional_components(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blowups
            .iter()
            .enumerate()
            .flat_map(|(i, &l)| (0..l).map(move |j| (i, j)))
    }

    /// Index of the ray carrying exceptional points in direction `d`.
    pub fn exceptional_ray(&self, d: LatticeVector) -> Option<usize> {
        self.fan.ray_index(d).filter(|&i| self.blowups[i] > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate_fan;

    fn v(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn p2() -> Fan {
        validate_fan(&[v(1, 0), v(0, 1), v(-1, -1)]).unwrap()
    }

    #[test]
    fn cubic_surface_model() {
        let m = build_model(p2(), &[2, 2, 2]).unwrap();
        assert_eq!(m.total_exceptional(), 6);
        let dirs: Vec<_> = exceptional_directions(&m)
            .into_iter()
            .map(|e| (e.divisor_index, e.direction))
            .collect();
        assert_eq!(dirs, vec![(0, v(1, 0)), (1, v(0, 1)), (2, v(-1, -1))]);
        assert_eq!(m.exceptional_components().count(), 6);
    }

    #[test]
    fn build_errors_and_toric_case() {
        assert!(build_model(p2(), &[0, 0, 0]).unwrap().is_toric());
        assert!(exceptional_directions(&build_model(p2(), &[0, 0, 0]).unwrap()).is_empty());
        assert_eq!(
            build_model(p2(), &[1, 0]),
            Err(ModelError::LengthMismatch {
                rays: 3,
                blowups: 2
            })
        );
        assert_eq!(
            build_model(p2(), &[1, -1, 0]),
            Err(ModelError::NegativeMultiplicity(1))
        );
        let single = build_model(p2(), &[1, 0, 0]).unwrap();
        assert_eq!(
            exceptional_directions(&single),
            vec![ExceptionalDirection {
                divisor_index: 0,
                direction: v(1, 0)
            }]
        );
    }

    #[test]
    fn refine_keeps_blowups_on_old_rays() {
        let m = build_model(p2(), &[2, 2, 2]).unwrap();
        let r = refine_model(&m, v(1, 1)).unwrap();
        assert_eq!(
            r.model.fan().rays(),
            &[v(1, 0), v(1, 1), v(0, 1), v(-1, -1)]
        );
        assert_eq!(r.model.blowups(), &[2, 0, 2, 2]);
        assert_eq!(r.ray_map, vec![0, 2, 3]);

        let r = refine_model(&m, v(2, 1)).unwrap();
        assert_eq!(r.model.num_rays(), 5);
        assert_eq!(r.inserted, vec![v(2, 1), v(1, 1)]);
        assert_eq!(r.model.blowups(), &[2, 0, 0, 2, 2]);
        assert_eq!(r.model.total_exceptional(), 6);

        assert!(matches!(
            refine_model(&m, v(1, 0)),
            Err(ModelError::Fan(FanError::AlreadyRay(_)))
        ));
    }

    #[test]
    fn ensure_rays_is_idempotent() {
        let m = build_model(p2(), &[2, 2, 2]).unwrap();
        let a = ensure_rays(&m, &[v(2, 2), v(-1, 0)]).unwrap();
        let b = ensure_rays(&a, &[v(1, 1), v(-1, 0)]).unwrap();
        assert_eq!(a, b);
        assert!(a.fan().ray_index(v(1, 1)).is_some());
    }
}
