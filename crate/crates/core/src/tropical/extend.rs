//! Extension of finite spine legs to infinity and the resulting extension
//! curve classes.
//!
//! Walking from `p` with slope `v`, every transverse crossing of a ray `u`
//! contributes `|det(u, v)| [D_{t,u}]`.

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{LegKind, MappedTree, Point, TreeError, Q};
use crate::classes::{ClassError, CurveClass};
use crate::lattice::{Fan, LatticeVector};
use crate::model::{ensure_rays, ModelError, ToricModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtendError {
    #[error("leg `{label}` has slope {slope}, which is not a ray of the fan")]
    SlopeNotRayDirection { label: String, slope: LatticeVector },
    #[error("the extension path from {start} with slope {slope} runs through the origin")]
    PathThroughOrigin { start: Point, slope: LatticeVector },
    #[error("the spine has no finite legs to extend")]
    NoFiniteLegs,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// A transverse crossing of ray `ray` at path parameter `param`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub ray: usize,
    pub param: Q,
    pub multiplicity: i64,
}

/// Crossings of the path `p + s v`, `0 < s <= upto`, with the rays of `fan`,
/// ordered by parameter.
pub fn path_crossings(
    fan: &Fan,
    p: Point,
    v: LatticeVector,
    upto: Option<Q>,
) -> Result<Vec<Crossing>, ExtendError> {
    if p.det(v).is_zero() && !p.dot(v).is_positive() {
        return Err(ExtendError::PathThroughOrigin { start: p, slope: v });
    }
    let mut out = Vec::new();
    for (i, &u) in fan.rays().iter().enumerate() {
        let d = u.det(v);
        if d == 0 {
            continue;
        }
        let d = Q::from_integer(d);
        let t = p.det(u) / d;
        let s = p.det(v) / d;
        let in_range = upto.is_none_or(|limit| t <= limit);
        if t.is_positive() && s.is_positive() && in_range {
            out.push(Crossing {
                ray: i,
                param: t,
                multiplicity: u.det(v).abs(),
            });
        }
    }
    out.sort_by(|a, b| a.param.cmp(&b.param).then(a.ray.cmp(&b.ray)));
    Ok(out)
}

/// The extension class of the path `p + s v`, `0 < s <= upto`.
pub fn extension_class(
    model: &ToricModel,
    p: Point,
    v: LatticeVector,
    upto: Option<Q>,
) -> Result<CurveClass, ExtendError> {
    let mut class = CurveClass::zero(model);
    for c in path_crossings(model.fan(), p, v, upto)? {
        class = &class + &CurveClass::toric_divisor(model, c.ray).scale(c.multiplicity);
    }
    Ok(class)
}

/// A spine whose finite legs have been extended to the boundary.
#[derive(Clone, Debug)]
pub struct ExtendedSpine {
    /// The model the classes live on; refined when slopes required it.
    pub model: ToricModel,
    pub tree: MappedTree,
    /// Extension class of every extended leg, by label.
    pub deltas: Vec<(String, CurveClass)>,
    pub delta_hat: CurveClass,
}

/// Slope of the finite leg at `v`: the weight pointing into `v`.
fn leg_slope(tree: &MappedTree, v: usize) -> Option<LatticeVector> {
    tree.incidences(v).first().map(|i| -i.outgoing)
}

/// Replaces every finite leg by an infinite boundary leg continuing with the
/// same slope. With `auto_refine`, slopes that are not rays are added to the
/// fan first.
pub fn extend_spine(
    model: &ToricModel,
    tree: &MappedTree,
    auto_refine: bool,
) -> Result<ExtendedSpine, ExtendError> {
    tree.check_structure()?;
    let finite: Vec<(String, usize, LatticeVector)> = tree
        .legs()
        .iter()
        .filter(|l| l.kind == LegKind::Finite)
        .map(|l| {
            let slope =
                leg_slope(tree, l.vertex).ok_or_else(|| TreeError::BadLeg(l.label.clone()))?;
            Ok((l.label.clone(), l.vertex, slope))
        })
        .collect::<Result<_, TreeError>>()?;
    if finite.is_empty() {
        return Err(ExtendError::NoFiniteLegs);
    }
    let missing: Vec<LatticeVector> = finite
        .iter()
        .map(|(_, _, s)| *s)
        .filter(|s| model.fan().ray_index(*s).is_none())
        .collect();
    let model = match (missing.first(), auto_refine) {
        (None, _) => model.clone(),
        (Some(_), true) => ensure_rays(model, &missing)?,
        (Some(&slope), false) => {
            let label = finite
                .iter()
                .find(|(_, _, s)| *s == slope)
                .expect("present")
                .0
                .clone();
            return Err(ExtendError::SlopeNotRayDirection { label, slope });
        }
    };

    let mut out = tree.clone();
    let mut deltas = Vec::new();
    let mut delta_hat = CurveClass::zero(&model);
    for (label, v, slope) in finite {
        let start = tree.position(v)?;
        let delta = extension_class(&model, start, slope, None)?;
        delta_hat = &delta_hat + &delta;
        deltas.push((label.clone(), delta));
        let inf = out.add_ray(v, slope)?;
        out.retarget_leg(&label, inf, LegKind::Boundary);
    }
    Ok(ExtendedSpine {
        model,
        tree: out,
        deltas,
        delta_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::intersect;
    use crate::lattice::validate_fan;
    use crate::model::build_model;

    fn v(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn cubic() -> ToricModel {
        build_model(
            validate_fan(&[v(1, 0), v(0, 1), v(-1, -1)]).unwrap(),
            &[2, 2, 2],
        )
        .unwrap()
    }

    #[test]
    fn single_leg_examples() {
        let m = cubic();
        let h = CurveClass::toric_divisor(&m, 0);
        assert!(extension_class(&m, Point::from_ints(2, 2), v(0, 1), None)
            .unwrap()
            .is_zero());
        assert_eq!(
            extension_class(&m, Point::from_ints(2, 2), v(-1, 0), None).unwrap(),
            h
        );
        let c = path_crossings(m.fan(), Point::from_ints(1, 2), v(1, -2), None).unwrap();
        assert_eq!(
            c,
            vec![Crossing {
                ray: 0,
                param: Q::from_integer(1),
                multiplicity: 2
            }]
        );
        assert_eq!(
            extension_class(&m, Point::from_ints(1, 2), v(1, -2), None).unwrap(),
            h.scale(2)
        );
    }

    #[test]
    fn through_origin_is_rejected() {
        let m = cubic();
        assert!(matches!(
            extension_class(&m, Point::from_ints(2, 2), v(-1, -1), None),
            Err(ExtendError::PathThroughOrigin { .. })
        ));
        assert!(extension_class(&m, Point::from_ints(2, 2), v(1, 1), None)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn splitting_is_additive() {
        let m = cubic();
        let p = Point::from_ints(3, 1);
        let s = v(-2, 1);
        let whole = extension_class(&m, p, s, None).unwrap();
        for cut in [
            Q::new(1, 3),
            Q::from_integer(1),
            Q::new(3, 2),
            Q::from_integer(5),
        ] {
            let a = extension_class(&m, p, s, Some(cut)).unwrap();
            let b = extension_class(&m, p.offset(s, cut), s, None).unwrap();
            assert_eq!(&a + &b, whole);
        }
    }

    #[test]
    fn balanced_star_matches_compatibility() {
        let m = cubic();
        let mut t = MappedTree::new();
        let c = t.add_vertex(Point::from_ints(1, 3));
        for (i, w) in [v(1, 0), v(0, 1), v(-1, -1)].into_iter().enumerate() {
            let end = t.add_vertex(Point::from_ints(1, 3).offset(w, Q::new(1, 2)));
            t.add_edge(c, end, w).unwrap();
            t.add_leg(format!("{i}"), end, LegKind::Finite).unwrap();
        }
        let ext = extend_spine(&m, &t, false).unwrap();
        assert_eq!(
            intersect(&ext.model, &ext.delta_hat).unwrap().d_d,
            vec![1, 1, 1]
        );
        assert!(ext.delta_hat.has_zero_exceptional_part());
        assert!(ext.tree.legs().iter().all(|l| l.kind == LegKind::Boundary));
    }

    #[test]
    fn refinement_on_demand() {
        let m = cubic();
        let mut t = MappedTree::new();
        let a = t.add_vertex(Point::from_ints(1, 1));
        let b = t.add_vertex(Point::from_ints(3, 2));
        t.add_edge(a, b, v(2, 1)).unwrap();
        t.add_leg("x", b, LegKind::Finite).unwrap();
        t.add_leg("y", a, LegKind::Interior).unwrap();
        assert!(matches!(
            extend_spine(&m, &t, false),
            Err(ExtendError::SlopeNotRayDirection { .. })
        ));
        let ext = extend_spine(&m, &t, true).unwrap();
        assert_eq!(ext.model.num_rays(), 5);
        assert!(ext.delta_hat.is_zero());
    }
}
