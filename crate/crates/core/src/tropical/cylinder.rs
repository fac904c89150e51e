//! Assembly of primitive tropical cylinders from spine and twig data.
//!
//! A cylinder has a bending vertex `x`, spine legs with slopes `p1`, `p2`, an
//! interior constant leg on the `p1` side, and a twig whose leaves are the
//! primitive generators `w_s` of distinct rays carrying blowups. The twig runs
//! from `x` in direction `w_0 = sum w_s`; with more than one leaf it splits at
//! the origin, with a single leaf it is one straight edge.
//!
//! Classes attached to a cylinder live on its working model: the base model
//! refined so that `p1`, `p2` and the second spine slope of every elementary
//! cylinder are rays.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use super::classify::{classify, Classification, Violation};
use super::extend::{extension_class, path_crossings, ExtendError};
use super::{LegKind, MappedTree, Point, TreeError, Q};
use crate::classes::CurveClass;
use crate::lattice::{norm, LatticeVector};
use crate::model::{ensure_rays, ModelError, ToricModel};
use crate::walls::{generate_walls, generate_walls_with_rule, WallRule, WallStructure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CylinderError {
    #[error("leaf {0} has degree greater than one")]
    LeafDegree(LatticeVector),
    #[error("leaf direction {0} appears twice")]
    RepeatedLeafDirection(LatticeVector),
    #[error("leaf {0} is not the generator of a ray carrying blowups")]
    LeafNotExceptional(LatticeVector),
    #[error("the twig type is empty or its leaves sum to zero")]
    DegenerateTwig,
    #[error("spine slopes {p1} and {p2} do not balance the twig direction {root}")]
    SpineUnbalanced {
        p1: LatticeVector,
        p2: LatticeVector,
        root: LatticeVector,
    },
    #[error("bending point {bend} is not on the line of the twig direction {root}")]
    BendNotOnTwigLine { bend: Point, root: LatticeVector },
    #[error("bending point {bend} must lie on the side of -{root} for a twig with several leaves")]
    BendOnWrongSide { bend: Point, root: LatticeVector },
    #[error("anchor parameter {param} on leaf {leaf} is out of order")]
    AnchorOrderViolation { leaf: usize, param: Q },
    #[error("no generic interior point found on the spine")]
    NoGenericPoint,
    #[error("interior point {0} lies on a wall or a ray")]
    InteriorOnWall(Point),
    #[error("assembled tree is not a primitive cylinder: {0:?}")]
    Classification(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl CylinderError {
    /// True for the failures that make the data a non-primitive cylinder
    /// rather than malformed input.
    pub fn is_not_primitive(&self) -> bool {
        matches!(
            self,
            CylinderError::LeafDegree(_) | CylinderError::RepeatedLeafDirection(_)
        )
    }
}

/// How a twig leaf ends.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum LeafEnd {
    /// An unmarked infinite leaf.
    #[default]
    Free,
    /// An infinite leaf carrying a boundary leg with this label.
    Boundary(String),
    /// A finite leaf ending at the given parameter with a finite leg.
    Finite(String, Q),
}

/// Marks and end type applied to one twig leaf when building a tree.
/// Parameters are multiples of the leaf direction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeafPlan {
    pub g_mark: Option<(String, Q)>,
    pub t_mark: Option<(String, Q)>,
    pub end: LeafEnd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePlan {
    pub extended: bool,
    /// Labels of the two spine legs and the interior leg.
    pub labels: [String; 3],
    pub leaves: Vec<LeafPlan>,
}

impl TreePlan {
    pub fn standard(extended: bool, t: usize) -> Self {
        Self {
            extended,
            labels: ["1".into(), "2".into(), "w".into()],
            leaves: vec![LeafPlan::default(); t],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimitiveCylinder {
    #[serde(skip)]
    base: ToricModel,
    #[serde(skip)]
    model: ToricModel,
    #[serde(skip)]
    walls: WallStructure,
    p1: LatticeVector,
    p2: LatticeVector,
    bend: Point,
    twig_type: Vec<LatticeVector>,
    leaf_rays: Vec<usize>,
    interior: Point,
    leg_ends: [Point; 2],
    #[serde(skip)]
    delta_hat: CurveClass,
}

/// Pair-sum walls used to keep generic points off walls.
pub fn generic_walls(base: &ToricModel) -> WallStructure {
    generate_walls(base, 3, 10)
}

fn on_some_line(p: Point, dirs: impl IntoIterator<Item = LatticeVector>) -> bool {
    dirs.into_iter().any(|d| p.det(d).is_zero())
}

fn check_leaves(base: &ToricModel, twig_type: &[LatticeVector]) -> Result<(), CylinderError> {
    if twig_type.is_empty() {
        return Err(CylinderError::DegenerateTwig);
    }
    for (k, &w) in twig_type.iter().enumerate() {
        let Some(i) = base.exceptional_ray(w) else {
            return Err(CylinderError::LeafNotExceptional(w));
        };
        if w != base.fan().ray(i) {
            return Err(CylinderError::LeafDegree(w));
        }
        if twig_type[..k].contains(&w) {
            return Err(CylinderError::RepeatedLeafDirection(w));
        }
    }
    Ok(())
}

/// Second spine slope of the elementary cylinder on ray `u` of `base`.
fn elementary_slopes(base: &ToricModel, u: LatticeVector) -> (LatticeVector, LatticeVector) {
    let i = base.fan().ray_index(u).expect("leaf is a ray");
    let q1 = base.fan().ray(base.fan().next(i));
    (q1, -u - q1)
}

impl PrimitiveCylinder {
    /// Assembles and validates a primitive cylinder over `base`.
    pub fn assemble(
        base: &ToricModel,
        p1: LatticeVector,
        p2: LatticeVector,
        bend: Point,
        twig_type: &[LatticeVector],
    ) -> Result<Self, CylinderError> {
        check_leaves(base, twig_type)?;
        let mut needed = vec![p1, p2];
        needed.extend(twig_type.iter().map(|&u| elementary_slopes(base, u).1));
        let working = ensure_rays(base, &needed)?;
        Self::build(base, working, p1, p2, bend, twig_type, None)
    }

    /// The cylinder of the given twig type with the canonical spine:
    /// `p1` the smallest unimodular complement of `-w_0`, `p2 = -w_0 - p1`,
    /// bending at `-2 w_0`.
    pub fn canonical(
        base: &ToricModel,
        twig_type: &[LatticeVector],
    ) -> Result<Self, CylinderError> {
        check_leaves(base, twig_type)?;
        let w0: LatticeVector = twig_type.iter().copied().sum();
        let d = (-w0).primitive().ok_or(CylinderError::DegenerateTwig)?;
        let p1 = smallest_complement(base, d);
        let p2 = -w0 - p1;
        let bend = Point::along(w0, Q::from_integer(-2));
        Self::assemble(base, p1, p2, bend, twig_type)
    }

    /// The elementary cylinder of leaf `s`, on this cylinder's working model.
    pub fn elementary(&self, s: usize) -> Result<Self, CylinderError> {
        let u = self.twig_type[s];
        let (q1, q2) = elementary_slopes(&self.base, u);
        Self::build(
            &self.base,
            self.model.clone(),
            q1,
            q2,
            Point::along(u, Q::new(1, 2)),
            &[u],
            None,
        )
    }

    /// The same cylinder with the interior leg at `bend + param * p1`.
    pub fn with_interior(&self, param: Q) -> Result<Self, CylinderError> {
        Self::build(
            &self.base,
            self.model.clone(),
            self.p1,
            self.p2,
            self.bend,
            &self.twig_type,
            Some(param),
        )
    }

    fn build(
        base: &ToricModel,
        model: ToricModel,
        p1: LatticeVector,
        p2: LatticeVector,
        bend: Point,
        twig_type: &[LatticeVector],
        interior_param: Option<Q>,
    ) -> Result<Self, CylinderError> {
        check_leaves(base, twig_type)?;
        let w0: LatticeVector = twig_type.iter().copied().sum();
        if w0.is_zero() {
            return Err(CylinderError::DegenerateTwig);
        }
        if p1.is_zero() || p2.is_zero() || p1 + p2 + w0 != LatticeVector::ZERO {
            return Err(CylinderError::SpineUnbalanced { p1, p2, root: w0 });
        }
        if bend.is_origin() || !bend.det(w0).is_zero() {
            return Err(CylinderError::BendNotOnTwigLine { bend, root: w0 });
        }
        if twig_type.len() > 1 && !bend.dot(w0).is_negative() {
            return Err(CylinderError::BendOnWrongSide { bend, root: w0 });
        }
        let leaf_rays = twig_type
            .iter()
            .map(|&u| {
                model
                    .fan()
                    .ray_index(u)
                    .expect("leaf rays survive refinement")
            })
            .collect();

        let generic = generic_walls(base);
        let avoid: Vec<LatticeVector> = model
            .fan()
            .rays()
            .iter()
            .copied()
            .chain(generic.directions().map(|(d, _)| d))
            .collect();
        let interior = match interior_param {
            Some(param) => {
                let y = bend.offset(p1, param);
                if !param.is_positive() || on_some_line(y, avoid.iter().copied()) {
                    return Err(CylinderError::InteriorOnWall(y));
                }
                y
            }
            None => (2..=64)
                .map(|n| bend.offset(p1, Q::new(1, n)))
                .find(|&y| !on_some_line(y, avoid.iter().copied()))
                .ok_or(CylinderError::NoGenericPoint)?,
        };

        let short = |start: Point, slope: LatticeVector| -> Result<Point, CylinderError> {
            let first = path_crossings(model.fan(), start, slope, None)?
                .first()
                .map(|c| c.param);
            let eps = match first {
                Some(t) if t / 2 < Q::one() => t / 2,
                _ => Q::one(),
            };
            Ok(start.offset(slope, eps))
        };
        let leg_ends = [short(interior, p1)?, short(bend, p2)?];
        let delta_hat = &extension_class(&model, leg_ends[0], p1, None)?
            + &extension_class(&model, leg_ends[1], p2, None)?;

        let cyl = Self {
            base: base.clone(),
            walls: generate_walls_with_rule(base, 0, 1, WallRule::Support),
            model,
            p1,
            p2,
            bend,
            twig_type: twig_type.to_vec(),
            leaf_rays,
            interior,
            leg_ends,
            delta_hat,
        };
        for extended in [true, false] {
            let tree = cyl.tree(extended)?;
            match classify(&cyl.model, &cyl.walls, &tree) {
                Classification::Cylinder {
                    primitive: true, ..
                } => {}
                Classification::Invalid(v) => return Err(CylinderError::Classification(v)),
                _ => return Err(CylinderError::Classification(Vec::new())),
            }
        }
        Ok(cyl)
    }

    pub fn base(&self) -> &ToricModel {
        &self.base
    }

    /// The working model all classes of this cylinder live on.
    pub fn model(&self) -> &ToricModel {
        &self.model
    }

    pub fn walls(&self) -> &WallStructure {
        &self.walls
    }

    pub fn p1(&self) -> LatticeVector {
        self.p1
    }

    pub fn p2(&self) -> LatticeVector {
        self.p2
    }

    pub fn bend(&self) -> Point {
        self.bend
    }

    pub fn interior(&self) -> Point {
        self.interior
    }

    pub fn twig_type(&self) -> &[LatticeVector] {
        &self.twig_type
    }

    pub fn t(&self) -> usize {
        self.twig_type.len()
    }

    /// Working-model ray index of every leaf.
    pub fn leaf_rays(&self) -> &[usize] {
        &self.leaf_rays
    }

    pub fn root_direction(&self) -> LatticeVector {
        self.twig_type.iter().copied().sum()
    }

    /// Endpoints of the finite spine legs of the infinitesimal cylinder.
    pub fn leg_ends(&self) -> [Point; 2] {
        self.leg_ends
    }

    /// Extension class of the infinitesimal cylinder.
    pub fn delta_hat(&self) -> &CurveClass {
        &self.delta_hat
    }

    /// Working-model ray index and multiplicity of the two spine legs.
    pub fn spine_legs(&self) -> [(usize, i64); 2] {
        [self.p1, self.p2].map(|p| {
            self.model
                .fan()
                .ray_multiple(p)
                .expect("spine slopes are rays")
        })
    }

    /// The extended cylinder when `extended`, else the infinitesimal one.
    pub fn tree(&self, extended: bool) -> Result<MappedTree, CylinderError> {
        self.tree_with(&TreePlan::standard(extended, self.t()))
    }

    /// Builds the cylinder's tree with extra marks on the twig leaves.
    pub fn tree_with(&self, plan: &TreePlan) -> Result<MappedTree, CylinderError> {
        let mut t = MappedTree::new();
        let x = t.add_vertex(self.bend);
        let y = t.add_vertex(self.interior);
        t.add_edge(x, y, self.p1)?;
        let [l1, l2, lw] = &plan.labels;
        if plan.extended {
            let a = t.add_ray(y, self.p1)?;
            t.add_leg(l1.clone(), a, LegKind::Boundary)?;
            let b = t.add_ray(x, self.p2)?;
            t.add_leg(l2.clone(), b, LegKind::Boundary)?;
        } else {
            let a = t.add_vertex(self.leg_ends[0]);
            t.add_edge(y, a, self.p1)?;
            t.add_leg(l1.clone(), a, LegKind::Finite)?;
            let b = t.add_vertex(self.leg_ends[1]);
            t.add_edge(x, b, self.p2)?;
            t.add_leg(l2.clone(), b, LegKind::Finite)?;
        }
        t.add_leg(lw.clone(), y, LegKind::Interior)?;

        let (hub, hub_param): (usize, Box<dyn Fn(LatticeVector) -> Q>) = if self.t() == 1 {
            let c = self
                .bend
                .multiple_of(self.twig_type[0])
                .expect("bend on the leaf line");
            (x, Box::new(move |_| c))
        } else {
            let o = t.add_vertex(Point::origin());
            t.add_edge(x, o, self.root_direction())?;
            (o, Box::new(|_| Q::zero()))
        };
        for (s, &w) in self.twig_type.iter().enumerate() {
            let leaf = plan.leaves.get(s).cloned().unwrap_or_default();
            let mut prev = hub;
            let mut last = hub_param(w);
            for (label, param) in leaf.g_mark.iter().chain(leaf.t_mark.iter()) {
                if *param <= last || !param.is_positive() {
                    return Err(CylinderError::AnchorOrderViolation {
                        leaf: s,
                        param: *param,
                    });
                }
                let v = t.add_vertex(Point::along(w, *param));
                t.add_edge(prev, v, w)?;
                t.add_leg(label.clone(), v, LegKind::Interior)?;
                prev = v;
                last = *param;
            }
            match leaf.end {
                LeafEnd::Free => {
                    t.add_ray(prev, w)?;
                }
                LeafEnd::Boundary(label) => {
                    let end = t.add_ray(prev, w)?;
                    t.add_leg(label, end, LegKind::Boundary)?;
                }
                LeafEnd::Finite(label, param) => {
                    if param <= last || !param.is_positive() {
                        return Err(CylinderError::AnchorOrderViolation { leaf: s, param });
                    }
                    let end = t.add_vertex(Point::along(w, param));
                    t.add_edge(prev, end, w)?;
                    t.add_leg(label, end, LegKind::Finite)?;
                }
            }
        }
        Ok(t)
    }
}

/// Unimodular complement of `d` of smallest norm, ties broken
/// lexicographically.
pub fn smallest_complement(model: &ToricModel, d: LatticeVector) -> LatticeVector {
    let mut best: Option<(i64, LatticeVector)> = None;
    for x in -50..=50 {
        for y in -50..=50 {
            let c = LatticeVector::new(x, y);
            if d.det(c).abs() != 1 {
                continue;
            }
            let key = (norm(model.fan(), c), c);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best.expect("primitive vectors have complements").1
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn canonical_reproduces_single_leaf_fixture() {
        let c = PrimitiveCylinder::canonical(&cubic(), &[v(-1, -1)]).unwrap();
        assert_eq!(c.p1(), v(0, 1));
        assert_eq!(c.p2(), v(1, 0));
        assert_eq!(c.bend(), Point::from_ints(2, 2));
        assert_eq!(c.model(), &cubic());
        assert!(c.delta_hat().is_zero());
    }

    #[test]
    fn two_leaves() {
        let c = PrimitiveCylinder::canonical(&cubic(), &[v(1, 0), v(0, 1)]).unwrap();
        assert_eq!(c.root_direction(), v(1, 1));
        assert_eq!(c.p1() + c.p2(), v(-1, -1));
        let tree = c.tree(true).unwrap();
        assert_eq!(tree.edges().len(), 6);
    }

    #[test]
    fn rejections() {
        let m = cubic();
        assert_eq!(
            PrimitiveCylinder::canonical(&m, &[v(1, 0), v(1, 0)]).unwrap_err(),
            CylinderError::RepeatedLeafDirection(v(1, 0))
        );
        assert_eq!(
            PrimitiveCylinder::canonical(&m, &[v(2, 0)]).unwrap_err(),
            CylinderError::LeafDegree(v(2, 0))
        );
        assert_eq!(
            PrimitiveCylinder::canonical(&m, &[v(1, 0), v(0, 1), v(-1, -1)]).unwrap_err(),
            CylinderError::DegenerateTwig
        );
        assert!(matches!(
            PrimitiveCylinder::assemble(&m, v(0, 1), v(1, 0), Point::from_ints(2, 1), &[v(-1, -1)]),
            Err(CylinderError::BendNotOnTwigLine { .. })
        ));
        assert!(matches!(
            PrimitiveCylinder::assemble(&m, v(0, 1), v(1, 1), Point::from_ints(2, 2), &[v(-1, -1)]),
            Err(CylinderError::SpineUnbalanced { .. })
        ));
        let sparse = build_model(
            validate_fan(&[v(1, 0), v(0, 1), v(-1, -1)]).unwrap(),
            &[1, 0, 0],
        )
        .unwrap();
        assert_eq!(
            PrimitiveCylinder::canonical(&sparse, &[v(0, 1)]).unwrap_err(),
            CylinderError::LeafNotExceptional(v(0, 1))
        );
    }

    #[test]
    fn elementary_cylinders() {
        let c = PrimitiveCylinder::canonical(&cubic(), &[v(1, 0), v(0, 1)]).unwrap();
        for s in 0..2 {
            let e = c.elementary(s).unwrap();
            assert_eq!(e.model(), c.model());
            assert_eq!(e.twig_type(), &[c.twig_type()[s]]);
        }
    }

    #[test]
    fn refined_spine() {
        let m = cubic();
        let c =
            PrimitiveCylinder::assemble(&m, v(1, 2), v(-2, -3), Point::from_ints(1, 1), &[v(1, 1)]);
        assert!(matches!(c, Err(CylinderError::LeafNotExceptional(_))));
        let c = PrimitiveCylinder::assemble(
            &m,
            v(-1, 2),
            v(2, -1),
            Point::from_ints(-1, -1),
            &[v(-1, -1)],
        )
        .unwrap();
        assert!(c.model().num_rays() > 3);
        assert_eq!(c.base(), &m);
    }

    #[test]
    fn anchors_must_be_ordered() {
        let c = PrimitiveCylinder::canonical(&cubic(), &[v(1, 0), v(0, 1)]).unwrap();
        let mut plan = TreePlan::standard(true, 2);
        plan.leaves[0].g_mark = Some(("g".into(), Q::from_integer(2)));
        plan.leaves[0].t_mark = Some(("t".into(), Q::from_integer(1)));
        assert!(matches!(
            c.tree_with(&plan),
            Err(CylinderError::AnchorOrderViolation { leaf: 0, .. })
        ));
    }
}
