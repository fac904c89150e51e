//! Balancing, classification and spine decomposition of mapped trees.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use super::{LegKind, Length, MappedTree, Point, TreeError};
use crate::lattice::LatticeVector;
use crate::model::ToricModel;
use crate::walls::WallStructure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VertexBalance {
    Balanced,
    /// The weight sum is nonzero, parallel to a wall, and the vertex lies on
    /// that wall's line.
    Bending(LatticeVector),
    Unbalanced(LatticeVector),
}

/// A clause of the tropical curve, spine, twig or cylinder definitions that a
/// tree fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Error)]
pub enum Violation {
    #[error("malformed tree: {0}")]
    Structure(#[serde(skip)] TreeError),
    #[error("no marked legs")]
    NoMarkedLegs,
    #[error("the image never reaches the boundary")]
    NoBoundaryContact,
    #[error("edge {edge} has weight zero")]
    ContractedEdge { edge: usize },
    #[error("vertex {vertex} is unbalanced with deficit {deficit}")]
    Unbalanced {
        vertex: usize,
        deficit: LatticeVector,
    },
    #[error("spine vertex {vertex} has weight sum {sum}, which is neither zero nor along a wall")]
    SpineNotBalancedOrBending { vertex: usize, sum: LatticeVector },
    #[error("boundary leg `{label}` has weight {weight}, not a multiple of a fan ray")]
    BoundaryLegNotRayDirection {
        label: String,
        weight: LatticeVector,
    },
    #[error("leaf edge {edge} with weight {weight} does not run to an exceptional point")]
    LeafNotToExceptional { edge: usize, weight: LatticeVector },
    #[error("twig edge {edge} with weight {weight} is not contained in a wall")]
    TwigOutsideWalls { edge: usize, weight: LatticeVector },
    #[error("vertex {vertex} is an unmarked finite end")]
    DanglingFiniteEnd { vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// A spine with one bending vertex, one twig hanging from it, two legs
    /// towards the boundary and one interior leg.
    Cylinder {
        primitive: bool,
        twig_type: Vec<LatticeVector>,
        bending_vertex: usize,
    },
    TropicalCurve,
    Spine,
    Twig {
        direction: LatticeVector,
        twig_type: Vec<LatticeVector>,
    },
    Invalid(Vec<Violation>),
}

impl Classification {
    pub fn is_valid(&self) -> bool {
        !matches!(self, Classification::Invalid(_))
    }

    pub fn is_primitive_cylinder(&self) -> bool {
        matches!(
            self,
            Classification::Cylinder {
                primitive: true,
                ..
            }
        )
    }

    pub fn violations(&self) -> &[Violation] {
        match self {
            Classification::Invalid(v) => v,
            _ => &[],
        }
    }
}

fn balance_of(walls: &WallStructure, pos: Point, sum: LatticeVector) -> VertexBalance {
    if sum.is_zero() {
        VertexBalance::Balanced
    } else if walls.contains(sum) && pos.det(sum).is_zero() {
        VertexBalance::Bending(sum)
    } else {
        VertexBalance::Unbalanced(sum)
    }
}

/// Balancing status of every finite vertex of valence greater than one.
pub fn validate_balancing(
    walls: &WallStructure,
    tree: &MappedTree,
) -> Result<Vec<(usize, VertexBalance)>, TreeError> {
    tree.check_structure()?;
    Ok((0..tree.vertices().len())
        .filter(|&v| !tree.is_infinite(v) && tree.valence(v) > 1)
        .map(|v| {
            let pos = tree.finite_position(v).expect("finite");
            (v, balance_of(walls, pos, tree.weight_sum(v)))
        })
        .collect())
}

fn edge_on_wall(tree: &MappedTree, walls: &WallStructure, e: usize) -> bool {
    let edge = tree.edges()[e];
    let Some(p) = tree.finite_position(edge.tail) else {
        return false;
    };
    p.det(edge.weight).is_zero() && walls.contains(edge.weight)
}

fn leaf_ok(model: &ToricModel, tree: &MappedTree, e: usize) -> bool {
    let edge = tree.edges()[e];
    let Some((i, _)) = model.fan().ray_multiple(edge.weight) else {
        return false;
    };
    let tail = tree
        .finite_position(edge.tail)
        .expect("infinite edges have a finite tail");
    model.blowups_on(i) > 0 && tail.det(model.fan().ray(i)).is_zero()
}

fn infinite_edge_at(tree: &MappedTree, v: usize) -> Option<usize> {
    tree.incidences(v).first().map(|i| i.edge)
}

/// Classifies a tree against the definitions of twigs, spines, tropical
/// curves and cylinders.
pub fn classify(model: &ToricModel, walls: &WallStructure, tree: &MappedTree) -> Classification {
    if let Err(e) = tree.check_structure() {
        return Classification::Invalid(vec![Violation::Structure(e)]);
    }
    let legs = tree.legs();
    if legs.is_empty() {
        return Classification::Invalid(vec![Violation::NoMarkedLegs]);
    }
    if legs.len() == 1 && legs[0].kind == LegKind::Finite {
        return classify_twig(model, walls, tree, legs[0].vertex);
    }

    let mut violations = Vec::new();
    for (i, e) in tree.edges().iter().enumerate() {
        if e.weight.is_zero() {
            violations.push(Violation::ContractedEdge { edge: i });
        }
    }
    let marked = tree.marked_vertices();
    for leg in legs {
        if leg.kind == LegKind::Boundary {
            let e = infinite_edge_at(tree, leg.vertex).expect("valence one");
            let w = tree.edges()[e].weight;
            if model.fan().ray_multiple(w).is_none() {
                violations.push(Violation::BoundaryLegNotRayDirection {
                    label: leg.label.clone(),
                    weight: w,
                });
            }
        }
    }
    let mut leaves = 0;
    for v in 0..tree.vertices().len() {
        if marked.contains(&v) {
            continue;
        }
        if tree.is_infinite(v) {
            leaves += 1;
            let e = infinite_edge_at(tree, v).expect("valence one");
            if !leaf_ok(model, tree, e) {
                violations.push(Violation::LeafNotToExceptional {
                    edge: e,
                    weight: tree.edges()[e].weight,
                });
            }
        } else if tree.valence(v) <= 1 {
            violations.push(Violation::DanglingFiniteEnd { vertex: v });
        }
    }
    let has_contact = leaves > 0 || legs.iter().any(|l| l.kind != LegKind::Interior);
    if !has_contact {
        violations.push(Violation::NoBoundaryContact);
    }

    let hull = tree.hull_edges();
    let components = tree.twig_components();
    for (_, edges) in &components {
        for &e in edges {
            if !edge_on_wall(tree, walls, e) {
                violations.push(Violation::TwigOutsideWalls {
                    edge: e,
                    weight: tree.edges()[e].weight,
                });
            }
        }
    }

    let mut bending = Vec::new();
    for v in tree.hull_vertices() {
        if tree.is_infinite(v) {
            continue;
        }
        if tree.valence(v) <= 1 {
            continue;
        }
        let pos = tree.finite_position(v).expect("finite");
        let full = tree.weight_sum(v);
        let spine_sum: LatticeVector = tree
            .incidences(v)
            .iter()
            .filter(|i| hull.contains(&i.edge))
            .map(|i| i.outgoing)
            .sum();
        match balance_of(walls, pos, spine_sum) {
            VertexBalance::Balanced => {}
            VertexBalance::Bending(_) => bending.push(v),
            VertexBalance::Unbalanced(sum) => {
                violations.push(Violation::SpineNotBalancedOrBending { vertex: v, sum });
            }
        }
        if !components.is_empty() && !full.is_zero() {
            violations.push(Violation::Unbalanced {
                vertex: v,
                deficit: full,
            });
        }
    }
    for v in 0..tree.vertices().len() {
        if !tree.hull_vertices().contains(&v) && !tree.is_infinite(v) && tree.valence(v) > 1 {
            let full = tree.weight_sum(v);
            if !full.is_zero() {
                violations.push(Violation::Unbalanced {
                    vertex: v,
                    deficit: full,
                });
            }
        }
    }
    if !violations.is_empty() {
        violations.sort_by_key(|v| format!("{v:?}"));
        violations.dedup();
        return Classification::Invalid(violations);
    }

    if components.is_empty() {
        let has_finite = legs.iter().any(|l| l.kind == LegKind::Finite);
        return if has_finite || !bending.is_empty() {
            Classification::Spine
        } else {
            Classification::TropicalCurve
        };
    }

    let spine_legs = legs.iter().filter(|l| l.kind != LegKind::Interior).count();
    let interior: Vec<usize> = legs
        .iter()
        .filter(|l| l.kind == LegKind::Interior)
        .map(|l| l.vertex)
        .collect();
    let shaped = spine_legs == 2
        && interior.len() == 1
        && components.len() == 1
        && bending.len() == 1
        && bending[0] == components[0].0
        && interior[0] != bending[0];
    if !shaped {
        return Classification::TropicalCurve;
    }
    let twig_type = leaf_weights(tree, &components[0].1);
    let distinct: BTreeSet<_> = twig_type.iter().filter_map(|w| w.primitive()).collect();
    let primitive = twig_type.iter().all(|w| w.is_primitive()) && distinct.len() == twig_type.len();
    Classification::Cylinder {
        primitive,
        twig_type,
        bending_vertex: bending[0],
    }
}

fn leaf_weights(tree: &MappedTree, edges: &[usize]) -> Vec<LatticeVector> {
    edges
        .iter()
        .filter(|&&e| tree.edges()[e].length == Length::Infinite)
        .map(|&e| tree.edges()[e].weight)
        .collect()
}

fn classify_twig(
    model: &ToricModel,
    walls: &WallStructure,
    tree: &MappedTree,
    root: usize,
) -> Classification {
    let mut violations = Vec::new();
    for (i, e) in tree.edges().iter().enumerate() {
        if e.weight.is_zero() {
            violations.push(Violation::ContractedEdge { edge: i });
        }
        if !edge_on_wall(tree, walls, i) {
            violations.push(Violation::TwigOutsideWalls {
                edge: i,
                weight: e.weight,
            });
        }
        if e.length.is_infinite() && !leaf_ok(model, tree, i) {
            violations.push(Violation::LeafNotToExceptional {
                edge: i,
                weight: e.weight,
            });
        }
    }
    for v in 0..tree.vertices().len() {
        if tree.is_infinite(v) || v == root {
            continue;
        }
        if tree.valence(v) <= 1 {
            violations.push(Violation::DanglingFiniteEnd { vertex: v });
        } else if !tree.weight_sum(v).is_zero() {
            violations.push(Violation::Unbalanced {
                vertex: v,
                deficit: tree.weight_sum(v),
            });
        }
    }
    if !violations.is_empty() {
        return Classification::Invalid(violations);
    }
    let all: Vec<usize> = (0..tree.edges().len()).collect();
    Classification::Twig {
        direction: tree.weight_sum(root),
        twig_type: leaf_weights(tree, &all),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("not a tropical curve: {0:?}")]
    NotATropicalCurve(Vec<Violation>),
}

/// A spine together with the twigs hanging off it. Each twig carries a
/// finite root leg labelled `r` at its attachment point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpineDecomposition {
    pub spine: MappedTree,
    pub twigs: Vec<(Point, MappedTree)>,
}

pub const TWIG_ROOT_LABEL: &str = "r";

pub fn spine_decomposition(
    model: &ToricModel,
    walls: &WallStructure,
    tree: &MappedTree,
) -> Result<SpineDecomposition, DecompositionError> {
    let class = classify(model, walls, tree);
    if let Classification::Invalid(v) = class {
        return Err(DecompositionError::NotATropicalCurve(v));
    }
    let spine = tree.restrict(&tree.hull_edges(), &tree.marked_vertices());
    let twigs = tree
        .twig_components()
        .into_iter()
        .map(|(root, edges)| {
            let pos = tree
                .finite_position(root)
                .expect("twigs hang from finite vertices");
            let edges: BTreeSet<usize> = edges.into_iter().collect();
            let mut twig = tree
                .restrict(&edges, &BTreeSet::from([root]))
                .without_legs();
            let r = (0..twig.vertices().len())
                .find(|&v| twig.finite_position(v) == Some(pos))
                .expect("root kept");
            twig.add_leg(TWIG_ROOT_LABEL, r, LegKind::Finite)
                .expect("fresh label");
            (pos, twig)
        })
        .collect();
    Ok(SpineDecomposition { spine, twigs })
}

impl SpineDecomposition {
    /// Glues the twigs back onto the spine.
    pub fn reassemble(&self) -> MappedTree {
        self.twigs
            .iter()
            .fold(self.spine.clone(), |acc, (pos, twig)| {
                acc.glue(twig, *pos, TWIG_ROOT_LABEL)
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        cubic, cubic_walls, single_leaf_cylinder, split_twig_cylinder, unbalanced_bend,
    };
    use crate::tropical::Q;

    fn v(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn has(c: &Classification, pred: impl Fn(&Violation) -> bool) -> bool {
        c.violations().iter().any(pred)
    }

    #[test]
    fn reference_fixtures() {
        let (m, w) = (cubic(), cubic_walls());
        match classify(&m, &w, &single_leaf_cylinder()) {
            Classification::Cylinder {
                primitive,
                twig_type,
                bending_vertex,
            } => {
                assert!(primitive);
                assert_eq!(twig_type, vec![v(-1, -1)]);
                assert_eq!(bending_vertex, 0);
            }
            other => panic!("{other:?}"),
        }
        match classify(&m, &w, &split_twig_cylinder()) {
            Classification::Cylinder {
                primitive,
                twig_type,
                ..
            } => {
                assert!(!primitive);
                assert!(twig_type.contains(&v(-2, -2)));
            }
            other => panic!("{other:?}"),
        }
        let bottom = classify(&m, &w, &unbalanced_bend());
        assert!(has(
            &bottom,
            |x| matches!(x, Violation::Unbalanced { deficit, .. } if *deficit == v(-2, 0))
        ));
        assert!(matches!(
            spine_decomposition(&m, &w, &unbalanced_bend()),
            Err(DecompositionError::NotATropicalCurve(_))
        ));
    }

    #[test]
    fn bending_vertex_balance() {
        let t = single_leaf_cylinder();
        let w = cubic_walls();
        let report = validate_balancing(&w, &t).unwrap();
        assert!(report.iter().all(|(_, b)| *b == VertexBalance::Balanced));
        let spine = t.restrict(&t.hull_edges(), &t.marked_vertices());
        let report = validate_balancing(&w, &spine).unwrap();
        assert!(report.contains(&(0, VertexBalance::Bending(v(1, 1)))));
    }

    #[test]
    fn single_weight_mutations_name_the_clause() {
        let (m, w) = (cubic(), cubic_walls());
        let mut twig = single_leaf_cylinder();
        twig.set_weight(3, v(-2, -2));
        let c = classify(&m, &w, &twig);
        assert!(has(
            &c,
            |x| matches!(x, Violation::Unbalanced { vertex: 0, deficit } if *deficit == v(-1, -1))
        ));

        let mut leg = single_leaf_cylinder();
        leg.set_weight(2, v(1, 1));
        let c = classify(&m, &w, &leg);
        assert!(has(
            &c,
            |x| matches!(x, Violation::BoundaryLegNotRayDirection { label, .. } if label == "2")
        ));

        let mut leaf = single_leaf_cylinder();
        leaf.set_weight(3, v(-1, 0));
        let c = classify(&m, &w, &leaf);
        assert!(has(&c, |x| matches!(
            x,
            Violation::LeafNotToExceptional { edge: 3, .. }
        )));

        let mut heavy = single_leaf_cylinder();
        heavy.set_weight(1, v(0, 2));
        let c = classify(&m, &w, &heavy);
        assert!(has(
            &c,
            |x| matches!(x, Violation::Unbalanced { vertex: 1, deficit } if *deficit == v(0, 1))
        ));

        let mut off = split_twig_cylinder();
        off.set_weight(4, v(2, -1));
        let c = classify(&m, &w, &off);
        assert!(!c.is_valid());
    }

    #[test]
    fn constant_segment_is_invalid() {
        let mut t = MappedTree::new();
        let a = t.add_vertex(Point::from_ints(1, 2));
        let b = t.add_vertex(Point::from_ints(1, 2));
        t.push_edge_unchecked(crate::tropical::Edge {
            tail: a,
            head: b,
            length: Length::Finite(Q::from_integer(1)),
            weight: v(0, 0),
        });
        t.add_leg("a", a, LegKind::Interior).unwrap();
        t.add_leg("b", b, LegKind::Interior).unwrap();
        let c = classify(&cubic(), &cubic_walls(), &t);
        assert!(has(&c, |x| matches!(x, Violation::NoBoundaryContact)));
        assert!(has(&c, |x| matches!(
            x,
            Violation::ContractedEdge { edge: 0 }
        )));
    }

    #[test]
    fn decomposition_round_trip() {
        let (m, w) = (cubic(), cubic_walls());
        for tree in [single_leaf_cylinder(), split_twig_cylinder()] {
            let d = spine_decomposition(&m, &w, &tree).unwrap();
            assert_eq!(d.twigs.len(), 1);
            assert_eq!(d.reassemble().signature(), tree.signature());
        }
        let d = spine_decomposition(&m, &w, &single_leaf_cylinder()).unwrap();
        assert_eq!(d.twigs[0].0, Point::from_ints(2, 2));
        let spine = d.spine.clone();
        let again = spine_decomposition(&m, &w, &spine).unwrap();
        assert!(again.twigs.is_empty());
        assert_eq!(again.spine.signature(), spine.signature());
    }

    #[test]
    fn subdivision_is_invisible() {
        let (m, w) = (cubic(), cubic_walls());
        for tree in [single_leaf_cylinder(), split_twig_cylinder()] {
            let before = classify(&m, &w, &tree);
            let mut split = tree.clone();
            split.subdivide_edge(0, Q::new(1, 3)).unwrap();
            let after = classify(&m, &w, &split);
            assert_eq!(
                before.is_primitive_cylinder(),
                after.is_primitive_cylinder()
            );
            assert_eq!(before.is_valid(), after.is_valid());
            assert_eq!(classify(&m, &w, &split.simplify()), before);
        }
    }
}
