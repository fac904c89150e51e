//! Standard toric models and reference tropical curves.

use crate::lattice::{validate_fan, Fan, LatticeVector};
use crate::model::{build_model, ModelError, ToricModel};
use crate::tropical::{LegKind, MappedTree, Point, Q};
use crate::walls::{generate_walls, WallStructure};

fn v(x: i64, y: i64) -> LatticeVector {
    LatticeVector::new(x, y)
}

fn fan(rays: &[LatticeVector]) -> Fan {
    validate_fan(rays).expect("standard fans are smooth and complete")
}

pub fn projective_plane_fan() -> Fan {
    fan(&[v(1, 0), v(0, 1), v(-1, -1)])
}

pub fn p1xp1_fan() -> Fan {
    fan(&[v(1, 0), v(0, 1), v(-1, 0), v(0, -1)])
}

pub fn hirzebruch_f1_fan() -> Fan {
    fan(&[v(1, 0), v(0, 1), v(-1, -1), v(0, -1)])
}

pub fn projective_plane(blowups: &[i64]) -> Result<ToricModel, ModelError> {
    build_model(projective_plane_fan(), blowups)
}

pub fn p1xp1(blowups: &[i64]) -> Result<ToricModel, ModelError> {
    build_model(p1xp1_fan(), blowups)
}

pub fn hirzebruch_f1(blowups: &[i64]) -> Result<ToricModel, ModelError> {
    build_model(hirzebruch_f1_fan(), blowups)
}

/// ℙ² with two blowups on each boundary line.
pub fn cubic() -> ToricModel {
    projective_plane(&[2, 2, 2]).expect("valid")
}

/// The wall structure drawn for the cubic model.
pub fn cubic_walls() -> WallStructure {
    generate_walls(&cubic(), 4, 10)
}

/// Spine through the bending point `x` with slopes `p1`, `p2`; the interior
/// leg `w` sits at `x + p1 / 2`. Returns the tree and the index of `x`.
fn spine(x: Point, p1: LatticeVector, p2: LatticeVector) -> (MappedTree, usize) {
    let mut t = MappedTree::new();
    let bend = t.add_vertex(x);
    let y = t.add_vertex(x.offset(p1, Q::new(1, 2)));
    t.add_edge(bend, y, p1).expect("affine");
    let a = t.add_ray(y, p1).expect("ray");
    t.add_leg("1", a, LegKind::Boundary).expect("label");
    let b = t.add_ray(bend, p2).expect("ray");
    t.add_leg("2", b, LegKind::Boundary).expect("label");
    t.add_leg("w", y, LegKind::Interior).expect("label");
    (t, bend)
}

/// Primitive cylinder: spine legs `(0,1)` and `(1,0)` bending at `(2,2)`,
/// twig a single leaf `(-1,-1)` through the origin.
pub fn single_leaf_cylinder() -> MappedTree {
    let (mut t, x) = spine(Point::from_ints(2, 2), v(0, 1), v(1, 0));
    t.add_ray(x, v(-1, -1)).expect("ray");
    t
}

/// Same spine; the twig splits at the origin into leaves `2·(-1,-1)`,
/// `(1,0)` and `(0,1)`.
pub fn split_twig_cylinder() -> MappedTree {
    let (mut t, x) = spine(Point::from_ints(2, 2), v(0, 1), v(1, 0));
    let o = t.add_vertex(Point::origin());
    t.add_edge(x, o, v(-1, -1)).expect("affine");
    for w in [v(-2, -2), v(1, 0), v(0, 1)] {
        t.add_ray(o, w).expect("ray");
    }
    t
}

/// Spine weights `3·(0,1)` and `4·(-1,-1)` against a twig root `(2,1)`:
/// unbalanced at the bending vertex.
pub fn unbalanced_bend() -> MappedTree {
    let (mut t, x) = spine(Point::from_ints(-2, -1), v(0, 3), v(-4, -4));
    let o = t.add_vertex(Point::origin());
    t.add_edge(x, o, v(2, 1)).expect("affine");
    t.add_ray(o, v(2, 0)).expect("ray");
    t.add_ray(o, v(0, 1)).expect("ray");
    t
}

/// The three complete fans used for exhaustive checks, by name.
pub fn standard_fans() -> Vec<(&'static str, Fan)> {
    vec![
        ("P2", projective_plane_fan()),
        ("P1xP1", p1xp1_fan()),
        ("F1", hirzebruch_f1_fan()),
    ]
}

/// Every blowup vector on `rays` rays with entries in `0..=max`, in
/// lexicographic order.
pub fn blowup_vectors(rays: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rays {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (0..=max).map(move |l| {
                    let mut next = prefix.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
    }
    out
}

/// Twig types of primitive cylinders: sets of at most `max_t` distinct rays
/// carrying blowups, in fan order, whose generators do not sum to zero.
pub fn primitive_twig_types(model: &ToricModel, max_t: usize) -> Vec<Vec<LatticeVector>> {
    let rays: Vec<LatticeVector> = (0..model.num_rays())
        .filter(|&i| model.blowups_on(i) > 0)
        .map(|i| model.fan().ray(i))
        .collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << rays.len()) {
        let chosen: Vec<LatticeVector> = (0..rays.len())
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| rays[b])
            .collect();
        let sum: LatticeVector = chosen.iter().copied().sum();
        if chosen.len() <= max_t && !sum.is_zero() {
            out.push(chosen);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}
