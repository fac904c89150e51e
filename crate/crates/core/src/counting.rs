//! Counts of primitive tropical cylinders.
//!
//! Classes of an extended cylinder `V̂` with twig type `(w_s)` are split as
//! `β̂ = τ_V + Σ_s β_s`, where `τ_V` is the toric class meeting each `D_i` as
//! the spine legs together with one extra contact per leaf ray, and each
//! `β_s` is an elementary class `ε_ij = -[E_ij]` (zero toric part, meeting
//! `E_ij` once and `D_i` with multiplicity `-1`). Elementary counts come from
//! a pluggable table, and the count is
//! `N(V̂, β̂) = Σ_{β̂ - τ_V = Σ β_s} Π_s N(V_s, β_s)`.
//!
//! For the infinitesimal cylinder `N(V, β) = N(V̂, β + δ̂_V)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::{
    class_from_profile, intersect, lift_profile, ClassError, CurveClass, IntersectionProfile,
};
use crate::lattice::LatticeVector;
use crate::model::ToricModel;
use crate::tropical::{CylinderError, Point, PrimitiveCylinder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("component {component} out of range on ray {ray}")]
    ComponentOutOfRange { ray: usize, component: usize },
    #[error(
        "class meets E[{ray},{component}] with multiplicity {value}; only 0 and 1 are primitive"
    )]
    OutOfPrimitiveScope {
        ray: usize,
        component: usize,
        value: i64,
    },
    #[error(
        "class meets two exceptional curves over ray {0}, which needs a repeated leaf direction"
    )]
    RepeatedLeafRay(usize),
    #[error(transparent)]
    Cylinder(#[from] CylinderError),
    #[error(transparent)]
    Class(#[from] ClassError),
}

/// Source of elementary cylinder counts `N(V_s, ε_ij)`, keyed by the leaf
/// direction and the component index on that ray.
pub trait ElementaryCounts {
    fn elementary(&self, direction: LatticeVector, component: usize) -> u64;
}

/// Elementary counts with default value 1 and explicit overrides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElementaryCountTable {
    overrides: BTreeMap<(LatticeVector, usize), u64>,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    direction: LatticeVector,
    component: usize,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct TableWire {
    entries: Vec<TableEntry>,
}

impl Serialize for ElementaryCountTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TableWire {
            entries: self
                .overrides
                .iter()
                .map(|(&(direction, component), &count)| TableEntry {
                    direction,
                    component,
                    count,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElementaryCountTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = TableWire::deserialize(d)?;
        Ok(Self {
            overrides: wire
                .entries
                .into_iter()
                .map(|e| ((e.direction, e.component), e.count))
                .collect(),
        })
    }
}

impl ElementaryCountTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, direction: LatticeVector, component: usize, count: u64) {
        self.overrides.insert((direction, component), count);
    }

    pub fn with(mut self, direction: LatticeVector, component: usize, count: u64) -> Self {
        self.set(direction, component, count);
        self
    }

    pub fn is_default(&self) -> bool {
        self.overrides.values().all(|&c| c == 1)
    }
}

impl ElementaryCounts for ElementaryCountTable {
    fn elementary(&self, direction: LatticeVector, component: usize) -> u64 {
        self.overrides
            .get(&(direction, component))
            .copied()
            .unwrap_or(1)
    }
}

/// Whether a class refers to the extended or the infinitesimal cylinder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    #[default]
    Extended,
    Infinitesimal,
}

/// `ε_ij = -[E_ij]`.
pub fn elementary_class(model: &ToricModel, ray: usize, component: usize) -> CurveClass {
    CurveClass::exceptional(model, ray, component).scale(-1)
}

pub fn elementary_count(
    table: &dyn ElementaryCounts,
    model: &ToricModel,
    ray: usize,
    component: usize,
    beta: &CurveClass,
) -> Result<u64, CountError> {
    if ray >= model.num_rays() || component >= model.blowups_on(ray) {
        return Err(CountError::ComponentOutOfRange { ray, component });
    }
    if *beta == elementary_class(model, ray, component) {
        Ok(table.elementary(model.fan().ray(ray), component))
    } else {
        Ok(0)
    }
}

fn spine_compatibility(cyl: &PrimitiveCylinder) -> Vec<i64> {
    let mut d = vec![0; cyl.model().num_rays()];
    for (i, m) in cyl.spine_legs() {
        d[i] += m;
    }
    d
}

/// `τ_V`: the toric class meeting `D_i` as the spine legs plus one contact
/// per leaf ray.
pub fn twig_free_class(cyl: &PrimitiveCylinder) -> Result<CurveClass, CountError> {
    let model = cyl.model();
    let mut profile = IntersectionProfile::zero(model);
    profile.d_d = spine_compatibility(cyl);
    for &i in cyl.leaf_rays() {
        profile.d_d[i] += 1;
    }
    Ok(class_from_profile(model, &profile)?)
}

/// The contributing class of the extended cylinder for the choice of
/// component `choice[s]` on the ray of leaf `s`: compatible with the spine
/// legs and meeting exactly the chosen exceptional curves once.
pub fn choice_class(cyl: &PrimitiveCylinder, choice: &[usize]) -> Result<CurveClass, CountError> {
    let model = cyl.model();
    let mut profile = IntersectionProfile::zero(model);
    profile.d_d = spine_compatibility(cyl);
    for (&i, &j) in cyl.leaf_rays().iter().zip(choice) {
        if j >= model.blowups_on(i) {
            return Err(CountError::ComponentOutOfRange {
                ray: i,
                component: j,
            });
        }
        profile.d_e[i][j] += 1;
    }
    Ok(class_from_profile(model, &profile)?)
}

/// All choice tuples in lexicographic order.
pub fn choices(model: &ToricModel, leaf_rays: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &i in leaf_rays {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..model.blowups_on(i)).map(move |j| {
                    let mut next = prefix.clone();
                    next.push(j);
                    next
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Splitting {
    /// Component chosen on the ray of each leaf.
    pub choice: Vec<usize>,
    #[serde(skip)]
    pub classes: Vec<CurveClass>,
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountResult {
    pub value: u64,
    pub splittings: Vec<Splitting>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Contribution {
    pub choice: Vec<usize>,
    #[serde(skip)]
    pub class: CurveClass,
    pub profile: IntersectionProfile,
    pub factors: Vec<u64>,
    pub count: u64,
}

fn factors(table: &dyn ElementaryCounts, cyl: &PrimitiveCylinder, choice: &[usize]) -> Vec<u64> {
    cyl.twig_type()
        .iter()
        .zip(choice)
        .map(|(&u, &j)| table.elementary(u, j))
        .collect()
}

/// One entry per choice of exceptional component on each leaf ray.
pub fn contributing_classes(
    table: &dyn ElementaryCounts,
    cyl: &PrimitiveCylinder,
) -> Result<Vec<Contribution>, CountError> {
    choices(cyl.model(), cyl.leaf_rays())
        .into_iter()
        .map(|choice| {
            let class = choice_class(cyl, &choice)?;
            let profile = intersect(cyl.model(), &class)?;
            let factors = factors(table, cyl, &choice);
            Ok(Contribution {
                count: factors.iter().product(),
                choice,
                class,
                profile,
                factors,
            })
        })
        .collect()
}

fn extended_class(cyl: &PrimitiveCylinder, beta: &CurveClass, kind: ClassKind) -> CurveClass {
    match kind {
        ClassKind::Extended => beta.clone(),
        ClassKind::Infinitesimal => beta + cyl.delta_hat(),
    }
}

fn check_scope(profile: &IntersectionProfile) -> Result<(), CountError> {
    for (i, row) in profile.d_e.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if value != 0 && value != 1 {
                return Err(CountError::OutOfPrimitiveScope {
                    ray: i,
                    component: j,
                    value,
                });
            }
        }
    }
    Ok(())
}

/// The closed-form count. The class is matched against the contributing
/// class of the choice it determines.
pub fn count_primitive_cylinder(
    table: &dyn ElementaryCounts,
    cyl: &PrimitiveCylinder,
    beta: &CurveClass,
    kind: ClassKind,
) -> Result<CountResult, CountError> {
    let model = cyl.model();
    let beta_hat = extended_class(cyl, beta, kind);
    let profile = intersect(model, &beta_hat)?;
    check_scope(&profile)?;
    let empty = CountResult {
        value: 0,
        splittings: Vec::new(),
    };
    let mut choice = Vec::with_capacity(cyl.t());
    for &i in cyl.leaf_rays() {
        let ones: Vec<usize> = (0..model.blowups_on(i))
            .filter(|&j| profile.d_e[i][j] == 1)
            .collect();
        match ones.as_slice() {
            [j] => choice.push(*j),
            _ => return Ok(empty),
        }
    }
    let stray = profile
        .d_e
        .iter()
        .enumerate()
        .any(|(i, row)| !cyl.leaf_rays().contains(&i) && row.iter().any(|&v| v != 0));
    if stray || beta_hat != choice_class(cyl, &choice)? {
        return Ok(empty);
    }
    let counts = factors(table, cyl, &choice);
    let classes = cyl
        .leaf_rays()
        .iter()
        .zip(&choice)
        .map(|(&i, &j)| elementary_class(model, i, j))
        .collect();
    Ok(CountResult {
        value: counts.iter().product(),
        splittings: vec![Splitting {
            choice,
            classes,
            counts,
        }],
    })
}

/// Independent evaluation of the splitting sum: enumerates every assignment
/// of elementary profiles to the leaves and compares profile sums.
pub fn splitting_sum(
    table: &dyn ElementaryCounts,
    cyl: &PrimitiveCylinder,
    beta: &CurveClass,
    kind: ClassKind,
) -> Result<u64, CountError> {
    let model = cyl.model();
    let target = intersect(model, &extended_class(cyl, beta, kind))?;
    check_scope(&target)?;

    let mut base = IntersectionProfile::zero(model);
    for leg in [cyl.p1(), cyl.p2()] {
        let (i, k) = model.fan().ray_multiple(leg).expect("spine legs are rays");
        base.d_d[i] += k;
    }
    for &u in cyl.twig_type() {
        base.d_d[model.fan().ray_index(u).expect("leaf ray")] += 1;
    }

    let rays: Vec<usize> = cyl
        .twig_type()
        .iter()
        .map(|&u| model.fan().ray_index(u).expect("leaf ray"))
        .collect();
    let mut total = 0;
    let mut stack: Vec<(usize, IntersectionProfile, u64)> = vec![(0, base, 1)];
    while let Some((s, acc, product)) = stack.pop() {
        if s == rays.len() {
            if acc == target {
                total += product;
            }
            continue;
        }
        let i = rays[s];
        for j in 0..model.blowups_on(i) {
            let mut next = acc.clone();
            next.d_d[i] -= 1;
            next.d_e[i][j] += 1;
            stack.push((
                s + 1,
                next,
                product * table.elementary(cyl.twig_type()[s], j),
            ));
        }
    }
    Ok(total)
}

/// Count for a cylinder spine, summed over the twig types compatible with the
/// class. The profile is given over `base`.
pub fn count_spine(
    table: &dyn ElementaryCounts,
    base: &ToricModel,
    p1: LatticeVector,
    p2: LatticeVector,
    bend: Point,
    profile: &IntersectionProfile,
) -> Result<u64, CountError> {
    if !profile.matches(base) {
        return Err(ClassError::ModelMismatch.into());
    }
    check_scope(profile)?;
    let mut twig_type = Vec::new();
    for (i, row) in profile.d_e.iter().enumerate() {
        match row.iter().filter(|&&v| v == 1).count() {
            0 => {}
            1 => twig_type.push(base.fan().ray(i)),
            _ => return Err(CountError::RepeatedLeafRay(i)),
        }
    }
    let w0: LatticeVector = twig_type.iter().copied().sum();
    if twig_type.is_empty() || w0.is_zero() || p1 + p2 + w0 != LatticeVector::ZERO {
        return Ok(0);
    }
    let cyl = PrimitiveCylinder::assemble(base, p1, p2, bend, &twig_type)?;
    let lifted = lift_profile(base, cyl.model(), profile)?;
    let beta = match class_from_profile(cyl.model(), &lifted) {
        Ok(b) => b,
        Err(ClassError::NonRepresentable) => return Ok(0),
        Err(e) => return Err(e.into()),
    };
    Ok(count_primitive_cylinder(table, &cyl, &beta, ClassKind::Extended)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate_fan;
    use crate::model::build_model;

    fn v(x: i64, y: i64) -> LatticeVector {
        LatticeVector::new(x, y)
    }

    fn p2(l: &[i64]) -> ToricModel {
        build_model(validate_fan(&[v(1, 0), v(0, 1), v(-1, -1)]).unwrap(), l).unwrap()
    }

    #[test]
    fn elementary_lookup() {
        let m = p2(&[2, 2, 2]);
        let t = ElementaryCountTable::new();
        assert_eq!(
            elementary_count(&t, &m, 2, 0, &elementary_class(&m, 2, 0)).unwrap(),
            1
        );
        let both = &elementary_class(&m, 2, 0) + &elementary_class(&m, 2, 1);
        assert_eq!(elementary_count(&t, &m, 2, 0, &both).unwrap(), 0);
        assert_eq!(
            elementary_count(&t, &m, 2, 0, &CurveClass::zero(&m)).unwrap(),
            0
        );
        assert_eq!(
            elementary_count(&t, &m, 2, 2, &CurveClass::zero(&m)),
            Err(CountError::ComponentOutOfRange {
                ray: 2,
                component: 2
            })
        );
        let skewed = ElementaryCountTable::new().with(v(-1, -1), 0, 5);
        assert_eq!(
            elementary_count(&skewed, &m, 2, 0, &elementary_class(&m, 2, 0)).unwrap(),
            5
        );
    }

    #[test]
    fn single_leaf_contributions() {
        let m = p2(&[2, 2, 2]);
        let cyl = PrimitiveCylinder::canonical(&m, &[v(-1, -1)]).unwrap();
        let t = ElementaryCountTable::new();
        let c = contributing_classes(&t, &cyl).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|x| x.count == 1));
        assert_eq!(c[0].profile.d_d, vec![1, 1, 0]);
        assert_eq!(c[0].profile.d_e, vec![vec![0, 0], vec![0, 0], vec![1, 0]]);
        assert_eq!(c[0].class.toric(), c[1].class.toric());
        for x in &c {
            let r = count_primitive_cylinder(&t, &cyl, &x.class, ClassKind::Extended).unwrap();
            assert_eq!(r.value, 1);
            assert_eq!(
                splitting_sum(&t, &cyl, &x.class, ClassKind::Extended).unwrap(),
                1
            );
        }
        let doubled = &c[0].class + &CurveClass::exceptional(&m, 2, 0).scale(-1);
        assert!(matches!(
            count_primitive_cylinder(&t, &cyl, &doubled, ClassKind::Extended),
            Err(CountError::OutOfPrimitiveScope {
                ray: 2,
                component: 0,
                value: 2
            })
        ));
    }

    #[test]
    fn two_leaves() {
        let m = p2(&[2, 2, 2]);
        let cyl = PrimitiveCylinder::canonical(&m, &[v(1, 0), v(0, 1)]).unwrap();
        let t = ElementaryCountTable::new();
        let c = contributing_classes(&t, &cyl).unwrap();
        assert_eq!(c.len(), 4);
        let beta = choice_class(&cyl, &[0, 1]).unwrap();
        let r = count_primitive_cylinder(&t, &cyl, &beta, ClassKind::Extended).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.splittings.len(), 1);
        assert_eq!(r.splittings[0].choice, vec![0, 1]);
    }

    #[test]
    fn infinitesimal_classes_shift_by_delta_hat() {
        let m = p2(&[2, 2, 2]);
        let cyl = PrimitiveCylinder::canonical(&m, &[v(1, 0), v(0, 1)]).unwrap();
        let t = ElementaryCountTable::new().with(v(1, 0), 1, 3);
        for choice in choices(cyl.model(), cyl.leaf_rays()) {
            let hat = choice_class(&cyl, &choice).unwrap();
            let beta = &hat - cyl.delta_hat();
            let a = count_primitive_cylinder(&t, &cyl, &hat, ClassKind::Extended)
                .unwrap()
                .value;
            let b = count_primitive_cylinder(&t, &cyl, &beta, ClassKind::Infinitesimal)
                .unwrap()
                .value;
            assert_eq!(a, b);
            assert_eq!(
                b,
                splitting_sum(&t, &cyl, &beta, ClassKind::Infinitesimal).unwrap()
            );
        }
    }

    #[test]
    fn spine_counts() {
        let m = p2(&[2, 2, 2]);
        let t = ElementaryCountTable::new();
        let bend = Point::from_ints(2, 2);
        let mut profile = IntersectionProfile::zero(&m);
        profile.d_d = vec![1, 1, 0];
        profile.d_e[2][0] = 1;
        assert_eq!(
            count_spine(&t, &m, v(0, 1), v(1, 0), bend, &profile).unwrap(),
            1
        );
        let mut bare = IntersectionProfile::zero(&m);
        bare.d_d = vec![1, 1, 1];
        assert_eq!(
            count_spine(&t, &m, v(0, 1), v(1, 0), bend, &bare).unwrap(),
            0
        );
        let mut doubled = profile.clone();
        doubled.d_e[0][0] = 2;
        assert!(matches!(
            count_spine(&t, &m, v(0, 1), v(1, 0), bend, &doubled),
            Err(CountError::OutOfPrimitiveScope {
                ray: 0,
                component: 0,
                value: 2
            })
        ));
        let mut repeated = profile.clone();
        repeated.d_e[2][1] = 1;
        assert_eq!(
            count_spine(&t, &m, v(0, 1), v(1, 0), bend, &repeated),
            Err(CountError::RepeatedLeafRay(2))
        );
    }

    #[test]
    fn table_wire_format() {
        let t = ElementaryCountTable::new().with(v(1, 0), 1, 2);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"entries":[{"direction":[1,0],"component":1,"count":2}]}"#
        );
        let back: ElementaryCountTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.elementary(v(1, 0), 1), 2);
        assert_eq!(back.elementary(v(1, 0), 0), 1);
    }
}
