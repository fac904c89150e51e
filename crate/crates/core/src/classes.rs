//! Curve classes on the blown-up surface, `N_1(Y) = N_1(Y_t) + Z^E`, and
//! their intersection numbers with boundary and exceptional divisors.
//!
//! The toric part is kept in the divisor presentation `Z^m / {(<e, u_i>)_i}`.
//! Because rays `0` and `1` form a lattice basis, every class has a unique
//! representative whose first two coordinates vanish; that representative is
//! the canonical form and equality of classes is equality of fields.
//!
//! A class is written `pi^* gamma + sum c_ij [E_ij]`. Then
//! `beta . E_ij = -c_ij` and `beta . D_i = gamma . D_{t,i} + sum_j c_ij`.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{cone_coordinates, Fan, LatticeVector};
use crate::model::{ModelRefinement, ToricModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("class or profile does not match the model's divisor index sets")]
    ModelMismatch,
    #[error("profile is not the intersection profile of any curve class")]
    NonRepresentable,
    #[error("ray index {0} out of range")]
    RayIndexOutOfRange(usize),
    #[error("leg {0} is not a positive multiple of a fan ray")]
    NotRayDirection(LatticeVector),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveClass {
    toric: Vec<i64>,
    exc: Vec<Vec<i64>>,
}

/// Intersection numbers of a class with every `D_i` and every `E_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntersectionProfile {
    #[serde(rename = "dD")]
    pub d_d: Vec<i64>,
    #[serde(rename = "dE")]
    pub d_e: Vec<Vec<i64>>,
}

impl IntersectionProfile {
    pub fn zero(model: &ToricModel) -> Self {
        Self {
            d_d: vec![0; model.num_rays()],
            d_e: model.blowups().iter().map(|&l| vec![0; l]).collect(),
        }
    }

    pub fn matches(&self, model: &ToricModel) -> bool {
        self.d_d.len() == model.num_rays()
            && self.d_e.len() == model.num_rays()
            && self
                .d_e
                .iter()
                .zip(model.blowups())
                .all(|(row, &l)| row.len() == l)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            d_d: self
                .d_d
                .iter()
                .zip(&other.d_d)
                .map(|(a, b)| a + b)
                .collect(),
            d_e: self
                .d_e
                .iter()
                .zip(&other.d_e)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Self {
        Self {
            d_d: self.d_d.iter().map(|a| k * a).collect(),
            d_e: self
                .d_e
                .iter()
                .map(|r| r.iter().map(|a| k * a).collect())
                .collect(),
        }
    }
}

impl fmt::Display for IntersectionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dD={:?} dE={:?}", self.d_d, self.d_e)
    }
}

fn canonical_toric(fan: &Fan, mut a: Vec<i64>) -> Vec<i64> {
    let (u0, u1) = (fan.ray(0), fan.ray(1));
    // Solve <e, u0> = a0, <e, u1> = a1; the matrix has determinant one.
    let ex = u1.y * a[0] - u0.y * a[1];
    let ey = -u1.x * a[0] + u0.x * a[1];
    let e = LatticeVector::new(ex, ey);
    for (ai, u) in a.iter_mut().zip(fan.rays()) {
        *ai -= e.dot(*u);
    }
    a
}

impl CurveClass {
    pub fn zero(model: &ToricModel) -> Self {
        Self {
            toric: vec![0; model.num_rays()],
            exc: model.blowups().iter().map(|&l| vec![0; l]).collect(),
        }
    }

    /// Builds a class from an arbitrary toric divisor-presentation vector and
    /// exceptional coefficients `c_ij`.
    pub fn from_parts(
        model: &ToricModel,
        toric: Vec<i64>,
        exc: Vec<Vec<i64>>,
    ) -> Result<Self, ClassError> {
        let shape_ok = toric.len() == model.num_rays()
            && exc.len() == model.num_rays()
            && exc.iter().zip(model.blowups()).all(|(r, &l)| r.len() == l);
        if !shape_ok {
            return Err(ClassError::ModelMismatch);
        }
        Ok(Self {
            toric: canonical_toric(model.fan(), toric),
            exc,
        })
    }

    /// `pi^* [D_{t,i}]`.
    pub fn toric_divisor(model: &ToricModel, i: usize) -> Self {
        let mut t = vec![0; model.num_rays()];
        t[i] = 1;
        Self::from_parts(model, t, Self::zero(model).exc).expect("shape")
    }

    /// `[E_ij]`.
    pub fn exceptional(model: &ToricModel, i: usize, j: usize) -> Self {
        let mut c = Self::zero(model);
        c.exc[i][j] = 1;
        c
    }

    /// Strict transform `[D_i] = pi^*[D_{t,i}] - sum_j [E_ij]`.
    pub fn boundary_divisor(model: &ToricModel, i: usize) -> Self {
        let mut c = Self::toric_divisor(model, i);
        for e in &mut c.exc[i] {
            *e = -1;
        }
        c
    }

    pub fn toric(&self) -> &[i64] {
        &self.toric
    }

    pub fn exceptional_coefficients(&self) -> &[Vec<i64>] {
        &self.exc
    }

    pub fn is_zero(&self) -> bool {
        self.toric.iter().all(|&a| a == 0) && self.exc.iter().flatten().all(|&c| c == 0)
    }

    pub fn has_zero_exceptional_part(&self) -> bool {
        self.exc.iter().flatten().all(|&c| c == 0)
    }

    /// The toric part `pi^* gamma` alone.
    pub fn toric_part(&self) -> Self {
        Self {
            toric: self.toric.clone(),
            exc: self.exc.iter().map(|r| vec![0; r.len()]).collect(),
        }
    }

    pub fn scale(&self, k: i64) -> Self {
        Self {
            toric: self.toric.iter().map(|a| k * a).collect(),
            exc: self
                .exc
                .iter()
                .map(|r| r.iter().map(|a| k * a).collect())
                .collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Self {
        assert_eq!(
            self.toric.len(),
            other.toric.len(),
            "classes over different models"
        );
        Self {
            toric: self
                .toric
                .iter()
                .zip(&other.toric)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            exc: self
                .exc
                .iter()
                .zip(&other.exc)
                .map(|(r, s)| r.iter().zip(s).map(|(&a, &b)| f(a, b)).collect())
                .collect(),
        }
    }
}

impl std::ops::Add for &CurveClass {
    type Output = CurveClass;
    fn add(self, o: &CurveClass) -> CurveClass {
        self.zip_with(o, |a, b| a + b)
    }
}

impl std::ops::Sub for &CurveClass {
    type Output = CurveClass;
    fn sub(self, o: &CurveClass) -> CurveClass {
        self.zip_with(o, |a, b| a - b)
    }
}

impl std::ops::Neg for &CurveClass {
    type Output = CurveClass;
    fn neg(self) -> CurveClass {
        self.scale(-1)
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "toric{:?}", self.toric)?;
        for (i, row) in self.exc.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    write!(f, " {:+}E[{},{}]", c, i, j)?;
                }
            }
        }
        Ok(())
    }
}

/// Intersection matrix of the toric boundary divisors `D_{t,i}`.
#[allow(clippy::needless_range_loop)]
pub fn toric_intersection_matrix(fan: &Fan) -> Vec<Vec<i64>> {
    let m = fan.len();
    let mut mat = vec![vec![0; m]; m];
    for i in 0..m {
        let j = fan.next(i);
        mat[i][j] = 1;
        mat[j][i] = 1;
        mat[i][i] = -fan.neighbour_sum_factor(i);
    }
    mat
}

fn toric_pairing(mat: &[Vec<i64>], a: &[i64]) -> Vec<i64> {
    (0..mat.len())
        .map(|j| a.iter().enumerate().map(|(i, &ai)| ai * mat[i][j]).sum())
        .collect()
}

pub fn intersect(model: &ToricModel, beta: &CurveClass) -> Result<IntersectionProfile, ClassError> {
    if beta.toric.len() != model.num_rays()
        || beta.exc.len() != model.num_rays()
        || beta
            .exc
            .iter()
            .zip(model.blowups())
            .any(|(r, &l)| r.len() != l)
    {
        return Err(ClassError::ModelMismatch);
    }
    let mat = toric_intersection_matrix(model.fan());
    let mut d_d = toric_pairing(&mat, &beta.toric);
    for (d, row) in d_d.iter_mut().zip(&beta.exc) {
        *d += row.iter().sum::<i64>();
    }
    let d_e = beta
        .exc
        .iter()
        .map(|r| r.iter().map(|c| -c).collect())
        .collect();
    Ok(IntersectionProfile { d_d, d_e })
}

/// Intersection pairing `alpha . beta` on `Y`.
pub fn pair(model: &ToricModel, alpha: &CurveClass, beta: &CurveClass) -> Result<i64, ClassError> {
    let mat = toric_intersection_matrix(model.fan());
    let toric: i64 = toric_pairing(&mat, &alpha.toric)
        .iter()
        .zip(&beta.toric)
        .map(|(a, b)| a * b)
        .sum();
    let exc: i64 = alpha
        .exc
        .iter()
        .flatten()
        .zip(beta.exc.iter().flatten())
        .map(|(a, b)| a * b)
        .sum();
    if alpha.toric.len() != model.num_rays() || beta.toric.len() != model.num_rays() {
        return Err(ClassError::ModelMismatch);
    }
    Ok(toric - exc)
}

/// The unique class with the given profile.
pub fn class_from_profile(
    model: &ToricModel,
    profile: &IntersectionProfile,
) -> Result<CurveClass, ClassError> {
    if !profile.matches(model) {
        return Err(ClassError::ModelMismatch);
    }
    let fan = model.fan();
    let m = fan.len();
    let exc: Vec<Vec<i64>> = profile
        .d_e
        .iter()
        .map(|r| r.iter().map(|d| -d).collect())
        .collect();
    let target: Vec<i64> = (0..m)
        .map(|i| profile.d_d[i] + profile.d_e[i].iter().sum::<i64>())
        .collect();
    // The image of the toric pairing is exactly the balanced vectors.
    let balance: LatticeVector = fan.rays().iter().zip(&target).map(|(&u, &t)| t * u).sum();
    if !balance.is_zero() {
        return Err(ClassError::NonRepresentable);
    }
    let mat = toric_intersection_matrix(fan);
    let unknowns = m - 2;
    // Rows: equations j; columns: a_2 .. a_{m-1}, then the right-hand side.
    let mut rows: Vec<Vec<Ratio<i128>>> = (0..m)
        .map(|j| {
            let mut row: Vec<Ratio<i128>> = (2..m)
                .map(|i| Ratio::from_integer(mat[i][j] as i128))
                .collect();
            row.push(Ratio::from_integer(target[j] as i128));
            row
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..unknowns {
        let Some(p) = (r..m).find(|&k| !rows[k][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Ratio::one() / rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= inv;
        }
        let pivot = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && !row[c].is_zero() {
                let f = row[c];
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= f * p;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[unknowns].is_zero()) {
        return Err(ClassError::NonRepresentable);
    }
    let mut toric = vec![0i64; m];
    for (k, &c) in pivot_cols.iter().enumerate() {
        let val = rows[k][unknowns];
        if !val.is_integer() {
            return Err(ClassError::NonRepresentable);
        }
        toric[c + 2] = *val.numer() as i64;
    }
    let beta = CurveClass::from_parts(model, toric, exc)?;
    if intersect(model, &beta)? != *profile {
        return Err(ClassError::NonRepresentable);
    }
    Ok(beta)
}

/// `dD(i)` is the total multiplicity of boundary legs on ray `i`.
pub fn compatibility_intersections(
    model: &ToricModel,
    legs: &[(usize, i64)],
) -> Result<Vec<i64>, ClassError> {
    let mut d = vec![0; model.num_rays()];
    for &(i, mult) in legs {
        *d.get_mut(i).ok_or(ClassError::RayIndexOutOfRange(i))? += mult;
    }
    Ok(d)
}

/// Compatibility intersections for legs given by their weight vectors.
pub fn compatibility_from_weights(
    model: &ToricModel,
    weights: &[LatticeVector],
) -> Result<Vec<i64>, ClassError> {
    let legs = weights
        .iter()
        .map(|&w| {
            model
                .fan()
                .ray_multiple(w)
                .ok_or(ClassError::NotRayDirection(w))
        })
        .collect::<Result<Vec<_>, _>>()?;
    compatibility_intersections(model, &legs)
}

/// Pulls a class back along a toric blowup. Intersection numbers with every
/// surviving divisor are preserved; the new boundary divisors meet the
/// pulled-back class trivially.
pub fn translate_class(
    old: &ToricModel,
    refinement: &ModelRefinement,
    beta: &CurveClass,
) -> Result<CurveClass, ClassError> {
    pullback_class(old, &refinement.model, beta)
}

/// Pulls a class back from `old` to a model `new` whose fan refines the old
/// fan and whose blowups sit on the old rays.
pub fn pullback_class(
    old: &ToricModel,
    new: &ToricModel,
    beta: &CurveClass,
) -> Result<CurveClass, ClassError> {
    if beta.toric.len() != old.num_rays() {
        return Err(ClassError::ModelMismatch);
    }
    let ray_map = refinement_ray_map(old, new)?;
    let old_fan = old.fan();
    let toric = new
        .fan()
        .rays()
        .iter()
        .map(|&u| match old_fan.ray_index(u) {
            Some(i) => beta.toric[i],
            None => {
                let c = cone_coordinates(old_fan, u).expect("nonzero");
                c.a * beta.toric[c.cone] + c.b * beta.toric[old_fan.next(c.cone)]
            }
        })
        .collect();
    let mut exc: Vec<Vec<i64>> = new.blowups().iter().map(|&l| vec![0; l]).collect();
    for (i, &k) in ray_map.iter().enumerate() {
        exc[k] = beta.exc[i].clone();
    }
    CurveClass::from_parts(new, toric, exc)
}

/// Extends a profile over `old` to the refined model `new` by zero on the
/// inserted rays.
pub fn lift_profile(
    old: &ToricModel,
    new: &ToricModel,
    profile: &IntersectionProfile,
) -> Result<IntersectionProfile, ClassError> {
    if !profile.matches(old) {
        return Err(ClassError::ModelMismatch);
    }
    let ray_map = refinement_ray_map(old, new)?;
    let mut lifted = IntersectionProfile::zero(new);
    for (i, &k) in ray_map.iter().enumerate() {
        lifted.d_d[k] = profile.d_d[i];
        lifted.d_e[k] = profile.d_e[i].clone();
    }
    Ok(lifted)
}

fn refinement_ray_map(old: &ToricModel, new: &ToricModel) -> Result<Vec<usize>, ClassError> {
    let map = old
        .fan()
        .rays()
        .iter()
        .map(|&u| new.fan().ray_index(u).ok_or(ClassError::ModelMismatch))
        .collect::<Result<Vec<_>, _>>()?;
    let blowups_agree = map
        .iter()
        .enumerate()
        .all(|(i, &k)| old.blowups_on(i) == new.blowups_on(k))
        && old.total_exceptional() == new.total_exceptional();
    if blowups_agree {
        Ok(map)
    } else {
        Err(ClassError::ModelMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::validate_fan;
    use crate::model::{build_model, refine_model};

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

    fn profile(d_d: Vec<i64>, d_e: Vec<Vec<i64>>) -> IntersectionProfile {
        IntersectionProfile { d_d, d_e }
    }

    #[test]
    fn intersection_matrices() {
        let p2 = validate_fan(&[v(1, 0), v(0, 1), v(-1, -1)]).unwrap();
        assert_eq!(toric_intersection_matrix(&p2), vec![vec![1; 3]; 3]);
        let square = validate_fan(&[v(1, 0), v(0, 1), v(-1, 0), v(0, -1)]).unwrap();
        let m = toric_intersection_matrix(&square);
        assert_eq!(m[0], vec![0, 1, 0, 1]);
        assert_eq!(m[1], vec![1, 0, 1, 0]);
        let f1 = validate_fan(&[v(1, 0), v(1, 1), v(0, 1), v(-1, -1)]).unwrap();
        assert_eq!(toric_intersection_matrix(&f1)[1][1], -1);
    }

    #[test]
    fn intersect_examples() {
        let m = cubic();
        let h = CurveClass::toric_divisor(&m, 0);
        let beta = &h - &CurveClass::exceptional(&m, 2, 0);
        let p = intersect(&m, &beta).unwrap();
        assert_eq!(
            p,
            profile(vec![1, 1, 0], vec![vec![0, 0], vec![0, 0], vec![1, 0]])
        );

        let e11 = CurveClass::exceptional(&m, 0, 0);
        assert_eq!(
            intersect(&m, &e11).unwrap(),
            profile(vec![1, 0, 0], vec![vec![-1, 0], vec![0, 0], vec![0, 0]])
        );
        assert_eq!(
            intersect(&m, &CurveClass::zero(&m)).unwrap(),
            IntersectionProfile::zero(&m)
        );
    }

    #[test]
    fn all_lines_are_equal_in_p2() {
        let m = cubic();
        assert_eq!(
            CurveClass::toric_divisor(&m, 0),
            CurveClass::toric_divisor(&m, 2)
        );
    }

    #[test]
    fn class_from_profile_examples() {
        let m = cubic();
        let p = profile(vec![1, 1, 0], vec![vec![0, 0], vec![0, 0], vec![1, 0]]);
        let beta = class_from_profile(&m, &p).unwrap();
        assert_eq!(
            beta,
            &CurveClass::toric_divisor(&m, 1) - &CurveClass::exceptional(&m, 2, 0)
        );
        assert!(class_from_profile(&m, &IntersectionProfile::zero(&m))
            .unwrap()
            .is_zero());
        let bad = profile(vec![1, 0, 0], vec![vec![0, 0]; 3]);
        assert_eq!(
            class_from_profile(&m, &bad),
            Err(ClassError::NonRepresentable)
        );
        let wrong_shape = profile(vec![1, 0], vec![vec![0, 0]; 3]);
        assert_eq!(
            class_from_profile(&m, &wrong_shape),
            Err(ClassError::ModelMismatch)
        );
    }

    #[test]
    fn compatibility_examples() {
        let m = cubic();
        assert_eq!(
            compatibility_intersections(&m, &[(0, 1), (1, 1)]).unwrap(),
            vec![1, 1, 0]
        );
        assert_eq!(compatibility_intersections(&m, &[]).unwrap(), vec![0, 0, 0]);
        assert_eq!(
            compatibility_intersections(&m, &[(2, 2)]).unwrap(),
            vec![0, 0, 2]
        );
        assert_eq!(
            compatibility_intersections(&m, &[(3, 1)]),
            Err(ClassError::RayIndexOutOfRange(3))
        );
        assert_eq!(
            compatibility_from_weights(&m, &[v(2, 0), v(0, 1)]).unwrap(),
            vec![2, 1, 0]
        );
    }

    #[test]
    fn pairing_matches_profiles_on_divisors() {
        let m = cubic();
        let beta = &CurveClass::toric_divisor(&m, 0).scale(2) - &CurveClass::exceptional(&m, 1, 1);
        let p = intersect(&m, &beta).unwrap();
        for i in 0..3 {
            assert_eq!(
                pair(&m, &beta, &CurveClass::boundary_divisor(&m, i)).unwrap(),
                p.d_d[i]
            );
            for j in 0..2 {
                assert_eq!(
                    pair(&m, &beta, &CurveClass::exceptional(&m, i, j)).unwrap(),
                    p.d_e[i][j]
                );
            }
        }
    }

    #[test]
    fn pullback_preserves_intersections() {
        let m = cubic();
        let beta = &CurveClass::toric_divisor(&m, 0).scale(3) - &CurveClass::exceptional(&m, 2, 1);
        let r = refine_model(&m, v(2, 1)).unwrap();
        let lifted = translate_class(&m, &r, &beta).unwrap();
        let before = intersect(&m, &beta).unwrap();
        let after = intersect(&r.model, &lifted).unwrap();
        for (i, &k) in r.ray_map.iter().enumerate() {
            assert_eq!(before.d_d[i], after.d_d[k]);
            assert_eq!(before.d_e[i], after.d_e[k]);
        }
        for u in &r.inserted {
            let k = r.model.fan().ray_index(*u).unwrap();
            assert_eq!(after.d_d[k], 0);
        }
    }
}
