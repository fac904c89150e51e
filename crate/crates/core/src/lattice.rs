//! Exact two-dimensional lattice geometry: integer vectors, smooth complete
//! fans, cone coordinates, the fan norm and stellar refinement.
//!
//! Ray indices are zero-based throughout the crate. A [`Fan`] always stores
//! its rays counterclockwise, starting from the ray of smallest polar angle
//! measured from the positive `x` axis, so two fans with the same rays compare
//! equal structurally.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A vector of the cocharacter lattice `M = Z^2`.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticeVector {
    pub x: i64,
    pub y: i64,
}

impl From<[i64; 2]> for LatticeVector {
    fn from([x, y]: [i64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<LatticeVector> for [i64; 2] {
    fn from(v: LatticeVector) -> Self {
        [v.x, v.y]
    }
}

impl From<(i64, i64)> for LatticeVector {
    fn from((x, y): (i64, i64)) -> Self {
        Self { x, y }
    }
}

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// `u.x * v.y - u.y * v.x`.
    pub fn det(self, other: LatticeVector) -> i64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: LatticeVector) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Lattice index of the vector, `gcd(|x|, |y|)`; zero for the zero vector.
    pub fn index(self) -> i64 {
        self.x.gcd(&self.y)
    }

    pub fn is_primitive(self) -> bool {
        self.index() == 1
    }

    /// The primitive vector pointing in the same direction, or `None` for zero.
    pub fn primitive(self) -> Option<LatticeVector> {
        let g = self.index();
        (g != 0).then(|| LatticeVector::new(self.x / g, self.y / g))
    }

    /// True when `self` and `other` are nonzero and positively proportional.
    pub fn same_direction(self, other: LatticeVector) -> bool {
        !self.is_zero() && !other.is_zero() && self.det(other) == 0 && self.dot(other) > 0
    }

    /// True when `self` and `other` are nonzero and span the same line.
    pub fn parallel(self, other: LatticeVector) -> bool {
        !self.is_zero() && !other.is_zero() && self.det(other) == 0
    }

    /// If `self` is a positive integer multiple of `base`, the multiple.
    pub fn multiple_of(self, base: LatticeVector) -> Option<i64> {
        if !self.same_direction(base) {
            return None;
        }
        let num = self.dot(base);
        let den = base.dot(base);
        (num % den == 0).then_some(num / den)
    }

    fn half_plane(self) -> u8 {
        if self.y > 0 || (self.y == 0 && self.x > 0) {
            0
        } else {
            1
        }
    }

    /// Compares polar angles in `[0, 2pi)` measured from the positive `x` axis.
    /// Zero vectors sort first. Vectors on the same ray compare equal.
    pub fn angle_cmp(self, other: LatticeVector) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.half_plane()
            .cmp(&other.half_plane())
            .then_with(|| 0.cmp(&self.det(other)))
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, o: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for LatticeVector {
    fn add_assign(&mut self, o: LatticeVector) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, o: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector::new(-self.x, -self.y)
    }
}

impl Mul<LatticeVector> for i64 {
    type Output = LatticeVector;
    fn mul(self, v: LatticeVector) -> LatticeVector {
        LatticeVector::new(self * v.x, self * v.y)
    }
}

impl std::iter::Sum for LatticeVector {
    fn sum<I: Iterator<Item = LatticeVector>>(iter: I) -> Self {
        iter.fold(LatticeVector::ZERO, |a, b| a + b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("ray {0} is not a primitive lattice vector")]
    NotPrimitive(usize),
    #[error("rays {0} and its successor do not span a unimodular cone (det = {1})")]
    NotSmooth(usize, i64),
    #[error("rays do not wind exactly once around the origin")]
    NotComplete,
    #[error("a complete fan needs at least three rays, got {0}")]
    TooFewRays(usize),
    #[error("{0} is already a ray of the fan")]
    AlreadyRay(LatticeVector),
    #[error("refinement direction {0} is not primitive")]
    DirectionNotPrimitive(LatticeVector),
    #[error("zero vector has no cone")]
    ZeroVector,
}

/// A smooth complete two-dimensional fan, rays in counterclockwise order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Fan {
    rays: Vec<LatticeVector>,
}

/// Coordinates of a vector in the smooth cone spanned by rays `cone` and
/// `cone + 1` (cyclically): `v = a * u_cone + b * u_{cone+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeCoordinates {
    pub cone: usize,
    pub a: i64,
    pub b: i64,
}

/// Result of [`refine_fan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub fan: Fan,
    /// Inserted rays, the requested direction first.
    pub inserted: Vec<LatticeVector>,
    /// Index of the requested direction in the refined fan.
    pub new_ray_index: usize,
}

/// Validates a list of rays as a smooth complete fan and normalizes its
/// rotation. See [`validate_fan_with_offset`] for the rotation applied.
pub fn validate_fan(rays: &[LatticeVector]) -> Result<Fan, FanError> {
    validate_fan_with_offset(rays).map(|(fan, _)| fan)
}

/// Like [`validate_fan`], also returning the offset `k` such that
/// `fan.rays()[i] == rays[(i + k) % m]`. Callers holding per-ray data use the
/// offset to rotate it alongside.
pub fn validate_fan_with_offset(rays: &[LatticeVector]) -> Result<(Fan, usize), FanError> {
    let m = rays.len();
    if m < 3 {
        return Err(FanError::TooFewRays(m));
    }
    if let Some(i) = rays.iter().position(|r| !r.is_primitive()) {
        return Err(FanError::NotPrimitive(i));
    }
    for i in 0..m {
        let d = rays[i].det(rays[(i + 1) % m]);
        if d != 1 {
            return Err(FanError::NotSmooth(i, d));
        }
    }
    // Every step turns by an angle in (0, pi); count wraps across the
    // positive x axis to get the winding number.
    let wraps = (0..m)
        .filter(|&i| rays[i].half_plane() == 1 && rays[(i + 1) % m].half_plane() == 0)
        .count();
    if wraps != 1 {
        return Err(FanError::NotComplete);
    }
    let offset = (0..m)
        .min_by(|&i, &j| rays[i].angle_cmp(rays[j]))
        .expect("nonempty");
    let rotated = (0..m).map(|i| rays[(i + offset) % m]).collect();
    Ok((Fan { rays: rotated }, offset))
}

impl Fan {
    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn ray(&self, i: usize) -> LatticeVector {
        self.rays[i % self.rays.len()]
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.rays.len()
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.rays.len() - 1) % self.rays.len()
    }

    /// Index of the ray containing `v` (any positive multiple of a ray).
    pub fn ray_index(&self, v: LatticeVector) -> Option<usize> {
        self.rays.iter().position(|&u| u.same_direction(v))
    }

    /// Ray index and multiple when `v` is a positive multiple of a ray.
    pub fn ray_multiple(&self, v: LatticeVector) -> Option<(usize, i64)> {
        let i = self.ray_index(v)?;
        v.multiple_of(self.rays[i]).map(|k| (i, k))
    }

    /// `u_{i-1} + u_{i+1} = k u_i`; returns `k`.
    pub fn neighbour_sum_factor(&self, i: usize) -> i64 {
        let s = self.ray(self.prev(i)) + self.ray(self.next(i));
        let u = self.ray(i);
        debug_assert_eq!(s.det(u), 0);
        s.dot(u) / u.dot(u)
    }
}

/// Coordinates of `v` in the unique cone containing it. A vector on ray `i`
/// reports cone `i` with `b = 0`.
pub fn cone_coordinates(fan: &Fan, v: LatticeVector) -> Result<ConeCoordinates, FanError> {
    if v.is_zero() {
        return Err(FanError::ZeroVector);
    }
    for i in 0..fan.len() {
        let (u, w) = (fan.ray(i), fan.ray(fan.next(i)));
        let a = v.det(w);
        let b = u.det(v);
        if a > 0 && b >= 0 {
            return Ok(ConeCoordinates { cone: i, a, b });
        }
    }
    unreachable!("a complete fan covers every nonzero vector")
}

/// Sum of the cone coordinates of `v`; zero for the zero vector.
pub fn norm(fan: &Fan, v: LatticeVector) -> i64 {
    match cone_coordinates(fan, v) {
        Ok(c) => c.a + c.b,
        Err(_) => 0,
    }
}

/// Inserts the primitive direction `d` and subdivides until every
/// consecutive pair of rays is unimodular again.
pub fn refine_fan(fan: &Fan, d: LatticeVector) -> Result<Refinement, FanError> {
    if d.is_zero() {
        return Err(FanError::ZeroVector);
    }
    if !d.is_primitive() {
        return Err(FanError::DirectionNotPrimitive(d));
    }
    if fan.ray_index(d).is_some() {
        return Err(FanError::AlreadyRay(d));
    }
    let c = cone_coordinates(fan, d)?;
    let mut rays = fan.rays.clone();
    rays.insert(c.cone + 1, d);
    let mut inserted = vec![d];
    loop {
        let m = rays.len();
        let Some(i) = (0..m).find(|&i| rays[i].det(rays[(i + 1) % m]) > 1) else {
            break;
        };
        let p = parallelogram_point(rays[i], rays[(i + 1) % m]);
        rays.insert(i + 1, p);
        inserted.push(p);
    }
    let refined =
        validate_fan(&rays).expect("stellar subdivision keeps the fan smooth and complete");
    let new_ray_index = refined.ray_index(d).expect("inserted");
    Ok(Refinement {
        fan: refined,
        inserted,
        new_ray_index,
    })
}

/// Nonzero lattice point `(s a + r b) / k` of the half-open parallelogram of
/// the cone `(a, b)` with `k = det(a, b) > 1`, minimizing `s + r`.
fn parallelogram_point(a: LatticeVector, b: LatticeVector) -> LatticeVector {
    let k = a.det(b);
    let mut best: Option<(i64, i64)> = None;
    for s in 1..k {
        for r in 1..k {
            let x = s * a.x + r * b.x;
            let y = s * a.y + r * b.y;
            if x % k == 0 && y % k == 0 && best.is_none_or(|(bs, br)| (s + r, s) < (bs + br, bs)) {
                best = Some((s, r));
            }
        }
    }
    let (s, r) = best.expect("a non-unimodular cone has interior lattice points");
    LatticeVector::new((s * a.x + r * b.x) / k, (s * a.y + r * b.y) / k)
}
