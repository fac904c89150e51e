//! The tropical families `L_k`, `M_k`, `N_k` that remove the twig legs of a
//! primitive cylinder one at a time, their extension classes, and a numeric
//! replay of the induction.
//!
//! Family counts use the engine semantics of [`crate::counting`]:
//!
//! * `N(L_k, γ)` sums `Π_{s≥k} T(w_s, j_s)` over the choices `(j_s)_{s≥k}`
//!   with `γ = Λ_k(J)`, where `Λ_k(J)` meets `D` as the spine legs plus the
//!   converted leaves `s < k` and meets exactly the chosen `E_{i(s) j_s}` once;
//! * `N(M_k, γ)` is 1 exactly at `γ = δ̂_k`;
//! * `N(N_k, γ)` is the elementary count of leaf `k` at `γ - δ̂_k`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::classes::{
    class_from_profile, compatibility_from_weights, intersect, ClassError, CurveClass,
    IntersectionProfile,
};
use crate::counting::{
    choices, count_primitive_cylinder, elementary_class, elementary_count, splitting_sum,
    ClassKind, CountError, ElementaryCounts,
};
use crate::lattice::LatticeVector;
use crate::tropical::{
    classify, extend_spine, extension_class, tropical_line, Classification, CylinderError,
    ExtendError, LeafEnd, LeafPlan, LegKind, Length, LineError, MappedTree, Point,
    PrimitiveCylinder, TreePlan, TropicalLine, Violation, Q,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeformationError {
    #[error("anchor parameter {param} on leaf {leaf} is out of order")]
    AnchorOrderViolation { leaf: usize, param: Q },
    #[error("generic point {0} lies on a wall")]
    AnchorOnWall(Point),
    #[error("not a primitive cylinder: {0}")]
    NotPrimitive(CylinderError),
    #[error("family {tag} is not a valid tropical curve: {violations:?}")]
    FamilyInvalid {
        tag: FamilyTag,
        violations: Vec<Violation>,
    },
    #[error("identity `{identity}` fails at k = {k}: {lhs} != {rhs}")]
    IdentityViolation {
        k: usize,
        identity: &'static str,
        lhs: u64,
        rhs: u64,
    },
    #[error("endpoint check failed: {0}")]
    EndpointMismatch(&'static str),
    #[error(transparent)]
    Cylinder(CylinderError),
    #[error(transparent)]
    Line(#[from] LineError),
    #[error(transparent)]
    Extend(#[from] ExtendError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Class(#[from] ClassError),
}

impl From<CylinderError> for DeformationError {
    fn from(e: CylinderError) -> Self {
        match e {
            CylinderError::AnchorOrderViolation { leaf, param } => {
                DeformationError::AnchorOrderViolation { leaf, param }
            }
            CylinderError::InteriorOnWall(p) => DeformationError::AnchorOnWall(p),
            e if e.is_not_primitive() => DeformationError::NotPrimitive(e),
            e => DeformationError::Cylinder(e),
        }
    }
}

impl DeformationError {
    pub fn is_identity_violation(&self) -> bool {
        matches!(
            self,
            DeformationError::IdentityViolation { .. } | DeformationError::EndpointMismatch(_)
        )
    }
}

/// Positions of the marked points, as parameters along the leaf directions
/// and along `p1` from the bending vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchors {
    pub g: Q,
    pub t: Q,
    pub interior: Option<Q>,
    pub interior_prime: Option<Q>,
}

impl Default for Anchors {
    fn default() -> Self {
        Self {
            g: Q::from_integer(1),
            t: Q::from_integer(2),
            interior: None,
            interior_prime: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FamilyTag {
    L(usize),
    M(usize),
    N(usize),
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::L(k) => write!(f, "L_{k}"),
            FamilyTag::M(k) => write!(f, "M_{k}"),
            FamilyTag::N(k) => write!(f, "N_{k}"),
        }
    }
}

impl FromStr for FamilyTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("unknown family tag `{s}` (expected L_k, M_k or N_k)");
        let mut chars = s.chars();
        let head = chars.next().ok_or_else(bad)?;
        let rest = chars.as_str().trim_start_matches('_');
        let k: usize = rest.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        match head {
            'L' => Ok(FamilyTag::L(k)),
            'M' => Ok(FamilyTag::M(k)),
            'N' => Ok(FamilyTag::N(k)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FamilyCurve {
    pub tag: FamilyTag,
    pub tree: MappedTree,
    pub classification: Classification,
}

/// Interior (`I`) and boundary (`B`) leg labels of the families and of the
/// glued curves `T_k^g`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IndexSets {
    pub j_l: BTreeSet<String>,
    /// `B_k^L` for `k = 1..=t+1`.
    pub b_l: Vec<BTreeSet<String>>,
    pub i_l: Vec<BTreeSet<String>>,
    pub j_m: BTreeSet<String>,
    pub b_m: BTreeSet<String>,
    pub i_m: BTreeSet<String>,
    pub j_n: BTreeSet<String>,
    pub j_g: BTreeSet<String>,
    /// `B_k^g` for `k = 1..=t`.
    pub b_g: Vec<BTreeSet<String>>,
    pub i_g: Vec<BTreeSet<String>>,
}

pub const GLUED_LABEL: &str = "g'";

pub fn g_label(s: usize) -> String {
    format!("g^{s}")
}

pub fn t_label(s: usize) -> String {
    format!("t^{s}")
}

fn prime_labels() -> [String; 3] {
    ["1'".into(), "2'".into(), "w'".into()]
}

fn split_legs(tree: &MappedTree) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut interior = BTreeSet::new();
    let mut boundary = BTreeSet::new();
    for leg in tree.legs() {
        if leg.kind == LegKind::Interior {
            interior.insert(leg.label.clone());
        } else {
            boundary.insert(leg.label.clone());
        }
    }
    (interior, boundary)
}

#[derive(Clone, Debug)]
pub struct DeformationData {
    pub cylinder: PrimitiveCylinder,
    /// Elementary cylinder of each leaf, carrying the primed interior point.
    pub elementary: Vec<PrimitiveCylinder>,
    pub anchors: Anchors,
    /// `(H_k^g, H_k^t)` for every leaf.
    pub lines: Vec<(TropicalLine, TropicalLine)>,
    pub l: Vec<FamilyCurve>,
    pub m: Vec<FamilyCurve>,
    pub n: Vec<FamilyCurve>,
    pub index_sets: IndexSets,
    pub ledger: ExtensionLedger,
    /// `(J, Λ_k(J))` for every choice on the leaves `k..=t`, indexed by `k - 1`.
    pub lambdas: Vec<Vec<(Vec<usize>, CurveClass)>>,
}

impl DeformationData {
    pub fn t(&self) -> usize {
        self.cylinder.t()
    }

    pub fn family(&self, tag: FamilyTag) -> Option<&FamilyCurve> {
        match tag {
            FamilyTag::L(k) => self.l.get(k.checked_sub(1)?),
            FamilyTag::M(k) => self.m.get(k.checked_sub(1)?),
            FamilyTag::N(k) => self.n.get(k.checked_sub(1)?),
        }
    }

    pub fn families(&self) -> impl Iterator<Item = &FamilyCurve> {
        self.l.iter().chain(&self.m).chain(&self.n)
    }
}

fn l_plan(
    t: usize,
    k: usize,
    anchors: &Anchors,
    extended: bool,
    truncate_at: Option<Q>,
) -> TreePlan {
    let mut plan = TreePlan::standard(extended, t);
    for (idx, leaf) in plan.leaves.iter_mut().enumerate() {
        let s = idx + 1;
        *leaf = if s < k {
            LeafPlan {
                g_mark: Some((g_label(s), anchors.g)),
                t_mark: None,
                end: match truncate_at {
                    Some(q) => LeafEnd::Finite(t_label(s), q),
                    None => LeafEnd::Boundary(t_label(s)),
                },
            }
        } else {
            LeafPlan {
                g_mark: Some((g_label(s), anchors.g)),
                t_mark: Some((t_label(s), anchors.t)),
                end: LeafEnd::Free,
            }
        };
    }
    plan
}

fn validated(
    cyl: &PrimitiveCylinder,
    tag: FamilyTag,
    tree: MappedTree,
) -> Result<FamilyCurve, DeformationError> {
    let classification = classify(cyl.model(), cyl.walls(), &tree);
    if let Classification::Invalid(violations) = &classification {
        return Err(DeformationError::FamilyInvalid {
            tag,
            violations: violations.clone(),
        });
    }
    Ok(FamilyCurve {
        tag,
        tree,
        classification,
    })
}

/// Builds and validates every family curve of `cyl`.
pub fn build_deformation(
    cyl: &PrimitiveCylinder,
    anchors: &Anchors,
) -> Result<DeformationData, DeformationError> {
    let t = cyl.t();
    if !anchors.g.is_positive() {
        return Err(DeformationError::AnchorOrderViolation {
            leaf: 0,
            param: anchors.g,
        });
    }
    if anchors.t <= anchors.g {
        return Err(DeformationError::AnchorOrderViolation {
            leaf: 0,
            param: anchors.t,
        });
    }
    let cylinder = match anchors.interior {
        Some(q) => cyl.with_interior(q)?,
        None => cyl.clone(),
    };
    let elementary = (0..t)
        .map(|s| {
            let e = cylinder.elementary(s)?;
            match anchors.interior_prime {
                Some(q) => e.with_interior(q),
                None => Ok(e),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let lines = cylinder
        .twig_type()
        .iter()
        .map(|&w| {
            Ok((
                tropical_line(cylinder.model(), w, Point::along(w, anchors.g), None)?,
                tropical_line(cylinder.model(), w, Point::along(w, anchors.t), None)?,
            ))
        })
        .collect::<Result<Vec<_>, LineError>>()?;

    let mut l = Vec::new();
    for k in 1..=t + 1 {
        let tree = cylinder.tree_with(&l_plan(t, k, anchors, true, None))?;
        l.push(validated(&cylinder, FamilyTag::L(k), tree)?);
    }
    let mut m = Vec::new();
    let mut n = Vec::new();
    for (idx, e) in elementary.iter().enumerate() {
        let k = idx + 1;
        let m_tree = e.tree_with(&TreePlan {
            extended: false,
            labels: prime_labels(),
            leaves: vec![LeafPlan {
                g_mark: Some((GLUED_LABEL.into(), anchors.g)),
                t_mark: None,
                end: LeafEnd::Boundary("t'".into()),
            }],
        })?;
        m.push(validated(e, FamilyTag::M(k), m_tree)?);
        let n_tree = e.tree_with(&TreePlan {
            extended: true,
            labels: prime_labels(),
            leaves: vec![LeafPlan {
                g_mark: Some((GLUED_LABEL.into(), anchors.g)),
                t_mark: Some(("t'".into(), anchors.t)),
                end: LeafEnd::Free,
            }],
        })?;
        n.push(validated(e, FamilyTag::N(k), n_tree)?);
    }

    let mut sets = IndexSets::default();
    for curve in &l {
        let (i, b) = split_legs(&curve.tree);
        sets.j_l = i.union(&b).cloned().collect();
        sets.i_l.push(i);
        sets.b_l.push(b);
    }
    if let (Some(mc), Some(nc)) = (m.first(), n.first()) {
        let (i, b) = split_legs(&mc.tree);
        sets.j_m = i.union(&b).cloned().collect();
        sets.i_m = i;
        sets.b_m = b;
        let (i, b) = split_legs(&nc.tree);
        sets.j_n = i.union(&b).cloned().collect();
    }
    sets.j_g = sets
        .j_l
        .union(&sets.j_m)
        .filter(|x| *x != GLUED_LABEL)
        .cloned()
        .collect();
    for k in 0..t {
        sets.b_g
            .push(sets.b_l[k].union(&sets.b_m).cloned().collect());
        sets.i_g.push(
            sets.i_l[k]
                .union(&sets.i_m)
                .filter(|x| *x != GLUED_LABEL)
                .cloned()
                .collect(),
        );
    }

    let ledger = compute_ledger(&cylinder, &m, anchors)?;
    let lambdas = (1..=t + 1)
        .map(|k| {
            choices(cylinder.model(), &cylinder.leaf_rays()[k - 1..])
                .into_iter()
                .map(|choice| Ok((choice.clone(), lambda(&cylinder, k, &choice)?)))
                .collect::<Result<Vec<_>, DeformationError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DeformationData {
        lambdas,
        cylinder,
        elementary,
        anchors: anchors.clone(),
        lines,
        l,
        m,
        n,
        index_sets: sets,
        ledger,
    })
}

/// Extension classes of the deformation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionLedger {
    pub delta_hat_v: CurveClass,
    /// `δ̂_k` for every leaf.
    pub delta_hat: Vec<CurveClass>,
    /// `δ_s` for every converted leaf of `L_{t+1}`.
    pub delta: Vec<CurveClass>,
    /// Extension class of `L_{t+1}` with every boundary leg truncated.
    pub truncation: CurveClass,
}

impl ExtensionLedger {
    pub fn is_consistent(&self) -> bool {
        let sum = self
            .delta
            .iter()
            .fold(self.delta_hat_v.clone(), |acc, d| &acc + d);
        sum == self.truncation
    }
}

/// Recomputes every extension class of the deformation with [`extend_spine`].
pub fn extension_ledger(data: &DeformationData) -> Result<ExtensionLedger, DeformationError> {
    compute_ledger(&data.cylinder, &data.m, &data.anchors)
}

fn compute_ledger(
    cyl: &PrimitiveCylinder,
    m_curves: &[FamilyCurve],
    anchors: &Anchors,
) -> Result<ExtensionLedger, DeformationError> {
    let model = cyl.model();
    let t = cyl.t();
    let delta_hat_v = extend_spine(model, &cyl.tree(false)?, false)?.delta_hat;
    let delta_hat = m_curves
        .iter()
        .map(|m| Ok(extend_spine(model, &m.tree, false)?.delta_hat))
        .collect::<Result<Vec<_>, DeformationError>>()?;
    let cut = anchors.t + Q::from_integer(1);
    let delta = cyl
        .twig_type()
        .iter()
        .map(|&w| extension_class(model, Point::along(w, cut), w, None))
        .collect::<Result<Vec<_>, _>>()?;
    let truncated = cyl.tree_with(&l_plan(t, t + 1, anchors, false, Some(cut)))?;
    let truncation = extend_spine(model, &truncated, false)?.delta_hat;
    Ok(ExtensionLedger {
        delta_hat_v,
        delta_hat,
        delta,
        truncation,
    })
}

/// Engine-semantics counts of the families.
pub struct FamilyCounts<'a> {
    data: &'a DeformationData,
    table: &'a dyn ElementaryCounts,
    delta_hat: Vec<CurveClass>,
    /// `(Λ_k(J), Π_{s≥k} T)` for every choice, indexed by `k - 1`.
    lambdas: Vec<Vec<(CurveClass, u64)>>,
}

impl<'a> FamilyCounts<'a> {
    pub fn new(
        data: &'a DeformationData,
        table: &'a dyn ElementaryCounts,
        ledger: &ExtensionLedger,
    ) -> Result<Self, DeformationError> {
        let cyl = &data.cylinder;
        let lambdas = data
            .lambdas
            .iter()
            .enumerate()
            .map(|(idx, level)| {
                level
                    .iter()
                    .map(|(choice, class)| {
                        let weight = cyl.twig_type()[idx..]
                            .iter()
                            .zip(choice)
                            .map(|(&w, &j)| table.elementary(w, j))
                            .product::<u64>();
                        (class.clone(), weight)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            data,
            table,
            delta_hat: ledger.delta_hat.clone(),
            lambdas,
        })
    }

    fn cyl(&self) -> &PrimitiveCylinder {
        &self.data.cylinder
    }

    /// `Λ_k(J)` for a choice `J` of components on the leaves `k..=t`.
    pub fn lambda(&self, k: usize, choice: &[usize]) -> Result<CurveClass, DeformationError> {
        lambda(self.cyl(), k, choice)
    }

    pub fn l(&self, k: usize, gamma: &CurveClass) -> Result<u64, DeformationError> {
        Ok(self.lambdas[k - 1]
            .iter()
            .filter(|(c, _)| c == gamma)
            .map(|(_, w)| w)
            .sum())
    }

    pub fn m(&self, k: usize, gamma: &CurveClass) -> u64 {
        u64::from(*gamma == self.delta_hat[k - 1])
    }

    pub fn n(&self, k: usize, gamma: &CurveClass) -> Result<u64, DeformationError> {
        let cyl = self.cyl();
        let i = cyl.leaf_rays()[k - 1];
        let shifted = gamma - &self.delta_hat[k - 1];
        let mut total = 0;
        for j in 0..cyl.model().blowups_on(i) {
            total += elementary_count(self.table, cyl.model(), i, j, &shifted)?;
        }
        Ok(total)
    }

    /// Classes where `N(N_k, ·)` can be nonzero.
    pub fn n_support(&self, k: usize) -> Vec<CurveClass> {
        let cyl = self.cyl();
        let i = cyl.leaf_rays()[k - 1];
        (0..cyl.model().blowups_on(i))
            .map(|j| &self.delta_hat[k - 1] + &elementary_class(cyl.model(), i, j))
            .collect()
    }

    /// `N(L_k, γ)` unwound through the splitting formula down to `L_{t+1}`.
    pub fn telescoped(&self, k: usize, gamma: &CurveClass) -> Result<u64, DeformationError> {
        if k == self.cyl().t() + 1 {
            return self.l(k, gamma);
        }
        let mut total = 0;
        for beta2 in self.n_support(k) {
            let factor = self.n(k, &beta2)?;
            if factor == 0 {
                continue;
            }
            let next = &(gamma + &self.delta_hat[k - 1]) - &beta2;
            total += factor * self.telescoped(k + 1, &next)?;
        }
        Ok(total)
    }
}

fn lambda(
    cyl: &PrimitiveCylinder,
    k: usize,
    choice: &[usize],
) -> Result<CurveClass, DeformationError> {
    let model = cyl.model();
    let mut profile = IntersectionProfile::zero(model);
    for (i, mult) in cyl.spine_legs() {
        profile.d_d[i] += mult;
    }
    for (s, &i) in cyl.leaf_rays().iter().enumerate() {
        if s + 1 < k {
            profile.d_d[i] += 1;
        } else {
            profile.d_e[i][choice[s + 1 - k]] += 1;
        }
    }
    Ok(class_from_profile(model, &profile)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepCheck {
    pub k: usize,
    /// `N(L_k, β - δ̂_k)`.
    pub direct: u64,
    /// `Σ N(L_k, β₁) N(M_k, β₂)`.
    pub glued: u64,
    /// `Σ N(L_{k+1}, β₁) N(N_k, β₂)`.
    pub split: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    /// `N(V, β)` from the closed form.
    pub count: u64,
    /// `N(L_1, β + δ̂_V)`.
    pub initial: u64,
    pub telescoped: u64,
    /// The Theorem's right-hand side.
    pub splitting_sum: u64,
    pub steps: Vec<StepCheck>,
    pub ledger_consistent: bool,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.ledger_consistent
            && self.count == self.initial
            && self.initial == self.telescoped
            && self.telescoped == self.splitting_sum
            && self
                .steps
                .iter()
                .all(|s| s.direct == s.glued && s.glued == s.split)
    }
}

fn require(k: usize, identity: &'static str, lhs: u64, rhs: u64) -> Result<(), DeformationError> {
    if lhs == rhs {
        Ok(())
    } else {
        Err(DeformationError::IdentityViolation {
            k,
            identity,
            lhs,
            rhs,
        })
    }
}

/// Replays the induction for the infinitesimal class `β`, checking the
/// splitting identity at every class the recursion reaches.
pub fn replay_induction(
    data: &DeformationData,
    table: &dyn ElementaryCounts,
    beta: &CurveClass,
) -> Result<ReplayReport, DeformationError> {
    let cyl = &data.cylinder;
    let model = cyl.model();
    let t = cyl.t();
    let ledger = &data.ledger;
    if ledger.delta_hat_v != *cyl.delta_hat() {
        return Err(DeformationError::EndpointMismatch("extension class of V"));
    }
    if !ledger.is_consistent() {
        return Err(DeformationError::EndpointMismatch("ledger identity"));
    }
    let counts = FamilyCounts::new(data, table, ledger)?;

    let last = &data.l[t];
    let weights: Vec<LatticeVector> = last
        .tree
        .legs()
        .iter()
        .filter(|leg| leg.kind == LegKind::Boundary)
        .map(|leg| -last.tree.incidences(leg.vertex)[0].outgoing)
        .collect();
    let tau = counts.lambda(t + 1, &[])?;
    if intersect(model, &tau)?.d_d != compatibility_from_weights(model, &weights)? {
        return Err(DeformationError::EndpointMismatch(
            "terminal family compatibility",
        ));
    }

    let beta_hat = beta + cyl.delta_hat();
    let count = count_primitive_cylinder(table, cyl, beta, ClassKind::Infinitesimal)?.value;
    let initial = counts.l(1, &beta_hat)?;
    require(0, "N(V, β) = N(L_1, β + δ̂_V)", count, initial)?;

    let mut steps = Vec::new();
    let mut frontier: BTreeMap<String, CurveClass> =
        BTreeMap::from([(beta_hat.to_string(), beta_hat.clone())]);
    for k in 1..=t {
        let delta_k = &ledger.delta_hat[k - 1];
        let mut next = BTreeMap::new();
        for gamma in frontier.values() {
            let beta_k = gamma + delta_k;
            let direct = counts.l(k, gamma)?;
            let glued = counts.l(k, &(&beta_k - delta_k))? * counts.m(k, delta_k);
            let mut split = 0;
            for beta2 in counts.n_support(k) {
                let beta1 = &beta_k - &beta2;
                split += counts.l(k + 1, &beta1)? * counts.n(k, &beta2)?;
                next.insert(beta1.to_string(), beta1);
            }
            require(k, "N(L_k, β - δ̂_k) = N(T_k^g, β)", direct, glued)?;
            require(k, "N(T_k^g, β) = Σ N(L_{k+1}, β₁) N(N_k, β₂)", glued, split)?;
            steps.push(StepCheck {
                k,
                direct,
                glued,
                split,
            });
        }
        frontier = next;
    }
    for gamma in frontier.values() {
        let value = counts.l(t + 1, gamma)?;
        require(
            t + 1,
            "N(L_{t+1}, ·) is the indicator of τ_V",
            value,
            u64::from(*gamma == tau),
        )?;
    }

    let telescoped = counts.telescoped(1, &beta_hat)?;
    require(0, "N(L_1, β̂) = telescoped product", initial, telescoped)?;
    let rhs = splitting_sum(table, cyl, beta, ClassKind::Infinitesimal)?;
    require(0, "telescoped product = Σ Π N(V_s, β_s)", telescoped, rhs)?;

    Ok(ReplayReport {
        count,
        initial,
        telescoped,
        splitting_sum: rhs,
        steps,
        ledger_consistent: true,
    })
}

/// The two ways of degenerating the glued curve `T_k^g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `L_k` glued to `M_k`.
    LM,
    /// `L_{k+1}` glued to `N_k`.
    LN,
}

/// A marked tree without a map: each vertex carries its leg labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbstractTree {
    pub vertices: Vec<BTreeSet<String>>,
    pub edges: Vec<(usize, usize, Length)>,
}

impl AbstractTree {
    pub fn legs(&self) -> BTreeSet<String> {
        self.vertices.iter().flatten().cloned().collect()
    }

    pub fn leg_count(&self) -> usize {
        self.vertices.iter().map(BTreeSet::len).sum()
    }

    /// Contracts zero-length edges and sorts vertices and edges.
    pub fn canonical(&self) -> AbstractTree {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (a, b, len) in &self.edges {
            if matches!(len, Length::Finite(q) if q.is_zero()) {
                let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            let r = find(&mut parent, v);
            groups
                .entry(r)
                .or_default()
                .extend(self.vertices[v].iter().cloned());
        }
        let mut vertices: Vec<BTreeSet<String>> = groups.values().cloned().collect();
        vertices.sort();
        let index_of = |root: usize| {
            vertices
                .iter()
                .position(|v| *v == groups[&root])
                .expect("present")
        };
        let mut edges: Vec<(usize, usize, Length)> = Vec::new();
        for (a, b, len) in &self.edges {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            if ra != rb {
                let (x, y) = (index_of(ra), index_of(rb));
                edges.push((x.min(y), x.max(y), *len));
            }
        }
        edges.sort_by_key(|e| (e.0, e.1));
        AbstractTree { vertices, edges }
    }
}

/// A point on the path between the two degenerations of `T_k^g`: the
/// glued vertex `{g^k}` joined to both sides by edges of length `r / 2`.
pub fn degeneration_path(t: usize, k: usize, branch: Branch, r: Length) -> AbstractTree {
    let mut left: BTreeSet<String> = ["1", "2", "w"].iter().map(|s| s.to_string()).collect();
    for s in (1..=t).filter(|&s| s != k) {
        left.insert(g_label(s));
        left.insert(t_label(s));
    }
    let mut right: BTreeSet<String> = ["1'", "2'", "w'"].iter().map(|s| s.to_string()).collect();
    let (to_left, to_right) = match branch {
        Branch::LM => (t_label(k), "t'".to_string()),
        Branch::LN => ("t'".to_string(), t_label(k)),
    };
    left.insert(to_left);
    right.insert(to_right);
    let centre = BTreeSet::from([g_label(k)]);
    let half = match r {
        Length::Finite(q) => Length::Finite(q / 2),
        Length::Infinite => Length::Infinite,
    };
    AbstractTree {
        vertices: vec![left, centre, right],
        edges: vec![(0, 1, half), (1, 2, half)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{choice_class, ElementaryCountTable};
    use crate::lattice::validate_fan;
    use crate::model::{build_model, ToricModel};

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
    fn families_for_two_leaves() {
        let cyl = PrimitiveCylinder::canonical(&cubic(), &[v(1, 0), v(0, 1)]).unwrap();
        let d = build_deformation(&cyl, &Anchors::default()).unwrap();
        assert_eq!((d.l.len(), d.m.len(), d.n.len()), (3, 2, 2));
        assert!(d.families().all(|f| f.classification.is_valid()));
        let sets = &d.index_sets;
        assert_eq!(sets.j_l.len(), 2 * 2 + 3);
        assert_eq!(sets.j_m.len(), 5);
        assert_eq!(sets.j_n.len(), 5);
        assert_eq!(sets.j_g.len(), 2 * 2 + 7);
        for k in 1..=3 {
            assert_eq!(sets.b_l[k - 1].len(), k + 1);
            assert_eq!(sets.i_l[k - 1].len(), 2 * 2 + 2 - k);
        }
        assert!(d.l[2].tree.twig_components().is_empty());
    }

    #[test]
    fn single_leaf_has_a_twigless_end() {
        let cyl = PrimitiveCylinder::canonical(&cubic(), &[v(-1, -1)]).unwrap();
        let d = build_deformation(&cyl, &Anchors::default()).unwrap();
        assert_eq!((d.l.len(), d.m.len(), d.n.len()), (2, 1, 1));
        assert!(d.l[1].tree.twig_components().is_empty());
        assert_eq!(
            d.family("L_2".parse().unwrap()).unwrap().tag,
            FamilyTag::L(2)
        );
    }

    #[test]
    fn anchor_errors() {
        let cyl = PrimitiveCylinder::canonical(&cubic(), &[v(1, 0), v(0, 1)]).unwrap();
        let at_origin = Anchors {
            g: Q::zero(),
            ..Anchors::default()
        };
        assert!(matches!(
            build_deformation(&cyl, &at_origin),
            Err(DeformationError::AnchorOrderViolation { .. })
        ));
        let swapped = Anchors {
            g: Q::from_integer(3),
            ..Anchors::default()
        };
        assert!(matches!(
            build_deformation(&cyl, &swapped),
            Err(DeformationError::AnchorOrderViolation { .. })
        ));
        let on_wall = Anchors {
            interior: Some(Q::from_integer(1)),
            ..Anchors::default()
        };
        let err = build_deformation(&cyl, &on_wall);
        assert!(
            matches!(err, Err(DeformationError::AnchorOnWall(_))),
            "{err:?}"
        );
    }

    #[test]
    fn replay_on_contributing_and_other_classes() {
        let cyl = PrimitiveCylinder::canonical(&cubic(), &[v(1, 0), v(0, 1)]).unwrap();
        let d = build_deformation(&cyl, &Anchors::default()).unwrap();
        let table = ElementaryCountTable::new();
        let hat = choice_class(&cyl, &[1, 0]).unwrap();
        let beta = &hat - cyl.delta_hat();
        let report = replay_induction(&d, &table, &beta).unwrap();
        assert!(report.passed());
        assert_eq!(report.count, 1);
        let off = &beta + &CurveClass::toric_divisor(cyl.model(), 0);
        let report = replay_induction(&d, &table, &off).unwrap();
        assert_eq!(report.count, 0);
        assert!(report.steps.iter().all(|s| s.direct == 0 && s.split == 0));
        let corrupted = ElementaryCountTable::new().with(v(0, 1), 0, 2);
        let report = replay_induction(&d, &corrupted, &beta).unwrap();
        assert_eq!(report.count, 2);
        assert!(report.passed());
    }

    #[test]
    fn ledger_identity() {
        let cyl = PrimitiveCylinder::canonical(&cubic(), &[v(-1, -1)]).unwrap();
        let d = build_deformation(&cyl, &Anchors::default()).unwrap();
        let ledger = extension_ledger(&d).unwrap();
        assert!(ledger.is_consistent());
        assert!(ledger.delta.iter().all(CurveClass::is_zero));
        assert_eq!(&ledger.delta_hat_v, cyl.delta_hat());
    }

    #[test]
    fn degeneration_midpoint() {
        for t in 1..=3 {
            for k in 1..=t {
                let a = degeneration_path(t, k, Branch::LM, Length::Finite(Q::zero()));
                let b = degeneration_path(t, k, Branch::LN, Length::Finite(Q::zero()));
                assert_eq!(a.canonical(), b.canonical());
                assert_eq!(a.canonical().vertices.len(), 1);
                let far = degeneration_path(t, k, Branch::LM, Length::Infinite);
                assert_eq!(far.leg_count(), 2 * t + 7);
                assert!(far.edges.iter().all(|e| e.2 == Length::Infinite));
                let mid = degeneration_path(t, k, Branch::LN, Length::Finite(Q::from_integer(3)));
                assert_ne!(mid.canonical(), a.canonical());
            }
        }
    }
}
