//! The combinatorial wall structure. Step zero consists of the rays carrying
//! blown-up points; every later step adds the primitive direction of the sum
//! of the generators of two distinct, non-opposite walls, subject to a norm
//! bound.
//!
//! Walls are stored as rays but compared as lines: [`WallStructure::contains`]
//! accepts `d` when either `d` or `-d` is a wall.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{norm, LatticeVector};
use crate::model::{exceptional_directions, ToricModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WallError {
    #[error("the zero vector has no direction")]
    ZeroVector,
    #[error("unknown wall rule `{0}` (expected pair_sum or support)")]
    UnknownRule(String),
}

/// How membership queries are answered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallRule {
    /// Only generated directions are walls.
    #[default]
    PairSum,
    /// A direction is a wall when it lies in the cone spanned by the rays
    /// carrying blowups (up to sign).
    Support,
}

impl fmt::Display for WallRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WallRule::PairSum => "pair_sum",
            WallRule::Support => "support",
        })
    }
}

impl FromStr for WallRule {
    type Err = WallError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pair_sum" => Ok(WallRule::PairSum),
            "support" => Ok(WallRule::Support),
            other => Err(WallError::UnknownRule(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallStructure {
    walls: BTreeMap<LatticeVector, usize>,
    support: Vec<LatticeVector>,
    rule: WallRule,
    steps: usize,
    norm_bound: i64,
}

/// One generated wall, as reported to callers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub direction: LatticeVector,
    pub step: usize,
    pub norm: i64,
}

pub fn generate_walls(model: &ToricModel, steps: usize, norm_bound: i64) -> WallStructure {
    generate_walls_with_rule(model, steps, norm_bound, WallRule::PairSum)
}

pub fn generate_walls_with_rule(
    model: &ToricModel,
    steps: usize,
    norm_bound: i64,
    rule: WallRule,
) -> WallStructure {
    let fan = model.fan();
    let support: Vec<LatticeVector> = exceptional_directions(model)
        .iter()
        .map(|e| e.direction)
        .collect();
    let mut walls: BTreeMap<LatticeVector, usize> = support.iter().map(|&d| (d, 0)).collect();
    for step in 1..=steps {
        let current: Vec<LatticeVector> = walls.keys().copied().collect();
        let mut added = Vec::new();
        for (a, &d1) in current.iter().enumerate() {
            for &d2 in &current[a + 1..] {
                if d1 == -d2 {
                    continue;
                }
                let Some(p) = (d1 + d2).primitive() else {
                    continue;
                };
                if !walls.contains_key(&p) && norm(fan, p) <= norm_bound {
                    added.push(p);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        for p in added {
            walls.entry(p).or_insert(step);
        }
    }
    WallStructure {
        walls,
        support,
        rule,
        steps,
        norm_bound,
    }
}

/// True when some nonzero nonnegative combination of the rays carrying
/// blowups is parallel to `d`, with either sign.
pub fn is_wall_direction(model: &ToricModel, d: LatticeVector) -> Result<bool, WallError> {
    if d.is_zero() {
        return Err(WallError::ZeroVector);
    }
    let support: Vec<LatticeVector> = exceptional_directions(model)
        .iter()
        .map(|e| e.direction)
        .collect();
    Ok(in_cone(&support, d) || in_cone(&support, -d))
}

/// Membership of `d` in the closed convex cone spanned by `gens`. In the
/// plane any such vector is a combination of at most two generators.
fn in_cone(gens: &[LatticeVector], d: LatticeVector) -> bool {
    if gens.iter().any(|&g| g.same_direction(d)) {
        return true;
    }
    for (a, &g1) in gens.iter().enumerate() {
        for &g2 in &gens[a + 1..] {
            let det = g1.det(g2);
            if det == 0 {
                continue;
            }
            // d = x g1 + y g2 with x = det(d, g2) / det, y = det(g1, d) / det.
            let x = d.det(g2);
            let y = g1.det(d);
            let s = det.signum();
            if x * s >= 0 && y * s >= 0 {
                return true;
            }
        }
    }
    false
}

impl WallStructure {
    pub fn rule(&self) -> WallRule {
        self.rule
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn norm_bound(&self) -> i64 {
        self.norm_bound
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    /// Generation step of a generated direction (taken as a ray, not a line).
    pub fn step_of(&self, d: LatticeVector) -> Option<usize> {
        self.walls.get(&d.primitive()?).copied()
    }

    /// Exact lookup among generated walls, up to sign.
    pub fn generated_contains(&self, d: LatticeVector) -> bool {
        match d.primitive() {
            Some(p) => self.walls.contains_key(&p) || self.walls.contains_key(&-p),
            None => false,
        }
    }

    /// Membership of the line spanned by `d` according to the structure's rule.
    pub fn contains(&self, d: LatticeVector) -> bool {
        match self.rule {
            WallRule::PairSum => self.generated_contains(d),
            WallRule::Support => {
                !d.is_zero() && (in_cone(&self.support, d) || in_cone(&self.support, -d))
            }
        }
    }

    /// Directions first generated at `step`, in lattice order.
    pub fn at_step(&self, step: usize) -> Vec<LatticeVector> {
        self.walls
            .iter()
            .filter(|(_, &s)| s == step)
            .map(|(&d, _)| d)
            .collect()
    }

    /// Every wall sorted by step, then counterclockwise from the positive x axis.
    pub fn walls(&self, model: &ToricModel) -> Vec<Wall> {
        let mut out: Vec<Wall> = self
            .walls
            .iter()
            .map(|(&direction, &step)| Wall {
                direction,
                step,
                norm: norm(model.fan(), direction),
            })
            .collect();
        out.sort_by(|a, b| {
            a.step
                .cmp(&b.step)
                .then_with(|| a.direction.angle_cmp(b.direction))
        });
        out
    }

    pub fn directions(&self) -> impl Iterator<Item = (LatticeVector, usize)> + '_ {
        self.walls.iter().map(|(&d, &s)| (d, s))
    }
}
