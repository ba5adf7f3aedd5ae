//! Finite truncations of tree conditions, with trunk, loss and measure.
//!
//! A condition is stored as its trunk plus the successor sets of finitely
//! many nodes extending it. A node that is in the tree but not recorded
//! keeps all of its children, and so does every node at depth
//! `frontier_depth` or beyond.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::profile::{norm_at_least, GrowthProfile};
use super::EtreeError;
use crate::{BigInt, Rational};

/// Path from the root, as child indices.
pub type NodePath = Vec<BigUint>;

/// The children a node keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuccessorSet {
    Explicit(Vec<BigUint>),
    /// All of `0..total` except `excluded`.
    Cofinite { total: BigUint, excluded: Vec<BigUint> },
}

impl SuccessorSet {
    /// All children of a node with `total` children.
    pub fn full(total: BigUint) -> Self {
        SuccessorSet::Cofinite { total, excluded: Vec::new() }
    }

    pub fn cardinality(&self) -> BigUint {
        match self {
            SuccessorSet::Explicit(v) => BigUint::from(v.len()),
            SuccessorSet::Cofinite { total, excluded } => total - BigUint::from(excluded.len()),
        }
    }

    pub fn contains(&self, k: &BigUint) -> bool {
        match self {
            SuccessorSet::Explicit(v) => v.binary_search(k).is_ok(),
            SuccessorSet::Cofinite { total, excluded } => k < total && excluded.binary_search(k).is_err(),
        }
    }

    /// Smallest kept child.
    pub fn first(&self) -> Option<BigUint> {
        match self {
            SuccessorSet::Explicit(v) => v.first().cloned(),
            SuccessorSet::Cofinite { total, excluded } => {
                let mut k = BigUint::zero();
                for e in excluded {
                    if *e != k {
                        break;
                    }
                    k += 1u8;
                }
                (k < *total).then_some(k)
            }
        }
    }

    /// Sorts and deduplicates, then checks against the branching `m`.
    fn normalized(self, m: &BigUint, path: &[BigUint]) -> Result<Self, EtreeError> {
        let bad = |reason: &str| EtreeError::Malformed(format!("node {}: {reason}", show_path(path)));
        let norm = |mut v: Vec<BigUint>| {
            v.sort();
            v.dedup();
            v
        };
        let s = match self {
            SuccessorSet::Explicit(v) => SuccessorSet::Explicit(norm(v)),
            SuccessorSet::Cofinite { total, excluded } => SuccessorSet::Cofinite { total, excluded: norm(excluded) },
        };
        match &s {
            SuccessorSet::Explicit(v) => {
                if v.iter().any(|k| k >= m) {
                    return Err(bad("child index out of range"));
                }
            }
            SuccessorSet::Cofinite { total, excluded } => {
                if total != m {
                    return Err(bad("cofinite total differs from the branching"));
                }
                if excluded.iter().any(|k| k >= m) {
                    return Err(bad("excluded index out of range"));
                }
            }
        }
        if s.cardinality().is_zero() {
            return Err(bad("successor set is empty"));
        }
        Ok(s)
    }
}

pub fn show_path(path: &[BigUint]) -> String {
    if path.is_empty() {
        return "-".into();
    }
    path.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("/")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ECondition {
    profile: GrowthProfile,
    trunk: NodePath,
    nodes: BTreeMap<NodePath, SuccessorSet>,
    frontier_depth: usize,
}

impl ECondition {
    /// Validates the shape: indices in range, recorded nodes extend the
    /// trunk, lie in the tree and above the frontier, and the trunk splits.
    pub fn new(
        profile: GrowthProfile,
        trunk: NodePath,
        nodes: BTreeMap<NodePath, SuccessorSet>,
        frontier_depth: usize,
    ) -> Result<Self, EtreeError> {
        let len = trunk.len();
        if frontier_depth < len {
            return Err(EtreeError::Malformed("frontier lies above the trunk".into()));
        }
        for (h, k) in trunk.iter().enumerate() {
            if *k >= profile.branching(h)? {
                return Err(EtreeError::Malformed(format!("trunk index {k} at level {h} out of range")));
            }
        }
        let mut checked = BTreeMap::new();
        for (path, set) in nodes {
            if !path.starts_with(&trunk) {
                return Err(EtreeError::Malformed(format!("node {} does not extend the trunk", show_path(&path))));
            }
            if path.len() >= frontier_depth {
                return Err(EtreeError::Malformed(format!("node {} is at or below the frontier", show_path(&path))));
            }
            for (h, k) in path.iter().enumerate().skip(len) {
                if *k >= profile.branching(h)? {
                    return Err(EtreeError::Malformed(format!("node {} has an index out of range", show_path(&path))));
                }
            }
            let m = profile.branching(path.len())?;
            checked.insert(path.clone(), set.normalized(&m, &path)?);
        }
        for path in checked.keys() {
            for d in len..path.len() {
                if let Some(parent) = checked.get(&path[..d]) {
                    if !parent.contains(&path[d]) {
                        return Err(EtreeError::Malformed(format!("node {} is not in the tree", show_path(path))));
                    }
                }
            }
        }
        if let Some(s) = checked.get(&trunk) {
            if s.cardinality() < BigUint::from(2u8) {
                return Err(EtreeError::Malformed("the trunk node must split".into()));
            }
        }
        Ok(ECondition { profile, trunk, nodes: checked, frontier_depth })
    }

    /// The whole tree: empty trunk, nothing removed.
    pub fn full_tree(profile: GrowthProfile) -> Self {
        ECondition { profile, trunk: Vec::new(), nodes: BTreeMap::new(), frontier_depth: 0 }
    }

    pub fn profile(&self) -> &GrowthProfile {
        &self.profile
    }

    pub fn trunk(&self) -> &[BigUint] {
        &self.trunk
    }

    pub fn nodes(&self) -> &BTreeMap<NodePath, SuccessorSet> {
        &self.nodes
    }

    pub fn frontier_depth(&self) -> usize {
        self.frontier_depth
    }

    fn successors(&self, path: &[BigUint]) -> Result<SuccessorSet, EtreeError> {
        match self.nodes.get(path) {
            Some(s) => Ok(s.clone()),
            None => Ok(SuccessorSet::full(self.profile.branching(path.len())?)),
        }
    }

    /// Every recorded node meets `threshold`, or keeps all its children
    /// when the threshold is infinite (`None`).
    fn norms_reach(&self, threshold: Option<&Rational>) -> Result<bool, EtreeError> {
        for (path, set) in &self.nodes {
            let h = path.len();
            let n = set.cardinality();
            let ok = match threshold {
                None => n == self.profile.branching(h)?,
                Some(t) => norm_at_least(&self.profile, h, &n, t)?,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every node from the trunk on has norm at least `1 + 1/lg(trunk)`;
    /// with an empty trunk the bound is infinite.
    pub fn is_condition(&self) -> Result<bool, EtreeError> {
        let len = self.trunk.len();
        if len == 0 {
            return self.norms_reach(None);
        }
        let t = Rational::new(BigInt::from(len + 1), BigInt::from(len));
        self.norms_reach(Some(&t))
    }

    /// `1/m` for the largest `m > 2` with `lg(trunk) > 3m` and every node
    /// from the trunk on of norm at least `1 + 1/m`; `None` if there is none.
    pub fn loss_of(&self) -> Result<Option<Rational>, EtreeError> {
        if !self.is_condition()? {
            return Err(EtreeError::NotACondition);
        }
        let len = self.trunk.len();
        if len == 0 {
            return Ok(None);
        }
        // The norm clause only weakens as m grows, so the largest m allowed
        // by the trunk clause decides.
        let m = (len - 1) / 3;
        if m < 3 {
            return Ok(None);
        }
        let t = Rational::new(BigInt::from(m + 1), BigInt::from(m));
        Ok(self.norms_reach(Some(&t))?.then(|| Rational::new(BigInt::one(), BigInt::from(m))))
    }

    /// `Leb([p]) / Leb([trunk])` when every node splits its mass evenly
    /// among all of its children.
    pub fn leb_ratio(&self) -> Result<LebReport, EtreeError> {
        let ratio = self.subtree_ratio(&self.trunk)?;
        let loss = if self.is_condition()? { self.loss_of()? } else { None };
        let bound = loss.as_ref().map(|l| Rational::one() - l / Rational::from_integer(BigInt::from(2)));
        let meets_bound = bound.as_ref().map(|b| ratio >= *b);
        Ok(LebReport { ratio, loss, bound, meets_bound })
    }

    fn subtree_ratio(&self, path: &[BigUint]) -> Result<Rational, EtreeError> {
        let Some(set) = self.nodes.get(path) else {
            return Ok(Rational::one());
        };
        let m = self.profile.branching(path.len())?;
        let mut kept_unrecorded = set.cardinality();
        let mut sum = Rational::zero();
        let mut child: NodePath = path.to_vec();
        let recorded_children: Vec<BigUint> = self
            .nodes
            .range(path.to_vec()..)
            .take_while(|(p, _)| p.starts_with(path))
            .filter(|(p, _)| p.len() == path.len() + 1)
            .map(|(p, _)| p[path.len()].clone())
            .collect();
        for k in recorded_children {
            child.push(k);
            sum += self.subtree_ratio(&child)?;
            child.pop();
            kept_unrecorded -= 1u8;
        }
        sum += Rational::from_integer(BigInt::from(kept_unrecorded));
        Ok(sum / Rational::from_integer(BigInt::from(m)))
    }

    /// `p ∩ [trunk⁀k]`, whose trunk is `trunk⁀k`.
    pub fn restrict_to_child(&self, k: BigUint) -> Result<Self, EtreeError> {
        if !self.successors(&self.trunk)?.contains(&k) {
            return Err(EtreeError::Malformed(format!("child {k} is not kept at the trunk")));
        }
        let mut trunk = self.trunk.clone();
        trunk.push(k);
        let nodes = self
            .nodes
            .iter()
            .filter(|(p, _)| p.starts_with(&trunk))
            .map(|(p, s)| (p.clone(), s.clone()))
            .collect();
        let frontier = self.frontier_depth.max(trunk.len());
        ECondition::new(self.profile.clone(), trunk, nodes, frontier)
    }

    /// Lengthens the trunk along the smallest kept children until the loss
    /// is defined and, if `eps` is given, at most `eps`.
    pub fn extend_into_loss_domain(&self, eps: Option<&Rational>) -> Result<Self, EtreeError> {
        if !self.is_condition()? {
            return Err(EtreeError::NotACondition);
        }
        let target_m = match eps {
            Some(e) if *e <= Rational::zero() => return Err(EtreeError::ThresholdNegative(e.clone())),
            Some(e) => (Rational::one() / e).ceil().to_integer().to_usize().unwrap_or(usize::MAX).max(3),
            None => 3,
        };
        // lg(trunk) = max(3·L, 3·target_m) + 1 satisfies both clauses of the loss.
        let goal = 3 * self.trunk.len().max(target_m) + 1;
        let mut c = self.clone();
        while c.trunk.len() < goal {
            let k = c.successors(&c.trunk)?.first().expect("nonempty successor set");
            c = c.restrict_to_child(k)?;
            let ok = match (c.loss_of()?, eps) {
                (Some(l), Some(e)) => l <= *e,
                (Some(_), None) => true,
                (None, _) => false,
            };
            if ok {
                return Ok(c);
            }
        }
        Err(EtreeError::Malformed("loss did not become defined".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LebReport {
    pub ratio: Rational,
    pub loss: Option<Rational>,
    /// `1 - loss/2`.
    pub bound: Option<Rational>,
    pub meets_bound: Option<bool>,
}

/// Loss defined, trunk equal to `t`, and loss at most `eps`.
pub fn q_t_eps_membership(c: &ECondition, t: &[BigUint], eps: &Rational) -> Result<bool, EtreeError> {
    if c.trunk() != t || !c.is_condition()? {
        return Ok(false);
    }
    Ok(matches!(c.loss_of()?, Some(l) if l <= *eps))
}
