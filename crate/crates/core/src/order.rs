//! Finite preorders under the forcing convention: `q <= p` means `q` is the
//! stronger condition.
//!
//! Besides the concrete [`FinitePoset`], this module defines the [`Forcing`]
//! trait shared by posets and by the nonzero part of a field of sets, so the
//! intersection and linkedness code can run over either substrate.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use itertools::Itertools;
use thiserror::Error;

use crate::algebra::{ro_completion, AlgebraError, FieldOfSets};
use crate::set::Subset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("element index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("relation matrix is {rows}x{cols}, expected {n}x{n}")]
    Shape { rows: usize, cols: usize, n: usize },
    #[error("relation is not reflexive at `{0}`")]
    NotReflexive(String),
    #[error("relation is not transitive: {0} <= {1} <= {2}")]
    NotTransitive(String, String, String),
    #[error("empty condition sequence")]
    EmptySequence,
}

/// A finite forcing notion over a subset-able substrate.
pub trait Forcing {
    type Elem: Clone + Ord + Hash + Debug;

    /// Every condition, in a deterministic order.
    fn conditions(&self) -> Vec<Self::Elem>;

    fn is_condition(&self, e: &Self::Elem) -> bool;

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;

    /// Whether the (finite) family has a common lower bound.
    fn has_lower_bound(&self, family: &[Self::Elem]) -> bool;

    /// For each condition `r` of a fixed witness set that is coinitial in the
    /// forcing, the set of positions `j` with `r <= family[j]`.
    fn bound_profiles(&self, family: &[Self::Elem]) -> Vec<Subset>;

    /// A field of sets receiving this forcing by a dense embedding, together
    /// with the images of `family`.
    fn represent(&self, family: &[Self::Elem]) -> Result<(FieldOfSets, Vec<Subset>), AlgebraError>;

    fn describe(&self, e: &Self::Elem) -> String;

    fn compatible(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.has_lower_bound(&[a.clone(), b.clone()])
    }

    /// `i*` of a nonempty sequence: the largest number of positions sharing
    /// a lower bound.
    fn i_star(&self, seq: &[Self::Elem]) -> Result<usize, OrderError> {
        if seq.is_empty() {
            return Err(OrderError::EmptySequence);
        }
        Ok(self
            .bound_profiles(seq)
            .iter()
            .map(Subset::len)
            .max()
            .unwrap_or(0))
    }

    fn upward_closure(&self, b: &[Self::Elem]) -> Vec<Self::Elem> {
        self.conditions()
            .into_iter()
            .filter(|a| b.iter().any(|x| self.leq(x, a)))
            .collect()
    }

    /// Every condition has an extension inside `d`.
    fn is_dense(&self, d: &[Self::Elem]) -> bool {
        self.conditions()
            .iter()
            .all(|p| d.iter().any(|q| self.leq(q, p)))
    }

    fn is_antichain(&self, q: &[Self::Elem]) -> bool {
        let q = dedup(q);
        q.iter()
            .tuple_combinations()
            .all(|(a, b)| !self.compatible(a, b))
    }

    /// On a finite set, centered is the same as having one common lower bound.
    fn is_centered(&self, q: &[Self::Elem]) -> bool {
        self.has_lower_bound(&dedup(q))
    }

    /// Every subfamily of at most `m` members has a lower bound.
    fn is_m_linked(&self, q: &[Self::Elem], m: usize) -> bool {
        let q = dedup(q);
        let k = m.min(q.len());
        if k == 0 {
            return true;
        }
        q.iter()
            .cloned()
            .combinations(k)
            .all(|sub| self.has_lower_bound(&sub))
    }
}

pub(crate) fn dedup<E: Clone + Ord>(q: &[E]) -> Vec<E> {
    q.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Finite sequence of conditions, repetitions allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConditionSeq<E>(pub Vec<E>);

impl<E> ConditionSeq<E> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[E] {
        &self.0
    }
}

/// A finite preorder, stored as the down-set of every element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    below: Vec<Subset>,
    above: Vec<Subset>,
    partial_order: bool,
}

impl FinitePoset {
    /// Builds the reflexive-transitive closure of `pairs`, where `(a, b)`
    /// means `a <= b`.
    pub fn from_relation<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        pairs: &[(usize, usize)],
    ) -> Result<Self, OrderError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        let mut below: Vec<Subset> = (0..n).map(|i| Subset::singleton(n, i)).collect();
        for &(a, b) in pairs {
            if a >= n {
                return Err(OrderError::IndexOutOfRange(a));
            }
            if b >= n {
                return Err(OrderError::IndexOutOfRange(b));
            }
            below[b].insert(a);
        }
        // Warshall on down-sets.
        for k in 0..n {
            let below_k = below[k].clone();
            for set in below.iter_mut() {
                if set.contains(k) {
                    set.union_with(&below_k);
                }
            }
        }
        Self::from_down_sets(labels, below)
    }

    pub fn from_labeled_relation(labels: &[&str], pairs: &[(&str, &str)]) -> Result<Self, OrderError> {
        let lookup = |s: &str| {
            labels
                .iter()
                .position(|l| *l == s)
                .ok_or_else(|| OrderError::UnknownLabel(s.to_string()))
        };
        let idx = pairs
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, OrderError>>()?;
        Self::from_relation(labels.iter().copied(), &idx)
    }

    /// Accepts an explicit relation matrix; `matrix[a][b]` means `a <= b`.
    pub fn from_matrix<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        matrix: &[Vec<bool>],
    ) -> Result<Self, OrderError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if matrix.len() != n {
            return Err(OrderError::Shape { rows: matrix.len(), cols: n, n });
        }
        let mut below = vec![Subset::empty(n); n];
        for (a, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(OrderError::Shape { rows: n, cols: row.len(), n });
            }
            for (b, &le) in row.iter().enumerate() {
                if le {
                    below[b].insert(a);
                }
            }
        }
        for i in 0..n {
            if !below[i].contains(i) {
                return Err(OrderError::NotReflexive(labels[i].clone()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !below[b].contains(a) {
                    continue;
                }
                for c in 0..n {
                    if below[c].contains(b) && !below[c].contains(a) {
                        return Err(OrderError::NotTransitive(
                            labels[a].clone(),
                            labels[b].clone(),
                            labels[c].clone(),
                        ));
                    }
                }
            }
        }
        Self::from_down_sets(labels, below)
    }

    fn from_down_sets(labels: Vec<String>, below: Vec<Subset>) -> Result<Self, OrderError> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(OrderError::DuplicateLabel(l.clone()));
            }
        }
        let mut above = vec![Subset::empty(n); n];
        for (b, set) in below.iter().enumerate() {
            for a in set.iter() {
                above[a].insert(b);
            }
        }
        let partial_order = (0..n).all(|a| below[a].intersection(&above[a]).len() == 1);
        Ok(FinitePoset { labels, index, below, above, partial_order })
    }

    /// `k` pairwise incomparable elements `a0 .. a{k-1}`.
    pub fn antichain(k: usize) -> Self {
        Self::from_relation((0..k).map(|i| format!("a{i}")), &[]).expect("valid antichain")
    }

    /// `c0 <= c1 <= ... <= c{k-1}`.
    pub fn chain(k: usize) -> Self {
        let pairs: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
        Self::from_relation((0..k).map(|i| format!("c{i}")), &pairs).expect("valid chain")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, OrderError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| OrderError::UnknownLabel(label.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>, OrderError> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    /// Whether the preorder is antisymmetric.
    pub fn is_partial_order(&self) -> bool {
        self.partial_order
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.below[b].contains(a)
    }

    pub fn leq_labels(&self, a: &str, b: &str) -> Result<bool, OrderError> {
        Ok(self.leq(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn below(&self, p: usize) -> &Subset {
        &self.below[p]
    }

    pub fn above(&self, p: usize) -> &Subset {
        &self.above[p]
    }

    pub fn compatible(&self, a: usize, b: usize) -> bool {
        self.below[a].intersects(&self.below[b])
    }

    pub fn compatible_labels(&self, a: &str, b: &str) -> Result<bool, OrderError> {
        Ok(self.compatible(self.index_of(a)?, self.index_of(b)?))
    }

    /// Common lower bounds of all listed elements.
    pub fn lower_bounds(&self, family: &[usize]) -> Subset {
        let mut acc = Subset::full(self.len());
        for &q in family {
            acc.intersect_with(&self.below[q]);
        }
        acc
    }

    /// `p <=• q`: every extension of `p` is compatible with `q`.
    pub fn separative_leq(&self, p: usize, q: usize) -> bool {
        self.below[p].iter().all(|r| self.compatible(r, q))
    }

    pub fn separative_leq_labels(&self, p: &str, q: &str) -> Result<bool, OrderError> {
        Ok(self.separative_leq(self.index_of(p)?, self.index_of(q)?))
    }

    /// Some `q <= p` below every `ps[i]`, provided `p <=• ps[i]` for all `i`.
    ///
    /// Built by walking through `ps`: the current bound stays separatively
    /// below every remaining target, so it is compatible with the next one
    /// and can be extended into it.
    pub fn separative_bound(&self, p: usize, ps: &[usize]) -> Option<usize> {
        if !ps.iter().all(|&pi| self.separative_leq(p, pi)) {
            return None;
        }
        let mut q = p;
        for &pi in ps {
            let common = self.below[q].intersection(&self.below[pi]);
            q = common.first().expect("separative hypothesis guarantees compatibility");
        }
        Some(q)
    }

    /// `B↑ = {a : some b in B has b <= a}`.
    pub fn upward_closure(&self, b: &[usize]) -> Vec<usize> {
        let mut acc = Subset::empty(self.len());
        for &x in b {
            acc.union_with(&self.above[x]);
        }
        acc.to_vec()
    }

    /// Elements `m` such that everything below `m` is equivalent to `m`.
    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&m| self.below[m].is_subset(&self.above[m]))
            .collect()
    }

    pub fn has_lower_bound(&self, family: &[usize]) -> bool {
        !self.lower_bounds(family).is_empty()
    }

    pub fn is_antichain(&self, q: &[usize]) -> bool {
        Forcing::is_antichain(self, q)
    }

    pub fn is_centered(&self, q: &[usize]) -> bool {
        Forcing::is_centered(self, q)
    }

    pub fn is_m_linked(&self, q: &[usize], m: usize) -> bool {
        Forcing::is_m_linked(self, q, m)
    }
}

impl Forcing for FinitePoset {
    type Elem = usize;

    fn conditions(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    fn is_condition(&self, e: &usize) -> bool {
        *e < self.len()
    }

    fn leq(&self, a: &usize, b: &usize) -> bool {
        FinitePoset::leq(self, *a, *b)
    }

    fn has_lower_bound(&self, family: &[usize]) -> bool {
        FinitePoset::has_lower_bound(self, family)
    }

    fn compatible(&self, a: &usize, b: &usize) -> bool {
        FinitePoset::compatible(self, *a, *b)
    }

    fn bound_profiles(&self, family: &[usize]) -> Vec<Subset> {
        (0..self.len())
            .map(|r| {
                Subset::from_indices(
                    family.len(),
                    family
                        .iter()
                        .enumerate()
                        .filter(|(_, &q)| FinitePoset::leq(self, r, q))
                        .map(|(j, _)| j),
                )
            })
            .collect()
    }

    fn represent(&self, family: &[usize]) -> Result<(FieldOfSets, Vec<Subset>), AlgebraError> {
        let completion = ro_completion(self)?;
        let images = family
            .iter()
            .map(|&q| completion.embedding.image(q).clone())
            .collect();
        Ok((completion.field, images))
    }

    fn describe(&self, e: &usize) -> String {
        self.labels[*e].clone()
    }

    fn upward_closure(&self, b: &[usize]) -> Vec<usize> {
        FinitePoset::upward_closure(self, b)
    }
}
