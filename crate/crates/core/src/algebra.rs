//! Finite fields of sets, the regular-open completion of a finite poset, and
//! complete/dense embedding checks.
//!
//! A field of sets over a finite ground set is determined by its atoms, so
//! [`FieldOfSets`] stores the atom partition and treats members as unions of
//! atoms. Member enumeration goes through `u64` masks over the atoms, which
//! is why the ground-set cap may not exceed 63.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::order::{Forcing, FinitePoset};
use crate::set::Subset;

pub const DEFAULT_GROUND_CAP: usize = 16;
pub const MAX_GROUND_CAP: usize = 63;

/// Upper bound on the number of nonzero members when a field is turned into
/// an explicit poset.
pub const MAX_POSET_MEMBERS: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("ground set must be nonempty")]
    EmptyGround,
    #[error("ground set of size {size} exceeds the cap {cap}")]
    GroundTooLarge { size: usize, cap: usize },
    #[error("ground-set cap {0} exceeds the supported maximum {MAX_GROUND_CAP}")]
    CapTooLarge(usize),
    #[error("point {point} outside ground set of size {ground}")]
    OutOfRange { point: usize, ground: usize },
    #[error("{0} is not a member of the field")]
    NotAMember(String),
    #[error("subset lives over a universe of size {found}, expected {expected}")]
    UniverseMismatch { found: usize, expected: usize },
    #[error("field has {0} nonzero members, too many to list as a poset")]
    TooManyMembers(usize),
    #[error("embedding has {found} images for {expected} source elements")]
    ArityMismatch { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldOfSets {
    ground: usize,
    atoms: Vec<Subset>,
    atom_of: Vec<usize>,
}

impl FieldOfSets {
    /// Smallest field over `{0, .., ground - 1}` containing every generator,
    /// with the default ground-set cap.
    pub fn generate(ground: usize, generators: &[Vec<usize>]) -> Result<Self, AlgebraError> {
        Self::generate_capped(ground, generators, DEFAULT_GROUND_CAP)
    }

    pub fn generate_capped(
        ground: usize,
        generators: &[Vec<usize>],
        cap: usize,
    ) -> Result<Self, AlgebraError> {
        check_ground(ground, cap)?;
        let mut sets = Vec::with_capacity(generators.len());
        for g in generators {
            if let Some(&point) = g.iter().find(|&&x| x >= ground) {
                return Err(AlgebraError::OutOfRange { point, ground });
            }
            sets.push(Subset::from_indices(ground, g.iter().copied()));
        }
        Self::from_generators(ground, &sets, cap)
    }

    /// Same as [`generate_capped`](Self::generate_capped) for generators
    /// already given as subsets.
    pub fn from_generators(ground: usize, generators: &[Subset], cap: usize) -> Result<Self, AlgebraError> {
        check_ground(ground, cap)?;
        for g in generators {
            if g.universe() != ground {
                return Err(AlgebraError::UniverseMismatch { found: g.universe(), expected: ground });
            }
        }
        // Two points lie in the same atom iff no generator separates them.
        let mut classes: BTreeMap<Vec<bool>, Subset> = BTreeMap::new();
        for x in 0..ground {
            let signature: Vec<bool> = generators.iter().map(|g| g.contains(x)).collect();
            classes
                .entry(signature)
                .or_insert_with(|| Subset::empty(ground))
                .insert(x);
        }
        let mut atoms: Vec<Subset> = classes.into_values().collect();
        atoms.sort_by_key(|a| a.first());
        let mut atom_of = vec![0; ground];
        for (k, a) in atoms.iter().enumerate() {
            for x in a.iter() {
                atom_of[x] = k;
            }
        }
        Ok(FieldOfSets { ground, atoms, atom_of })
    }

    pub fn powerset(ground: usize) -> Result<Self, AlgebraError> {
        let singletons: Vec<Vec<usize>> = (0..ground).map(|x| vec![x]).collect();
        Self::generate(ground, &singletons)
    }

    pub fn trivial(ground: usize) -> Result<Self, AlgebraError> {
        Self::generate(ground, &[])
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    /// Minimal nonzero members; they partition the ground set.
    pub fn atoms(&self) -> &[Subset] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Index of the atom containing `point`.
    pub fn atom_of(&self, point: usize) -> usize {
        self.atom_of[point]
    }

    pub fn zero(&self) -> Subset {
        Subset::empty(self.ground)
    }

    pub fn unit(&self) -> Subset {
        Subset::full(self.ground)
    }

    pub fn subset(&self, points: &[usize]) -> Result<Subset, AlgebraError> {
        if let Some(&point) = points.iter().find(|&&x| x >= self.ground) {
            return Err(AlgebraError::OutOfRange { point, ground: self.ground });
        }
        Ok(Subset::from_indices(self.ground, points.iter().copied()))
    }

    pub fn is_member(&self, s: &Subset) -> bool {
        self.atom_mask(s).is_ok()
    }

    /// The atoms below a member, as a bit mask over atom indices.
    pub fn atom_mask(&self, s: &Subset) -> Result<u64, AlgebraError> {
        if s.universe() != self.ground {
            return Err(AlgebraError::UniverseMismatch { found: s.universe(), expected: self.ground });
        }
        let mut mask = 0u64;
        for (k, atom) in self.atoms.iter().enumerate() {
            if atom.is_subset(s) {
                mask |= 1 << k;
            } else if atom.intersects(s) {
                return Err(AlgebraError::NotAMember(s.to_string()));
            }
        }
        Ok(mask)
    }

    /// Indices of the atoms below a member.
    pub fn atoms_below(&self, s: &Subset) -> Result<Vec<usize>, AlgebraError> {
        let mask = self.atom_mask(s)?;
        Ok((0..self.atoms.len()).filter(|k| mask >> k & 1 == 1).collect())
    }

    pub fn member_from_mask(&self, mask: u64) -> Subset {
        let mut s = self.zero();
        for (k, atom) in self.atoms.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s.union_with(atom);
            }
        }
        s
    }

    pub fn member_count(&self) -> u64 {
        1u64 << self.atoms.len()
    }

    /// All members, `∅` first, `X` last.
    pub fn members(&self) -> impl Iterator<Item = Subset> + '_ {
        (0..self.member_count()).map(move |m| self.member_from_mask(m))
    }

    /// Members other than `∅`.
    pub fn positive_members(&self) -> impl Iterator<Item = Subset> + '_ {
        (1..self.member_count()).map(move |m| self.member_from_mask(m))
    }

    /// `self` is a subalgebra of `other`: same ground set and every atom of
    /// `self` is a member of `other`.
    pub fn is_subalgebra_of(&self, other: &FieldOfSets) -> bool {
        self.ground == other.ground && self.atoms.iter().all(|a| other.is_member(a))
    }

    /// The nonzero members as an explicit poset ordered by inclusion, in the
    /// order of [`positive_members`](Self::positive_members).
    pub fn as_poset(&self) -> Result<(FinitePoset, Vec<Subset>), AlgebraError> {
        let n = (self.member_count() - 1) as usize;
        if n > MAX_POSET_MEMBERS {
            return Err(AlgebraError::TooManyMembers(n));
        }
        let masks: Vec<u64> = (1..self.member_count()).collect();
        let mut pairs = Vec::new();
        for (i, &a) in masks.iter().enumerate() {
            for (j, &b) in masks.iter().enumerate() {
                if i != j && a & b == a {
                    pairs.push((i, j));
                }
            }
        }
        let members: Vec<Subset> = masks.iter().map(|&m| self.member_from_mask(m)).collect();
        let poset = FinitePoset::from_relation(members.iter().map(|s| s.to_string()), &pairs)
            .expect("inclusion order is a valid relation");
        Ok((poset, members))
    }
}

fn check_ground(ground: usize, cap: usize) -> Result<(), AlgebraError> {
    if cap > MAX_GROUND_CAP {
        return Err(AlgebraError::CapTooLarge(cap));
    }
    if ground == 0 {
        return Err(AlgebraError::EmptyGround);
    }
    if ground > cap {
        return Err(AlgebraError::GroundTooLarge { size: ground, cap });
    }
    Ok(())
}

impl Forcing for FieldOfSets {
    type Elem = Subset;

    fn conditions(&self) -> Vec<Subset> {
        self.positive_members().collect()
    }

    fn is_condition(&self, e: &Subset) -> bool {
        !e.is_empty() && self.is_member(e)
    }

    fn leq(&self, a: &Subset, b: &Subset) -> bool {
        a.is_subset(b)
    }

    fn has_lower_bound(&self, family: &[Subset]) -> bool {
        let mut acc = self.unit();
        for s in family {
            acc.intersect_with(s);
        }
        !acc.is_empty()
    }

    fn compatible(&self, a: &Subset, b: &Subset) -> bool {
        a.intersects(b)
    }

    fn bound_profiles(&self, family: &[Subset]) -> Vec<Subset> {
        self.atoms
            .iter()
            .map(|atom| {
                Subset::from_indices(
                    family.len(),
                    family
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| atom.is_subset(s))
                        .map(|(j, _)| j),
                )
            })
            .collect()
    }

    fn represent(&self, family: &[Subset]) -> Result<(FieldOfSets, Vec<Subset>), AlgebraError> {
        for s in family {
            self.atom_mask(s)?;
        }
        Ok((self.clone(), family.to_vec()))
    }

    fn describe(&self, e: &Subset) -> String {
        e.to_string()
    }

    fn upward_closure(&self, b: &[Subset]) -> Vec<Subset> {
        let masks: Vec<u64> = b.iter().filter_map(|s| self.atom_mask(s).ok()).collect();
        (1..self.member_count())
            .filter(|m| masks.iter().any(|&x| x & m == x))
            .map(|m| self.member_from_mask(m))
            .collect()
    }
}

/// Closure in the downward topology: `{q : some r in A has r <= q}`.
pub fn ro_closure(p: &FinitePoset, a: &Subset) -> Subset {
    Subset::from_indices(p.len(), p.upward_closure(&a.to_vec()))
}

/// Interior in the downward topology: `{q : every r <= q lies in A}`.
pub fn ro_interior(p: &FinitePoset, a: &Subset) -> Subset {
    Subset::from_indices(p.len(), (0..p.len()).filter(|&q| p.below(q).is_subset(a)))
}

/// `int(cl(A))`.
pub fn regularize(p: &FinitePoset, a: &Subset) -> Subset {
    ro_interior(p, &ro_closure(p, a))
}

pub fn is_regular_open(p: &FinitePoset, a: &Subset) -> bool {
    regularize(p, a) == *a
}

/// The regular-open algebra of a finite poset together with the canonical
/// map `p ↦ ro(↓p)`.
///
/// The field is realized over the minimal elements of the poset: a regular
/// open set `U` corresponds to `U ∩ Min(P)`, and its atoms are the classes
/// of equivalent minimal elements.
#[derive(Debug, Clone)]
pub struct RoCompletion {
    pub field: FieldOfSets,
    /// `points[k]` is the poset element standing for ground point `k`.
    pub points: Vec<usize>,
    pub embedding: EmbeddingMap,
}

impl RoCompletion {
    /// The regular open subset of the poset represented by a member.
    pub fn regular_open(&self, member: &Subset) -> Subset {
        let p = self.embedding.source();
        let mins = Subset::from_indices(p.len(), member.iter().map(|k| self.points[k]));
        regularize(p, &mins)
    }

    /// Inverse of [`regular_open`](Self::regular_open).
    pub fn member_of(&self, u: &Subset) -> Result<Subset, AlgebraError> {
        let p = self.embedding.source();
        if u.universe() != p.len() {
            return Err(AlgebraError::UniverseMismatch { found: u.universe(), expected: p.len() });
        }
        if !is_regular_open(p, u) {
            return Err(AlgebraError::NotAMember(u.to_string()));
        }
        let s = Subset::from_indices(
            self.points.len(),
            (0..self.points.len()).filter(|&k| u.contains(self.points[k])),
        );
        Ok(s)
    }
}

pub fn ro_completion(p: &FinitePoset) -> Result<RoCompletion, AlgebraError> {
    ro_completion_capped(p, DEFAULT_GROUND_CAP)
}

pub fn ro_completion_capped(p: &FinitePoset, cap: usize) -> Result<RoCompletion, AlgebraError> {
    let points = p.minimal_elements();
    let ground = points.len();
    let images: Vec<Subset> = (0..p.len())
        .map(|q| Subset::from_indices(ground, (0..ground).filter(|&k| p.leq(points[k], q))))
        .collect();
    let field = FieldOfSets::from_generators(ground, &images, cap)?;
    let embedding = EmbeddingMap::new(p.clone(), field.clone(), images)?;
    Ok(RoCompletion { field, points, embedding })
}

/// A map from a finite poset into a field of sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingMap {
    source: FinitePoset,
    target: FieldOfSets,
    images: Vec<Subset>,
}

impl EmbeddingMap {
    pub fn new(source: FinitePoset, target: FieldOfSets, images: Vec<Subset>) -> Result<Self, AlgebraError> {
        if images.len() != source.len() {
            return Err(AlgebraError::ArityMismatch { found: images.len(), expected: source.len() });
        }
        for s in &images {
            target.atom_mask(s)?;
        }
        Ok(EmbeddingMap { source, target, images })
    }

    /// The identity on the nonzero part of a field, with the source listed
    /// as an explicit poset.
    pub fn identity(field: &FieldOfSets) -> Result<Self, AlgebraError> {
        let (poset, members) = field.as_poset()?;
        Self::new(poset, field.clone(), members)
    }

    pub fn source(&self) -> &FinitePoset {
        &self.source
    }

    pub fn target(&self) -> &FieldOfSets {
        &self.target
    }

    pub fn image(&self, p: usize) -> &Subset {
        &self.images[p]
    }

    pub fn images(&self) -> &[Subset] {
        &self.images
    }

    /// `e[Q]`, deduplicated.
    pub fn image_of(&self, q: &[usize]) -> Vec<Subset> {
        crate::order::dedup(&q.iter().map(|&p| self.images[p].clone()).collect::<Vec<_>>())
    }

    /// `e⁻¹[R]`.
    pub fn preimage(&self, r: &[Subset]) -> Vec<usize> {
        (0..self.source.len())
            .filter(|&p| r.contains(&self.images[p]))
            .collect()
    }

    /// The image avoids `∅`.
    pub fn into_positive(&self) -> bool {
        self.images.iter().all(|s| !s.is_empty())
    }

    pub fn preserves_order(&self) -> bool {
        let n = self.source.len();
        (0..n).all(|a| {
            (0..n).all(|b| !self.source.leq(a, b) || self.images[a].is_subset(&self.images[b]))
        })
    }

    pub fn preserves_incompatibility(&self) -> bool {
        let n = self.source.len();
        (0..n).all(|a| {
            (0..n).all(|b| self.source.compatible(a, b) || self.images[a].is_disjoint(&self.images[b]))
        })
    }

    /// Some `r` such that every `r' <= r` has image meeting `b`.
    pub fn reduction(&self, b: &Subset) -> Option<usize> {
        (0..self.source.len()).find(|&r| {
            self.source
                .below(r)
                .iter()
                .all(|r2| self.images[r2].intersects(b))
        })
    }

    /// Order- and incompatibility-preserving, into the nonzero part, and
    /// every nonzero target member has a reduction.
    pub fn is_complete(&self) -> bool {
        self.into_positive()
            && self.preserves_order()
            && self.preserves_incompatibility()
            && self
                .target
                .positive_members()
                .all(|b| self.reduction(&b).is_some())
    }

    /// Order- and incompatibility-preserving with image dense in the
    /// nonzero part of the target.
    pub fn is_dense(&self) -> bool {
        self.into_positive()
            && self.preserves_order()
            && self.preserves_incompatibility()
            && self
                .target
                .positive_members()
                .all(|b| self.images.iter().any(|s| s.is_subset(&b)))
    }
}
