//! Intersection-linked families and what can be derived from them.
//!
//! A family assigns to each index `α` and each `ε` on a finite grid a set of
//! conditions `Q_{α,ε}`. It witnesses intersection-linkedness when every
//! cell has `int >= 1 - ε` and, for each `ε`, the union of the cells is
//! dense. Both clauses are checked on the grid only.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{EmbeddingMap, FieldOfSets};
use crate::intersection::{int_or_one, kelley_lower_bound, IntersectionError};
use crate::measure::{DensityVerdict, Fam, MeasureError};
use crate::order::{dedup, Forcing};
use crate::set::Subset;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkedError {
    #[error("eps grid is empty")]
    EmptyGrid,
    #[error("eps {0} is outside (0,1)")]
    EpsOutOfRange(Rational),
    #[error("eps {0} is not on the grid")]
    UnknownEps(Rational),
    #[error("index `{0}` is not in the index set")]
    UnknownIndex(String),
    #[error("index `{0}` appears twice")]
    DuplicateIndex(String),
    #[error("family does not witness intersection-linkedness ({} failures)", .0.len())]
    NotLinked(Vec<LinkFailure>),
    #[error("no grid point is below 1/{}", .m + 1)]
    NoSmallEps { m: usize },
    #[error("m must be at least 1")]
    ZeroM,
    #[error("derived set for index `{index}` is not {m}-linked")]
    NotMLinked { index: String, m: usize },
    #[error("derived sets do not cover the forcing")]
    NotCovering,
    #[error("transfer needs a {0} embedding")]
    EmbeddingKind(&'static str),
    #[error("density property fails at eps {eps} for {member}")]
    DensityFails { eps: Rational, member: Subset },
    #[error(transparent)]
    Intersection(#[from] IntersectionError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// `⟨Q_{α,ε}⟩` over a finite index set and a finite `ε` grid.
///
/// Cells not present in the map are empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedFamily<E> {
    index_set: Vec<String>,
    eps_grid: Vec<Rational>,
    /// Keyed by (position in `index_set`, position in `eps_grid`); each
    /// value is sorted and deduplicated.
    cells: BTreeMap<(usize, usize), Vec<E>>,
}

impl<E: Clone + Ord> LinkedFamily<E> {
    /// Builds a family from cells keyed by index label and `ε`. The grid is
    /// sorted and deduplicated.
    pub fn new(
        index_set: Vec<String>,
        eps_grid: Vec<Rational>,
        cells: impl IntoIterator<Item = (String, Rational, Vec<E>)>,
    ) -> Result<Self, LinkedError> {
        let eps_grid = dedup(&eps_grid);
        if eps_grid.is_empty() {
            return Err(LinkedError::EmptyGrid);
        }
        if let Some(e) = eps_grid.iter().find(|e| **e <= Rational::zero() || **e >= Rational::one()) {
            return Err(LinkedError::EpsOutOfRange(e.clone()));
        }
        let mut seen = BTreeSet::new();
        for i in &index_set {
            if !seen.insert(i) {
                return Err(LinkedError::DuplicateIndex(i.clone()));
            }
        }
        let mut map: BTreeMap<(usize, usize), Vec<E>> = BTreeMap::new();
        for (idx, eps, elems) in cells {
            let i = index_set
                .iter()
                .position(|x| *x == idx)
                .ok_or_else(|| LinkedError::UnknownIndex(idx.clone()))?;
            let e = eps_grid
                .binary_search(&eps)
                .map_err(|_| LinkedError::UnknownEps(eps.clone()))?;
            let cell = map.entry((i, e)).or_default();
            cell.extend(elems);
            *cell = dedup(cell);
        }
        Ok(LinkedFamily { index_set, eps_grid, cells: map })
    }

    /// `Q_{p,ε} = {p}` for every condition `p`.
    pub fn singletons<F: Forcing<Elem = E>>(f: &F, eps_grid: Vec<Rational>) -> Result<Self, LinkedError> {
        let conds = f.conditions();
        let index_set = conds.iter().map(|p| f.describe(p)).collect();
        let cells = conds
            .iter()
            .flat_map(|p| eps_grid.iter().map(move |e| (f.describe(p), e.clone(), vec![p.clone()])))
            .collect::<Vec<_>>();
        Self::new(index_set, eps_grid, cells)
    }

    /// `Q_{α,ε} = Q_α` for a cover `⟨Q_α⟩`, labelled by position.
    pub fn constant(cover: Vec<Vec<E>>, eps_grid: Vec<Rational>) -> Result<Self, LinkedError> {
        let index_set: Vec<String> = (0..cover.len()).map(|i| i.to_string()).collect();
        let cells = cover
            .iter()
            .enumerate()
            .flat_map(|(i, q)| eps_grid.iter().map(move |e| (i.to_string(), e.clone(), q.clone())))
            .collect::<Vec<_>>();
        Self::new(index_set, eps_grid, cells)
    }

    pub fn index_set(&self) -> &[String] {
        &self.index_set
    }

    pub fn eps_grid(&self) -> &[Rational] {
        &self.eps_grid
    }

    /// The cell at (index position, grid position).
    pub fn cell(&self, index: usize, eps: usize) -> &[E] {
        self.cells.get(&(index, eps)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Nonempty cells as (index label, `ε`, members).
    pub fn cells(&self) -> impl Iterator<Item = (&str, &Rational, &[E])> + '_ {
        self.cells
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|((i, e), v)| (self.index_set[*i].as_str(), &self.eps_grid[*e], v.as_slice()))
    }

    /// Union of the cells at grid position `eps`.
    pub fn union_at(&self, eps: usize) -> Vec<E> {
        let all: Vec<E> = (0..self.index_set.len())
            .flat_map(|i| self.cell(i, eps).iter().cloned())
            .collect();
        dedup(&all)
    }

    /// Applies `g` to every cell, keeping labels and grid.
    pub fn map_cells<T: Clone + Ord>(&self, mut g: impl FnMut(&[E]) -> Vec<T>) -> LinkedFamily<T> {
        let cells = self
            .cells
            .iter()
            .map(|(k, v)| (*k, dedup(&g(v))))
            .collect();
        LinkedFamily { index_set: self.index_set.clone(), eps_grid: self.eps_grid.clone(), cells }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkFailure {
    /// `int(Q_{α,ε}) < 1 - ε`.
    LowIntersection { index: String, eps: Rational, value: Rational },
    /// No cell at `eps` has a member below `element`.
    NotDense { eps: Rational, element: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedVerdict {
    pub cells_checked: usize,
    pub failures: Vec<LinkFailure>,
}

impl LinkedVerdict {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks both clauses for every index and every grid point. Empty cells
/// count as having intersection number 1.
pub fn verify_intersection_linked<F: Forcing>(
    f: &F,
    fam: &LinkedFamily<F::Elem>,
) -> Result<LinkedVerdict, LinkedError> {
    let mut failures = Vec::new();
    let mut cells_checked = 0;
    let conds = f.conditions();
    for (e, eps) in fam.eps_grid.iter().enumerate() {
        let need = Rational::one() - eps;
        for (i, index) in fam.index_set.iter().enumerate() {
            let cell = fam.cell(i, e);
            cells_checked += 1;
            let value = int_or_one(f, cell)?;
            if value < need {
                failures.push(LinkFailure::LowIntersection { index: index.clone(), eps: eps.clone(), value });
            }
        }
        let union = fam.union_at(e);
        for p in &conds {
            if !union.iter().any(|q| f.leq(q, p)) {
                failures.push(LinkFailure::NotDense { eps: eps.clone(), element: f.describe(p) });
            }
        }
    }
    Ok(LinkedVerdict { cells_checked, failures })
}

/// Closes every cell upward; the verdict of
/// [`verify_intersection_linked`] does not change.
pub fn upward_close_family<F: Forcing>(f: &F, fam: &LinkedFamily<F::Elem>) -> LinkedFamily<F::Elem> {
    fam.map_cells(|cell| f.upward_closure(cell))
}

/// A cover of the forcing by `m`-linked sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MLinkedCover<E> {
    pub m: usize,
    /// The grid point the cover was read off.
    pub eps: Rational,
    /// (index label, upward-closed `m`-linked set).
    pub sets: Vec<(String, Vec<E>)>,
}

/// Reads an `m`-linked cover off a verified family: the upward closures of
/// the cells at the largest grid `ε` below `1/(m+1)`.
pub fn derive_m_linked_cover<F: Forcing>(
    f: &F,
    fam: &LinkedFamily<F::Elem>,
    m: usize,
) -> Result<MLinkedCover<F::Elem>, LinkedError> {
    if m == 0 {
        return Err(LinkedError::ZeroM);
    }
    let bound = Rational::new(1.into(), (m as i64 + 1).into());
    let e = fam
        .eps_grid
        .iter()
        .rposition(|eps| *eps < bound)
        .ok_or(LinkedError::NoSmallEps { m })?;
    let verdict = verify_intersection_linked(f, fam)?;
    if !verdict.holds() {
        return Err(LinkedError::NotLinked(verdict.failures));
    }
    let mut sets = Vec::new();
    for (i, index) in fam.index_set.iter().enumerate() {
        let cell = fam.cell(i, e);
        if cell.is_empty() {
            continue;
        }
        let closed = f.upward_closure(cell);
        if !f.is_m_linked(&closed, m) {
            return Err(LinkedError::NotMLinked { index: index.clone(), m });
        }
        sets.push((index.clone(), closed));
    }
    let covered: BTreeSet<&F::Elem> = sets.iter().flat_map(|(_, s)| s.iter()).collect();
    if f.conditions().iter().any(|p| !covered.contains(p)) {
        return Err(LinkedError::NotCovering);
    }
    Ok(MLinkedCover { m, eps: fam.eps_grid[e].clone(), sets })
}

/// Pushes a family on the source poset along a dense embedding.
pub fn transfer_forward(e: &EmbeddingMap, fam: &LinkedFamily<usize>) -> Result<LinkedFamily<Subset>, LinkedError> {
    if !e.is_dense() {
        return Err(LinkedError::EmbeddingKind("dense"));
    }
    Ok(fam.map_cells(|cell| e.image_of(cell)))
}

/// Pulls a family on the target field back along a complete embedding.
/// Target cells are closed upward first so the preimages cover the source.
pub fn transfer_backward(e: &EmbeddingMap, fam: &LinkedFamily<Subset>) -> Result<LinkedFamily<usize>, LinkedError> {
    if !e.is_complete() {
        return Err(LinkedError::EmbeddingKind("complete"));
    }
    let target = e.target();
    Ok(fam.map_cells(|cell| e.preimage(&target.upward_closure(cell))))
}

/// `Q_{s,ε} = {b ∈ B⁺ : m_s(b) >= 1 - ε}` for `s` in `s_family` and `ε` on
/// the grid, after checking the density property of `m` with `s_family`.
/// Every cell is then confirmed by the exact intersection number.
pub fn density_to_linked_family(
    m: &Fam,
    s_family: &[Subset],
    eps_grid: Vec<Rational>,
) -> Result<LinkedFamily<Subset>, LinkedError> {
    let b: &FieldOfSets = m.algebra();
    if let DensityVerdict::Fails { eps, member } = m.density_property_check(s_family, &eps_grid)? {
        return Err(LinkedError::DensityFails { eps, member });
    }
    let s_family = dedup(s_family);
    let index_set = s_family.iter().map(|s| s.to_string()).collect();
    let mut cells = Vec::new();
    for s in &s_family {
        let relative = m.relative_measure(s)?;
        for eps in &eps_grid {
            let bound = kelley_lower_bound(b, &relative, Rational::one() - eps)?;
            cells.push((s.to_string(), eps.clone(), bound.family));
        }
    }
    let fam = LinkedFamily::new(index_set, eps_grid, cells)?;
    let verdict = verify_intersection_linked(b, &fam)?;
    if !verdict.holds() {
        return Err(LinkedError::NotLinked(verdict.failures));
    }
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ro_completion;
    use crate::order::FinitePoset;
    use crate::ratio;

    fn grid() -> Vec<Rational> {
        vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)]
    }

    fn v_poset() -> FinitePoset {
        FinitePoset::from_labeled_relation(&["p", "q", "r", "s"], &[("r", "p"), ("r", "q"), ("s", "q")]).unwrap()
    }

    #[test]
    fn singleton_family_is_linked() {
        let p = v_poset();
        let fam = LinkedFamily::singletons(&p, grid()).unwrap();
        let verdict = verify_intersection_linked(&p, &fam).unwrap();
        assert!(verdict.holds());
        assert_eq!(verdict.cells_checked, 12);
    }

    #[test]
    fn centered_cover_is_linked() {
        let p = v_poset();
        let fam = LinkedFamily::constant(vec![vec![0, 1, 2], vec![1, 3]], grid()).unwrap();
        assert!(verify_intersection_linked(&p, &fam).unwrap().holds());
        let cover = derive_m_linked_cover(&p, &fam, 2).unwrap();
        assert_eq!(cover.eps, ratio(1, 4));
        assert_eq!(cover.sets[0].1, vec![0, 1, 2]);
        assert_eq!(cover.sets[1].1, vec![1, 3]);
    }

    #[test]
    fn antichain_cell_reported() {
        let a = FinitePoset::antichain(3);
        let fam = LinkedFamily::constant(vec![vec![0, 1, 2]], vec![ratio(1, 4)]).unwrap();
        let verdict = verify_intersection_linked(&a, &fam).unwrap();
        assert_eq!(
            verdict.failures,
            vec![LinkFailure::LowIntersection { index: "0".into(), eps: ratio(1, 4), value: ratio(1, 3) }]
        );
    }

    #[test]
    fn missing_density_reported() {
        let p = v_poset();
        let fam = LinkedFamily::constant(vec![vec![2]], vec![ratio(1, 2)]).unwrap();
        let verdict = verify_intersection_linked(&p, &fam).unwrap();
        let missing: Vec<_> = verdict
            .failures
            .iter()
            .filter_map(|f| match f {
                LinkFailure::NotDense { element, .. } => Some(element.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(missing, ["s"]);
    }

    #[test]
    fn upward_closure_keeps_verdict() {
        let p = v_poset();
        let fam = LinkedFamily::singletons(&p, grid()).unwrap();
        let closed = upward_close_family(&p, &fam);
        assert!(verify_intersection_linked(&p, &closed).unwrap().holds());
        assert_eq!(closed.union_at(0), vec![0, 1, 2, 3]);
        let r = p.index_of("r").unwrap();
        assert_eq!(closed.cell(r, 1), &[0, 1, 2]);
        assert_eq!(upward_close_family(&p, &closed), closed);
    }

    #[test]
    fn m_linked_cover_from_singletons() {
        let p = v_poset();
        let fam = LinkedFamily::singletons(&p, grid()).unwrap();
        let cover = derive_m_linked_cover(&p, &fam, 2).unwrap();
        assert_eq!(cover.eps, ratio(1, 4));
        for (_, set) in &cover.sets {
            assert!(p.is_m_linked(set, 2));
        }
        let coarse = LinkedFamily::singletons(&p, vec![ratio(1, 2)]).unwrap();
        assert_eq!(derive_m_linked_cover(&p, &coarse, 3), Err(LinkedError::NoSmallEps { m: 3 }));
    }

    #[test]
    fn transfer_through_completion() {
        let p = v_poset();
        let c = ro_completion(&p).unwrap();
        let fam = LinkedFamily::singletons(&p, grid()).unwrap();
        let forward = transfer_forward(&c.embedding, &fam).unwrap();
        assert!(verify_intersection_linked(&c.field, &forward).unwrap().holds());
        let back = transfer_backward(&c.embedding, &forward).unwrap();
        assert!(verify_intersection_linked(&p, &back).unwrap().holds());

        let field_fam = LinkedFamily::singletons(&c.field, grid()).unwrap();
        let pulled = transfer_backward(&c.embedding, &field_fam).unwrap();
        assert!(verify_intersection_linked(&p, &pulled).unwrap().holds());
    }

    #[test]
    fn backward_through_identity_is_same_family() {
        let b = FieldOfSets::powerset(2).unwrap();
        let id = EmbeddingMap::identity(&b).unwrap();
        let fam = LinkedFamily::constant(vec![b.positive_members().collect()], vec![ratio(1, 2)]).unwrap();
        let back = transfer_backward(&id, &fam).unwrap();
        assert_eq!(back.cell(0, 0), &[0, 1, 2]);
    }

    #[test]
    fn transfer_rejects_wrong_kind() {
        let b = FieldOfSets::powerset(2).unwrap();
        let t = FieldOfSets::trivial(2).unwrap();
        let (src, _) = t.as_poset().unwrap();
        let e = EmbeddingMap::new(src, b, vec![Subset::full(2)]).unwrap();
        let fam = LinkedFamily::singletons(e.source(), vec![ratio(1, 2)]).unwrap();
        assert_eq!(transfer_forward(&e, &fam), Err(LinkedError::EmbeddingKind("dense")));
    }

    #[test]
    fn density_construction() {
        let b = FieldOfSets::powerset(3).unwrap();
        let m = Fam::counting(&b);
        let atoms = b.atoms().to_vec();
        let fam = density_to_linked_family(&m, &atoms, vec![ratio(1, 2)]).unwrap();
        // With an atom s, the relative measure is a point mass: the cell is the cone above s.
        assert_eq!(fam.cell(0, 0).len(), 4);

        let mut all: Vec<Subset> = b.positive_members().collect();
        all.sort();
        let fam = density_to_linked_family(&m, &all, grid()).unwrap();
        for (i, s) in all.iter().enumerate() {
            assert!(fam.cell(i, 0).contains(s));
        }
        assert_eq!(fam.union_at(0).len(), 7);

        let unit = vec![b.unit()];
        assert!(matches!(
            density_to_linked_family(&m, &unit, vec![ratio(1, 4)]),
            Err(LinkedError::DensityFails { .. })
        ));
    }

    #[test]
    fn constructor_errors() {
        let e = LinkedFamily::<usize>::new(vec!["a".into()], vec![], vec![]);
        assert_eq!(e, Err(LinkedError::EmptyGrid));
        let e = LinkedFamily::<usize>::new(vec!["a".into()], vec![ratio(1, 1)], vec![]);
        assert_eq!(e, Err(LinkedError::EpsOutOfRange(ratio(1, 1))));
        let e = LinkedFamily::new(vec!["a".into()], vec![ratio(1, 2)], vec![("b".into(), ratio(1, 2), vec![0])]);
        assert_eq!(e, Err(LinkedError::UnknownIndex("b".into())));
        let e = LinkedFamily::new(vec!["a".into()], vec![ratio(1, 2)], vec![("a".into(), ratio(1, 3), vec![0])]);
        assert_eq!(e, Err(LinkedError::UnknownEps(ratio(1, 3))));
    }
}
