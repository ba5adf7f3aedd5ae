//! Line-oriented input documents. Blank lines and `#` comments are skipped;
//! every other line starts with a keyword naming its kind.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use intnum::algebra::{AlgebraError, FieldOfSets};
use intnum::etree::{CustomProfile, ECondition, EtreeError, GrowthProfile, LevelSpec, NodePath, SuccessorSet};
use intnum::measure::{Fam, MeasureError};
use intnum::order::{FinitePoset, OrderError};
use intnum::set::Subset;
use intnum::{BigInt, BigUint, Rational};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn perr(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, msg: msg.into() }
}

/// Failures while turning a parsed document into a library object.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Etree(#[from] EtreeError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Poset,
    Field,
    Measure,
    Family,
    Profile,
    Condition,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Poset => "POSET",
            Kind::Field => "FIELD",
            Kind::Measure => "MEASURE",
            Kind::Family => "FAMILY",
            Kind::Profile => "PROFILE",
            Kind::Condition => "CONDITION",
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then(|| (i + 1, body.split_whitespace().collect()))
    })
}

/// The document kind, read off the keywords present.
pub fn detect_kind(text: &str) -> Result<Kind, ParseError> {
    let mut kind = None;
    for (line, words) in content_lines(text) {
        let k = match words[0] {
            "elem" | "le" => Kind::Poset,
            "ground" | "set" => Kind::Field,
            "atomweight" => Kind::Measure,
            "cell" => Kind::Family,
            "level" | "profile" => Kind::Profile,
            "trunk" | "node" | "frontier" => Kind::Condition,
            other => return Err(perr(line, format!("unknown keyword `{other}`"))),
        };
        kind = match (kind, k) {
            (None, k) => Some(k),
            (Some(a), b) if a == b => Some(a),
            (Some(Kind::Profile), Kind::Condition) | (Some(Kind::Condition), Kind::Profile) => Some(Kind::Condition),
            (Some(a), b) => {
                return Err(perr(line, format!("{} line in a {} document", b.name(), a.name())));
            }
        };
    }
    kind.ok_or_else(|| perr(0, "empty document"))
}

fn arity(line: usize, words: &[&str], n: usize) -> Result<(), ParseError> {
    if words.len() != n {
        return Err(perr(line, format!("`{}` takes {} argument(s)", words[0], n - 1)));
    }
    Ok(())
}

/// `p/q` with `q > 0`, or an integer.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("bad numerator in `{s}`"))?;
    let d: BigInt = d.parse().map_err(|_| format!("bad denominator in `{s}`"))?;
    if !d.is_positive() {
        return Err(format!("denominator of `{s}` must be positive"));
    }
    Ok(Rational::new(n, d))
}

/// Always `p/q`, so the output parses back.
pub fn show_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Comma-separated list; the empty string is the empty list.
fn split_list(s: &str) -> Vec<&str> {
    if s.is_empty() {
        Vec::new()
    } else {
        s.split(',').collect()
    }
}

fn parse_usize_list(line: usize, s: &str) -> Result<Vec<usize>, ParseError> {
    split_list(s)
        .into_iter()
        .map(|x| x.parse().map_err(|_| perr(line, format!("`{x}` is not a point"))))
        .collect()
}

fn parse_big_list(line: usize, s: &str) -> Result<Vec<BigUint>, ParseError> {
    split_list(s)
        .into_iter()
        .map(|x| x.parse().map_err(|_| perr(line, format!("`{x}` is not a natural number"))))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// `i/j/k`, or `-` for the empty path.
pub fn parse_path(line: usize, s: &str) -> Result<NodePath, ParseError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split('/')
        .map(|x| x.parse().map_err(|_| perr(line, format!("`{x}` is not a child index"))))
        .collect()
}

fn check_kind(text: &str, want: Kind) -> Result<(), ParseError> {
    let got = detect_kind(text)?;
    if got != want {
        return Err(perr(0, format!("expected a {} document, found {}", want.name(), got.name())));
    }
    Ok(())
}

/// `elem a` and `le a b` lines; `le` is closed reflexively and transitively
/// when the poset is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetDoc {
    pub elems: Vec<String>,
    pub le: Vec<(String, String)>,
}

impl PosetDoc {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        check_kind(text, Kind::Poset)?;
        let mut doc = PosetDoc { elems: Vec::new(), le: Vec::new() };
        for (line, w) in content_lines(text) {
            match w[0] {
                "elem" => {
                    arity(line, &w, 2)?;
                    if doc.elems.iter().any(|e| e == w[1]) {
                        return Err(perr(line, format!("duplicate element `{}`", w[1])));
                    }
                    doc.elems.push(w[1].to_string());
                }
                _ => {
                    arity(line, &w, 3)?;
                    doc.le.push((w[1].to_string(), w[2].to_string()));
                }
            }
        }
        Ok(doc)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for e in &self.elems {
            writeln!(out, "elem {e}").unwrap();
        }
        for (a, b) in &self.le {
            writeln!(out, "le {a} {b}").unwrap();
        }
        out
    }

    pub fn build(&self) -> Result<FinitePoset, BuildError> {
        let labels: Vec<&str> = self.elems.iter().map(String::as_str).collect();
        let pairs: Vec<(&str, &str)> = self.le.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Ok(FinitePoset::from_labeled_relation(&labels, &pairs)?)
    }
}

/// `ground 0..n` (half-open) and named generating sets `set S a,b,c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDoc {
    pub ground: usize,
    pub sets: Vec<(String, Vec<usize>)>,
}

impl FieldDoc {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        check_kind(text, Kind::Field)?;
        let mut ground = None;
        let mut sets: Vec<(String, Vec<usize>)> = Vec::new();
        for (line, w) in content_lines(text) {
            match w[0] {
                "ground" => {
                    arity(line, &w, 2)?;
                    if ground.is_some() {
                        return Err(perr(line, "second `ground` line"));
                    }
                    let n = w[1]
                        .strip_prefix("0..")
                        .and_then(|n| n.parse::<usize>().ok())
                        .ok_or_else(|| perr(line, "expected `ground 0..n`"))?;
                    ground = Some(n);
                }
                _ => {
                    if !(2..=3).contains(&w.len()) {
                        return Err(perr(line, "expected `set NAME a,b,c`"));
                    }
                    if sets.iter().any(|(n, _)| n == w[1]) {
                        return Err(perr(line, format!("duplicate set `{}`", w[1])));
                    }
                    let points = parse_usize_list(line, w.get(2).copied().unwrap_or(""))?;
                    sets.push((w[1].to_string(), points));
                }
            }
        }
        let ground = ground.ok_or_else(|| perr(0, "missing `ground 0..n` line"))?;
        Ok(FieldDoc { ground, sets })
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("ground 0..{}\n", self.ground);
        for (name, points) in &self.sets {
            if points.is_empty() {
                writeln!(out, "set {name}").unwrap();
            } else {
                writeln!(out, "set {name} {}", join(points)).unwrap();
            }
        }
        out
    }

    /// The field generated by the named sets, and the sets as members.
    pub fn build(&self, cap: usize) -> Result<(FieldOfSets, Vec<(String, Subset)>), BuildError> {
        let gens: Vec<Vec<usize>> = self.sets.iter().map(|(_, s)| s.clone()).collect();
        let field = FieldOfSets::generate_capped(self.ground, &gens, cap)?;
        let named = self
            .sets
            .iter()
            .map(|(n, s)| (n.clone(), Subset::from_indices(self.ground, s.iter().copied())))
            .collect();
        Ok((field, named))
    }
}

/// `atomweight a,b p/q`: the atom is named by its points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureDoc {
    pub weights: Vec<(Vec<usize>, Rational)>,
}

impl MeasureDoc {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        check_kind(text, Kind::Measure)?;
        let mut weights = Vec::new();
        for (line, w) in content_lines(text) {
            arity(line, &w, 3)?;
            let mut atom = parse_usize_list(line, w[1])?;
            atom.sort_unstable();
            atom.dedup();
            if atom.is_empty() {
                return Err(perr(line, "atom has no points"));
            }
            let r = parse_rational(w[2]).map_err(|m| perr(line, m))?;
            weights.push((atom, r));
        }
        Ok(MeasureDoc { weights })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (atom, r) in &self.weights {
            writeln!(out, "atomweight {} {}", join(atom), show_rational(r)).unwrap();
        }
        out
    }

    /// Weights are matched to the atoms of `field`; every atom needs one.
    pub fn build(&self, field: &FieldOfSets) -> Result<Fam, BuildError> {
        let mut by_atom: Vec<Option<Rational>> = vec![None; field.atom_count()];
        for (points, r) in &self.weights {
            let s = field.subset(points)?;
            let k = field
                .atoms()
                .iter()
                .position(|a| *a == s)
                .ok_or_else(|| BuildError::Invalid(format!("{s} is not an atom of the field")))?;
            if by_atom[k].replace(r.clone()).is_some() {
                return Err(BuildError::Invalid(format!("atom {s} weighted twice")));
            }
        }
        let weights = by_atom
            .into_iter()
            .zip(field.atoms())
            .map(|(w, a)| w.ok_or_else(|| BuildError::Invalid(format!("atom {a} has no weight"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Fam::new(field.clone(), weights)?)
    }
}

/// `cell idx eps e1,e2,...`; elements are poset labels or field set names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyDoc {
    pub cells: Vec<(String, Rational, Vec<String>)>,
}

impl FamilyDoc {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        check_kind(text, Kind::Family)?;
        let mut cells = Vec::new();
        for (line, w) in content_lines(text) {
            if !(3..=4).contains(&w.len()) {
                return Err(perr(line, "expected `cell idx eps e1,e2,...`"));
            }
            let eps = parse_rational(w[2]).map_err(|m| perr(line, m))?;
            let elems = split_list(w.get(3).copied().unwrap_or("")).into_iter().map(String::from).collect();
            cells.push((w[1].to_string(), eps, elems));
        }
        Ok(FamilyDoc { cells })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (idx, eps, elems) in &self.cells {
            let eps = show_rational(eps);
            if elems.is_empty() {
                writeln!(out, "cell {idx} {eps}").unwrap();
            } else {
                writeln!(out, "cell {idx} {eps} {}", elems.join(",")).unwrap();
            }
        }
        out
    }

    /// Index labels in order of first appearance.
    pub fn index_set(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (idx, _, _) in &self.cells {
            if !out.contains(idx) {
                out.push(idx.clone());
            }
        }
        out
    }

    pub fn eps_grid(&self) -> Vec<Rational> {
        self.cells.iter().map(|(_, e, _)| e.clone()).collect()
    }
}

/// `profile paper`, or `level h M=<int> a=<int>` lines with an optional
/// `level * M=<int> a=<int>` tail repeated above the listed levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileDoc {
    Paper,
    Custom { levels: Vec<(BigUint, BigUint)>, tail: Option<(BigUint, BigUint)> },
}

impl ProfileDoc {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        check_kind(text, Kind::Profile)?;
        Self::parse_lines(text)
    }

    /// Reads only `profile`/`level` lines, ignoring the rest.
    fn parse_lines(text: &str) -> Result<Self, ParseError> {
        let mut paper = false;
        let mut levels: BTreeMap<usize, (BigUint, BigUint)> = BTreeMap::new();
        let mut tail = None;
        for (line, w) in content_lines(text) {
            match w[0] {
                "profile" => {
                    arity(line, &w, 2)?;
                    if w[1] != "paper" {
                        return Err(perr(line, format!("unknown profile `{}`", w[1])));
                    }
                    paper = true;
                }
                "level" => {
                    arity(line, &w, 4)?;
                    let m = w[2].strip_prefix("M=").ok_or_else(|| perr(line, "expected `M=<int>`"))?;
                    let a = w[3].strip_prefix("a=").ok_or_else(|| perr(line, "expected `a=<int>`"))?;
                    let m: BigUint = m.parse().map_err(|_| perr(line, format!("bad M `{m}`")))?;
                    let a: BigUint = a.parse().map_err(|_| perr(line, format!("bad a `{a}`")))?;
                    if w[1] == "*" {
                        if tail.replace((m, a)).is_some() {
                            return Err(perr(line, "second tail level"));
                        }
                    } else {
                        let h: usize = w[1].parse().map_err(|_| perr(line, format!("bad level `{}`", w[1])))?;
                        if levels.insert(h, (m, a)).is_some() {
                            return Err(perr(line, format!("level {h} given twice")));
                        }
                    }
                }
                _ => {}
            }
        }
        match (paper, levels.is_empty() && tail.is_none()) {
            (true, true) => Ok(ProfileDoc::Paper),
            (true, false) => Err(perr(0, "`profile paper` cannot be mixed with `level` lines")),
            (false, true) => Err(perr(0, "no profile given")),
            (false, false) => {
                if let Some((i, _)) = levels.keys().enumerate().find(|(i, h)| i != *h) {
                    return Err(perr(0, format!("level {i} missing")));
                }
                Ok(ProfileDoc::Custom { levels: levels.into_values().collect(), tail })
            }
        }
    }

    pub fn serialize(&self) -> String {
        match self {
            ProfileDoc::Paper => "profile paper\n".into(),
            ProfileDoc::Custom { levels, tail } => {
                let mut out = String::new();
                for (h, (m, a)) in levels.iter().enumerate() {
                    writeln!(out, "level {h} M={m} a={a}").unwrap();
                }
                if let Some((m, a)) = tail {
                    writeln!(out, "level * M={m} a={a}").unwrap();
                }
                out
            }
        }
    }

    pub fn build(&self) -> Result<GrowthProfile, BuildError> {
        match self {
            ProfileDoc::Paper => Ok(GrowthProfile::Paper),
            ProfileDoc::Custom { levels, tail } => {
                let spec = |(m, a): &(BigUint, BigUint)| LevelSpec::new(m.clone(), a.clone());
                let levels = levels.iter().map(spec).collect();
                Ok(GrowthProfile::Custom(CustomProfile::new(levels, tail.as_ref().map(spec))?))
            }
        }
    }
}

/// A profile followed by `trunk i/j/k` (or `-`), `node i/j keep=...` lines
/// and an optional `frontier d`. Without `frontier`, the depth is one below
/// the deepest recorded node, or the trunk length when there is none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionDoc {
    pub profile: ProfileDoc,
    pub trunk: NodePath,
    pub nodes: Vec<(NodePath, SuccessorSet)>,
    pub frontier: Option<usize>,
}

fn parse_keep(line: usize, s: &str) -> Result<SuccessorSet, ParseError> {
    let spec = s.strip_prefix("keep=").ok_or_else(|| perr(line, "expected `keep=...`"))?;
    if let Some(list) = spec.strip_prefix("explicit:") {
        let mut v = parse_big_list(line, list)?;
        v.sort();
        v.dedup();
        return Ok(SuccessorSet::Explicit(v));
    }
    if let Some(list) = spec.strip_prefix("cofinite:excl=") {
        let mut v = parse_big_list(line, list)?;
        v.sort();
        v.dedup();
        // The total is filled in from the profile when the condition is built.
        return Ok(SuccessorSet::Cofinite { total: BigUint::zero(), excluded: v });
    }
    Err(perr(line, "expected `keep=explicit:...` or `keep=cofinite:excl=...`"))
}

fn show_keep(s: &SuccessorSet) -> String {
    match s {
        SuccessorSet::Explicit(v) => format!("keep=explicit:{}", join(v)),
        SuccessorSet::Cofinite { excluded, .. } => format!("keep=cofinite:excl={}", join(excluded)),
    }
}

impl ConditionDoc {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        check_kind(text, Kind::Condition)?;
        let profile = ProfileDoc::parse_lines(text)?;
        let mut trunk = None;
        let mut nodes = Vec::new();
        let mut frontier = None;
        for (line, w) in content_lines(text) {
            match w[0] {
                "trunk" => {
                    arity(line, &w, 2)?;
                    if trunk.replace(parse_path(line, w[1])?).is_some() {
                        return Err(perr(line, "second `trunk` line"));
                    }
                }
                "node" => {
                    arity(line, &w, 3)?;
                    nodes.push((parse_path(line, w[1])?, parse_keep(line, w[2])?));
                }
                "frontier" => {
                    arity(line, &w, 2)?;
                    let d = w[1].parse().map_err(|_| perr(line, format!("bad depth `{}`", w[1])))?;
                    if frontier.replace(d).is_some() {
                        return Err(perr(line, "second `frontier` line"));
                    }
                }
                _ => {}
            }
        }
        let trunk = trunk.ok_or_else(|| perr(0, "missing `trunk` line"))?;
        Ok(ConditionDoc { profile, trunk, nodes, frontier })
    }

    pub fn serialize(&self) -> String {
        let mut out = self.profile.serialize();
        writeln!(out, "trunk {}", intnum::etree::show_path(&self.trunk)).unwrap();
        for (path, keep) in &self.nodes {
            writeln!(out, "node {} {}", intnum::etree::show_path(path), show_keep(keep)).unwrap();
        }
        if let Some(d) = self.frontier {
            writeln!(out, "frontier {d}").unwrap();
        }
        out
    }

    pub fn build(&self) -> Result<ECondition, BuildError> {
        let profile = self.profile.build()?;
        let mut nodes = BTreeMap::new();
        for (path, keep) in &self.nodes {
            let keep = match keep {
                SuccessorSet::Cofinite { excluded, .. } => {
                    SuccessorSet::Cofinite { total: profile.branching(path.len())?, excluded: excluded.clone() }
                }
                explicit => explicit.clone(),
            };
            if nodes.insert(path.clone(), keep).is_some() {
                return Err(BuildError::Invalid(format!("node {} given twice", intnum::etree::show_path(path))));
            }
        }
        let deepest = nodes.keys().map(|p: &NodePath| p.len() + 1).max().unwrap_or(0);
        let frontier = self.frontier.unwrap_or(deepest.max(self.trunk.len()));
        Ok(ECondition::new(profile, self.trunk.clone(), nodes, frontier)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_are_detected() {
        assert_eq!(detect_kind("elem a\nle a b\n").unwrap(), Kind::Poset);
        assert_eq!(detect_kind("# c\nground 0..3\n").unwrap(), Kind::Field);
        assert_eq!(detect_kind("level 0 M=4 a=2\ntrunk -\n").unwrap(), Kind::Condition);
        assert!(detect_kind("elem a\nground 0..2\n").is_err());
        assert!(detect_kind("bogus x\n").is_err());
        assert!(detect_kind("\n# nothing\n").is_err());
    }

    #[test]
    fn rationals_need_a_positive_denominator() {
        assert_eq!(parse_rational("2/4").unwrap(), intnum::ratio(1, 2));
        assert_eq!(parse_rational("3").unwrap(), intnum::ratio(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1/-2").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn field_document_builds_its_generated_field() {
        let doc = FieldDoc::parse("ground 0..3\nset A 0,1\nset B 1,2\nset Z\n").unwrap();
        let (field, named) = doc.build(16).unwrap();
        assert_eq!(field.atom_count(), 3);
        assert!(named[2].1.is_empty());
    }

    #[test]
    fn measure_must_cover_every_atom() {
        let (field, _) = FieldDoc::parse("ground 0..2\nset A 0\n").unwrap().build(16).unwrap();
        let ok = MeasureDoc::parse("atomweight 0 1/3\natomweight 1 2/3\n").unwrap().build(&field).unwrap();
        assert!(ok.is_probability());
        assert!(MeasureDoc::parse("atomweight 0 1/3\n").unwrap().build(&field).is_err());
        assert!(MeasureDoc::parse("atomweight 0,1 1\n").unwrap().build(&field).is_err());
    }

    #[test]
    fn condition_fills_cofinite_totals_from_the_profile() {
        let text = "level * M=8 a=2\ntrunk 0\nnode 0 keep=cofinite:excl=3\n";
        let c = ConditionDoc::parse(text).unwrap().build().unwrap();
        assert_eq!(c.frontier_depth(), 2);
        let set = &c.nodes()[&vec![BigUint::zero()]];
        assert_eq!(set.cardinality(), BigUint::from(7u8));
    }

    #[test]
    fn profile_levels_must_be_contiguous() {
        assert!(ProfileDoc::parse("level 0 M=4 a=2\nlevel 2 M=4 a=2\n").is_err());
        assert!(ProfileDoc::parse("profile paper\nlevel 0 M=4 a=2\n").is_err());
        assert_eq!(ProfileDoc::parse("profile paper\n").unwrap(), ProfileDoc::Paper);
    }
}
