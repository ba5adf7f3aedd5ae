//! Command implementations. Each returns a [`Report`] and an exit status;
//! printing is left to the caller.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use intnum::algebra::{ro_completion_capped, AlgebraError, DEFAULT_GROUND_CAP, MAX_GROUND_CAP};
use intnum::etree::{
    lemma_v50_check, norm_compare, norm_value, paper_constants, ECondition, EtreeError, GrowthProfile, NormValue,
};
use intnum::intersection::{int_exact, int_upper_bound, IntersectionCertificate, IntersectionError};
use intnum::linkedness::{
    density_to_linked_family, derive_m_linked_cover, verify_intersection_linked, LinkFailure, LinkedError,
    LinkedFamily,
};
use intnum::measure::MeasureError;
use intnum::order::{FinitePoset, Forcing};
use intnum::set::Subset;
use intnum::verify::{run_suite, Suite};
use intnum::{BigUint, Rational};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::format::{
    detect_kind, parse_rational, show_rational, BuildError, ConditionDoc, FamilyDoc, FieldDoc, Kind, MeasureDoc,
    ParseError, PosetDoc, ProfileDoc,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FALSE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SEMANTIC: u8 = 3;
pub const EXIT_GUARD: u8 = 4;

pub const MAX_GROUND_ENV: &str = "FW_MAX_GROUND";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Parse { path: String, err: ParseError },
    #[error("{0}")]
    Semantic(String),
    #[error("{0}")]
    Guard(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => EXIT_USAGE,
            CliError::Semantic(_) => EXIT_SEMANTIC,
            CliError::Guard(_) => EXIT_GUARD,
        }
    }
}

fn algebra_err(e: AlgebraError) -> CliError {
    match e {
        AlgebraError::GroundTooLarge { .. } | AlgebraError::CapTooLarge(_) | AlgebraError::TooManyMembers(_) => {
            CliError::Guard(format!("{e} (raise {MAX_GROUND_ENV}, at most {MAX_GROUND_CAP})"))
        }
        e => CliError::Semantic(e.to_string()),
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        algebra_err(e)
    }
}

impl From<EtreeError> for CliError {
    fn from(e: EtreeError) -> Self {
        match e {
            EtreeError::Unrepresentable { .. } | EtreeError::ExponentTooLarge(_) => CliError::Guard(e.to_string()),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Algebra(a) => algebra_err(a),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

impl From<IntersectionError> for CliError {
    fn from(e: IntersectionError) -> Self {
        match e {
            IntersectionError::Algebra(a) => algebra_err(a),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Algebra(a) => a.into(),
            BuildError::Measure(m) => m.into(),
            BuildError::Etree(t) => t.into(),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

impl From<LinkedError> for CliError {
    fn from(e: LinkedError) -> Self {
        match e {
            LinkedError::Intersection(i) => i.into(),
            LinkedError::Measure(m) => m.into(),
            e => CliError::Semantic(e.to_string()),
        }
    }
}

/// Human lines plus `key: value` fields for `--machine`.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<String>,
    pub fields: Vec<(String, String)>,
    pub status: u8,
}

impl Report {
    fn new(command: &str) -> Self {
        Report { fields: vec![("command".into(), command.into())], ..Default::default() }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn field(&mut self, k: impl Into<String>, v: impl ToString) {
        self.fields.push((k.into(), v.to_string()));
    }

    pub fn render(&self, machine: bool) -> String {
        let mut out = String::new();
        if machine {
            for (k, v) in &self.fields {
                out.push_str(&format!("{k}: {v}\n"));
            }
            out.push_str(&format!("status: {}\n", self.status));
        } else {
            for l in &self.lines {
                out.push_str(l);
                out.push('\n');
            }
        }
        out
    }
}

/// The ground-set cap, from the environment when set.
pub fn ground_cap() -> Result<usize, CliError> {
    match std::env::var(MAX_GROUND_ENV) {
        Err(_) => Ok(DEFAULT_GROUND_CAP),
        Ok(v) => {
            let cap: usize = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{MAX_GROUND_ENV}={v} is not a number")))?;
            if cap > MAX_GROUND_CAP {
                return Err(CliError::Guard(format!("{MAX_GROUND_ENV}={cap} exceeds the supported {MAX_GROUND_CAP}")));
            }
            Ok(cap)
        }
    }
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))
}

fn parsed<T>(path: &str, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|err| CliError::Parse { path: path.into(), err })
}

/// Decimal, or `2^k` for powers of two from `2^8` on. Numbers beyond 64
/// bits within 2^16 of a power of two are written `2^k-c` or `2^k+c`.
pub fn show_big(n: &BigUint) -> String {
    let bits = n.bits();
    if bits > 8 && n.count_ones() == 1 {
        return format!("2^{}", bits - 1);
    }
    if bits > 64 {
        let above = BigUint::one() << bits;
        let below = BigUint::one() << (bits - 1);
        let near = BigUint::from(1u32 << 16);
        if &above - n <= near {
            return format!("2^{bits}-{}", &above - n);
        }
        if n - &below <= near {
            return format!("2^{}+{}", bits - 1, n - &below);
        }
    }
    n.to_string()
}

/// Decimal, `b^e`, or `b^e±c`.
pub fn parse_big_expr(s: &str) -> Result<BigUint, String> {
    let bad = || format!("`{s}` is not a natural number or `b^e[+-c]`");
    let Some((base, rest)) = s.split_once('^') else {
        return s.parse().map_err(|_| bad());
    };
    let (exp, offset) = match rest.find(['+', '-']) {
        Some(i) => (&rest[..i], Some((&rest[i..i + 1], &rest[i + 1..]))),
        None => (rest, None),
    };
    let base: BigUint = base.parse().map_err(|_| bad())?;
    let exp: u32 = exp.parse().map_err(|_| bad())?;
    let mut v = base.pow(exp);
    if let Some((sign, c)) = offset {
        let c: BigUint = c.parse().map_err(|_| bad())?;
        if sign == "+" {
            v += c;
        } else if c > v {
            return Err(format!("`{s}` is negative"));
        } else {
            v -= c;
        }
    }
    Ok(v)
}

pub fn parse_eps_grid(s: &str) -> Result<Vec<Rational>, CliError> {
    s.split(',')
        .map(|x| parse_rational(x.trim()).map_err(CliError::Usage))
        .collect()
}

fn subscript(h: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    h.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

/// The named sets of a field document, resolved against `names`.
fn resolve_sets(named: &[(String, Subset)], names: &[String]) -> Result<Vec<Subset>, CliError> {
    names
        .iter()
        .map(|n| {
            named
                .iter()
                .find(|(k, _)| k == n)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| CliError::Semantic(format!("no set named `{n}`")))
        })
        .collect()
}

fn resolve_labels(p: &FinitePoset, names: &[String]) -> Result<Vec<usize>, CliError> {
    p.indices_of(names).map_err(|e| CliError::Semantic(e.to_string()))
}

fn int_report<E>(
    cert: &IntersectionCertificate<E>,
    show_atom: impl Fn(&Subset) -> String,
    show_elem: impl Fn(&E) -> String,
) -> Report {
    let mut r = Report::new("int");
    r.line(format!("int = {}", cert.value));
    r.field("value", show_rational(&cert.value));
    r.line("primal witness (measure on atoms):");
    let atoms: Vec<String> = cert.primal_witness.algebra().atoms().iter().map(&show_atom).collect();
    for (a, w) in atoms.iter().zip(cert.primal_witness.weights()) {
        r.line(format!("  {a} {w}"));
    }
    r.field("atoms", atoms.join(";"));
    r.field("weights", cert.primal_witness.weights().iter().map(show_rational).collect::<Vec<_>>().join(","));
    let seq: Vec<String> = cert.dual_witness.entries().iter().map(&show_elem).collect();
    r.line(format!("dual witness (length {}, i* = {}):", seq.len(), cert.dual_i_star));
    r.line(format!("  {}", seq.join(" ")));
    r.field("dual_length", seq.len());
    r.field("dual_i_star", cert.dual_i_star);
    r.field("dual_sequence", seq.join(","));
    r
}

/// `int(Q)` for a poset or field file. `q` defaults to every element of a
/// poset, or every named set of a field.
pub fn cmd_int(path: &str, q: Option<Vec<String>>, max_n: Option<usize>) -> Result<Report, CliError> {
    let text = read(path)?;
    let cap = ground_cap()?;
    let mut report;
    match parsed(path, detect_kind(&text))? {
        Kind::Field => {
            let doc = parsed(path, FieldDoc::parse(&text))?;
            let (field, named) = doc.build(cap)?;
            let names = q.unwrap_or_else(|| named.iter().map(|(n, _)| n.clone()).collect());
            let family = resolve_sets(&named, &names)?;
            let cert = int_exact(&field, &family)?;
            let name_of = |s: &Subset| {
                named.iter().find(|(_, t)| t == s).map(|(n, _)| n.clone()).unwrap_or_else(|| s.to_string())
            };
            report = int_report(&cert, |a| a.to_string(), name_of);
            if let Some(n) = max_n {
                let ub = int_upper_bound(&field, &family, n)?;
                search_lines(&mut report, n, &ub);
            }
        }
        Kind::Poset => {
            let p = parsed(path, PosetDoc::parse(&text))?.build()?;
            let names = q.unwrap_or_else(|| p.labels().to_vec());
            let family = resolve_labels(&p, &names)?;
            // Solve in the completion so the cap applies; i* agrees there.
            let c = ro_completion_capped(&p, cap)?;
            let images: Vec<Subset> = family.iter().map(|&x| c.embedding.image(x).clone()).collect();
            let cert = int_exact(&c.field, &images)?;
            let label_of = |s: &Subset| {
                let k = images.iter().position(|t| t == s).expect("witness entries come from Q");
                p.label(family[k]).to_string()
            };
            let show_atom = |a: &Subset| {
                let labels: Vec<&str> = a.iter().map(|k| p.label(c.points[k])).collect();
                format!("{{{}}}", labels.join(","))
            };
            report = int_report(&cert, show_atom, label_of);
            if let Some(n) = max_n {
                let ub = int_upper_bound(&p, &family, n)?;
                search_lines(&mut report, n, &ub);
            }
        }
        k => return Err(CliError::Usage(format!("{path}: int needs a POSET or FIELD document, got {}", k.name()))),
    }
    Ok(report)
}

fn search_lines(r: &mut Report, n: usize, ub: &Rational) {
    r.line(format!("best ratio over sequences of length <= {n}: {ub}"));
    r.field("search_max_n", n);
    r.field("search_bound", show_rational(ub));
}

fn failure_line(f: &LinkFailure) -> String {
    match f {
        LinkFailure::LowIntersection { index, eps, value } => {
            format!("cell {index} at eps {eps}: int = {value} < {}", Rational::one() - eps)
        }
        LinkFailure::NotDense { eps, element } => format!("at eps {eps}: nothing in the union lies below {element}"),
    }
}

fn linked_report<F: Forcing>(
    f: &F,
    fam: &LinkedFamily<F::Elem>,
    cover: Option<usize>,
    show: impl Fn(&F::Elem) -> String,
) -> Result<Report, CliError> {
    let verdict = verify_intersection_linked(f, fam)?;
    let mut r = Report::new("linked");
    r.field("cells_checked", verdict.cells_checked);
    r.field("failures", verdict.failures.len());
    if verdict.holds() {
        r.line(format!("intersection-linked: true ({} cells checked)", verdict.cells_checked));
    } else {
        r.line(format!("intersection-linked: false ({} failures)", verdict.failures.len()));
        for fl in &verdict.failures {
            r.line(format!("  {}", failure_line(fl)));
        }
        r.status = EXIT_FALSE;
        return Ok(r);
    }
    if let Some(m) = cover {
        let c = derive_m_linked_cover(f, fam, m)?;
        r.line(format!("{m}-linked cover read at eps = {}:", c.eps));
        r.field("cover_eps", show_rational(&c.eps));
        for (idx, set) in &c.sets {
            let elems: Vec<String> = set.iter().map(&show).collect();
            r.line(format!("  {idx}: {}", elems.join(" ")));
            r.field(format!("cover.{idx}"), elems.join(","));
        }
    }
    Ok(r)
}

/// Verifies a family file against a poset or field file.
pub fn cmd_linked(path: &str, family_path: &str, cover: Option<usize>) -> Result<Report, CliError> {
    let text = read(path)?;
    let fam_doc = parsed(family_path, FamilyDoc::parse(&read(family_path)?))?;
    let cap = ground_cap()?;
    match parsed(path, detect_kind(&text))? {
        Kind::Field => {
            let (field, named) = parsed(path, FieldDoc::parse(&text))?.build(cap)?;
            let cells = fam_doc
                .cells
                .iter()
                .map(|(i, e, xs)| Ok((i.clone(), e.clone(), resolve_sets(&named, xs)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let fam = LinkedFamily::new(fam_doc.index_set(), fam_doc.eps_grid(), cells)?;
            linked_report(&field, &fam, cover, |s| s.to_string())
        }
        Kind::Poset => {
            let p = parsed(path, PosetDoc::parse(&text))?.build()?;
            let cells = fam_doc
                .cells
                .iter()
                .map(|(i, e, xs)| Ok((i.clone(), e.clone(), resolve_labels(&p, xs)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let fam = LinkedFamily::new(fam_doc.index_set(), fam_doc.eps_grid(), cells)?;
            linked_report(&p, &fam, cover, |x| p.label(*x).to_string())
        }
        k => Err(CliError::Usage(format!("{path}: linked needs a POSET or FIELD document, got {}", k.name()))),
    }
}

/// Builds the family `Q_{s,ε}` from a measure and a density family `s`.
pub fn cmd_density(
    field_path: &str,
    measure_path: &str,
    s: Vec<String>,
    eps_grid: Vec<Rational>,
) -> Result<Report, CliError> {
    let (field, named) = parsed(field_path, FieldDoc::parse(&read(field_path)?))?.build(ground_cap()?)?;
    let m = parsed(measure_path, MeasureDoc::parse(&read(measure_path)?))?.build(&field)?;
    let s_family = resolve_sets(&named, &s)?;
    let mut r = Report::new("density");
    let fam = match density_to_linked_family(&m, &s_family, eps_grid) {
        Ok(f) => f,
        Err(LinkedError::DensityFails { eps, member }) => {
            r.line(format!("density property fails at eps {eps}: no member of S has relative measure at least 1 - eps on {member}"));
            r.field("density", "fails");
            r.status = EXIT_FALSE;
            return Ok(r);
        }
        Err(LinkedError::NotLinked(failures)) => {
            r.line("constructed family is not intersection-linked:");
            for f in &failures {
                r.line(format!("  {}", failure_line(f)));
            }
            r.field("linked", false);
            r.status = EXIT_FALSE;
            return Ok(r);
        }
        Err(e) => return Err(e.into()),
    };
    r.field("density", "holds");
    r.field("linked", true);
    for (idx, eps, cell) in fam.cells() {
        let value = intnum::intersection::int_or_one(&field, cell)?;
        r.line(format!("cell {idx} eps {eps}: size {}, int = {value} >= {}", cell.len(), Rational::one() - eps));
        r.field(format!("cell.{idx}.{}", show_rational(eps)), show_rational(&value));
    }
    Ok(r)
}

pub fn cmd_verify(suite: Suite, seed: u64, count: usize) -> Report {
    let report = run_suite(suite, seed, count);
    let mut r = Report::new("verify");
    r.field("suite", suite.name());
    r.field("seed", seed);
    r.field("count", count);
    r.line(format!("suite {} (seed {seed}, {count} instances)", suite.name()));
    for item in &report.items {
        let verdict = if item.passed { "PASS" } else { "FAIL" };
        r.line(format!("{verdict} {} ({} checks)", item.name, item.checked));
        if let Some(c) = &item.counterexample {
            r.line(format!("  counterexample: {c}"));
        }
        r.field(format!("item.{}", item.name.replace(' ', "_")), verdict);
    }
    r.field("passed", report.passed());
    if !report.passed() {
        r.status = EXIT_FALSE;
    }
    r
}

fn profile_from(path: Option<&str>) -> Result<GrowthProfile, CliError> {
    match path {
        None => Ok(GrowthProfile::Paper),
        Some(p) => Ok(parsed(p, ProfileDoc::parse(&read(p)?))?.build()?),
    }
}

fn condition_from(path: &str) -> Result<ECondition, CliError> {
    Ok(parsed(path, ConditionDoc::parse(&read(path)?))?.build()?)
}

pub fn cmd_consts(h: usize) -> Result<Report, CliError> {
    let c = paper_constants(h)?;
    let mut r = Report::new("etree consts");
    r.field("h", h);
    for (name, key, v) in [("ϱ", "rho", &c.rho), ("π", "pi", &c.pi), ("a", "a", &c.a), ("M", "M", &c.m)] {
        r.line(format!("{name}({h}) = {}", show_big(v)));
        r.field(key, v);
    }
    Ok(r)
}

pub fn cmd_norm(h: usize, n: &str, threshold: &str, profile: Option<&str>) -> Result<Report, CliError> {
    let profile = profile_from(profile)?;
    let n = parse_big_expr(n).map_err(CliError::Usage)?;
    let t = parse_rational(threshold).map_err(CliError::Usage)?;
    if t <= Rational::zero() {
        return Err(CliError::Semantic(format!("threshold {t} must be positive")));
    }
    let ord = norm_compare(&profile, h, &n, &t)?;
    let value = norm_value(&profile, h, &n)?;
    let holds = ord != Ordering::Less;
    let how = match (&value, ord) {
        (NormValue::Infinite, _) => " (infinite)",
        (_, Ordering::Equal) => " (equality)",
        (_, Ordering::Greater) => " (strict)",
        (_, Ordering::Less) => "",
    };
    let mut r = Report::new("etree norm");
    r.line(format!("μ{}({}) ≥ {t}: {holds}{how}", subscript(h), show_big(&n)));
    r.field("h", h);
    r.field("n", &n);
    r.field("threshold", show_rational(&t));
    r.field("holds", holds);
    r.field("comparison", format!("{ord:?}").to_lowercase());
    match value {
        NormValue::Infinite => {
            r.line("value: infinite");
            r.field("value", "infinite");
        }
        NormValue::Finite { exact: Some(q), .. } => {
            r.line(format!("value: {q} (exact)"));
            r.field("value", show_rational(&q));
        }
        NormValue::Finite { approx, exact: None } => {
            r.line(format!("value: {approx:.6} (irrational)"));
            r.field("value_approx", approx);
        }
    }
    Ok(r)
}

pub fn cmd_identity(h: usize, profile: Option<&str>) -> Result<Report, CliError> {
    let profile = profile_from(profile)?;
    let c = lemma_v50_check(&profile, h)?;
    let mut r = Report::new("etree identity");
    let scope = if c.exhaustive { "every count" } else { "sampled counts" };
    r.line(format!(
        "n = M(1 - a^-μ(n)) at level {h}, {scope}: {} ({} exact, {} approximate)",
        c.holds(),
        c.exact,
        c.approximate
    ));
    for n in &c.failures {
        r.line(format!("  fails at n = {}", show_big(n)));
    }
    r.field("h", h);
    r.field("exhaustive", c.exhaustive);
    r.field("exact", c.exact);
    r.field("approximate", c.approximate);
    r.field("holds", c.holds());
    if !c.holds() {
        r.status = EXIT_FALSE;
    }
    Ok(r)
}

pub fn cmd_check(path: &str) -> Result<Report, CliError> {
    let c = condition_from(path)?;
    let ok = c.is_condition()?;
    let mut r = Report::new("etree check");
    r.line(format!("condition: {ok}"));
    r.field("condition", ok);
    if !ok {
        r.status = EXIT_FALSE;
    }
    Ok(r)
}

pub fn cmd_loss(path: &str) -> Result<Report, CliError> {
    let c = condition_from(path)?;
    let mut r = Report::new("etree loss");
    match c.loss_of()? {
        Some(l) => {
            r.line(format!("loss = {l}"));
            r.field("loss", show_rational(&l));
        }
        None => {
            r.line("loss undefined");
            r.field("loss", "undefined");
        }
    }
    Ok(r)
}

pub fn cmd_leb(path: &str) -> Result<Report, CliError> {
    let c = condition_from(path)?;
    let leb = c.leb_ratio()?;
    let mut r = Report::new("etree leb");
    r.line(format!("Leb ratio = {}", leb.ratio));
    r.field("ratio", show_rational(&leb.ratio));
    match (&leb.loss, &leb.bound, leb.meets_bound) {
        (Some(l), Some(b), Some(m)) => {
            r.line(format!("loss = {l}, bound 1 - loss/2 = {b}, met: {m}"));
            r.field("loss", show_rational(l));
            r.field("bound", show_rational(b));
            r.field("meets_bound", m);
        }
        _ => {
            r.line("loss undefined, no bound to compare");
            r.field("loss", "undefined");
        }
    }
    Ok(r)
}

/// Lists the atoms of a field file with their measure, as a sanity view of
/// both documents.
pub fn cmd_measure(field_path: &str, measure_path: &str) -> Result<Report, CliError> {
    let (field, named) = parsed(field_path, FieldDoc::parse(&read(field_path)?))?.build(ground_cap()?)?;
    let m = parsed(measure_path, MeasureDoc::parse(&read(measure_path)?))?.build(&field)?;
    let mut r = Report::new("measure");
    r.field("probability", m.is_probability());
    r.line(format!("total = {}{}", m.total(), if m.is_probability() { " (probability)" } else { "" }));
    let mut values = BTreeMap::new();
    for (name, s) in &named {
        let v = m.measure_of(s)?;
        r.line(format!("{name} {s}: {v}"));
        values.insert(name.clone(), v);
    }
    for (k, v) in values {
        r.field(format!("set.{k}"), show_rational(&v));
    }
    Ok(r)
}
