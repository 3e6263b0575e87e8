//! JSON file formats and the bundled fixture corpus.
//!
//! All numbers are exact integers; a series is a list of `[exponent,
//! coefficient]` pairs (nonzero coefficients, canonical residues) together
//! with the precision of the enclosing file. Maps keyed by group elements
//! use the decimal element index as key and serialize in index order, so
//! canonical output is byte-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{dihedral_p, metacyclic, standard_cyclic_p, tame_cyclic, ActionError, LocalAction};
use crate::deform::{ASeries, ArtinianRing, DeformError, Lift, RingSpec};
use crate::groups::{Cochain, FiniteGroup, GModule, GroupError, Subgroup};
use crate::linalg::{LinalgError, Matrix, PrimeField};
use crate::maps::Tower;
use crate::series::Series;

/// Failures while reading or writing files.
#[derive(Debug, Error)]
pub enum IoError {
    /// Malformed JSON.
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// Well-formed JSON describing an invalid object.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Group-layer rejection.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Action-layer rejection.
    #[error(transparent)]
    Action(#[from] ActionError),
    /// Deformation-layer rejection.
    #[error(transparent)]
    Deform(#[from] DeformError),
    /// Linear algebra rejection.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `[[exponent, coefficient], …]`.
pub type Terms = Vec<(i64, u64)>;

/// The nonzero terms of `s`.
pub fn series_terms(s: &Series) -> Terms {
    s.terms()
}

/// The series `Σ c·t^e + O(t^prec)`; coefficients must be canonical residues
/// and exponents must lie below `prec`.
pub fn terms_series(field: PrimeField, terms: &[(i64, u64)], prec: i64) -> Result<Series, IoError> {
    let mut seen = std::collections::BTreeSet::new();
    for &(e, c) in terms {
        if c >= field.p() {
            return Err(IoError::Invalid(format!("coefficient {c} of t^{e} is not a residue modulo {}", field.p())));
        }
        if e >= prec {
            return Err(IoError::Invalid(format!("term t^{e} lies beyond the precision {prec}")));
        }
        if !seen.insert(e) {
            return Err(IoError::Invalid(format!("exponent {e} listed twice")));
        }
    }
    let signed: Vec<(i64, i64)> = terms.iter().map(|&(e, c)| (e, c as i64)).collect();
    Ok(Series::from_terms(field, &signed, prec))
}

fn parse_field(p: u64) -> Result<PrimeField, IoError> {
    PrimeField::new(p).map_err(|e| IoError::Invalid(format!("p = {p}: {e}")))
}

/// `{"name", "order", "table", "subgroup"?}`; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupFile {
    /// Name used in reports.
    pub name: String,
    /// Group order.
    pub order: usize,
    /// `table[a][b] = a·b`.
    pub table: Vec<Vec<usize>>,
    /// Elements of a distinguished subgroup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<Vec<usize>>,
}

impl GroupFile {
    /// The file describing `g` and optionally a subgroup.
    pub fn from_group(g: &FiniteGroup, sub: Option<&Subgroup>) -> Self {
        Self {
            name: g.name().to_string(),
            order: g.order(),
            table: g.table().to_vec(),
            subgroup: sub.map(|s| s.elements().to_vec()),
        }
    }

    /// The validated group.
    pub fn group(&self) -> Result<FiniteGroup, IoError> {
        if self.table.len() != self.order {
            return Err(IoError::Invalid(format!("order {} but {} table rows", self.order, self.table.len())));
        }
        Ok(FiniteGroup::new(self.name.clone(), self.table.clone())?)
    }

    /// The distinguished subgroup, if any.
    pub fn subgroup(&self, g: &FiniteGroup) -> Result<Option<Subgroup>, IoError> {
        self.subgroup.as_ref().map(|el| Ok(Subgroup::new(g, el)?)).transpose()
    }
}

/// `{"p", "prec", "group", "series": {"g": terms}}`; series may be listed on
/// a generating set only and are completed on reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionFile {
    /// Characteristic.
    pub p: u64,
    /// Precision `t^prec` of every series.
    pub prec: i64,
    /// The acting group.
    pub group: GroupFile,
    /// `f_g` for the listed elements.
    pub series: BTreeMap<usize, Terms>,
}

impl ActionFile {
    /// Canonical form: the completed table of all non-identity elements.
    pub fn from_action(a: &LocalAction) -> Self {
        let series = (1..a.group().order()).map(|g| (g, series_terms(a.series(g)))).collect();
        Self {
            p: a.field().p(),
            prec: a.prec(),
            group: GroupFile::from_group(a.group(), None),
            series,
        }
    }

    /// Completes and validates the action.
    pub fn action(&self) -> Result<LocalAction, IoError> {
        let field = parse_field(self.p)?;
        let group = self.group.group()?;
        if self.prec < 2 {
            return Err(IoError::Invalid(format!("precision {} is too small", self.prec)));
        }
        let gens = self
            .series
            .iter()
            .map(|(&g, t)| Ok((g, terms_series(field, t, self.prec)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        let a = LocalAction::from_table(group, field, &gens)?;
        let report = a.validate();
        if !report.valid {
            return Err(IoError::Invalid(report.violations.join("; ")));
        }
        for (g, s) in &gens {
            if !a.series(*g).agrees_with(s) {
                return Err(IoError::Invalid(format!("the listed series of element {g} contradicts the completion")));
            }
        }
        Ok(a)
    }
}

/// `{"p", "dim", "group", "action": {"g": rows}}`; matrices may be listed on
/// a generating set only and are completed on reading.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleFile {
    /// Characteristic.
    pub p: u64,
    /// Dimension.
    pub dim: usize,
    /// The group.
    pub group: GroupFile,
    /// Action matrices (row lists) of the listed elements.
    pub action: BTreeMap<usize, Vec<Vec<u64>>>,
}

impl ModuleFile {
    /// Canonical form: matrices of all non-identity elements.
    pub fn from_module(m: &GModule, sub: Option<&Subgroup>) -> Self {
        let action = (1..m.group().order()).map(|g| (g, m.matrix(g).to_rows())).collect();
        Self {
            p: m.field().p(),
            dim: m.dim(),
            group: GroupFile::from_group(m.group(), sub),
            action,
        }
    }

    /// Completes and validates the module.
    pub fn module(&self) -> Result<GModule, IoError> {
        let field = parse_field(self.p)?;
        let group = self.group.group()?;
        let mut gens = Vec::new();
        let mut mats = Vec::new();
        for (&g, rows) in &self.action {
            if g >= group.order() {
                return Err(IoError::Invalid(format!("element {g} out of range")));
            }
            if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim || r.iter().any(|&x| x >= field.p())) {
                return Err(IoError::Invalid(format!("the matrix of element {g} is not a {0}×{0} matrix of residues", self.dim)));
            }
            gens.push(g);
            mats.push(Matrix::from_rows(field, self.dim, rows)?);
        }
        let m = GModule::from_generator_matrices(group.clone(), field, self.dim, &gens, &mats)?;
        for (g, mat) in gens.iter().zip(&mats) {
            if m.matrix(*g) != mat {
                return Err(IoError::Invalid(format!("the listed matrix of element {g} contradicts the completion")));
            }
        }
        Ok(m)
    }
}

/// `{"degree", "dim", "values"}` with one value per argument tuple in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CochainFile {
    /// Cochain degree.
    pub degree: usize,
    /// Module dimension.
    pub dim: usize,
    /// `values[i]` is the value on the `i`-th tuple.
    pub values: Vec<Vec<u64>>,
}

impl CochainFile {
    /// The file of a cochain.
    pub fn from_cochain(c: &Cochain) -> Self {
        let count = c.group_order().pow(c.degree() as u32);
        let d = c.dim();
        let values = (0..count).map(|i| c.values()[i * d..(i + 1) * d].to_vec()).collect();
        Self {
            degree: c.degree(),
            dim: c.dim(),
            values,
        }
    }

    /// The cochain for a module.
    pub fn cochain(&self, m: &GModule) -> Result<Cochain, IoError> {
        if self.dim != m.dim() {
            return Err(IoError::Invalid(format!("cochain dimension {} but module dimension {}", self.dim, m.dim())));
        }
        let n = m.group().order();
        let expected = n.pow(self.degree as u32);
        if self.values.len() != expected || self.values.iter().any(|v| v.len() != self.dim) {
            return Err(IoError::Invalid(format!("a {}-cochain on a group of order {n} needs {expected} values of length {}", self.degree, self.dim)));
        }
        if self.values.iter().flatten().any(|&x| x >= m.field().p()) {
            return Err(IoError::Invalid("cochain values must be residues".into()));
        }
        Ok(Cochain::from_values(self.degree, n, self.dim, self.values.concat())?)
    }
}

/// One coefficient of a lift: the series multiplying a basis monomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftComponent {
    /// Exponents of the monomial of `A`.
    pub monomial: Vec<u32>,
    /// Its series.
    pub terms: Terms,
}

/// `{"action", "ring", "prec", "series": {"g": [components]}}`: a lift of
/// the action over `A`; every element is listed, components absent from
/// the list are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftFile {
    /// The reduced action.
    pub action: ActionFile,
    /// The ring `A`.
    pub ring: RingSpec,
    /// Precision of the series.
    pub prec: i64,
    /// `F_g` as components along the monomial basis of `A`.
    pub series: BTreeMap<usize, Vec<LiftComponent>>,
}

impl LiftFile {
    /// Canonical form of a lift.
    pub fn from_lift(l: &Lift) -> Self {
        let ring = l.ring();
        let prec = l.prec();
        let series = (0..l.base().group().order())
            .map(|g| {
                let comps = ring
                    .basis()
                    .iter()
                    .zip(l.series(g).truncate(prec).comps())
                    .filter(|(_, s)| !s.is_zero())
                    .map(|(m, s)| LiftComponent {
                        monomial: m.clone(),
                        terms: series_terms(s),
                    })
                    .collect();
                (g, comps)
            })
            .collect();
        Self {
            action: ActionFile::from_action(l.base()),
            ring: ring.spec(),
            prec,
            series,
        }
    }

    /// The validated lift (a homomorphism reducing to the action).
    pub fn lift(&self) -> Result<Lift, IoError> {
        let action = self.action.action()?;
        let ring = ArtinianRing::from_spec(action.field(), &self.ring)?;
        if self.prec > action.prec() {
            return Err(IoError::Invalid(format!("lift precision {} exceeds the action precision {}", self.prec, action.prec())));
        }
        let base = action.truncate(self.prec);
        let n = base.group().order();
        if self.series.len() != n || self.series.keys().enumerate().any(|(i, &k)| i != k) {
            return Err(IoError::Invalid(format!("a lift lists the series of all {n} elements")));
        }
        let series = self
            .series
            .values()
            .map(|comps| {
                let mut s = ring.zero(self.prec);
                for c in comps {
                    let i = ring
                        .monomial_index(&c.monomial)
                        .ok_or_else(|| IoError::Invalid(format!("{:?} is not a standard monomial of {}", c.monomial, ring.name())))?;
                    *s.comp_mut(i) = terms_series(action.field(), &c.terms, self.prec)?;
                }
                Ok(s)
            })
            .collect::<Result<Vec<ASeries>, IoError>>()?;
        Ok(Lift::new(&base, &ring, series)?)
    }
}

/// Kinds of bundled fixtures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// An action file.
    Action,
    /// A group file with a distinguished subgroup.
    Group,
    /// A module file.
    Module,
    /// A cochain file.
    Cochain,
}

/// A bundled fixture.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Fixture {
    /// Short name.
    pub name: &'static str,
    /// Kind of file.
    pub kind: FixtureKind,
    /// Path relative to the fixture directory.
    pub path: &'static str,
    /// One-line description.
    pub description: &'static str,
    /// File contents.
    #[serde(skip)]
    pub contents: &'static str,
}

macro_rules! fixture {
    ($name:expr, $kind:ident, $path:expr, $desc:expr) => {
        Fixture {
            name: $name,
            kind: FixtureKind::$kind,
            path: $path,
            description: $desc,
            contents: include_str!(concat!("../fixtures/", $path)),
        }
    };
}

/// The bundled corpus.
pub const CORPUS: &[Fixture] = &[
    fixture!("std_cyclic_3", Action, "actions/std_cyclic_3.json", "Z/3 acting by t/(1 - t) over F_3"),
    fixture!("std_cyclic_5", Action, "actions/std_cyclic_5.json", "Z/5 acting by t/(1 - t) over F_5"),
    fixture!("std_cyclic_7", Action, "actions/std_cyclic_7.json", "Z/7 acting by t/(1 - t) over F_7"),
    fixture!("tame_cyclic_5_4", Action, "actions/tame_cyclic_5_4.json", "Z/4 acting by t ↦ 2t over F_5"),
    fixture!("dihedral_5", Action, "actions/dihedral_5.json", "D_5 generated by t/(1 - t) and t ↦ -t over F_5"),
    fixture!("metacyclic_5_4", Action, "actions/metacyclic_5_4.json", "Z/5 ⋊ Z/4 over F_5"),
    fixture!("metacyclic_3_2", Action, "actions/metacyclic_3_2.json", "Z/3 ⋊ Z/2 over F_3"),
    fixture!("z2xz2", Group, "groups/z2xz2.json", "Z/2 × Z/2 with the subgroup of the first factor"),
    fixture!("z4", Group, "groups/z4.json", "Z/4 with its subgroup of order 2"),
    fixture!("z2xz2_trivial", Module, "modules/z2xz2_trivial.json", "F_2 with trivial Z/2 × Z/2 action"),
    fixture!("z4_trivial", Module, "modules/z4_trivial.json", "F_2 with trivial Z/4 action"),
    fixture!("z2xz2_xy", Cochain, "cocycles/z2xz2_xy.json", "the cup product x·y of the two characters of Z/2 × Z/2"),
    fixture!("z2xz2_inflation", Cochain, "cocycles/z2xz2_inflation.json", "y·y, inflated from the quotient by the first factor"),
    fixture!("z4_carry", Cochain, "cocycles/z4_carry.json", "the carry cocycle of Z/4, nonzero on the subgroup of order 2"),
];

/// Looks up a bundled fixture by name.
pub fn fixture(name: &str) -> Option<&'static Fixture> {
    CORPUS.iter().find(|f| f.name == name)
}

/// The builder behind an action fixture, at precision `prec`.
pub fn fixture_action(name: &str, prec: i64) -> Option<Result<LocalAction, ActionError>> {
    Some(match name {
        "std_cyclic_3" => standard_cyclic_p(3, prec),
        "std_cyclic_5" => standard_cyclic_p(5, prec),
        "std_cyclic_7" => standard_cyclic_p(7, prec),
        "tame_cyclic_5_4" => tame_cyclic(5, 4, 2, prec),
        "dihedral_5" => dihedral_p(5, prec),
        "metacyclic_5_4" => metacyclic(5, 4, 2, prec),
        "metacyclic_3_2" => metacyclic(3, 2, 2, prec),
        _ => return None,
    })
}

/// The precision stored in action fixtures: enough for every tower over
/// the action at `1.5×` the default truncation.
pub fn fixture_precision(name: &str) -> Result<i64, IoError> {
    let probe = fixture_action(name, 60).ok_or_else(|| IoError::Invalid(format!("no builder named {name}")))??;
    let g = probe.group();
    let base = Tower::levels_for(&probe, &Subgroup::whole(g), None).map_err(|e| IoError::Invalid(e.to_string()))?;
    let m = (3 * base.m + 1) / 2;
    let mut prec = 0;
    for sub in [Subgroup::trivial(g), Subgroup::whole(g)] {
        let lv = Tower::levels_for(&probe, &sub, Some(m)).map_err(|e| IoError::Invalid(e.to_string()))?;
        prec = prec.max(lv.prec);
    }
    Ok(prec + 8)
}

fn cyclic_subgroup(g: &FiniteGroup, x: usize) -> Subgroup {
    Subgroup::generated_by(g, &[x])
}

/// Regenerates the contents of a bundled fixture (canonical JSON plus a
/// trailing newline) from its builder.
pub fn regenerate(name: &str) -> Result<String, IoError> {
    let f2 = parse_field(2)?;
    let v4 = FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
    let z4 = FiniteGroup::cyclic(4);
    // (a, b) ∈ Z/2 × Z/2 has index 2a + b; N = {(a, 0)}
    let v4_sub = cyclic_subgroup(&v4, 2);
    let z4_sub = cyclic_subgroup(&z4, 2);
    let text = match name {
        "z2xz2" => to_canonical(&GroupFile::from_group(&v4, Some(&v4_sub)))?,
        "z4" => to_canonical(&GroupFile::from_group(&z4, Some(&z4_sub)))?,
        "z2xz2_trivial" => to_canonical(&ModuleFile::from_module(&GModule::trivial(v4.clone(), f2, 1), Some(&v4_sub)))?,
        "z4_trivial" => to_canonical(&ModuleFile::from_module(&GModule::trivial(z4.clone(), f2, 1), Some(&z4_sub)))?,
        "z2xz2_xy" => {
            // x(a, b) = a restricts nontrivially to N, y(a, b) = b vanishes on N
            let c = Cochain::from_fn(2, 4, 1, |a| vec![((a[0] / 2) * (a[1] % 2)) as u64]);
            to_canonical(&CochainFile::from_cochain(&c))?
        }
        "z2xz2_inflation" => {
            let c = Cochain::from_fn(2, 4, 1, |a| vec![((a[0] % 2) * (a[1] % 2)) as u64]);
            to_canonical(&CochainFile::from_cochain(&c))?
        }
        "z4_carry" => {
            let c = Cochain::from_fn(2, 4, 1, |a| vec![u64::from(a[0] + a[1] >= 4)]);
            to_canonical(&CochainFile::from_cochain(&c))?
        }
        other => {
            let prec = fixture_precision(other)?;
            let a = fixture_action(other, prec).expect("checked")?;
            to_canonical(&ActionFile::from_action(&a))?
        }
    };
    Ok(text)
}

/// Canonical serialization: pretty JSON with a trailing newline.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
