//! Finite group actions on k[[t]] by substitution, known to a fixed
//! precision.
//!
//! An action attaches to every element `g` a series `f_g = g(t)` of
//! valuation one, and `g` acts on a series `x` by `g·x = x(f_g)`. With this
//! rule a homomorphism satisfies `f_{gh} = f_h(f_g)`.

mod lattice;

pub use lattice::*;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::groups::{FiniteGroup, GroupError, QuotientGroup, Subgroup};
use crate::linalg::{is_prime, LinalgError, PrimeField};
use crate::series::{orbit_product, PowerTable, Series, SeriesError};

/// Upper bound on the order of a group generated by series.
pub const MAX_GROUP_ORDER: usize = 5000;

/// Errors raised while building or analysing an action.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    /// A generator is not an automorphism of k[[t]].
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    /// The generated group did not close up.
    #[error("generated group exceeds {0} elements")]
    NotFinite(usize),
    /// The known precision is too small for the requested computation.
    #[error("precision too low: {0}")]
    Precision(String),
    /// Builder parameters are out of range.
    #[error("invalid parameters: {0}")]
    Parameter(String),
    /// The action failed validation.
    #[error("invalid action: {0}")]
    Invalid(String),
    /// Series arithmetic failure.
    #[error(transparent)]
    Series(#[from] SeriesError),
    /// Group-layer failure.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Linear algebra failure.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An action of a finite group on k[[t]], `g ↦ f_g`, modulo `t^prec`.
#[derive(Clone, Debug)]
pub struct LocalAction {
    group: FiniteGroup,
    field: PrimeField,
    prec: i64,
    series: Vec<Series>,
}

/// Outcome of [`LocalAction::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// True when no identity failed.
    pub valid: bool,
    /// Human-readable descriptions of the failures, in check order.
    pub violations: Vec<String>,
}

fn check_automorphism(s: &Series, what: &str) -> Result<(), ActionError> {
    if s.is_zero() || s.val() != 1 {
        return Err(ActionError::InvalidGenerator(format!("{what} does not have valuation one")));
    }
    Ok(())
}

impl LocalAction {
    /// Wraps a table of series without checks; see [`LocalAction::validate`].
    pub fn new_unchecked(group: FiniteGroup, field: PrimeField, series: Vec<Series>) -> Result<Self, ActionError> {
        if series.len() != group.order() {
            return Err(ActionError::Invalid(format!(
                "{} series for a group of order {}",
                series.len(),
                group.order()
            )));
        }
        let prec = series.iter().map(|s| s.prec()).min().unwrap_or(0);
        Ok(Self {
            group,
            field,
            prec,
            series: series.into_iter().map(|s| s.truncate(prec)).collect(),
        })
    }

    /// The group generated by `gens` (closure under left multiplication
    /// `f_{s x} = f_x(f_s)`); element `0` is the identity and generators get
    /// the indices in which they first appear.
    pub fn from_generators(name: impl Into<String>, field: PrimeField, gens: &[Series]) -> Result<Self, ActionError> {
        if gens.is_empty() {
            return Err(ActionError::InvalidGenerator("no generators".into()));
        }
        for (i, g) in gens.iter().enumerate() {
            check_automorphism(g, &format!("generator {i}"))?;
            if g.field() != field {
                return Err(ActionError::InvalidGenerator("field mismatch".into()));
            }
        }
        let prec = gens.iter().map(|g| g.prec()).min().expect("nonempty");
        if prec < 2 {
            return Err(ActionError::Precision("generators known only modulo t^1".into()));
        }
        let gens: Vec<Series> = gens.iter().map(|g| g.truncate(prec)).collect();
        let mut tables: Vec<PowerTable> = gens
            .iter()
            .map(|g| PowerTable::new(g, prec as usize))
            .collect::<Result<_, _>>()?;
        let id = Series::var(field, prec);
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Series, usize> = HashMap::from([(id, 0)]);
        let mut head = 0;
        while head < elems.len() {
            let x = elems[head].clone();
            head += 1;
            for t in tables.iter_mut() {
                let y = t.compose(&x)?.truncate(prec);
                if !index.contains_key(&y) {
                    if elems.len() >= MAX_GROUP_ORDER {
                        return Err(ActionError::NotFinite(MAX_GROUP_ORDER));
                    }
                    index.insert(y.clone(), elems.len());
                    elems.push(y);
                }
            }
        }
        let group = table_from_series(name.into(), field, &elems, prec)?;
        Ok(Self {
            group,
            field,
            prec,
            series: elems,
        })
    }

    /// Completes an action from the series of generators along a
    /// breadth-first tree of the given group (`f_{s x} = f_x(f_s)`). The
    /// result is not validated; call [`LocalAction::validate`].
    pub fn from_table(group: FiniteGroup, field: PrimeField, gens: &[(usize, Series)]) -> Result<Self, ActionError> {
        for (g, s) in gens {
            check_automorphism(s, &format!("series of element {g}"))?;
            if *g >= group.order() {
                return Err(ActionError::InvalidGenerator(format!("element {g} out of range")));
            }
        }
        let prec = gens.iter().map(|(_, s)| s.prec()).min().unwrap_or(2);
        let mut tables: Vec<(usize, PowerTable)> = gens
            .iter()
            .map(|(g, s)| PowerTable::new(&s.truncate(prec), prec as usize).map(|t| (*g, t)))
            .collect::<Result<_, _>>()?;
        let n = group.order();
        let mut series: Vec<Option<Series>> = vec![None; n];
        series[0] = Some(Series::var(field, prec));
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let fx = series[x].clone().expect("visited");
            for (s, t) in tables.iter_mut() {
                let y = group.mul(*s, x);
                if series[y].is_none() {
                    series[y] = Some(t.compose(&fx)?.truncate(prec));
                    queue.push_back(y);
                }
            }
        }
        let series: Option<Vec<Series>> = series.into_iter().collect();
        let series = series.ok_or_else(|| ActionError::Invalid("the given elements do not generate the group".into()))?;
        Self::new_unchecked(group, field, series)
    }

    /// Checks valuation one, `f_e = t`, the homomorphism rule (on
    /// generators, which suffices) and faithfulness, to known precision.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let prec = self.prec;
        for (g, s) in self.series.iter().enumerate() {
            if s.is_zero() || s.val() != 1 {
                violations.push(format!("f_{g} does not have valuation one"));
            }
        }
        if !self.series[0].agrees_with(&Series::var(self.field, prec)) {
            violations.push("f_e ≠ t".into());
        }
        if violations.is_empty() {
            let n = self.group.order();
            'outer: for s in self.group.generators() {
                let mut table = match PowerTable::new(&self.series[s], prec as usize) {
                    Ok(t) => t,
                    Err(e) => {
                        violations.push(format!("f_{s}: {e}"));
                        break;
                    }
                };
                for x in 0..n {
                    let lhs = table.compose(&self.series[x]).expect("valuation one");
                    let sx = self.group.mul(s, x);
                    if !lhs.agrees_with(&self.series[sx]) {
                        violations.push(format!(
                            "homomorphism fails: f_{x}(f_{s}) ≠ f_{sx} (first difference below t^{})",
                            first_difference(&lhs, &self.series[sx])
                        ));
                        break 'outer;
                    }
                }
            }
        }
        for g in 1..self.group.order() {
            if self.series[g].agrees_with(&Series::var(self.field, prec)) {
                violations.push(format!("not faithful: f_{g} ≡ t mod t^{prec}"));
            }
        }
        ValidationReport {
            valid: violations.is_empty(),
            violations,
        }
    }

    /// The acting group.
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Coefficient field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Common precision of the series.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// `f_g`.
    pub fn series(&self, g: usize) -> &Series {
        &self.series[g]
    }

    /// All series, indexed by element.
    pub fn all_series(&self) -> &[Series] {
        &self.series
    }

    /// The element whose series agrees with `s` (to the shorter precision).
    pub fn find(&self, s: &Series) -> Option<usize> {
        self.series.iter().position(|x| x.agrees_with(s))
    }

    /// `g·x = x(f_g)`.
    pub fn act(&self, g: usize, x: &Series) -> Result<Series, ActionError> {
        Ok(x.compose(&self.series[g])?)
    }

    /// The same action known to a lower precision.
    pub fn truncate(&self, prec: i64) -> LocalAction {
        LocalAction {
            group: self.group.clone(),
            field: self.field,
            prec: prec.min(self.prec),
            series: self.series.iter().map(|s| s.truncate(prec)).collect(),
        }
    }

    /// Restriction to a subgroup (indexing of [`Subgroup::to_group`]).
    pub fn restrict(&self, sub: &Subgroup) -> LocalAction {
        LocalAction {
            group: sub.to_group(&self.group),
            field: self.field,
            prec: self.prec,
            series: sub.elements().iter().map(|&g| self.series[g].clone()).collect(),
        }
    }

    /// `i(g) = ord(f_g − t)` for `g ≠ e`.
    pub fn lower_index(&self, g: usize) -> Result<i64, ActionError> {
        let d = self.series[g].sub(&Series::var(self.field, self.prec));
        if d.is_zero() {
            return Err(ActionError::Precision(format!(
                "f_{g} agrees with t modulo t^{}; the filtration cannot be certified",
                self.prec
            )));
        }
        Ok(d.val())
    }

    /// Lower ramification filtration, conductor and the order of the
    /// different (by Hilbert's formula and through `ord(dy_G/dt)`).
    pub fn ramification(&self) -> Result<RamificationData, ActionError> {
        let n = self.group.order();
        let mut idx = vec![i64::MAX; n];
        for (g, slot) in idx.iter_mut().enumerate().skip(1) {
            *slot = self.lower_index(g)?;
        }
        let top = idx.iter().skip(1).copied().max().unwrap_or(1);
        let mut filtration = Vec::new();
        let mut normal = Vec::new();
        for i in 0..=top {
            let el: Vec<usize> = (0..n).filter(|&g| g == 0 || idx[g] > i).collect();
            let sub = Subgroup::new(&self.group, &el)?;
            normal.push(sub.is_normal(&self.group));
            filtration.push(sub);
        }
        let different_order: i64 = idx.iter().skip(1).sum();
        let hilbert: i64 = filtration.iter().map(|s| s.order() as i64 - 1).sum();
        debug_assert_eq!(hilbert, different_order);
        let y = self.invariant_generator(&Subgroup::whole(&self.group));
        let dy = y.derivative();
        let derivative_order = if dy.is_zero() { None } else { Some(dy.val()) };
        Ok(RamificationData {
            filtration,
            normal,
            conductor: top - 1,
            different_order,
            derivative_order,
        })
    }

    /// `y_N = ∏_{s ∈ N} f_s`, a generator of the invariants of `N`.
    pub fn invariant_generator(&self, n: &Subgroup) -> Series {
        let factors: Vec<Series> = n.elements().iter().map(|&s| self.series[s].clone()).collect();
        orbit_product(&factors)
    }

    /// The induced action of `G/N` on `k[[y_N]]`: `f♯_ḡ` is `y_N(f_g)`
    /// written as a series in `y_N`.
    pub fn quotient_action(&self, n: &Subgroup) -> Result<(QuotientGroup, LocalAction), ActionError> {
        let q = QuotientGroup::new(&self.group, n)?;
        let y = self.invariant_generator(n);
        let mut series = Vec::with_capacity(q.order());
        for c in 0..q.order() {
            let g = q.section(c);
            let factors: Vec<Series> = n.elements().iter().map(|&s| self.series[self.group.mul(g, s)].clone()).collect();
            let gy = orbit_product(&factors);
            let fs = gy.express_in(&y)?;
            check_automorphism(&fs, "quotient series")?;
            series.push(fs);
        }
        let act = LocalAction::new_unchecked(q.group().clone(), self.field, series)?;
        Ok((q, act))
    }
}

fn first_difference(a: &Series, b: &Series) -> i64 {
    let d = a.sub(b);
    d.val() + 1
}

fn table_from_series(name: String, field: PrimeField, elems: &[Series], prec: i64) -> Result<FiniteGroup, ActionError> {
    // Distinct elements already differ below t^K with K = max ord(f_g − t) + 1.
    let t = Series::var(field, prec);
    let k = elems
        .iter()
        .skip(1)
        .map(|s| s.sub(&t).val() + 1)
        .max()
        .unwrap_or(2)
        .min(prec);
    let short: Vec<Series> = elems.iter().map(|s| s.truncate(k)).collect();
    let index: HashMap<Series, usize> = short.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    if index.len() != elems.len() {
        return Err(ActionError::Precision("elements coincide at the separating precision".into()));
    }
    let n = elems.len();
    let mut table = vec![vec![0usize; n]; n];
    for a in 0..n {
        let mut pt = PowerTable::new(&short[a], k as usize)?;
        for b in 0..n {
            // f_{ab} = f_b(f_a)
            let s = pt.compose(&short[b])?.truncate(k);
            table[a][b] = *index
                .get(&s)
                .ok_or_else(|| ActionError::Precision("product not found among the elements".into()))?;
        }
    }
    Ok(FiniteGroup::new(name, table)?)
}

/// Lower ramification data of an action.
#[derive(Clone, Debug)]
pub struct RamificationData {
    /// `G_0 ⊇ G_1 ⊇ …` down to the first trivial group.
    pub filtration: Vec<Subgroup>,
    /// Whether each `G_i` is normal in `G`.
    pub normal: Vec<bool>,
    /// The largest `i` with `G_i ≠ 1` (0 for tame actions).
    pub conductor: i64,
    /// `Σ_{g ≠ e} ord(f_g − t) = Σ_i (|G_i| − 1)`.
    pub different_order: i64,
    /// `ord(dy_G/dt)`, if the precision allows computing it.
    pub derivative_order: Option<i64>,
}

impl RamificationData {
    /// True when `G_2` is trivial.
    pub fn weakly_ramified(&self) -> bool {
        self.filtration.get(2).is_none_or(|s| s.order() == 1)
    }

    /// True when the Hilbert sum agrees with `ord(dy_G/dt)`.
    pub fn different_consistent(&self) -> bool {
        self.derivative_order == Some(self.different_order)
    }
}

fn check_prime(p: u64) -> Result<PrimeField, ActionError> {
    if !is_prime(p) {
        return Err(ActionError::Parameter(format!("{p} is not prime")));
    }
    PrimeField::new(p).map_err(|e| ActionError::Parameter(e.to_string()))
}

/// `t/(1 + c·t) = Σ_{e ≥ 1} (−c)^{e−1} t^e` modulo `t^prec`.
pub fn moebius(field: PrimeField, c: u64, prec: i64) -> Series {
    let mut coeffs = Vec::with_capacity(prec.max(1) as usize);
    let mut pw = 1u64;
    let mc = field.neg(field.reduce(c));
    for _ in 1..prec {
        coeffs.push(pw);
        pw = field.mul(pw, mc);
    }
    Series::from_coeffs(field, 1, prec, &coeffs)
}

/// ℤ/p acting by `σ(t) = t/(1 + t)`.
pub fn standard_cyclic_p(p: u64, prec: i64) -> Result<LocalAction, ActionError> {
    let f = check_prime(p)?;
    LocalAction::from_generators(format!("Z/{p}"), f, &[moebius(f, 1, prec)])
}

fn exact_order(f: PrimeField, zeta: u64, m: u64) -> Result<(), ActionError> {
    if m == 0 || (f.p() - 1) % m != 0 {
        return Err(ActionError::Parameter(format!("{m} does not divide {}", f.p() - 1)));
    }
    if f.order(f.reduce(zeta)) != Some(m) {
        return Err(ActionError::Parameter(format!("{zeta} does not have exact order {m} in F_{}", f.p())));
    }
    Ok(())
}

/// ℤ/m acting by `σ(t) = ζ·t` (`ζ` of exact order `m`).
pub fn tame_cyclic(p: u64, m: u64, zeta: u64, prec: i64) -> Result<LocalAction, ActionError> {
    let f = check_prime(p)?;
    exact_order(f, zeta, m)?;
    LocalAction::from_generators(format!("Z/{m}"), f, &[Series::monomial(f, 1, zeta as i64, prec)])
}

/// The dihedral group of order `2p`: `σ(t) = t/(1+t)`, `τ(t) = −t`.
pub fn dihedral_p(p: u64, prec: i64) -> Result<LocalAction, ActionError> {
    let f = check_prime(p)?;
    if p == 2 {
        return Err(ActionError::Parameter("p must be odd".into()));
    }
    LocalAction::from_generators(
        format!("D{p}"),
        f,
        &[moebius(f, 1, prec), Series::monomial(f, 1, -1, prec)],
    )
}

/// `ℤ/p ⋊ ℤ/m`: `σ(t) = t/(1+t)`, `τ(t) = ζ·t`.
pub fn metacyclic(p: u64, m: u64, zeta: u64, prec: i64) -> Result<LocalAction, ActionError> {
    let f = check_prime(p)?;
    exact_order(f, zeta, m)?;
    LocalAction::from_generators(
        format!("Z/{p}xZ/{m}"),
        f,
        &[moebius(f, 1, prec), Series::monomial(f, 1, zeta as i64, prec)],
    )
}

/// `(1 + t)^{-1/m}` modulo `t^prec` (`m` prime to `p`), by Newton's
/// iteration on `h^m·(1 + t) = 1`.
fn inverse_root_one_plus_t(field: PrimeField, m: u64, prec: i64) -> Result<Series, ActionError> {
    let minv = field
        .inv(field.reduce(m))
        .ok_or_else(|| ActionError::Parameter(format!("{m} is divisible by {}", field.p())))?;
    let base = Series::from_terms(field, &[(0, 1), (1, 1)], prec);
    let mut h = Series::one(field, prec);
    let mut known = 1i64;
    while known < prec {
        // h ← h − (h^m(1+t) − 1)·h / (m·h^m(1+t))  ≡  h − (h^m(1+t) − 1)·h/m
        let hm = h.pow(m).mul(&base);
        let err = hm.sub(&Series::one(field, prec));
        h = h.sub(&err.mul(&h).scale(minv));
        known *= 2;
    }
    Ok(h.truncate(prec))
}

/// `ℤ/p × ℤ/m`: `σ(t) = t·(1 + t^m)^{−1/m}` (lower jump `m`) commuting with
/// `τ(t) = ζ·t` (`ζ` of exact order `m`).
pub fn wild_times_tame(p: u64, m: u64, zeta: u64, prec: i64) -> Result<LocalAction, ActionError> {
    let f = check_prime(p)?;
    exact_order(f, zeta, m)?;
    let h = inverse_root_one_plus_t(f, m, prec)?;
    let tm = Series::monomial(f, m as i64, 1, prec);
    let sigma = h.compose(&tm)?.mul(&Series::var(f, prec)).truncate(prec);
    LocalAction::from_generators(
        format!("Z/{p}xZ/{m}"),
        f,
        &[sigma, Series::monomial(f, 1, zeta as i64, prec)],
    )
}

/// A group of order `p²` with both layers wild: in `u = 1/t`,
/// `σ(u) = u + 1` and `τ(u) = u + F(U)` with `U = u^p − u`,
/// `F = −Σ_k b^{p^k}` and `b = β(U) − U` for the order-`p` automorphism
/// `β(1/U) = (1/U)·(1 + U^{−m})^{−1/m}`. Then `F^p − F = b`, so `τ`
/// commutes with `σ` and induces `β` on the invariant `U`; `⟨σ⟩` is normal
/// with wild quotient.
pub fn wild_square(p: u64, m: u64, prec: i64) -> Result<LocalAction, ActionError> {
    let f = check_prime(p)?;
    if m < 2 {
        return Err(ActionError::Parameter("the jump m must be at least 2".into()));
    }
    let pi = p as i64;
    let mi = m as i64;
    let work = prec / pi + mi + 4;
    // R = (1 + T^m)^{1/m}, b = (R − 1)/T
    let h = inverse_root_one_plus_t(f, m, work + 1)?;
    let tm = Series::monomial(f, mi, 1, work + 1);
    let r = h.compose(&tm)?.invert()?;
    let b = r.sub(&Series::one(f, work + 1)).shift(-1);
    let mut sum = Series::zero(f, b.prec());
    let mut q = 1u64;
    while (mi - 1) * (q as i64) < b.prec() {
        sum = sum.add(&b.pow(q));
        q *= p;
    }
    let big_f = sum.neg();
    // T(t) = t^p / (1 − t^{p−1})
    let wprec = prec + 2;
    let denom = Series::one(f, wprec).sub(&Series::monomial(f, pi - 1, 1, wprec));
    let tt = Series::monomial(f, pi, 1, wprec).mul(&denom.invert()?);
    let ft = big_f.compose(&tt)?;
    let t = Series::var(f, wprec);
    let tau = t.mul(&Series::one(f, wprec).add(&t.mul(&ft)).invert()?).truncate(prec);
    LocalAction::from_generators(format!("Z/{p}.Z/{p}"), f, &[moebius(f, 1, prec), tau])
}
