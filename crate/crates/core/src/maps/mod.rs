//! Cohomological maps between the derivation lattices attached to a normal
//! subgroup `N ⊴ G`, and machine checks of the diagrams relating them.
//!
//! All modules are handled in lattice form: a derivation `d` of k[[t]] is
//! recorded as the series `d(y_G)`, which turns every module into a lattice
//! of k((t)) with the substitution action `g·x = x(f_g)`:
//!
//! | module | lattice | variable |
//! |---|---|---|
//! | `𝔡` | `t^{δ_G} k[[t]]` | `t` |
//! | `𝔡₁` | `t^{v₁} k[[t]]`, `v₁ = δ_G − δ_N` | `t` |
//! | `𝔡^N` | `y^{j₀} k[[y]]`, `j₀ = ⌈δ_G/|N|⌉` | `y = y_N` |
//! | `𝔡^♯ = 𝔡₁^N` | `y^{j₁} k[[y]]`, `j₁ = δ_{G/N}` | `y` |
//!
//! A first-order lift `F_g = f_g + ε·c_g·f_g'` of the action corresponds to
//! the derivation cocycle `c_g d/dt`, and to the lattice cocycle
//! `a_g = c_g·y_G'`.

mod diagrams;
mod presentation;

pub use diagrams::*;
pub use presentation::*;

use std::cell::OnceCell;

use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use crate::action::{ideal_module, substitution_matrix, ActionError, Levels, LocalAction, SubmoduleMaps};
use crate::groups::{
    coboundary, cohomology, cohomology_tail, inflate, invariants_of_h1, transgression, Cochain, CocycleSolver, CohomologySpace,
    GModule, GroupError, QuotientGroup, Subgroup,
};
use crate::linalg::{axpy, LinalgError, Matrix, PrimeField, SpanSolver};
use crate::series::{Series, SeriesError};

/// Errors raised by the maps layer.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapsError {
    /// The known precision is too small.
    #[error("precision too low: {0}")]
    Precision(String),
    /// The truncated and exact presentations of a cohomology group differ.
    #[error("truncation is not stable for {what}: exact dimension {exact}, truncated dimension {truncated}")]
    Stabilization {
        /// The group concerned.
        what: String,
        /// Dimension from the explicit Hilbert 90 window.
        exact: usize,
        /// Dimension from the truncated modules.
        truncated: usize,
    },
    /// A cochain that should be a cocycle is not.
    #[error("not a cocycle: {0}")]
    NotCocycle(String),
    /// A class that should be invariant under `G/N` is not.
    #[error("class is not invariant under the quotient group")]
    NotInvariant,
    /// The splitting `α^g − α = a_g + b_g` could not be found.
    #[error("decomposition infeasible: {0}")]
    Decomposition(String),
    /// Invalid arguments.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Action-layer failure.
    #[error(transparent)]
    Action(#[from] ActionError),
    /// Group-layer failure.
    #[error(transparent)]
    Group(#[from] GroupError),
    /// Series arithmetic failure.
    #[error(transparent)]
    Series(#[from] SeriesError),
    /// Linear algebra failure.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl MapsError {
    /// True for failures caused by insufficient precision.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            MapsError::Precision(_)
                | MapsError::Action(ActionError::Precision(_))
                | MapsError::Series(SeriesError::Precision(_))
        )
    }
}

/// Which cohomology group a [`TangentVector`] lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
pub enum ModuleTag {
    /// `H¹(G, 𝔡)`.
    GroupFull,
    /// `H¹(N, 𝔡)`.
    SubgroupFull,
    /// `H¹(G/N, 𝔡^N)`.
    QuotientInvariant,
    /// `H¹(G/N, 𝔡^♯)`.
    QuotientSharp,
    /// `H¹(G/N, 𝔡^♯/𝔡^N)`.
    QuotientRatio,
    /// `H¹(G, 𝔡₁)`.
    GroupIdeal1,
}

/// A class in one of the first cohomology groups of a [`Tower`], with a
/// representative cocycle in lattice form.
#[derive(Clone, Debug, Serialize)]
pub struct TangentVector {
    /// The ambient group.
    pub module: ModuleTag,
    /// Coordinates in the tower's basis of that group.
    pub coords: Vec<u64>,
    /// Representative: one lattice series per element of the acting group
    /// (local indexing), in the variable of that group (`t` or `y`).
    #[serde(skip)]
    pub values: Vec<Series>,
}

impl TangentVector {
    /// True when the class is zero.
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// The representative in the text format of the series module.
    pub fn values_text(&self, var: &str) -> Vec<String> {
        self.values.iter().map(|s| s.to_text(var)).collect()
    }
}

/// The α of additive Hilbert 90 for a subgroup `N`:
/// `α = −y_N/y_N' · Σ_{s∈N} a_s·f_s'/f_s`, which satisfies `α(f_s) − α = a_s`
/// for every 1-cocycle `s ↦ a_s` of `N` with values in k((t)).
#[derive(Clone, Debug)]
pub struct Splitting {
    elements: Vec<usize>,
    factor: Series,
    log_derivs: Vec<Series>,
    delta_n: i64,
}

impl Splitting {
    /// Prepares the splitting for `N` (ambient indexing of `action`).
    pub fn new(action: &LocalAction, n: &Subgroup) -> Result<Self, MapsError> {
        let y = action.invariant_generator(n);
        let dy = y.derivative();
        let factor = y.div(&dy)?.neg();
        let log_derivs = n
            .elements()
            .iter()
            .map(|&s| {
                let f = action.series(s);
                Ok(f.derivative().div(f)?)
            })
            .collect::<Result<Vec<_>, MapsError>>()?;
        Ok(Self {
            elements: n.elements().to_vec(),
            factor,
            log_derivs,
            delta_n: dy.val(),
        })
    }

    /// `α` for the cocycle `a` given on `N` (local indexing).
    pub fn alpha(&self, a: &[Series]) -> Result<Series, MapsError> {
        if a.len() != self.elements.len() {
            return Err(MapsError::Invalid(format!(
                "{} values for a subgroup of order {}",
                a.len(),
                self.elements.len()
            )));
        }
        let mut sum: Option<Series> = None;
        for (x, w) in a.iter().zip(&self.log_derivs) {
            if x.is_zero() && x.prec() > 0 {
                let term = Series::zero(x.field(), x.prec() + w.val());
                sum = Some(match sum {
                    None => term,
                    Some(s) => s.add(&term),
                });
                continue;
            }
            let term = x.mul(w);
            sum = Some(match sum {
                None => term,
                Some(s) => s.add(&term),
            });
        }
        let sum = sum.ok_or_else(|| MapsError::Invalid("empty subgroup".into()))?;
        Ok(sum.mul(&self.factor))
    }

    /// The lower bound `min ord a_s + |N| − δ_N − 1` on `ord α`.
    pub fn valuation_bound(&self, a: &[Series]) -> i64 {
        let m = a.iter().filter(|s| !s.is_zero()).map(|s| s.val()).min().unwrap_or(i64::MAX / 4);
        m + self.elements.len() as i64 - self.delta_n - 1
    }

    /// Order of the different of `N`.
    pub fn delta(&self) -> i64 {
        self.delta_n
    }
}

/// Checks the twisted cocycle condition `a_{gs} = a_s(f_g) + a_g`: for
/// `a` of length `|N|` over `g, s ∈ N`, for `a` of length `|G|` over
/// `g ∈ G, s ∈ N`. Returns the first failing pair.
pub fn check_twisted_cocycle(action: &LocalAction, n: &Subgroup, a: &[Series]) -> Result<(), MapsError> {
    let g = action.group();
    let full = a.len() == g.order();
    if !full && a.len() != n.order() {
        return Err(MapsError::Invalid(format!("{} values for groups of order {} and {}", a.len(), g.order(), n.order())));
    }
    let value = |x: usize| -> &Series {
        if full {
            &a[x]
        } else {
            &a[n.position(x).expect("element of N")]
        }
    };
    // Only when `g` and `s` range over the same group does it suffice to
    // take `g` among generators: `a_{xys} = x·(y·a_s + a_y) + a_x`.
    let outer: Vec<usize> = if !full {
        n.to_group(g).generators().iter().map(|&i| n.elements()[i]).collect()
    } else if n.order() == g.order() {
        g.generators()
    } else {
        (0..g.order()).collect()
    };
    for &x in &outer {
        for &s in n.elements() {
            let lhs = value(g.mul(x, s));
            let rhs = action.act(x, value(s))?.add(value(x));
            if !lhs.agrees_with(&rhs) {
                return Err(MapsError::NotCocycle(format!("a_(g·s) ≠ a_s(f_g) + a_g for g = {x}, s = {s}")));
            }
        }
    }
    Ok(())
}

/// The splitting element of additive Hilbert 90: for a cocycle `a` of `N`
/// (length `|N|`, or length `|G|` with the twisted condition over `G × N`),
/// returns `α` with `α(f_s) − α = a_s` for `s ∈ N`.
pub fn hilbert90_alpha(action: &LocalAction, n: &Subgroup, a: &[Series]) -> Result<Series, MapsError> {
    check_twisted_cocycle(action, n, a)?;
    let on_n: Vec<Series> = if a.len() == n.order() {
        a.to_vec()
    } else {
        n.elements().iter().map(|&s| a[s].clone()).collect()
    };
    Splitting::new(action, n)?.alpha(&on_n)
}

/// Outcome of [`effective_h90_split`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SplitOutcome {
    /// The bound holds and `α ∈ J` splits the cocycle.
    Split {
        /// The splitting element, in text form.
        alpha: String,
        /// Its valuation.
        valuation: i64,
    },
    /// `ord(I J⁻¹)` is below `δ − |G| + 1`.
    BoundNotMet {
        /// Required value of `ord(I J⁻¹)`.
        required: i64,
        /// Actual value.
        actual: i64,
    },
}

/// Effective Hilbert 90: a cocycle `a` of `G` with values in
/// `I = t^{i_start} k[[t]]` is the coboundary of some `α ∈ J =
/// t^{j_start} k[[t]]` as soon as `i_start − j_start ≥ δ_G − |G| + 1`.
pub fn effective_h90_split(action: &LocalAction, a: &[Series], i_start: i64, j_start: i64) -> Result<(SplitOutcome, Option<Series>), MapsError> {
    let g = action.group();
    if a.len() != g.order() {
        return Err(MapsError::Invalid("one value per group element expected".into()));
    }
    if let Some(bad) = a.iter().find(|s| !s.is_zero() && s.val() < i_start) {
        return Err(MapsError::Invalid(format!("value of valuation {} lies outside I", bad.val())));
    }
    let delta = action.ramification()?.different_order;
    let required = delta - g.order() as i64 + 1;
    let actual = i_start - j_start;
    if actual < required {
        return Ok((SplitOutcome::BoundNotMet { required, actual }, None));
    }
    let whole = Subgroup::whole(g);
    let alpha = hilbert90_alpha(action, &whole, a)?;
    if !alpha.is_zero() && alpha.val() < j_start {
        return Err(MapsError::Invalid(format!("α has valuation {} outside J", alpha.val())));
    }
    for (x, ax) in a.iter().enumerate() {
        if !action.act(x, &alpha)?.sub(&alpha).agrees_with(ax) {
            return Err(MapsError::Invalid(format!("α does not split the cocycle at element {x}")));
        }
    }
    Ok((
        SplitOutcome::Split {
            alpha: alpha.to_text("t"),
            valuation: alpha.val(),
        },
        Some(alpha),
    ))
}

/// All data attached to an action with a normal subgroup: the quotient
/// action, the lattice levels, the cohomology presentations and caches for
/// the closed formulas.
#[derive(Debug)]
pub struct Tower {
    action: LocalAction,
    n: Subgroup,
    q: QuotientGroup,
    qaction: LocalAction,
    levels: Levels,
    sub: SubmoduleMaps,
    y: Series,
    subs: Substitutions,
    split: Splitting,
    g_d: LatticeCohomology,
    n_d: LatticeCohomology,
    q_dn: LatticeCohomology,
    q_ds: LatticeCohomology,
    g_d1: LatticeCohomology,
    quot: GModule,
    q_quot: CohomologySpace,
    invariants: Vec<Vec<u64>>,
    inv_solver: SpanSolver,
    log_derivs: Vec<Series>,
    y_of: Vec<Series>,
    dy_ratio: Vec<Series>,
    yg_prime_inv: Series,
    dyg: Series,
    dyq: Series,
    sharp_factor: Series,
    ypow: Vec<Series>,
    dn_solver: SpanSolver,
    dn_to_d_fine: Matrix,
    h2_dn: OnceCell<CohomologySpace>,
    h2_ds: OnceCell<CohomologySpace>,
    d_solver: OnceCell<CocycleSolver>,
    d1_solver: OnceCell<CocycleSolver>,
}

impl Tower {
    /// Levels the tower would use, and hence the precision the action needs.
    pub fn levels_for(action: &LocalAction, n: &Subgroup, m: Option<i64>) -> Result<Levels, MapsError> {
        Ok(Levels::for_action(action, n, m)?)
    }

    /// Builds the tower; the action must be known to at least
    /// [`Levels::prec`].
    pub fn new(action: &LocalAction, n: &Subgroup, m: Option<i64>) -> Result<Self, MapsError> {
        let g = action.group();
        if !n.is_normal(g) {
            return Err(MapsError::Invalid("subgroup is not normal".into()));
        }
        let levels = Levels::for_action(action, n, m)?;
        if action.prec() < levels.prec {
            return Err(MapsError::Precision(format!(
                "the action is known modulo t^{}, the truncation M = {} needs t^{}",
                action.prec(),
                levels.m,
                levels.prec
            )));
        }
        let action = action.truncate(levels.prec);
        let f = action.field();
        let l = levels.clone();
        let (q, qaction) = action.quotient_action(n)?;
        let naction = action.restrict(n);
        let sub = SubmoduleMaps::new(&action, n, &l)?;
        let y = action.invariant_generator(n);
        let yg = action.invariant_generator(&Subgroup::whole(g));
        let subs = Substitutions::new(&action, l.f_t)?;
        let split = Splitting::new(&action, n)?;
        let g_d = LatticeCohomology::with_substitutions(&action, l.delta_g, l.c_t, l.f_t, &subs)?;
        let n_d = LatticeCohomology::with_substitutions(&naction, l.delta_g, l.c_t, l.f_t, &subs.restrict(n.elements()))?;
        let q_dn = LatticeCohomology::new(&qaction, l.j0, l.c_y, l.f_y)?;
        let q_ds = LatticeCohomology::new(&qaction, l.j1, l.c_y, l.f_y)?;
        let g_d1 = LatticeCohomology::with_substitutions(&action, l.v1, l.c_t, l.f_t, &subs)?;
        let quot = ideal_module(&qaction, l.j1, l.j0)?;
        let q_quot = cohomology(&quot, 1)?;
        let invariants = invariants_of_h1(g_d.coarse_module(), n, &q, n_d.space())?;
        let mut inv_solver = SpanSolver::new(f, n_d.dim());
        for v in &invariants {
            inv_solver.push(v);
        }
        let log_derivs = action
            .all_series()
            .iter()
            .map(|s| Ok(s.derivative().div(s)?))
            .collect::<Result<Vec<_>, MapsError>>()?;
        let dy = y.derivative();
        let mut y_of = Vec::with_capacity(q.order());
        let mut dy_ratio = Vec::with_capacity(q.order());
        for c in 0..q.order() {
            let yg_c = subs.apply(q.section(c), &y)?;
            dy_ratio.push(yg_c.derivative().div(&dy)?);
            y_of.push(yg_c);
        }
        let dyg = yg.derivative();
        let yg_prime_inv = dyg.invert()?;
        let sharp_factor = dyg.div(&dy)?;
        let dyq = qaction.invariant_generator(&Subgroup::whole(qaction.group())).derivative();
        let ypow = (l.j1..l.j0.max(l.j1)).map(|j| y.pow(j as u64)).collect();
        let mut dn_solver = SpanSolver::new(f, sub.dn_to_d.rows());
        for j in 0..sub.dn_to_d.cols() {
            dn_solver.push(&sub.dn_to_d.col(j));
        }
        let dn_to_d_fine = substitution_matrix(&y, l.j0, l.f_y, l.delta_g, l.f_t)?;
        Ok(Self {
            action,
            n: n.clone(),
            q,
            qaction,
            levels,
            sub,
            y,
            subs,
            split,
            g_d,
            n_d,
            q_dn,
            q_ds,
            g_d1,
            quot,
            q_quot,
            invariants,
            inv_solver,
            log_derivs,
            y_of,
            dy_ratio,
            yg_prime_inv,
            dyg,
            dyq,
            sharp_factor,
            ypow,
            dn_solver,
            dn_to_d_fine,
            h2_dn: OnceCell::new(),
            h2_ds: OnceCell::new(),
            d_solver: OnceCell::new(),
            d1_solver: OnceCell::new(),
        })
    }

    /// The action (at the tower's precision).
    pub fn action(&self) -> &LocalAction {
        &self.action
    }

    /// The normal subgroup.
    pub fn subgroup(&self) -> &Subgroup {
        &self.n
    }

    /// The quotient group.
    pub fn quotient(&self) -> &QuotientGroup {
        &self.q
    }

    /// The induced action of `G/N` on k[[y_N]].
    pub fn quotient_action(&self) -> &LocalAction {
        &self.qaction
    }

    /// The lattice levels.
    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    /// `y_N`.
    pub fn invariant_generator(&self) -> &Series {
        &self.y
    }

    /// `dy_G/dt`: a derivation `c·d/dt` has lattice form `c·y_G'`.
    pub fn dyg(&self) -> &Series {
        &self.dyg
    }

    /// `dy_G/dy` with `y_G` written in `y = y_N`: a derivation `c·d/dy` of
    /// `k[[y]]` has lattice form `c·dy_G/dy` in `𝔡^♯`.
    pub fn dyq(&self) -> &Series {
        &self.dyq
    }

    /// The power tables of every element, of length `f_t`.
    pub fn substitutions(&self) -> &Substitutions {
        &self.subs
    }

    /// Field of the action.
    pub fn field(&self) -> PrimeField {
        self.action.field()
    }

    /// The presentation of the given group.
    pub fn presentation(&self, tag: ModuleTag) -> Option<&LatticeCohomology> {
        match tag {
            ModuleTag::GroupFull => Some(&self.g_d),
            ModuleTag::SubgroupFull => Some(&self.n_d),
            ModuleTag::QuotientInvariant => Some(&self.q_dn),
            ModuleTag::QuotientSharp => Some(&self.q_ds),
            ModuleTag::GroupIdeal1 => Some(&self.g_d1),
            ModuleTag::QuotientRatio => None,
        }
    }

    /// The finite module `𝔡^♯/𝔡^N` (basis `y^{j₁}, …, y^{j₀−1}`).
    pub fn ratio_module(&self) -> &GModule {
        &self.quot
    }

    /// `H¹(G/N, 𝔡^♯/𝔡^N)`.
    pub fn ratio_cohomology(&self) -> &CohomologySpace {
        &self.q_quot
    }

    /// Dimension of the group tagged `tag`.
    pub fn dim(&self, tag: ModuleTag) -> usize {
        match self.presentation(tag) {
            Some(p) => p.dim(),
            None => self.q_quot.dim(),
        }
    }

    /// Coordinates (in the basis of `H¹(N, 𝔡)`) of a basis of the
    /// `G/N`-invariant classes.
    pub fn invariant_basis(&self) -> &[Vec<u64>] {
        &self.invariants
    }

    /// The tangent vector of a cocycle given in lattice form.
    pub fn tangent(&self, tag: ModuleTag, values: Vec<Series>) -> Result<TangentVector, MapsError> {
        let coords = match tag {
            ModuleTag::QuotientRatio => {
                let c = values_cochain(&values, self.levels.j1, self.levels.j0)?;
                self.q_quot.coords(&c)?
            }
            _ => self.presentation(tag).expect("lattice group").coords_of_values(&values)?,
        };
        Ok(TangentVector {
            module: tag,
            coords,
            values,
        })
    }

    /// The basis class `j` of a presented group, with its exact representative.
    pub fn basis_vector(&self, tag: ModuleTag, j: usize) -> Result<TangentVector, MapsError> {
        let p = self
            .presentation(tag)
            .ok_or_else(|| MapsError::Invalid("no exact representatives for the ratio module".into()))?;
        let mut x = vec![0u64; p.dim()];
        x[j] = 1;
        self.tangent(tag, p.cocycle(&x))
    }

    /// The class with coordinates `x` of a presented group, with its exact
    /// representative.
    pub fn basis_combination(&self, tag: ModuleTag, x: &[u64]) -> Result<TangentVector, MapsError> {
        let p = self
            .presentation(tag)
            .ok_or_else(|| MapsError::Invalid("no exact representatives for the ratio module".into()))?;
        self.tangent(tag, p.cocycle(x))
    }

    /// A random cocycle in the class `x` of a presented group.
    pub fn random_vector(&self, tag: ModuleTag, x: &[u64], rng: &mut dyn RngCore) -> Result<TangentVector, MapsError> {
        let p = self
            .presentation(tag)
            .ok_or_else(|| MapsError::Invalid("no exact representatives for the ratio module".into()))?;
        self.tangent(tag, p.random_cocycle(x, rng))
    }

    /// A random invariant class of `H¹(N, 𝔡)` with a random representative.
    pub fn random_invariant(&self, rng: &mut dyn RngCore) -> Result<TangentVector, MapsError> {
        let f = self.field();
        let mut x = vec![0u64; self.n_d.dim()];
        for v in &self.invariants {
            axpy(f, &mut x, rng.next_u64() % f.p(), v);
        }
        self.random_vector(ModuleTag::SubgroupFull, &x, rng)
    }

    /// Coordinates of an `N`-class in the invariant basis; fails with
    /// [`MapsError::NotInvariant`] outside the invariants.
    pub fn invariant_coords(&self, v: &TangentVector) -> Result<Vec<u64>, MapsError> {
        if v.module != ModuleTag::SubgroupFull {
            return Err(MapsError::Invalid("expected a class of N".into()));
        }
        self.inv_solver.express(&v.coords).ok_or(MapsError::NotInvariant)
    }

    fn expect(&self, v: &TangentVector, tag: ModuleTag) -> Result<(), MapsError> {
        if v.module != tag {
            return Err(MapsError::Invalid(format!("expected a class in {tag:?}, got {:?}", v.module)));
        }
        Ok(())
    }

    /// Restriction `H¹(G, 𝔡) → H¹(N, 𝔡)`; the image is checked to be
    /// `G/N`-invariant.
    pub fn tangent_restriction(&self, v: &TangentVector) -> Result<TangentVector, MapsError> {
        self.expect(v, ModuleTag::GroupFull)?;
        let values: Vec<Series> = self.n.elements().iter().map(|&s| v.values[s].clone()).collect();
        let r = self.tangent(ModuleTag::SubgroupFull, values)?;
        self.invariant_coords(&r)?;
        Ok(r)
    }

    /// The induced cocycle on `G/N` in lattice form, both as `y`-series and
    /// as `t`-series, by the closed formula
    /// `c♯_ḡ = y_N(f_g)·(dy_N(f_g)/dy_N)^{-1}·Σ_s c_{gs} f_{gs}'/f_{gs} − y_N·Σ_s c_s f_s'/f_s`
    /// for the derivation cocycle `c_g = a_g / y_G'`.
    pub fn induced_cocycle(&self, a: &[Series]) -> Result<(Vec<Series>, Vec<Series>), MapsError> {
        let g = self.action.group();
        if a.len() != g.order() {
            return Err(MapsError::Invalid("one value per group element expected".into()));
        }
        let c: Vec<Series> = a.iter().map(|x| x.mul(&self.yg_prime_inv)).collect();
        let orbit_sum = |rep: usize| -> Series {
            let mut acc: Option<Series> = None;
            for &s in self.n.elements() {
                let h = g.mul(rep, s);
                let term = c[h].mul(&self.log_derivs[h]);
                acc = Some(match acc {
                    None => term,
                    Some(x) => x.add(&term),
                });
            }
            acc.expect("nonempty subgroup")
        };
        let base = self.y.mul(&orbit_sum(0));
        let mut ys = Vec::with_capacity(self.q.order());
        let mut ts = Vec::with_capacity(self.q.order());
        for cc in 0..self.q.order() {
            let rep = self.q.section(cc);
            let csharp = self.y_of[cc].mul(&orbit_sum(rep)).div(&self.dy_ratio[cc])?.sub(&base);
            let at = csharp.mul(&self.sharp_factor);
            let ay = if at.is_zero() {
                Series::zero(self.field(), (at.prec() - 1).div_euclid(self.levels.order_n) + 1)
            } else {
                at.express_in(&self.y)
                    .map_err(|e| MapsError::NotCocycle(format!("induced value is not N-invariant: {e}")))?
            };
            ys.push(ay);
            ts.push(at);
        }
        Ok((ys, ts))
    }

    /// Induction `H¹(G, 𝔡) → H¹(G/N, 𝔡^♯)` by the closed formula.
    pub fn tangent_induction(&self, v: &TangentVector) -> Result<TangentVector, MapsError> {
        self.expect(v, ModuleTag::GroupFull)?;
        let (ys, _) = self.induced_cocycle(&v.values)?;
        self.tangent(ModuleTag::QuotientSharp, ys)
    }

    /// The Hilbert 90 element of a class of `N`.
    pub fn alpha(&self, v: &TangentVector) -> Result<Series, MapsError> {
        self.expect(v, ModuleTag::SubgroupFull)?;
        self.split.alpha(&v.values)
    }

    /// Writes `w ∈ 𝔡₁` as `a + b` with `a ∈ span(y^{j₁}, …, y^{j₀−1})` and
    /// `b ∈ 𝔡`, returning the coefficients of `a`.
    pub fn decompose(&self, w: &Series) -> Result<Vec<u64>, MapsError> {
        let l = &self.levels;
        let f = self.field();
        if w.prec() < l.delta_g {
            return Err(MapsError::Precision("difference known below the start of 𝔡 only".into()));
        }
        if !w.is_zero() && w.val() < l.v1 {
            return Err(MapsError::Decomposition(format!("α^g − α has valuation {} below 𝔡₁", w.val())));
        }
        let n = l.order_n;
        let mut rem = w.clone();
        let mut out = vec![0u64; (l.j0 - l.j1).max(0) as usize];
        for e in l.v1..l.delta_g {
            let r = rem.c(e);
            if r == 0 {
                continue;
            }
            if e % n != 0 {
                return Err(MapsError::Decomposition(format!("t^{e} is not the leading term of an N-invariant")));
            }
            let j = e / n;
            let yp = &self.ypow[(j - l.j1) as usize];
            let x = f.mul(r, f.inv(yp.lead().expect("nonzero")).expect("unit"));
            rem = rem.sub(&yp.scale(x));
            out[(j - l.j1) as usize] = x;
        }
        Ok(out)
    }

    /// `γ: H¹(N, 𝔡)^{G/N} → H¹(G/N, 𝔡^♯/𝔡^N)`, `γ[d] = −[ā]` where
    /// `α^g − α = a_g + b_g`, `a_g ∈ 𝔡^♯`, `b_g ∈ 𝔡`. With `rng`, `α` is
    /// shifted by a random element of `𝔡^♯` and the representative by a
    /// random coboundary first.
    pub fn gamma(&self, v: &TangentVector, rng: Option<&mut dyn RngCore>) -> Result<TangentVector, MapsError> {
        self.invariant_coords(v)?;
        let f = self.field();
        let l = &self.levels;
        let mut values = v.values.clone();
        let mut shift: Option<Series> = None;
        if let Some(rng) = rng {
            let dimf = self.n_d.fine_module().dim();
            let r: Vec<u64> = (0..dimf).map(|_| rng.next_u64() % f.p()).collect();
            for (x, b) in values.iter_mut().zip(self.n_d.coboundary_values(&r)) {
                *x = x.add(&b);
            }
            let mut s = Series::zero(f, l.f_t);
            for j in l.j1..l.j0 + 3 {
                let c = rng.next_u64() % f.p();
                if c != 0 {
                    s = s.add(&self.y.pow(j as u64).scale(c).truncate(l.f_t));
                }
            }
            shift = Some(s);
        }
        let mut alpha = self.split.alpha(&values)?;
        if let Some(s) = shift {
            alpha = alpha.add(&s);
        }
        let mut out = Vec::with_capacity(self.q.order());
        for c in 0..self.q.order() {
            let w = self.subs.difference(self.q.section(c), &alpha)?;
            let a = self.decompose(&w)?;
            let neg: Vec<u64> = a.iter().map(|&x| f.neg(x)).collect();
            out.push(Series::from_coeffs(f, l.j1, l.j0, &neg));
        }
        self.tangent(ModuleTag::QuotientRatio, out)
    }

    /// `σ: H¹(G/N, 𝔡^♯) → H¹(G/N, 𝔡^♯/𝔡^N)`.
    pub fn sigma(&self, v: &TangentVector) -> Result<TangentVector, MapsError> {
        self.expect(v, ModuleTag::QuotientSharp)?;
        let l = &self.levels;
        let vals = v.values.iter().map(|s| s.truncate(l.j0)).collect();
        self.tangent(ModuleTag::QuotientRatio, vals)
    }

    /// The map `𝔡^N → 𝔡^♯` on classes.
    pub fn push_invariant(&self, v: &TangentVector) -> Result<TangentVector, MapsError> {
        self.expect(v, ModuleTag::QuotientInvariant)?;
        self.tangent(ModuleTag::QuotientSharp, v.values.clone())
    }

    /// Inflation `H¹(G/N, 𝔡^N) → H¹(G, 𝔡)`, with an exact representative.
    pub fn inflate_invariant(&self, v: &TangentVector) -> Result<TangentVector, MapsError> {
        self.expect(v, ModuleTag::QuotientInvariant)?;
        let l = &self.levels;
        let f = self.field();
        let per_coset = v
            .values
            .iter()
            .map(|s| {
                let ycoords = crate::action::lattice_coords(s, l.j0, l.f_y)?;
                let t = self.dn_to_d_fine.mul_vec(&ycoords)?;
                Ok(Series::from_coeffs(f, l.delta_g, l.f_t, &t))
            })
            .collect::<Result<Vec<_>, MapsError>>()?;
        let values = (0..self.action.group().order()).map(|g| per_coset[self.q.project(g)].clone()).collect();
        self.tangent(ModuleTag::GroupFull, values)
    }

    /// The image of a class of `H¹(G, 𝔡)` in `H¹(G, 𝔡₁)`.
    pub fn to_ideal1(&self, v: &TangentVector) -> Result<TangentVector, MapsError> {
        self.expect(v, ModuleTag::GroupFull)?;
        self.tangent(ModuleTag::GroupIdeal1, v.values.clone())
    }

    /// Inflation `H¹(G/N, 𝔡^♯) → H¹(G, 𝔡₁)` of an induced cocycle given in
    /// `t`-form (one series per coset).
    pub fn inflate_sharp_t(&self, per_coset: &[Series]) -> Result<TangentVector, MapsError> {
        let values = (0..self.action.group().order()).map(|g| per_coset[self.q.project(g)].clone()).collect();
        self.tangent(ModuleTag::GroupIdeal1, values)
    }

    /// The connecting map `∂: H¹(G/N, 𝔡^♯/𝔡^N) → H²(G/N, 𝔡^N)` on a
    /// cocycle: the coboundary of the lift to the fine `𝔡^♯`, as a fine
    /// `𝔡^N` 2-cocycle.
    pub fn partial(&self, v: &TangentVector) -> Result<Cochain, MapsError> {
        self.expect(v, ModuleTag::QuotientRatio)?;
        let l = &self.levels;
        let fine = self.q_ds.fine_module();
        let width = (l.j0 - l.j1) as usize;
        let lift = Cochain::from_fn(1, self.q.order(), fine.dim(), |a| {
            let mut w = crate::action::lattice_coords(&v.values[a[0]], l.j1, l.j0).expect("ratio value");
            w.resize(fine.dim(), 0);
            w
        });
        let d = coboundary(fine, &lift)?;
        let dn_dim = fine.dim() - width;
        let mut bad = false;
        let out = Cochain::from_fn(2, self.q.order(), dn_dim, |a| {
            let val = d.value(a);
            if val[..width].iter().any(|&x| x != 0) {
                bad = true;
            }
            val[width..].to_vec()
        });
        if bad {
            return Err(MapsError::NotCocycle("the ratio class is not a cocycle".into()));
        }
        Ok(out)
    }

    /// Transgression of an invariant class of `N` computed from the fine
    /// truncation of `𝔡`, as a coarse `𝔡^N` 2-cocycle (in `y`-coordinates).
    pub fn transgression(&self, v: &TangentVector, rng: Option<&mut dyn RngCore>) -> Result<Cochain, MapsError> {
        self.invariant_coords(v)?;
        let l = &self.levels;
        let m = self.g_d.fine_module();
        let d = self.n_d.fine_cochain(&v.values)?;
        let tg = transgression(m, &self.n, &self.q, &d, rng).map_err(|e| match e {
            GroupError::NotInvariant => MapsError::NotInvariant,
            other => other.into(),
        })?;
        let coarse_t = (l.c_t - l.delta_g) as usize;
        let coarse_dim = (l.c_y - l.j0) as usize;
        let mut rows = Vec::with_capacity(self.q.order() * self.q.order());
        for x in 0..self.q.order() {
            for z in 0..self.q.order() {
                let t = &tg.value.value(&[x, z])[..coarse_t];
                let yc = self
                    .dn_solver
                    .express(t)
                    .ok_or_else(|| MapsError::Precision("transgression value is not N-invariant at the coarse level".into()))?;
                rows.push(yc);
            }
        }
        let qn = self.q.order();
        Ok(Cochain::from_fn(2, qn, coarse_dim, |a| rows[a[0] * qn + a[1]].clone()))
    }

    /// Truncates a fine `𝔡^N` 2-cochain to the coarse level.
    pub fn coarse_dn(&self, c: &Cochain) -> Cochain {
        let l = &self.levels;
        let k = (l.c_y - l.j0) as usize;
        Cochain::from_fn(c.degree(), c.group_order(), k, |a| c.value(a)[..k].to_vec())
    }

    /// `H²(G/N, 𝔡^N)` as the image of the fine truncation in the coarse one.
    pub fn h2_invariant(&self) -> Result<&CohomologySpace, MapsError> {
        if let Some(s) = self.h2_dn.get() {
            return Ok(s);
        }
        let s = tail2(&self.q_dn)?;
        Ok(self.h2_dn.get_or_init(|| s))
    }

    /// `H²(G/N, 𝔡^♯)` as the image of the fine truncation in the coarse one.
    pub fn h2_sharp(&self) -> Result<&CohomologySpace, MapsError> {
        if let Some(s) = self.h2_ds.get() {
            return Ok(s);
        }
        let s = tail2(&self.q_ds)?;
        Ok(self.h2_ds.get_or_init(|| s))
    }

    /// Pushes a coarse `𝔡^N` cochain into coarse `𝔡^♯` coordinates.
    pub fn push_dn_cochain(&self, c: &Cochain) -> Cochain {
        let l = &self.levels;
        let width = (l.j0 - l.j1) as usize;
        let dim = (l.c_y - l.j1) as usize;
        Cochain::from_fn(c.degree(), c.group_order(), dim, |a| {
            let mut v = vec![0u64; width];
            v.extend_from_slice(c.value(a));
            v
        })
    }

    /// Inflates a coarse `𝔡^N` 2-cocycle (`y`-coordinates) to `G`, with
    /// values in the coarse `𝔡` (`to_ideal1 = false`) or `𝔡₁` (`true`), and
    /// decides whether it is a coboundary there by a linear solve.
    pub fn inflated_is_coboundary(&self, c: &Cochain, to_ideal1: bool) -> Result<bool, MapsError> {
        let emb = if to_ideal1 {
            // 𝔡^N ⊂ 𝔡^♯ ⊂ 𝔡₁
            let pushed = self.push_dn_cochain(c);
            return self.solve_inflated(&pushed, &self.sub.dsharp_to_d1, &self.d1_solver, self.g_d1.coarse_module());
        } else {
            &self.sub.dn_to_d
        };
        self.solve_inflated(c, emb, &self.d_solver, self.g_d.coarse_module())
    }

    fn solve_inflated(&self, c: &Cochain, emb: &Matrix, cell: &OnceCell<CocycleSolver>, module: &GModule) -> Result<bool, MapsError> {
        let eta = inflate(c, &self.q, self.action.group().order(), emb);
        let solver = cell.get_or_init(|| CocycleSolver::new(module));
        match solver.solve_coboundary(|x, s| eta.value(&[x, s]).to_vec()) {
            None => Ok(false),
            Some(b) => Ok(coboundary(module, &b)? == eta),
        }
    }

    /// The connecting map `H⁰(G/N, 𝔡^♯/𝔡^N) → H¹(G/N, 𝔡^N)` on an
    /// invariant vector of the ratio module.
    pub fn connecting0(&self, x: &[u64]) -> Result<TangentVector, MapsError> {
        let l = &self.levels;
        let fine = self.q_ds.fine_module();
        let f = self.field();
        let width = (l.j0 - l.j1) as usize;
        let mut lift = x.to_vec();
        lift.resize(fine.dim(), 0);
        let mut values = Vec::with_capacity(self.q.order());
        for c in 0..self.q.order() {
            let mut w = fine.act(c, &lift);
            axpy(f, &mut w, f.neg(1), &lift);
            if w[..width].iter().any(|&z| z != 0) {
                return Err(MapsError::NotInvariant);
            }
            values.push(Series::from_coeffs(f, l.j0, l.f_y, &w[width..]));
        }
        self.tangent(ModuleTag::QuotientInvariant, values)
    }

    /// The image of `H⁰(G/N, 𝔡^♯)` in `H⁰(G/N, 𝔡^♯/𝔡^N)`, as vectors of the
    /// ratio module.
    pub fn sharp_invariants_in_ratio(&self) -> Result<Vec<Vec<u64>>, MapsError> {
        let l = &self.levels;
        let proj = truncation_matrix(self.field(), self.q_ds.coarse_module().dim(), self.q_ds.fine_module().dim());
        let h0 = cohomology_tail(self.q_ds.fine_module(), self.q_ds.coarse_module(), &proj, 0)?;
        let width = (l.j0 - l.j1) as usize;
        Ok(h0.reps().iter().map(|r| r.value(&[])[..width].to_vec()).collect())
    }
}

#[cfg(test)]
mod tests;

fn tail2(p: &LatticeCohomology) -> Result<CohomologySpace, MapsError> {
    let proj = truncation_matrix(p.coarse_module().field(), p.coarse_module().dim(), p.fine_module().dim());
    Ok(cohomology_tail(p.fine_module(), p.coarse_module(), &proj, 2)?)
}

