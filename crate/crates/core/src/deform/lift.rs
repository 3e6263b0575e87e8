//! Lifts of an action to an artinian base, their differences as classes in
//! `H¹(G, 𝔡) ⊗ I`, the invariant ring of a lifted subgroup and the induced
//! lift of the quotient.
//!
//! A lift assigns to every `g` a series `F_g ∈ A[[t]]` reducing to `f_g`,
//! acting on `A[[t]]` by `Φ_g(x) = x(F_g)`; it is a homomorphism when
//! `F_{gh} = F_h(F_g)`. Automorphisms reducing to the identity modulo `I`,
//! with `𝔪·I = 0`, are `1 + Σ εᵢ Dᵢ` for derivations `Dᵢ = cᵢ d/dt`; the
//! operator `(1 + εD)Φ_g` has series `F_g + ε·c·f_g'`.

use std::cell::OnceCell;
use std::sync::Arc;

use rand::RngCore;

use super::ring::{ASeries, ArtinianRing, SmallExtension};
use super::DeformError;
use crate::action::{Levels, LocalAction};
use crate::groups::{cohomology_tail, CocycleSolver, CohomologySpace, Subgroup};
use crate::maps::{truncation_matrix, LatticeCohomology, MapsError, ModuleTag, Substitutions, TangentVector, Tower, DENSE_DEGREE2_LIMIT};
use crate::series::{PowerTable, Series};

/// A family of series over `A` indexed by the elements of an action,
/// reducing to the action; [`Lift::new`] checks that it is a homomorphism.
#[derive(Clone, Debug)]
pub struct Lift {
    base: LocalAction,
    ring: ArtinianRing,
    series: Vec<ASeries>,
    tables: Arc<Substitutions>,
}

impl Lift {
    /// The lift `F_g = f_g` with coefficients in `k ⊂ A`.
    pub fn trivial(base: &LocalAction, ring: &ArtinianRing) -> Result<Self, DeformError> {
        let tables = Arc::new(Substitutions::new(base, base.prec())?);
        Ok(Self::trivial_with(base, ring, tables))
    }

    fn trivial_with(base: &LocalAction, ring: &ArtinianRing, tables: Arc<Substitutions>) -> Self {
        let series = base.all_series().iter().map(|s| ring.from_base(s)).collect();
        Self {
            base: base.clone(),
            ring: ring.clone(),
            series,
            tables,
        }
    }

    /// A lift from explicit series; fails unless they reduce to `base` and
    /// compose like the group.
    pub fn new(base: &LocalAction, ring: &ArtinianRing, series: Vec<ASeries>) -> Result<Self, DeformError> {
        let tables = Arc::new(Substitutions::new(base, base.prec())?);
        let l = Self::unchecked(base, ring, series, tables)?;
        l.validate()?;
        Ok(l)
    }

    /// A family reducing to `base` that need not be a homomorphism (a
    /// set-theoretic lift).
    pub fn unchecked(base: &LocalAction, ring: &ArtinianRing, series: Vec<ASeries>, tables: Arc<Substitutions>) -> Result<Self, DeformError> {
        let n = base.group().order();
        if series.len() != n {
            return Err(DeformError::InvalidLift(format!("{} series for a group of order {n}", series.len())));
        }
        if tables.len() != n {
            return Err(DeformError::InvalidLift("substitution tables do not match the group".into()));
        }
        for (g, s) in series.iter().enumerate() {
            if s.comps().len() != ring.dim() {
                return Err(DeformError::InvalidLift(format!("series {g} has {} components, the ring has length {}", s.comps().len(), ring.dim())));
            }
            if !ring.residue(s).agrees_with(base.series(g)) {
                return Err(DeformError::InvalidLift(format!("F_{g} does not reduce to f_{g}")));
            }
        }
        Ok(Self {
            base: base.clone(),
            ring: ring.clone(),
            series,
            tables,
        })
    }

    /// Checks `F_{gh} = F_h(F_g)` for all pairs (the reduction is checked
    /// on construction).
    pub fn validate(&self) -> Result<(), DeformError> {
        let g = self.base.group();
        for a in 0..g.order() {
            for b in 0..g.order() {
                let lhs = &self.series[g.mul(a, b)];
                let rhs = self.ring.compose_with(&self.series[b], &self.series[a], self.tables.table(a))?;
                if !lhs.agrees_with(&rhs) {
                    return Err(DeformError::InvalidLift(format!(
                        "F_{{{a}·{b}}} differs from F_{b}(F_{a}) in {}",
                        self.ring.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// The reduced action.
    pub fn base(&self) -> &LocalAction {
        &self.base
    }

    /// The coefficient ring.
    pub fn ring(&self) -> &ArtinianRing {
        &self.ring
    }

    /// `F_g`.
    pub fn series(&self, g: usize) -> &ASeries {
        &self.series[g]
    }

    /// All `F_g`.
    pub fn all_series(&self) -> &[ASeries] {
        &self.series
    }

    /// Substitution tables of the reduced action.
    pub fn tables(&self) -> &Arc<Substitutions> {
        &self.tables
    }

    /// Common precision of the series.
    pub fn prec(&self) -> i64 {
        self.series.iter().map(|s| s.prec()).min().unwrap_or(0)
    }

    /// `F_g⁻¹`.
    pub fn inverse(&self, g: usize) -> Result<ASeries, DeformError> {
        let gi = self.base.group().inv(g);
        self.ring.comp_inverse_with(&self.series[g], self.tables.table(gi))
    }

    /// `x(F_g)` for a series over the same ring.
    pub fn apply(&self, g: usize, x: &ASeries) -> Result<ASeries, DeformError> {
        self.ring.compose_with(x, &self.series[g], self.tables.table(g))
    }

    /// Restriction to a subgroup, in its local indexing.
    pub fn restrict(&self, n: &Subgroup) -> Lift {
        Lift {
            base: self.base.restrict(n),
            ring: self.ring.clone(),
            series: n.elements().iter().map(|&s| self.series[s].clone()).collect(),
            tables: Arc::new(self.tables.restrict(n.elements())),
        }
    }

    /// Reduction along `A′ → A`.
    pub fn reduce(&self, e: &SmallExtension) -> Result<Lift, DeformError> {
        if e.big() != &self.ring {
            return Err(DeformError::Ring(format!("lift over {}, extension of {}", self.ring.name(), e.big().name())));
        }
        Ok(Lift {
            base: self.base.clone(),
            ring: e.small().clone(),
            series: self.series.iter().map(|s| e.reduce(s)).collect(),
            tables: self.tables.clone(),
        })
    }

    /// A set-theoretic lift along `A′ → A`: kernel components zero, or
    /// random low-degree polynomials when `rng` is given.
    pub fn set_theoretic_lift(&self, e: &SmallExtension, rng: Option<&mut dyn RngCore>) -> Result<Lift, DeformError> {
        if e.small() != &self.ring {
            return Err(DeformError::Ring(format!("lift over {}, extension onto {}", self.ring.name(), e.small().name())));
        }
        let f = self.ring.field();
        let prec = self.prec();
        let mut rng = rng;
        let series = self
            .series
            .iter()
            .enumerate()
            .map(|(g, s)| {
                let fill: Option<Vec<Series>> = match rng.as_deref_mut() {
                    Some(r) if g != 0 => Some(
                        e.kernel()
                            .iter()
                            .map(|_| {
                                let c: Vec<u64> = (0..6).map(|_| r.next_u64() % f.p()).collect();
                                Series::from_coeffs(f, 1, prec, &c)
                            })
                            .collect(),
                    ),
                    _ => None,
                };
                e.lift(s, fill.as_deref())
            })
            .collect();
        Lift::unchecked(&self.base, e.big(), series, self.tables.clone())
    }

    /// `F_g + w^m·c_g·f_g'` for a basis monomial `w^m` killed by `𝔪` and
    /// derivation values `c_g` (the operator `(1 + w^m·c_g d/dt)Φ_g`).
    pub fn twist(&self, m: usize, c: &[Series]) -> Result<Lift, DeformError> {
        if (1..self.ring.dim()).any(|j| self.ring.mul_index(m, j).is_some()) || m == 0 {
            return Err(DeformError::Ring(format!("the monomial {:?} is not killed by the maximal ideal", self.ring.basis()[m])));
        }
        if c.len() != self.series.len() {
            return Err(DeformError::InvalidLift("one derivation per element expected".into()));
        }
        let series = self
            .series
            .iter()
            .enumerate()
            .map(|(g, s)| {
                let mut s = s.clone();
                let d = c[g].mul(&self.base.series(g).derivative());
                let comp = s.comp(m).add(&d);
                *s.comp_mut(m) = comp;
                s
            })
            .collect();
        Ok(Lift {
            base: self.base.clone(),
            ring: self.ring.clone(),
            series,
            tables: self.tables.clone(),
        })
    }

    /// `χ⁻¹(F_g(χ))`: the series of the conjugate operator `X Φ_g X⁻¹`,
    /// for `χ ∈ A[[t]]` reducing to `t`.
    pub fn conjugate(&self, chi: &ASeries) -> Result<Lift, DeformError> {
        let f = self.ring.field();
        let prec = self.prec().min(chi.prec());
        if !self.ring.residue(chi).agrees_with(&Series::var(f, prec)) {
            return Err(DeformError::InvalidLift("the conjugating series does not reduce to t".into()));
        }
        let mut id = PowerTable::new(&Series::var(f, prec), prec.max(2) as usize)?;
        id.fill();
        let chi_inv = self.ring.comp_inverse_with(chi, &id)?;
        let series = (0..self.series.len())
            .map(|g| {
                let inner = self.ring.compose_with(&self.series[g], chi, &id)?;
                self.ring.compose_with(&chi_inv, &inner, self.tables.table(g))
            })
            .collect::<Result<Vec<_>, DeformError>>()?;
        Ok(Lift {
            base: self.base.clone(),
            ring: self.ring.clone(),
            series,
            tables: self.tables.clone(),
        })
    }
}

/// A presented `H¹` of derivations in lattice form: the cohomology of the
/// lattice, the acting group and `dY`, with `c·d/dx ↦ c·dY`.
#[derive(Clone, Debug)]
pub struct Frame<'a> {
    /// The presented group.
    pub coh: &'a LatticeCohomology,
    /// Derivative of the lattice generator; a derivation `c d/dx` has
    /// lattice value `c·dY`.
    pub dy: &'a Series,
    /// Tag of the resulting tangent vectors.
    pub tag: ModuleTag,
    /// The acting group.
    pub action: LocalAction,
}

impl<'a> Frame<'a> {
    /// The frames of a tower: `H¹(G, 𝔡)`, `H¹(N, 𝔡)` and `H¹(G/N, 𝔡^♯)`.
    pub fn of_tower(tower: &'a Tower, tag: ModuleTag) -> Result<Self, DeformError> {
        let (dy, action) = match tag {
            ModuleTag::GroupFull => (tower.dyg(), tower.action().clone()),
            ModuleTag::SubgroupFull => (tower.dyg(), tower.action().restrict(tower.subgroup())),
            ModuleTag::QuotientSharp => (tower.dyq(), tower.quotient_action().clone()),
            other => return Err(DeformError::Precondition(format!("{other:?} is not a group of derivations"))),
        };
        Ok(Self {
            coh: tower.presentation(tag).expect("presented"),
            dy,
            tag,
            action,
        })
    }

    /// Lattice values of derivation values.
    pub fn lattice(&self, c: &[Series]) -> Vec<Series> {
        c.iter().map(|s| s.mul(self.dy)).collect()
    }

    /// Derivation values of lattice values.
    pub fn derivations(&self, a: &[Series]) -> Result<Vec<Series>, DeformError> {
        a.iter().map(|s| Ok(s.div(self.dy)?)).collect()
    }

    /// The tangent vector of a derivation cocycle.
    pub fn tangent(&self, c: &[Series]) -> Result<TangentVector, DeformError> {
        let values = self.lattice(c);
        let coords = self.coh.coords_of_values(&values)?;
        Ok(TangentVector {
            module: self.tag,
            coords,
            values,
        })
    }

    /// Derivation values of a cocycle in the class `x`, known to the
    /// precision of the action: `h ↦ P(f_h) − P` for the potential `P` of
    /// the class, shifted by a random lattice polynomial when `rng` is given.
    pub fn representative(&self, x: &[u64], rng: Option<&mut dyn RngCore>) -> Result<Vec<Series>, DeformError> {
        let f = self.action.field();
        let prec = self.action.prec();
        let mut pot = Series::zero(f, prec);
        for (j, &c) in x.iter().enumerate() {
            if c != 0 {
                pot = pot.add(&self.coh.potential(j).scale(c));
            }
        }
        if let Some(r) = rng {
            let width = (self.coh.fine() - self.coh.start()) as usize;
            let v: Vec<u64> = (0..width).map(|_| r.next_u64() % f.p()).collect();
            // an exact polynomial, known to the full precision
            pot = pot.add(&Series::from_coeffs(f, self.coh.start(), prec, &v));
        }
        let a = (0..self.action.group().order())
            .map(|h| Ok(pot.compose(self.action.series(h))?.sub(&pot)))
            .collect::<Result<Vec<_>, DeformError>>()?;
        self.derivations(&a)
    }
}

/// `H¹(G, 𝔡)` of an action on its own, with the cutoffs of [`Levels`] for
/// `N = G`.
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    action: LocalAction,
    levels: Levels,
    coh: LatticeCohomology,
    dy: Series,
    solver: OnceCell<CocycleSolver>,
    h2: OnceCell<Option<CohomologySpace>>,
}

impl DerivationSpace {
    /// Builds the presentation; the action must be known to [`Levels::prec`].
    pub fn new(action: &LocalAction, m: Option<i64>) -> Result<Self, DeformError> {
        let whole = Subgroup::whole(action.group());
        let levels = Levels::for_action(action, &whole, m).map_err(MapsError::from)?;
        if action.prec() < levels.prec {
            return Err(DeformError::Precision(format!(
                "the action is known modulo t^{}, the truncation M = {} needs t^{}",
                action.prec(),
                levels.m,
                levels.prec
            )));
        }
        let action = action.truncate(levels.prec);
        let coh = LatticeCohomology::new(&action, levels.delta_g, levels.c_t, levels.f_t)?;
        let dy = action.invariant_generator(&whole).derivative();
        Ok(Self {
            action,
            levels,
            coh,
            dy,
            solver: OnceCell::new(),
            h2: OnceCell::new(),
        })
    }

    /// The presentation of a tower's `H¹(G, 𝔡)`.
    pub fn of_tower(tower: &Tower) -> Self {
        Self {
            action: tower.action().clone(),
            levels: tower.levels().clone(),
            coh: tower.presentation(ModuleTag::GroupFull).expect("presented").clone(),
            dy: tower.dyg().clone(),
            solver: OnceCell::new(),
            h2: OnceCell::new(),
        }
    }

    /// The action.
    pub fn action(&self) -> &LocalAction {
        &self.action
    }

    /// Cutoffs.
    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    /// The presentation.
    pub fn cohomology(&self) -> &LatticeCohomology {
        &self.coh
    }

    /// `y_G'`.
    pub fn dy(&self) -> &Series {
        &self.dy
    }

    /// Solver for `∂b = η` in the coarse truncation.
    pub fn coarse_solver(&self) -> &CocycleSolver {
        self.solver.get_or_init(|| CocycleSolver::new(self.coh.coarse_module()))
    }

    /// `H²(G, 𝔡)` as the image of the fine truncation in the coarse one,
    /// when the dense computation is within [`DENSE_DEGREE2_LIMIT`].
    pub fn h2(&self) -> Result<Option<&CohomologySpace>, DeformError> {
        if let Some(s) = self.h2.get() {
            return Ok(s.as_ref());
        }
        let n = self.action.group().order() as f64;
        let d = self.coh.fine_module().dim() as f64;
        let s = if n.powi(5) * d * d <= DENSE_DEGREE2_LIMIT {
            let c = self.coh.coarse_module();
            let proj = truncation_matrix(c.field(), c.dim(), self.coh.fine_module().dim());
            Some(cohomology_tail(self.coh.fine_module(), c, &proj, 2)?)
        } else {
            None
        };
        Ok(self.h2.get_or_init(|| s).as_ref())
    }

    /// The frame.
    pub fn frame(&self) -> Frame<'_> {
        Frame {
            coh: &self.coh,
            dy: &self.dy,
            tag: ModuleTag::GroupFull,
            action: self.action.clone(),
        }
    }
}

/// The class of `l₁` relative to `l₂`, two lifts over `A′` of the same lift
/// over `A = A′/I`: one tangent vector per basis monomial of `I`, from
/// `F²_g⁻¹(F¹_g) = t + Σᵢ εᵢ h_{g,i}` (the operator `Φ¹_g (Φ²_g)⁻¹`).
pub fn deformation_difference(l1: &Lift, l2: &Lift, e: &SmallExtension, frame: &Frame<'_>) -> Result<Vec<TangentVector>, DeformError> {
    let cocycles = difference_cocycles(l1, l2, e)?;
    cocycles.iter().map(|c| frame.tangent(c)).collect()
}

/// The derivation cocycles of [`deformation_difference`], one family per
/// kernel monomial.
pub fn difference_cocycles(l1: &Lift, l2: &Lift, e: &SmallExtension) -> Result<Vec<Vec<Series>>, DeformError> {
    let ring = e.big();
    if l1.ring() != ring || l2.ring() != ring {
        return Err(DeformError::Ring("lifts are not over the extension ring".into()));
    }
    let n = l1.base.group().order();
    if l2.base.group().order() != n {
        return Err(DeformError::FiberMismatch("lifts of different groups".into()));
    }
    for g in 0..n {
        if !l1.base.series(g).agrees_with(l2.base.series(g)) {
            return Err(DeformError::FiberMismatch(format!("the reduced actions differ at element {g}")));
        }
        if !e.reduce(&l1.series[g]).agrees_with(&e.reduce(&l2.series[g])) {
            return Err(DeformError::FiberMismatch(format!(
                "the lifts differ at element {g} over {}",
                e.small().name()
            )));
        }
    }
    let f = ring.field();
    let mut out: Vec<Vec<Series>> = vec![Vec::with_capacity(n); e.kernel().len()];
    for g in 0..n {
        let inv = l2.inverse(g)?;
        let d = ring.compose_with(&inv, &l1.series[g], l1.tables.table(g))?;
        let prec = d.prec();
        if !ring.residue(&d).agrees_with(&Series::var(f, prec)) {
            return Err(DeformError::FiberMismatch(format!("the residues differ at element {g}")));
        }
        for (i, &k) in e.kernel().iter().enumerate() {
            out[i].push(d.comp(k).clone());
        }
        for j in 1..ring.dim() {
            if !e.kernel().contains(&j) && !d.comp(j).is_zero() {
                return Err(DeformError::FiberMismatch(format!("element {g} differs outside the kernel")));
            }
        }
    }
    Ok(out)
}

/// `y_A = ∏_{s ∈ N} F_s` for a lift of `N` over `A`, and the expansion of
/// invariant series in `y_A`.
#[derive(Clone, Debug)]
pub struct InvariantRing {
    ring: ArtinianRing,
    y: ASeries,
    table: PowerTable,
    order: i64,
}

impl InvariantRing {
    /// The invariant generator of a lift (of the whole group of `l`).
    pub fn new(l: &Lift) -> Result<Self, DeformError> {
        let ring = l.ring.clone();
        let mut y = ring.from_base(&Series::one(ring.field(), l.prec()));
        for s in l.all_series() {
            y = ring.mul(&y, s);
        }
        let mut table = PowerTable::new(ring.residue(&y), y.prec().max(2) as usize)?;
        table.fill();
        Ok(Self {
            ring,
            y,
            table,
            order: l.base.group().order() as i64,
        })
    }

    /// `y_A`.
    pub fn generator(&self) -> &ASeries {
        &self.y
    }

    /// `P(y_A)` for a series `P` over `A` in the invariant variable.
    pub fn evaluate(&self, p: &ASeries) -> Result<ASeries, DeformError> {
        self.ring.compose_with(p, &self.y, &self.table)
    }

    /// Writes an invariant series `x` as `P(y_A)`, component by component
    /// in increasing degree of the basis monomials.
    pub fn express(&self, x: &ASeries) -> Result<ASeries, DeformError> {
        let ring = &self.ring;
        let f = ring.field();
        let y0 = ring.residue(&self.y);
        let yprec = (x.prec() - 1).div_euclid(self.order) + 1;
        let mut rem = x.clone();
        let mut out = ring.zero(yprec);
        let mut order: Vec<usize> = (0..ring.dim()).collect();
        order.sort_by_key(|&i| ring.degree(i));
        for b in order {
            let comp = rem.comp(b).clone();
            if comp.is_zero() {
                continue;
            }
            let p = comp
                .express_in(y0)
                .map_err(|err| DeformError::Precondition(format!("series is not invariant under the lifted subgroup: {err}")))?;
            let pa = ring.monomial_times(b, &p);
            rem = ring.sub(&rem, &self.evaluate(&pa)?);
            out = ring.add(&out, &pa);
        }
        if !rem.is_zero() {
            return Err(DeformError::Precondition("series is not invariant under the lifted subgroup".into()));
        }
        let _ = f;
        Ok(out)
    }
}

/// The induced lift of `G/N` on `A[[y_A]]`: `F♯_ḡ` is `y_A(F_g)` written in
/// `y_A`, for a lift `l` of the tower's action.
pub fn induced_quotient_lift(tower: &Tower, l: &Lift) -> Result<Lift, DeformError> {
    let n = tower.subgroup();
    let q = tower.quotient();
    let inv = InvariantRing::new(&l.restrict(n))?;
    let qaction = tower.quotient_action();
    let mut series = Vec::with_capacity(q.order());
    for c in 0..q.order() {
        let g = q.section(c);
        let x = l.apply(g, inv.generator())?;
        series.push(inv.express(&x)?);
    }
    let qbase = qaction.truncate(series.iter().map(|s| s.prec()).min().unwrap_or(0));
    let out = Lift::unchecked(&qbase, &l.ring, series, Arc::new(Substitutions::new(&qbase, qbase.prec())?))?;
    Ok(out)
}

/// The twisted lift `g_*l: s ↦ R_g l(g⁻¹sg) R_g⁻¹` of a lift `l` of `N`
/// (local indexing), with `R_g = ambient(g)` any lift of `f_g` over the
/// same ring; in series `R_g⁻¹(F_{g⁻¹sg}(R_g))`.
pub fn gmodn_action_on_lift(ambient: &Lift, n: &Subgroup, g: usize, l: &Lift) -> Result<Lift, DeformError> {
    let grp = ambient.base.group();
    let ring = &ambient.ring;
    if l.ring() != ring {
        return Err(DeformError::Ring("lift and ambient family over different rings".into()));
    }
    let r = ambient.series(g);
    let r_inv = ambient.inverse(g)?;
    let gi = grp.inv(g);
    let series = n
        .elements()
        .iter()
        .map(|&s| {
            let t = grp.mul(grp.mul(gi, s), g);
            let tl = n.position(t).ok_or_else(|| DeformError::Precondition("subgroup is not normal".into()))?;
            let inner = ring.compose_with(l.series(tl), r, ambient.tables.table(g))?;
            // the residue of inner is f_{g⁻¹sg}(f_g) = f_{sg}
            ring.compose_with(&r_inv, &inner, ambient.tables.table(grp.mul(s, g)))
        })
        .collect::<Result<Vec<_>, DeformError>>()?;
    Lift::unchecked(&l.base, ring, series, l.tables.clone())
}

/// A lift over `k[ε]` (or any ring, along the monomial `m`) of a trivial
/// lift, from lattice values of a cocycle.
pub fn lift_from_lattice(trivial: &Lift, m: usize, frame: &Frame<'_>, lattice: &[Series]) -> Result<Lift, DeformError> {
    let c = frame.derivations(lattice)?;
    trivial.twist(m, &c)
}
