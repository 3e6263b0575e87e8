//! Obstruction classes along small extensions, the liftability components
//! of a subgroup, the relative obstruction attached to a normal subgroup
//! and the completion of compatible pairs of lifts.

use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use super::lift::{deformation_difference, induced_quotient_lift, DerivationSpace, Frame, InvariantRing, Lift};
use super::ring::{ArtinianRing, SmallExtension};
use super::DeformError;
use crate::action::{lattice_coords, substitution_matrix};
use crate::groups::{coboundary, cohomology, cohomology_tail, h1_as_quotient_module, hs_map, is_cocycle, restrict, Cochain, CocycleSolver, GModule};
use crate::linalg::{axpy, Matrix};
use crate::maps::{truncation_matrix, MapsError, ModuleTag, Substitutions, TangentVector, Tower, DENSE_DEGREE2_LIMIT};
use crate::series::Series;

/// The obstruction 2-cocycles of a family of series over `A′` that is a
/// homomorphism modulo `I`: for each kernel monomial `εᵢ`, the derivation
/// values `ηᵢ(g, h)` (index `g·|G| + h`) of `F_{gh}⁻¹(F_h(F_g)) = t + Σ εᵢ ηᵢ`.
pub fn obstruction_values(lift: &Lift, e: &SmallExtension) -> Result<Vec<Vec<Series>>, DeformError> {
    let ring = lift.ring();
    if ring != e.big() {
        return Err(DeformError::Ring("the family is not over the extension ring".into()));
    }
    let grp = lift.base().group();
    let n = grp.order();
    let f = ring.field();
    let inverses = (0..n).map(|g| lift.inverse(g)).collect::<Result<Vec<_>, _>>()?;
    let mut out: Vec<Vec<Series>> = vec![Vec::with_capacity(n * n); e.kernel().len()];
    for g in 0..n {
        for h in 0..n {
            let gh = grp.mul(g, h);
            let inner = lift.apply(g, lift.series(h))?;
            let d = ring.compose_with(&inverses[gh], &inner, lift.tables().table(gh))?;
            if !ring.residue(&d).agrees_with(&Series::var(f, d.prec())) {
                return Err(DeformError::InvalidLift(format!("the residues do not compose at ({g}, {h})")));
            }
            for j in 1..ring.dim() {
                if !e.kernel().contains(&j) && !d.comp(j).is_zero() {
                    return Err(DeformError::InvalidLift(format!(
                        "the family is not a homomorphism over {} at ({g}, {h})",
                        e.small().name()
                    )));
                }
            }
            for (i, &k) in e.kernel().iter().enumerate() {
                out[i].push(d.comp(k).clone());
            }
        }
    }
    Ok(out)
}

/// The 2-cochain of lattice coordinates `start..cut` of `c·dY` for
/// derivation values `c` indexed by pairs.
pub fn lattice_cochain2(values: &[Series], order: usize, dy: &Series, start: i64, cut: i64) -> Result<Cochain, DeformError> {
    let rows = values
        .iter()
        .map(|c| Ok(lattice_coords(&c.mul(dy), start, cut)?))
        .collect::<Result<Vec<_>, DeformError>>()?;
    let dim = (cut - start).max(0) as usize;
    Ok(Cochain::from_fn(2, order, dim, |a| rows[a[0] * order + a[1]].clone()))
}

/// The 1-cochain of lattice coordinates `start..cut` of `c·dY`.
pub fn lattice_cochain1(values: &[Series], dy: &Series, start: i64, cut: i64) -> Result<Cochain, DeformError> {
    let rows = values
        .iter()
        .map(|c| Ok(lattice_coords(&c.mul(dy), start, cut)?))
        .collect::<Result<Vec<_>, DeformError>>()?;
    let dim = (cut - start).max(0) as usize;
    Ok(Cochain::from_fn(1, values.len(), dim, |a| rows[a[0]].clone()))
}

/// One component (per basis monomial of the kernel) of an obstruction class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionClass {
    /// Exponents of the kernel monomial.
    pub monomial: Vec<u32>,
    /// Whether the class is zero.
    pub vanishes: bool,
    /// Coordinates in the presented `H²`, when it could be computed densely.
    pub coords: Option<Vec<u64>>,
}

/// The obstruction to lifting along a small extension.
#[derive(Clone, Debug, Serialize)]
pub struct Obstruction {
    /// The extension ring `A′`.
    pub from: String,
    /// The base ring `A`.
    pub to: String,
    /// One class per kernel monomial.
    pub components: Vec<ObstructionClass>,
    /// The coarse 2-cocycles.
    #[serde(skip)]
    pub cocycles: Vec<Cochain>,
}

impl Obstruction {
    /// True when every component vanishes.
    pub fn vanishes(&self) -> bool {
        self.components.iter().all(|c| c.vanishes)
    }
}

fn decide_coboundary(solver: &CocycleSolver, module: &GModule, c: &Cochain) -> Result<Option<Cochain>, DeformError> {
    match solver.solve_coboundary(|x, s| c.value(&[x, s]).to_vec()) {
        None => Ok(None),
        Some(b) => {
            if &coboundary(module, &b)? == c {
                Ok(Some(b))
            } else {
                Ok(None)
            }
        }
    }
}

/// The obstruction class in `H²(G, 𝔡) ⊗ I` to lifting `l` (over `A`) along
/// `e`, from a set-theoretic lift (random fill when `rng` is given).
pub fn obstruction_cocycle(l: &Lift, e: &SmallExtension, space: &DerivationSpace, rng: Option<&mut dyn RngCore>) -> Result<Obstruction, DeformError> {
    let lt = l.set_theoretic_lift(e, rng)?;
    let vals = obstruction_values(&lt, e)?;
    let lv = space.levels();
    let n = l.base().group().order();
    let module = space.cohomology().coarse_module();
    let mut components = Vec::with_capacity(vals.len());
    let mut cocycles = Vec::with_capacity(vals.len());
    for (i, v) in vals.iter().enumerate() {
        let c = lattice_cochain2(v, n, space.dy(), lv.delta_g, lv.c_t)?;
        if !is_cocycle(module, &c)? {
            return Err(MapsError::NotCocycle("the obstruction cochain is not a 2-cocycle".into()).into());
        }
        let vanishes = decide_coboundary(space.coarse_solver(), module, &c)?.is_some();
        let coords = match space.h2()? {
            Some(h2) => Some(h2.coords(&c)?),
            None => None,
        };
        components.push(ObstructionClass {
            monomial: e.big().basis()[e.kernel()[i]].clone(),
            vanishes,
            coords,
        });
        cocycles.push(c);
    }
    Ok(Obstruction {
        from: e.big().name(),
        to: e.small().name(),
        components,
        cocycles,
    })
}

/// The second liftability component: a class in `H¹(G/N, H¹(N, 𝔡))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HsClass {
    /// Whether the class is zero.
    pub vanishes: bool,
    /// Coordinates in `H¹(G/N, H¹(N, 𝔡))`.
    pub coords: Vec<u64>,
    /// Dimension of `H¹(G/N, H¹(N, 𝔡))`.
    pub dim: usize,
}

/// Both liftability components of the subgroup, per kernel monomial.
#[derive(Clone, Debug, Serialize)]
pub struct Liftability {
    /// `[η|_N] ∈ H²(N, 𝔡) ⊗ I`.
    pub restriction: Vec<ObstructionClass>,
    /// The class of `q ↦ [ξ_q]` when the first component vanishes.
    pub hs: Vec<Option<HsClass>>,
}

/// The two liftability components of `N` for a lift `l` of the tower's
/// action over `A`: the restricted obstruction, and when it vanishes the
/// class of the cocycles `ξ_q` of [`crate::groups::hs_map`].
pub fn liftability_components(tower: &Tower, l: &Lift, e: &SmallExtension, rng: Option<&mut dyn RngCore>) -> Result<Liftability, DeformError> {
    let lv = tower.levels();
    let n = tower.subgroup();
    let q = tower.quotient();
    let gd = tower.presentation(ModuleTag::GroupFull).expect("presented");
    let nd = tower.presentation(ModuleTag::SubgroupFull).expect("presented");
    let fine = gd.fine_module();
    let fine_n = fine.restrict(n);
    let solver_n = CocycleSolver::new(&fine_n);
    let lt = l.set_theoretic_lift(e, rng)?;
    let vals = obstruction_values(&lt, e)?;
    let order = tower.action().group().order();
    let module_q = h1_as_quotient_module(gd.coarse_module(), n, q, nd.space())?;
    let h1q = cohomology(&module_q, 1)?;
    let coarse_dim = (lv.c_t - lv.delta_g) as usize;
    let mut restriction = Vec::new();
    let mut hs = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        let monomial = e.big().basis()[e.kernel()[i]].clone();
        let eta = lattice_cochain2(v, order, tower.dyg(), lv.delta_g, lv.f_t)?;
        let eta_n = restrict(&eta, n);
        match decide_coboundary(&solver_n, &fine_n, &eta_n)? {
            None => {
                let nf = n.order() as f64;
                let d = nd.fine_module().dim() as f64;
                let coords = if nf.powi(5) * d * d <= DENSE_DEGREE2_LIMIT {
                    let proj = truncation_matrix(tower.field(), nd.coarse_module().dim(), nd.fine_module().dim());
                    let h2 = cohomology_tail(nd.fine_module(), nd.coarse_module(), &proj, 2)?;
                    let coarse = Cochain::from_fn(2, n.order(), coarse_dim, |a| eta_n.value(a)[..coarse_dim].to_vec());
                    Some(h2.coords(&coarse)?)
                } else {
                    None
                };
                restriction.push(ObstructionClass {
                    monomial,
                    vanishes: false,
                    coords,
                });
                hs.push(None);
            }
            Some(fc) => {
                restriction.push(ObstructionClass {
                    monomial,
                    vanishes: true,
                    coords: None,
                });
                let xis = hs_map(fine, n, q, &eta, &fc)?;
                let coords = xis
                    .iter()
                    .map(|xi| {
                        let coarse = Cochain::from_fn(1, n.order(), coarse_dim, |a| xi.value(a)[..coarse_dim].to_vec());
                        nd.coords(&coarse)
                    })
                    .collect::<Result<Vec<_>, MapsError>>()?;
                let c = Cochain::from_fn(1, q.order(), nd.dim(), |a| coords[a[0]].clone());
                let x = h1q.coords(&c)?;
                hs.push(Some(HsClass {
                    vanishes: x.iter().all(|&z| z == 0),
                    coords: x,
                    dim: h1q.dim(),
                }));
            }
        }
    }
    Ok(Liftability { restriction, hs })
}

/// A lift of `l` along `e` that is a homomorphism, or `None` when the
/// obstruction is not a coboundary: the set-theoretic lift corrected by a
/// solution `b` of `∂b = η` in the lattice window `lo..hi` of `c·dY`
/// (`module` must present that window and `solver` must factor it).
#[allow(clippy::too_many_arguments)]
pub fn homomorphic_lift(
    l: &Lift,
    e: &SmallExtension,
    solver: &CocycleSolver,
    module: &GModule,
    dy: &Series,
    lo: i64,
    hi: i64,
    mut rng: Option<&mut dyn RngCore>,
) -> Result<Option<Lift>, DeformError> {
    let f = l.ring().field();
    let order = l.base().group().order();
    let rho_t = l.set_theoretic_lift(e, super::reborrow(&mut rng))?;
    let vals = obstruction_values(&rho_t, e)?;
    let mut rho = rho_t;
    for (i, v) in vals.iter().enumerate() {
        let eta = lattice_cochain2(v, order, dy, lo, hi)?;
        let b = match decide_coboundary(solver, module, &eta)? {
            Some(b) => b,
            None => return Ok(None),
        };
        let zeta = (0..order)
            .map(|g| {
                let neg: Vec<u64> = b.value(&[g]).iter().map(|&x| f.neg(x)).collect();
                Ok(Series::from_coeffs(f, lo, hi, &neg).div(dy)?)
            })
            .collect::<Result<Vec<_>, DeformError>>()?;
        rho = rho.twist(e.kernel()[i], &zeta)?;
    }
    rho.validate()?;
    Ok(Some(rho))
}

/// Precomputed data for relative obstructions and completions over a tower.
#[derive(Debug)]
pub struct RelativeContext<'a> {
    tower: &'a Tower,
    d1_solver: CocycleSolver,
    d1_z1: Vec<Cochain>,
    d_solver: CocycleSolver,
    sharp_to_d1: Matrix,
    phi: Matrix,
    gtables: Arc<Substitutions>,
    qtables: Arc<Substitutions>,
}

/// One component (per kernel monomial) of the relative obstruction, with
/// the pieces it is assembled from; all in `H¹(G/N, 𝔡^♯/𝔡^N)` except
/// `alpha` (in `H¹(N, 𝔡)`) and `beta` (in `H¹(G/N, 𝔡^♯)`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelativeComponent {
    /// Exponents of the kernel monomial.
    pub monomial: Vec<u32>,
    /// The class `λ` with `∂λ = obs₀`.
    pub lambda: Vec<u64>,
    /// `α = κ′_N − [ρ*|_N]`.
    pub alpha: Vec<u64>,
    /// `β = κ′_{G/N} − [r]`.
    pub beta: Vec<u64>,
    /// `γ(α)`.
    pub gamma_alpha: Vec<u64>,
    /// `σ(β)`.
    pub sigma_beta: Vec<u64>,
    /// `λ + γ(α) − σ(β)`.
    pub obstruction: Vec<u64>,
    /// Whether the obstruction vanishes.
    pub vanishes: bool,
}

/// The relative obstruction.
#[derive(Clone, Debug, Serialize)]
pub struct RelativeObstruction {
    /// One component per kernel monomial.
    pub components: Vec<RelativeComponent>,
}

impl RelativeObstruction {
    /// True when every component vanishes.
    pub fn vanishes(&self) -> bool {
        self.components.iter().all(|c| c.vanishes)
    }
}

impl<'a> RelativeContext<'a> {
    /// Factors the cocycle equations on the fine `𝔡` and `𝔡₁` and the map
    /// `Φ = (res, ind)` on `H¹(G, 𝔡)`.
    pub fn new(tower: &'a Tower) -> Result<Self, DeformError> {
        let lv = tower.levels();
        let gd1 = tower.presentation(ModuleTag::GroupIdeal1).expect("presented");
        let gd = tower.presentation(ModuleTag::GroupFull).expect("presented");
        let d1_solver = CocycleSolver::new(gd1.fine_module());
        let d1_z1 = d1_solver.z1_basis();
        let d_solver = CocycleSolver::new(gd.fine_module());
        let sharp_to_d1 = substitution_matrix(tower.invariant_generator(), lv.j1, lv.f_y, lv.v1, lv.f_t)?;
        let dn = tower.dim(ModuleTag::SubgroupFull);
        let dq = tower.dim(ModuleTag::QuotientSharp);
        let mut cols = Vec::with_capacity(gd.dim());
        for j in 0..gd.dim() {
            let v = tower.basis_vector(ModuleTag::GroupFull, j)?;
            let mut col = tower.tangent_restriction(&v)?.coords;
            col.extend(tower.tangent_induction(&v)?.coords);
            cols.push(col);
        }
        let phi = Matrix::from_cols(tower.field(), dn + dq, &cols)?;
        let gtables = Arc::new(Substitutions::new(tower.action(), tower.action().prec())?);
        let qa = tower.quotient_action();
        let qtables = Arc::new(Substitutions::new(qa, qa.prec())?);
        Ok(Self {
            tower,
            d1_solver,
            d1_z1,
            d_solver,
            sharp_to_d1,
            phi,
            gtables,
            qtables,
        })
    }

    /// The tower.
    pub fn tower(&self) -> &Tower {
        self.tower
    }

    /// The matrix of `Φ = (res, ind)` on `H¹(G, 𝔡)`.
    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    /// `F_g = f_g` over `ring`, for `G`.
    pub fn trivial_lift(&self, ring: &ArtinianRing) -> Result<Lift, DeformError> {
        let a = self.tower.action();
        let series = a.all_series().iter().map(|s| ring.from_base(s)).collect();
        Lift::unchecked(a, ring, series, self.gtables.clone())
    }

    /// `F_s = f_s` over `ring`, for `N`.
    pub fn trivial_subgroup_lift(&self, ring: &ArtinianRing) -> Result<Lift, DeformError> {
        Ok(self.trivial_lift(ring)?.restrict(self.tower.subgroup()))
    }

    /// `F_ḡ = f_ḡ` over `ring`, for `G/N` on `k[[y]]`.
    pub fn trivial_quotient_lift(&self, ring: &ArtinianRing) -> Result<Lift, DeformError> {
        let a = self.tower.quotient_action();
        let series = a.all_series().iter().map(|s| ring.from_base(s)).collect();
        Lift::unchecked(a, ring, series, self.qtables.clone())
    }

    /// The first-order lift over `k[ε]` of the class `x` of a presented
    /// group (`GroupFull`, `SubgroupFull` or `QuotientSharp`), with a random
    /// representative when `rng` is given.
    pub fn first_order_lift(&self, tag: ModuleTag, x: &[u64], rng: Option<&mut dyn RngCore>) -> Result<Lift, DeformError> {
        let ring = ArtinianRing::dual_numbers(self.tower.field());
        let frame = Frame::of_tower(self.tower, tag)?;
        let c = frame.representative(x, rng)?;
        let base = match tag {
            ModuleTag::GroupFull => self.trivial_lift(&ring)?,
            ModuleTag::SubgroupFull => self.trivial_subgroup_lift(&ring)?,
            ModuleTag::QuotientSharp => self.trivial_quotient_lift(&ring)?,
            other => return Err(DeformError::Precondition(format!("no lifts attached to {other:?}"))),
        };
        base.twist(1, &c)
    }

    /// `λ + γ(α) − σ(β)` for a lift `κ_A` of `G` over `A`, a lift `κ′_N` of
    /// `N` over `A′` reducing to `κ_A|_N` with `G/N`-invariant class, and a
    /// lift `κ′_{G/N}` over `A′` reducing to the induced lift of `κ_A`.
    ///
    /// The set-theoretic lift is corrected to `ρ*` with obstruction
    /// `inf(∂u)` for a `𝔡^♯`-valued cochain `u` on `G/N` (`u(1) = 0`),
    /// `λ = [u mod 𝔡^N]`, `r_ḡ = (1 − u(ḡ))·(ρ*(g) on the invariants)`.
    /// With `rng`, the fill of the set-theoretic lift, the correction, `u`
    /// and the choices inside `γ` are randomized.
    pub fn relative_obstruction(
        &self,
        kappa: &Lift,
        kappa_n: &Lift,
        kappa_q: &Lift,
        e: &SmallExtension,
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<RelativeObstruction, DeformError> {
        let tower = self.tower;
        let lv = tower.levels();
        let f = tower.field();
        let n = tower.subgroup();
        let q = tower.quotient();
        let grp = tower.action().group();
        let order = grp.order();
        self.check_inputs(kappa, kappa_n, kappa_q, e)?;
        let rho_t = kappa.set_theoretic_lift(e, super::reborrow(&mut rng))?;
        let vals = obstruction_values(&rho_t, e)?;
        let gd1 = tower.presentation(ModuleTag::GroupIdeal1).expect("presented");
        let m1 = gd1.fine_module();
        let dnw = (lv.delta_g - lv.v1) as usize;
        let width = (lv.j0 - lv.j1) as usize;
        let sharp_dim = (lv.f_y - lv.j1) as usize;
        let mut zetas: Vec<Vec<Series>> = Vec::new();
        let mut us: Vec<Vec<Vec<u64>>> = Vec::new();
        for v in &vals {
            let eta = lattice_cochain2(v, order, tower.dyg(), lv.v1, lv.f_t)?;
            let w0 = decide_coboundary(&self.d1_solver, m1, &eta)?.ok_or_else(|| {
                DeformError::Precondition("the obstruction does not vanish in H²(G, 𝔡₁): the quotient lift cannot exist".into())
            })?;
            // unknowns: z ∈ Z¹(G, 𝔡₁) coefficients, then ū(c) for c ≠ 1
            let zdim = self.d1_z1.len();
            let cols = zdim + (q.order() - 1) * width;
            let mut rows = Vec::with_capacity(order * dnw);
            let mut rhs = Vec::with_capacity(order * dnw);
            for g in 0..order {
                let c = q.project(g);
                for r in 0..dnw {
                    let mut row = vec![0u64; cols];
                    for (k, z) in self.d1_z1.iter().enumerate() {
                        row[k] = z.value(&[g])[r];
                    }
                    if c != 0 {
                        for j in 0..width {
                            row[zdim + (c - 1) * width + j] = f.neg(self.sharp_to_d1.get(r, j));
                        }
                    }
                    rows.push(row);
                    rhs.push(f.neg(w0.value(&[g])[r]));
                }
            }
            let (mut x, ker) = if rows.is_empty() || cols == 0 {
                if rhs.iter().any(|&b| b != 0) {
                    return Err(DeformError::Precondition("no correction makes the obstruction inflated".into()));
                }
                (vec![0u64; cols], None)
            } else {
                let a = Matrix::from_rows(f, cols, &rows)?;
                let (x, ker) = a
                    .solve(&rhs)?
                    .ok_or_else(|| DeformError::Precondition("no correction makes the obstruction inflated from G/N".into()))?;
                (x, Some(ker))
            };
            if let (Some(r), Some(ker)) = (super::reborrow(&mut rng), ker.as_ref()) {
                for b in ker.basis() {
                    axpy(f, &mut x, r.next_u64() % f.p(), b);
                }
            }
            let mut w = w0.clone();
            for (k, z) in self.d1_z1.iter().enumerate() {
                if x[k] != 0 {
                    w = w.add_scaled(f, x[k], z);
                }
            }
            let mut u = vec![vec![0u64; sharp_dim]; q.order()];
            for c in 1..q.order() {
                u[c][..width].copy_from_slice(&x[zdim + (c - 1) * width..zdim + c * width]);
                if let Some(r) = super::reborrow(&mut rng) {
                    for slot in u[c][width..].iter_mut() {
                        *slot = r.next_u64() % f.p();
                    }
                }
            }
            let mut zeta = Vec::with_capacity(order);
            for g in 0..order {
                let mut val = self.sharp_to_d1.mul_vec(&u[q.project(g)])?;
                axpy(f, &mut val, f.neg(1), w.value(&[g]));
                if val[..dnw].iter().any(|&z| z != 0) {
                    return Err(DeformError::Precondition("the correction leaves the lattice 𝔡".into()));
                }
                let lat = Series::from_coeffs(f, lv.delta_g, lv.f_t, &val[dnw..]);
                zeta.push(lat.div(tower.dyg())?);
            }
            zetas.push(zeta);
            us.push(u);
        }
        let mut rho = rho_t;
        for (i, &k) in e.kernel().iter().enumerate() {
            rho = rho.twist(k, &zetas[i])?;
        }
        let rho_n = rho.restrict(n);
        rho_n
            .validate()
            .map_err(|err| DeformError::Precondition(format!("the corrected lift is not a homomorphism on N: {err}")))?;
        let frame_n = Frame::of_tower(tower, ModuleTag::SubgroupFull)?;
        let frame_q = Frame::of_tower(tower, ModuleTag::QuotientSharp)?;
        let alphas = deformation_difference(kappa_n, &rho_n, e, &frame_n)?;
        // r_ḡ = (1 − u(ḡ))·(ρ*(g) on A′[[y_A′]])
        let inv = InvariantRing::new(&rho_n)?;
        let ring = e.big();
        let qaction = tower.quotient_action();
        let mut rseries = Vec::with_capacity(q.order());
        for c in 0..q.order() {
            let x = rho.apply(q.section(c), inv.generator())?;
            let mut p = inv.express(&x)?;
            let dq = qaction.series(c).derivative();
            for (i, &k) in e.kernel().iter().enumerate() {
                let lat = Series::from_coeffs(f, lv.j1, lv.f_y, &us[i][c]);
                let der = lat.div(tower.dyq())?;
                let comp = p.comp(k).sub(&der.mul(&dq));
                *p.comp_mut(k) = comp;
            }
            rseries.push(p);
        }
        let r = Lift::unchecked(qaction, ring, rseries, self.qtables.clone())?;
        r.validate()
            .map_err(|err| DeformError::Precondition(format!("the twisted quotient action is not a homomorphism: {err}")))?;
        let betas = deformation_difference(kappa_q, &r, e, &frame_q)?;
        let mut components = Vec::with_capacity(e.kernel().len());
        for (i, &k) in e.kernel().iter().enumerate() {
            let lam_vals: Vec<Series> = (0..q.order()).map(|c| Series::from_coeffs(f, lv.j1, lv.j0, &us[i][c][..width])).collect();
            let lambda = tower.tangent(ModuleTag::QuotientRatio, lam_vals)?;
            let ga = tower.gamma(&alphas[i], super::reborrow(&mut rng)).map_err(|err| match err {
                MapsError::NotInvariant => DeformError::Precondition("the class of κ′_N is not G/N-invariant".into()),
                other => other.into(),
            })?;
            let sb = tower.sigma(&betas[i])?;
            let obstruction: Vec<u64> = lambda
                .coords
                .iter()
                .zip(&ga.coords)
                .zip(&sb.coords)
                .map(|((&a, &b), &c)| f.sub(f.add(a, b), c))
                .collect();
            components.push(RelativeComponent {
                monomial: ring.basis()[k].clone(),
                vanishes: obstruction.iter().all(|&z| z == 0),
                lambda: lambda.coords,
                alpha: alphas[i].coords.clone(),
                beta: betas[i].coords.clone(),
                gamma_alpha: ga.coords,
                sigma_beta: sb.coords,
                obstruction,
            });
        }
        Ok(RelativeObstruction { components })
    }

    fn check_inputs(&self, kappa: &Lift, kappa_n: &Lift, kappa_q: &Lift, e: &SmallExtension) -> Result<(), DeformError> {
        let tower = self.tower;
        if kappa.ring() != e.small() {
            return Err(DeformError::Ring(format!("κ_A is over {}, expected {}", kappa.ring().name(), e.small().name())));
        }
        if kappa_n.ring() != e.big() || kappa_q.ring() != e.big() {
            return Err(DeformError::Ring(format!("the lifts of N and G/N must be over {}", e.big().name())));
        }
        if kappa.base().group().order() != tower.action().group().order()
            || kappa_n.base().group().order() != tower.subgroup().order()
            || kappa_q.base().group().order() != tower.quotient().order()
        {
            return Err(DeformError::Precondition("the lifts do not match the groups of the tower".into()));
        }
        let kn = kappa_n.reduce(e)?;
        for (j, &s) in tower.subgroup().elements().iter().enumerate() {
            if !kn.series(j).agrees_with(kappa.series(s)) {
                return Err(DeformError::FiberMismatch(format!("κ′_N does not reduce to κ_A at element {s}")));
            }
        }
        let induced = induced_quotient_lift(tower, kappa)?;
        let kq = kappa_q.reduce(e)?;
        for c in 0..tower.quotient().order() {
            if !kq.series(c).agrees_with(induced.series(c)) {
                return Err(DeformError::FiberMismatch(format!("κ′_G/N does not reduce to the induced lift at coset {c}")));
            }
        }
        Ok(())
    }

    /// A lift of `G` over `A′` restricting to `κ′_N` and inducing
    /// `κ′_{G/N}` up to equivalence, or `None` when there is none: a lift
    /// `κ⁰` of `κ_A` is translated by a preimage under `Φ = (res, ind)` of
    /// the differences of `κ′_N, κ′_{G/N}` from `κ⁰|_N`, `ind κ⁰`. The
    /// result is verified by recomputing both differences explicitly.
    pub fn complete_lift(&self, kappa: &Lift, kappa_n: &Lift, kappa_q: &Lift, e: &SmallExtension, rng: Option<&mut dyn RngCore>) -> Result<Option<Lift>, DeformError> {
        let tower = self.tower;
        let lv = tower.levels();
        self.check_inputs(kappa, kappa_n, kappa_q, e)?;
        let gd = tower.presentation(ModuleTag::GroupFull).expect("presented");
        let mut rng = rng;
        let rho = match homomorphic_lift(kappa, e, &self.d_solver, gd.fine_module(), tower.dyg(), lv.delta_g, lv.f_t, super::reborrow(&mut rng))? {
            Some(r) => r,
            None => return Ok(None),
        };
        let frame_g = Frame::of_tower(tower, ModuleTag::GroupFull)?;
        let frame_n = Frame::of_tower(tower, ModuleTag::SubgroupFull)?;
        let frame_q = Frame::of_tower(tower, ModuleTag::QuotientSharp)?;
        let dn = deformation_difference(kappa_n, &rho.restrict(tower.subgroup()), e, &frame_n)?;
        let dq = deformation_difference(kappa_q, &induced_quotient_lift(tower, &rho)?, e, &frame_q)?;
        let mut psi = rho;
        for (i, &k) in e.kernel().iter().enumerate() {
            let mut rhs = dn[i].coords.clone();
            rhs.extend_from_slice(&dq[i].coords);
            let x = match self.phi.solve(&rhs)? {
                Some((x, _)) => x,
                None => return Ok(None),
            };
            let c = frame_g.representative(&x, super::reborrow(&mut rng))?;
            psi = psi.twist(k, &c)?;
        }
        psi.validate()?;
        let check_n = deformation_difference(kappa_n, &psi.restrict(tower.subgroup()), e, &frame_n)?;
        let check_q = deformation_difference(kappa_q, &induced_quotient_lift(tower, &psi)?, e, &frame_q)?;
        if check_n.iter().chain(&check_q).any(|v: &TangentVector| !v.is_zero()) {
            return Err(DeformError::Precondition("the completed lift does not restrict and induce to the given classes".into()));
        }
        Ok(Some(psi))
    }
}
