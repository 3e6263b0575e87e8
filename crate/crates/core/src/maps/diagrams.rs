//! Machine checks of the commutative diagrams and exact sequences relating
//! the maps of a [`Tower`].

use std::collections::BTreeMap;

use rand::RngCore;
use serde::Serialize;

use super::{MapsError, ModuleTag, TangentVector, Tower};
use crate::groups::Cochain;
use crate::linalg::{quotient_basis, Matrix, Subspace};
use crate::series::Series;

/// Work bound for dense second cohomology: `|G/N|⁵ · (fine dimension)²`.
pub const DENSE_DEGREE2_LIMIT: f64 = 6.0e7;

/// Outcome of one edge of a diagram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeStatus {
    /// All trials agreed.
    Pass,
    /// Some trial disagreed.
    Fail,
    /// Not evaluated (too large, or not applicable).
    Skipped,
}

/// One checked edge.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeCheck {
    /// Short name of the edge.
    pub name: String,
    /// Outcome.
    pub status: EdgeStatus,
    /// Number of inputs tried.
    pub trials: usize,
    /// A failing input, or the reason for skipping.
    pub witness: Option<String>,
}

/// Report of a diagram check.
#[derive(Clone, Debug, Serialize)]
pub struct DiagramReport {
    /// Which diagram.
    pub diagram: String,
    /// Name of `G`.
    pub group: String,
    /// `|N|`.
    pub subgroup_order: usize,
    /// Dimensions of the groups at the corners.
    pub dims: BTreeMap<String, usize>,
    /// Ranks of the maps involved.
    pub ranks: BTreeMap<String, usize>,
    /// Edge outcomes.
    pub edges: Vec<EdgeCheck>,
    /// True when no edge failed.
    pub passed: bool,
}

impl DiagramReport {
    fn new(diagram: &str, tower: &Tower) -> Self {
        Self {
            diagram: diagram.to_string(),
            group: tower.action().group().name().to_string(),
            subgroup_order: tower.subgroup().order(),
            dims: BTreeMap::new(),
            ranks: BTreeMap::new(),
            edges: Vec::new(),
            passed: true,
        }
    }

    fn edge(&mut self, name: &str, trials: usize, failure: Option<String>) {
        let status = if failure.is_some() { EdgeStatus::Fail } else { EdgeStatus::Pass };
        if failure.is_some() {
            self.passed = false;
        }
        self.edges.push(EdgeCheck {
            name: name.to_string(),
            status,
            trials,
            witness: failure,
        });
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.edges.push(EdgeCheck {
            name: name.to_string(),
            status: EdgeStatus::Skipped,
            trials: 0,
            witness: Some(reason.to_string()),
        });
    }

    /// Names of failing edges.
    pub fn failures(&self) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|e| e.status == EdgeStatus::Fail)
            .map(|e| e.name.as_str())
            .collect()
    }
}

/// Basis vectors followed by `trials` random representatives of random classes.
fn samples(tower: &Tower, tag: ModuleTag, trials: usize, rng: &mut dyn RngCore) -> Result<Vec<TangentVector>, MapsError> {
    let p = tower.presentation(tag).expect("presented group");
    let mut out = Vec::with_capacity(p.dim() + trials);
    for j in 0..p.dim() {
        out.push(tower.basis_vector(tag, j)?);
    }
    if p.dim() > 0 {
        for _ in 0..trials {
            let x = p.random_coords(rng);
            out.push(tower.random_vector(tag, &x, rng)?);
        }
    }
    Ok(out)
}

fn rank_of(field: crate::linalg::PrimeField, rows: usize, cols: &[Vec<u64>]) -> Result<usize, MapsError> {
    if rows == 0 || cols.is_empty() {
        return Ok(0);
    }
    Ok(Matrix::from_cols(field, rows, cols)?.rank())
}

fn ratio_basis(tower: &Tower) -> Result<Vec<TangentVector>, MapsError> {
    let l = tower.levels();
    let f = tower.field();
    let space = tower.ratio_cohomology();
    (0..space.dim())
        .map(|j| {
            let rep = &space.reps()[j];
            let values = (0..rep.group_order())
                .map(|q| Series::from_coeffs(f, l.j1, l.j0, rep.value(&[q])))
                .collect();
            tower.tangent(ModuleTag::QuotientRatio, values)
        })
        .collect()
}

fn degree2_feasible(tower: &Tower) -> bool {
    let l = tower.levels();
    let q = tower.quotient().order() as f64;
    let d = (l.f_y - l.j1) as f64;
    q.powi(5) * d * d <= DENSE_DEGREE2_LIMIT
}

fn induction_edges(tower: &Tower, report: &mut DiagramReport, trials: usize, rng: &mut dyn RngCore) -> Result<(), MapsError> {
    let vs = samples(tower, ModuleTag::GroupFull, trials, rng)?;
    let mut failure = None;
    for v in &vs {
        let (_, ts) = tower.induced_cocycle(&v.values)?;
        let lhs = tower.inflate_sharp_t(&ts)?;
        let rhs = tower.to_ideal1(v)?;
        if lhs.coords != rhs.coords && failure.is_none() {
            failure = Some(format!("class {:?}: {:?} ≠ {:?}", v.coords, lhs.coords, rhs.coords));
        }
    }
    report.edge("inflation-of-induction", vs.len(), failure);
    Ok(())
}

/// The induction square: inflating `ind c` to `H¹(G, 𝔡₁)` gives the image
/// of `c`, and `ind ∘ inf` equals the map induced by `𝔡^N ⊂ 𝔡^♯`.
pub fn check_induction_square(tower: &Tower, trials: usize, rng: &mut dyn RngCore) -> Result<DiagramReport, MapsError> {
    let mut report = DiagramReport::new("induction", tower);
    for tag in [ModuleTag::GroupFull, ModuleTag::QuotientSharp, ModuleTag::GroupIdeal1, ModuleTag::QuotientInvariant] {
        report.dims.insert(format!("{tag:?}"), tower.dim(tag));
    }
    induction_edges(tower, &mut report, trials, rng)?;
    let us = samples(tower, ModuleTag::QuotientInvariant, trials, rng)?;
    let mut failure = None;
    for u in &us {
        let lhs = tower.tangent_induction(&tower.inflate_invariant(u)?)?;
        let rhs = tower.push_invariant(u)?;
        if lhs.coords != rhs.coords && failure.is_none() {
            failure = Some(format!("class {:?}: {:?} ≠ {:?}", u.coords, lhs.coords, rhs.coords));
        }
    }
    report.edge("induction-of-inflation", us.len(), failure);
    Ok(report)
}

/// The boundary diagram: `γ ∘ res = σ ∘ ind`, `∂ ∘ γ = tg`, inflation kills
/// `∂` and `tg`, and both rows are exact.
pub fn check_boundary_diagram(tower: &Tower, trials: usize, rng: &mut dyn RngCore) -> Result<DiagramReport, MapsError> {
    let mut report = DiagramReport::new("boundary", tower);
    let f = tower.field();
    let a1 = tower.dim(ModuleTag::QuotientInvariant);
    let a2 = tower.dim(ModuleTag::GroupFull);
    let a3 = tower.invariant_basis().len();
    let b2 = tower.dim(ModuleTag::QuotientSharp);
    let b3 = tower.dim(ModuleTag::QuotientRatio);
    report.dims.insert("H1(Q,D^N)".into(), a1);
    report.dims.insert("H1(G,D)".into(), a2);
    report.dims.insert("H1(N,D)^Q".into(), a3);
    report.dims.insert("H1(Q,D#)".into(), b2);
    report.dims.insert("H1(Q,D#/D^N)".into(), b3);

    induction_edges(tower, &mut report, trials, rng)?;

    // γ ∘ res = σ ∘ ind
    let vs = samples(tower, ModuleTag::GroupFull, trials, rng)?;
    let mut failure = None;
    for (i, v) in vs.iter().enumerate() {
        let r = tower.tangent_restriction(v)?;
        let lhs = if i % 2 == 0 { tower.gamma(&r, None)? } else { tower.gamma(&r, Some(&mut *rng))? };
        let rhs = tower.sigma(&tower.tangent_induction(v)?)?;
        if lhs.coords != rhs.coords && failure.is_none() {
            failure = Some(format!("class {:?}: {:?} ≠ {:?}", v.coords, lhs.coords, rhs.coords));
        }
    }
    report.edge("gamma-restriction-equals-sigma-induction", vs.len(), failure);

    // inflation kills ∂ and tg
    let ratio = ratio_basis(tower)?;
    let mut failure = None;
    for x in &ratio {
        let d = tower.coarse_dn(&tower.partial(x)?);
        if !tower.inflated_is_coboundary(&d, true)? && failure.is_none() {
            failure = Some(format!("ratio class {:?}", x.coords));
        }
    }
    report.edge("inflation-kills-partial", ratio.len(), failure);
    let f_inv: Vec<TangentVector> = invariant_samples(tower, trials, rng)?;
    let mut failure = None;
    for k in &f_inv {
        let t = tower.transgression(k, None)?;
        if !tower.inflated_is_coboundary(&t, false)? && failure.is_none() {
            failure = Some(format!("invariant class {:?}", k.coords));
        }
    }
    report.edge("inflation-kills-transgression", f_inv.len(), failure);

    // top row ranks
    let inf_cols = (0..a1)
        .map(|j| Ok(tower.inflate_invariant(&tower.basis_vector(ModuleTag::QuotientInvariant, j)?)?.coords))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let res_cols = (0..a2)
        .map(|j| tower.invariant_coords(&tower.tangent_restriction(&tower.basis_vector(ModuleTag::GroupFull, j)?)?))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let r_inf = rank_of(f, a2, &inf_cols)?;
    let r_res = rank_of(f, a3, &res_cols)?;
    report.ranks.insert("inf".into(), r_inf);
    report.ranks.insert("res".into(), r_res);
    let res_inf_zero = inf_cols.iter().all(|c| {
        let v = tower.basis_combination(ModuleTag::GroupFull, c);
        v.and_then(|v| tower.invariant_coords(&tower.tangent_restriction(&v)?))
            .map(|x| x.iter().all(|&z| z == 0))
            .unwrap_or(false)
    });
    let top1 = if r_inf == a1 && r_res + r_inf == a2 && res_inf_zero {
        None
    } else {
        Some(format!("rank inf {r_inf}, rank res {r_res}, dims {a1} → {a2} → {a3}"))
    };
    report.edge("exact-top-row-at-H1(G,D)", a1 + a2, top1);

    // bottom row ranks, σ
    let sigma_cols = (0..b2)
        .map(|j| Ok(tower.sigma(&tower.basis_vector(ModuleTag::QuotientSharp, j)?)?.coords))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let i_cols = (0..a1)
        .map(|j| Ok(tower.push_invariant(&tower.basis_vector(ModuleTag::QuotientInvariant, j)?)?.coords))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let r_sigma = rank_of(f, b3, &sigma_cols)?;
    let r_i = rank_of(f, b2, &i_cols)?;
    report.ranks.insert("sigma".into(), r_sigma);
    report.ranks.insert("i".into(), r_i);
    let sigma_i_zero = i_cols.iter().all(|c| {
        tower
            .basis_combination(ModuleTag::QuotientSharp, c)
            .and_then(|v| tower.sigma(&v))
            .map(|x| x.is_zero())
            .unwrap_or(false)
    });
    let bottom1 = if r_i + r_sigma == b2 && sigma_i_zero {
        None
    } else {
        Some(format!("rank i {r_i}, rank σ {r_sigma}, dim H1(Q,D#) {b2}"))
    };
    report.edge("exact-bottom-row-at-H1(Q,D#)", a1 + b2, bottom1);

    if !degree2_feasible(tower) {
        let why = "second cohomology exceeds the dense work bound";
        report.skip("partial-gamma-equals-transgression", why);
        report.skip("exact-top-row-at-invariants", why);
        report.skip("exact-bottom-row-at-ratio", why);
        report.skip("exact-bottom-row-at-H2(Q,D^N)", why);
        return Ok(report);
    }
    let h2n = tower.h2_invariant()?;
    let h2s = tower.h2_sharp()?;
    let b4 = h2n.dim();
    report.dims.insert("H2(Q,D^N)".into(), b4);
    report.dims.insert("H2(Q,D#)".into(), h2s.dim());

    // ∂ ∘ γ = tg
    let mut failure = None;
    for (i, k) in f_inv.iter().enumerate() {
        let g = if i % 2 == 0 { tower.gamma(k, None)? } else { tower.gamma(k, Some(&mut *rng))? };
        let lhs = tower.coarse_dn(&tower.partial(&g)?);
        let rhs = if i % 2 == 0 { tower.transgression(k, None)? } else { tower.transgression(k, Some(&mut *rng))? };
        let diff = lhs.add_scaled(f, f.neg(1), &rhs);
        let c = h2n.coords(&diff)?;
        if c.iter().any(|&z| z != 0) && failure.is_none() {
            failure = Some(format!("invariant class {:?}: difference {:?}", k.coords, c));
        }
    }
    report.edge("partial-gamma-equals-transgression", f_inv.len(), failure);

    // tg ranks
    let tg_cols = tower
        .invariant_basis()
        .iter()
        .map(|x| {
            let k = tower.basis_combination(ModuleTag::SubgroupFull, x)?;
            Ok(h2n.coords(&tower.transgression(&k, None)?)?)
        })
        .collect::<Result<Vec<_>, MapsError>>()?;
    let r_tg = rank_of(f, b4, &tg_cols)?;
    report.ranks.insert("tg".into(), r_tg);
    let tg_res_zero = res_cols.iter().all(|c| {
        let x = combine_in(tower, c);
        tower
            .basis_combination(ModuleTag::SubgroupFull, &x)
            .and_then(|k| Ok(h2n.coords(&tower.transgression(&k, None)?)?))
            .map(|v| v.iter().all(|&z| z == 0))
            .unwrap_or(false)
    });
    let top2 = if r_res + r_tg == a3 && tg_res_zero {
        None
    } else {
        Some(format!("rank res {r_res}, rank tg {r_tg}, dim invariants {a3}"))
    };
    report.edge("exact-top-row-at-invariants", a3, top2);

    // ∂ and j ranks
    let partial_cols = ratio
        .iter()
        .map(|x| Ok(h2n.coords(&tower.coarse_dn(&tower.partial(x)?))?))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let r_partial = rank_of(f, b4, &partial_cols)?;
    report.ranks.insert("partial".into(), r_partial);
    let partial_sigma_zero = sigma_cols.iter().all(|c| {
        let tv = h1_ratio_combination(tower, &ratio, c);
        tv.and_then(|x| Ok(h2n.coords(&tower.coarse_dn(&tower.partial(&x)?))?))
            .map(|v| v.iter().all(|&z| z == 0))
            .unwrap_or(false)
    });
    let bottom2 = if r_sigma + r_partial == b3 && partial_sigma_zero {
        None
    } else {
        Some(format!("rank σ {r_sigma}, rank ∂ {r_partial}, dim ratio {b3}"))
    };
    report.edge("exact-bottom-row-at-ratio", b3, bottom2);
    let j_cols = h2n
        .reps()
        .iter()
        .map(|r| Ok(h2s.coords(&tower.push_dn_cochain(r))?))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let r_j = rank_of(f, h2s.dim(), &j_cols)?;
    report.ranks.insert("j".into(), r_j);
    let j_partial_zero = partial_cols.iter().all(|c| {
        let m = h2n.combination(c);
        h2s.coords(&tower.push_dn_cochain(&m)).map(|v| v.iter().all(|&z| z == 0)).unwrap_or(false)
    });
    let bottom3 = if r_partial + r_j == b4 && j_partial_zero {
        None
    } else {
        Some(format!("rank ∂ {r_partial}, rank j {r_j}, dim H2(Q,D^N) {b4}"))
    };
    report.edge("exact-bottom-row-at-H2(Q,D^N)", b4, bottom3);
    Ok(report)
}

fn invariant_samples(tower: &Tower, trials: usize, rng: &mut dyn RngCore) -> Result<Vec<TangentVector>, MapsError> {
    let mut out = Vec::new();
    for x in tower.invariant_basis() {
        out.push(tower.basis_combination(ModuleTag::SubgroupFull, x)?);
    }
    if !tower.invariant_basis().is_empty() {
        for _ in 0..trials {
            out.push(tower.random_invariant(rng)?);
        }
    }
    Ok(out)
}

/// Coordinates in `H¹(N, 𝔡)` of a vector given in the invariant basis.
fn combine_in(tower: &Tower, c: &[u64]) -> Vec<u64> {
    let f = tower.field();
    let mut x = vec![0u64; tower.dim(ModuleTag::SubgroupFull)];
    for (v, &a) in tower.invariant_basis().iter().zip(c) {
        crate::linalg::axpy(f, &mut x, a, v);
    }
    x
}

fn h1_ratio_combination(tower: &Tower, basis: &[TangentVector], c: &[u64]) -> Result<TangentVector, MapsError> {
    let f = tower.field();
    let l = tower.levels();
    let qn = tower.quotient().order();
    let mut values: Vec<Series> = (0..qn).map(|_| Series::zero(f, l.j0)).collect();
    for (b, &a) in basis.iter().zip(c) {
        if a != 0 {
            for q in 0..qn {
                values[q] = values[q].add(&b.values[q].scale(a));
            }
        }
    }
    tower.tangent(ModuleTag::QuotientRatio, values)
}

/// The fibered image: `Φ = (res, ind)` has kernel the image of
/// `H⁰(G/N, 𝔡^♯/𝔡^N)/H⁰(G/N, 𝔡^♯)` (through `H¹(G/N, 𝔡^N)` and inflation)
/// and image the fibered product `{(κ, λ) : γκ = σλ}`.
pub fn check_fibered_image(tower: &Tower, rng: &mut dyn RngCore) -> Result<DiagramReport, MapsError> {
    let _ = rng;
    let mut report = DiagramReport::new("fibered", tower);
    let f = tower.field();
    let a2 = tower.dim(ModuleTag::GroupFull);
    let a3 = tower.invariant_basis().len();
    let b2 = tower.dim(ModuleTag::QuotientSharp);
    let b3 = tower.dim(ModuleTag::QuotientRatio);
    report.dims.insert("H1(G,D)".into(), a2);
    report.dims.insert("H1(N,D)^Q".into(), a3);
    report.dims.insert("H1(Q,D#)".into(), b2);
    report.dims.insert("H1(Q,D#/D^N)".into(), b3);

    let phi_cols = (0..a2)
        .map(|j| {
            let v = tower.basis_vector(ModuleTag::GroupFull, j)?;
            let mut c = tower.invariant_coords(&tower.tangent_restriction(&v)?)?;
            c.extend(tower.tangent_induction(&v)?.coords);
            Ok(c)
        })
        .collect::<Result<Vec<_>, MapsError>>()?;
    let rows = a3 + b2;
    let (phi_rank, phi_kernel) = if a2 == 0 {
        (0, Subspace::zero(f, 0))
    } else if rows == 0 {
        (0, Subspace::full(f, a2))
    } else {
        let m = Matrix::from_cols(f, rows, &phi_cols)?;
        (m.rank(), m.kernel())
    };
    report.ranks.insert("phi".into(), phi_rank);
    report.dims.insert("ker phi".into(), phi_kernel.dim());

    // kernel: H⁰(Q, ratio) modulo the image of H⁰(Q, 𝔡^♯)
    let ratio_dim = tower.ratio_module().dim();
    let h0_ratio = tower.ratio_module().invariants();
    let from_sharp = Subspace::from_vectors(f, ratio_dim, &tower.sharp_invariants_in_ratio()?)?;
    let coker = quotient_basis(&h0_ratio, &from_sharp)?;
    report.dims.insert("coker H0".into(), coker.len());
    let images = coker
        .iter()
        .map(|x| Ok(tower.inflate_invariant(&tower.connecting0(x)?)?.coords))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let in_kernel = images.iter().all(|c| if a2 == 0 { true } else { phi_kernel.contains(c) });
    let r_img = rank_of(f, a2, &images)?;
    let kernel_ok = in_kernel && r_img == coker.len() && r_img == phi_kernel.dim();
    report.edge(
        "kernel-equals-connecting-image",
        coker.len() + phi_kernel.dim(),
        (!kernel_ok).then(|| format!("ker Φ has dimension {}, connecting image rank {r_img} of {}", phi_kernel.dim(), coker.len())),
    );

    // image: fibered product {γκ = σλ}
    let gamma_cols = tower
        .invariant_basis()
        .iter()
        .map(|x| Ok(tower.gamma(&tower.basis_combination(ModuleTag::SubgroupFull, x)?, None)?.coords))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let sigma_cols = (0..b2)
        .map(|j| Ok(tower.sigma(&tower.basis_vector(ModuleTag::QuotientSharp, j)?)?.coords))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let fibered_dim = if rows == 0 {
        0
    } else if b3 == 0 {
        rows
    } else {
        let mut cols = gamma_cols.clone();
        cols.extend(sigma_cols.iter().map(|c| c.iter().map(|&z| f.neg(z)).collect::<Vec<_>>()));
        Matrix::from_cols(f, b3, &cols)?.kernel().dim()
    };
    report.dims.insert("fibered product".into(), fibered_dim);
    let inside = phi_cols.iter().all(|c| {
        let (k, l) = c.split_at(a3);
        let mut lhs = vec![0u64; b3];
        let mut rhs = vec![0u64; b3];
        for (col, &a) in gamma_cols.iter().zip(k) {
            crate::linalg::axpy(f, &mut lhs, a, col);
        }
        for (col, &a) in sigma_cols.iter().zip(l) {
            crate::linalg::axpy(f, &mut rhs, a, col);
        }
        lhs == rhs
    });
    let image_ok = inside && phi_rank == fibered_dim;
    report.edge(
        "image-equals-fibered-product",
        a2,
        (!image_ok).then(|| format!("rank Φ {phi_rank}, fibered product dimension {fibered_dim}, inside {inside}")),
    );
    Ok(report)
}

/// For `|G/N|` prime to `p`, restriction `H¹(G, 𝔡) → H¹(N, 𝔡)^{G/N}` is an
/// isomorphism.
pub fn check_restriction_bijection(tower: &Tower) -> Result<DiagramReport, MapsError> {
    let mut report = DiagramReport::new("bijection", tower);
    let f = tower.field();
    let a2 = tower.dim(ModuleTag::GroupFull);
    let a3 = tower.invariant_basis().len();
    report.dims.insert("H1(G,D)".into(), a2);
    report.dims.insert("H1(N,D)^Q".into(), a3);
    if tower.quotient().order() as u64 % f.p() == 0 {
        report.skip("restriction-is-bijective", "the order of G/N is divisible by p");
        return Ok(report);
    }
    let res_cols = (0..a2)
        .map(|j| tower.invariant_coords(&tower.tangent_restriction(&tower.basis_vector(ModuleTag::GroupFull, j)?)?))
        .collect::<Result<Vec<_>, MapsError>>()?;
    let r = rank_of(f, a3, &res_cols)?;
    report.ranks.insert("res".into(), r);
    report.edge(
        "restriction-is-bijective",
        a2,
        (!(r == a2 && r == a3)).then(|| format!("rank {r}, dimensions {a2} and {a3}")),
    );
    Ok(report)
}

/// Checks `H²` of a cochain against zero; helper for callers holding raw
/// 2-cochains.
pub fn is_zero_class(space: &crate::groups::CohomologySpace, c: &Cochain) -> Result<bool, MapsError> {
    Ok(space.coords(c)?.iter().all(|&z| z == 0))
}
