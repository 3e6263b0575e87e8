//! Lattices of k((t)) stable under an action, their truncations as finite
//! 𝔽_p[G]-modules, derivation modules, and the exact first cohomology of a
//! lattice through an explicit Hilbert 90 window.
//!
//! A derivation `c·d/dt` corresponds to the series `c·y_G'` where `y_G` is
//! the invariant generator; this identifies the derivations with the lattice
//! `t^{δ_G} k[[t]]` (`δ_G = ord y_G'`) equivariantly, where `g` acts on
//! derivations by `g·(c d/dt) = c(f_g)/f_g' · d/dt` and on series by
//! substitution.

use serde::Serialize;

use super::{ActionError, LocalAction};
use crate::groups::{GModule, Subgroup};
use crate::linalg::{quotient_basis, Matrix, Subspace};
use crate::series::{PowerTable, Series};

/// Coefficients of the exponents `start..cutoff` of `s`.
pub fn lattice_coords(s: &Series, start: i64, cutoff: i64) -> Result<Vec<u64>, ActionError> {
    if s.prec() < cutoff {
        return Err(ActionError::Precision(format!(
            "series known modulo t^{} but coordinates up to t^{} requested",
            s.prec(),
            cutoff
        )));
    }
    if !s.is_zero() && s.val() < start {
        return Err(ActionError::Invalid(format!(
            "series of valuation {} lies outside the lattice starting at {start}",
            s.val()
        )));
    }
    Ok((start..cutoff).map(|e| s.c(e)).collect())
}

/// The series `Σ v_i t^{start+i}` known modulo `t^prec`.
pub fn lattice_series(action: &LocalAction, v: &[u64], start: i64, prec: i64) -> Series {
    Series::from_coeffs(action.field(), start, prec, v)
}

/// The truncation `t^start k[[t]] / t^cutoff k[[t]]` with the substitution
/// action, on the basis `t^start, …, t^{cutoff−1}`.
pub fn ideal_module(action: &LocalAction, start: i64, cutoff: i64) -> Result<GModule, ActionError> {
    let f = action.field();
    let dim = (cutoff - start).max(0) as usize;
    let need = cutoff - start + 1;
    if action.prec() < need {
        return Err(ActionError::Precision(format!(
            "module t^{start}..t^{cutoff} needs the action modulo t^{need}, have t^{}",
            action.prec()
        )));
    }
    let n = action.group().order();
    let mut mats = Vec::with_capacity(n);
    for g in 0..n {
        let fg = action.series(g);
        let mut m = Matrix::zeros(f, dim, dim);
        let mut table = if cutoff > 1 {
            Some(PowerTable::new(fg, cutoff as usize)?)
        } else {
            None
        };
        for (col, j) in (start..cutoff).enumerate() {
            let pw: Series = if j >= 1 {
                table.as_mut().expect("cutoff > 1").power_series(j as usize)
            } else {
                fg.powi(j)?
            };
            for (row, e) in (start..cutoff).enumerate() {
                if e >= j {
                    let c = pw.coeff(e).ok_or_else(|| ActionError::Precision(format!("t^{e} of f_{g}^{j}")))?;
                    m.set(row, col, c);
                }
            }
        }
        mats.push(m);
    }
    Ok(GModule::new_unchecked(action.group().clone(), f, dim, mats)?)
}

/// Derivations `Σ_{i<m} c_i t^i d/dt` modulo `t^m d/dt`, with
/// `g·(c d/dt) = c(f_g)/f_g' d/dt`.
pub fn derivation_module(action: &LocalAction, m: i64) -> Result<GModule, ActionError> {
    let f = action.field();
    if action.prec() < m + 1 {
        return Err(ActionError::Precision(format!(
            "derivations modulo t^{m} need the action modulo t^{}",
            m + 1
        )));
    }
    let dim = m.max(0) as usize;
    let n = action.group().order();
    let mut mats = Vec::with_capacity(n);
    for g in 0..n {
        let fg = action.series(g);
        let u = fg.derivative().invert()?;
        let mut table = PowerTable::new(fg, (m + 1).max(2) as usize)?;
        let mut mat = Matrix::zeros(f, dim, dim);
        for i in 0..m {
            let col = if i == 0 { u.clone() } else { table.power_series(i as usize).mul(&u) };
            for r in i..m {
                mat.set(r as usize, i as usize, col.coeff(r).expect("within precision"));
            }
        }
        mats.push(mat);
    }
    Ok(GModule::new_unchecked(action.group().clone(), f, dim, mats)?)
}

/// The matrix of `c·d/dt ↦ c·y'` from derivations modulo `t^m` to the lattice
/// coordinates `t^δ..t^{δ+m}` (`δ = ord y'`).
pub fn derivation_to_ideal(y: &Series, m: i64) -> Result<Matrix, ActionError> {
    let dy = y.derivative();
    let delta = dy.val();
    if dy.prec() < delta + m {
        return Err(ActionError::Precision("invariant generator known to too low precision".into()));
    }
    let f = y.field();
    let dim = m as usize;
    let mut t = Matrix::zeros(f, dim, dim);
    for i in 0..m {
        for r in i..m {
            t.set(r as usize, i as usize, dy.c(delta + r - i));
        }
    }
    Ok(t)
}

/// Which derivation lattice to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LatticeKind {
    /// Derivations of k[[t]] with the action of `G`.
    Full,
    /// Derivations of k[[y_N]] with the action of `G/N`.
    Quotient,
    /// The lattice `t^{v₁} k[[t]]`, `v₁ = ord_t(dy_G/dy_N)`, with the action of `G`.
    Ideal1,
}

/// Exact invariants of an action with a normal subgroup `N`, and the
/// cutoffs used to truncate the lattices.
///
/// In lattice form (`d ↦ d(y_G)`):
/// `𝔡 = t^{δ_G}k[[t]]`, `𝔡₁ = t^{v₁}k[[t]]` with `v₁ = δ_G − δ_N = |N|·δ_Q`,
/// `𝔡^N = y^{j₀}k[[y]]` with `j₀ = ⌈δ_G/|N|⌉`, and `𝔡^♯ = y^{j₁}k[[y]]` with
/// `j₁ = δ_Q`, where `y = y_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Levels {
    /// `|G|`.
    pub order_g: i64,
    /// `|N|`.
    pub order_n: i64,
    /// Order of the different of `G`.
    pub delta_g: i64,
    /// Order of the different of `N`.
    pub delta_n: i64,
    /// Order of the different of `G/N` on `k[[y_N]]`.
    pub delta_q: i64,
    /// Start of `𝔡₁`.
    pub v1: i64,
    /// Start of `𝔡^N` in `y`.
    pub j0: i64,
    /// Start of `𝔡^♯` in `y`.
    pub j1: i64,
    /// Truncation length `M`.
    pub m: i64,
    /// Coarse cutoff in `t`.
    pub c_t: i64,
    /// Fine cutoff in `t`.
    pub f_t: i64,
    /// Coarse cutoff in `y`.
    pub c_y: i64,
    /// Fine cutoff in `y`.
    pub f_y: i64,
    /// Precision required of the action.
    pub prec: i64,
}

impl Levels {
    /// Levels for the given different orders; `m` defaults to
    /// `2·(δ_G + |G|)`.
    pub fn new(order_g: i64, order_n: i64, delta_g: i64, delta_n: i64, m: Option<i64>) -> Result<Self, ActionError> {
        let v1 = delta_g - delta_n;
        if order_n < 1 || v1 < 0 || v1 % order_n != 0 {
            return Err(ActionError::Invalid(format!(
                "different orders δ_G = {delta_g}, δ_N = {delta_n} are inconsistent with |N| = {order_n}"
            )));
        }
        let delta_q = v1 / order_n;
        let m = m.unwrap_or(2 * (delta_g + order_g)).max(1);
        let c_t = delta_g + m;
        let f_t = c_t + m;
        let ceil = |a: i64, b: i64| (a + b - 1).div_euclid(b);
        Ok(Self {
            order_g,
            order_n,
            delta_g,
            delta_n,
            delta_q,
            v1,
            j0: ceil(delta_g, order_n),
            j1: delta_q,
            m,
            c_t,
            f_t,
            c_y: ceil(c_t, order_n),
            f_y: ceil(f_t, order_n),
            prec: f_t + delta_g + order_g + order_n + 8,
        })
    }

    /// Levels computed from an action and a normal subgroup.
    pub fn for_action(action: &LocalAction, n: &Subgroup, m: Option<i64>) -> Result<Self, ActionError> {
        let dg = action.ramification()?.different_order;
        let dn = action.restrict(n).ramification()?.different_order;
        Self::new(action.group().order() as i64, n.order() as i64, dg, dn, m)
    }

    /// The same data with the truncation length scaled by `num/den`.
    pub fn scaled(&self, num: i64, den: i64) -> Self {
        Self::new(
            self.order_g,
            self.order_n,
            self.delta_g,
            self.delta_n,
            Some((self.m * num + den - 1) / den),
        )
        .expect("consistent levels")
    }
}

/// A derivation lattice realised as a finite module.
#[derive(Clone, Debug)]
pub struct DerivationModule {
    /// Which lattice.
    pub kind: LatticeKind,
    /// True for the lattice form (basis `t^{start+i}`), false for the
    /// derivation form (basis `t^i d/dt`).
    pub ideal_form: bool,
    /// First exponent of the basis.
    pub start: i64,
    /// The module.
    pub module: GModule,
}

/// Builds one of the derivation lattices truncated to dimension `m`.
/// `Full` and `Quotient` are returned in derivation form, `Ideal1` in
/// lattice form.
pub fn derivation_lattice(action: &LocalAction, n: &Subgroup, kind: LatticeKind, m: i64) -> Result<DerivationModule, ActionError> {
    match kind {
        LatticeKind::Full => Ok(DerivationModule {
            kind,
            ideal_form: false,
            start: 0,
            module: derivation_module(action, m)?,
        }),
        LatticeKind::Quotient => {
            let (_, qa) = action.quotient_action(n)?;
            Ok(DerivationModule {
                kind,
                ideal_form: false,
                start: 0,
                module: derivation_module(&qa, m)?,
            })
        }
        LatticeKind::Ideal1 => {
            let dg = action.ramification()?.different_order;
            let dn = action.restrict(n).ramification()?.different_order;
            let v1 = dg - dn;
            Ok(DerivationModule {
                kind,
                ideal_form: true,
                start: v1,
                module: ideal_module(action, v1, v1 + m)?,
            })
        }
    }
}

/// The matrix sending `y^j` (`j_lo ≤ j < j_hi`) to the `t`-coordinates
/// `t_lo..t_hi` of `y(t)^j`.
pub fn substitution_matrix(y: &Series, j_lo: i64, j_hi: i64, t_lo: i64, t_hi: i64) -> Result<Matrix, ActionError> {
    let f = y.field();
    let rows = (t_hi - t_lo).max(0) as usize;
    let cols = (j_hi - j_lo).max(0) as usize;
    let mut m = Matrix::zeros(f, rows, cols);
    for (c, j) in (j_lo..j_hi).enumerate() {
        let pw = y.powi(j)?;
        for (r, e) in (t_lo..t_hi).enumerate() {
            match pw.coeff(e) {
                Some(x) => m.set(r, c, x),
                None => {
                    if e >= pw.prec() {
                        return Err(ActionError::Precision(format!("t^{e} of y^{j}")));
                    }
                    return Err(ActionError::Invalid(format!("y^{j} has a term below t^{t_lo}")));
                }
            }
        }
        if !pw.is_zero() && pw.val() < t_lo {
            return Err(ActionError::Invalid(format!("y^{j} has a term below t^{t_lo}")));
        }
    }
    Ok(m)
}

/// The coordinate inclusion `t^{lo_a}..t^{hi}` into `t^{lo_b}..t^{hi}`
/// (`lo_b ≤ lo_a`).
pub fn coordinate_inclusion(field: crate::linalg::PrimeField, lo_a: i64, lo_b: i64, hi: i64) -> Matrix {
    let rows = (hi - lo_b).max(0) as usize;
    let cols = (hi - lo_a).max(0) as usize;
    let mut m = Matrix::zeros(field, rows, cols);
    for c in 0..cols {
        m.set(c + (lo_a - lo_b) as usize, c, 1);
    }
    m
}

/// The coarse truncations of the lattices attached to `N ⊴ G`, with the
/// maps between them in compatible coordinates.
#[derive(Clone, Debug)]
pub struct SubmoduleMaps {
    /// The levels used.
    pub levels: Levels,
    /// `𝔡^N ↪ 𝔡`: `y^{j₀..c_y}` → `t^{δ_G..c_t}`.
    pub dn_to_d: Matrix,
    /// `𝔡^♯ = 𝔡₁^N ↪ 𝔡₁`: `y^{j₁..c_y}` → `t^{v₁..c_t}`.
    pub dsharp_to_d1: Matrix,
    /// `𝔡 ↪ 𝔡₁`: `t^{δ_G..c_t}` → `t^{v₁..c_t}`.
    pub d_to_d1: Matrix,
    /// `𝔡^N ↪ 𝔡^♯`: `y^{j₀..c_y}` → `y^{j₁..c_y}`.
    pub dn_to_dsharp: Matrix,
    /// `𝔡^♯ → 𝔡^♯/𝔡^N`: `y^{j₁..c_y}` → `y^{j₁..j₀}`.
    pub dsharp_to_quot: Matrix,
}

impl SubmoduleMaps {
    /// Builds the maps for the given levels.
    pub fn new(action: &LocalAction, n: &Subgroup, levels: &Levels) -> Result<Self, ActionError> {
        let f = action.field();
        let y = action.invariant_generator(n);
        let l = levels;
        let dsharp_to_quot = {
            let rows = (l.j0 - l.j1) as usize;
            let cols = (l.c_y - l.j1) as usize;
            let mut m = Matrix::zeros(f, rows, cols);
            for r in 0..rows {
                m.set(r, r, 1);
            }
            m
        };
        Ok(Self {
            levels: l.clone(),
            dn_to_d: substitution_matrix(&y, l.j0, l.c_y, l.delta_g, l.c_t)?,
            dsharp_to_d1: substitution_matrix(&y, l.j1, l.c_y, l.v1, l.c_t)?,
            d_to_d1: coordinate_inclusion(f, l.delta_g, l.v1, l.c_t),
            dn_to_dsharp: coordinate_inclusion(f, l.j0, l.j1, l.c_y),
            dsharp_to_quot,
        })
    }
}

/// Exact `H¹(H, t^a k[[t]])` for the action of `H` on k((t)).
///
/// Every cocycle with values in the lattice is `h ↦ hβ − β` for some
/// `β ∈ k((t))`, unique up to invariants; it suffices to take `β` with
/// exponents in `[low, a)` where `low = a + |H| − δ_H − 1`, and the classes
/// are the `β` in that window with `hβ − β ∈ t^a k[[t]]`, modulo invariants.
#[derive(Clone, Debug)]
pub struct LatticeH1 {
    /// The lattice start `a`.
    pub start: i64,
    /// Lowest exponent of the window.
    pub low: i64,
    /// Dimension of the cohomology group.
    pub dim: usize,
    /// Laurent polynomials `β` whose coboundaries represent a basis.
    pub betas: Vec<Series>,
}

impl LatticeH1 {
    /// The cocycle `g ↦ β_i(f_g) − β_i` (one series per element of the
    /// acting group), known modulo `t^prec` for `prec ≤` the action precision.
    pub fn cocycle(&self, action: &LocalAction, i: usize) -> Result<Vec<Series>, ActionError> {
        let b = &self.betas[i];
        (0..action.group().order())
            .map(|g| Ok(b.compose(action.series(g))?.sub(b)))
            .collect()
    }
}

/// [`LatticeH1`] with the standard window.
pub fn lattice_h1(action: &LocalAction, start: i64) -> Result<LatticeH1, ActionError> {
    let r = action.ramification()?;
    let low = start + action.group().order() as i64 - r.different_order - 1;
    lattice_h1_window(action, start, low)
}

/// [`LatticeH1`] for an explicit window `[low, start)`; any `low` at or
/// below the standard one gives the same group.
pub fn lattice_h1_window(action: &LocalAction, start: i64, low: i64) -> Result<LatticeH1, ActionError> {
    let f = action.field();
    let width = (start - low).max(0) as usize;
    let grp = action.group();
    let h = grp.order() as i64;
    let poly_prec = action.prec();
    if width == 0 {
        return Ok(LatticeH1 {
            start,
            low,
            dim: 0,
            betas: Vec::new(),
        });
    }
    if action.prec() < start - low + 2 {
        return Err(ActionError::Precision("action known to too low precision for the window".into()));
    }
    // columns: (t^j)(f_h) − t^j over exponents [low, start), per generator
    let gens = grp.generators();
    let mut cols = vec![Vec::with_capacity(width * gens.len()); width];
    for &s in &gens {
        let fs = action.series(s);
        for (c, j) in (low..start).enumerate() {
            let pw = fs.powi(j)?;
            let d = pw.sub(&Series::monomial(f, j, 1, pw.prec()));
            for e in low..start {
                let v = if d.is_zero() || e < d.val() {
                    0
                } else {
                    d.coeff(e).ok_or_else(|| ActionError::Precision(format!("t^{e} of f^{j}")))?
                };
                cols[c].push(v);
            }
        }
    }
    let rows: Vec<Vec<u64>> = (0..cols[0].len()).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let xbar = if rows.is_empty() {
        Subspace::full(f, width)
    } else {
        Matrix::from_rows(f, width, &rows)?.kernel()
    };
    // invariants y^i with i·|H| in [low, start)
    let y = action.invariant_generator(&Subgroup::whole(grp));
    let i_lo = low.div_euclid(h) + if low.rem_euclid(h) == 0 { 0 } else { 1 };
    let mut inv = Vec::new();
    let mut i = i_lo;
    while i * h < start {
        let pw = y.powi(i)?;
        let v: Vec<u64> = (low..start)
            .map(|e| pw.coeff(e).ok_or_else(|| ActionError::Precision(format!("t^{e} of y^{i}"))))
            .collect::<Result<_, _>>()?;
        inv.push(v);
        i += 1;
    }
    let w = Subspace::from_vectors(f, width, &inv)?;
    if !w.is_subspace_of(&xbar) {
        return Err(ActionError::Invalid("invariants are not cocycle potentials".into()));
    }
    let reps = quotient_basis(&xbar, &w)?;
    let betas = reps.iter().map(|v| Series::from_coeffs(f, low, poly_prec, v)).collect();
    Ok(LatticeH1 {
        start,
        low,
        dim: reps.len(),
        betas,
    })
}
