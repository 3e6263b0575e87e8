//! Local artinian 𝔽_p-algebras given by monomial ideals, and power series
//! in `t` with coefficients in them.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::DeformError;
use crate::linalg::PrimeField;
use crate::series::{PowerTable, Series};

/// `k[w₁, …, w_r]/J` for a monomial ideal `J` containing a power of every
/// variable, with the standard monomials as basis (the constant monomial
/// first).
#[derive(Clone, Debug)]
pub struct ArtinianRing {
    field: PrimeField,
    vars: usize,
    ideal: Vec<Vec<u32>>,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    table: Vec<Vec<Option<usize>>>,
}

/// Serializable description of an [`ArtinianRing`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    /// Number of variables.
    pub vars: usize,
    /// Exponent vectors of the monomial generators of the ideal.
    pub ideal: Vec<Vec<u32>>,
}

impl PartialEq for ArtinianRing {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.vars == other.vars && self.basis == other.basis
    }
}

impl Eq for ArtinianRing {}

impl ArtinianRing {
    /// The ring `k[w₁..w_vars]/(monomials)`; fails unless the quotient is
    /// finite-dimensional and the ideal is proper.
    pub fn new(field: PrimeField, vars: usize, ideal: &[Vec<u32>]) -> Result<Self, DeformError> {
        for g in ideal {
            if g.len() != vars {
                return Err(DeformError::Ring(format!("generator {g:?} does not have {vars} exponents")));
            }
            if g.iter().all(|&e| e == 0) {
                return Err(DeformError::Ring("the ideal is the unit ideal".into()));
            }
        }
        for i in 0..vars {
            let pure = ideal.iter().any(|g| g[i] > 0 && g.iter().enumerate().all(|(j, &e)| j == i || e == 0));
            if !pure {
                return Err(DeformError::Ring(format!("no power of w{} lies in the ideal: not artinian", i + 1)));
            }
        }
        let in_ideal = |m: &[u32]| ideal.iter().any(|g| g.iter().zip(m).all(|(a, b)| a <= b));
        // breadth-first enumeration of standard monomials
        let mut seen = BTreeSet::new();
        let mut basis = vec![vec![0u32; vars]];
        seen.insert(vec![0u32; vars]);
        let mut head = 0;
        while head < basis.len() {
            let m = basis[head].clone();
            head += 1;
            for i in 0..vars {
                let mut n = m.clone();
                n[i] += 1;
                if !in_ideal(&n) && seen.insert(n.clone()) {
                    basis.push(n);
                }
            }
        }
        basis.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let index: HashMap<Vec<u32>, usize> = basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let table = basis
            .iter()
            .map(|a| {
                basis
                    .iter()
                    .map(|b| {
                        let s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        index.get(&s).copied()
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            field,
            vars,
            ideal: ideal.to_vec(),
            basis,
            index,
            table,
        })
    }

    /// The ring from its serializable description.
    pub fn from_spec(field: PrimeField, spec: &RingSpec) -> Result<Self, DeformError> {
        Self::new(field, spec.vars, &spec.ideal)
    }

    /// The serializable description.
    pub fn spec(&self) -> RingSpec {
        RingSpec {
            vars: self.vars,
            ideal: self.ideal.clone(),
        }
    }

    /// The residue field `k`, presented as the quotient of `k[w₁, …, w_vars]` by all variables.
    pub fn residue_field(field: PrimeField, vars: usize) -> Self {
        let ideal: Vec<Vec<u32>> = (0..vars).map(|i| (0..vars).map(|j| u32::from(i == j)).collect()).collect();
        Self::new(field, vars, &ideal).expect("k is artinian")
    }

    /// The residue field of this ring, presented with the same variables.
    pub fn residue_ring(&self) -> Self {
        Self::residue_field(self.field, self.vars)
    }

    /// The dual numbers `k[ε]/(ε²)`.
    pub fn dual_numbers(field: PrimeField) -> Self {
        Self::new(field, 1, &[vec![2]]).expect("valid ring")
    }

    /// `k[w]/(w^m)`.
    pub fn truncated(field: PrimeField, m: u32) -> Result<Self, DeformError> {
        Self::new(field, 1, &[vec![m]])
    }

    /// `k[ε₁, ε₂]/(ε₁, ε₂)²`.
    pub fn dual_pair(field: PrimeField) -> Self {
        Self::new(field, 2, &[vec![2, 0], vec![1, 1], vec![0, 2]]).expect("valid ring")
    }

    /// The coefficient field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Number of variables.
    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Generators of the ideal.
    pub fn ideal(&self) -> &[Vec<u32>] {
        &self.ideal
    }

    /// Dimension over `k` (the length).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The standard monomials.
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    /// Position of a standard monomial.
    pub fn monomial_index(&self, m: &[u32]) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Total degree of a basis monomial.
    pub fn degree(&self, i: usize) -> u32 {
        self.basis[i].iter().sum()
    }

    /// Largest degree of a standard monomial; `𝔪^{d+1} = 0`.
    pub fn max_degree(&self) -> u32 {
        (0..self.dim()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Index of the product of two basis monomials (`None` when it is zero).
    pub fn mul_index(&self, i: usize, j: usize) -> Option<usize> {
        self.table[i][j]
    }

    /// True when a monomial lies in the ideal.
    pub fn in_ideal(&self, m: &[u32]) -> bool {
        self.ideal.iter().any(|g| g.iter().zip(m).all(|(a, b)| a <= b))
    }

    /// Product of two elements in basis coordinates.
    pub fn mul_elem(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut out = vec![0u64; self.dim()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                if let Some(k) = self.table[i][j] {
                    out[k] = f.mul_add(x, y, out[k]);
                }
            }
        }
        out
    }

    /// Human-readable name, e.g. `k[w1]/(w1^3)`.
    pub fn name(&self) -> String {
        if self.vars == 0 {
            return "k".into();
        }
        let mono = |m: &[u32]| {
            m.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { format!("w{}", i + 1) } else { format!("w{}^{e}", i + 1) })
                .collect::<Vec<_>>()
                .join("*")
        };
        let vars: Vec<String> = (1..=self.vars).map(|i| format!("w{i}")).collect();
        let gens: Vec<String> = self.ideal.iter().map(|g| mono(g)).collect();
        format!("k[{}]/({})", vars.join(","), gens.join(","))
    }

    /// Power series with the zero coefficient everywhere, modulo `t^prec`.
    pub fn zero(&self, prec: i64) -> ASeries {
        ASeries {
            comps: (0..self.dim()).map(|_| Series::zero(self.field, prec)).collect(),
        }
    }

    /// A series with coefficients in `k ⊂ A`.
    pub fn from_base(&self, s: &Series) -> ASeries {
        let mut out = self.zero(s.prec());
        out.comps[0] = s.clone();
        out
    }

    /// `w^m · s` for the basis monomial with index `m`.
    pub fn monomial_times(&self, m: usize, s: &Series) -> ASeries {
        let mut out = self.zero(s.prec());
        out.comps[m] = s.clone();
        out
    }

    /// Sum.
    pub fn add(&self, a: &ASeries, b: &ASeries) -> ASeries {
        ASeries {
            comps: a.comps.iter().zip(&b.comps).map(|(x, y)| x.add(y)).collect(),
        }
    }

    /// Difference.
    pub fn sub(&self, a: &ASeries, b: &ASeries) -> ASeries {
        ASeries {
            comps: a.comps.iter().zip(&b.comps).map(|(x, y)| x.sub(y)).collect(),
        }
    }

    /// Product; precision `min(pa + vb, pb + va)` as for [`Series::mul`].
    pub fn mul(&self, a: &ASeries, b: &ASeries) -> ASeries {
        let prec = (a.prec() + b.val()).min(b.prec() + a.val());
        let mut comps: Vec<Series> = (0..self.dim()).map(|_| Series::zero(self.field, prec)).collect();
        for (i, x) in a.comps.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.comps.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                if let Some(k) = self.table[i][j] {
                    comps[k] = comps[k].add(&x.mul(y));
                }
            }
        }
        ASeries { comps }.truncate(prec)
    }

    /// Formal derivative in `t`.
    pub fn derivative(&self, a: &ASeries) -> ASeries {
        ASeries {
            comps: a.comps.iter().map(|s| s.derivative()).collect(),
        }
    }

    /// The `k`-th Hasse derivative `Σ C(j, k) a_j t^{j−k}`.
    pub fn hasse(&self, a: &ASeries, k: u32) -> ASeries {
        ASeries {
            comps: a.comps.iter().map(|s| hasse_derivative(s, k)).collect(),
        }
    }

    /// The reduction modulo `𝔪` (the constant component).
    pub fn residue<'a>(&self, a: &'a ASeries) -> &'a Series {
        &a.comps[0]
    }

    /// `a(g)` for a series `g` over `A` whose residue `g₀` has valuation ≥ 1
    /// and is the inner series of `table`:
    /// `a(g₀ + n) = Σ_k a^{[k]}(g₀)·n^k`, finite since `n ∈ 𝔪[[t]]`.
    pub fn compose_with(&self, a: &ASeries, g: &ASeries, table: &PowerTable) -> Result<ASeries, DeformError> {
        let mut n = g.clone();
        n.comps[0] = Series::zero(self.field, g.prec());
        let n_is_zero = n.comps.iter().all(|s| s.is_zero());
        let sub = |x: &ASeries| -> Result<ASeries, DeformError> {
            Ok(ASeries {
                comps: x
                    .comps
                    .iter()
                    .map(|s| table.compose_cached(s))
                    .collect::<Result<Vec<_>, _>>()?,
            })
        };
        let mut total = sub(a)?;
        if n_is_zero || self.dim() == 1 {
            return Ok(total);
        }
        let mut npow = n.clone();
        for k in 1..=self.max_degree() {
            let term = self.mul(&sub(&self.hasse(a, k))?, &npow);
            total = self.add(&total, &term);
            if k < self.max_degree() {
                npow = self.mul(&npow, &n);
            }
        }
        Ok(total)
    }

    /// `a(g)` building a power table for the residue of `g`.
    pub fn compose(&self, a: &ASeries, g: &ASeries) -> Result<ASeries, DeformError> {
        let mut table = PowerTable::new(&g.comps[0], a.prec().max(g.prec()).max(2) as usize)?;
        table.fill();
        self.compose_with(a, g, &table)
    }

    /// Inverse of a unit of `A[[t]]`.
    pub fn invert(&self, u: &ASeries) -> Result<ASeries, DeformError> {
        let u0inv = u.comps[0].invert()?;
        let base = self.from_base(&u0inv);
        let v = self.sub(&self.mul(u, &base), &self.from_base(&Series::one(self.field, u.prec())));
        let mut term = self.from_base(&Series::one(self.field, u.prec()));
        let mut sum = term.clone();
        let negv = ASeries {
            comps: v.comps.iter().map(|s| s.neg()).collect(),
        };
        for _ in 0..self.max_degree() {
            term = self.mul(&term, &negv);
            sum = self.add(&sum, &term);
        }
        Ok(self.mul(&base, &sum))
    }

    /// The compositional inverse of `a`, given a power table for the
    /// residue of the inverse (`inv_table`).
    pub fn comp_inverse_with(&self, a: &ASeries, inv_table: &PowerTable) -> Result<ASeries, DeformError> {
        let prec = a.prec();
        let t = self.from_base(&Series::var(self.field, prec));
        let mut g = self.from_base(&inv_table.inner().truncate(prec));
        let da = self.derivative(a);
        for _ in 0..=self.max_degree() + 1 {
            let e = self.sub(&self.compose_with(a, &g, inv_table)?, &t);
            if e.comps.iter().all(|s| s.is_zero()) {
                return Ok(g);
            }
            if !e.comps[0].is_zero() {
                return Err(DeformError::InvalidLift("the residue table does not invert the residue series".into()));
            }
            let d = self.compose_with(&da, &g, inv_table)?;
            g = self.sub(&g, &self.mul(&e, &self.invert(&d)?));
        }
        Err(DeformError::Precision("compositional inverse did not converge".into()))
    }
}

/// A power series in `t` with coefficients in an [`ArtinianRing`]: one
/// `k`-series per basis monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ASeries {
    comps: Vec<Series>,
}

impl ASeries {
    /// From components (one per basis monomial of the ring).
    pub fn from_comps(comps: Vec<Series>) -> Self {
        Self { comps }
    }

    /// Components.
    pub fn comps(&self) -> &[Series] {
        &self.comps
    }

    /// Component of the basis monomial `i`.
    pub fn comp(&self, i: usize) -> &Series {
        &self.comps[i]
    }

    /// Mutable component.
    pub fn comp_mut(&mut self, i: usize) -> &mut Series {
        &mut self.comps[i]
    }

    /// Common precision.
    pub fn prec(&self) -> i64 {
        self.comps.iter().map(|s| s.prec()).min().unwrap_or(0)
    }

    /// Lowest valuation over all components.
    pub fn val(&self) -> i64 {
        self.comps
            .iter()
            .filter(|s| !s.is_zero())
            .map(|s| s.val())
            .min()
            .unwrap_or_else(|| self.prec())
    }

    /// Truncation of every component.
    pub fn truncate(&self, prec: i64) -> Self {
        Self {
            comps: self.comps.iter().map(|s| s.truncate(prec)).collect(),
        }
    }

    /// True when all components agree on their common precision.
    pub fn agrees_with(&self, other: &ASeries) -> bool {
        self.comps.len() == other.comps.len() && self.comps.iter().zip(&other.comps).all(|(a, b)| a.agrees_with(b))
    }

    /// True when every component is zero.
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|s| s.is_zero())
    }
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod(field: PrimeField, mut n: u64, mut k: u64) -> u64 {
    let p = field.p();
    let mut out = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        // C(a, b) for a, b < p
        let mut c = 1u64;
        for i in 0..b {
            c = field.mul(c, field.reduce(a - i));
            c = field.mul(c, field.inv(field.reduce(i + 1)).expect("i + 1 < p"));
        }
        out = field.mul(out, c);
        n /= p;
        k /= p;
    }
    out
}

/// The `k`-th Hasse derivative of a power series (valuation ≥ 0).
pub fn hasse_derivative(s: &Series, k: u32) -> Series {
    let f = s.field();
    let k = k as i64;
    if k == 0 {
        return s.clone();
    }
    let prec = s.prec() - k;
    let terms: Vec<(i64, u64)> = s
        .terms()
        .into_iter()
        .filter(|&(j, _)| j >= k)
        .map(|(j, c)| (j - k, f.mul(c, binomial_mod(f, j as u64, k as u64))))
        .filter(|&(_, c)| c != 0)
        .collect();
    let len = prec.max(0) as usize;
    let mut coeffs = vec![0u64; len];
    for (e, c) in terms {
        if e < prec {
            coeffs[e as usize] = c;
        }
    }
    Series::from_coeffs(f, 0, prec, &coeffs)
}

/// A small extension `A′ → A = A′/I` of monomial rings in the same
/// variables, with `𝔪_{A′}·I = 0`.
#[derive(Clone, Debug)]
pub struct SmallExtension {
    big: ArtinianRing,
    small: ArtinianRing,
    proj: Vec<Option<usize>>,
    lift: Vec<usize>,
    kernel: Vec<usize>,
}

impl SmallExtension {
    /// Checks that `small` is a quotient of `big` by a monomial ideal killed
    /// by the maximal ideal.
    pub fn new(big: &ArtinianRing, small: &ArtinianRing) -> Result<Self, DeformError> {
        if big.field != small.field || big.vars != small.vars {
            return Err(DeformError::Ring("rings over different fields or variable sets".into()));
        }
        if !big.ideal.iter().all(|g| small.in_ideal(g)) {
            return Err(DeformError::Ring(format!("{} is not a quotient of {}", small.name(), big.name())));
        }
        let proj: Vec<Option<usize>> = big.basis.iter().map(|m| small.monomial_index(m)).collect();
        let kernel: Vec<usize> = (0..big.dim()).filter(|&i| proj[i].is_none()).collect();
        let lift: Vec<usize> = small
            .basis
            .iter()
            .map(|m| big.monomial_index(m).expect("standard monomial of the quotient"))
            .collect();
        for &k in &kernel {
            for v in 0..big.vars {
                let mut m = big.basis[k].clone();
                m[v] += 1;
                if !big.in_ideal(&m) {
                    return Err(DeformError::NotSmall(format!(
                        "w{} times the kernel monomial {:?} is nonzero",
                        v + 1,
                        big.basis[k]
                    )));
                }
            }
        }
        Ok(Self {
            big: big.clone(),
            small: small.clone(),
            proj,
            lift,
            kernel,
        })
    }

    /// `A′`.
    pub fn big(&self) -> &ArtinianRing {
        &self.big
    }

    /// `A`.
    pub fn small(&self) -> &ArtinianRing {
        &self.small
    }

    /// Basis monomials of `A′` spanning the kernel `I`.
    pub fn kernel(&self) -> &[usize] {
        &self.kernel
    }

    /// The reduction `A′[[t]] → A[[t]]`.
    pub fn reduce(&self, a: &ASeries) -> ASeries {
        let comps = self.lift.iter().map(|&i| a.comps[i].clone()).collect();
        ASeries { comps }
    }

    /// A set-theoretic lift `A[[t]] → A′[[t]]`: kernel components are zero,
    /// or given by `fill` (one series per kernel monomial).
    pub fn lift(&self, a: &ASeries, fill: Option<&[Series]>) -> ASeries {
        let prec = a.prec();
        let mut comps: Vec<Series> = (0..self.big.dim()).map(|_| Series::zero(self.big.field, prec)).collect();
        for (i, p) in self.proj.iter().enumerate() {
            if let Some(j) = p {
                comps[i] = a.comps[*j].clone();
            }
        }
        if let Some(fill) = fill {
            for (&k, s) in self.kernel.iter().zip(fill) {
                comps[k] = s.truncate(prec);
            }
        }
        ASeries { comps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn standard_monomials() {
        let a = ArtinianRing::truncated(f(3), 3).unwrap();
        assert_eq!(a.basis(), &[vec![0], vec![1], vec![2]]);
        assert_eq!(a.max_degree(), 2);
        let d = ArtinianRing::dual_pair(f(5));
        assert_eq!(d.dim(), 3);
        assert_eq!(d.mul_index(1, 2), None);
        assert_eq!(ArtinianRing::residue_field(f(5), 0).dim(), 1);
        assert!(ArtinianRing::new(f(3), 2, &[vec![2, 0]]).is_err());
        assert_eq!(a.name(), "k[w1]/(w1^3)");
    }

    #[test]
    fn small_extensions_are_checked() {
        let k = f(3);
        let a3 = ArtinianRing::truncated(k, 3).unwrap();
        let a2 = ArtinianRing::truncated(k, 2).unwrap();
        let e = SmallExtension::new(&a3, &a2).unwrap();
        assert_eq!(e.kernel(), &[2]);
        let a4 = ArtinianRing::truncated(k, 4).unwrap();
        assert!(matches!(SmallExtension::new(&a4, &a2), Err(DeformError::NotSmall(_))));
        let eps = SmallExtension::new(&ArtinianRing::dual_numbers(k), &ArtinianRing::residue_field(k, 1)).unwrap();
        assert_eq!(eps.kernel(), &[1]);
    }

    #[test]
    fn lucas_binomials() {
        let k = f(3);
        assert_eq!(binomial_mod(k, 4, 2), 6 % 3);
        assert_eq!(binomial_mod(k, 5, 1), 2);
        assert_eq!(binomial_mod(k, 9, 3), 0);
    }

    #[test]
    fn comp_inverse_over_a_ring() {
        let k = f(5);
        let a = ArtinianRing::truncated(k, 3).unwrap();
        let prec = 25;
        let base = Series::parse(k, &format!("t + 2*t^2 + t^4 + O(t^{prec})")).unwrap();
        let mut x = a.from_base(&base);
        *x.comp_mut(1) = Series::parse(k, &format!("1 + t^3 + O(t^{prec})")).unwrap();
        *x.comp_mut(2) = Series::parse(k, &format!("3*t + O(t^{prec})")).unwrap();
        let mut inv_table = PowerTable::new(&base.comp_inverse().unwrap(), prec as usize).unwrap();
        inv_table.fill();
        let y = a.comp_inverse_with(&x, &inv_table).unwrap();
        let id = a.compose(&x, &y).unwrap();
        assert!(id.agrees_with(&a.from_base(&Series::var(k, prec))));
        assert!(id.prec() >= prec - 3);
        let id2 = a.compose(&y, &x).unwrap();
        assert!(id2.agrees_with(&a.from_base(&Series::var(k, prec))));
    }

    proptest! {
        #[test]
        fn composition_matches_power_sums(c in proptest::collection::vec(0u64..5, 12), d in proptest::collection::vec(0u64..5, 6)) {
            // a(g) computed by Hasse expansion equals Σ a_j g^j computed with ring products
            let k = f(5);
            let ring = ArtinianRing::truncated(k, 3).unwrap();
            let prec = 12;
            let a = ASeries::from_comps(vec![
                Series::from_coeffs(k, 0, prec, &c),
                Series::from_coeffs(k, 0, prec, &c[..6]),
                Series::zero(k, prec),
            ]);
            let mut g = ring.from_base(&Series::parse(k, &format!("t + t^2 + O(t^{prec})")).unwrap());
            *g.comp_mut(1) = Series::from_coeffs(k, 0, prec, &d);
            let lhs = ring.compose(&a, &g).unwrap();
            let mut rhs = ring.zero(prec);
            let mut pw = ring.from_base(&Series::one(k, prec));
            for j in 0..prec {
                let coeff = ASeries::from_comps(a.comps().iter().map(|s| Series::constant(k, s.c(j) as i64, prec)).collect());
                rhs = ring.add(&rhs, &ring.mul(&coeff, &pw));
                pw = ring.mul(&pw, &g);
            }
            let p = lhs.prec().min(rhs.prec()).min(prec - 2);
            prop_assert!(lhs.truncate(p).agrees_with(&rhs.truncate(p)));
        }
    }
}
