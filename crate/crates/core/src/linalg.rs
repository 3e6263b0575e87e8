//! Exact dense linear algebra over prime fields.
//!
//! Elements of 𝔽_p are stored as canonical residues in `0..p` inside a `u64`.
//! Since `p < 2^31`, the product of two residues fits in a `u64` without
//! overflow, so every operation is a single multiply followed by a reduction.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the linear algebra layer.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    /// The requested characteristic is not a prime in `2..=2^31`.
    #[error("{0} is not a prime in the range 2..=2^31")]
    NotPrime(u64),
    /// Operand shapes do not fit together.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A subspace was expected to contain another one.
    #[error("subspace is not contained in the ambient subspace")]
    NotSubspace,
    /// Operands live over different fields.
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(u64, u64),
}

/// The prime field 𝔽_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Constructs 𝔽_p, checking primality by trial division.
    pub fn new(p: u64) -> Result<Self, LinalgError> {
        if !(2..=(1u64 << 31)).contains(&p) || !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(Self { p })
    }

    /// The characteristic.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary unsigned integer.
    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        a % self.p
    }

    /// Maps a signed integer to its canonical residue.
    #[inline]
    pub fn from_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.p as i64) as u64
    }

    /// Interprets a residue as the representative in `(-p/2, p/2]`.
    pub fn to_signed(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    /// Sum of two residues.
    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    /// Difference of two residues.
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    /// Additive inverse.
    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Product of two residues.
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    /// `a + b·c`.
    #[inline]
    pub fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        (a + b * c) % self.p
    }

    /// `a^e` by square-and-multiply.
    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        let mut x = a % self.p;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }
}

/// Trial-division primality test (adequate for `p ≤ 2^31`).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A dense row-major matrix over 𝔽_p.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over F_{}", self.rows, self.cols, self.field.p)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    /// The zero matrix.
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    /// The identity matrix.
    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p;
        }
        m
    }

    /// Builds a matrix from rows, reducing every entry.
    pub fn from_rows(field: PrimeField, cols: usize, rows: &[Vec<u64>]) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "row {i} has length {} but {cols} columns were declared",
                    r.len()
                )));
            }
            data.extend(r.iter().map(|&x| field.reduce(x)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(field: PrimeField, rows: usize, cols: &[Vec<u64>]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(LinalgError::DimensionMismatch(format!(
                    "column {j} has length {} but {rows} rows were declared",
                    c.len()
                )));
            }
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = field.reduce(x);
            }
        }
        Ok(m)
    }

    /// The base field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    /// Sets entry `(i, j)` (reduced mod p).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.field.reduce(v);
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// All rows as owned vectors.
    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let p = f.p;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        // Accumulate without reduction for a few steps: entries < p < 2^31, so a
        // product is < 2^62 and we may add up to three before reducing.
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (x, &b) in acc.iter_mut().zip(orow) {
                    *x = (*x + a * b) % p;
                }
            }
            out.data[i * other.cols..(i + 1) * other.cols].copy_from_slice(&acc);
        }
        Ok(out)
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let p = self.field.p;
        Ok((0..self.rows)
            .map(|i| {
                let row = self.row(i);
                row.iter()
                    .zip(v)
                    .fold(0u64, |acc, (&a, &b)| (acc + a * b) % p)
            })
            .collect())
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect(),
        })
    }

    /// Entry-wise difference.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_same_shape(other)?;
        let f = self.field;
        Ok(Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect(),
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, c: u64) -> Matrix {
        let f = self.field;
        Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f.mul(a, c % f.p)).collect(),
        }
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(self.field.p, other.field.p));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Reduced row-echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    /// In-place RREF; returns pivot columns. Rows below the rank are zero.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let p = f.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    self.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.data[r * cols + c]).expect("pivot is nonzero");
            for j in c..cols {
                self.data[r * cols + j] = f.mul(self.data[r * cols + j], inv);
            }
            let (before, rest) = self.data.split_at_mut(r * cols);
            let (prow, after) = rest.split_at_mut(cols);
            let eliminate = |row: &mut [u64]| {
                let factor = row[c];
                if factor != 0 {
                    let neg = p - factor;
                    for j in c..cols {
                        row[j] = (row[j] + neg * prow[j]) % p;
                    }
                }
            };
            before.chunks_mut(cols).for_each(eliminate);
            after.chunks_mut(cols).for_each(eliminate);
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Row rank.
    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// The right kernel `{x : self·x = 0}` as a subspace of 𝔽_p^cols.
    pub fn kernel(&self) -> Subspace {
        let (r, pivots) = self.rref();
        let f = self.field;
        let mut is_pivot = vec![false; self.cols];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(i, free));
            }
            basis.push(v);
        }
        Subspace::from_vectors(f, self.cols, &basis).expect("kernel vectors have the right length")
    }

    /// Solves `self · x = b`: `None` when inconsistent, otherwise a particular
    /// solution together with the full kernel.
    pub fn solve(&self, b: &[u64]) -> Result<Option<(Vec<u64>, Subspace)>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} against {} rows",
                b.len(),
                self.rows
            )));
        }
        let f = self.field;
        let mut aug = Matrix::zeros(f, self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.data[i * (self.cols + 1)..i * (self.cols + 1) + self.cols].copy_from_slice(self.row(i));
            aug.data[i * (self.cols + 1) + self.cols] = f.reduce(b[i]);
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![0u64; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(i, self.cols);
        }
        Ok(Some((x, self.kernel())))
    }
}

/// A linear subspace of 𝔽_p^n stored by its canonical RREF basis.
///
/// Two subspaces are equal exactly when their representations are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    field: PrimeField,
    ambient: usize,
    basis: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Subspace {
    /// The zero subspace of 𝔽_p^n.
    pub fn zero(field: PrimeField, ambient: usize) -> Self {
        Self {
            field,
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// The whole space 𝔽_p^n.
    pub fn full(field: PrimeField, ambient: usize) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1;
                v
            })
            .collect();
        Self {
            field,
            ambient,
            basis,
            pivots: (0..ambient).collect(),
        }
    }

    /// The span of a family of vectors.
    pub fn from_vectors(field: PrimeField, ambient: usize, vectors: &[Vec<u64>]) -> Result<Self, LinalgError> {
        if vectors.is_empty() {
            return Ok(Self::zero(field, ambient));
        }
        let m = Matrix::from_rows(field, ambient, vectors)?;
        let (r, pivots) = m.rref();
        let basis = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Ok(Self {
            field,
            ambient,
            basis,
            pivots,
        })
    }

    /// The base field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Dimension of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Dimension of the subspace.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical RREF basis rows.
    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    /// Basis as a matrix (rows are basis vectors).
    pub fn basis_matrix(&self) -> Matrix {
        Matrix::from_rows(self.field, self.ambient, &self.basis).expect("rows have ambient length")
    }

    /// Reduces `v` against the RREF basis; returns the remainder.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let f = self.field;
        let mut r: Vec<u64> = v.iter().map(|&x| f.reduce(x)).collect();
        for (b, &pc) in self.basis.iter().zip(&self.pivots) {
            let c = r[pc];
            if c != 0 {
                let neg = f.neg(c);
                for (x, &y) in r.iter_mut().zip(b) {
                    *x = f.mul_add(*x, neg, y);
                }
            }
        }
        r
    }

    /// Membership test.
    pub fn contains(&self, v: &[u64]) -> bool {
        v.len() == self.ambient && self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Inclusion test `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.basis.iter().all(|b| other.contains(b))
    }

    /// The sum `self + other`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch("ambient dimensions differ".into()));
        }
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::from_vectors(self.field, self.ambient, &all)
    }

    /// The intersection `self ∩ other`.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch("ambient dimensions differ".into()));
        }
        // Vectors Σ a_i u_i = Σ b_j w_j: kernel of [U^T | -W^T].
        let f = self.field;
        let (k1, k2) = (self.dim(), other.dim());
        if k1 == 0 || k2 == 0 {
            return Ok(Subspace::zero(f, self.ambient));
        }
        let mut m = Matrix::zeros(f, self.ambient, k1 + k2);
        for (j, u) in self.basis.iter().enumerate() {
            for i in 0..self.ambient {
                m.set(i, j, u[i]);
            }
        }
        for (j, w) in other.basis.iter().enumerate() {
            for i in 0..self.ambient {
                m.set(i, k1 + j, f.neg(w[i]));
            }
        }
        let ker = m.kernel();
        let vecs: Vec<Vec<u64>> = ker
            .basis()
            .iter()
            .map(|c| combine(f, &self.basis, &c[..k1], self.ambient))
            .collect();
        Subspace::from_vectors(f, self.ambient, &vecs)
    }
}

/// Linear combination `Σ coeffs[i] · vectors[i]`.
pub fn combine(field: PrimeField, vectors: &[Vec<u64>], coeffs: &[u64], len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for (v, &c) in vectors.iter().zip(coeffs) {
        if c != 0 {
            for (o, &x) in out.iter_mut().zip(v) {
                *o = field.mul_add(*o, c, x);
            }
        }
    }
    out
}

/// Representatives of a basis of the quotient `v / w`.
pub fn quotient_basis(v: &Subspace, w: &Subspace) -> Result<Vec<Vec<u64>>, LinalgError> {
    if !w.is_subspace_of(v) {
        return Err(LinalgError::NotSubspace);
    }
    let mut solver = SpanSolver::new(v.field(), v.ambient_dim());
    for b in w.basis() {
        solver.push(b);
    }
    let mut reps = Vec::new();
    for b in v.basis() {
        if solver.push(b) {
            reps.push(b.clone());
        }
    }
    Ok(reps)
}

/// Incremental echelon basis that remembers how each echelon row was built
/// from the pushed generators, so membership queries also return coordinates.
///
/// Pushing the columns of a matrix `A` turns [`SpanSolver::express`] into a
/// reusable solver for `A·x = b`, and the generators that reduce to zero give
/// a kernel basis.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    field: PrimeField,
    len: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    combos: Vec<Vec<(usize, u64)>>,
    generators: usize,
    relations: Vec<Vec<(usize, u64)>>,
}

impl SpanSolver {
    /// An empty solver for vectors of length `len`.
    pub fn new(field: PrimeField, len: usize) -> Self {
        Self {
            field,
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
            combos: Vec::new(),
            generators: 0,
            relations: Vec::new(),
        }
    }

    /// Number of generators pushed so far.
    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Rank of the pushed family.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Length of the vectors handled.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when nothing has been pushed.
    pub fn is_empty(&self) -> bool {
        self.generators == 0
    }

    /// Linear relations among the pushed generators (kernel basis in
    /// generator coordinates).
    pub fn relations(&self) -> Vec<Vec<u64>> {
        self.relations.iter().map(|r| self.densify(r)).collect()
    }

    fn densify(&self, sparse: &[(usize, u64)]) -> Vec<u64> {
        let mut out = vec![0u64; self.generators];
        for &(i, c) in sparse {
            out[i] = self.field.add(out[i], c);
        }
        out
    }

    fn reduce_tracked(&self, v: &[u64]) -> (Vec<u64>, Vec<(usize, u64)>) {
        let f = self.field;
        let mut r: Vec<u64> = v.iter().map(|&x| f.reduce(x)).collect();
        let mut combo: Vec<(usize, u64)> = Vec::new();
        for (k, (row, &pc)) in self.rows.iter().zip(&self.pivots).enumerate() {
            let c = r[pc];
            if c != 0 {
                let neg = f.neg(c);
                for (x, &y) in r.iter_mut().zip(row) {
                    if y != 0 {
                        *x = f.mul_add(*x, neg, y);
                    }
                }
                // r ← r − c·row, and row = Σ combos[k]; track the subtraction.
                for &(g, a) in &self.combos[k] {
                    combo.push((g, f.mul(neg, a)));
                }
            }
        }
        (r, compact(f, combo))
    }

    /// Pushes a generator; returns `true` when it enlarged the span.
    pub fn push(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.len, "generator length mismatch");
        let f = self.field;
        let idx = self.generators;
        self.generators += 1;
        let (mut r, combo) = self.reduce_tracked(v);
        // remainder = v − Σ combo-generators·(…) i.e. v + combo (combo holds the
        // subtracted multiples with sign already applied).
        let mut full = combo;
        full.push((idx, 1));
        match r.iter().position(|&x| x != 0) {
            None => {
                self.relations.push(compact(f, full));
                false
            }
            Some(pc) => {
                let inv = f.inv(r[pc]).expect("nonzero");
                r.iter_mut().for_each(|x| *x = f.mul(*x, inv));
                let full: Vec<(usize, u64)> = full.into_iter().map(|(g, a)| (g, f.mul(a, inv))).collect();
                self.rows.push(r);
                self.pivots.push(pc);
                self.combos.push(compact(f, full));
                true
            }
        }
    }

    /// Coefficients `c` (one per generator) with `Σ c_i g_i = v`, if `v` lies
    /// in the span.
    pub fn express(&self, v: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(v.len(), self.len, "query length mismatch");
        let (r, combo) = self.reduce_tracked(v);
        if r.iter().any(|&x| x != 0) {
            return None;
        }
        // v − Σ(−combo)… : reduce_tracked recorded r = v + Σ combo·g, r = 0.
        let f = self.field;
        let dense = self.densify(&combo);
        Some(dense.into_iter().map(|x| f.neg(x)).collect())
    }

    /// Membership test.
    pub fn contains(&self, v: &[u64]) -> bool {
        let (r, _) = self.reduce_tracked(v);
        r.iter().all(|&x| x == 0)
    }
}

fn compact(f: PrimeField, mut v: Vec<(usize, u64)>) -> Vec<(usize, u64)> {
    v.sort_unstable_by_key(|&(i, _)| i);
    let mut out: Vec<(usize, u64)> = Vec::with_capacity(v.len());
    for (i, c) in v {
        match out.last_mut() {
            Some((j, d)) if *j == i => *d = f.add(*d, c),
            _ => out.push((i, c)),
        }
    }
    out.retain(|&(_, c)| c != 0);
    out
}

/// Adds `c·src` into `dst`.
pub fn axpy(field: PrimeField, dst: &mut [u64], c: u64, src: &[u64]) {
    if c == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = field.mul_add(*d, c, s);
    }
}
