//! Truncated Laurent series over 𝔽_p in one variable.
//!
//! A [`Series`] stores the coefficients of the exponents `val ≤ e < prec`; every
//! coefficient at an exponent `≥ prec` is unknown. Arithmetic propagates the
//! window pessimistically but exactly, so every emitted coefficient agrees with
//! the infinite-precision value.
//!
//! The zero-to-known-precision series `O(t^prec)` has an empty window and
//! `val = prec`.

use std::fmt;

use thiserror::Error;

use crate::linalg::PrimeField;

/// Errors raised by series arithmetic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    /// Division by (or inversion of) a series that is zero to known precision.
    #[error("cannot invert a series that is zero modulo t^{0}")]
    NotInvertible(i64),
    /// Substitution requires an inner series of positive valuation.
    #[error("substitution needs an inner series of positive valuation, got {0}")]
    BadInner(i64),
    /// Compositional inversion requires valuation one with unit linear term.
    #[error("compositional inverse needs valuation 1, got {0}")]
    NotInvertibleComposition(i64),
    /// The series is not a power series in the given invariant.
    #[error("not expressible: remainder valuation {val} is not a multiple of {n}")]
    NotExpressible { val: i64, n: i64 },
    /// A result window would be empty.
    #[error("precision exhausted: {0}")]
    Precision(String),
    /// Operands over different fields.
    #[error("field mismatch")]
    FieldMismatch,
    /// Parse failure for the text form.
    #[error("cannot parse series: {0}")]
    Parse(String),
}

/// A truncated Laurent series `Σ_{val ≤ e < prec} c_e t^e + O(t^prec)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    field: PrimeField,
    val: i64,
    prec: i64,
    coeffs: Vec<u64>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text("t"))
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text("t"))
    }
}

impl Series {
    /// Builds a series from the coefficients of `t^start, t^{start+1}, …`
    /// known modulo `t^prec`; coefficients past `prec` are ignored.
    pub fn from_coeffs(field: PrimeField, start: i64, prec: i64, coeffs: &[u64]) -> Self {
        let len = (prec - start).max(0) as usize;
        let mut c: Vec<u64> = coeffs.iter().take(len).map(|&x| field.reduce(x)).collect();
        c.resize(len, 0);
        Self::normalized(field, start.min(prec), prec, c)
    }

    /// Builds a series from `(exponent, coefficient)` terms modulo `t^prec`.
    pub fn from_terms(field: PrimeField, terms: &[(i64, i64)], prec: i64) -> Self {
        let lo = terms.iter().map(|&(e, _)| e).filter(|&e| e < prec).min().unwrap_or(prec);
        let mut c = vec![0u64; (prec - lo).max(0) as usize];
        for &(e, x) in terms {
            if e < prec {
                let i = (e - lo) as usize;
                c[i] = field.add(c[i], field.from_i64(x));
            }
        }
        Self::normalized(field, lo, prec, c)
    }

    fn normalized(field: PrimeField, val: i64, prec: i64, mut coeffs: Vec<u64>) -> Self {
        match coeffs.iter().position(|&x| x != 0) {
            None => Self {
                field,
                val: prec,
                prec,
                coeffs: Vec::new(),
            },
            Some(0) => Self { field, val, prec, coeffs },
            Some(k) => {
                coeffs.drain(..k);
                Self {
                    field,
                    val: val + k as i64,
                    prec,
                    coeffs,
                }
            }
        }
    }

    /// `O(t^prec)`.
    pub fn zero(field: PrimeField, prec: i64) -> Self {
        Self {
            field,
            val: prec,
            prec,
            coeffs: Vec::new(),
        }
    }

    /// The constant `c` modulo `t^prec`.
    pub fn constant(field: PrimeField, c: i64, prec: i64) -> Self {
        Self::from_terms(field, &[(0, c)], prec)
    }

    /// `1 + O(t^prec)`.
    pub fn one(field: PrimeField, prec: i64) -> Self {
        Self::constant(field, 1, prec)
    }

    /// `c·t^e + O(t^prec)`.
    pub fn monomial(field: PrimeField, e: i64, c: i64, prec: i64) -> Self {
        Self::from_terms(field, &[(e, c)], prec)
    }

    /// The variable `t + O(t^prec)`.
    pub fn var(field: PrimeField, prec: i64) -> Self {
        Self::monomial(field, 1, 1, prec)
    }

    /// The base field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Valuation (equals `prec` for the zero series).
    pub fn val(&self) -> i64 {
        self.val
    }

    /// Precision: coefficients are known for exponents `< prec`.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// True when the series is zero to known precision.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients of the window `val ≤ e < prec`.
    pub fn window(&self) -> &[u64] {
        &self.coeffs
    }

    /// Coefficient of `t^e`, or `None` if `e ≥ prec`.
    pub fn coeff(&self, e: i64) -> Option<u64> {
        if e >= self.prec {
            None
        } else if e < self.val {
            Some(0)
        } else {
            Some(self.coeffs[(e - self.val) as usize])
        }
    }

    /// Coefficient of `t^e`, panicking beyond the precision.
    pub fn c(&self, e: i64) -> u64 {
        self.coeff(e)
            .unwrap_or_else(|| panic!("coefficient of t^{e} requested beyond precision {}", self.prec))
    }

    /// Leading coefficient (`None` for zero).
    pub fn lead(&self) -> Option<u64> {
        self.coeffs.first().copied()
    }

    /// Nonzero terms as `(exponent, coefficient)` pairs.
    pub fn terms(&self) -> Vec<(i64, u64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (self.val + i as i64, c))
            .collect()
    }

    /// Coefficients of `t^lo, …, t^{hi-1}` (requires `hi ≤ prec`).
    pub fn coeff_range(&self, lo: i64, hi: i64) -> Result<Vec<u64>, SeriesError> {
        if hi > self.prec {
            return Err(SeriesError::Precision(format!(
                "need coefficients below t^{hi}, known only below t^{}",
                self.prec
            )));
        }
        Ok((lo..hi).map(|e| self.c(e)).collect())
    }

    /// Lowers the precision to `min(prec, new_prec)`.
    pub fn truncate(&self, new_prec: i64) -> Self {
        if new_prec >= self.prec {
            return self.clone();
        }
        let keep = (new_prec - self.val).max(0) as usize;
        Self::normalized(
            self.field,
            self.val.min(new_prec),
            new_prec,
            self.coeffs.iter().take(keep).copied().collect(),
        )
    }

    /// True when both series agree on their common window.
    pub fn agrees_with(&self, other: &Series) -> bool {
        let p = self.prec.min(other.prec);
        let lo = self.val.min(other.val).min(p);
        (lo..p).all(|e| self.c(e) == other.c(e))
    }

    fn check_field(&self, other: &Series) -> Result<(), SeriesError> {
        if self.field != other.field {
            Err(SeriesError::FieldMismatch)
        } else {
            Ok(())
        }
    }

    /// Sum.
    pub fn add(&self, other: &Series) -> Series {
        self.combine(other, false)
    }

    /// Difference.
    pub fn sub(&self, other: &Series) -> Series {
        self.combine(other, true)
    }

    fn combine(&self, other: &Series, subtract: bool) -> Series {
        assert_eq!(self.field, other.field, "series over different fields");
        let f = self.field;
        let prec = self.prec.min(other.prec);
        let lo = self.val.min(other.val).min(prec);
        let mut c = vec![0u64; (prec - lo) as usize];
        for (i, &x) in self.coeffs.iter().enumerate() {
            let e = self.val + i as i64;
            if e < prec {
                c[(e - lo) as usize] = x;
            }
        }
        for (i, &x) in other.coeffs.iter().enumerate() {
            let e = other.val + i as i64;
            if e < prec {
                let slot = &mut c[(e - lo) as usize];
                *slot = if subtract { f.sub(*slot, x) } else { f.add(*slot, x) };
            }
        }
        Series::normalized(f, lo, prec, c)
    }

    /// Additive inverse.
    pub fn neg(&self) -> Series {
        let f = self.field;
        Series {
            field: f,
            val: self.val,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|&x| f.neg(x)).collect(),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: u64) -> Series {
        let f = self.field;
        let c = f.reduce(c);
        Series::normalized(f, self.val, self.prec, self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    /// Multiplication by `t^k` (for any integer `k`).
    pub fn shift(&self, k: i64) -> Series {
        Series {
            field: self.field,
            val: self.val + k,
            prec: self.prec + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Product; the window is `val = va + vb`, `prec = min(pa + vb, pb + va)`.
    pub fn mul(&self, other: &Series) -> Series {
        assert_eq!(self.field, other.field, "series over different fields");
        let f = self.field;
        let val = self.val + other.val;
        let prec = (self.prec + other.val).min(other.prec + self.val);
        if self.is_zero() || other.is_zero() || prec <= val {
            return Series::zero(f, prec);
        }
        let len = (prec - val) as usize;
        let c = mul_trunc(f, &self.coeffs, &other.coeffs, len);
        Series::normalized(f, val, prec, c)
    }

    /// Square.
    pub fn square(&self) -> Series {
        self.mul(self)
    }

    /// Non-negative power (`pow(0)` is `1` at the operand's relative window).
    pub fn pow(&self, e: u64) -> Series {
        if e == 0 {
            return Series::one(self.field, (self.prec - self.val).max(1));
        }
        let mut acc: Option<Series> = None;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc.expect("e > 0")
    }

    /// Integer power, negative exponents through [`Series::invert`].
    pub fn powi(&self, e: i64) -> Result<Series, SeriesError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.invert()?.pow((-e) as u64))
        }
    }

    /// Multiplicative inverse in k((t)): `val = −v`, `prec = pa − 2v`.
    pub fn invert(&self) -> Result<Series, SeriesError> {
        if self.is_zero() {
            return Err(SeriesError::NotInvertible(self.prec));
        }
        let f = self.field;
        let v = self.val;
        let rel = (self.prec - v) as usize;
        let u = inv_unit_trunc(f, &self.coeffs, rel);
        Ok(Series::normalized(f, -v, self.prec - 2 * v, u))
    }

    /// Quotient `self / other`.
    pub fn div(&self, other: &Series) -> Result<Series, SeriesError> {
        self.check_field(other)?;
        Ok(self.mul(&other.invert()?))
    }

    /// Formal derivative; the window shifts down by one.
    pub fn derivative(&self) -> Series {
        let f = self.field;
        let c: Vec<u64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &x)| f.mul(x, f.from_i64(self.val + i as i64)))
            .collect();
        Series::normalized(f, self.val - 1, self.prec - 1, c)
    }

    /// Substitution `self(g(t))` for `val(g) ≥ 1`.
    ///
    /// With `k = val(g)`, the result is known modulo
    /// `t^{min(k·pf, pg + k·(m − 1))}` where `m` is the least exponent `≠ 0`
    /// that may carry a nonzero coefficient of `self`.
    pub fn compose(&self, g: &Series) -> Result<Series, SeriesError> {
        self.check_field(g)?;
        let f = self.field;
        let k = g.val;
        if g.is_zero() || k < 1 {
            return Err(SeriesError::BadInner(if g.is_zero() { g.prec } else { k }));
        }
        let m = if self.val >= 1 {
            self.val
        } else if self.val == 0 {
            1
        } else {
            self.val
        };
        let prec = (k * self.prec).min(g.prec + k * (m - 1));
        if self.is_zero() {
            return Ok(Series::zero(f, prec));
        }
        // Non-negative part by Horner with plain truncated polynomials: the
        // unknown tail of g only affects exponents ≥ prec.
        let mut total = Series::zero(f, prec);
        let hi = self.prec - 1;
        if hi >= 0 && prec > 0 {
            let plen = prec as usize;
            let gpoly = dense_from(f, g, plen);
            let mut acc = vec![0u64; plen];
            for e in (self.val.max(0)..=hi).rev() {
                // acc ← acc·g + c_e
                if acc.iter().any(|&x| x != 0) {
                    acc = mul_trunc(f, &acc, &gpoly, plen);
                }
                acc[0] = f.add(acc[0], self.c(e));
            }
            // multiply by g^{val} already folded in: Horner ran from val.max(0)
            let lo = self.val.max(0);
            let mut pos = acc;
            if lo > 0 {
                let gl = Series::from_coeffs(f, 0, prec, &gpoly).pow(lo as u64);
                pos = mul_trunc(f, &pos, &dense_from(f, &gl, plen), plen);
            }
            total = Series::from_coeffs(f, 0, prec, &pos);
        }
        if self.val < 0 {
            let h = g.invert()?;
            // Σ_{e<0} c_e h^{-e} = h·(c_{-1} + h·(c_{-2} + … + h·c_val)); the
            // constants are exact, so give them a window wider than needed.
            let cprec = prec + k * (1 - self.val) + 1;
            let mut acc = Series::constant(f, self.c(self.val) as i64, cprec);
            for e in self.val + 1..0 {
                acc = acc.mul(&h).add(&Series::constant(f, self.c(e) as i64, cprec));
            }
            total = total.add(&acc.mul(&h));
        }
        Ok(total.truncate(prec))
    }

    /// Compositional inverse of a series with valuation one.
    pub fn comp_inverse(&self) -> Result<Series, SeriesError> {
        let f = self.field;
        if self.val != 1 {
            return Err(SeriesError::NotInvertibleComposition(self.val));
        }
        let prec = self.prec;
        let c1inv = f.inv(self.c(1)).expect("leading coefficient nonzero");
        // Newton: g ← g − (f(g) − t) / f'(g), doubling the correct prefix.
        let fprime = self.derivative();
        let mut g = Series::monomial(f, 1, c1inv as i64, 2.min(prec));
        let mut known = 2i64;
        loop {
            let target = (2 * known).min(prec);
            let gt = Series::from_coeffs(f, g.val, target, g.window());
            let fg = self.truncate(target).compose(&gt)?;
            let err = fg.sub(&Series::var(f, target));
            let dfg = fprime.truncate(target).compose(&gt)?;
            let corr = err.mul(&dfg.invert()?);
            let next = gt.sub(&corr);
            g = Series::from_coeffs(f, next.val.min(1), target, &coeffs_from(&next, next.val.min(1), target));
            known = target;
            if known >= prec {
                break;
            }
        }
        Ok(g.truncate(prec))
    }

    /// Writes `self` as a series `h` in `y` (val `n ≥ 1`) with `h(y) = self`,
    /// by greedy leading-term elimination.
    pub fn express_in(&self, y: &Series) -> Result<Series, SeriesError> {
        self.check_field(y)?;
        let f = self.field;
        let n = y.val;
        if y.is_zero() || n < 1 {
            return Err(SeriesError::BadInner(n));
        }
        let ylead_inv = f.inv(y.lead().expect("nonzero")).expect("nonzero");
        let mut rem = self.clone();
        let mut terms: Vec<(i64, i64)> = Vec::new();
        let mut first: Option<i64> = None;
        let mut cur_e: Option<i64> = None;
        let mut ypow = Series::one(f, 1);
        loop {
            if rem.is_zero() {
                break;
            }
            let v = rem.val;
            if v.rem_euclid(n) != 0 {
                return Err(SeriesError::NotExpressible { val: v, n });
            }
            let e = v / n;
            // update ypow to y^e
            ypow = match cur_e {
                None => y.powi(e)?,
                Some(ce) => {
                    debug_assert!(e > ce);
                    ypow.mul(&y.pow((e - ce) as u64))
                }
            };
            cur_e = Some(e);
            first.get_or_insert(e);
            let c = f.mul(rem.lead().expect("nonzero"), f.pow(ylead_inv, e.rem_euclid((f.p() - 1) as i64) as u64));
            terms.push((e, c as i64));
            rem = rem.sub(&ypow.scale(c));
        }
        let prec_t = rem.prec;
        // w-coefficients e with n·e < prec_t are determined.
        let wprec = (prec_t - 1).div_euclid(n) + 1;
        Ok(Series::from_terms(f, &terms, wprec))
    }

    /// Text form, e.g. `2*t^-1 + 1 + t^2 + O(t^5)`.
    pub fn to_text(&self, var: &str) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms() {
            let mono = match e {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            };
            let s = if mono.is_empty() {
                format!("{c}")
            } else if c == 1 {
                mono
            } else {
                format!("{c}*{mono}")
            };
            parts.push(s);
        }
        parts.push(format!("O({var}^{})", self.prec));
        parts.join(" + ")
    }

    /// Parses the text form produced by [`Series::to_text`]; any single
    /// identifier is accepted as variable name.
    pub fn parse(field: PrimeField, text: &str) -> Result<Series, SeriesError> {
        let bad = |m: &str| SeriesError::Parse(format!("{m} in {text:?}"));
        let mut terms: Vec<(i64, i64)> = Vec::new();
        let mut prec: Option<i64> = None;
        for raw in text.split('+') {
            let tok: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
            if tok.is_empty() {
                return Err(bad("empty term"));
            }
            if let Some(inner) = tok.strip_prefix("O(").and_then(|s| s.strip_suffix(')')) {
                let (_, e) = parse_monomial(inner).ok_or_else(|| bad("bad O-term"))?;
                prec = Some(e);
                continue;
            }
            let (coeff, mono) = match tok.split_once('*') {
                Some((c, m)) => (c.parse::<i64>().map_err(|_| bad("bad coefficient"))?, Some(m)),
                None => match tok.parse::<i64>() {
                    Ok(c) => (c, None),
                    Err(_) => (1, Some(tok.as_str())),
                },
            };
            let e = match mono {
                None => 0,
                Some(m) => parse_monomial(m).ok_or_else(|| bad("bad monomial"))?.1,
            };
            terms.push((e, coeff));
        }
        let prec = prec.ok_or_else(|| bad("missing O-term"))?;
        if terms.iter().any(|&(e, _)| e >= prec) {
            return Err(bad("term beyond the O-term"));
        }
        Ok(Series::from_terms(field, &terms, prec))
    }
}

fn parse_monomial(m: &str) -> Option<(String, i64)> {
    let (name, e) = match m.split_once('^') {
        Some((n, e)) => (n, e.parse::<i64>().ok()?),
        None => (m, 1),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphabetic() || c == '_') {
        return None;
    }
    Some((name.to_string(), e))
}

fn coeffs_from(s: &Series, lo: i64, hi: i64) -> Vec<u64> {
    (lo..hi).map(|e| s.c(e)).collect()
}

/// Dense coefficients of exponents `0..len` of a power series (unknown
/// coefficients are filled with zero).
fn dense_from(f: PrimeField, s: &Series, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for (i, &c) in s.window().iter().enumerate() {
        let e = s.val() + i as i64;
        if e >= 0 && (e as usize) < len {
            out[e as usize] = f.reduce(c);
        }
    }
    out
}

/// Product of two coefficient vectors truncated to `len` terms.
pub(crate) fn mul_trunc(f: PrimeField, a: &[u64], b: &[u64], len: usize) -> Vec<u64> {
    let p = f.p();
    let mut out = vec![0u64; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        let lim = (len - i).min(b.len());
        let dst = &mut out[i..i + lim];
        for (d, &y) in dst.iter_mut().zip(&b[..lim]) {
            *d = (*d + x * y) % p;
        }
    }
    out
}

/// Inverse of a unit power series (nonzero constant term) modulo `t^len`.
pub(crate) fn inv_unit_trunc(f: PrimeField, a: &[u64], len: usize) -> Vec<u64> {
    let p = f.p();
    let a0inv = f.inv(a[0]).expect("unit");
    let mut out = vec![0u64; len];
    if len == 0 {
        return out;
    }
    out[0] = a0inv;
    for n in 1..len {
        let mut s = 0u64;
        for k in 1..=n.min(a.len() - 1) {
            s = (s + a[k] * out[n - k]) % p;
        }
        out[n] = f.mul(f.neg(s), a0inv);
    }
    out
}

/// Cached powers `g^0, g^1, …` of a fixed inner series, making repeated
/// substitutions `x(g)` cost one dense pass per term.
#[derive(Clone, Debug)]
pub struct PowerTable {
    inner: Series,
    len: usize,
    pows: Vec<Vec<u64>>,
}

impl PowerTable {
    /// Prepares powers of `g` (valuation `≥ 1`) as dense vectors over the
    /// exponents `0..len`; results are capped at precision `len`.
    pub fn new(g: &Series, len: usize) -> Result<Self, SeriesError> {
        if g.is_zero() || g.val < 1 {
            return Err(SeriesError::BadInner(if g.is_zero() { g.prec } else { g.val }));
        }
        let f = g.field;
        let mut one = vec![0u64; len];
        if len > 0 {
            one[0] = 1;
        }
        Ok(Self {
            inner: g.clone(),
            len,
            pows: vec![one, dense_from(f, g, len)],
        })
    }

    /// The inner series.
    pub fn inner(&self) -> &Series {
        &self.inner
    }

    /// Dense coefficients of `g^e` over exponents `0..len`; entries at
    /// exponents `≥ g.prec() + (e − 1)·val(g)` are not meaningful.
    pub fn power(&mut self, e: usize) -> &[u64] {
        let f = self.inner.field;
        while self.pows.len() <= e {
            let next = mul_trunc(f, self.pows.last().expect("nonempty"), &self.pows[1], self.len);
            self.pows.push(next);
        }
        &self.pows[e]
    }

    /// `g^e` as a series with its exact window (`e ≥ 1`).
    pub fn power_series(&mut self, e: usize) -> Series {
        let f = self.inner.field;
        let k = self.inner.val;
        let prec = (self.inner.prec + (e as i64 - 1) * k).min(self.len as i64);
        let v = self.power(e).to_vec();
        Series::from_coeffs(f, 0, prec, &v)
    }

    /// Computes every power that a substitution into a series known modulo
    /// `t^len` can use, so that [`PowerTable::compose_cached`] never falls
    /// back to plain composition.
    pub fn fill(&mut self) {
        let k = self.inner.val.max(1) as usize;
        let top = self.len.div_ceil(k);
        if top > 0 {
            self.power(top);
        }
    }

    /// `x(g)` using only the powers computed so far (see
    /// [`PowerTable::fill`]); falls back to [`Series::compose`] for Laurent
    /// series or missing powers. Same precision rule as [`Series::compose`].
    pub fn compose_cached(&self, x: &Series) -> Result<Series, SeriesError> {
        x.check_field(&self.inner)?;
        let k = self.inner.val;
        let m = x.val.max(1);
        let prec = (k * x.prec).min(self.inner.prec + k * (m - 1)).min(self.len as i64);
        let top = (x.prec - 1).min((prec - 1).div_euclid(k));
        if x.val < 0 || top >= self.pows.len() as i64 {
            return Ok(x.compose(&self.inner)?.truncate(self.len as i64));
        }
        let f = x.field;
        if x.is_zero() || prec <= 0 {
            return Ok(Series::zero(f, prec.max(x.val * k)));
        }
        let plen = prec as usize;
        let mut acc = vec![0u64; plen];
        let p = f.p();
        for (i, &c) in x.window().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = x.val + i as i64;
            if e * k >= prec {
                break;
            }
            for (a, &b) in acc.iter_mut().zip(&self.pows[e as usize][..plen]) {
                *a = (*a + c * b) % p;
            }
        }
        Ok(Series::from_coeffs(f, 0, prec, &acc))
    }

    /// `x(g)`, with the same precision rule as [`Series::compose`].
    pub fn compose(&mut self, x: &Series) -> Result<Series, SeriesError> {
        x.check_field(&self.inner)?;
        if x.val < 0 {
            return x.compose(&self.inner);
        }
        let f = x.field;
        let k = self.inner.val;
        let m = x.val.max(1);
        let prec = (k * x.prec).min(self.inner.prec + k * (m - 1)).min(self.len as i64);
        if x.is_zero() || prec <= 0 {
            return Ok(Series::zero(f, prec.max(x.val * k)));
        }
        let plen = prec as usize;
        let mut acc = vec![0u64; prec as usize];
        let p = f.p();
        for (i, &c) in x.window().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = x.val + i as i64;
            if e * k >= prec {
                break;
            }
            let pw = self.power(e as usize);
            for (a, &b) in acc.iter_mut().zip(&pw[..plen]) {
                *a = (*a + c * b) % p;
            }
        }
        Ok(Series::from_coeffs(f, 0, prec, &acc))
    }
}

/// Product of a family of series.
pub fn orbit_product(factors: &[Series]) -> Series {
    let mut it = factors.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, s| acc.mul(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn s(p: u64, text: &str) -> Series {
        Series::parse(k(p), text).unwrap()
    }

    /// `t/(1 + c·t)` as an explicit geometric series.
    fn moebius(p: u64, c: i64, prec: i64) -> Series {
        let f = k(p);
        let mut out = Vec::new();
        let mut pw = 1u64;
        for e in 1..prec {
            out.push((e, pw as i64));
            pw = f.mul(pw, f.from_i64(-c));
        }
        Series::from_terms(f, &out, prec)
    }

    #[test]
    fn text_round_trip() {
        let x = s(5, "2*t^-1 + 1 + t^2 + O(t^5)");
        assert_eq!(x.val(), -1);
        assert_eq!(x.prec(), 5);
        assert_eq!(x.to_text("t"), "2*t^-1 + 1 + t^2 + O(t^5)");
        assert_eq!(s(3, "O(t^4)").to_text("t"), "O(t^4)");
        assert_eq!(s(7, "3*y + 4*y^3 + O(y^6)").to_text("y"), "3*y + 4*y^3 + O(y^6)");
        assert!(Series::parse(k(3), "1 + t").is_err());
        assert!(Series::parse(k(3), "t^7 + O(t^5)").is_err());
    }

    #[test]
    fn product_and_inverse_examples() {
        let a = s(3, "1 + t + O(t^8)");
        let b = s(3, "1 + 2*t + O(t^8)");
        assert_eq!(a.mul(&b), s(3, "1 + 2*t^2 + O(t^8)"));
        let inv = a.invert().unwrap();
        assert_eq!(inv, s(3, "1 + 2*t + t^2 + 2*t^3 + t^4 + 2*t^5 + t^6 + 2*t^7 + O(t^8)"));
        let t = Series::var(k(3), 8);
        let ti = t.invert().unwrap();
        assert_eq!(ti.val(), -1);
        assert_eq!(ti.terms(), vec![(-1, 1)]);
        assert_eq!(ti.prec(), 6);
        assert!(Series::zero(k(3), 4).invert().is_err());
    }

    #[test]
    fn derivative_examples() {
        assert!(s(3, "t^3 + O(t^9)").derivative().is_zero());
        assert_eq!(s(3, "t^2 + t^4 + O(t^9)").derivative(), s(3, "2*t + t^3 + O(t^8)"));
        // t^3 / (1 + 2t^2) is the orbit product of the standard ℤ/3 action;
        // its derivative has valuation 2(p − 1) = 4.
        let y = s(3, "t^3 + O(t^20)").mul(&s(3, "1 + 2*t^2 + O(t^20)").invert().unwrap());
        assert_eq!(y.derivative().val(), 4);
    }

    #[test]
    fn composition_examples() {
        let f = s(3, "1 + 2*t + t^4 + O(t^9)");
        let t = Series::var(k(3), 12);
        assert_eq!(f.compose(&t).unwrap(), f);

        let a = s(3, "t + t^2 + O(t^10)");
        let b = s(3, "t + t^3 + O(t^10)");
        let c = a.compose(&b).unwrap();
        let expected = s(3, "t + t^2 + t^3 + 2*t^4 + t^6 + O(t^10)");
        assert!(c.agrees_with(&expected));
        assert_eq!(c.prec(), 10);

        // σ(t) = t/(1+t) and σ^k(t) = t/(1+kt).
        let sigma = moebius(3, 1, 15);
        let sigma2 = sigma.compose(&sigma).unwrap();
        assert!(sigma2.agrees_with(&moebius(3, 2, 15)));
        let sigma3 = sigma2.compose(&sigma).unwrap();
        assert!(sigma3.agrees_with(&Series::var(k(3), 15)));
        assert!(a.compose(&s(3, "1 + t + O(t^4)")).is_err());
    }

    #[test]
    fn laurent_composition() {
        // t^-1 ∘ (t/(1+t)) = (1+t)/t = t^-1 + 1
        let f = s(5, "t^-1 + O(t^6)");
        let g = moebius(5, 1, 12);
        let r = f.compose(&g).unwrap();
        assert!(r.agrees_with(&s(5, "t^-1 + 1 + O(t^5)")));
    }

    #[test]
    fn comp_inverse_examples() {
        let t = Series::var(k(5), 10);
        assert_eq!(t.comp_inverse().unwrap(), t);
        let g = moebius(5, 1, 12).comp_inverse().unwrap();
        assert!(g.agrees_with(&moebius(5, -1, 12)));
        let h = s(5, "t + t^2 + O(t^10)").comp_inverse().unwrap();
        assert!(h.agrees_with(&s(5, "t + 4*t^2 + 2*t^3 + O(t^4)")));
        assert!(s(5, "t + t^2 + O(t^10)").compose(&h).unwrap().agrees_with(&Series::var(k(5), 10)));
        assert!(s(5, "t^2 + O(t^9)").comp_inverse().is_err());
    }

    #[test]
    fn express_in_examples() {
        let y = s(5, "t^2 + t^5 + O(t^20)");
        let w = y.express_in(&y).unwrap();
        assert_eq!(w.terms(), vec![(1, 1)]);
        let u = y.square().add(&y.pow(3));
        let h = u.express_in(&y).unwrap();
        assert_eq!(h.terms(), vec![(2, 1), (3, 1)]);
        let y3 = s(5, "t^3 + O(t^20)");
        assert!(matches!(Series::var(k(5), 20).express_in(&y3), Err(SeriesError::NotExpressible { .. })));
    }

    #[test]
    fn orbit_product_examples() {
        let f3 = k(3);
        let factors = [moebius(3, 0, 20), moebius(3, 1, 20), moebius(3, 2, 20)];
        let y = orbit_product(&factors);
        let expected = s(3, "t^3 + O(t^22)").mul(&s(3, "1 + 2*t^2 + O(t^20)").invert().unwrap());
        assert!(y.agrees_with(&expected));
        assert_eq!(y.val(), 3);
        let t = Series::var(f3, 10);
        assert_eq!(orbit_product(&[t.clone()]), t);
        assert_eq!(orbit_product(&[t.clone(), t.clone(), t.clone()]).terms(), vec![(3, 1)]);
    }

    fn arb_series(p: u64, val: i64, len: usize) -> impl Strategy<Value = Series> {
        prop::collection::vec(0..p, len).prop_map(move |c| {
            let mut c = c;
            if c[0] == 0 {
                c[0] = 1;
            }
            Series::from_coeffs(k(p), val, val + len as i64, &c)
        })
    }

    proptest! {
        #[test]
        fn inverse_composition_is_identity(f in arb_series(7, 1, 16)) {
            let g = f.comp_inverse().unwrap();
            let tt = g.compose(&f).unwrap();
            prop_assert!(tt.agrees_with(&Series::var(k(7), 100)));
            prop_assert!(tt.prec() >= 16);
            let tt2 = f.compose(&g).unwrap();
            prop_assert!(tt2.agrees_with(&Series::var(k(7), 100)));
        }

        #[test]
        fn derivative_is_a_derivation(a in arb_series(5, 0, 12), b in arb_series(5, -2, 12)) {
            let lhs = a.mul(&b).derivative();
            let rhs = a.mul(&b.derivative()).add(&b.mul(&a.derivative()));
            prop_assert!(lhs.agrees_with(&rhs));
        }

        #[test]
        fn express_in_recovers_invariants(y in arb_series(5, 3, 18), h in arb_series(5, 0, 6)) {
            let u = h.compose(&y).unwrap();
            let back = u.express_in(&y).unwrap();
            prop_assert!(back.agrees_with(&h));
            prop_assert!(back.compose(&y).unwrap().agrees_with(&u));
        }

        #[test]
        fn precision_is_sound(f in arb_series(3, 0, 10), g in arb_series(3, 1, 10), fx in prop::collection::vec(0u64..3, 10), gx in prop::collection::vec(0u64..3, 10)) {
            // Extend both operands with arbitrary extra digits: the reported
            // window of every result must not move.
            let ext = |s: &Series, extra: &[u64]| {
                let mut c: Vec<u64> = (s.val()..s.prec()).map(|e| s.c(e)).collect();
                c.extend_from_slice(extra);
                Series::from_coeffs(k(3), s.val(), s.prec() + extra.len() as i64, &c)
            };
            let (f2, g2) = (ext(&f, &fx), ext(&g, &gx));
            prop_assert!(f.mul(&g).agrees_with(&f2.mul(&g2)));
            prop_assert!(f.compose(&g).unwrap().agrees_with(&f2.compose(&g2).unwrap()));
            prop_assert!(g.invert().unwrap().agrees_with(&g2.invert().unwrap()));
            prop_assert!(g.comp_inverse().unwrap().agrees_with(&g2.comp_inverse().unwrap()));
            prop_assert!(f.derivative().agrees_with(&f2.derivative()));
        }

        #[test]
        fn power_table_matches_compose(f in arb_series(5, 0, 12), g in arb_series(5, 1, 12), fx in prop::collection::vec(0u64..5, 8), gx in prop::collection::vec(0u64..5, 8)) {
            let mut table = PowerTable::new(&g, 40).unwrap();
            let a = table.compose(&f).unwrap();
            let b = f.compose(&g).unwrap();
            prop_assert!(a.agrees_with(&b));
            prop_assert_eq!(a.prec(), b.prec().min(40));
            let mut filled = PowerTable::new(&g, 40).unwrap();
            filled.fill();
            let c = filled.compose_cached(&f).unwrap();
            prop_assert!(c.agrees_with(&b));
            prop_assert_eq!(c.prec(), a.prec());
            let ext = |s: &Series, extra: &[u64]| {
                let mut c: Vec<u64> = (s.val()..s.prec()).map(|e| s.c(e)).collect();
                c.extend_from_slice(extra);
                Series::from_coeffs(k(5), s.val(), s.prec() + extra.len() as i64, &c)
            };
            let mut t2 = PowerTable::new(&ext(&g, &gx), 40).unwrap();
            prop_assert!(a.agrees_with(&t2.compose(&ext(&f, &fx)).unwrap()));
            prop_assert!(table.power_series(3).agrees_with(&g.pow(3)));
        }
    }
}
