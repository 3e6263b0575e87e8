//! Exact first cohomology of a lattice, presented twice: by Laurent
//! potentials (exact series cocycles) and by truncated modules (coordinates).

use rand::RngCore;

use super::MapsError;
use crate::action::{ideal_module, lattice_coords, lattice_h1, LatticeH1, LocalAction};
use crate::groups::{cohomology_tail, Cochain, CohomologySpace, GModule};
use crate::linalg::{Matrix, PrimeField, SpanSolver};
use crate::series::{PowerTable, Series};

/// `H¹(H, x^start k[[x]])` for an action of `H` on k[[x]].
///
/// Classes have coordinates in the image of `H¹` of the fine truncation
/// (cut at `x^fine`) in `H¹` of the coarse truncation (cut at `x^coarse`),
/// and exact representatives `h ↦ P(f_h) − P` with `P` a Laurent
/// polynomial. Construction fails unless both presentations have the same
/// dimension.
#[derive(Clone, Debug)]
pub struct LatticeCohomology {
    start: i64,
    coarse: i64,
    fine: i64,
    window: LatticeH1,
    coarse_module: GModule,
    fine_module: GModule,
    space: CohomologySpace,
    potentials: Vec<Series>,
    cocycles: Vec<Vec<Series>>,
}

/// Cached substitutions `x ↦ x(f_h)` for every element of an action.
#[derive(Clone, Debug)]
pub struct Substitutions {
    tables: Vec<PowerTable>,
}

impl Substitutions {
    /// Dense powers of every `f_h` up to precision `len`.
    pub fn new(action: &LocalAction, len: i64) -> Result<Self, MapsError> {
        let tables = action
            .all_series()
            .iter()
            .map(|s| {
                let mut t = PowerTable::new(s, len.max(2) as usize)?;
                t.fill();
                Ok(t)
            })
            .collect::<Result<Vec<_>, MapsError>>()?;
        Ok(Self { tables })
    }

    /// `x(f_h)`.
    pub fn apply(&self, h: usize, x: &Series) -> Result<Series, MapsError> {
        Ok(self.tables[h].compose_cached(x)?)
    }

    /// The power table of `f_h`.
    pub fn table(&self, h: usize) -> &PowerTable {
        &self.tables[h]
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    /// True for an empty family.
    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// The tables of a subgroup, in its local order.
    pub fn restrict(&self, elements: &[usize]) -> Self {
        Self {
            tables: elements.iter().map(|&h| self.tables[h].clone()).collect(),
        }
    }

    /// `x(f_h) − x`.
    pub fn difference(&self, h: usize, x: &Series) -> Result<Series, MapsError> {
        Ok(self.apply(h, x)?.sub(x))
    }
}

impl LatticeCohomology {
    /// Builds both presentations; `coarse` and `fine` are cutoffs in the
    /// variable of `action` with `start < coarse ≤ fine`.
    pub fn new(action: &LocalAction, start: i64, coarse: i64, fine: i64) -> Result<Self, MapsError> {
        let subs = Substitutions::new(action, fine)?;
        Self::with_substitutions(action, start, coarse, fine, &subs)
    }

    /// [`LatticeCohomology::new`] reusing substitution tables of length at
    /// least `fine`.
    pub fn with_substitutions(action: &LocalAction, start: i64, coarse: i64, fine: i64, subs: &Substitutions) -> Result<Self, MapsError> {
        let f = action.field();
        let coarse_module = ideal_module(action, start, coarse)?;
        let fine_module = ideal_module(action, start, fine)?;
        let proj = truncation_matrix(f, (coarse - start) as usize, (fine - start) as usize);
        let space = cohomology_tail(&fine_module, &coarse_module, &proj, 1)?;
        let window = lattice_h1(action, start)?;
        if window.dim != space.dim() {
            return Err(MapsError::Stabilization {
                what: format!("H¹({}, lattice {start})", action.group().name()),
                exact: window.dim,
                truncated: space.dim(),
            });
        }
        let n = action.group().order();
        let dim = window.dim;
        // coordinates of the window basis, then change basis to the tail reps
        let mut window_cocycles = Vec::with_capacity(dim);
        let mut cols = Vec::with_capacity(dim);
        for b in &window.betas {
            let vals = (0..n)
                .map(|h| Ok(subs.difference(h, &b.truncate(fine))?))
                .collect::<Result<Vec<_>, MapsError>>()?;
            cols.push(space.coords(&values_cochain(&vals, start, coarse)?)?);
            window_cocycles.push(vals);
        }
        let b = Matrix::from_cols(f, dim, &cols)?;
        let binv = invert(&b)?;
        let mut potentials = Vec::with_capacity(dim);
        let mut cocycles = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut pot = Series::zero(f, window.betas.first().map_or(fine, |s| s.prec()));
            let mut vals: Vec<Series> = (0..n).map(|_| Series::zero(f, fine)).collect();
            for i in 0..dim {
                let c = binv.get(i, j);
                if c != 0 {
                    pot = pot.add(&window.betas[i].scale(c));
                    for h in 0..n {
                        vals[h] = vals[h].add(&window_cocycles[i][h].scale(c));
                    }
                }
            }
            potentials.push(pot);
            cocycles.push(vals);
        }
        Ok(Self {
            start,
            coarse,
            fine,
            window,
            coarse_module,
            fine_module,
            space,
            potentials,
            cocycles,
        })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// First exponent of the lattice.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Coarse cutoff.
    pub fn coarse(&self) -> i64 {
        self.coarse
    }

    /// Fine cutoff.
    pub fn fine(&self) -> i64 {
        self.fine
    }

    /// The explicit Hilbert 90 window.
    pub fn window(&self) -> &LatticeH1 {
        &self.window
    }

    /// The coarse truncation.
    pub fn coarse_module(&self) -> &GModule {
        &self.coarse_module
    }

    /// The fine truncation.
    pub fn fine_module(&self) -> &GModule {
        &self.fine_module
    }

    /// The truncated presentation.
    pub fn space(&self) -> &CohomologySpace {
        &self.space
    }

    /// Potential of the `j`-th basis class.
    pub fn potential(&self, j: usize) -> &Series {
        &self.potentials[j]
    }

    /// Coordinates of a cocycle given by its coarse cochain.
    pub fn coords(&self, c: &Cochain) -> Result<Vec<u64>, MapsError> {
        Ok(self.space.coords(c)?)
    }

    /// Coordinates of a cocycle given by one lattice series per element.
    pub fn coords_of_values(&self, values: &[Series]) -> Result<Vec<u64>, MapsError> {
        self.coords(&values_cochain(values, self.start, self.coarse)?)
    }

    /// The coarse cochain of a family of lattice series.
    pub fn coarse_cochain(&self, values: &[Series]) -> Result<Cochain, MapsError> {
        values_cochain(values, self.start, self.coarse)
    }

    /// The fine cochain of a family of lattice series.
    pub fn fine_cochain(&self, values: &[Series]) -> Result<Cochain, MapsError> {
        values_cochain(values, self.start, self.fine)
    }

    /// The exact cocycle `Σ xⱼ (basis cocycle j)`, known modulo `x^fine`.
    pub fn cocycle(&self, x: &[u64]) -> Vec<Series> {
        let f = self.space.module().field();
        let n = self.space.module().group().order();
        let mut vals: Vec<Series> = (0..n).map(|_| Series::zero(f, self.fine)).collect();
        for (j, &c) in x.iter().enumerate() {
            if c != 0 {
                for h in 0..n {
                    vals[h] = vals[h].add(&self.cocycles[j][h].scale(c));
                }
            }
        }
        vals
    }

    /// Series of a fine coordinate vector.
    pub fn fine_series(&self, v: &[u64]) -> Series {
        Series::from_coeffs(self.space.module().field(), self.start, self.fine, v)
    }

    /// The coboundary `h ↦ h·v − v` of a fine lattice vector, as series.
    pub fn coboundary_values(&self, v: &[u64]) -> Vec<Series> {
        let f = self.fine_module.field();
        (0..self.fine_module.group().order())
            .map(|h| {
                let mut w = self.fine_module.act(h, v);
                crate::linalg::axpy(f, &mut w, f.neg(1), v);
                self.fine_series(&w)
            })
            .collect()
    }

    /// A random cocycle in the class with coordinates `x`: the basis
    /// combination plus the coboundary of a random fine vector.
    pub fn random_cocycle(&self, x: &[u64], rng: &mut dyn RngCore) -> Vec<Series> {
        let p = self.space.module().field().p();
        let v: Vec<u64> = (0..self.fine_module.dim()).map(|_| rng.next_u64() % p).collect();
        let base = self.cocycle(x);
        let cob = self.coboundary_values(&v);
        base.iter().zip(&cob).map(|(a, b)| a.add(b)).collect()
    }

    /// Random coordinates.
    pub fn random_coords(&self, rng: &mut dyn RngCore) -> Vec<u64> {
        let p = self.space.module().field().p();
        (0..self.dim()).map(|_| rng.next_u64() % p).collect()
    }
}

/// The cochain of lattice coordinates `start..cut` of a family of series.
pub fn values_cochain(values: &[Series], start: i64, cut: i64) -> Result<Cochain, MapsError> {
    let dim = (cut - start).max(0) as usize;
    let rows = values
        .iter()
        .map(|s| Ok(lattice_coords(s, start, cut)?))
        .collect::<Result<Vec<_>, MapsError>>()?;
    Ok(Cochain::from_fn(1, values.len(), dim, |a| rows[a[0]].clone()))
}

/// The projection onto the first `rows` of `cols` coordinates.
pub fn truncation_matrix(field: PrimeField, rows: usize, cols: usize) -> Matrix {
    let mut p = Matrix::zeros(field, rows, cols);
    for r in 0..rows.min(cols) {
        p.set(r, r, 1);
    }
    p
}

/// Inverse of a square matrix.
pub fn invert(m: &Matrix) -> Result<Matrix, MapsError> {
    let n = m.rows();
    let f = m.field();
    let mut solver = SpanSolver::new(f, n);
    for j in 0..n {
        solver.push(&m.col(j));
    }
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0u64; n];
        e[i] = 1;
        cols.push(
            solver
                .express(&e)
                .ok_or_else(|| MapsError::Invalid("change of basis is singular".into()))?,
        );
    }
    Ok(Matrix::from_cols(f, n, &cols)?)
}
