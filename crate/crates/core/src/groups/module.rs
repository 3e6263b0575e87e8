//! Finite-dimensional 𝔽_p[G]-modules given by one action matrix per element.

use super::{FiniteGroup, GroupError, QuotientGroup, Subgroup};
use crate::linalg::{Matrix, PrimeField, Subspace};

/// A left 𝔽_p[G]-module `𝔽_p^dim`, with `action[g]` the matrix of `g`.
#[derive(Clone, Debug)]
pub struct GModule {
    group: FiniteGroup,
    field: PrimeField,
    dim: usize,
    action: Vec<Matrix>,
}

impl GModule {
    /// Validates that `action` is a homomorphism `G → GL_dim(𝔽_p)`.
    pub fn new(group: FiniteGroup, field: PrimeField, dim: usize, action: Vec<Matrix>) -> Result<Self, GroupError> {
        let m = Self::new_unchecked(group, field, dim, action)?;
        m.validate()?;
        Ok(m)
    }

    /// Checks shapes only; used when the homomorphism property holds by
    /// construction.
    pub fn new_unchecked(group: FiniteGroup, field: PrimeField, dim: usize, action: Vec<Matrix>) -> Result<Self, GroupError> {
        if action.len() != group.order() {
            return Err(GroupError::InvalidModule(format!(
                "{} matrices for a group of order {}",
                action.len(),
                group.order()
            )));
        }
        if action.iter().any(|a| a.rows() != dim || a.cols() != dim) {
            return Err(GroupError::InvalidModule("action matrix has the wrong size".into()));
        }
        Ok(Self {
            group,
            field,
            dim,
            action,
        })
    }

    /// Builds a module from matrices for the generators of `group`, extending
    /// multiplicatively along a breadth-first tree and validating the result.
    pub fn from_generator_matrices(
        group: FiniteGroup,
        field: PrimeField,
        dim: usize,
        gens: &[usize],
        mats: &[Matrix],
    ) -> Result<Self, GroupError> {
        let n = group.order();
        let mut action: Vec<Option<Matrix>> = vec![None; n];
        action[0] = Some(Matrix::identity(field, dim));
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(g) = queue.pop_front() {
            for (&s, ms) in gens.iter().zip(mats) {
                let h = group.mul(g, s);
                if action[h].is_none() {
                    action[h] = Some(action[g].as_ref().expect("visited").mul(ms)?);
                    queue.push_back(h);
                }
            }
        }
        let action: Option<Vec<Matrix>> = action.into_iter().collect();
        let action = action.ok_or_else(|| GroupError::InvalidModule("generators do not generate".into()))?;
        Self::new(group, field, dim, action)
    }

    /// The trivial module of dimension `dim`.
    pub fn trivial(group: FiniteGroup, field: PrimeField, dim: usize) -> Self {
        let action = vec![Matrix::identity(field, dim); group.order()];
        Self {
            group,
            field,
            dim,
            action,
        }
    }

    /// Checks `ρ(e) = 1` and `ρ(gh) = ρ(g)ρ(h)`.
    pub fn validate(&self) -> Result<(), GroupError> {
        if self.action[0] != Matrix::identity(self.field, self.dim) {
            return Err(GroupError::InvalidModule("identity acts non-trivially".into()));
        }
        let n = self.group.order();
        for g in 0..n {
            for h in 0..n {
                if self.action[g].mul(&self.action[h])? != self.action[self.group.mul(g, h)] {
                    return Err(GroupError::InvalidModule(format!("ρ({g})ρ({h}) ≠ ρ({g}·{h})")));
                }
            }
        }
        Ok(())
    }

    /// The acting group.
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Coefficient field.
    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Dimension over 𝔽_p.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix of `g`.
    pub fn matrix(&self, g: usize) -> &Matrix {
        &self.action[g]
    }

    /// `g·v`.
    pub fn act(&self, g: usize, v: &[u64]) -> Vec<u64> {
        self.action[g].mul_vec(v).expect("vector of module dimension")
    }

    /// The fixed subspace `M^H` for the elements `elems`.
    pub fn fixed_space(&self, elems: &[usize]) -> Subspace {
        let f = self.field;
        let d = self.dim;
        let mut rows = Vec::new();
        for &g in elems {
            let a = &self.action[g];
            for i in 0..d {
                let mut r = a.row(i).to_vec();
                r[i] = f.sub(r[i], 1);
                if r.iter().any(|&x| x != 0) {
                    rows.push(r);
                }
            }
        }
        if rows.is_empty() {
            return Subspace::full(f, d);
        }
        Matrix::from_rows(f, d, &rows).expect("rows").kernel()
    }

    /// `M^G`.
    pub fn invariants(&self) -> Subspace {
        self.fixed_space(&self.group.generators())
    }

    /// Restriction to a subgroup (local indexing of [`Subgroup::to_group`]).
    pub fn restrict(&self, sub: &Subgroup) -> GModule {
        let group = sub.to_group(&self.group);
        let action = sub.elements().iter().map(|&g| self.action[g].clone()).collect();
        GModule {
            group,
            field: self.field,
            dim: self.dim,
            action,
        }
    }

    /// Checks that `sub` is stable under every element.
    pub fn is_submodule(&self, sub: &Subspace) -> bool {
        self.group
            .generators()
            .iter()
            .all(|&g| sub.basis().iter().all(|v| sub.contains(&self.act(g, v))))
    }

    /// The submodule on the basis of `sub`, with its embedding matrix
    /// (columns = basis of `sub`).
    pub fn submodule(&self, sub: &Subspace) -> Result<(GModule, Matrix), GroupError> {
        if !self.is_submodule(sub) {
            return Err(GroupError::InvalidModule("subspace is not stable".into()));
        }
        let emb = Matrix::from_cols(self.field, self.dim, sub.basis())?;
        let k = sub.dim();
        let mut action = Vec::with_capacity(self.group.order());
        for g in 0..self.group.order() {
            let cols: Vec<Vec<u64>> = sub.basis().iter().map(|v| coords_in(sub, &self.act(g, v))).collect();
            action.push(Matrix::from_cols(self.field, k, &cols)?);
        }
        Ok((GModule::new_unchecked(self.group.clone(), self.field, k, action)?, emb))
    }

    /// The module `M^N` with the induced action of `G/N` (section
    /// representatives act), plus its embedding into `M`.
    pub fn invariant_module(&self, n: &Subgroup, q: &QuotientGroup) -> Result<(GModule, Matrix), GroupError> {
        let inv = self.fixed_space(n.elements());
        let emb = Matrix::from_cols(self.field, self.dim, inv.basis())?;
        let k = inv.dim();
        let mut action = Vec::with_capacity(q.order());
        for c in 0..q.order() {
            let g = q.section(c);
            let cols: Vec<Vec<u64>> = inv.basis().iter().map(|v| coords_in(&inv, &self.act(g, v))).collect();
            action.push(Matrix::from_cols(self.field, k, &cols)?);
        }
        Ok((GModule::new_unchecked(q.group().clone(), self.field, k, action)?, emb))
    }

    /// The quotient module `M / sub`, with representatives of a basis.
    /// Returns the module, the projection matrix `M → M/sub` and lifts.
    pub fn quotient_module(&self, sub: &Subspace) -> Result<(GModule, Matrix, Vec<Vec<u64>>), GroupError> {
        if !self.is_submodule(sub) {
            return Err(GroupError::InvalidModule("subspace is not stable".into()));
        }
        let f = self.field;
        // complement: standard basis vectors at non-pivot positions of sub
        let pivots: Vec<usize> = sub.basis().iter().map(|v| v.iter().position(|&x| x != 0).expect("nonzero")).collect();
        let free: Vec<usize> = (0..self.dim).filter(|i| !pivots.contains(i)).collect();
        let k = free.len();
        let project = |v: &[u64]| -> Vec<u64> {
            let r = sub.reduce(v);
            free.iter().map(|&i| r[i]).collect()
        };
        let mut proj = Matrix::zeros(f, k, self.dim);
        for j in 0..self.dim {
            let mut e = vec![0u64; self.dim];
            e[j] = 1;
            for (i, x) in project(&e).into_iter().enumerate() {
                proj.set(i, j, x);
            }
        }
        let lifts: Vec<Vec<u64>> = free
            .iter()
            .map(|&i| {
                let mut e = vec![0u64; self.dim];
                e[i] = 1;
                e
            })
            .collect();
        let mut action = Vec::with_capacity(self.group.order());
        for g in 0..self.group.order() {
            let cols: Vec<Vec<u64>> = lifts.iter().map(|v| project(&self.act(g, v))).collect();
            action.push(Matrix::from_cols(f, k, &cols)?);
        }
        Ok((GModule::new_unchecked(self.group.clone(), f, k, action)?, proj, lifts))
    }
}

/// Coordinates of `v ∈ sub` in the canonical basis of `sub`.
pub fn coords_in(sub: &Subspace, v: &[u64]) -> Vec<u64> {
    // canonical RREF basis: coordinate i is the entry at the i-th pivot
    sub.basis()
        .iter()
        .map(|b| {
            let p = b.iter().position(|&x| x != 0).expect("nonzero basis vector");
            v[p]
        })
        .collect()
}
