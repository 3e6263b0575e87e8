//! Finite groups given by multiplication tables, subgroups and quotients,
//! finite 𝔽_p[G]-modules and their low-degree inhomogeneous cohomology.

mod cochain;
mod module;
#[cfg(test)]
mod laws;

pub use cochain::*;
pub use module::*;

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use thiserror::Error;

use crate::linalg::LinalgError;

/// Errors raised by the group layer.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    /// The table does not define a group.
    #[error("invalid group table: {0}")]
    InvalidTable(String),
    /// The element set is not a subgroup.
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    /// A normal subgroup was required.
    #[error("subgroup is not normal")]
    NotNormal,
    /// Action matrices do not define a representation.
    #[error("invalid module: {0}")]
    InvalidModule(String),
    /// A cochain has the wrong shape for its module.
    #[error("cochain shape mismatch: {0}")]
    Shape(String),
    /// The input was not a cocycle.
    #[error("not a cocycle: {0}")]
    NotCocycle(String),
    /// The cohomology class was required to be invariant under G/N.
    #[error("class is not invariant under the quotient action")]
    NotInvariant,
    /// The restriction of the 2-cocycle to N is not ∂f for the given f.
    #[error("the restriction to the subgroup is not the coboundary of the given cochain")]
    RestrictionMismatch,
    /// Linear algebra failure.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite group as a full multiplication table; element `0` is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a multiplication table (`table[a][b] = a·b`).
    pub fn new(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::InvalidTable(format!("row {a} has length {}", row.len())));
            }
            if row.iter().any(|&x| x >= n) {
                return Err(GroupError::InvalidTable(format!("row {a} has an entry out of range")));
            }
        }
        for a in 0..n {
            if table[0][a] != a || table[a][0] != a {
                return Err(GroupError::InvalidTable(format!("element 0 is not an identity for {a}")));
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == 0) {
                Some(b) if table[b][a] == 0 => inverse[a] = b,
                _ => return Err(GroupError::InvalidTable(format!("element {a} has no two-sided inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(GroupError::InvalidTable(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            table,
            inverse,
        })
    }

    /// Closure of `gens` under `mul` starting from `identity`; returns the
    /// elements (identity first, breadth-first order) and the table.
    pub fn from_closure<T, K, F, Key>(
        name: impl Into<String>,
        identity: T,
        gens: &[T],
        mul: F,
        key: Key,
        limit: usize,
    ) -> Result<(Self, Vec<T>), GroupError>
    where
        T: Clone,
        K: Eq + Hash,
        F: Fn(&T, &T) -> T,
        Key: Fn(&T) -> K,
    {
        let mut elems = vec![identity.clone()];
        let mut index: HashMap<K, usize> = HashMap::new();
        index.insert(key(&identity), 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let x = mul(&elems[i], g);
                let kx = key(&x);
                if !index.contains_key(&kx) {
                    if elems.len() >= limit {
                        return Err(GroupError::InvalidTable(format!("closure exceeds {limit} elements")));
                    }
                    index.insert(kx, elems.len());
                    elems.push(x);
                    queue.push_back(elems.len() - 1);
                }
            }
        }
        let n = elems.len();
        let mut table = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                let x = mul(&elems[a], &elems[b]);
                table[a][b] = *index
                    .get(&key(&x))
                    .ok_or_else(|| GroupError::InvalidTable("closure is not closed".into()))?;
            }
        }
        Ok((Self::new(name, table)?, elems))
    }

    /// The cyclic group ℤ/n with element `k` standing for `k mod n`.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(format!("Z/{n}"), table).expect("cyclic table is a group")
    }

    /// Direct product; element `(a, b)` has index `a·|H| + b`.
    pub fn product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order(), h.order());
        let table = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| g.mul(x / m, y / m) * m + h.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        Self::new(format!("{}x{}", g.name, h.name), table).expect("product of groups is a group")
    }

    /// The group generated by permutations of `0..deg` (composition
    /// `(στ)(i) = σ(τ(i))`).
    pub fn from_permutations(name: impl Into<String>, deg: usize, gens: &[Vec<usize>]) -> Result<Self, GroupError> {
        let id: Vec<usize> = (0..deg).collect();
        let (g, _) = Self::from_closure(
            name,
            id,
            gens,
            |a: &Vec<usize>, b: &Vec<usize>| (0..deg).map(|i| a[b[i]]).collect(),
            |a| a.clone(),
            100_000,
        )?;
        Ok(g)
    }

    /// The symmetric group S₃.
    pub fn symmetric3() -> Self {
        Self::from_permutations("S3", 3, &[vec![1, 2, 0], vec![1, 0, 2]]).expect("S3")
    }

    /// The dihedral group of order `2n`, as symmetries of an `n`-gon.
    pub fn dihedral(n: usize) -> Self {
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        let mut g = Self::from_permutations(format!("D{n}"), n, &[rot, refl]).expect("dihedral group");
        g.name = format!("D{n}");
        g
    }

    /// Name used in reports.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Group order.
    pub fn order(&self) -> usize {
        self.table.len()
    }

    /// Product `a·b`.
    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    /// Inverse.
    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    /// Conjugate `g⁻¹·x·g`.
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    /// The multiplication table.
    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    /// Order of an element.
    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// A small generating set chosen greedily in index order.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = vec![false; self.order()];
        span[0] = true;
        for g in 0..self.order() {
            if !span[g] {
                gens.push(g);
                let sub = Subgroup::generated_by(self, &gens);
                for &x in sub.elements() {
                    span[x] = true;
                }
            }
        }
        gens
    }

    /// True when the group is abelian.
    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul(a, b) == self.mul(b, a)))
    }
}

/// A subgroup, stored as a sorted element set of its parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    parent_order: usize,
    elements: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl Subgroup {
    /// Validates that `elements` form a subgroup of `parent`.
    pub fn new(parent: &FiniteGroup, elements: &[usize]) -> Result<Self, GroupError> {
        let mut el: Vec<usize> = elements.to_vec();
        el.sort_unstable();
        el.dedup();
        if el.first() != Some(&0) {
            return Err(GroupError::NotSubgroup("identity missing".into()));
        }
        if el.iter().any(|&x| x >= parent.order()) {
            return Err(GroupError::NotSubgroup("element out of range".into()));
        }
        let mut position = vec![None; parent.order()];
        for (i, &x) in el.iter().enumerate() {
            position[x] = Some(i);
        }
        for &a in &el {
            if position[parent.inv(a)].is_none() {
                return Err(GroupError::NotSubgroup(format!("inverse of {a} missing")));
            }
            for &b in &el {
                if position[parent.mul(a, b)].is_none() {
                    return Err(GroupError::NotSubgroup(format!("product of {a} and {b} missing")));
                }
            }
        }
        Ok(Self {
            parent_order: parent.order(),
            elements: el,
            position,
        })
    }

    /// The subgroup generated by `gens`.
    pub fn generated_by(parent: &FiniteGroup, gens: &[usize]) -> Self {
        let mut seen = vec![false; parent.order()];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut el = vec![0usize];
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = parent.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    el.push(y);
                    queue.push_back(y);
                }
            }
        }
        Self::new(parent, &el).expect("generated set is a subgroup")
    }

    /// The trivial subgroup.
    pub fn trivial(parent: &FiniteGroup) -> Self {
        Self::new(parent, &[0]).expect("trivial subgroup")
    }

    /// The whole group.
    pub fn whole(parent: &FiniteGroup) -> Self {
        Self::new(parent, &(0..parent.order()).collect::<Vec<_>>()).expect("whole group")
    }

    /// Sorted elements (identity first).
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Order of the subgroup.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Order of the parent group.
    pub fn parent_order(&self) -> usize {
        self.parent_order
    }

    /// Membership.
    pub fn contains(&self, g: usize) -> bool {
        self.position.get(g).copied().flatten().is_some()
    }

    /// Position of a parent element inside [`Subgroup::elements`].
    pub fn position(&self, g: usize) -> Option<usize> {
        self.position.get(g).copied().flatten()
    }

    /// Normality test.
    pub fn is_normal(&self, parent: &FiniteGroup) -> bool {
        (0..parent.order()).all(|g| self.elements.iter().all(|&n| self.contains(parent.conj(g, n))))
    }

    /// The subgroup as an abstract group; local index `i` corresponds to
    /// `elements()[i]`.
    pub fn to_group(&self, parent: &FiniteGroup) -> FiniteGroup {
        let table = self
            .elements
            .iter()
            .map(|&a| {
                self.elements
                    .iter()
                    .map(|&b| self.position(parent.mul(a, b)).expect("closed"))
                    .collect()
            })
            .collect();
        FiniteGroup::new(format!("sub({})", parent.name()), table).expect("subgroup table")
    }
}

/// The quotient `G/N` with its coset section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientGroup {
    group: FiniteGroup,
    coset_of: Vec<usize>,
    section: Vec<usize>,
}

impl QuotientGroup {
    /// Builds `G/N`; cosets are numbered by their least element, and the
    /// section picks that least element (so the identity coset maps to the
    /// identity).
    pub fn new(parent: &FiniteGroup, n: &Subgroup) -> Result<Self, GroupError> {
        if !n.is_normal(parent) {
            return Err(GroupError::NotNormal);
        }
        let order = parent.order();
        let mut coset_of = vec![usize::MAX; order];
        let mut section = Vec::new();
        for g in 0..order {
            if coset_of[g] == usize::MAX {
                let c = section.len();
                section.push(g);
                for &s in n.elements() {
                    coset_of[parent.mul(g, s)] = c;
                }
            }
        }
        let q = section.len();
        let table = (0..q)
            .map(|a| (0..q).map(|b| coset_of[parent.mul(section[a], section[b])]).collect())
            .collect();
        let group = FiniteGroup::new(format!("{}/N", parent.name()), table)?;
        Ok(Self {
            group,
            coset_of,
            section,
        })
    }

    /// The quotient as an abstract group.
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// Projection `G → G/N`.
    pub fn project(&self, g: usize) -> usize {
        self.coset_of[g]
    }

    /// Section `G/N → G`.
    pub fn section(&self, q: usize) -> usize {
        self.section[q]
    }

    /// Order of the quotient.
    pub fn order(&self) -> usize {
        self.section.len()
    }
}
