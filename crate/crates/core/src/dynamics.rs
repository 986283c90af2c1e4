//! Finite groups, their actions on points, the central partition and the
//! induced action on blocks.
//!
//! The covariance unitaries are `(U_g ξ)(x) = V_g(x)·ξ(σ_{g⁻¹}(x))`, so the
//! induced automorphism acts on central functions by `α_g(z)(x) = z(σ_{g⁻¹}x)`.
//! The block action is therefore `β_g(m) = block of σ_{g⁻¹}(x)` for `x ∈ m`,
//! which is a right action: `β_{gh} = β_h ∘ β_g`. Orbits and fixed sets agree
//! with those of the block action of `σ` itself.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{CMatrix, Tolerances};
use crate::{Error, Result, ValidationError};

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a Cayley table `table[g][h] = g·h` exhaustively.
    pub fn from_cayley(table: &[Vec<usize>]) -> Result<Self, ValidationError> {
        let n = table.len();
        if n == 0 {
            return Err(ValidationError::Shape("group must have at least one element".into()));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(ValidationError::Shape(format!(
                    "cayley row {g} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some((h, &value)) = row.iter().enumerate().find(|(_, v)| **v >= n) {
                return Err(ValidationError::CayleyRange {
                    g,
                    h,
                    value,
                    order: n,
                });
            }
        }
        let cayley: Vec<usize> = table.iter().flatten().copied().collect();
        let mul = |g: usize, h: usize| cayley[g * n + h];

        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mul(e, g) == g && mul(g, e) == g))
            .ok_or(ValidationError::NoIdentity)?;
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    if mul(mul(g, h), k) != mul(g, mul(h, k)) {
                        return Err(ValidationError::Associativity { g, h, k });
                    }
                }
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| mul(g, h) == identity && mul(h, g) == identity)
                .ok_or(ValidationError::NoInverse { g })?;
            inverse.push(inv);
        }
        Ok(Self {
            order: n,
            cayley,
            identity,
            inverse,
        })
    }

    /// `Z/n` with element `k` standing for `g^k`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order zero");
        Self {
            order: n,
            cayley: (0..n * n).map(|i| (i / n + i % n) % n).collect(),
            identity: 0,
            inverse: (0..n).map(|g| (n - g) % n).collect(),
        }
    }

    /// Group generated by permutations of `letters` points.
    ///
    /// Element 0 is the identity, the rest are numbered in breadth-first order
    /// of words in the generators. Returns the group together with the
    /// permutation realizing each element, composed so that
    /// `perm[g·h] = perm[g] ∘ perm[h]`.
    pub fn from_permutations(
        letters: usize,
        generators: &[Vec<usize>],
    ) -> Result<(Self, Vec<Vec<usize>>), ValidationError> {
        for (i, p) in generators.iter().enumerate() {
            let mut seen = vec![false; letters];
            let ok = p.len() == letters
                && p.iter().all(|&y| y < letters && !core::mem::replace(&mut seen[y], true));
            if !ok {
                return Err(ValidationError::Shape(format!(
                    "generator {i} is not a permutation of {letters} letters"
                )));
            }
        }
        let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { q.iter().map(|&y| p[y]).collect() };

        let identity: Vec<usize> = (0..letters).collect();
        let mut elements = vec![identity.clone()];
        let mut index = BTreeMap::new();
        index.insert(identity, 0usize);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for gen in generators {
                let next = compose(gen, &elements[i]);
                if !index.contains_key(&next) {
                    index.insert(next.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|p| elements.iter().map(|q| index[&compose(p, q)]).collect())
            .collect();
        Ok((Self::from_cayley(&table)?, elements))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g * self.order + h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn elements(&self) -> core::ops::Range<usize> {
        0..self.order
    }

    pub fn cayley_table(&self) -> Vec<Vec<usize>> {
        self.cayley.chunks(self.order).map(|r| r.to_vec()).collect()
    }
}

/// Unvalidated system description.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSystem {
    /// `cayley[g][h] = g·h`.
    pub cayley: Vec<Vec<usize>>,
    pub points: usize,
    /// `sigma[g][x] = σ_g(x)`.
    pub sigma: Vec<Vec<usize>>,
    pub fiber_dim: usize,
    /// `cocycle[g][x] = V_g(x)`; `None` means `V ≡ I`.
    pub cocycle: Option<Vec<Vec<CMatrix>>>,
    /// Blocks of points; `None` means singletons.
    pub z_partition: Option<Vec<Vec<usize>>>,
    pub tolerances: Tolerances,
}

/// A validated finite C*-dynamical system with its derived block structure.
#[derive(Debug, Clone)]
pub struct DynSystem {
    raw: RawSystem,
    group: FiniteGroup,
    sigma: Vec<usize>,
    cocycle: Vec<CMatrix>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    beta: Vec<usize>,
}

/// Checks every structural invariant and derives blocks and `β`.
pub fn validate(raw: RawSystem) -> Result<DynSystem, ValidationError> {
    raw.tolerances.check()?;
    let group = FiniteGroup::from_cayley(&raw.cayley)?;
    let (n_g, n_x, n) = (group.order(), raw.points, raw.fiber_dim);
    if n == 0 {
        return Err(ValidationError::Shape("fiber_dim must be at least 1".into()));
    }
    if n_x == 0 {
        return Err(ValidationError::Shape("at least one point is required".into()));
    }

    if raw.sigma.len() != n_g {
        return Err(ValidationError::Shape(format!(
            "action table has {} rows for a group of order {n_g}",
            raw.sigma.len()
        )));
    }
    for (g, row) in raw.sigma.iter().enumerate() {
        let mut seen = vec![false; n_x];
        if row.len() != n_x || !row.iter().all(|&y| y < n_x && !core::mem::replace(&mut seen[y], true)) {
            return Err(ValidationError::NotPermutation { g });
        }
    }
    let sig = |g: usize, x: usize| raw.sigma[g][x];
    let e = group.identity();
    if let Some(x) = (0..n_x).find(|&x| sig(e, x) != x) {
        return Err(ValidationError::ActionIdentity { x });
    }
    for g in group.elements() {
        for h in group.elements() {
            for x in 0..n_x {
                if sig(group.mul(g, h), x) != sig(g, sig(h, x)) {
                    return Err(ValidationError::ActionComposition { g, h, x });
                }
            }
        }
    }

    let slack = raw.tolerances.norm_tol;
    let cocycle: Vec<CMatrix> = match &raw.cocycle {
        None => vec![CMatrix::identity(n); n_g * n_x],
        Some(table) => {
            if table.len() != n_g || table.iter().any(|r| r.len() != n_x) {
                return Err(ValidationError::Shape(format!(
                    "cocycle table must be {n_g} x {n_x}"
                )));
            }
            table.iter().flatten().cloned().collect()
        }
    };
    let v = |g: usize, x: usize| &cocycle[g * n_x + x];
    let ident = CMatrix::identity(n);
    for g in group.elements() {
        for x in 0..n_x {
            let m = v(g, x);
            if m.shape() != (n, n) || (&m.adjoint() * m).max_abs_diff(&ident) > slack {
                return Err(ValidationError::NotUnitary { g, x });
            }
        }
    }
    if let Some(x) = (0..n_x).find(|&x| v(e, x).max_abs_diff(&ident) > slack) {
        return Err(ValidationError::CocycleIdentity { x });
    }
    for g in group.elements() {
        for h in group.elements() {
            for x in 0..n_x {
                let rhs = v(g, x) * v(h, sig(group.inv(g), x));
                if v(group.mul(g, h), x).max_abs_diff(&rhs) > slack {
                    return Err(ValidationError::Cocycle { g, h, x });
                }
            }
        }
    }

    let mut blocks: Vec<Vec<usize>> = match &raw.z_partition {
        None => (0..n_x).map(|x| vec![x]).collect(),
        Some(p) => p.iter().map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        }).collect(),
    };
    let mut block_of = vec![usize::MAX; n_x];
    for b in &blocks {
        for &x in b {
            if x >= n_x {
                return Err(ValidationError::Shape(format!("partition mentions point {x} of {n_x}")));
            }
            if block_of[x] != usize::MAX {
                return Err(ValidationError::PartitionCover { x });
            }
            block_of[x] = 0;
        }
    }
    if let Some(x) = block_of.iter().position(|&b| b == usize::MAX) {
        return Err(ValidationError::PartitionCover { x });
    }
    if blocks.iter().any(|b| b.is_empty()) {
        return Err(ValidationError::Shape("partition contains an empty block".into()));
    }
    blocks.sort_unstable_by_key(|b| b[0]);
    for (m, b) in blocks.iter().enumerate() {
        for &x in b {
            block_of[x] = m;
        }
    }

    let n_m = blocks.len();
    let mut beta = vec![0; n_g * n_m];
    for g in group.elements() {
        for (m, b) in blocks.iter().enumerate() {
            let mut image: Vec<usize> = b.iter().map(|&x| sig(g, x)).collect();
            image.sort_unstable();
            if blocks[block_of[image[0]]] != image {
                return Err(ValidationError::PartitionNotInvariant { g, block: m });
            }
            beta[g * n_m + m] = block_of[sig(group.inv(g), b[0])];
        }
    }

    Ok(DynSystem {
        sigma: raw.sigma.iter().flatten().copied().collect(),
        raw,
        group,
        cocycle,
        blocks,
        block_of,
        beta,
    })
}

impl DynSystem {
    pub fn raw(&self) -> &RawSystem {
        &self.raw
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn tol(&self) -> &Tolerances {
        &self.raw.tolerances
    }

    pub fn points(&self) -> usize {
        self.raw.points
    }

    pub fn fiber_dim(&self) -> usize {
        self.raw.fiber_dim
    }

    /// Dimension `|X|·N` of the coordinate space.
    pub fn space_dim(&self) -> usize {
        self.raw.points * self.raw.fiber_dim
    }

    /// Dimension `|X|·N²` of the coefficient algebra.
    pub fn coeff_dim(&self) -> usize {
        self.raw.points * self.raw.fiber_dim * self.raw.fiber_dim
    }

    pub fn sigma(&self, g: usize, x: usize) -> usize {
        self.sigma[g * self.raw.points + x]
    }

    pub fn cocycle(&self, g: usize, x: usize) -> &CMatrix {
        &self.cocycle[g * self.raw.points + x]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    /// Induced block action `β_g(m)`.
    pub fn beta(&self, g: usize, m: usize) -> usize {
        self.beta[g * self.blocks.len() + m]
    }

    /// Every fiber is one-dimensional and every block a single point.
    pub fn is_commutative(&self) -> bool {
        self.raw.fiber_dim == 1 && self.blocks.len() == self.raw.points
    }
}

/// Partition of the blocks into `β`-orbits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitList {
    /// Sorted orbits, ordered by their smallest block.
    pub orbits: Vec<Vec<usize>>,
}

impl OrbitList {
    pub fn base_block(&self, orbit: usize) -> usize {
        self.orbits[orbit][0]
    }

    pub fn orbit_of(&self, m: usize) -> usize {
        self.orbits
            .iter()
            .position(|o| o.binary_search(&m).is_ok())
            .expect("orbits cover all blocks")
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

pub fn orbits(system: &DynSystem) -> OrbitList {
    let n_m = system.blocks().len();
    let mut seen = vec![false; n_m];
    let mut orbits = Vec::new();
    for start in 0..n_m {
        if seen[start] {
            continue;
        }
        let orbit: BTreeSet<usize> = system
            .group()
            .elements()
            .map(|g| system.beta(g, start))
            .collect();
        for &m in &orbit {
            seen[m] = true;
        }
        orbits.push(orbit.into_iter().collect());
    }
    OrbitList { orbits }
}

/// Blocks `m` with `β_g(m) = m`.
pub fn fixed_blocks(system: &DynSystem, g: usize) -> Vec<usize> {
    (0..system.blocks().len())
        .filter(|&m| system.beta(g, m) == m)
        .collect()
}

/// Topological freeness of the block action. Every subset of the finite
/// block space is open, so the condition reduces to: no `g ≠ e` fixes a block.
pub fn check_a3(system: &DynSystem) -> bool {
    let e = system.group().identity();
    system
        .group()
        .elements()
        .filter(|&g| g != e)
        .all(|g| fixed_blocks(system, g).is_empty())
}

/// Output of [`fixed_point_partition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedPointPartition {
    pub delta: Vec<usize>,
    /// Elements fixing every block of `delta`.
    pub d_tilde: Vec<usize>,
    /// Elements moving `delta` off itself.
    pub d_zero: Vec<usize>,
    /// Whether inverses had to be added to the input element set.
    pub symmetrized: bool,
}

/// Shrinks `v` to a nonempty `Δ` on which every element of `g0` (closed under
/// inverses) either fixes `Δ` pointwise or maps it off itself.
///
/// Elements are scanned in ascending order. When the current element does
/// neither, `Δ` is regrown from its smallest moved block, greedily adding (in
/// ascending order) moved blocks that keep `β_g(Δ) ∩ Δ = ∅`.
pub fn fixed_point_partition(
    system: &DynSystem,
    g0: &[usize],
    v: &[usize],
) -> Result<FixedPointPartition> {
    let n_m = system.blocks().len();
    if v.is_empty() {
        return Err(Error::Precondition("fixed-point partition needs a nonempty block set".into()));
    }
    if let Some(&m) = v.iter().find(|&&m| m >= n_m) {
        return Err(Error::Precondition(format!("block {m} out of range")));
    }
    if let Some(&g) = g0.iter().find(|&&g| g >= system.group().order()) {
        return Err(Error::Precondition(format!("group element {g} out of range")));
    }
    let given: BTreeSet<usize> = g0.iter().copied().collect();
    let elements: BTreeSet<usize> = given
        .iter()
        .flat_map(|&g| [g, system.group().inv(g)])
        .collect();
    let symmetrized = elements.len() != given.len();

    let mut delta: BTreeSet<usize> = v.iter().copied().collect();
    let mut d_tilde = Vec::new();
    let mut d_zero = Vec::new();
    for &g in &elements {
        let b = |m: usize| system.beta(g, m);
        if delta.iter().all(|&m| b(m) == m) {
            d_tilde.push(g);
            continue;
        }
        if delta.iter().all(|&m| !delta.contains(&b(m))) {
            d_zero.push(g);
            continue;
        }
        let m0 = *delta.iter().find(|&&m| b(m) != m).expect("some block moves");
        let mut next = BTreeSet::from([m0]);
        for &m in &delta {
            if m == m0 || b(m) == m {
                continue;
            }
            let clashes = next.contains(&b(m)) || next.iter().any(|&d| b(d) == m);
            if !clashes {
                next.insert(m);
            }
        }
        delta = next;
        d_zero.push(g);
    }
    Ok(FixedPointPartition {
        delta: delta.into_iter().collect(),
        d_tilde,
        d_zero,
        symmetrized,
    })
}
