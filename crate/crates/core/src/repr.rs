//! Wedderburn structure of matrix *-algebras and verdicts for families of
//! representations.
//!
//! Irreducible representations of a finite-dimensional *-algebra correspond
//! to its minimal central projections `e_i`: the representation attached to
//! `e_i` has norm `b ↦ ‖e_i·b‖` and kernel `(1 − e_i)·span`. Nothing is
//! diagonalized further than that.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{
    a_matrix, convolve, coordinate_basis_element, cp_dim, involute, phi, regular_rep, unitary,
    AElement, CPElement,
};
use crate::dynamics::DynSystem;
use crate::linalg::{
    hermitian_eig, in_span, is_invertible, nullspace, operator_norm, span_basis, CMatrix,
    SpanBasis, Tolerances, C64, ONE, ZERO,
};
use crate::random;
use crate::trajectories::{orbit_reps, pi_omega, OrbitRep};
use crate::{Error, Result};

/// Seed of the generic central element drawn by [`wedderburn`].
pub const WEDDERBURN_SEED: u64 = 0x5745_4444;
/// Central-element draws before [`wedderburn`] gives up.
pub const WEDDERBURN_ATTEMPTS: usize = 5;
/// Eigenvalues closer than this fraction of the spectral radius are one cluster.
const CLUSTER_GAP: f64 = 1e-7;

/// A span of square matrices closed under products and adjoints and
/// containing the identity.
#[derive(Debug, Clone)]
pub struct StarSpan {
    span: SpanBasis,
    generators: Vec<CMatrix>,
}

impl StarSpan {
    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    pub fn size(&self) -> usize {
        self.span.shape().0
    }

    pub fn basis(&self) -> &[CMatrix] {
        self.span.basis()
    }

    /// Generators together with those adjoints not already among them.
    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn contains(&self, t: &CMatrix, tol: &Tolerances) -> Result<bool> {
        Ok(in_span(t, &self.span, tol)?.0)
    }
}

/// Smallest unital *-closed span containing `generators`, grown by right
/// multiplication with the generators and their adjoints until no product
/// adds a new direction. Closure is then re-verified on every basis element.
pub fn star_closure(generators: &[CMatrix], tol: &Tolerances) -> Result<StarSpan> {
    let Some(first) = generators.first() else {
        return Err(Error::Precondition("star closure needs at least one generator".into()));
    };
    let n = first.rows();
    if let Some(g) = generators.iter().find(|g| g.shape() != (n, n)) {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            found: g.shape(),
        });
    }
    let mut gens: Vec<CMatrix> = Vec::with_capacity(2 * generators.len());
    for g in generators {
        gens.push(g.clone());
    }
    for g in generators {
        let adj = g.adjoint();
        if !gens.iter().any(|h| h.max_abs_diff(&adj) == 0.0) {
            gens.push(adj);
        }
    }

    let mut span = SpanBasis::empty(n, n);
    span.extend(&CMatrix::identity(n), tol)?;
    let mut words = vec![CMatrix::identity(n)];
    for g in &gens {
        if span.extend(g, tol)? {
            words.push(g.clone());
        }
    }
    let mut next = 0;
    while next < words.len() {
        let w = words[next].clone();
        for g in &gens {
            let p = &w * g;
            if span.extend(&p, tol)? {
                words.push(p);
            }
        }
        next += 1;
    }

    for b in span.basis() {
        let closed = in_span(&b.adjoint(), &span, tol)?.0
            && gens
                .iter()
                .all(|g| in_span(&(b * g), &span, tol).is_ok_and(|r| r.0));
        if !closed {
            return Err(Error::Precondition(
                "span failed to close under products; generators are numerically unstable".into(),
            ));
        }
    }
    Ok(StarSpan {
        span,
        generators: gens,
    })
}

/// Minimal central projections of a [`StarSpan`].
#[derive(Debug, Clone)]
pub struct WedderburnData {
    pub projections: Vec<CMatrix>,
    /// Dimension `d_i` of the irreducible representation of block `i`.
    pub block_dims: Vec<usize>,
    /// `rank(e_i) / d_i`: how often that representation occurs in the span.
    pub multiplicities: Vec<usize>,
    pub center_dim: usize,
    /// Central-element draws used.
    pub attempts: usize,
}

impl WedderburnData {
    /// `‖e_i·b‖` for every block.
    pub fn block_norms(&self, b: &CMatrix) -> Vec<f64> {
        self.projections.iter().map(|e| operator_norm(&(e * b))).collect()
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }
}

fn vec_columns(mats: &[CMatrix]) -> CMatrix {
    let columns: Vec<Vec<C64>> = mats.iter().map(|m| m.data().to_vec()).collect();
    let len = columns.first().map_or(0, Vec::len);
    CMatrix::from_columns(&columns, len)
}

/// Center from the commutation equations with the generators, then spectral
/// projections of a seeded generic Hermitian central element.
pub fn wedderburn(span: &StarSpan, tol: &Tolerances) -> Result<WedderburnData> {
    let basis = span.basis();
    let r = basis.len();
    let n = span.size();

    let mut equations = CMatrix::zeros(span.generators().len() * n * n, r);
    for (gi, g) in span.generators().iter().enumerate() {
        for (k, b) in basis.iter().enumerate() {
            let comm = &(b * g) - &(g * b);
            for (i, v) in comm.data().iter().enumerate() {
                equations[(gi * n * n + i, k)] = *v;
            }
        }
    }
    let center_coords = nullspace(&equations, tol);
    let center: Vec<CMatrix> = center_coords
        .basis()
        .iter()
        .map(|c| {
            let mut z = CMatrix::zeros(n, n);
            for (k, b) in basis.iter().enumerate() {
                z = &z + &b.scale(c[(k, 0)]);
            }
            z
        })
        .collect();
    let k = center.len();

    for attempt in 0..WEDDERBURN_ATTEMPTS {
        let mut rng = random::rng(WEDDERBURN_SEED + attempt as u64);
        let mut z = CMatrix::zeros(n, n);
        for c in &center {
            z = &z + &c.scale(random::complex(&mut rng));
        }
        let eig = hermitian_eig(&z.hermitian_part(), tol)?;
        let radius = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (i, v) in eig.values.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) if v - eig.values[*c.last().expect("nonempty")] <= CLUSTER_GAP * radius => {
                    c.push(i)
                }
                _ => clusters.push(vec![i]),
            }
        }
        if clusters.len() != k {
            continue;
        }
        let mut projections = Vec::with_capacity(k);
        let mut block_dims = Vec::with_capacity(k);
        let mut multiplicities = Vec::with_capacity(k);
        for c in &clusters {
            let mut p = CMatrix::zeros(n, n);
            for &i in c {
                for a in 0..n {
                    for b in 0..n {
                        p[(a, b)] += eig.vectors[(a, i)] * eig.vectors[(b, i)].conj();
                    }
                }
            }
            let cut: Vec<CMatrix> = basis.iter().map(|b| &p * b).collect();
            let block_rank = span_basis(&cut, tol)?.rank();
            let d = libm::round(libm::sqrt(block_rank as f64)) as usize;
            if d * d != block_rank || d == 0 || c.len() % d != 0 {
                return Err(Error::Precondition(format!(
                    "central block of rank {block_rank} is not a full matrix algebra"
                )));
            }
            projections.push(p);
            block_dims.push(d);
            multiplicities.push(c.len() / d);
        }
        return Ok(WedderburnData {
            projections,
            block_dims,
            multiplicities,
            center_dim: k,
            attempts: attempt + 1,
        });
    }
    Err(Error::DegenerateCenter {
        attempts: WEDDERBURN_ATTEMPTS,
    })
}

/// Kernel of `f ↦ π_ω(f)` on the coordinate space, and its part inside the
/// coefficient algebra.
#[derive(Debug, Clone)]
pub struct PiKernel {
    /// Orthonormal kernel vectors as `cp_dim × 1` columns.
    pub basis: SpanBasis,
    /// Kernel of `a ↦ π_ω(δ_e·a)` as `|X|·N² × 1` columns.
    pub a_part: SpanBasis,
    /// Dimension of `{a : a vanishes on every block of ω}`.
    pub vanish_dim: usize,
}

pub fn kernel_of_pi_omega(system: &DynSystem, rep: &OrbitRep) -> Result<PiKernel> {
    let tol = system.tol();
    let full: Vec<CMatrix> = (0..cp_dim(system))
        .map(|k| pi_omega(system, rep, &coordinate_basis_element(system, k)))
        .collect();
    let a_dim = system.coeff_dim();
    // δ_e·E^x_{ij} are the coordinates of group element e.
    let e = system.group().identity();
    let a_part: Vec<CMatrix> = full[e * a_dim..(e + 1) * a_dim].to_vec();
    let orbit_points: usize = rep.orbit.iter().map(|&m| system.blocks()[m].len()).sum();
    let n = system.fiber_dim();
    Ok(PiKernel {
        basis: nullspace(&vec_columns(&full), tol),
        a_part: nullspace(&vec_columns(&a_part), tol),
        vanish_dim: (system.points() - orbit_points) * n * n,
    })
}

/// A linear map on the convolution algebra, stored by its values on the
/// coordinate basis.
#[derive(Debug, Clone)]
pub struct LinearRep {
    pub name: String,
    images: Vec<CMatrix>,
}

impl LinearRep {
    pub fn from_map(
        system: &DynSystem,
        name: impl Into<String>,
        mut map: impl FnMut(&CPElement) -> CMatrix,
    ) -> Self {
        Self {
            name: name.into(),
            images: (0..cp_dim(system))
                .map(|k| map(&coordinate_basis_element(system, k)))
                .collect(),
        }
    }

    pub fn apply(&self, f: &CPElement) -> CMatrix {
        let (r, c) = self.images[0].shape();
        let mut out = CMatrix::zeros(r, c);
        for (coord, img) in f.coordinates().into_iter().zip(&self.images) {
            if coord != ZERO {
                out = &out + &img.scale(coord);
            }
        }
        out
    }

    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    /// Columns are the vectorized basis images.
    pub fn coordinate_matrix(&self) -> CMatrix {
        vec_columns(&self.images)
    }
}

/// The local trajectories family `{π_ω}` as linear maps.
pub fn trajectory_family(system: &DynSystem) -> Vec<LinearRep> {
    orbit_reps(system)
        .into_iter()
        .map(|rep| {
            let name = format!("pi_{}", rep.index);
            LinearRep::from_map(system, name, |f| pi_omega(system, &rep, f))
        })
        .collect()
}

/// An algebra realized as the image of a representation, with its structure.
#[derive(Debug, Clone)]
pub struct TargetAlgebra {
    pub realization: LinearRep,
    pub span: StarSpan,
    pub wedderburn: WedderburnData,
}

impl TargetAlgebra {
    fn build(
        system: &DynSystem,
        realization: LinearRep,
        coefficient: impl Fn(&AElement) -> CMatrix,
        group: impl Fn(usize) -> CMatrix,
    ) -> Result<Self> {
        let n = system.fiber_dim();
        let mut generators = Vec::new();
        for x in 0..system.points() {
            for i in 0..n {
                for j in 0..n {
                    let mut blocks = vec![CMatrix::zeros(n, n); system.points()];
                    blocks[x][(i, j)] = ONE;
                    generators.push(coefficient(&AElement::from_blocks(system, blocks)?));
                }
            }
        }
        for g in system.group().elements() {
            generators.push(group(g));
        }
        let span = star_closure(&generators, system.tol())?;
        let wedderburn = wedderburn(&span, system.tol())?;
        Ok(Self {
            realization,
            span,
            wedderburn,
        })
    }

    /// The crossed product in its regular representation.
    pub fn crossed_product(system: &DynSystem) -> Result<Self> {
        let e = system.group().identity();
        let realization = LinearRep::from_map(system, "regular", |f| regular_rep(system, f));
        Self::build(
            system,
            realization,
            |a| regular_rep(system, &CPElement::delta(system, e, a.clone())),
            |g| regular_rep(system, &CPElement::delta(system, g, AElement::identity(system))),
        )
    }

    /// The concrete algebra generated by the coefficients and the unitaries.
    pub fn concrete(system: &DynSystem) -> Result<Self> {
        let realization = LinearRep::from_map(system, "phi", |f| phi(system, f));
        Self::build(system, realization, |a| a_matrix(system, a), |g| unitary(system, g))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormingWitness {
    BasisElement(usize),
    Sample(usize),
}

/// Verdicts for a family of representations of a target algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyVerdict {
    pub faithful: bool,
    pub strictly_norming: bool,
    pub exhaustive: bool,
    /// Exhaustive and no failure of the sampled invertibility transfer.
    pub sufficient: bool,
    /// Result of the sampled invertibility transfer alone, a heuristic.
    pub sufficient_sampled: bool,
    pub transfer_samples: usize,
    /// Nonzero element of the target annihilated by every member.
    pub faithful_witness: Option<CPElement>,
    /// Element whose norm no member attains, with `(max over members, target)`.
    pub norming_witness: Option<(NormingWitness, f64, f64)>,
    /// Central block whose kernel contains no member's kernel.
    pub exhaustive_witness: Option<usize>,
    /// Element invertible under every member but not in the target.
    pub sufficient_witness: Option<CPElement>,
}

/// Number of random elements in the strictly norming check.
pub const NORMING_SAMPLES: usize = 100;
/// Number of elements in the sampled invertibility transfer.
pub const TRANSFER_SAMPLES: usize = 500;
const HOMOMORPHISM_PAIRS: usize = 4;

fn check_homomorphism(system: &DynSystem, member: &LinearRep, seed: u64) -> Result<()> {
    let mut rng = random::rng(seed);
    for pair in 0..HOMOMORPHISM_PAIRS {
        let f = random::cp_element(&mut rng, system);
        let h = random::cp_element(&mut rng, system);
        let (mf, mh) = (member.apply(&f), member.apply(&h));
        let scale = operator_norm(&mf) * operator_norm(&mh) + operator_norm(&mf);
        let product = (&member.apply(&convolve(system, &f, &h)) - &(&mf * &mh)).frobenius_norm();
        let adjoint = (&member.apply(&involute(system, &f)) - &mf.adjoint()).frobenius_norm();
        if product > 1e-9 * scale || adjoint > 1e-9 * scale {
            return Err(Error::Precondition(format!(
                "{} is not a *-homomorphism: sampled pair {pair} (seed {seed}) misses by {:e}",
                member.name,
                product.max(adjoint)
            )));
        }
    }
    Ok(())
}

/// Element of the form `h * (δ_e·a)` with `a` singular on one point, so that
/// it is not invertible; mixes non-invertible cases into the transfer check.
fn singular_sample(system: &DynSystem, rng: &mut random::SeededRng) -> CPElement {
    let h = random::cp_element(rng, system);
    let mut blocks: Vec<CMatrix> = random::a_element(rng, system).blocks().to_vec();
    let x = rand::Rng::random_range(rng, 0..system.points());
    let n = system.fiber_dim();
    let mut lowered = blocks[x].clone();
    for i in 0..n {
        lowered[(n - 1, i)] = ZERO;
    }
    blocks[x] = lowered;
    let a = AElement::from_blocks(system, blocks).expect("fiber shapes preserved");
    convolve(system, &h, &CPElement::delta(system, system.group().identity(), a))
}

/// Classifies `family` as a family of representations of `target`.
///
/// Faithful and exhaustive are decided exactly through kernels. Strictly
/// norming is tested on the coordinate basis and seeded random elements.
/// Sufficiency combines the exhaustive criterion with a sampled transfer of
/// invertibility.
pub fn family_verdicts(
    system: &DynSystem,
    family: &[LinearRep],
    target: &TargetAlgebra,
    seed: u64,
) -> Result<FamilyVerdict> {
    let tol = system.tol();
    if family.is_empty() {
        return Err(Error::Precondition("family must have at least one member".into()));
    }
    for (i, member) in family.iter().enumerate() {
        check_homomorphism(system, member, seed.wrapping_add(i as u64))?;
    }
    let t_map = &target.realization;
    let t_scale = operator_norm(&t_map.coordinate_matrix()).max(f64::MIN_POSITIVE);

    let mut stacked_images = Vec::new();
    for k in 0..cp_dim(system) {
        let blocks: Vec<CMatrix> = family.iter().map(|m| m.images()[k].clone()).collect();
        stacked_images.push(CMatrix::column(
            blocks.iter().flat_map(|b| b.data().iter().copied()).collect(),
        ));
    }
    let joint_kernel = nullspace(&vec_columns(&stacked_images), tol);
    let faithful_witness = joint_kernel
        .basis()
        .iter()
        .map(|v| CPElement::from_coordinates(system, v.data()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .find(|f| operator_norm(&t_map.apply(f)) > tol.rank_tol * t_scale);

    let family_norm = |f: &CPElement| {
        family
            .iter()
            .map(|m| operator_norm(&m.apply(f)))
            .fold(0.0, f64::max)
    };
    let mut norming_witness = None;
    let mut rng = random::rng(seed);
    let samples: Vec<(NormingWitness, CPElement)> = (0..cp_dim(system))
        .map(|k| (NormingWitness::BasisElement(k), coordinate_basis_element(system, k)))
        .chain((0..NORMING_SAMPLES).map(|i| (NormingWitness::Sample(i), random::cp_element(&mut rng, system))))
        .collect();
    for (label, f) in samples {
        let t = operator_norm(&t_map.apply(&f));
        let m = family_norm(&f);
        if (t - m).abs() > tol.norm_tol * t.max(1.0) {
            norming_witness = Some((label, m, t));
            break;
        }
    }

    let member_kernels: Vec<Vec<CPElement>> = family
        .iter()
        .map(|m| {
            nullspace(&m.coordinate_matrix(), tol)
                .basis()
                .iter()
                .map(|v| CPElement::from_coordinates(system, v.data()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let kernel_images: Vec<Vec<CMatrix>> = member_kernels
        .iter()
        .map(|ks| ks.iter().map(|f| t_map.apply(f)).collect())
        .collect();
    let exhaustive_witness = target.wedderburn.projections.iter().position(|e| {
        !kernel_images.iter().any(|images| {
            images
                .iter()
                .all(|b| operator_norm(&(e * b)) <= tol.rank_tol * t_scale)
        })
    });

    let mut sufficient_witness = None;
    let mut rng = random::rng(seed ^ 0x5355_4646);
    for i in 0..TRANSFER_SAMPLES {
        let f = if i % 2 == 0 {
            random::cp_element(&mut rng, system)
        } else {
            singular_sample(system, &mut rng)
        };
        let mut all_invertible = true;
        for m in family {
            if !is_invertible(&m.apply(&f), tol)? {
                all_invertible = false;
                break;
            }
        }
        if all_invertible && !is_invertible(&t_map.apply(&f), tol)? {
            sufficient_witness = Some(f);
            break;
        }
    }

    let exhaustive = exhaustive_witness.is_none();
    let sufficient_sampled = sufficient_witness.is_none();
    Ok(FamilyVerdict {
        faithful: faithful_witness.is_none(),
        strictly_norming: norming_witness.is_none(),
        exhaustive,
        sufficient: exhaustive && sufficient_sampled,
        sufficient_sampled,
        transfer_samples: TRANSFER_SAMPLES,
        faithful_witness,
        norming_witness,
        exhaustive_witness,
        sufficient_witness,
    })
}

/// Kernel identity for an orbit `ω`: the ideals vanishing on `ω` and on its
/// closure coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct KarIdeals {
    pub holds: bool,
    pub note: String,
}

/// Every subset of the finite block space is closed, so the closure of an
/// orbit is the orbit itself and the identity always holds.
pub fn karideals_check(system: &DynSystem, rep: &OrbitRep) -> KarIdeals {
    // The smallest open neighbourhood of a block is the block itself.
    let closure: Vec<usize> = (0..system.blocks().len())
        .filter(|m| rep.orbit.contains(m))
        .collect();
    let holds = closure == rep.orbit;
    KarIdeals {
        holds,
        note: "finite block space: the orbit closure equals the orbit, so the intersection of \
               ideals over the orbit and over its closure coincide"
            .to_string(),
    }
}
