//! Local trajectory representations, the orbit-wise invertibility criterion,
//! the isomorphism decision for `Φ` and the localized norm conditions.
//!
//! For an orbit `ω` with base block `m_ω`, `π'_ω(a)` is the restriction of `a`
//! to the points of `m_ω`, and `π_ω` acts on `ℓ²(G) ⊗ C^{d_ω}` by
//! `[π_ω(f)ξ](t) = Σ_s π'_ω(α_{t⁻¹}(f(s)))·ξ(s⁻¹t)`.
//!
//! The central candidates in the localized checks are indicator functions of
//! nonempty subsets of the given block set. A failure therefore only means
//! that no indicator candidate works.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{
    a_matrix, b_star_b_decomp, convolve, coordinate_matrix, cp_dim, phi, AElement, CPElement,
    ZElement,
};
use crate::dynamics::{fixed_point_partition, orbits, DynSystem, FixedPointPartition};
use crate::linalg::{
    is_invertible, min_singular, nullspace, operator_norm, thin_svd, CMatrix, C64, ONE, ZERO,
};
use crate::{Error, Result};

/// Largest block set accepted by the indicator searches.
pub const MAX_INDICATOR_BLOCKS: usize = 16;

/// One orbit together with the data for its representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRep {
    pub index: usize,
    pub orbit: Vec<usize>,
    pub base_block: usize,
    pub base_points: Vec<usize>,
    /// `d_ω = |m_ω|·N`.
    pub dim: usize,
}

pub fn orbit_reps(system: &DynSystem) -> Vec<OrbitRep> {
    orbits(system)
        .orbits
        .into_iter()
        .enumerate()
        .map(|(index, orbit)| {
            let base_block = orbit[0];
            let base_points = system.blocks()[base_block].clone();
            OrbitRep {
                index,
                dim: base_points.len() * system.fiber_dim(),
                orbit,
                base_block,
                base_points,
            }
        })
        .collect()
}

/// `π'_ω(a)`: `a` restricted to the base block.
pub fn pi_prime(rep: &OrbitRep, a: &AElement) -> CMatrix {
    let blocks: Vec<CMatrix> = rep.base_points.iter().map(|&x| a.block(x).clone()).collect();
    CMatrix::block_diag(&blocks)
}

/// `π'_ω(α_g(a))` without forming `α_g(a)` away from the base block.
fn pi_prime_alpha(system: &DynSystem, rep: &OrbitRep, g: usize, a: &AElement) -> CMatrix {
    let g_inv = system.group().inv(g);
    let blocks: Vec<CMatrix> = rep
        .base_points
        .iter()
        .map(|&x| {
            let v = system.cocycle(g, x);
            &(v * a.block(system.sigma(g_inv, x))) * &v.adjoint()
        })
        .collect();
    CMatrix::block_diag(&blocks)
}

pub fn pi_omega(system: &DynSystem, rep: &OrbitRep, f: &CPElement) -> CMatrix {
    let grp = system.group();
    let d = rep.dim;
    let mut out = CMatrix::zeros(grp.order() * d, grp.order() * d);
    for s in grp.elements() {
        let coeff = f.coeff(s);
        if coeff.is_zero() {
            continue;
        }
        let s_inv = grp.inv(s);
        for t in grp.elements() {
            let block = pi_prime_alpha(system, rep, grp.inv(t), coeff);
            out.add_block(t * d, grp.mul(s_inv, t) * d, &block);
        }
    }
    out
}

/// `⊕_ω π_ω(f)`.
pub fn pi_sum(system: &DynSystem, reps: &[OrbitRep], f: &CPElement) -> CMatrix {
    let blocks: Vec<CMatrix> = reps.iter().map(|r| pi_omega(system, r, f)).collect();
    CMatrix::block_diag(&blocks)
}

/// `(‖π_ω(δ_e·a)‖, max_g ‖π'_ω(α_{g⁻¹}(a))‖)`.
pub fn pi_norm_identity(system: &DynSystem, rep: &OrbitRep, a: &AElement) -> (f64, f64) {
    let grp = system.group();
    let lhs = operator_norm(&pi_omega(
        system,
        rep,
        &CPElement::delta(system, grp.identity(), a.clone()),
    ));
    let rhs = grp
        .elements()
        .map(|g| operator_norm(&pi_prime_alpha(system, rep, grp.inv(g), a)))
        .fold(0.0, f64::max);
    (lhs, rhs)
}

/// Rank of a linear map on the convolution algebra against its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoReport {
    pub expected_dim: usize,
    pub achieved_rank: usize,
    pub iso: bool,
    /// Orthonormal kernel basis, empty when `iso`.
    pub kernel: Vec<CPElement>,
    /// Element with unit `e`-coefficient and vanishing image, when not `iso`.
    pub witness: Option<CPElement>,
}

/// Rescales a coordinate vector so that its first largest entry is real and
/// positive; keeps reported kernels free of arbitrary phases.
fn fix_phase(v: &mut [C64]) {
    let Some(pivot) = v
        .iter()
        .copied()
        .reduce(|best, z| if z.norm() > best.norm() * (1.0 + 1e-12) { z } else { best })
    else {
        return;
    };
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn iso_report(system: &DynSystem, mut map: impl FnMut(&CPElement) -> CMatrix) -> Result<IsoReport> {
    let l = coordinate_matrix(system, &mut map);
    let expected_dim = cp_dim(system);
    let achieved_rank = thin_svd(&l).rank(system.tol());
    let kernel: Vec<CPElement> = if achieved_rank == expected_dim {
        Vec::new()
    } else {
        nullspace(&l, system.tol())
            .basis()
            .iter()
            .map(|v| {
                let mut coords = v.data().to_vec();
                fix_phase(&mut coords);
                CPElement::from_coordinates(system, &coords)
            })
            .collect::<Result<_>>()?
    };
    let witness = match kernel.first() {
        Some(k) => Some(b0_witness_unchecked(system, k)?),
        None => None,
    };
    Ok(IsoReport {
        expected_dim,
        achieved_rank,
        iso: achieved_rank == expected_dim,
        kernel,
        witness,
    })
}

/// Decides whether `Φ = id ⋊ U` is injective, hence an isomorphism onto its
/// range, by comparing ranks on the coordinate basis.
pub fn phi_iso_check(system: &DynSystem) -> Result<IsoReport> {
    iso_report(system, |f| phi(system, f))
}

/// The same decision for `id ⋊ π(U)` with `π = ⊕_ω π_ω`.
pub fn check_pi_side_iso(system: &DynSystem) -> Result<IsoReport> {
    let reps = orbit_reps(system);
    iso_report(system, |f| pi_sum(system, &reps, f))
}

fn b0_witness_unchecked(system: &DynSystem, kernel_f: &CPElement) -> Result<CPElement> {
    let grp = system.group();
    let norms: Vec<f64> = grp.elements().map(|s| kernel_f.coeff(s).norm()).collect();
    let (s, top) = norms
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (s, n)| if n > best.1 { (s, n) } else { best });
    if top == 0.0 {
        return Err(Error::Precondition("witness requested for the zero element".into()));
    }
    let shift = CPElement::delta(system, grp.inv(s), AElement::identity(system));
    let w = convolve(system, kernel_f, &shift);
    let scale = w.coeff(grp.identity()).norm();
    Ok(w.scale(C64::new(1.0 / scale, 0.0)))
}

/// Turns a kernel element of `Φ` into a violation of `‖f(e)‖ ≤ ‖Φ(f)‖`:
/// right translation by `δ_{s⁻¹}` moves the largest coefficient to `e`, and
/// the result is normalized to `‖w(e)‖ = 1`.
pub fn b0_witness(system: &DynSystem, kernel_f: &CPElement) -> Result<CPElement> {
    let scale = kernel_f.coeffs().iter().map(AElement::norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Precondition("witness requested for the zero element".into()));
    }
    let image = operator_norm(&phi(system, kernel_f));
    if image > system.tol().rank_tol * scale {
        return Err(Error::Precondition(format!(
            "element is not in the kernel of Φ (‖Φ(f)‖ = {image:e})"
        )));
    }
    b0_witness_unchecked(system, kernel_f)
}

/// Result of an indicator search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCheck {
    pub holds: bool,
    /// Blocks of the first indicator satisfying the inequality.
    pub witness: Option<Vec<usize>>,
    pub candidates: usize,
    /// Both sides at the candidate with the largest margin `lhs − rhs`.
    pub lhs: f64,
    pub rhs: f64,
    pub best: Vec<usize>,
}

fn central_matrix(system: &DynSystem, blocks: &[usize]) -> CMatrix {
    a_matrix(system, &ZElement::indicator(system, blocks).to_a(system))
}

fn checked_blocks(system: &DynSystem, v: &[usize]) -> Result<Vec<usize>> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.is_empty() {
        return Err(Error::Precondition("block set must be nonempty".into()));
    }
    if let Some(&m) = v.iter().find(|&&m| m >= system.blocks().len()) {
        return Err(Error::Precondition(format!("block {m} out of range")));
    }
    if v.len() > MAX_INDICATOR_BLOCKS {
        return Err(Error::Unsupported(format!(
            "indicator search over {} blocks exceeds the limit of {MAX_INDICATOR_BLOCKS}",
            v.len()
        )));
    }
    Ok(v)
}

/// Runs `‖z·lhs‖ ≥ ‖z·rhs‖ − norm_tol` over indicators `z` of nonempty
/// subsets of `v`, in increasing bitmask order.
fn indicator_search(system: &DynSystem, v: &[usize], lhs: &CMatrix, rhs: &CMatrix) -> LocalCheck {
    let slack = system.tol().norm_tol;
    let mut out = LocalCheck {
        holds: false,
        witness: None,
        candidates: (1usize << v.len()) - 1,
        lhs: 0.0,
        rhs: 0.0,
        best: Vec::new(),
    };
    let mut best_margin = f64::NEG_INFINITY;
    for mask in 1usize..(1 << v.len()) {
        let subset: Vec<usize> = (0..v.len()).filter(|i| mask >> i & 1 == 1).map(|i| v[i]).collect();
        let z = central_matrix(system, &subset);
        let l = operator_norm(&(&z * lhs));
        let r = operator_norm(&(&z * rhs));
        if l - r > best_margin {
            best_margin = l - r;
            out.lhs = l;
            out.rhs = r;
            out.best = subset.clone();
        }
        if l >= r - slack && out.witness.is_none() {
            out.holds = true;
            out.witness = Some(subset);
        }
    }
    out
}

/// Positive-element form of the localized condition: some `z` supported in
/// `v` with `‖z·Φ(f)*Φ(f)‖ ≥ ‖z·ã‖ − norm_tol`.
pub fn check_b1(system: &DynSystem, f: &CPElement, v: &[usize]) -> Result<LocalCheck> {
    let v = checked_blocks(system, v)?;
    let b = phi(system, f);
    let gram = &b.adjoint() * &b;
    let a_tilde = a_matrix(system, &b_star_b_decomp(system, f).a_tilde);
    Ok(indicator_search(system, &v, &gram, &a_tilde))
}

/// Condition on blocks fixed by every element of `d`: some `z` supported in
/// `v` with `‖z·Σ_{g∈D} a_g U_g‖ ≥ ‖z·a_e‖ − norm_tol`.
pub fn check_b2(system: &DynSystem, d: &[usize], v: &[usize], f: &CPElement) -> Result<LocalCheck> {
    let v = checked_blocks(system, v)?;
    for &g in d {
        if g >= system.group().order() {
            return Err(Error::Precondition(format!("group element {g} out of range")));
        }
        if let Some(&m) = v.iter().find(|&&m| system.beta(g, m) != m) {
            return Err(Error::Precondition(format!(
                "element {g} moves block {m}, so the blocks are not fixed pointwise"
            )));
        }
    }
    if let Some(g) = f.support().into_iter().find(|g| !d.contains(g)) {
        return Err(Error::Precondition(format!(
            "element has a nonzero coefficient at {g}, outside the given set"
        )));
    }
    let sum = phi(system, f);
    let a_e = a_matrix(system, f.coeff(system.group().identity()));
    Ok(indicator_search(system, &v, &sum, &a_e))
}

/// Both sides of the inequality `‖z_Δ·Φ(f)*Φ(f)‖ ≥ ‖z_Δ·Φ(δ_e·ã + Σ_{g∈D̃} cross(g)·δ_g)‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct B2PrevCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub partition: FixedPointPartition,
}

/// Builds `Δ ⊆ v` from the fixed-point partition of `{s⁻¹t : s ≠ t ∈ supp f}`
/// and evaluates both sides with `z_Δ` the indicator of `Δ`.
pub fn check_b2prev(system: &DynSystem, f: &CPElement, v: &[usize]) -> Result<B2PrevCheck> {
    let grp = system.group();
    let support = f.support();
    let mut g0: Vec<usize> = support
        .iter()
        .flat_map(|&s| support.iter().filter(move |&&t| t != s).map(move |&t| grp.mul(grp.inv(s), t)))
        .collect();
    g0.sort_unstable();
    g0.dedup();
    let partition = fixed_point_partition(system, &g0, v)?;

    let z = central_matrix(system, &partition.delta);
    let b = phi(system, f);
    let lhs = operator_norm(&(&z * &(&b.adjoint() * &b)));

    let decomp = b_star_b_decomp(system, f);
    let mut kept = CPElement::delta(system, grp.identity(), decomp.a_tilde);
    for &g in &partition.d_tilde {
        kept.set_coeff(g, kept.coeff(g).add(decomp.cross.coeff(g)));
    }
    let rhs = operator_norm(&(&z * &phi(system, &kept)));
    Ok(B2PrevCheck { lhs, rhs, partition })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitVerdict {
    pub orbit: usize,
    pub norm: f64,
    pub min_singular: f64,
    pub invertible: bool,
    /// `‖π_ω(f)⁻¹‖ = 1/σ_min` when invertible.
    pub inverse_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryVerdict {
    pub orbits: Vec<OrbitVerdict>,
    pub invertible: bool,
    /// `max_ω ‖π_ω(f)⁻¹‖` when every orbit is invertible.
    pub max_inverse_norm: Option<f64>,
}

/// `f` is invertible iff every `π_ω(f)` is; with finitely many orbits the
/// uniform bound on the inverses is automatic.
pub fn invertibility_by_trajectories(system: &DynSystem, f: &CPElement) -> Result<TrajectoryVerdict> {
    let mut verdicts = Vec::new();
    for rep in orbit_reps(system) {
        let m = pi_omega(system, &rep, f);
        let sigma = min_singular(&m)?;
        let invertible = is_invertible(&m, system.tol())?;
        verdicts.push(OrbitVerdict {
            orbit: rep.index,
            norm: operator_norm(&m),
            min_singular: sigma,
            invertible,
            inverse_norm: invertible.then(|| 1.0 / sigma),
        });
    }
    let invertible = verdicts.iter().all(|v| v.invertible);
    let max_inverse_norm = if invertible {
        verdicts.iter().filter_map(|v| v.inverse_norm).reduce(f64::max)
    } else {
        None
    };
    Ok(TrajectoryVerdict {
        orbits: verdicts,
        invertible,
        max_inverse_norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarLocalization {
    /// `b_0 = Σ_g f(g)(m)·δ_g`.
    pub b0: CPElement,
    /// `‖z_Δ(Φ(f) − Φ(b_0))‖`, zero since both share the fiber row of `m`.
    pub row_discrepancy: f64,
    /// `‖z_Δ(Φ(f)*Φ(f) − Φ(b_0)*Φ(b_0))‖`; zero when `m` is fixed by the
    /// whole support, not in general.
    pub gram_discrepancy: f64,
}

/// Freezes every coefficient of `f` at the point `m` of a commutative system.
pub fn localize_scalar(system: &DynSystem, f: &CPElement, m: usize) -> Result<ScalarLocalization> {
    if !system.is_commutative() {
        return Err(Error::Unsupported(
            "scalar localization needs scalar fibers and singleton blocks".into(),
        ));
    }
    if m >= system.points() {
        return Err(Error::Precondition(format!("block {m} out of range")));
    }
    let c: Vec<C64> = f.coeffs().iter().map(|a| a.block(m)[(0, 0)]).collect();
    let b0 = CPElement::scalar_combination(system, &c);
    let z = central_matrix(system, &[m]);
    let (pf, pb) = (phi(system, f), phi(system, &b0));
    let row_discrepancy = operator_norm(&(&z * &(&pf - &pb)));
    let gram = &(&pf.adjoint() * &pf) - &(&pb.adjoint() * &pb);
    let gram_discrepancy = operator_norm(&(&z * &gram));
    Ok(ScalarLocalization {
        b0,
        row_discrepancy,
        gram_discrepancy,
    })
}

/// Finds an orbit `ω` and `g` with `ρ(β_{g⁻¹}(m_ω)) = 1`, so that
/// `π'_ω(α_{g⁻¹}(ρ)) = I`. Orbits and elements are scanned in ascending order.
pub fn rho_peak_finder(system: &DynSystem, rho: &ZElement) -> Result<(usize, usize)> {
    let slack = system.tol().norm_tol;
    let values = rho.values();
    if values.iter().any(|v| v.im.abs() > slack || v.re < -slack || v.re > 1.0 + slack) {
        return Err(Error::Precondition("ρ must take values in [0, 1]".into()));
    }
    let top = values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    if (top - 1.0).abs() > slack {
        return Err(Error::Precondition(format!("ρ must have maximum 1, found {top}")));
    }
    let grp = system.group();
    for rep in orbit_reps(system) {
        for g in grp.elements() {
            let m = system.beta(grp.inv(g), rep.base_block);
            if (values[m].re - 1.0).abs() <= slack {
                return Ok((rep.index, g));
            }
        }
    }
    unreachable!("the maximum is attained on some block and orbits cover all blocks")
}

/// `J_g*·T·J_g`: the `(g, g)` diagonal block of an operator on `ℓ²(G) ⊗ C^{d_ω}`.
pub fn jg_compress(system: &DynSystem, rep: &OrbitRep, g: usize, t: &CMatrix) -> Result<CMatrix> {
    let size = system.group().order() * rep.dim;
    if t.shape() != (size, size) {
        return Err(Error::ShapeMismatch {
            expected: (size, size),
            found: t.shape(),
        });
    }
    if g >= system.group().order() {
        return Err(Error::Precondition(format!("group element {g} out of range")));
    }
    Ok(t.block(g * rep.dim, g * rep.dim, rep.dim, rep.dim))
}

/// Pair `a ∈ A`, `b ∈ alg(U_G)` with `a ≠ 0`, `b ≠ 0` and `ab = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultCounterexample {
    pub a: AElement,
    /// `b = Σ_g c_g·U_g`.
    pub coefficients: Vec<C64>,
    pub b: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultProbe {
    pub counterexample: Option<MultCounterexample>,
    pub points_checked: usize,
    pub random_trials: usize,
}

fn scalar_unitary_sum(system: &DynSystem, c: &[C64]) -> CMatrix {
    phi(system, &CPElement::scalar_combination(system, c))
}

/// Searches for zero products `a·b` between the coefficient algebra and the
/// span of the unitaries.
///
/// With scalar fibers, `a·b = 0` already forces `δ_x·b = 0` for each point of
/// the support of `a`, so the structured pass over single points decides the
/// question. The seeded random trials are an independent sanity pass.
pub fn nontrivial_mult_probe(system: &DynSystem, trials: usize, seed: u64) -> Result<MultProbe> {
    if !system.is_commutative() {
        return Err(Error::Unsupported(
            "multiplication probe needs scalar fibers and singleton blocks".into(),
        ));
    }
    let tol = system.tol();
    let n_g = system.group().order();
    let unit = |g: usize| -> Vec<C64> { (0..n_g).map(|h| if h == g { ONE } else { ZERO }).collect() };
    let columns: Vec<Vec<C64>> = (0..n_g).map(|g| scalar_unitary_sum(system, &unit(g)).into_data()).collect();
    let full = CMatrix::from_columns(&columns, system.space_dim().pow(2));
    let trivial = nullspace(&full, tol);

    for x in 0..system.points() {
        let a = AElement::point_indicator(system, &[x]);
        let ax = a_matrix(system, &a);
        let columns: Vec<Vec<C64>> = (0..n_g)
            .map(|g| (&ax * &scalar_unitary_sum(system, &unit(g))).into_data())
            .collect();
        let kernel = nullspace(&CMatrix::from_columns(&columns, system.space_dim().pow(2)), tol);
        for v in kernel.basis() {
            let mut c: Vec<C64> = v.data().to_vec();
            for k in trivial.basis() {
                let dot: C64 = k.data().iter().zip(&c).map(|(p, q)| p.conj() * q).sum();
                for (ci, ki) in c.iter_mut().zip(k.data()) {
                    *ci -= ki * dot;
                }
            }
            let residual = libm::sqrt(c.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if residual <= 1e-6 {
                continue;
            }
            let pivot = c
                .iter()
                .copied()
                .reduce(|best, z| if z.norm() > best.norm() * (1.0 + 1e-12) { z } else { best })
                .expect("group is nonempty");
            for z in c.iter_mut() {
                *z /= pivot;
            }
            let b = scalar_unitary_sum(system, &c);
            return Ok(MultProbe {
                counterexample: Some(MultCounterexample { a, coefficients: c, b }),
                points_checked: x + 1,
                random_trials: 0,
            });
        }
    }

    let mut rng = crate::random::rng(seed);
    for trial in 0..trials {
        let support: Vec<usize> = (0..system.points())
            .filter(|_| rand::Rng::random_bool(&mut rng, 0.5))
            .collect();
        if support.is_empty() {
            continue;
        }
        let a = AElement::scalars(system, |x| {
            if support.contains(&x) {
                crate::random::complex(&mut rng)
            } else {
                ZERO
            }
        });
        let c: Vec<C64> = (0..n_g).map(|_| crate::random::complex(&mut rng)).collect();
        let b = scalar_unitary_sum(system, &c);
        let (na, nb) = (a.norm(), operator_norm(&b));
        let nab = operator_norm(&(&a_matrix(system, &a) * &b));
        if na > 0.0 && nb > tol.rank_tol && nab <= tol.rank_tol * na * nb {
            return Ok(MultProbe {
                counterexample: Some(MultCounterexample { a, coefficients: c, b }),
                points_checked: system.points(),
                random_trials: trial + 1,
            });
        }
    }
    Ok(MultProbe {
        counterexample: None,
        points_checked: system.points(),
        random_trials: trials,
    })
}
