//! Concrete realizations of the coefficient algebra, the covariance
//! unitaries, the convolution algebra and its regular representation.
//!
//! Coordinates on the convolution algebra follow the matrix units
//! `δ_g·E^x_{ij}`, ordered lexicographically in `(g, x, i, j)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::DynSystem;
use crate::linalg::{operator_norm, span_basis, CMatrix, SpanBasis, C64, ONE, ZERO};
use crate::{Error, Result};

/// Element of the coefficient algebra: one `N×N` matrix per point.
#[derive(Debug, Clone, PartialEq)]
pub struct AElement {
    blocks: Vec<CMatrix>,
}

impl AElement {
    pub fn from_blocks(system: &DynSystem, blocks: Vec<CMatrix>) -> Result<Self> {
        let n = system.fiber_dim();
        if blocks.len() != system.points() {
            return Err(Error::Precondition(format!(
                "{} blocks given for {} points",
                blocks.len(),
                system.points()
            )));
        }
        if let Some(b) = blocks.iter().find(|b| b.shape() != (n, n)) {
            return Err(Error::ShapeMismatch {
                expected: (n, n),
                found: b.shape(),
            });
        }
        Ok(Self { blocks })
    }

    pub fn zero(system: &DynSystem) -> Self {
        let n = system.fiber_dim();
        Self {
            blocks: vec![CMatrix::zeros(n, n); system.points()],
        }
    }

    pub fn identity(system: &DynSystem) -> Self {
        Self::scalars(system, |_| ONE)
    }

    /// `a(x) = c(x)·I`.
    pub fn scalars(system: &DynSystem, mut c: impl FnMut(usize) -> C64) -> Self {
        let n = system.fiber_dim();
        Self {
            blocks: (0..system.points())
                .map(|x| CMatrix::identity(n).scale(c(x)))
                .collect(),
        }
    }

    /// Indicator of a set of points.
    pub fn point_indicator(system: &DynSystem, points: &[usize]) -> Self {
        Self::scalars(system, |x| if points.contains(&x) { ONE } else { ZERO })
    }

    pub fn block(&self, x: usize) -> &CMatrix {
        &self.blocks[x]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn points(&self) -> usize {
        self.blocks.len()
    }

    /// `‖a‖ = max_x ‖a(x)‖`.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(operator_norm).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        self.map(CMatrix::adjoint)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|a| a.scale(c))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(CMatrix::is_zero)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        debug_assert_eq!(self.blocks.len(), other.blocks.len());
        Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

/// Central element: one scalar per block of the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ZElement {
    values: Vec<C64>,
}

impl ZElement {
    pub fn new(system: &DynSystem, values: Vec<C64>) -> Result<Self> {
        if values.len() != system.blocks().len() {
            return Err(Error::Precondition(format!(
                "{} values given for {} blocks",
                values.len(),
                system.blocks().len()
            )));
        }
        Ok(Self { values })
    }

    /// Indicator function of a set of blocks.
    pub fn indicator(system: &DynSystem, blocks: &[usize]) -> Self {
        Self {
            values: (0..system.blocks().len())
                .map(|m| if blocks.contains(&m) { ONE } else { ZERO })
                .collect(),
        }
    }

    pub fn value(&self, m: usize) -> C64 {
        self.values[m]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Blocks where the value is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&m| self.values[m] != ZERO)
            .collect()
    }

    pub fn to_a(&self, system: &DynSystem) -> AElement {
        AElement::scalars(system, |x| self.values[system.block_of(x)])
    }
}

/// Element of the convolution algebra: one coefficient per group element.
#[derive(Debug, Clone, PartialEq)]
pub struct CPElement {
    coeffs: Vec<AElement>,
}

impl CPElement {
    pub fn from_coeffs(system: &DynSystem, coeffs: Vec<AElement>) -> Result<Self> {
        if coeffs.len() != system.group().order() {
            return Err(Error::Precondition(format!(
                "{} coefficients given for a group of order {}",
                coeffs.len(),
                system.group().order()
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(system: &DynSystem) -> Self {
        Self {
            coeffs: vec![AElement::zero(system); system.group().order()],
        }
    }

    /// `δ_g·a`.
    pub fn delta(system: &DynSystem, g: usize, a: AElement) -> Self {
        let mut f = Self::zero(system);
        f.coeffs[g] = a;
        f
    }

    /// `Σ_g c_g·δ_g·I`.
    pub fn scalar_combination(system: &DynSystem, c: &[C64]) -> Self {
        Self {
            coeffs: c.iter().map(|&v| AElement::identity(system).scale(v)).collect(),
        }
    }

    pub fn coeff(&self, g: usize) -> &AElement {
        &self.coeffs[g]
    }

    pub fn coeffs(&self) -> &[AElement] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, g: usize, a: AElement) {
        self.coeffs[g] = a;
    }

    /// Group elements with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&g| !self.coeffs[g].is_zero())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Flattened coordinates in the `(g, x, i, j)` matrix-unit basis.
    pub fn coordinates(&self) -> Vec<C64> {
        self.coeffs
            .iter()
            .flat_map(|a| a.blocks.iter().flat_map(|b| b.data().iter().copied()))
            .collect()
    }

    pub fn from_coordinates(system: &DynSystem, coords: &[C64]) -> Result<Self> {
        let n = system.fiber_dim();
        let per_point = n * n;
        let per_element = system.points() * per_point;
        if coords.len() != system.group().order() * per_element {
            return Err(Error::Precondition(format!(
                "{} coordinates given, expected {}",
                coords.len(),
                system.group().order() * per_element
            )));
        }
        let coeffs = coords
            .chunks(per_element)
            .map(|chunk| AElement {
                blocks: chunk
                    .chunks(per_point)
                    .map(|c| CMatrix::new(n, n, c.to_vec()).expect("chunk has n² entries"))
                    .collect(),
            })
            .collect();
        Ok(Self { coeffs })
    }
}

/// Dimension `|G|·|X|·N²` of the convolution algebra.
pub fn cp_dim(system: &DynSystem) -> usize {
    system.group().order() * system.coeff_dim()
}

/// The `k`-th matrix unit `δ_g·E^x_{ij}` of the coordinate basis.
pub fn coordinate_basis_element(system: &DynSystem, k: usize) -> CPElement {
    let mut coords = vec![ZERO; cp_dim(system)];
    coords[k] = ONE;
    CPElement::from_coordinates(system, &coords).expect("basis index in range")
}

/// Matrix whose `k`-th column is the vectorized image of the `k`-th basis
/// element under a linear map on the convolution algebra.
pub fn coordinate_matrix(
    system: &DynSystem,
    mut map: impl FnMut(&CPElement) -> CMatrix,
) -> CMatrix {
    let columns: Vec<Vec<C64>> = (0..cp_dim(system))
        .map(|k| map(&coordinate_basis_element(system, k)).into_data())
        .collect();
    let len = columns.first().map_or(0, Vec::len);
    CMatrix::from_columns(&columns, len)
}

/// Block-diagonal realization of `a` on `C^{|X|·N}`.
pub fn a_matrix(system: &DynSystem, a: &AElement) -> CMatrix {
    debug_assert_eq!(a.points(), system.points());
    CMatrix::block_diag(&a.blocks)
}

/// `(U_g ξ)(x) = V_g(x)·ξ(σ_{g⁻¹}(x))`.
pub fn unitary(system: &DynSystem, g: usize) -> CMatrix {
    let n = system.fiber_dim();
    let d = system.space_dim();
    let g_inv = system.group().inv(g);
    let mut u = CMatrix::zeros(d, d);
    for x in 0..system.points() {
        u.set_block(x * n, system.sigma(g_inv, x) * n, system.cocycle(g, x));
    }
    u
}

/// `α_g(a)(x) = V_g(x)·a(σ_{g⁻¹}x)·V_g(x)*`.
pub fn alpha(system: &DynSystem, g: usize, a: &AElement) -> AElement {
    let g_inv = system.group().inv(g);
    AElement {
        blocks: (0..system.points())
            .map(|x| {
                let v = system.cocycle(g, x);
                &(v * &a.blocks[system.sigma(g_inv, x)]) * &v.adjoint()
            })
            .collect(),
    }
}

/// `Φ(f) = Σ_g f(g)·U_g` on `C^{|X|·N}`.
pub fn phi(system: &DynSystem, f: &CPElement) -> CMatrix {
    let n = system.fiber_dim();
    let d = system.space_dim();
    let mut out = CMatrix::zeros(d, d);
    for g in system.group().elements() {
        let g_inv = system.group().inv(g);
        let coeff = &f.coeffs[g];
        if coeff.is_zero() {
            continue;
        }
        for x in 0..system.points() {
            let block = &coeff.blocks[x] * system.cocycle(g, x);
            out.add_block(x * n, system.sigma(g_inv, x) * n, &block);
        }
    }
    out
}

/// `(f*h)(s) = Σ_t f(t)·α_t(h(t⁻¹s))`.
pub fn convolve(system: &DynSystem, f: &CPElement, h: &CPElement) -> CPElement {
    let grp = system.group();
    let mut out = CPElement::zero(system);
    for t in grp.elements() {
        if f.coeffs[t].is_zero() {
            continue;
        }
        for r in grp.elements() {
            if h.coeffs[r].is_zero() {
                continue;
            }
            let s = grp.mul(t, r);
            let term = f.coeffs[t].mul(&alpha(system, t, &h.coeffs[r]));
            out.coeffs[s] = out.coeffs[s].add(&term);
        }
    }
    out
}

/// `f*(s) = α_s(f(s⁻¹)*)`.
pub fn involute(system: &DynSystem, f: &CPElement) -> CPElement {
    let grp = system.group();
    CPElement {
        coeffs: grp
            .elements()
            .map(|s| alpha(system, s, &f.coeffs[grp.inv(s)].adjoint()))
            .collect(),
    }
}

/// Regular representation on `ℓ²(G) ⊗ C^{|X|·N}`:
/// `[Λ(f)ξ](g) = Σ_s α_{g⁻¹}(f(s))·ξ(s⁻¹g)`.
pub fn regular_rep(system: &DynSystem, f: &CPElement) -> CMatrix {
    let grp = system.group();
    let d = system.space_dim();
    let mut out = CMatrix::zeros(grp.order() * d, grp.order() * d);
    for g in grp.elements() {
        let g_inv = grp.inv(g);
        for s in grp.elements() {
            if f.coeffs[s].is_zero() {
                continue;
            }
            let col = grp.mul(grp.inv(s), g);
            let block = a_matrix(system, &alpha(system, g_inv, &f.coeffs[s]));
            out.add_block(g * d, col * d, &block);
        }
    }
    out
}

/// Norm in the crossed product. The group is finite, hence amenable, and the
/// identity representation of the coefficient algebra is faithful, so the
/// regular representation computes the universal norm.
pub fn universal_norm(system: &DynSystem, f: &CPElement) -> f64 {
    operator_norm(&regular_rep(system, f))
}

/// Evaluation map `E_s(f) = f(s)`.
pub fn eval_e(f: &CPElement, s: usize) -> AElement {
    f.coeffs[s].clone()
}

/// Linear model of `Φ` on the coordinate basis, used to invert it on its
/// range.
#[derive(Debug, Clone)]
pub struct PhiModel {
    span: SpanBasis,
    expected_dim: usize,
}

impl PhiModel {
    pub fn new(system: &DynSystem) -> Result<Self> {
        let images: Vec<CMatrix> = (0..cp_dim(system))
            .map(|k| phi(system, &coordinate_basis_element(system, k)))
            .collect();
        Ok(Self {
            span: span_basis(&images, system.tol())?,
            expected_dim: cp_dim(system),
        })
    }

    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    pub fn expected_dim(&self) -> usize {
        self.expected_dim
    }

    pub fn is_injective(&self) -> bool {
        self.span.rank() == self.expected_dim
    }

    pub fn span(&self) -> &SpanBasis {
        &self.span
    }
}

/// Coefficient `a_s` of the unique expansion `b = Σ_g a_g·U_g`.
pub fn eval_eprime(system: &DynSystem, model: &PhiModel, b: &CMatrix, s: usize) -> Result<AElement> {
    if !model.is_injective() {
        return Err(Error::Unsupported(format!(
            "Φ has rank {} < {}, so the expansion of b is not unique",
            model.rank(),
            model.expected_dim()
        )));
    }
    let span = model.span();
    if b.shape() != span.shape() {
        return Err(Error::ShapeMismatch {
            expected: span.shape(),
            found: b.shape(),
        });
    }
    let scale = b.frobenius_norm();
    let residual = (b - &span.project(b)).frobenius_norm();
    if residual > system.tol().rank_tol * scale {
        return Err(Error::NotInSpan {
            residual: residual / scale,
        });
    }
    let weights = span
        .generator_weights(b)
        .expect("span built directly from generators");
    Ok(eval_e(&CPElement::from_coordinates(system, &weights)?, s))
}

/// Diagonal and off-diagonal parts of `f* * f`.
#[derive(Debug, Clone, PartialEq)]
pub struct BStarB {
    /// `ã = Σ_s α_{s⁻¹}(f(s)*·f(s))`.
    pub a_tilde: AElement,
    /// `cross(g) = Σ_{s ≠ t, s⁻¹t = g} α_{s⁻¹}(f(s)*·f(t))`, zero at `e`.
    pub cross: CPElement,
}

pub fn b_star_b_decomp(system: &DynSystem, f: &CPElement) -> BStarB {
    let grp = system.group();
    let mut a_tilde = AElement::zero(system);
    let mut cross = CPElement::zero(system);
    for s in grp.elements() {
        if f.coeffs[s].is_zero() {
            continue;
        }
        let s_inv = grp.inv(s);
        let fs_adj = f.coeffs[s].adjoint();
        for t in grp.elements() {
            if f.coeffs[t].is_zero() {
                continue;
            }
            let term = alpha(system, s_inv, &fs_adj.mul(&f.coeffs[t]));
            if s == t {
                a_tilde = a_tilde.add(&term);
            } else {
                let g = grp.mul(s_inv, t);
                cross.coeffs[g] = cross.coeffs[g].add(&term);
            }
        }
    }
    BStarB { a_tilde, cross }
}
