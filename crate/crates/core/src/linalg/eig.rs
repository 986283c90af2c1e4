use alloc::vec::Vec;

use super::{CMatrix, Tolerances, C64, ZERO};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `H = U·diag(values)·U*` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: CMatrix,
}

/// Diagonalizes a Hermitian matrix with the cyclic Jacobi method.
///
/// The input must be square and Hermitian up to `norm_tol·‖H‖_F`; the
/// Hermitian part is what gets diagonalized.
pub fn hermitian_eig(h: &CMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let asymmetry = (h - &h.adjoint()).frobenius_norm();
    if asymmetry > tol.norm_tol * h.frobenius_norm() {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(jacobi(&h.hermitian_part()))
}

/// Jacobi sweeps over a matrix already known to be Hermitian.
pub(crate) fn jacobi(h: &CMatrix) -> HermitianEig {
    let n = h.rows();
    let mut a: Vec<C64> = h.data().to_vec();
    let mut v = CMatrix::identity(n).into_data();
    let scale = h.frobenius_norm();

    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|p| (0..n).map(move |q| (p, q)))
                .filter(|(p, q)| p != q)
                .map(|(p, q)| a[p * n + q].norm_sqr())
                .sum();
            if libm::sqrt(off) <= f64::EPSILON * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]);
    HermitianEig { values, vectors }
}

/// One Jacobi rotation annihilating the `(p, q)` entry.
///
/// With `a_pq = r·e^{iφ}` the rotation is `R = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]`
/// on coordinates `p, q`, and `A ← R*·A·R`, `V ← V·R`.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (libm::fabs(tau) + libm::hypot(1.0, tau));
    let c = 1.0 / libm::hypot(1.0, t);
    let s = t * c;
    let sp = phase.conj() * s;
    let cp = phase.conj() * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - akq * sp;
        a[k * n + q] = akp * s + akq * cp;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - aqk * sp.conj();
        a[q * n + k] = apk * s + aqk * cp.conj();
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - vkq * sp;
        v[k * n + q] = vkp * s + vkq * cp;
    }
}

/// Largest singular value, `sqrt(λ_max(T*T))`.
pub fn operator_norm(t: &CMatrix) -> f64 {
    if t.rows() == 0 || t.cols() == 0 {
        return 0.0;
    }
    let gram = if t.cols() <= t.rows() {
        &t.adjoint() * t
    } else {
        t * &t.adjoint()
    };
    let top = jacobi(&gram.hermitian_part())
        .values
        .last()
        .copied()
        .unwrap_or(0.0);
    libm::sqrt(top.max(0.0))
}

/// Smallest singular value of a square matrix.
///
/// Computed from the Hermitian matrix `[[0, T], [T*, 0]]`, whose eigenvalues
/// are `±σ_i`; this keeps the absolute accuracy at `ε·‖T‖` instead of the
/// `sqrt(ε)·‖T‖` obtained from `T*T`.
pub fn min_singular(t: &CMatrix) -> Result<f64> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let n = t.rows();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(jacobi(&jordan_wielandt(t))
        .values
        .iter()
        .map(|v| libm::fabs(*v))
        .fold(f64::INFINITY, f64::min))
}

/// `σ_min(T) > invert_tol · ‖T‖`.
pub fn is_invertible(t: &CMatrix, tol: &Tolerances) -> Result<bool> {
    let smallest = min_singular(t)?;
    Ok(smallest > tol.invert_tol * operator_norm(t))
}

pub(crate) fn jordan_wielandt(t: &CMatrix) -> CMatrix {
    let (r, c) = t.shape();
    let mut w = CMatrix::zeros(r + c, r + c);
    w.set_block(0, r, t);
    w.set_block(r, 0, &t.adjoint());
    w
}
