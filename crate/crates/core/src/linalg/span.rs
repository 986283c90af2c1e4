use alloc::vec;
use alloc::vec::Vec;

use super::eig::{jacobi, jordan_wielandt};
use super::{CMatrix, Tolerances, C64, ZERO};
use crate::{Error, Result};

/// Thin singular value decomposition `M = U·diag(σ)·V*`.
///
/// Singular vectors attached to (numerically) zero singular values are not
/// meaningful; callers only use the leading columns above their threshold.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// Singular values in descending order, `min(rows, cols)` of them.
    pub sigma: Vec<f64>,
    /// `rows × min(rows, cols)` left singular vectors.
    pub u: CMatrix,
    /// `cols × min(rows, cols)` right singular vectors.
    pub v: CMatrix,
}

impl ThinSvd {
    /// Number of singular values above `rank_tol · σ_max`.
    pub fn rank(&self, tol: &Tolerances) -> usize {
        numerical_rank(&self.sigma, tol)
    }
}

fn numerical_rank(sigma: &[f64], tol: &Tolerances) -> usize {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sigma.iter().take_while(|s| **s > tol.rank_tol * top).count()
}

/// Householder QR of a tall matrix (`rows ≥ cols`): returns the square upper
/// triangular `R` and, when `want_q`, the thin `Q` (`rows × cols`, orthonormal
/// columns). Works on contiguous columns.
fn householder_qr(m: &CMatrix, want_q: bool) -> (Option<CMatrix>, CMatrix) {
    let (d, k) = m.shape();
    debug_assert!(d >= k);
    let mut a: Vec<Vec<C64>> = (0..k).map(|j| m.column_vec(j)).collect();
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(k);

    for j in 0..k {
        let norm = libm::sqrt(a[j][j..].iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let x0 = a[j][j];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if vnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        for col in a[j..].iter_mut() {
            apply_reflector(&mut col[j..], &v);
        }
        for z in a[j][j + 1..].iter_mut() {
            *z = ZERO;
        }
        reflectors.push(Some(v));
    }

    let r = CMatrix::from_fn(k, k, |i, j| a[j][i]);
    let q = want_q.then(|| {
        let mut q: Vec<Vec<C64>> = (0..k)
            .map(|i| {
                let mut e = vec![ZERO; d];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        for j in (0..k).rev() {
            if let Some(v) = &reflectors[j] {
                for col in q.iter_mut() {
                    apply_reflector(&mut col[j..], v);
                }
            }
        }
        CMatrix::from_fn(d, k, |i, j| q[j][i])
    });
    (q, r)
}

/// `x ← (I − 2vv*)·x`.
fn apply_reflector(x: &mut [C64], v: &[C64]) {
    let dot: C64 = v.iter().zip(x.iter()).map(|(vi, xi)| vi.conj() * xi).sum();
    if dot == ZERO {
        return;
    }
    let w = dot * 2.0;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= vi * w;
    }
}

/// SVD of a square matrix through the eigenproblem of `[[0, R], [R*, 0]]`.
fn square_svd(r: &CMatrix) -> (Vec<f64>, CMatrix, CMatrix) {
    let n = r.rows();
    let eig = jacobi(&jordan_wielandt(r));
    let mut sigma = Vec::with_capacity(n);
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    let root2 = libm::sqrt(2.0);
    for (col, idx) in (n..2 * n).rev().enumerate() {
        sigma.push(eig.values[idx].max(0.0));
        for i in 0..n {
            u[(i, col)] = eig.vectors[(i, idx)] * root2;
            v[(i, col)] = eig.vectors[(n + i, idx)] * root2;
        }
    }
    (sigma, u, v)
}

/// Thin SVD: Householder QR on the taller orientation followed by a
/// Hermitian eigensolve on the square triangular factor.
pub fn thin_svd(m: &CMatrix) -> ThinSvd {
    let (d, k) = m.shape();
    if d == 0 || k == 0 {
        return ThinSvd {
            sigma: Vec::new(),
            u: CMatrix::zeros(d, 0),
            v: CMatrix::zeros(k, 0),
        };
    }
    if d >= k {
        let (q, r) = householder_qr(m, true);
        let (sigma, ur, vr) = square_svd(&r);
        ThinSvd {
            sigma,
            u: &q.expect("requested") * &ur,
            v: vr,
        }
    } else {
        // M* = Q·R, so M = R*·Q* and with R = Ur·Σ·Vr*: M = Vr·Σ·(Q·Ur)*.
        let (q, r) = householder_qr(&m.adjoint(), true);
        let (sigma, ur, vr) = square_svd(&r);
        ThinSvd {
            sigma,
            u: vr,
            v: &q.expect("requested") * &ur,
        }
    }
}

/// Singular values and right singular vectors only; for tall inputs this
/// skips forming `Q`.
fn right_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (d, k) = m.shape();
    if d >= k && k > 0 {
        let (_, r) = householder_qr(m, false);
        let (sigma, _, vr) = square_svd(&r);
        (sigma, vr)
    } else {
        let svd = thin_svd(m);
        (svd.sigma, svd.v)
    }
}

/// Re-orthonormalizes columns with two passes of modified Gram–Schmidt.
fn orthonormalize(columns: &mut [Vec<C64>]) {
    for j in 0..columns.len() {
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = columns.split_at_mut(j);
                let dot: C64 = head[i].iter().zip(&tail[0]).map(|(a, b)| a.conj() * b).sum();
                for (t, h) in tail[0].iter_mut().zip(&head[i]) {
                    *t -= h * dot;
                }
            }
        }
        let norm = libm::sqrt(columns[j].iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm > 0.0 {
            for z in columns[j].iter_mut() {
                *z /= norm;
            }
        }
    }
}

/// Orthonormal basis (Frobenius inner product) of the linear span of a set of
/// equally shaped matrices.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    rows: usize,
    cols: usize,
    basis: Vec<CMatrix>,
    singular_values: Vec<f64>,
    /// `k × r` map from orthonormal coordinates back to generator weights,
    /// `V_r·Σ_r⁻¹`; absent once the basis has been extended.
    generator_map: Option<CMatrix>,
}

impl SpanBasis {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            basis: Vec::new(),
            singular_values: Vec::new(),
            generator_map: None,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// All singular values of the generator matrix, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Coordinates `⟨b_i, T⟩` of the orthogonal projection onto the span.
    pub fn coordinates(&self, t: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| b.inner(t)).collect()
    }

    pub fn project(&self, t: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (b, c) in self.basis.iter().zip(self.coordinates(t)) {
            out = &out + &b.scale(c);
        }
        out
    }

    /// Least-norm weights `w` with `Σ w_j·generator_j` equal to the projection
    /// of `t` onto the span. `None` for spans that were extended after
    /// construction.
    pub fn generator_weights(&self, t: &CMatrix) -> Option<Vec<C64>> {
        let map = self.generator_map.as_ref()?;
        let coords = self.coordinates(t);
        Some(
            (0..map.rows())
                .map(|i| (0..map.cols()).map(|j| map[(i, j)] * coords[j]).sum())
                .collect(),
        )
    }

    /// Adds `t` to the span when its residual exceeds `rank_tol·‖t‖_F`;
    /// returns whether the rank grew.
    pub fn extend(&mut self, t: &CMatrix, tol: &Tolerances) -> Result<bool> {
        if self.basis.is_empty() && self.singular_values.is_empty() && self.rows * self.cols == 0 {
            self.rows = t.rows();
            self.cols = t.cols();
        }
        if t.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: t.shape(),
            });
        }
        let scale = t.frobenius_norm();
        if scale == 0.0 {
            return Ok(false);
        }
        let mut residual = t.data().to_vec();
        for _ in 0..2 {
            for b in &self.basis {
                subtract_projection(&mut residual, b.data());
            }
        }
        let norm = libm::sqrt(residual.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if norm <= tol.rank_tol * scale {
            return Ok(false);
        }
        for z in residual.iter_mut() {
            *z /= norm;
        }
        self.basis.push(CMatrix::new(self.rows, self.cols, residual)?);
        self.generator_map = None;
        Ok(true)
    }
}

/// `r ← r − ⟨b, r⟩·b` for a unit vector `b`.
fn subtract_projection(r: &mut [C64], b: &[C64]) {
    let c: C64 = b.iter().zip(r.iter()).map(|(x, y)| x.conj() * y).sum();
    for (y, x) in r.iter_mut().zip(b) {
        *y -= x * c;
    }
}

/// Orthonormal basis of `span(mats)`; singular values of the stacked
/// vectorized matrices below `rank_tol·σ_max` are treated as zero.
pub fn span_basis(mats: &[CMatrix], tol: &Tolerances) -> Result<SpanBasis> {
    let Some(first) = mats.first() else {
        return Ok(SpanBasis::empty(0, 0));
    };
    let (rows, cols) = first.shape();
    if let Some(bad) = mats.iter().find(|m| m.shape() != (rows, cols)) {
        return Err(Error::ShapeMismatch {
            expected: (rows, cols),
            found: bad.shape(),
        });
    }
    let columns: Vec<Vec<C64>> = mats.iter().map(|m| m.data().to_vec()).collect();
    let stacked = CMatrix::from_columns(&columns, rows * cols);
    let svd = thin_svd(&stacked);
    let rank = svd.rank(tol);

    let mut vectors: Vec<Vec<C64>> = (0..rank).map(|j| svd.u.column_vec(j)).collect();
    orthonormalize(&mut vectors);
    let basis = vectors
        .into_iter()
        .map(|v| CMatrix::new(rows, cols, v).expect("vector length matches shape"))
        .collect();
    let generator_map = CMatrix::from_fn(mats.len(), rank, |i, j| {
        svd.v[(i, j)] / svd.sigma[j]
    });
    Ok(SpanBasis {
        rows,
        cols,
        basis,
        singular_values: svd.sigma,
        generator_map: Some(generator_map),
    })
}

/// Membership test: `T` is in the span iff the projection residual is at
/// most `rank_tol·‖T‖_F`. Returns the orthonormal coordinates either way.
pub fn in_span(t: &CMatrix, basis: &SpanBasis, tol: &Tolerances) -> Result<(bool, Vec<C64>)> {
    if basis.rank() == 0 {
        return Ok((t.is_zero(), Vec::new()));
    }
    if t.shape() != basis.shape() {
        return Err(Error::ShapeMismatch {
            expected: basis.shape(),
            found: t.shape(),
        });
    }
    let coords = basis.coordinates(t);
    let mut residual = t.data().to_vec();
    for (b, c) in basis.basis.iter().zip(&coords) {
        for (r, x) in residual.iter_mut().zip(b.data()) {
            *r -= x * c;
        }
    }
    let norm = libm::sqrt(residual.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let member = norm <= tol.rank_tol * t.frobenius_norm();
    Ok((member, coords))
}

/// Orthonormal basis of `{v : ‖Lv‖ ≤ rank_tol·‖L‖·‖v‖}`, as column vectors.
///
/// Built as the orthogonal complement of the numerically significant right
/// singular vectors, so `rank + nullity = cols` holds by construction.
pub fn nullspace(l: &CMatrix, tol: &Tolerances) -> SpanBasis {
    let n = l.cols();
    let (sigma, v) = right_svd(l);
    let rank = numerical_rank(&sigma, tol);
    let mut row_space: Vec<Vec<C64>> = (0..rank).map(|j| v.column_vec(j)).collect();
    orthonormalize(&mut row_space);

    let mut projector = CMatrix::identity(n);
    for v in &row_space {
        for i in 0..n {
            for j in 0..n {
                projector[(i, j)] -= v[i] * v[j].conj();
            }
        }
    }
    let complement = thin_svd(&projector);
    let mut kernel: Vec<Vec<C64>> = (0..n - rank)
        .map(|j| complement.u.column_vec(j))
        .collect();
    orthonormalize(&mut kernel);

    SpanBasis {
        rows: n,
        cols: 1,
        basis: kernel.into_iter().map(CMatrix::column).collect(),
        singular_values: vec![1.0; n - rank],
        generator_map: None,
    }
}
