//! Dense complex linear algebra.
//!
//! Matrices are small (the Choi matrix of a map between 3x3 and 3x3 matrices
//! is 9x9; nothing here is meant for dimensions much beyond 100), so every
//! kernel is a straightforward dense loop. The Hermitian eigensolver is cyclic
//! Jacobi and singular values come from one-sided Jacobi, both deterministic
//! for a given input.
//!
//! The involution on the underlying Hilbert spaces is entrywise complex
//! conjugation in the standard basis. With that choice `X^T` is the plain
//! matrix transpose.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Named numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Eigenvalue cutoff: a Hermitian matrix is PSD when its smallest
    /// eigenvalue is at least `-eps_psd`.
    pub eps_psd: f64,
    /// Relative singular-value cutoff used by [`numerical_rank`].
    pub eps_rank: f64,
    /// Tolerance for entrywise / normwise equality tests.
    pub eps_eq: f64,
    /// Optimizer stopping threshold.
    pub opt_tol: f64,
    /// Iteration cap for iterative searches.
    pub max_iters: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eps_psd: 1e-8,
            eps_rank: 1e-8,
            eps_eq: 1e-9,
            opt_tol: 1e-10,
            max_iters: 1000,
        }
    }
}

impl ToleranceConfig {
    /// Checks the invariants: everything nonnegative and finite, `opt_tol > 0`.
    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_psd, self.eps_rank, self.eps_eq, self.opt_tol];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) || self.opt_tol <= 0.0 {
            return Err(Error::BadParams(format!("invalid tolerances {self:?}")));
        }
        Ok(())
    }
}

fn all_finite(data: &[C64]) -> bool {
    data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A column vector in `C^dim`.
#[derive(Clone, PartialEq)]
pub struct Ket {
    data: Vec<C64>,
}

impl Ket {
    pub fn new(data: Vec<C64>) -> Result<Ket> {
        if !all_finite(&data) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Ket { data })
    }

    /// Builds a ket from real coordinates.
    pub fn from_real(data: &[f64]) -> Ket {
        Ket { data: data.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub(crate) fn from_vec_unchecked(data: Vec<C64>) -> Ket {
        Ket { data }
    }

    pub fn zeros(dim: usize) -> Ket {
        Ket { data: vec![ZERO; dim] }
    }

    /// Standard basis vector `e_i` of `C^dim` (zero-based index).
    pub fn basis(dim: usize, i: usize) -> Ket {
        let mut k = Ket::zeros(dim);
        k.data[i] = ONE;
        k
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    /// Inner product `<self, other>`, conjugate-linear in `self`.
    pub fn dot(&self, other: &Ket) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Ket> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            None
        } else {
            Some(self.scale(C64::new(1.0 / n, 0.0)))
        }
    }

    /// Entrywise complex conjugate (the fixed involution).
    pub fn conj(&self) -> Ket {
        Ket { data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, c: C64) -> Ket {
        Ket { data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &Ket) -> Ket {
        Ket { data: self.data.iter().zip(&other.data).map(|(a, b)| a + c * b).collect() }
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub(crate) fn require_unit(&self, tol: f64) -> Result<()> {
        if self.is_unit(tol) {
            Ok(())
        } else {
            Err(Error::NotUnit(self.norm()))
        }
    }
}

impl Index<usize> for Ket {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Ket {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ket{:?}", self.data)
    }
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<ComplexMatrix> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !all_finite(&data) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> ComplexMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Real matrix from nested rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Diagonal matrix with the given real entries.
    pub fn diag_real(d: &[f64]) -> ComplexMatrix {
        let n = d.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO })
    }

    /// Matrix unit `E_ij` of size `n` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    /// Matrix whose columns are the given kets.
    pub fn from_columns(cols: &[Ket]) -> ComplexMatrix {
        let rows = cols.first().map_or(0, Ket::dim);
        ComplexMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare(self.rows, self.cols))
        }
    }

    pub fn column(&self, c: usize) -> Ket {
        Ket::from_vec_unchecked((0..self.rows).map(|r| self[(r, c)]).collect())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Plain transpose.
    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, c: C64) -> ComplexMatrix {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> ComplexMatrix {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(H + H*)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (r..self.cols).all(|c| (self[(r, c)] - self[(c, r)].conj()).norm() <= tol))
    }

    /// Matrix-vector product.
    pub fn mul_ket(&self, v: &Ket) -> Ket {
        assert_eq!(self.cols, v.dim(), "mul_ket dimension mismatch");
        let data = (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        Ket::from_vec_unchecked(data)
    }

    /// `<x, self y>`.
    pub fn sandwich(&self, x: &Ket, y: &Ket) -> C64 {
        x.dot(&self.mul_ket(y))
    }

    /// Frobenius inner product `Tr(self* other)`.
    pub fn inner(&self, other: &ComplexMatrix) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Kronecker product.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r2, c2) = (other.rows, other.cols);
        ComplexMatrix::from_fn(self.rows * r2, self.cols * c2, |r, c| self[(r / r2, c / c2)] * other[(r % r2, c % c2)])
    }

    /// Copy of the `size x size` block at block position `(bi, bj)`.
    pub fn block(&self, bi: usize, bj: usize, size: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(size, size, |r, c| self[(bi * size + r, bj * size + c)])
    }

    pub fn max_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[i]` belonging to `values[i]`.
    pub vectors: Vec<Ket>,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Reassembles `sum_i f(lambda_i) v_i v_i*`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lam, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lam);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v[r] * w;
                for c in 0..n {
                    out[(r, c)] += vr * v[c].conj();
                }
            }
        }
        out
    }
}

/// Unitary Jacobi rotation parameters annihilating the off-diagonal pair
/// `(a, b, g)` = (diag p, diag q, |offdiag pq|).
fn jacobi_angle(a: f64, b: f64, g: f64) -> (f64, f64) {
    let zeta = (b - a) / (2.0 * g);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized to `(H + H*)/2` first.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<Eigen> {
    let n = h.require_square()?;
    if !all_finite(&h.data) {
        return Err(Error::NonFinite("eig_hermitian input"));
    }
    let mut a = h.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let off: f64 = (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).filter(|(p, q)| p != q).map(|(p, q)| a[(p, q)].norm_sqr()).sum();
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g <= 1e-300 || g <= 1e-18 * scale {
                        continue;
                    }
                    let phase = apq / g;
                    let (c, s) = jacobi_angle(a[(p, p)].re, a[(q, q)].re, g);
                    // Columns: p <- c p - s conj(phase) q ; q <- s phase p + c q
                    let sp = phase * s;
                    let spc = phase.conj() * s;
                    for r in 0..n {
                        let xp = a[(r, p)];
                        let xq = a[(r, q)];
                        a[(r, p)] = xp * c - xq * spc;
                        a[(r, q)] = xp * sp + xq * c;
                        let vp = v[(r, p)];
                        let vq = v[(r, q)];
                        v[(r, p)] = vp * c - vq * spc;
                        v[(r, q)] = vp * sp + vq * c;
                    }
                    // Rows: p <- c p - s phase q ; q <- s conj(phase) p + c q
                    for col in 0..n {
                        let xp = a[(p, col)];
                        let xq = a[(q, col)];
                        a[(p, col)] = xp * c - xq * sp;
                        a[(q, col)] = xp * spc + xq * c;
                    }
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = order.iter().map(|&i| v.column(i)).collect();
    Ok(Eigen { values, vectors })
}

/// Smallest eigenvalue of the Hermitian part of `h`.
pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.min())
}

/// PSD test: `(min_eig >= -eps_psd, min_eig)`.
pub fn is_psd(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(bool, f64)> {
    let m = min_eigenvalue(h)?;
    Ok((m >= -tol.eps_psd, m))
}

/// Singular values in descending order (one-sided Jacobi).
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let a = if m.rows >= m.cols { m.clone() } else { m.adjoint() };
    let (rows, cols) = (a.rows, a.cols);
    let mut cols_data: Vec<Vec<C64>> = (0..cols).map(|c| (0..rows).map(|r| a[(r, c)]).collect()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha: f64 = cols_data[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols_data[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols_data[p].iter().zip(&cols_data[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-300 || g <= 1e-16 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let (c, s) = jacobi_angle(alpha, beta, g);
                let sp = phase * s;
                let spc = phase.conj() * s;
                let (left, right) = cols_data.split_at_mut(q);
                for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (u, w) = (*xp, *xq);
                    *xp = u * c - w * spc;
                    *xq = u * sp + w * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols_data.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `eps_rank` times the largest one; zero for
/// the zero matrix.
pub fn numerical_rank(m: &ComplexMatrix, tol: &ToleranceConfig) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.eps_rank * top).count()
}

/// `xi eta*`, entry `(a, b) = xi_a conj(eta_b)`.
pub fn outer(xi: &Ket, eta: &Ket) -> ComplexMatrix {
    ComplexMatrix::from_fn(xi.dim(), eta.dim(), |a, b| xi[a] * eta[b].conj())
}

/// `X^T` with respect to the standard-basis conjugation: the plain transpose.
pub fn transpose_inv(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.require_square()?;
    Ok(x.transpose())
}

/// Partial transpose on the first tensor factor of a `(k h) x (k h)` matrix
/// seen as a `k x k` grid of `h x h` blocks: block `(i, j)` of the output is
/// block `(j, i)` of the input.
pub fn partial_transpose_first(j: &ComplexMatrix, k: usize, h: usize) -> Result<ComplexMatrix> {
    let n = k * h;
    if j.rows != n || j.cols != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not a {k}x{k} grid of {h}x{h} blocks",
            j.rows, j.cols
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (bi, a) = (r / h, r % h);
        let (bj, b) = (c / h, c % h);
        j[(bj * h + a, bi * h + b)]
    }))
}

/// Projection of a Hermitian matrix onto the PSD cone (negative eigenvalues
/// clipped to zero).
pub fn psd_projection(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eig_hermitian(h)?.reassemble(|l| l.max(0.0)))
}

/// Euclidean norm of the negative part of a Hermitian matrix.
pub fn negative_part_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(eig_hermitian(h)?.values.iter().filter(|&&l| l < 0.0).map(|l| l * l).sum::<f64>().sqrt())
}

/// Solves the Hermitian positive definite system `A x = b` by Cholesky.
/// Returns `None` when `A` is not numerically positive definite.
pub(crate) fn cholesky_solve_real(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Cholesky factor of a Hermitian positive definite matrix (lower triangular),
/// or `None` if the factorization breaks down.
pub(crate) fn cholesky(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            if i == j {
                if s.re <= 0.0 || !s.re.is_finite() {
                    return None;
                }
                l[(i, i)] = C64::new(s.re.sqrt(), 0.0);
            } else {
                l[(i, j)] = s / l[(j, j)].re;
            }
        }
    }
    Some(l)
}

/// Inverse of a Hermitian positive definite matrix from its Cholesky factor.
pub(crate) fn hpd_inverse(l: &ComplexMatrix) -> ComplexMatrix {
    let n = l.rows;
    // Invert L (lower triangular), then A^-1 = L^-* L^-1.
    let mut linv = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        linv[(c, c)] = C64::new(1.0 / l[(c, c)].re, 0.0);
        for r in (c + 1)..n {
            let mut s = ZERO;
            for k in c..r {
                s += l[(r, k)] * linv[(k, c)];
            }
            linv[(r, c)] = -s / l[(r, r)].re;
        }
    }
    &linv.adjoint() * &linv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let y = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let e = eig_hermitian(&y).unwrap();
        let s5 = 5f64.sqrt();
        assert!((e.values[0] - (5.0 - s5) / 2.0).abs() < 1e-14);
        assert!((e.values[1] - (5.0 + s5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_rectangular_and_nan() {
        assert_eq!(eig_hermitian(&ComplexMatrix::zeros(2, 3)).unwrap_err(), Error::NonSquare(2, 3));
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn psd_examples() {
        let tol = ToleranceConfig { eps_psd: 1e-9, ..Default::default() };
        assert_eq!(is_psd(&ComplexMatrix::identity(3), &tol).unwrap(), (true, 1.0));
        let (flag, m) = is_psd(&ComplexMatrix::diag_real(&[1.0, -1e-3]), &tol).unwrap();
        assert!(!flag && (m + 1e-3).abs() < 1e-15);
    }

    #[test]
    fn rank_examples() {
        let tol = ToleranceConfig::default();
        let xi = Ket::new(vec![c(1.0, 2.0), c(0.0, -1.0)]).unwrap();
        let eta = Ket::new(vec![c(0.5, 0.0), c(3.0, 1.0)]).unwrap();
        assert_eq!(numerical_rank(&outer(&xi, &eta), &tol), 1);
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3, 3), &tol), 0);
        assert_eq!(numerical_rank(&ComplexMatrix::diag_real(&[1.0, 1.0, 0.0]), &tol), 2);
    }

    #[test]
    fn outer_examples() {
        let e1 = Ket::basis(2, 0);
        let e2 = Ket::basis(2, 1);
        assert_eq!(outer(&e1, &e1), ComplexMatrix::unit(2, 0, 0));
        assert_eq!(outer(&e1, &e2), ComplexMatrix::unit(2, 0, 1));
        let s = Ket::from_real(&[1.0, 1.0]).normalized().unwrap();
        let m = outer(&s, &s);
        assert!(m.as_slice().iter().all(|z| (z - c(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(transpose_inv(&ComplexMatrix::unit(2, 0, 1)).unwrap(), ComplexMatrix::unit(2, 1, 0));
        let h = ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(2.0, 3.0), c(2.0, -3.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(transpose_inv(&h).unwrap(), h.conj());
        let a = Ket::new(vec![I, ZERO]).unwrap();
        let b = Ket::basis(2, 1);
        let lhs = transpose_inv(&outer(&a, &b)).unwrap();
        let rhs = outer(&Ket::basis(2, 1), &Ket::new(vec![-I, ZERO]).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partial_transpose_of_swap_is_identity_choi() {
        // SWAP on C^2 (x) C^2
        let mut swap = ComplexMatrix::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                swap[(a * 2 + b, b * 2 + a)] = ONE;
            }
        }
        let pt = partial_transpose_first(&swap, 2, 2).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                expected[(i * 2 + i, j * 2 + j)] = ONE;
            }
        }
        assert_eq!(pt, expected);
        assert!(partial_transpose_first(&swap, 2, 3).is_err());
    }

    #[test]
    fn partial_transpose_keeps_block_diagonal() {
        let d = ComplexMatrix::diag_real(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(partial_transpose_first(&d, 2, 3).unwrap(), d);
    }

    #[test]
    fn singular_values_rectangular() {
        let m = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[0.0, -4.0, 0.0]]);
        let sv = singular_values(&m);
        assert!((sv[0] - 4.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hpd_inverse_matches() {
        let a = ComplexMatrix::new(2, 2, vec![c(4.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]).unwrap();
        let inv = hpd_inverse(&cholesky(&a).unwrap());
        assert!((&a * &inv).max_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }
}
