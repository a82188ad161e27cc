//! The [`LinearMap`] type and its constructors.
//!
//! A map `phi: M_k -> M_h` is stored as the `k x k` grid of its values on
//! matrix units, `block(i, j) = phi(E_ij)`. Kraus and co-Kraus forms are
//! constructors only; every analysis works on the dense blocks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Ket, ToleranceConfig, C64, ZERO};

#[derive(Clone, PartialEq)]
pub struct LinearMap {
    k: usize,
    h: usize,
    blocks: Vec<ComplexMatrix>,
}

impl std::fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LinearMap(k={}, h={}) with Choi matrix {:?}", self.k, self.h, self.to_choi())
    }
}

impl LinearMap {
    /// Builds a map from its `k*k` blocks in row-major grid order.
    pub fn from_blocks(k: usize, h: usize, blocks: Vec<ComplexMatrix>) -> Result<LinearMap> {
        if blocks.len() != k * k {
            return Err(Error::DimensionMismatch(format!("{} blocks for a {k}x{k} grid", blocks.len())));
        }
        if let Some(b) = blocks.iter().find(|b| b.rows() != h || b.cols() != h) {
            return Err(Error::DimensionMismatch(format!("block is {}x{}, expected {h}x{h}", b.rows(), b.cols())));
        }
        Ok(LinearMap { k, h, blocks })
    }

    /// Input dimension `k` (the map acts on `k x k` matrices).
    pub fn dim_in(&self) -> usize {
        self.k
    }

    /// Output dimension `h`.
    pub fn dim_out(&self) -> usize {
        self.h
    }

    /// `phi(E_ij)`, zero-based.
    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * self.k + j]
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// `phi(X) = sum_ij X_ij phi(E_ij)`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.k || x.cols() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, map expects {}x{}",
                x.rows(),
                x.cols(),
                self.k,
                self.k
            )));
        }
        let mut out = ComplexMatrix::zeros(self.h, self.h);
        for i in 0..self.k {
            for j in 0..self.k {
                let c = x[(i, j)];
                if c != ZERO {
                    out = &out + &self.block(i, j).scale(c);
                }
            }
        }
        Ok(out)
    }

    /// `phi(xi eta*)`.
    pub fn apply_outer(&self, xi: &Ket, eta: &Ket) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.h, self.h);
        for i in 0..self.k {
            for j in 0..self.k {
                let c = xi[i] * eta[j].conj();
                if c != ZERO {
                    out = &out + &self.block(i, j).scale(c);
                }
            }
        }
        out
    }

    /// Choi matrix `sum_ij E_ij (x) phi(E_ij)`.
    pub fn to_choi(&self) -> ComplexMatrix {
        let (k, h) = (self.k, self.h);
        ComplexMatrix::from_fn(k * h, k * h, |r, c| self.block(r / h, c / h)[(r % h, c % h)])
    }

    pub fn from_choi(j: &ComplexMatrix, k: usize, h: usize) -> Result<LinearMap> {
        if j.rows() != k * h || j.cols() != k * h {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected {}x{}",
                j.rows(),
                j.cols(),
                k * h,
                k * h
            )));
        }
        let blocks = (0..k * k).map(|b| j.block(b / k, b % k, h)).collect();
        Ok(LinearMap { k, h, blocks })
    }

    /// Frobenius norm of the Choi matrix.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.frobenius_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.as_slice().iter().all(|z| *z == ZERO))
    }

    /// Largest entrywise difference between the Choi blocks of two maps of
    /// equal dimensions.
    pub fn max_diff(&self, other: &LinearMap) -> f64 {
        assert_eq!((self.k, self.h), (other.k, other.h));
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.max_diff(b)).fold(0.0, f64::max)
    }

    /// `block(j, i) = block(i, j)*` within `tol`, i.e. `phi(X*) = phi(X)*`.
    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        (0..self.k).all(|i| (0..self.k).all(|j| self.block(j, i).max_diff(&self.block(i, j).adjoint()) <= tol))
    }

    /// The map `X -> phi(X^T)`; its complete positivity is the complete
    /// copositivity of `phi`.
    pub fn compose_transpose(&self) -> LinearMap {
        let k = self.k;
        let blocks = (0..k * k).map(|b| self.block(b % k, b / k).clone()).collect();
        LinearMap { k, h: self.h, blocks }
    }
}

/// `X -> B X B*` for an `h x k` matrix `B`.
pub fn from_kraus(b: &ComplexMatrix) -> LinearMap {
    let (h, k) = (b.rows(), b.cols());
    let cols: Vec<Ket> = (0..k).map(|j| b.column(j)).collect();
    let blocks = (0..k * k).map(|idx| linalg::outer(&cols[idx / k], &cols[idx % k])).collect();
    LinearMap { k, h, blocks }
}

/// `X -> C X^T C*` for an `h x k` matrix `C`.
pub fn from_cokraus(c: &ComplexMatrix) -> LinearMap {
    from_kraus(c).compose_transpose()
}

/// `X -> Tr(M X) Q` for a PSD `k x k` matrix `M` and a rank-one projection `Q`.
pub fn from_functional(m: &ComplexMatrix, q: &ComplexMatrix, tol: &ToleranceConfig) -> Result<LinearMap> {
    let k = m.require_square()?;
    let h = q.require_square()?;
    if !m.is_hermitian(tol.eps_eq.max(1e-12) * m.max_abs().max(1.0)) {
        return Err(Error::NotPsd(f64::NAN));
    }
    let (ok, min_eig) = linalg::is_psd(m, tol)?;
    if !ok {
        return Err(Error::NotPsd(min_eig));
    }
    check_rank_one_projection(q, tol)?;
    let blocks = (0..k * k).map(|idx| q.scale(m[(idx % k, idx / k)])).collect();
    Ok(LinearMap { k, h, blocks })
}

pub(crate) fn check_rank_one_projection(q: &ComplexMatrix, tol: &ToleranceConfig) -> Result<()> {
    let herm = q.max_diff(&q.adjoint());
    let idem = (q * q).max_diff(q);
    let tr = (q.trace() - C64::new(1.0, 0.0)).norm();
    let residual = herm.max(idem).max(tr);
    if residual > tol.eps_eq.max(1e-12) * 10.0 {
        return Err(Error::NotProjection(residual));
    }
    Ok(())
}

/// The 3x3 map `[a_ij] -> diag(a11+a33, a22+a11, a33+a22) - offdiag(a_ij)`:
/// positive, not completely positive or copositive, and not decomposable.
pub fn choi_example() -> LinearMap {
    let mut blocks = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                // a_ii feeds output diagonal positions i and i+1 (mod 3).
                let mut d = [0.0; 3];
                d[i] = 1.0;
                d[(i + 1) % 3] = 1.0;
                blocks.push(ComplexMatrix::diag_real(&d));
            } else {
                blocks.push(ComplexMatrix::unit(3, i, j).scale_real(-1.0));
            }
        }
    }
    LinearMap { k: 3, h: 3, blocks }
}

pub fn identity_map(n: usize) -> LinearMap {
    from_kraus(&ComplexMatrix::identity(n))
}

pub fn transpose_map(n: usize) -> LinearMap {
    from_cokraus(&ComplexMatrix::identity(n))
}

pub fn zero_map(k: usize, h: usize) -> LinearMap {
    LinearMap { k, h, blocks: vec![ComplexMatrix::zeros(h, h); k * k] }
}

/// `a phi + b rho`, blockwise.
pub fn scale_add(a: f64, phi: &LinearMap, b: f64, rho: &LinearMap) -> Result<LinearMap> {
    if (phi.k, phi.h) != (rho.k, rho.h) {
        return Err(Error::DimensionMismatch(format!(
            "cannot combine maps {}->{} and {}->{}",
            phi.k, phi.h, rho.k, rho.h
        )));
    }
    let blocks = phi.blocks.iter().zip(&rho.blocks).map(|(x, y)| &x.scale_real(a) + &y.scale_real(b)).collect();
    Ok(LinearMap { k: phi.k, h: phi.h, blocks })
}

/// Residual diagnostics attached to a failed rank-one classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierResiduals {
    pub kraus: f64,
    pub cokraus: f64,
    pub functional: f64,
}

/// Outcome of the rank-one classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum MapClass {
    /// `phi(X) = Tr(M X) Q` with `M` PSD and `Q` a rank-one projection.
    Functional { m: ComplexMatrix, q: ComplexMatrix },
    /// `phi(X) = B X B*`.
    Kraus { b: ComplexMatrix },
    /// `phi(X) = C X^T C*`.
    CoKraus { c: ComplexMatrix },
    /// Some rank-one projection `witness witness*` is mapped to a matrix of
    /// rank `observed_rank`. When every structured form failed to verify even
    /// though no rank-2 value was seen, `residuals` records the fits.
    NotRankOne { witness: Ket, observed_rank: usize, residuals: Option<ClassifierResiduals> },
}

impl MapClass {
    /// Short tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            MapClass::Functional { .. } => "functional",
            MapClass::Kraus { .. } => "kraus",
            MapClass::CoKraus { .. } => "cokraus",
            MapClass::NotRankOne { .. } => "not_rank_one",
        }
    }

    /// Rebuilds the map described by a successful classification.
    pub fn rebuild(&self, tol: &ToleranceConfig) -> Option<LinearMap> {
        match self {
            MapClass::Functional { m, q } => {
                let loose = ToleranceConfig { eps_psd: tol.eps_psd.max(1e-8), eps_eq: tol.eps_eq.max(1e-8), ..*tol };
                from_functional(m, q, &loose).ok()
            }
            MapClass::Kraus { b } => Some(from_kraus(b)),
            MapClass::CoKraus { c } => Some(from_cokraus(c)),
            MapClass::NotRankOne { .. } => None,
        }
    }
}
