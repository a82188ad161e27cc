//! Faces of the cone of positive maps.
//!
//! `G_{xi,x}` collects the positive maps sending `xi xi*` to a nonnegative
//! multiple of `xx*`; `F_{eta,y}` those with `phi(eta eta*) y = 0`. Membership
//! is a direct evaluation; searching for some `G` face containing a map is a
//! nonconvex local search, so a negative answer is evidence only.

use crate::error::{Error, Result};
use crate::linalg::{self, outer, ComplexMatrix, Ket, ToleranceConfig, C64};
use crate::mapcore::{choi_example, LinearMap};
use crate::random;

/// Face selector.
#[derive(Debug, Clone, PartialEq)]
pub enum FaceSpec {
    G { xi: Ket, x: Ket },
    F { eta: Ket, y: Ket },
}

fn unit_tol(tol: &ToleranceConfig) -> f64 {
    tol.eps_eq.max(1e-12)
}

/// `(phi in G_{xi,x}, lambda)`: membership holds when
/// `||Y - <x,Yx> xx*|| <= eps_eq max(1, ||Y||)` for `Y = phi(xi xi*)`;
/// `lambda = max(0, Re <x,Yx>)`.
pub fn in_g(phi: &LinearMap, xi: &Ket, x: &Ket, tol: &ToleranceConfig) -> Result<(bool, f64)> {
    xi.require_unit(unit_tol(tol))?;
    x.require_unit(unit_tol(tol))?;
    check_dims(phi, xi, x)?;
    let y = phi.apply_outer(xi, xi);
    let a = y.sandwich(x, x);
    let residual = (&y - &outer(x, x).scale(a)).frobenius_norm();
    let member = residual <= tol.eps_eq * y.frobenius_norm().max(1.0) && a.re >= -tol.eps_psd;
    Ok((member, a.re.max(0.0)))
}

/// `phi in F_{eta,y}`: `||phi(eta eta*) y|| <= eps_eq max(1, ||phi||)`.
pub fn in_f(phi: &LinearMap, eta: &Ket, y: &Ket, tol: &ToleranceConfig) -> Result<bool> {
    eta.require_unit(unit_tol(tol))?;
    y.require_unit(unit_tol(tol))?;
    check_dims(phi, eta, y)?;
    let v = phi.apply_outer(eta, eta).mul_ket(y);
    Ok(v.norm() <= tol.eps_eq * phi.norm().max(1.0))
}

/// Membership in either kind of face.
pub fn in_face(phi: &LinearMap, face: &FaceSpec, tol: &ToleranceConfig) -> Result<bool> {
    match face {
        FaceSpec::G { xi, x } => Ok(in_g(phi, xi, x, tol)?.0),
        FaceSpec::F { eta, y } => in_f(phi, eta, y, tol),
    }
}

fn check_dims(phi: &LinearMap, a: &Ket, b: &Ket) -> Result<()> {
    if a.dim() != phi.dim_in() || b.dim() != phi.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of dims ({}, {}) for a map {} -> {}",
            a.dim(),
            b.dim(),
            phi.dim_in(),
            phi.dim_out()
        )));
    }
    Ok(())
}

/// Outcome of [`find_g_membership`].
#[derive(Debug, Clone, PartialEq)]
pub struct GSearch {
    /// `(xi, x, lambda)` with `phi(xi xi*) ~ lambda xx*`, when found.
    pub found: Option<(Ket, Ket, f64)>,
    /// Smallest second-largest eigenvalue of `phi(xi xi*)` seen.
    pub best_second_eigenvalue: f64,
    pub restarts_used: usize,
}

/// Searches for a face `G_{xi,x}` containing `phi` by minimizing the
/// second-largest eigenvalue of `phi(xi xi*)`.
///
/// The search alternates two exact updates on the surrogate
/// `Tr phi(xi xi*) - <y, phi(xi xi*) y>`, which bounds the second eigenvalue
/// from above for positive maps: for fixed `y` the best `xi` is an extreme
/// eigenvector of a `k x k` matrix, and for fixed `xi` the best `y` is the top
/// eigenvector. Starts are the standard basis vectors, then random unit
/// vectors, `restarts` in total.
pub fn find_g_membership(phi: &LinearMap, tol: &ToleranceConfig, restarts: usize, seed: u64) -> Result<GSearch> {
    if phi.is_zero() {
        return Err(Error::ZeroMap);
    }
    let k = phi.dim_in();
    let mut rng = random::rng_from_seed(seed);
    // T_ij = Tr phi(E_ij)
    let t = ComplexMatrix::from_fn(k, k, |i, j| phi.block(i, j).trace());
    let mut best = f64::INFINITY;
    let runs = restarts.max(1);
    for run in 0..runs {
        let mut xi = if run < k { Ket::basis(k, run) } else { random::unit_ket(&mut rng, k) };
        let mut prev = f64::INFINITY;
        for _ in 0..tol.max_iters.max(1) {
            let y_mat = phi.apply_outer(&xi, &xi);
            let eig = linalg::eig_hermitian(&y_mat)?;
            let n = eig.values.len();
            let top = eig.max();
            let second = if n >= 2 { eig.values[n - 2] } else { 0.0 };
            best = best.min(second);
            if second <= found_threshold(tol, top) {
                let x = eig.vectors[n - 1].clone();
                return Ok(GSearch { found: Some((xi, x, top.max(0.0))), best_second_eigenvalue: second, restarts_used: run + 1 });
            }
            let surrogate = y_mat.trace().re - top;
            if prev - surrogate <= tol.opt_tol {
                break;
            }
            prev = surrogate;
            let y = &eig.vectors[n - 1];
            // N_ij = <y, phi(E_ij) y>; objective in zeta = conj(xi) is zeta*(T - N)zeta.
            let nmat = ComplexMatrix::from_fn(k, k, |i, j| phi.block(i, j).sandwich(y, y));
            let e2 = linalg::eig_hermitian(&(&t - &nmat))?;
            xi = e2.vectors[0].conj();
        }
    }
    Ok(GSearch { found: None, best_second_eigenvalue: best, restarts_used: runs })
}

fn found_threshold(tol: &ToleranceConfig, top: f64) -> f64 {
    tol.eps_psd * top.abs().max(1.0)
}

/// One of the rank-one projections the 3x3 example map sends to a rank-two
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalProjection {
    pub projection: ComplexMatrix,
    pub value: ComplexMatrix,
    pub rank: usize,
}

/// The four rank-one projections `E_11`, `E_22`, `E_33` and the all-`1/3`
/// matrix, with their images under [`choi_example`] and the image ranks.
///
/// Note: the all-`1/3` projection is one member of a family. For
/// `xi = (e^{ia}, e^{ib}, e^{ic}) / sqrt(3)` the image is `I - xi xi*`, also of
/// rank two; only the real representative is listed here.
pub fn choi_exceptional_projections(tol: &ToleranceConfig) -> Vec<ExceptionalProjection> {
    let phi = choi_example();
    let third = C64::new(1.0 / 3.0, 0.0);
    let mut ps: Vec<ComplexMatrix> = vec![ComplexMatrix::from_fn(3, 3, |_, _| third)];
    ps.extend((0..3).map(|i| ComplexMatrix::unit(3, i, i)));
    ps.into_iter()
        .map(|p| {
            let value = phi.apply(&p).expect("3x3 input");
            let rank = linalg::numerical_rank(&value, tol);
            ExceptionalProjection { projection: p, value, rank }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapcore::{from_functional, from_kraus, identity_map, zero_map};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn g_membership_examples() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0], &[1.0, 0.0, -1.0]]);
        let xi = Ket::from_real(&[1.0, 1.0, 1.0]).normalized().unwrap();
        let bx = b.mul_ket(&xi);
        let (m, lam) = in_g(&from_kraus(&b), &xi, &bx.normalized().unwrap(), &tol()).unwrap();
        assert!(m && (lam - bx.norm_sqr()).abs() < 1e-12);
        let e1 = Ket::basis(3, 0);
        assert!(!in_g(&choi_example(), &e1, &e1, &tol()).unwrap().0);
        assert_eq!(in_g(&zero_map(3, 3), &e1, &e1, &tol()).unwrap(), (true, 0.0));
        assert!(matches!(in_g(&choi_example(), &Ket::from_real(&[1.0, 1.0, 0.0]), &e1, &tol()), Err(Error::NotUnit(_))));
    }

    #[test]
    fn f_membership_examples() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[2.0, -2.0]]);
        let eta = Ket::from_real(&[1.0, 1.0]).normalized().unwrap();
        let y = Ket::from_real(&[0.6, 0.8]);
        assert!(in_f(&from_kraus(&b), &eta, &y, &tol()).unwrap());
        assert!(!in_f(&identity_map(2), &y, &y, &tol()).unwrap());
        assert!(in_f(&choi_example(), &Ket::basis(3, 0), &Ket::basis(3, 2), &tol()).unwrap());
    }

    #[test]
    fn search_finds_faces_of_rank_one_maps() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let r = find_g_membership(&from_kraus(&b), &tol(), 5, 0).unwrap();
        let (xi, x, lam) = r.found.unwrap();
        assert!(in_g(&from_kraus(&b), &xi, &x, &tol()).unwrap().0 && lam > 0.0);
        let q = outer(&Ket::basis(2, 1), &Ket::basis(2, 1));
        let f = from_functional(&ComplexMatrix::diag_real(&[1.0, 2.0]), &q, &tol()).unwrap();
        assert!(find_g_membership(&f, &tol(), 3, 0).unwrap().found.is_some());
        assert_eq!(find_g_membership(&zero_map(2, 2), &tol(), 3, 0).unwrap_err(), Error::ZeroMap);
    }

    #[test]
    fn choi_map_lies_in_no_g_face() {
        let r = find_g_membership(&choi_example(), &tol(), 40, 0).unwrap();
        assert!(r.found.is_none());
        assert!(r.best_second_eigenvalue > 1e-3, "{}", r.best_second_eigenvalue);
    }

    #[test]
    fn exceptional_projections_have_rank_two_images() {
        let list = choi_exceptional_projections(&tol());
        assert_eq!(list.len(), 4);
        assert!(list.iter().all(|e| e.rank == 2));
        assert_eq!(list[2].value, ComplexMatrix::diag_real(&[0.0, 1.0, 1.0]));
    }
}
