//! Positivity classes of a map.
//!
//! Positivity and k-positivity are tested through the Choi matrix: `phi` is
//! k-positive exactly when `<w, J w> >= 0` for every `w` of Schmidt rank at
//! most k, and `<y, phi(xi xi*) y> = <conj(xi) (x) y, J conj(xi) (x) y>`. The
//! search alternates exact eigenvector updates over the two tensor factors,
//! so a negative value is a certificate of non-membership while a
//! nonnegative value is only evidence.
//!
//! Complete (co)positivity is a spectral test on `J` (resp. its partial
//! transpose). Local complete (co)positivity is probed by Schwarz-type defects
//! over a grid of scale factors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Ket, ToleranceConfig, C64, ZERO};
use crate::mapcore::LinearMap;
use crate::random::{self, SeededRng};

/// Result of a see-saw minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptReport {
    pub best_value: f64,
    /// Schmidt components `(xi_m, y_m)` of the best vector
    /// `w = sum_m conj(xi_m) (x) y_m`, normalized so that `||w|| = 1`.
    pub witness: Vec<(Ket, Ket)>,
    pub restarts_used: usize,
    /// Whether the best restart stopped on the improvement criterion rather
    /// than the iteration cap.
    pub converged: bool,
}

/// Assembles `w = sum_m conj(xi_m) (x) y_m`.
pub fn schmidt_vector(witness: &[(Ket, Ket)]) -> Ket {
    let (k, h) = witness.first().map_or((0, 0), |(a, b)| (a.dim(), b.dim()));
    let mut w = vec![ZERO; k * h];
    for (xi, y) in witness {
        for i in 0..k {
            let a = xi[i].conj();
            for b in 0..h {
                w[i * h + b] += a * y[b];
            }
        }
    }
    Ket::from_vec_unchecked(w)
}

/// `<w, J w>` for the Schmidt vector of `witness`, relative to `||w||^2`.
pub fn evaluate_witness(phi: &LinearMap, witness: &[(Ket, Ket)]) -> f64 {
    let w = schmidt_vector(witness);
    let j = phi.to_choi();
    j.sandwich(&w, &w).re / w.norm_sqr()
}

/// Minimum of `<y, phi(xi xi*) y>` over unit `xi`, `y` found by the see-saw.
pub fn min_product_value(phi: &LinearMap, tol: &ToleranceConfig, restarts: usize, seed: u64) -> Result<OptReport> {
    min_schmidt_k_value(phi, 1, tol, restarts, seed)
}

/// Minimum of `<w, J w>` over unit `w` of Schmidt rank at most `s`.
pub fn min_schmidt_k_value(
    phi: &LinearMap,
    s: usize,
    tol: &ToleranceConfig,
    restarts: usize,
    seed: u64,
) -> Result<OptReport> {
    let (k, h) = (phi.dim_in(), phi.dim_out());
    let smax = k.min(h);
    if s == 0 || s > smax {
        return Err(Error::BadSchmidtRank { s, max: smax });
    }
    let j = phi.to_choi().hermitian_part();
    let mut rng = random::rng_from_seed(seed);
    let mut best: Option<(f64, Vec<(Ket, Ket)>, bool)> = None;
    let runs = restarts.max(1);
    for _ in 0..runs {
        let (value, p, q, converged) = seesaw_run(&j, k, h, s, tol, &mut rng)?;
        let better = match &best {
            None => true,
            Some((v, _, _)) => value < *v,
        };
        if better {
            let witness = (0..s).map(|m| (p[m].conj(), q[m].clone())).collect();
            best = Some((value, witness, converged));
        }
        if s == smax {
            // A single exact eigensolve; further restarts are redundant.
            break;
        }
    }
    let (best_value, witness, converged) = best.expect("at least one run");
    Ok(OptReport { best_value, witness, restarts_used: runs, converged })
}

/// `w = sum_m p_m (x) q_m` as an element of `C^k (x) C^h`.
fn tensor_sum(p: &[Ket], q: &[Ket], k: usize, h: usize) -> Ket {
    let mut w = vec![ZERO; k * h];
    for (pm, qm) in p.iter().zip(q) {
        for i in 0..k {
            for b in 0..h {
                w[i * h + b] += pm[i] * qm[b];
            }
        }
    }
    Ket::from_vec_unchecked(w)
}

/// Restriction of `J` to vectors `sum_m p_m (x) q_m` with the `p_m`
/// orthonormal and fixed: returns the `(s h) x (s h)` matrix in the
/// coordinates `vec(q)`. With `first_fixed = false` the roles of the factors
/// are exchanged.
fn reduced_form(j: &ComplexMatrix, fixed: &[Ket], k: usize, h: usize, first_fixed: bool) -> ComplexMatrix {
    let s = fixed.len();
    let free = if first_fixed { h } else { k };
    let n = k * h;
    // Columns of the isometry A: column (m, b) = fixed_m (x) e_b  (or e_b (x) fixed_m).
    let cols: Vec<Vec<(usize, C64)>> = (0..s * free)
        .map(|idx| {
            let (m, b) = (idx / free, idx % free);
            let f = &fixed[m];
            if first_fixed {
                (0..k).filter(|&i| f[i] != ZERO).map(|i| (i * h + b, f[i])).collect()
            } else {
                (0..h).filter(|&a| f[a] != ZERO).map(|a| (b * h + a, f[a])).collect()
            }
        })
        .collect();
    // J A
    let ja: Vec<Vec<C64>> = cols
        .iter()
        .map(|col| {
            let mut v = vec![ZERO; n];
            for &(row, coef) in col {
                for r in 0..n {
                    v[r] += j[(r, row)] * coef;
                }
            }
            v
        })
        .collect();
    ComplexMatrix::from_fn(s * free, s * free, |r, c| cols[r].iter().map(|&(row, coef)| coef.conj() * ja[c][row]).sum())
}

fn split_columns(v: &Ket, s: usize, len: usize) -> Vec<Ket> {
    (0..s).map(|m| Ket::from_vec_unchecked(v.as_slice()[m * len..(m + 1) * len].to_vec())).collect()
}

/// Orthonormalizes `a` (Gram-Schmidt) and moves the triangular factor onto
/// `b`, preserving `sum_m a_m (x) b_m`.
fn rebalance(a: &[Ket], b: &[Ket]) -> (Vec<Ket>, Vec<Ket>) {
    let s = a.len();
    let mut qs: Vec<Ket> = Vec::with_capacity(s);
    // a_m = sum_{l <= m} r_{l m} q_l
    let mut r = vec![vec![ZERO; s]; s];
    for m in 0..s {
        let mut v = a[m].clone();
        for (l, ql) in qs.iter().enumerate() {
            let c = ql.dot(&v);
            r[l][m] += c;
            v = v.axpy(-c, ql);
        }
        let nv = v.norm();
        if nv > 1e-14 {
            r[m][m] = C64::new(nv, 0.0);
            qs.push(v.scale(C64::new(1.0 / nv, 0.0)));
        } else {
            // Degenerate column: complete with any vector orthogonal to the rest.
            let dim = v.dim();
            let fill = (0..dim)
                .map(|i| Ket::basis(dim, i))
                .map(|e| qs.iter().fold(e, |acc, q| {
                    let c = q.dot(&acc);
                    acc.axpy(-c, q)
                }))
                .find(|e| e.norm() > 1e-6)
                .and_then(|e| e.normalized())
                .unwrap_or_else(|| Ket::zeros(dim));
            qs.push(fill);
        }
    }
    // sum_m a_m (x) b_m = sum_l q_l (x) (sum_m r_{lm} b_m)
    let dim_b = b[0].dim();
    let nb = (0..s)
        .map(|l| {
            let mut v = Ket::zeros(dim_b);
            for m in 0..s {
                if r[l][m] != ZERO {
                    v = v.axpy(r[l][m], &b[m]);
                }
            }
            v
        })
        .collect();
    (qs, nb)
}

type SeesawOutcome = (f64, Vec<Ket>, Vec<Ket>, bool);

fn seesaw_run(j: &ComplexMatrix, k: usize, h: usize, s: usize, tol: &ToleranceConfig, rng: &mut SeededRng) -> Result<SeesawOutcome> {
    let mut p: Vec<Ket> = (0..s).map(|_| random::gaussian_ket(rng, k)).collect();
    let mut q: Vec<Ket> = (0..s).map(|_| random::gaussian_ket(rng, h)).collect();
    // With s = k a fixed orthonormal first factor spans everything, so the
    // first half-step is already exact; likewise for s = h on the other side.
    let q_first = s == k || s != h;
    let mut value = f64::INFINITY;
    let mut converged = false;
    for iter in 0..tol.max_iters.max(1) {
        let before = value;
        for half in 0..2 {
            let update_q = (half == 0) == q_first;
            if update_q {
                let (pp, _) = rebalance(&p, &q);
                p = pp;
                let eig = linalg::eig_hermitian(&reduced_form(j, &p, k, h, true))?;
                value = eig.values[0];
                q = split_columns(&eig.vectors[0], s, h);
            } else {
                let (qq, _) = rebalance(&q, &p);
                q = qq;
                let eig = linalg::eig_hermitian(&reduced_form(j, &q, k, h, false))?;
                value = eig.values[0];
                p = split_columns(&eig.vectors[0], s, k);
            }
        }
        if iter > 0 && before - value <= tol.opt_tol {
            converged = true;
            break;
        }
        if s == k.min(h) {
            converged = true;
            break;
        }
    }
    // Re-evaluate on the final vector so the report matches its witness.
    let w = tensor_sum(&p, &q, k, h);
    let val = j.sandwich(&w, &w).re / w.norm_sqr();
    let scale = C64::new(1.0 / w.norm(), 0.0);
    let q = q.iter().map(|v| v.scale(scale)).collect();
    Ok((val, p, q, converged))
}

/// `(lambda_min(J) >= -eps_psd, lambda_min(J))`.
pub fn is_completely_positive(phi: &LinearMap, tol: &ToleranceConfig) -> (bool, f64) {
    let m = linalg::min_eigenvalue(&phi.to_choi()).expect("Choi matrix is square and finite");
    (m >= -tol.eps_psd, m)
}

/// Same test on the partially transposed Choi matrix.
pub fn is_completely_copositive(phi: &LinearMap, tol: &ToleranceConfig) -> (bool, f64) {
    is_completely_positive(&phi.compose_transpose(), tol)
}

/// Sampling configuration for the Schwarz-defect search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchwarzConfig {
    pub gamma_grid: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for SchwarzConfig {
    fn default() -> Self {
        SchwarzConfig { gamma_grid: (-8..=8).map(|e| 2f64.powi(e)).collect(), sample_count: 200, seed: 0 }
    }
}

/// Outcome of a Schwarz-defect search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchwarzReport {
    /// Largest grid value whose worst defect is at least `-eps_psd`.
    pub best_gamma: Option<f64>,
    /// `(gamma, worst smallest eigenvalue of the defect)` for every grid point.
    pub per_gamma: Vec<(f64, f64)>,
}

/// Defect `gamma phi(X*X) - gamma^2 phi(X*) phi(X)` of the Schwarz-type
/// inequality, minimized over sampled contractions `X`.
pub fn schwarz_defect(phi: &LinearMap, cfg: &SchwarzConfig, tol: &ToleranceConfig) -> Result<SchwarzReport> {
    schwarz_search(phi, cfg, tol, false)
}

/// Mirror of [`schwarz_defect`] with `phi(X X*)` in place of `phi(X*X)`.
pub fn schwarz_co_defect(phi: &LinearMap, cfg: &SchwarzConfig, tol: &ToleranceConfig) -> Result<SchwarzReport> {
    schwarz_search(phi, cfg, tol, true)
}

/// Contractions used to probe the Schwarz inequalities: the identity, all
/// matrix units, then Gaussian matrices scaled to unit operator norm.
pub fn schwarz_samples(k: usize, count: usize, seed: u64) -> Vec<ComplexMatrix> {
    let mut out = vec![ComplexMatrix::identity(k)];
    for i in 0..k {
        for j in 0..k {
            out.push(ComplexMatrix::unit(k, i, j));
        }
    }
    let mut rng = random::rng_from_seed(seed);
    for _ in 0..count {
        let g = random::gaussian_matrix(&mut rng, k, k);
        let top = linalg::singular_values(&g)[0];
        out.push(g.scale_real(1.0 / top));
    }
    out
}

fn schwarz_search(phi: &LinearMap, cfg: &SchwarzConfig, tol: &ToleranceConfig, co: bool) -> Result<SchwarzReport> {
    if cfg.gamma_grid.is_empty() || cfg.gamma_grid.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::EmptyGrid);
    }
    let samples = schwarz_samples(phi.dim_in(), cfg.sample_count, cfg.seed);
    let pairs: Vec<(ComplexMatrix, ComplexMatrix)> = samples
        .iter()
        .map(|x| {
            let xa = x.adjoint();
            let sq = if co { x * &xa } else { &xa * x };
            let first = phi.apply(&sq).expect("sample has input dimension");
            let prod = &phi.apply(&xa).expect("sample has input dimension") * &phi.apply(x).expect("sample has input dimension");
            (first, prod)
        })
        .collect();
    let mut per_gamma = Vec::with_capacity(cfg.gamma_grid.len());
    for &g in &cfg.gamma_grid {
        let mut worst = f64::INFINITY;
        for (first, prod) in &pairs {
            let d = &first.scale_real(g) - &prod.scale_real(g * g);
            worst = worst.min(linalg::min_eigenvalue(&d)?);
        }
        per_gamma.push((g, worst));
    }
    let best_gamma = per_gamma.iter().filter(|(_, w)| *w >= -tol.eps_psd).map(|(g, _)| *g).fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g))));
    Ok(SchwarzReport { best_gamma, per_gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapcore::{self, choi_example, from_kraus, identity_map, scale_add, transpose_map, zero_map};

    #[test]
    fn transpose_map_is_positive_with_zero_minimum() {
        let r = min_product_value(&transpose_map(2), &ToleranceConfig::default(), 10, 1).unwrap();
        assert!(r.best_value.abs() < 1e-9, "{}", r.best_value);
        assert!((evaluate_witness(&transpose_map(2), &r.witness) - r.best_value).abs() < 1e-9);
    }

    #[test]
    fn choi_map_is_positive_but_not_two_positive() {
        let tol = ToleranceConfig::default();
        let phi = choi_example();
        let r1 = min_product_value(&phi, &tol, 50, 0).unwrap();
        assert!(r1.best_value >= -1e-9, "{}", r1.best_value);
        let r2 = min_schmidt_k_value(&phi, 2, &tol, 20, 0).unwrap();
        assert!(r2.best_value < -1e-6, "{}", r2.best_value);
        assert!((evaluate_witness(&phi, &r2.witness) - r2.best_value).abs() < 1e-9);
    }

    #[test]
    fn negated_cp_map_is_not_positive() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let neg = scale_add(-1.0, &from_kraus(&b), 0.0, &zero_map(2, 2)).unwrap();
        assert!(min_product_value(&neg, &ToleranceConfig::default(), 5, 3).unwrap().best_value < 0.0);
    }

    #[test]
    fn full_schmidt_rank_is_min_eigenvalue() {
        let tol = ToleranceConfig::default();
        for phi in [choi_example(), transpose_map(3)] {
            let r = min_schmidt_k_value(&phi, 3, &tol, 3, 5).unwrap();
            let lmin = linalg::min_eigenvalue(&phi.to_choi()).unwrap();
            assert!((r.best_value - lmin).abs() < 1e-10, "{} vs {lmin}", r.best_value);
        }
        let phi = from_kraus(&ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[1.0, 1.0]]));
        assert!(min_schmidt_k_value(&phi, 2, &tol, 5, 0).unwrap().best_value >= -1e-9);
        assert!(matches!(min_schmidt_k_value(&phi, 3, &tol, 1, 0), Err(Error::BadSchmidtRank { s: 3, max: 2 })));
    }

    #[test]
    fn complete_positivity_examples() {
        let tol = ToleranceConfig::default();
        let (cp, m) = is_completely_positive(&choi_example(), &tol);
        assert!(!cp && m < 0.0);
        let (cp, m) = is_completely_positive(&transpose_map(2), &tol);
        assert!(!cp && (m + 1.0).abs() < 1e-12);
        assert!(is_completely_copositive(&transpose_map(2), &tol).0);
        assert!(!is_completely_copositive(&choi_example(), &tol).0);
        let c = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 0.5]]);
        assert!(is_completely_copositive(&mapcore::from_cokraus(&c), &tol).0);
    }

    #[test]
    fn schwarz_examples() {
        let tol = ToleranceConfig::default();
        let cfg = SchwarzConfig { gamma_grid: vec![0.5, 1.0], sample_count: 50, seed: 2 };
        let two_id = scale_add(2.0, &identity_map(2), 0.0, &identity_map(2)).unwrap();
        let r = schwarz_defect(&two_id, &cfg, &tol).unwrap();
        assert!((r.per_gamma[1].1 + 2.0).abs() < 1e-12);
        assert_eq!(r.best_gamma, Some(0.5));
        assert_eq!(schwarz_defect(&zero_map(2, 2), &cfg, &tol).unwrap().best_gamma, Some(1.0));
        let co = schwarz_co_defect(&transpose_map(2), &cfg, &tol).unwrap();
        assert!(co.per_gamma[1].1 >= -1e-10);
        let empty = SchwarzConfig { gamma_grid: vec![], ..cfg };
        assert_eq!(schwarz_defect(&zero_map(2, 2), &empty, &tol).unwrap_err(), Error::EmptyGrid);
    }
}
