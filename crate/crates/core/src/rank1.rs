//! Maps that never raise the rank of a rank-one projection.
//!
//! Such a positive map is of one of three forms: `X -> Tr(M X) Q` with `Q` a
//! rank-one projection, `X -> B X B*`, or `X -> C X^T C*`. The classifier
//! recovers the generator constructively from an eigen-seed (see
//! [`crate::minorant`]) and verifies it against every Choi block.
//!
//! The underlying operator lemma concerns
//! `R_lambda = xx* + |lambda|^2 yy* + lambda A + conj(lambda) A*`: if every
//! `R_lambda` has rank at most one, `A` is one of the four forms of
//! [`LemmaCase`]. [`lemma_rank_scan`] tests the hypothesis on a grid and
//! [`lemma_classify`] fits the conclusion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, outer, ComplexMatrix, Ket, ToleranceConfig, C64, ONE, ZERO};
use crate::mapcore::{self, ClassifierResiduals, LinearMap, MapClass};
use crate::minorant;
use crate::random;

/// Which of the two independent-case forms fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `A = mu x y*`.
    XyStar,
    /// `A = mu y x*`.
    YxStar,
}

/// Conclusion of the operator lemma.
#[derive(Debug, Clone, PartialEq)]
pub enum LemmaCase {
    /// `x`, `y` independent and `A = mu x y*` or `A = mu y x*` with `|mu| = 1`.
    IndepXY { mu: C64, orientation: Orientation },
    /// `x != 0`, `x`, `y` dependent, `A = mu x x*`.
    DepX { mu: C64 },
    /// `x = 0 != y`, `A = mu y y*`.
    DepY { mu: C64 },
    /// `x = y = 0` and `A = c w w*` for a unit `w` (`c = 0` allowed).
    BothZero { projection_scale: C64 },
    /// No admissible form; `R_lambda` has rank `rank` at `lambda`.
    NoCase { lambda: C64, rank: usize },
}

/// `xx* + |lambda|^2 yy* + lambda A + conj(lambda) A*`.
pub fn r_lambda(x: &Ket, y: &Ket, a: &ComplexMatrix, lambda: C64) -> ComplexMatrix {
    let mut r = &outer(x, x) + &outer(y, y).scale_real(lambda.norm_sqr());
    r = &r + &a.scale(lambda);
    &r + &a.adjoint().scale(lambda.conj())
}

/// Rank of `R_lambda` with the cutoff taken relative to the size of its
/// terms, so exact cancellations do not turn rounding noise into rank.
fn r_lambda_rank(x: &Ket, y: &Ket, a: &ComplexMatrix, lambda: C64, tol: &ToleranceConfig) -> usize {
    let r = r_lambda(x, y, a, lambda);
    let scale = x.norm_sqr() + lambda.norm_sqr() * y.norm_sqr() + 2.0 * lambda.norm() * a.frobenius_norm();
    if scale == 0.0 {
        return 0;
    }
    linalg::singular_values(&r).iter().filter(|&&s| s > tol.eps_rank * scale).count()
}

/// Result of [`lemma_rank_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaScan {
    pub all_rank_le_1: bool,
    /// `(lambda, rank)` of the first grid point with the largest rank.
    pub worst: (C64, usize),
}

/// The deterministic `lambda` grid: `r e^{i theta}` for `r` in
/// `{1/4, 1/2, 1, 2, 4}` and 32 equispaced angles.
pub fn lambda_grid() -> Vec<C64> {
    let mut out = Vec::with_capacity(160);
    for r in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for t in 0..32 {
            out.push(C64::from_polar(r, 2.0 * std::f64::consts::PI * t as f64 / 32.0));
        }
    }
    out
}

/// Evaluates the rank of `R_lambda` on [`lambda_grid`] plus `lambda_samples`
/// random complex Gaussian values.
pub fn lemma_rank_scan(x: &Ket, y: &Ket, a: &ComplexMatrix, lambda_samples: usize, tol: &ToleranceConfig, seed: u64) -> Result<LemmaScan> {
    let h = x.dim();
    if y.dim() != h || a.rows() != h || a.cols() != h {
        return Err(Error::DimensionMismatch(format!(
            "x: {}, y: {}, A: {}x{}",
            x.dim(),
            y.dim(),
            a.rows(),
            a.cols()
        )));
    }
    let mut rng = random::rng_from_seed(seed);
    let mut lambdas = lambda_grid();
    lambdas.extend((0..lambda_samples).map(|_| random::complex_gaussian(&mut rng)));
    let mut worst = (lambdas[0], 0usize);
    let mut first = true;
    for lam in lambdas {
        let rank = r_lambda_rank(x, y, a, lam, tol);
        if first || rank > worst.1 {
            worst = (lam, rank);
            first = false;
        }
    }
    Ok(LemmaScan { all_rank_le_1: worst.1 <= 1, worst })
}

/// Least-squares `mu` for `A ~ mu F` and the residual `||A - mu F||`.
fn fit(a: &ComplexMatrix, f: &ComplexMatrix) -> (C64, f64) {
    let nf = f.inner(f).re;
    if nf == 0.0 {
        return (ZERO, a.frobenius_norm());
    }
    let mu = f.inner(a) / nf;
    (mu, (a - &f.scale(mu)).frobenius_norm())
}

/// Fits `A` against the admissible forms of the lemma; returns `NoCase` with a
/// rank witness from [`lemma_rank_scan`] when none fits.
pub fn lemma_classify(x: &Ket, y: &Ket, a: &ComplexMatrix, tol: &ToleranceConfig) -> Result<LemmaCase> {
    let h = x.dim();
    if y.dim() != h || a.rows() != h || a.cols() != h {
        return Err(Error::DimensionMismatch("x, y, A sizes differ".into()));
    }
    let accept = tol.eps_eq * a.frobenius_norm().max(1e-300);
    let xy = ComplexMatrix::from_columns(&[x.clone(), y.clone()]);
    let span = linalg::numerical_rank(&xy, tol);
    let fitted = match span {
        2 => {
            let (mu, res) = fit(a, &outer(x, y));
            if res <= accept && (mu.norm() - 1.0).abs() <= tol.eps_eq.max(1e-12) * 10.0 {
                Some(LemmaCase::IndepXY { mu, orientation: Orientation::XyStar })
            } else {
                let (mu, res) = fit(a, &outer(y, x));
                if res <= accept && (mu.norm() - 1.0).abs() <= tol.eps_eq.max(1e-12) * 10.0 {
                    Some(LemmaCase::IndepXY { mu, orientation: Orientation::YxStar })
                } else {
                    None
                }
            }
        }
        1 => {
            if x.norm() > 0.0 && x.norm() >= tol.eps_rank * y.norm() {
                let (mu, res) = fit(a, &outer(x, x));
                (res <= accept || a.frobenius_norm() == 0.0).then_some(LemmaCase::DepX { mu })
            } else {
                let (mu, res) = fit(a, &outer(y, y));
                (res <= accept || a.frobenius_norm() == 0.0).then_some(LemmaCase::DepY { mu })
            }
        }
        _ => {
            let na = a.frobenius_norm();
            if na == 0.0 {
                Some(LemmaCase::BothZero { projection_scale: ZERO })
            } else {
                let c = a.trace();
                if c.norm() <= tol.eps_eq * na {
                    None
                } else {
                    let p = a.scale(ONE / c);
                    let herm = p.max_diff(&p.adjoint());
                    let idem = (&p * &p).max_diff(&p);
                    (herm.max(idem) <= tol.eps_eq * 10.0).then_some(LemmaCase::BothZero { projection_scale: c })
                }
            }
        }
    };
    match fitted {
        Some(c) => Ok(c),
        None => {
            let scan = lemma_rank_scan(x, y, a, 64, tol, 0)?;
            Ok(LemmaCase::NoCase { lambda: scan.worst.0, rank: scan.worst.1 })
        }
    }
}

/// Result of [`rank_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    pub max_rank: usize,
    /// First probe vector attaining `max_rank`.
    pub witness: Ket,
    /// Rank of `phi(E_ii)` for each basis vector.
    pub per_basis: Vec<usize>,
}

/// Probe vectors: the standard basis, `(e_i + c e_j)/sqrt(2)` for
/// `c` in `{1, -1, i, -i}`, then `samples` random unit vectors.
pub fn rank_probes(k: usize, samples: usize, seed: u64) -> Vec<Ket> {
    minorant::eta_samples(k, samples, seed)
}

/// Numerical ranks of `phi(xi xi*)` over [`rank_probes`].
pub fn rank_profile(phi: &LinearMap, samples: usize, tol: &ToleranceConfig, seed: u64) -> Result<RankProfile> {
    if samples == 0 {
        return Err(Error::BadParams("rank_profile needs at least one random sample".into()));
    }
    let k = phi.dim_in();
    let probes = rank_probes(k, samples, seed);
    let mut per_basis = Vec::with_capacity(k);
    let mut max_rank = 0;
    let mut witness = probes[0].clone();
    for (idx, xi) in probes.iter().enumerate() {
        let rank = linalg::numerical_rank(&phi.apply_outer(xi, xi), tol);
        if idx < k {
            per_basis.push(rank);
        }
        if rank > max_rank {
            max_rank = rank;
            witness = xi.clone();
        }
    }
    Ok(RankProfile { max_rank, witness, per_basis })
}

/// `min_t ||e^{it} a - b||_F`.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let c = a.inner(b);
    let p = if c.norm() > 0.0 { c / c.norm() } else { ONE };
    (&a.scale(p) - b).frobenius_norm()
}

/// Classifies a positive map that does not raise the rank of rank-one
/// projections. Branch order is Kraus, then co-Kraus, then functional; the
/// zero map is reported as `Kraus` with `B = 0`.
pub fn classify_rank1(phi: &LinearMap, tol: &ToleranceConfig, seed: u64) -> Result<MapClass> {
    let (k, h) = (phi.dim_in(), phi.dim_out());
    if phi.is_zero() {
        return Ok(MapClass::Kraus { b: ComplexMatrix::zeros(h, k) });
    }
    // The first probe whose image has rank above one is a certificate.
    let probes = rank_probes(k, 64, seed);
    for xi in &probes {
        let rank = linalg::numerical_rank(&phi.apply_outer(xi, xi), tol);
        if rank > 1 {
            return Ok(MapClass::NotRankOne { witness: xi.clone(), observed_rank: rank, residuals: None });
        }
    }
    let accept = tol.eps_eq * phi.norm().max(1.0);
    let mut residuals = ClassifierResiduals { kraus: f64::INFINITY, cokraus: f64::INFINITY, functional: f64::INFINITY };
    if let Ok(s) = minorant::find_seed(phi, tol, seed) {
        let b = minorant::build_b(phi, &s, tol)?;
        residuals.kraus = mapcore::from_kraus(&b).max_diff(phi);
        if residuals.kraus <= accept {
            return Ok(MapClass::Kraus { b });
        }
        let c = minorant::build_c(phi, &s, tol)?;
        residuals.cokraus = mapcore::from_cokraus(&c).max_diff(phi);
        if residuals.cokraus <= accept {
            return Ok(MapClass::CoKraus { c });
        }
    }
    let total = phi.apply(&ComplexMatrix::identity(k))?;
    let eig = linalg::eig_hermitian(&total)?;
    let top = eig.vectors.last().expect("h >= 1");
    let q = outer(top, top);
    // M_ji = Tr(Q phi(E_ij))
    let m = ComplexMatrix::from_fn(k, k, |j, i| (&q * phi.block(i, j)).trace());
    let rebuilt = LinearMap::from_blocks(k, h, (0..k * k).map(|idx| q.scale(m[(idx % k, idx / k)])).collect())?;
    residuals.functional = rebuilt.max_diff(phi);
    if residuals.functional <= accept && linalg::is_psd(&m, tol)?.0 {
        return Ok(MapClass::Functional { m, q });
    }
    let profile = rank_profile(phi, 64, tol, seed)?;
    Ok(MapClass::NotRankOne { witness: profile.witness, observed_rank: profile.max_rank, residuals: Some(residuals) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::mapcore::{choi_example, from_cokraus, from_functional, from_kraus};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn scan_examples() {
        let x = Ket::basis(2, 0);
        let y = Ket::basis(2, 1);
        assert!(lemma_rank_scan(&x, &y, &outer(&x, &y), 20, &tol(), 0).unwrap().all_rank_le_1);
        let z = Ket::zeros(2);
        let s = lemma_rank_scan(&z, &z, &ComplexMatrix::identity(2), 0, &tol(), 0).unwrap();
        assert!(!s.all_rank_le_1 && s.worst.1 == 2);
        let y = Ket::from_real(&[0.3, -0.4]);
        let x = y.scale(C64::new(2.0, 0.0));
        assert!(lemma_rank_scan(&x, &y, &outer(&y, &y).scale(C64::new(0.7, 0.2)), 20, &tol(), 0).unwrap().all_rank_le_1);
    }

    #[test]
    fn classify_examples() {
        let x = Ket::from_real(&[1.0, 0.5, 0.0]);
        let y = Ket::new(vec![ZERO, I, C64::new(1.0, 0.0)]).unwrap();
        let mu = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        match lemma_classify(&x, &y, &outer(&x, &y).scale(mu), &tol()).unwrap() {
            LemmaCase::IndepXY { mu: m, orientation } => {
                assert!((m - mu).norm() < 1e-12);
                assert_eq!(orientation, Orientation::XyStar);
            }
            other => panic!("{other:?}"),
        }
        let x = Ket::from_real(&[1.0, -1.0]);
        let y = x.scale(C64::new(3.0, 0.0));
        match lemma_classify(&x, &y, &outer(&x, &x).scale_real(2.5), &tol()).unwrap() {
            LemmaCase::DepX { mu } => assert!((mu - C64::new(2.5, 0.0)).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
        let z = Ket::zeros(2);
        match lemma_classify(&z, &z, &ComplexMatrix::unit(2, 0, 1), &tol()).unwrap() {
            LemmaCase::NoCase { rank, .. } => assert_eq!(rank, 2),
            other => panic!("{other:?}"),
        }
        let w = Ket::from_real(&[0.6, 0.8]);
        match lemma_classify(&z, &z, &outer(&w, &w).scale(C64::new(0.0, 2.0)), &tol()).unwrap() {
            LemmaCase::BothZero { projection_scale } => assert!((projection_scale - C64::new(0.0, 2.0)).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rank_profile_examples() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0]]);
        assert!(rank_profile(&from_kraus(&b), 20, &tol(), 0).unwrap().max_rank <= 1);
        let p = rank_profile(&choi_example(), 50, &tol(), 0).unwrap();
        assert_eq!(p.max_rank, 3);
        assert_eq!(p.per_basis, vec![2, 2, 2]);
        let q = ComplexMatrix::unit(2, 0, 0);
        let f = from_functional(&ComplexMatrix::diag_real(&[1.0, 2.0, 3.0]), &q, &tol()).unwrap();
        assert_eq!(rank_profile(&f, 20, &tol(), 0).unwrap().max_rank, 1);
    }

    #[test]
    fn classifier_examples() {
        let b = ComplexMatrix::new(3, 3, (0..9).map(|t| C64::new((t as f64 * 0.7).sin(), (t as f64 * 1.3).cos())).collect()).unwrap();
        match classify_rank1(&from_kraus(&b), &tol(), 0).unwrap() {
            MapClass::Kraus { b: got } => assert!(phase_aligned_distance(&got, &b) < 1e-8),
            other => panic!("{other:?}"),
        }
        match classify_rank1(&from_cokraus(&b), &tol(), 0).unwrap() {
            MapClass::CoKraus { c } => assert!(phase_aligned_distance(&c, &b) < 1e-8),
            other => panic!("{other:?}"),
        }
        match classify_rank1(&choi_example(), &tol(), 0).unwrap() {
            MapClass::NotRankOne { witness, observed_rank, .. } => {
                assert_eq!(witness, Ket::basis(3, 0));
                assert_eq!(observed_rank, 2);
            }
            other => panic!("{other:?}"),
        }
        let eta = Ket::from_real(&[0.6, 0.8]);
        let x = Ket::basis(2, 1);
        let f = from_functional(&outer(&eta, &eta), &outer(&x, &x), &tol()).unwrap();
        match classify_rank1(&f, &tol(), 0).unwrap() {
            MapClass::Kraus { b } => assert!(phase_aligned_distance(&b, &outer(&x, &eta)) < 1e-10),
            other => panic!("{other:?}"),
        }
        let g = from_functional(&ComplexMatrix::diag_real(&[1.0, 2.0]), &outer(&x, &x), &tol()).unwrap();
        let class = classify_rank1(&g, &tol(), 0).unwrap();
        assert_eq!(class.kind(), "functional");
        assert!(class.rebuild(&tol()).unwrap().max_diff(&g) < 1e-12);
        match classify_rank1(&crate::mapcore::zero_map(2, 3), &tol(), 0).unwrap() {
            MapClass::Kraus { b } => assert_eq!(b, ComplexMatrix::zeros(3, 2)),
            other => panic!("{other:?}"),
        }
    }
}
