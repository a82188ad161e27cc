//! Completely positive and copositive minorants attached to an eigen-seed.
//!
//! A seed is a triple `(xi, x, lambda)` with `phi(xi xi*) x = lambda x`,
//! `lambda > 0`. From it we build
//!
//! * `B eta = lambda^{-1/2} phi(eta xi*) x` and `psi(X) = B X B*`,
//! * `C eta = lambda^{-1/2} phi(xi conj(eta)*) x` and `chi(X) = C X^T C*`.
//!
//! `psi <= phi` holds exactly when
//! `|<y, phi(eta xi*) x>|^2 <= lambda <y, phi(eta eta*) y>` for all `eta`, `y`,
//! and the mirror statement with `phi(xi eta*)` characterizes `chi <= phi`.
//! The difference of the two sides, divided by `lambda`, equals
//! `<y, (phi - psi)(eta eta*) y>`, which is what every domination method
//! reports as its violation measure.

use serde::Serialize;

use crate::blockform;
use crate::error::{Error, Result};
use crate::faces;
use crate::linalg::{self, ComplexMatrix, Ket, ToleranceConfig, C64, I};
use crate::mapcore::{self, scale_add, LinearMap};
use crate::positivity;
use crate::random;

/// `(xi, x, lambda)` with `phi(xi xi*) x = lambda x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorantSeed {
    pub xi: Ket,
    pub x: Ket,
    pub lambda: f64,
}

/// Which minorant a seed is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinorantKind {
    /// `psi(X) = B X B*`.
    Psi,
    /// `chi(X) = C X^T C*`.
    Chi,
}

/// Effort limits for randomized searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBudget {
    /// See-saw restarts.
    pub restarts: usize,
    /// Random `eta` samples on top of the structured grid.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { restarts: 20, samples: 200, seed: 0 }
    }
}

/// Top eigenpair of `phi(xi xi*)`, with the eigenvector chosen
/// deterministically inside a degenerate top eigenspace: the normalized
/// projection of the standard basis vector with the largest overlap (lowest
/// index on ties), phased so that this coordinate is positive.
fn top_eigenpair(y: &ComplexMatrix) -> Result<(f64, Ket)> {
    let eig = linalg::eig_hermitian(y)?;
    let n = eig.values.len();
    let top = eig.max();
    let cut = top - 1e-12 * top.abs().max(1.0);
    let space: Vec<&Ket> = (0..n).filter(|&i| eig.values[i] >= cut).map(|i| &eig.vectors[i]).collect();
    let weight = |m: usize| space.iter().map(|v| v[m].norm_sqr()).sum::<f64>();
    let mut best_m = 0;
    let mut best_w = weight(0);
    for m in 1..n {
        let w = weight(m);
        if w > best_w + 1e-12 {
            best_m = m;
            best_w = w;
        }
    }
    // P e_m = sum_v v conj(v_m)
    let mut x = Ket::zeros(n);
    for v in &space {
        x = x.axpy(v[best_m].conj(), v);
    }
    let x = x.normalized().expect("projection onto the eigenspace is nonzero for the maximizing index");
    Ok((top, x))
}

/// Finds a seed: the standard basis vector `e_m` maximizing the top
/// eigenvalue of `phi(E_mm)` (lowest `m` on ties), or, if every basis value
/// is nonpositive, the first random unit vector with a positive top
/// eigenvalue.
pub fn find_seed(phi: &LinearMap, tol: &ToleranceConfig, seed: u64) -> Result<MinorantSeed> {
    if phi.is_zero() {
        return Err(Error::ZeroMap);
    }
    let k = phi.dim_in();
    let mut best: Option<MinorantSeed> = None;
    for m in 0..k {
        let xi = Ket::basis(k, m);
        let (lambda, x) = top_eigenpair(phi.block(m, m))?;
        if lambda > tol.eps_psd && best.as_ref().map_or(true, |b| lambda > b.lambda) {
            best = Some(MinorantSeed { xi, x, lambda });
        }
    }
    if let Some(s) = best {
        return Ok(s);
    }
    let mut rng = random::rng_from_seed(seed);
    for _ in 0..1000 {
        let xi = random::unit_ket(&mut rng, k);
        let (lambda, x) = top_eigenpair(&phi.apply_outer(&xi, &xi))?;
        if lambda > tol.eps_psd {
            return Ok(MinorantSeed { xi, x, lambda });
        }
    }
    Err(Error::InvalidSeed(0.0))
}

/// Every seed `(e_m, v, lambda)` built from an eigenpair of `phi(E_mm)` with
/// `lambda > eps_psd`.
pub fn basis_seeds(phi: &LinearMap, tol: &ToleranceConfig) -> Result<Vec<MinorantSeed>> {
    let k = phi.dim_in();
    let mut out = Vec::new();
    for m in 0..k {
        let eig = linalg::eig_hermitian(phi.block(m, m))?;
        for (lambda, x) in eig.values.iter().zip(&eig.vectors).rev() {
            if *lambda > tol.eps_psd {
                out.push(MinorantSeed { xi: Ket::basis(k, m), x: x.clone(), lambda: *lambda });
            }
        }
    }
    Ok(out)
}

/// Checks `||phi(xi xi*) x - lambda x|| <= eps max(1, lambda)` and `lambda > 0`.
pub fn validate_seed(phi: &LinearMap, seed: &MinorantSeed, tol: &ToleranceConfig) -> Result<()> {
    if seed.xi.dim() != phi.dim_in() || seed.x.dim() != phi.dim_out() {
        return Err(Error::DimensionMismatch("seed vectors do not match the map".into()));
    }
    if !(seed.lambda > 0.0) {
        return Err(Error::InvalidSeed(seed.lambda));
    }
    let y = phi.apply_outer(&seed.xi, &seed.xi);
    let r = y.mul_ket(&seed.x).axpy(C64::new(-seed.lambda, 0.0), &seed.x).norm();
    if r > 1e3 * tol.eps_eq.max(1e-12) * seed.lambda.max(1.0) || !seed.x.is_unit(1e-9) || !seed.xi.is_unit(1e-9) {
        return Err(Error::InvalidSeed(r));
    }
    Ok(())
}

/// Column `j` is `lambda^{-1/2} phi(e_j xi*) x`.
pub fn build_b(phi: &LinearMap, seed: &MinorantSeed, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    validate_seed(phi, seed, tol)?;
    let k = phi.dim_in();
    let s = C64::new(seed.lambda.powf(-0.5), 0.0);
    let cols: Vec<Ket> = (0..k).map(|j| phi.apply_outer(&Ket::basis(k, j), &seed.xi).mul_ket(&seed.x).scale(s)).collect();
    Ok(ComplexMatrix::from_columns(&cols))
}

/// Column `j` is `lambda^{-1/2} phi(xi e_j*) x`.
pub fn build_c(phi: &LinearMap, seed: &MinorantSeed, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    validate_seed(phi, seed, tol)?;
    let k = phi.dim_in();
    let s = C64::new(seed.lambda.powf(-0.5), 0.0);
    let cols: Vec<Ket> = (0..k).map(|j| phi.apply_outer(&seed.xi, &Ket::basis(k, j)).mul_ket(&seed.x).scale(s)).collect();
    Ok(ComplexMatrix::from_columns(&cols))
}

pub fn build_psi(phi: &LinearMap, seed: &MinorantSeed, tol: &ToleranceConfig) -> Result<LinearMap> {
    Ok(mapcore::from_kraus(&build_b(phi, seed, tol)?))
}

pub fn build_chi(phi: &LinearMap, seed: &MinorantSeed, tol: &ToleranceConfig) -> Result<LinearMap> {
    Ok(mapcore::from_cokraus(&build_c(phi, seed, tol)?))
}

pub fn build_minorant(phi: &LinearMap, seed: &MinorantSeed, kind: MinorantKind, tol: &ToleranceConfig) -> Result<LinearMap> {
    match kind {
        MinorantKind::Psi => build_psi(phi, seed, tol),
        MinorantKind::Chi => build_chi(phi, seed, tol),
    }
}

/// How to decide `rho <= phi`.
#[derive(Debug, Clone, PartialEq)]
pub enum DominationMethod {
    /// See-saw minimization of `<y, (phi - rho)(eta eta*) y>`.
    MapDifferenceSeesaw,
    /// Pointwise inequality sampled over a structured and random set of
    /// `eta`, exact in `y`; `rho` must be the minorant of `phi` for `seed`.
    InequalitySampling { seed: MinorantSeed, kind: MinorantKind },
    /// Matrix criterion on the block components; needs `phi` in `G_{xi,x}`.
    WuCriterion { seed: MinorantSeed, kind: MinorantKind },
}

impl DominationMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DominationMethod::MapDifferenceSeesaw => "map_difference_seesaw",
            DominationMethod::InequalitySampling { .. } => "inequality_sampling",
            DominationMethod::WuCriterion { .. } => "wu_criterion",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub holds: bool,
    pub method: &'static str,
    /// Smallest `<y, (phi - rho)(eta eta*) y>` found over unit `eta`, `y`.
    pub worst_violation: f64,
    /// `(eta, y)` attaining `worst_violation`.
    pub witness: Option<(Ket, Ket)>,
}

/// `<y, (phi - rho)(eta eta*) y>` for unit-normalized `eta`, `y`.
pub fn domination_margin(phi: &LinearMap, rho: &LinearMap, eta: &Ket, y: &Ket) -> f64 {
    let d = &phi.apply_outer(eta, eta) - &rho.apply_outer(eta, eta);
    d.sandwich(y, y).re / (eta.norm_sqr() * y.norm_sqr())
}

fn domination_threshold(phi: &LinearMap, tol: &ToleranceConfig) -> f64 {
    tol.eps_psd * phi.norm().max(1.0)
}

/// Structured `eta` grid: basis vectors and `(e_i + c e_j)/sqrt(2)` for
/// `c` in `{1, -1, i, -i}`, followed by `samples` random unit vectors.
pub fn eta_samples(k: usize, samples: usize, seed: u64) -> Vec<Ket> {
    let mut out: Vec<Ket> = (0..k).map(|i| Ket::basis(k, i)).collect();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..k {
        for j in (i + 1)..k {
            for c in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), I, -I] {
                let mut v = Ket::zeros(k);
                v[i] = C64::new(r, 0.0);
                v[j] = c * r;
                out.push(v);
            }
        }
    }
    let mut rng = random::rng_from_seed(seed);
    out.extend((0..samples).map(|_| random::unit_ket(&mut rng, k)));
    out
}

/// Decides `rho <= phi` with the chosen method.
pub fn dominates(
    phi: &LinearMap,
    rho: &LinearMap,
    method: &DominationMethod,
    tol: &ToleranceConfig,
    budget: &SearchBudget,
) -> Result<DominationReport> {
    if (phi.dim_in(), phi.dim_out()) != (rho.dim_in(), rho.dim_out()) {
        return Err(Error::DimensionMismatch("maps have different dimensions".into()));
    }
    let threshold = domination_threshold(phi, tol);
    match method {
        DominationMethod::MapDifferenceSeesaw => {
            let diff = scale_add(1.0, phi, -1.0, rho)?;
            let r = positivity::min_product_value(&diff, tol, budget.restarts, budget.seed)?;
            let (xi, y) = r.witness[0].clone();
            // witness vector is conj(xi) (x) y, i.e. value <y, diff(xi xi*) y>
            let (eta, y) = (xi.normalized().unwrap_or(xi), y.normalized().unwrap_or(y));
            let worst = domination_margin(phi, rho, &eta, &y);
            Ok(DominationReport { holds: worst >= -threshold, method: method.name(), worst_violation: worst, witness: Some((eta, y)) })
        }
        DominationMethod::InequalitySampling { seed, kind } => {
            require_minorant(phi, rho, seed, *kind, tol)?;
            let mut worst = f64::INFINITY;
            let mut witness = None;
            for eta in eta_samples(phi.dim_in(), budget.samples, budget.seed) {
                let (m, y) = pointwise_minimum(phi, seed, *kind, &eta)?;
                if m < worst {
                    worst = m;
                    witness = Some((eta, y));
                }
            }
            Ok(DominationReport { holds: worst >= -threshold, method: method.name(), worst_violation: worst, witness })
        }
        DominationMethod::WuCriterion { seed, kind } => {
            require_minorant(phi, rho, seed, *kind, tol)?;
            if !faces::in_g(phi, &seed.xi, &seed.x, tol)?.0 {
                return Err(Error::MethodUnavailable("map is not in the face G for this seed".into()));
            }
            let mut holds = true;
            let mut worst = f64::INFINITY;
            let mut witness = None;
            for eta in eta_samples(phi.dim_in(), budget.samples, budget.seed) {
                let c = blockform::extract_components(phi, &seed.xi, &seed.x, &eta, tol)?;
                let (psi_ok, chi_ok) = blockform::check_wu(&c, seed.lambda, tol);
                let ok = match kind {
                    MinorantKind::Psi => psi_ok,
                    MinorantKind::Chi => chi_ok,
                };
                let (m, y) = pointwise_minimum(phi, seed, *kind, &eta)?;
                if !ok && holds {
                    // First failing eta defines the reported witness.
                    holds = false;
                    worst = m;
                    witness = Some((eta, y));
                } else if holds && m < worst {
                    worst = m;
                    witness = Some((eta, y));
                }
            }
            Ok(DominationReport { holds, method: method.name(), worst_violation: worst, witness })
        }
    }
}

fn require_minorant(phi: &LinearMap, rho: &LinearMap, seed: &MinorantSeed, kind: MinorantKind, tol: &ToleranceConfig) -> Result<()> {
    let expected = build_minorant(phi, seed, kind, tol)?;
    let diff = expected.max_diff(rho);
    if diff > 1e-9 * phi.norm().max(1.0) {
        return Err(Error::MethodUnavailable(format!("compared map is not the minorant for this seed (difference {diff:e})")));
    }
    Ok(())
}

/// `min_y` of the normalized inequality margin at `eta`, with the minimizer.
fn pointwise_minimum(phi: &LinearMap, seed: &MinorantSeed, kind: MinorantKind, eta: &Ket) -> Result<(f64, Ket)> {
    let eta_n = eta.normalized().ok_or(Error::NotUnit(0.0))?;
    let quad = phi.apply_outer(&eta_n, &eta_n);
    let mixed = match kind {
        MinorantKind::Psi => phi.apply_outer(&eta_n, &seed.xi),
        MinorantKind::Chi => phi.apply_outer(&seed.xi, &eta_n),
    };
    let w = mixed.mul_ket(&seed.x);
    // lambda^{-1} |<y, w>|^2 = <y, (w w*/lambda) y>
    let m = &quad - &linalg::outer(&w, &w).scale_real(1.0 / seed.lambda);
    let eig = linalg::eig_hermitian(&m)?;
    Ok((eig.values[0], eig.vectors[0].clone()))
}

/// Outcome of [`extremality_falsifier`].
#[derive(Debug, Clone, PartialEq)]
pub enum FalsifierVerdict {
    /// A dominated minorant not proportional to `phi` was found.
    Falsified { minorant: LinearMap, kind: MinorantKind, proportionality_residual: f64 },
    NotFalsified,
}

/// Looks for a non-proportional minorant among `psi`, `chi` built from every
/// basis seed. A `NotFalsified` verdict is not a proof of extremality.
pub fn extremality_falsifier(phi: &LinearMap, tol: &ToleranceConfig, budget: &SearchBudget) -> Result<FalsifierVerdict> {
    if phi.is_zero() {
        return Err(Error::ZeroMap);
    }
    let nphi = phi.norm();
    let jphi = phi.to_choi();
    for seed in basis_seeds(phi, tol)? {
        for kind in [MinorantKind::Psi, MinorantKind::Chi] {
            let rho = build_minorant(phi, &seed, kind, tol)?;
            let rep = dominates(phi, &rho, &DominationMethod::MapDifferenceSeesaw, tol, budget)?;
            if !rep.holds {
                continue;
            }
            let c = jphi.inner(&rho.to_choi()).re / (nphi * nphi);
            let residual = scale_add(1.0, &rho, -c, phi)?.norm() / nphi;
            if residual > proportionality_threshold(tol) {
                return Ok(FalsifierVerdict::Falsified { minorant: rho, kind, proportionality_residual: residual });
            }
        }
    }
    Ok(FalsifierVerdict::NotFalsified)
}

fn proportionality_threshold(tol: &ToleranceConfig) -> f64 {
    // Minorants are built from eigenvectors, so agreement is limited by the
    // eigensolver rather than by eps_eq itself.
    (tol.eps_eq * 1e3).max(1e-8)
}

/// Outcome of the 2-positivity harness.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum T2PosReport {
    /// The Schmidt-rank-2 search found a negative value: the hypothesis fails.
    Skipped { schmidt_value: f64 },
    /// Evidence of 2-positivity, and the sampled inequality held for every
    /// basis seed.
    Verified { schmidt_value: f64, seeds_checked: usize },
    /// Evidence of 2-positivity but a sampled inequality failed.
    RedFlag { schmidt_value: f64, seed_index: usize, worst_violation: f64 },
}

/// With evidence that `phi` is 2-positive, checks that `psi <= phi` for every
/// basis seed by inequality sampling.
pub fn verify_t2pos(phi: &LinearMap, tol: &ToleranceConfig, budget: &SearchBudget) -> Result<T2PosReport> {
    harness(phi, phi, MinorantKind::Psi, tol, budget)
}

/// Copositive mirror: 2-positivity of `X -> phi(X^T)`, then `chi <= phi`.
pub fn verify_t2copos(phi: &LinearMap, tol: &ToleranceConfig, budget: &SearchBudget) -> Result<T2PosReport> {
    harness(phi, &phi.compose_transpose(), MinorantKind::Chi, tol, budget)
}

fn harness(phi: &LinearMap, tested: &LinearMap, kind: MinorantKind, tol: &ToleranceConfig, budget: &SearchBudget) -> Result<T2PosReport> {
    let s = 2.min(phi.dim_in().min(phi.dim_out()));
    let ev = positivity::min_schmidt_k_value(tested, s, tol, budget.restarts, budget.seed)?;
    let schmidt_value = ev.best_value;
    if schmidt_value < -domination_threshold(phi, tol) {
        return Ok(T2PosReport::Skipped { schmidt_value });
    }
    let seeds = basis_seeds(phi, tol)?;
    for (idx, seed) in seeds.iter().enumerate() {
        let rho = build_minorant(phi, seed, kind, tol)?;
        let method = DominationMethod::InequalitySampling { seed: seed.clone(), kind };
        let rep = dominates(phi, &rho, &method, tol, budget)?;
        if !rep.holds {
            return Ok(T2PosReport::RedFlag { schmidt_value, seed_index: idx, worst_violation: rep.worst_violation });
        }
    }
    Ok(T2PosReport::Verified { schmidt_value, seeds_checked: seeds.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::outer;
    use crate::mapcore::{choi_example, from_cokraus, from_functional, from_kraus, identity_map, transpose_map, zero_map};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn phase_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        let c = a.inner(b);
        let p = if c.norm() > 0.0 { c / c.norm() } else { C64::new(1.0, 0.0) };
        (&a.scale(p) - b).frobenius_norm()
    }

    fn sample_b() -> ComplexMatrix {
        ComplexMatrix::new(3, 2, vec![C64::new(1.0, 0.5), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(2.0, -1.0), C64::new(0.3, 0.3), C64::new(0.0, -0.7)]).unwrap()
    }

    #[test]
    fn seed_examples() {
        let s = find_seed(&identity_map(2), &tol(), 0).unwrap();
        assert_eq!((s.xi.clone(), s.x.clone(), s.lambda), (Ket::basis(2, 0), Ket::basis(2, 0), 1.0));
        let s = find_seed(&choi_example(), &tol(), 0).unwrap();
        assert_eq!(s.xi, Ket::basis(3, 0));
        assert!((s.lambda - 1.0).abs() < 1e-14);
        assert!(s.x.axpy(C64::new(-1.0, 0.0), &Ket::basis(3, 0)).norm() < 1e-12);
        let b = sample_b();
        let s = find_seed(&from_kraus(&b), &tol(), 0).unwrap();
        let col = (0..2).map(|j| b.column(j)).max_by(|u, v| u.norm_sqr().total_cmp(&v.norm_sqr())).unwrap();
        assert!((s.lambda - col.norm_sqr()).abs() < 1e-12);
        assert_eq!(find_seed(&zero_map(2, 2), &tol(), 0).unwrap_err(), Error::ZeroMap);
    }

    #[test]
    fn kraus_and_cokraus_generators_recovered_up_to_phase() {
        let a = sample_b();
        let phi = from_kraus(&a);
        let seed = find_seed(&phi, &tol(), 0).unwrap();
        assert!(phase_distance(&build_b(&phi, &seed, &tol()).unwrap(), &a) < 1e-12);
        assert!(build_psi(&phi, &seed, &tol()).unwrap().max_diff(&phi) < 1e-12);
        let phi = from_cokraus(&a);
        let seed = find_seed(&phi, &tol(), 0).unwrap();
        assert!(phase_distance(&build_c(&phi, &seed, &tol()).unwrap(), &a) < 1e-12);
        assert!(build_chi(&phi, &seed, &tol()).unwrap().max_diff(&phi) < 1e-12);
    }

    #[test]
    fn functional_seed_gives_outer_product_generator() {
        let eta = Ket::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let x = Ket::basis(3, 1);
        let phi = from_functional(&outer(&eta, &eta), &outer(&x, &x), &tol()).unwrap();
        let seed = MinorantSeed { xi: eta.clone(), x: x.clone(), lambda: 1.0 };
        assert!(phase_distance(&build_b(&phi, &seed, &tol()).unwrap(), &outer(&x, &eta)) < 1e-12);
        let bad = MinorantSeed { xi: eta, x: Ket::basis(3, 0), lambda: 1.0 };
        assert!(matches!(build_b(&phi, &bad, &tol()), Err(Error::InvalidSeed(_))));
    }

    #[test]
    fn identity_seed_reproduces_identity() {
        let seed = MinorantSeed { xi: Ket::basis(2, 0), x: Ket::basis(2, 0), lambda: 1.0 };
        assert_eq!(build_b(&identity_map(2), &seed, &tol()).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn domination_of_sum_of_kraus_maps() {
        let a1 = sample_b();
        let a2 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 1.0], &[2.0, 0.0]]);
        let phi = scale_add(1.0, &from_kraus(&a1), 1.0, &from_kraus(&a2)).unwrap();
        let seed = find_seed(&phi, &tol(), 0).unwrap();
        let psi = build_psi(&phi, &seed, &tol()).unwrap();
        let b = SearchBudget::default();
        assert!(dominates(&phi, &psi, &DominationMethod::MapDifferenceSeesaw, &tol(), &b).unwrap().holds);
        let m = DominationMethod::InequalitySampling { seed: seed.clone(), kind: MinorantKind::Psi };
        assert!(dominates(&phi, &psi, &m, &tol(), &b).unwrap().holds);
        assert!(dominates(&phi, &zero_map(2, 3), &DominationMethod::MapDifferenceSeesaw, &tol(), &b).unwrap().holds);
        match extremality_falsifier(&phi, &tol(), &b).unwrap() {
            FalsifierVerdict::Falsified { proportionality_residual, .. } => assert!(proportionality_residual > 1e-3),
            other => panic!("expected falsified, got {other:?}"),
        }
    }

    #[test]
    fn choi_map_does_not_dominate_its_minorant() {
        let phi = choi_example();
        let seed = MinorantSeed { xi: Ket::basis(3, 0), x: Ket::basis(3, 0), lambda: 1.0 };
        let psi = build_psi(&phi, &seed, &tol()).unwrap();
        assert_eq!(psi.block(0, 0), &ComplexMatrix::diag_real(&[1.0, 0.0, 0.0]));
        let b = SearchBudget::default();
        let rep = dominates(&phi, &psi, &DominationMethod::MapDifferenceSeesaw, &tol(), &b).unwrap();
        assert!(!rep.holds && rep.worst_violation < -1e-3);
        let (eta, y) = rep.witness.unwrap();
        assert!((domination_margin(&phi, &psi, &eta, &y) - rep.worst_violation).abs() < 1e-12);
        let m = DominationMethod::InequalitySampling { seed: seed.clone(), kind: MinorantKind::Psi };
        assert!(!dominates(&phi, &psi, &m, &tol(), &b).unwrap().holds);
        let w = DominationMethod::WuCriterion { seed, kind: MinorantKind::Psi };
        assert!(matches!(dominates(&phi, &psi, &w, &tol(), &b), Err(Error::MethodUnavailable(_))));
        assert_eq!(extremality_falsifier(&phi, &tol(), &b).unwrap(), FalsifierVerdict::NotFalsified);
    }

    #[test]
    fn single_generator_maps_are_not_falsified() {
        let b = SearchBudget::default();
        assert_eq!(extremality_falsifier(&from_kraus(&sample_b()), &tol(), &b).unwrap(), FalsifierVerdict::NotFalsified);
        assert_eq!(extremality_falsifier(&from_cokraus(&sample_b()), &tol(), &b).unwrap(), FalsifierVerdict::NotFalsified);
    }

    #[test]
    fn t2pos_harness_examples() {
        let b = SearchBudget::default();
        assert!(matches!(verify_t2pos(&choi_example(), &tol(), &b).unwrap(), T2PosReport::Skipped { .. }));
        match verify_t2pos(&transpose_map(2), &tol(), &b).unwrap() {
            T2PosReport::Skipped { schmidt_value } => assert!((schmidt_value + 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let a2 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 1.0], &[2.0, 0.0]]);
        let phi = scale_add(1.0, &from_kraus(&sample_b()), 1.0, &from_kraus(&a2)).unwrap();
        assert!(matches!(verify_t2pos(&phi, &tol(), &b).unwrap(), T2PosReport::Verified { .. }));
        assert!(matches!(verify_t2copos(&transpose_map(2), &tol(), &b).unwrap(), T2PosReport::Verified { .. }));
    }
}
