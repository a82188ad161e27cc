//! Quadratic functions `R: C^k -> M_h` and the linear maps they come from.
//!
//! If `R` satisfies the parallelogram law
//! `R(xi + eta) + R(xi - eta) = 2 R(xi) + 2 R(eta)` and `R(-eta) = R(i eta) =
//! R(eta)`, then `R(eta) = phi(eta eta*)` for a unique linear `phi`, recovered by
//! polarization:
//!
//! `phi(xi eta*) = 1/4 [R(xi + eta) - R(xi - eta)] + i/4 [R(xi + i eta) - R(xi - i eta)]`.
//!
//! In finite dimensions the continuity hypotheses needed in general are
//! automatic, so nothing beyond the two identities is checked.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Ket, ToleranceConfig, C64, I, ONE};
use crate::mapcore::LinearMap;
use crate::random;

type Evaluator = Arc<dyn Fn(&Ket) -> ComplexMatrix + Send + Sync>;

#[derive(Clone)]
enum Source {
    Closure(Evaluator),
    Table(Vec<(Ket, ComplexMatrix)>),
}

/// A function `eta -> R(eta)` from `C^k` to `h x h` matrices, given either as
/// a callback or as a table of values on [`polarization_vectors`].
#[derive(Clone)]
pub struct QuadraticFunction {
    k: usize,
    h: usize,
    source: Source,
    /// Declares that every value is positive semidefinite.
    pub positive: bool,
}

impl fmt::Debug for QuadraticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Closure(_) => "closure",
            Source::Table(_) => "table",
        };
        write!(f, "QuadraticFunction({} -> {}, {kind})", self.k, self.h)
    }
}

impl QuadraticFunction {
    pub fn from_fn(k: usize, h: usize, f: impl Fn(&Ket) -> ComplexMatrix + Send + Sync + 'static) -> QuadraticFunction {
        QuadraticFunction { k, h, source: Source::Closure(Arc::new(f)), positive: false }
    }

    /// `eta -> phi(eta eta*)`.
    pub fn from_map(phi: &LinearMap) -> QuadraticFunction {
        let phi = phi.clone();
        let (k, h) = (phi.dim_in(), phi.dim_out());
        QuadraticFunction::from_fn(k, h, move |eta| phi.apply_outer(eta, eta))
    }

    /// `eta -> ||eta||^2 I_h`, the quadratic restriction of `X -> Tr(X) I_h`.
    pub fn trace_map(k: usize, h: usize) -> QuadraticFunction {
        let mut q = QuadraticFunction::from_fn(k, h, move |eta| ComplexMatrix::identity(h).scale_real(eta.norm_sqr()));
        q.positive = true;
        q
    }

    /// Tabulated values. Every vector must have dimension `k` and every value
    /// must be `h x h`.
    pub fn from_table(k: usize, h: usize, entries: Vec<(Ket, ComplexMatrix)>) -> Result<QuadraticFunction> {
        for (v, m) in &entries {
            if v.dim() != k || m.rows() != h || m.cols() != h {
                return Err(Error::DimensionMismatch(format!(
                    "table entry of dims {} -> {}x{}, expected {k} -> {h}x{h}",
                    v.dim(),
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(QuadraticFunction { k, h, source: Source::Table(entries), positive: false })
    }

    /// Tabulates `self` on [`polarization_vectors`].
    pub fn tabulate(&self) -> Result<Vec<(Ket, ComplexMatrix)>> {
        polarization_vectors(self.k).into_iter().map(|v| self.evaluate(&v).map(|m| (v, m))).collect()
    }

    pub fn dim_in(&self) -> usize {
        self.k
    }

    pub fn dim_out(&self) -> usize {
        self.h
    }

    pub fn is_table(&self) -> bool {
        matches!(self.source, Source::Table(_))
    }

    pub fn table(&self) -> Option<&[(Ket, ComplexMatrix)]> {
        match &self.source {
            Source::Table(t) => Some(t),
            Source::Closure(_) => None,
        }
    }

    pub fn evaluate(&self, eta: &Ket) -> Result<ComplexMatrix> {
        if eta.dim() != self.k {
            return Err(Error::DimensionMismatch(format!("vector of dim {} for input dim {}", eta.dim(), self.k)));
        }
        match &self.source {
            Source::Closure(f) => {
                let m = f(eta);
                if m.rows() != self.h || m.cols() != self.h {
                    return Err(Error::DimensionMismatch(format!("evaluator returned {}x{}", m.rows(), m.cols())));
                }
                Ok(m)
            }
            Source::Table(entries) => entries
                .iter()
                .find(|(v, _)| v.as_slice().iter().zip(eta.as_slice()).all(|(a, b)| (a - b).norm() <= 1e-12))
                .map(|(_, m)| m.clone())
                .ok_or_else(|| Error::MissingSample(fmt_ket(eta))),
        }
    }
}

/// The `4 k^2` vectors `e_i + c e_j`, `c` in `{1, -1, i, -i}`, ordered by
/// `(i, j, c)`. These are exactly the inputs [`reconstruct`] evaluates.
pub fn polarization_vectors(k: usize) -> Vec<Ket> {
    let mut out = Vec::with_capacity(4 * k * k);
    for i in 0..k {
        for j in 0..k {
            for c in PHASES {
                out.push(Ket::basis(k, i).axpy(c, &Ket::basis(k, j)));
            }
        }
    }
    out
}

const PHASES: [C64; 4] = [ONE, C64::new(-1.0, 0.0), I, C64::new(0.0, -1.0)];

fn fmt_ket(v: &Ket) -> String {
    let parts: Vec<String> = v.as_slice().iter().map(|c| format!("{}{:+}i", c.re, c.im)).collect();
    format!("[{}]", parts.join(", "))
}

/// Outcome of [`check_parallelogram`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelogramReport {
    pub checks: usize,
    /// Largest absolute residual over all checks.
    pub max_residual: f64,
    /// First failing check: identity name, the pair involved, residual.
    pub violation: Option<(String, String, f64)>,
    /// Smallest eigenvalue seen when `positive` is declared.
    pub min_eigenvalue: Option<f64>,
}

impl ParallelogramReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

struct Checker<'a> {
    tol: &'a ToleranceConfig,
    report: ParallelogramReport,
}

impl Checker<'_> {
    fn record(&mut self, identity: &str, a: &Ket, b: &Ket, lhs: &ComplexMatrix, rhs: &ComplexMatrix) {
        let res = (lhs - rhs).frobenius_norm();
        let scale = lhs.frobenius_norm().max(rhs.frobenius_norm()).max(1.0);
        self.report.checks += 1;
        self.report.max_residual = self.report.max_residual.max(res);
        if res > self.tol.eps_eq * scale && self.report.violation.is_none() {
            self.report.violation = Some((identity.to_string(), format!("xi={}, eta={}", fmt_ket(a), fmt_ket(b)), res));
        }
    }
}

/// Checks the parallelogram law and the phase symmetry.
///
/// For a callback source both identities are evaluated on every pair of
/// basis vectors and on `samples` random Gaussian pairs. A table only holds
/// values on [`polarization_vectors`], so the checks are the consequences of
/// the two identities that stay inside the table:
/// `R(e_i + c e_j) = R(e_j + conj(c) e_i)`,
/// `R(e_i + e_j) + R(e_i - e_j) = R(e_i + i e_j) + R(e_i - i e_j)
///  = (R(2 e_i) + R(2 e_j)) / 2` and `R(0) = 0`.
pub fn check_parallelogram(rf: &QuadraticFunction, samples: usize, tol: &ToleranceConfig, seed: u64) -> Result<ParallelogramReport> {
    if samples == 0 {
        return Err(Error::BadParams("check_parallelogram needs samples >= 1".into()));
    }
    let mut ck = Checker { tol, report: ParallelogramReport { checks: 0, max_residual: 0.0, violation: None, min_eigenvalue: None } };
    let k = rf.dim_in();
    let mut seen: Vec<ComplexMatrix> = Vec::new();
    if rf.is_table() {
        let vecs = polarization_vectors(k);
        let at = |i: usize, j: usize, c: usize| &vecs[(i * k + j) * 4 + c];
        let val = |v: &Ket| rf.evaluate(v);
        // conj of PHASES[c] is PHASES[CONJ[c]]
        const CONJ: [usize; 4] = [0, 1, 3, 2];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    for c in 0..4 {
                        let (a, b) = (at(i, j, c), at(j, i, CONJ[c]));
                        ck.record("phase symmetry", a, b, &val(a)?, &val(b)?);
                    }
                }
                let real = &val(at(i, j, 0))? + &val(at(i, j, 1))?;
                let imag = &val(at(i, j, 2))? + &val(at(i, j, 3))?;
                let (ei, ej) = (Ket::basis(k, i), Ket::basis(k, j));
                ck.record("parallelogram", &ei, &ej, &real, &imag);
                let diag = (&val(at(i, i, 0))? + &val(at(j, j, 0))?).scale_real(0.5);
                ck.record("parallelogram", &ei, &ej, &real, &diag);
            }
            let zero = at(i, i, 1);
            ck.record("zero", zero, zero, &val(zero)?, &ComplexMatrix::zeros(rf.dim_out(), rf.dim_out()));
        }
        for (_, m) in rf.table().expect("table source") {
            seen.push(m.clone());
        }
    } else {
        let mut rng = random::rng_from_seed(seed);
        let mut pairs: Vec<(Ket, Ket)> = Vec::new();
        for i in 0..k {
            for j in 0..k {
                pairs.push((Ket::basis(k, i), Ket::basis(k, j)));
            }
        }
        pairs.extend((0..samples).map(|_| (random::gaussian_ket(&mut rng, k), random::gaussian_ket(&mut rng, k))));
        for (a, b) in &pairs {
            let ra = rf.evaluate(a)?;
            let rb = rf.evaluate(b)?;
            let lhs = &rf.evaluate(&a.axpy(ONE, b))? + &rf.evaluate(&a.axpy(-ONE, b))?;
            let rhs = (&ra + &rb).scale_real(2.0);
            ck.record("parallelogram", a, b, &lhs, &rhs);
            ck.record("phase symmetry", b, &b.scale(-ONE), &rf.evaluate(&b.scale(-ONE))?, &rb);
            ck.record("phase symmetry", b, &b.scale(I), &rf.evaluate(&b.scale(I))?, &rb);
            seen.push(ra);
        }
    }
    if rf.positive {
        let mut worst = f64::INFINITY;
        for m in &seen {
            worst = worst.min(linalg::min_eigenvalue(&m.hermitian_part())?);
        }
        ck.report.min_eigenvalue = Some(worst);
        if worst < -tol.eps_psd && ck.report.violation.is_none() {
            ck.report.violation = Some(("positivity".into(), String::new(), -worst));
        }
    }
    Ok(ck.report)
}

/// Reconstructs the linear map with `apply(phi, eta eta*) = R(eta)`.
///
/// The identities are checked first (16 random pairs for a callback); block
/// `(i, j)` then takes four evaluations at `e_i + c e_j`. The result is
/// verified against `R` on the checked inputs.
pub fn reconstruct(rf: &QuadraticFunction, tol: &ToleranceConfig) -> Result<LinearMap> {
    let report = check_parallelogram(rf, 16, tol, 0)?;
    if let Some((identity, pair, residual)) = report.violation {
        return Err(Error::IdentityViolated { pair: format!("{identity}: {pair}"), residual });
    }
    let k = rf.dim_in();
    let vecs = polarization_vectors(k);
    let mut blocks = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let r = |c: usize| rf.evaluate(&vecs[(i * k + j) * 4 + c]);
            let real = &r(0)? - &r(1)?;
            let imag = &r(2)? - &r(3)?;
            blocks.push(&real.scale_real(0.25) + &imag.scale(C64::new(0.0, 0.25)));
        }
    }
    let phi = LinearMap::from_blocks(k, rf.dim_out(), blocks)?;
    let probes: Vec<Ket> = match rf.table() {
        Some(t) => t.iter().map(|(v, _)| v.clone()).collect(),
        None => {
            let mut rng = random::rng_from_seed(1);
            (0..16).map(|_| random::gaussian_ket(&mut rng, k)).collect()
        }
    };
    for v in probes {
        let want = rf.evaluate(&v)?;
        let got = phi.apply_outer(&v, &v);
        let res = (&got - &want).frobenius_norm();
        if res > tol.eps_eq * want.frobenius_norm().max(1.0) {
            return Err(Error::IdentityViolated { pair: format!("reconstruction: eta={}", fmt_ket(&v)), residual: res });
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapcore::{choi_example, from_kraus, identity_map};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn identity_examples() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0]]);
        let r = check_parallelogram(&QuadraticFunction::from_map(&from_kraus(&b)), 20, &tol(), 0).unwrap();
        assert!(r.passed() && r.max_residual <= 1e-10);
        let quartic = QuadraticFunction::from_fn(2, 2, |v| ComplexMatrix::identity(2).scale_real(v.norm_sqr().powi(2)));
        let r = check_parallelogram(&quartic, 5, &tol(), 0).unwrap();
        assert_eq!(r.violation.unwrap().0, "parallelogram");
        assert!(check_parallelogram(&QuadraticFunction::trace_map(2, 2), 5, &tol(), 0).unwrap().passed());
    }

    #[test]
    fn trace_function_gives_trace_map() {
        let phi = reconstruct(&QuadraticFunction::trace_map(2, 2), &tol()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { ComplexMatrix::identity(2) } else { ComplexMatrix::zeros(2, 2) };
                assert!(phi.block(i, j).max_diff(&want) < 1e-15);
            }
        }
    }

    #[test]
    fn round_trips() {
        let phi = choi_example();
        assert!(reconstruct(&QuadraticFunction::from_map(&phi), &tol()).unwrap().max_diff(&phi) < 1e-10);
        let table = QuadraticFunction::from_table(3, 3, QuadraticFunction::from_map(&phi).tabulate().unwrap()).unwrap();
        assert_eq!(table.table().unwrap().len(), 36);
        assert!(reconstruct(&table, &tol()).unwrap().max_diff(&phi) < 1e-12);
        let id = identity_map(2);
        assert!(reconstruct(&QuadraticFunction::from_map(&id), &tol()).unwrap().max_diff(&id) < 1e-12);
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let phi = choi_example();
        let mut t = QuadraticFunction::from_map(&phi).tabulate().unwrap();
        t[6].1 = &t[6].1 + &ComplexMatrix::identity(3).scale_real(1e-3);
        let q = QuadraticFunction::from_table(3, 3, t).unwrap();
        match reconstruct(&q, &tol()) {
            Err(Error::IdentityViolated { pair, residual }) => {
                assert!(pair.contains("xi="), "{pair}");
                assert!(residual > 1e-4);
            }
            other => panic!("{other:?}"),
        }
        let partial = QuadraticFunction::from_table(3, 3, vec![]).unwrap();
        assert!(matches!(reconstruct(&partial, &tol()), Err(Error::MissingSample(_))));
    }
}
