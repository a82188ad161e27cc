//! Decomposability: `J = S1 + PT(S2)` with `S1, S2` positive semidefinite, or
//! a PPT witness `W` (`W >= 0`, `PT(W) >= 0`) with `Tr(J W) < 0`.
//!
//! Decomposable Choi matrices form the cone `PSD + PT(PSD)`, whose dual is the
//! cone of PPT operators, so a negative pairing certifies that no
//! decomposition exists. The two searches below are independent: one looks
//! for a decomposition, the other for a witness. Neither alone settles every
//! map; `Inconclusive` is a legitimate answer.
//!
//! The feasibility search runs Dykstra alternating projections between the
//! cone `PSD x PSD` and the affine slice `S1 + PT(S2) = J`. When these stall
//! it solves `max t` subject to `S1 - tI >= 0`, `PT(J - S1) - tI >= 0` with a
//! log-barrier Newton method, which also handles decompositions on the
//! boundary of the cone.

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky, cholesky_solve_real, hpd_inverse, ComplexMatrix, ToleranceConfig, C64, ONE, ZERO};
use crate::mapcore::LinearMap;
use crate::random;

/// Outcome of either search.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompResult {
    /// `||J - S1 - PT(S2)||_F = residual`.
    Decomposed { s1: ComplexMatrix, s2: ComplexMatrix, residual: f64 },
    /// `W` and `PT(W)` positive semidefinite, `Tr W = 1`, `value = Tr(J W)`.
    WitnessFound { w: ComplexMatrix, value: f64 },
    /// `best_residual` is the smallest slice residual seen by the
    /// feasibility search (NaN from the witness search);
    /// `best_witness_value` is the best value of `Tr(J W)` (from the feasibility
    /// search: twice the best margin `t`, a lower bound for it).
    Inconclusive { iterations: usize, best_residual: f64, best_witness_value: f64 },
}

impl DecompResult {
    pub fn verdict(&self) -> &'static str {
        match self {
            DecompResult::Decomposed { .. } => "decomposed",
            DecompResult::WitnessFound { .. } => "witness_found",
            DecompResult::Inconclusive { .. } => "inconclusive",
        }
    }
}

fn check_hermitian(phi: &LinearMap, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let j = phi.to_choi();
    if !j.is_hermitian(tol.eps_eq * j.max_abs().max(1.0)) {
        return Err(Error::DimensionMismatch("map is not Hermiticity-preserving".into()));
    }
    Ok(j.hermitian_part())
}

fn pt(m: &ComplexMatrix, k: usize, h: usize) -> ComplexMatrix {
    linalg::partial_transpose_first(m, k, h).expect("square kh x kh matrix")
}

/// Searches for `J = S1 + PT(S2)` with both terms positive semidefinite.
pub fn decompose_search(phi: &LinearMap, tol: &ToleranceConfig, max_iters: usize) -> Result<DecompResult> {
    let (k, h) = (phi.dim_in(), phi.dim_out());
    let n = k * h;
    let j = check_hermitian(phi, tol)?;
    let ptj = pt(&j, k, h);
    if linalg::is_psd(&j, tol)?.0 {
        return Ok(DecompResult::Decomposed { s1: j, s2: ComplexMatrix::zeros(n, n), residual: 0.0 });
    }
    if linalg::is_psd(&ptj, tol)?.0 {
        return Ok(DecompResult::Decomposed { s1: ComplexMatrix::zeros(n, n), s2: ptj, residual: 0.0 });
    }
    let target = tol.eps_psd * j.frobenius_norm().max(1.0);

    // Dykstra between PSD x PSD and the affine slice.
    let mut x1 = j.scale_real(0.5);
    let mut x2 = ptj.scale_real(0.5);
    let (mut p1, mut p2) = (ComplexMatrix::zeros(n, n), ComplexMatrix::zeros(n, n));
    let mut best_residual = f64::INFINITY;
    let mut checkpoint = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        let y1 = linalg::psd_projection(&(&x1 + &p1))?;
        let y2 = linalg::psd_projection(&(&x2 + &p2))?;
        p1 = &(&x1 + &p1) - &y1;
        p2 = &(&x2 + &p2) - &y2;
        let r = &(&j - &y1) - &pt(&y2, k, h);
        let res = r.frobenius_norm();
        best_residual = best_residual.min(res);
        if res <= target {
            return Ok(DecompResult::Decomposed { s1: y1, s2: y2, residual: res });
        }
        // Projection onto the slice: the constraint map (S1, S2) -> S1 + PT(S2)
        // has orthogonal rows of norm sqrt(2).
        x1 = &y1 + &r.scale_real(0.5);
        x2 = &y2 + &pt(&r, k, h).scale_real(0.5);
        if it % 100 == 99 {
            if res > 0.9 * checkpoint {
                break;
            }
            checkpoint = res;
        }
    }

    let out = barrier_margin(&j, k, h, tol)?;
    iterations += out.iterations;
    if out.t >= -tol.eps_psd / 2.0 {
        let s2 = pt(&(&j - &out.s1), k, h);
        let residual = (&(&j - &out.s1) - &pt(&s2, k, h)).frobenius_norm();
        return Ok(DecompResult::Decomposed { s1: out.s1, s2, residual });
    }
    Ok(DecompResult::Inconclusive { iterations, best_residual, best_witness_value: 2.0 * out.t })
}

/// A direction in the `(S1, t)` space as its sparse effect on the two
/// barrier arguments.
struct Direction {
    f1: Vec<(usize, usize, C64)>,
    f2: Vec<(usize, usize, C64)>,
}

struct BarrierOutcome {
    s1: ComplexMatrix,
    t: f64,
    iterations: usize,
}

fn log_det(f: &ComplexMatrix) -> Option<f64> {
    let l = cholesky(f)?;
    Some((0..f.rows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Maximizes `t` subject to `S1 >= tI` and `PT(J - S1) >= tI` by a
/// path-following barrier method. Stops early once `t >= 0` (a decomposition)
/// or once the duality-gap bound shows the optimum is below `-eps_psd / 2`.
fn barrier_margin(j: &ComplexMatrix, k: usize, h: usize, tol: &ToleranceConfig) -> Result<BarrierOutcome> {
    let n = k * h;
    let pt_index = |r: usize, c: usize| {
        let (i, a, jj, b) = (r / h, r % h, c / h, c % h);
        (jj * h + a, i * h + b)
    };
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut dirs: Vec<Direction> = Vec::with_capacity(n * n + 1);
    let mut basis: Vec<Vec<(usize, usize, C64)>> = Vec::with_capacity(n * n);
    for i in 0..n {
        basis.push(vec![(i, i, ONE)]);
    }
    for i in 0..n {
        for jj in (i + 1)..n {
            basis.push(vec![(i, jj, C64::new(r2, 0.0)), (jj, i, C64::new(r2, 0.0))]);
            basis.push(vec![(i, jj, C64::new(0.0, -r2)), (jj, i, C64::new(0.0, r2))]);
        }
    }
    for b in &basis {
        let f2 = b
            .iter()
            .map(|&(r, c, v)| {
                let (pr, pc) = pt_index(r, c);
                (pr, pc, -v)
            })
            .collect();
        dirs.push(Direction { f1: b.clone(), f2 });
    }
    let minus_id: Vec<(usize, usize, C64)> = (0..n).map(|i| (i, i, -ONE)).collect();
    dirs.push(Direction { f1: minus_id.clone(), f2: minus_id });
    let m = dirs.len();

    let barrier_args = |s1: &ComplexMatrix, t: f64| {
        let shift = ComplexMatrix::identity(n).scale_real(t);
        (s1 - &shift, &pt(&(j - s1), k, h) - &shift)
    };
    let value = |s1: &ComplexMatrix, t: f64, s: f64| -> f64 {
        let (f1, f2) = barrier_args(s1, t);
        match (log_det(&f1), log_det(&f2)) {
            (Some(a), Some(b)) => -s * t - a - b,
            _ => f64::INFINITY,
        }
    };

    let mut s1 = j.scale_real(0.5);
    let mut t = linalg::min_eigenvalue(&s1)?.min(linalg::min_eigenvalue(&pt(&(j - &s1), k, h))?) - 1.0;
    let mut s = 1.0;
    let stop_gap = 1e-10 * j.max_abs().max(1.0);
    let mut iterations = 0;
    loop {
        for _ in 0..100 {
            iterations += 1;
            let (f1, f2) = barrier_args(&s1, t);
            let (Some(l1), Some(l2)) = (cholesky(&f1), cholesky(&f2)) else {
                return Err(Error::NotPsd(t));
            };
            let (g1, g2) = (hpd_inverse(&l1), hpd_inverse(&l2));
            let tr = |g: &ComplexMatrix, d: &[(usize, usize, C64)]| -> f64 { d.iter().map(|&(r, c, v)| (v * g[(c, r)]).re).sum() };
            let grad: Vec<f64> =
                (0..m).map(|a| -(if a == m - 1 { s } else { 0.0 }) - tr(&g1, &dirs[a].f1) - tr(&g2, &dirs[a].f2)).collect();
            // Tr(G E_ij G E_kl) = G_li G_jk
            let pair = |g: &ComplexMatrix, da: &[(usize, usize, C64)], db: &[(usize, usize, C64)]| -> f64 {
                let mut acc = ZERO;
                for &(i, jj, c) in da {
                    for &(kk, l, d) in db {
                        acc += c * d * g[(l, i)] * g[(jj, kk)];
                    }
                }
                acc.re
            };
            let mut hess = vec![0.0; m * m];
            for a in 0..m {
                for b in a..m {
                    let v = pair(&g1, &dirs[a].f1, &dirs[b].f1) + pair(&g2, &dirs[a].f2, &dirs[b].f2);
                    hess[a * m + b] = v;
                    hess[b * m + a] = v;
                }
            }
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            let dx = match cholesky_solve_real(&hess, m, &neg) {
                Some(dx) => dx,
                None => {
                    for a in 0..m {
                        hess[a * m + a] += 1e-12 * hess[a * m + a].abs().max(1.0);
                    }
                    cholesky_solve_real(&hess, m, &neg).ok_or(Error::NotPsd(0.0))?
                }
            };
            let dec: f64 = neg.iter().zip(&dx).map(|(a, b)| a * b).sum();
            if dec / 2.0 < 1e-10 {
                break;
            }
            let mut ds = ComplexMatrix::zeros(n, n);
            for (a, d) in dirs.iter().enumerate().take(m - 1) {
                for &(r, c, v) in &d.f1 {
                    ds[(r, c)] += v * dx[a];
                }
            }
            let f0 = value(&s1, t, s);
            let mut step = 1.0;
            while value(&(&s1 + &ds.scale_real(step)), t + step * dx[m - 1], s) > f0 - 0.25 * step * dec {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
            if step < 1e-12 {
                break;
            }
            s1 = &s1 + &ds.scale_real(step);
            t += step * dx[m - 1];
            if t >= 0.0 {
                return Ok(BarrierOutcome { s1, t, iterations });
            }
        }
        let gap = 2.0 * n as f64 / s;
        if gap < stop_gap || t + gap < -tol.eps_psd / 2.0 {
            return Ok(BarrierOutcome { s1, t, iterations });
        }
        s *= 8.0;
    }
}

/// Projection onto `{W >= 0, PT(W) >= 0, Tr W = 1}` by Dykstra's method.
fn project_ppt_states(x: &ComplexMatrix, k: usize, h: usize) -> Result<ComplexMatrix> {
    let n = x.rows();
    let (mut p, mut q, mut r) = (ComplexMatrix::zeros(n, n), ComplexMatrix::zeros(n, n), ComplexMatrix::zeros(n, n));
    let mut y = x.clone();
    for _ in 0..200 {
        let a = linalg::psd_projection(&(&y + &p))?;
        p = &(&y + &p) - &a;
        let b = pt(&linalg::psd_projection(&pt(&(&a + &q), k, h))?, k, h);
        q = &(&a + &q) - &b;
        let z = &b + &r;
        let shift = (1.0 - z.trace().re) / n as f64;
        let z2 = &z + &ComplexMatrix::identity(n).scale_real(shift);
        r = &z - &z2;
        let change = (&z2 - &y).frobenius_norm();
        y = z2;
        if change < 1e-12 {
            break;
        }
    }
    Ok(y.hermitian_part())
}

/// Minimizes `Tr(J W)` over PPT states `W` (unit trace) by projected
/// gradient with step `1 / ||J||`. A value below `-eps_psd max(1, ||J||_F)`
/// is returned as a witness after the final iterate is shifted into the PPT
/// cone and both positivity conditions are re-verified at `eps_psd / 10`.
pub fn ppt_witness_search(phi: &LinearMap, tol: &ToleranceConfig, restarts: usize, max_iters: usize, seed: u64) -> Result<DecompResult> {
    let (k, h) = (phi.dim_in(), phi.dim_out());
    let n = k * h;
    let j = check_hermitian(phi, tol)?;
    let eig = linalg::eig_hermitian(&j)?;
    let l = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = tol.eps_psd * j.frobenius_norm().max(1.0);
    if l == 0.0 {
        return Ok(DecompResult::Inconclusive { iterations: 0, best_residual: f64::NAN, best_witness_value: 0.0 });
    }
    // J or PT(J) positive: Tr(J W) >= 0 on every PPT state, so no search is
    // needed. Report the value at the maximally mixed state.
    if linalg::is_psd(&j, tol)?.0 || linalg::is_psd(&pt(&j, k, h), tol)?.0 {
        let value = j.trace().re / n as f64;
        return Ok(DecompResult::Inconclusive { iterations: 0, best_residual: f64::NAN, best_witness_value: value });
    }
    let mut rng = random::rng_from_seed(seed);
    let mut best: Option<(ComplexMatrix, f64)> = None;
    let mut iterations = 0;
    for run in 0..restarts.max(1) {
        let start = if run == 0 {
            ComplexMatrix::identity(n).scale_real(1.0 / n as f64)
        } else {
            random::psd_matrix(&mut rng, n, n)
        };
        let mut w = project_ppt_states(&start, k, h)?;
        let mut prev = f64::INFINITY;
        let mut calm = 0;
        let mut checkpoint = f64::INFINITY;
        let budget = max_iters.max(1);
        for it in 0..budget {
            iterations += 1;
            w = project_ppt_states(&(&w - &j.scale_real(1.0 / l)), k, h)?;
            let v = j.inner(&w).re;
            if (prev - v).abs() <= tol.opt_tol * v.abs().max(1.0) {
                calm += 1;
                if calm >= 5 {
                    break;
                }
            } else {
                calm = 0;
            }
            prev = v;
            // Projected-gradient decrements do not grow, so the last block's
            // decrease bounds every later block. Stop once even that rate
            // cannot bring the value below the threshold within the budget.
            if it % 50 == 49 {
                let blocks_left = (budget - it - 1) as f64 / 50.0;
                if v >= -threshold && (checkpoint - v) * blocks_left < v + threshold {
                    break;
                }
                checkpoint = v;
            }
        }
        let w = repair(&w, k, h)?;
        let v = j.inner(&w).re;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((w, v));
        }
    }
    let (w, value) = best.expect("at least one restart");
    let strict = ToleranceConfig { eps_psd: tol.eps_psd / 10.0, ..*tol };
    if value < -threshold && linalg::is_psd(&w, &strict)?.0 && linalg::is_psd(&pt(&w, k, h), &strict)?.0 {
        return Ok(DecompResult::WitnessFound { w, value });
    }
    Ok(DecompResult::Inconclusive { iterations, best_residual: f64::NAN, best_witness_value: value })
}

/// Shifts `W` by a multiple of the identity (invariant under the partial
/// transpose) so both `W` and `PT(W)` are positive semidefinite, then restores
/// unit trace.
fn repair(w: &ComplexMatrix, k: usize, h: usize) -> Result<ComplexMatrix> {
    let n = w.rows();
    let m = linalg::min_eigenvalue(w)?.min(linalg::min_eigenvalue(&pt(w, k, h))?);
    let delta = (-m).max(0.0);
    let shifted = w + &ComplexMatrix::identity(n).scale_real(delta);
    let tr = shifted.trace().re;
    Ok(shifted.scale_real(1.0 / tr))
}

/// `Tr(J W)` where `W` is checked against the PPT conditions at `eps_psd`.
pub fn verify_witness(phi: &LinearMap, w: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(bool, f64)> {
    let (k, h) = (phi.dim_in(), phi.dim_out());
    let j = phi.to_choi();
    if w.rows() != j.rows() || w.cols() != j.cols() {
        return Err(Error::DimensionMismatch(format!("witness {}x{} for Choi matrix {}x{}", w.rows(), w.cols(), j.rows(), j.cols())));
    }
    let ok = linalg::is_psd(&w.hermitian_part(), tol)?.0 && linalg::is_psd(&pt(&w.hermitian_part(), k, h), tol)?.0;
    Ok((ok, j.inner(w).re))
}
