//! Decomposition of an operator relative to a unit vector `x`.
//!
//! Every `Y` on `C^h` splits uniquely as `Y = alpha xx* + u x* + x v* + Z` with
//! `u, v` orthogonal to `x` and `Z` supported on the orthocomplement `H_x`.
//! `Y` is PSD exactly when `alpha >= 0`, `Z >= 0`, `u = v` and `uu* <= alpha Z`.
//!
//! For a map in the face `G_{xi,x}` the values `phi(eta xi*)` and
//! `phi(eta eta*)` are read in this form, giving the components
//! `(beta, u, v, mu, r, R)` whose inequalities are checked here.
//!
//! Coordinates on `H_x` are taken in a fixed Householder completion of `x`
//! (see [`orthocomplement_basis`]), so `u`, `v`, `r`, `Z`, `R` are stored as
//! coordinate vectors and matrices of size `h - 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::faces;
use crate::linalg::{self, outer, ComplexMatrix, Ket, ToleranceConfig, C64, ONE, ZERO};
use crate::mapcore::LinearMap;
use crate::random;

/// `(alpha, u, v, Z)` together with the basis of `H_x` used for coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockForm {
    pub alpha: C64,
    pub u: Ket,
    pub v: Ket,
    pub z: ComplexMatrix,
    pub basis: Vec<Ket>,
}

impl BlockForm {
    /// `u` as a vector of `C^h`.
    pub fn u_vector(&self) -> Ket {
        embed(&self.basis, &self.u)
    }

    /// `v` as a vector of `C^h`.
    pub fn v_vector(&self) -> Ket {
        embed(&self.basis, &self.v)
    }
}

/// Orthonormal basis of the orthocomplement of the unit vector `x`: columns
/// `2..h` of the Householder reflection mapping `e_1` to a phase multiple of
/// `x`. For `x = e_1` this is `e_2, ..., e_h`.
pub fn orthocomplement_basis(x: &Ket) -> Vec<Ket> {
    let h = x.dim();
    let x0 = x[0];
    let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
    // w = x + phase e_1; H = I - 2 w w* / ||w||^2 sends e_1 to -phase^* ... x up to phase.
    let mut w = x.clone();
    w[0] += phase;
    let wn = w.norm_sqr();
    (1..h)
        .map(|c| {
            let e = Ket::basis(h, c);
            let coef = C64::new(-2.0 / wn, 0.0) * w.dot(&e);
            e.axpy(coef, &w)
        })
        .collect()
}

fn embed(basis: &[Ket], coords: &Ket) -> Ket {
    let h = basis.first().map_or(coords.dim() + 1, Ket::dim);
    basis.iter().enumerate().fold(Ket::zeros(h), |acc, (m, b)| acc.axpy(coords[m], b))
}

fn coords(basis: &[Ket], v: &Ket) -> Ket {
    Ket::from_vec_unchecked(basis.iter().map(|b| b.dot(v)).collect())
}

fn compress(basis: &[Ket], y: &ComplexMatrix) -> ComplexMatrix {
    let yb: Vec<Ket> = basis.iter().map(|b| y.mul_ket(b)).collect();
    ComplexMatrix::from_fn(basis.len(), basis.len(), |m, n| basis[m].dot(&yb[n]))
}

fn expand(basis: &[Ket], z: &ComplexMatrix) -> ComplexMatrix {
    let h = basis.first().map_or(1, Ket::dim);
    let mut out = ComplexMatrix::zeros(h, h);
    for (m, bm) in basis.iter().enumerate() {
        for (n, bn) in basis.iter().enumerate() {
            let c = z[(m, n)];
            if c != ZERO {
                out = &out + &outer(bm, bn).scale(c);
            }
        }
    }
    out
}

/// Splits `Y` relative to the unit vector `x`.
pub fn decompose_at(y: &ComplexMatrix, x: &Ket, tol: &ToleranceConfig) -> Result<BlockForm> {
    let h = y.require_square()?;
    if x.dim() != h {
        return Err(Error::DimensionMismatch(format!("vector of dim {} for a {h}x{h} operator", x.dim())));
    }
    x.require_unit(tol.eps_eq.max(1e-12))?;
    let basis = orthocomplement_basis(x);
    let yx = y.mul_ket(x);
    let ystar_x = y.adjoint().mul_ket(x);
    Ok(BlockForm {
        alpha: x.dot(&yx),
        u: coords(&basis, &yx),
        v: coords(&basis, &ystar_x),
        z: compress(&basis, y),
        basis,
    })
}

/// `alpha xx* + u x* + x v* + Z`.
pub fn recompose(f: &BlockForm, x: &Ket) -> Result<ComplexMatrix> {
    let h = x.dim();
    if f.basis.len() + 1 != h || f.u.dim() + 1 != h || f.v.dim() + 1 != h || f.z.rows() + 1 != h || !f.z.is_square() {
        return Err(Error::DimensionMismatch(format!("block form does not fit a vector of dim {h}")));
    }
    let u = f.u_vector();
    let v = f.v_vector();
    let mut y = outer(x, x).scale(f.alpha);
    y = &y + &outer(&u, x);
    y = &y + &outer(x, &v);
    Ok(&y + &expand(&f.basis, &f.z))
}

/// PSD test through the block criterion. When `alpha <= eps_psd` the
/// criterion degenerates and `u` is required to vanish.
pub fn psd_via_form(f: &BlockForm, tol: &ToleranceConfig) -> bool {
    if f.alpha.im.abs() > tol.eps_eq.max(tol.eps_psd) {
        return false;
    }
    let alpha = f.alpha.re;
    if alpha < -tol.eps_psd {
        return false;
    }
    if f.u.axpy(-ONE, &f.v).norm() > tol.eps_eq {
        return false;
    }
    if f.z.rows() == 0 {
        return true;
    }
    let (z_ok, _) = linalg::is_psd(&f.z, tol).expect("Z is square");
    if !z_ok {
        return false;
    }
    if alpha <= tol.eps_psd {
        return f.u.norm() <= tol.eps_eq;
    }
    let gap = &f.z.scale_real(alpha) - &outer(&f.u, &f.u);
    linalg::min_eigenvalue(&gap).expect("square") >= -tol.eps_psd
}

/// Components of `phi(eta xi*)` and `phi(eta eta*)` for a map in `G_{xi,x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentForm {
    pub beta: C64,
    pub u: Ket,
    pub v: Ket,
    pub mu: f64,
    pub r: Ket,
    pub rop: ComplexMatrix,
}

/// The functional `Y -> Tr(rho Y)` with `rho = sigma xx* + x s* + s x* + S`,
/// positive whenever `ss* <= sigma S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFunctional {
    pub sigma: f64,
    pub s: Ket,
    pub smat: ComplexMatrix,
}

/// Reads the components of `phi` at `eta` relative to the seed `(xi, x)`.
///
/// Fails with `NotInFace` if `phi(xi xi*)` is not a multiple of `xx*` or if
/// the compression of `phi(eta xi*)` to `H_x` does not vanish.
pub fn extract_components(phi: &LinearMap, xi: &Ket, x: &Ket, eta: &Ket, tol: &ToleranceConfig) -> Result<ComponentForm> {
    let (member, _) = faces::in_g(phi, xi, x, tol)?;
    if !member {
        let y = phi.apply_outer(xi, xi);
        let lam = y.sandwich(x, x);
        let residual = (&y - &outer(x, x).scale(lam)).frobenius_norm();
        return Err(Error::NotInFace(residual));
    }
    let mixed = phi.apply_outer(eta, xi);
    let f = decompose_at(&mixed, x, tol)?;
    let zn = f.z.frobenius_norm();
    let scale = phi.norm().max(1.0) * eta.norm_sqr().max(1.0);
    if zn > tol.eps_eq.max(1e-9) * 10.0 * scale {
        return Err(Error::NotInFace(zn));
    }
    let g = decompose_at(&phi.apply_outer(eta, eta), x, tol)?;
    Ok(ComponentForm { beta: f.alpha, u: f.u, v: f.v, mu: g.alpha.re, r: g.u, rop: g.z })
}

/// One failed inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityViolation {
    /// Which inequality: `"klucz"`, `"beta"`, `"r_bound"` or `"re_bound"`.
    pub kind: &'static str,
    /// Index of the probe or direction (0 for the scalar check).
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub checked: usize,
    pub violations: Vec<InequalityViolation>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn slack(tol: &ToleranceConfig, lhs: f64, rhs: f64) -> f64 {
    tol.eps_psd * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Evaluates the probe inequality for every probe functional, the two
/// directional inequalities for every unit direction in `H_x` coordinates,
/// and `|beta|^2 <= lambda mu`.
pub fn check_component_inequalities(
    c: &ComponentForm,
    lambda: f64,
    tol: &ToleranceConfig,
    probes: &[ProbeFunctional],
    directions: &[Ket],
) -> InequalityReport {
    let mut violations = Vec::new();
    let mut record = |kind, index, lhs: f64, rhs: f64| {
        if lhs > rhs + slack(tol, lhs, rhs) {
            violations.push(InequalityViolation { kind, index, lhs, rhs });
        }
    };
    let b2 = c.beta.norm_sqr();
    record("beta", 0, b2, lambda * c.mu);
    for (idx, p) in probes.iter().enumerate() {
        let lhs = (c.beta * p.sigma + p.s.dot(&c.u) + c.v.dot(&p.s)).norm_sqr();
        let tr_sr = (&p.smat * &c.rop).trace().re;
        let rhs = p.sigma * lambda * (p.sigma * c.mu + 2.0 * p.s.dot(&c.r).re + tr_sr);
        record("klucz", idx, lhs, rhs);
    }
    let w = c.r.scale(C64::new(lambda, 0.0)).axpy(-c.beta.conj(), &c.u).axpy(-c.beta, &c.v);
    for (idx, y) in directions.iter().enumerate() {
        let a = (y.dot(&c.u) + c.v.dot(y)).norm_sqr();
        let ry = c.rop.sandwich(y, y).re;
        record("r_bound", idx, a, lambda * ry);
        let lhs = y.dot(&w).re.powi(2);
        let rhs = (lambda * c.mu - b2) * (lambda * ry - a);
        record("re_bound", idx, lhs, rhs);
    }
    InequalityReport { checked: 1 + probes.len() + 2 * directions.len(), violations }
}

/// `(lambda mu - |beta|^2)(lambda R - ww*) - (lambda r - c w)(lambda r - c w)*`
/// together with the sign conditions on its two factors.
fn wu_holds(c: &ComponentForm, lambda: f64, w: &Ket, coef: C64, tol: &ToleranceConfig) -> bool {
    let a = lambda * c.mu - c.beta.norm_sqr();
    let scale = (lambda * c.mu).abs().max(c.beta.norm_sqr()).max(1.0);
    if a < -tol.eps_psd * scale {
        return false;
    }
    if c.rop.rows() == 0 {
        return true;
    }
    let zp = &c.rop.scale_real(lambda) - &outer(w, w);
    let zscale = zp.max_abs().max(1.0);
    if linalg::min_eigenvalue(&zp).expect("square") < -tol.eps_psd * zscale {
        return false;
    }
    let d = c.r.scale(C64::new(lambda, 0.0)).axpy(-coef, w);
    let m = &zp.scale_real(a) - &outer(&d, &d);
    let mscale = m.max_abs().max(scale * zscale).max(1.0);
    linalg::min_eigenvalue(&m).expect("square") >= -tol.eps_psd * mscale
}

/// Matrix criterion equivalent to the pointwise domination inequality at a
/// fixed `eta`: returns `(psi side, chi side)`.
pub fn check_wu(c: &ComponentForm, lambda: f64, tol: &ToleranceConfig) -> (bool, bool) {
    (wu_holds(c, lambda, &c.u, c.beta.conj(), tol), wu_holds(c, lambda, &c.v, c.beta, tol))
}

/// Default probe functionals in `H_x` coordinates of dimension `dim`:
/// `S = ss*/sigma + G G*` with Gaussian `s`, `G` and log-uniform `sigma`.
pub fn default_probes(dim: usize, count: usize, seed: u64) -> Vec<ProbeFunctional> {
    let mut rng = random::rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let sigma = 2f64.powf(rand::Rng::random_range(&mut rng, -3.0..3.0));
            let s = random::gaussian_ket(&mut rng, dim);
            let extra = random::psd_matrix(&mut rng, dim, dim.max(1));
            let smat = &outer(&s, &s).scale_real(1.0 / sigma) + &extra;
            ProbeFunctional { sigma, s, smat }
        })
        .collect()
}

/// Default unit directions in `H_x` coordinates.
pub fn default_directions(dim: usize, count: usize, seed: u64) -> Vec<Ket> {
    if dim == 0 {
        return Vec::new();
    }
    let mut rng = random::rng_from_seed(seed);
    (0..count).map(|_| random::unit_ket(&mut rng, dim)).collect()
}
