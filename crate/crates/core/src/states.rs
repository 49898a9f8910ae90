//! Pure three-mode state families: generic standard form, fully symmetric, bisymmetric.

use nalgebra::Matrix6;

use crate::error::{Error, Result};
use crate::gaussian::{triangle_ok, CovMat3, LocalMixedness};

/// Relative allowance on the linear triangle factors inside [`epsilon_pm`].
pub const EPS_FACTOR_TOL: f64 = 1e-12;

/// Squeezing of the fully symmetric family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingSym {
    pub r: f64,
}

impl SqueezingSym {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::DomainError(format!("squeezing r = {r} must be finite and >= 0")));
        }
        Ok(SqueezingSym { r })
    }

    /// Local mixedness b(r) = sqrt(4 cosh 4r + 5) / 3.
    pub fn b(&self) -> f64 {
        sym_b(self.r)
    }

    /// Correlations (z1, z2).
    pub fn z(&self) -> (f64, f64) {
        sym_z(self.r)
    }
}

/// Squeezing of the bisymmetric family: `r1` shared by modes 1 and 2, `r3` for mode 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingBisym {
    pub r1: f64,
    pub r3: f64,
}

impl SqueezingBisym {
    pub fn new(r1: f64, r3: f64) -> Result<Self> {
        SqueezingSym::new(r1)?;
        SqueezingSym::new(r3)?;
        let a = [sym_b(r1), sym_b(r1), sym_b(r3)];
        if !triangle_ok(a) {
            return Err(Error::TriangleViolation { a });
        }
        Ok(SqueezingBisym { r1, r3 })
    }

    pub fn mixednesses(&self) -> [f64; 3] {
        let (b1, b3) = (sym_b(self.r1), sym_b(self.r3));
        [b1, b1, b3]
    }
}

/// 4 cosh 4r + 5, written so that nothing cancels.
fn sym_q2(r: f64) -> f64 {
    9.0 + 2.0 * (4.0 * r).exp_m1() + 2.0 * (-4.0 * r).exp_m1()
}

pub fn sym_b(r: f64) -> f64 {
    sym_q2(r).sqrt() / 3.0
}

pub fn sym_z(r: f64) -> (f64, f64) {
    let (up, down) = ((4.0 * r).exp_m1(), (-4.0 * r).exp_m1());
    let den = 3.0 * sym_q2(r).sqrt();
    ((2.0 * up - down) / den, (2.0 * down - up) / den)
}

/// Inverse of [`sym_b`] on b >= 1.
pub fn sym_r_from_b(b: f64) -> f64 {
    let c = ((9.0 * b * b - 5.0) / 4.0).max(1.0);
    c.acosh() / 4.0
}

/// Off-diagonal standard-form entries (eps+_ij, eps-_ij) for modes i, j given the third mode k.
pub fn epsilon_pm(ai: f64, aj: f64, ak: f64) -> Result<(f64, f64)> {
    let viol = || Error::TriangleViolation { a: [ai, aj, ak] };
    if !(ai >= 1.0 && aj >= 1.0 && ak >= 1.0) {
        return Err(viol());
    }
    let allow = EPS_FACTOR_TOL * ai.max(aj).max(ak);
    // The two sign-carrying factors; both are >= 0 exactly on the triangle region.
    let g1 = (ak - 1.0) - (ai - aj).abs();
    let g2 = (ai + aj) - (ak + 1.0);
    if g1 < -allow || g2 < -allow {
        return Err(viol());
    }
    let (g1, g2) = (g1.max(0.0), g2.max(0.0));
    let t1 = g1 * ((ai - aj).abs() + ak - 1.0) * ((ak + 1.0).powi(2) - (ai - aj).powi(2));
    let t2 = g2 * (ai + aj + ak + 1.0) * ((ai + aj).powi(2) - (ak - 1.0).powi(2));
    let (s1, s2) = (t1.max(0.0).sqrt(), t2.max(0.0).sqrt());
    let den = 4.0 * (ai * aj).sqrt();
    Ok(((s1 + s2) / den, (s1 - s2) / den))
}

/// Standard form of the pure state with local mixednesses `a`.
pub fn pure_standard_form(a: &LocalMixedness) -> Result<CovMat3> {
    a.check_triangle()?;
    let v = a.values();
    let mut m = Matrix6::zeros();
    for l in 0..3 {
        m[(2 * l, 2 * l)] = v[l];
        m[(2 * l + 1, 2 * l + 1)] = v[l];
    }
    for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let (ep, em) = epsilon_pm(v[i], v[j], v[k])?;
        m[(2 * i, 2 * j)] = ep;
        m[(2 * j, 2 * i)] = ep;
        m[(2 * i + 1, 2 * j + 1)] = em;
        m[(2 * j + 1, 2 * i + 1)] = em;
    }
    Ok(CovMat3::from_symmetric(m))
}

/// Fully symmetric pure squeezed vacuum.
pub fn symmetric_state(r: SqueezingSym) -> CovMat3 {
    let b = r.b();
    let (z1, z2) = r.z();
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let (q, p) = if i == j { (b, b) } else { (z1, z2) };
            m[(2 * i, 2 * j)] = q;
            m[(2 * i + 1, 2 * j + 1)] = p;
        }
    }
    CovMat3::from_symmetric(m)
}

/// Bisymmetric pure state with mixednesses (b(r1), b(r1), b(r3)).
pub fn bisymmetric_state(p: SqueezingBisym) -> Result<CovMat3> {
    pure_standard_form(&LocalMixedness::from_array(p.mixednesses())?)
}

/// Closed-form ordinary spectrum of [`symmetric_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSpectrumSym {
    pub lambda: [f64; 4],
}

impl EigenSpectrumSym {
    pub const MULTIPLICITIES: [usize; 4] = [2, 2, 1, 1];

    /// All six eigenvalues with multiplicity, ascending.
    pub fn expanded(&self) -> [f64; 6] {
        let l = self.lambda;
        let mut v = [l[0], l[0], l[1], l[1], l[2], l[3]];
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn symmetric_eigenvalues(r: SqueezingSym) -> EigenSpectrumSym {
    let (up, down) = ((4.0 * r.r).exp(), (-4.0 * r.r).exp());
    let q = sym_q2(r.r).sqrt();
    EigenSpectrumSym {
        lambda: [
            (down + 2.0) / q,
            (up + 2.0) / q,
            (2.0 * up + 1.0) / q,
            (2.0 * down + 1.0) / q,
        ],
    }
}

/// Closed-form ordinary spectrum of [`bisymmetric_state`]: gamma1..3 from the q
/// quadratures and gamma4..6 from the p quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSpectrumBisym {
    pub gamma: [f64; 6],
    pub b1: f64,
    pub b3: f64,
}

impl EigenSpectrumBisym {
    pub fn sorted(&self) -> [f64; 6] {
        let mut v = self.gamma;
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Eigenvalues of [[b1 + x, sqrt2 y], [sqrt2 y, b3]], smaller first.
pub(crate) fn sym2_eigen(b1: f64, b3: f64, x: f64, y: f64) -> (f64, f64) {
    let tr = b1 + x + b3;
    let rt = ((b1 + x - b3).powi(2) + 8.0 * y * y).sqrt();
    let hi = 0.5 * (tr + rt);
    let det = (b1 + x) * b3 - 2.0 * y * y;
    let lo = if hi > 0.0 { det / hi } else { 0.5 * (tr - rt) };
    (lo, hi)
}

pub fn bisymmetric_eigenvalues(p: SqueezingBisym) -> Result<EigenSpectrumBisym> {
    let [b1, _, b3] = p.mixednesses();
    let (e12p, e12m) = epsilon_pm(b1, b1, b3)?;
    let (e13p, e13m) = epsilon_pm(b1, b3, b1)?;
    let (g2, g3) = sym2_eigen(b1, b3, e12p, e13p);
    let (g5, g6) = sym2_eigen(b1, b3, e12m, e13m);
    Ok(EigenSpectrumBisym {
        gamma: [b1 - e12p, g2, g3, b1 - e12m, g5, g6],
        b1,
        b3,
    })
}

/// |eps+(b,b,b) - z1(r)| and |eps-(b,b,b) - z2(r)|.
pub fn verify_parametrization_equivalence(r: SqueezingSym) -> (f64, f64) {
    let b = r.b();
    let (z1, z2) = r.z();
    let (ep, em) = epsilon_pm(b, b, b).expect("(b,b,b) always satisfies the triangle inequality");
    ((ep - z1).abs(), (em - z2).abs())
}
