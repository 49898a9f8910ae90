//! Closed-form residual contangle of pure three-mode states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{tol, LocalMixedness};

/// Relative allowance for the eight-factor discriminant before it counts as negative.
pub const DELTA_TOL: f64 = 1e-10;
/// Below this |D| both branches coincide and m- is used.
pub const D_TIE: f64 = 1e-12;
/// Minimum (s-d)^2 - 1 for the m- branch.
pub const DENOM_MIN: f64 = 1e-12;
/// Negative residuals down to this are rounding and get clamped to 0.
pub const MONOGAMY_TOL: f64 = 1e-9;

/// arcsinh^2(sqrt(a^2 - 1)) written as acosh(a)^2.
fn asinh2_sqrt(m: f64) -> f64 {
    let x = m.max(1.0).acosh();
    x * x
}

/// Contangle between the reference mode and the other two, E = arcsinh^2(sqrt(a^2 - 1)).
pub fn contangle_pure_one_vs_rest(a_ref: f64) -> Result<f64> {
    if !(a_ref >= 1.0 - tol::MIXEDNESS_CLAMP) {
        return Err(Error::DomainError(format!("reference mixedness {a_ref} < 1")));
    }
    Ok(asinh2_sqrt(a_ref))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MBranch {
    Minus,
    Plus,
}

/// Intermediates for one argument set (a, s, d) of m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MTerms {
    pub k_plus: f64,
    pub k_minus: f64,
    pub delta: f64,
    pub big_d: f64,
    pub m_minus: f64,
    pub m_plus: f64,
    pub branch: MBranch,
    pub m: f64,
    /// arcsinh^2(sqrt(m^2 - 1)), the pairwise contangle.
    pub contangle: f64,
}

/// Everything that goes into Q(a, s, d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QIntermediates {
    pub a: f64,
    pub s: f64,
    pub d: f64,
    /// Terms of m(a, s, d).
    pub pos: MTerms,
    /// Terms of m(a, s, -d).
    pub neg: MTerms,
    pub q: f64,
}

fn m_terms(a: f64, s: f64, d: f64) -> Result<MTerms> {
    let spd = s + d;
    let smd = s - d;
    let k_plus = a * a + spd * spd;
    let k_minus = (a - spd) * (a + spd);

    // Eight factors grouped in four products (x - 1)(x + 1).
    let f = |x: f64| (x - 1.0) * (x + 1.0);
    let (x1, x2, x3, x4) = (a - 2.0 * d, a + 2.0 * d, a - 2.0 * s, a + 2.0 * s);
    let mut delta = f(x1) * f(x2) * f(x3) * f(x4);
    let scale = (x1 * x1 + 1.0) * (x2 * x2 + 1.0) * (x3 * x3 + 1.0) * (x4 * x4 + 1.0);
    if delta < 0.0 {
        if delta < -DELTA_TOL * scale {
            return Err(Error::NegativeDiscriminant { delta });
        }
        delta = 0.0;
    }

    let km2 = k_minus * k_minus;
    let inner = km2 + 2.0 * k_plus + k_minus.abs() * (km2 + 8.0 * k_plus).sqrt();
    let big_d = 2.0 * smd - (2.0 * inner / k_plus).sqrt();

    let denom = (smd - 1.0) * (smd + 1.0);
    let m_minus = if denom > 0.0 { k_minus.abs() / denom } else { f64::INFINITY };
    let bracket = 2.0 * a * a * (1.0 + 2.0 * s * s + 2.0 * d * d)
        - (4.0 * s * s - 1.0) * (4.0 * d * d - 1.0)
        - a.powi(4)
        - delta.sqrt();
    let m_plus = (2.0 * bracket.max(0.0)).sqrt() / (4.0 * smd);

    let branch = if big_d <= D_TIE { MBranch::Minus } else { MBranch::Plus };
    let m = match branch {
        MBranch::Minus => {
            if denom < DENOM_MIN {
                return Err(Error::DegenerateDenominator { value: denom });
            }
            m_minus
        }
        MBranch::Plus => m_plus,
    };
    if !(m >= 1.0 - tol::PHYSICAL) {
        return Err(Error::DomainError(format!(
            "selected m = {m} < 1 at (a, s, d) = ({a}, {s}, {d})"
        )));
    }
    Ok(MTerms {
        k_plus,
        k_minus,
        delta,
        big_d,
        m_minus,
        m_plus,
        branch,
        m,
        contangle: asinh2_sqrt(m),
    })
}

/// Q(a, s, d) = arcsinh^2 sqrt(m(a,s,d)^2 - 1) + arcsinh^2 sqrt(m(a,s,-d)^2 - 1).
pub fn q_function(a: f64, s: f64, d: f64) -> Result<QIntermediates> {
    if ![a, s, d].iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let pos = m_terms(a, s, d)?;
    let neg = m_terms(a, s, -d)?;
    Ok(QIntermediates {
        a,
        s,
        d,
        pos,
        neg,
        q: pos.contangle + neg.contangle,
    })
}

/// Minimizing pure state reported by the mixed-state solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Minimizer {
    Symmetric { r_m: f64 },
    Bisymmetric { r1m: f64, r3m: f64 },
    Mixedness { a: [f64; 3] },
}

/// Solver bookkeeping attached to mixed-state reports.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Diagnostics {
    pub method: String,
    pub iterations: usize,
    pub residual: f64,
    /// Smallest eigenvalue of sigma_out - sigma_pure at the reported minimizer.
    pub psd_margin: Option<f64>,
    /// Slacks of the individual eigenvalue or block constraints, 1-based order.
    pub slacks: Vec<f64>,
}

/// Pairwise contangle between the reference mode and `partner` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTerm {
    pub partner: usize,
    pub contangle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GteReport {
    pub g_res: f64,
    /// Reference mode, 1-based.
    pub ref_mode: usize,
    pub g_1_vs_rest: f64,
    pub q_value: f64,
    pub pair_terms: [PairTerm; 2],
    pub mixednesses: [f64; 3],
    pub minimizer: Option<Minimizer>,
    pub saturated_constraints: Vec<usize>,
    pub diagnostics: Option<Diagnostics>,
}

impl GteReport {
    pub(crate) fn with_minimizer(mut self, m: Minimizer) -> Self {
        self.minimizer = Some(m);
        self
    }
}

/// Residual contangle of the pure state with local mixednesses `a`.
pub fn gte_pure(a: &LocalMixedness) -> Result<GteReport> {
    a.check_triangle()?;
    let v = a.values();
    let mut r = 0;
    for l in 1..3 {
        if v[l] < v[r] {
            r = l;
        }
    }
    let (mut j, mut k) = ((r + 1) % 3, (r + 2) % 3);
    if j > k {
        std::mem::swap(&mut j, &mut k);
    }
    // Q is even in d, so fixing d >= 0 makes the result bitwise permutation invariant.
    if v[j] < v[k] {
        std::mem::swap(&mut j, &mut k);
    }
    let a_min = v[r];
    let zero = GteReport {
        g_res: 0.0,
        ref_mode: r + 1,
        g_1_vs_rest: 0.0,
        q_value: 0.0,
        pair_terms: [
            PairTerm { partner: j.min(k) + 1, contangle: 0.0 },
            PairTerm { partner: j.max(k) + 1, contangle: 0.0 },
        ],
        mixednesses: v,
        minimizer: None,
        saturated_constraints: Vec::new(),
        diagnostics: None,
    };
    if a_min == 1.0 {
        return Ok(zero);
    }
    let g1 = contangle_pure_one_vs_rest(a_min)?;
    let s = 0.5 * (v[j] + v[k]);
    let d = 0.5 * (v[j] - v[k]);
    let q = q_function(a_min, s, d)?;
    // m(a, s, d) pairs the reference with the mode whose mixedness is s + d.
    let mut pairs = [
        PairTerm { partner: j + 1, contangle: q.pos.contangle },
        PairTerm { partner: k + 1, contangle: q.neg.contangle },
    ];
    pairs.sort_by_key(|p| p.partner);
    let mut g = g1 - q.q;
    if g < 0.0 {
        if g < -MONOGAMY_TOL {
            return Err(Error::MonogamyViolation { g_res: g });
        }
        g = 0.0;
    }
    Ok(GteReport {
        g_res: g,
        g_1_vs_rest: g1,
        q_value: q.q,
        pair_terms: pairs,
        ..zero
    })
}

/// Convenience wrapper over raw values.
pub fn gte_pure_values(a1: f64, a2: f64, a3: f64) -> Result<f64> {
    Ok(gte_pure(&LocalMixedness::new(a1, a2, a3)?)?.g_res)
}

/// (G_initial - G_final) / G_initial, clamped to [0, 1].
pub fn relative_gte_loss(initial: &GteReport, last: &GteReport) -> Result<f64> {
    if !(initial.g_res > 0.0) {
        return Err(Error::DivisionByZero);
    }
    Ok(((initial.g_res - last.g_res) / initial.g_res).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lm(a: f64, b: f64, c: f64) -> LocalMixedness {
        LocalMixedness::new(a, b, c).unwrap()
    }

    #[test]
    fn one_vs_rest() {
        assert_eq!(contangle_pure_one_vs_rest(1.0).unwrap(), 0.0);
        let r: f64 = 0.8;
        assert_abs_diff_eq!(contangle_pure_one_vs_rest((2.0 * r).cosh()).unwrap(), 4.0 * r * r, epsilon = 1e-12);
        assert_abs_diff_eq!(
            contangle_pure_one_vs_rest(2.0).unwrap(),
            3.0_f64.sqrt().asinh().powi(2),
            epsilon = 1e-14
        );
        assert!(contangle_pure_one_vs_rest(0.5).is_err());
    }

    #[test]
    fn symmetric_triple_takes_plus_branch() {
        let a = 1.7;
        let q = q_function(a, a, 0.0).unwrap();
        assert_eq!(q.pos.k_minus, 0.0);
        assert_eq!(q.pos.m_minus, 0.0);
        assert_eq!(q.pos.branch, MBranch::Plus);
        assert!(q.pos.big_d > 0.0);
    }

    #[test]
    fn q_is_bounded_by_one_vs_rest() {
        let q = q_function(2.0, 2.0, 0.3).unwrap();
        assert!(q.q >= 0.0);
        assert!(q.q <= contangle_pure_one_vs_rest(2.0).unwrap());
    }

    #[test]
    fn product_like_states_have_zero_gte() {
        assert_eq!(gte_pure(&lm(1.0, 1.0, 1.0)).unwrap().g_res, 0.0);
        assert_eq!(gte_pure(&lm(1.0, 2.5, 2.5)).unwrap().g_res, 0.0);
        assert_eq!(gte_pure(&lm(2.5, 1.0, 2.5)).unwrap().ref_mode, 2);
    }

    #[test]
    fn two_mode_squeezed_pair_has_no_residual() {
        // Modes 1, 2 in a two-mode squeezed state, mode 3 vacuum.
        let rep = gte_pure(&lm(2.0, 2.0, 1.0)).unwrap();
        assert_eq!(rep.ref_mode, 3);
        assert_eq!(rep.g_res, 0.0);
    }

    #[test]
    fn report_consistency() {
        let rep = gte_pure(&lm(2.5, 1.5, 2.0)).unwrap();
        assert_eq!(rep.ref_mode, 2);
        assert_eq!(rep.g_1_vs_rest, contangle_pure_one_vs_rest(1.5).unwrap());
        assert_abs_diff_eq!(rep.g_res, rep.g_1_vs_rest - rep.q_value, epsilon = 1e-12);
        assert_eq!(rep.pair_terms[0].partner, 1);
        assert_eq!(rep.pair_terms[1].partner, 3);
        assert!(rep.g_res > 0.0);
    }

    #[test]
    fn relative_loss_bounds() {
        let hi = gte_pure(&lm(3.0, 3.0, 3.0)).unwrap();
        let lo = gte_pure(&lm(2.0, 2.0, 2.0)).unwrap();
        let l = relative_gte_loss(&hi, &lo).unwrap();
        assert!(l > 0.0 && l < 1.0);
        assert_eq!(relative_gte_loss(&hi, &hi).unwrap(), 0.0);
        let zero = gte_pure(&lm(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(relative_gte_loss(&zero, &zero), Err(Error::DivisionByZero));
    }

    #[test]
    fn outside_triangle() {
        assert!(matches!(gte_pure(&lm(1.0, 1.0, 3.0)), Err(Error::TriangleViolation { .. })));
    }
}
