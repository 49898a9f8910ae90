//! Mixed-state GTE of the fully symmetric family after the channel.

use crate::channel::{apply_channel_unchecked, transform_eigenvalue, ChannelSpec};
use crate::entanglement::pure::{gte_pure, Diagnostics, GteReport, Minimizer};
use crate::error::{Error, Result};
use crate::gaussian::{min_eigenvalue_of_difference, LocalMixedness};
use crate::states::{sym_b, symmetric_eigenvalues, symmetric_state, SqueezingSym};

/// Bisection stops once the bracket is this narrow.
pub const R_TOL: f64 = 1e-12;
/// A constraint counts as saturated if |slack| <= SATURATION_TOL * max(1, lambda).
pub const SATURATION_TOL: f64 = 1e-9;
const MAX_ITER: usize = 200;

/// GTE of the pure symmetric state with squeezing `r`.
pub fn gte_symmetric_pure(r: f64) -> Result<GteReport> {
    let b = sym_b(r);
    gte_pure(&LocalMixedness::new(b, b, b)?)
}

/// Smallest r_m with lambda1(r_m) = 1 + alpha^2 (lambda1(r) - 1), found by bisection.
pub fn solve_symmetric_saturation(r: f64, alpha: f64) -> Result<(f64, usize, f64)> {
    let lam1 = |x: f64| symmetric_eigenvalues(SqueezingSym { r: x }).lambda[0];
    let target = transform_eigenvalue(lam1(r), alpha);
    let h = |x: f64| lam1(x) - target;
    let (mut lo, mut hi) = (0.0, r);
    let (h_lo, h_hi) = (h(lo), h(hi));
    if !(h_lo >= 0.0 && h_hi <= 0.0) {
        return Err(Error::ConvergenceFailure {
            method: "bisection",
            iterations: 0,
            residual: h_lo.min(-h_hi),
        });
    }
    let mut it = 0;
    while hi - lo > R_TOL {
        if it == MAX_ITER {
            return Err(Error::ConvergenceFailure {
                method: "bisection",
                iterations: it,
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
    }
    // The upper end satisfies lambda1(hi) <= target, the feasible side.
    Ok((hi, it, h(hi).abs()))
}

/// Residual contangle of `apply_channel(symmetric_state(r), spec)` via the saturation equation.
pub fn gte_mixed_symmetric(r: SqueezingSym, spec: ChannelSpec) -> Result<GteReport> {
    let alpha = spec.alpha();
    let (r_m, iterations, residual, method) = if r.r == 0.0 {
        (0.0, 0, 0.0, "vacuum")
    } else if spec.is_identity() {
        (r.r, 0, 0.0, "identity")
    } else {
        let (x, it, res) = solve_symmetric_saturation(r.r, alpha)?;
        (x, it, res, "bisection")
    };

    let before = symmetric_eigenvalues(r).lambda;
    let after = symmetric_eigenvalues(SqueezingSym { r: r_m }).lambda;
    let mut slacks = Vec::with_capacity(4);
    let mut saturated = Vec::new();
    for i in 0..4 {
        let slack = transform_eigenvalue(before[i], alpha) - after[i];
        let scale = SATURATION_TOL * before[i].max(1.0);
        if slack < -scale {
            return Err(Error::UnsaturatedAssumptionViolated { index: i + 1, slack });
        }
        if slack.abs() <= scale {
            saturated.push(i + 1);
        }
        slacks.push(slack);
    }

    let out = apply_channel_unchecked(&symmetric_state(r), spec);
    let psd_margin = min_eigenvalue_of_difference(&out, &symmetric_state(SqueezingSym { r: r_m }));

    let mut rep = gte_symmetric_pure(r_m)?.with_minimizer(Minimizer::Symmetric { r_m });
    rep.saturated_constraints = saturated;
    rep.diagnostics = Some(Diagnostics {
        method: method.into(),
        iterations,
        residual,
        psd_margin: Some(psd_margin),
        slacks,
    });
    Ok(rep)
}
