//! Brute-force reference for the mixed-state GTE.
//!
//! Minimizes gte_pure(a) over the standard-form pure states lying below `sigma`
//! in the Loewner order, with a = 1 + k * grid_step on an integer lattice.
//! Scanning the full lattice is out of reach at fine steps (around 10^9 points),
//! so lattice boxes are explored branch-and-bound style: each box is probed at
//! its centre and the six face centres, secant slopes of the PSD margin and of
//! the GTE along each axis give Lipschitz-type bounds, and a box is dropped when
//! it cannot contain a feasible point or cannot beat the incumbent. Every
//! reported value is an exact lattice evaluation; only the pruning is heuristic.

use crate::entanglement::pure::{gte_pure, Diagnostics, GteReport, Minimizer};
use crate::error::{Error, Result};
use crate::gaussian::{min_eigenvalue_of_difference, tol, triangle_ok, CovMat3, LocalMixedness, SymplecticForm};
use crate::par::Exec;
use crate::states::pure_standard_form;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Feasibility slack on the smallest eigenvalue of sigma - sigma_pure.
    pub slack: f64,
    /// Safety factor applied to the secant slope estimates.
    pub kappa: f64,
    pub exec: Exec,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            slack: tol::PSD_SLACK,
            kappa: 2.0,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OracleStats {
    pub evaluations: usize,
    pub generations: usize,
    pub boxes: usize,
}

type Idx = [i64; 3];

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: Idx,
    hi: Idx,
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    margin: f64,
    g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    g: f64,
    a: [f64; 3],
    margin: f64,
}

impl Candidate {
    fn better_than(&self, o: &Candidate) -> bool {
        (self.g, self.a[0], self.a[1], self.a[2]) < (o.g, o.a[0], o.a[1], o.a[2])
    }
}

struct Lattice<'a> {
    sigma: &'a CovMat3,
    h: f64,
    slack: f64,
}

impl Lattice<'_> {
    fn point(&self, k: Idx) -> [f64; 3] {
        k.map(|x| 1.0 + x as f64 * self.h)
    }

    fn probe_at(&self, a: [f64; 3]) -> Option<Probe> {
        if !triangle_ok(a) {
            return None;
        }
        let lm = LocalMixedness::from_array(a).ok()?;
        let pure = pure_standard_form(&lm).ok()?;
        let margin = min_eigenvalue_of_difference(self.sigma, &pure);
        let g = gte_pure(&lm).ok()?.g_res;
        Some(Probe { margin, g })
    }

    fn candidate(&self, a: [f64; 3], p: Probe) -> Option<Candidate> {
        (p.margin >= -self.slack).then_some(Candidate {
            g: p.g,
            a,
            margin: p.margin,
        })
    }
}

/// True when the whole box violates one of the linear triangle inequalities.
fn outside_triangle(lat: &Lattice, c: &Cell) -> bool {
    let lo = lat.point(c.lo).map(|x| x - 1.0);
    let hi = lat.point(c.hi).map(|x| x - 1.0);
    (0..3).any(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        // a'_i + a'_j - a'_k >= 0 and a'_k - a'_i + a'_j >= 0 (and i <-> j).
        let sum = hi[i] + hi[j] - lo[k];
        let d1 = hi[k] - lo[i] + hi[j];
        let d2 = hi[k] - lo[j] + hi[i];
        sum < 0.0 || d1 < 0.0 || d2 < 0.0
    })
}

enum Outcome {
    Leaf(Vec<Candidate>),
    Split(Vec<Candidate>, Vec<Cell>),
    Pruned(Vec<Candidate>),
}

fn process(lat: &Lattice, c: &Cell, incumbent: f64, kappa: f64, evals: &mut usize) -> Outcome {
    if outside_triangle(lat, c) {
        return Outcome::Pruned(Vec::new());
    }
    let centre: Idx = [0, 1, 2].map(|l| (c.lo[l] + c.hi[l]).div_euclid(2));
    let mut probe = |k: Idx| {
        *evals += 1;
        lat.probe_at(lat.point(k)).map(|p| (k, p))
    };
    if c.lo == c.hi {
        let found = probe(centre)
            .and_then(|(k, p)| lat.candidate(lat.point(k), p))
            .into_iter()
            .collect();
        return Outcome::Leaf(found);
    }

    let mut sites = vec![centre];
    for l in 0..3 {
        for end in [c.lo[l], c.hi[l]] {
            let mut k = centre;
            k[l] = end;
            if !sites.contains(&k) {
                sites.push(k);
            }
        }
    }
    let mut pts: Vec<(Idx, Probe)> = sites.iter().filter_map(|&k| probe(k)).collect();
    // Boxes cut by the triangle boundary can lose their centre; corners then
    // supply the missing probes.
    if pts.first().is_none_or(|p| p.0 != centre) {
        for m in 0..8 {
            let k: Idx = [0, 1, 2].map(|l| if m >> l & 1 == 0 { c.lo[l] } else { c.hi[l] });
            if !sites.contains(&k) {
                sites.push(k);
                pts.extend(probe(k));
            }
        }
    }
    let found: Vec<Candidate> = pts
        .iter()
        .filter_map(|&(k, p)| lat.candidate(lat.point(k), p))
        .collect();

    // Secant slopes from every probe pair that differs along one axis only.
    let mut slopes = [[None::<f64>; 2]; 3];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let diff: Vec<usize> = (0..3).filter(|&l| pts[i].0[l] != pts[j].0[l]).collect();
            if let [l] = diff[..] {
                let dist = (pts[i].0[l] - pts[j].0[l]).abs() as f64 * lat.h;
                let sm = (pts[i].1.margin - pts[j].1.margin).abs() / dist;
                let sg = (pts[i].1.g - pts[j].1.g).abs() / dist;
                slopes[l][0] = Some(slopes[l][0].map_or(sm, |x: f64| x.max(sm)));
                slopes[l][1] = Some(slopes[l][1].map_or(sg, |x: f64| x.max(sg)));
            }
        }
    }
    // Axes without a usable pair borrow the steepest slope seen elsewhere.
    let fill = |k: usize| {
        let worst = slopes.iter().filter_map(|s| s[k]).fold(f64::NAN, f64::max);
        slopes.map(|s| s[k].unwrap_or(worst))
    };
    let (sm, sg) = (fill(0), fill(1));
    if sm.iter().any(|x| x.is_nan()) {
        return Outcome::Split(found, split(c));
    }
    // Each probe bounds the whole box through its distance to the far faces;
    // keep the tightest of those bounds.
    let mut m_ub = f64::INFINITY;
    let mut g_lb = f64::NEG_INFINITY;
    for (k, p) in &pts {
        let (mut dm, mut dg) = (0.0, 0.0);
        for l in 0..3 {
            let reach = (k[l] - c.lo[l]).max(c.hi[l] - k[l]) as f64 * lat.h;
            dm += kappa * sm[l] * reach;
            dg += kappa * sg[l] * reach;
        }
        m_ub = m_ub.min(p.margin + dm);
        g_lb = g_lb.max(p.g - dg);
    }
    if m_ub < -lat.slack || g_lb > incumbent {
        return Outcome::Pruned(found);
    }
    Outcome::Split(found, split(c))
}

/// Halves every axis at least half as long as the longest one.
fn split(c: &Cell) -> Vec<Cell> {
    let w: [i64; 3] = [0, 1, 2].map(|l| c.hi[l] - c.lo[l]);
    let longest = *w.iter().max().unwrap();
    let mut out = vec![*c];
    for (l, &wl) in w.iter().enumerate() {
        if wl == 0 || 2 * wl < longest {
            continue;
        }
        let m = (c.lo[l] + c.hi[l]).div_euclid(2);
        out = out
            .into_iter()
            .flat_map(|b| {
                let mut left = b;
                let mut right = b;
                left.hi[l] = m;
                right.lo[l] = m + 1;
                [left, right]
            })
            .collect();
    }
    out
}

/// A priori bounds on feasible mixednesses: a_l <= lambda_min(sigma_l) and
/// a_l >= lambda_max of the l-th block of Omega^T sigma^-1 Omega.
pub fn mixedness_box(sigma: &CovMat3) -> Result<([f64; 3], [f64; 3])> {
    let inv = sigma
        .matrix()
        .try_inverse()
        .ok_or_else(|| Error::DomainError("covariance matrix is singular".into()))?;
    let om = *SymplecticForm::new().matrix();
    let dual = om.transpose() * inv * om;
    let mut lo = [1.0; 3];
    let mut hi = [1.0; 3];
    for l in 0..3 {
        let s = sigma.local_block(l).symmetric_eigenvalues();
        hi[l] = s.min();
        let d = dual.fixed_view::<2, 2>(2 * l, 2 * l).into_owned().symmetric_eigenvalues();
        lo[l] = d.max().max(1.0);
    }
    Ok((lo, hi))
}

pub fn gte_mixed_oracle(sigma: &CovMat3, grid_step: f64) -> Result<GteReport> {
    gte_mixed_oracle_with(sigma, grid_step, &OracleOptions::default()).map(|r| r.0)
}

pub fn gte_mixed_oracle_with(
    sigma: &CovMat3,
    grid_step: f64,
    opts: &OracleOptions,
) -> Result<(GteReport, OracleStats)> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::DomainError(format!("grid step {grid_step} must be > 0")));
    }
    crate::gaussian::validate(sigma, tol::PHYSICAL).map_err(|_| Error::Infeasible { grid_step })?;
    let (lo, hi) = mixedness_box(sigma)?;
    let lat = Lattice {
        sigma,
        h: grid_step,
        slack: opts.slack,
    };
    let mut stats = OracleStats::default();
    let mut best: Option<Candidate> = None;
    let offer = |best: &mut Option<Candidate>, c: Candidate| {
        if best.as_ref().is_none_or(|b| c.better_than(b)) {
            *best = Some(c);
        }
    };

    // The upper corner of the box is the only candidate for a pure sigma.
    stats.evaluations += 1;
    if let Some(p) = lat.probe_at(hi) {
        if let Some(c) = lat.candidate(hi, p) {
            offer(&mut best, c);
        }
    }

    let k_lo: Idx = [0, 1, 2].map(|l| ((lo[l] - 1.0) / grid_step - 1e-9).ceil() as i64);
    let k_hi: Idx = [0, 1, 2].map(|l| ((hi[l] - 1.0) / grid_step + 1e-9).floor() as i64);
    let mut cells = if (0..3).all(|l| k_lo[l] <= k_hi[l]) {
        vec![Cell { lo: k_lo, hi: k_hi }]
    } else {
        Vec::new()
    };

    while !cells.is_empty() {
        stats.generations += 1;
        stats.boxes += cells.len();
        let incumbent = best.map_or(f64::INFINITY, |b| b.g);
        let outcomes = opts.exec.map(&cells, |c| {
            let mut evals = 0;
            let o = process(&lat, c, incumbent, opts.kappa, &mut evals);
            (o, evals)
        });
        let mut next = Vec::new();
        for (o, evals) in outcomes {
            stats.evaluations += evals;
            let found = match o {
                Outcome::Leaf(f) | Outcome::Pruned(f) => f,
                Outcome::Split(f, children) => {
                    next.extend(children);
                    f
                }
            };
            for c in found {
                offer(&mut best, c);
            }
        }
        cells = next;
    }

    let best = best.ok_or(Error::Infeasible { grid_step })?;
    let mut rep = gte_pure(&LocalMixedness::from_array(best.a)?)?
        .with_minimizer(Minimizer::Mixedness { a: best.a });
    rep.diagnostics = Some(Diagnostics {
        method: "oracle-lattice".into(),
        iterations: stats.generations,
        residual: grid_step,
        psd_margin: Some(best.margin),
        slacks: Vec::new(),
    });
    Ok((rep, stats))
}
