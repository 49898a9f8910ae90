//! Three-mode covariance matrices in (q1,p1,q2,p2,q3,p3) ordering, vacuum = identity.

use nalgebra::{Matrix2, Matrix6, SymmetricEigen, Vector6};

use crate::error::{Error, Result};

/// Tolerances shared across the crate.
pub mod tol {
    /// Maximum |s_kl - s_lk| accepted for a covariance matrix.
    pub const SYMMETRY: f64 = 1e-12;
    /// Slack on the uncertainty principle, nu >= 1 - PHYSICAL.
    pub const PHYSICAL: f64 = 1e-9;
    /// Default slack for Loewner-order tests.
    pub const PSD_SLACK: f64 = 1e-10;
    /// Pairing tolerance for the doubled spectrum of i Omega sigma.
    pub const SYMPLECTIC_PAIRING: f64 = 1e-8;
    /// Local mixednesses in [1 - CLAMP, 1) are snapped to 1.
    pub const MIXEDNESS_CLAMP: f64 = 1e-9;
}

/// The standard symplectic form, a direct sum of three [[0,1],[-1,0]] blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticForm(Matrix6<f64>);

impl SymplecticForm {
    pub fn new() -> Self {
        let mut m = Matrix6::zeros();
        for l in 0..3 {
            m[(2 * l, 2 * l + 1)] = 1.0;
            m[(2 * l + 1, 2 * l)] = -1.0;
        }
        SymplecticForm(m)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }
}

impl Default for SymplecticForm {
    fn default() -> Self {
        Self::new()
    }
}

/// A real symmetric 6x6 covariance matrix, optionally with first moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMat3 {
    m: Matrix6<f64>,
    means: Option<Vector6<f64>>,
}

/// Result of a successful [`validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub min_symplectic: f64,
}

impl CovMat3 {
    /// Wraps a matrix after checking that it is finite and symmetric.
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let asym = asymmetry(&m);
        if asym > tol::SYMMETRY {
            return Err(Error::NonSymmetric { asymmetry: asym });
        }
        Ok(CovMat3 { m, means: None })
    }

    /// Construction path for matrices that are symmetric by design.
    pub(crate) fn from_symmetric(m: Matrix6<f64>) -> Self {
        debug_assert!(asymmetry(&m) == 0.0);
        CovMat3 { m, means: None }
    }

    pub fn identity() -> Self {
        CovMat3 {
            m: Matrix6::identity(),
            means: None,
        }
    }

    pub fn with_means(mut self, means: Vector6<f64>) -> Result<Self> {
        if means.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.means = Some(means);
        Ok(self)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.m
    }

    pub fn means(&self) -> Option<&Vector6<f64>> {
        self.means.as_ref()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.m[(k, l)]
    }

    /// Reduced single-mode block sigma_l, `l` in 0..3.
    pub fn local_block(&self, l: usize) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(2 * l, 2 * l).into_owned()
    }

    /// Correlation block eps_ij between modes `i` and `j`.
    pub fn correlation_block(&self, i: usize, j: usize) -> Matrix2<f64> {
        self.m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    pub fn max_abs_diff(&self, other: &CovMat3) -> f64 {
        (self.m - other.m).amax()
    }
}

fn asymmetry(m: &Matrix6<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Checks symmetry and the uncertainty principle.
pub fn validate(cm: &CovMat3, tol: f64) -> Result<Validity> {
    let asym = asymmetry(&cm.m);
    if asym > tol::SYMMETRY {
        return Err(Error::NonSymmetric { asymmetry: asym });
    }
    // nu >= 1 alone admits indefinite matrices such as diag(-1, 1, ...), so
    // positivity is checked first and its failure reported as nu = 0.
    let positive = SymmetricEigen::new(cm.m).eigenvalues.min() > 0.0;
    let min_nu = if positive { symplectic_eigenvalues(cm)[2] } else { 0.0 };
    if !(min_nu >= 1.0 - tol) {
        return Err(Error::Unphysical { min_nu, tol });
    }
    Ok(Validity {
        min_symplectic: min_nu,
    })
}

/// Symplectic eigenvalues, descending.
///
/// For a positive definite sigma the antisymmetric matrix A = sigma^1/2 Omega sigma^1/2
/// has eigenvalues +-i nu, so nu^2 are the (doubled) eigenvalues of A^T A and
/// can be read off a symmetric eigensolver. Indefinite input falls back to the
/// general complex spectrum of Omega sigma.
pub fn symplectic_eigenvalues(cm: &CovMat3) -> [f64; 3] {
    let omega = *SymplecticForm::new().matrix();
    let eig = SymmetricEigen::new(cm.m);
    let mut moduli: Vec<f64> = if eig.eigenvalues.min() > 0.0 {
        let root = eig.eigenvectors
            * Matrix6::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let a = root * omega * root;
        let ata = a.transpose() * a;
        let ata = (ata + ata.transpose()) * 0.5;
        SymmetricEigen::new(ata)
            .eigenvalues
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .collect()
    } else {
        (omega * cm.m)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect()
    };
    moduli.sort_by(|a, b| b.total_cmp(a));
    let mut out = [0.0; 3];
    for (k, pair) in moduli.chunks(2).enumerate() {
        debug_assert!(
            (pair[0] - pair[1]).abs() <= tol::SYMPLECTIC_PAIRING * pair[0].max(1.0),
            "unpaired symplectic spectrum {moduli:?}"
        );
        out[k] = 0.5 * (pair[0] + pair[1]);
    }
    out
}

/// Ordinary eigenvalues, ascending.
pub fn ordinary_eigenvalues(cm: &CovMat3) -> [f64; 6] {
    let mut v: [f64; 6] = SymmetricEigen::new(cm.m).eigenvalues.into();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest eigenvalue of `a - b`.
pub fn min_eigenvalue_of_difference(a: &CovMat3, b: &CovMat3) -> f64 {
    let d = a.m - b.m;
    SymmetricEigen::new((d + d.transpose()) * 0.5)
        .eigenvalues
        .min()
}

/// `a - b >= -slack` in the Loewner order.
pub fn is_psd_difference(a: &CovMat3, b: &CovMat3, slack: f64) -> bool {
    min_eigenvalue_of_difference(a, b) >= -slack
}

/// Single-mode symplectic eigenvalues a_l = sqrt(det sigma_l).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMixedness {
    a: [f64; 3],
}

impl LocalMixedness {
    /// Accepts values >= 1 - 1e-9 and snaps the near-1 ones to exactly 1.
    pub fn new(a1: f64, a2: f64, a3: f64) -> Result<Self> {
        let mut a = [a1, a2, a3];
        for x in &mut a {
            if !x.is_finite() {
                return Err(Error::NonFinite);
            }
            if *x < 1.0 - tol::MIXEDNESS_CLAMP {
                return Err(Error::Unphysical {
                    min_nu: *x,
                    tol: tol::MIXEDNESS_CLAMP,
                });
            }
            if *x < 1.0 {
                *x = 1.0;
            }
        }
        Ok(LocalMixedness { a })
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }

    pub fn values(&self) -> [f64; 3] {
        self.a
    }

    pub fn get(&self, l: usize) -> f64 {
        self.a[l]
    }

    /// |a'_i - a'_j| <= a'_k <= a'_i + a'_j with a' = a - 1, up to a rounding
    /// allowance relative to the largest entry.
    pub fn satisfies_triangle(&self) -> bool {
        triangle_ok(self.a)
    }

    pub fn check_triangle(&self) -> Result<()> {
        if self.satisfies_triangle() {
            Ok(())
        } else {
            Err(Error::TriangleViolation { a: self.a })
        }
    }
}

pub(crate) fn triangle_ok(a: [f64; 3]) -> bool {
    let p = a.map(|x| x - 1.0);
    let allowance = 4.0 * f64::EPSILON * a.iter().fold(1.0_f64, |m, x| m.max(*x));
    (0..3).all(|k| {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        p[k] <= p[i] + p[j] + allowance && (p[i] - p[j]).abs() <= p[k] + allowance
    })
}

/// a_l = sqrt(det sigma_l) for each mode.
pub fn local_mixednesses(cm: &CovMat3) -> Result<LocalMixedness> {
    validate(cm, tol::PHYSICAL)?;
    let a = [0, 1, 2].map(|l| cm.local_block(l).determinant().max(0.0).sqrt());
    LocalMixedness::from_array(a)
}

/// 1 / sqrt(det sigma), in (0, 1].
pub fn global_purity(cm: &CovMat3) -> Result<f64> {
    validate(cm, tol::PHYSICAL)?;
    let det = cm.determinant();
    Ok((1.0 / det.sqrt()).min(1.0))
}
