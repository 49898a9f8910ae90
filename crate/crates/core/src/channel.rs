//! Uniform-acceleration channel sigma -> alpha^2 sigma + (1 - alpha^2) I and the
//! acceleration-to-alpha lookup table.

use std::io::Read;
use std::path::Path;

use nalgebra::Matrix6;

use crate::error::{Error, Result};
use crate::gaussian::{tol, validate, CovMat3};

/// Mode-overlap coefficient alpha in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    alpha: f64,
}

impl ChannelSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::OutOfRange {
                value: alpha,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(ChannelSpec { alpha })
    }

    pub fn from_acceleration(accel: f64, table: &AccelTable) -> Result<Self> {
        Self::new(alpha_from_acceleration(accel, table)?)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 1.0
    }
}

/// A general Gaussian channel sigma -> M sigma M^T + N.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    m: Matrix6<f64>,
    n: Matrix6<f64>,
}

impl GaussianChannel {
    /// Explicit (M, N). Only finiteness and symmetry of N are checked; complete
    /// positivity of the pair is the caller's business.
    pub fn general(m: Matrix6<f64>, n: Matrix6<f64>) -> Result<Self> {
        if m.iter().chain(n.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        CovMat3::new(n)?;
        Ok(GaussianChannel { m, n })
    }

    pub fn from_spec(spec: ChannelSpec) -> Self {
        let a = spec.alpha;
        GaussianChannel {
            m: Matrix6::identity() * a,
            n: Matrix6::identity() * (1.0 - a * a),
        }
    }

    pub fn apply(&self, cm: &CovMat3) -> Result<CovMat3> {
        let out = self.m * cm.matrix() * self.m.transpose() + self.n;
        let out = CovMat3::new((out + out.transpose()) * 0.5)?;
        match cm.means() {
            Some(x) => out.with_means(self.m * x),
            None => Ok(out),
        }
    }
}

/// The acceleration channel with alpha from `spec`.
///
/// Evaluated as I + alpha^2 (sigma - I), so the vacuum is an exact fixed point.
pub fn apply_channel(cm: &CovMat3, spec: ChannelSpec) -> Result<CovMat3> {
    validate(cm, tol::PHYSICAL)?;
    Ok(apply_channel_unchecked(cm, spec))
}

pub(crate) fn apply_channel_unchecked(cm: &CovMat3, spec: ChannelSpec) -> CovMat3 {
    let a2 = spec.alpha * spec.alpha;
    let id = Matrix6::identity();
    let out = CovMat3::from_symmetric(id + (cm.matrix() - id) * a2);
    match cm.means() {
        Some(x) => out
            .with_means(x * spec.alpha)
            .expect("scaled finite means stay finite"),
        None => out,
    }
}

/// Image of an ordinary eigenvalue under the channel.
pub fn transform_eigenvalue(lambda: f64, alpha: f64) -> f64 {
    1.0 + alpha * alpha * (lambda - 1.0)
}

/// Piecewise-linear alpha(acceleration) lookup table.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelTable {
    accel: Vec<f64>,
    alpha: Vec<f64>,
}

impl AccelTable {
    /// Builds a table from (acceleration, alpha) pairs, enforcing the same rules
    /// as the CSV loader. Line numbers in errors count the header as line 1.
    pub fn from_rows(rows: &[(f64, f64)]) -> Result<Self> {
        let mut t = AccelTable {
            accel: Vec::with_capacity(rows.len()),
            alpha: Vec::with_capacity(rows.len()),
        };
        for (k, &(acc, al)) in rows.iter().enumerate() {
            t.push(k + 2, acc, al)?;
        }
        t.finish()
    }

    pub fn from_reader<R: Read>(rdr: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(rdr);
        let header = csv.headers().map_err(|e| Error::MalformedTable {
            line: 1,
            reason: e.to_string(),
        })?;
        if header.len() != 2 || &header[0] != "acceleration" || &header[1] != "alpha" {
            return Err(Error::MalformedTable {
                line: 1,
                reason: "header must be `acceleration,alpha`".into(),
            });
        }
        let mut t = AccelTable {
            accel: Vec::new(),
            alpha: Vec::new(),
        };
        for rec in csv.records() {
            let rec = rec.map_err(|e| Error::MalformedTable {
                line: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize, name: &str| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::MalformedTable {
                        line,
                        reason: format!("missing {name}"),
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::MalformedTable {
                        line,
                        reason: format!("{name}: {e}"),
                    })
            };
            if rec.len() != 2 {
                return Err(Error::MalformedTable {
                    line,
                    reason: format!("expected 2 fields, found {}", rec.len()),
                });
            }
            t.push(line, field(0, "acceleration")?, field(1, "alpha")?)?;
        }
        t.finish()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    fn push(&mut self, line: usize, acc: f64, al: f64) -> Result<()> {
        let bad = |reason: String| Error::MalformedTable { line, reason };
        if !acc.is_finite() || acc < 0.0 {
            return Err(bad(format!("acceleration {acc} must be finite and >= 0")));
        }
        if !(al > 0.0 && al <= 1.0) {
            return Err(bad(format!("alpha {al} outside (0, 1]")));
        }
        if let (Some(&pa), Some(&pal)) = (self.accel.last(), self.alpha.last()) {
            if acc <= pa {
                return Err(bad(format!("acceleration {acc} not strictly increasing (previous {pa})")));
            }
            if al > pal {
                return Err(bad(format!("alpha {al} increases (previous {pal})")));
            }
        } else if acc == 0.0 && al != 1.0 {
            return Err(bad(format!("alpha at zero acceleration must be 1, found {al}")));
        }
        self.accel.push(acc);
        self.alpha.push(al);
        Ok(())
    }

    fn finish(self) -> Result<Self> {
        if self.accel.is_empty() {
            return Err(Error::MalformedTable {
                line: 2,
                reason: "table has no rows".into(),
            });
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.accel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accel.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.accel[0], *self.accel.last().unwrap())
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.accel.iter().copied().zip(self.alpha.iter().copied())
    }
}

/// Linear interpolation of alpha at `accel`.
pub fn alpha_from_acceleration(accel: f64, table: &AccelTable) -> Result<f64> {
    let (lo, hi) = table.range();
    if !(accel >= lo && accel <= hi) {
        return Err(Error::OutOfRange {
            value: accel,
            min: lo,
            max: hi,
        });
    }
    let k = table.accel.partition_point(|&x| x <= accel);
    if k == 0 {
        return Ok(table.alpha[0]);
    }
    let i = k - 1;
    if table.accel[i] == accel || i + 1 == table.len() {
        return Ok(table.alpha[i]);
    }
    let (x0, x1) = (table.accel[i], table.accel[i + 1]);
    let (y0, y1) = (table.alpha[i], table.alpha[i + 1]);
    Ok(y0 + (y1 - y0) * (accel - x0) / (x1 - x0))
}

impl CovMat3 {
    /// Convenience for `apply_channel(self, spec)`.
    pub fn through(&self, spec: ChannelSpec) -> Result<CovMat3> {
        apply_channel(self, spec)
    }
}
