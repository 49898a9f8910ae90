//! Grid sweeps, single-point evaluation and the solver-vs-oracle report.
//!
//! Every grid point is evaluated independently through [`evaluate_point`], so a
//! row emitted by a sweep can always be reproduced by evaluating its parameters
//! on their own.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::channel::{alpha_from_acceleration, apply_channel, AccelTable, ChannelSpec};
use crate::entanglement::{
    gte_mixed_bisymmetric, gte_mixed_oracle_with, gte_mixed_symmetric, gte_pure, gte_symmetric_pure,
    relative_gte_loss, GteReport, Minimizer, OracleOptions,
};
use crate::error::{Error, Result};
use crate::gaussian::LocalMixedness;
use crate::par::Exec;
use crate::states::{bisymmetric_state, pure_standard_form, symmetric_state, SqueezingBisym, SqueezingSym};

pub const CSV_SCHEMA: &str = "# contangle-csv v1";
pub const JSON_SCHEMA: &str = "contangle-json v1";

/// Largest grid a single sweep will enumerate.
pub const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Symmetric,
    Bisymmetric,
    Pure,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Symmetric => "symmetric",
            Family::Bisymmetric => "bisymmetric",
            Family::Pure => "pure",
        }
    }

    /// State parameters in column order.
    pub fn state_params(self) -> &'static [Param] {
        match self {
            Family::Symmetric => &[Param::R],
            Family::Bisymmetric => &[Param::R1, Param::R3],
            Family::Pure => &[Param::A1, Param::A2, Param::A3],
        }
    }

    fn takes_channel(self) -> bool {
        self != Family::Pure
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" | "sym" => Ok(Family::Symmetric),
            "bisymmetric" | "bisym" => Ok(Family::Bisymmetric),
            "pure" => Ok(Family::Pure),
            _ => Err(Error::Config(format!("unknown family '{s}' (expected symmetric, bisym or pure)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    R,
    R1,
    R3,
    A1,
    A2,
    A3,
    Alpha,
    Accel,
}

impl Param {
    pub const ALL: [Param; 8] = [
        Param::R,
        Param::R1,
        Param::R3,
        Param::A1,
        Param::A2,
        Param::A3,
        Param::Alpha,
        Param::Accel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::R => "r",
            Param::R1 => "r1",
            Param::R3 => "r3",
            Param::A1 => "a1",
            Param::A2 => "a2",
            Param::A3 => "a3",
            Param::Alpha => "alpha",
            Param::Accel => "accel",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p = match s {
            "acceleration" => Param::Accel,
            _ => *Param::ALL
                .iter()
                .find(|p| p.name() == s)
                .ok_or_else(|| Error::Config(format!("unknown parameter '{s}'")))?,
        };
        Ok(p)
    }
}

/// A partial assignment of parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Params([Option<f64>; 8]);

impl Params {
    pub fn get(&self, p: Param) -> Option<f64> {
        self.0[p.index()]
    }

    pub fn set(&mut self, p: Param, v: f64) -> &mut Self {
        self.0[p.index()] = Some(v);
        self
    }

    pub fn with(mut self, p: Param, v: f64) -> Self {
        self.set(p, v);
        self
    }

    fn require(&self, p: Param) -> Result<f64> {
        self.get(p).ok_or_else(|| Error::Config(format!("missing --{}", p.name())))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Param, f64)> + '_ {
        Param::ALL.iter().filter_map(|&p| self.get(p).map(|v| (p, v)))
    }
}

/// One swept axis, `min + k * step` for every k that stays at or below `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisSpec {
    pub fn new(param: Param, min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::Config(format!("axis {} has a non-finite bound", param.name())));
        }
        if !(step > 0.0) {
            return Err(Error::Config(format!("axis {} needs step > 0, got {step}", param.name())));
        }
        if min > max {
            return Err(Error::Config(format!("axis {} has min {min} > max {max}", param.name())));
        }
        Ok(AxisSpec { param, min, max, step })
    }

    pub fn len(&self) -> usize {
        // Tolerate the usual decimal step drift so that 0.1:3:0.1 includes 3.
        ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid values, rounded to 12 decimals so rows print as the user typed them.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let v = self.min + k as f64 * self.step;
                format!("{v:.12}").parse().unwrap_or(v)
            })
            .collect()
    }
}

impl FromStr for AxisSpec {
    type Err = Error;

    /// Parses `<axis>:<min>:<max>:<step>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!("grid '{s}' must look like axis:min:max:step")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("grid '{s}': '{t}' is not a number")))
        };
        AxisSpec::new(parts[0].trim().parse()?, num(parts[1])?, num(parts[2])?, num(parts[3])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub family: Family,
    pub axes: Vec<AxisSpec>,
    /// Values of the parameters that are held fixed.
    pub fixed: Params,
    pub table: Option<AccelTable>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Oracle lattice step; `None` disables the oracle column.
    pub oracle_step: Option<f64>,
}

impl SweepConfig {
    pub fn new(family: Family) -> Self {
        SweepConfig {
            family,
            axes: Vec::new(),
            fixed: Params::default(),
            table: None,
            out: None,
            format: OutputFormat::Csv,
            oracle_step: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(Error::Config(format!("at most 2 swept axes, got {}", self.axes.len())));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::Config(format!("axis {} given twice", self.axes[0].param.name())));
        }
        let allowed = |p: Param| {
            self.family.state_params().contains(&p)
                || (self.family.takes_channel() && matches!(p, Param::Alpha | Param::Accel))
        };
        for ax in &self.axes {
            if !allowed(ax.param) {
                return Err(Error::Config(format!(
                    "axis {} does not apply to the {} family",
                    ax.param.name(),
                    self.family.name()
                )));
            }
            if self.fixed.get(ax.param).is_some() {
                return Err(Error::Config(format!("{} is both swept and fixed", ax.param.name())));
            }
        }
        for (p, _) in self.fixed.iter() {
            if !allowed(p) {
                return Err(Error::Config(format!("--{} does not apply to the {} family", p.name(), self.family.name())));
            }
        }
        let swept = |p: Param| self.axes.iter().any(|a| a.param == p);
        let has = |p: Param| swept(p) || self.fixed.get(p).is_some();
        for &p in self.family.state_params() {
            if !has(p) {
                return Err(Error::Config(format!("--{} is required for the {} family", p.name(), self.family.name())));
            }
        }
        if has(Param::Alpha) && has(Param::Accel) {
            return Err(Error::Config("give either alpha or accel, not both".into()));
        }
        if has(Param::Accel) && self.table.is_none() {
            return Err(Error::Config("an acceleration value needs --accel-table".into()));
        }
        if let Some(h) = self.oracle_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("oracle step {h} must be > 0")));
            }
        }
        if self.points() > MAX_POINTS {
            return Err(Error::Config(format!("grid has {} points, limit is {MAX_POINTS}", self.points())));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    /// Parameter assignments in row-major order, the first axis varying slowest.
    pub fn grid(&self) -> Vec<Params> {
        let mut out = vec![self.fixed];
        for ax in &self.axes {
            let vals = ax.values();
            out = out
                .iter()
                .flat_map(|base| vals.iter().map(move |&v| base.with(ax.param, v)))
                .collect();
        }
        out
    }

    fn uses_accel(&self) -> bool {
        self.fixed.get(Param::Accel).is_some() || self.axes.iter().any(|a| a.param == Param::Accel)
    }

    /// Column names shared by the CSV and JSON emitters.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols: Vec<&'static str> = self.family.state_params().iter().map(|p| p.name()).collect();
        if self.family.takes_channel() {
            if self.uses_accel() {
                cols.push("accel");
            }
            cols.push("alpha");
        }
        cols.extend(["g_res_initial", "g_res_final", "relative_loss"]);
        match self.family {
            Family::Symmetric => cols.push("r_m"),
            Family::Bisymmetric => cols.extend(["r1m", "r3m"]),
            Family::Pure => {}
        }
        cols.extend(["method", "solver_iterations", "solver_residual", "saturated", "flag"]);
        if self.oracle_step.is_some() {
            cols.extend(["oracle_g_res", "oracle_delta"]);
        }
        cols.push("error");
        cols
    }
}

/// Everything computed for one parameter assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub family: Family,
    pub params: Params,
    pub alpha: f64,
    pub initial: GteReport,
    /// Report after the channel; equal to `initial` for the pure family.
    pub last: GteReport,
    pub relative_loss: f64,
    pub degenerate: bool,
    pub oracle: Option<GteReport>,
}

/// Resolves the channel strength from `alpha`, `accel` + table, or the identity.
pub fn resolve_alpha(params: &Params, table: Option<&AccelTable>) -> Result<f64> {
    match (params.get(Param::Alpha), params.get(Param::Accel)) {
        (Some(_), Some(_)) => Err(Error::Config("give either alpha or accel, not both".into())),
        (Some(a), None) => Ok(ChannelSpec::new(a)?.alpha()),
        (None, Some(acc)) => {
            let t = table.ok_or_else(|| Error::Config("an acceleration value needs --accel-table".into()))?;
            alpha_from_acceleration(acc, t)
        }
        (None, None) => Ok(1.0),
    }
}

/// Evaluates one point: initial GTE, GTE after the channel, relative loss and,
/// when `oracle_step` is given, the lattice oracle.
pub fn evaluate_point(
    family: Family,
    params: &Params,
    table: Option<&AccelTable>,
    oracle_step: Option<f64>,
    exec: Exec,
) -> Result<PointResult> {
    let alpha = resolve_alpha(params, table)?;
    let spec = ChannelSpec::new(alpha)?;
    let (initial, last, sigma) = match family {
        Family::Symmetric => {
            let r = SqueezingSym::new(params.require(Param::R)?)?;
            let initial = gte_symmetric_pure(r.r)?;
            let last = gte_mixed_symmetric(r, spec)?;
            let sigma = oracle_step.map(|_| apply_channel(&symmetric_state(r), spec)).transpose()?;
            (initial, last, sigma)
        }
        Family::Bisymmetric => {
            let p = SqueezingBisym::new(params.require(Param::R1)?, params.require(Param::R3)?)?;
            let initial = gte_pure(&LocalMixedness::from_array(p.mixednesses())?)?;
            let last = gte_mixed_bisymmetric(p, spec)?;
            let sigma = match oracle_step {
                Some(_) => Some(apply_channel(&bisymmetric_state(p)?, spec)?),
                None => None,
            };
            (initial, last, sigma)
        }
        Family::Pure => {
            if !spec.is_identity() {
                return Err(Error::Config("the pure family takes no channel".into()));
            }
            let a = LocalMixedness::new(
                params.require(Param::A1)?,
                params.require(Param::A2)?,
                params.require(Param::A3)?,
            )?;
            let rep = gte_pure(&a)?;
            let sigma = oracle_step.map(|_| pure_standard_form(&a)).transpose()?;
            (rep.clone(), rep, sigma)
        }
    };
    let (relative_loss, degenerate) = if initial.g_res > 0.0 {
        (relative_gte_loss(&initial, &last)?, false)
    } else {
        (0.0, true)
    };
    let oracle = match (sigma, oracle_step) {
        (Some(sigma), Some(h)) => {
            let opts = OracleOptions { exec, ..OracleOptions::default() };
            Some(gte_mixed_oracle_with(&sigma, h, &opts)?.0)
        }
        _ => None,
    };
    Ok(PointResult {
        family,
        params: *params,
        alpha,
        initial,
        last,
        relative_loss,
        degenerate,
        oracle,
    })
}

/// A cell of an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl Cell {
    fn num(v: Option<f64>) -> Cell {
        match v {
            Some(x) if x.is_finite() => Cell::Num(x),
            _ => Cell::Empty,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

/// Shortest decimal that parses back to `x`, switching to exponent form for
/// very small or very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// One output row, successful or not.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: Params,
    pub result: std::result::Result<PointResult, Error>,
}

impl SweepRow {
    pub fn cells(&self, cfg: &SweepConfig) -> Vec<Cell> {
        let p = &self.params;
        let ok = self.result.as_ref().ok();
        let mut cells: Vec<Cell> = cfg.family.state_params().iter().map(|&q| Cell::num(p.get(q))).collect();
        if cfg.family.takes_channel() {
            if cfg.uses_accel() {
                cells.push(Cell::num(p.get(Param::Accel)));
            }
            let alpha = ok.map(|r| r.alpha).or(p.get(Param::Alpha)).or(if cfg.uses_accel() { None } else { Some(1.0) });
            cells.push(Cell::num(alpha));
        }
        cells.push(Cell::num(ok.map(|r| r.initial.g_res)));
        cells.push(Cell::num(ok.map(|r| r.last.g_res)));
        cells.push(Cell::num(ok.map(|r| r.relative_loss)));
        let minimizer = ok.and_then(|r| r.last.minimizer);
        match cfg.family {
            Family::Symmetric => cells.push(Cell::num(match minimizer {
                Some(Minimizer::Symmetric { r_m }) => Some(r_m),
                _ => None,
            })),
            Family::Bisymmetric => {
                let (x, y) = match minimizer {
                    Some(Minimizer::Bisymmetric { r1m, r3m }) => (Some(r1m), Some(r3m)),
                    _ => (None, None),
                };
                cells.push(Cell::num(x));
                cells.push(Cell::num(y));
            }
            Family::Pure => {}
        }
        let diag = ok.and_then(|r| r.last.diagnostics.as_ref());
        cells.push(match (ok, diag) {
            (_, Some(d)) => Cell::Text(d.method.clone()),
            (Some(_), None) => Cell::Text("closed-form".into()),
            _ => Cell::Empty,
        });
        cells.push(diag.map_or(Cell::Empty, |d| Cell::Int(d.iterations)));
        cells.push(Cell::num(diag.map(|d| d.residual)));
        cells.push(match ok {
            Some(r) => Cell::Text(
                r.last
                    .saturated_constraints
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            None => Cell::Empty,
        });
        cells.push(match ok {
            Some(r) if r.degenerate => Cell::Text("degenerate".into()),
            _ => Cell::Empty,
        });
        if cfg.oracle_step.is_some() {
            let o = ok.and_then(|r| r.oracle.as_ref().map(|o| (o.g_res, r.last.g_res - o.g_res)));
            cells.push(Cell::num(o.map(|o| o.0)));
            cells.push(Cell::num(o.map(|o| o.1)));
        }
        cells.push(match &self.result {
            Err(e) => Cell::Text(e.name().into()),
            Ok(_) => Cell::Empty,
        });
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub failures: usize,
    /// Pure-family points outside the triangle region.
    pub skipped: usize,
    pub min_loss: Option<f64>,
    pub max_loss: Option<f64>,
}

impl std::fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6}"));
        write!(
            f,
            "points={} failures={} skipped={} min_loss={} max_loss={}",
            self.points,
            self.failures,
            self.skipped,
            show(self.min_loss),
            show(self.max_loss)
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepOutput {
    /// First failing row's error, used for the exit status.
    pub fn first_error(&self) -> Option<&Error> {
        self.rows.iter().find_map(|r| r.result.as_ref().err())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        writeln!(w, "{CSV_SCHEMA}")?;
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(e.to_string());
        out.write_record(self.config.columns()).map_err(io)?;
        for row in &self.rows {
            out.write_record(row.cells(&self.config).iter().map(Cell::to_csv)).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.cells(&self.config).iter().map(Cell::to_json).collect()))
            .collect();
        json!({
            "schema": JSON_SCHEMA,
            "family": self.config.family.name(),
            "columns": self.config.columns(),
            "rows": rows,
            "summary": self.summary,
        })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let s = serde_json::to_string_pretty(&self.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w, "{s}")?;
        Ok(())
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        match self.config.format {
            OutputFormat::Csv => self.write_csv(w),
            OutputFormat::Json => self.write_json(w),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(buf)
    }
}

/// Runs every grid point and assembles rows in grid order.
pub fn run_sweep(cfg: &SweepConfig, exec: Exec) -> Result<SweepOutput> {
    cfg.check()?;
    let mut grid = cfg.grid();
    let mut skipped = 0;
    if cfg.family == Family::Pure {
        let before = grid.len();
        grid.retain(|p| {
            let a = [p.get(Param::A1), p.get(Param::A2), p.get(Param::A3)];
            match a {
                [Some(a1), Some(a2), Some(a3)] => LocalMixedness::new(a1, a2, a3).is_ok_and(|m| m.satisfies_triangle()),
                _ => true,
            }
        });
        skipped = before - grid.len();
    }
    // The oracle parallelizes internally; points are spread over the pool either way.
    let rows: Vec<SweepRow> = exec.map(&grid, |p| SweepRow {
        params: *p,
        result: evaluate_point(cfg.family, p, cfg.table.as_ref(), cfg.oracle_step, Exec::Sequential),
    });
    let losses = rows.iter().filter_map(|r| r.result.as_ref().ok().map(|x| x.relative_loss));
    let summary = SweepSummary {
        points: rows.len(),
        failures: rows.iter().filter(|r| r.result.is_err()).count(),
        skipped,
        min_loss: losses.clone().reduce(f64::min),
        max_loss: losses.reduce(f64::max),
    };
    Ok(SweepOutput {
        config: cfg.clone(),
        rows,
        summary,
    })
}

/// Built-in validation points used when `validate` gets no grid.
pub fn default_validation_points(family: Family) -> Vec<Params> {
    let mut out = Vec::new();
    match family {
        Family::Symmetric => {
            for r in [0.5, 1.0, 2.0] {
                for a in [0.9, 0.95, 0.99] {
                    out.push(Params::default().with(Param::R, r).with(Param::Alpha, a));
                }
            }
        }
        Family::Bisymmetric => {
            for (r1, r3) in [(3.0, 1.0), (3.0, 2.0), (2.0, 1.0)] {
                for a in [0.95, 0.99] {
                    out.push(Params::default().with(Param::R1, r1).with(Param::R3, r3).with(Param::Alpha, a));
                }
            }
        }
        Family::Pure => {
            for a in [[1.5, 1.5, 1.5], [2.0, 1.5, 1.2], [3.0, 2.5, 2.0]] {
                out.push(Params::default().with(Param::A1, a[0]).with(Param::A2, a[1]).with(Param::A3, a[2]));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationPoint {
    pub params: Vec<(&'static str, f64)>,
    pub solver: f64,
    pub oracle: f64,
    pub delta: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedPoint {
    pub params: Vec<(&'static str, f64)>,
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid_step: f64,
    pub tolerance: f64,
    pub points: Vec<ValidationPoint>,
    /// Oracle found no feasible lattice point.
    pub infeasible: Vec<FailedPoint>,
    /// Any other error.
    pub errors: Vec<FailedPoint>,
}

impl ValidationReport {
    pub fn flagged(&self) -> usize {
        self.points.iter().filter(|p| !p.within).count()
    }

    pub fn passed(&self) -> bool {
        self.flagged() == 0 && self.infeasible.is_empty() && self.errors.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "oracle step {:e}, tolerance {:e}", self.grid_step, self.tolerance);
        for p in &self.points {
            let _ = writeln!(
                s,
                "{:<4} {:<40} solver {:>14.9} oracle {:>14.9} delta {:>10.3e}",
                if p.within { "ok" } else { "FLAG" },
                fmt_params(&p.params),
                p.solver,
                p.oracle,
                p.delta
            );
        }
        for p in &self.infeasible {
            let _ = writeln!(s, "INFEASIBLE {} {}", fmt_params(&p.params), p.message);
        }
        for p in &self.errors {
            let _ = writeln!(s, "ERROR {} {}: {}", fmt_params(&p.params), p.error, p.message);
        }
        let _ = write!(
            s,
            "{} points, {} flagged, {} infeasible, {} errors",
            self.points.len(),
            self.flagged(),
            self.infeasible.len(),
            self.errors.len()
        );
        s
    }
}

fn fmt_params(p: &[(&'static str, f64)]) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

/// Test hook: shift the solver answer of point `index` by `offset` before comparing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValidateOptions {
    pub corrupt: Option<(usize, f64)>,
}

/// Compares solver and oracle at every point; tolerance is 5 oracle steps.
pub fn run_validate(
    family: Family,
    points: &[Params],
    table: Option<&AccelTable>,
    grid_step: f64,
    exec: Exec,
    opts: &ValidateOptions,
) -> Result<ValidationReport> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Config(format!("oracle step {grid_step} must be > 0")));
    }
    let tolerance = 5.0 * grid_step;
    let results = exec.map(points, |p| evaluate_point(family, p, table, Some(grid_step), Exec::Sequential));
    let mut report = ValidationReport {
        grid_step,
        tolerance,
        points: Vec::new(),
        infeasible: Vec::new(),
        errors: Vec::new(),
    };
    for (i, (p, res)) in points.iter().zip(results).enumerate() {
        let named: Vec<(&'static str, f64)> = p.iter().map(|(k, v)| (k.name(), v)).collect();
        match res {
            Ok(r) => {
                let oracle = r.oracle.map_or(f64::NAN, |o| o.g_res);
                let mut solver = r.last.g_res;
                if let Some((j, off)) = opts.corrupt {
                    if j == i {
                        solver += off;
                    }
                }
                let delta = solver - oracle;
                report.points.push(ValidationPoint {
                    params: named,
                    solver,
                    oracle,
                    delta,
                    within: delta.abs() <= tolerance,
                });
            }
            Err(e) => {
                let fp = FailedPoint {
                    params: named,
                    error: e.name(),
                    message: e.to_string(),
                    exit_code: e.exit_code(),
                };
                if matches!(e, Error::Infeasible { .. }) {
                    report.infeasible.push(fp);
                } else {
                    report.errors.push(fp);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_and_values() {
        let ax: AxisSpec = "r:0.1:3:0.1".parse().unwrap();
        let v = ax.values();
        assert_eq!(v.len(), 30);
        assert_eq!(v[2], 0.3);
        assert_eq!(*v.last().unwrap(), 3.0);
        assert!("r:1:0:0.1".parse::<AxisSpec>().is_err());
        assert!("r:0:1:0".parse::<AxisSpec>().is_err());
        assert!("q:0:1:0.1".parse::<AxisSpec>().is_err());
        assert!("r:0:1".parse::<AxisSpec>().is_err());
        let acc: AxisSpec = "acceleration:0:1:0.5".parse().unwrap();
        assert_eq!(acc.param, Param::Accel);
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, 0.3, 5.079270337660091e-13, 1e20, -2.5e-7, 123.456] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(5.079270337660091e-13), "5.079270337660091e-13");
    }

    #[test]
    fn grid_is_row_major() {
        let mut cfg = SweepConfig::new(Family::Symmetric);
        cfg.axes = vec!["r:1:2:1".parse().unwrap(), "alpha:0.9:1:0.1".parse().unwrap()];
        cfg.check().unwrap();
        let g: Vec<(f64, f64)> = cfg
            .grid()
            .iter()
            .map(|p| (p.get(Param::R).unwrap(), p.get(Param::Alpha).unwrap()))
            .collect();
        assert_eq!(g, vec![(1.0, 0.9), (1.0, 1.0), (2.0, 0.9), (2.0, 1.0)]);
    }

    #[test]
    fn config_checks() {
        let mut cfg = SweepConfig::new(Family::Symmetric);
        assert!(cfg.check().is_err(), "r missing");
        cfg.fixed.set(Param::R, 1.0);
        cfg.check().unwrap();
        cfg.axes.push("accel:0:1:0.1".parse().unwrap());
        assert!(matches!(cfg.check(), Err(Error::Config(_))), "accel without table");
        cfg.axes = vec!["r1:0:1:0.1".parse().unwrap()];
        assert!(cfg.check().is_err(), "wrong family axis");
        cfg.axes = vec!["r:0:1:0.5".parse().unwrap()];
        assert!(cfg.check().is_err(), "swept and fixed");
        let mut cfg = SweepConfig::new(Family::Pure);
        cfg.fixed.set(Param::A1, 2.0);
        cfg.axes = vec![
            "a2:1:3:1".parse().unwrap(),
            "a3:1:3:1".parse().unwrap(),
        ];
        cfg.check().unwrap();
        cfg.axes.push("alpha:0.9:1:0.1".parse().unwrap());
        assert!(cfg.check().is_err());
    }

    #[test]
    fn degenerate_rows_do_not_divide() {
        let mut cfg = SweepConfig::new(Family::Symmetric);
        cfg.fixed.set(Param::Alpha, 0.9);
        cfg.axes = vec!["r:0:0.5:0.25".parse().unwrap()];
        let out = run_sweep(&cfg, Exec::Sequential).unwrap();
        assert_eq!(out.summary.failures, 0);
        let first = out.rows[0].result.as_ref().unwrap();
        assert!(first.degenerate);
        assert_eq!(first.relative_loss, 0.0);
        let csv = String::from_utf8(out.to_bytes().unwrap()).unwrap();
        assert!(csv.starts_with("# contangle-csv v1\nr,alpha,g_res_initial"));
        assert!(csv.lines().nth(2).unwrap().contains("degenerate"));
        assert!(!csv.contains("NaN") && !csv.contains("inf"));
    }

    #[test]
    fn pure_sweep_skips_outside_triangle() {
        let mut cfg = SweepConfig::new(Family::Pure);
        cfg.fixed.set(Param::A1, 2.0);
        cfg.axes = vec!["a2:1:5:1".parse().unwrap(), "a3:1:5:1".parse().unwrap()];
        let out = run_sweep(&cfg, Exec::Parallel).unwrap();
        assert_eq!(out.summary.points + out.summary.skipped, 25);
        assert!(out.summary.skipped > 0);
        assert_eq!(out.summary.failures, 0);
    }

    #[test]
    fn failures_land_in_the_error_column() {
        let mut cfg = SweepConfig::new(Family::Bisymmetric);
        cfg.fixed.set(Param::R1, 0.0);
        cfg.fixed.set(Param::Alpha, 0.9);
        cfg.axes = vec!["r3:0:2:1".parse().unwrap()];
        let out = run_sweep(&cfg, Exec::Sequential).unwrap();
        assert!(out.summary.failures > 0);
        assert_eq!(out.first_error().unwrap().name(), "TriangleViolation");
        let csv = String::from_utf8(out.to_bytes().unwrap()).unwrap();
        assert!(csv.contains("TriangleViolation"));
    }

    #[test]
    fn json_and_csv_agree_on_columns() {
        let mut cfg = SweepConfig::new(Family::Bisymmetric);
        cfg.fixed.set(Param::R1, 2.0);
        cfg.fixed.set(Param::R3, 1.0);
        cfg.axes = vec!["alpha:0.95:1:0.05".parse().unwrap()];
        cfg.format = OutputFormat::Json;
        let out = run_sweep(&cfg, Exec::Sequential).unwrap();
        let v = out.to_json();
        assert_eq!(v["schema"], JSON_SCHEMA);
        let cols = v["columns"].as_array().unwrap().len();
        assert!(v["rows"].as_array().unwrap().iter().all(|r| r.as_array().unwrap().len() == cols));
        assert_eq!(v["rows"][1][2], json!(1.0));
    }

    #[test]
    fn accel_table_drives_alpha() {
        let table = AccelTable::from_rows(&[(0.0, 1.0), (1.0, 0.9)]).unwrap();
        let p = Params::default().with(Param::R, 1.0).with(Param::Accel, 0.5);
        let r = evaluate_point(Family::Symmetric, &p, Some(&table), None, Exec::Sequential).unwrap();
        assert!((r.alpha - 0.95).abs() < 1e-15);
        assert!(evaluate_point(Family::Symmetric, &p, None, None, Exec::Sequential).is_err());
    }

    #[test]
    fn corrupted_answer_is_flagged() {
        let pts = vec![Params::default().with(Param::R, 0.5).with(Param::Alpha, 0.95)];
        let opts = ValidateOptions { corrupt: Some((0, 0.5)) };
        let rep = run_validate(Family::Symmetric, &pts, None, 1e-2, Exec::Parallel, &opts).unwrap();
        assert_eq!(rep.flagged(), 1);
        let clean = run_validate(Family::Symmetric, &pts, None, 1e-2, Exec::Parallel, &ValidateOptions::default()).unwrap();
        assert!(clean.passed(), "{}", clean.render());
    }

    #[test]
    fn identity_channel_rows_agree_exactly() {
        let pts = vec![Params::default().with(Param::R, 1.0).with(Param::Alpha, 1.0)];
        let rep = run_validate(Family::Symmetric, &pts, None, 1e-2, Exec::Parallel, &ValidateOptions::default()).unwrap();
        assert_eq!(rep.points[0].delta, 0.0, "{}", rep.render());
    }
}
