use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contangle::sweep::{
    default_validation_points, evaluate_point, run_sweep, run_validate, AxisSpec, OutputFormat, Param,
    Params, PointResult, SweepConfig, ValidateOptions,
};
use contangle::{AccelTable, Error, Exec};
use serde_json::json;

/// Genuine tripartite entanglement of three-mode Gaussian states under an
/// acceleration channel.
#[derive(Parser, Debug)]
#[command(name = "contangle", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate a single parameter point.
    Point(Common),
    /// Evaluate a grid of up to two swept axes.
    Sweep(Common),
    /// Compare the solvers against the lattice oracle.
    Validate(Common),
    /// Check an acceleration table file.
    TableCheck {
        /// Table path (same as --accel-table).
        path: Option<PathBuf>,
        #[arg(long = "accel-table")]
        accel_table: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// symmetric | bisym | pure
    family: String,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    r3: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    a3: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    accel: Option<f64>,
    #[arg(long = "accel-table")]
    accel_table: Option<PathBuf>,
    /// '<axis>:<min>:<max>:<step>', repeatable
    #[arg(long)]
    grid: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Also run the lattice oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long = "oracle-step", default_value_t = 1e-3)]
    oracle_step: f64,
    /// Evaluate on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn config(&self) -> Result<SweepConfig, Error> {
        let mut cfg = SweepConfig::new(self.family.parse()?);
        let fixed = [
            (Param::R, self.r),
            (Param::R1, self.r1),
            (Param::R3, self.r3),
            (Param::A1, self.a1),
            (Param::A2, self.a2),
            (Param::A3, self.a3),
            (Param::Alpha, self.alpha),
            (Param::Accel, self.accel),
        ];
        for (p, v) in fixed {
            if let Some(v) = v {
                cfg.fixed.set(p, v);
            }
        }
        cfg.axes = self.grid.iter().map(|g| g.parse::<AxisSpec>()).collect::<Result<_, _>>()?;
        if let Some(path) = &self.accel_table {
            cfg.table = Some(AccelTable::from_path(path)?);
        }
        cfg.out = self.out.clone();
        cfg.format = self.format.parse::<OutputFormat>()?;
        if self.oracle {
            cfg.oracle_step = Some(self.oracle_step);
        }
        Ok(cfg)
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let res = match cli.cmd {
        Cmd::Point(c) => cmd_point(&c),
        Cmd::Sweep(c) => cmd_sweep(&c),
        Cmd::Validate(c) => cmd_validate(&c),
        Cmd::TableCheck { path, accel_table } => cmd_table_check(path.or(accel_table)),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_point(c: &Common) -> Result<u8, Error> {
    let cfg = c.config()?;
    if !cfg.axes.is_empty() {
        return Err(Error::Config("point takes no --grid".into()));
    }
    cfg.check()?;
    let r = evaluate_point(cfg.family, &cfg.fixed, cfg.table.as_ref(), cfg.oracle_step, c.exec())?;
    let mut out = io::stdout().lock();
    print_point(&mut out, &r)?;
    Ok(0)
}

fn print_point(w: &mut impl Write, r: &PointResult) -> io::Result<()> {
    let params: Vec<String> = r.params.iter().map(|(p, v)| format!("{}={v}", p.name())).collect();
    writeln!(w, "family      {}", r.family.name())?;
    writeln!(w, "params      {}", params.join(" "))?;
    writeln!(w, "alpha       {}", r.alpha)?;
    writeln!(w, "g_res       {:.12} -> {:.12}", r.initial.g_res, r.last.g_res)?;
    writeln!(
        w,
        "loss        {:.9}{}",
        r.relative_loss,
        if r.degenerate { " (degenerate)" } else { "" }
    )?;
    writeln!(w, "ref mode    {}", r.last.ref_mode)?;
    if let Some(m) = &r.last.minimizer {
        writeln!(w, "minimizer   {}", serde_json::to_string(m).unwrap_or_default())?;
    }
    if let Some(d) = &r.last.diagnostics {
        writeln!(
            w,
            "solver      {} iterations={} residual={:e} saturated={:?}",
            d.method, d.iterations, d.residual, r.last.saturated_constraints
        )?;
    }
    if let Some(o) = &r.oracle {
        writeln!(w, "oracle      {:.12} (delta {:e})", o.g_res, r.last.g_res - o.g_res)?;
    }
    let params: serde_json::Map<String, serde_json::Value> =
        r.params.iter().map(|(p, v)| (p.name().to_string(), json!(v))).collect();
    let doc = json!({
        "family": r.family,
        "params": params,
        "alpha": r.alpha,
        "g_res_initial": r.initial.g_res,
        "g_res_final": r.last.g_res,
        "relative_loss": r.relative_loss,
        "degenerate": r.degenerate,
        "initial": r.initial,
        "final": r.last,
        "oracle": r.oracle,
    });
    writeln!(w, "{doc}")
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_sweep(c: &Common) -> Result<u8, Error> {
    let cfg = c.config()?;
    let out = run_sweep(&cfg, c.exec())?;
    let mut w = open_out(&cfg.out)?;
    out.write(&mut w)?;
    w.flush()?;
    eprintln!("{}", out.summary);
    Ok(out.first_error().map_or(0, |e| e.exit_code() as u8))
}

fn cmd_validate(c: &Common) -> Result<u8, Error> {
    let mut cfg = c.config()?;
    cfg.oracle_step = Some(c.oracle_step);
    let points: Vec<Params> = if cfg.axes.is_empty() && cfg.fixed.iter().next().is_none() {
        default_validation_points(cfg.family)
    } else {
        cfg.check()?;
        cfg.grid()
    };
    let rep = run_validate(
        cfg.family,
        &points,
        cfg.table.as_ref(),
        c.oracle_step,
        c.exec(),
        &ValidateOptions::default(),
    )?;
    println!("{}", rep.render());
    if let Some(p) = &cfg.out {
        let s = serde_json::to_string_pretty(&rep).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(p, s + "\n").map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    if let Some(e) = rep.errors.first() {
        return Ok(e.exit_code as u8);
    }
    Ok(if rep.passed() { 0 } else { 2 })
}

fn cmd_table_check(path: Option<PathBuf>) -> Result<u8, Error> {
    let path = path.ok_or_else(|| Error::Config("table-check needs a path".into()))?;
    let t = AccelTable::from_path(&path)?;
    let (lo, hi) = t.range();
    println!("{}: ok, {} rows, acceleration in [{lo}, {hi}]", path.display(), t.len());
    Ok(0)
}
