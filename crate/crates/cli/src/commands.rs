//! The five subcommand drivers. Each returns whether every requested check
//! passed; hard failures surface as errors.

use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use oscimin_core::functionals::{parts_identity_residual, q_of_sampled};
use oscimin_core::oracles::{root_oracles, verification_suite};
use oscimin_core::shooting::{find_infimum as solve_infimum, minimizer_profile, sweep_row};
use oscimin_core::{SampledFunction, SweepRow};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{num, opt_num, write_oracle_table, writer};
use crate::{Format, RunConfig};

pub fn find_infimum(cfg: &RunConfig) -> Result<bool> {
    let inf = solve_infimum(&cfg.integrator, cfg.bracket, cfg.root_tol)?;
    let profile = minimizer_profile(&inf.shot, 2001)?;
    let reports = root_oracles(&inf, &profile);
    let all_passed = reports.iter().all(|r| r.passed);
    let bd = inf.shot.breakdown.expect("converged shot has a breakdown");
    let t = inf.shot.t.expect("converged shot has a half period");

    let mut w = writer(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => {
            let obj = json!({
                "I": inf.i_value,
                "T": t,
                "a": inf.shot.a,
                "A": bd.a,
                "B": bd.b,
                "C": bd.c,
                "Q": bd.q,
                "oracles": reports,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&obj)?)?;
        }
        Format::Csv => {
            writeln!(
                w,
                "# sharp constant solve: bracket ({}, {}), root_tol {}",
                cfg.bracket.0, cfg.bracket.1, cfg.root_tol
            )?;
            writeln!(w, "# I = {}", num(inf.i_value))?;
            writeln!(w, "# T = {}", num(t))?;
            writeln!(w, "# a = {}", num(inf.shot.a))?;
            writeln!(w, "# A = {}", num(bd.a))?;
            writeln!(w, "# B = {}", num(bd.b))?;
            writeln!(w, "# C = {}", num(bd.c))?;
            writeln!(w, "# Q = {}", num(bd.q))?;
            write_oracle_table(&mut *w, &reports)?;
        }
    }
    w.flush()?;
    Ok(all_passed)
}

pub fn sweep(cfg: &RunConfig, from: f64, to: f64, step: f64) -> Result<bool> {
    if !(from > 0.0 && to < 0.25 && from <= to) {
        bail!("sweep range must lie inside (0, 0.25) with from <= to, got {from} to {to}");
    }
    if !(step > 0.0 && step.is_finite()) {
        bail!("sweep step must be positive, got {step}");
    }
    let mut lambdas = Vec::new();
    for k in 0.. {
        let l = from + step * k as f64;
        if l > to + 1e-12 {
            break;
        }
        lambdas.push(l);
    }
    let rows: Vec<SweepRow> = run_pool(|| {
        lambdas
            .par_iter()
            .map(|&l| sweep_row(l, &cfg.integrator))
            .collect()
    })?;

    let mut w = writer(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?,
        Format::Csv => {
            writeln!(w, "# multiplier sweep: from {from} to {to} step {step}")?;
            writeln!(w, "lambda,a_star,T1,J,T2,J_tilde,g,status")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    num(r.lambda),
                    opt_num(r.a_star),
                    opt_num(r.t1),
                    opt_num(r.j),
                    opt_num(r.t2),
                    opt_num(r.j_tilde),
                    opt_num(r.g),
                    r.status
                )?;
            }
        }
    }
    w.flush()?;
    Ok(true)
}

/// Run `job` on the default thread pool, or on one capped by the
/// OSCIMIN_THREADS environment variable when it parses to a positive count.
fn run_pool<T: Send>(job: impl FnOnce() -> T + Send) -> Result<T> {
    let cap = std::env::var("OSCIMIN_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    match cap {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("cannot build the sweep thread pool")?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

pub fn profile(cfg: &RunConfig, samples: usize) -> Result<bool> {
    let inf = solve_infimum(&cfg.integrator, cfg.bracket, cfg.root_tol)?;
    let prof = minimizer_profile(&inf.shot, samples)?;

    let mut w = writer(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => {
            let obj = json!({
                "I": prof.i_value,
                "T": prof.t,
                "a": prof.a,
                "rows": prof.rows,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&obj)?)?;
        }
        Format::Csv => {
            writeln!(w, "# I = {}", num(prof.i_value))?;
            writeln!(w, "# T = {}", num(prof.t))?;
            writeln!(w, "# a = {}", num(prof.a))?;
            writeln!(w, "x,u,du,d2u,d3u,H_residual")?;
            for r in &prof.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    num(r.x),
                    num(r.u),
                    num(r.du),
                    num(r.d2u),
                    num(r.d3u),
                    num(r.h_residual)
                )?;
            }
        }
    }
    w.flush()?;
    Ok(true)
}

pub fn verify(cfg: &RunConfig) -> Result<bool> {
    let reports = verification_suite(&cfg.integrator, cfg.bracket, cfg.root_tol)?;
    let all_passed = reports.iter().all(|r| r.passed);

    let mut w = writer(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => {
            let obj = json!({ "oracles": reports, "passed": all_passed });
            writeln!(w, "{}", serde_json::to_string_pretty(&obj)?)?;
        }
        Format::Csv => {
            write_oracle_table(&mut *w, &reports)?;
            let ok = reports.iter().filter(|r| r.passed).count();
            writeln!(w, "# {ok} of {} checks passed", reports.len())?;
        }
    }
    w.flush()?;
    for r in reports.iter().filter(|r| !r.passed) {
        eprintln!(
            "failed: {} (observed {}, wanted {})",
            r.name,
            r.observed,
            r.check.describe()
        );
    }
    Ok(all_passed)
}

pub fn quotient(cfg: &RunConfig, path: &Path, periodic: bool) -> Result<bool> {
    let f = read_samples(path)?;
    let bd = q_of_sampled(&f, periodic).map_err(|e| anyhow!(e))?;
    let residual = parts_identity_residual(&f, periodic).map_err(|e| anyhow!(e))?;

    let mut w = writer(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => {
            let obj = json!({
                "A": bd.a,
                "B": bd.b,
                "C": bd.c,
                "Q": bd.q,
                "parts_identity_residual": residual,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&obj)?)?;
        }
        Format::Csv => {
            writeln!(
                w,
                "# quotient of {} over [{}, {}], {} samples, {} stencils",
                path.display(),
                bd.interval.0,
                bd.interval.1,
                f.len(),
                if periodic { "periodic" } else { "one-sided" }
            )?;
            writeln!(w, "A,{}", num(bd.a))?;
            writeln!(w, "B,{}", num(bd.b))?;
            writeln!(w, "C,{}", num(bd.c))?;
            writeln!(w, "Q,{}", num(bd.q))?;
            writeln!(w, "parts_identity_residual,{}", num(residual))?;
        }
    }
    w.flush()?;
    Ok(true)
}

/// Read (x, u) pairs from the first two columns of a CSV file. Blank lines
/// and '#' comments are skipped, and one leading non-numeric row is treated
/// as a column header, so profile output feeds straight back in.
fn read_samples(path: &Path) -> Result<SampledFunction> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut grid: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let parsed = match (fields.next(), fields.next()) {
            (Some(a), Some(b)) => match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(u)) => Some((x, u)),
                _ => None,
            },
            _ => None,
        };
        match parsed {
            Some((x, u)) => {
                if let Some(&prev) = grid.last() {
                    if x <= prev {
                        bail!("line {line_no}: x = {x} does not increase past {prev}");
                    }
                }
                grid.push(x);
                values.push(u);
                header_allowed = false;
            }
            None if header_allowed => header_allowed = false,
            None => bail!("line {line_no}: expected two comma-separated numbers, got {raw:?}"),
        }
    }
    SampledFunction::new(grid, values, None).map_err(|e| anyhow!(e))
}
