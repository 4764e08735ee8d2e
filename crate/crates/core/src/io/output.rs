//! CSV diagnostics and snapshots, written with 17 significant digits so every
//! float survives a text round trip bit for bit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::config::ParsedConfig;
use crate::io::plot::{line_plot, Series};
use crate::solver::{Grid1D, GridState, RunOutput, StepDiagnostics};

pub const DIAGNOSTICS_HEADER: &str = "step,t,entropy_raw,entropy_normalized,mass1,mass2,min_u3,dissipation,newton_iters,tau";
pub const SNAPSHOT_HEADER: &str = "x,u1,u2,w1,w2";

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const INITIAL_SNAPSHOT_FILE: &str = "snapshot_initial.csv";
pub const FINAL_SNAPSHOT_FILE: &str = "snapshot_final.csv";
pub const CONFIG_ECHO_FILE: &str = "config.toml";
pub const ENTROPY_PLOT_FILE: &str = "entropy.svg";
pub const PROFILE_PLOT_FILE: &str = "profiles.svg";

/// `d.ddddddddddddddddde±x`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_diagnostics<W: Write>(mut out: W, records: &[StepDiagnostics]) -> std::io::Result<()> {
    writeln!(out, "{DIAGNOSTICS_HEADER}")?;
    for d in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            d.step,
            fmt_f64(d.t),
            fmt_f64(d.entropy_raw),
            fmt_f64(d.entropy_normalized),
            fmt_f64(d.mass1),
            fmt_f64(d.mass2),
            fmt_f64(d.min_u3),
            fmt_f64(d.dissipation),
            d.newton_iters,
            fmt_f64(d.tau)
        )?;
    }
    Ok(())
}

pub fn write_snapshot<W: Write>(mut out: W, grid: &Grid1D, state: &GridState) -> std::io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for (j, (u, w)) in state.densities().iter().zip(&state.w).enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(grid.center(j)),
            fmt_f64(u.u1),
            fmt_f64(u.u2),
            fmt_f64(w.w1),
            fmt_f64(w.w2)
        )?;
    }
    Ok(())
}

fn bad_csv(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidState(format!("csv line {line}: {msg}"))
}

fn fields<'a>(line: &'a str, n: usize, lineno: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != n {
        return Err(bad_csv(lineno, format!("expected {n} fields, got {}", f.len())));
    }
    Ok(f)
}

fn num<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.parse().map_err(|_| bad_csv(lineno, format!("cannot parse `{s}`")))
}

/// Parse a diagnostics file written by [`write_diagnostics`].
pub fn read_diagnostics(text: &str) -> Result<Vec<StepDiagnostics>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == DIAGNOSTICS_HEADER => {}
        _ => return Err(bad_csv(1, "missing diagnostics header")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f = fields(l, 10, i + 1)?;
            Ok(StepDiagnostics {
                step: num(f[0], i + 1)?,
                t: num(f[1], i + 1)?,
                entropy_raw: num(f[2], i + 1)?,
                entropy_normalized: num(f[3], i + 1)?,
                mass1: num(f[4], i + 1)?,
                mass2: num(f[5], i + 1)?,
                min_u3: num(f[6], i + 1)?,
                dissipation: num(f[7], i + 1)?,
                newton_iters: num(f[8], i + 1)?,
                tau: num(f[9], i + 1)?,
            })
        })
        .collect()
}

/// Rows `[x, u1, u2, w1, w2]` of a snapshot file.
pub fn read_snapshot(text: &str) -> Result<Vec<[f64; 5]>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SNAPSHOT_HEADER => {}
        _ => return Err(bad_csv(1, "missing snapshot header")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let f = fields(l, 5, i + 1)?;
            let mut row = [0.0; 5];
            for (r, s) in row.iter_mut().zip(f) {
                *r = num(s, i + 1)?;
            }
            Ok(row)
        })
        .collect()
}

/// Records kept at the configured cadence: the initial state, every
/// `cadence`-th step, and the last step.
pub fn thin(initial: &StepDiagnostics, trajectory: &[StepDiagnostics], cadence: usize) -> Vec<StepDiagnostics> {
    let mut kept = vec![*initial];
    let last = trajectory.len();
    kept.extend(trajectory.iter().filter(|d| d.step % cadence.max(1) == 0 || d.step == last).copied());
    kept
}

fn create(path: &Path) -> Result<fs::File> {
    Ok(fs::File::create(path)?)
}

/// Write the artifacts of a finished (or aborted) run into `dir` and return
/// the paths written.
pub fn write_run(dir: &Path, cfg: &ParsedConfig, out: &RunOutput, plots: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let p = dir.join(CONFIG_ECHO_FILE);
    fs::write(&p, cfg.config.to_toml())?;
    written.push(p);

    let records = thin(&out.initial, &out.trajectory, cfg.config.output.cadence);
    let p = dir.join(DIAGNOSTICS_FILE);
    write_diagnostics(std::io::BufWriter::new(create(&p)?), &records)?;
    written.push(p);

    let p = dir.join(INITIAL_SNAPSHOT_FILE);
    write_snapshot(std::io::BufWriter::new(create(&p)?), &cfg.grid, &out.initial_state)?;
    written.push(p);

    if !out.trajectory.is_empty() {
        let p = dir.join(FINAL_SNAPSHOT_FILE);
        write_snapshot(std::io::BufWriter::new(create(&p)?), &cfg.grid, &out.final_state)?;
        written.push(p);
    }

    if plots {
        let entropy: Vec<(f64, f64)> = records.iter().map(|d| (d.t, d.entropy_normalized)).collect();
        let p = dir.join(ENTROPY_PLOT_FILE);
        fs::write(&p, line_plot("Entropy", "t", "entropy (normalized)", &[Series::new("E", entropy)]))?;
        written.push(p);

        let x = cfg.grid.centers();
        let u = out.final_state.densities();
        let s1 = x.iter().zip(&u).map(|(&x, p)| (x, p.u1)).collect();
        let s2 = x.iter().zip(&u).map(|(&x, p)| (x, p.u2)).collect();
        let p = dir.join(PROFILE_PLOT_FILE);
        let title = format!("Profiles at t = {:.4}", out.final_state.t);
        fs::write(&p, line_plot(&title, "x", "density", &[Series::new("u1", s1), Series::new("u2", s2)]))?;
        written.push(p);
    }
    Ok(written)
}
