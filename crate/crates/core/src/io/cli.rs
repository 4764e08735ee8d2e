//! The `crossdiff` command line: `check`, `simulate`, `sweep` and `verify`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificates::{det_hessian_certificate, vertex_limits, VertexLimits};
use crate::coeff::SktParams;
use crate::conditions::{
    check_psd_iff, check_remark_case, check_skt_corollary, check_symmetry, check_theorem_conditions, epsilon_max,
    ConditionReport, CHECK_TOL,
};
use crate::error::{Error, Result};
use crate::io::config::{parse_config, CoefficientsConfig, ParsedConfig, ReactionConfig, SimConfig};
use crate::io::output::{fmt_f64, write_run};
use crate::oracle::{compare_with_oracle, OracleComparison, VERIFY_RESOLUTIONS};
use crate::solver::{run, RunOutput};

pub const OUT_ENV: &str = "CROSSDIFF_OUT";
pub const DEFAULT_OUT: &str = "crossdiff-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "crossdiff", version, about = "Entropy-structure checks and bounded simulation for two-species cross-diffusion")]
pub struct Cli {
    /// Output directory (overrides the config's `output.dir`).
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    /// Override the configuration's RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    pub no_plots: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct FileArg {
    /// Input document (alternatively `--config`).
    pub file: Option<PathBuf>,
    #[arg(long = "config")]
    pub config: Option<PathBuf>,
}

impl FileArg {
    fn path(&self) -> Result<&Path> {
        self.config
            .as_deref()
            .or(self.file.as_deref())
            .ok_or_else(|| Error::config("config", "no input file given"))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the closed-form admissibility reports for a coefficient file.
    Check(FileArg),
    /// Run a simulation and write CSV diagnostics, snapshots and plots.
    Simulate(FileArg),
    /// Run `simulate` over a range of one parameter, one directory per point.
    Sweep {
        /// `[CONFIG] PARAM RANGE`; PARAM is a dotted key such as
        /// `coefficients.a11`, RANGE is `start:end:count`.
        #[arg(num_args = 2..=3, required = true)]
        args: Vec<String>,
        #[arg(long = "config")]
        config: Option<PathBuf>,
    },
    /// Compare the closed-form criterion with the spectral scan at n = 32, 64, 128.
    Verify(FileArg),
}

/// What a command printed and the exit status it asks for.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NewtonFailure { .. } | Error::TauUnderflow { .. } => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

/// The JSON error record printed on stderr for a failed command.
pub fn error_record(e: &Error) -> String {
    let mut rec = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    match e {
        Error::Config { key, .. } => rec["key"] = key.clone().into(),
        Error::Admissibility { report } | Error::Precondition { report, .. } => {
            rec["report"] = serde_json::to_value(report).unwrap_or_default();
        }
        Error::TauUnderflow { t, .. } => rec["t"] = (*t).into(),
        Error::NewtonFailure { iterations, residual, .. } => {
            rec["iterations"] = (*iterations).into();
            rec["residual"] = (*residual).into();
        }
        _ => {}
    }
    rec.to_string()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))
}

/// Execute a parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Check(f) => check(&read(f.path()?)?),
        Command::Verify(f) => verify(&read(f.path()?)?),
        Command::Simulate(f) => {
            let mut cfg = load(&read(f.path()?)?, cli)?;
            let dir = out_dir(cli, &cfg.config);
            cfg.config.output.dir = Some(dir.display().to_string());
            simulate(&cfg, &dir, !cli.no_plots && cfg.config.output.plots)
        }
        Command::Sweep { args, config } => {
            let (path, param, range) = match (config, args.as_slice()) {
                (Some(c), [p, r]) => (c.clone(), p, r),
                (None, [c, p, r]) => (PathBuf::from(c), p, r),
                _ => return Err(Error::config("sweep", "expected CONFIG PARAM RANGE")),
            };
            sweep(&read(&path)?, param, range, cli)
        }
    }
}

fn load(doc: &str, cli: &Cli) -> Result<ParsedConfig> {
    let cfg = parse_config(doc)?;
    match cli.seed {
        Some(seed) => SimConfig { seed, ..cfg.config }.validate(),
        None => Ok(cfg),
    }
}

fn out_dir(cli: &Cli, cfg: &SimConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Coefficient files hold a `[coefficients]` table as in simulation
/// configs; any other tables are ignored, so a full config also works.
#[derive(Debug, Deserialize)]
struct CoeffFile {
    coefficients: CoefficientsConfig,
    #[serde(default)]
    reaction: ReactionConfig,
}

fn parse_coeff_file(doc: &str) -> Result<CoeffFile> {
    toml::from_str(doc).map_err(|e| {
        let msg = e.message().to_string();
        let key = msg.split('`').nth(1).unwrap_or("coefficients").to_string();
        Error::Config { key, message: msg }
    })
}

#[derive(Debug, Serialize)]
struct CheckDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_max_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    det_c: Option<f64>,
    vertex_limits: VertexLimits,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped: Vec<String>,
    report: Vec<ConditionReport>,
}

fn check(doc: &str) -> Result<Outcome> {
    let file = parse_coeff_file(doc)?;
    let c = file.coefficients.coeff_set();
    if !c.is_finite() {
        return Err(Error::config("coefficients", "entries must be finite"));
    }
    let mut reports = Vec::new();
    if let CoefficientsConfig::Skt { a10, a20, a11, a12, a21, a22 } = file.coefficients {
        let mut s = SktParams::diffusion(a10, a20, a11, a12, a21, a22);
        if let ReactionConfig::LotkaVolterra { b1, b2 } = file.reaction {
            s = s.with_lv(b1, b2);
        }
        reports.push(check_skt_corollary(&s, CHECK_TOL));
    }
    let sym = check_symmetry(&c, CHECK_TOL);
    let symmetric = sym.passed;
    reports.push(sym);
    let mut out = CheckDocument {
        epsilon_max: None,
        epsilon_max_error: None,
        det_c: None,
        vertex_limits: vertex_limits(&c),
        skipped: Vec::new(),
        report: Vec::new(),
    };
    if symmetric {
        reports.push(check_psd_iff(&c, CHECK_TOL)?);
        reports.push(check_theorem_conditions(&c, CHECK_TOL)?);
        reports.push(check_remark_case(&c, CHECK_TOL)?);
        match epsilon_max(&c) {
            Ok(e) => out.epsilon_max = Some(e),
            Err(e) => out.epsilon_max_error = Some(e.to_string()),
        }
        out.det_c = Some(det_hessian_certificate(&c));
    } else {
        out.skipped = ["psd_iff", "theorem_strict", "remark_case", "epsilon_max", "det_c"].map(String::from).to_vec();
    }
    out.report = reports;
    let stdout = toml::to_string(&out).map_err(|e| Error::InvalidState(e.to_string()))?;
    Ok(Outcome { stdout, exit_code: EXIT_OK })
}

#[derive(Debug, Serialize)]
struct VerifyDocument {
    agreement: bool,
    comparison: Vec<OracleComparison>,
}

fn verify(doc: &str) -> Result<Outcome> {
    let c = parse_coeff_file(doc)?.coefficients.coeff_set();
    let comparison = VERIFY_RESOLUTIONS
        .iter()
        .map(|&n| compare_with_oracle(&c, n))
        .collect::<Result<Vec<_>>>()?;
    for cmp in comparison.iter().filter(|c| !c.agrees() && c.degenerate) {
        log::warn!("n = {}: disagreement at degenerate margin {:e}", cmp.n, cmp.min_abs_margin);
    }
    let agreement = comparison.iter().all(OracleComparison::acceptable);
    let stdout = toml::to_string(&VerifyDocument { agreement, comparison })
        .map_err(|e| Error::InvalidState(e.to_string()))?;
    Ok(Outcome { stdout, exit_code: if agreement { EXIT_OK } else { EXIT_DISAGREEMENT } })
}

fn summary_line(dir: &Path, out: &RunOutput) -> String {
    format!(
        "dir = \"{}\"\nsteps = {}\nt_final = {}\ninterior_violations = {}\n",
        dir.display(),
        out.trajectory.len(),
        fmt_f64(out.final_state.t),
        out.interior_violations
    )
}

/// Run one configuration, write its artifacts and report a numerical
/// failure only after the partial outputs are on disk.
pub fn simulate(cfg: &ParsedConfig, dir: &Path, plots: bool) -> Result<Outcome> {
    let out = run(cfg)?;
    write_run(dir, cfg, &out, plots)?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(Outcome { stdout: summary_line(dir, &out), exit_code: EXIT_OK }),
    }
}

/// `start:end:count`, inclusive of both ends.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::config("range", format!("expected start:end:count, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// Replace the value at a dotted key in a configuration. Numeric path
/// segments index into arrays, e.g. `reaction.b1.0`.
pub fn set_param(cfg: &SimConfig, key: &str, value: f64) -> Result<SimConfig> {
    let table: toml::Table = toml::from_str(&cfg.to_toml()).map_err(|e| Error::InvalidState(e.to_string()))?;
    let mut doc = toml::Value::Table(table);
    let mut slot = &mut doc;
    for part in key.split('.') {
        let next = match slot {
            toml::Value::Table(t) => t.get_mut(part),
            toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        };
        slot = next.ok_or_else(|| Error::config(key, format!("no such parameter (at `{part}`)")))?;
    }
    *slot = match slot {
        toml::Value::Integer(_) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        toml::Value::Float(_) => toml::Value::Float(value),
        toml::Value::Integer(_) => return Err(Error::config(key, format!("expects an integer, got {value}"))),
        _ => return Err(Error::config(key, "is not numeric")),
    };
    let text = toml::to_string(&doc).map_err(|e| Error::InvalidState(e.to_string()))?;
    Ok(parse_config(&text)?.config)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub dir: String,
    pub status: String,
    pub exit_code: i32,
    pub t_final: Option<f64>,
    pub entropy_final: Option<f64>,
}

pub const SWEEP_INDEX_FILE: &str = "sweep_index.csv";

fn sweep(doc: &str, param: &str, range: &str, cli: &Cli) -> Result<Outcome> {
    let base = load(doc, cli)?;
    let values = parse_range(range)?;
    let root = out_dir(cli, &base.config);
    std::fs::create_dir_all(&root)?;
    let plots = !cli.no_plots && base.config.output.plots;

    let job = |(i, &v): (usize, &f64)| -> SweepPoint {
        let dir = root.join(format!("point_{i:04}"));
        let mut point = SweepPoint {
            index: i,
            value: v,
            dir: dir.display().to_string(),
            status: "ok".into(),
            exit_code: EXIT_OK,
            t_final: None,
            entropy_final: None,
        };
        let result = set_param(&base.config, param, v).and_then(|c| {
            let mut c = c.validate()?;
            c.config.output.dir = Some(point.dir.clone());
            let out = run(&c)?;
            write_run(&dir, &c, &out, plots)?;
            point.t_final = Some(out.final_state.t);
            point.entropy_final = Some(out.trajectory.last().unwrap_or(&out.initial).entropy_normalized);
            out.failure.map_or(Ok(()), Err)
        });
        if let Err(e) = result {
            log::warn!("sweep point {i} ({param} = {v}): {e}");
            point.status = e.kind().into();
            point.exit_code = exit_code(&e);
        }
        point
    };
    let points: Vec<SweepPoint> = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(|| values.par_iter().enumerate().map(job).collect()),
        None => values.par_iter().enumerate().map(job).collect(),
    };

    let mut index = String::from("index,param,value,status,exit_code,t_final,entropy_final,dir\n");
    for p in &points {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        index.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.index,
            param,
            fmt_f64(p.value),
            p.status,
            p.exit_code,
            opt(p.t_final),
            opt(p.entropy_final),
            p.dir
        ));
    }
    std::fs::write(root.join(SWEEP_INDEX_FILE), &index)?;
    let exit_code = points.iter().map(|p| p.exit_code).max().unwrap_or(EXIT_OK);
    Ok(Outcome { stdout: index, exit_code })
}
