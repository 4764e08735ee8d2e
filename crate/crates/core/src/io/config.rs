//! TOML simulation documents.
//!
//! ```toml
//! schema_version = 1
//! seed = 0
//!
//! [coefficients]
//! kind = "skt"            # or "explicit" with alpha/beta/gamma 2x2 arrays
//! a10 = 1.0
//! a20 = 1.0
//! a11 = 0.5
//! a12 = 0.5
//! a21 = 0.5
//! a22 = 0.5
//!
//! [reaction]
//! kind = "lotka_volterra" # or "none"
//! b1 = [1.0, 2.0, 2.0]
//! b2 = [1.0, 2.0, 2.0]
//!
//! [grid]
//! n_cells = 64
//! length = 1.0
//!
//! [initial]
//! profile = "cosine"      # constant | cosine | step | two_bump
//! u1 = 0.2
//! u2 = 0.3
//! amp1 = 0.1
//! amp2 = 0.0
//!
//! [time]
//! tau = 1e-3
//! t_end = 1.0
//!
//! [output]
//! dir = "out"
//! cadence = 1
//! plots = true
//! ```

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::coeff::{from_skt, CoeffSet, SktParams};
use crate::conditions::{
    check_remark_case, check_skt_corollary, check_symmetry, check_theorem_conditions, ConditionReport, CHECK_TOL,
};
use crate::entropy::StatePoint;
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::reactions::{LotkaVolterra, ReactionSpec};
use crate::solver::Grid1D;

pub const SCHEMA_VERSION: u32 = 1;

/// Distance from the boundary applied to initial data touching it.
pub const BOUNDARY_NUDGE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    /// RNG seed for initial-data noise; at most `i64::MAX` so TOML can hold it.
    #[serde(default)]
    pub seed: u64,
    pub coefficients: CoefficientsConfig,
    #[serde(default)]
    pub reaction: ReactionConfig,
    pub grid: GridConfig,
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientsConfig {
    Skt { a10: f64, a20: f64, a11: f64, a12: f64, a21: f64, a22: f64 },
    Explicit { alpha: [[f64; 2]; 2], beta: [[f64; 2]; 2], gamma: [[f64; 2]; 2] },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionConfig {
    #[default]
    None,
    LotkaVolterra { b1: [f64; 3], b2: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells: usize,
    #[serde(default = "default_length")]
    pub length: f64,
}

fn default_length() -> f64 {
    1.0
}

// Unknown keys in `[initial]` are rejected by `check_initial_keys`; serde
// cannot combine `deny_unknown_fields` with the flattened profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConfig {
    #[serde(flatten)]
    pub profile: InitialProfile,
    /// Uniform noise amplitude added per cell, drawn from the seeded RNG.
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "default_true")]
    pub rescale_initial: bool,
}

fn default_true() -> bool {
    true
}

/// Named initial density profiles on `[0, L]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum InitialProfile {
    Constant {
        u1: f64,
        u2: f64,
    },
    /// `u_i = base_i + amp_i cos(modes π x / L)`.
    Cosine {
        u1: f64,
        u2: f64,
        amp1: f64,
        amp2: f64,
        #[serde(default = "default_modes")]
        modes: u32,
    },
    /// `left` on `x < position·L`, `right` elsewhere.
    Step {
        left: [f64; 2],
        right: [f64; 2],
        #[serde(default = "default_half")]
        position: f64,
    },
    /// Gaussian bump of species `i` centred at `centers[i]·L`.
    TwoBump {
        base: [f64; 2],
        amp: [f64; 2],
        #[serde(default = "default_centers")]
        centers: [f64; 2],
        #[serde(default = "default_width")]
        width: f64,
    },
}

fn default_modes() -> u32 {
    1
}
fn default_half() -> f64 {
    0.5
}
fn default_centers() -> [f64; 2] {
    [0.25, 0.75]
}
fn default_width() -> f64 {
    0.1
}

impl InitialProfile {
    pub fn evaluate(&self, x: f64, length: f64) -> [f64; 2] {
        let xi = x / length;
        match *self {
            InitialProfile::Constant { u1, u2 } => [u1, u2],
            InitialProfile::Cosine { u1, u2, amp1, amp2, modes } => {
                let c = (modes as f64 * std::f64::consts::PI * xi).cos();
                [u1 + amp1 * c, u2 + amp2 * c]
            }
            InitialProfile::Step { left, right, position } => {
                if xi < position {
                    left
                } else {
                    right
                }
            }
            InitialProfile::TwoBump { base, amp, centers, width } => {
                let bump = |c: f64| (-((xi - c) / width).powi(2)).exp();
                [base[0] + amp[0] * bump(centers[0]), base[1] + amp[1] * bump(centers[1])]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub tau: f64,
    pub t_end: f64,
    /// Smallest step before aborting; defaults to `1e-12 · t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default = "default_true")]
    pub plots: bool,
}

fn default_cadence() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, cadence: 1, plots: true }
    }
}

/// A validated configuration with the derived model objects and the
/// admissibility reports that were checked.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub config: SimConfig,
    pub grid: Grid1D,
    pub coeffs: CoeffSet,
    pub reaction: ReactionSpec,
    pub reports: Vec<ConditionReport>,
}

impl ParsedConfig {
    pub fn tau_min(&self) -> f64 {
        self.config.time.tau_min.unwrap_or(1e-12 * self.config.time.t_end)
    }
}

impl CoefficientsConfig {
    pub fn coeff_set(&self) -> CoeffSet {
        match *self {
            CoefficientsConfig::Skt { a10, a20, a11, a12, a21, a22 } => {
                from_skt(&SktParams::diffusion(a10, a20, a11, a12, a21, a22))
            }
            CoefficientsConfig::Explicit { alpha, beta, gamma } => {
                CoeffSet { alpha: Mat2(alpha), beta: Mat2(beta), gamma: Mat2(gamma) }
            }
        }
    }
}

impl ReactionConfig {
    pub fn reaction_spec(&self) -> ReactionSpec {
        match *self {
            ReactionConfig::None => ReactionSpec::None,
            ReactionConfig::LotkaVolterra { b1, b2 } => ReactionSpec::LotkaVolterra(LotkaVolterra::new(b1, b2)),
        }
    }
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

impl SimConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Validate the document and derive the model objects.
    pub fn validate(&self) -> Result<ParsedConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::config("seed", format!("must be at most {}", i64::MAX)));
        }
        let grid = Grid1D::new(self.grid.n_cells, self.grid.length)?;
        let t = &self.time;
        if !(finite("time.tau", t.tau)? > 0.0) {
            return Err(Error::config("time.tau", format!("must be > 0, got {}", t.tau)));
        }
        if !(finite("time.t_end", t.t_end)? >= 0.0) {
            return Err(Error::config("time.t_end", format!("must be >= 0, got {}", t.t_end)));
        }
        if let Some(m) = t.tau_min {
            if !(finite("time.tau_min", m)? > 0.0) {
                return Err(Error::config("time.tau_min", format!("must be > 0, got {m}")));
            }
        }
        if self.output.cadence < 1 {
            return Err(Error::config("output.cadence", "must be >= 1"));
        }
        if !(self.initial.noise >= 0.0 && self.initial.noise.is_finite()) {
            return Err(Error::config("initial.noise", "must be finite and >= 0"));
        }

        let reaction = self.reaction.reaction_spec();
        let mut reports = Vec::new();
        let coeffs = match self.coefficients {
            CoefficientsConfig::Skt { a10, a20, a11, a12, a21, a22 } => {
                let mut s = SktParams::diffusion(a10, a20, a11, a12, a21, a22);
                if let ReactionConfig::LotkaVolterra { b1, b2 } = self.reaction {
                    s = s.with_lv(b1, b2);
                }
                for (name, v) in s.named() {
                    let key = if name.starts_with('a') { format!("coefficients.{name}") } else { "reaction".into() };
                    finite(&key, v)?;
                }
                let report = check_skt_corollary(&s, CHECK_TOL);
                if !report.passed {
                    return Err(report.into_error());
                }
                reports.push(report);
                from_skt(&s)
            }
            CoefficientsConfig::Explicit { .. } => {
                let c = self.coefficients.coeff_set();
                if !c.is_finite() {
                    return Err(Error::config("coefficients", "entries must be finite"));
                }
                let sym = check_symmetry(&c, CHECK_TOL);
                if !sym.passed {
                    return Err(sym.into_error());
                }
                reports.push(sym);
                let strict = check_theorem_conditions(&c, CHECK_TOL)?;
                if strict.passed {
                    reports.push(strict);
                } else {
                    let remark = check_remark_case(&c, CHECK_TOL)?;
                    if !remark.passed {
                        return Err(strict.into_error());
                    }
                    reports.push(remark);
                }
                c
            }
        };
        let band = reaction.admissibility();
        if !band.passed {
            return Err(band.into_error());
        }
        reports.push(band);

        let parsed = ParsedConfig { config: self.clone(), grid, coeffs, reaction, reports };
        parsed.initial_densities()?;
        Ok(parsed)
    }
}

impl ParsedConfig {
    /// Initial cell densities, after optional rescaling into the open triangle.
    pub fn initial_densities(&self) -> Result<Vec<StatePoint>> {
        Ok(self.initial_densities_logged()?.0)
    }

    /// As [`initial_densities`](Self::initial_densities), also returning the
    /// adjustments that were applied.
    pub fn initial_densities_logged(&self) -> Result<(Vec<StatePoint>, Vec<String>)> {
        let init = &self.config.initial;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut raw: Vec<[f64; 2]> = self
            .grid
            .centers()
            .into_iter()
            .map(|x| {
                let mut v = init.profile.evaluate(x, self.grid.length);
                if init.noise > 0.0 {
                    v[0] += init.noise * rng.gen_range(-1.0..1.0);
                    v[1] += init.noise * rng.gen_range(-1.0..1.0);
                }
                v
            })
            .collect();
        for (j, v) in raw.iter().enumerate() {
            let p = StatePoint::new(v[0], v[1]);
            if !p.is_finite() || p.margin() < -CHECK_TOL {
                return Err(Error::InitialData(format!(
                    "cell {j} at x = {:.6} has ({}, {}) outside the closed triangle",
                    self.grid.center(j),
                    v[0],
                    v[1]
                )));
            }
        }
        let mut notes = Vec::new();
        if init.rescale_initial {
            let max_sum = raw.iter().map(|v| v[0] + v[1]).fold(0.0, f64::max);
            if max_sum > 1.0 - BOUNDARY_NUDGE {
                let s = (1.0 - BOUNDARY_NUDGE) / max_sum;
                for v in raw.iter_mut() {
                    v[0] *= s;
                    v[1] *= s;
                }
                notes.push(format!("initial data rescaled by {s:.17e} to keep u1 + u2 < 1"));
            }
            let mut nudged = 0;
            for v in raw.iter_mut() {
                for x in v.iter_mut() {
                    if *x < BOUNDARY_NUDGE {
                        *x = BOUNDARY_NUDGE;
                        nudged += 1;
                    }
                }
            }
            if nudged > 0 {
                notes.push(format!("{nudged} boundary values nudged inward by {BOUNDARY_NUDGE:e}"));
            }
        }
        let pts: Vec<StatePoint> = raw.iter().map(|v| StatePoint::new(v[0], v[1])).collect();
        if let Some(j) = pts.iter().position(|p| !p.is_interior()) {
            return Err(Error::InitialData(format!(
                "cell {j} ({}, {}) is on the boundary of the triangle and rescaling is disabled",
                pts[j].u1, pts[j].u2
            )));
        }
        for n in &notes {
            log::warn!("{n}");
        }
        Ok((pts, notes))
    }
}

fn toml_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    let key = msg.split('`').nth(1).unwrap_or("document").to_string();
    Error::Config { key, message: msg }
}

fn check_initial_keys(doc: &toml::Table) -> Result<()> {
    let Some(init) = doc.get("initial").and_then(toml::Value::as_table) else {
        return Ok(());
    };
    let profile_keys: &[&str] = match init.get("profile").and_then(toml::Value::as_str) {
        Some("constant") => &["u1", "u2"],
        Some("cosine") => &["u1", "u2", "amp1", "amp2", "modes"],
        Some("step") => &["left", "right", "position"],
        Some("two_bump") => &["base", "amp", "centers", "width"],
        // Let serde report missing or unknown profiles.
        _ => return Ok(()),
    };
    for key in init.keys() {
        if !["profile", "noise", "rescale_initial"].contains(&key.as_str()) && !profile_keys.contains(&key.as_str()) {
            return Err(Error::config(key.clone(), format!("unknown field `{key}` in [initial]")));
        }
    }
    Ok(())
}

/// Parse and validate a TOML configuration document.
pub fn parse_config(document: &str) -> Result<ParsedConfig> {
    let table: toml::Table = toml::from_str(document).map_err(toml_error)?;
    check_initial_keys(&table)?;
    let cfg: SimConfig = table.try_into().map_err(toml_error)?;
    cfg.validate()
}

#[cfg(test)]
pub(crate) mod tests_support {
    pub fn minimal() -> super::ParsedConfig {
        super::parse_config(super::tests::MINIMAL).unwrap()
    }
}
