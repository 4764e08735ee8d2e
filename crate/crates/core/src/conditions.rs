//! Algebraic admissibility criteria for the symmetric linear family.
//!
//! Every check returns a [`ConditionReport`] listing the slack of each
//! inequality it evaluated, so degenerate passes (zero slack) are visible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffSet, FreeParams, SktParams};
use crate::entropy::StatePoint;
use crate::error::{Error, Result};
use crate::oracle::spectral_oracle_scan;

/// Default tolerance for the closed inequalities.
pub const CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Symmetry,
    PsdIff,
    TheoremStrict,
    RemarkCase,
    SktCorollary,
    ReactionBand,
    H3Bound,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Criterion::Symmetry => "symmetry",
            Criterion::PsdIff => "psd_iff",
            Criterion::TheoremStrict => "theorem_strict",
            Criterion::RemarkCase => "remark_case",
            Criterion::SktCorollary => "skt_corollary",
            Criterion::ReactionBand => "reaction_band",
            Criterion::H3Bound => "h3_bound",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub label: Criterion,
    pub passed: bool,
    pub tol: f64,
    pub margins: Vec<Margin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<StatePoint>,
    /// Criterion-specific scalar: ε for the remark case, the band width for
    /// Lotka–Volterra, the growth constant for the H3 scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ConditionReport {
    pub(crate) fn new(label: Criterion, tol: f64) -> Self {
        Self { label, passed: true, tol, margins: Vec::new(), witness: None, value: None, flags: Vec::new() }
    }

    /// Record a slack that must be `>= -tol`.
    pub(crate) fn weak(&mut self, name: &str, slack: f64) {
        self.passed &= slack >= -self.tol;
        self.push(name, slack);
    }

    /// Record a slack that must be `> tol`.
    pub(crate) fn strict(&mut self, name: &str, slack: f64) {
        self.passed &= slack > self.tol;
        self.push(name, slack);
    }

    /// Record a residual that must satisfy `|r| <= tol`.
    pub(crate) fn equal(&mut self, name: &str, residual: f64) {
        self.passed &= residual.abs() <= self.tol;
        self.push(name, residual);
    }

    pub(crate) fn push(&mut self, name: &str, value: f64) {
        self.margins.push(Margin { name: name.to_string(), value });
    }

    pub(crate) fn flag(&mut self, flag: &str) {
        self.flags.push(flag.to_string());
    }

    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.iter().find(|m| m.name == name).map(|m| m.value)
    }

    /// Smallest margin by absolute value among those that fail.
    pub fn failing_margins(&self) -> Vec<&Margin> {
        self.margins.iter().filter(|m| m.value < -self.tol).collect()
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn into_error(self) -> Error {
        Error::Admissibility { report: Box::new(self) }
    }
}

/// Conditions under which `D²h(u)·A(u)` is symmetric for every `u`.
pub fn check_symmetry(c: &CoeffSet, tol: f64) -> ConditionReport {
    let mut r = ConditionReport::new(Criterion::Symmetry, tol);
    let (a, b, g) = (c.alpha, c.beta, c.gamma);
    r.equal("alpha12", a.get(0, 1));
    r.equal("alpha21", a.get(1, 0));
    r.equal("beta21", b.get(1, 0));
    r.equal("gamma12", g.get(0, 1));
    r.equal("beta22", b.get(1, 1) - (b.get(0, 0) - g.get(1, 0)));
    r.equal("gamma11", g.get(0, 0) - (g.get(1, 1) - b.get(0, 1)));
    r.equal("gamma21", g.get(1, 0) - (a.get(1, 1) - a.get(0, 0) + b.get(0, 1)));
    r
}

fn require_symmetric(operation: &'static str, c: &CoeffSet, tol: f64) -> Result<FreeParams> {
    let sym = check_symmetry(c, tol);
    if sym.passed {
        Ok(c.free_params())
    } else {
        Err(Error::Precondition { operation, report: Box::new(sym) })
    }
}

fn psd_margins(r: &mut ConditionReport, p: &FreeParams) {
    r.weak("alpha11", p.a11);
    r.weak("alpha22", p.a22);
    r.weak("beta12_slack", p.a11 + p.b11.min(p.g22) - p.b12);
    r.weak("alpha11_plus_beta11", p.a11 + p.b11);
    r.weak("alpha22_plus_gamma22", p.a22 + p.g22);
}

/// Closed-form test for `D²h·A ⪰ 0` on the whole triangle.
pub fn psd_iff_params(p: &FreeParams, tol: f64) -> ConditionReport {
    let mut r = ConditionReport::new(Criterion::PsdIff, tol);
    psd_margins(&mut r, p);
    r
}

/// Positive semidefiniteness of `D²h(u)·A(u)` for all `u` in the triangle.
///
/// On failure the report carries a witness point found by a coarse spectral
/// scan including the vertex-approach paths.
pub fn check_psd_iff(c: &CoeffSet, tol: f64) -> Result<ConditionReport> {
    let p = require_symmetric("check_psd_iff", c, tol)?;
    let mut r = psd_iff_params(&p, tol);
    if !r.passed {
        let scan = spectral_oracle_scan(c, 32);
        if scan.unweighted_min < 0.0 {
            r.witness = Some(scan.unweighted_argmin);
        }
    }
    Ok(r)
}

/// The strict version used for existence of bounded solutions.
pub fn check_theorem_conditions(c: &CoeffSet, tol: f64) -> Result<ConditionReport> {
    let p = require_symmetric("check_theorem_conditions", c, tol)?;
    let mut r = ConditionReport::new(Criterion::TheoremStrict, tol);
    r.strict("alpha11", p.a11);
    r.strict("alpha22", p.a22);
    r.strict("beta12_slack", p.a11 + p.b11.min(p.g22) - p.b12);
    r.weak("alpha11_plus_beta11", p.a11 + p.b11);
    r.weak("alpha22_plus_gamma22", p.a22 + p.g22);
    Ok(r)
}

/// Vanishing constant part with positive self-diffusion slopes; gives
/// `z·D²h A z >= ε|z|²` with `ε = min(β11, γ22)`.
pub fn check_remark_case(c: &CoeffSet, tol: f64) -> Result<ConditionReport> {
    let p = require_symmetric("check_remark_case", c, tol)?;
    let mut r = ConditionReport::new(Criterion::RemarkCase, tol);
    r.weak("alpha11_zero", -p.a11.abs());
    r.weak("alpha22_zero", -p.a22.abs());
    r.strict("beta11", p.b11);
    r.strict("gamma22", p.g22);
    let eps = p.b11.min(p.g22);
    let shifted = FreeParams { b11: p.b11 - eps, b12: p.b12 - eps, g22: p.g22 - eps, ..p };
    let inner = psd_iff_params(&shifted, tol);
    for m in &inner.margins {
        r.weak(&format!("shifted_{}", m.name), m.value);
    }
    r.value = Some(eps);
    Ok(r)
}

/// Largest ε with `z·D²h A z >= ε (z1²/u1 + z2²/u2)` on the triangle.
pub fn epsilon_max(c: &CoeffSet) -> Result<f64> {
    let r = check_psd_iff(c, CHECK_TOL)?;
    if !r.passed {
        return Err(Error::Precondition { operation: "epsilon_max", report: Box::new(r) });
    }
    Ok(epsilon_max_params(&c.free_params()))
}

pub(crate) fn epsilon_max_params(p: &FreeParams) -> f64 {
    p.a11.min(p.a22).min(p.a11 + p.b11.min(p.g22) - p.b12).max(0.0)
}

/// Structural conditions on SKT constants plus the Lotka–Volterra growth bound.
pub fn check_skt_corollary(s: &SktParams, tol: f64) -> ConditionReport {
    let mut r = ConditionReport::new(Criterion::SktCorollary, tol);
    let min_param = s.named().iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    r.weak("min_coefficient", min_param);
    r.equal("a21_minus_a11", s.a21 - s.a11);
    r.equal("a22_minus_a12", s.a22 - s.a12);
    r.equal("ordering", (s.a20 - s.a10) - (s.a11 - s.a22));
    r.weak("a20_minus_a10", s.a20 - s.a10);
    r.strict("a10", s.a10);
    r.strict("a20", s.a20);
    r.weak("b1_slack", s.b11.min(s.b12) - s.b10);
    r.weak("b2_slack", s.b21.min(s.b22) - s.b20);
    if s.named().iter().any(|(_, v)| !v.is_finite()) {
        r.passed = false;
        r.flag("non_finite");
    }
    r
}
