//! Reaction terms of the form `f_i(u) = u_i g_i(u)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionReport, Criterion};
use crate::entropy::{entropy_density, StatePoint};
use crate::linalg::{Mat2, Vec2};

/// Lotka–Volterra constants: `g_i = b_i0 - b_i1 u1 - b_i2 u2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LotkaVolterra {
    pub b10: f64,
    pub b11: f64,
    pub b12: f64,
    pub b20: f64,
    pub b21: f64,
    pub b22: f64,
}

impl LotkaVolterra {
    pub fn new(b1: [f64; 3], b2: [f64; 3]) -> Self {
        Self { b10: b1[0], b11: b1[1], b12: b1[2], b20: b2[0], b21: b2[1], b22: b2[2] }
    }

    fn rows(&self) -> [[f64; 3]; 2] {
        [[self.b10, self.b11, self.b12], [self.b20, self.b21, self.b22]]
    }

    pub fn growth(&self, u: &StatePoint) -> Vec2 {
        self.rows().map(|[b0, b1, b2]| b0 - b1 * u.u1 - b2 * u.u2)
    }
}

pub type GrowthFn = dyn Fn(&StatePoint) -> Vec2 + Send + Sync;

/// User-supplied growth rates `g = (g1, g2)`, declared nonpositive on the
/// band `1 - eps_band < u1 + u2 < 1`.
#[derive(Clone)]
pub struct CustomReaction {
    growth: Arc<GrowthFn>,
    eps_band: f64,
}

impl CustomReaction {
    pub fn new(growth: impl Fn(&StatePoint) -> Vec2 + Send + Sync + 'static, eps_band: f64) -> crate::Result<Self> {
        if !(eps_band > 0.0 && eps_band < 1.0) {
            return Err(crate::Error::InvalidState(format!("eps_band must lie in (0, 1), got {eps_band}")));
        }
        Ok(Self { growth: Arc::new(growth), eps_band })
    }

    pub fn eps_band(&self) -> f64 {
        self.eps_band
    }

    pub fn growth(&self, u: &StatePoint) -> Vec2 {
        (self.growth)(u)
    }
}

impl fmt::Debug for CustomReaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomReaction").field("eps_band", &self.eps_band).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Default)]
pub enum ReactionSpec {
    #[default]
    None,
    LotkaVolterra(LotkaVolterra),
    Custom(CustomReaction),
}

/// Number of band samples used to validate custom growth rates.
pub const BAND_SAMPLES: usize = 10_000;

impl ReactionSpec {
    /// `g(u)`; `(0, 0)` when reactions are off.
    pub fn growth(&self, u: &StatePoint) -> Vec2 {
        match self {
            ReactionSpec::None => [0.0, 0.0],
            ReactionSpec::LotkaVolterra(lv) => lv.growth(u),
            ReactionSpec::Custom(c) => c.growth(u),
        }
    }

    /// Jacobian `∂f/∂u` of `f_i = u_i g_i(u)`.
    pub fn jacobian(&self, u: &StatePoint) -> Mat2 {
        let g = self.growth(u);
        let dg = match self {
            ReactionSpec::None => return Mat2::ZERO,
            ReactionSpec::LotkaVolterra(lv) => Mat2::new(-lv.b11, -lv.b12, -lv.b21, -lv.b22),
            ReactionSpec::Custom(c) => {
                let h = 1e-7;
                let mut d = [[0.0; 2]; 2];
                for k in 0..2 {
                    let mut up = *u;
                    let mut dn = *u;
                    if k == 0 {
                        up.u1 += h;
                        dn.u1 -= h;
                    } else {
                        up.u2 += h;
                        dn.u2 -= h;
                    }
                    up.u3 -= h;
                    dn.u3 += h;
                    let (gp, gm) = (c.growth(&up), c.growth(&dn));
                    for (i, row) in d.iter_mut().enumerate() {
                        row[k] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                Mat2(d)
            }
        };
        let uu = [u.u1, u.u2];
        let mut j = [[0.0; 2]; 2];
        for (i, row) in j.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = uu[i] * dg.get(i, k) + if i == k { g[i] } else { 0.0 };
            }
        }
        Mat2(j)
    }

    /// Whether the reaction satisfies its band condition (checked by
    /// [`lv_band`] or by sampling for custom terms).
    pub fn admissibility(&self) -> ConditionReport {
        match self {
            ReactionSpec::None => {
                let mut r = ConditionReport::new(Criterion::ReactionBand, 0.0);
                r.value = Some(1.0);
                r
            }
            ReactionSpec::LotkaVolterra(lv) => lv_band(lv).1,
            ReactionSpec::Custom(c) => verify_custom_band(c, 0x5eed),
        }
    }
}

/// `f(u) = (u1 g1(u), u2 g2(u))`.
pub fn eval_reaction(r: &ReactionSpec, u: &StatePoint) -> Vec2 {
    let g = r.growth(u);
    [u.u1 * g[0], u.u2 * g[1]]
}

/// Width `eps` of the band near `u1 + u2 = 1` on which the Lotka–Volterra
/// growth rates are nonpositive, `eps = min_i (1 - b_i0 / min(b_i1, b_i2))`.
pub fn lv_band(lv: &LotkaVolterra) -> (f64, ConditionReport) {
    let mut r = ConditionReport::new(Criterion::ReactionBand, 0.0);
    let mut eps = f64::INFINITY;
    for (i, [b0, b1, b2]) in lv.rows().into_iter().enumerate() {
        let cap = b1.min(b2);
        r.weak(&format!("b{}_slack", i + 1), cap - b0);
        let eps_i = if b0 == 0.0 {
            1.0
        } else if cap == 0.0 {
            r.passed = false;
            r.flag("infinite_growth");
            0.0
        } else {
            1.0 - b0 / cap
        };
        eps = eps.min(eps_i);
    }
    let eps = eps.max(0.0);
    if r.passed && eps == 0.0 {
        r.flag("degenerate");
    }
    r.value = Some(eps);
    (eps, r)
}

/// Sample the band `1 - eps < u1 + u2 < 1` and check `g_i <= 0` there.
pub fn verify_custom_band(c: &CustomReaction, seed: u64) -> ConditionReport {
    let mut r = ConditionReport::new(Criterion::ReactionBand, 0.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for _ in 0..BAND_SAMPLES {
        let gap = c.eps_band * rng.gen_range(f64::EPSILON..1.0);
        let theta: f64 = rng.gen();
        let u = StatePoint { u1: theta * (1.0 - gap), u2: (1.0 - theta) * (1.0 - gap), u3: gap };
        let g = c.growth(&u);
        let m = g[0].max(g[1]);
        if !m.is_finite() || m > worst {
            worst = if m.is_finite() { m } else { f64::INFINITY };
            witness = Some(u);
        }
    }
    r.weak("max_band_growth_negated", -worst);
    if !r.passed {
        r.witness = witness;
    }
    r.value = Some(c.eps_band);
    r
}

/// Distances to the capacity line `u1 + u2 = 1` used by [`h3_bound_scan`].
pub const EDGE_APPROACH: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
const EDGE_POSITIONS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// `f·Dh / (1 + h)`, extended continuously to the edges `u1 = 0` and
/// `u2 = 0` where `u_i g_i log u_i` vanishes.
fn h3_ratio(r: &ReactionSpec, u: &StatePoint) -> f64 {
    let f = eval_reaction(r, u);
    let term = |fi: f64, ui: f64| if ui == 0.0 { 0.0 } else { fi * (ui / u.u3).ln() };
    let h = entropy_density(u).expect("sample in the closed triangle");
    (term(f[0], u.u1) + term(f[1], u.u2)) / (1.0 + h.normalized)
}

/// Numerical estimate of the smallest `c_f` with `f·Dh <= c_f (1 + h)`.
///
/// The report's `value` is the estimate (`+∞` when growth without bound is
/// detected along an approach to `u1 + u2 = 1`).
pub fn h3_bound_scan(r: &ReactionSpec, n: usize) -> ConditionReport {
    let n = n.max(16);
    let mut rep = ConditionReport::new(Criterion::H3Bound, 0.0);
    let mut best = f64::NEG_INFINITY;
    let mut argmax = StatePoint::BARYCENTER;
    // The sup may sit on the edges u1 = 0 or u2 = 0, so they are sampled too;
    // only u3 = 0 is left to the approach paths.
    for i in 0..n {
        for j in 0..(n - i) {
            let k = n - i - j;
            let u = StatePoint { u1: i as f64 / n as f64, u2: j as f64 / n as f64, u3: k as f64 / n as f64 };
            let v = h3_ratio(r, &u);
            if v > best {
                best = v;
                argmax = u;
            }
        }
    }
    for &theta in &EDGE_POSITIONS {
        let path: Vec<(StatePoint, f64)> = EDGE_APPROACH
            .iter()
            .map(|&d| {
                let u = StatePoint { u1: theta * (1.0 - d), u2: (1.0 - theta) * (1.0 - d), u3: d };
                (u, h3_ratio(r, &u))
            })
            .collect();
        for &(u, v) in &path {
            if v > best {
                best = v;
                argmax = u;
            }
        }
        if diverges(&path.iter().map(|p| p.1).collect::<Vec<_>>()) {
            rep.passed = false;
            rep.flag("divergent");
            rep.witness = Some(path.last().unwrap().0);
            rep.value = Some(f64::INFINITY);
            rep.push("theta", theta);
            return rep;
        }
    }
    let c_f = best.max(0.0);
    rep.value = Some(c_f);
    rep.push("c_f", c_f);
    rep.push("argmax_u1", argmax.u1);
    rep.push("argmax_u2", argmax.u2);
    rep
}

/// A sequence sampled at geometrically shrinking distances diverges when its
/// last increments stay positive and do not contract.
fn diverges(values: &[f64]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return true;
    }
    let inc: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &inc[inc.len() - 3..];
    let scale = 1.0 + values.last().unwrap().abs();
    tail.iter().all(|&d| d > 1e-3 * scale) && tail.windows(2).all(|w| w[1] >= 0.5 * w[0])
}
