//! Method parameters and their optimizer search spaces.

use annealpath_core::bayesopt::SearchSpace;
use annealpath_core::schedules::{AnnealFunctions, AnnealPath, HGainPath, SchedulePlan, MAX_GAIN};
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{LabError, Result};

/// Scaling factor used before any tuning has happened.
pub const DEFAULT_ALPHA: f64 = 0.5;
/// Gain at `t = 0` of every HG schedule.
pub const HG_START_GAIN: f64 = MAX_GAIN;

/// Middle point of the three-point HG schedule; `t_mid` is a fraction of `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HgParams {
    pub t_mid: f64,
    pub g_mid: f64,
}

/// Reverse-anneal turning points as fractions of `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaParams {
    pub t_a: f64,
    pub t_b: f64,
    pub s_inv: f64,
}

impl HgParams {
    /// `(0, 5), (T/2, 2.5), (T, 0)`
    pub const FIXED: HgParams = HgParams {
        t_mid: 0.5,
        g_mid: 2.5,
    };
}

impl RaParams {
    /// `(0, 1), (T/4, 0.25), (3T/4, 0.25), (T, 1)`
    pub const FIXED: RaParams = RaParams {
        t_a: 0.25,
        t_b: 0.75,
        s_inv: 0.25,
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    pub method: Method,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub hgain: Option<HgParams>,
    pub reverse: Option<RaParams>,
}

impl MethodParams {
    /// The untuned equidistant schedules.
    pub fn fixed(method: Method, t: f64) -> Self {
        Self {
            method,
            t,
            alpha1: DEFAULT_ALPHA,
            alpha2: DEFAULT_ALPHA,
            hgain: method.uses_hgain().then_some(HgParams::FIXED),
            reverse: method.uses_reverse().then_some(RaParams::FIXED),
        }
    }

    pub fn with_duration(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn plan(&self, functions: &AnnealFunctions) -> Result<SchedulePlan> {
        let t = self.t;
        let anneal = match (self.method.uses_reverse(), self.reverse) {
            (true, Some(r)) => AnnealPath::reverse(t, r.t_a * t, r.t_b * t, r.s_inv)?,
            (true, None) => return Err(missing(self.method, "reverse")),
            (false, _) => AnnealPath::forward(t)?,
        };
        let hgain = match (self.method.uses_hgain(), self.hgain) {
            (true, Some(h)) => Some(HGainPath::three_point(t, h.t_mid, h.g_mid, HG_START_GAIN)?),
            (true, None) => return Err(missing(self.method, "hgain")),
            (false, _) => None,
        };
        Ok(SchedulePlan::new(anneal, hgain)?.with_functions(functions.clone()))
    }
}

fn missing(method: Method, what: &str) -> LabError {
    LabError::Config(format!("{method} parameters need a {what} schedule"))
}

const U_A: (f64, f64) = (0.01, 0.99);
const U_B: (f64, f64) = (0.0, 0.99);
const S_INV: (f64, f64) = (0.0, 0.99);
// slope from (0, 5) to (t_mid, g) and on to (1, 0) stays within 500 per unit T
const T_MID: (f64, f64) = (0.01, 0.99);
const G_MID: (f64, f64) = (0.0, MAX_GAIN);

/// Box over which a method's schedule is tuned.
///
/// Reverse schedules are searched as `(u_a, u_b, s_inv)` with
/// `t_a = u_a` and `t_b = t_a + (1 - t_a) u_b` (fractions of `T`), so every
/// point of the box satisfies `0 < t_a <= t_b < T`.
#[derive(Clone, Debug)]
pub struct ScheduleSpace {
    base: MethodParams,
    joint_alpha: bool,
    slack: bool,
    space: SearchSpace,
}

impl ScheduleSpace {
    pub fn new(
        base: &MethodParams,
        joint_alpha: bool,
        slack: bool,
        alpha_bounds: (f64, f64),
    ) -> Result<Self> {
        let method = base.method;
        let mut dims: Vec<(&str, f64, f64)> = Vec::new();
        if method.uses_reverse() {
            dims.extend([
                ("u_a", U_A.0, U_A.1),
                ("u_b", U_B.0, U_B.1),
                ("s_inv", S_INV.0, S_INV.1),
            ]);
        }
        if method.uses_hgain() {
            dims.extend([("t_mid", T_MID.0, T_MID.1), ("g_mid", G_MID.0, G_MID.1)]);
        }
        let joint_alpha = joint_alpha && method.uses_hgain();
        if joint_alpha {
            dims.push(("alpha1", alpha_bounds.0, alpha_bounds.1));
            if slack {
                dims.push(("alpha2", alpha_bounds.0, alpha_bounds.1));
            }
        }
        if dims.is_empty() {
            return Err(LabError::Config(format!(
                "{method} has no schedule parameters to tune"
            )));
        }
        Ok(Self {
            base: base.clone(),
            joint_alpha,
            slack,
            space: SearchSpace::new(dims)?,
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn decode(&self, p: &[f64]) -> MethodParams {
        let mut out = self.base.clone();
        let mut it = p.iter().copied();
        if out.method.uses_reverse() {
            let (u_a, u_b, s_inv) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            out.reverse = Some(RaParams {
                t_a: u_a,
                t_b: u_a + (1.0 - u_a) * u_b,
                s_inv,
            });
        }
        if out.method.uses_hgain() {
            let (t_mid, g_mid) = (it.next().unwrap(), it.next().unwrap());
            out.hgain = Some(HgParams { t_mid, g_mid });
        }
        if self.joint_alpha {
            out.alpha1 = it.next().unwrap();
            if self.slack {
                out.alpha2 = it.next().unwrap();
            }
        }
        out
    }

    /// Inverse of [`decode`](Self::decode), clamped into the box.
    pub fn encode(&self, params: &MethodParams) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.space.len());
        if self.base.method.uses_reverse() {
            let r = params.reverse.unwrap_or(RaParams::FIXED);
            let u_b = if r.t_a < 1.0 {
                (r.t_b - r.t_a) / (1.0 - r.t_a)
            } else {
                0.0
            };
            p.extend([r.t_a, u_b, r.s_inv]);
        }
        if self.base.method.uses_hgain() {
            let h = params.hgain.unwrap_or(HgParams::FIXED);
            p.extend([h.t_mid, h.g_mid]);
        }
        if self.joint_alpha {
            p.push(params.alpha1);
            if self.slack {
                p.push(params.alpha2);
            }
        }
        self.space.clamp(&mut p);
        p
    }
}
