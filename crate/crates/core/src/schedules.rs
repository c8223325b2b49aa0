//! Anneal paths `s(t)`, h-gain paths `g(t)` and the anneal functions
//! `A(s)`, `B(s)` that weight the transverse and problem Hamiltonians.
//!
//! Paths are polylines over `[0, T]` evaluated by linear interpolation.
//! Time is dimensionless; only ratios `t / T` matter for slope rules.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest h-gain magnitude.
pub const MAX_GAIN: f64 = 5.0;
/// Largest number of points on an h-gain path.
pub const MAX_HGAIN_POINTS: usize = 20;
/// Largest `|Δg / Δ(t/T)|` between consecutive h-gain points.
pub const MAX_HGAIN_SLOPE: f64 = 500.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Too few points, or a non-finite coordinate.
    Malformed,
    /// First point not at `t = 0`.
    Start,
    /// Times not strictly increasing.
    TimeOrder,
    /// Value outside the allowed range.
    Range,
    PointCount,
    Slope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending point index (range) or segment index `k` for `[k, k+1]`.
    pub index: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{:?} at {}: {}", self.kind, i, self.detail),
            None => write!(f, "{:?}: {}", self.kind, self.detail),
        }
    }
}

fn violation(kind: ViolationKind, index: Option<usize>, detail: impl Into<String>) -> Violation {
    Violation {
        kind,
        index,
        detail: detail.into(),
    }
}

/// Checks shared by every polyline: enough finite points, starting at zero,
/// strictly increasing in time, values in `range`.
fn polyline_violations(points: &[(f64, f64)], range: (f64, f64)) -> Vec<Violation> {
    let mut out = Vec::new();
    if points.len() < 2 {
        out.push(violation(
            ViolationKind::Malformed,
            None,
            format!("need at least 2 points, got {}", points.len()),
        ));
        return out;
    }
    if let Some(i) = points
        .iter()
        .position(|(t, v)| !t.is_finite() || !v.is_finite())
    {
        out.push(violation(
            ViolationKind::Malformed,
            Some(i),
            "non-finite coordinate",
        ));
        return out;
    }
    if points[0].0 != 0.0 {
        out.push(violation(
            ViolationKind::Start,
            Some(0),
            format!("path starts at t = {}", points[0].0),
        ));
    }
    for (k, w) in points.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            out.push(violation(
                ViolationKind::TimeOrder,
                Some(k),
                format!("t = {} does not exceed t = {}", w[1].0, w[0].0),
            ));
        }
    }
    for (i, &(_, v)) in points.iter().enumerate() {
        if v < range.0 || v > range.1 {
            out.push(violation(
                ViolationKind::Range,
                Some(i),
                format!("value {v} outside [{}, {}]", range.0, range.1),
            ));
        }
    }
    out
}

fn eval_polyline(points: &[(f64, f64)], t: f64) -> Result<f64> {
    let duration = points.last().map_or(0.0, |p| p.0);
    if !(0.0..=duration).contains(&t) {
        return Err(Error::TimeOutOfRange { t, duration });
    }
    let k = points.partition_point(|p| p.0 <= t);
    // k >= 1 because points[0].0 == 0 <= t
    let (t0, v0) = points[k - 1];
    if t == t0 || k == points.len() {
        return Ok(v0);
    }
    let (t1, v1) = points[k];
    Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
}

/// Anneal fraction `s(t)` as a polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnealPath {
    points: Vec<(f64, f64)>,
}

impl AnnealPath {
    /// Validated path.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let p = Self { points };
        let v = p.validate();
        if v.is_empty() {
            Ok(p)
        } else {
            Err(Error::Schedule(v))
        }
    }

    /// Unvalidated path; see [`AnnealPath::validate`].
    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    /// `s(t) = t / T`.
    pub fn forward(duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "anneal time must be > 0, got {duration}"
            )));
        }
        Self::new(vec![(0.0, 0.0), (duration, 1.0)])
    }

    /// Reverse anneal from `s = 1` down to `s_inv` at `t_a`, paused until
    /// `t_b`, then forward to `s = 1` at `T`. The pause point is merged when
    /// `t_a == t_b`.
    pub fn reverse(duration: f64, t_a: f64, t_b: f64, s_inv: f64) -> Result<Self> {
        if !(0.0 < t_a && t_a <= t_b && t_b < duration) {
            return Err(Error::InvalidParameter(format!(
                "reverse anneal needs 0 < t_a <= t_b < T, got t_a = {t_a}, t_b = {t_b}, T = {duration}"
            )));
        }
        if !(0.0..1.0).contains(&s_inv) {
            return Err(Error::InvalidParameter(format!(
                "s_inv must be in [0, 1), got {s_inv}"
            )));
        }
        let mut points = vec![(0.0, 1.0), (t_a, s_inv)];
        if t_b > t_a {
            points.push((t_b, s_inv));
        }
        points.push((duration, 1.0));
        Self::new(points)
    }

    /// `s(t) = s` for the whole duration.
    pub fn constant(duration: f64, s: f64) -> Result<Self> {
        Self::new(vec![(0.0, s), (duration, s)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn duration(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.0)
    }

    pub fn validate(&self) -> Vec<Violation> {
        polyline_violations(&self.points, (0.0, 1.0))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        eval_polyline(&self.points, t)
    }

    /// Paths that start away from `s = 0` begin in a classical state and
    /// need an initial configuration.
    pub fn is_reverse(&self) -> bool {
        self.points.first().is_some_and(|p| p.1 > 0.0)
    }

    /// Largest `|Δs / Δt|` over segments.
    pub fn max_slope(&self) -> f64 {
        max_slope(&self.points)
    }

    /// Same shape over `c * T`.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            points: self.points.iter().map(|&(t, s)| (t * c, s)).collect(),
        }
    }
}

fn max_slope(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max)
}

/// Limits applied to h-gain paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HGainRules {
    pub max_abs_gain: f64,
    pub max_points: usize,
    /// Bound on `|Δg| / Δ(t/T)`.
    pub max_slope: f64,
}

impl Default for HGainRules {
    fn default() -> Self {
        Self {
            max_abs_gain: MAX_GAIN,
            max_points: MAX_HGAIN_POINTS,
            max_slope: MAX_HGAIN_SLOPE,
        }
    }
}

/// Time-dependent gain `g(t)` on the linear terms. Need not be monotone.
#[derive(Clone, Debug, PartialEq)]
pub struct HGainPath {
    points: Vec<(f64, f64)>,
}

impl HGainPath {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let p = Self { points };
        let v = p.validate();
        if v.is_empty() {
            Ok(p)
        } else {
            Err(Error::Schedule(v))
        }
    }

    pub fn from_points(points: Vec<(f64, f64)>) -> Self {
        Self { points }
    }

    /// Three-point path `(0, g0) -> (t_mid * T, g_mid) -> (T, 0)`.
    pub fn three_point(duration: f64, t_mid: f64, g_mid: f64, g0: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "anneal time must be > 0, got {duration}"
            )));
        }
        if !(t_mid > 0.0 && t_mid < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "t_mid must be in (0, 1), got {t_mid}"
            )));
        }
        for (name, g) in [("g_mid", g_mid), ("g0", g0)] {
            if !(0.0..=MAX_GAIN).contains(&g) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in [0, 5], got {g}"
                )));
            }
        }
        Self::new(vec![(0.0, g0), (t_mid * duration, g_mid), (duration, 0.0)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn duration(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.0)
    }

    pub fn validate(&self) -> Vec<Violation> {
        self.validate_with(&HGainRules::default())
    }

    pub fn validate_with(&self, rules: &HGainRules) -> Vec<Violation> {
        let mut out = polyline_violations(&self.points, (-rules.max_abs_gain, rules.max_abs_gain));
        if self.points.len() > rules.max_points {
            out.push(violation(
                ViolationKind::PointCount,
                None,
                format!(
                    "{} points exceeds the limit of {}",
                    self.points.len(),
                    rules.max_points
                ),
            ));
        }
        let duration = self.duration();
        if duration > 0.0 && !out.iter().any(|v| v.kind == ViolationKind::Malformed) {
            for (k, w) in self.points.windows(2).enumerate() {
                let dt = (w[1].0 - w[0].0) / duration;
                if dt <= 0.0 {
                    continue;
                }
                let slope = (w[1].1 - w[0].1).abs() / dt;
                if slope > rules.max_slope {
                    out.push(violation(
                        ViolationKind::Slope,
                        Some(k),
                        format!("slope {slope} exceeds {}", rules.max_slope),
                    ));
                }
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        eval_polyline(&self.points, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.points.iter().map(|p| p.1.abs()).fold(0.0, f64::max)
    }

    pub fn max_slope(&self) -> f64 {
        max_slope(&self.points)
    }

    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            points: self.points.iter().map(|&(t, g)| (t * c, g)).collect(),
        }
    }
}

/// `A(s)` and `B(s)` tabulated on a grid over `[0, 1]`, linearly
/// interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnealFunctions {
    s: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Default for AnnealFunctions {
    /// `A(s) = 1 - s`, `B(s) = s`.
    fn default() -> Self {
        Self::linear(1.0, 1.0)
    }
}

impl AnnealFunctions {
    pub fn linear(a_max: f64, b_max: f64) -> Self {
        Self {
            s: vec![0.0, 1.0],
            a: vec![a_max, 0.0],
            b: vec![0.0, b_max],
        }
    }

    pub fn from_table(s: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::AnnealFunctions(m));
        if s.len() < 2 || a.len() != s.len() || b.len() != s.len() {
            return bad(format!(
                "need >= 2 rows of equal length, got {}/{}/{}",
                s.len(),
                a.len(),
                b.len()
            ));
        }
        if s.iter().chain(&a).chain(&b).any(|v| !v.is_finite()) {
            return bad("non-finite entry".into());
        }
        if s[0] != 0.0 || *s.last().unwrap() != 1.0 {
            return bad(format!(
                "grid must cover [0, 1], got [{}, {}]",
                s[0],
                s.last().unwrap()
            ));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return bad("s grid is not strictly increasing".into());
        }
        if a.windows(2).any(|w| w[1] > w[0]) || a.iter().any(|&v| v < 0.0) {
            return bad("A(s) must be non-increasing and non-negative".into());
        }
        if b.windows(2).any(|w| w[1] < w[0]) || b[0] < 0.0 {
            return bad("B(s) must be non-decreasing with B(0) >= 0".into());
        }
        Ok(Self { s, a, b })
    }

    /// Reads CSV with header `s,A,B`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().map(str::trim).collect();
        if names != ["s", "A", "B"] {
            return Err(Error::AnnealFunctions(format!(
                "expected header s,A,B, got {}",
                names.join(",")
            )));
        }
        let (mut s, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for row in rdr.deserialize::<(f64, f64, f64)>() {
            let (x, y, z) = row?;
            s.push(x);
            a.push(y);
            b.push(z);
        }
        Self::from_table(s, a, b)
    }

    /// Loads a CSV file, or the linear default when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_csv(std::fs::File::open(p)?),
            None => Ok(Self::default()),
        }
    }

    pub fn a(&self, s: f64) -> f64 {
        interp(&self.s, &self.a, s)
    }

    pub fn b(&self, s: f64) -> f64 {
        interp(&self.s, &self.b, s)
    }

    pub fn max_a(&self) -> f64 {
        self.a.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_b(&self) -> f64 {
        self.b.iter().cloned().fold(0.0, f64::max)
    }

    /// Both curves scaled to a maximum of 1.
    pub fn normalized(&self) -> Self {
        let scale = |v: &[f64]| {
            let m = v.iter().cloned().fold(0.0, f64::max);
            if m > 0.0 {
                v.iter().map(|x| x / m).collect()
            } else {
                v.to_vec()
            }
        };
        Self {
            s: self.s.clone(),
            a: scale(&self.a),
            b: scale(&self.b),
        }
    }

    pub fn grid(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.s, &self.a, &self.b)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let k = xs.partition_point(|&v| v <= x);
    if k == 0 {
        return ys[0];
    }
    let (x0, y0) = (xs[k - 1], ys[k - 1]);
    if x == x0 || k == xs.len() {
        return y0;
    }
    let (x1, y1) = (xs[k], ys[k]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// An anneal path, an optional h-gain path over the same duration, and the
/// anneal functions they drive.
#[derive(Clone, Debug, PartialEq)]
pub struct SchedulePlan {
    pub anneal: AnnealPath,
    pub hgain: Option<HGainPath>,
    pub functions: AnnealFunctions,
    pub reinitialize: bool,
}

impl SchedulePlan {
    pub fn new(anneal: AnnealPath, hgain: Option<HGainPath>) -> Result<Self> {
        let plan = Self {
            anneal,
            hgain,
            functions: AnnealFunctions::default(),
            reinitialize: true,
        };
        plan.check()?;
        Ok(plan)
    }

    pub fn forward(duration: f64) -> Result<Self> {
        Self::new(AnnealPath::forward(duration)?, None)
    }

    pub fn with_functions(mut self, functions: AnnealFunctions) -> Self {
        self.functions = functions;
        self
    }

    fn check(&self) -> Result<()> {
        let mut v = self.anneal.validate();
        if let Some(h) = &self.hgain {
            v.extend(h.validate());
            let (ta, th) = (self.anneal.duration(), h.duration());
            if (ta - th).abs() > 1e-12 * ta.abs().max(1.0) {
                v.push(violation(
                    ViolationKind::Malformed,
                    None,
                    format!("anneal path ends at {ta} but h-gain path ends at {th}"),
                ));
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Schedule(v))
        }
    }

    pub fn duration(&self) -> f64 {
        self.anneal.duration()
    }

    pub fn is_reverse(&self) -> bool {
        self.anneal.is_reverse()
    }

    /// Anneal fraction and linear gain at `t`. Without an h-gain path the
    /// gain is 1.
    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        let s = self.anneal.eval(t)?;
        let g = match &self.hgain {
            Some(h) => h.eval(t.min(h.duration()))?,
            None => 1.0,
        };
        Ok((s, g))
    }

    /// Same plan over `c * T`.
    pub fn rescaled(&self, c: f64) -> Self {
        Self {
            anneal: self.anneal.rescaled(c),
            hgain: self.hgain.as_ref().map(|h| h.rescaled(c)),
            functions: self.functions.clone(),
            reinitialize: self.reinitialize,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PlanJson {
            duration: self.duration(),
            anneal: self.anneal.points.clone(),
            hgain: self.hgain.as_ref().map(|h| h.points.clone()),
            reinitialize: self.reinitialize,
        })?)
    }

    /// Parses schedule JSON; anneal functions take the default.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PlanJson = serde_json::from_str(s)?;
        let plan = Self {
            anneal: AnnealPath::from_points(raw.anneal),
            hgain: raw.hgain.map(HGainPath::from_points),
            functions: AnnealFunctions::default(),
            reinitialize: raw.reinitialize,
        };
        plan.check()?;
        if (plan.duration() - raw.duration).abs() > 1e-12 * raw.duration.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "T = {} does not match the path end {}",
                raw.duration,
                plan.duration()
            )));
        }
        Ok(plan)
    }

    /// SHA-256 of the schedule JSON.
    pub fn digest(&self) -> String {
        let json = self.to_json().unwrap_or_default();
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct PlanJson {
    #[serde(rename = "T")]
    duration: f64,
    anneal: Vec<(f64, f64)>,
    hgain: Option<Vec<(f64, f64)>>,
    reinitialize: bool,
}

/// Gain actually applied to the linear biases: `B(s(t)) * g(t) / 2`.
/// With `normalized`, `B` is scaled to a maximum of 1 first.
pub fn effective_gain(plan: &SchedulePlan, t: f64, normalized: bool) -> Result<f64> {
    let h = plan
        .hgain
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("plan has no h-gain path".into()))?;
    let s = plan.anneal.eval(t)?;
    let g = h.eval(t)?;
    let b = if normalized {
        plan.functions.normalized().b(s)
    } else {
        plan.functions.b(s)
    };
    Ok(b * g / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
        v.iter().map(|x| x.kind).collect()
    }

    #[test]
    fn forward_ramp() {
        let p = AnnealPath::forward(1.0).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), 0.5);
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        assert_eq!(p.eval(1.0).unwrap(), 1.0);
        assert_eq!(
            AnnealPath::forward(2000.0).unwrap().eval(500.0).unwrap(),
            0.25
        );
        assert!(AnnealPath::forward(0.0).is_err());
    }

    #[test]
    fn reverse_fixed_shape() {
        let t = 2000.0;
        let p = AnnealPath::reverse(t, 0.25 * t, 0.75 * t, 0.25).unwrap();
        assert_eq!(
            p.points(),
            &[(0.0, 1.0), (500.0, 0.25), (1500.0, 0.25), (2000.0, 1.0)]
        );
        assert_eq!(p.eval(1000.0).unwrap(), 0.25);
        let merged = AnnealPath::reverse(1.0, 0.5, 0.5, 0.3).unwrap();
        assert_eq!(merged.points().len(), 3);
        assert!(AnnealPath::reverse(1.0, 0.6, 0.5, 0.3).is_err());
        assert!(AnnealPath::reverse(1.0, 0.2, 1.0, 0.3).is_err());
        assert!(AnnealPath::reverse(1.0, 0.2, 0.5, 1.0).is_err());
    }

    #[test]
    fn reverse_near_one_stays_high() {
        let p = AnnealPath::reverse(1.0, 0.25, 0.75, 1.0 - 1e-9).unwrap();
        for k in 0..=100 {
            assert!(p.eval(k as f64 / 100.0).unwrap() > 1.0 - 1e-8);
        }
    }

    #[test]
    fn interpolation_values() {
        let p = AnnealPath::reverse(1.0, 0.25, 0.75, 0.25).unwrap();
        assert_eq!(p.eval(0.125).unwrap(), 0.625);
        let h = HGainPath::three_point(1.0, 0.5, 2.5, 5.0).unwrap();
        assert_eq!(h.eval(0.75).unwrap(), 1.25);
        assert_eq!(h.eval(0.5).unwrap(), 2.5);
        assert!(p.eval(1.5).is_err());
        assert!(p.eval(-0.1).is_err());
    }

    #[test]
    fn hgain_shapes() {
        let h = HGainPath::three_point(1.0, 0.5, 2.5, 5.0).unwrap();
        assert_eq!(h.points(), &[(0.0, 5.0), (0.5, 2.5), (1.0, 0.0)]);
        let h = HGainPath::three_point(1.0, 0.71, 2.67, 5.0).unwrap();
        assert_eq!(h.points()[1], (0.71, 2.67));
        let z = HGainPath::three_point(3.0, 0.4, 0.0, 0.0).unwrap();
        assert!((0..=30).all(|k| z.eval(k as f64 / 10.0).unwrap() == 0.0));
        assert!(HGainPath::three_point(1.0, 0.5, 5.5, 5.0).is_err());
        assert!(HGainPath::three_point(1.0, 1.0, 2.0, 5.0).is_err());
        // 5 -> 0 over 0.005 of the anneal: slope 1000
        assert!(HGainPath::three_point(1.0, 0.005, 0.0, 5.0).is_err());
    }

    #[test]
    fn violation_classes() {
        let pts: Vec<(f64, f64)> = (0..21).map(|k| (k as f64, 0.0)).collect();
        assert_eq!(
            kinds(&HGainPath::from_points(pts).validate()),
            vec![ViolationKind::PointCount]
        );
        let steep = HGainPath::from_points(vec![(0.0, 0.0), (0.001, 5.0), (1.0, 0.0)]);
        let v = steep.validate();
        assert_eq!(kinds(&v), vec![ViolationKind::Slope]);
        assert_eq!(v[0].index, Some(0));
        let neg = HGainPath::from_points(vec![(0.0, 0.0), (0.5, -3.0), (1.0, 0.0)]);
        assert!(neg.validate().is_empty());
        let high = HGainPath::from_points(vec![(0.0, 0.0), (0.5, 6.0), (1.0, 0.0)]);
        assert_eq!(kinds(&high.validate()), vec![ViolationKind::Range]);
        let order = AnnealPath::from_points(vec![(0.0, 0.0), (0.5, 0.2), (0.5, 0.3), (1.0, 1.0)]);
        assert_eq!(kinds(&order.validate()), vec![ViolationKind::TimeOrder]);
        let start = AnnealPath::from_points(vec![(0.1, 0.0), (1.0, 1.0)]);
        assert_eq!(kinds(&start.validate()), vec![ViolationKind::Start]);
    }

    #[test]
    fn anneal_function_defaults_and_table() {
        let f = AnnealFunctions::default();
        assert_eq!(f.a(0.3), 0.7);
        assert_eq!(f.b(0.3), 0.3);
        let csv = "s,A,B\n0,4,0.1\n0.5,1,2\n1,0,6\n";
        let t = AnnealFunctions::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.a(0.5), 1.0);
        assert_eq!(t.b(0.5), 2.0);
        // between grid points: 2 + (6 - 2) * (0.75 - 0.5) / 0.5
        assert_eq!(t.b(0.75), 4.0);
        assert_eq!(t.a(0.25), 2.5);
        assert_eq!(t.normalized().b(1.0), 1.0);
    }

    #[test]
    fn anneal_function_validation() {
        assert!(AnnealFunctions::from_csv(
            "s,A,B\n0,1,0\n0.6,0.5,0.2\n0.5,0.2,0.4\n1,0,1\n".as_bytes()
        )
        .is_err());
        assert!(AnnealFunctions::from_csv("s,A,B\n0,1,0\n0.9,0,1\n".as_bytes()).is_err());
        assert!(AnnealFunctions::from_csv("x,A,B\n0,1,0\n1,0,1\n".as_bytes()).is_err());
        assert!(
            AnnealFunctions::from_table(vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]).is_err()
        );
    }

    #[test]
    fn effective_gain_cases() {
        let plan = SchedulePlan::new(
            AnnealPath::forward(1.0).unwrap(),
            Some(HGainPath::three_point(1.0, 0.5, 0.0, 0.0).unwrap()),
        )
        .unwrap();
        assert_eq!(effective_gain(&plan, 0.3, true).unwrap(), 0.0);

        let plan = SchedulePlan::new(
            AnnealPath::constant(1.0, 1.0).unwrap(),
            Some(HGainPath::from_points(vec![(0.0, 5.0), (1.0, 0.0)])),
        )
        .unwrap();
        assert_eq!(effective_gain(&plan, 0.0, true).unwrap(), 2.5);
        assert!(effective_gain(&SchedulePlan::forward(1.0).unwrap(), 0.5, true).is_err());
    }

    #[test]
    fn plan_json_roundtrip() {
        let plan = SchedulePlan::new(
            AnnealPath::reverse(10.0, 2.5, 7.5, 0.25).unwrap(),
            Some(HGainPath::three_point(10.0, 0.5, 2.5, 5.0).unwrap()),
        )
        .unwrap();
        let j = plan.to_json().unwrap();
        let back = SchedulePlan::from_json(&j).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.to_json().unwrap(), j);
        assert_eq!(back.digest(), plan.digest());
        assert!(SchedulePlan::from_json(
            r#"{"T":1.0,"anneal":[[0,0],[1,1]],"hgain":[[0,1],[2,0]],"reinitialize":true}"#
        )
        .is_err());
    }
}
