//! Gaussian-process Bayesian optimization over bounded boxes.
//!
//! The surrogate is a zero-mean GP with an anisotropic RBF kernel on
//! standardized targets. Kernel hyperparameters maximize the log marginal
//! likelihood by multi-start compass search in log space. The optimizer
//! maximizes the fitness: `init_points` exploratory evaluations, then
//! `n_iter` evaluations at the maximizer of an acquisition function.

use std::fmt::Display;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitness value substituted for failed evaluations.
pub const SENTINEL: f64 = -1000.0;
/// UCB exploration weight used by default.
pub const DEFAULT_KAPPA: f64 = 2.576;
const JITTER_LADDER: [f64; 6] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    dims: Vec<Dim>,
}

impl SearchSpace {
    pub fn new(dims: Vec<(&str, f64, f64)>) -> Result<Self> {
        let mut out: Vec<Dim> = Vec::with_capacity(dims.len());
        for (name, lower, upper) in dims {
            if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                return Err(Error::InvalidParameter(format!(
                    "dimension {name}: need lower < upper, got [{lower}, {upper}]"
                )));
            }
            if out.iter().any(|d| d.name == name) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate dimension {name}"
                )));
            }
            out.push(Dim {
                name: name.to_string(),
                lower,
                upper,
            });
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter(
                "search space has no dimensions".into(),
            ));
        }
        Ok(Self { dims: out })
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dims.len()
            && p.iter()
                .zip(&self.dims)
                .all(|(&x, d)| x >= d.lower && x <= d.upper)
    }

    pub fn clamp(&self, p: &mut [f64]) {
        for (x, d) in p.iter_mut().zip(&self.dims) {
            *x = x.clamp(d.lower, d.upper);
        }
    }

    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.dims
            .iter()
            .map(|d| rng.gen_range(d.lower..=d.upper))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Kernel hyperparameters in standardized target units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpHyper {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
}

#[derive(Clone, Debug)]
pub struct GpFitOptions {
    /// Previous hyperparameters; when set, the likelihood search is a
    /// single local polish from here.
    pub warm_start: Option<GpHyper>,
    /// Skip the likelihood search and use these hyperparameters.
    pub fixed: Option<GpHyper>,
    pub max_evals_per_start: usize,
}

impl Default for GpFitOptions {
    fn default() -> Self {
        Self {
            warm_start: None,
            fixed: None,
            max_evals_per_start: 120,
        }
    }
}

/// A fitted GP regression model.
#[derive(Clone, Debug)]
pub struct GpModel {
    hyper: GpHyper,
    noise: f64,
    jitter: f64,
    xs: Vec<Vec<f64>>,
    y_mean: f64,
    y_scale: f64,
    y_max: f64,
    /// Lower Cholesky factor of `K + (noise + jitter) I`, row-major.
    chol: Vec<f64>,
    /// `(K + (noise + jitter) I)^-1 y_std`.
    weights: Vec<f64>,
    log_likelihood: f64,
}

impl GpModel {
    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Diagonal jitter added on top of the noise to factorize.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `(mean, scale)` used to standardize targets.
    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }

    pub fn training_points(&self) -> &[Vec<f64>] {
        &self.xs
    }

    /// Largest observed target.
    pub fn best_observed(&self) -> f64 {
        self.y_max
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        rbf(&self.hyper, a, b)
    }
}

fn rbf(h: &GpHyper, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&h.length_scales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    h.signal_variance * (-0.5 * r2).exp()
}

/// In-place lower Cholesky of a row-major `m x m` matrix.
fn cholesky(a: &mut [f64], m: usize) -> bool {
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !d.is_finite() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
        for k in j + 1..m {
            a[j * m + k] = 0.0;
        }
    }
    true
}

fn forward_sub(l: &[f64], m: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..m {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * m + k] * x[k];
        }
        x[i] = s / l[i * m + i];
    }
    x
}

fn backward_sub_t(l: &[f64], m: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..m).rev() {
        let mut s = x[i];
        for k in i + 1..m {
            s -= l[k * m + i] * x[k];
        }
        x[i] = s / l[i * m + i];
    }
    x
}

struct Factorized {
    chol: Vec<f64>,
    weights: Vec<f64>,
    jitter: f64,
    log_likelihood: f64,
}

fn factorize(xs: &[Vec<f64>], ys: &[f64], hyper: &GpHyper, noise: f64) -> Option<Factorized> {
    let m = xs.len();
    let mut base = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let k = rbf(hyper, &xs[i], &xs[j]);
            base[i * m + j] = k;
            base[j * m + i] = k;
        }
    }
    for &jitter in &JITTER_LADDER {
        let mut a = base.clone();
        for i in 0..m {
            a[i * m + i] += noise + jitter;
        }
        if cholesky(&mut a, m) {
            let z = forward_sub(&a, m, ys);
            let weights = backward_sub_t(&a, m, &z);
            let log_det: f64 = (0..m).map(|i| a[i * m + i].ln()).sum();
            let fit: f64 = ys.iter().zip(&weights).map(|(y, w)| y * w).sum();
            let log_likelihood =
                -0.5 * fit - log_det - 0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln();
            return Some(Factorized {
                chol: a,
                weights,
                jitter,
                log_likelihood,
            });
        }
    }
    None
}

pub fn gp_fit(obs: &[Observation], noise: f64) -> Result<GpModel> {
    gp_fit_with(obs, noise, &GpFitOptions::default())
}

/// Fits a GP to `obs`. `noise` is added to the kernel diagonal in
/// standardized target units.
pub fn gp_fit_with(obs: &[Observation], noise: f64, opts: &GpFitOptions) -> Result<GpModel> {
    if obs.is_empty() {
        return Err(Error::InvalidParameter(
            "gp_fit needs at least one observation".into(),
        ));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    let d = obs[0].point.len();
    if obs.iter().any(|o| o.point.len() != d) {
        return Err(Error::InvalidParameter(
            "observations have mixed dimensions".into(),
        ));
    }
    if obs
        .iter()
        .any(|o| !o.value.is_finite() || o.point.iter().any(|x| !x.is_finite()))
    {
        return Err(Error::InvalidParameter("non-finite observation".into()));
    }
    let xs: Vec<Vec<f64>> = obs.iter().map(|o| o.point.clone()).collect();
    let raw: Vec<f64> = obs.iter().map(|o| o.value).collect();
    let m = raw.len() as f64;
    let y_mean = raw.iter().sum::<f64>() / m;
    let sd = (raw.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / m).sqrt();
    let y_scale = if sd > 1e-12 { sd } else { 1.0 };
    let ys: Vec<f64> = raw.iter().map(|y| (y - y_mean) / y_scale).collect();
    let y_max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let spans: Vec<f64> = (0..d)
        .map(|k| {
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x[k]), hi.max(x[k]))
                });
            if hi - lo > 1e-12 {
                hi - lo
            } else {
                1.0
            }
        })
        .collect();

    let hyper = match &opts.fixed {
        Some(h) => h.clone(),
        None => search_hyper(&xs, &ys, noise, &spans, opts),
    };
    let f = factorize(&xs, &ys, &hyper, noise).ok_or(Error::SingularKernel {
        jitter: *JITTER_LADDER.last().unwrap(),
    })?;
    if f.jitter > 0.0 {
        debug!("kernel factorized with jitter {:e}", f.jitter);
    }
    Ok(GpModel {
        hyper,
        noise,
        jitter: f.jitter,
        xs,
        y_mean,
        y_scale,
        y_max,
        chol: f.chol,
        weights: f.weights,
        log_likelihood: f.log_likelihood,
    })
}

/// Compass search over `(log l_1..log l_d, log sigma^2)`.
fn search_hyper(
    xs: &[Vec<f64>],
    ys: &[f64],
    noise: f64,
    spans: &[f64],
    opts: &GpFitOptions,
) -> GpHyper {
    let d = spans.len();
    let lower: Vec<f64> = spans
        .iter()
        .map(|s| (1e-2 * s).ln())
        .chain(std::iter::once(1e-2f64.ln()))
        .collect();
    let upper: Vec<f64> = spans
        .iter()
        .map(|s| (1e2 * s).ln())
        .chain(std::iter::once(1e2f64.ln()))
        .collect();
    let to_hyper = |theta: &[f64]| GpHyper {
        length_scales: theta[..d].iter().map(|v| v.exp()).collect(),
        signal_variance: theta[d].exp(),
    };
    let objective = |theta: &[f64]| {
        factorize(xs, ys, &to_hyper(theta), noise).map_or(f64::NEG_INFINITY, |f| f.log_likelihood)
    };

    // a warm start from the previous fit only needs a local polish
    let warm = opts
        .warm_start
        .as_ref()
        .filter(|w| w.length_scales.len() == d);
    let (starts, first_step, min_step): (Vec<Vec<f64>>, f64, f64) = match warm {
        Some(w) => (
            vec![w
                .length_scales
                .iter()
                .map(|l| l.ln())
                .chain(std::iter::once(w.signal_variance.ln()))
                .collect()],
            0.5,
            1e-2,
        ),
        None => (
            [0.1, 0.3, 1.0]
                .iter()
                .map(|frac| {
                    spans
                        .iter()
                        .map(|s| (frac * s).ln())
                        .chain(std::iter::once(0.0))
                        .collect()
                })
                .collect(),
            1.0,
            1e-3,
        ),
    };

    let mut best = (f64::NEG_INFINITY, starts[0].clone());
    for mut theta in starts {
        for (k, v) in theta.iter_mut().enumerate() {
            *v = v.clamp(lower[k], upper[k]);
        }
        let mut value = objective(&theta);
        let mut step = first_step;
        let mut evals = 1;
        while step > min_step && evals < opts.max_evals_per_start {
            let mut improved = false;
            for k in 0..=d {
                for dir in [1.0, -1.0] {
                    let mut trial = theta.clone();
                    trial[k] = (trial[k] + dir * step).clamp(lower[k], upper[k]);
                    if trial[k] == theta[k] {
                        continue;
                    }
                    let v = objective(&trial);
                    evals += 1;
                    if v > value {
                        theta = trial;
                        value = v;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if value > best.0 {
            best = (value, theta);
        }
    }
    to_hyper(&best.1)
}

/// Posterior mean and variance of the latent function at `point`, in
/// original target units.
pub fn gp_predict(model: &GpModel, point: &[f64]) -> (f64, f64) {
    let m = model.xs.len();
    let kstar: Vec<f64> = model
        .xs
        .iter()
        .map(|x| rbf(&model.hyper, point, x))
        .collect();
    let mean_std: f64 = kstar.iter().zip(&model.weights).map(|(k, w)| k * w).sum();
    let v = forward_sub(&model.chol, m, &kstar);
    let mut var_std = model.hyper.signal_variance - v.iter().map(|x| x * x).sum::<f64>();
    if var_std < 0.0 {
        if var_std < -1e-8 * model.hyper.signal_variance {
            debug!("clamped negative posterior variance {var_std:e}");
        }
        var_std = 0.0;
    }
    (
        model.y_mean + model.y_scale * mean_std,
        model.y_scale * model.y_scale * var_std,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acquisition {
    /// `mean + kappa * stddev`
    Ucb { kappa: f64 },
    /// Expected improvement over the best observation, offset by `xi`.
    Ei { xi: f64 },
}

impl Default for Acquisition {
    fn default() -> Self {
        Acquisition::Ucb {
            kappa: DEFAULT_KAPPA,
        }
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn acquisition(model: &GpModel, point: &[f64], kind: Acquisition) -> f64 {
    let (mean, var) = gp_predict(model, point);
    let sd = var.sqrt();
    match kind {
        Acquisition::Ucb { kappa } => mean + kappa * sd,
        Acquisition::Ei { xi } => {
            let gain = mean - model.y_max - xi;
            if sd <= 0.0 {
                return gain.max(0.0);
            }
            let z = gain / sd;
            gain * normal_cdf(z) + sd * normal_pdf(z)
        }
    }
}

/// Settings for [`suggest_next`].
#[derive(Clone, Copy, Debug)]
pub struct SuggestOptions {
    pub random_starts: usize,
    /// Best random candidates that get coordinate refinement.
    pub refine: usize,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        Self {
            random_starts: 1000,
            refine: 5,
        }
    }
}

/// Maximizes the acquisition by random search followed by coordinate-wise
/// pattern refinement of the best candidates.
pub fn suggest_next<R: Rng>(
    model: &GpModel,
    space: &SearchSpace,
    acq: Acquisition,
    rng: &mut R,
) -> Vec<f64> {
    suggest_next_with(model, space, acq, rng, SuggestOptions::default())
}

pub fn suggest_next_with<R: Rng>(
    model: &GpModel,
    space: &SearchSpace,
    acq: Acquisition,
    rng: &mut R,
    opts: SuggestOptions,
) -> Vec<f64> {
    let mut cands: Vec<(f64, Vec<f64>)> = (0..opts.random_starts.max(1))
        .map(|_| {
            let p = space.sample_uniform(rng);
            (acquisition(model, &p, acq), p)
        })
        .collect();
    // stable sort keeps first-found order among ties
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    cands.truncate(opts.refine.max(1));

    let mut best: Option<(f64, Vec<f64>)> = None;
    for (mut value, mut p) in cands {
        let widths: Vec<f64> = space.dims().iter().map(|d| d.upper - d.lower).collect();
        let mut frac = 0.1;
        while frac > 1e-4 {
            let mut improved = false;
            for k in 0..p.len() {
                for dir in [1.0, -1.0] {
                    let mut q = p.clone();
                    q[k] += dir * frac * widths[k];
                    space.clamp(&mut q);
                    if q[k] == p[k] {
                        continue;
                    }
                    let v = acquisition(model, &q, acq);
                    if v > value {
                        value = v;
                        p = q;
                        improved = true;
                    }
                }
            }
            if !improved {
                frac *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, p));
        }
    }
    best.map(|b| b.1)
        .unwrap_or_else(|| space.sample_uniform(rng))
}

#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub init_points: usize,
    pub n_iter: usize,
    pub noise: f64,
    pub seed: u64,
    pub acquisition: Acquisition,
    pub suggest: SuggestOptions,
    /// Points evaluated first, as part of the `init_points` budget.
    pub probes: Vec<Vec<f64>>,
    /// Grid resolution per axis for the surrogate snapshot of 1-D/2-D spaces.
    pub grid_resolution: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            init_points: 100,
            n_iter: 200,
            noise: 0.01,
            seed: 0,
            acquisition: Acquisition::default(),
            suggest: SuggestOptions::default(),
            probes: Vec::new(),
            grid_resolution: 50,
        }
    }
}

/// Surrogate mean and variance on a regular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateGrid {
    pub names: Vec<String>,
    pub resolution: usize,
    pub cells: Vec<GridCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub point: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl SurrogateGrid {
    /// Evaluates `model` on a `resolution^d` grid spanning `space` (d <= 2).
    pub fn evaluate(model: &GpModel, space: &SearchSpace, resolution: usize) -> Option<Self> {
        let d = space.len();
        if d > 2 || resolution < 2 {
            return None;
        }
        let axis = |k: usize| -> Vec<f64> {
            let dim = &space.dims()[k];
            (0..resolution)
                .map(|i| dim.lower + (dim.upper - dim.lower) * i as f64 / (resolution - 1) as f64)
                .collect()
        };
        let points: Vec<Vec<f64>> = if d == 1 {
            axis(0).into_iter().map(|x| vec![x]).collect()
        } else {
            let (ax, ay) = (axis(0), axis(1));
            ay.iter()
                .flat_map(|&y| ax.iter().map(move |&x| vec![x, y]))
                .collect()
        };
        let cells = points
            .into_iter()
            .map(|point| {
                let (mean, variance) = gp_predict(model, &point);
                GridCell {
                    point,
                    mean,
                    variance,
                }
            })
            .collect();
        Some(Self {
            names: space.dims().iter().map(|d| d.name.clone()).collect(),
            resolution,
            cells,
        })
    }

    /// CSV with one column per axis followed by `mean,variance`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.names.clone();
        header.extend(["mean".to_string(), "variance".to_string()]);
        w.write_record(&header)?;
        for c in &self.cells {
            let mut row: Vec<String> = c.point.iter().map(|x| x.to_string()).collect();
            row.push(c.mean.to_string());
            row.push(c.variance.to_string());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptResult {
    pub names: Vec<String>,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub history: Vec<Observation>,
    pub surrogate: Option<SurrogateGrid>,
    #[serde(skip)]
    pub model: Option<GpModel>,
}

impl OptResult {
    /// Best value seen after each evaluation.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.history
            .iter()
            .scan(f64::NEG_INFINITY, |best, o| {
                *best = best.max(o.value);
                Some(*best)
            })
            .collect()
    }
}

/// Maximizes `fitness` over `space`. Failed or non-finite evaluations are
/// recorded as [`SENTINEL`]. Exactly `init_points + n_iter` evaluations are
/// made.
pub fn optimize<F, E>(
    mut fitness: F,
    space: &SearchSpace,
    opts: &OptimizeOptions,
) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> std::result::Result<f64, E>,
    E: Display,
{
    if opts.init_points == 0 {
        return Err(Error::InvalidParameter("init_points must be >= 1".into()));
    }
    if opts.probes.len() > opts.init_points {
        return Err(Error::InvalidParameter(format!(
            "{} probes exceed init_points = {}",
            opts.probes.len(),
            opts.init_points
        )));
    }
    if let Some(p) = opts.probes.iter().find(|p| !space.contains(p)) {
        return Err(Error::InvalidParameter(format!(
            "probe {p:?} is outside the search space"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut history: Vec<Observation> = Vec::with_capacity(opts.init_points + opts.n_iter);
    let mut evaluate = |p: Vec<f64>, history: &mut Vec<Observation>| {
        let value = match fitness(&p) {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                warn!("fitness returned {v} at {p:?}; recording sentinel");
                SENTINEL
            }
            Err(e) => {
                warn!("fitness failed at {p:?}: {e}; recording sentinel");
                SENTINEL
            }
        };
        history.push(Observation { point: p, value });
    };

    for p in &opts.probes {
        evaluate(p.clone(), &mut history);
    }
    while history.len() < opts.init_points {
        let p = space.sample_uniform(&mut rng);
        evaluate(p, &mut history);
    }

    let mut fit_opts = GpFitOptions::default();
    let mut model: Option<GpModel> = None;
    for _ in 0..opts.n_iter {
        let next = match gp_fit_with(&history, opts.noise, &fit_opts) {
            Ok(m) => {
                fit_opts.warm_start = Some(m.hyper.clone());
                let p = suggest_next_with(&m, space, opts.acquisition, &mut rng, opts.suggest);
                model = Some(m);
                p
            }
            Err(e) => {
                warn!("surrogate fit failed ({e}); falling back to a random point");
                space.sample_uniform(&mut rng)
            }
        };
        evaluate(next, &mut history);
    }
    let final_model = match gp_fit_with(&history, opts.noise, &fit_opts) {
        Ok(m) => Some(m),
        Err(e) => {
            warn!("final surrogate fit failed: {e}");
            model
        }
    };

    let (best_idx, _) = history
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, o)| {
            if o.value > acc.1 {
                (i, o.value)
            } else {
                acc
            }
        });
    let surrogate = final_model
        .as_ref()
        .and_then(|m| SurrogateGrid::evaluate(m, space, opts.grid_resolution));
    Ok(OptResult {
        names: space.dims().iter().map(|d| d.name.clone()).collect(),
        best_point: history[best_idx].point.clone(),
        best_value: history[best_idx].value,
        history,
        surrogate,
        model: final_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(point: Vec<f64>, value: f64) -> Observation {
        Observation { point, value }
    }

    #[test]
    fn single_observation() {
        let m = gp_fit(&[obs(vec![0.5], 2.0)], 1e-4).unwrap();
        let (mean, var) = gp_predict(&m, &[0.5]);
        assert!((mean - 2.0).abs() < 1e-12);
        assert!((var - 1e-4).abs() < 5e-6, "var = {var}");
    }

    #[test]
    fn duplicate_points_with_noise() {
        let m = gp_fit(&[obs(vec![0.2], 1.0), obs(vec![0.2], 3.0)], 0.1).unwrap();
        let (mean, _) = gp_predict(&m, &[0.2]);
        assert!(mean > 1.0 && mean < 3.0);
    }

    #[test]
    fn prior_recovered_far_away() {
        let data = vec![
            obs(vec![0.0], 1.0),
            obs(vec![0.3], -0.5),
            obs(vec![0.6], 0.4),
            obs(vec![1.0], 0.1),
        ];
        let m = gp_fit(&data, 1e-6).unwrap();
        let far = 1.0 + 1e3 * m.hyper().length_scales[0];
        let (mean, var) = gp_predict(&m, &[far]);
        let (y_mean, y_scale) = m.standardization();
        assert!((mean - y_mean).abs() < 1e-9);
        assert!((var - m.hyper().signal_variance * y_scale * y_scale).abs() < 1e-9);
    }

    #[test]
    fn smooth_function_regression() {
        let f = |x: f64| (3.0 * x).sin() + 0.5 * x;
        let data: Vec<Observation> = (0..20)
            .map(|i| i as f64 / 19.0 * 2.0)
            .map(|x| obs(vec![x], f(x)))
            .collect();
        let m = gp_fit(&data, 1e-6).unwrap();
        for k in 0..19 {
            let x = (k as f64 + 0.5) / 19.0 * 2.0;
            assert!((gp_predict(&m, &[x]).0 - f(x)).abs() < 1e-2);
        }
    }

    #[test]
    fn ucb_with_zero_kappa_is_mean() {
        let m = gp_fit(&[obs(vec![0.1], 1.0), obs(vec![0.9], 2.0)], 1e-3).unwrap();
        let p = [0.4];
        assert_eq!(
            acquisition(&m, &p, Acquisition::Ucb { kappa: 0.0 }),
            gp_predict(&m, &p).0
        );
    }

    #[test]
    fn ei_zero_at_noiseless_incumbent() {
        let m = gp_fit(&[obs(vec![0.1], 1.0), obs(vec![0.9], 2.0)], 0.0).unwrap();
        let ei = acquisition(&m, &[0.9], Acquisition::Ei { xi: 0.0 });
        assert!(ei.abs() < 1e-6, "ei = {ei}");
    }

    #[test]
    fn variance_seeking_suggestion() {
        let m = gp_fit(&[obs(vec![0.5, 0.5], 1.0)], 1e-4).unwrap();
        let space = SearchSpace::new(vec![("x", 0.0, 10.0), ("y", 0.0, 10.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = suggest_next(&m, &space, Acquisition::Ucb { kappa: 100.0 }, &mut rng);
        let dist = ((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt();
        let ell = m.hyper().length_scales.iter().cloned().fold(0.0, f64::max);
        assert!(dist > ell, "dist {dist} vs length scale {ell}");
        let mut rng2 = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            p,
            suggest_next(&m, &space, Acquisition::Ucb { kappa: 100.0 }, &mut rng2)
        );
    }

    #[test]
    fn space_validation() {
        assert!(SearchSpace::new(vec![("x", 1.0, 1.0)]).is_err());
        assert!(SearchSpace::new(vec![("x", 0.0, 1.0), ("x", 0.0, 2.0)]).is_err());
    }

    #[test]
    fn tiny_budget() {
        let space = SearchSpace::new(vec![("x", 0.0, 1.0)]).unwrap();
        let r = optimize(
            |x: &[f64]| Ok::<f64, String>(x[0]),
            &space,
            &OptimizeOptions {
                init_points: 1,
                n_iter: 0,
                ..OptimizeOptions::default()
            },
        )
        .unwrap();
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best_point, r.history[0].point);
    }

    #[test]
    fn failing_fitness_gives_sentinel() {
        let space = SearchSpace::new(vec![("x", 0.0, 1.0)]).unwrap();
        let r = optimize(
            |_: &[f64]| Err::<f64, _>("boom"),
            &space,
            &OptimizeOptions {
                init_points: 3,
                n_iter: 3,
                ..OptimizeOptions::default()
            },
        )
        .unwrap();
        assert_eq!(r.history.len(), 6);
        assert!(r.history.iter().all(|o| o.value == SENTINEL));
        assert_eq!(r.best_value, SENTINEL);
    }
}
