//! Annealing simulation.
//!
//! The statevector backend integrates `i dψ/dt = H(t) ψ` (ħ = 1) for
//!
//! ```text
//! H(t) = -A(s)/2 Σ_i σx_i + B(s)/2 (g Σ_i h_i σz_i + Σ_{i<j} J_ij σz_i σz_j)
//! ```
//!
//! with `s = s(t)` and `g = g(t)` taken from a [`SchedulePlan`]. The
//! Hamiltonian is applied matrix-free: transverse terms are bit flips and the
//! problem part is a precomputed diagonal. The model offset only contributes a
//! global phase and is left out.
//!
//! Basis index `k` encodes a spin configuration with bit `i` set iff
//! `x_i = -1`, so index 0 is all spins up.
//!
//! The classical backend runs single-spin-flip Metropolis chains with
//! inverse temperature following `B(s)/A(s)`.

use std::fmt;

use log::{debug, warn};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, SpinConfig};
use crate::samples::{SampleMeta, SampleRecord, SampleSet};
use crate::schedules::{AnnealFunctions, SchedulePlan};

/// Largest qubit count for dense diagonalization diagnostics.
pub const DENSE_LIMIT: usize = 10;
/// Target `dt * ‖H‖` for automatic step selection.
const STEP_PHASE: f64 = 0.05;
/// Inverse-temperature clamp for the classical backend.
pub const BETA_RANGE: (f64, f64) = (1e-3, 1e3);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Equal superposition, the ground state of `-Σ σx`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            n,
            amps: vec![a; dim],
        }
    }

    /// Computational basis state of a spin configuration.
    pub fn basis(config: &SpinConfig) -> Result<Self> {
        if config.domain() != Domain::Ising {
            return Err(Error::Domain {
                expected: Domain::Ising,
                got: config.domain(),
            });
        }
        let n = config.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[config.to_index() as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability of measuring `config`.
    pub fn probability(&self, config: &SpinConfig) -> f64 {
        self.amps[config.to_index() as usize].norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Diagonal data of an Ising model over the full basis.
#[derive(Clone, Debug)]
pub struct IsingHamiltonian {
    n: usize,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
    linear_abs: f64,
    quadratic_abs: f64,
}

impl IsingHamiltonian {
    pub fn new(model: &IsingModel, limit: usize) -> Result<Self> {
        let n = model.n();
        if n > limit {
            return Err(Error::TooLarge {
                what: "statevector simulation",
                n,
                limit,
            });
        }
        let dim = 1usize << n;
        let mut linear = vec![0.0; dim];
        let mut quadratic = vec![0.0; dim];
        let spin = |k: usize, i: usize| if k >> i & 1 == 1 { -1.0 } else { 1.0 };
        for k in 0..dim {
            linear[k] = model.linear().iter().map(|(&i, &h)| h * spin(k, i)).sum();
            quadratic[k] = model
                .quadratic()
                .iter()
                .map(|(&(i, j), &v)| v * spin(k, i) * spin(k, j))
                .sum();
        }
        Ok(Self {
            n,
            linear,
            quadratic,
            linear_abs: model.linear().values().map(|v| v.abs()).sum(),
            quadratic_abs: model.quadratic().values().map(|v| v.abs()).sum(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn diag(&self, b: f64, g: f64, k: usize) -> f64 {
        0.5 * b * (g * self.linear[k] + self.quadratic[k])
    }

    /// `out = H psi` for transverse weight `a = A(s)`, problem weight
    /// `b = B(s)` and linear gain `g`.
    pub fn apply(&self, a: f64, b: f64, g: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let half_a = 0.5 * a;
        for (k, o) in out.iter_mut().enumerate() {
            let mut flip = Complex64::new(0.0, 0.0);
            for i in 0..self.n {
                flip += psi[k ^ (1 << i)];
            }
            *o = psi[k] * self.diag(b, g, k) - flip * half_a;
        }
    }

    /// Upper bound on `‖H‖` at the given weights.
    pub fn norm_bound(&self, a: f64, b: f64, g: f64) -> f64 {
        0.5 * a.abs() * self.n as f64
            + 0.5 * b.abs() * (g.abs() * self.linear_abs + self.quadratic_abs)
    }

    /// Dense real-symmetric matrix of `H`.
    pub fn dense(&self, a: f64, b: f64, g: f64) -> DMatrix<f64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = self.diag(b, g, k);
            for i in 0..self.n {
                m[(k, k ^ (1 << i))] -= 0.5 * a;
            }
        }
        m
    }
}

/// `H(s, g) psi` with `A`, `B` from `functions`.
pub fn apply_hamiltonian(
    model: &IsingModel,
    functions: &AnnealFunctions,
    s: f64,
    g: f64,
    psi: &StateVector,
) -> Result<StateVector> {
    if psi.n != model.n() {
        return Err(Error::Dimension {
            expected: model.n(),
            got: psi.n,
        });
    }
    let h = IsingHamiltonian::new(model, psi.n)?;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
    h.apply(functions.a(s), functions.b(s), g, &psi.amps, &mut out);
    Ok(StateVector {
        n: psi.n,
        amps: out,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta with renormalization after each step.
    #[default]
    Rk4,
    /// Symmetric (Strang) splitting of transverse and diagonal parts; unitary
    /// by construction.
    SplitStep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Statevector,
    Classical,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Statevector => f.write_str("statevector"),
            Backend::Classical => f.write_str("classical"),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statevector" => Ok(Backend::Statevector),
            "classical" => Ok(Backend::Classical),
            other => Err(Error::InvalidParameter(format!(
                "unknown backend {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Integrator step; `None` picks one from a bound on `‖H‖`.
    pub dt: Option<f64>,
    pub integrator: Integrator,
    pub shots: usize,
    pub seed: u64,
    pub backend: Backend,
    pub statevector_limit: usize,
    /// Metropolis sweeps per chain for the classical backend.
    pub classical_sweeps: usize,
    /// Accumulated pre-renormalization norm error that aborts evolution.
    pub max_drift: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: None,
            integrator: Integrator::Rk4,
            shots: 1000,
            seed: 0,
            backend: Backend::Statevector,
            statevector_limit: 16,
            classical_sweeps: 1000,
            max_drift: 1e-4,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.dt, Some(dt) if !(dt > 0.0 && dt.is_finite())) {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidParameter("shots must be >= 1".into()));
        }
        Ok(())
    }
}

/// Numerical bookkeeping from one evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionReport {
    pub steps: usize,
    pub dt: f64,
    /// Sum over steps of `|‖ψ‖ - 1|` before renormalization.
    pub total_drift: f64,
    pub max_step_drift: f64,
}

/// Initial state for `plan`: uniform superposition for forward plans, the
/// basis state of `x0` for plans starting at `s > 0`.
pub fn init_state(plan: &SchedulePlan, n: usize, x0: Option<&SpinConfig>) -> Result<StateVector> {
    if plan.is_reverse() {
        let x0 = x0.ok_or_else(|| {
            Error::InvalidParameter("reverse anneal requires an initial configuration".into())
        })?;
        if x0.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x0.len(),
            });
        }
        StateVector::basis(x0)
    } else {
        Ok(StateVector::uniform(n))
    }
}

fn auto_dt(plan: &SchedulePlan, ham: &IsingHamiltonian) -> f64 {
    let f = &plan.functions;
    let g_max = plan.hgain.as_ref().map_or(1.0, |h| h.max_abs());
    let bound = ham.norm_bound(f.max_a(), f.max_b(), g_max).max(1e-12);
    let duration = plan.duration();
    (STEP_PHASE / bound).min(duration / 100.0)
}

fn weights(plan: &SchedulePlan, t: f64) -> Result<(f64, f64, f64)> {
    let (s, g) = plan.at(t.min(plan.duration()))?;
    Ok((plan.functions.a(s), plan.functions.b(s), g))
}

pub fn evolve(
    psi: &StateVector,
    plan: &SchedulePlan,
    model: &IsingModel,
    cfg: &SimConfig,
) -> Result<StateVector> {
    evolve_with_report(psi, plan, model, cfg).map(|(s, _)| s)
}

/// Integrates the Schrödinger equation from `t = 0` to `T`.
pub fn evolve_with_report(
    psi: &StateVector,
    plan: &SchedulePlan,
    model: &IsingModel,
    cfg: &SimConfig,
) -> Result<(StateVector, EvolutionReport)> {
    cfg.validate()?;
    if psi.n != model.n() {
        return Err(Error::Dimension {
            expected: model.n(),
            got: psi.n,
        });
    }
    let ham = IsingHamiltonian::new(model, cfg.statevector_limit)?;
    let duration = plan.duration();
    let target = cfg.dt.unwrap_or_else(|| auto_dt(plan, &ham));
    let steps = (duration / target).ceil().max(1.0) as usize;
    let h = duration / steps as f64;

    let dim = psi.amps.len();
    let mut state = psi.amps.clone();
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut tmp = vec![zero; dim];
    let minus_i = Complex64::new(0.0, -1.0);

    let mut total_drift = 0.0;
    let mut max_step_drift: f64 = 0.0;
    for step in 0..steps {
        let t = step as f64 * h;
        match cfg.integrator {
            Integrator::Rk4 => {
                let w0 = weights(plan, t)?;
                let wm = weights(plan, t + 0.5 * h)?;
                let w1 = weights(plan, t + h)?;
                ham.apply(w0.0, w0.1, w0.2, &state, &mut k1);
                for (o, (s, k)) in tmp.iter_mut().zip(state.iter().zip(&k1)) {
                    *o = s + minus_i * k * (0.5 * h);
                }
                ham.apply(wm.0, wm.1, wm.2, &tmp, &mut k2);
                for (o, (s, k)) in tmp.iter_mut().zip(state.iter().zip(&k2)) {
                    *o = s + minus_i * k * (0.5 * h);
                }
                ham.apply(wm.0, wm.1, wm.2, &tmp, &mut k3);
                for (o, (s, k)) in tmp.iter_mut().zip(state.iter().zip(&k3)) {
                    *o = s + minus_i * k * h;
                }
                ham.apply(w1.0, w1.1, w1.2, &tmp, &mut k4);
                let c = minus_i * (h / 6.0);
                for i in 0..dim {
                    state[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            Integrator::SplitStep => {
                let (a, b, g) = weights(plan, t + 0.5 * h)?;
                half_diagonal(&ham, b, g, h, &mut state);
                let theta = 0.5 * a * h;
                let (c, s) = (theta.cos(), theta.sin());
                let is = Complex64::new(0.0, s);
                for q in 0..ham.n {
                    let bit = 1usize << q;
                    for k in 0..dim {
                        if k & bit == 0 {
                            let (x, y) = (state[k], state[k | bit]);
                            state[k] = x * c + y * is;
                            state[k | bit] = y * c + x * is;
                        }
                    }
                }
                half_diagonal(&ham, b, g, h, &mut state);
            }
        }
        let norm = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - 1.0).abs();
        total_drift += drift;
        max_step_drift = max_step_drift.max(drift);
        if total_drift.is_nan() || total_drift > cfg.max_drift {
            return Err(Error::Simulation(format!(
                "norm drift {total_drift:e} exceeds {:e} at t = {t} (dt = {h:e}); reduce dt",
                cfg.max_drift
            )));
        }
        state.iter_mut().for_each(|a| *a /= norm);
    }
    debug!("evolved {steps} steps of {h:e}, accumulated norm drift {total_drift:e}");
    Ok((
        StateVector {
            n: psi.n,
            amps: state,
        },
        EvolutionReport {
            steps,
            dt: h,
            total_drift,
            max_step_drift,
        },
    ))
}

fn half_diagonal(ham: &IsingHamiltonian, b: f64, g: f64, h: f64, state: &mut [Complex64]) {
    for (k, a) in state.iter_mut().enumerate() {
        let phase = -0.5 * h * ham.diag(b, g, k);
        *a *= Complex64::from_polar(1.0, phase);
    }
}

/// Draws `shots` computational-basis measurements of `psi` and evaluates
/// their energies on `model`.
pub fn sample(psi: &StateVector, shots: usize, seed: u64, model: &IsingModel) -> Result<SampleSet> {
    if psi.n != model.n() {
        return Err(Error::Dimension {
            expected: model.n(),
            got: psi.n,
        });
    }
    let mut cumulative = Vec::with_capacity(psi.amps.len());
    let mut acc = 0.0;
    for a in &psi.amps {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; psi.amps.len()];
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let k = cumulative
            .partition_point(|&c| c <= u)
            .min(counts.len() - 1);
        counts[k] += 1;
    }
    let records = counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(k, count)| {
            let config = SpinConfig::from_index(Domain::Ising, psi.n, k as u64);
            let energy = model.energy_of(config.values());
            SampleRecord {
                config,
                count,
                energy,
            }
        })
        .collect();
    Ok(SampleSet::from_records(
        records,
        SampleMeta {
            plan_digest: None,
            seed,
            backend: Backend::Statevector.to_string(),
            discarded: 0,
        },
    ))
}

/// Runs a batch of anneals of `model` along `plan` on the configured backend.
///
/// Each anneal starts from the same prepared state, so the statevector
/// backend evolves once and samples `shots` times from the final state.
pub fn anneal(
    model: &IsingModel,
    plan: &SchedulePlan,
    x0: Option<&SpinConfig>,
    cfg: &SimConfig,
) -> Result<SampleSet> {
    cfg.validate()?;
    if !plan.reinitialize {
        return Err(Error::InvalidParameter(
            "reinitialize = false is not supported: state reuse between anneals has no unitary equivalent".into(),
        ));
    }
    match cfg.backend {
        Backend::Classical => classical_anneal(model, plan, x0, cfg),
        Backend::Statevector => {
            let psi = init_state(plan, model.n(), x0)?;
            let final_state = evolve(&psi, plan, model, cfg)?;
            let mut set = sample(&final_state, cfg.shots, cfg.seed, model)?;
            set.meta.plan_digest = Some(plan.digest());
            Ok(set)
        }
    }
}

/// `B(s)/A(s)` clamped to [`BETA_RANGE`].
pub fn classical_beta(functions: &AnnealFunctions, s: f64) -> f64 {
    let (a, b) = (functions.a(s), functions.b(s));
    let beta = if a <= 0.0 { f64::INFINITY } else { b / a };
    beta.clamp(BETA_RANGE.0, BETA_RANGE.1)
}

/// Metropolis single-spin-flip annealing, one independent chain per shot.
///
/// Chain `c` uses ChaCha stream `c` of `cfg.seed`. Sweep `k` runs at
/// `t = T (k + 1/2) / sweeps` with inverse temperature `B(s)/A(s)` and the
/// linear terms scaled by `g(t)`.
pub fn classical_anneal(
    model: &IsingModel,
    plan: &SchedulePlan,
    x0: Option<&SpinConfig>,
    cfg: &SimConfig,
) -> Result<SampleSet> {
    cfg.validate()?;
    let n = model.n();
    if let Some(x) = x0 {
        if x.len() != n || x.domain() != Domain::Ising {
            return Err(Error::Dimension {
                expected: n,
                got: x.len(),
            });
        }
    }
    let sweeps = cfg.classical_sweeps.max(1);
    let duration = plan.duration();
    let mut schedule = Vec::with_capacity(sweeps);
    for k in 0..sweeps {
        let t = duration * (k as f64 + 0.5) / sweeps as f64;
        let (s, g) = plan.at(t)?;
        schedule.push((classical_beta(&plan.functions, s), g));
    }
    let h: Vec<f64> = (0..n).map(|i| model.linear_coeff(i)).collect();
    let adj = model.neighbors();

    let mut records = Vec::with_capacity(cfg.shots);
    for chain in 0..cfg.shots {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chain as u64);
        let mut x: Vec<i8> = match x0 {
            Some(c) => c.values().to_vec(),
            None => (0..n)
                .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                .collect(),
        };
        for &(beta, g) in &schedule {
            for i in 0..n {
                let field = g * h[i]
                    + adj[i]
                        .iter()
                        .map(|&(j, v)| v * f64::from(x[j]))
                        .sum::<f64>();
                let delta = -2.0 * f64::from(x[i]) * field;
                if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                    x[i] = -x[i];
                }
            }
        }
        let energy = model.energy_of(&x);
        records.push(SampleRecord {
            config: SpinConfig::new(Domain::Ising, x)?,
            count: 1,
            energy,
        });
    }
    Ok(SampleSet::from_records(
        records,
        SampleMeta {
            plan_digest: Some(plan.digest()),
            seed: cfg.seed,
            backend: Backend::Classical.to_string(),
            discarded: 0,
        },
    ))
}

/// Ground energy, first gap and ground-space basis of `H(s, g)`.
pub struct Spectrum {
    pub ground_energy: f64,
    /// Distance from the ground eigenspace to the next level.
    pub gap: f64,
    pub degeneracy: usize,
    pub ground_space: Vec<Vec<f64>>,
}

/// Dense diagonalization of `H(s, g)`; ground levels within `1e-9 * ‖H‖`
/// of the minimum are grouped into one eigenspace.
pub fn spectrum(
    model: &IsingModel,
    functions: &AnnealFunctions,
    s: f64,
    g: f64,
) -> Result<Spectrum> {
    let ham = IsingHamiltonian::new(model, DENSE_LIMIT)?;
    let (a, b) = (functions.a(s), functions.b(s));
    let dense = ham.dense(a, b, g);
    let eig = SymmetricEigen::new(dense);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let e0 = eig.eigenvalues[order[0]];
    let tol = 1e-9 * ham.norm_bound(a, b, g).max(1.0);
    let ground: Vec<usize> = order
        .iter()
        .copied()
        .take_while(|&i| eig.eigenvalues[i] <= e0 + tol)
        .collect();
    let gap = order
        .get(ground.len())
        .map_or(f64::INFINITY, |&i| eig.eigenvalues[i] - e0);
    let ground_space = ground
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok(Spectrum {
        ground_energy: e0,
        gap,
        degeneracy: ground.len(),
        ground_space,
    })
}

/// Squared overlap of `psi` with the ground space of `H(s(t), g(t))`.
pub fn ground_state_overlap(
    model: &IsingModel,
    plan: &SchedulePlan,
    t: f64,
    psi: &StateVector,
) -> Result<f64> {
    if psi.n != model.n() {
        return Err(Error::Dimension {
            expected: model.n(),
            got: psi.n,
        });
    }
    let (s, g) = plan.at(t)?;
    let spec = spectrum(model, &plan.functions, s, g)?;
    Ok(spec
        .ground_space
        .iter()
        .map(|v| {
            v.iter()
                .zip(&psi.amps)
                .map(|(&c, a)| a * c)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum())
}

/// Smallest gap of `H(s)` along a forward anneal, sampled on `points` values
/// of `s` in `[0, 1]`.
pub fn min_forward_gap(
    model: &IsingModel,
    functions: &AnnealFunctions,
    points: usize,
) -> Result<f64> {
    let mut min_gap = f64::INFINITY;
    for k in 0..=points {
        let s = k as f64 / points as f64;
        let spec = spectrum(model, functions, s, 1.0)?;
        let gap = if spec.degeneracy > 1 { 0.0 } else { spec.gap };
        min_gap = min_gap.min(gap);
    }
    if min_gap < 1e-6 {
        warn!("forward path has a vanishing gap ({min_gap:e})");
    }
    Ok(min_gap)
}
