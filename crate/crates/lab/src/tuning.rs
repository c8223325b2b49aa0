//! Scaling-factor scans and schedule optimization.

use std::cell::Cell;

use annealpath_core::bayesopt::{optimize, OptResult};
use annealpath_core::schedules::AnnealFunctions;
use log::info;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiment::{fitness, PreparedInstance};
use crate::params::{MethodParams, ScheduleSpace};

/// Number of `alpha1` values in a scaling scan.
pub const SCALING_GRID_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub alpha1: f64,
    pub mean_improvement: f64,
}

/// `alpha1 = k / 100` for `k = 1..=100`.
pub fn scaling_grid() -> Vec<f64> {
    (1..=SCALING_GRID_POINTS)
        .map(|k| k as f64 / SCALING_GRID_POINTS as f64)
        .collect()
}

/// Fitness of `params` on `set` at every grid value of `alpha1`, with the
/// schedule and `alpha2` held fixed.
pub fn tune_scaling_grid(
    set: &[PreparedInstance],
    params: &MethodParams,
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
) -> Result<Vec<ScalingRow>> {
    if !params.method.uses_hgain() {
        return Err(LabError::Config(format!(
            "scaling factors only apply to HG schedules, not {}",
            params.method
        )));
    }
    scaling_grid()
        .into_iter()
        .map(|alpha1| {
            let p = MethodParams {
                alpha1,
                ..params.clone()
            };
            let r = fitness(&p, set, cfg, functions)?;
            Ok(ScalingRow {
                alpha1,
                mean_improvement: r.value,
            })
        })
        .collect()
}

/// Row with the largest improvement; the first one wins ties.
pub fn best_scaling(rows: &[ScalingRow]) -> Option<ScalingRow> {
    rows.iter()
        .copied()
        .fold(None, |best: Option<ScalingRow>, r| match best {
            Some(b) if b.mean_improvement >= r.mean_improvement => Some(b),
            _ => Some(r),
        })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub params: MethodParams,
    /// Fitness of the starting parameters, evaluated as the first probe.
    pub start_value: f64,
    pub fitness_calls: usize,
    pub result: OptResult,
}

/// Bayesian optimization of `base.method`'s schedule on `set`. The starting
/// parameters are the first probe, so the result is never worse than `base`
/// on this set.
pub fn tune_schedules(
    base: &MethodParams,
    set: &[PreparedInstance],
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
    seed: u64,
) -> Result<TuneOutcome> {
    let slack = set.first().is_some_and(|p| p.model.has_linear());
    let space = ScheduleSpace::new(base, cfg.joint_alpha, slack, cfg.alpha_bounds)?;
    let probe = space.encode(base);
    let calls = Cell::new(0usize);
    let opts = cfg.bayes.options(seed, vec![probe]);
    let result = optimize(
        |p: &[f64]| {
            calls.set(calls.get() + 1);
            let params = space.decode(p);
            fitness(&params, set, cfg, functions).map(|r| r.value)
        },
        space.space(),
        &opts,
    )?;
    let params = space.decode(&result.best_point);
    info!(
        "{}: best fitness {:.6} at {:?} after {} calls",
        base.method,
        result.best_value,
        result.best_point,
        calls.get()
    );
    Ok(TuneOutcome {
        params,
        start_value: result.history[0].value,
        fitness_calls: calls.get(),
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_hundred_exact_steps() {
        let g = scaling_grid();
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[34], 0.35);
        assert_eq!(g[99], 1.0);
    }

    #[test]
    fn best_scaling_prefers_first_maximum() {
        let rows = [
            ScalingRow {
                alpha1: 0.1,
                mean_improvement: 1.0,
            },
            ScalingRow {
                alpha1: 0.2,
                mean_improvement: 2.0,
            },
            ScalingRow {
                alpha1: 0.3,
                mean_improvement: 2.0,
            },
        ];
        assert_eq!(best_scaling(&rows).unwrap().alpha1, 0.2);
        assert!(best_scaling(&[]).is_none());
    }
}
