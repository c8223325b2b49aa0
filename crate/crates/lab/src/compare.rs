//! Method comparison on fresh validation graphs.

use annealpath_core::schedules::AnnealFunctions;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, Role};
use crate::error::Result;
use crate::experiment::{fitness, prepare_set, PreparedInstance};
use crate::params::MethodParams;
use crate::registry::ParamRegistry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowMeta {
    pub instances: usize,
    pub excluded: Vec<usize>,
    pub sentinel: bool,
    /// Mean fraction of `z = +1` shots over the evaluated instances.
    pub z_plus_fraction: f64,
    pub params: MethodParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    #[serde(rename = "T")]
    pub t: f64,
    pub density: f64,
    pub mean_improvement: f64,
    pub per_instance: Vec<f64>,
    pub meta: RowMeta,
}

/// One row per (method, duration) on an already prepared set.
pub fn compare_on_set(
    methods: &[Method],
    t_candidates: &[f64],
    density: f64,
    set: &[PreparedInstance],
    registry: &ParamRegistry,
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::with_capacity(methods.len() * t_candidates.len());
    for &method in methods {
        for &t in t_candidates {
            let params = registry
                .params_or_fixed(cfg.problem, density, method, t)
                .with_duration(t);
            let r = fitness(&params, set, cfg, functions)?;
            let z = if r.z_plus_fraction.is_empty() {
                0.0
            } else {
                r.z_plus_fraction.iter().sum::<f64>() / r.z_plus_fraction.len() as f64
            };
            rows.push(ResultRow {
                method,
                t,
                density,
                mean_improvement: r.value,
                meta: RowMeta {
                    instances: set.len(),
                    excluded: r.excluded,
                    sentinel: r.sentinel,
                    z_plus_fraction: z,
                    params,
                },
                per_instance: r.per_instance,
            });
        }
    }
    Ok(rows)
}

/// Evaluates every method at every duration and density on the validation
/// graphs. Rows are sorted by method, then density, then duration.
pub fn run_comparison(
    methods: &[Method],
    t_candidates: &[f64],
    densities: &[f64],
    registry: &ParamRegistry,
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &density in densities {
        let set = prepare_set(cfg, functions, Role::Validation, density)?;
        rows.extend(compare_on_set(
            methods,
            t_candidates,
            density,
            &set,
            registry,
            cfg,
            functions,
        )?);
    }
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.density.total_cmp(&b.density))
            .then(a.t.total_cmp(&b.t))
    });
    Ok(rows)
}
