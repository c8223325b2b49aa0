//! Instance sets, baselines, method runs and the fitness function.

use annealpath_core::annealer::anneal;
use annealpath_core::bayesopt::SENTINEL;
use annealpath_core::ising::{filter_slack, plant, IsingModel, PlantedModel, SpinConfig};
use annealpath_core::problems::{ProblemInstance, ProblemKind};
use annealpath_core::samples::SampleSet;
use annealpath_core::schedules::{AnnealFunctions, SchedulePlan};
use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, Role};
use crate::error::Result;
use crate::params::MethodParams;
use crate::seeds;

/// Best valid objective among a batch of samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    /// `None` when no sample was a valid solution.
    pub value: Option<f64>,
    pub config: Option<SpinConfig>,
    pub shots: usize,
    pub valid_shots: usize,
}

/// An instance with its model and baseline, ready for method runs.
#[derive(Clone, Debug)]
pub struct PreparedInstance {
    pub index: usize,
    pub role: Role,
    pub instance: ProblemInstance,
    pub model: IsingModel,
    pub anneal_seed: u64,
    pub baseline: Baseline,
}

pub fn generate_set(
    cfg: &ExperimentConfig,
    role: Role,
    density: f64,
) -> Result<Vec<ProblemInstance>> {
    let problem = cfg.problem.to_string();
    (0..cfg.instance_count(role))
        .map(|i| {
            let seed = seeds::instance_seed(cfg.seed, role, &problem, density, i);
            Ok(ProblemInstance::generate(
                cfg.problem,
                cfg.n,
                density,
                seed,
            )?)
        })
        .collect()
}

/// Generates the `role` set at `density` and runs the baseline on each graph.
pub fn prepare_set(
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
    role: Role,
    density: f64,
) -> Result<Vec<PreparedInstance>> {
    let instances = generate_set(cfg, role, density)?;
    instances
        .into_par_iter()
        .enumerate()
        .map(|(index, instance)| {
            let model = instance.ising()?;
            let anneal_seed = seeds::anneal_seed(instance.seed);
            let baseline = run_baseline(&instance, &model, cfg, functions, anneal_seed)?;
            Ok(PreparedInstance {
                index,
                role,
                instance,
                model,
                anneal_seed,
                baseline,
            })
        })
        .collect()
}

/// Highest objective over the valid samples; ties go to the lowest-energy
/// record.
pub fn best_valid(instance: &ProblemInstance, samples: &SampleSet) -> Result<Baseline> {
    let mut best: Option<(f64, &SpinConfig)> = None;
    let mut valid_shots = 0;
    for r in &samples.records {
        if let Some(v) = instance.objective(&r.config)? {
            valid_shots += r.count;
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, &r.config));
            }
        }
    }
    Ok(Baseline {
        value: best.map(|b| b.0),
        config: best.map(|b| b.1.clone()),
        shots: samples.shots,
        valid_shots,
    })
}

/// Best objective over `baseline_shots` forward anneals of length
/// `baseline_T`. Invalid samples (non-cliques) are excluded.
pub fn run_baseline(
    instance: &ProblemInstance,
    model: &IsingModel,
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
    seed: u64,
) -> Result<Baseline> {
    let plan = SchedulePlan::forward(cfg.baseline_t)?.with_functions(functions.clone());
    let samples = anneal(
        model,
        &plan,
        None,
        &cfg.sim_config(cfg.baseline_shots, seed),
    )?;
    let b = best_valid(instance, &samples)?;
    if b.value.is_none() {
        debug!("instance {}: no valid baseline sample", instance.seed);
    }
    Ok(b)
}

/// Result of one method run on one instance, on the original objective.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub best: Baseline,
    /// Shots measured on the annealed model, before slack filtering.
    pub raw_shots: usize,
    /// Shots with `z = +1` (all shots when there is no slack spin).
    pub kept_shots: usize,
}

impl RunOutcome {
    pub fn z_plus_fraction(&self) -> f64 {
        if self.raw_shots == 0 {
            0.0
        } else {
            self.kept_shots as f64 / self.raw_shots as f64
        }
    }
}

/// Maps samples of a (possibly planted) model back to the original problem.
pub fn evaluate_samples(
    instance: &ProblemInstance,
    planted: Option<&PlantedModel>,
    samples: &SampleSet,
) -> Result<RunOutcome> {
    let filtered = match planted {
        Some(p) => filter_slack(samples, p)?,
        None => samples.clone(),
    };
    Ok(RunOutcome {
        best: best_valid(instance, &filtered)?,
        raw_shots: samples.shots,
        kept_shots: filtered.shots,
    })
}

/// Runs `params` on one prepared instance, planting its baseline solution.
pub fn run_method(
    prep: &PreparedInstance,
    params: &MethodParams,
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
) -> Result<RunOutcome> {
    let plan = params.plan(functions)?;
    let sim = cfg.sim_config(cfg.shots, prep.anneal_seed);
    let method = params.method;
    let x0 = match (&prep.baseline.config, method) {
        (_, Method::Fa) => None,
        (Some(c), _) => Some(c),
        (None, _) => {
            return Err(crate::error::LabError::Missing(format!(
                "instance {} has no baseline solution to plant",
                prep.index
            )))
        }
    };
    if method.uses_hgain() {
        let x0 = x0.expect("checked above");
        let alpha2 = if prep.model.has_linear() {
            params.alpha2
        } else {
            0.0
        };
        let planted = plant(&prep.model, x0, params.alpha1, alpha2)?;
        let start = planted.initial_state();
        let samples = anneal(
            &planted.base,
            &plan,
            plan.is_reverse().then_some(&start),
            &sim,
        )?;
        evaluate_samples(&prep.instance, Some(&planted), &samples)
    } else {
        let samples = anneal(&prep.model, &plan, x0.filter(|_| plan.is_reverse()), &sim)?;
        evaluate_samples(&prep.instance, None, &samples)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    /// Mean of `per_instance`, or the sentinel.
    pub value: f64,
    pub per_instance: Vec<f64>,
    /// Indices skipped because their baseline is undefined.
    pub excluded: Vec<usize>,
    /// Fraction of `z = +1` shots per evaluated instance.
    pub z_plus_fraction: Vec<f64>,
    pub sentinel: bool,
}

/// Combines per-instance outcomes into the fitness value.
///
/// A method run with no `z = +1` shot on any instance turns the whole call
/// into the sentinel. An instance whose method run has no valid clique among
/// its kept shots scores the empty clique (0).
pub fn aggregate(kind: ProblemKind, runs: &[(&Baseline, Option<&RunOutcome>)]) -> FitnessReport {
    let mut per_instance = Vec::new();
    let mut excluded = Vec::new();
    let mut z_plus_fraction = Vec::new();
    let mut sentinel = false;
    for (i, (baseline, outcome)) in runs.iter().enumerate() {
        let (Some(base), Some(out)) = (baseline.value, outcome) else {
            excluded.push(i);
            continue;
        };
        z_plus_fraction.push(out.z_plus_fraction());
        if out.kept_shots == 0 {
            sentinel = true;
        }
        let value = match (kind, out.best.value) {
            (_, Some(v)) => v,
            (ProblemKind::MaxClique, None) => 0.0,
            (ProblemKind::MaxCut, None) => base,
        };
        per_instance.push(value - base);
    }
    if sentinel || per_instance.is_empty() {
        sentinel = true;
        per_instance = vec![SENTINEL; per_instance.len()];
    }
    let value = if per_instance.is_empty() {
        SENTINEL
    } else {
        per_instance.iter().sum::<f64>() / per_instance.len() as f64
    };
    FitnessReport {
        value,
        per_instance,
        excluded,
        z_plus_fraction,
        sentinel,
    }
}

/// Mean improvement of `params` over the baseline across `set`.
pub fn fitness(
    params: &MethodParams,
    set: &[PreparedInstance],
    cfg: &ExperimentConfig,
    functions: &AnnealFunctions,
) -> Result<FitnessReport> {
    let outcomes: Vec<Option<RunOutcome>> = set
        .par_iter()
        .map(|prep| {
            if prep.baseline.value.is_none() {
                return Ok(None);
            }
            run_method(prep, params, cfg, functions).map(Some)
        })
        .collect::<Result<_>>()?;
    let runs: Vec<(&Baseline, Option<&RunOutcome>)> = set
        .iter()
        .zip(&outcomes)
        .map(|(p, o)| (&p.baseline, o.as_ref()))
        .collect();
    Ok(aggregate(cfg.problem, &runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use annealpath_core::ising::Domain;

    fn base(v: Option<f64>) -> Baseline {
        Baseline {
            value: v,
            config: None,
            shots: 10,
            valid_shots: 10,
        }
    }

    fn outcome(v: Option<f64>, kept: usize) -> RunOutcome {
        RunOutcome {
            best: base(v),
            raw_shots: 10,
            kept_shots: kept,
        }
    }

    #[test]
    fn two_instance_mean() {
        let (b1, b2) = (base(Some(3.0)), base(Some(5.5)));
        let (o1, o2) = (outcome(Some(4.0), 10), outcome(Some(5.0), 10));
        let r = aggregate(ProblemKind::MaxCut, &[(&b1, Some(&o1)), (&b2, Some(&o2))]);
        assert_eq!(r.per_instance, vec![1.0, -0.5]);
        assert_eq!(r.value, 0.25);
        assert!(!r.sentinel);
    }

    #[test]
    fn all_slack_negative_is_sentinel() {
        let (b1, b2) = (base(Some(1.0)), base(Some(1.0)));
        let (o1, o2) = (outcome(Some(2.0), 4), outcome(None, 0));
        let r = aggregate(
            ProblemKind::MaxClique,
            &[(&b1, Some(&o1)), (&b2, Some(&o2))],
        );
        assert!(r.sentinel);
        assert_eq!(r.value, SENTINEL);
        assert_eq!(r.z_plus_fraction, vec![0.4, 0.0]);
    }

    #[test]
    fn undefined_baselines_are_excluded() {
        let (b1, b2) = (base(None), base(Some(2.0)));
        let o2 = outcome(None, 3);
        let r = aggregate(ProblemKind::MaxClique, &[(&b1, None), (&b2, Some(&o2))]);
        assert_eq!(r.excluded, vec![0]);
        // no valid clique among kept shots scores the empty clique
        assert_eq!(r.per_instance, vec![-2.0]);
        let r = aggregate(ProblemKind::MaxClique, &[(&b1, None)]);
        assert_eq!(r.value, SENTINEL);
    }

    #[test]
    fn best_valid_skips_non_cliques() {
        use annealpath_core::problems::{Edge, WeightedGraph};
        use annealpath_core::samples::{SampleMeta, SampleRecord};
        let g = WeightedGraph::new(
            3,
            vec![Edge {
                u: 0,
                v: 1,
                w: None,
            }],
            Some(vec![0.5, 0.25, 0.9]),
        )
        .unwrap();
        let inst = ProblemInstance {
            graph: g,
            kind: ProblemKind::MaxClique,
            density: 0.5,
            seed: 0,
        };
        let rec = |v: Vec<i8>, energy: f64| SampleRecord {
            config: SpinConfig::new(Domain::Ising, v).unwrap(),
            count: 1,
            energy,
        };
        let s = SampleSet::from_records(
            vec![
                rec(vec![1, 1, 1], -3.0),
                rec(vec![1, 1, -1], -1.0),
                rec(vec![-1, -1, 1], -0.5),
            ],
            SampleMeta::default(),
        );
        let b = best_valid(&inst, &s).unwrap();
        assert_eq!(b.value, Some(0.9));
        assert_eq!(b.valid_shots, 2);
    }
}
