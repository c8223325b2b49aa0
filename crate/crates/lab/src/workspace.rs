//! CLI commands as operations on an output directory.
//!
//! Layout under the output directory:
//!
//! ```text
//! instances/<role>/<problem>_p<density>_<i>.json
//! baselines.json
//! scaling/<problem>_p<density>.{csv,svg}
//! tuning/<method>_<problem>_p<density>.json      optimizer history
//! tuning/<method>_<problem>_p<density>_surrogate.csv  mean and variance grid
//! tuning/<method>_<problem>_p<density>_{mean,variance}.svg
//! schedules/<method>_<problem>_p<density>.json
//! registry.json
//! results.{json,csv,svg}
//! ```

use std::path::{Path, PathBuf};

use annealpath_core::schedules::{AnnealFunctions, SchedulePlan};
use log::info;
use serde::{Deserialize, Serialize};

use crate::compare::{run_comparison, ResultRow};
use crate::config::{ExperimentConfig, Method, Role};
use crate::error::{LabError, Result};
use crate::experiment::{generate_set, prepare_set};
use crate::export::{self, HeatLayer};
use crate::registry::ParamRegistry;
use crate::seeds;
use crate::tuning::{best_scaling, tune_scaling_grid, tune_schedules, ScalingRow, TuneOutcome};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub role: Role,
    pub density: f64,
    pub index: usize,
    pub seed: u64,
    pub value: Option<f64>,
    pub config: Option<Vec<i8>>,
    pub valid_shots: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneSummary {
    pub method: Method,
    pub density: f64,
    pub start_value: f64,
    pub best_value: f64,
    pub fitness_calls: usize,
}

pub struct Workspace {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub functions: AnnealFunctions,
}

impl Workspace {
    pub fn new(cfg: ExperimentConfig, out: &Path) -> Result<Self> {
        cfg.validate()?;
        let functions = cfg.functions()?;
        Ok(Self {
            cfg,
            out: out.to_path_buf(),
            functions,
        })
    }

    fn stem(&self, density: f64) -> String {
        format!("{}_p{density}", self.cfg.problem)
    }

    fn densities(&self, only: Option<f64>) -> Result<Vec<f64>> {
        match only {
            None => Ok(self.cfg.densities.clone()),
            Some(d) if self.cfg.densities.contains(&d) => Ok(vec![d]),
            Some(d) => Err(LabError::Config(format!(
                "density {d} is not one of the configured densities {:?}",
                self.cfg.densities
            ))),
        }
    }

    pub fn registry_path(&self) -> PathBuf {
        self.out.join("registry.json")
    }

    pub fn registry(&self) -> Result<ParamRegistry> {
        ParamRegistry::load(&self.registry_path())
    }

    /// Writes training and validation graphs.
    pub fn gen(&self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for &density in &self.cfg.densities {
            for role in [Role::Training, Role::Validation] {
                for (i, inst) in generate_set(&self.cfg, role, density)?.iter().enumerate() {
                    let path = self
                        .out
                        .join("instances")
                        .join(role.name())
                        .join(format!("{}_{i}.json", self.stem(density)));
                    export::write_json(inst, &path)?;
                    written.push(path);
                }
            }
        }
        info!("wrote {} instances", written.len());
        Ok(written)
    }

    pub fn baseline(&self) -> Result<Vec<BaselineEntry>> {
        let mut entries = Vec::new();
        for &density in &self.cfg.densities {
            for role in [Role::Training, Role::Validation] {
                for p in prepare_set(&self.cfg, &self.functions, role, density)? {
                    entries.push(BaselineEntry {
                        role,
                        density,
                        index: p.index,
                        seed: p.instance.seed,
                        value: p.baseline.value,
                        config: p.baseline.config.map(|c| c.values().to_vec()),
                        valid_shots: p.baseline.valid_shots,
                    });
                }
            }
        }
        export::write_json(&entries, &self.out.join("baselines.json"))?;
        Ok(entries)
    }

    /// Scans `alpha1` for the HG schedule at each density and stores the best
    /// value for HG and RA+HG.
    pub fn tune_scaling(&self, only: Option<f64>) -> Result<Vec<(f64, Vec<ScalingRow>)>> {
        let mut registry = self.registry()?;
        let mut out = Vec::new();
        for density in self.densities(only)? {
            let set = prepare_set(&self.cfg, &self.functions, Role::Training, density)?;
            let base = registry
                .params_or_fixed(self.cfg.problem, density, Method::Hg, self.cfg.tune_t)
                .with_duration(self.cfg.tune_t);
            let rows = tune_scaling_grid(&set, &base, &self.cfg, &self.functions)?;
            let dir = self.out.join("scaling");
            export::write_scaling_csv(&rows, &dir.join(format!("{}.csv", self.stem(density))))?;
            export::write_svg(
                &export::scaling_svg(&format!("HG scaling, p = {density}"), &rows),
                &dir.join(format!("{}.svg", self.stem(density))),
            )?;
            if let Some(best) = best_scaling(&rows) {
                for method in [Method::Hg, Method::RaHg] {
                    let mut p = registry.params_or_fixed(
                        self.cfg.problem,
                        density,
                        method,
                        self.cfg.tune_t,
                    );
                    p.alpha1 = best.alpha1;
                    registry.insert(self.cfg.problem, density, p);
                }
            }
            out.push((density, rows));
        }
        registry.save(&self.registry_path())?;
        Ok(out)
    }

    /// Bayesian optimization of `method`'s schedule at each density.
    pub fn tune_schedule(&self, method: Method, only: Option<f64>) -> Result<Vec<TuneSummary>> {
        let mut registry = self.registry()?;
        let mut summaries = Vec::new();
        for density in self.densities(only)? {
            let set = prepare_set(&self.cfg, &self.functions, Role::Training, density)?;
            let base = registry
                .params_or_fixed(self.cfg.problem, density, method, self.cfg.tune_t)
                .with_duration(self.cfg.tune_t);
            let seed = seeds::optimizer_seed(
                self.cfg.seed,
                &self.cfg.problem.to_string(),
                density,
                method.slug(),
            );
            let outcome = tune_schedules(&base, &set, &self.cfg, &self.functions, seed)?;
            self.write_tuning(method, density, &outcome)?;
            summaries.push(TuneSummary {
                method,
                density,
                start_value: outcome.start_value,
                best_value: outcome.result.best_value,
                fitness_calls: outcome.fitness_calls,
            });
            registry.insert(self.cfg.problem, density, outcome.params);
        }
        registry.save(&self.registry_path())?;
        Ok(summaries)
    }

    fn write_tuning(&self, method: Method, density: f64, outcome: &TuneOutcome) -> Result<()> {
        let name = format!("{}_{}", method.slug(), self.stem(density));
        let dir = self.out.join("tuning");
        export::write_json(outcome, &dir.join(format!("{name}.json")))?;
        let plan = outcome.params.plan(&self.functions)?;
        let schedule = self.out.join("schedules").join(format!("{name}.json"));
        std::fs::create_dir_all(schedule.parent().unwrap())
            .map_err(|e| LabError::io(&schedule, e))?;
        std::fs::write(&schedule, plan.to_json()?).map_err(|e| LabError::io(&schedule, e))?;
        if let Some(grid) = &outcome.result.surrogate {
            self.write_heatmaps(&dir, &name, grid, &outcome.result.history)?;
        }
        Ok(())
    }

    fn write_heatmaps(
        &self,
        dir: &Path,
        name: &str,
        grid: &annealpath_core::bayesopt::SurrogateGrid,
        history: &[annealpath_core::bayesopt::Observation],
    ) -> Result<()> {
        export::write_heatmap_csv(grid, &dir.join(format!("{name}_surrogate.csv")))?;
        for (layer, tag) in [(HeatLayer::Mean, "mean"), (HeatLayer::Variance, "variance")] {
            if let Some(svg) = export::heatmap_svg(grid, layer, history) {
                export::write_svg(&svg, &dir.join(format!("{name}_{tag}.svg")))?;
            }
        }
        Ok(())
    }

    /// Evaluates the configured methods and durations on validation graphs.
    pub fn compare(&self) -> Result<Vec<ResultRow>> {
        let registry = self.registry()?;
        let rows = run_comparison(
            &self.cfg.methods,
            &self.cfg.anneal_t,
            &self.cfg.densities,
            &registry,
            &self.cfg,
            &self.functions,
        )?;
        export::write_json(&rows, &self.out.join("results.json"))?;
        export::write_results_csv(&rows, &self.out.join("results.csv"))?;
        Ok(rows)
    }

    /// Renders CSV and SVG from the stored result and tuning files.
    pub fn export(&self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        let results = self.out.join("results.json");
        if !results.exists() {
            return Err(LabError::Missing(format!(
                "{} (run `compare` first)",
                results.display()
            )));
        }
        let rows: Vec<ResultRow> = export::read_json(&results)?;
        let csv = self.out.join("results.csv");
        export::write_results_csv(&rows, &csv)?;
        let svg = self.out.join("results.svg");
        export::write_svg(&export::results_svg(&rows), &svg)?;
        written.extend([csv, svg]);

        let dir = self.out.join("tuning");
        if dir.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| LabError::io(&dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            for f in files {
                let outcome: TuneOutcome = export::read_json(&f)?;
                if let Some(grid) = &outcome.result.surrogate {
                    let name = f.file_stem().unwrap().to_string_lossy().into_owned();
                    self.write_heatmaps(&dir, &name, grid, &outcome.result.history)?;
                    written.push(dir.join(format!("{name}_surrogate.csv")));
                }
            }
        }
        Ok(written)
    }

    /// Loads a stored schedule file.
    pub fn load_schedule(path: &Path) -> Result<SchedulePlan> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Ok(SchedulePlan::from_json(&text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub tuning: Vec<TuneSummary>,
    pub rows: Vec<ResultRow>,
}

/// `gen`, `baseline`, `tune-schedule` for `cfg.method`, `compare`, `export`.
pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> Result<PipelineSummary> {
    let ws = Workspace::new(cfg.clone(), out)?;
    export::write_json(cfg, &out.join("config.json"))?;
    ws.gen()?;
    ws.baseline()?;
    let tuning = ws.tune_schedule(cfg.method, None)?;
    let rows = ws.compare()?;
    ws.export()?;
    Ok(PipelineSummary { tuning, rows })
}
