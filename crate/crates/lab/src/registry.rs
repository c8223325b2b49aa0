//! Tuned parameters keyed by problem, density and method.

use std::collections::BTreeMap;
use std::path::Path;

use annealpath_core::problems::ProblemKind;
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{LabError, Result};
use crate::params::MethodParams;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamRegistry {
    entries: BTreeMap<String, MethodParams>,
}

pub fn key(problem: ProblemKind, density: f64, method: Method) -> String {
    format!("{problem}/{density}/{method}")
}

impl ParamRegistry {
    /// Reads `path`; a missing file is an empty registry.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| LabError::Config(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(LabError::io(path, e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::export::write_json(self, path)
    }

    pub fn get(&self, problem: ProblemKind, density: f64, method: Method) -> Option<&MethodParams> {
        self.entries.get(&key(problem, density, method))
    }

    pub fn insert(&mut self, problem: ProblemKind, density: f64, params: MethodParams) {
        self.entries
            .insert(key(problem, density, params.method), params);
    }

    /// Stored parameters, or the fixed schedule at `t`.
    pub fn params_or_fixed(
        &self,
        problem: ProblemKind,
        density: f64,
        method: Method,
        t: f64,
    ) -> MethodParams {
        self.get(problem, density, method)
            .cloned()
            .unwrap_or_else(|| MethodParams::fixed(method, t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keyed_by_problem_density_method() {
        let mut r = ParamRegistry::default();
        r.insert(
            ProblemKind::MaxCut,
            0.5,
            MethodParams::fixed(Method::Hg, 1.0),
        );
        assert!(r.get(ProblemKind::MaxCut, 0.5, Method::Hg).is_some());
        assert!(r.get(ProblemKind::MaxCut, 0.1, Method::Hg).is_none());
        assert!(r.get(ProblemKind::MaxClique, 0.5, Method::Hg).is_none());
        assert!(r.get(ProblemKind::MaxCut, 0.5, Method::Ra).is_none());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("maxcut/0.5/HG"));
        assert_eq!(serde_json::from_str::<ParamRegistry>(&json).unwrap(), r);
    }

    #[test]
    fn missing_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ParamRegistry::load(&dir.path().join("none.json"))
            .unwrap()
            .is_empty());
    }
}
