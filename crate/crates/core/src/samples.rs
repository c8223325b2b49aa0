//! Measured configurations with multiplicities and energies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ising::{Domain, SpinConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub config: SpinConfig,
    pub count: usize,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub plan_digest: Option<String>,
    pub seed: u64,
    pub backend: String,
    /// Shots removed by post-selection (e.g. slack `z = -1`).
    #[serde(default)]
    pub discarded: usize,
}

/// A batch of anneals. Records are unique per configuration and sorted by
/// energy, then configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub shots: usize,
    pub records: Vec<SampleRecord>,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn from_records(records: Vec<SampleRecord>, meta: SampleMeta) -> Self {
        let mut merged: BTreeMap<SpinConfig, (usize, f64)> = BTreeMap::new();
        for r in records {
            merged
                .entry(r.config)
                .and_modify(|e| e.0 += r.count)
                .or_insert((r.count, r.energy));
        }
        let mut records: Vec<SampleRecord> = merged
            .into_iter()
            .filter(|(_, (count, _))| *count > 0)
            .map(|(config, (count, energy))| SampleRecord {
                config,
                count,
                energy,
            })
            .collect();
        records.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.config.cmp(&b.config))
        });
        let shots = records.iter().map(|r| r.count).sum();
        Self {
            shots,
            records,
            meta,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Lowest-energy record.
    pub fn best(&self) -> Option<&SampleRecord> {
        self.records.first()
    }

    /// Empirical distribution over configurations.
    pub fn frequencies(&self) -> BTreeMap<SpinConfig, f64> {
        let total = self.shots.max(1) as f64;
        self.records
            .iter()
            .map(|r| (r.config.clone(), r.count as f64 / total))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SampleSetJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SampleSetJson = serde_json::from_str(s)?;
        let records = raw
            .records
            .into_iter()
            .map(|r| {
                Ok(SampleRecord {
                    config: SpinConfig::new(Domain::Ising, r.config)?,
                    count: r.count,
                    energy: r.energy,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_records(records, raw.meta))
    }
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    config: Vec<i8>,
    count: usize,
    energy: f64,
}

#[derive(Serialize, Deserialize)]
struct SampleSetJson {
    shots: usize,
    records: Vec<RecordJson>,
    meta: SampleMeta,
}

impl From<&SampleSet> for SampleSetJson {
    fn from(s: &SampleSet) -> Self {
        Self {
            shots: s.shots,
            records: s
                .records
                .iter()
                .map(|r| RecordJson {
                    config: r.config.values().to_vec(),
                    count: r.count,
                    energy: r.energy,
                })
                .collect(),
            meta: s.meta.clone(),
        }
    }
}

/// Total-variation distance between two outcome distributions.
pub fn total_variation(a: &BTreeMap<SpinConfig, f64>, b: &BTreeMap<SpinConfig, f64>) -> f64 {
    let mut keys: Vec<&SpinConfig> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(v: Vec<i8>, count: usize, energy: f64) -> SampleRecord {
        SampleRecord {
            config: SpinConfig::spins(v).unwrap(),
            count,
            energy,
        }
    }

    #[test]
    fn merges_and_sorts() {
        let s = SampleSet::from_records(
            vec![
                rec(vec![1, 1], 2, 0.5),
                rec(vec![-1, 1], 3, -1.0),
                rec(vec![1, 1], 1, 0.5),
            ],
            SampleMeta::default(),
        );
        assert_eq!(s.shots, 6);
        assert_eq!(s.records.len(), 2);
        assert_eq!(s.best().unwrap().energy, -1.0);
        assert_eq!(s.records[1].count, 3);
    }

    #[test]
    fn json_roundtrip() {
        let s = SampleSet::from_records(
            vec![rec(vec![1, -1], 4, 0.25)],
            SampleMeta {
                plan_digest: Some("ab".into()),
                seed: 3,
                backend: "statevector".into(),
                discarded: 0,
            },
        );
        let j = s.to_json().unwrap();
        assert!(j.contains("\"config\":[1,-1]"));
        assert_eq!(SampleSet::from_json(&j).unwrap(), s);
    }
}
