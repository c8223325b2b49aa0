//! Ising and QUBO coefficient models.
//!
//! A model stores sparse linear and quadratic coefficients plus a constant
//! offset, and evaluates
//!
//! ```text
//! E(x) = offset + sum_i h_i x_i + sum_{i<j} J_ij x_i x_j
//! ```
//!
//! with `x_i` in `{-1, +1}` ([`IsingModel`]) or `{0, 1}` ([`QuboModel`]).
//! The module also holds the transforms used to plant a known solution as a
//! linear bias: slack-variable homogenization ([`homogenize`]) and the
//! planting term itself ([`plant`]).

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::samples::{SampleRecord, SampleSet};

/// Largest variable count accepted by the exhaustive oracles by default.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;

/// Variable domain of a model or configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// `x_i ∈ {-1, +1}`
    Ising,
    /// `x_i ∈ {0, 1}`
    Qubo,
}

impl Domain {
    pub fn contains(self, v: i8) -> bool {
        match self {
            Domain::Ising => v == 1 || v == -1,
            Domain::Qubo => v == 0 || v == 1,
        }
    }

    /// Value encoded by a set bit in an enumeration index. For spins a set bit
    /// means `-1`, matching the state-vector basis ordering.
    #[inline]
    pub fn from_bit(self, bit: bool) -> i8 {
        match (self, bit) {
            (Domain::Ising, false) => 1,
            (Domain::Ising, true) => -1,
            (Domain::Qubo, false) => 0,
            (Domain::Qubo, true) => 1,
        }
    }

    #[inline]
    pub fn to_bit(self, v: i8) -> bool {
        match self {
            Domain::Ising => v == -1,
            Domain::Qubo => v == 1,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Ising => f.write_str("ising"),
            Domain::Qubo => f.write_str("qubo"),
        }
    }
}

/// Type-level marker for a model's variable domain.
pub trait VarDomain:
    Copy + Clone + Default + fmt::Debug + PartialEq + Send + Sync + 'static
{
    const DOMAIN: Domain;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spin;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Binary;

impl VarDomain for Spin {
    const DOMAIN: Domain = Domain::Ising;
}

impl VarDomain for Binary {
    const DOMAIN: Domain = Domain::Qubo;
}

pub type IsingModel = Model<Spin>;
pub type QuboModel = Model<Binary>;

/// An assignment of every variable of a model, tagged with its domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct SpinConfig {
    domain: Domain,
    values: Vec<i8>,
}

#[derive(Deserialize)]
struct RawConfig {
    domain: Domain,
    values: Vec<i8>,
}

impl TryFrom<RawConfig> for SpinConfig {
    type Error = Error;
    fn try_from(r: RawConfig) -> Result<Self> {
        SpinConfig::new(r.domain, r.values)
    }
}

impl SpinConfig {
    pub fn new(domain: Domain, values: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| !domain.contains(v)) {
            return Err(Error::InvalidParameter(format!(
                "value {bad} is not in the {domain} domain"
            )));
        }
        Ok(Self { domain, values })
    }

    /// A `±1` configuration.
    pub fn spins(values: Vec<i8>) -> Result<Self> {
        Self::new(Domain::Ising, values)
    }

    /// A `0/1` configuration.
    pub fn bits(values: Vec<i8>) -> Result<Self> {
        Self::new(Domain::Qubo, values)
    }

    /// Decodes enumeration index `index` into an `n`-variable configuration.
    pub fn from_index(domain: Domain, n: usize, index: u64) -> Self {
        let values = (0..n)
            .map(|i| domain.from_bit(index >> i & 1 == 1))
            .collect();
        Self { domain, values }
    }

    pub fn to_index(&self) -> u64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| self.domain.to_bit(v))
            .fold(0u64, |acc, (i, _)| acc | (1 << i))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Maps spins to bits via `x = (s + 1) / 2` and back.
    pub fn convert(&self, to: Domain) -> SpinConfig {
        let values = match (self.domain, to) {
            (a, b) if a == b => self.values.clone(),
            (Domain::Ising, Domain::Qubo) => self.values.iter().map(|&s| (s + 1) / 2).collect(),
            (Domain::Qubo, Domain::Ising) => self.values.iter().map(|&x| 2 * x - 1).collect(),
            _ => unreachable!(),
        };
        SpinConfig { domain: to, values }
    }

    pub(crate) fn from_raw(domain: Domain, values: Vec<i8>) -> Self {
        debug_assert!(values.iter().all(|&v| domain.contains(v)));
        Self { domain, values }
    }
}

/// Sparse Ising/QUBO model over `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Model<D: VarDomain> {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    _domain: PhantomData<D>,
}

impl<D: VarDomain> Model<D> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
            _domain: PhantomData,
        }
    }

    /// Builds a model from term lists. Repeated keys are rejected; use
    /// [`Model::add_linear`]/[`Model::add_quadratic`] to accumulate.
    pub fn from_terms(
        n: usize,
        linear: impl IntoIterator<Item = (usize, f64)>,
        quadratic: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        let mut m = Self::new(n);
        for (i, h) in linear {
            m.check_index(i)?;
            check_finite(h)?;
            if m.linear.insert(i, h).is_some() {
                return Err(Error::InvalidModel(format!("duplicate linear key {i}")));
            }
        }
        for (i, j, v) in quadratic {
            if i >= j {
                return Err(Error::InvalidModel(format!(
                    "quadratic key ({i}, {j}) must satisfy i < j"
                )));
            }
            m.check_index(j)?;
            check_finite(v)?;
            if m.quadratic.insert((i, j), v).is_some() {
                return Err(Error::InvalidModel(format!(
                    "duplicate quadratic key ({i}, {j})"
                )));
            }
        }
        check_finite(offset)?;
        m.offset = offset;
        Ok(m)
    }

    pub fn domain(&self) -> Domain {
        D::DOMAIN
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) -> Result<()> {
        check_finite(offset)?;
        self.offset = offset;
        Ok(())
    }

    pub fn linear_coeff(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    /// True when at least one linear coefficient is nonzero.
    pub fn has_linear(&self) -> bool {
        self.linear.values().any(|&h| h != 0.0)
    }

    pub fn add_linear(&mut self, i: usize, h: f64) -> Result<()> {
        self.check_index(i)?;
        check_finite(h)?;
        *self.linear.entry(i).or_insert(0.0) += h;
        Ok(())
    }

    /// Adds `v` to the coupler between `i` and `j` (order-insensitive).
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidModel(format!(
                "self-coupling on variable {i}"
            )));
        }
        self.check_index(i)?;
        self.check_index(j)?;
        check_finite(v)?;
        let key = if i < j { (i, j) } else { (j, i) };
        *self.quadratic.entry(key).or_insert(0.0) += v;
        Ok(())
    }

    /// Copy of this model with the quadratic part removed.
    pub fn linear_part(&self) -> Self {
        Self {
            quadratic: BTreeMap::new(),
            ..self.clone()
        }
    }

    /// Copy of this model with the linear part removed.
    pub fn quadratic_part(&self) -> Self {
        Self {
            linear: BTreeMap::new(),
            ..self.clone()
        }
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        check_finite(self.offset)?;
        for (&i, &h) in &self.linear {
            self.check_index(i)?;
            check_finite(h)?;
        }
        for (&(i, j), &v) in &self.quadratic {
            if i >= j {
                return Err(Error::InvalidModel(format!(
                    "quadratic key ({i}, {j}) not ordered"
                )));
            }
            self.check_index(j)?;
            check_finite(v)?;
        }
        Ok(())
    }

    /// Energy of `config`, including the offset.
    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        if config.domain != D::DOMAIN {
            return Err(Error::Domain {
                expected: D::DOMAIN,
                got: config.domain,
            });
        }
        if config.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: config.len(),
            });
        }
        Ok(self.energy_of(&config.values))
    }

    /// Energy of a raw value slice. The caller guarantees length and domain.
    pub fn energy_of(&self, x: &[i8]) -> f64 {
        let lin: f64 = self.linear.iter().map(|(&i, &h)| h * f64::from(x[i])).sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .map(|(&(i, j), &v)| v * f64::from(x[i]) * f64::from(x[j]))
            .sum();
        self.offset + lin + quad
    }

    /// Adjacency lists `(neighbor, J)` for every variable.
    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &v) in &self.quadratic {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelJson::from_model(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ModelJson = serde_json::from_str(s)?;
        raw.into_model()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidModel(format!(
                "index {i} out of range for {} variables",
                self.n
            )));
        }
        Ok(())
    }
}

fn check_finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("non-finite coefficient {v}")))
    }
}

/// Wire form of a model.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub n: usize,
    pub domain: Domain,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub offset: f64,
}

impl ModelJson {
    pub fn from_model<D: VarDomain>(m: &Model<D>) -> Self {
        Self {
            n: m.n,
            domain: D::DOMAIN,
            linear: m.linear.iter().map(|(&i, &h)| (i, h)).collect(),
            quadratic: m.quadratic.iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
            offset: m.offset,
        }
    }

    pub fn into_model<D: VarDomain>(self) -> Result<Model<D>> {
        if self.domain != D::DOMAIN {
            return Err(Error::Domain {
                expected: D::DOMAIN,
                got: self.domain,
            });
        }
        Model::from_terms(self.n, self.linear, self.quadratic, self.offset)
    }
}

impl<D: VarDomain> Serialize for Model<D> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelJson::from_model(self).serialize(s)
    }
}

impl<'de, D: VarDomain> Deserialize<'de> for Model<D> {
    fn deserialize<De: serde::Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let raw = ModelJson::deserialize(d)?;
        raw.into_model().map_err(serde::de::Error::custom)
    }
}

/// Substitutes `x = (s + 1) / 2`; energies agree on corresponding configs,
/// offset included.
pub fn qubo_to_ising(q: &QuboModel) -> Result<IsingModel> {
    q.validate()?;
    let mut out = IsingModel::new(q.n);
    let mut offset = q.offset;
    for (&i, &h) in &q.linear {
        out.add_linear(i, h / 2.0)?;
        offset += h / 2.0;
    }
    for (&(i, j), &v) in &q.quadratic {
        let quarter = v / 4.0;
        out.add_quadratic(i, j, quarter)?;
        out.add_linear(i, quarter)?;
        out.add_linear(j, quarter)?;
        offset += quarter;
    }
    out.set_offset(offset)?;
    Ok(out)
}

/// Inverse substitution `s = 2x - 1`.
pub fn ising_to_qubo(m: &IsingModel) -> Result<QuboModel> {
    m.validate()?;
    let mut out = QuboModel::new(m.n);
    let mut offset = m.offset;
    for (&i, &h) in &m.linear {
        out.add_linear(i, 2.0 * h)?;
        offset -= h;
    }
    for (&(i, j), &v) in &m.quadratic {
        out.add_quadratic(i, j, 4.0 * v)?;
        out.add_linear(i, -2.0 * v)?;
        out.add_linear(j, -2.0 * v)?;
        offset += v;
    }
    out.set_offset(offset)?;
    Ok(out)
}

/// Moves every linear term onto a coupler with a new slack spin `z` (index
/// `n`). Fixing `z = +1` recovers the input energies. Models without linear
/// terms are returned unchanged with no slack.
pub fn homogenize(model: &IsingModel) -> (IsingModel, Option<usize>) {
    if !model.has_linear() {
        return (model.clone(), None);
    }
    let z = model.n;
    let mut out = IsingModel {
        n: model.n + 1,
        linear: BTreeMap::new(),
        quadratic: model.quadratic.clone(),
        offset: model.offset,
        _domain: PhantomData,
    };
    for (&i, &h) in &model.linear {
        if h != 0.0 {
            out.quadratic.insert((i, z), h);
        }
    }
    (out, Some(z))
}

/// A model biased toward a known configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedModel {
    /// Homogenized model plus the planting linear terms.
    pub base: IsingModel,
    /// The model the planting was applied to.
    pub original: IsingModel,
    pub x0: SpinConfig,
    pub alpha1: f64,
    pub alpha2: f64,
    pub slack_index: Option<usize>,
}

impl PlantedModel {
    /// The configuration to start a reverse anneal from: `x0`, with `z = +1`
    /// appended when a slack spin exists.
    pub fn initial_state(&self) -> SpinConfig {
        let mut values = self.x0.values.clone();
        if self.slack_index.is_some() {
            values.push(1);
        }
        SpinConfig::from_raw(Domain::Ising, values)
    }

    /// Only the terms added by planting: `-alpha1 * x0_i` on the original
    /// variables and `-alpha2` on the slack.
    pub fn planting_terms(&self) -> IsingModel {
        let mut m = IsingModel::new(self.base.n);
        for (i, &v) in self.x0.values.iter().enumerate() {
            if self.alpha1 != 0.0 {
                m.linear.insert(i, -self.alpha1 * f64::from(v));
            }
        }
        if let Some(z) = self.slack_index {
            if self.alpha2 != 0.0 {
                m.linear.insert(z, -self.alpha2);
            }
        }
        m
    }

    /// Drops the slack coordinate, or returns `None` when `z = -1`.
    pub fn restrict(&self, config: &SpinConfig) -> Option<SpinConfig> {
        match self.slack_index {
            None => Some(config.clone()),
            Some(z) => {
                if config.values[z] != 1 {
                    return None;
                }
                let mut values = config.values.clone();
                values.remove(z);
                Some(SpinConfig::from_raw(config.domain, values))
            }
        }
    }
}

/// Plants `x0` into `model`: homogenizes it, then adds `-alpha1 * x0_i` to
/// every original variable and `-alpha2` to the slack spin.
///
/// Requesting `alpha2 > 0` for a model without linear terms is an error,
/// since no slack spin exists to carry it.
pub fn plant(
    model: &IsingModel,
    x0: &SpinConfig,
    alpha1: f64,
    alpha2: f64,
) -> Result<PlantedModel> {
    model.validate()?;
    if x0.domain != Domain::Ising {
        return Err(Error::Domain {
            expected: Domain::Ising,
            got: x0.domain,
        });
    }
    if x0.len() != model.n {
        return Err(Error::Dimension {
            expected: model.n,
            got: x0.len(),
        });
    }
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} must be finite and >= 0, got {a}"
            )));
        }
    }
    let (mut base, slack_index) = homogenize(model);
    if slack_index.is_none() && alpha2 > 0.0 {
        return Err(Error::InvalidParameter(
            "alpha2 > 0 requested but the model has no linear terms (no slack variable)".into(),
        ));
    }
    for (i, &v) in x0.values.iter().enumerate() {
        base.add_linear(i, -alpha1 * f64::from(v))?;
    }
    if let Some(z) = slack_index {
        base.add_linear(z, -alpha2)?;
    }
    Ok(PlantedModel {
        base,
        original: model.clone(),
        x0: x0.clone(),
        alpha1,
        alpha2: if slack_index.is_some() { alpha2 } else { 0.0 },
        slack_index,
    })
}

/// Keeps samples with `z = +1`, drops the slack coordinate and re-evaluates
/// energies on the original (unplanted) model.
pub fn filter_slack(samples: &SampleSet, planted: &PlantedModel) -> Result<SampleSet> {
    let mut records = Vec::with_capacity(samples.records.len());
    let mut discarded = 0;
    for r in &samples.records {
        if r.config.len() != planted.base.n {
            return Err(Error::Dimension {
                expected: planted.base.n,
                got: r.config.len(),
            });
        }
        match planted.restrict(&r.config) {
            Some(config) => {
                let energy = planted.original.energy(&config)?;
                records.push(SampleRecord {
                    config,
                    count: r.count,
                    energy,
                });
            }
            None => discarded += r.count,
        }
    }
    let mut meta = samples.meta.clone();
    meta.discarded += discarded;
    Ok(SampleSet::from_records(records, meta))
}

/// Exact minimum and all minimizers of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    pub configs: Vec<SpinConfig>,
}

pub fn brute_force_solve<D: VarDomain>(model: &Model<D>) -> Result<GroundStates> {
    brute_force_solve_with_limit(model, DEFAULT_EXHAUSTIVE_LIMIT)
}

/// Enumerates all `2^n` configurations in Gray-code order with incremental
/// energy updates. Candidates are re-evaluated exactly before the minimizer
/// set is fixed.
pub fn brute_force_solve_with_limit<D: VarDomain>(
    model: &Model<D>,
    limit: usize,
) -> Result<GroundStates> {
    let n = model.n;
    if n > limit {
        return Err(Error::TooLarge {
            what: "exhaustive enumeration",
            n,
            limit,
        });
    }
    let domain = D::DOMAIN;
    let adj = model.neighbors();
    let h: Vec<f64> = (0..n).map(|i| model.linear_coeff(i)).collect();
    let mut x: Vec<i8> = vec![domain.from_bit(false); n];
    let mut e = model.energy_of(&x);
    let scale = 1.0
        + model.linear.values().map(|v| v.abs()).sum::<f64>()
        + model.quadratic.values().map(|v| v.abs()).sum::<f64>();
    let coarse = 1e-9 * scale;

    let mut best = e;
    let mut cands: Vec<u64> = vec![0];
    let total: u64 = 1 << n;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        let old = f64::from(x[k]);
        let new_bit = !domain.to_bit(x[k]);
        x[k] = domain.from_bit(new_bit);
        let diff = f64::from(x[k]) - old;
        let field: f64 = h[k]
            + adj[k]
                .iter()
                .map(|&(j, v)| v * f64::from(x[j]))
                .sum::<f64>();
        e += diff * field;
        if step % 4096 == 0 {
            e = model.energy_of(&x);
        }
        if e < best - coarse {
            best = e;
            cands.clear();
            cands.push(step ^ (step >> 1));
        } else if e <= best + coarse {
            cands.push(step ^ (step >> 1));
            best = best.min(e);
        }
    }

    let evaluated: Vec<(SpinConfig, f64)> = cands
        .into_iter()
        .map(|idx| {
            let c = SpinConfig::from_index(domain, n, idx);
            let en = model.energy_of(&c.values);
            (c, en)
        })
        .collect();
    let min = evaluated
        .iter()
        .map(|(_, e)| *e)
        .fold(f64::INFINITY, f64::min);
    let tie = 1e-10 * min.abs().max(1.0);
    let mut configs: Vec<SpinConfig> = evaluated
        .into_iter()
        .filter(|(_, e)| *e <= min + tie)
        .map(|(c, _)| c)
        .collect();
    configs.sort();
    Ok(GroundStates {
        energy: min,
        configs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ising(n: usize, rng: &mut ChaCha8Rng, with_linear: bool) -> IsingModel {
        let mut m = IsingModel::new(n);
        for i in 0..n {
            if with_linear && rng.gen_bool(0.7) {
                m.add_linear(i, rng.gen_range(-1.0..1.0)).unwrap();
            }
            for j in i + 1..n {
                if rng.gen_bool(0.6) {
                    m.add_quadratic(i, j, rng.gen_range(-1.0..1.0)).unwrap();
                }
            }
        }
        m.set_offset(rng.gen_range(-2.0..2.0)).unwrap();
        m
    }

    /// Double loop over a dense coefficient table; independent of the sparse
    /// maps used by `energy`.
    fn dense_energy(n: usize, h: &[f64], j: &[Vec<f64>], offset: f64, x: &[i8]) -> f64 {
        let mut e = offset;
        for a in 0..n {
            e += h[a] * x[a] as f64;
            for b in 0..n {
                if a < b {
                    e += j[a][b] * x[a] as f64 * x[b] as f64;
                }
            }
        }
        e
    }

    #[test]
    fn empty_model_energy_is_zero() {
        let m = IsingModel::new(3);
        let c = SpinConfig::spins(vec![1, -1, 1]).unwrap();
        assert_eq!(m.energy(&c).unwrap(), 0.0);
    }

    #[test]
    fn single_term_energy() {
        let m = IsingModel::from_terms(1, [(0, 1.0)], [], 0.0).unwrap();
        assert_eq!(
            m.energy(&SpinConfig::spins(vec![-1]).unwrap()).unwrap(),
            -1.0
        );
    }

    #[test]
    fn energy_matches_dense_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4;
        let mut h = vec![0.0; n];
        let mut j = vec![vec![0.0; n]; n];
        let mut m = IsingModel::new(n);
        for a in 0..n {
            h[a] = rng.gen_range(-1.0..1.0);
            m.add_linear(a, h[a]).unwrap();
            for (b, jab) in j[a].iter_mut().enumerate().skip(a + 1) {
                *jab = rng.gen_range(-1.0..1.0);
                m.add_quadratic(a, b, *jab).unwrap();
            }
        }
        m.set_offset(0.3).unwrap();
        for idx in 0..16 {
            let c = SpinConfig::from_index(Domain::Ising, n, idx);
            let want = dense_energy(n, &h, &j, 0.3, c.values());
            assert!((m.energy(&c).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_rejects_mismatches() {
        let m = IsingModel::new(2);
        assert!(matches!(
            m.energy(&SpinConfig::spins(vec![1]).unwrap()),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            m.energy(&SpinConfig::bits(vec![1, 0]).unwrap()),
            Err(Error::Domain { .. })
        ));
        assert!(SpinConfig::spins(vec![0, 1]).is_err());
    }

    #[test]
    fn qubo_to_ising_single_variable() {
        let q = QuboModel::from_terms(1, [(0, 1.0)], [], 0.0).unwrap();
        let m = qubo_to_ising(&q).unwrap();
        assert_eq!(m.linear_coeff(0), 0.5);
        assert_eq!(m.offset(), 0.5);
        for s in [-1, 1] {
            let sc = SpinConfig::spins(vec![s]).unwrap();
            assert_eq!(
                m.energy(&sc).unwrap(),
                q.energy(&sc.convert(Domain::Qubo)).unwrap()
            );
        }
    }

    #[test]
    fn qubo_to_ising_product() {
        let q = QuboModel::from_terms(2, [], [(0, 1, 1.0)], 0.0).unwrap();
        let m = qubo_to_ising(&q).unwrap();
        assert_eq!(m.quadratic_coeff(0, 1), 0.25);
        assert_eq!(m.linear_coeff(0), 0.25);
        assert_eq!(m.linear_coeff(1), 0.25);
        assert_eq!(m.offset(), 0.25);
    }

    #[test]
    fn qubo_to_ising_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 5;
        let mut q = QuboModel::new(n);
        for i in 0..n {
            q.add_linear(i, rng.gen_range(-2.0..2.0)).unwrap();
            for j in i + 1..n {
                q.add_quadratic(i, j, rng.gen_range(-2.0..2.0)).unwrap();
            }
        }
        q.set_offset(1.25).unwrap();
        let m = qubo_to_ising(&q).unwrap();
        let back = ising_to_qubo(&m).unwrap();
        for idx in 0..32 {
            let x = SpinConfig::from_index(Domain::Qubo, n, idx);
            let s = x.convert(Domain::Ising);
            let eq = q.energy(&x).unwrap();
            assert!((m.energy(&s).unwrap() - eq).abs() <= 1e-12 * eq.abs().max(1.0));
            assert!((back.energy(&x).unwrap() - eq).abs() <= 1e-12 * eq.abs().max(1.0));
        }
    }

    #[test]
    fn homogenize_without_linear_is_identity() {
        let m = IsingModel::from_terms(3, [], [(0, 1, 1.0), (1, 2, -0.5)], 0.0).unwrap();
        let (h, z) = homogenize(&m);
        assert_eq!(h, m);
        assert_eq!(z, None);
    }

    #[test]
    fn homogenize_single_variable() {
        let m = IsingModel::from_terms(1, [(0, 0.7)], [], 0.0).unwrap();
        let (h, z) = homogenize(&m);
        assert_eq!(z, Some(1));
        assert_eq!(h.n(), 2);
        assert!(h.linear().is_empty());
        assert_eq!(h.quadratic().len(), 1);
        assert_eq!(h.quadratic_coeff(0, 1), 0.7);
    }

    #[test]
    fn homogenize_identity_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_ising(6, &mut rng, true);
        let (h, z) = homogenize(&m);
        assert_eq!(z, Some(6));
        for idx in 0..64 {
            let c = SpinConfig::from_index(Domain::Ising, 6, idx);
            let mut ext = c.values().to_vec();
            ext.push(1);
            assert!((h.energy_of(&ext) - m.energy(&c).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn plant_quadratic_only_signs() {
        let m = IsingModel::from_terms(2, [], [(0, 1, 1.0)], 0.0).unwrap();
        let x0 = SpinConfig::spins(vec![1, -1]).unwrap();
        let p = plant(&m, &x0, 1.0, 0.0).unwrap();
        assert_eq!(p.slack_index, None);
        assert_eq!(p.alpha2, 0.0);
        assert_eq!(p.base.linear_coeff(0), -1.0);
        assert_eq!(p.base.linear_coeff(1), 1.0);
    }

    #[test]
    fn plant_minimum_is_minus_n() {
        let n = 5;
        let m = IsingModel::new(n);
        let x0 = SpinConfig::spins(vec![1, -1, -1, 1, -1]).unwrap();
        let p = plant(&m, &x0, 1.0, 0.0).unwrap();
        let gs = brute_force_solve(&p.planting_terms()).unwrap();
        assert_eq!(gs.energy, -5.0);
        assert_eq!(gs.configs, vec![x0]);
    }

    #[test]
    fn plant_with_slack() {
        let m = IsingModel::from_terms(3, [(0, 0.4), (2, -0.1)], [(0, 1, 1.0)], 0.0).unwrap();
        let x0 = SpinConfig::spins(vec![1, 1, -1]).unwrap();
        let p = plant(&m, &x0, 0.35, 0.25).unwrap();
        assert_eq!(p.slack_index, Some(3));
        assert_eq!(p.base.linear_coeff(3), -0.25);
        assert_eq!(p.base.linear_coeff(2), 0.35);
        let gs = brute_force_solve(&p.planting_terms()).unwrap();
        assert_eq!(gs.configs, vec![p.initial_state()]);
    }

    #[test]
    fn plant_errors() {
        let m = IsingModel::from_terms(2, [], [(0, 1, 1.0)], 0.0).unwrap();
        let x0 = SpinConfig::spins(vec![1, -1]).unwrap();
        assert!(plant(&m, &x0, -0.1, 0.0).is_err());
        assert!(plant(&m, &x0, 0.1, 0.2).is_err());
        assert!(plant(&m, &SpinConfig::spins(vec![1]).unwrap(), 0.1, 0.0).is_err());
    }

    #[test]
    fn brute_force_single() {
        let m = IsingModel::from_terms(1, [(0, 1.0)], [], 0.0).unwrap();
        let gs = brute_force_solve(&m).unwrap();
        assert_eq!(gs.energy, -1.0);
        assert_eq!(gs.configs, vec![SpinConfig::spins(vec![-1]).unwrap()]);
    }

    #[test]
    fn brute_force_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_ising(4, &mut rng, true);
            let gs = brute_force_solve(&m).unwrap();
            let all: Vec<f64> = (0..16)
                .map(|i| {
                    m.energy(&SpinConfig::from_index(Domain::Ising, 4, i))
                        .unwrap()
                })
                .collect();
            let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(gs.energy, min);
            for c in &gs.configs {
                assert_eq!(m.energy(c).unwrap(), min);
            }
        }
    }

    #[test]
    fn brute_force_limit() {
        let m = IsingModel::new(30);
        assert!(matches!(brute_force_solve(&m), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn json_roundtrip_and_key_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_ising(5, &mut rng, true);
        let s = m.to_json().unwrap();
        assert_eq!(IsingModel::from_json(&s).unwrap(), m);
        let bad = r#"{"n":2,"domain":"ising","linear":[],"quadratic":[[1,0,1.0]],"offset":0}"#;
        assert!(IsingModel::from_json(bad).is_err());
        assert!(QuboModel::from_json(&s).is_err());
    }
}
