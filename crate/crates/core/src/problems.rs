//! Weighted Erdős–Rényi instances and their Max-Cut / Max-Clique models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Domain, IsingModel, QuboModel, SpinConfig, DEFAULT_EXHAUSTIVE_LIMIT};

/// Edge weights drawn from the open interval `(-1, 1)`.
pub const MAXCUT_EDGE_RANGE: (f64, f64) = (-1.0, 1.0);
/// Vertex weights drawn from the open interval `(0.001, 1)`.
pub const MAXCLIQUE_VERTEX_RANGE: (f64, f64) = (0.001, 1.0);
/// Largest supported graph.
pub const MAX_VERTICES: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: Option<f64>,
}

impl Serialize for WeightedGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|e| (e.u, e.v, e.w)).collect(),
            vertex_weights: self.vertex_weights.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(d)?;
        let edges = raw
            .edges
            .into_iter()
            .map(|(u, v, w)| Edge { u, v, w })
            .collect();
        WeightedGraph::new(raw.n, edges, raw.vertex_weights).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, Option<f64>)>,
    vertex_weights: Option<Vec<f64>>,
}

/// Undirected simple graph with optional edge and vertex weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    vertex_weights: Option<Vec<f64>>,
    adj: Vec<u128>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>, vertex_weights: Option<Vec<f64>>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::TooLarge {
                what: "graph",
                n,
                limit: MAX_VERTICES,
            });
        }
        let mut adj = vec![0u128; n];
        for e in &edges {
            if e.u >= e.v {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) must satisfy u < v",
                    e.u, e.v
                )));
            }
            if e.v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) out of range",
                    e.u, e.v
                )));
            }
            if adj[e.u] >> e.v & 1 == 1 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    e.u, e.v
                )));
            }
            if matches!(e.w, Some(w) if !w.is_finite()) {
                return Err(Error::InvalidParameter("non-finite edge weight".into()));
            }
            adj[e.u] |= 1 << e.v;
            adj[e.v] |= 1 << e.u;
        }
        if let Some(w) = &vertex_weights {
            if w.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: w.len(),
                });
            }
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite vertex weight".into()));
            }
        }
        Ok(Self {
            n,
            edges,
            vertex_weights,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_weights(&self) -> Option<&[f64]> {
        self.vertex_weights.as_deref()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u] >> v & 1 == 1
    }

    /// Neighbor bitmask of `u`.
    pub fn neighbor_mask(&self, u: usize) -> u128 {
        self.adj[u]
    }

    pub fn edge_weights_present(&self) -> bool {
        self.edges.iter().all(|e| e.w.is_some())
    }

    /// Sum of all edge weights.
    pub fn total_edge_weight(&self) -> Result<f64> {
        self.edges
            .iter()
            .map(|e| e.w.ok_or_else(missing_edge_weights))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn missing_edge_weights() -> Error {
    Error::InvalidParameter("graph has no edge weights".into())
}

fn missing_vertex_weights() -> Error {
    Error::InvalidParameter("graph has no vertex weights".into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    MaxCut,
    MaxClique,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemKind::MaxCut => f.write_str("maxcut"),
            ProblemKind::MaxClique => f.write_str("maxclique"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub graph: WeightedGraph,
    pub kind: ProblemKind,
    pub density: f64,
    pub seed: u64,
}

impl ProblemInstance {
    /// Generates an instance with the standard weight ranges for `kind`.
    pub fn generate(kind: ProblemKind, n: usize, density: f64, seed: u64) -> Result<Self> {
        let graph = match kind {
            ProblemKind::MaxCut => gen_er_graph(n, density, Some(MAXCUT_EDGE_RANGE), None, seed)?,
            ProblemKind::MaxClique => {
                gen_er_graph(n, density, None, Some(MAXCLIQUE_VERTEX_RANGE), seed)?
            }
        };
        let inst = Self {
            graph,
            kind,
            density,
            seed,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ProblemKind::MaxCut if !self.graph.edge_weights_present() => {
                Err(missing_edge_weights())
            }
            ProblemKind::MaxClique if self.graph.vertex_weights.is_none() => {
                Err(missing_vertex_weights())
            }
            _ => Ok(()),
        }
    }

    /// Ising model whose minimizers solve the instance. Max-Clique goes
    /// through its QUBO form.
    pub fn ising(&self) -> Result<IsingModel> {
        match self.kind {
            ProblemKind::MaxCut => maxcut_ising(&self.graph),
            ProblemKind::MaxClique => crate::ising::qubo_to_ising(&maxclique_qubo(&self.graph)?),
        }
    }

    /// Objective value (cut weight, or clique weight) of a spin
    /// configuration. For cliques, `+1` selects a vertex; `None` when the
    /// selection is not a clique.
    pub fn objective(&self, config: &SpinConfig) -> Result<Option<f64>> {
        match self.kind {
            ProblemKind::MaxCut => cut_value(&self.graph, config).map(Some),
            ProblemKind::MaxClique => {
                let (ok, w) = clique_check(&self.graph, &config.convert(Domain::Qubo))?;
                Ok(ok.then_some(w))
            }
        }
    }
}

fn open_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    loop {
        let x = rng.gen_range(lo..hi);
        if x > lo {
            return x;
        }
    }
}

/// Erdős–Rényi graph `G(n, p)` with i.i.d. uniform weights on open ranges.
///
/// Vertex weights are drawn first, then pairs `(u, v)` in lexicographic
/// order, each with one Bernoulli draw followed by its weight draw.
pub fn gen_er_graph(
    n: usize,
    p: f64,
    edge_w: Option<(f64, f64)>,
    vertex_w: Option<(f64, f64)>,
    seed: u64,
) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {p} outside [0, 1]"
        )));
    }
    for (lo, hi) in edge_w.iter().chain(vertex_w.iter()) {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "degenerate weight range ({lo}, {hi})"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertex_weights = vertex_w.map(|r| (0..n).map(|_| open_uniform(&mut rng, r)).collect());
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                let w = edge_w.map(|r| open_uniform(&mut rng, r));
                edges.push(Edge { u, v, w });
            }
        }
    }
    WeightedGraph::new(n, edges, vertex_weights)
}

/// `sum_{(i,j) in E} w_ij x_i x_j`; no linear terms, zero offset.
pub fn maxcut_ising(g: &WeightedGraph) -> Result<IsingModel> {
    let mut m = IsingModel::new(g.n);
    for e in &g.edges {
        m.add_quadratic(e.u, e.v, e.w.ok_or_else(missing_edge_weights)?)?;
    }
    Ok(m)
}

/// Total weight of edges whose endpoints carry different spins.
pub fn cut_value(g: &WeightedGraph, config: &SpinConfig) -> Result<f64> {
    if config.domain() != Domain::Ising {
        return Err(Error::Domain {
            expected: Domain::Ising,
            got: config.domain(),
        });
    }
    if config.len() != g.n {
        return Err(Error::Dimension {
            expected: g.n,
            got: config.len(),
        });
    }
    let x = config.values();
    let mut total = 0.0;
    for e in &g.edges {
        if x[e.u] != x[e.v] {
            total += e.w.ok_or_else(missing_edge_weights)?;
        }
    }
    Ok(total)
}

/// `-sum_i w_i x_i + 2 sum max(w_i, w_j) x_i x_j`, with the quadratic
/// penalty on every pair that is NOT an edge, so that selecting two
/// non-adjacent vertices always costs more than it gains.
pub fn maxclique_qubo(g: &WeightedGraph) -> Result<QuboModel> {
    let w = g
        .vertex_weights
        .as_ref()
        .ok_or_else(missing_vertex_weights)?;
    if let Some(bad) = w.iter().find(|&&x| x <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "vertex weights must be positive, got {bad}"
        )));
    }
    let mut q = QuboModel::new(g.n);
    for (i, &wi) in w.iter().enumerate() {
        q.add_linear(i, -wi)?;
    }
    for i in 0..g.n {
        for j in i + 1..g.n {
            if !g.has_edge(i, j) {
                q.add_quadratic(i, j, 2.0 * w[i].max(w[j]))?;
            }
        }
    }
    Ok(q)
}

/// Whether the selected vertices (`1` entries) form a clique, and their total
/// weight. Unweighted graphs count each vertex as 1.
pub fn clique_check(g: &WeightedGraph, subset: &SpinConfig) -> Result<(bool, f64)> {
    if subset.domain() != Domain::Qubo {
        return Err(Error::Domain {
            expected: Domain::Qubo,
            got: subset.domain(),
        });
    }
    if subset.len() != g.n {
        return Err(Error::Dimension {
            expected: g.n,
            got: subset.len(),
        });
    }
    let selected: Vec<usize> = (0..g.n).filter(|&i| subset.values()[i] == 1).collect();
    let weight = selected.iter().map(|&i| vertex_weight(g, i)).sum();
    let mut is_clique = true;
    'outer: for (a, &i) in selected.iter().enumerate() {
        for &j in &selected[a + 1..] {
            if !g.has_edge(i, j) {
                is_clique = false;
                break 'outer;
            }
        }
    }
    Ok((is_clique, weight))
}

fn vertex_weight(g: &WeightedGraph, i: usize) -> f64 {
    g.vertex_weights.as_ref().map_or(1.0, |w| w[i])
}

/// Maximum-weight cliques of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxClique {
    pub weight: f64,
    /// Every maximizing subset as a `0/1` configuration.
    pub subsets: Vec<SpinConfig>,
}

/// Exhaustive search over cliques, extending only by common neighbors.
pub fn brute_force_maxclique(g: &WeightedGraph) -> Result<MaxClique> {
    if g.n > DEFAULT_EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "clique enumeration",
            n: g.n,
            limit: DEFAULT_EXHAUSTIVE_LIMIT,
        });
    }
    let w: Vec<f64> = (0..g.n).map(|i| vertex_weight(g, i)).collect();
    let tol = 1e-10 * (1.0 + w.iter().map(|x| x.abs()).sum::<f64>());
    let mut best = (0.0_f64, vec![0u64]);

    fn extend(
        g: &WeightedGraph,
        w: &[f64],
        tol: f64,
        set: u64,
        weight: f64,
        cand: u64,
        best: &mut (f64, Vec<u64>),
    ) {
        if weight > best.0 + tol {
            *best = (weight, vec![set]);
        } else if (weight - best.0).abs() <= tol {
            best.1.push(set);
        }
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            // only extend with higher-numbered vertices so each clique is visited once
            extend(
                g,
                w,
                tol,
                set | 1 << v,
                weight + w[v],
                rest & g.adj[v] as u64,
                best,
            );
        }
    }

    let all = (1u64 << g.n) - 1;
    extend(g, &w, tol, 0, 0.0, all, &mut best);
    let mut subsets: Vec<SpinConfig> = best
        .1
        .into_iter()
        .map(|mask| SpinConfig::from_index(Domain::Qubo, g.n, mask))
        .collect();
    subsets.sort();
    Ok(MaxClique {
        weight: best.0,
        subsets,
    })
}

/// Maximum cut by enumerating the `2^(n-1)` partitions with the last vertex
/// fixed to `+1`. Returns the weight and every maximizing configuration
/// (both orientations).
pub fn brute_force_maxcut(g: &WeightedGraph) -> Result<(f64, Vec<SpinConfig>)> {
    if g.n > DEFAULT_EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "cut enumeration",
            n: g.n,
            limit: DEFAULT_EXHAUSTIVE_LIMIT,
        });
    }
    let half: u64 = 1 << (g.n - 1);
    let mut best = f64::NEG_INFINITY;
    let mut vals = Vec::with_capacity(half as usize);
    for idx in 0..half {
        let c = SpinConfig::from_index(Domain::Ising, g.n, idx);
        let v = cut_value(g, &c)?;
        best = best.max(v);
        vals.push((idx, v));
    }
    let tol = 1e-10 * best.abs().max(1.0);
    let full = (1u64 << g.n) - 1;
    let mut configs = Vec::new();
    for (idx, v) in vals {
        if v >= best - tol {
            configs.push(SpinConfig::from_index(Domain::Ising, g.n, idx));
            configs.push(SpinConfig::from_index(Domain::Ising, g.n, idx ^ full));
        }
    }
    configs.sort();
    Ok((best, configs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{brute_force_solve, qubo_to_ising};

    fn unit(n: usize, pairs: &[(usize, usize)]) -> WeightedGraph {
        let edges = pairs
            .iter()
            .map(|&(u, v)| Edge { u, v, w: Some(1.0) })
            .collect();
        WeightedGraph::new(n, edges, None).unwrap()
    }

    #[test]
    fn density_extremes() {
        assert!(gen_er_graph(5, 0.0, Some((-1.0, 1.0)), None, 1)
            .unwrap()
            .edges()
            .is_empty());
        assert_eq!(
            gen_er_graph(4, 1.0, Some((-1.0, 1.0)), None, 1)
                .unwrap()
                .edges()
                .len(),
            6
        );
    }

    #[test]
    fn generator_rejects_bad_input() {
        assert!(gen_er_graph(4, 1.5, None, None, 0).is_err());
        assert!(gen_er_graph(0, 0.5, None, None, 0).is_err());
        assert!(gen_er_graph(4, 0.5, Some((1.0, 1.0)), None, 0).is_err());
    }

    #[test]
    fn weights_are_in_open_range() {
        let g = gen_er_graph(30, 0.8, Some((-1.0, 1.0)), Some((0.001, 1.0)), 3).unwrap();
        assert!(g
            .edges()
            .iter()
            .all(|e| e.w.unwrap() > -1.0 && e.w.unwrap() < 1.0));
        assert!(g
            .vertex_weights()
            .unwrap()
            .iter()
            .all(|&w| w > 0.001 && w < 1.0));
    }

    #[test]
    fn triangle_maxcut() {
        let g = unit(3, &[(0, 1), (0, 2), (1, 2)]);
        let m = maxcut_ising(&g).unwrap();
        assert_eq!(m.quadratic().len(), 3);
        assert_eq!(brute_force_solve(&m).unwrap().energy, -1.0);
    }

    #[test]
    fn single_edge_cut() {
        let g = WeightedGraph::new(
            2,
            vec![Edge {
                u: 0,
                v: 1,
                w: Some(0.7),
            }],
            None,
        )
        .unwrap();
        let opp = SpinConfig::spins(vec![1, -1]).unwrap();
        assert_eq!(cut_value(&g, &opp).unwrap(), 0.7);
        assert_eq!(
            cut_value(&g, &SpinConfig::spins(vec![1, 1]).unwrap()).unwrap(),
            0.0
        );
        let gs = brute_force_solve(&maxcut_ising(&g).unwrap()).unwrap();
        assert_eq!(gs.energy, -0.7);
        assert!(gs.configs.iter().all(|c| c.values()[0] != c.values()[1]));
    }

    #[test]
    fn maxcut_requires_weights() {
        let g = WeightedGraph::new(
            2,
            vec![Edge {
                u: 0,
                v: 1,
                w: None,
            }],
            None,
        )
        .unwrap();
        assert!(maxcut_ising(&g).is_err());
    }

    #[test]
    fn clique_k3() {
        let g = WeightedGraph::new(
            3,
            vec![
                Edge {
                    u: 0,
                    v: 1,
                    w: None,
                },
                Edge {
                    u: 0,
                    v: 2,
                    w: None,
                },
                Edge {
                    u: 1,
                    v: 2,
                    w: None,
                },
            ],
            Some(vec![0.5, 0.6, 0.7]),
        )
        .unwrap();
        let gs = brute_force_solve(&maxclique_qubo(&g).unwrap()).unwrap();
        assert!((gs.energy + 1.8).abs() < 1e-12);
        assert_eq!(gs.configs, vec![SpinConfig::bits(vec![1, 1, 1]).unwrap()]);
    }

    #[test]
    fn clique_on_empty_graph_selects_one_vertex() {
        let g = WeightedGraph::new(4, vec![], Some(vec![0.5; 4])).unwrap();
        let gs = brute_force_solve(&maxclique_qubo(&g).unwrap()).unwrap();
        assert_eq!(gs.configs.len(), 4);
        for c in &gs.configs {
            assert_eq!(c.values().iter().filter(|&&v| v == 1).count(), 1);
        }
        let q = maxclique_qubo(&g).unwrap();
        assert_eq!(q.quadratic_coeff(0, 1), 1.0);
    }

    #[test]
    fn clique_rejects_nonpositive_weight() {
        let g = WeightedGraph::new(2, vec![], Some(vec![0.5, 0.0])).unwrap();
        assert!(maxclique_qubo(&g).is_err());
    }

    #[test]
    fn clique_check_cases() {
        let g = WeightedGraph::new(
            3,
            vec![Edge {
                u: 0,
                v: 1,
                w: None,
            }],
            Some(vec![0.2, 0.3, 0.4]),
        )
        .unwrap();
        assert_eq!(
            clique_check(&g, &SpinConfig::bits(vec![0, 0, 0]).unwrap()).unwrap(),
            (true, 0.0)
        );
        let (ok, w) = clique_check(&g, &SpinConfig::bits(vec![1, 0, 1]).unwrap()).unwrap();
        assert!(!ok);
        assert!((w - 0.6).abs() < 1e-15);
        assert!(
            clique_check(&g, &SpinConfig::bits(vec![1, 1, 0]).unwrap())
                .unwrap()
                .0
        );
    }

    #[test]
    fn star_graph_clique() {
        let edges = (1..5).map(|v| Edge { u: 0, v, w: None }).collect();
        let g = WeightedGraph::new(5, edges, Some(vec![0.1, 0.3, 0.9, 0.2, 0.4])).unwrap();
        let mc = brute_force_maxclique(&g).unwrap();
        assert!((mc.weight - 1.0).abs() < 1e-12);
        assert_eq!(
            mc.subsets,
            vec![SpinConfig::bits(vec![1, 0, 1, 0, 0]).unwrap()]
        );
    }

    #[test]
    fn complete_graph_clique() {
        let g = gen_er_graph(6, 1.0, None, Some((0.001, 1.0)), 9).unwrap();
        let mc = brute_force_maxclique(&g).unwrap();
        let total: f64 = g.vertex_weights().unwrap().iter().sum();
        assert!((mc.weight - total).abs() < 1e-12);
        assert_eq!(mc.subsets, vec![SpinConfig::bits(vec![1; 6]).unwrap()]);
    }

    #[test]
    fn clique_qubo_agrees_with_enumeration() {
        for seed in 0..20 {
            let g = gen_er_graph(10, 0.5, None, Some(MAXCLIQUE_VERTEX_RANGE), seed).unwrap();
            let q = maxclique_qubo(&g).unwrap();
            let gs = brute_force_solve(&q).unwrap();
            let mc = brute_force_maxclique(&g).unwrap();
            assert!((gs.energy + mc.weight).abs() < 1e-9);
            assert_eq!(gs.configs, mc.subsets);
            let via_ising = brute_force_solve(&qubo_to_ising(&q).unwrap()).unwrap();
            assert!((via_ising.energy - gs.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn graph_json_roundtrip() {
        let g = gen_er_graph(7, 0.5, Some((-1.0, 1.0)), Some((0.001, 1.0)), 4).unwrap();
        let s = g.to_json().unwrap();
        assert_eq!(WeightedGraph::from_json(&s).unwrap(), g);
        assert!(
            WeightedGraph::from_json(r#"{"n":2,"edges":[[1,0,0.5]],"vertex_weights":null}"#)
                .is_err()
        );
        assert!(WeightedGraph::from_json(
            r#"{"n":2,"edges":[[0,1,0.5],[0,1,0.2]],"vertex_weights":null}"#
        )
        .is_err());
    }

    #[test]
    fn instance_objectives() {
        let inst = ProblemInstance::generate(ProblemKind::MaxClique, 6, 0.5, 2).unwrap();
        let none = SpinConfig::spins(vec![-1; 6]).unwrap();
        assert_eq!(inst.objective(&none).unwrap(), Some(0.0));
        let cut = ProblemInstance::generate(ProblemKind::MaxCut, 6, 0.5, 2).unwrap();
        assert_eq!(cut.objective(&none).unwrap(), Some(0.0));
    }
}
