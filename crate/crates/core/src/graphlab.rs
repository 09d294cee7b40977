//! Undirected simple graphs, their Laplacians, and ρ-versatility.
//!
//! A connected graph is ρ-versatile for a simple Laplacian eigenpair (λ, ν), λ > 0,
//! when `Σᵢ νᵢ^ℓ ≠ 0` for ℓ = 2..=ρ+1. The generators here build graphs that are
//! versatile by construction: complements of two-component graphs with unequal
//! component sizes, and "hub" graphs with one dominant degree.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{eigendecompose, Matrix, NumError, Spectrum, Tolerances};

/// Threshold factor for declaring a power sum nonzero: `|Σν^ℓ| > POWER_SUM_EPS · N`.
pub const POWER_SUM_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({0},{0}) is a self-loop")]
    SelfLoop(usize),
    #[error("edge ({0},{1}) listed twice")]
    DuplicateEdge(usize, usize),
    #[error("edge ({i},{j}) out of range for {n} nodes")]
    OutOfRange { i: usize, j: usize, n: usize },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("component sizes must differ (s = t = {0})")]
    EqualComponents(usize),
    #[error("infeasible hub parameters: {0}")]
    Infeasible(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("predicted eigenpair failed numerical verification (residual {residual:.3e})")]
    PredictionFailed { residual: f64 },
    #[error(transparent)]
    Num(#[from] NumError),
}

impl GraphError {
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Num(e) => e.is_validation(),
            Self::PredictionFailed { .. } => false,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        Graph::new(raw.n, raw.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph { n: g.n, edges: g.edges.iter().map(|&(i, j)| [i, j]).collect() }
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            if i >= n || j >= n {
                return Err(GraphError::OutOfRange { i, j, n });
            }
            let e = (i.min(j), i.max(j));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        Ok(Self { n, edges: set })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: BTreeSet::new() }
    }

    pub fn path(n: usize) -> Self {
        Self { n, edges: (1..n).map(|i| (i - 1, i)).collect() }
    }

    pub fn complete(n: usize) -> Self {
        Self { n, edges: (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect() }
    }

    /// Star with hub 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self { n: leaves + 1, edges: (1..=leaves).map(|j| (0, j)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// Adds an edge; returns false if it was already present or invalid.
    pub fn add_edge(&mut self, i: usize, j: usize) -> bool {
        i != j && i < self.n && j < self.n && self.edges.insert((i.min(j), i.max(j)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(i, j) in &self.edges {
            d[i] += 1;
            d[j] += 1;
        }
        d
    }

    /// Nodes of `other` are appended after the nodes of `self`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(i, j)| (i + off, j + off)));
        Graph { n: self.n + other.n, edges }
    }

    pub fn complement(&self) -> Graph {
        let edges = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .filter(|e| !self.edges.contains(e))
            .collect();
        Graph { n: self.n, edges }
    }

    /// Connected components, each sorted, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j) in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for v in 0..self.n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }
}

/// `L = K − W`.
pub fn laplacian(g: &Graph) -> Matrix {
    let mut l = Matrix::zeros(g.n, g.n);
    for (i, j) in g.edges() {
        l[(i, j)] = -1.0;
        l[(j, i)] = -1.0;
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
    }
    l
}

/// Ascending Laplacian spectrum with orthonormal eigenvectors.
pub fn laplacian_spectrum(g: &Graph, tol: &Tolerances) -> Result<Spectrum, GraphError> {
    Ok(eigendecompose(&laplacian(g), true, tol)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenChoice {
    Largest,
    /// Position in the ascending spectrum (0 is the zero eigenvalue).
    Index(usize),
}

impl EigenChoice {
    pub fn resolve(self, n: usize) -> Result<usize, GraphError> {
        match self {
            Self::Largest if n > 0 => Ok(n - 1),
            Self::Index(k) if k < n => Ok(k),
            _ => Err(GraphError::Invalid(format!("eigenvalue choice {self:?} out of range for {n} nodes"))),
        }
    }
}

/// Scales to `‖ν‖∞ = 1` and flips the sign so the largest-magnitude entry is positive.
pub fn normalize_eigenvector(v: &[f64]) -> Vec<f64> {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return v.to_vec();
    }
    let lead = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-9)).copied().unwrap_or(max);
    let s = lead.signum() / max;
    v.iter().map(|x| x * s).collect()
}

/// `Σᵢ νᵢ^ℓ` for ℓ = 2..=ρ+1.
pub fn power_sums(v: &[f64], rho: usize) -> Vec<f64> {
    (2..=rho + 1).map(|l| v.iter().map(|x| x.powi(l as i32)).sum()).collect()
}

/// Whether eigenvalue `idx` of an ascending real spectrum is isolated.
pub fn is_simple(values: &[f64], idx: usize, gap: f64) -> bool {
    let lam = values[idx];
    let nearest = values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != idx)
        .map(|(_, &x)| (x - lam).abs())
        .fold(f64::INFINITY, f64::min);
    nearest > gap * lam.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersatilityReport {
    pub rho: usize,
    pub eigen_index: usize,
    pub eigenvalue: f64,
    pub simple: bool,
    /// ∞-norm normalized, largest-magnitude entry positive.
    pub eigenvector: Vec<f64>,
    /// `Σν^ℓ` for ℓ = 2..=ρ+1.
    pub power_sums: Vec<f64>,
    pub verdict: bool,
    pub connected: bool,
    /// First ℓ whose power sum is below threshold.
    pub failed_at: Option<usize>,
    pub reason: Option<String>,
}

pub fn check_versatile(g: &Graph, rho: usize, which: EigenChoice, tol: &Tolerances) -> Result<VersatilityReport, GraphError> {
    if rho == 0 {
        return Err(GraphError::Invalid("rho must be at least 1".into()));
    }
    let idx = which.resolve(g.n)?;
    let spec = laplacian_spectrum(g, tol)?;
    let values = spec.real_values();
    let vectors = spec.eigenvectors.as_ref().expect("symmetric path");
    let eigenvalue = values[idx];
    let eigenvector = normalize_eigenvector(&vectors[idx]);
    let sums = power_sums(&eigenvector, rho);
    let connected = g.is_connected();
    let simple = is_simple(&values, idx, tol.gap);
    let thr = POWER_SUM_EPS * g.n as f64;
    let failed_at = sums.iter().position(|s| s.abs() <= thr).map(|k| k + 2);

    let reason = if !connected {
        Some(format!("graph is disconnected ({} components)", g.components().len()))
    } else if eigenvalue <= spec.zero_threshold {
        Some("chosen eigenvalue is zero".to_string())
    } else if !simple {
        Some(format!("eigenvalue {eigenvalue} is not simple"))
    } else {
        failed_at.map(|l| format!("power sum vanishes at l = {l}"))
    };
    Ok(VersatilityReport {
        rho,
        eigen_index: idx,
        eigenvalue,
        simple,
        eigenvector,
        power_sums: sums,
        verdict: reason.is_none(),
        connected,
        failed_at,
        reason,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoComponentDesign {
    pub graph: Graph,
    pub eigenvalue: f64,
    /// Integer pattern: `t` on the first component, `−s` on the second.
    pub eigenvector: Vec<f64>,
    /// `‖Lν − λν‖∞ / ‖ν‖∞` from the verification step.
    pub residual: f64,
}

/// Complement of the disjoint union of two connected graphs with sizes s ≠ t.
///
/// The largest eigenvalue of the result is s + t and simple; each node's entry in its
/// eigenvector is the size of the *other* component, negated on the second one.
pub fn gen_two_component_versatile(first: &Graph, second: &Graph, tol: &Tolerances) -> Result<TwoComponentDesign, GraphError> {
    let (s, t) = (first.n, second.n);
    if s == 0 || t == 0 {
        return Err(GraphError::Invalid("components must be non-empty".into()));
    }
    if s == t {
        return Err(GraphError::EqualComponents(s));
    }
    for inner in [first, second] {
        if !inner.is_connected() {
            return Err(GraphError::Disconnected { components: inner.components().len() });
        }
    }
    let graph = first.disjoint_union(second).complement();
    let eigenvalue = (s + t) as f64;
    let mut eigenvector = vec![t as f64; s];
    eigenvector.extend(std::iter::repeat(-(s as f64)).take(t));

    let l = laplacian(&graph);
    let lv = l.matvec(&eigenvector);
    let scale = s.max(t) as f64;
    let residual = lv.iter().zip(&eigenvector).map(|(a, b)| (a - eigenvalue * b).abs()).fold(0.0, f64::max) / scale;
    let spec = laplacian_spectrum(&graph, tol)?;
    let values = spec.real_values();
    let top = values.len() - 1;
    let ok = residual <= 1e-12
        && (values[top] - eigenvalue).abs() <= 1e-8 * eigenvalue
        && is_simple(&values, top, tol.gap);
    if !ok {
        return Err(GraphError::PredictionFailed { residual });
    }
    Ok(TwoComponentDesign { graph, eigenvalue, eigenvector, residual })
}

/// Hub-dominated graph on N+1 nodes: node 0 has degree `c`, all others degree ≤ `r`.
///
/// Peripheral edges are drawn Erdős–Rényi style under a degree cap of `r − 1`; the hub
/// then attaches to one node of every peripheral component and to random others until
/// it has `c` neighbours.
pub fn gen_hub_graph(n: usize, r: usize, c: usize, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 || r == 0 {
        return Err(GraphError::Infeasible("N and r must be positive".into()));
    }
    let cbrt = (n as f64).cbrt();
    let slack = 1e-9;
    if r as f64 > n as f64 / (cbrt + 1.0) + slack {
        return Err(GraphError::Infeasible(format!("r = {r} exceeds N/(N^(1/3)+1) = {:.4}", n as f64 / (cbrt + 1.0))));
    }
    if (c as f64) + slack < (cbrt + 1.0) * r as f64 {
        return Err(GraphError::Infeasible(format!(
            "C = {c} below (N^(1/3)+1)·r = {:.4}; (C+1)/r = {:.4}",
            (cbrt + 1.0) * r as f64,
            (c + 1) as f64 / r as f64
        )));
    }
    if c > n {
        return Err(GraphError::Infeasible(format!("C = {c} exceeds N = {n}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = r - 1;
    let mut g = Graph::empty(n + 1);
    let mut deg = vec![0usize; n + 1];
    if cap > 0 && n > 1 {
        let attempts = n * cap * 2;
        for _ in 0..attempts {
            let i = rng.gen_range(1..=n);
            let j = rng.gen_range(1..=n);
            if i != j && deg[i] < cap && deg[j] < cap && g.add_edge(i, j) {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }

    // Peripheral components (excluding the hub, which is still isolated).
    let mut comps: Vec<Vec<usize>> = g.components().into_iter().filter(|comp| comp[0] != 0).collect();
    // Merge components through free-degree nodes while there are more than c of them.
    while comps.len() > c {
        let b = comps.pop().expect("non-empty");
        let a_idx = comps.iter().position(|comp| comp.iter().any(|&v| deg[v] < cap));
        let (Some(ai), Some(&vb)) = (a_idx, b.iter().find(|&&v| deg[v] < cap)) else {
            return Err(GraphError::Infeasible(format!(
                "{} peripheral components cannot be covered by C = {c} hub edges under degree cap {r}",
                comps.len() + 1
            )));
        };
        let va = *comps[ai].iter().find(|&&v| deg[v] < cap).expect("checked");
        g.add_edge(va, vb);
        deg[va] += 1;
        deg[vb] += 1;
        comps[ai].extend(b);
    }

    let mut chosen = BTreeSet::new();
    for comp in &comps {
        chosen.insert(*comp.choose(&mut rng).expect("non-empty component"));
    }
    let mut rest: Vec<usize> = (1..=n).filter(|v| !chosen.contains(v)).collect();
    rest.shuffle(&mut rng);
    chosen.extend(rest.into_iter().take(c - chosen.len()));
    for v in chosen {
        g.add_edge(0, v);
    }
    debug_assert!(g.is_connected());
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubHypothesis {
    pub hub: usize,
    /// Hub degree.
    pub c: usize,
    /// Max degree over the other nodes (at least 1).
    pub r: usize,
    /// Number of non-hub nodes.
    pub n_peripheral: usize,
}

impl HubHypothesis {
    /// `(C+1)/r > ∛N + 1`.
    pub fn degree_condition(&self) -> bool {
        (self.c + 1) as f64 / self.r as f64 > (self.n_peripheral as f64).cbrt() + 1.0
    }
}

/// Unique strict-maximum-degree node, with `r` the largest remaining degree.
pub fn hub_structure(g: &Graph) -> Option<HubHypothesis> {
    let d = g.degrees();
    let c = *d.iter().max()?;
    let hubs: Vec<usize> = (0..g.n).filter(|&i| d[i] == c).collect();
    if hubs.len() != 1 {
        return None;
    }
    let hub = hubs[0];
    let r = (0..g.n).filter(|&i| i != hub).map(|i| d[i]).max().unwrap_or(0).max(1);
    (r < c).then_some(HubHypothesis { hub, c, r, n_peripheral: g.n - 1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeVersatilityReport {
    pub report: VersatilityReport,
    pub hypothesis: Option<HubHypothesis>,
    pub hypothesis_holds: bool,
    /// `λ_max ≥ C + 1`, checked when the hypothesis holds.
    pub lambda_bound_ok: Option<bool>,
    pub note: Option<String>,
}

/// Versatility for the largest eigenvalue, certified by the degree condition when it holds.
pub fn check_degree_versatility(g: &Graph, rho: usize, tol: &Tolerances) -> Result<DegreeVersatilityReport, GraphError> {
    let report = check_versatile(g, rho, EigenChoice::Largest, tol)?;
    let hypothesis = hub_structure(g);
    let holds = hypothesis.as_ref().is_some_and(|h| h.degree_condition());
    let lambda_bound_ok = hypothesis
        .as_ref()
        .filter(|_| holds)
        .map(|h| report.eigenvalue >= (h.c + 1) as f64 - 1e-9 * report.eigenvalue.max(1.0));
    let note = if holds {
        (!report.verdict).then(|| "degree condition holds but numerical check disagrees".to_string())
    } else {
        Some("degree condition does not hold; verdict from direct check".to_string())
    };
    Ok(DegreeVersatilityReport { report, hypothesis, hypothesis_holds: holds, lambda_bound_ok, note })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    /// Second-largest Laplacian eigenvalue.
    pub kappa: f64,
    /// Largest Laplacian eigenvalue.
    pub mu: f64,
    pub ratio: f64,
    /// `min((2r+1)/(C+1), 3r/C)`.
    pub bound: f64,
    pub c: usize,
    pub r: usize,
}

pub fn spectral_gap_bound(g: &Graph, tol: &Tolerances) -> Result<GapBound, GraphError> {
    if g.n < 2 {
        return Err(GraphError::Hypothesis("need at least two nodes".into()));
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected { components: g.components().len() });
    }
    let (c, r) = if g.n == 2 {
        (1, 1)
    } else {
        let h = hub_structure(g)
            .ok_or_else(|| GraphError::Hypothesis("no unique maximum-degree node with r < C".into()))?;
        (h.c, h.r)
    };
    let values = laplacian_spectrum(g, tol)?.real_values();
    let mu = values[g.n - 1];
    let kappa = if g.n == 2 { 0.0 } else { values[g.n - 2].max(0.0) };
    let ratio = kappa / mu;
    let bound = ((2 * r + 1) as f64 / (c + 1) as f64).min(3.0 * r as f64 / c as f64);
    if ratio > bound + 1e-12 {
        return Err(GraphError::Hypothesis(format!("gap ratio {ratio} exceeds bound {bound}")));
    }
    Ok(GapBound { kappa, mu, ratio, bound, c, r })
}
