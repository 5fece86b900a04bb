//! Time-varying communication digraphs and node-activity processes.
//!
//! A [`GraphProcess`] yields one digraph per round; an edge `(i, j)` means
//! node `i` can transmit to node `j` in that round. The consensus loop never
//! needs any single round's graph to be connected; it only needs the union
//! over a finite window of rounds to be strongly connected, which is exactly
//! what [`union_graph`] plus [`is_strongly_connected`] measure.
//!
//! Sampling is deterministic: the graph for `(seed, t)` is a pure function
//! computed from a dedicated ChaCha stream (see [`crate::seed`]), with a
//! fixed row-major pair order, so runs reproduce bit-for-bit across
//! platforms and a given round can be resampled without replaying history.

use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{stream_rng, StreamPurpose};

/// A directed graph over nodes `0..n`. Edges are kept sorted so iteration
/// order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Digraph {
    /// Builds a digraph, rejecting out-of-range endpoints and self-loops.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (from, to) in edges {
            if from >= n || to >= n {
                return Err(Error::InvalidConfig(format!(
                    "edge ({from}, {to}) out of range for {n} nodes"
                )));
            }
            if from == to {
                return Err(Error::InvalidConfig(format!("self-loop at node {from}")));
            }
            set.insert((from, to));
        }
        Ok(Digraph { n, edges: set })
    }

    pub fn empty(n: usize) -> Self {
        Digraph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending `(from, to)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn insert_edges(&mut self, other: &Digraph) {
        debug_assert_eq!(self.n, other.n);
        self.edges.extend(other.edges.iter().copied());
    }

    pub fn insert_edge(&mut self, from: usize, to: usize) {
        debug_assert!(from < self.n && to < self.n && from != to);
        self.edges.insert((from, to));
    }

    /// Out-neighbor adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(from, to) in &self.edges {
            adj[from].push(to);
        }
        adj
    }
}

/// One digraph per round.
#[derive(Debug, Clone)]
pub enum GraphProcess {
    /// Every ordered pair appears independently with probability `p`,
    /// resampled each round.
    ErdosRenyi { n: usize, p: f64, seed: u64 },
    /// The constant directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    FixedRing { n: usize },
    /// Cycles through a fixed list of digraphs.
    Periodic { graphs: Vec<Digraph> },
    /// Like [`GraphProcess::Periodic`] but loaded from a schedule file.
    Custom { graphs: Vec<Digraph> },
}

impl GraphProcess {
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("graph needs at least one node".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!(
                "edge probability must be in [0, 1], got {p}"
            )));
        }
        Ok(GraphProcess::ErdosRenyi { n, p, seed })
    }

    pub fn fixed_ring(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("graph needs at least one node".into()));
        }
        Ok(GraphProcess::FixedRing { n })
    }

    pub fn periodic(graphs: Vec<Digraph>) -> Result<Self> {
        Self::check_sequence(&graphs)?;
        Ok(GraphProcess::Periodic { graphs })
    }

    /// Loads a schedule file: a JSON list of rounds, each an array of
    /// `[from, to]` pairs. The schedule repeats cyclically past its end.
    pub fn from_schedule_file(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let rounds: Vec<Vec<(usize, usize)>> = serde_json::from_str(&text)?;
        if rounds.is_empty() {
            return Err(Error::InvalidConfig("schedule file has no rounds".into()));
        }
        let graphs = rounds
            .into_iter()
            .map(|edges| Digraph::new(n, edges))
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphProcess::Custom { graphs })
    }

    fn check_sequence(graphs: &[Digraph]) -> Result<()> {
        if graphs.is_empty() {
            return Err(Error::InvalidConfig(
                "periodic schedule needs at least one graph".into(),
            ));
        }
        let n = graphs[0].n();
        if graphs.iter().any(|g| g.n() != n) {
            return Err(Error::InvalidConfig(
                "all graphs in a schedule must agree on the node count".into(),
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match self {
            GraphProcess::ErdosRenyi { n, .. } | GraphProcess::FixedRing { n } => *n,
            GraphProcess::Periodic { graphs } | GraphProcess::Custom { graphs } => graphs[0].n(),
        }
    }

    /// The communication graph for round `t`.
    pub fn sample(&self, t: u64) -> Digraph {
        match self {
            GraphProcess::ErdosRenyi { n, p, seed } => {
                let n = *n;
                let mut rng = stream_rng(*seed, StreamPurpose::Graph, t);
                let mut edges = BTreeSet::new();
                // Fixed row-major order over ordered pairs; changing it would
                // change every sampled graph.
                for from in 0..n {
                    for to in 0..n {
                        if from != to && rng.gen::<f64>() < *p {
                            edges.insert((from, to));
                        }
                    }
                }
                Digraph { n, edges }
            }
            GraphProcess::FixedRing { n } => {
                let n = *n;
                if n == 1 {
                    return Digraph::empty(1);
                }
                let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
                Digraph { n, edges }
            }
            GraphProcess::Periodic { graphs } | GraphProcess::Custom { graphs } => {
                graphs[(t % graphs.len() as u64) as usize].clone()
            }
        }
    }
}

/// Union of the graphs over rounds `t0 .. t0 + window`.
pub fn union_graph(process: &GraphProcess, t0: u64, window: usize) -> Digraph {
    let mut union = Digraph::empty(process.n());
    for t in t0..t0 + window as u64 {
        union.insert_edges(&process.sample(t));
    }
    union
}

/// Whether every node can reach every other along directed edges.
/// Computed via Tarjan's strongly-connected-components algorithm; the graph
/// is strongly connected iff there is exactly one component.
pub fn is_strongly_connected(graph: &Digraph) -> bool {
    if graph.n() == 0 {
        return false;
    }
    if graph.n() == 1 {
        return true;
    }
    tarjan_component_count(&graph.adjacency()) == 1
}

struct TarjanState {
    index: usize,
    indices: Vec<Option<usize>>,
    lowlink: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    components: usize,
}

fn tarjan_component_count(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut st = TarjanState {
        index: 0,
        indices: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        components: 0,
    };
    for v in 0..n {
        if st.indices[v].is_none() {
            strong_connect(v, adj, &mut st);
        }
    }
    st.components
}

fn strong_connect(v: usize, adj: &[Vec<usize>], st: &mut TarjanState) {
    st.indices[v] = Some(st.index);
    st.lowlink[v] = st.index;
    st.index += 1;
    st.stack.push(v);
    st.on_stack[v] = true;

    for &w in &adj[v] {
        match st.indices[w] {
            None => {
                strong_connect(w, adj, st);
                st.lowlink[v] = st.lowlink[v].min(st.lowlink[w]);
            }
            Some(w_index) => {
                if st.on_stack[w] {
                    st.lowlink[v] = st.lowlink[v].min(w_index);
                }
            }
        }
    }

    if st.lowlink[v] == st.indices[v].unwrap() {
        st.components += 1;
        while let Some(w) = st.stack.pop() {
            st.on_stack[w] = false;
            if w == v {
                break;
            }
        }
    }
}

/// Which nodes compute and transmit in a given round. An inactive node does
/// neither but still buffers messages addressed to it.
#[derive(Debug, Clone)]
pub enum ActivityProcess {
    AlwaysOn,
    /// Each node is active independently with probability `q` per round.
    Bernoulli { q: f64, seed: u64 },
}

impl ActivityProcess {
    pub fn bernoulli(q: f64, seed: u64) -> Result<Self> {
        if !(0.0 < q && q <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "activity probability must be in (0, 1], got {q}"
            )));
        }
        Ok(ActivityProcess::Bernoulli { q, seed })
    }

    /// Activity of all `n` nodes at round `t`, drawn in node order from the
    /// round's dedicated stream.
    pub fn active_mask(&self, n: usize, t: u64) -> Vec<bool> {
        match self {
            ActivityProcess::AlwaysOn => vec![true; n],
            ActivityProcess::Bernoulli { q, seed } => {
                let mut rng = stream_rng(*seed, StreamPurpose::Activity, t);
                (0..n).map(|_| rng.gen::<f64>() < *q).collect()
            }
        }
    }
}
