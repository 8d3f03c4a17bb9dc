//! Chain structures, the subdivided graph, admissible multidegrees and their
//! twists, concentratedness, and canonical concentrated representatives.

use std::collections::BTreeMap;

use crate::chip;
use crate::divisor::{Divisor, TwistVector};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeId, MultiGraph, VertexId};

/// Number of segments each edge is subdivided into.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainStructure(Vec<u32>);

impl ChainStructure {
    pub fn new(g: &MultiGraph, n: Vec<i64>) -> Result<Self> {
        if n.len() != g.num_edges() {
            return Err(Error::InvalidChain(format!(
                "{} lengths for {} edges",
                n.len(),
                g.num_edges()
            )));
        }
        let mut out = Vec::with_capacity(n.len());
        for (e, &x) in n.iter().enumerate() {
            if x <= 0 {
                return Err(Error::InvalidChain(format!(
                    "n({}) = {x} must be positive",
                    g.edge_name(e)
                )));
            }
            out.push(x as u32);
        }
        Ok(ChainStructure(out))
    }

    pub fn trivial(g: &MultiGraph) -> Self {
        ChainStructure(vec![1; g.num_edges()])
    }

    pub fn from_named<'a>(
        g: &MultiGraph,
        entries: impl IntoIterator<Item = (&'a str, i64)>,
    ) -> Result<Self> {
        let mut n = vec![1i64; g.num_edges()];
        for (name, x) in entries {
            n[g.edge_id(name)?] = x;
        }
        Self::new(g, n)
    }

    pub fn get(&self, e: EdgeId) -> u32 {
        self.0[e]
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&x| x == 1)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn to_named(&self, g: &MultiGraph) -> BTreeMap<String, u32> {
        self.0.iter().enumerate().map(|(e, &x)| (g.edge_name(e).to_string(), x)).collect()
    }
}

/// Role of a vertex of the subdivided graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Original(VertexId),
    /// `index`-th new vertex over `edge`, counted from the tail, `1..n(e)`.
    New { edge: EdgeId, index: u32 },
}

/// The graph obtained by subdividing each edge `e` into `n(e)` edges.
///
/// Original vertices keep their indices `0..|V|`; new vertices follow.
#[derive(Debug, Clone)]
pub struct SubdividedGraph {
    pub graph: MultiGraph,
    kinds: Vec<VertexKind>,
    chains: Vec<Vec<VertexId>>,
    base_vertices: usize,
    chain: ChainStructure,
}

impl SubdividedGraph {
    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v]
    }

    /// New vertices over `e`, ordered from the tail.
    pub fn chain(&self, e: EdgeId) -> &[VertexId] {
        &self.chains[e]
    }

    pub fn num_original(&self) -> usize {
        self.base_vertices
    }

    pub fn chain_structure(&self) -> &ChainStructure {
        &self.chain
    }
}

pub fn subdivide(g: &MultiGraph, n: &ChainStructure) -> Result<SubdividedGraph> {
    if n.0.len() != g.num_edges() {
        return Err(Error::InvalidChain("chain structure does not match the graph".into()));
    }
    let mut vertex_ids: Vec<String> = g.vertices().map(|v| g.vertex_name(v).to_string()).collect();
    let mut genera: Vec<u32> = g.vertices().map(|v| g.vertex_genus(v)).collect();
    let mut kinds: Vec<VertexKind> = g.vertices().map(VertexKind::Original).collect();
    let mut chains = Vec::with_capacity(g.num_edges());
    let mut edge_ids = Vec::new();
    let mut edges = Vec::new();
    for e in g.edge_indices() {
        let Edge { tail, head } = g.edge(e);
        let len = n.get(e);
        let name = g.edge_name(e);
        let mut chain = Vec::with_capacity(len as usize - 1);
        for i in 1..len {
            chain.push(vertex_ids.len());
            vertex_ids.push(format!("{name}#{i}"));
            genera.push(0);
            kinds.push(VertexKind::New { edge: e, index: i });
        }
        let mut prev = tail;
        for (i, &u) in chain.iter().enumerate() {
            edge_ids.push(format!("{name}/{}", i + 1));
            edges.push(Edge { tail: prev, head: u });
            prev = u;
        }
        edge_ids.push(if len == 1 { name.to_string() } else { format!("{name}/{len}") });
        edges.push(Edge { tail: prev, head });
        chains.push(chain);
    }
    let graph = MultiGraph::from_parts(vertex_ids, genera, edge_ids, edges)?;
    Ok(SubdividedGraph {
        graph,
        kinds,
        chains,
        base_vertices: g.num_vertices(),
        chain: n.clone(),
    })
}

/// Degrees on original vertices plus, per edge, the position of a unit of
/// degree on the inserted chain (0 meaning none).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleMultidegree {
    pub w: Vec<i64>,
    /// Canonical representative in `[0, n(e) - 1]`.
    pub mu: Vec<u32>,
}

impl AdmissibleMultidegree {
    pub fn new(g: &MultiGraph, n: &ChainStructure, w: Vec<i64>, mu: Vec<i64>) -> Result<Self> {
        if w.len() != g.num_vertices() || mu.len() != g.num_edges() {
            return Err(Error::PreconditionFailed(
                "multidegree does not match the graph".into(),
            ));
        }
        let mu = mu
            .iter()
            .enumerate()
            .map(|(e, &m)| m.rem_euclid(n.get(e) as i64) as u32)
            .collect();
        Ok(AdmissibleMultidegree { w, mu })
    }

    /// A plain multidegree with no chain degree.
    pub fn from_divisor(g: &MultiGraph, d: &Divisor) -> Self {
        AdmissibleMultidegree { w: d.as_slice().to_vec(), mu: vec![0; g.num_edges()] }
    }

    pub fn degree(&self) -> i64 {
        self.w.iter().sum::<i64>() + self.mu.iter().filter(|&&m| m != 0).count() as i64
    }

    pub fn w_divisor(&self) -> Divisor {
        Divisor::from_vec(self.w.clone())
    }

    /// Twist `times` times at `v` (negative means negative twists).
    pub fn twist_times(&mut self, g: &MultiGraph, n: &ChainStructure, v: VertexId, times: i64) {
        for _ in 0..times.max(0) {
            self.twist_once(g, n, v);
        }
        for _ in 0..(-times).max(0) {
            self.untwist_once(g, n, v);
        }
    }

    fn twist_once(&mut self, g: &MultiGraph, n: &ChainStructure, v: VertexId) {
        for &e in g.incident(v) {
            let edge = g.edge(e);
            let len = n.get(e) as i64;
            let old = self.mu[e] as i64;
            let new = (old + edge.sigma(v)).rem_euclid(len);
            if old == 0 {
                self.w[v] -= 1;
            }
            if new == 0 {
                self.w[edge.other(v)] += 1;
            }
            self.mu[e] = new as u32;
        }
    }

    fn untwist_once(&mut self, g: &MultiGraph, n: &ChainStructure, v: VertexId) {
        for &e in g.incident(v) {
            let edge = g.edge(e);
            let len = n.get(e) as i64;
            let cur = self.mu[e] as i64;
            let prev = (cur - edge.sigma(v)).rem_euclid(len);
            if cur == 0 {
                self.w[edge.other(v)] -= 1;
            }
            if prev == 0 {
                self.w[v] += 1;
            }
            self.mu[e] = prev as u32;
        }
    }

    pub fn apply(&self, g: &MultiGraph, n: &ChainStructure, t: &TwistVector) -> Self {
        let mut out = self.clone();
        for v in g.vertices() {
            out.twist_times(g, n, v, t[v]);
        }
        out
    }

    pub fn to_named(&self, g: &MultiGraph) -> (BTreeMap<String, i64>, BTreeMap<String, u32>) {
        let w = g.vertices().map(|v| (g.vertex_name(v).to_string(), self.w[v])).collect();
        let mu = g
            .edge_indices()
            .filter(|&e| self.mu[e] != 0)
            .map(|e| (g.edge_name(e).to_string(), self.mu[e]))
            .collect();
        (w, mu)
    }
}

/// Twist at `v` in the given direction (`+1` twist, `-1` negative twist).
pub fn twist(
    g: &MultiGraph,
    n: &ChainStructure,
    w: &AdmissibleMultidegree,
    v: VertexId,
    direction: i64,
) -> Result<AdmissibleMultidegree> {
    g.check_vertex(v)?;
    let mut out = w.clone();
    out.twist_times(g, n, v, direction.signum());
    Ok(out)
}

/// The multidegree on the subdivided graph induced by `w`.
pub fn induced_multidegree(sub: &SubdividedGraph, w: &AdmissibleMultidegree) -> Divisor {
    let mut d = Divisor::zero(sub.graph.num_vertices());
    for v in 0..sub.base_vertices {
        d[v] = w.w[v];
    }
    for (e, chain) in sub.chains.iter().enumerate() {
        let m = w.mu[e];
        if m != 0 {
            d[chain[m as usize - 1]] = 1;
        }
    }
    d
}

/// Pulls a divisor on the subdivided graph back to an admissible multidegree;
/// `None` unless every chain carries zeros and at most one `1`.
pub fn admissible_from_divisor(sub: &SubdividedGraph, d: &Divisor) -> Option<AdmissibleMultidegree> {
    let w = d.as_slice()[..sub.base_vertices].to_vec();
    let mut mu = Vec::with_capacity(sub.chains.len());
    for chain in &sub.chains {
        let mut pos = 0u32;
        for (i, &u) in chain.iter().enumerate() {
            match d[u] {
                0 => {}
                1 if pos == 0 => pos = i as u32 + 1,
                _ => return None,
            }
        }
        mu.push(pos);
    }
    Some(AdmissibleMultidegree { w, mu })
}

/// Outcome of the greedy concentration search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concentration {
    pub concentrated: bool,
    /// Full witness ordering when concentrated, otherwise the stuck prefix.
    pub ordering: Vec<VertexId>,
}

/// Whether `w` is concentrated at `v0`, with a witness ordering.
///
/// Negative twists only lower the degrees of other vertices, so any valid
/// next vertex may be taken; the smallest index is chosen.
pub fn is_concentrated(
    g: &MultiGraph,
    n: &ChainStructure,
    w: &AdmissibleMultidegree,
    v0: VertexId,
) -> Result<Concentration> {
    g.check_vertex(v0)?;
    let mut placed = vec![false; g.num_vertices()];
    let mut ordering = vec![v0];
    placed[v0] = true;
    let mut cur = w.clone();
    cur.twist_times(g, n, v0, -1);
    while ordering.len() < g.num_vertices() {
        let next = g.vertices().find(|&u| !placed[u] && cur.w[u] < 0);
        match next {
            Some(u) => {
                placed[u] = true;
                ordering.push(u);
                cur.twist_times(g, n, u, -1);
            }
            None => return Ok(Concentration { concentrated: false, ordering }),
        }
    }
    Ok(Concentration { concentrated: true, ordering })
}

/// Twist vector on `V(Γ)` carrying `from` to `to`, computed through the
/// subdivided graph and checked by applying it.
pub fn twist_equivalent(
    g: &MultiGraph,
    n: &ChainStructure,
    sub: &SubdividedGraph,
    from: &AdmissibleMultidegree,
    to: &AdmissibleMultidegree,
) -> Option<TwistVector> {
    if from.degree() != to.degree() {
        return None;
    }
    let a = induced_multidegree(sub, from);
    let b = induced_multidegree(sub, to);
    let t = chip::linear_equiv(&sub.graph, &a, &b)?;
    let t = t.restrict(sub.base_vertices);
    let check = from.apply(g, n, &t);
    assert_eq!(&check, to, "twist vector restricted to original vertices must realise the equivalence");
    Some(t)
}

/// The unique twist of `w0` concentrated at `v0` and nonnegative elsewhere,
/// with the twist vector reaching it.
pub fn concentrate(
    g: &MultiGraph,
    n: &ChainStructure,
    sub: &SubdividedGraph,
    w0: &AdmissibleMultidegree,
    v0: VertexId,
) -> Result<(AdmissibleMultidegree, TwistVector)> {
    g.check_vertex(v0)?;
    let induced = induced_multidegree(sub, w0);
    let (reduced, t) = chip::reduce(&sub.graph, &induced, v0)?;
    let w = admissible_from_divisor(sub, &reduced)
        .expect("reduced divisors at an original vertex are admissible");
    let t = t.restrict(sub.base_vertices);
    debug_assert_eq!(w0.apply(g, n, &t), w);
    Ok((w, t))
}

/// Shorthand bundle for the three pieces most operations need.
#[derive(Debug, Clone)]
pub struct ChainedGraph {
    pub graph: MultiGraph,
    pub chain: ChainStructure,
    pub sub: SubdividedGraph,
}

impl ChainedGraph {
    pub fn new(graph: MultiGraph, chain: ChainStructure) -> Result<Self> {
        let sub = subdivide(&graph, &chain)?;
        Ok(ChainedGraph { graph, chain, sub })
    }

    pub fn trivial(graph: MultiGraph) -> Self {
        let chain = ChainStructure::trivial(&graph);
        Self::new(graph, chain).expect("trivial chain structure is valid")
    }

    pub fn twist(&self, w: &AdmissibleMultidegree, v: VertexId, direction: i64) -> Result<AdmissibleMultidegree> {
        twist(&self.graph, &self.chain, w, v, direction)
    }

    pub fn induced(&self, w: &AdmissibleMultidegree) -> Divisor {
        induced_multidegree(&self.sub, w)
    }

    pub fn is_concentrated(&self, w: &AdmissibleMultidegree, v0: VertexId) -> Result<Concentration> {
        is_concentrated(&self.graph, &self.chain, w, v0)
    }

    pub fn concentrate(&self, w0: &AdmissibleMultidegree, v0: VertexId) -> Result<(AdmissibleMultidegree, TwistVector)> {
        concentrate(&self.graph, &self.chain, &self.sub, w0, v0)
    }

    pub fn twist_equivalent(&self, a: &AdmissibleMultidegree, b: &AdmissibleMultidegree) -> Option<TwistVector> {
        twist_equivalent(&self.graph, &self.chain, &self.sub, a, b)
    }

    pub fn apply(&self, w: &AdmissibleMultidegree, t: &TwistVector) -> AdmissibleMultidegree {
        w.apply(&self.graph, &self.chain, t)
    }

    pub fn multidegree(&self, w: Vec<i64>, mu: Vec<i64>) -> Result<AdmissibleMultidegree> {
        AdmissibleMultidegree::new(&self.graph, &self.chain, w, mu)
    }
}
