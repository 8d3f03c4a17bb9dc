//! Multitrees: edge-side twists, the concentrated family with its twist
//! counts, divisor sequences, multivanishing sequences, the multivanishing
//! inequality, and the witness multidegree built from vanishing profiles.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::chain::{AdmissibleMultidegree, ChainStructure, ChainedGraph};
use crate::divisor::TwistVector;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::twist_graph::{d_wv_along, in_bar_g, NodeDivisor};

/// An edge of the simple graph obtained by collapsing parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarEdge {
    /// Endpoints, smaller index first.
    pub ends: (VertexId, VertexId),
    /// Edges of the multigraph lying over this one.
    pub edges: Vec<EdgeId>,
    /// Named after the first edge over it.
    pub name: String,
}

impl BarEdge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.ends.0 == v || self.ends.1 == v
    }
}

#[derive(Debug, Clone)]
pub struct Multitree {
    pub bar_edges: Vec<BarEdge>,
    pub is_tree: bool,
    /// A cycle of the collapsed graph when it is not a tree.
    pub cycle: Option<Vec<VertexId>>,
    incident: Vec<Vec<usize>>,
}

/// A bar edge together with one of its endpoints.
pub type Side = (usize, VertexId);

impl Multitree {
    pub fn bar_edge(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.incident[u].iter().copied().find(|&i| self.bar_edges[i].other(u) == v)
    }

    pub fn incident(&self, v: VertexId) -> &[usize] {
        &self.incident[v]
    }

    /// All pairs `(e, v)` with `v` an endpoint of `e`.
    pub fn sides(&self) -> Vec<Side> {
        self.bar_edges
            .iter()
            .enumerate()
            .flat_map(|(i, b)| [(i, b.ends.0), (i, b.ends.1)])
            .collect()
    }

    /// Vertices on `v`'s side once bar edge `e` is removed.
    pub fn side(&self, e: usize, v: VertexId) -> Vec<bool> {
        let n = self.incident.len();
        let mut seen = vec![false; n];
        seen[v] = true;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &i in &self.incident[u] {
                if i == e {
                    continue;
                }
                let x = self.bar_edges[i].other(u);
                if !seen[x] {
                    seen[x] = true;
                    queue.push_back(x);
                }
            }
        }
        seen
    }

    pub fn require_tree(&self) -> Result<()> {
        if self.is_tree {
            Ok(())
        } else {
            Err(Error::NotMultitree)
        }
    }
}

pub fn is_multitree(g: &MultiGraph) -> Multitree {
    let mut by_pair: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
    for e in g.edge_indices() {
        let edge = g.edge(e);
        let key = (edge.tail.min(edge.head), edge.tail.max(edge.head));
        by_pair.entry(key).or_default().push(e);
    }
    let mut bar_edges: Vec<BarEdge> = by_pair
        .into_iter()
        .map(|(ends, edges)| BarEdge { ends, name: g.edge_name(edges[0]).to_string(), edges })
        .collect();
    bar_edges.sort_by_key(|b| b.edges[0]);
    let mut incident = vec![Vec::new(); g.num_vertices()];
    for (i, b) in bar_edges.iter().enumerate() {
        incident[b.ends.0].push(i);
        incident[b.ends.1].push(i);
    }
    let is_tree = bar_edges.len() + 1 == g.num_vertices();
    let mut mt = Multitree { bar_edges, is_tree, cycle: None, incident };
    if !is_tree {
        mt.cycle = find_cycle(&mt);
    }
    mt
}

fn find_cycle(mt: &Multitree) -> Option<Vec<VertexId>> {
    let n = mt.incident.len();
    let mut parent: Vec<Option<(VertexId, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![(0usize, usize::MAX)];
    while let Some((u, via)) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        for &i in &mt.incident[u] {
            if i == via {
                continue;
            }
            let x = mt.bar_edges[i].other(u);
            if seen[x] {
                // u..x closes a cycle through the tree path
                let anc = |mut a: VertexId| {
                    let mut path = vec![a];
                    while let Some((p, _)) = parent[a] {
                        path.push(p);
                        a = p;
                    }
                    path
                };
                let pu = anc(u);
                let px = anc(x);
                let common = pu.iter().find(|a| px.contains(a)).copied()?;
                let mut cycle: Vec<VertexId> = pu.iter().copied().take_while(|&a| a != common).collect();
                cycle.push(common);
                let mut back: Vec<VertexId> = px.iter().copied().take_while(|&a| a != common).collect();
                back.reverse();
                cycle.extend(back);
                return Some(cycle);
            }
            parent[x] = Some((u, i));
            stack.push((x, i));
        }
    }
    None
}

/// Twist of `w` at every vertex on `v`'s side of bar edge `e`, applied
/// directly to the edges over `e`.
pub fn twist_edge_side(
    cg: &ChainedGraph,
    mt: &Multitree,
    w: &AdmissibleMultidegree,
    e: usize,
    v: VertexId,
    times: i64,
) -> Result<AdmissibleMultidegree> {
    mt.require_tree()?;
    let bar = &mt.bar_edges[e];
    if !bar.touches(v) {
        return Err(Error::PreconditionFailed(format!(
            "{} is not an endpoint of {}",
            cg.graph.vertex_name(v),
            bar.name
        )));
    }
    let u = bar.other(v);
    let mut out = w.clone();
    let step = times.signum();
    for _ in 0..times.abs() {
        for &ed in &bar.edges {
            let edge = cg.graph.edge(ed);
            let n = cg.chain.get(ed) as i64;
            let old = out.mu[ed] as i64;
            let new = (old + step * edge.sigma(v)).rem_euclid(n);
            // a negative step runs the positive one backwards
            let (from, to) = if step > 0 { (v, u) } else { (u, v) };
            if old == 0 {
                out.w[from] -= step.abs();
            }
            if new == 0 {
                out.w[to] += step.abs();
            }
            out.mu[ed] = new as u32;
        }
    }
    Ok(out)
}

/// The concentrated family `w_v` and the edge-side twist counts `b`
/// (keyed by `(e, v)`, meaning `w_v` reaches `w_{v'}` after `b` twists at
/// `(e, v)`).
#[derive(Debug, Clone)]
pub struct PctFamily {
    pub family: Vec<AdmissibleMultidegree>,
    pub b: BTreeMap<Side, i64>,
}

pub fn pct_family(cg: &ChainedGraph, mt: &Multitree, w0: &AdmissibleMultidegree) -> Result<PctFamily> {
    mt.require_tree()?;
    let g = &cg.graph;
    let family: Vec<AdmissibleMultidegree> =
        g.vertices().map(|v| cg.concentrate(w0, v).map(|x| x.0)).collect::<Result<_>>()?;
    let mut b = BTreeMap::new();
    for (i, bar) in mt.bar_edges.iter().enumerate() {
        for (v, u) in [(bar.ends.0, bar.ends.1), (bar.ends.1, bar.ends.0)] {
            let x = cg.twist_equivalent(&family[v], &family[u]).expect("same class");
            let side = mt.side(i, v);
            let count = side_multiple(&x, &side).ok_or_else(|| {
                Error::NotEdgeSideTwist(g.vertex_name(v).to_string(), g.vertex_name(u).to_string())
            })?;
            b.insert((i, v), count);
        }
    }
    for v in g.vertices() {
        check_restrictions(cg, mt, &family[v], v)?;
    }
    Ok(PctFamily { family, b })
}

/// `k` with `x ≡ k · 1_side` modulo the all-ones vector, if `k ≥ 0` exists.
fn side_multiple(x: &TwistVector, side: &[bool]) -> Option<i64> {
    let inside: Vec<i64> = (0..side.len()).filter(|&u| side[u]).map(|u| x[u]).collect();
    let outside: Vec<i64> = (0..side.len()).filter(|&u| !side[u]).map(|u| x[u]).collect();
    let a = *inside.first()?;
    let c = *outside.first()?;
    if inside.iter().any(|&y| y != a) || outside.iter().any(|&y| y != c) || a < c {
        return None;
    }
    Some(a - c)
}

/// `w_v` stays concentrated at `v` on every connected subtree containing
/// `v` (all of them for up to 12 vertices, otherwise the balls around `v`).
fn check_restrictions(cg: &ChainedGraph, mt: &Multitree, w: &AdmissibleMultidegree, v: VertexId) -> Result<()> {
    let g = &cg.graph;
    let n = g.num_vertices();
    let mut subsets: Vec<Vec<VertexId>> = Vec::new();
    if n <= 12 {
        for mask in 0u32..(1 << n) {
            if mask >> v & 1 == 1 {
                let keep: Vec<VertexId> = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
                if connected_in_bar(mt, &keep) {
                    subsets.push(keep);
                }
            }
        }
    } else {
        let dist = g.bfs_distances(v);
        let max = dist.iter().flatten().copied().max().unwrap_or(0);
        for r in 0..=max {
            subsets.push((0..n).filter(|&u| dist[u].is_some_and(|d| d <= r)).collect());
        }
    }
    for keep in subsets {
        let (sub, _, emap) = g.induced_subgraph(&keep)?;
        let chain = ChainStructure::new(&sub, emap.iter().map(|&e| cg.chain.get(e) as i64).collect())?;
        let scg = ChainedGraph::new(sub, chain)?;
        let restricted = AdmissibleMultidegree {
            w: keep.iter().map(|&u| w.w[u]).collect(),
            mu: emap.iter().map(|&e| w.mu[e]).collect(),
        };
        let root = keep.iter().position(|&u| u == v).expect("v is kept");
        if !scg.is_concentrated(&restricted, root)?.concentrated {
            return Err(Error::WitnessUnverified(format!(
                "w_{} is not concentrated on a subtree",
                g.vertex_name(v)
            )));
        }
    }
    Ok(())
}

fn connected_in_bar(mt: &Multitree, keep: &[VertexId]) -> bool {
    let n = mt.incident.len();
    let mut inside = vec![false; n];
    keep.iter().for_each(|&u| inside[u] = true);
    let mut seen = vec![false; n];
    let mut stack = vec![keep[0]];
    seen[keep[0]] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &i in &mt.incident[u] {
            let x = mt.bar_edges[i].other(u);
            if inside[x] && !seen[x] {
                seen[x] = true;
                count += 1;
                stack.push(x);
            }
        }
    }
    count == keep.len()
}

/// The divisors `D_0, …, D_{b+1}` on one side of a bar edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorSequence {
    pub divisors: Vec<NodeDivisor>,
    pub degrees: Vec<i64>,
}

impl DivisorSequence {
    pub fn is_critical(&self, i: usize) -> bool {
        i + 1 < self.divisors.len() && self.divisors[i + 1] != self.divisors[i]
    }

    /// Index of the critical step of degree `a`.
    pub fn critical_with_degree(&self, a: i64) -> Option<usize> {
        (0..self.divisors.len()).find(|&i| self.is_critical(i) && self.degrees[i] == a)
    }

    pub fn b(&self) -> usize {
        self.divisors.len() - 2
    }
}

/// `D^{(e,v)}_i = D_{w_i, v}` with `w_i` the `i`-fold twist of `w_v` at `(e, v)`.
pub fn divisor_sequences(
    cg: &ChainedGraph,
    mt: &Multitree,
    fam: &PctFamily,
) -> Result<BTreeMap<Side, DivisorSequence>> {
    let mut out = BTreeMap::new();
    for (i, v) in mt.sides() {
        let b = fam.b[&(i, v)];
        let wv = &fam.family[v];
        let side: Vec<bool> = mt.side(i, v).iter().map(|&s| !s).collect();
        let mut divisors = Vec::with_capacity(b as usize + 2);
        for k in 0..=b + 1 {
            let wk = twist_edge_side(cg, mt, wv, i, v, k)?;
            // back to w_v: k twists at every vertex off v's side
            let seq: Vec<VertexId> = (0..k)
                .flat_map(|_| (0..side.len()).filter(|&u| side[u]))
                .collect();
            let d = d_wv_along(cg, &wk, v, &seq);
            debug_assert!(d.is_effective());
            divisors.push(d);
        }
        let degrees = divisors.iter().map(NodeDivisor::degree).collect();
        out.insert((i, v), DivisorSequence { divisors, degrees });
    }
    Ok(out)
}

/// Multivanishing sequence from the degrees of `D_0 ≤ … ≤ D_{b+1}` and the
/// dimensions of `V(-D_i)`.
pub fn multivanishing_sequence(degrees: &[i64], dims: &[i64]) -> Result<Vec<i64>> {
    let bad = |m: &str| Err(Error::InvalidFiltration(m.to_string()));
    if degrees.len() != dims.len() || degrees.is_empty() {
        return bad("degrees and dimensions must have the same nonzero length");
    }
    if degrees[0] != 0 || degrees.windows(2).any(|w| w[0] > w[1]) {
        return bad("degrees must start at 0 and be nondecreasing");
    }
    if dims.windows(2).any(|w| w[0] < w[1]) {
        return bad("dimensions must be nonincreasing");
    }
    if *dims.last().unwrap() != 0 {
        return bad("the last dimension must be 0");
    }
    let mut out = Vec::new();
    for i in 0..degrees.len() - 1 {
        let drop = dims[i] - dims[i + 1];
        if degrees[i + 1] > degrees[i] {
            out.extend(std::iter::repeat_n(degrees[i], drop as usize));
        } else if drop != 0 {
            return bad("dimension drops where the divisor does not change");
        }
    }
    Ok(out)
}

/// Which side and index `ℓ` of a failed multivanishing inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityFailure {
    /// `true` when reading from the second profile to the first.
    pub reversed: bool,
    pub ell: usize,
}

/// Checks `a'_{r-ℓ} ≥ deg D'_{b-j}` for each `ℓ`, with `j` the critical
/// index realizing `a_ℓ`, in both directions.
pub fn check_inequality_i(
    a: &[i64],
    a2: &[i64],
    seq: &DivisorSequence,
    seq2: &DivisorSequence,
) -> Result<Option<InequalityFailure>> {
    if a.len() != a2.len() || a.is_empty() {
        return Err(Error::InconsistentProfile("profiles must have equal nonzero length".into()));
    }
    if seq.divisors.len() != seq2.divisors.len() {
        return Err(Error::InconsistentProfile("sequences have different lengths".into()));
    }
    let b = seq.b();
    for (reversed, (x, y, s, s2)) in [(false, (a, a2, seq, seq2)), (true, (a2, a, seq2, seq))] {
        if x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InconsistentProfile("profile must be nondecreasing".into()));
        }
        let r = x.len() - 1;
        for (ell, &val) in x.iter().enumerate() {
            let j = s.critical_with_degree(val).ok_or_else(|| {
                Error::InconsistentProfile(format!("value {val} is not a critical degree"))
            })?;
            if y[r - ell] < s2.degrees[b - j] {
                return Ok(Some(InequalityFailure { reversed, ell }));
            }
        }
    }
    Ok(None)
}

/// Witness multidegree with its certificates.
#[derive(Debug, Clone)]
pub struct PctWitness {
    pub t: BTreeMap<Side, i64>,
    pub w: AdmissibleMultidegree,
    /// Edge-side twist counts from each `w_v` to `w` match `t`.
    pub counts_match: bool,
    /// Side sums over the neighbours of each vertex equal `r - r_v`.
    pub codim_sum: bool,
    pub in_bar_g: bool,
}

impl PctWitness {
    pub fn all_pass(&self) -> bool {
        self.counts_match && self.codim_sum && self.in_bar_g
    }
}

pub fn pct_witness(
    cg: &ChainedGraph,
    mt: &Multitree,
    fam: &PctFamily,
    seqs: &BTreeMap<Side, DivisorSequence>,
    r_v: &[i64],
    profiles: &BTreeMap<Side, Vec<i64>>,
) -> Result<PctWitness> {
    mt.require_tree()?;
    let g = &cg.graph;
    let r: i64 = r_v.iter().sum();
    if r_v.len() != g.num_vertices() || r_v.iter().any(|&x| x < 0) {
        return Err(Error::PreconditionFailed("r_v must be nonnegative, one per vertex".into()));
    }
    let side_sum = |i: usize, v: VertexId| -> i64 {
        mt.side(i, v).iter().enumerate().filter(|(_, &s)| s).map(|(u, _)| r_v[u]).sum()
    };
    let mut t = BTreeMap::new();
    for (i, bar) in mt.bar_edges.iter().enumerate() {
        let (v, u) = bar.ends;
        let (a, a2) = match (profiles.get(&(i, v)), profiles.get(&(i, u))) {
            (Some(a), Some(a2)) => (a, a2),
            _ => return Err(Error::InconsistentProfile(format!("missing profile on {}", bar.name))),
        };
        if a.len() as i64 != r + 1 {
            return Err(Error::InconsistentProfile(format!("profile on {} has the wrong length", bar.name)));
        }
        let (s, s2) = (&seqs[&(i, v)], &seqs[&(i, u)]);
        if let Some(f) = check_inequality_i(a, a2, s, s2)? {
            let at = if f.reversed { u } else { v };
            return Err(Error::ProfileViolatesI(format!("({}, {}) at {}", bar.name, g.vertex_name(at), f.ell)));
        }
        let idx = (r - side_sum(i, v)) as usize;
        let j = s.critical_with_degree(a[idx]).expect("checked by the inequality");
        t.insert((i, v), j as i64);
        t.insert((i, u), fam.b[&(i, v)] - j as i64);
    }

    // traverse outward from the least vertex
    let root = g.least_vertex();
    let mut w = fam.family[root].clone();
    let mut seen = vec![false; g.num_vertices()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &i in mt.incident(v) {
            let u = mt.bar_edges[i].other(v);
            if seen[u] {
                continue;
            }
            w = twist_edge_side(cg, mt, &w, i, v, t[&(i, v)])?;
            seen[u] = true;
            queue.push_back(u);
        }
    }

    let mut counts_match = true;
    for v in g.vertices() {
        let x = cg.twist_equivalent(&fam.family[v], &w).expect("same class");
        for &i in mt.incident(v) {
            let u = mt.bar_edges[i].other(v);
            if x[v] - x[u] != t[&(i, v)] {
                counts_match = false;
            }
        }
    }
    let codim_sum = g.vertices().all(|v| {
        let total: i64 = mt.incident(v).iter().map(|&i| side_sum(i, mt.bar_edges[i].other(v))).sum();
        total == r - r_v[v]
    });
    let in_bar = in_bar_g(cg, &w, &fam.family)?;
    Ok(PctWitness { t, w, counts_match, codim_sum, in_bar_g: in_bar })
}

/// Random profiles satisfying the multivanishing inequality with equality:
/// for each bar edge pick nondecreasing critical indices `j_0 ≤ … ≤ j_r` on
/// one side and read off both sides' degrees. `None` if some side has no
/// critical index.
pub fn random_valid_profiles<R: Rng>(
    rng: &mut R,
    mt: &Multitree,
    seqs: &BTreeMap<Side, DivisorSequence>,
    r: usize,
) -> Option<BTreeMap<Side, Vec<i64>>> {
    let mut out = BTreeMap::new();
    for (i, bar) in mt.bar_edges.iter().enumerate() {
        let (v, u) = bar.ends;
        let (s, s2) = (&seqs[&(i, v)], &seqs[&(i, u)]);
        let crit: Vec<usize> = (0..s.divisors.len()).filter(|&j| s.is_critical(j)).collect();
        if crit.is_empty() {
            return None;
        }
        let mut js: Vec<usize> = (0..=r).map(|_| crit[rng.gen_range(0..crit.len())]).collect();
        js.sort_unstable();
        let b = s.b();
        let a: Vec<i64> = js.iter().map(|&j| s.degrees[j]).collect();
        let mut a2: Vec<i64> = js.iter().map(|&j| s2.degrees[b - j]).collect();
        a2.reverse();
        out.insert((i, v), a);
        out.insert((i, u), a2);
    }
    Some(out)
}
