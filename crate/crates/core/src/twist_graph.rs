//! Minimal paths between twists, the bounded subgraph Ḡ(w₀), the node
//! divisors D_{w,v}, and the twist realising the Riemann bound.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{admissible_from_divisor, AdmissibleMultidegree, ChainedGraph};
use crate::chip;
use crate::divisor::{Divisor, TwistVector};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::metric::{MetricDivisor, MetricGraph, Q};

/// The node of component `vertex` lying on edge `edge`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePoint {
    pub vertex: VertexId,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeDivisor(BTreeMap<NodePoint, i64>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedNodeTerm {
    pub vertex: String,
    pub edge: String,
    pub coeff: i64,
}

impl NodeDivisor {
    pub fn add_point(&mut self, p: NodePoint, c: i64) {
        let entry = self.0.entry(p).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.0.remove(&p);
        }
    }

    pub fn get(&self, p: NodePoint) -> i64 {
        self.0.get(&p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodePoint, i64)> + '_ {
        self.0.iter().map(|(&p, &c)| (p, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.0.values().all(|&c| c >= 0)
    }

    /// Degree of the part supported on component `v`.
    pub fn degree_at(&self, v: VertexId) -> i64 {
        self.0.iter().filter(|(p, _)| p.vertex == v).map(|(_, c)| c).sum()
    }

    pub fn to_named(&self, g: &MultiGraph) -> Vec<NamedNodeTerm> {
        self.0
            .iter()
            .map(|(p, &c)| NamedNodeTerm {
                vertex: g.vertex_name(p.vertex).to_string(),
                edge: g.edge_name(p.edge).to_string(),
                coeff: c,
            })
            .collect()
    }

    pub fn from_named(g: &MultiGraph, terms: &[NamedNodeTerm]) -> Result<Self> {
        let mut d = NodeDivisor::default();
        for t in terms {
            let v = g.vertex(&t.vertex)?;
            let e = g.edge_id(&t.edge)?;
            if !g.edge(e).touches(v) {
                return Err(Error::PreconditionFailed(format!(
                    "edge {} is not incident to {}",
                    t.edge, t.vertex
                )));
            }
            d.add_point(NodePoint { vertex: v, edge: e }, t.coeff);
        }
        Ok(d)
    }
}

/// Normal-form twist vector carrying `w` to `w2`.
pub fn minimal_path(
    cg: &ChainedGraph,
    w: &AdmissibleMultidegree,
    w2: &AdmissibleMultidegree,
) -> Result<TwistVector> {
    cg.twist_equivalent(w, w2).ok_or(Error::NotEquivalent)
}

/// The concentrated multidegrees `w_v`, one per vertex, in the class of `w0`.
pub fn reference_family(cg: &ChainedGraph, w0: &AdmissibleMultidegree) -> Vec<AdmissibleMultidegree> {
    cg.graph
        .vertices()
        .map(|v| cg.concentrate(w0, v).expect("vertex in range").0)
        .collect()
}

/// Precomputed reductions of a twist class on the subdivided graph, so that
/// minimal paths to the reference family cost one reduction per query.
struct ClassIndex<'a> {
    cg: &'a ChainedGraph,
    root: VertexId,
    reduced: Divisor,
    /// Subdivided-graph firing vector from each `w_v` to `reduced`.
    to_reduced: Vec<TwistVector>,
}

impl<'a> ClassIndex<'a> {
    fn new(cg: &'a ChainedGraph, family: &[AdmissibleMultidegree]) -> Result<Self> {
        if family.len() != cg.graph.num_vertices() {
            return Err(Error::PreconditionFailed(
                "reference family needs one multidegree per vertex".into(),
            ));
        }
        let root = cg.graph.least_vertex();
        let mut reduced = None;
        let mut to_reduced = Vec::with_capacity(family.len());
        for wv in family {
            let (r, t) = chip::reduce(&cg.sub.graph, &cg.induced(wv), root)?;
            match &reduced {
                None => reduced = Some(r),
                Some(r0) if *r0 == r => {}
                Some(_) => return Err(Error::NotEquivalent),
            }
            to_reduced.push(t);
        }
        Ok(ClassIndex { cg, root, reduced: reduced.expect("graph is nonempty"), to_reduced })
    }

    /// Minimal paths from `w` to every `w_v`, or `None` outside the class.
    fn paths(&self, w: &AdmissibleMultidegree) -> Option<Vec<TwistVector>> {
        let (r, t) = chip::reduce(&self.cg.sub.graph, &self.cg.induced(w), self.root).ok()?;
        if r != self.reduced {
            return None;
        }
        let base = self.cg.sub.num_original();
        Some(
            self.to_reduced
                .iter()
                .map(|tv| {
                    let raw = t.counts()[..base]
                        .iter()
                        .zip(&tv.counts()[..base])
                        .map(|(a, b)| a - b)
                        .collect();
                    TwistVector::normalized(raw)
                })
                .collect(),
        )
    }

    fn is_member(&self, w: &AdmissibleMultidegree) -> Option<bool> {
        let paths = self.paths(w)?;
        Some(paths.iter().enumerate().all(|(v, p)| p[v] == 0))
    }
}

/// Whether `w` lies in Ḡ(w₀) for the reference family `family`.
pub fn in_bar_g(
    cg: &ChainedGraph,
    w: &AdmissibleMultidegree,
    family: &[AdmissibleMultidegree],
) -> Result<bool> {
    ClassIndex::new(cg, family)?.is_member(w).ok_or(Error::NotEquivalent)
}

/// The finite graph Ḡ(w₀), with members in sorted order.
#[derive(Debug, Clone)]
pub struct BarGCore {
    pub base: AdmissibleMultidegree,
    pub family: Vec<AdmissibleMultidegree>,
    pub members: Vec<AdmissibleMultidegree>,
    /// Whether members are connected through single-vertex twists inside Ḡ.
    pub connected: bool,
}

impl BarGCore {
    pub fn contains(&self, w: &AdmissibleMultidegree) -> bool {
        self.members.binary_search(w).is_ok()
    }
}

/// Enumerates Ḡ(w₀) over the degree box bounded by the reference family.
pub fn enumerate_bar_g(
    cg: &ChainedGraph,
    w0: &AdmissibleMultidegree,
    family: &[AdmissibleMultidegree],
) -> Result<BarGCore> {
    let g = &cg.graph;
    let index = ClassIndex::new(cg, family)?;
    if index.paths(w0).is_none() {
        return Err(Error::NotEquivalent);
    }
    if !family.iter().any(|w| w.w.iter().all(|&x| x >= 0)) {
        return Err(Error::NoNonnegativeTwist);
    }
    let d = w0.degree();
    let nv = g.num_vertices();
    let hi: Vec<i64> = (0..nv).map(|v| family[v].w[v]).collect();
    let hi_total: i64 = hi.iter().sum();
    let mu_choices: Vec<Vec<u32>> = mu_assignments(cg);

    let mut members: Vec<AdmissibleMultidegree> = mu_choices
        .par_iter()
        .flat_map_iter(|mu| {
            let k = mu.iter().filter(|&&m| m != 0).count() as i64;
            let target = d - k;
            // each w(v) ≥ target − Σ_{u≠v} hi(u)
            let lo: Vec<i64> = hi.iter().map(|&h| target - (hi_total - h)).collect();
            let mut found = Vec::new();
            let mut w = vec![0i64; nv];
            box_search(&lo, &hi, target, 0, &mut w, &mut |w| {
                let cand = AdmissibleMultidegree { w: w.to_vec(), mu: mu.clone() };
                if index.is_member(&cand) == Some(true) {
                    found.push(cand);
                }
            });
            found
        })
        .collect();
    members.sort();
    members.dedup();
    let connected = twist_connected(cg, &members);
    Ok(BarGCore { base: w0.clone(), family: family.to_vec(), members, connected })
}

fn mu_assignments(cg: &ChainedGraph) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for e in cg.graph.edge_indices() {
        let n = cg.chain.get(e);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |m| {
                    let mut p = prefix.clone();
                    p.push(m);
                    p
                })
            })
            .collect();
    }
    out
}

fn box_search(
    lo: &[i64],
    hi: &[i64],
    remaining: i64,
    i: usize,
    w: &mut [i64],
    visit: &mut impl FnMut(&[i64]),
) {
    if i == w.len() {
        if remaining == 0 {
            visit(w);
        }
        return;
    }
    let rest_lo: i64 = lo[i + 1..].iter().sum();
    let rest_hi: i64 = hi[i + 1..].iter().sum();
    let a = lo[i].max(remaining - rest_hi);
    let b = hi[i].min(remaining - rest_lo);
    for x in a..=b {
        w[i] = x;
        box_search(lo, hi, remaining - x, i + 1, w, visit);
    }
}

fn twist_connected(cg: &ChainedGraph, members: &[AdmissibleMultidegree]) -> bool {
    if members.is_empty() {
        return true;
    }
    let set: BTreeSet<&AdmissibleMultidegree> = members.iter().collect();
    let mut seen = BTreeSet::new();
    let mut stack = vec![members[0].clone()];
    seen.insert(members[0].clone());
    while let Some(w) = stack.pop() {
        for v in cg.graph.vertices() {
            for dir in [1, -1] {
                let x = cg.twist(&w, v, dir).expect("vertex in range");
                if set.contains(&x) && seen.insert(x.clone()) {
                    stack.push(x);
                }
            }
        }
    }
    seen.len() == members.len()
}

/// Whether a nonzero section of some line bundle of multidegree `w` can be
/// supported exactly on the components in `s`: each component in `s` needs
/// enough degree to vanish at the nodes leading directly out of `s`.
pub fn is_realizable_support(cg: &ChainedGraph, w: &AdmissibleMultidegree, s: &[bool]) -> bool {
    let g = &cg.graph;
    if !s.iter().any(|&x| x) {
        return false;
    }
    g.vertices().filter(|&x| s[x]).all(|x| {
        let forced = g
            .incident(x)
            .iter()
            .filter(|&&e| !s[g.edge(e).other(x)] && w.mu[e] == 0)
            .count() as i64;
        w.w[x] >= forced
    })
}

/// Twist `w` once at every vertex of `s`.
pub fn twist_set(cg: &ChainedGraph, w: &AdmissibleMultidegree, s: &[bool]) -> AdmissibleMultidegree {
    let t = TwistVector::normalized(s.iter().map(|&b| b as i64).collect());
    cg.apply(w, &t)
}

/// The divisor D_{w,v} on the component of `v`, evaluated along the sorted
/// minimal path from `w` to `w_v`.
pub fn d_wv(
    cg: &ChainedGraph,
    family: &[AdmissibleMultidegree],
    w: &AdmissibleMultidegree,
    v: VertexId,
) -> Result<NodeDivisor> {
    cg.graph.check_vertex(v)?;
    let path = minimal_path(cg, w, &family[v])?;
    Ok(d_wv_along(cg, w, v, &path.sequence()))
}

/// D_{w,v} along an explicit twist sequence ending at `w_v`.
pub fn d_wv_along(cg: &ChainedGraph, w: &AdmissibleMultidegree, v: VertexId, seq: &[VertexId]) -> NodeDivisor {
    let g = &cg.graph;
    let mut out = NodeDivisor::default();
    let mut cur = w.clone();
    for &vi in seq {
        let before = cur.clone();
        cur.twist_times(g, &cg.chain, vi, 1);
        if vi == v {
            for &e in g.incident(v) {
                if before.mu[e] == 0 {
                    out.add_point(NodePoint { vertex: v, edge: e }, -1);
                }
            }
        } else {
            for &e in g.incident(v) {
                if g.edge(e).other(v) == vi && cur.mu[e] == 0 {
                    out.add_point(NodePoint { vertex: v, edge: e }, 1);
                }
            }
        }
    }
    out
}

/// The metric graph with edge lengths given by the chain structure.
pub fn chain_metric(cg: &ChainedGraph) -> MetricGraph {
    let lengths = cg.chain.as_slice().iter().map(|&n| Q::from_integer(n as i64)).collect();
    MetricGraph::new(cg.graph.clone(), lengths).expect("chain lengths are positive")
}

/// One point per edge with `μ(e) ≠ 0`, at distance `μ(e)` from the tail.
pub fn d_mu(cg: &ChainedGraph, mg: &MetricGraph, w: &AdmissibleMultidegree) -> MetricDivisor {
    let mut out = MetricDivisor::default();
    for e in cg.graph.edge_indices().filter(|&e| w.mu[e] != 0) {
        let p = mg.point(e, Q::from_integer(w.mu[e] as i64)).expect("μ(e) < n(e)");
        out.add_point(p, 1);
    }
    out
}

/// Output of the Riemann-bound construction.
#[derive(Debug, Clone)]
pub struct RiemannTwist {
    pub target: AdmissibleMultidegree,
    pub bound: i64,
    /// The reduced divisor of `w_can − w̃₀` before the fix-up.
    pub reduced: Divisor,
    /// The fixed-up divisor w″ on the subdivided graph.
    pub fixed: Divisor,
    /// Twist vector from `w0` to `target`.
    pub twist: TwistVector,
}

/// A twist of `w0` with at most `max(d + 1 − g, g)` sections.
pub fn riemann_twist(cg: &ChainedGraph, w0: &AdmissibleMultidegree, v0: VertexId) -> Result<RiemannTwist> {
    cg.graph.check_vertex(v0)?;
    let sg = &cg.sub.graph;
    let can = chip::canonical_divisor(sg);
    let start = &can - &cg.induced(w0);
    let (reduced, _) = chip::reduce(sg, &start, v0)?;
    let mut fixed = reduced.clone();
    for e in cg.graph.edge_indices() {
        let n = cg.chain.get(e) as i64;
        let chain = cg.sub.chain(e);
        let Some(pos) = chain.iter().position(|&u| reduced[u] == 1) else {
            continue;
        };
        let i = pos as i64 + 1;
        let edge = cg.graph.edge(e);
        // firing the interior with the tent of peak min(i, n − i)
        let peak = i.min(n - i);
        let mut f = vec![0i64; n as usize + 1];
        for (k, slot) in f.iter_mut().enumerate() {
            let k = k as i64;
            *slot = k.min(peak).min(n - k);
        }
        let mut path = vec![edge.tail];
        path.extend_from_slice(chain);
        path.push(edge.head);
        for k in 0..path.len() {
            let mut div = 0;
            if k > 0 {
                div += f[k - 1] - f[k];
            }
            if k + 1 < path.len() {
                div += f[k + 1] - f[k];
            }
            fixed[path[k]] += div;
        }
    }
    let target_div = &can - &fixed;
    let target = admissible_from_divisor(&cg.sub, &target_div).ok_or_else(|| {
        Error::WitnessUnverified("fix-up did not produce an admissible multidegree".into())
    })?;
    let twist = cg.twist_equivalent(w0, &target).ok_or_else(|| {
        Error::WitnessUnverified("fix-up left the twist class".into())
    })?;
    if !chip::satisfies_no_legal_firing(sg, &fixed, v0)? {
        return Err(Error::WitnessUnverified("fixed divisor is not concentrated".into()));
    }
    let d = w0.degree();
    let genus = cg.graph.genus();
    Ok(RiemannTwist { target, bound: (d + 1 - genus).max(genus), reduced, fixed, twist })
}
