//! Structural obstructions to Brill–Noether generality: a point cutting the
//! graph into three or more pieces, or four or more paths forming a
//! disconnecting join.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::{EdgeId, MultiGraph};
use crate::metric::MetricGraph;
use crate::pct::is_multitree;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Obstruction {
    /// Removing `vertex` leaves `n` components of the given genera.
    CutPoint { vertex: String, n: usize, genera: Vec<i64> },
    /// `m` paths between `ends` whose removal separates them.
    MultiedgeJoin { ends: (String, String), m: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct MultitreeVerdict {
    pub multitree: bool,
    /// A multitree whose collapse is a path with at most three edges over
    /// each simple edge.
    pub small_multichain: bool,
    pub obstructions: Vec<Obstruction>,
    pub message: String,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }
}

fn is_bridge(g: &MultiGraph, e: EdgeId) -> bool {
    let ed = g.edge(e);
    let mut seen = vec![false; g.num_vertices()];
    seen[ed.tail] = true;
    let mut stack = vec![ed.tail];
    while let Some(u) = stack.pop() {
        for &f in g.incident(u) {
            if f == e {
                continue;
            }
            let x = g.edge(f).other(u);
            if !seen[x] {
                seen[x] = true;
                stack.push(x);
            }
        }
    }
    !seen[ed.head]
}

/// The model with bridges contracted: class representatives and the
/// surviving edges as class pairs.
struct Contracted {
    reps: Vec<usize>,
    edges: Vec<(EdgeId, usize, usize)>,
}

fn contract_bridges(g: &MultiGraph) -> Contracted {
    let mut dsu = Dsu((0..g.num_vertices()).collect());
    let mut edges = Vec::new();
    for e in g.edge_indices() {
        if is_bridge(g, e) {
            let ed = g.edge(e);
            let (a, b) = (dsu.find(ed.tail), dsu.find(ed.head));
            dsu.0[a.max(b)] = a.min(b);
        }
    }
    let class: Vec<usize> = (0..g.num_vertices()).map(|v| dsu.find(v)).collect();
    for e in g.edge_indices() {
        let ed = g.edge(e);
        if class[ed.tail] != class[ed.head] {
            edges.push((e, class[ed.tail], class[ed.head]));
        }
    }
    let mut reps: Vec<usize> = class.clone();
    reps.sort();
    reps.dedup();
    Contracted { reps, edges }
}

fn cut_points(g: &MultiGraph, c: &Contracted) -> Vec<Obstruction> {
    let mut out = Vec::new();
    for &v in &c.reps {
        let mut dsu = Dsu((0..g.num_vertices()).collect());
        for &(_, a, b) in &c.edges {
            if a != v && b != v {
                let (x, y) = (dsu.find(a), dsu.find(b));
                dsu.0[x.max(y)] = x.min(y);
            }
        }
        // components of the rest, with edge counts including stubs to v
        let mut comps: BTreeMap<usize, (i64, i64)> = BTreeMap::new();
        for &r in c.reps.iter().filter(|&&r| r != v) {
            comps.entry(dsu.find(r)).or_default().0 += 1;
        }
        for &(_, a, b) in &c.edges {
            let side = if a != v { a } else { b };
            if side == v {
                continue;
            }
            comps.entry(dsu.find(side)).or_default().1 += 1;
        }
        if comps.len() >= 3 {
            let genera = comps.values().map(|&(nv, ne)| ne - nv).collect();
            out.push(Obstruction::CutPoint { vertex: g.vertex_name(v).to_string(), n: comps.len(), genera });
        }
    }
    out
}

fn joins(g: &MultiGraph, c: &Contracted) -> Vec<Obstruction> {
    let n = g.num_vertices();
    let mut inc: Vec<Vec<(EdgeId, usize)>> = vec![Vec::new(); n];
    for &(e, a, b) in &c.edges {
        inc[a].push((e, b));
        inc[b].push((e, a));
    }
    let branch = |v: usize| inc[v].len() != 2;
    // maximal paths through degree-2 classes, keyed by their first edge
    let mut paths: BTreeMap<EdgeId, (usize, usize, Vec<EdgeId>)> = BTreeMap::new();
    for &s in c.reps.iter().filter(|&&v| branch(v)) {
        for &(e0, x0) in &inc[s] {
            let mut edges = vec![e0];
            let (mut prev, mut cur) = (e0, x0);
            while !branch(cur) {
                let &(e, x) = inc[cur].iter().find(|&&(e, _)| e != prev).expect("degree two");
                edges.push(e);
                prev = e;
                cur = x;
            }
            let key = *edges.iter().min().unwrap();
            paths.entry(key).or_insert((s.min(cur), s.max(cur), edges));
        }
    }
    let mut groups: BTreeMap<(usize, usize), Vec<&Vec<EdgeId>>> = BTreeMap::new();
    for (a, b, edges) in paths.values() {
        if a != b {
            groups.entry((*a, *b)).or_default().push(edges);
        }
    }
    let mut out = Vec::new();
    for ((a, b), ps) in groups {
        if ps.len() < 2 {
            continue;
        }
        let removed: Vec<EdgeId> = ps.iter().flat_map(|p| p.iter().copied()).collect();
        let mut seen = vec![false; n];
        seen[a] = true;
        let mut stack = vec![a];
        while let Some(u) = stack.pop() {
            for &(e, x) in &inc[u] {
                if !removed.contains(&e) && !seen[x] {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        if !seen[b] && ps.len() >= 4 {
            out.push(Obstruction::MultiedgeJoin {
                ends: (g.vertex_name(a).to_string(), g.vertex_name(b).to_string()),
                m: ps.len(),
            });
        }
    }
    out
}

pub fn multitree_verdict(mg: &MetricGraph) -> MultitreeVerdict {
    let g = mg.model();
    let c = contract_bridges(g);
    let mut obstructions = cut_points(g, &c);
    obstructions.extend(joins(g, &c));
    let mt = is_multitree(g);
    let small_multichain = mt.is_tree
        && g.vertices().all(|v| mt.incident(v).len() <= 2)
        && mt.bar_edges.iter().all(|b| b.edges.len() <= 3);
    let message = match obstructions.first() {
        Some(Obstruction::CutPoint { vertex, n, .. }) => {
            format!("cannot be Brill–Noether general: cut point {vertex} with n={n}")
        }
        Some(Obstruction::MultiedgeJoin { m, .. }) => {
            format!("cannot be Brill–Noether general: multiedge join m={m}")
        }
        None => "no obstruction found".to_string(),
    };
    MultitreeVerdict { multitree: mt.is_tree, small_multichain, obstructions, message }
}
