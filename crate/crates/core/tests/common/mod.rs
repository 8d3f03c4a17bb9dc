//! Random instances and brute-force oracles shared by the integration tests.
//! The oracles work on plain multiplicity matrices so that they share no code
//! with the library beyond graph construction.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tropdeg::chain::{AdmissibleMultidegree, ChainStructure, ChainedGraph};
use tropdeg::{Divisor, GraphSpec, MultiGraph};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Connected loopless multigraph on `1..=max_v` vertices: a random spanning
/// tree plus up to `max_extra` extra edges, each randomly oriented.
pub fn random_graph(rng: &mut TestRng, max_v: usize, max_extra: usize) -> MultiGraph {
    let n = rng.gen_range(1..=max_v);
    let mut spec = GraphSpec::default();
    for i in 0..n {
        spec.vertex(format!("v{i}"));
    }
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((rng.gen_range(0..i), i));
    }
    if n > 1 {
        for _ in 0..rng.gen_range(0..=max_extra) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            pairs.push((a, b));
        }
    }
    for (k, (a, b)) in pairs.into_iter().enumerate() {
        let (t, h) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
        spec.edge(format!("e{k}"), format!("v{t}"), format!("v{h}"));
    }
    MultiGraph::build(&spec).expect("random graph is valid")
}

pub fn random_chained(rng: &mut TestRng, max_v: usize, max_extra: usize, max_n: u32) -> ChainedGraph {
    let g = random_graph(rng, max_v, max_extra);
    let n: Vec<i64> = g.edge_indices().map(|_| rng.gen_range(1..=max_n as i64)).collect();
    let chain = ChainStructure::new(&g, n).expect("positive chain lengths");
    ChainedGraph::new(g, chain).expect("valid chain structure")
}

/// Random admissible multidegree with vertex degrees in `lo..=hi`.
pub fn random_multidegree(rng: &mut TestRng, cg: &ChainedGraph, lo: i64, hi: i64) -> AdmissibleMultidegree {
    let w: Vec<i64> = cg.graph.vertices().map(|_| rng.gen_range(lo..=hi)).collect();
    let mu: Vec<i64> = cg.graph.edge_indices().map(|e| rng.gen_range(0..cg.chain.get(e) as i64)).collect();
    cg.multidegree(w, mu).expect("admissible")
}

/// Effective admissible multidegree of total degree exactly `d` (if `d` is
/// at least the number of nonzero `mu`).
pub fn random_effective_multidegree(rng: &mut TestRng, cg: &ChainedGraph, d: i64) -> AdmissibleMultidegree {
    let mut mu: Vec<i64> = vec![0; cg.graph.num_edges()];
    let mut left = d;
    for e in cg.graph.edge_indices() {
        let n = cg.chain.get(e) as i64;
        if left > 0 && n > 1 && rng.gen_bool(0.3) {
            mu[e] = rng.gen_range(1..n);
            left -= 1;
        }
    }
    let mut w = vec![0i64; cg.graph.num_vertices()];
    for _ in 0..left {
        let i = rng.gen_range(0..w.len());
        w[i] += 1;
    }
    cg.multidegree(w, mu).expect("admissible")
}

pub fn random_divisor(rng: &mut TestRng, g: &MultiGraph, degree: i64, spread: i64) -> Divisor {
    let n = g.num_vertices();
    let mut c: Vec<i64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
    let fix = rng.gen_range(0..n);
    let rest: i64 = c.iter().sum::<i64>() - c[fix];
    c[fix] = degree - rest;
    Divisor::from_vec(c)
}

/// Multitree on 2..=4 vertices with 1..=3 parallel edges per tree edge.
pub fn random_multitree(rng: &mut TestRng) -> ChainedGraph {
    let k = rng.gen_range(2..=4);
    let mut spec = GraphSpec::default();
    for i in 0..k {
        spec.vertex(format!("x{i}"));
    }
    let mut lens = Vec::new();
    for i in 1..k {
        let p = rng.gen_range(0..i);
        for m in 0..rng.gen_range(1..=3) {
            let (t, h) = if rng.gen_bool(0.5) { (p, i) } else { (i, p) };
            spec.edge(format!("e{i}_{m}"), format!("x{t}"), format!("x{h}"));
            lens.push(rng.gen_range(1..=3));
        }
    }
    let g = MultiGraph::build(&spec).unwrap();
    let n = ChainStructure::new(&g, lens).unwrap();
    ChainedGraph::new(g, n).unwrap()
}

pub fn shuffled<T: Clone>(rng: &mut TestRng, xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.shuffle(rng);
    v
}

/// Symmetric multiplicity matrix.
#[derive(Debug, Clone)]
pub struct Adj(pub Vec<Vec<i64>>);

impl Adj {
    pub fn of(g: &MultiGraph) -> Self {
        let n = g.num_vertices();
        let mut m = vec![vec![0i64; n]; n];
        for e in g.edges() {
            m[e.tail][e.head] += 1;
            m[e.head][e.tail] += 1;
        }
        Adj(m)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn valence(&self, v: usize) -> i64 {
        self.0[v].iter().sum()
    }

    pub fn genus(&self) -> i64 {
        let e: i64 = (0..self.n()).map(|v| self.valence(v)).sum::<i64>() / 2;
        e - self.n() as i64 + 1
    }

    /// Fire every vertex of `set` once.
    pub fn fire_set(&self, d: &mut [i64], set: &[bool]) {
        for v in 0..self.n() {
            if !set[v] {
                continue;
            }
            for u in 0..self.n() {
                if !set[u] {
                    d[v] -= self.0[v][u];
                    d[u] += self.0[v][u];
                }
            }
        }
    }

    fn bfs_layers(&self, q: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[q] = 0;
        let mut queue = std::collections::VecDeque::from([q]);
        while let Some(v) = queue.pop_front() {
            for u in 0..self.n() {
                if self.0[v][u] > 0 && dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Vertices left unburnt when fire spreads from `q`.
    pub fn unburnt(&self, d: &[i64], q: usize) -> Vec<bool> {
        let n = self.n();
        let mut burnt = vec![false; n];
        burnt[q] = true;
        loop {
            let mut changed = false;
            for v in 0..n {
                if burnt[v] {
                    continue;
                }
                let threats: i64 = (0..n).filter(|&u| burnt[u]).map(|u| self.0[v][u]).sum();
                if d[v] < threats {
                    burnt[v] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        burnt.iter().map(|b| !b).collect()
    }

    /// `q`-reduced form: push chips outward layer by layer until every
    /// vertex other than `q` is nonnegative, then fire unburnt sets.
    pub fn reduce(&self, d: &[i64], q: usize) -> Vec<i64> {
        let mut d = d.to_vec();
        let dist = self.bfs_layers(q);
        let far = dist.iter().copied().max().unwrap_or(0);
        for k in (0..far).rev() {
            let inside: Vec<bool> = dist.iter().map(|&x| x <= k).collect();
            while (0..self.n()).any(|v| dist[v] == k + 1 && d[v] < 0) {
                self.fire_set(&mut d, &inside);
            }
        }
        loop {
            let s = self.unburnt(&d, q);
            if !s.iter().any(|&x| x) {
                return d;
            }
            self.fire_set(&mut d, &s);
        }
    }

    pub fn is_effective_class(&self, d: &[i64]) -> bool {
        d.iter().sum::<i64>() >= 0 && self.reduce(d, 0)[0] >= 0
    }

    /// Rank by definition: the largest `k` such that `d - E` is equivalent
    /// to an effective divisor for every effective `E` of degree `k`.
    pub fn rank(&self, d: &[i64]) -> i64 {
        if !self.is_effective_class(d) {
            return -1;
        }
        let mut k = 1;
        loop {
            let mut all = true;
            for_each_multiset(self.n(), k, &mut |e| {
                if all {
                    let mut x = d.to_vec();
                    for &v in e {
                        x[v] -= 1;
                    }
                    if !self.is_effective_class(&x) {
                        all = false;
                    }
                }
            });
            if !all {
                return k as i64 - 1;
            }
            k += 1;
        }
    }

    pub fn canonical(&self) -> Vec<i64> {
        (0..self.n()).map(|v| self.valence(v) - 2).collect()
    }
}

/// Calls `f` on every nondecreasing `k`-tuple from `0..n`.
pub fn for_each_multiset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for v in start..n {
            cur.push(v);
            go(n, k, v, cur, f);
            cur.pop();
        }
    }
    go(n, k, 0, &mut Vec::new(), f);
}
