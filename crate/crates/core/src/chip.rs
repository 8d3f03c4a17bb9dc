//! Chip-firing on finite multigraphs: firing moves, reduced divisors (Dhar
//! burning), Baker–Norine rank, canonical divisor and equivalence
//! certificates.

use std::collections::HashSet;

use crate::divisor::{Divisor, TwistVector};
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, VertexId};

/// Fire `v` once: it loses its valence, each neighbour gains one chip per edge.
pub fn fire(g: &MultiGraph, d: &Divisor, v: VertexId) -> Result<Divisor> {
    g.check_vertex(v)?;
    let mut out = d.clone();
    fire_in_place(g, &mut out, v, 1);
    Ok(out)
}

pub(crate) fn fire_in_place(g: &MultiGraph, d: &mut Divisor, v: VertexId, times: i64) {
    if times == 0 {
        return;
    }
    d[v] -= times * g.valence(v) as i64;
    for &(w, m) in g.neighbors(v) {
        d[w] += times * m as i64;
    }
}

/// Fire every vertex of `set` `times` times (only the boundary edges move chips).
fn fire_set_in_place(g: &MultiGraph, d: &mut Divisor, in_set: &[bool], times: i64) {
    for v in g.vertices().filter(|&v| in_set[v]) {
        for &(w, m) in g.neighbors(v) {
            if !in_set[w] {
                d[v] -= times * m as i64;
                d[w] += times * m as i64;
            }
        }
    }
}

/// Result of firing each vertex `t(v)` times.
pub fn apply_twists(g: &MultiGraph, d: &Divisor, t: &TwistVector) -> Divisor {
    let mut out = d.clone();
    for v in g.vertices() {
        fire_in_place(g, &mut out, v, t[v]);
    }
    out
}

/// Runs the burning process from `v0`; returns the unburnt set.
///
/// A vertex burns once its coefficient is strictly below the number of edges
/// to already-burnt vertices. Scans in ascending vertex order.
fn burn(g: &MultiGraph, d: &Divisor, v0: VertexId) -> Vec<bool> {
    let n = g.num_vertices();
    let mut unburnt = vec![true; n];
    unburnt[v0] = false;
    // edges from each vertex into the burnt set
    let mut heat = vec![0i64; n];
    let mut stack = vec![v0];
    while let Some(b) = stack.pop() {
        for &(w, m) in g.neighbors(b) {
            if unburnt[w] {
                heat[w] += m as i64;
                if d[w] < heat[w] {
                    unburnt[w] = false;
                    stack.push(w);
                }
            }
        }
    }
    // vertices with negative coefficients and no burnt neighbour still burn
    let mut changed = true;
    while changed {
        changed = false;
        for v in g.vertices() {
            if unburnt[v] && d[v] < heat[v] {
                unburnt[v] = false;
                changed = true;
                for &(w, m) in g.neighbors(v) {
                    heat[w] += m as i64;
                }
            }
        }
    }
    unburnt
}

/// The second half of reducedness on its own: every nonempty `S` avoiding `v0` has a
/// vertex with fewer chips than edges leaving `S`.
pub fn satisfies_no_legal_firing(g: &MultiGraph, d: &Divisor, v0: VertexId) -> Result<bool> {
    g.check_vertex(v0)?;
    Ok(burn(g, d, v0).iter().all(|&u| !u))
}

pub fn is_v_reduced(g: &MultiGraph, d: &Divisor, v0: VertexId) -> Result<bool> {
    g.check_vertex(v0)?;
    if g.vertices().any(|v| v != v0 && d[v] < 0) {
        return Ok(false);
    }
    satisfies_no_legal_firing(g, d, v0)
}

/// The unique `v0`-reduced divisor equivalent to `d`, with the twist vector
/// carrying `d` to it.
pub fn reduce(g: &MultiGraph, d: &Divisor, v0: VertexId) -> Result<(Divisor, TwistVector)> {
    g.check_vertex(v0)?;
    let n = g.num_vertices();
    let mut cur = d.clone();
    let mut fired = vec![0i64; n];

    // Phase 1: make every v != v0 nonnegative. Firing the ball of radius k
    // around v0 feeds layer k from layer k-1 and leaves farther layers alone.
    let dist: Vec<usize> = g.bfs_distances(v0).into_iter().map(|x| x.unwrap()).collect();
    let max_layer = dist.iter().copied().max().unwrap_or(0);
    for layer in (1..=max_layer).rev() {
        let ball: Vec<bool> = dist.iter().map(|&x| x < layer).collect();
        loop {
            let mut times = 0i64;
            for v in g.vertices().filter(|&v| dist[v] == layer && cur[v] < 0) {
                let inflow = g.out_degree(v, &negate(&ball)) as i64;
                // inflow counts edges from v into the ball
                let need = (-cur[v] + inflow - 1) / inflow;
                times = times.max(need);
            }
            if times == 0 {
                break;
            }
            fire_set_in_place(g, &mut cur, &ball, times);
            for v in g.vertices().filter(|&v| ball[v]) {
                fired[v] += times;
            }
        }
    }

    // Phase 2: Dhar burning; fire the unburnt set as often as stays legal.
    loop {
        let unburnt = burn(g, &cur, v0);
        if !unburnt.iter().any(|&u| u) {
            break;
        }
        let mut times = i64::MAX;
        for v in g.vertices().filter(|&v| unburnt[v]) {
            let out = g.out_degree(v, &unburnt) as i64;
            if out > 0 {
                times = times.min(cur[v] / out);
            }
        }
        debug_assert!(times >= 1 && times < i64::MAX);
        fire_set_in_place(g, &mut cur, &unburnt, times);
        for v in g.vertices().filter(|&v| unburnt[v]) {
            fired[v] += times;
        }
    }
    Ok((cur, TwistVector::normalized(fired)))
}

fn negate(mask: &[bool]) -> Vec<bool> {
    mask.iter().map(|b| !b).collect()
}

/// Whether `d` is equivalent to an effective divisor.
pub fn is_effective_class(g: &MultiGraph, d: &Divisor) -> bool {
    if d.degree() < 0 {
        return false;
    }
    let q = g.least_vertex();
    let (r, _) = reduce(g, d, q).expect("base point is valid");
    r[q] >= 0
}

/// Baker–Norine rank of `d`.
pub fn rank_finite(g: &MultiGraph, d: &Divisor) -> i64 {
    rank_capped(g, d, i64::MAX)
}

/// `min(rank(d), cap)`; stops enumerating once `cap` is certified.
///
/// Level `k` holds the reduced classes of `d - E` over effective `E` of
/// degree `k`; the rank is the last level whose classes are all effective.
pub fn rank_capped(g: &MultiGraph, d: &Divisor, cap: i64) -> i64 {
    let q = g.least_vertex();
    rank_capped_at(g, d, cap, q)
}

pub fn rank_capped_at(g: &MultiGraph, d: &Divisor, cap: i64, q: VertexId) -> i64 {
    rank_search(g, d, &RankSearch { cap, base: q, test_set: None, budget: None })
        .expect("unbudgeted search cannot fail")
}

/// Options for [`rank_search`].
#[derive(Debug, Clone)]
pub struct RankSearch<'a> {
    pub cap: i64,
    pub base: VertexId,
    /// Vertices `E` is drawn from; must be rank-determining. `None` means all.
    pub test_set: Option<&'a [VertexId]>,
    /// Maximum number of reductions before giving up.
    pub budget: Option<u64>,
}

pub fn rank_search(g: &MultiGraph, d: &Divisor, opts: &RankSearch) -> Result<i64> {
    if d.degree() < 0 {
        return Ok(-1);
    }
    let q = opts.base;
    let (r0, _) = reduce(g, d, q)?;
    if r0[q] < 0 {
        return Ok(-1);
    }
    let all: Vec<VertexId> = g.vertices().collect();
    let test = opts.test_set.unwrap_or(&all);
    let mut spent = 0u64;
    let mut level: HashSet<Divisor> = HashSet::from([r0]);
    let mut k = 0i64;
    while k < opts.cap {
        let mut next = HashSet::new();
        // the verdict does not depend on iteration order
        for x in &level {
            for &v in test {
                spent += 1;
                if let Some(b) = opts.budget {
                    if spent > b {
                        return Err(Error::BudgetExceeded(b));
                    }
                }
                let mut y = x.clone();
                y[v] -= 1;
                let (ry, _) = reduce(g, &y, q)?;
                if ry[q] < 0 {
                    return Ok(k);
                }
                next.insert(ry);
            }
        }
        level = next;
        k += 1;
    }
    Ok(opts.cap)
}

/// Coefficient `2 genus(v) - 2 + val(v)` at every vertex.
pub fn canonical_divisor(g: &MultiGraph) -> Divisor {
    Divisor::from_vec(
        g.vertices()
            .map(|v| 2 * g.vertex_genus(v) as i64 - 2 + g.valence(v) as i64)
            .collect(),
    )
}

/// Twist vector carrying `d` to `d2` when they are linearly equivalent.
///
/// Both are reduced at the lexicographically least vertex.
pub fn linear_equiv(g: &MultiGraph, d: &Divisor, d2: &Divisor) -> Option<TwistVector> {
    if d.degree() != d2.degree() {
        return None;
    }
    let q = g.least_vertex();
    let (r1, t1) = reduce(g, d, q).ok()?;
    let (r2, t2) = reduce(g, d2, q).ok()?;
    if r1 != r2 {
        return None;
    }
    Some(t1.compose(&t2.inverse()))
}
