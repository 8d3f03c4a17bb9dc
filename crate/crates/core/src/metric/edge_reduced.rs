//! Edge-reduced divisors: chip transport along edges for prescribed vertex
//! values, and the staged decomposition of an equivalence between two
//! edge-reduced effective divisors.

use num_traits::{Signed, Zero};

use super::{div_pl, MetricDivisor, MetricGraph, PLFunction, Q};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId};

/// Effective off the vertices, with at most one chip inside each edge.
pub fn is_edge_reduced(mg: &MetricGraph, d: &MetricDivisor) -> bool {
    mg.model().edge_indices().all(|e| edge_chip(d, e).is_ok())
}

/// Offset of the single interior chip on `e`, if any.
fn edge_chip(d: &MetricDivisor, e: EdgeId) -> std::result::Result<Option<Q>, ()> {
    let pts = d.on_edge(e);
    match pts.as_slice() {
        [] => Ok(None),
        [(x, 1)] => Ok(Some(*x)),
        _ => Err(()),
    }
}

/// The unique `f` with `f(v) = c[v]` keeping `d + div f` edge-reduced, and
/// that divisor.
///
/// On an edge with `c` dropping by `mu` from the sender, the interior chip
/// at `p` (or a fresh one drawn from the sender, `p = 0`) travels to
/// `p' ≡ p + mu (mod len)` with `p'` in `(0, len]`; `p' = len` means it is
/// absorbed at the far end.
pub fn move_chips_edge_reduced(
    mg: &MetricGraph,
    d: &MetricDivisor,
    c: &[Q],
) -> Result<(MetricDivisor, PLFunction)> {
    let g = mg.model();
    if c.len() != g.num_vertices() {
        return Err(Error::PreconditionFailed("one value per vertex is required".into()));
    }
    let mut pieces = Vec::with_capacity(g.num_edges());
    for e in g.edge_indices() {
        let chip = edge_chip(d, e).map_err(|_| Error::NotEdgeReduced(g.edge_name(e).to_string()))?;
        let len = mg.length(e);
        let edge = g.edge(e);
        let mu = c[edge.tail] - c[edge.head];
        let mirrored = mu.is_negative();
        let (sender, mu) = if mirrored { (edge.head, -mu) } else { (edge.tail, mu) };
        let p = match chip {
            None => Q::zero(),
            Some(x) if mirrored => len - x,
            Some(x) => x,
        };
        let travelled = p + mu;
        let wraps = (travelled / len).floor();
        let mut p2 = travelled - wraps * len;
        if p2.is_zero() {
            p2 = len;
        }
        let s0 = (p2 - p - mu) / len;
        debug_assert!(s0.is_integer());
        let cs = c[sender];
        let f = |x: Q| -> Q {
            let pos = |y: Q| if y.is_positive() { y } else { Q::zero() };
            cs + s0 * x - pos(x - p) + pos(x - p2)
        };
        let mut xs = vec![Q::zero(), p, p2, len];
        xs.sort();
        xs.dedup();
        let mut bp: Vec<(Q, Q)> = xs.into_iter().map(|x| (x, f(x))).collect();
        if mirrored {
            bp = bp.into_iter().rev().map(|(x, y)| (len - x, y)).collect();
        }
        pieces.push(bp);
    }
    let f = PLFunction::new(mg, pieces)?;
    let out = d + &div_pl(mg, &f)?;
    debug_assert!(is_edge_reduced(mg, &out));
    Ok((out, f))
}

/// Stages `D_1 = D, …, D_n = D'` with the vertex values used between them.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Vertices by nonincreasing value of `f`.
    pub order: Vec<VertexId>,
    pub stages: Vec<MetricDivisor>,
    /// Vertex values `c^j` moving stage `j` to stage `j + 1`.
    pub values: Vec<Vec<Q>>,
    pub functions: Vec<PLFunction>,
}

fn fail(msg: String) -> Error {
    Error::PreconditionFailed(msg)
}

/// Decomposes the equivalence `d2 - d = div f` into stages moving one level
/// of `f` at a time, and checks the four stage certificates.
pub fn equiv_decompose(
    mg: &MetricGraph,
    d: &MetricDivisor,
    d2: &MetricDivisor,
    f: &PLFunction,
) -> Result<Decomposition> {
    let g = mg.model();
    for (name, x) in [("D", d), ("D'", d2)] {
        if !x.is_effective() {
            return Err(fail(format!("{name} is not effective")));
        }
        if !is_edge_reduced(mg, x) {
            return Err(fail(format!("{name} is not edge-reduced")));
        }
    }
    if &(d + &div_pl(mg, f)?) != d2 {
        return Err(fail("D' - D is not div f".into()));
    }
    let n = g.num_vertices();
    let fv: Vec<Q> = g.vertices().map(|v| f.vertex_value(mg, v)).collect();
    let mut order: Vec<VertexId> = g.vertices().collect();
    order.sort_by(|&a, &b| fv[b].cmp(&fv[a]).then(a.cmp(&b)));

    let mut stages = vec![d.clone()];
    let mut values = Vec::new();
    let mut functions = Vec::new();
    for j in 0..n.saturating_sub(1) {
        let mut c = vec![Q::zero(); n];
        for (i, &v) in order.iter().enumerate() {
            c[v] = if i <= j { fv[order[j]] } else { fv[order[j + 1]] };
        }
        let (next, h) = move_chips_edge_reduced(mg, &stages[j], &c)?;
        stages.push(next);
        values.push(c);
        functions.push(h);
    }
    let dec = Decomposition { order, stages, values, functions };
    check_interpolation(mg, &dec)?;
    check_ties(&dec, &fv)?;
    check_one_sided(&dec, d, d2)?;
    if dec.stages.last() != Some(d2) {
        return Err(fail("certificate (iv): last stage differs from D'".into()));
    }
    Ok(dec)
}

/// Values of `alpha` in `[0, 1]` at which some chip reaches a vertex, with
/// midpoints between them; between these the divisor moves continuously.
fn alpha_grid(mg: &MetricGraph, d: &MetricDivisor, c: &[Q]) -> Vec<Q> {
    let g = mg.model();
    let mut grid = vec![Q::zero(), Q::from_integer(1)];
    for e in g.edge_indices() {
        let edge = g.edge(e);
        let len = mg.length(e);
        let mu = c[edge.tail] - c[edge.head];
        if mu.is_zero() {
            continue;
        }
        let chip = d.on_edge(e).first().map(|&(x, _)| x);
        let p = match chip {
            None => Q::zero(),
            Some(x) if mu.is_negative() => len - x,
            Some(x) => x,
        };
        let mu = mu.abs();
        let mut k = 1i64;
        loop {
            let a = (len * k - p) / mu;
            if a > Q::from_integer(1) {
                break;
            }
            if a.is_positive() {
                grid.push(a);
            }
            k += 1;
        }
    }
    grid.sort();
    grid.dedup();
    let mids: Vec<Q> = grid.windows(2).map(|w| (w[0] + w[1]) / 2).collect();
    grid.extend(mids);
    grid.sort();
    grid
}

fn check_interpolation(mg: &MetricGraph, dec: &Decomposition) -> Result<()> {
    for (j, c) in dec.values.iter().enumerate() {
        let stage = &dec.stages[j];
        for alpha in alpha_grid(mg, stage, c) {
            let scaled: Vec<Q> = c.iter().map(|&x| x * alpha).collect();
            let (x, _) = move_chips_edge_reduced(mg, stage, &scaled)?;
            if !x.is_effective() || !is_edge_reduced(mg, &x) {
                return Err(fail(format!(
                    "certificate (i): stage {} fails at alpha {}",
                    j + 1,
                    super::format_rational(&alpha)
                )));
            }
        }
    }
    Ok(())
}

fn check_ties(dec: &Decomposition, fv: &[Q]) -> Result<()> {
    for j in 0..dec.functions.len() {
        if fv[dec.order[j]] == fv[dec.order[j + 1]] && !dec.functions[j].is_constant() {
            return Err(fail(format!("certificate (ii): stage {} moves across a tie", j + 1)));
        }
    }
    Ok(())
}

fn check_one_sided(dec: &Decomposition, d: &MetricDivisor, d2: &MetricDivisor) -> Result<()> {
    for (i, stage) in dec.stages.iter().enumerate() {
        for (j, &v) in dec.order.iter().enumerate() {
            let x = stage.vertex_coeff(v);
            if j >= i && x < d.vertex_coeff(v) {
                return Err(fail(format!("certificate (iii): stage {} below D at position {}", i + 1, j + 1)));
            }
            if j <= i && x < d2.vertex_coeff(v) {
                return Err(fail(format!("certificate (iii): stage {} below D' at position {}", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}
