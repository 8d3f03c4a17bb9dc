//! Rational points at a common denominator form a finite graph; reduction,
//! rank and equivalence on the metric graph are computed there.

use num_traits::Zero;

use super::{lcm_denominators, MetricDivisor, MetricGraph, MetricPoint, PLFunction, Q};
use crate::chip::{self, RankSearch};
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{Edge, MultiGraph, VertexId};

/// The unit subdivision at scale `N`: every point whose offset is a multiple
/// of `1/N` becomes a vertex. Model vertices keep their indices.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub graph: MultiGraph,
    pub scale: i64,
    /// Lattice vertices strictly inside each edge, from the tail.
    interior: Vec<Vec<VertexId>>,
    points: Vec<MetricPoint>,
}

impl Lattice {
    pub fn new(mg: &MetricGraph, scale: i64) -> Result<Self> {
        let g = mg.model();
        let mut vertex_ids: Vec<String> = g.vertices().map(|v| g.vertex_name(v).to_string()).collect();
        let mut genera: Vec<u32> = g.vertices().map(|v| g.vertex_genus(v)).collect();
        let mut points: Vec<MetricPoint> = g.vertices().map(MetricPoint::Vertex).collect();
        let mut interior = Vec::with_capacity(g.num_edges());
        let mut edge_ids = Vec::new();
        let mut edges = Vec::new();
        for e in g.edge_indices() {
            let steps = mg.length(e) * scale;
            if !steps.is_integer() {
                return Err(Error::PreconditionFailed(format!(
                    "scale {scale} does not clear the length of {}",
                    g.edge_name(e)
                )));
            }
            let steps = steps.to_integer();
            let name = g.edge_name(e);
            let Edge { tail, head } = g.edge(e);
            let mut chain = Vec::with_capacity(steps as usize - 1);
            for k in 1..steps {
                chain.push(vertex_ids.len());
                vertex_ids.push(format!("{name}@{k}"));
                genera.push(0);
                points.push(MetricPoint::Edge { edge: e, offset: Q::new(k, scale) });
            }
            let mut prev = tail;
            for (k, &u) in chain.iter().enumerate() {
                edge_ids.push(format!("{name}/{}", k + 1));
                edges.push(Edge { tail: prev, head: u });
                prev = u;
            }
            edge_ids.push(format!("{name}/{steps}"));
            edges.push(Edge { tail: prev, head });
            interior.push(chain);
        }
        let graph = MultiGraph::from_parts(vertex_ids, genera, edge_ids, edges)?;
        Ok(Lattice { graph, scale, interior, points })
    }

    pub fn vertex_of(&self, p: &MetricPoint) -> Option<VertexId> {
        match p {
            MetricPoint::Vertex(v) => Some(*v),
            MetricPoint::Edge { edge, offset } => {
                let k = *offset * self.scale;
                if !k.is_integer() {
                    return None;
                }
                self.interior[*edge].get(k.to_integer() as usize - 1).copied()
            }
        }
    }

    pub fn point_of(&self, v: VertexId) -> &MetricPoint {
        &self.points[v]
    }

    pub fn to_graph_divisor(&self, d: &MetricDivisor) -> Result<Divisor> {
        let mut out = Divisor::zero(self.graph.num_vertices());
        for (p, c) in d.iter() {
            let v = self.vertex_of(p).ok_or_else(|| {
                Error::PreconditionFailed("divisor point is off the lattice".into())
            })?;
            out[v] += c;
        }
        Ok(out)
    }

    pub fn from_graph_divisor(&self, d: &Divisor) -> MetricDivisor {
        let mut out = MetricDivisor::default();
        for (v, &c) in d.as_slice().iter().enumerate() {
            out.add_point(self.points[v].clone(), c);
        }
        out
    }

    /// The function with the given value at each lattice vertex, linear on
    /// each unit segment.
    pub fn function_from_values(&self, mg: &MetricGraph, values: &[Q]) -> PLFunction {
        let g = mg.model();
        let pieces = g
            .edge_indices()
            .map(|e| {
                let Edge { tail, head } = g.edge(e);
                let mut bp = vec![(Q::zero(), values[tail])];
                for (k, &u) in self.interior[e].iter().enumerate() {
                    bp.push((Q::new(k as i64 + 1, self.scale), values[u]));
                }
                bp.push((mg.length(e), values[head]));
                bp
            })
            .collect();
        PLFunction::from_pieces_unchecked(pieces)
    }

    /// The function `f` with `D + div f` equal to firing `t`, normalized to
    /// vanish at `base`.
    pub fn firing_function(&self, mg: &MetricGraph, t: &[i64], base: VertexId) -> PLFunction {
        let values: Vec<Q> = t.iter().map(|&x| Q::new(x - t[base], self.scale)).collect();
        self.function_from_values(mg, &values)
    }
}

/// Least common denominator of lengths and of the given points' offsets.
pub fn common_scale<'a>(mg: &MetricGraph, points: impl IntoIterator<Item = &'a MetricPoint>) -> i64 {
    let offsets: Vec<Q> = points
        .into_iter()
        .filter_map(|p| match p {
            MetricPoint::Edge { offset, .. } => Some(*offset),
            MetricPoint::Vertex(_) => None,
        })
        .collect();
    lcm_denominators(mg.lengths().iter().chain(offsets.iter()))
}

/// The `q`-reduced divisor equivalent to `d`, with `f` such that
/// `d + div f` is the result and `f(q) = 0`.
pub fn mg_reduce(mg: &MetricGraph, d: &MetricDivisor, q: &MetricPoint) -> Result<(MetricDivisor, PLFunction)> {
    let scale = common_scale(mg, d.points().chain(std::iter::once(q)));
    let lat = Lattice::new(mg, scale)?;
    let gd = lat.to_graph_divisor(d)?;
    let qv = lat.vertex_of(q).expect("scale clears q");
    let (r, t) = chip::reduce(&lat.graph, &gd, qv)?;
    Ok((lat.from_graph_divisor(&r), lat.firing_function(mg, t.counts(), qv)))
}

/// `f` with `d2 - d = div f` when the divisors are equivalent.
pub fn mg_linear_equiv(mg: &MetricGraph, d: &MetricDivisor, d2: &MetricDivisor) -> Option<PLFunction> {
    if d.degree() != d2.degree() {
        return None;
    }
    let scale = common_scale(mg, d.points().chain(d2.points()));
    let lat = Lattice::new(mg, scale).ok()?;
    let q = mg.model().least_vertex();
    let (r1, t1) = chip::reduce(&lat.graph, &lat.to_graph_divisor(d).ok()?, q).ok()?;
    let (r2, t2) = chip::reduce(&lat.graph, &lat.to_graph_divisor(d2).ok()?, q).ok()?;
    if r1 != r2 {
        return None;
    }
    let f1 = lat.firing_function(mg, t1.counts(), q);
    let f2 = lat.firing_function(mg, t2.counts(), q);
    Some(f1.sub(&f2))
}

#[derive(Debug, Clone, Default)]
pub struct MetricRankOptions {
    pub cap: Option<i64>,
    pub budget: Option<u64>,
    /// Also compute at twice the scale and require agreement.
    pub check_refinement: bool,
    /// Extra refinement factor applied to the scale.
    pub refine: i64,
}

/// Rank of `d` on the metric graph.
pub fn mg_rank(mg: &MetricGraph, d: &MetricDivisor) -> Result<i64> {
    mg_rank_with(mg, d, &MetricRankOptions::default())
}

/// Rank computed on the lattice at the common denominator, testing only
/// effective divisors on model vertices (a rank-determining set).
pub fn mg_rank_with(mg: &MetricGraph, d: &MetricDivisor, opts: &MetricRankOptions) -> Result<i64> {
    let base = common_scale(mg, d.points()) * opts.refine.max(1);
    let r = rank_at_scale(mg, d, base, opts)?;
    if opts.check_refinement {
        let r2 = rank_at_scale(mg, d, base * 2, opts)?;
        if r2 != r {
            return Err(Error::WitnessUnverified(format!(
                "rank {r} at scale {base} but {r2} at scale {}",
                base * 2
            )));
        }
    }
    Ok(r)
}

fn rank_at_scale(mg: &MetricGraph, d: &MetricDivisor, scale: i64, opts: &MetricRankOptions) -> Result<i64> {
    let lat = Lattice::new(mg, scale)?;
    let gd = lat.to_graph_divisor(d)?;
    let test: Vec<VertexId> = mg.model().vertices().collect();
    chip::rank_search(
        &lat.graph,
        &gd,
        &RankSearch {
            cap: opts.cap.unwrap_or(i64::MAX),
            base: mg.model().least_vertex(),
            test_set: Some(&test),
            budget: opts.budget,
        },
    )
}
