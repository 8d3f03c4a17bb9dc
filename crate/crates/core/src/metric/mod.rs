//! Metric graphs with rational edge lengths, their divisors and integer-slope
//! piecewise-linear functions.

mod edge_reduced;
mod lattice;

pub use edge_reduced::{
    equiv_decompose, is_edge_reduced, move_chips_edge_reduced, Decomposition,
};
pub use lattice::{
    common_scale, mg_linear_equiv, mg_rank, mg_rank_with, mg_reduce, Lattice, MetricRankOptions,
};

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphSpec, MultiGraph, VertexId};

pub type Q = Ratio<i64>;

/// Parses `"p/q"` or an integer `"p"`; decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("{s:?} is not a rational of the form p/q"));
    let int = |t: &str| -> Result<i64> {
        let t = t.trim();
        if t.is_empty() || !t.trim_start_matches(['-', '+']).chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        t.parse::<i64>().map_err(|_| bad())
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (int(p)?, int(q)?);
            if q == 0 {
                return Err(bad());
            }
            Ok(Q::new(p, q))
        }
        None => Ok(Q::from_integer(int(s)?)),
    }
}

pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A metric graph: a loopless connected model with positive rational lengths.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    model: MultiGraph,
    lengths: Vec<Q>,
}

/// A point of a metric graph in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricPoint {
    Vertex(VertexId),
    /// Strictly inside `edge`, at `offset` from its tail.
    Edge { edge: EdgeId, offset: Q },
}

impl MetricGraph {
    pub fn new(model: MultiGraph, lengths: Vec<Q>) -> Result<Self> {
        if lengths.len() != model.num_edges() {
            return Err(Error::PreconditionFailed("one length per edge is required".into()));
        }
        for (e, l) in lengths.iter().enumerate() {
            if !l.is_positive() {
                return Err(Error::PreconditionFailed(format!(
                    "edge {} has nonpositive length {}",
                    model.edge_name(e),
                    format_rational(l)
                )));
            }
        }
        Ok(MetricGraph { model, lengths })
    }

    pub fn unit(model: MultiGraph) -> Self {
        let lengths = vec![Q::one(); model.num_edges()];
        MetricGraph { model, lengths }
    }

    /// Builds from a spec whose edges may be loops; each loop `e` is split
    /// at its midpoint into edges `e.1`, `e.2` through a new vertex `e.mid`.
    /// Missing lengths default to 1.
    pub fn from_spec(spec: &GraphSpec, lengths: &BTreeMap<String, Q>) -> Result<Self> {
        for name in lengths.keys() {
            if !spec.edges.iter().any(|e| &e.id == name) {
                return Err(Error::UnknownEdge(name.clone()));
            }
        }
        let mut out = GraphSpec { vertices: spec.vertices.clone(), edges: Vec::new() };
        let mut lens = Vec::new();
        for e in &spec.edges {
            let l = lengths.get(&e.id).copied().unwrap_or_else(Q::one);
            if e.tail == e.head {
                let mid = format!("{}.mid", e.id);
                out.vertex(mid.clone());
                out.edge(format!("{}.1", e.id), e.tail.clone(), mid.clone());
                out.edge(format!("{}.2", e.id), mid, e.head.clone());
                lens.push(l / 2);
                lens.push(l / 2);
            } else {
                out.edges.push(e.clone());
                lens.push(l);
            }
        }
        Self::new(MultiGraph::build(&out)?, lens)
    }

    pub fn model(&self) -> &MultiGraph {
        &self.model
    }

    pub fn length(&self, e: EdgeId) -> Q {
        self.lengths[e]
    }

    pub fn lengths(&self) -> &[Q] {
        &self.lengths
    }

    /// First Betti number plus vertex genera of the model.
    pub fn genus(&self) -> i64 {
        self.model.genus()
    }

    /// Canonical point at `offset` along `e` from its tail.
    pub fn point(&self, e: EdgeId, offset: Q) -> Result<MetricPoint> {
        if e >= self.model.num_edges() {
            return Err(Error::UnknownEdge(e.to_string()));
        }
        let l = self.lengths[e];
        if offset.is_negative() || offset > l {
            return Err(Error::PreconditionFailed(format!(
                "offset {} outside edge {} of length {}",
                format_rational(&offset),
                self.model.edge_name(e),
                format_rational(&l)
            )));
        }
        let edge = self.model.edge(e);
        Ok(if offset.is_zero() {
            MetricPoint::Vertex(edge.tail)
        } else if offset == l {
            MetricPoint::Vertex(edge.head)
        } else {
            MetricPoint::Edge { edge: e, offset }
        })
    }

    pub fn point_named(&self, edge: &str, offset: Q) -> Result<MetricPoint> {
        self.point(self.model.edge_id(edge)?, offset)
    }

    pub fn describe_point(&self, p: &MetricPoint) -> String {
        match p {
            MetricPoint::Vertex(v) => self.model.vertex_name(*v).to_string(),
            MetricPoint::Edge { edge, offset } => {
                format!("{}:{}", self.model.edge_name(*edge), format_rational(offset))
            }
        }
    }

    /// Canonical divisor of the model, `2 genus(v) - 2 + val(v)` at vertices.
    pub fn canonical(&self) -> MetricDivisor {
        MetricDivisor::from_vertex_divisor(&crate::chip::canonical_divisor(&self.model))
    }
}

/// Finite integer combination of points.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetricDivisor(BTreeMap<MetricPoint, i64>);

impl MetricDivisor {
    pub fn add_point(&mut self, p: MetricPoint, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.0.entry(p.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.0.remove(&p);
        }
    }

    pub fn from_vertex_divisor(d: &Divisor) -> Self {
        let mut out = MetricDivisor::default();
        for (v, &c) in d.as_slice().iter().enumerate() {
            out.add_point(MetricPoint::Vertex(v), c);
        }
        out
    }

    pub fn get(&self, p: &MetricPoint) -> i64 {
        self.0.get(p).copied().unwrap_or(0)
    }

    pub fn vertex_coeff(&self, v: VertexId) -> i64 {
        self.get(&MetricPoint::Vertex(v))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MetricPoint, i64)> + '_ {
        self.0.iter().map(|(p, &c)| (p, c))
    }

    pub fn points(&self) -> impl Iterator<Item = &MetricPoint> + '_ {
        self.0.keys()
    }

    pub fn degree(&self) -> i64 {
        self.0.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.0.values().all(|&c| c >= 0)
    }

    /// Interior points on `e` with their coefficients, by offset.
    pub fn on_edge(&self, e: EdgeId) -> Vec<(Q, i64)> {
        self.0
            .iter()
            .filter_map(|(p, &c)| match p {
                MetricPoint::Edge { edge, offset } if *edge == e => Some((*offset, c)),
                _ => None,
            })
            .collect()
    }

    pub fn scaled(&self, k: i64) -> Self {
        let mut out = MetricDivisor::default();
        for (p, c) in self.iter() {
            out.add_point(p.clone(), k * c);
        }
        out
    }
}

impl std::ops::Add for &MetricDivisor {
    type Output = MetricDivisor;
    fn add(self, rhs: &MetricDivisor) -> MetricDivisor {
        let mut out = self.clone();
        for (p, c) in rhs.iter() {
            out.add_point(p.clone(), c);
        }
        out
    }
}

impl std::ops::Sub for &MetricDivisor {
    type Output = MetricDivisor;
    fn sub(self, rhs: &MetricDivisor) -> MetricDivisor {
        let mut out = self.clone();
        for (p, c) in rhs.iter() {
            out.add_point(p.clone(), -c);
        }
        out
    }
}

/// Continuous piecewise-linear function, stored as breakpoints
/// `(offset, value)` along each edge from its tail, endpoints included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFunction {
    pieces: Vec<Vec<(Q, Q)>>,
}

impl PLFunction {
    /// Checks shape and continuity; slopes are checked by [`div_pl`].
    pub fn new(mg: &MetricGraph, pieces: Vec<Vec<(Q, Q)>>) -> Result<Self> {
        let g = mg.model();
        if pieces.len() != g.num_edges() {
            return Err(Error::InvalidFunction("one breakpoint list per edge is required".into()));
        }
        let mut at_vertex: Vec<Option<Q>> = vec![None; g.num_vertices()];
        for (e, bp) in pieces.iter().enumerate() {
            let name = g.edge_name(e);
            if bp.len() < 2 || !bp[0].0.is_zero() || bp[bp.len() - 1].0 != mg.length(e) {
                return Err(Error::InvalidFunction(format!(
                    "breakpoints on {name} must run from 0 to the edge length"
                )));
            }
            if bp.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::InvalidFunction(format!(
                    "breakpoints on {name} must be strictly increasing"
                )));
            }
            let edge = g.edge(e);
            for (v, val) in [(edge.tail, bp[0].1), (edge.head, bp[bp.len() - 1].1)] {
                match at_vertex[v] {
                    None => at_vertex[v] = Some(val),
                    Some(x) if x == val => {}
                    Some(_) => {
                        return Err(Error::InvalidFunction(format!(
                            "discontinuous at vertex {}",
                            g.vertex_name(v)
                        )))
                    }
                }
            }
        }
        Ok(PLFunction { pieces }.simplified())
    }

    pub fn constant(mg: &MetricGraph, c: Q) -> Self {
        let pieces = (0..mg.model().num_edges())
            .map(|e| vec![(Q::zero(), c), (mg.length(e), c)])
            .collect();
        PLFunction { pieces }
    }

    /// Linear on each edge between the given vertex values.
    pub fn from_vertex_values(mg: &MetricGraph, values: &[Q]) -> Self {
        let g = mg.model();
        let pieces = g
            .edge_indices()
            .map(|e| {
                let edge = g.edge(e);
                vec![(Q::zero(), values[edge.tail]), (mg.length(e), values[edge.head])]
            })
            .collect();
        PLFunction { pieces }
    }

    pub(crate) fn from_pieces_unchecked(pieces: Vec<Vec<(Q, Q)>>) -> Self {
        PLFunction { pieces }.simplified()
    }

    /// Drops breakpoints where the slope does not change.
    fn simplified(mut self) -> Self {
        for bp in &mut self.pieces {
            let mut out: Vec<(Q, Q)> = Vec::with_capacity(bp.len());
            for &pt in bp.iter() {
                while out.len() >= 2 {
                    let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
                    if (b.1 - a.1) * (pt.0 - b.0) == (pt.1 - b.1) * (b.0 - a.0) {
                        out.pop();
                    } else {
                        break;
                    }
                }
                out.push(pt);
            }
            *bp = out;
        }
        self
    }

    pub fn pieces(&self, e: EdgeId) -> &[(Q, Q)] {
        &self.pieces[e]
    }

    pub fn value_on_edge(&self, e: EdgeId, x: Q) -> Q {
        let bp = &self.pieces[e];
        let i = bp.partition_point(|&(o, _)| o <= x);
        if i == 0 {
            return bp[0].1;
        }
        if i == bp.len() {
            return bp[bp.len() - 1].1;
        }
        let (x0, y0) = bp[i - 1];
        let (x1, y1) = bp[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn value_at(&self, mg: &MetricGraph, p: &MetricPoint) -> Q {
        match p {
            MetricPoint::Vertex(v) => self.vertex_value(mg, *v),
            MetricPoint::Edge { edge, offset } => self.value_on_edge(*edge, *offset),
        }
    }

    pub fn vertex_value(&self, mg: &MetricGraph, v: VertexId) -> Q {
        let g = mg.model();
        match g.incident(v).first() {
            None => Q::zero(),
            Some(&e) => {
                let bp = &self.pieces[e];
                if g.edge(e).tail == v {
                    bp[0].1
                } else {
                    bp[bp.len() - 1].1
                }
            }
        }
    }

    fn combine(&self, other: &PLFunction, sign: i64) -> PLFunction {
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(e, bp)| {
                let mut xs: Vec<Q> = bp.iter().map(|p| p.0).chain(other.pieces[e].iter().map(|p| p.0)).collect();
                xs.sort();
                xs.dedup();
                xs.into_iter()
                    .map(|x| (x, self.value_on_edge(e, x) + other.value_on_edge(e, x) * sign))
                    .collect()
            })
            .collect();
        PLFunction { pieces }.simplified()
    }

    pub fn add(&self, other: &PLFunction) -> PLFunction {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &PLFunction) -> PLFunction {
        self.combine(other, -1)
    }

    pub fn shifted(&self, c: Q) -> PLFunction {
        let pieces = self.pieces.iter().map(|bp| bp.iter().map(|&(x, y)| (x, y + c)).collect()).collect();
        PLFunction { pieces }
    }

    pub fn scaled(&self, k: Q) -> PLFunction {
        let pieces = self.pieces.iter().map(|bp| bp.iter().map(|&(x, y)| (x, y * k)).collect()).collect();
        PLFunction { pieces }.simplified()
    }

    pub fn is_constant(&self) -> bool {
        let first = self.pieces.iter().flat_map(|bp| bp.iter()).next().map(|p| p.1);
        self.pieces.iter().flat_map(|bp| bp.iter()).all(|p| Some(p.1) == first)
    }
}

fn integer_slope(mg: &MetricGraph, e: EdgeId, a: (Q, Q), b: (Q, Q)) -> Result<i64> {
    let s = (b.1 - a.1) / (b.0 - a.0);
    if s.is_integer() {
        Ok(s.to_integer())
    } else {
        Err(Error::InvalidSlope(mg.model().edge_name(e).to_string()))
    }
}

/// The divisor of `f`: the sum of outgoing slopes at every point.
pub fn div_pl(mg: &MetricGraph, f: &PLFunction) -> Result<MetricDivisor> {
    let g = mg.model();
    let mut out = MetricDivisor::default();
    for e in g.edge_indices() {
        let bp = &f.pieces[e];
        let slopes = bp
            .windows(2)
            .map(|w| integer_slope(mg, e, w[0], w[1]))
            .collect::<Result<Vec<i64>>>()?;
        let edge = g.edge(e);
        out.add_point(MetricPoint::Vertex(edge.tail), slopes[0]);
        out.add_point(MetricPoint::Vertex(edge.head), -slopes[slopes.len() - 1]);
        for k in 1..bp.len() - 1 {
            out.add_point(MetricPoint::Edge { edge: e, offset: bp[k].0 }, slopes[k] - slopes[k - 1]);
        }
    }
    Ok(out)
}

/// Pointwise maximum of coefficients.
pub fn pointwise_max(divisors: &[MetricDivisor]) -> MetricDivisor {
    let mut best: BTreeMap<MetricPoint, i64> = BTreeMap::new();
    for d in divisors {
        for (p, c) in d.iter() {
            best.entry(p.clone()).and_modify(|x| *x = (*x).max(c)).or_insert(c);
        }
    }
    let mut out = MetricDivisor::default();
    for (p, c) in best {
        // points missing from some divisor contribute a zero
        let c = if divisors.iter().all(|d| d.get(&p) != 0) { c } else { c.max(0) };
        out.add_point(p, c);
    }
    out
}

pub(crate) fn lcm_denominators<'a>(it: impl IntoIterator<Item = &'a Q>) -> i64 {
    it.into_iter().fold(1i64, |acc, q| acc.lcm(q.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn circle() -> MetricGraph {
        MetricGraph::unit(families::banana(2))
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("3/2").unwrap(), q(3, 2));
        assert_eq!(parse_rational("4").unwrap(), q(4, 1));
        assert_eq!(parse_rational("-1/3").unwrap(), q(-1, 3));
        assert!(parse_rational("0.5").unwrap_err().is_parse());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&q(6, 4)), "3/2");
    }

    #[test]
    fn points_are_canonical() {
        let mg = circle();
        assert_eq!(mg.point(0, q(0, 1)).unwrap(), MetricPoint::Vertex(0));
        assert_eq!(mg.point(1, q(1, 1)).unwrap(), MetricPoint::Vertex(1));
        assert!(mg.point(0, q(3, 2)).is_err());
    }

    #[test]
    fn loops_are_split() {
        let mut spec = GraphSpec::default();
        spec.vertex("v0");
        spec.edge("l", "v0", "v0");
        let lengths = BTreeMap::from([("l".to_string(), q(3, 1))]);
        let mg = MetricGraph::from_spec(&spec, &lengths).unwrap();
        assert_eq!(mg.model().num_vertices(), 2);
        assert_eq!(mg.genus(), 1);
        assert_eq!(mg.lengths(), &[q(3, 2), q(3, 2)]);
    }

    #[test]
    fn div_examples() {
        let mg = circle();
        let zero = div_pl(&mg, &PLFunction::constant(&mg, q(5, 1))).unwrap();
        assert!(zero.is_zero());

        // slope +1 from a along both edges
        let f = PLFunction::from_vertex_values(&mg, &[q(0, 1), q(1, 1)]);
        let d = div_pl(&mg, &f).unwrap();
        assert_eq!(d.vertex_coeff(0), 2);
        assert_eq!(d.vertex_coeff(1), -2);

        // tent on one edge with peak at the midpoint
        let p = families::path(2);
        let mg = MetricGraph::unit(p);
        let tent = PLFunction::new(
            &mg,
            vec![vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 2)), (q(1, 1), q(0, 1))]],
        )
        .unwrap();
        let d = div_pl(&mg, &tent).unwrap();
        assert_eq!(d.vertex_coeff(0), 1);
        assert_eq!(d.vertex_coeff(1), 1);
        assert_eq!(d.get(&mg.point(0, q(1, 2)).unwrap()), -2);
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn bad_functions() {
        let mg = MetricGraph::unit(families::path(2));
        let half = PLFunction::new(&mg, vec![vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 2))]]).unwrap();
        assert!(matches!(div_pl(&mg, &half), Err(Error::InvalidSlope(_))));
        assert!(PLFunction::new(&mg, vec![vec![(q(0, 1), q(0, 1))]]).is_err());
        let c = circle();
        let broken = PLFunction::new(
            &c,
            vec![vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))], vec![(q(0, 1), q(0, 1)), (q(1, 1), q(2, 1))]],
        );
        assert!(matches!(broken, Err(Error::InvalidFunction(_))));
    }

    #[test]
    fn div_is_additive() {
        let mg = circle();
        let f = PLFunction::from_vertex_values(&mg, &[q(0, 1), q(1, 1)]);
        let g = PLFunction::new(
            &mg,
            vec![
                vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 2)), (q(1, 1), q(0, 1))],
                vec![(q(0, 1), q(0, 1)), (q(1, 1), q(0, 1))],
            ],
        )
        .unwrap();
        let lhs = div_pl(&mg, &f.add(&g)).unwrap();
        let rhs = &div_pl(&mg, &f).unwrap() + &div_pl(&mg, &g).unwrap();
        assert_eq!(lhs, rhs);
        assert!(f.sub(&f).is_constant());
    }

    #[test]
    fn lcm_of_divisors() {
        let mg = circle();
        let x = mg.point(0, q(1, 3)).unwrap();
        let mut a = MetricDivisor::default();
        a.add_point(MetricPoint::Vertex(0), 1);
        a.add_point(x.clone(), 1);
        let mut b = MetricDivisor::default();
        b.add_point(MetricPoint::Vertex(0), 2);
        let l = pointwise_max(&[a, b.clone()]);
        assert_eq!(l.vertex_coeff(0), 2);
        assert_eq!(l.get(&x), 1);
        assert_eq!(pointwise_max(&[b.clone(), b.clone()]), b);
    }
}
