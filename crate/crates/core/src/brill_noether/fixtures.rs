use std::collections::BTreeMap;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, GraphSpec, VertexId};
use crate::metric::{parse_rational, MetricDivisor, MetricGraph, MetricPoint, Q};

/// A piece glued into a wedge or join at a single attachment vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartSpec {
    /// A single point (genus 0).
    Point,
    /// A circle of the given circumference (default 1), as two half edges.
    Loop {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<String>,
    },
    /// A cycle of `k` unit edges.
    Cycle { k: usize },
    /// Two vertices joined by `edges` unit edges; attached at one of them.
    Banana { edges: usize },
    /// A flower of genus `g` attached at its hub.
    Flower { g: usize },
    /// Any graph, attached at `attach`.
    Graph {
        graph: GraphSpec,
        #[serde(default)]
        lengths: BTreeMap<String, String>,
        attach: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FixtureSpec {
    /// Hub `v0` joined to each of `v1..vg` by two edges (`f{i}a`, `f{i}b`).
    Flower {
        g: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lengths: Option<Vec<String>>,
    },
    /// `v1`, `v2` joined by `g+1` edges `e1..`.
    Banana {
        g: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lengths: Option<Vec<String>>,
    },
    /// Vertices `w0..wg`; loop `i` is the pair of edges `t{i}`, `b{i}`
    /// from `w{i-1}` to `w{i}`. Lengths are listed `t1, b1, t2, b2, ...`.
    ChainOfLoops {
        g: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lengths: Option<Vec<String>>,
    },
    /// Parts glued at `v0`.
    Wedge { parts: Vec<PartSpec> },
    /// Two parts attached at `v1` and `v2`, joined by `m` edges `p1..pm`.
    PathJoin {
        parts: Vec<PartSpec>,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lengths: Option<Vec<String>>,
    },
}

/// A part of a wedge or join, also available as a standalone metric graph
/// whose names agree with the whole.
#[derive(Debug, Clone)]
pub struct Part {
    pub spec: PartSpec,
    pub metric: MetricGraph,
    /// Attachment vertex in `metric`.
    pub attach: VertexId,
    pub genus: i64,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub metric: MetricGraph,
    pub marked: BTreeMap<String, VertexId>,
    pub parts: Vec<Part>,
    /// The joining edges of a path join.
    pub paths: Vec<EdgeId>,
}

impl Fixture {
    pub fn genus(&self) -> i64 {
        self.metric.genus()
    }

    pub fn marked_point(&self, name: &str) -> Option<MetricPoint> {
        self.marked.get(name).map(|&v| MetricPoint::Vertex(v))
    }

    /// Carries a divisor on part `i` over to the whole graph.
    pub fn lift(&self, i: usize, d: &MetricDivisor) -> MetricDivisor {
        let part = &self.parts[i].metric;
        let whole = self.metric.model();
        let mut out = MetricDivisor::default();
        for (p, c) in d.iter() {
            let q = match p {
                MetricPoint::Vertex(v) => {
                    MetricPoint::Vertex(whole.vertex(part.model().vertex_name(*v)).expect("names agree"))
                }
                MetricPoint::Edge { edge, offset } => MetricPoint::Edge {
                    edge: whole.edge_id(part.model().edge_name(*edge)).expect("names agree"),
                    offset: *offset,
                },
            };
            out.add_point(q, c);
        }
        out
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn parse_lengths(given: &Option<Vec<String>>, count: usize) -> Result<Option<Vec<Q>>> {
    let Some(list) = given else { return Ok(None) };
    if list.len() != count {
        return Err(invalid(format!("expected {count} lengths, got {}", list.len())));
    }
    let out: Vec<Q> = list.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
    if out.iter().any(|l| *l <= Q::from_integer(0)) {
        return Err(invalid("lengths must be positive"));
    }
    Ok(Some(out))
}

fn metric(spec: &GraphSpec, lengths: &BTreeMap<String, Q>) -> Result<MetricGraph> {
    MetricGraph::from_spec(spec, lengths).map_err(|e| match e {
        Error::PreconditionFailed(m) => Error::InvalidSpec(m),
        other => other,
    })
}

/// Graph and lengths of a part, with the attachment vertex named `attach`
/// and every other name prefixed.
fn part_graph(part: &PartSpec, prefix: &str, attach: &str) -> Result<(GraphSpec, BTreeMap<String, Q>)> {
    let mut spec = GraphSpec::default();
    let mut lengths = BTreeMap::new();
    spec.vertex(attach);
    let p = |s: &str| format!("{prefix}{s}");
    match part {
        PartSpec::Point => {}
        PartSpec::Loop { length } => {
            let l = match length {
                Some(s) => parse_rational(s)?,
                None => Q::one(),
            };
            if l <= Q::from_integer(0) {
                return Err(invalid("loop length must be positive"));
            }
            spec.vertex(p("x"));
            for e in ["l1", "l2"] {
                spec.edge(p(e), attach, p("x"));
                lengths.insert(p(e), l / 2);
            }
        }
        PartSpec::Cycle { k } => {
            if *k < 2 {
                return Err(invalid("a cycle needs at least 2 edges"));
            }
            let names: Vec<String> =
                std::iter::once(attach.to_string()).chain((1..*k).map(|i| p(&format!("c{i}")))).collect();
            for n in &names[1..] {
                spec.vertex(n.clone());
            }
            for i in 0..*k {
                spec.edge(p(&format!("s{}", i + 1)), names[i].clone(), names[(i + 1) % k].clone());
            }
        }
        PartSpec::Banana { edges } => {
            if *edges == 0 {
                return Err(invalid("a banana needs at least one edge"));
            }
            spec.vertex(p("y"));
            for i in 1..=*edges {
                spec.edge(p(&format!("e{i}")), attach, p("y"));
            }
        }
        PartSpec::Flower { g } => {
            for i in 1..=*g {
                spec.vertex(p(&format!("z{i}")));
                spec.edge(p(&format!("f{i}a")), attach, p(&format!("z{i}")));
                spec.edge(p(&format!("f{i}b")), attach, p(&format!("z{i}")));
            }
        }
        PartSpec::Graph { graph, lengths: given, attach: at } => {
            if !graph.vertices.iter().any(|v| &v.id == at) {
                return Err(invalid(format!("attachment vertex {at} is not in the part")));
            }
            if graph.vertices.iter().any(|v| v.genus != 0) {
                return Err(invalid("parts of metric fixtures carry no vertex genus"));
            }
            let rename = |v: &str| if v == at { attach.to_string() } else { p(v) };
            for v in &graph.vertices {
                if &v.id != at {
                    spec.vertex(p(&v.id));
                }
            }
            for e in &graph.edges {
                spec.edge(p(&e.id), rename(&e.tail), rename(&e.head));
            }
            for (e, l) in given {
                lengths.insert(p(e), parse_rational(l)?);
            }
        }
    }
    Ok((spec, lengths))
}

fn merge(into: &mut GraphSpec, lens: &mut BTreeMap<String, Q>, part: GraphSpec, part_lens: BTreeMap<String, Q>) {
    for v in part.vertices {
        if !into.vertices.iter().any(|x| x.id == v.id) {
            into.vertices.push(v);
        }
    }
    into.edges.extend(part.edges);
    lens.extend(part_lens);
}

fn build_part(spec: &PartSpec, prefix: &str, attach: &str) -> Result<(Part, GraphSpec, BTreeMap<String, Q>)> {
    let (g, lens) = part_graph(spec, prefix, attach)?;
    let m = metric(&g, &lens)?;
    let a = m.model().vertex(attach)?;
    let genus = m.genus();
    Ok((Part { spec: spec.clone(), metric: m, attach: a, genus }, g, lens))
}

pub fn build_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    let mut g = GraphSpec::default();
    let mut lens: BTreeMap<String, Q> = BTreeMap::new();
    let mut parts = Vec::new();
    let mut marked_names: Vec<&str> = Vec::new();
    match spec {
        FixtureSpec::Flower { g: genus, lengths } => {
            if *genus == 0 {
                return Err(invalid("flower genus must be positive"));
            }
            let given = parse_lengths(lengths, 2 * genus)?;
            g.vertex("v0");
            for i in 1..=*genus {
                g.vertex(format!("v{i}"));
                for (k, s) in ["a", "b"].iter().enumerate() {
                    let id = format!("f{i}{s}");
                    g.edge(id.clone(), "v0", format!("v{i}"));
                    if let Some(l) = &given {
                        lens.insert(id, l[2 * (i - 1) + k]);
                    }
                }
            }
            marked_names.push("v0");
        }
        FixtureSpec::Banana { g: genus, lengths } => {
            if *genus == 0 {
                return Err(invalid("banana genus must be positive"));
            }
            let given = parse_lengths(lengths, genus + 1)?;
            g.vertex("v1").vertex("v2");
            for i in 1..=genus + 1 {
                g.edge(format!("e{i}"), "v1", "v2");
                if let Some(l) = &given {
                    lens.insert(format!("e{i}"), l[i - 1]);
                }
            }
            marked_names.extend(["v1", "v2"]);
        }
        FixtureSpec::ChainOfLoops { g: genus, lengths } => {
            if *genus == 0 {
                return Err(invalid("chain genus must be positive"));
            }
            let given = parse_lengths(lengths, 2 * genus)?;
            g.vertex("w0");
            for i in 1..=*genus {
                g.vertex(format!("w{i}"));
                for (k, s) in ["t", "b"].iter().enumerate() {
                    let id = format!("{s}{i}");
                    g.edge(id.clone(), format!("w{}", i - 1), format!("w{i}"));
                    if let Some(l) = &given {
                        lens.insert(id, l[2 * (i - 1) + k]);
                    }
                }
            }
            marked_names.push("w0");
        }
        FixtureSpec::Wedge { parts: specs } => {
            if specs.is_empty() {
                return Err(invalid("a wedge needs at least one part"));
            }
            g.vertex("v0");
            for (i, ps) in specs.iter().enumerate() {
                let (part, pg, pl) = build_part(ps, &format!("P{}.", i + 1), "v0")?;
                merge(&mut g, &mut lens, pg, pl);
                parts.push(part);
            }
            marked_names.push("v0");
        }
        FixtureSpec::PathJoin { parts: specs, m, lengths } => {
            if specs.len() != 2 {
                return Err(invalid("a path join has exactly two parts"));
            }
            if *m == 0 {
                return Err(invalid("a path join needs at least one path"));
            }
            let given = parse_lengths(lengths, *m)?;
            for (i, ps) in specs.iter().enumerate() {
                let attach = if i == 0 { "v1" } else { "v2" };
                let (part, pg, pl) = build_part(ps, &format!("P{}.", i + 1), attach)?;
                merge(&mut g, &mut lens, pg, pl);
                parts.push(part);
            }
            for k in 1..=*m {
                g.edge(format!("p{k}"), "v1", "v2");
                if let Some(l) = &given {
                    lens.insert(format!("p{k}"), l[k - 1]);
                }
            }
            marked_names.extend(["v1", "v2"]);
        }
    }
    let mg = metric(&g, &lens)?;
    let marked = marked_names
        .iter()
        .map(|n| Ok((n.to_string(), mg.model().vertex(n)?)))
        .collect::<Result<_>>()?;
    let paths = match spec {
        FixtureSpec::PathJoin { m, .. } => {
            (1..=*m).map(|k| mg.model().edge_id(&format!("p{k}"))).collect::<Result<_>>()?
        }
        _ => Vec::new(),
    };
    let fx = Fixture { spec: spec.clone(), metric: mg, marked, parts, paths };
    let expected = match spec {
        FixtureSpec::Flower { g, .. } | FixtureSpec::Banana { g, .. } | FixtureSpec::ChainOfLoops { g, .. } => {
            *g as i64
        }
        FixtureSpec::Wedge { .. } => fx.parts.iter().map(|p| p.genus).sum(),
        FixtureSpec::PathJoin { m, .. } => fx.parts[0].genus + fx.parts[1].genus + *m as i64 - 1,
    };
    if fx.genus() != expected {
        return Err(invalid(format!("genus {} differs from the expected {expected}", fx.genus())));
    }
    Ok(fx)
}
