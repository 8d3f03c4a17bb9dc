//! JSON schemas and the divisor shorthand.
//!
//! Every document written carries `"schema": "tropdeg/1"`; documents read
//! may omit it but must not carry another value. Unknown fields are
//! rejected. Rationals are strings `"p/q"` (or integers).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chain::{AdmissibleMultidegree, ChainStructure, ChainedGraph};
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{EdgeSpec, GraphSpec, MultiGraph, VertexSpec};
use crate::metric::{format_rational, parse_rational, MetricDivisor, MetricGraph, MetricPoint, Q};

pub const SCHEMA: &str = "tropdeg/1";

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn check_schema(s: &Option<String>) -> Result<()> {
    match s.as_deref() {
        None | Some(SCHEMA) => Ok(()),
        Some(other) => Err(parse_err(format!("unsupported schema {other}"))),
    }
}

/// A graph document, optionally carrying edge lengths and a chain structure.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<BTreeMap<String, i64>>,
}

impl GraphFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        check_schema(&f.schema)?;
        if let Some(lengths) = &f.lengths {
            for l in lengths.values() {
                parse_rational(l)?;
            }
        }
        Ok(f)
    }

    pub fn spec(&self) -> GraphSpec {
        GraphSpec { vertices: self.vertices.clone(), edges: self.edges.clone() }
    }

    pub fn graph(&self) -> Result<MultiGraph> {
        MultiGraph::build(&self.spec())
    }

    /// Metric graph; loops are split at midpoints, missing lengths are 1.
    pub fn metric(&self) -> Result<MetricGraph> {
        let mut lens = BTreeMap::new();
        for (e, l) in self.lengths.iter().flatten() {
            lens.insert(e.clone(), parse_rational(l)?);
        }
        MetricGraph::from_spec(&self.spec(), &lens)
    }

    /// Chained graph; edges missing from `n` get 1.
    pub fn chained(&self) -> Result<ChainedGraph> {
        let g = self.graph()?;
        let chain = match &self.n {
            None => ChainStructure::trivial(&g),
            Some(n) => ChainStructure::from_named(&g, n.iter().map(|(k, &v)| (k.as_str(), v)))?,
        };
        ChainedGraph::new(g, chain)
    }

    pub fn from_metric(mg: &MetricGraph) -> Self {
        let spec = mg.model().to_spec();
        let lengths = mg
            .model()
            .edge_indices()
            .map(|e| (mg.model().edge_name(e).to_string(), format_rational(&mg.length(e))))
            .collect();
        GraphFile {
            schema: Some(SCHEMA.into()),
            vertices: spec.vertices,
            edges: spec.edges,
            lengths: Some(lengths),
            n: None,
        }
    }

    pub fn from_graph(g: &MultiGraph) -> Self {
        let spec = g.to_spec();
        GraphFile { schema: Some(SCHEMA.into()), vertices: spec.vertices, edges: spec.edges, lengths: None, n: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorFile {
    #[serde(default)]
    schema: Option<String>,
    coeffs: BTreeMap<String, i64>,
}

/// A vertex divisor from `{"coeffs": {...}}`, a bare map `{"a": 2}`, or the
/// shorthand `2@a+-1@b`.
pub fn parse_divisor(g: &MultiGraph, text: &str) -> Result<Divisor> {
    let text = text.trim();
    let coeffs: BTreeMap<String, i64> = if text.starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        if v.get("coeffs").is_some() {
            let f: DivisorFile = serde_json::from_value(v).map_err(|e| parse_err(e.to_string()))?;
            check_schema(&f.schema)?;
            f.coeffs
        } else {
            serde_json::from_value(v).map_err(|e| parse_err(e.to_string()))?
        }
    } else {
        let mut out = BTreeMap::new();
        for (c, point) in shorthand_terms(text)? {
            if point.contains(':') {
                return Err(parse_err(format!("{point} is not a vertex")));
            }
            *out.entry(point.to_string()).or_insert(0) += c;
        }
        out
    };
    Divisor::from_named(g, coeffs.iter().map(|(k, &v)| (k.as_str(), v)))
}

/// Splits `2@v0+1@e1:1/3` into `(2, "v0")`, `(1, "e1:1/3")`.
fn shorthand_terms(text: &str) -> Result<Vec<(i64, &str)>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split('+')
        .map(|term| {
            let term = term.trim();
            if term.is_empty() {
                return Err(parse_err("empty term in divisor"));
            }
            match term.split_once('@') {
                Some((c, p)) => {
                    let c: i64 = c.trim().parse().map_err(|_| parse_err(format!("bad coefficient in {term}")))?;
                    Ok((c, p.trim()))
                }
                None => Ok((1, term)),
            }
        })
        .collect()
}

pub fn parse_point(mg: &MetricGraph, text: &str) -> Result<MetricPoint> {
    match text.rsplit_once(':') {
        Some((edge, offset)) => mg.point_named(edge, parse_rational(offset)?),
        None => Ok(MetricPoint::Vertex(mg.model().vertex(text)?)),
    }
}

/// A metric point in JSON: `{"vertex": "v"}` or `{"edge": "e1", "offset": "3/2"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<i64>,
}

impl PointJson {
    pub fn from_point(mg: &MetricGraph, p: &MetricPoint, coeff: Option<i64>) -> Self {
        match p {
            MetricPoint::Vertex(v) => {
                PointJson { vertex: Some(mg.model().vertex_name(*v).into()), edge: None, offset: None, coeff }
            }
            MetricPoint::Edge { edge, offset } => PointJson {
                vertex: None,
                edge: Some(mg.model().edge_name(*edge).into()),
                offset: Some(format_rational(offset)),
                coeff,
            },
        }
    }

    pub fn to_point(&self, mg: &MetricGraph) -> Result<MetricPoint> {
        match (&self.vertex, &self.edge, &self.offset) {
            (Some(v), None, None) => Ok(MetricPoint::Vertex(mg.model().vertex(v)?)),
            (None, Some(e), Some(o)) => mg.point_named(e, parse_rational(o)?),
            _ => Err(parse_err("a point has either a vertex or an edge with an offset")),
        }
    }
}

/// A metric divisor from the shorthand, a JSON list of points with
/// coefficients, or a bare map from vertex names.
pub fn parse_metric_divisor(mg: &MetricGraph, text: &str) -> Result<MetricDivisor> {
    let text = text.trim();
    let mut out = MetricDivisor::default();
    if text.starts_with('[') {
        let terms: Vec<PointJson> = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        for t in terms {
            let c = t.coeff.unwrap_or(1);
            out.add_point(t.to_point(mg)?, c);
        }
    } else if text.starts_with('{') {
        let d = parse_divisor(mg.model(), text)?;
        out = MetricDivisor::from_vertex_divisor(&d);
    } else {
        for (c, p) in shorthand_terms(text)? {
            out.add_point(parse_point(mg, p)?, c);
        }
    }
    Ok(out)
}

/// Shorthand form, terms in point order.
pub fn metric_divisor_shorthand(mg: &MetricGraph, d: &MetricDivisor) -> String {
    if d.is_zero() {
        return "0".into();
    }
    d.iter().map(|(p, c)| format!("{c}@{}", mg.describe_point(p))).collect::<Vec<_>>().join("+")
}

pub fn metric_divisor_json(mg: &MetricGraph, d: &MetricDivisor) -> Value {
    json!(d.iter().map(|(p, c)| PointJson::from_point(mg, p, Some(c))).collect::<Vec<_>>())
}

pub fn divisor_json(g: &MultiGraph, d: &Divisor) -> Value {
    json!({ "coeffs": d.to_named(g) })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultidegreeFile {
    #[serde(default)]
    schema: Option<String>,
    w: BTreeMap<String, i64>,
    #[serde(default)]
    mu: BTreeMap<String, i64>,
    #[serde(default)]
    d: Option<i64>,
}

/// `{"w": {...}, "mu": {...}, "d": 3}`; `mu` defaults to 0 and `d`, when
/// given, must equal the degree.
pub fn parse_multidegree(cg: &ChainedGraph, text: &str) -> Result<AdmissibleMultidegree> {
    let f: MultidegreeFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    check_schema(&f.schema)?;
    let g = &cg.graph;
    let mut w = vec![0i64; g.num_vertices()];
    for (k, &c) in &f.w {
        w[g.vertex(k)?] = c;
    }
    let mut mu = vec![0i64; g.num_edges()];
    for (k, &c) in &f.mu {
        mu[g.edge_id(k)?] = c;
    }
    let out = cg.multidegree(w, mu)?;
    if let Some(d) = f.d {
        if d != out.degree() {
            return Err(parse_err(format!("stated degree {d} but the multidegree has degree {}", out.degree())));
        }
    }
    Ok(out)
}

pub fn multidegree_json(cg: &ChainedGraph, w: &AdmissibleMultidegree) -> Value {
    let (wn, mu) = w.to_named(&cg.graph);
    let mu: BTreeMap<String, u32> = mu.into_iter().filter(|(_, m)| *m != 0).collect();
    json!({ "w": wn, "mu": mu, "d": w.degree() })
}

/// Profiles keyed `"(e,v)"` by bar edge name and vertex name.
pub fn parse_profiles(text: &str) -> Result<BTreeMap<(String, String), Vec<i64>>> {
    let raw: BTreeMap<String, Value> = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        if k == "schema" {
            check_schema(&v.as_str().map(String::from))?;
            continue;
        }
        let bad = || parse_err(format!("profile key {k} is not of the form (e,v)"));
        let inner = k.trim().strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
        let (e, vtx) = inner.split_once(',').ok_or_else(bad)?;
        let seq: Vec<i64> = serde_json::from_value(v).map_err(|e| parse_err(e.to_string()))?;
        out.insert((e.trim().to_string(), vtx.trim().to_string()), seq);
    }
    Ok(out)
}

/// Parses a rational that must be given as a string or integer.
pub fn parse_q(text: &str) -> Result<Q> {
    parse_rational(text)
}

/// Wraps a report body with the schema tag and command name.
pub fn report(command: &str, body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("command".into(), json!(command));
    if let Value::Object(m) = body {
        out.extend(m);
    } else {
        out.insert("result".into(), body);
    }
    Value::Object(out)
}
