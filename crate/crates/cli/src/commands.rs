use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tropdeg::brill_noether::{
    bn_rank_lattice, build_fixture, gonality_search_lattice, join_gonality_witness, maximal_gonality,
    multitree_verdict, wedge_gonality_witness, Fixture, FixtureSpec, GonalityWitness, PartSpec, WitnessOptions,
    WitnessReport,
};
use tropdeg::chain::{AdmissibleMultidegree, ChainedGraph};
use tropdeg::chip::{is_v_reduced, rank_search, reduce, RankSearch};
use tropdeg::io::{
    divisor_json, metric_divisor_json, metric_divisor_shorthand, multidegree_json, parse_divisor,
    parse_metric_divisor, parse_multidegree, parse_point, parse_profiles, GraphFile,
};
use tropdeg::metric::{format_rational, mg_rank_with, mg_reduce, MetricDivisor, MetricGraph, MetricRankOptions, PLFunction};
use tropdeg::pct::{divisor_sequences, is_multitree, pct_family, pct_witness, random_valid_profiles, Side};
use tropdeg::twist_graph::{d_wv, enumerate_bar_g, reference_family, riemann_twist};
use tropdeg::{Error, MultiGraph};

use crate::{Command, Failure, Global, Output};

type Res<T> = std::result::Result<T, Failure>;

fn read_path(path: &str) -> Res<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))
    }
}

/// Inline text, or the contents of a file when prefixed with `@`.
fn inline(text: &str) -> Res<String> {
    match text.strip_prefix('@') {
        Some(path) => read_path(path),
        None => Ok(text.to_string()),
    }
}

fn graph_file(path: &str) -> Res<GraphFile> {
    Ok(GraphFile::parse(&read_path(path)?)?)
}

fn vertex(g: &MultiGraph, name: &str) -> Res<usize> {
    Ok(g.vertex(name)?)
}

fn function_json(mg: &MetricGraph, f: &PLFunction) -> Value {
    let g = mg.model();
    let values: BTreeMap<&str, String> =
        g.vertices().map(|v| (g.vertex_name(v), format_rational(&f.vertex_value(mg, v)))).collect();
    let pieces: BTreeMap<&str, Vec<[String; 2]>> = g
        .edge_indices()
        .map(|e| {
            let bp = f.pieces(e).iter().map(|(x, y)| [format_rational(x), format_rational(y)]).collect();
            (g.edge_name(e), bp)
        })
        .collect();
    json!({ "vertex_values": values, "breakpoints": pieces })
}

fn metric_divisor_value(mg: &MetricGraph, d: &MetricDivisor) -> Value {
    json!({
        "shorthand": metric_divisor_shorthand(mg, d),
        "points": metric_divisor_json(mg, d),
        "degree": d.degree(),
    })
}

fn side_key(g: &MultiGraph, mt: &tropdeg::pct::Multitree, s: &Side) -> String {
    format!("({},{})", mt.bar_edges[s.0].name, g.vertex_name(s.1))
}

pub fn run(cmd: &Command, global: &Global) -> Res<Output> {
    let budget = global.budget;
    match cmd {
        Command::Reduce { g, divisor, at } => {
            let graph = graph_file(&g.graph)?.graph()?;
            let d = parse_divisor(&graph, &inline(divisor)?)?;
            let q = vertex(&graph, at)?;
            let (r, t) = reduce(&graph, &d, q)?;
            Ok(Output::Report(json!({
                "at": at,
                "divisor": divisor_json(&graph, &r),
                "twist": t.to_named(&graph),
                "reduced": is_v_reduced(&graph, &r, q)?,
            })))
        }
        Command::Rank { g, divisor, cap } => {
            let graph = graph_file(&g.graph)?.graph()?;
            let d = parse_divisor(&graph, &inline(divisor)?)?;
            let cap = cap.unwrap_or(d.degree().max(0) + 1);
            let opts = RankSearch { cap, base: graph.least_vertex(), test_set: None, budget };
            let r = rank_search(&graph, &d, &opts)?;
            Ok(Output::Report(json!({ "degree": d.degree(), "rank": r, "capped": r == cap })))
        }
        Command::Concentrate { g, multidegree, at } => {
            let cg = graph_file(&g.graph)?.chained()?;
            let w0 = parse_multidegree(&cg, &inline(multidegree)?)?;
            let v0 = vertex(&cg.graph, at)?;
            let (w, t) = cg.concentrate(&w0, v0)?;
            let c = cg.is_concentrated(&w, v0)?;
            let ordering: Vec<&str> = c.ordering.iter().map(|&v| cg.graph.vertex_name(v)).collect();
            Ok(Output::Report(json!({
                "at": at,
                "multidegree": multidegree_json(&cg, &w),
                "twist": t.to_named(&cg.graph),
                "concentrated": c.concentrated,
                "ordering": ordering,
            })))
        }
        Command::Twist { g, multidegree, at, times } => {
            let cg = graph_file(&g.graph)?.chained()?;
            let mut w = parse_multidegree(&cg, &inline(multidegree)?)?;
            let v = vertex(&cg.graph, at)?;
            for _ in 0..times.unsigned_abs() {
                w = cg.twist(&w, v, times.signum())?;
            }
            Ok(Output::Report(json!({ "at": at, "times": times, "multidegree": multidegree_json(&cg, &w) })))
        }
        Command::Barg { g, multidegree, dot } => barg(&graph_file(&g.graph)?.chained()?, multidegree, *dot),
        Command::Dwv { g, multidegree, w, at } => {
            let cg = graph_file(&g.graph)?.chained()?;
            let w0 = parse_multidegree(&cg, &inline(multidegree)?)?;
            let w = match w {
                Some(text) => parse_multidegree(&cg, &inline(text)?)?,
                None => w0.clone(),
            };
            let v = vertex(&cg.graph, at)?;
            let family = reference_family(&cg, &w0);
            let d = d_wv(&cg, &family, &w, v)?;
            Ok(Output::Report(json!({
                "at": at,
                "multidegree": multidegree_json(&cg, &w),
                "divisor": d.to_named(&cg.graph),
                "degree": d.degree(),
            })))
        }
        Command::Riemann { g, multidegree, at } => {
            let cg = graph_file(&g.graph)?.chained()?;
            let w0 = parse_multidegree(&cg, &inline(multidegree)?)?;
            let v0 = vertex(&cg.graph, at)?;
            let rt = riemann_twist(&cg, &w0, v0)?;
            let sg = &cg.sub.graph;
            Ok(Output::Report(json!({
                "at": at,
                "target": multidegree_json(&cg, &rt.target),
                "bound": rt.bound,
                "twist": rt.twist.to_named(&cg.graph),
                "reduced": rt.reduced.to_named(sg),
                "fixed": rt.fixed.to_named(sg),
            })))
        }
        Command::MgRank { g, divisor, cap, check_refinement } => {
            let mg = graph_file(&g.graph)?.metric()?;
            let d = parse_metric_divisor(&mg, &inline(divisor)?)?;
            let opts = MetricRankOptions { cap: *cap, budget, check_refinement: *check_refinement, refine: 1 };
            let r = mg_rank_with(&mg, &d, &opts)?;
            Ok(Output::Report(json!({
                "divisor": metric_divisor_shorthand(&mg, &d),
                "degree": d.degree(),
                "rank": r,
            })))
        }
        Command::MgReduce { g, divisor, at } => {
            let mg = graph_file(&g.graph)?.metric()?;
            let d = parse_metric_divisor(&mg, &inline(divisor)?)?;
            let q = parse_point(&mg, at)?;
            let (r, f) = mg_reduce(&mg, &d, &q)?;
            Ok(Output::Report(json!({
                "at": mg.describe_point(&q),
                "divisor": metric_divisor_value(&mg, &r),
                "function": function_json(&mg, &f),
            })))
        }
        Command::Gonality { g, n, d_max } => {
            let mg = graph_file(&g.graph)?.metric()?;
            let d_max = d_max.unwrap_or_else(|| maximal_gonality(mg.genus()));
            let s = gonality_search_lattice(&mg, *n, d_max, budget)?;
            Ok(Output::Report(json!({
                "genus": mg.genus(),
                "d_max": d_max,
                "degree": s.degree,
                "witness": s.witness.as_ref().map(|w| metric_divisor_value(&mg, w)),
                "scale": s.scale,
                "candidates": s.candidates,
                "evidence_level": s.evidence,
            })))
        }
        Command::BnRank { g, r, d, rho, n } => {
            let mg = graph_file(&g.graph)?.metric()?;
            let rep = bn_rank_lattice(&mg, *r, *d, *rho, *n, budget)?;
            Ok(Output::Report(json!({
                "r": rep.r,
                "d": rep.d,
                "rho_prime": rep.rho_prime,
                "scale": rep.scale,
                "holds_on_lattice": rep.holds_on_lattice,
                "counterexample": rep.counterexample.as_ref().map(|c| metric_divisor_value(&mg, c)),
                "classes": rep.classes,
                "strength": rep.strength,
                "evidence_level": rep.evidence,
            })))
        }
        Command::Verdict { graph, spec, n } => verdict(graph.as_deref(), spec.as_deref(), *n),
        Command::Pct { g, multidegree, r_v, profiles } => {
            let cg = graph_file(&g.graph)?.chained()?;
            pct(&cg, &inline(multidegree)?, &inline(r_v)?, profiles.as_deref(), global.seed)
        }
        Command::Fixture { kind, g, lengths, parts, m, spec, out } => {
            let spec = match spec {
                Some(text) => serde_json::from_str(&inline(text)?).map_err(|e| Failure::Input(e.to_string()))?,
                None => fixture_spec(kind, *g, lengths.as_deref(), parts.as_deref(), *m)?,
            };
            let fx = build_fixture(&spec)?;
            let file = GraphFile::from_metric(&fx.metric);
            let text = serde_json::to_string_pretty(&file).expect("json") + "\n";
            match out {
                None => Ok(Output::Raw(text)),
                Some(dir) => write_fixture(dir, &fx, &text),
            }
        }
    }
}

fn barg(cg: &ChainedGraph, multidegree: &str, dot: bool) -> Res<Output> {
    let w0 = parse_multidegree(cg, &inline(multidegree)?)?;
    let family = reference_family(cg, &w0);
    let core = enumerate_bar_g(cg, &w0, &family)?;
    let g = &cg.graph;
    let mut arrows = Vec::new();
    for (i, m) in core.members.iter().enumerate() {
        for v in g.vertices() {
            if let Ok(x) = cg.twist(m, v, 1) {
                if let Ok(j) = core.members.binary_search(&x) {
                    arrows.push((i, j, v));
                }
            }
        }
    }
    let label = |w: &AdmissibleMultidegree| -> String {
        let (wn, mu) = w.to_named(g);
        let mut s = wn.iter().map(|(k, c)| format!("{k}={c}")).collect::<Vec<_>>().join(",");
        let mu: Vec<String> = mu.iter().filter(|(_, m)| **m != 0).map(|(k, m)| format!("{k}:{m}")).collect();
        if !mu.is_empty() {
            s += &format!(" | {}", mu.join(","));
        }
        s
    };
    if dot {
        let mut s = String::from("digraph barg {\n");
        for (i, m) in core.members.iter().enumerate() {
            let _ = writeln!(s, "  m{i} [label=\"{}\"];", label(m));
        }
        for (i, j, v) in &arrows {
            let _ = writeln!(s, "  m{i} -> m{j} [label=\"{}\"];", g.vertex_name(*v));
        }
        s.push_str("}\n");
        return Ok(Output::Raw(s));
    }
    let members: Vec<Value> = core.members.iter().map(|m| multidegree_json(cg, m)).collect();
    let twists: Vec<Value> =
        arrows.iter().map(|(i, j, v)| json!({ "from": i, "to": j, "vertex": g.vertex_name(*v) })).collect();
    Ok(Output::Report(json!({
        "base": multidegree_json(cg, &core.base),
        "size": members.len(),
        "connected": core.connected,
        "members": members,
        "twists": twists,
    })))
}

fn witness_json(mg: &MetricGraph, rep: &WitnessReport) -> Value {
    let w: &GonalityWitness = &rep.witness;
    let constructions: Vec<Value> = rep
        .constructions
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "formula_degree": c.formula_degree,
                "degree": c.degree,
                "divisor": metric_divisor_shorthand(mg, &c.divisor),
                "part_requests": c.part_requests,
            })
        })
        .collect();
    json!({
        "verdict": rep.verdict,
        "message": rep.message,
        "genus": rep.genus,
        "maximal_gonality": rep.maximal_gonality,
        "witness": metric_divisor_value(mg, &w.divisor),
        "degree": w.degree,
        "rank": w.rank,
        "claimed_rank": w.claimed_rank,
        "verified": w.verified,
        "construction": w.construction,
        "trace": w.trace,
        "constructions": constructions,
        "evidence_level": rep.evidence,
    })
}

fn verdict(graph: Option<&str>, spec: Option<&str>, n: i64) -> Res<Output> {
    let (mg, fx) = match spec {
        Some(text) => {
            let spec: FixtureSpec =
                serde_json::from_str(&inline(text)?).map_err(|e| Failure::Input(e.to_string()))?;
            let fx = build_fixture(&spec)?;
            (fx.metric.clone(), Some(fx))
        }
        None => (graph_file(graph.unwrap_or("-"))?.metric()?, None),
    };
    let v = multitree_verdict(&mg);
    let mut body = json!({
        "message": v.message,
        "multitree": v.multitree,
        "small_multichain": v.small_multichain,
        "obstructions": v.obstructions,
    });
    if let Some(fx) = fx {
        let opts = WitnessOptions { n };
        let rep = match &fx.spec {
            FixtureSpec::Wedge { .. } => Some(wedge_gonality_witness(&fx, opts)?),
            FixtureSpec::PathJoin { .. } => Some(join_gonality_witness(&fx, opts)?),
            _ => None,
        };
        if let Some(rep) = rep {
            body["gonality"] = witness_json(&fx.metric, &rep);
        }
    }
    Ok(Output::Report(body))
}

fn pct(cg: &ChainedGraph, multidegree: &str, r_v: &str, profiles: Option<&str>, seed: u64) -> Res<Output> {
    let g = &cg.graph;
    let w0 = parse_multidegree(cg, multidegree)?;
    let rmap: BTreeMap<String, i64> =
        serde_json::from_str(r_v).map_err(|e| Failure::Input(format!("--r-v: {e}")))?;
    let mut rv = vec![0i64; g.num_vertices()];
    for (k, c) in &rmap {
        rv[vertex(g, k)?] = *c;
    }
    let mt = is_multitree(g);
    mt.require_tree()?;
    let fam = pct_family(cg, &mt, &w0)?;
    let seqs = divisor_sequences(cg, &mt, &fam)?;
    let r: i64 = rv.iter().sum();
    let (profiles, generated) = match profiles {
        Some(text) => {
            let named = parse_profiles(&inline(text)?)?;
            let mut out = BTreeMap::new();
            for ((e, v), seq) in named {
                let vi = vertex(g, &v)?;
                let i = mt
                    .bar_edges
                    .iter()
                    .position(|b| b.name == e && b.touches(vi))
                    .ok_or_else(|| Error::InconsistentProfile(format!("no edge {e} at {v} in the collapsed tree")))?;
                out.insert((i, vi), seq);
            }
            (out, false)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_valid_profiles(&mut rng, &mt, &seqs, r.max(0) as usize).ok_or_else(|| {
                Error::InconsistentProfile("some edge side has no critical index to build a profile from".into())
            })?;
            (p, true)
        }
    };
    let wit = pct_witness(cg, &mt, &fam, &seqs, &rv, &profiles)?;
    let keyed = |m: &BTreeMap<Side, Vec<i64>>| -> BTreeMap<String, Vec<i64>> {
        m.iter().map(|(s, x)| (side_key(g, &mt, s), x.clone())).collect()
    };
    let t: BTreeMap<String, i64> = wit.t.iter().map(|(s, x)| (side_key(g, &mt, s), *x)).collect();
    let b: BTreeMap<String, i64> = fam.b.iter().map(|(s, x)| (side_key(g, &mt, s), *x)).collect();
    let degrees: BTreeMap<String, Vec<i64>> =
        seqs.iter().map(|(s, x)| (side_key(g, &mt, s), x.degrees.clone())).collect();
    Ok(Output::Report(json!({
        "r": r,
        "profiles": keyed(&profiles),
        "profiles_generated": generated,
        "b": b,
        "sequence_degrees": degrees,
        "t": t,
        "w": multidegree_json(cg, &wit.w),
        "certificates": {
            "t_counts": wit.counts_match,
            "codim_sum": wit.codim_sum,
            "in_bar_g": wit.in_bar_g,
        },
        "pass": wit.all_pass(),
    })))
}

fn lengths_list(text: Option<&str>) -> Option<Vec<String>> {
    text.map(|t| t.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
}

fn fixture_spec(
    kind: &str,
    g: Option<usize>,
    lengths: Option<&str>,
    parts: Option<&str>,
    m: Option<usize>,
) -> Res<FixtureSpec> {
    let need_g = || g.ok_or_else(|| Failure::Input(format!("fixture {kind} needs --g")));
    let lengths = lengths_list(lengths);
    let parts = || -> Res<Vec<PartSpec>> {
        let text = parts.ok_or_else(|| Failure::Input(format!("fixture {kind} needs --parts")))?;
        serde_json::from_str(&inline(text)?).map_err(|e| Failure::Input(format!("--parts: {e}")))
    };
    Ok(match kind {
        "flower" => FixtureSpec::Flower { g: need_g()?, lengths },
        "banana" | "binary" => FixtureSpec::Banana { g: need_g()?, lengths },
        "chain-of-loops" | "chain_of_loops" => FixtureSpec::ChainOfLoops { g: need_g()?, lengths },
        "wedge" => FixtureSpec::Wedge { parts: parts()? },
        "join" | "path-join" | "path_join" => FixtureSpec::PathJoin {
            parts: parts()?,
            m: m.ok_or_else(|| Failure::Input("fixture join needs --m".into()))?,
            lengths,
        },
        other => {
            return Err(Failure::Input(format!(
                "unknown fixture kind {other}; expected flower, banana, chain-of-loops, wedge or join"
            )))
        }
    })
}

fn describe(fx: &Fixture) -> String {
    let g = fx.genus();
    match &fx.spec {
        FixtureSpec::Flower { g: k, .. } => format!(
            "Flower of genus {k}: hub v0 joined to each of v1..v{k} by two edges. \
             2[v0] has degree 2 and rank 1."
        ),
        FixtureSpec::Banana { g: k, .. } => format!(
            "Banana graph of genus {k}: v1 and v2 joined by {} edges. [v1]+[v2] has rank 1.",
            k + 1
        ),
        FixtureSpec::ChainOfLoops { g: k, .. } => {
            format!("Chain of {k} loops w0..w{k}, loop i made of edges t<i> and b<i>.")
        }
        FixtureSpec::Wedge { parts } => {
            format!("Wedge of {} parts at v0, genus {g}.", parts.len())
        }
        FixtureSpec::PathJoin { m, .. } => {
            format!("Two parts at v1 and v2 joined by {m} paths p1..p{m}, genus {g}.")
        }
    }
}

fn write_fixture(dir: &Path, fx: &Fixture, text: &str) -> Res<Output> {
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let graph = dir.join("graph.json");
    std::fs::write(&graph, text).map_err(io)?;
    let spec = serde_json::to_string(&fx.spec).expect("json");
    let readme = format!(
        "# Fixture\n\n{}\n\nModel: {} vertices, {} edges, genus {}.\n\nSpec: `{spec}`\n",
        describe(fx),
        fx.metric.model().num_vertices(),
        fx.metric.model().num_edges(),
        fx.genus(),
    );
    let readme_path = dir.join("README.md");
    std::fs::write(&readme_path, readme).map_err(io)?;
    Ok(Output::Report(json!({
        "written": [graph.display().to_string(), readme_path.display().to_string()],
        "vertices": fx.metric.model().num_vertices(),
        "edges": fx.metric.model().num_edges(),
        "genus": fx.genus(),
    })))
}
