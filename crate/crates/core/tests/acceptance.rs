//! Acceptance suite: fourteen criteria, one status line each.
//!
//! Runs without the libtest harness so that every line is printed even when
//! output capture is on. Exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use tropdeg::brill_noether::search::{rank_classes, search_lattice};
use tropdeg::brill_noether::{
    build_fixture, join_family, join_gonality_witness, maximal_gonality, multitree_verdict, part_grid,
    w1_family_probe, wedge_gonality_witness, FixtureSpec, GonalityVerdict, PartSpec, WitnessOptions,
};
use tropdeg::chain::{admissible_from_divisor, AdmissibleMultidegree, ChainStructure, ChainedGraph};
use tropdeg::chip::{apply_twists, canonical_divisor, is_v_reduced, rank_capped_at, rank_finite, reduce, satisfies_no_legal_firing};
use tropdeg::graph::families;
use tropdeg::metric::{
    equiv_decompose, is_edge_reduced, mg_linear_equiv, mg_rank, mg_rank_with, mg_reduce, move_chips_edge_reduced,
    MetricDivisor, MetricGraph, MetricPoint, MetricRankOptions, Q,
};
use tropdeg::pct::{divisor_sequences, is_multitree, pct_family, pct_witness, random_valid_profiles};
use tropdeg::twist_graph::{
    d_wv, d_wv_along, enumerate_bar_g, in_bar_g, is_realizable_support, minimal_path, reference_family,
    riemann_twist, twist_set,
};
use tropdeg::{Divisor, GraphSpec, MultiGraph, TwistVector};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e:?}"))
}

fn single(p: MetricPoint, c: i64) -> MetricDivisor {
    let mut d = MetricDivisor::default();
    d.add_point(p, c);
    d
}

fn vertex_divisor(d: &Divisor) -> MetricDivisor {
    MetricDivisor::from_vertex_divisor(d)
}

// 1
fn flower_rank_and_uniqueness() -> Outcome {
    let fx = ok(build_fixture(&FixtureSpec::Flower { g: 5, lengths: None }), "fixture")?;
    let mg = &fx.metric;
    let two_v0 = single(MetricPoint::Vertex(fx.marked["v0"]), 2);
    let r = ok(mg_rank(mg, &two_v0), "mg_rank")?;
    ensure!(r == 1, "mg_rank(2[v0]) = {r}");

    let lat = ok(search_lattice(mg, 2, &MetricDivisor::default()), "lattice")?;
    let found = ok(rank_classes(mg, &lat, 1, 2, None), "rank_classes")?;
    ensure!(!found.is_empty(), "lattice search found no rank-1 class");
    for c in &found {
        ensure!(
            mg_linear_equiv(mg, &lat.from_graph_divisor(c), &two_v0).is_some(),
            "found a rank-1 class not equivalent to 2[v0]"
        );
    }
    // brute force over every effective degree-2 lattice divisor
    let adj = Adj::of(&lat.graph);
    let nl = adj.n();
    let mut rank_one = 0;
    let mut bad = None;
    for_each_multiset(nl, 2, &mut |e| {
        let mut d = vec![0i64; nl];
        e.iter().for_each(|&v| d[v] += 1);
        if adj.rank(&d) >= 1 {
            rank_one += 1;
            let md = lat.from_graph_divisor(&Divisor::from_vec(d.clone()));
            if mg_linear_equiv(mg, &md, &two_v0).is_none() {
                bad = Some(e.to_vec());
            }
        }
    });
    ensure!(bad.is_none(), "oracle found a rank-1 divisor outside the class of 2[v0]: {bad:?}");
    Ok(format!("rank 1; {} reduced class(es), {rank_one} effective rank-1 lattice divisors, all ~ 2[v0]", found.len()))
}

// 2
fn banana_rank() -> Outcome {
    let fx = ok(build_fixture(&FixtureSpec::Banana { g: 4, lengths: None }), "fixture")?;
    let mg = &fx.metric;
    let mut d = single(MetricPoint::Vertex(fx.marked["v1"]), 1);
    d.add_point(MetricPoint::Vertex(fx.marked["v2"]), 1);
    let r = ok(mg_rank(mg, &d), "mg_rank")?;
    ensure!(r == 1, "mg_rank([v1]+[v2]) = {r}");
    let oracle = Adj::of(mg.model()).rank(&[1, 1]);
    ensure!(oracle == 1, "oracle rank {oracle}");
    Ok("mg_rank([v1]+[v2]) = 1".into())
}

// 3
fn reduced_uniqueness() -> Outcome {
    let mut rng = rng(3);
    for trial in 0..500 {
        let g = random_graph(&mut rng, 8, 6);
        let deg = rng.gen_range(-8..=8);
        let d = random_divisor(&mut rng, &g, deg, 3);
        let q = rng.gen_range(0..g.num_vertices());
        let (r, t) = ok(reduce(&g, &d, q), "reduce")?;
        ensure!(ok(is_v_reduced(&g, &r, q), "is_v_reduced")?, "trial {trial}: output not reduced");
        ensure!(apply_twists(&g, &d, &t) == r, "trial {trial}: twist vector does not reach the output");
        let (again, t2) = ok(reduce(&g, &r, q), "reduce")?;
        ensure!(again == r && t2.is_zero(), "trial {trial}: not idempotent");
        let oracle = Adj::of(&g).reduce(d.as_slice(), q);
        ensure!(oracle == r.as_slice(), "trial {trial}: oracle {oracle:?} vs {:?}", r.as_slice());
        for _ in 0..3 {
            let raw: Vec<i64> = g.vertices().map(|_| rng.gen_range(0..=4)).collect();
            let moved = apply_twists(&g, &d, &TwistVector::normalized(raw));
            ensure!(ok(reduce(&g, &moved, q), "reduce")?.0 == r, "trial {trial}: perturbation changed the result");
        }
    }
    Ok("500 trials".into())
}

/// Exhaustive: some ordering of all vertices, each made negative by the
/// negative twists at the earlier ones.
fn concentrated_by_search(cg: &ChainedGraph, w: &AdmissibleMultidegree, v0: usize) -> bool {
    let n = cg.graph.num_vertices();
    let full = (1usize << n) - 1;
    let mut seen = vec![false; 1 << n];
    let mut stack = vec![1usize << v0];
    seen[1 << v0] = true;
    while let Some(mask) = stack.pop() {
        if mask == full {
            return true;
        }
        let mut cur = w.clone();
        for u in (0..n).filter(|&u| mask >> u & 1 == 1) {
            cur = cg.twist(&cur, u, -1).unwrap();
        }
        for u in (0..n).filter(|&u| mask >> u & 1 == 0) {
            if cur.w[u] < 0 && !seen[mask | 1 << u] {
                seen[mask | 1 << u] = true;
                stack.push(mask | 1 << u);
            }
        }
    }
    false
}

// 4
fn concentration_equivalences() -> Outcome {
    let mut rng = rng(4);
    let mut positives = 0;
    for trial in 0..500 {
        let cg = random_chained(&mut rng, 5, 4, 4);
        let w = random_multidegree(&mut rng, &cg, -1, 3);
        let v0 = rng.gen_range(0..cg.graph.num_vertices());
        let greedy = ok(cg.is_concentrated(&w, v0), "is_concentrated")?.concentrated;
        let exhaustive = concentrated_by_search(&cg, &w, v0);
        ensure!(greedy == exhaustive, "trial {trial}: greedy {greedy} vs exhaustive {exhaustive}");
        let induced = cg.induced(&w);
        let cond2 = ok(satisfies_no_legal_firing(&cg.sub.graph, &induced, v0), "no legal firing")?;
        ensure!(greedy == cond2, "trial {trial}: concentrated {greedy} vs no legal firing {cond2}");
        let flat = ChainedGraph::trivial(cg.sub.graph.clone());
        let wt = AdmissibleMultidegree::from_divisor(&flat.graph, &induced);
        let sub_conc = ok(flat.is_concentrated(&wt, v0), "is_concentrated")?.concentrated;
        ensure!(greedy == sub_conc, "trial {trial}: on Γ {greedy} vs subdivided {sub_conc}");
        ensure!(admissible_from_divisor(&cg.sub, &induced).as_ref() == Some(&w), "trial {trial}: round trip");
        positives += greedy as usize;
    }
    Ok(format!("500 instances, {positives} concentrated"))
}

// 5
fn canonical_concentration() -> Outcome {
    let mut rng = rng(5);
    let mut boxes = 0usize;
    for trial in 0..200 {
        let cg = random_chained(&mut rng, 4, 3, 3);
        let w0 = random_multidegree(&mut rng, &cg, -1, 3);
        let n = cg.graph.num_vertices();
        let v0 = rng.gen_range(0..n);
        let (w, t) = ok(cg.concentrate(&w0, v0), "concentrate")?;
        ensure!(ok(cg.is_concentrated(&w, v0), "is_concentrated")?.concentrated, "trial {trial}: not concentrated");
        ensure!((0..n).all(|u| u == v0 || w.w[u] >= 0), "trial {trial}: negative away from v0");
        ensure!(cg.apply(&w0, &t) == w, "trial {trial}: twist vector mismatch");
        let k = t.counts().iter().copied().max().unwrap_or(0) + 4;
        let mut hits = Vec::new();
        let mut x = vec![0i64; n];
        loop {
            if x.iter().any(|&c| c == 0) {
                boxes += 1;
                let y = cg.apply(&w0, &TwistVector::normalized(x.clone()));
                if (0..n).all(|u| u == v0 || y.w[u] >= 0) && concentrated_by_search(&cg, &y, v0) {
                    hits.push(y);
                }
            }
            let Some(i) = (0..n).find(|&i| x[i] < k) else { break };
            x[i] += 1;
            x[..i].iter_mut().for_each(|c| *c = 0);
        }
        ensure!(hits == vec![w.clone()], "trial {trial}: box search found {} candidates", hits.len());
    }
    Ok(format!("200 instances, {boxes} twists searched"))
}

// 6
fn path_calculus() -> Outcome {
    let mut rng = rng(6);
    for trial in 0..1000 {
        let cg = random_chained(&mut rng, 5, 4, 3);
        let w0 = random_multidegree(&mut rng, &cg, -2, 3);
        let n = cg.graph.num_vertices();
        let steps: Vec<(usize, i64)> =
            (0..rng.gen_range(0..=12)).map(|_| (rng.gen_range(0..n), if rng.gen_bool(0.7) { 1 } else { -1 })).collect();
        let walk = |seq: &[(usize, i64)]| -> Result<AdmissibleMultidegree, String> {
            let mut w = w0.clone();
            for &(v, dir) in seq {
                w = ok(cg.twist(&w, v, dir), "twist")?;
            }
            Ok(w)
        };
        let end = walk(&steps)?;
        let mut raw = vec![0i64; n];
        steps.iter().for_each(|&(v, dir)| raw[v] += dir);
        let nf = TwistVector::normalized(raw);
        ensure!(cg.apply(&w0, &nf) == end, "trial {trial}: normal form endpoint differs");
        ensure!(walk(&shuffled(&mut rng, &steps))? == end, "trial {trial}: reordering changed the endpoint");
        let mut w = end.clone();
        for v in shuffled(&mut rng, &(0..n).collect::<Vec<_>>()) {
            w = ok(cg.twist(&w, v, 1), "twist")?;
        }
        ensure!(w == end, "trial {trial}: full-vertex twist is not the identity");
    }
    Ok("1000 sequences".into())
}

fn chained(g: MultiGraph, n: Vec<i64>) -> ChainedGraph {
    let chain = ChainStructure::new(&g, n).unwrap();
    ChainedGraph::new(g, chain).unwrap()
}

// 7
fn bar_g_fixtures() -> Outcome {
    let flower2 = build_fixture(&FixtureSpec::Flower { g: 2, lengths: None }).unwrap().metric.model().clone();
    let graphs = vec![
        chained(families::banana(2), vec![1, 1]),
        chained(families::banana(2), vec![2, 3]),
        chained(families::banana(3), vec![2, 2, 2]),
        chained(families::cycle(3), vec![1, 1, 1]),
        chained(families::cycle(3), vec![2, 1, 1]),
        chained(families::path(3), vec![2, 3]),
        ChainedGraph::trivial(flower2),
    ];
    let mut rng = rng(7);
    let (mut runs, mut members, mut moves) = (0, 0, 0);
    for cg in &graphs {
        let n = cg.graph.num_vertices();
        for d in 0..=6 {
            for _ in 0..2 {
                let w0 = random_effective_multidegree(&mut rng, cg, d);
                let fam = reference_family(cg, &w0);
                let core = ok(enumerate_bar_g(cg, &w0, &fam), "enumerate_bar_g")?;
                runs += 1;
                ensure!(!core.members.is_empty(), "empty Ḡ for an effective class");
                ensure!(
                    core.members.iter().any(|w| w.w.iter().all(|&x| x >= 0)),
                    "Ḡ lacks a nonnegative member"
                );
                for w in &core.members {
                    members += 1;
                    ensure!(ok(in_bar_g(cg, w, &fam), "in_bar_g")?, "member fails the membership predicate");
                    for mask in 1u32..(1 << n) {
                        let s: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                        if is_realizable_support(cg, w, &s) {
                            moves += 1;
                            ensure!(core.contains(&twist_set(cg, w, &s)), "support twist left the enumerated set");
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{runs} enumerations, {members} members, {moves} closure moves"))
}

// 8
fn dwv_path_independence() -> Outcome {
    let mut rng = rng(8);
    for trial in 0..300 {
        let cg = random_chained(&mut rng, 4, 3, 3);
        let n = cg.graph.num_vertices();
        let d = rng.gen_range(0..=5);
        let w0 = random_effective_multidegree(&mut rng, &cg, d);
        let fam = reference_family(&cg, &w0);
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        let w = cg.apply(&w0, &TwistVector::normalized(raw));
        let v = rng.gen_range(0..n);
        let path = ok(minimal_path(&cg, &w, &fam[v]), "minimal_path")?;
        let seq = path.sequence();
        let a = d_wv_along(&cg, &w, v, &seq);
        let b = d_wv_along(&cg, &w, v, &shuffled(&mut rng, &seq));
        ensure!(a == b, "trial {trial}: orderings disagree");
        ensure!(ok(d_wv(&cg, &fam, &w, v), "d_wv")? == a, "trial {trial}: d_wv differs from its own path");
    }
    Ok("300 instances".into())
}

// 9
fn riemann_twists() -> Outcome {
    let mut rng = rng(9);
    for trial in 0..200 {
        let cg = random_chained(&mut rng, 4, 3, 3);
        let g = cg.graph.genus();
        let w0 = random_multidegree(&mut rng, &cg, -1, 2 + g);
        let v0 = rng.gen_range(0..cg.graph.num_vertices());
        let rt = ok(riemann_twist(&cg, &w0, v0), "riemann_twist")?;
        ensure!(cg.twist_equivalent(&w0, &rt.target).is_some(), "trial {trial}: target not twist-equivalent");
        ensure!(cg.apply(&w0, &rt.twist) == rt.target, "trial {trial}: twist vector mismatch");
        let can = canonical_divisor(&cg.sub.graph);
        let back = admissible_from_divisor(&cg.sub, &(&can - &rt.fixed));
        ensure!(back.as_ref() == Some(&rt.target), "trial {trial}: w_can - w'' is not the admissible target");
        let adj = Adj::of(&cg.sub.graph);
        ensure!(!adj.unburnt(rt.fixed.as_slice(), v0).contains(&true), "trial {trial}: w'' not concentrated");
    }
    Ok("200 instances".into())
}

/// Connected loopless multigraphs with at most 4 vertices and genus at most
/// 3, one per isomorphism class.
fn small_graphs() -> Vec<MultiGraph> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 1..=4usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let max_e = n + 2;
        let mut mult = vec![0usize; pairs.len()];
        loop {
            let e: usize = mult.iter().sum();
            if e + 1 >= n && e <= max_e {
                let mut m = vec![vec![0usize; n]; n];
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    m[a][b] = mult[k];
                    m[b][a] = mult[k];
                }
                let canon = permutations(n)
                    .iter()
                    .map(|p| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[p[i]][p[j]]).collect::<Vec<_>>())
                    .min()
                    .unwrap();
                if seen.insert(canon) {
                    let mut spec = GraphSpec::default();
                    for i in 0..n {
                        spec.vertex(format!("v{i}"));
                    }
                    let mut k = 0;
                    for (idx, &(a, b)) in pairs.iter().enumerate() {
                        for _ in 0..mult[idx] {
                            spec.edge(format!("e{k}"), format!("v{a}"), format!("v{b}"));
                            k += 1;
                        }
                    }
                    if let Ok(g) = MultiGraph::build(&spec) {
                        out.push(g);
                    }
                }
            }
            let Some(i) = (0..mult.len()).find(|&i| mult[i] < max_e) else { break };
            mult[i] += 1;
            mult[..i].iter_mut().for_each(|c| *c = 0);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// `q`-superstable configurations: each the off-`q` part of a reduced class.
fn superstables(adj: &Adj, q: usize) -> Vec<Vec<i64>> {
    let n = adj.n();
    let mut out = Vec::new();
    let mut c = vec![0i64; n];
    loop {
        if !adj.unburnt(&c, q).contains(&true) {
            out.push(c.clone());
        }
        let Some(i) = (0..n).find(|&i| i != q && c[i] < adj.valence(i) - 1) else { break };
        c[i] += 1;
        c[..i].iter_mut().enumerate().for_each(|(j, x)| if j != q { *x = 0 });
    }
    out
}

// 10
fn riemann_roch_oracle() -> Outcome {
    let graphs = small_graphs();
    let mut classes = 0;
    for g in &graphs {
        let adj = Adj::of(g);
        let genus = adj.genus();
        let k = adj.canonical();
        let mg = MetricGraph::unit(g.clone());
        let km = mg.canonical();
        let n = adj.n();
        for c in superstables(&adj, 0) {
            let base: i64 = c.iter().sum();
            for d in -1..=2 * genus - 1 {
                let mut dv = c.clone();
                dv[0] = d - base;
                let kd: Vec<i64> = k.iter().zip(&dv).map(|(a, b)| a - b).collect();
                let (r, rk) = (adj.rank(&dv), adj.rank(&kd));
                classes += 1;
                let div = Divisor::from_vec(dv.clone());
                let lib = rank_finite(g, &div);
                ensure!(lib == r, "{:?} D={dv:?}: library rank {lib}, oracle {r}", g.to_spec());
                ensure!(r - rk == d - genus + 1, "Riemann–Roch fails for D={dv:?} on {:?}", g.to_spec());
                if d > 2 * genus - 2 {
                    ensure!(r == d - genus, "Riemann inequality case fails for D={dv:?}");
                }
                if rk >= 0 && r >= 0 {
                    ensure!(2 * r <= d, "Clifford fails for D={dv:?}");
                }
                for q in 1..n {
                    ensure!(rank_capped_at(g, &div, i64::MAX, q) == r, "rank depends on the base vertex");
                }
                let md = vertex_divisor(&div);
                let mr = ok(mg_rank(&mg, &md), "mg_rank")?;
                let mrk = ok(mg_rank(&mg, &(&km - &md)), "mg_rank")?;
                ensure!(mr == r, "metric rank {mr} vs graph rank {r} for D={dv:?}");
                ensure!(mr - mrk == d - genus + 1, "metric Riemann–Roch fails for D={dv:?}");
            }
        }
    }
    Ok(format!("{} graphs, {classes} classes", graphs.len()))
}

// 11
fn gonality_constructions() -> Outcome {
    let opts = WitnessOptions::default();
    let cap1 = MetricRankOptions { cap: Some(1), ..Default::default() };

    let fx = ok(build_fixture(&FixtureSpec::Wedge { parts: vec![PartSpec::Loop { length: None }; 3] }), "fixture")?;
    let rep = ok(wedge_gonality_witness(&fx, opts), "wedge witness")?;
    ensure!(rep.witness.degree == 2 && rep.maximal_gonality == 3, "(a) degree {}", rep.witness.degree);
    ensure!(rep.witness.verified, "(a) witness not verified");
    ensure!(ok(mg_rank_with(&fx.metric, &rep.witness.divisor, &cap1), "mg_rank")? == 1, "(a) rank below 1");
    let base = rep.constructions.iter().find(|c| c.name == "base").ok_or("(a) no base construction")?;
    ensure!(base.formula_degree == 2, "(a) formula degree {}", base.formula_degree);

    let theta = PartSpec::Banana { edges: 3 };
    let spec = FixtureSpec::PathJoin { parts: vec![theta.clone(), theta], m: 4, lengths: None };
    let fx = ok(build_fixture(&spec), "fixture")?;
    let rep = ok(join_gonality_witness(&fx, opts), "join witness")?;
    ensure!(rep.genus == 7 && maximal_gonality(7) == 5, "(b) genus {}", rep.genus);
    ensure!(rep.witness.degree == 4 && rep.verdict == GonalityVerdict::NotMaximal, "(b) degree {}", rep.witness.degree);
    ensure!(ok(mg_rank_with(&fx.metric, &rep.witness.divisor, &cap1), "mg_rank")? == 1, "(b) rank below 1");

    let tri = PartSpec::Cycle { k: 3 };
    let spec = FixtureSpec::PathJoin { parts: vec![tri.clone(), tri], m: 4, lengths: None };
    let fx = ok(build_fixture(&spec), "fixture")?;
    let rep = ok(join_gonality_witness(&fx, opts), "join witness")?;
    ensure!(rep.verdict == GonalityVerdict::Exception, "(c) verdict {:?}", rep.verdict);
    let g1 = ok(part_grid(&fx.parts[0], 3, 2), "grid")?;
    let g2 = ok(part_grid(&fx.parts[1], 3, 2), "grid")?;
    let fam = ok(join_family(&fx, [&g1, &g2], opts), "family")?;
    ensure!(fam.len() == 9 && fam.iter().all(|d| d.degree() == 4), "(c) family shape");
    let probe = ok(w1_family_probe(&fx.metric, &fam), "probe")?;
    ensure!(probe.classes >= 3, "(c) only {} classes", probe.classes);
    for &i in &probe.representatives {
        ensure!(ok(mg_rank_with(&fx.metric, &fam[i], &cap1), "mg_rank")? == 1, "(c) member {i} below rank 1");
        for &j in probe.representatives.iter().filter(|&&j| j > i) {
            ensure!(mg_linear_equiv(&fx.metric, &fam[i], &fam[j]).is_none(), "(c) members {i} and {j} equivalent");
        }
    }
    Ok(format!("(a) 2 < 3, (b) 4 < 5, (c) {} classes in a 3x3 family", probe.classes))
}

fn random_multichain(rng: &mut TestRng) -> MetricGraph {
    let k = rng.gen_range(2..=6);
    let mut spec = GraphSpec::default();
    for i in 0..k {
        spec.vertex(format!("c{i}"));
    }
    let mut lens = Vec::new();
    for i in 1..k {
        for m in 0..rng.gen_range(1..=3) {
            spec.edge(format!("c{i}_{m}"), format!("c{}", i - 1), format!("c{i}"));
            lens.push(Q::new(rng.gen_range(1..=4), rng.gen_range(1..=2)));
        }
    }
    MetricGraph::new(MultiGraph::build(&spec).unwrap(), lens).unwrap()
}

// 12
fn multitree_verdicts() -> Outcome {
    let lp = || PartSpec::Loop { length: None };
    let wedges = vec![
        vec![lp(), lp(), lp()],
        vec![lp(), lp(), lp(), lp()],
        vec![PartSpec::Banana { edges: 3 }, lp(), PartSpec::Cycle { k: 4 }],
        vec![PartSpec::Flower { g: 2 }, PartSpec::Loop { length: Some("5/2".into()) }, PartSpec::Banana { edges: 4 }],
        vec![PartSpec::Cycle { k: 3 }; 5],
        vec![PartSpec::Point, lp(), lp(), lp()],
    ];
    let mut flagged = 0;
    for parts in wedges {
        // a flower wedged at its center contributes one branch per petal
        let n: usize = parts
            .iter()
            .map(|p| match p {
                PartSpec::Point => 0,
                PartSpec::Flower { g } => *g,
                _ => 1,
            })
            .sum();
        let fx = ok(build_fixture(&FixtureSpec::Wedge { parts }), "fixture")?;
        let v = multitree_verdict(&fx.metric);
        ensure!(v.message == format!("cannot be Brill–Noether general: cut point v0 with n={n}"), "wedge {:?}: {}", fx.spec, v.message);
        flagged += 1;
    }
    let joins = vec![
        (PartSpec::Cycle { k: 3 }, PartSpec::Cycle { k: 3 }, 4),
        (PartSpec::Cycle { k: 3 }, PartSpec::Cycle { k: 3 }, 5),
        (PartSpec::Banana { edges: 3 }, lp(), 4),
        (PartSpec::Flower { g: 2 }, PartSpec::Cycle { k: 4 }, 6),
        (PartSpec::Point, PartSpec::Point, 4),
    ];
    for (a, b, m) in joins {
        let fx = ok(build_fixture(&FixtureSpec::PathJoin { parts: vec![a, b], m, lengths: None }), "fixture")?;
        let v = multitree_verdict(&fx.metric);
        ensure!(
            v.message == format!("cannot be Brill–Noether general: multiedge join m={m}")
                || v.obstructions.iter().any(|o| matches!(o, tropdeg::brill_noether::Obstruction::MultiedgeJoin { m: k, .. } if *k == m)),
            "join m={m}: {}",
            v.message
        );
        flagged += 1;
    }
    let mut passed = 0;
    for g in 1..=5 {
        let fx = ok(build_fixture(&FixtureSpec::ChainOfLoops { g, lengths: None }), "fixture")?;
        let v = multitree_verdict(&fx.metric);
        ensure!(v.obstructions.is_empty() && v.small_multichain, "chain of {g} loops: {}", v.message);
        passed += 1;
    }
    let mut rng = rng(12);
    for _ in 0..40 {
        let mg = random_multichain(&mut rng);
        let v = multitree_verdict(&mg);
        ensure!(v.obstructions.is_empty() && v.small_multichain, "multichain: {}", v.message);
        ensure!(v.message == "no obstruction found", "multichain message {}", v.message);
        passed += 1;
    }
    Ok(format!("{flagged} flagged, {passed} chains passed"))
}

// 13
fn pct_witnesses() -> Outcome {
    let mut rng = rng(13);
    let (mut done, mut skipped) = (0, 0);
    while done < 100 {
        ensure!(skipped < 1000, "too many instances without valid profiles");
        let cg = random_multitree(&mut rng);
        let mt = is_multitree(&cg.graph);
        ensure!(mt.is_tree, "generator produced a non-multitree");
        let nv = cg.graph.num_vertices();
        let d = rng.gen_range(0..=4);
        let w0 = random_effective_multidegree(&mut rng, &cg, d);
        let Ok(fam) = pct_family(&cg, &mt, &w0) else {
            skipped += 1;
            continue;
        };
        let seqs = ok(divisor_sequences(&cg, &mt, &fam), "divisor_sequences")?;
        let r = rng.gen_range(0..=2usize);
        let mut r_v = vec![0i64; nv];
        for _ in 0..r {
            r_v[rng.gen_range(0..nv)] += 1;
        }
        let Some(profiles) = random_valid_profiles(&mut rng, &mt, &seqs, r) else {
            skipped += 1;
            continue;
        };
        let wit = ok(pct_witness(&cg, &mt, &fam, &seqs, &r_v, &profiles), "pct_witness")?;
        ensure!(wit.counts_match, "(a) t-counts fail on instance {done}");
        ensure!(wit.codim_sum, "(b) codimension sum fails on instance {done}");
        ensure!(wit.in_bar_g, "(c) Ḡ membership fails on instance {done}");
        ensure!(ok(in_bar_g(&cg, &wit.w, &fam.family), "in_bar_g")?, "(c) recheck fails on instance {done}");
        done += 1;
    }
    Ok(format!("100 instances ({skipped} skipped for lack of profiles)"))
}

/// One edge of length `len`, chip at `p` (or none), values `a` at the tail
/// and `b` at the head; all in units of 1/scale. Returns every unit-step
/// slope sequence keeping the interior effective with at most one chip.
fn oracle_edge(len: i64, p: Option<i64>, a: i64, b: i64) -> Vec<(Vec<i64>, Option<i64>)> {
    let mut sols = Vec::new();
    let dk = |k: i64| (p == Some(k)) as i64;
    for j in std::iter::once(None).chain((1..len).map(Some)) {
        // s_{k+1} = s_k + r_k - D_k with r the indicator of j
        let deltas: Vec<i64> = (1..len).map(|k| (j == Some(k)) as i64 - dk(k)).collect();
        let offset: i64 = (1..len).map(|k| (len - k) * deltas[k as usize - 1]).sum();
        let rhs = b - a - offset;
        if rhs % len != 0 {
            continue;
        }
        let mut s = vec![rhs / len];
        for dlt in &deltas {
            s.push(s.last().unwrap() + dlt);
        }
        sols.push((s, j));
    }
    sols
}

/// Unit-subdivision oracle for `move_chips_edge_reduced` on a graph whose
/// lengths, chip offsets and values are integers after scaling by `scale`.
fn oracle_move(mg: &MetricGraph, d: &MetricDivisor, c: &[Q], scale: i64) -> Result<MetricDivisor, String> {
    let g = mg.model();
    let mut out = MetricDivisor::default();
    for v in g.vertices() {
        out.add_point(MetricPoint::Vertex(v), d.vertex_coeff(v));
    }
    let int = |x: Q| -> i64 {
        let y = x * scale;
        assert!(y.is_integer());
        y.to_integer()
    };
    for e in g.edge_indices() {
        let ed = g.edge(e);
        let len = int(mg.length(e));
        let p = d.on_edge(e).first().map(|&(x, _)| int(x));
        let sols = oracle_edge(len, p, int(c[ed.tail]), int(c[ed.head]));
        ensure!(sols.len() == 1, "edge {}: {} oracle solutions", g.edge_name(e), sols.len());
        let (s, j) = &sols[0];
        out.add_point(MetricPoint::Vertex(ed.tail), s[0]);
        out.add_point(MetricPoint::Vertex(ed.head), -s[s.len() - 1]);
        if let Some(j) = j {
            out.add_point(mg.point(e, Q::new(*j, scale)).unwrap(), 1);
        }
    }
    Ok(out)
}

fn random_edge_reduced(rng: &mut TestRng, mg: &MetricGraph, scale: i64, effective: bool) -> MetricDivisor {
    let g = mg.model();
    let mut d = MetricDivisor::default();
    for v in g.vertices() {
        let c = if effective { rng.gen_range(0..=2) } else { rng.gen_range(-1..=2) };
        d.add_point(MetricPoint::Vertex(v), c);
    }
    for e in g.edge_indices() {
        let len = (mg.length(e) * scale).to_integer();
        if len > 1 && rng.gen_bool(0.5) {
            d.add_point(mg.point(e, Q::new(rng.gen_range(1..len), scale)).unwrap(), 1);
        }
    }
    d
}

fn random_metric(rng: &mut TestRng, scale: i64) -> MetricGraph {
    let g = random_graph(rng, 5, 3);
    let lens = g.edge_indices().map(|_| Q::new(rng.gen_range(1..=3 * scale), scale)).collect();
    MetricGraph::new(g, lens).unwrap()
}

// 14
fn edge_reduced_machinery() -> Outcome {
    let mut rng = rng(14);
    let check = |rng: &mut TestRng, mg: &MetricGraph, scale: i64| -> Result<(), String> {
        let d = random_edge_reduced(rng, mg, scale, false);
        let c: Vec<Q> = mg.model().vertices().map(|_| Q::new(rng.gen_range(-4 * scale..=4 * scale), scale)).collect();
        let (out, f) = ok(move_chips_edge_reduced(mg, &d, &c), "move_chips_edge_reduced")?;
        let oracle = oracle_move(mg, &d, &c, scale)?;
        ensure!(out == oracle, "transport disagrees with the unit-subdivision oracle");
        for v in mg.model().vertices().filter(|&v| !mg.model().incident(v).is_empty()) {
            ensure!(f.vertex_value(mg, v) == c[v], "function misses a prescribed value at {v}: {} vs {} on {:?}", f.vertex_value(mg, v), c[v], mg.model().to_spec());
        }
        ensure!(&d + &ok(tropdeg::metric::div_pl(mg, &f), "div_pl")? == out, "output is not d + div f");
        Ok(())
    };
    for _ in 0..300 {
        let scale = rng.gen_range(1..=3);
        let len = Q::new(rng.gen_range(1..=5 * scale), scale);
        let mg = MetricGraph::new(families::path(2), vec![len]).unwrap();
        check(&mut rng, &mg, scale)?;
    }
    for _ in 0..100 {
        let scale = rng.gen_range(1..=2);
        let mg = random_metric(&mut rng, scale);
        check(&mut rng, &mg, scale)?;
    }
    let (mut pairs, mut stages) = (0, 0);
    let mut attempts = 0;
    while pairs < 100 {
        attempts += 1;
        ensure!(attempts < 5000, "could not generate equivalent pairs");
        let scale = rng.gen_range(1..=2);
        let mg = random_metric(&mut rng, scale);
        let d = random_edge_reduced(&mut rng, &mg, scale, true);
        let d2 = if rng.gen_bool(0.5) {
            let q = MetricPoint::Vertex(rng.gen_range(0..mg.model().num_vertices()));
            ok(mg_reduce(&mg, &d, &q), "mg_reduce")?.0
        } else {
            let c: Vec<Q> = mg.model().vertices().map(|_| Q::new(rng.gen_range(-2 * scale..=2 * scale), scale)).collect();
            ok(move_chips_edge_reduced(&mg, &d, &c), "move")?.0
        };
        if !d2.is_effective() || !is_edge_reduced(&mg, &d2) {
            continue;
        }
        let f = mg_linear_equiv(&mg, &d, &d2).ok_or("equivalent pair not recognised")?;
        let dec = ok(equiv_decompose(&mg, &d, &d2, &f), "equiv_decompose")?;
        ensure!(dec.stages.first() == Some(&d) && dec.stages.last() == Some(&d2), "stage endpoints");
        for (j, s) in dec.stages.iter().enumerate() {
            ensure!(s.is_effective() && is_edge_reduced(&mg, s), "stage {j} not effective edge-reduced");
            ensure!(s.degree() == d.degree(), "stage {j} changes degree");
        }
        stages += dec.stages.len();
        pairs += 1;
    }
    Ok(format!("400 transports match the oracle; 100 decompositions, {stages} stages"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("flower: rank of 2[v0] and uniqueness on the 1/2 lattice", flower_rank_and_uniqueness),
        ("banana: rank of [v1]+[v2]", banana_rank),
        ("reduced divisors: uniqueness and idempotence", reduced_uniqueness),
        ("concentrated vs no legal firing and subdivision", concentration_equivalences),
        ("canonical concentration and uniqueness", canonical_concentration),
        ("twist path calculus", path_calculus),
        ("finite twist graph on fixtures", bar_g_fixtures),
        ("D_{w,v} path independence", dwv_path_independence),
        ("Riemann twist", riemann_twists),
        ("Riemann–Roch oracle on small graphs", riemann_roch_oracle),
        ("gonality constructions", gonality_constructions),
        ("multitree verdicts", multitree_verdicts),
        ("pct witness certificates", pct_witnesses),
        ("edge-reduced transport and staged decomposition", edge_reduced_machinery),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let results: Vec<(Outcome, Duration)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                        let msg = p
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_default();
                        Err(format!("panicked: {msg}"))
                    });
                    (r, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread")).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (r, t))) in criteria.iter().zip(&results).enumerate() {
        let (status, detail) = match r {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => {
                failed += 1;
                ("FAIL", e.clone())
            }
        };
        println!("criterion {:>2} {status} {name} [{:.1}s] {detail}", i + 1, t.as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

