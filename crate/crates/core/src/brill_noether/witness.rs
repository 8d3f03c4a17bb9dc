//! Pencils of low degree on wedges and multiedge joins, built from pencils
//! on the parts.

use serde::Serialize;

use super::fixtures::{Fixture, FixtureSpec, Part};
use super::search::{gonality_search_lattice, pencil_through, search_lattice, EvidenceLevel};
use crate::error::{Error, Result};
use crate::metric::{mg_rank_with, pointwise_max, MetricDivisor, MetricGraph, MetricPoint, MetricRankOptions};

/// Additive least common multiple: the pointwise maximum.
pub fn pencil_lcm(divisors: &[MetricDivisor]) -> MetricDivisor {
    pointwise_max(divisors)
}

fn ceil_half(x: i64) -> i64 {
    (x + 1).div_euclid(2)
}

/// The maximal gonality `⌈g/2⌉ + 1`.
pub fn maximal_gonality(g: i64) -> i64 {
    ceil_half(g) + 1
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub name: String,
    /// Upper bound on the degree predicted by the construction.
    pub formula_degree: i64,
    pub degree: i64,
    pub divisor: MetricDivisor,
    /// Degree and multiplicity at the gluing point asked of each part.
    pub part_requests: Vec<(i64, i64)>,
}

#[derive(Debug, Clone)]
pub struct GonalityWitness {
    pub divisor: MetricDivisor,
    pub degree: i64,
    pub claimed_rank: i64,
    /// Rank computed by `mg_rank`, capped at the claim.
    pub rank: i64,
    pub verified: bool,
    pub construction: String,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GonalityVerdict {
    /// The witness has degree below `⌈g/2⌉ + 1`.
    NotMaximal,
    /// The exceptional configuration: maximal gonality is possible but the
    /// pencils come in a larger family than expected.
    Exception,
    /// No construction beat `⌈g/2⌉ + 1`.
    NoImprovement,
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub genus: i64,
    pub maximal_gonality: i64,
    pub witness: GonalityWitness,
    pub constructions: Vec<Construction>,
    pub verdict: GonalityVerdict,
    pub message: String,
    pub evidence: EvidenceLevel,
}

/// Search options shared by the witness constructions.
#[derive(Debug, Clone, Copy)]
pub struct WitnessOptions {
    /// Lattice denominator for part pencils; doubled once if nothing is found.
    pub n: i64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions { n: 1 }
    }
}

fn single(p: MetricPoint, c: i64) -> MetricDivisor {
    let mut d = MetricDivisor::default();
    d.add_point(p, c);
    d
}

/// A pencil of the given degree on a part containing `base`.
fn part_pencil(part: &Part, base: &MetricDivisor, degree: i64, opts: WitnessOptions) -> Result<Option<MetricDivisor>> {
    for n in [opts.n, 2 * opts.n] {
        if let Some(d) = pencil_through(&part.metric, base, degree, n)? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Whether the part has maximal gonality: `None` if a pencil of smaller
/// degree exists (it is returned), judged on the lattice otherwise.
fn part_below_maximal(part: &Part, opts: WitnessOptions) -> Result<Option<MetricDivisor>> {
    let d = ceil_half(part.genus);
    if d <= 0 {
        return Ok(None);
    }
    let found = gonality_search_lattice(&part.metric, 2 * opts.n, d, None)?;
    if found.degree.is_none() {
        return Ok(None);
    }
    let at = single(MetricPoint::Vertex(part.attach), 1);
    part_pencil(part, &at, d, opts)
}

fn verify(mg: &MetricGraph, d: &MetricDivisor) -> Result<i64> {
    mg_rank_with(mg, d, &MetricRankOptions { cap: Some(1), ..Default::default() })
}

fn finish(
    fx: &Fixture,
    constructions: Vec<Construction>,
    trace: Vec<String>,
    exception: bool,
    exception_message: &str,
    exception_evidence: EvidenceLevel,
) -> Result<WitnessReport> {
    let g = fx.genus();
    let target = maximal_gonality(g);
    let best = constructions
        .iter()
        .min_by_key(|c| c.degree)
        .ok_or_else(|| Error::WitnessUnverified("no construction produced a pencil".into()))?;
    let rank = verify(&fx.metric, &best.divisor)?;
    if rank < 1 {
        return Err(Error::WitnessUnverified(format!("{} has rank {rank}", best.name)));
    }
    let witness = GonalityWitness {
        divisor: best.divisor.clone(),
        degree: best.degree,
        claimed_rank: 1,
        rank,
        verified: true,
        construction: best.name.clone(),
        trace,
    };
    let (verdict, message, evidence) = if best.degree < target {
        (
            GonalityVerdict::NotMaximal,
            format!("not maximal gonality: degree {} < {target}", best.degree),
            EvidenceLevel::Proved,
        )
    } else if exception {
        (GonalityVerdict::Exception, exception_message.to_string(), exception_evidence)
    } else {
        (
            GonalityVerdict::NoImprovement,
            format!("no construction went below {target}"),
            EvidenceLevel::LatticeEvidence,
        )
    };
    Ok(WitnessReport { genus: g, maximal_gonality: target, witness, constructions, verdict, message, evidence })
}

/// Runs the three lcm constructions on a wedge and reports the best.
pub fn wedge_gonality_witness(fx: &Fixture, opts: WitnessOptions) -> Result<WitnessReport> {
    if !matches!(fx.spec, FixtureSpec::Wedge { .. }) {
        return Err(Error::PreconditionFailed("fixture is not a wedge".into()));
    }
    let v0 = fx.marked["v0"];
    let mut trace = Vec::new();
    // genus-0 parts are trees hanging off v0 and play no role
    let parts: Vec<usize> = (0..fx.parts.len()).filter(|&i| fx.parts[i].genus > 0).collect();
    if parts.len() < fx.parts.len() {
        trace.push(format!("ignored {} genus-0 parts", fx.parts.len() - parts.len()));
    }
    let n = parts.len() as i64;
    let odd: Vec<usize> = parts.iter().copied().filter(|&i| fx.parts[i].genus % 2 == 1).collect();
    let even: Vec<usize> = parts.iter().copied().filter(|&i| fx.parts[i].genus % 2 == 0).collect();
    let (n1, n2) = (odd.len() as i64, even.len() as i64);
    let g = fx.genus();
    let target = maximal_gonality(g);
    let sum: i64 = parts.iter().map(|&i| ceil_half(fx.parts[i].genus) + 1).sum();
    trace.push(format!("n = {n}, n1 = {n1}, n2 = {n2}, g = {g}"));

    // which even parts fall short of maximal gonality
    let mut short = Vec::new();
    for &i in &even {
        short.push((i, part_below_maximal(&fx.parts[i], opts)?));
    }

    let plans: Vec<(&str, i64, Box<dyn Fn(usize) -> (i64, i64)>)> = vec![
        (
            "base",
            2 + sum - n - n1,
            Box::new(|i| {
                let gi = fx.parts[i].genus;
                (ceil_half(gi) + 1, if gi % 2 == 1 { 2 } else { 1 })
            }),
        ),
        (
            "even-multiplicity-3",
            target + 2 - ceil_half(n1) - n2,
            Box::new(|i| {
                let gi = fx.parts[i].genus;
                if gi % 2 == 1 { (ceil_half(gi) + 1, 2) } else { (ceil_half(gi) + 2, 3) }
            }),
        ),
        (
            "multiplicity-4",
            target + 3 - ceil_half(n1) - n,
            Box::new(|i| {
                let gi = fx.parts[i].genus;
                if gi % 2 == 1 { (ceil_half(gi) + 2, 4) } else { (ceil_half(gi) + 2, 3) }
            }),
        ),
    ];
    let mut constructions = Vec::new();
    for (name, formula, request) in plans {
        if name == "even-multiplicity-3" && n2 == 0 {
            continue;
        }
        if name == "multiplicity-4" && (n1 == 0 || parts.iter().any(|&i| fx.parts[i].genus <= 1)) {
            continue;
        }
        let mut pieces = Vec::new();
        let mut requests = Vec::new();
        let mut ok = true;
        for &i in &parts {
            let (deg, mult) = request(i);
            requests.push((deg, mult));
            let part = &fx.parts[i];
            match part_pencil(part, &single(MetricPoint::Vertex(part.attach), mult), deg, opts)? {
                Some(d) => pieces.push(fx.lift(i, &d)),
                None => {
                    trace.push(format!(
                        "{name}: no pencil of degree {deg} with multiplicity {mult} found on part {}",
                        i + 1
                    ));
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let divisor = pencil_lcm(&pieces);
            constructions.push(Construction {
                name: name.to_string(),
                formula_degree: formula,
                degree: divisor.degree(),
                divisor,
                part_requests: requests,
            });
        }
    }
    // an even part below maximal gonality saves one more degree
    for (i, below) in &short {
        let Some(low) = below else { continue };
        let mut pieces = vec![fx.lift(*i, low)];
        let mut ok = true;
        for &j in parts.iter().filter(|&&j| j != *i) {
            let gj = fx.parts[j].genus;
            let (deg, mult) = (ceil_half(gj) + 1, if gj % 2 == 1 { 2 } else { 1 });
            match part_pencil(&fx.parts[j], &single(MetricPoint::Vertex(fx.parts[j].attach), mult), deg, opts)? {
                Some(d) => pieces.push(fx.lift(j, &d)),
                None => ok = false,
            }
        }
        if ok {
            let divisor = pencil_lcm(&pieces);
            constructions.push(Construction {
                name: format!("base-with-low-part-{}", i + 1),
                formula_degree: 1 + sum - n - n1,
                degree: divisor.degree(),
                divisor,
                part_requests: Vec::new(),
            });
        }
    }
    debug_assert!(constructions.iter().all(|c| c.divisor.vertex_coeff(v0) >= 1));

    let even_maximal = short.iter().all(|(_, b)| b.is_none());
    let exception = n == 3 && n1 == 2 && n2 == 1 && parts.iter().any(|&i| fx.parts[i].genus == 1) && even_maximal;
    let evidence = if even.iter().all(|&i| fx.parts[i].genus <= 2) {
        EvidenceLevel::Proved
    } else {
        EvidenceLevel::LatticeEvidence
    };
    finish(fx, constructions, trace, exception, "exception; W¹ positive-dimensional expected", evidence)
}

/// The pencil `D_1 + D_2` on a join of two parts by `m >= 4` paths.
pub fn join_gonality_witness(fx: &Fixture, opts: WitnessOptions) -> Result<WitnessReport> {
    let FixtureSpec::PathJoin { m, .. } = fx.spec else {
        return Err(Error::PreconditionFailed("fixture is not a path join".into()));
    };
    let m = m as i64;
    if m < 4 {
        return Err(Error::PreconditionFailed(format!("a join needs m >= 4 paths, got {m}")));
    }
    let mut trace = Vec::new();
    let mut pieces = Vec::new();
    let mut requests = Vec::new();
    let mut maximal = [true; 2];
    let mut low_pieces = Vec::new();
    for i in 0..2 {
        let part = &fx.parts[i];
        let deg = ceil_half(part.genus) + 1;
        let at = single(MetricPoint::Vertex(part.attach), 1);
        let d = part_pencil(part, &at, deg, opts)?.ok_or_else(|| {
            Error::WitnessUnverified(format!("no pencil of degree {deg} through the gluing point of part {}", i + 1))
        })?;
        pieces.push(fx.lift(i, &d));
        requests.push((deg, 1));
        let below = part_below_maximal(part, opts)?;
        maximal[i] = below.is_none();
        if let Some(low) = below {
            trace.push(format!("part {} is below maximal gonality", i + 1));
            low_pieces.push((i, fx.lift(i, &low)));
        }
    }
    let (g1, g2) = (fx.parts[0].genus, fx.parts[1].genus);
    let formula = ceil_half(g1) + ceil_half(g2) + 2;
    let sum = &pieces[0] + &pieces[1];
    let mut constructions = vec![Construction {
        name: "sum".into(),
        formula_degree: formula,
        degree: sum.degree(),
        divisor: sum,
        part_requests: requests,
    }];
    for (i, low) in low_pieces {
        let divisor = &low + &pieces[1 - i];
        constructions.push(Construction {
            name: format!("sum-with-low-part-{}", i + 1),
            formula_degree: formula - 1,
            degree: divisor.degree(),
            divisor,
            part_requests: Vec::new(),
        });
    }
    let odd = (g1 % 2) + (g2 % 2);
    let exception = maximal[0] && maximal[1] && ((m == 4 && odd >= 1) || (m == 5 && odd == 2));
    let evidence = if g1 <= 2 && g2 <= 2 { EvidenceLevel::Proved } else { EvidenceLevel::LatticeEvidence };
    finish(fx, constructions, trace, exception, "exception; W¹ larger than expected", evidence)
}

/// Up to `k` lattice points of a part other than its gluing point, in
/// lattice order.
pub fn part_grid(part: &Part, k: usize, n: i64) -> Result<Vec<MetricPoint>> {
    let lat = search_lattice(&part.metric, n, &MetricDivisor::default())?;
    Ok((0..lat.graph.num_vertices())
        .filter(|&v| v != part.attach)
        .take(k)
        .map(|v| lat.point_of(v).clone())
        .collect())
}

/// The family `D_{1,v1'} + D_{2,v2'}` over a grid on each part: pencils on
/// the parts through the gluing point and one more point.
pub fn join_family(
    fx: &Fixture,
    grids: [&[MetricPoint]; 2],
    opts: WitnessOptions,
) -> Result<Vec<MetricDivisor>> {
    let mut per_part: Vec<Vec<MetricDivisor>> = Vec::new();
    for i in 0..2 {
        let part = &fx.parts[i];
        let deg = ceil_half(part.genus) + 1;
        let mut list = Vec::new();
        for p in grids[i] {
            let base = &single(MetricPoint::Vertex(part.attach), 1) + &single(p.clone(), 1);
            let d = part_pencil(part, &base, deg, opts)?.ok_or_else(|| {
                Error::WitnessUnverified(format!("no pencil through {} on part {}", part.metric.describe_point(p), i + 1))
            })?;
            list.push(fx.lift(i, &d));
        }
        per_part.push(list);
    }
    Ok(per_part[0].iter().flat_map(|a| per_part[1].iter().map(move |b| a + b)).collect())
}

/// The family of the exceptional wedge: the odd parts' pencils fixed, and on
/// the even part a pencil through `2 v0 + v'` for `v'` on the grid.
pub fn wedge_exception_family(fx: &Fixture, grid: &[MetricPoint], opts: WitnessOptions) -> Result<Vec<MetricDivisor>> {
    let parts: Vec<usize> = (0..fx.parts.len()).filter(|&i| fx.parts[i].genus > 0).collect();
    let even: Vec<usize> = parts.iter().copied().filter(|&i| fx.parts[i].genus % 2 == 0).collect();
    if parts.len() != 3 || even.len() != 1 {
        return Err(Error::PreconditionFailed("not an exceptional wedge".into()));
    }
    let e = even[0];
    let mut fixed = Vec::new();
    for &i in parts.iter().filter(|&&i| i != e) {
        let part = &fx.parts[i];
        let d = part_pencil(part, &single(MetricPoint::Vertex(part.attach), 2), ceil_half(part.genus) + 1, opts)?
            .ok_or_else(|| Error::WitnessUnverified(format!("no pencil on part {}", i + 1)))?;
        fixed.push(fx.lift(i, &d));
    }
    let part = &fx.parts[e];
    let mut out = Vec::new();
    for p in grid {
        let base = &single(MetricPoint::Vertex(part.attach), 2) + &single(p.clone(), 1);
        let d = part_pencil(part, &base, ceil_half(part.genus) + 2, opts)?.ok_or_else(|| {
            Error::WitnessUnverified(format!("no pencil through {}", part.metric.describe_point(p)))
        })?;
        let mut all = fixed.clone();
        all.push(fx.lift(e, &d));
        out.push(pencil_lcm(&all));
    }
    Ok(out)
}
