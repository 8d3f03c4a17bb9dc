//! Lattice searches: every class in the search space is visited through its
//! unique reduced representative.

use rayon::prelude::*;
use serde::Serialize;

use crate::chip::{self, RankSearch};
use crate::divisor::Divisor;
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, VertexId};
use crate::metric::{common_scale, mg_linear_equiv, mg_rank_with, Lattice, MetricDivisor, MetricGraph, MetricRankOptions};

/// How a search result should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceLevel {
    /// Established by an exact computation.
    Proved,
    /// Only the lattice was searched.
    LatticeEvidence,
}

/// The lattice used for a search: the `1/N` points, with `N` raised to a
/// multiple that clears all edge lengths.
pub fn search_lattice(mg: &MetricGraph, n: i64, extra: &MetricDivisor) -> Result<Lattice> {
    if n <= 0 {
        return Err(Error::PreconditionFailed("lattice denominator must be positive".into()));
    }
    let base = common_scale(mg, extra.points());
    Lattice::new(mg, num_integer::lcm(base, n))
}

/// All `q`-reduced divisors that are effective of degree `d`, in a fixed
/// order.
pub fn reduced_effective(g: &MultiGraph, q: VertexId, d: i64, budget: Option<u64>) -> Result<Vec<Divisor>> {
    let mut out = Vec::new();
    if d < 0 {
        return Ok(out);
    }
    let n = g.num_vertices();
    let order: Vec<VertexId> = g.vertices().filter(|&v| v != q).collect();
    let mut cur = Divisor::zero(n);
    let mut spent = 0u64;
    // superstable configurations are closed under removing chips, so adding
    // chips in nondecreasing vertex order reaches each one exactly once
    fn go(
        g: &MultiGraph,
        q: VertexId,
        order: &[VertexId],
        start: usize,
        left: i64,
        cur: &mut Divisor,
        out: &mut Vec<Divisor>,
        spent: &mut u64,
        budget: Option<u64>,
    ) -> Result<()> {
        *spent += 1;
        if budget.is_some_and(|b| *spent > b) {
            return Err(Error::BudgetExceeded(budget.unwrap()));
        }
        let mut full = cur.clone();
        full[q] = left;
        out.push(full);
        if left == 0 {
            return Ok(());
        }
        for i in start..order.len() {
            let v = order[i];
            cur[v] += 1;
            if chip::satisfies_no_legal_firing(g, cur, q)? {
                go(g, q, order, i, left - 1, cur, out, spent, budget)?;
            }
            cur[v] -= 1;
        }
        Ok(())
    }
    go(g, q, &order, 0, d, &mut cur, &mut out, &mut spent, budget)?;
    Ok(out)
}

/// `rank(d) >= r` on a lattice graph, testing on the model vertices.
pub fn rank_at_least(lat: &Lattice, model_vertices: usize, d: &Divisor, r: i64) -> bool {
    if r <= 0 {
        return r < 0 || chip::is_effective_class(&lat.graph, d);
    }
    let test: Vec<VertexId> = (0..model_vertices).collect();
    let rank = chip::rank_search(
        &lat.graph,
        d,
        &RankSearch { cap: r, base: 0, test_set: Some(&test), budget: None },
    )
    .expect("unbudgeted search cannot fail");
    rank >= r
}

#[derive(Debug, Clone)]
pub struct GonalitySearch {
    /// Least degree with a rank-1 lattice divisor, if any up to `d_max`.
    pub degree: Option<i64>,
    pub witness: Option<MetricDivisor>,
    pub scale: i64,
    /// Reduced divisors examined.
    pub candidates: usize,
    pub evidence: EvidenceLevel,
}

/// Smallest `d <= d_max` with a rank-1 divisor supported on the lattice.
/// Finding one bounds the gonality; not finding one is evidence only.
pub fn gonality_search_lattice(mg: &MetricGraph, n: i64, d_max: i64, budget: Option<u64>) -> Result<GonalitySearch> {
    let lat = search_lattice(mg, n, &MetricDivisor::default())?;
    let q = mg.model().least_vertex();
    let nv = mg.model().num_vertices();
    let mut candidates = 0;
    for d in 1..=d_max {
        let cands = reduced_effective(&lat.graph, q, d, budget)?;
        candidates += cands.len();
        if let Some(hit) = cands.par_iter().find_first(|c| rank_at_least(&lat, nv, c, 1)) {
            return Ok(GonalitySearch {
                degree: Some(d),
                witness: Some(lat.from_graph_divisor(hit)),
                scale: lat.scale,
                candidates,
                evidence: EvidenceLevel::Proved,
            });
        }
    }
    Ok(GonalitySearch { degree: None, witness: None, scale: lat.scale, candidates, evidence: EvidenceLevel::LatticeEvidence })
}

/// All reduced rank-`r` lattice divisors of degree `d`.
pub fn rank_classes(mg: &MetricGraph, lat: &Lattice, r: i64, d: i64, budget: Option<u64>) -> Result<Vec<Divisor>> {
    let q = mg.model().least_vertex();
    let nv = mg.model().num_vertices();
    let cands = reduced_effective(&lat.graph, q, d, budget)?;
    Ok(cands.into_par_iter().filter(|c| rank_at_least(lat, nv, c, r)).collect())
}

/// A divisor of degree `degree` and rank at least 1 that contains `base`,
/// searching `base + F` over lattice classes of effective `F`.
pub fn pencil_through(mg: &MetricGraph, base: &MetricDivisor, degree: i64, n: i64) -> Result<Option<MetricDivisor>> {
    let k = degree - base.degree();
    if k < 0 || !base.is_effective() {
        return Ok(None);
    }
    let lat = search_lattice(mg, n, base)?;
    let b = lat.to_graph_divisor(base)?;
    let q = mg.model().least_vertex();
    let nv = mg.model().num_vertices();
    let cands = reduced_effective(&lat.graph, q, k, None)?;
    Ok(cands
        .par_iter()
        .map(|f| &b + f)
        .find_first(|d| rank_at_least(&lat, nv, d, 1))
        .map(|d| lat.from_graph_divisor(&d)))
}

#[derive(Debug, Clone)]
pub struct BnRankReport {
    pub r: i64,
    pub d: i64,
    pub rho_prime: i64,
    pub scale: i64,
    pub holds_on_lattice: bool,
    /// An `E` of degree `r + rho'` lying under no rank-`r` lattice class.
    pub counterexample: Option<MetricDivisor>,
    /// Number of rank-`r` degree-`d` classes found.
    pub classes: usize,
    pub strength: String,
    pub evidence: EvidenceLevel,
}

/// Tests whether every effective lattice `E` of degree `r + rho'` lies
/// under some rank-`r` degree-`d` lattice class.
pub fn bn_rank_lattice(
    mg: &MetricGraph,
    r: i64,
    d: i64,
    rho_prime: i64,
    n: i64,
    budget: Option<u64>,
) -> Result<BnRankReport> {
    if r < 0 || d < 0 || rho_prime < 0 {
        return Err(Error::PreconditionFailed("r, d and rho' must be nonnegative".into()));
    }
    let lat = search_lattice(mg, n, &MetricDivisor::default())?;
    let classes = rank_classes(mg, &lat, r, d, budget)?;
    let k = r + rho_prime;
    let mut report = BnRankReport {
        r,
        d,
        rho_prime,
        scale: lat.scale,
        holds_on_lattice: true,
        counterexample: None,
        classes: classes.len(),
        strength: format!(
            "E ranges over all effective divisors of degree {k} on the 1/{} lattice; \
             rank-{r} classes are those with a lattice representative",
            lat.scale
        ),
        evidence: EvidenceLevel::LatticeEvidence,
    };
    let nl = lat.graph.num_vertices();
    let mut spent = 0u64;
    let mut e = vec![0usize; k as usize];
    // E runs over multisets of lattice vertices as nondecreasing tuples
    loop {
        spent += 1;
        if budget.is_some_and(|b| spent > b) {
            return Err(Error::BudgetExceeded(budget.unwrap()));
        }
        let mut ed = Divisor::zero(nl);
        e.iter().for_each(|&v| ed[v] += 1);
        let covered = classes.par_iter().any(|c| chip::is_effective_class(&lat.graph, &(c - &ed)));
        if !covered {
            report.holds_on_lattice = false;
            report.counterexample = Some(lat.from_graph_divisor(&ed));
            return Ok(report);
        }
        // next nondecreasing tuple
        let Some(i) = (0..e.len()).rev().find(|&i| e[i] + 1 < nl) else { break };
        let v = e[i] + 1;
        e[i..].iter_mut().for_each(|x| *x = v);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyProbe {
    /// Rank of each member, capped at 1.
    pub ranks: Vec<i64>,
    /// Number of pairwise non-equivalent classes among rank-1 members.
    pub classes: usize,
    /// Index of the first member of each class.
    pub representatives: Vec<usize>,
}

/// Counts pairwise non-equivalent rank-1 classes in a family.
pub fn w1_family_probe(mg: &MetricGraph, family: &[MetricDivisor]) -> Result<FamilyProbe> {
    let opts = MetricRankOptions { cap: Some(1), ..Default::default() };
    let ranks: Vec<i64> = family.par_iter().map(|d| mg_rank_with(mg, d, &opts)).collect::<Result<_>>()?;
    let mut representatives: Vec<usize> = Vec::new();
    for (i, d) in family.iter().enumerate() {
        if ranks[i] < 1 {
            continue;
        }
        if !representatives.iter().any(|&j| mg_linear_equiv(mg, &family[j], d).is_some()) {
            representatives.push(i);
        }
    }
    Ok(FamilyProbe { ranks, classes: representatives.len(), representatives })
}
