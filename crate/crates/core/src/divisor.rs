use std::collections::BTreeMap;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use crate::error::{Error, Result};
use crate::graph::{MultiGraph, VertexId};

/// Integer vertex weighting on a finite graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor(Vec<i64>);

impl Divisor {
    pub fn zero(n: usize) -> Self {
        Divisor(vec![0; n])
    }

    pub fn from_vec(v: Vec<i64>) -> Self {
        Divisor(v)
    }

    pub fn unit(n: usize, v: VertexId) -> Self {
        let mut d = Divisor::zero(n);
        d.0[v] = 1;
        d
    }

    /// Builds from `(vertex name, coefficient)` pairs; repeated names accumulate.
    pub fn from_named<'a>(
        g: &MultiGraph,
        coeffs: impl IntoIterator<Item = (&'a str, i64)>,
    ) -> Result<Self> {
        let mut d = Divisor::zero(g.num_vertices());
        for (name, c) in coeffs {
            d.0[g.vertex(name)?] += c;
        }
        Ok(d)
    }

    pub fn to_named(&self, g: &MultiGraph) -> BTreeMap<String, i64> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(v, &c)| (g.vertex_name(v).to_string(), c))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

impl Index<VertexId> for Divisor {
    type Output = i64;
    fn index(&self, v: VertexId) -> &i64 {
        &self.0[v]
    }
}

impl IndexMut<VertexId> for Divisor {
    fn index_mut(&mut self, v: VertexId) -> &mut i64 {
        &mut self.0[v]
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        Divisor(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        Divisor(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        Divisor(self.0.iter().map(|a| -a).collect())
    }
}

/// Number of twists (chip-firings) at each vertex.
///
/// Twisting at every vertex once is the identity, so vectors are compared in
/// normal form: the minimum entry is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TwistVector(Vec<i64>);

impl TwistVector {
    pub fn zero(n: usize) -> Self {
        TwistVector(vec![0; n])
    }

    /// Normal form of an arbitrary integer vector.
    pub fn normalized(mut raw: Vec<i64>) -> Self {
        if let Some(&m) = raw.iter().min() {
            raw.iter_mut().for_each(|x| *x -= m);
        }
        TwistVector(raw)
    }

    /// Counts of a twist sequence, normalized.
    pub fn from_sequence(n: usize, seq: &[VertexId]) -> Self {
        let mut raw = vec![0; n];
        for &v in seq {
            raw[v] += 1;
        }
        Self::normalized(raw)
    }

    pub fn from_named<'a>(
        g: &MultiGraph,
        counts: impl IntoIterator<Item = (&'a str, i64)>,
    ) -> Result<Self> {
        let mut raw = vec![0; g.num_vertices()];
        for (name, c) in counts {
            raw[g.vertex(name)?] += c;
        }
        Ok(Self::normalized(raw))
    }

    pub fn to_named(&self, g: &MultiGraph) -> BTreeMap<String, i64> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(v, &c)| (g.vertex_name(v).to_string(), c))
            .collect()
    }

    pub fn counts(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Length of the minimal path this vector describes.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Sorted twist sequence realising this vector (ascending vertex index).
    pub fn sequence(&self) -> Vec<VertexId> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(v, &c)| std::iter::repeat_n(v, c.max(0) as usize))
            .collect()
    }

    /// The inverse path, in normal form.
    pub fn inverse(&self) -> Self {
        Self::normalized(self.0.iter().map(|c| -c).collect())
    }

    pub fn compose(&self, other: &TwistVector) -> Self {
        Self::normalized(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn restrict(&self, n: usize) -> Self {
        Self::normalized(self.0[..n].to_vec())
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(Error::PreconditionFailed(format!(
                "twist vector has {} entries, graph has {n} vertices",
                self.0.len()
            )))
        }
    }
}

impl Index<VertexId> for TwistVector {
    type Output = i64;
    fn index(&self, v: VertexId) -> &i64 {
        &self.0[v]
    }
}
