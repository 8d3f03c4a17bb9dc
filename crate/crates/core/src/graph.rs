//! Loopless connected multigraphs with oriented edges.
//!
//! Vertices and edges are addressed by dense indices; the string ids are kept
//! for I/O. Parallel edges are allowed, loops are not.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default)]
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
}

/// Vertex and edge lists as they appear in graph JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpec {
    pub fn vertex(&mut self, id: impl Into<String>) -> &mut Self {
        self.vertices.push(VertexSpec { id: id.into(), genus: 0 });
        self
    }

    pub fn edge(
        &mut self,
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
    ) -> &mut Self {
        self.edges.push(EdgeSpec { id: id.into(), tail: tail.into(), head: head.into() });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }

    /// `+1` if `v` is the tail, `-1` if `v` is the head.
    pub fn sigma(&self, v: VertexId) -> i64 {
        if self.tail == v {
            1
        } else {
            debug_assert_eq!(self.head, v);
            -1
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.tail == v || self.head == v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    vertex_ids: Vec<String>,
    genera: Vec<u32>,
    edge_ids: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    incident: Vec<Vec<EdgeId>>,
    // aggregated (neighbor, multiplicity), sorted by neighbor
    neighbors: Vec<Vec<(VertexId, u32)>>,
}

impl MultiGraph {
    pub fn build(spec: &GraphSpec) -> Result<Self> {
        if spec.vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut vertex_index = HashMap::new();
        let mut vertex_ids = Vec::with_capacity(spec.vertices.len());
        let mut genera = Vec::with_capacity(spec.vertices.len());
        for v in &spec.vertices {
            if vertex_index.insert(v.id.clone(), vertex_ids.len()).is_some() {
                return Err(Error::DuplicateId(v.id.clone()));
            }
            vertex_ids.push(v.id.clone());
            genera.push(v.genus);
        }
        let mut edge_index = HashMap::new();
        let mut edge_ids = Vec::with_capacity(spec.edges.len());
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            if edge_index.contains_key(&e.id) || vertex_index.contains_key(&e.id) {
                return Err(Error::DuplicateId(e.id.clone()));
            }
            let tail = *vertex_index
                .get(&e.tail)
                .ok_or_else(|| Error::UnknownVertex(e.tail.clone()))?;
            let head = *vertex_index
                .get(&e.head)
                .ok_or_else(|| Error::UnknownVertex(e.head.clone()))?;
            if tail == head {
                return Err(Error::LoopRejected(e.id.clone()));
            }
            edge_index.insert(e.id.clone(), edges.len());
            edge_ids.push(e.id.clone());
            edges.push(Edge { tail, head });
        }
        Self::assemble(vertex_ids, genera, edge_ids, edges, vertex_index, edge_index)
    }

    /// Builds from dense data; ids must already be distinct.
    pub(crate) fn from_parts(
        vertex_ids: Vec<String>,
        genera: Vec<u32>,
        edge_ids: Vec<String>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let mut vertex_index = HashMap::new();
        for (i, id) in vertex_ids.iter().enumerate() {
            if vertex_index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        let mut edge_index = HashMap::new();
        for (i, id) in edge_ids.iter().enumerate() {
            if edge_index.insert(id.clone(), i).is_some() || vertex_index.contains_key(id) {
                return Err(Error::DuplicateId(id.clone()));
            }
            if edges[i].tail == edges[i].head {
                return Err(Error::LoopRejected(id.clone()));
            }
        }
        if vertex_ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Self::assemble(vertex_ids, genera, edge_ids, edges, vertex_index, edge_index)
    }

    fn assemble(
        vertex_ids: Vec<String>,
        genera: Vec<u32>,
        edge_ids: Vec<String>,
        edges: Vec<Edge>,
        vertex_index: HashMap<String, VertexId>,
        edge_index: HashMap<String, EdgeId>,
    ) -> Result<Self> {
        let n = vertex_ids.len();
        let mut incident = vec![Vec::new(); n];
        let mut mult: Vec<HashMap<VertexId, u32>> = vec![HashMap::new(); n];
        for (i, e) in edges.iter().enumerate() {
            incident[e.tail].push(i);
            incident[e.head].push(i);
            *mult[e.tail].entry(e.head).or_default() += 1;
            *mult[e.head].entry(e.tail).or_default() += 1;
        }
        let neighbors = mult
            .into_iter()
            .map(|m| {
                let mut v: Vec<_> = m.into_iter().collect();
                v.sort_unstable();
                v
            })
            .collect();
        let g = MultiGraph {
            vertex_ids,
            genera,
            edge_ids,
            edges,
            vertex_index,
            edge_index,
            incident,
            neighbors,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|d| d.is_some())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.vertex_ids.len()
    }

    pub fn edge_indices(&self) -> std::ops::Range<EdgeId> {
        0..self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_ids[v]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edge_ids[e]
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(name.to_string()))
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(format!("#{v}")))
        }
    }

    pub fn vertex_genus(&self, v: VertexId) -> u32 {
        self.genera[v]
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    /// Neighbours of `v` with edge multiplicities, sorted by neighbour index.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, u32)] {
        &self.neighbors[v]
    }

    pub fn valence(&self, v: VertexId) -> u32 {
        self.incident[v].len() as u32
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        self.neighbors[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.neighbors[u][i].1)
            .unwrap_or(0)
    }

    /// First Betti number plus the vertex genus weights.
    pub fn genus(&self) -> i64 {
        let weights: i64 = self.genera.iter().map(|&g| g as i64).sum();
        weights + self.betti()
    }

    pub fn betti(&self) -> i64 {
        self.num_edges() as i64 - self.num_vertices() as i64 + 1
    }

    pub fn bfs_distances(&self, root: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[root] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(w, _) in &self.neighbors[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Number of edges joining `v` to vertices outside `set`.
    pub fn out_degree(&self, v: VertexId, in_set: &[bool]) -> u32 {
        self.neighbors[v]
            .iter()
            .filter(|&&(w, _)| !in_set[w])
            .map(|&(_, m)| m)
            .sum()
    }

    /// Lexicographically least vertex id; the default base point.
    pub fn least_vertex(&self) -> VertexId {
        self.vertices()
            .min_by(|&a, &b| self.vertex_ids[a].cmp(&self.vertex_ids[b]))
            .unwrap()
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self
                .vertices()
                .map(|v| VertexSpec { id: self.vertex_ids[v].clone(), genus: self.genera[v] })
                .collect(),
            edges: self
                .edge_indices()
                .map(|e| EdgeSpec {
                    id: self.edge_ids[e].clone(),
                    tail: self.vertex_ids[self.edges[e].tail].clone(),
                    head: self.vertex_ids[self.edges[e].head].clone(),
                })
                .collect(),
        }
    }

    /// Induced subgraph on `keep` (must be connected). Returns the graph and
    /// the map from new vertex indices to old ones.
    pub fn induced_subgraph(&self, keep: &[VertexId]) -> Result<(MultiGraph, Vec<VertexId>, Vec<EdgeId>)> {
        let mut pos = vec![usize::MAX; self.num_vertices()];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i;
        }
        let vertex_ids = keep.iter().map(|&v| self.vertex_ids[v].clone()).collect();
        let genera = keep.iter().map(|&v| self.genera[v]).collect();
        let mut edge_ids = Vec::new();
        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if pos[e.tail] != usize::MAX && pos[e.head] != usize::MAX {
                edge_ids.push(self.edge_ids[i].clone());
                edges.push(Edge { tail: pos[e.tail], head: pos[e.head] });
                edge_map.push(i);
            }
        }
        let g = MultiGraph::from_parts(vertex_ids, genera, edge_ids, edges)?;
        Ok((g, keep.to_vec(), edge_map))
    }
}

/// Convenience constructors used by tests, fixtures and benches.
pub mod families {
    use super::*;

    /// Cycle on `k >= 2` vertices named `a`, `b`, ... (or `v0..` if `k > 26`).
    pub fn cycle(k: usize) -> MultiGraph {
        let names: Vec<String> = if k <= 26 {
            (0..k).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
        } else {
            (0..k).map(|i| format!("v{i}")).collect()
        };
        let mut spec = GraphSpec::default();
        for n in &names {
            spec.vertex(n.clone());
        }
        for i in 0..k {
            let j = (i + 1) % k;
            spec.edge(format!("{}{}", names[i], names[j]), names[i].clone(), names[j].clone());
        }
        MultiGraph::build(&spec).expect("cycle is valid")
    }

    /// Two vertices `v1`, `v2` joined by `m` parallel edges `e1..em`, all oriented v1 -> v2.
    pub fn banana(m: usize) -> MultiGraph {
        let mut spec = GraphSpec::default();
        spec.vertex("v1").vertex("v2");
        for i in 1..=m {
            spec.edge(format!("e{i}"), "v1", "v2");
        }
        MultiGraph::build(&spec).expect("banana is valid")
    }

    /// Path `p0 - p1 - ... - p{k-1}`.
    pub fn path(k: usize) -> MultiGraph {
        let mut spec = GraphSpec::default();
        for i in 0..k {
            spec.vertex(format!("p{i}"));
        }
        for i in 1..k {
            spec.edge(format!("q{i}"), format!("p{}", i - 1), format!("p{i}"));
        }
        MultiGraph::build(&spec).expect("path is valid")
    }
}
