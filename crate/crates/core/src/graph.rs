//! Finite edge-weighted, edge-measured graphs: the discrete metric measure
//! space truncations everything else is built on.
//!
//! Each edge carries a length `len` (discretized arclength) and a measure
//! `mu`. Node ids are arbitrary integers that stay stable across nested
//! truncations, so sets can be compared between levels of an exhaustion.

use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable node identifier. Ids are preserved across exhaustion levels.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

/// Undirected edge with positive length and measure. Stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub len: f64,
    pub mu: f64,
}

/// Sorted, deduplicated set of node ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet {
    ids: Vec<NodeId>,
}

impl NodeSet {
    pub fn new(mut ids: Vec<NodeId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        NodeSet { ids }
    }

    pub fn empty() -> Self {
        NodeSet { ids: Vec::new() }
    }

    pub fn singleton(id: NodeId) -> Self {
        NodeSet { ids: vec![id] }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids.iter().copied()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn first(&self) -> Option<NodeId> {
        self.ids.first().copied()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        NodeSet::new(ids)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let ids = self.iter().filter(|&id| other.contains(id)).collect();
        NodeSet { ids }
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let ids = self.iter().filter(|&id| !other.contains(id)).collect();
        NodeSet { ids }
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|id| other.contains(id))
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.iter().all(|id| !other.contains(id))
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        NodeSet::new(iter.into_iter().collect())
    }
}

/// Finite connected graph with edge lengths and edge measures.
///
/// Invariants enforced at construction: no self-loops, at most one edge per
/// unordered pair, `len > 0`, `mu > 0`, connected.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, u32>,
    positions: Option<Vec<[f64; 2]>>,
    edges: Vec<Edge>,
    /// adjacency per dense node index: (edge index, neighbor dense index)
    adj: Vec<Vec<(u32, u32)>>,
}

impl MetricGraph {
    pub fn new(
        nodes: Vec<(NodeId, Option<[f64; 2]>)>,
        edges: Vec<(NodeId, NodeId, f64, f64)>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut nodes = nodes;
        nodes.sort_by_key(|(id, _)| *id);
        for w in nodes.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Malformed(format!("duplicate node id {}", w[0].0)));
            }
        }
        let ids: Vec<NodeId> = nodes.iter().map(|(id, _)| *id).collect();
        let has_pos = nodes.iter().any(|(_, p)| p.is_some());
        let positions = if has_pos {
            Some(
                nodes
                    .iter()
                    .map(|(_, p)| p.unwrap_or([f64::NAN, f64::NAN]))
                    .collect(),
            )
        } else {
            None
        };
        let index: HashMap<NodeId, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (*id, i as u32))
            .collect();

        let mut canon = Vec::with_capacity(edges.len());
        for (a, b, len, mu) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !index.contains_key(&a) {
                return Err(Error::UnknownNode(a));
            }
            if !index.contains_key(&b) {
                return Err(Error::UnknownNode(b));
            }
            if !(len > 0.0) || !len.is_finite() || !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::BadEdgeWeight(a, b));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            canon.push(Edge { u, v, len, mu });
        }
        canon.sort_by_key(|e| (e.u, e.v));
        for w in canon.windows(2) {
            if w[0].u == w[1].u && w[0].v == w[1].v {
                return Err(Error::DuplicateEdge(w[0].u, w[0].v));
            }
        }

        let mut adj = vec![Vec::new(); ids.len()];
        for (ei, e) in canon.iter().enumerate() {
            let iu = index[&e.u];
            let iv = index[&e.v];
            adj[iu as usize].push((ei as u32, iv));
            adj[iv as usize].push((ei as u32, iu));
        }
        for list in &mut adj {
            list.sort_by_key(|&(_, nbr)| nbr);
        }

        let g = MetricGraph {
            ids,
            index,
            positions,
            edges: canon,
            adj,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn index_of(&self, id: NodeId) -> Result<u32> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn id_at(&self, dense: u32) -> NodeId {
        self.ids[dense as usize]
    }

    /// Position of a node, if positions were supplied at build time.
    pub fn position(&self, id: NodeId) -> Option<[f64; 2]> {
        let i = *self.index.get(&id)? as usize;
        self.positions.as_ref().map(|p| p[i])
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn adjacency(&self, dense: u32) -> &[(u32, u32)] {
        &self.adj[dense as usize]
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<&Edge> {
        let ia = *self.index.get(&a)?;
        let ib = *self.index.get(&b)?;
        self.adj[ia as usize]
            .iter()
            .find(|&&(_, n)| n == ib)
            .map(|&(ei, _)| &self.edges[ei as usize])
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet {
            ids: self.ids.clone(),
        }
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(_, nbr) in self.adjacency(x) {
                if !seen[nbr as usize] {
                    seen[nbr as usize] = true;
                    count += 1;
                    stack.push(nbr);
                }
            }
        }
        count == n
    }

    /// Checks that `self` is the induced subgraph of `larger` on its own
    /// nodes, with bit-exact len/mu on shared edges.
    pub fn is_induced_subgraph_of(&self, larger: &MetricGraph) -> bool {
        if !self.ids.iter().all(|&id| larger.contains(id)) {
            return false;
        }
        // every edge of `larger` between two of our nodes must exist here,
        // and every edge of ours must match exactly over there
        for e in &self.edges {
            match larger.edge_between(e.u, e.v) {
                Some(le) => {
                    if le.len.to_bits() != e.len.to_bits() || le.mu.to_bits() != e.mu.to_bits() {
                        return false;
                    }
                }
                None => return false,
            }
        }
        for e in &larger.edges {
            if self.contains(e.u) && self.contains(e.v) && self.edge_between(e.u, e.v).is_none() {
                return false;
            }
        }
        true
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem {
    dist: f64,
    node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Multi-source Dijkstra. Edge weight defaults to `len`; callers can pass any
/// nonnegative per-edge weight array (the modulus separation oracle does).
pub fn distances_with(
    g: &MetricGraph,
    sources: &NodeSet,
    weights: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if sources.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut dist = vec![f64::INFINITY; g.node_count()];
    let mut heap = BinaryHeap::new();
    for id in sources.iter() {
        let i = g.index_of(id)?;
        dist[i as usize] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: i });
    }
    while let Some(HeapItem { dist: d, node: x }) = heap.pop() {
        if d > dist[x as usize] {
            continue;
        }
        for &(ei, nbr) in g.adjacency(x) {
            let w = match weights {
                Some(ws) => ws[ei as usize],
                None => g.edges()[ei as usize].len,
            };
            let nd = d + w;
            if nd < dist[nbr as usize] {
                dist[nbr as usize] = nd;
                heap.push(HeapItem {
                    dist: nd,
                    node: nbr,
                });
            }
        }
    }
    Ok(dist)
}

pub fn distances_from(g: &MetricGraph, source: NodeId) -> Result<Vec<f64>> {
    distances_with(g, &NodeSet::singleton(source), None)
}

/// Shortest-path distance by edge length; symmetric and triangle-consistent.
pub fn graph_distance(g: &MetricGraph, u: NodeId, v: NodeId) -> Result<f64> {
    let iv = g.index_of(v)?;
    let dist = distances_from(g, u)?;
    Ok(dist[iv as usize])
}

/// Open metric ball: all nodes at graph distance strictly less than `r`.
pub fn ball(g: &MetricGraph, x0: NodeId, r: f64) -> Result<NodeSet> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::DegenerateRadius(r));
    }
    let dist = distances_from(g, x0)?;
    Ok(g.ids()
        .iter()
        .enumerate()
        .filter(|&(i, _)| dist[i] < r)
        .map(|(_, id)| *id)
        .collect())
}

/// Induced subgraph on a node subset. The subset must induce a connected
/// graph (take one component of [`complement_components`] at a time).
pub fn induced_subgraph(g: &MetricGraph, nodes: &NodeSet) -> Result<MetricGraph> {
    let kept: Vec<(NodeId, Option<[f64; 2]>)> = nodes
        .iter()
        .map(|id| {
            g.index_of(id)?;
            Ok((id, g.position(id)))
        })
        .collect::<Result<_>>()?;
    let edges = g
        .edges()
        .iter()
        .filter(|e| nodes.contains(e.u) && nodes.contains(e.v))
        .map(|e| (e.u, e.v, e.len, e.mu))
        .collect();
    MetricGraph::new(kept, edges)
}

/// Connected components of the subgraph induced on `nodes \ s`, ordered by
/// smallest contained node id.
pub fn complement_components(g: &MetricGraph, s: &NodeSet) -> Result<Vec<NodeSet>> {
    for id in s.iter() {
        if !g.contains(id) {
            return Err(Error::UnknownNode(id));
        }
    }
    let n = g.node_count();
    let mut removed = vec![false; n];
    for id in s.iter() {
        removed[g.index_of(id)? as usize] = true;
    }
    if removed.iter().all(|&r| r) {
        return Err(Error::SetCoversGraph);
    }
    let mut comp = vec![u32::MAX; n];
    let mut components = Vec::new();
    for start in 0..n as u32 {
        if removed[start as usize] || comp[start as usize] != u32::MAX {
            continue;
        }
        let label = components.len() as u32;
        let mut members = Vec::new();
        let mut stack = vec![start];
        comp[start as usize] = label;
        while let Some(x) = stack.pop() {
            members.push(g.id_at(x));
            for &(_, nbr) in g.adjacency(x) {
                if !removed[nbr as usize] && comp[nbr as usize] == u32::MAX {
                    comp[nbr as usize] = label;
                    stack.push(nbr);
                }
            }
        }
        components.push(NodeSet::new(members));
    }
    // dense index order equals ascending id order, so components found in
    // scan order are already sorted by their smallest node id
    Ok(components)
}
