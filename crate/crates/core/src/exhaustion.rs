//! Exhaustions (nested truncations of an unbounded space) and chains at
//! infinity.
//!
//! An exhaustion produces, for each level `m >= 1`, a finite truncation graph
//! `G_m` together with a strictly increasing radius schedule `R_n`. Node ids
//! are stable across levels and `G_m` is an induced subgraph of `G_{m+1}`
//! with identical len/mu on shared edges, so sets built at one level can be
//! re-read at any deeper one.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::graph::{ball, complement_components, distances_from, MetricGraph, NodeId, NodeSet};

static NEXT_EXHAUSTION_ID: AtomicU64 = AtomicU64::new(1);

/// Radius schedule `R_1 < R_2 < ...`.
#[derive(Debug, Clone)]
pub enum RadiusSchedule {
    /// `R_n = step * n`
    Arithmetic { step: f64 },
    Explicit(Vec<f64>),
}

impl RadiusSchedule {
    pub fn radius(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(Error::OutOfRange("radius index starts at 1".into()));
        }
        match self {
            RadiusSchedule::Arithmetic { step } => Ok(step * n as f64),
            RadiusSchedule::Explicit(v) => v
                .get((n - 1) as usize)
                .copied()
                .ok_or(Error::DepthExceeded(n, v.len() as u32)),
        }
    }

    fn validate(&self, levels: u32) -> Result<()> {
        let mut prev = 0.0;
        let upto = match self {
            RadiusSchedule::Arithmetic { .. } => levels,
            RadiusSchedule::Explicit(v) => v.len() as u32,
        };
        for n in 1..=upto {
            let r = self.radius(n)?;
            if !(r > prev) || !r.is_finite() {
                return Err(Error::BadRadiusSchedule);
            }
            prev = r;
        }
        Ok(())
    }
}

type Generator = Arc<dyn Fn(u32) -> Result<MetricGraph> + Send + Sync>;

enum Source {
    Explicit(Vec<Arc<MetricGraph>>),
    Generated { gen: Generator, hard_cap: u32 },
}

/// Indexed family of nested truncations with a fixed base point.
pub struct Exhaustion {
    id: u64,
    base: NodeId,
    levels: u32,
    radii: RadiusSchedule,
    source: Source,
    cache: RwLock<HashMap<u32, Arc<MetricGraph>>>,
}

impl Exhaustion {
    /// Exhaustion backed by a level generator. `levels` is the advertised
    /// working depth; generated sources may be probed a little beyond it
    /// (frontier computation needs level `m+1`).
    pub fn from_generator(
        base: NodeId,
        radii: RadiusSchedule,
        levels: u32,
        gen: impl Fn(u32) -> Result<MetricGraph> + Send + Sync + 'static,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(Error::OutOfRange(
                "exhaustion needs at least one level".into(),
            ));
        }
        radii.validate(levels)?;
        Ok(Exhaustion {
            id: NEXT_EXHAUSTION_ID.fetch_add(1, Ordering::Relaxed),
            base,
            levels,
            radii,
            source: Source::Generated {
                gen: Arc::new(gen),
                hard_cap: levels.saturating_add(2),
            },
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Exhaustion given as an explicit list of truncation graphs.
    pub fn from_graphs(
        base: NodeId,
        radii: RadiusSchedule,
        graphs: Vec<MetricGraph>,
    ) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::OutOfRange(
                "exhaustion needs at least one level".into(),
            ));
        }
        let levels = graphs.len() as u32;
        radii.validate(levels)?;
        for g in &graphs {
            if !g.contains(base) {
                return Err(Error::UnknownNode(base));
            }
        }
        for w in graphs.windows(2) {
            if !w[0].is_induced_subgraph_of(&w[1]) {
                return Err(Error::Malformed(
                    "truncations are not nested induced subgraphs with identical len/mu".into(),
                ));
            }
        }
        Ok(Exhaustion {
            id: NEXT_EXHAUSTION_ID.fetch_add(1, Ordering::Relaxed),
            base,
            levels,
            radii,
            source: Source::Explicit(graphs.into_iter().map(Arc::new).collect()),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn base(&self) -> NodeId {
        self.base
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn radius(&self, n: u32) -> Result<f64> {
        self.radii.radius(n)
    }

    pub fn graph(&self, level: u32) -> Result<Arc<MetricGraph>> {
        if level == 0 {
            return Err(Error::OutOfRange("levels start at 1".into()));
        }
        match &self.source {
            Source::Explicit(graphs) => graphs
                .get((level - 1) as usize)
                .cloned()
                .ok_or(Error::DepthExceeded(level, self.levels)),
            Source::Generated { gen, hard_cap } => {
                if level > *hard_cap {
                    return Err(Error::DepthExceeded(level, *hard_cap));
                }
                if let Some(g) = self.cache.read().unwrap().get(&level) {
                    return Ok(g.clone());
                }
                let built = Arc::new(gen(level)?);
                if !built.contains(self.base) {
                    return Err(Error::UnknownNode(self.base));
                }
                let mut cache = self.cache.write().unwrap();
                Ok(cache.entry(level).or_insert(built).clone())
            }
        }
    }

    /// Nodes of `G_level` with a neighbor in `G_{level+1} \ G_level`.
    /// Empty when the deeper level is unavailable (explicit exhaustions at
    /// their top level).
    pub fn frontier(&self, level: u32) -> Result<NodeSet> {
        let g = self.graph(level)?;
        let deeper = match self.graph(level + 1) {
            Ok(d) => d,
            Err(Error::DepthExceeded(..)) => return Ok(NodeSet::empty()),
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for e in deeper.edges() {
            let iu = g.contains(e.u);
            let iv = g.contains(e.v);
            if iu != iv {
                out.push(if iu { e.u } else { e.v });
            }
        }
        Ok(NodeSet::new(out))
    }

    /// Validates the nesting invariant between consecutive levels.
    pub fn check_nesting(&self, upto: u32) -> Result<()> {
        for m in 1..upto {
            let a = self.graph(m)?;
            let b = self.graph(m + 1)?;
            if !a.is_induced_subgraph_of(&b) {
                return Err(Error::Malformed(format!(
                    "level {m} is not an induced subgraph of level {}",
                    m + 1
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for Exhaustion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Exhaustion")
            .field("id", &self.id)
            .field("base", &self.base)
            .field("levels", &self.levels)
            .finish()
    }
}

/// Where a chain came from; end-derived chains carry extra structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ChainOrigin {
    EndDerived,
    UserSupplied,
}

type SetPredicate = Arc<dyn Fn(u32, &MetricGraph) -> NodeSet + Send + Sync>;

#[derive(Clone)]
enum ChainSource {
    /// F_n computed from a predicate on the truncation graph (scenario
    /// chains select by node position).
    Predicate(SetPredicate),
    /// F_n fixed as global id sets, intersected with each truncation.
    Explicit(Vec<NodeSet>),
    /// End-derived: the component of the ball complement containing `anchor`.
    End { anchor: NodeSet, built_depth: u32 },
}

/// Nested sequence of closed node sets representing an end or a candidate
/// hyperbolic sequence. Sets are generated per (index, truncation level), not
/// materialized, so deepening is cheap.
#[derive(Clone)]
pub struct Chain {
    label: String,
    origin: ChainOrigin,
    exhaustion_id: Option<u64>,
    source: ChainSource,
}

impl Chain {
    pub fn from_predicate(
        label: impl Into<String>,
        pred: impl Fn(u32, &MetricGraph) -> NodeSet + Send + Sync + 'static,
    ) -> Self {
        Chain {
            label: label.into(),
            origin: ChainOrigin::UserSupplied,
            exhaustion_id: None,
            source: ChainSource::Predicate(Arc::new(pred)),
        }
    }

    pub fn from_sets(label: impl Into<String>, sets: Vec<NodeSet>) -> Self {
        Chain {
            label: label.into(),
            origin: ChainOrigin::UserSupplied,
            exhaustion_id: None,
            source: ChainSource::Explicit(sets),
        }
    }

    pub(crate) fn end_derived(
        label: impl Into<String>,
        ex: &Exhaustion,
        anchor: NodeSet,
        built_depth: u32,
    ) -> Self {
        Chain {
            label: label.into(),
            origin: ChainOrigin::EndDerived,
            exhaustion_id: Some(ex.id()),
            source: ChainSource::End {
                anchor,
                built_depth,
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn origin(&self) -> ChainOrigin {
        self.origin
    }

    pub fn exhaustion_id(&self) -> Option<u64> {
        self.exhaustion_id
    }

    /// The chain set `F_n` as seen on truncation level `level`.
    pub fn set_at(&self, ex: &Exhaustion, n: u32, level: u32) -> Result<NodeSet> {
        if n == 0 {
            return Err(Error::OutOfRange("chain index starts at 1".into()));
        }
        if let Some(id) = self.exhaustion_id {
            if id != ex.id() {
                return Err(Error::MismatchedExhaustion);
            }
        }
        let g = ex.graph(level)?;
        let set = match &self.source {
            ChainSource::Predicate(pred) => pred(n, &g),
            ChainSource::Explicit(sets) => {
                let s = sets
                    .get((n - 1) as usize)
                    .ok_or(Error::DepthExceeded(n, sets.len() as u32))?;
                s.iter().filter(|&id| g.contains(id)).collect()
            }
            ChainSource::End {
                anchor,
                built_depth,
            } => end_set(ex, &g, anchor, *built_depth, n)?,
        };
        if set.is_empty() {
            return Err(Error::ChainExhausted(n));
        }
        Ok(set)
    }

    /// Verifies `F_{k+1} ⊆ F_k` for `k < depth` on the given truncation.
    pub fn check_nested(&self, ex: &Exhaustion, depth: u32, level: u32) -> Result<()> {
        let mut prev = self.set_at(ex, 1, level)?;
        for k in 2..=depth {
            let cur = self.set_at(ex, k, level)?;
            if !cur.is_subset(&prev) {
                return Err(Error::NonNestedChain(k - 1));
            }
            prev = cur;
        }
        Ok(())
    }

    /// Escape condition, checked to the available depth: the set at the
    /// deepest tested index must avoid the ball of the deepest tested radius.
    pub fn check_escape(&self, ex: &Exhaustion, depth: u32, level: u32) -> Result<()> {
        let g = ex.graph(level)?;
        let r = ex.radius(depth)?;
        let b = ball(&g, ex.base(), r)?;
        let f = self.set_at(ex, depth, level)?;
        if !f.is_disjoint(&b) {
            return Err(Error::EscapeViolated(depth));
        }
        Ok(())
    }
}

impl std::fmt::Debug for Chain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Chain")
            .field("label", &self.label)
            .field("origin", &self.origin)
            .finish()
    }
}

/// Component of `G_level \ B(x0, R_n)` tracked by an anchor set. For indices
/// beyond the anchor's build depth the chain follows the component holding
/// the node farthest from the base (ties broken by smallest id).
fn end_set(
    ex: &Exhaustion,
    g: &MetricGraph,
    anchor: &NodeSet,
    built_depth: u32,
    n: u32,
) -> Result<NodeSet> {
    // a ball that swallows the truncation means the chain has run out here
    let comps_outside = |r: f64, at: u32| -> Result<Vec<NodeSet>> {
        let b = ball(g, ex.base(), r)?;
        match complement_components(g, &b) {
            Ok(c) => Ok(c),
            Err(Error::SetCoversGraph) => Err(Error::ChainExhausted(at)),
            Err(e) => Err(e),
        }
    };
    let track_to = n.min(built_depth);
    let comps = comps_outside(ex.radius(track_to)?, n)?;
    let mut current = comps
        .into_iter()
        .find(|c| anchor.iter().any(|id| c.contains(id)))
        .ok_or(Error::ChainExhausted(n))?;
    if n <= built_depth {
        return Ok(current);
    }
    // deepen past the build depth: follow the farthest-out sub-component
    let dist = distances_from(g, ex.base())?;
    for k in (built_depth + 1)..=n {
        let comps = comps_outside(ex.radius(k)?, k)?;
        let far = farthest_node(g, &current, &dist).ok_or(Error::ChainExhausted(k))?;
        match comps
            .into_iter()
            .filter(|c| c.is_subset(&current))
            .find(|c| c.contains(far))
        {
            Some(c) => current = c,
            None => return Err(Error::ChainExhausted(k)),
        }
    }
    Ok(current)
}

fn farthest_node(g: &MetricGraph, set: &NodeSet, dist: &[f64]) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for id in set.iter() {
        let d = dist[g.index_of(id).ok()? as usize];
        best = match best {
            None => Some((d, id)),
            Some((bd, bid)) => {
                if d > bd || (d == bd && id < bid) {
                    Some((d, id))
                } else {
                    Some((bd, bid))
                }
            }
        };
    }
    best.map(|(_, id)| id)
}

/// Depth-limited equivalence verdict between two chains (mutual inclusion of
/// tails). `false` is only a depth-limited verdict; the report records the
/// first index at which the inclusions could not be realized.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub first_failing_k: Option<u32>,
}

pub fn chain_equivalence(
    ex: &Exhaustion,
    c1: &Chain,
    c2: &Chain,
    depth: u32,
) -> Result<EquivalenceReport> {
    if depth == 0 {
        return Err(Error::OutOfRange("equivalence depth starts at 1".into()));
    }
    // Chains are generators, so the witnesses n_k, m_k may be probed past
    // `depth` (a shifted copy of a chain needs n_k = k + 1). Probing stops
    // where a chain runs out on this truncation.
    let collect = |c: &Chain| -> Result<Vec<NodeSet>> {
        let mut sets = Vec::new();
        for n in 1..=2 * depth {
            match c.set_at(ex, n, depth) {
                Ok(s) => sets.push(s),
                Err(Error::ChainExhausted(_)) | Err(Error::DepthExceeded(..)) => break,
                Err(e) => return Err(e),
            }
        }
        if (sets.len() as u32) < depth {
            return Err(Error::DepthExceeded(depth, sets.len() as u32));
        }
        Ok(sets)
    };
    let f = collect(c1)?;
    let g = collect(c2)?;
    for k in 0..depth as usize {
        let fwd = f.iter().any(|fs| fs.is_subset(&g[k]));
        let bwd = g.iter().any(|gs| gs.is_subset(&f[k]));
        if !fwd || !bwd {
            return Ok(EquivalenceReport {
                equivalent: false,
                first_failing_k: Some(k as u32 + 1),
            });
        }
    }
    Ok(EquivalenceReport {
        equivalent: true,
        first_failing_k: None,
    })
}

pub fn chains_equivalent(ex: &Exhaustion, c1: &Chain, c2: &Chain, depth: u32) -> Result<bool> {
    Ok(chain_equivalence(ex, c1, c2, depth)?.equivalent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_distance;

    /// Integer line truncated to [-2m, 2m]; ids encode the coordinate with
    /// an offset so they stay stable across levels.
    pub(crate) fn line_exhaustion(levels: u32) -> Exhaustion {
        Exhaustion::from_generator(
            NodeId(1 << 20),
            RadiusSchedule::Arithmetic { step: 1.0 },
            levels,
            |m| {
                let extent = 2 * m as i64;
                let id = |i: i64| NodeId((i + (1 << 20)) as u64);
                let nodes = (-extent..=extent)
                    .map(|i| (id(i), Some([i as f64, 0.0])))
                    .collect();
                let edges = (-extent..extent)
                    .map(|i| (id(i), id(i + 1), 1.0, 1.0))
                    .collect();
                MetricGraph::new(nodes, edges)
            },
        )
        .unwrap()
    }

    fn coord(id: NodeId) -> i64 {
        id.0 as i64 - (1 << 20)
    }

    #[test]
    fn nesting_and_frontier() {
        let ex = line_exhaustion(4);
        ex.check_nesting(4).unwrap();
        let f = ex.frontier(2).unwrap();
        let coords: Vec<i64> = f.iter().map(coord).collect();
        assert_eq!(coords, vec![-4, 4]);
    }

    #[test]
    fn base_in_every_level() {
        let ex = line_exhaustion(3);
        for m in 1..=3 {
            assert!(ex.graph(m).unwrap().contains(ex.base()));
        }
    }

    #[test]
    fn end_chains_on_line() {
        let ex = line_exhaustion(4);
        let pos = Chain::from_predicate("pos", |n, g| {
            g.ids()
                .iter()
                .copied()
                .filter(|&id| coord(id) >= n as i64)
                .collect()
        });
        let neg = Chain::from_predicate("neg", |n, g| {
            g.ids()
                .iter()
                .copied()
                .filter(|&id| coord(id) <= -(n as i64))
                .collect()
        });
        pos.check_nested(&ex, 4, 4).unwrap();
        pos.check_escape(&ex, 4, 4).unwrap();

        // identity
        assert!(chains_equivalent(&ex, &pos, &pos, 4).unwrap());
        // a shifted chain is equivalent
        let shifted = Chain::from_predicate("pos+1", |n, g| {
            g.ids()
                .iter()
                .copied()
                .filter(|&id| coord(id) >= n as i64 + 1)
                .collect()
        });
        assert!(chains_equivalent(&ex, &pos, &shifted, 3).unwrap());
        // the two tails of the line are not equivalent
        let rep = chain_equivalence(&ex, &pos, &neg, 4).unwrap();
        assert!(!rep.equivalent);
        assert_eq!(rep.first_failing_k, Some(1));
    }

    #[test]
    fn radius_schedule_must_increase() {
        let bad = RadiusSchedule::Explicit(vec![1.0, 1.0]);
        assert!(Exhaustion::from_generator(NodeId(0), bad, 2, |_| {
            MetricGraph::new(vec![(NodeId(0), None)], vec![])
        })
        .is_err());
    }

    #[test]
    fn explicit_exhaustion_rejects_non_nested() {
        let g1 = MetricGraph::new(
            vec![(NodeId(0), None), (NodeId(1), None)],
            vec![(NodeId(0), NodeId(1), 1.0, 1.0)],
        )
        .unwrap();
        // same edge, different mu: not bit-exact
        let g2 = MetricGraph::new(
            vec![(NodeId(0), None), (NodeId(1), None), (NodeId(2), None)],
            vec![
                (NodeId(0), NodeId(1), 1.0, 2.0),
                (NodeId(1), NodeId(2), 1.0, 1.0),
            ],
        )
        .unwrap();
        let r = Exhaustion::from_graphs(
            NodeId(0),
            RadiusSchedule::Arithmetic { step: 1.0 },
            vec![g1, g2],
        );
        assert!(r.is_err());
    }

    #[test]
    fn distances_consistent_across_levels() {
        let ex = line_exhaustion(3);
        let g2 = ex.graph(2).unwrap();
        let g3 = ex.graph(3).unwrap();
        let a = NodeId((1 << 20) - 2);
        let b = NodeId((1 << 20) + 3);
        assert_eq!(
            graph_distance(&g2, a, b).unwrap(),
            graph_distance(&g3, a, b).unwrap()
        );
    }
}
