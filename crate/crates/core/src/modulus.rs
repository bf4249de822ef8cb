//! p-modulus of connecting curve families by constraint generation, and
//! numerical verification of the modulus-capacity identity.
//!
//! The solver maintains a working set of simple paths. The restricted program
//! `min sum_e mu rho^p  s.t.  sum_{e in gamma} rho len >= 1` is solved on its
//! dual by projected supergradient ascent with averaging (plus Polyak steps
//! against the best certified primal value). The separation oracle is a
//! shortest-path computation under edge weights `rho * len`; the most
//! violated path joins the working set until no path is shorter than
//! `1 - tol` and the primal-dual bracket closes.

use std::sync::Arc;

use crate::energy::{capacity, Capacity};
use crate::error::{Error, Result};
use crate::exhaustion::{Chain, Exhaustion};
use crate::graph::{
    complement_components, distances_with, induced_subgraph, MetricGraph, NodeId, NodeSet,
};

/// Nonnegative edge density. Admissibility for a path gamma means
/// `sum_{e in gamma} rho(e) len(e) >= 1`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Density {
    pub rho: Vec<f64>,
}

impl Density {
    pub fn zero(g: &MetricGraph) -> Self {
        Density {
            rho: vec![0.0; g.edge_count()],
        }
    }
}

/// Family of curves a modulus is taken over.
pub enum CurveFamilySpec<'a> {
    /// All curves with one endpoint in E and the other in F.
    Connect { e: &'a NodeSet, f: &'a NodeSet },
    /// All curves from the base set meeting every set of a nested chain up
    /// to the given depth; reduces to Connect(base, F_depth).
    Traverse {
        base: &'a NodeSet,
        chain: &'a Chain,
        depth: u32,
    },
}

#[derive(Debug, Clone)]
pub struct ModulusSolve {
    pub value: f64,
    /// Lower bound from the active path multipliers.
    pub dual_bound: f64,
    /// (value - dual_bound) / value.
    pub relgap: f64,
    pub density: Density,
    pub active_paths: Vec<Vec<NodeId>>,
    pub multipliers: Vec<f64>,
    /// Shortest rho-length of any (E, F) path: the feasibility certificate.
    pub min_path_length: f64,
    pub rounds: u32,
}

const MAX_ROUNDS: u32 = 400;

/// `Mod_p` of the connecting family `Gamma(E, F)`, warm-started from the
/// capacity witness gradient. The warm start comes from duality; the result
/// is still certified independently by the feasibility check and the dual
/// lower bound from the active path multipliers.
pub fn modulus_connect(
    g: &Arc<MetricGraph>,
    e: &NodeSet,
    f: &NodeSet,
    p: f64,
    tol: f64,
) -> Result<ModulusSolve> {
    let cap = capacity(g, e, f, p, (tol * 1e-2).clamp(1e-9, 1e-7))?;
    modulus_connect_seeded(g, e, f, p, tol, Some(&cap))
}

/// Same as [`modulus_connect`] but reusing an already-computed capacity
/// witness as the warm start (or none, starting from the zero density).
pub fn modulus_connect_seeded(
    g: &Arc<MetricGraph>,
    e: &NodeSet,
    f: &NodeSet,
    p: f64,
    tol: f64,
    warm: Option<&Capacity>,
) -> Result<ModulusSolve> {
    crate::energy::check_exponent(p)?;
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptySet);
    }
    if !e.is_disjoint(f) {
        return Err(Error::OverlappingSets);
    }
    for id in e.iter().chain(f.iter()) {
        g.index_of(id)?;
    }

    let lens: Vec<f64> = g.edges().iter().map(|e| e.len).collect();
    let mus: Vec<f64> = g.edges().iter().map(|e| e.mu).collect();
    // dual iterate drives separation; the best certified (scaled-feasible)
    // density is tracked separately and is what gets returned
    let mut rho_work: Vec<f64> = match warm {
        Some(cap) => cap.witness.gradients(),
        None => vec![0.0; g.edge_count()],
    };
    let mut best_rho: Option<Vec<f64>> = None;
    let mut best_value = f64::INFINITY;

    let mut paths: Vec<Vec<u32>> = Vec::new(); // edge-index lists
    let mut node_paths: Vec<Vec<NodeId>> = Vec::new();
    let mut lambda: Vec<f64> = Vec::new();
    let mut dual_best = 0.0f64;
    let mut last_gap = f64::INFINITY;

    for round in 1..=MAX_ROUNDS {
        let (min_len, batch) = violated_paths(g, e, f, &rho_work, &lens, tol)?;
        if min_len > 0.0 && min_len.is_finite() {
            let cert = energy_of(&mus, &rho_work, p) / min_len.powf(p);
            if cert < best_value {
                best_value = cert;
                best_rho = Some(rho_work.iter().map(|r| r / min_len).collect());
            }
        }
        if !paths.is_empty() && best_value.is_finite() {
            let gap = (best_value - dual_best).max(0.0) / best_value.max(1e-300);
            last_gap = gap;
            if gap <= tol {
                let rho = best_rho.expect("certified density");
                let (final_len, _) = violated_paths(g, e, f, &rho, &lens, tol)?;
                return Ok(ModulusSolve {
                    value: best_value,
                    dual_bound: dual_best,
                    relgap: gap,
                    density: Density { rho },
                    active_paths: node_paths,
                    multipliers: lambda,
                    min_path_length: final_len,
                    rounds: round,
                });
            }
        }
        for path in batch {
            let edge_path = to_edge_path(g, &path);
            if !paths.contains(&edge_path) {
                paths.push(edge_path);
                node_paths.push(path);
                lambda.push(0.0);
            }
        }
        let solved = solve_restricted(&lens, &mus, p, &paths, &mut lambda, tol, best_value);
        rho_work = solved.rho;
        dual_best = dual_best.max(solved.dual);
    }
    Err(Error::ModulusNoConvergence {
        rounds: MAX_ROUNDS,
        gap: last_gap,
    })
}

/// Separation batch: the overall shortest (E, F)-path plus, when violations
/// exist, the lexicographic walks from the most violated distinct E-starts.
fn violated_paths(
    g: &MetricGraph,
    e: &NodeSet,
    f: &NodeSet,
    rho: &[f64],
    lens: &[f64],
    tol: f64,
) -> Result<(f64, Vec<Vec<NodeId>>)> {
    let w: Vec<f64> = rho.iter().zip(lens).map(|(r, l)| r * l).collect();
    let dist_f = distances_with(g, f, Some(&w))?;
    let mut starts: Vec<(f64, NodeId)> = e
        .iter()
        .map(|id| Ok((dist_f[g.index_of(id)? as usize], id)))
        .collect::<Result<_>>()?;
    starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (min_len, _) = *starts.first().ok_or(Error::EmptySet)?;
    if !min_len.is_finite() {
        return Err(Error::Disconnected);
    }
    let mut batch = Vec::new();
    for &(d, start) in starts.iter().take(8) {
        // always extract the overall shortest; extras only while violated
        if !batch.is_empty() && d >= 1.0 - tol {
            break;
        }
        batch.push(lex_path_from(g, f, &w, &dist_f, start)?);
    }
    Ok((min_len, batch))
}

/// Modulus of the curves from E to F that avoid the node set `avoid`
/// entirely. The family lives on the induced subgraph; it decomposes over
/// the connected components of the complement and the pieces add. Returns 0
/// with the zero density when no component joins E to F (the empty family).
pub fn modulus_avoiding(
    g: &Arc<MetricGraph>,
    e: &NodeSet,
    f: &NodeSet,
    avoid: &NodeSet,
    p: f64,
    tol: f64,
) -> Result<f64> {
    if !avoid.is_disjoint(e) || !avoid.is_disjoint(f) {
        return Err(Error::OverlappingSets);
    }
    let comps = complement_components(g, avoid)?;
    let mut total = 0.0;
    for comp in comps {
        let ec = e.intersection(&comp);
        let fc = f.intersection(&comp);
        if ec.is_empty() || fc.is_empty() {
            continue;
        }
        let sub = Arc::new(induced_subgraph(g, &comp)?);
        total += modulus_connect(&sub, &ec, &fc, p, tol)?.value;
    }
    Ok(total)
}

fn energy_of(mus: &[f64], rho: &[f64], p: f64) -> f64 {
    mus.iter().zip(rho).map(|(m, r)| m * r.powf(p)).sum()
}

fn to_edge_path(g: &MetricGraph, path: &[NodeId]) -> Vec<u32> {
    let mut out = Vec::with_capacity(path.len().saturating_sub(1));
    for w in path.windows(2) {
        let ia = g.index_of(w[0]).unwrap();
        let target = g.index_of(w[1]).unwrap();
        let (ei, _) = g
            .adjacency(ia)
            .iter()
            .copied()
            .find(|&(_, nbr)| nbr == target)
            .unwrap();
        out.push(ei);
    }
    out
}

struct Restricted {
    rho: Vec<f64>,
    dual: f64,
}

/// Dual of the restricted program. For multipliers lambda >= 0 on the
/// working paths, the inner minimization gives
/// `rho_e = (L_e len_e / (p mu_e))^(1/(p-1))` with `L_e` the multiplier load
/// through e, and the dual value is `(1-p) sum mu rho^p + sum lambda`.
///
/// Every candidate is scale-optimized: `max_t g(t lambda)` has the closed
/// form `(S / (p C))^(p-1) * S / p` with `S = sum lambda` and `C` the energy
/// of `rho(lambda)`, so only the direction of lambda has to be learned by
/// the subgradient iteration.
fn solve_restricted(
    lens: &[f64],
    mus: &[f64],
    p: f64,
    paths: &[Vec<u32>],
    lambda: &mut Vec<f64>,
    tol: f64,
    outer_ub: f64,
) -> Restricted {
    let q = 1.0 / (p - 1.0);
    let ne = lens.len();
    // the optimal rho vanishes off the working paths, so the dual only ever
    // touches the union of their edges
    let mut touched: Vec<u32> = paths.iter().flatten().copied().collect();
    touched.sort_unstable();
    touched.dedup();
    let mut local_of = vec![u32::MAX; ne];
    for (li, &ei) in touched.iter().enumerate() {
        local_of[ei as usize] = li as u32;
    }
    let nt = touched.len();
    let l_lens: Vec<f64> = touched.iter().map(|&ei| lens[ei as usize]).collect();
    let l_mus: Vec<f64> = touched.iter().map(|&ei| mus[ei as usize]).collect();
    let l_paths: Vec<Vec<u32>> = paths
        .iter()
        .map(|path| path.iter().map(|&ei| local_of[ei as usize]).collect())
        .collect();

    let rho_of = |lam: &[f64]| -> Vec<f64> {
        let mut load = vec![0.0; nt];
        for (pi, path) in l_paths.iter().enumerate() {
            for &li in path {
                load[li as usize] += lam[pi];
            }
        }
        (0..nt)
            .map(|li| (load[li] * l_lens[li] / (p * l_mus[li])).max(0.0).powf(q))
            .collect()
    };
    let path_lengths = |rho: &[f64]| -> Vec<f64> {
        l_paths
            .iter()
            .map(|path| {
                path.iter()
                    .map(|&li| rho[li as usize] * l_lens[li as usize])
                    .sum::<f64>()
            })
            .collect()
    };
    // dual value along the ray t*lambda, maximized over t >= 0
    let scaled_dual = |lam: &[f64], rho: &[f64]| -> (f64, f64) {
        let c = energy_of(&l_mus, rho, p);
        let s: f64 = lam.iter().sum();
        if c <= 0.0 || s <= 0.0 {
            return (0.0, 1.0);
        }
        let t = (s / (p * c)).powf(p - 1.0);
        ((s / (p * c)).powf(p - 1.0) * s / p, t)
    };

    if lambda.iter().all(|&l| l == 0.0) {
        for l in lambda.iter_mut() {
            *l = 1.0;
        }
    }

    // directional derivative of the dual along dir at lambda + alpha dir
    let ddual = |lam: &[f64], dir: &[f64], alpha: f64| -> f64 {
        let probe: Vec<f64> = lam
            .iter()
            .zip(dir)
            .map(|(l, d)| (l + alpha * d).max(0.0))
            .collect();
        let rho = rho_of(&probe);
        let lengths = path_lengths(&rho);
        dir.iter()
            .zip(&lengths)
            .zip(&probe)
            .map(|((d, len), l)| {
                // components pinned at zero with negative slack do not move
                if *l == 0.0 && *d < 0.0 {
                    0.0
                } else {
                    d * (1.0 - len)
                }
            })
            .sum()
    };

    let mut best_lam = lambda.clone();
    let mut best_dual = f64::NEG_INFINITY;
    let mut best_ub = outer_ub;
    let mut avg = lambda.clone();
    let iters = 200 + 20 * paths.len();
    for k in 1..=iters {
        let rho = rho_of(lambda);
        let lengths = path_lengths(&rho);
        let (d, t) = scaled_dual(lambda, &rho);
        if d > best_dual {
            best_dual = d;
            best_lam = lambda.iter().map(|l| l * t).collect();
        }
        // primal candidate: scale to feasibility over the working set
        let min_len = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        if min_len > 0.0 {
            best_ub = best_ub.min(energy_of(&l_mus, &rho, p) / min_len.powf(p));
        }
        if best_ub.is_finite() && (best_ub - best_dual) <= 0.2 * tol * best_ub.max(1e-300) {
            break;
        }
        // projected supergradient direction
        let dir: Vec<f64> = lengths
            .iter()
            .zip(lambda.iter())
            .map(|(len, l)| {
                let s = 1.0 - len;
                if *l == 0.0 && s < 0.0 {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        if dir.iter().all(|d| d.abs() <= 1e-300) {
            break;
        }
        // exact line search: the dual is concave along the projection arc
        let mut hi = 1.0;
        let mut guard = 0;
        while ddual(lambda, &dir, hi) > 0.0 && guard < 60 {
            hi *= 2.0;
            guard += 1;
        }
        let mut lo = 0.0;
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if ddual(lambda, &dir, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        for (pi, d) in dir.iter().enumerate() {
            lambda[pi] = (lambda[pi] + alpha * d).max(0.0);
            avg[pi] += (lambda[pi] - avg[pi]) / (k as f64 + 1.0);
        }
        if k % 8 == 0 {
            let r = rho_of(&avg);
            let (d_avg, t_avg) = scaled_dual(&avg, &r);
            if d_avg > best_dual {
                best_dual = d_avg;
                best_lam = avg.iter().map(|l| l * t_avg).collect();
            }
        }
    }
    *lambda = best_lam.clone();
    Restricted {
        rho: rho_of(&best_lam),
        dual: best_dual,
    }
}

/// Deterministic shortest (E, F)-path under weights `rho * len`, returning
/// the lexicographically smallest node sequence among ties. Computed on the
/// shortest-path DAG of the distance-to-F field: start at the smallest-id
/// E-node realizing the minimum, then repeatedly take the smallest-id DAG
/// neighbor. Steps across zero-weight plateaus are only taken when a simple
/// completion to F still exists (checked by a BFS on the unvisited DAG), so
/// the walk cannot strand itself in a dead end.
pub(crate) fn shortest_path(
    g: &MetricGraph,
    e: &NodeSet,
    f: &NodeSet,
    rho: &[f64],
    lens: &[f64],
) -> Result<(f64, Vec<NodeId>)> {
    let w: Vec<f64> = rho.iter().zip(lens).map(|(r, l)| r * l).collect();
    let dist_f = distances_with(g, f, Some(&w))?;
    let mut best: Option<(f64, NodeId)> = None;
    for id in e.iter() {
        let d = dist_f[g.index_of(id)? as usize];
        best = match best {
            None => Some((d, id)),
            Some((bd, bid)) => {
                if d < bd {
                    Some((d, id))
                } else {
                    Some((bd, bid))
                }
            }
        };
    }
    let (total, start) = best.ok_or(Error::EmptySet)?;
    if !total.is_finite() {
        return Err(Error::Disconnected);
    }
    let path = lex_path_from(g, f, &w, &dist_f, start)?;
    Ok((total, path))
}

/// Lexicographically smallest shortest walk from `start` to F on the
/// shortest-path DAG of `dist_f`.
fn lex_path_from(
    g: &MetricGraph,
    f: &NodeSet,
    w: &[f64],
    dist_f: &[f64],
    start: NodeId,
) -> Result<Vec<NodeId>> {
    let total = dist_f[g.index_of(start)? as usize];
    let eps = 1e-12 * (1.0 + total.abs());
    let on_dag = |cur: u32, ei: u32, nbr: u32| -> bool {
        (w[ei as usize] + dist_f[nbr as usize] - dist_f[cur as usize]).abs() <= eps
    };
    let in_f = |x: u32| f.contains(g.id_at(x));

    let mut path = vec![start];
    let mut visited = vec![false; g.node_count()];
    let mut cur = g.index_of(start)?;
    visited[cur as usize] = true;
    while !in_f(cur) {
        let mut stepped = false;
        let mut candidates: Vec<u32> = g
            .adjacency(cur)
            .iter()
            .filter(|&&(ei, nbr)| !visited[nbr as usize] && on_dag(cur, ei, nbr))
            .map(|&(_, nbr)| nbr)
            .collect();
        candidates.sort_by_key(|&nbr| g.id_at(nbr));
        for nbr in candidates {
            let strict = dist_f[nbr as usize] < dist_f[cur as usize] - eps;
            if strict || dag_completes(g, w, dist_f, &visited, nbr, eps, &in_f) {
                path.push(g.id_at(nbr));
                visited[nbr as usize] = true;
                cur = nbr;
                stepped = true;
                break;
            }
        }
        if !stepped {
            return Err(Error::Disconnected);
        }
    }
    Ok(path)
}

/// Is F reachable from `from` along unvisited DAG edges? Guards plateau
/// steps of the lexicographic walk.
fn dag_completes(
    g: &MetricGraph,
    w: &[f64],
    dist_f: &[f64],
    visited: &[bool],
    from: u32,
    eps: f64,
    in_f: &impl Fn(u32) -> bool,
) -> bool {
    if in_f(from) {
        return true;
    }
    let mut seen = visited.to_vec();
    seen[from as usize] = true;
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        for &(ei, nbr) in g.adjacency(x) {
            if seen[nbr as usize] {
                continue;
            }
            if (w[ei as usize] + dist_f[nbr as usize] - dist_f[x as usize]).abs() <= eps {
                if in_f(nbr) {
                    return true;
                }
                seen[nbr as usize] = true;
                stack.push(nbr);
            }
        }
    }
    false
}

/// Modulus of the traversing family of a nested chain: a curve ending in
/// `F_depth` meets every `F_n` with `n <= depth`, so the traversing modulus
/// equals the connecting one to the deepest set. The nesting is validated,
/// then the reduction is applied.
pub fn modulus_traverse(
    ex: &Exhaustion,
    base: &NodeSet,
    chain: &Chain,
    depth: u32,
    level: u32,
    p: f64,
    tol: f64,
) -> Result<ModulusSolve> {
    chain.check_nested(ex, depth, level)?;
    let g = ex.graph(level)?;
    let f_deep = chain.set_at(ex, depth, level)?;
    modulus_connect(&g, base, &f_deep, p, tol)
}

/// Dispatch over a [`CurveFamilySpec`].
pub fn modulus_of(
    ex: Option<&Exhaustion>,
    g: &Arc<MetricGraph>,
    spec: &CurveFamilySpec<'_>,
    level: u32,
    p: f64,
    tol: f64,
) -> Result<ModulusSolve> {
    match spec {
        CurveFamilySpec::Connect { e, f } => modulus_connect(g, e, f, p, tol),
        CurveFamilySpec::Traverse { base, chain, depth } => {
            let ex = ex.ok_or(Error::Precondition(
                "traverse families need the exhaustion".into(),
            ))?;
            modulus_traverse(ex, base, chain, *depth, level, p, tol)
        }
    }
}

/// Mod = cap verification report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DualityReport {
    pub modulus: f64,
    pub capacity: f64,
    pub relgap: f64,
    /// Shortest (E,F)-path length under the capacity witness gradient; the
    /// witness gradient is an admissible density when this is >= 1 - tol.
    pub witness_min_path: f64,
    pub witness_admissible: bool,
    /// Edgewise max |rho - g_u| between the optimal density and the capacity
    /// witness gradient.
    pub density_gradient_gap: f64,
}

pub fn verify_mod_eq_cap(
    g: &Arc<MetricGraph>,
    e: &NodeSet,
    f: &NodeSet,
    p: f64,
    tol: f64,
) -> Result<DualityReport> {
    let cap = capacity(g, e, f, p, (tol * 1e-2).clamp(1e-9, 1e-7))?;
    let m = modulus_connect_seeded(g, e, f, p, tol, Some(&cap))?;
    let grads = cap.witness.gradients();
    let lens: Vec<f64> = g.edges().iter().map(|e| e.len).collect();
    let (witness_min_path, _) = shortest_path(g, e, f, &grads, &lens)?;
    let density_gradient_gap = m
        .density
        .rho
        .iter()
        .zip(&grads)
        .map(|(r, gu)| (r - gu).abs())
        .fold(0.0f64, f64::max);
    let relgap = (m.value - cap.value).abs() / cap.value.max(1e-300);
    Ok(DualityReport {
        modulus: m.value,
        capacity: cap.value,
        relgap,
        witness_min_path,
        witness_admissible: witness_min_path >= 1.0 - tol,
        density_gradient_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(k: u64) -> Arc<MetricGraph> {
        let nodes = (0..=k).map(|i| (NodeId(i), None)).collect();
        let edges = (0..k)
            .map(|i| (NodeId(i), NodeId(i + 1), 1.0, 1.0))
            .collect();
        Arc::new(MetricGraph::new(nodes, edges).unwrap())
    }

    #[test]
    fn modulus_of_unit_path() {
        for p in [1.5, 2.0, 3.0] {
            let k = 5u64;
            let g = path(k);
            let m = modulus_connect(
                &g,
                &NodeSet::singleton(NodeId(0)),
                &NodeSet::singleton(NodeId(k)),
                p,
                1e-6,
            )
            .unwrap();
            let expect = (k as f64).powf(1.0 - p);
            assert!(
                (m.value - expect).abs() <= 1e-5 * expect,
                "p={p}: {} vs {expect}",
                m.value
            );
            for r in &m.density.rho {
                assert!((r - 1.0 / k as f64).abs() < 1e-4, "density not uniform");
            }
            assert!(m.min_path_length >= 1.0 - 1e-6);
            assert!(m.relgap <= 1e-5, "p={p} relgap {}", m.relgap);
        }
    }

    #[test]
    fn empty_family_has_zero_modulus() {
        // curves from {0} to {4} avoiding node 2 on a path: no such curves
        let g = path(4);
        let v = modulus_avoiding(
            &g,
            &NodeSet::singleton(NodeId(0)),
            &NodeSet::singleton(NodeId(4)),
            &NodeSet::singleton(NodeId(2)),
            2.0,
            1e-6,
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn modulus_adds_over_parallel_paths() {
        let mut nodes = vec![(NodeId(0), None), (NodeId(9), None)];
        let mut edges = Vec::new();
        for (a, b) in [(1u64, 2u64), (3, 4)] {
            nodes.push((NodeId(a), None));
            nodes.push((NodeId(b), None));
            edges.push((NodeId(0), NodeId(a), 1.0, 1.0));
            edges.push((NodeId(a), NodeId(b), 1.0, 1.0));
            edges.push((NodeId(b), NodeId(9), 1.0, 1.0));
        }
        let g = Arc::new(MetricGraph::new(nodes, edges).unwrap());
        let p = 2.0;
        let m = modulus_connect(
            &g,
            &NodeSet::singleton(NodeId(0)),
            &NodeSet::singleton(NodeId(9)),
            p,
            1e-6,
        )
        .unwrap();
        let expect = 2.0 * 3f64.powf(1.0 - p);
        assert!((m.value - expect).abs() < 1e-5 * expect);
    }

    #[test]
    fn weighted_chain_matches_closed_form() {
        let lens = [0.7, 1.3, 2.0, 0.5];
        let mus = [1.1, 0.6, 1.9, 0.8];
        let nodes = (0..=4u64).map(|i| (NodeId(i), None)).collect();
        let edges = (0..4usize)
            .map(|i| (NodeId(i as u64), NodeId(i as u64 + 1), lens[i], mus[i]))
            .collect();
        let g = Arc::new(MetricGraph::new(nodes, edges).unwrap());
        for p in [1.2, 2.0, 4.0] {
            let m = modulus_connect(
                &g,
                &NodeSet::singleton(NodeId(0)),
                &NodeSet::singleton(NodeId(4)),
                p,
                1e-7,
            )
            .unwrap();
            let s: f64 = lens
                .iter()
                .zip(&mus)
                .map(|(l, mu)| (l.powf(p) / mu).powf(1.0 / (p - 1.0)))
                .sum();
            let expect = s.powf(1.0 - p);
            assert!(
                (m.value - expect).abs() <= 1e-5 * expect,
                "p={p}: {} vs {expect}",
                m.value
            );
        }
    }

    #[test]
    fn duality_on_small_grid() {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let id = |r: u64, c: u64| NodeId(r * 4 + c);
        for r in 0..4u64 {
            for c in 0..4u64 {
                nodes.push((id(r, c), None));
                let wiggle = 1.0 + 0.3 * (((r * 7 + c * 3) % 5) as f64) / 5.0;
                if c + 1 < 4 {
                    edges.push((id(r, c), id(r, c + 1), 1.0, wiggle));
                }
                if r + 1 < 4 {
                    edges.push((id(r, c), id(r + 1, c), wiggle, 1.0));
                }
            }
        }
        let g = Arc::new(MetricGraph::new(nodes, edges).unwrap());
        let e: NodeSet = (0..4u64).map(|r| id(r, 0)).collect();
        let f: NodeSet = (0..4u64).map(|r| id(r, 3)).collect();
        for p in [1.5, 2.0, 3.0] {
            let rep = verify_mod_eq_cap(&g, &e, &f, p, 1e-5).unwrap();
            assert!(rep.relgap <= 1e-4, "p={p} relgap {}", rep.relgap);
            assert!(rep.witness_admissible, "p={p} witness infeasible");
            assert!(
                rep.density_gradient_gap < 1e-2,
                "p={p} density/gradient gap {}",
                rep.density_gradient_gap
            );
        }
    }

    #[test]
    fn rejects_overlapping_sets() {
        let g = path(3);
        let e = NodeSet::new(vec![NodeId(0), NodeId(1)]);
        let f = NodeSet::new(vec![NodeId(1), NodeId(3)]);
        assert!(matches!(
            modulus_connect(&g, &e, &f, 2.0, 1e-6),
            Err(Error::OverlappingSets)
        ));
    }

    #[test]
    fn lexicographic_tie_break() {
        // 2x3 unit grid, ids 0 1 2 / 3 4 5: from 0 to 5 all shortest routes
        // tie at length 3; the lex-smallest node sequence is 0,1,2,5
        let nodes = (0..6u64).map(|i| (NodeId(i), None)).collect();
        let edges = vec![
            (NodeId(0), NodeId(1), 1.0, 1.0),
            (NodeId(1), NodeId(2), 1.0, 1.0),
            (NodeId(3), NodeId(4), 1.0, 1.0),
            (NodeId(4), NodeId(5), 1.0, 1.0),
            (NodeId(0), NodeId(3), 1.0, 1.0),
            (NodeId(1), NodeId(4), 1.0, 1.0),
            (NodeId(2), NodeId(5), 1.0, 1.0),
        ];
        let g = Arc::new(MetricGraph::new(nodes, edges).unwrap());
        let rho = vec![1.0; g.edge_count()];
        let lens: Vec<f64> = g.edges().iter().map(|e| e.len).collect();
        let (len, path) = shortest_path(
            &g,
            &NodeSet::singleton(NodeId(0)),
            &NodeSet::singleton(NodeId(5)),
            &rho,
            &lens,
        )
        .unwrap();
        assert_eq!(len, 3.0);
        assert_eq!(path, vec![NodeId(0), NodeId(1), NodeId(2), NodeId(5)]);
    }

    #[test]
    fn monotone_under_shrinking_target() {
        let g = path(8);
        let base = NodeSet::singleton(NodeId(0));
        let f1: NodeSet = (4..=8).map(NodeId).collect();
        let f2: NodeSet = (6..=8).map(NodeId).collect();
        let p = 1.7;
        let m1 = modulus_connect(&g, &base, &f1, p, 1e-6).unwrap();
        let m2 = modulus_connect(&g, &base, &f2, p, 1e-6).unwrap();
        assert!(m2.value <= m1.value + 1e-6);
    }

    #[test]
    fn overflow_subcurve_bound() {
        // Mod(F,G) <= Mod(B,F) + Mod(avoiding B): every F-G curve either
        // meets B (then has a subcurve joining B to F) or avoids it
        let g = path(10);
        let f: NodeSet = (0..=1u64).map(NodeId).collect();
        let gg: NodeSet = (9..=10u64).map(NodeId).collect();
        let b: NodeSet = (4..=5u64).map(NodeId).collect();
        let p = 2.0;
        let whole = modulus_connect(&g, &f, &gg, p, 1e-7).unwrap().value;
        let through = modulus_connect(&g, &b, &f, p, 1e-7).unwrap().value;
        let avoiding = modulus_avoiding(&g, &f, &gg, &b, p, 1e-7).unwrap();
        assert!(whole <= through + avoiding + 1e-6);
    }
}
