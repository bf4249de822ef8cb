//! Deterministic builders for the named example spaces: the weighted line,
//! the weighted plane with sector chains, the half-plane with an attached
//! strip, the weighted binary tree, unweighted Z^n grids, and the bump-sum
//! energy check.
//!
//! Grid discretization: nodes at mesh points with edge length h and edge
//! measure mu(e) = h^n * (mean of the weight at the endpoints). Node ids
//! encode lattice coordinates with a fixed offset so they stay stable
//! across exhaustion levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::{Chain, Exhaustion, RadiusSchedule};
use crate::graph::{MetricGraph, NodeId, NodeSet};
use crate::liouville::LineWeight;

const OFFSET: i64 = 1 << 20;
const STRIDE: u64 = 1 << 21;

fn id1(i: i64) -> NodeId {
    NodeId((i + OFFSET) as u64)
}

fn id2(i: i64, j: i64) -> NodeId {
    NodeId((i + OFFSET) as u64 * STRIDE + (j + OFFSET) as u64)
}

fn id3(i: i64, j: i64, k: i64) -> NodeId {
    NodeId(((i + OFFSET) as u64 * STRIDE + (j + OFFSET) as u64) * STRIDE + (k + OFFSET) as u64)
}

/// Scenario family and parameters. Fully deterministic (no seeds).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScenarioSpec {
    /// Weighted real line with declared power tails.
    WeightedLine {
        alpha: f64,
        #[serde(default)]
        symmetric: bool,
        h: f64,
        depth: u32,
    },
    /// R^2 with weight e^{-dist(x, A)}, A the double sector |x2| <= |x1|,
    /// and the two sector chains.
    WeightedPlaneSector { h: f64, depth: u32 },
    /// Lower half-plane plus the strip [-1,1] x (0, inf), weight
    /// e^{-dist(x, A)} with A the lower double-sector piece plus the strip.
    HalfplaneStrip { h: f64, depth: u32 },
    /// Infinite binary tree with unit edges; weight 2^{-j} where j is the
    /// depth of the projection onto a fixed ray.
    BinaryTree { depth: u32 },
    /// Unweighted n-dimensional grid, n in {1, 2, 3}.
    GridZn { dim: u32, h: f64, depth: u32 },
    /// Sampling grid for the bump-sum energy example.
    BumpSum { dim: u32, bumps: i32, h: f64 },
}

/// A built scenario: the exhaustion plus its designated chains.
pub struct Scenario {
    pub exhaustion: Exhaustion,
    pub chains: Vec<Chain>,
}

pub fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    match *spec {
        ScenarioSpec::WeightedLine {
            alpha,
            symmetric,
            h,
            depth,
        } => weighted_line(alpha, symmetric, h, depth),
        ScenarioSpec::WeightedPlaneSector { h, depth } => weighted_plane(h, depth),
        ScenarioSpec::HalfplaneStrip { h, depth } => halfplane_strip(h, depth),
        ScenarioSpec::BinaryTree { depth } => binary_tree(depth),
        ScenarioSpec::GridZn { dim, h, depth } => grid_zn(dim, h, depth),
        ScenarioSpec::BumpSum { dim, bumps, h } => bump_sum_scenario(dim, bumps, h),
    }
}

fn check_mesh(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::OutOfRange(format!("mesh h must be positive, got {h}")));
    }
    Ok(())
}

/// 1D chain graph on [-extent, extent] with mu(e) = h * mean weight.
fn line_graph(w: LineWeight, h: f64, extent: f64) -> Result<MetricGraph> {
    let n = (extent / h).ceil() as i64;
    let x = |i: i64| i as f64 * h;
    let nodes = (-n..=n).map(|i| (id1(i), Some([x(i), 0.0]))).collect();
    let edges = (-n..n)
        .map(|i| {
            let mu = h * 0.5 * (w.eval(x(i)) + w.eval(x(i + 1)));
            (id1(i), id1(i + 1), h, mu)
        })
        .collect();
    MetricGraph::new(nodes, edges)
}

fn weighted_line(alpha: f64, symmetric: bool, h: f64, depth: u32) -> Result<Scenario> {
    check_mesh(h)?;
    if depth == 0 {
        return Err(Error::OutOfRange("depth must be at least 1".into()));
    }
    let w = if symmetric {
        LineWeight::symmetric_power(alpha)
    } else {
        LineWeight::example_power(alpha)
    };
    let exhaustion = Exhaustion::from_generator(
        id1(0),
        RadiusSchedule::Arithmetic { step: 1.0 },
        depth,
        move |m| line_graph(w, h, 2.0 * m as f64 + 2.0),
    )?;
    let pos_tail = Chain::from_predicate("end+inf", move |n, g| {
        select_by_pos(g, move |p| p[0] >= 2.0 * n as f64)
    });
    let neg_tail = Chain::from_predicate("end-inf", move |n, g| {
        select_by_pos(g, move |p| p[0] <= -2.0 * n as f64)
    });
    Ok(Scenario {
        exhaustion,
        chains: vec![neg_tail, pos_tail],
    })
}

fn select_by_pos(g: &MetricGraph, pred: impl Fn([f64; 2]) -> bool) -> NodeSet {
    g.ids()
        .iter()
        .copied()
        .filter(|&id| g.position(id).map(&pred).unwrap_or(false))
        .collect()
}

/// Exact Euclidean distance to the double sector A = {|x2| <= |x1|}.
pub fn dist_to_sector(x: [f64; 2]) -> f64 {
    let (a, b) = (x[0].abs(), x[1].abs());
    if b <= a {
        0.0
    } else {
        (b - a) / std::f64::consts::SQRT_2
    }
}

fn plane_weight(x: [f64; 2]) -> f64 {
    (-dist_to_sector(x)).exp()
}

fn grid2_graph(
    weight: impl Fn([f64; 2]) -> f64,
    keep: impl Fn([f64; 2]) -> bool,
    h: f64,
    extent: f64,
) -> Result<MetricGraph> {
    let n = (extent / h).ceil() as i64;
    let x = |i: i64| i as f64 * h;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let pos = [x(i), x(j)];
            if !keep(pos) {
                continue;
            }
            nodes.push((id2(i, j), Some(pos)));
            for (di, dj) in [(1i64, 0i64), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 > n || j2 > n {
                    continue;
                }
                let pos2 = [x(i2), x(j2)];
                if !keep(pos2) {
                    continue;
                }
                let mu = h * h * 0.5 * (weight(pos) + weight(pos2));
                edges.push((id2(i, j), id2(i2, j2), h, mu));
            }
        }
    }
    MetricGraph::new(nodes, edges)
}

fn sector_chains() -> (Chain, Chain) {
    let f = Chain::from_predicate("sector+x", |n, g| {
        select_by_pos(g, move |p| p[1].abs() <= p[0].abs() && p[0] >= 2.0 * n as f64)
    });
    let gch = Chain::from_predicate("sector-x", |n, g| {
        select_by_pos(g, move |p| p[1].abs() <= p[0].abs() && p[0] <= -2.0 * n as f64)
    });
    (f, gch)
}

fn weighted_plane(h: f64, depth: u32) -> Result<Scenario> {
    check_mesh(h)?;
    let exhaustion = Exhaustion::from_generator(
        id2(0, 0),
        RadiusSchedule::Arithmetic { step: 1.0 },
        depth,
        move |m| grid2_graph(plane_weight, |_| true, h, 2.0 * m as f64 + 2.0),
    )?;
    let (f, g) = sector_chains();
    Ok(Scenario {
        exhaustion,
        chains: vec![f, g],
    })
}

/// Exact distance to A for the half-plane + strip space: A is the part of
/// the double sector in the closed lower half-plane plus the strip. Space
/// points in the strip or the lower cone sit inside A; remaining space
/// points are in the lower half-plane and take the minimum of the two exact
/// piecewise-linear distances (the seam gets the larger weight of the two
/// formulas automatically).
pub fn dist_to_halfplane_sector(x: [f64; 2]) -> f64 {
    let in_strip = x[0].abs() <= 1.0 && x[1] >= 0.0;
    if in_strip {
        return 0.0;
    }
    // lower cone {-|x1| <= x2 <= 0}
    let d_cone = if x[1] > 0.0 {
        f64::INFINITY
    } else if -x[1] <= x[0].abs() {
        0.0
    } else {
        (-x[1] - x[0].abs()) / std::f64::consts::SQRT_2
    };
    // strip: nearest point is (clamp(x1, -1, 1), max(x2, 0))
    let dx = (x[0].abs() - 1.0).max(0.0);
    let dy = (-x[1]).max(0.0);
    let d_strip = (dx * dx + dy * dy).sqrt();
    d_cone.min(d_strip)
}

fn halfplane_strip(h: f64, depth: u32) -> Result<Scenario> {
    check_mesh(h)?;
    let keep = |p: [f64; 2]| p[1] <= 0.0 || p[0].abs() <= 1.0;
    let weight = |p: [f64; 2]| (-dist_to_halfplane_sector(p)).exp();
    let exhaustion = Exhaustion::from_generator(
        id2(0, 0),
        RadiusSchedule::Arithmetic { step: 1.0 },
        depth,
        move |m| grid2_graph(weight, keep, h, 2.0 * m as f64 + 2.0),
    )?;
    let f = Chain::from_predicate("sector+x", |n, g| {
        select_by_pos(g, move |p| {
            p[1] <= 0.0 && p[1] >= -p[0].abs() && p[0] >= 2.0 * n as f64
        })
    });
    let gch = Chain::from_predicate("sector-x", |n, g| {
        select_by_pos(g, move |p| {
            p[1] <= 0.0 && p[1] >= -p[0].abs() && p[0] <= -2.0 * n as f64
        })
    });
    let strip = Chain::from_predicate("strip-end", |n, g| {
        select_by_pos(g, move |p| p[0].abs() <= 1.0 && p[1] >= 2.0 * n as f64)
    });
    Ok(Scenario {
        exhaustion,
        chains: vec![f, gch, strip],
    })
}

/// Binary tree with heap-indexed nodes (root = 1, children 2k and 2k+1).
/// The fixed ray gamma is the all-left path 1, 2, 4, 8, ...; the weight of
/// a node is 2^{-j} with j the depth of its projection onto gamma, so the
/// weight is constant on each subtree hanging off the ray. Edge measure is
/// the endpoint mean.
fn binary_tree(depth: u32) -> Result<Scenario> {
    if depth == 0 || depth > 20 {
        return Err(Error::OutOfRange("tree depth must be in 1..=20".into()));
    }
    let exhaustion = Exhaustion::from_generator(
        NodeId(1),
        RadiusSchedule::Arithmetic { step: 1.0 },
        depth,
        |m| {
            let levels = m; // tree depth equals the exhaustion level
            let mut nodes = Vec::new();
            let mut edges = Vec::new();
            let max_id: u64 = 1 << (levels + 1);
            for k in 1u64..max_id {
                nodexy(&mut nodes, k, levels);
                if k > 1 {
                    let parent = k / 2;
                    let w = 0.5 * (tree_weight(k) + tree_weight(parent));
                    edges.push((NodeId(k), NodeId(parent), 1.0, w));
                }
            }
            MetricGraph::new(nodes, edges)
        },
    )?;
    Ok(Scenario {
        exhaustion,
        chains: Vec::new(),
    })
}

fn nodexy(nodes: &mut Vec<(NodeId, Option<[f64; 2]>)>, k: u64, levels: u32) {
    let depth = 63 - k.leading_zeros() as i64;
    let width = 1u64 << depth;
    let index = k - width;
    let x = (index as f64 + 0.5) / width as f64 * (1 << levels) as f64;
    nodes.push((NodeId(k), Some([x, depth as f64])));
}

/// Depth along the all-left ray of the projection of node k: follow parents
/// until the node is a power of two (on the ray); the projection is that
/// ancestor.
pub fn tree_projection_depth(k: u64) -> u32 {
    let mut k = k;
    while !k.is_power_of_two() {
        k /= 2;
    }
    63 - k.leading_zeros()
}

pub fn tree_weight(k: u64) -> f64 {
    2f64.powi(-(tree_projection_depth(k) as i32))
}

fn grid_zn(dim: u32, h: f64, depth: u32) -> Result<Scenario> {
    check_mesh(h)?;
    match dim {
        1 => {
            let w = LineWeight {
                alpha_neg: 0.0,
                alpha_pos: 0.0,
                cut: 1.0,
            };
            let exhaustion = Exhaustion::from_generator(
                id1(0),
                RadiusSchedule::Arithmetic { step: 1.0 },
                depth,
                move |m| line_graph(w, h, 2.0 * m as f64 + 2.0),
            )?;
            Ok(Scenario {
                exhaustion,
                chains: Vec::new(),
            })
        }
        2 => {
            let exhaustion = Exhaustion::from_generator(
                id2(0, 0),
                RadiusSchedule::Arithmetic { step: 1.0 },
                depth,
                move |m| grid2_graph(|_| 1.0, |_| true, h, m as f64 + 1.0),
            )?;
            Ok(Scenario {
                exhaustion,
                chains: Vec::new(),
            })
        }
        3 => {
            let exhaustion = Exhaustion::from_generator(
                id3(0, 0, 0),
                RadiusSchedule::Arithmetic { step: 1.0 },
                depth,
                move |m| grid3_graph(h, m as f64 + 1.0),
            )?;
            Ok(Scenario {
                exhaustion,
                chains: Vec::new(),
            })
        }
        _ => Err(Error::OutOfRange("grid dimension must be 1, 2 or 3".into())),
    }
}

fn grid3_graph(h: f64, extent: f64) -> Result<MetricGraph> {
    let n = (extent / h).ceil() as i64;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mu = h * h * h;
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                nodes.push((id3(i, j, k), None));
                for (di, dj, dk) in [(1i64, 0i64, 0i64), (0, 1, 0), (0, 0, 1)] {
                    let (i2, j2, k2) = (i + di, j + dj, k + dk);
                    if i2 > n || j2 > n || k2 > n {
                        continue;
                    }
                    edges.push((id3(i, j, k), id3(i2, j2, k2), h, mu));
                }
            }
        }
    }
    MetricGraph::new(nodes, edges)
}

fn bump_sum_scenario(dim: u32, bumps: i32, h: f64) -> Result<Scenario> {
    check_mesh(h)?;
    if dim != 1 {
        return Err(Error::OutOfRange(
            "bump-sum sampling grids are built for dimension 1".into(),
        ));
    }
    let hi = if bumps < 0 {
        4.0
    } else {
        4f64.powi(bumps) + 2f64.powi(bumps) + 2.0
    };
    let w = LineWeight {
        alpha_neg: 0.0,
        alpha_pos: 0.0,
        cut: 1.0,
    };
    let exhaustion = Exhaustion::from_generator(
        id1(0),
        RadiusSchedule::Arithmetic { step: 1.0 },
        1,
        move |_| line_graph(w, h, hi + 2.0),
    )?;
    Ok(Scenario {
        exhaustion,
        chains: Vec::new(),
    })
}

/// The bump-sum function: sum of tent bumps of radius 2^j centered at 4^j.
pub fn bump_sum_value(x: &[f64], bumps: i32) -> f64 {
    let mut u = 0.0;
    for j in 0..=bumps.max(-1) {
        let c = 4f64.powi(j);
        let r = 2f64.powi(j);
        let mut d2 = (x[0] - c) * (x[0] - c);
        for xi in &x[1..] {
            d2 += xi * xi;
        }
        u += (1.0 - d2.sqrt() / r).max(0.0);
    }
    u
}

/// Volume of the unit ball in R^n (n = 1, 2, 3).
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BumpSumReport {
    pub dim: u32,
    pub p: f64,
    pub bumps: i32,
    pub h: f64,
    pub discrete_energy: f64,
    pub analytic_partial_sum: f64,
    pub relative_error: f64,
    /// (discrete, analytic) energy per bump.
    pub per_bump: Vec<(f64, f64)>,
}

/// Discretizes the bump-sum function on a grid covering the first `bumps`
/// bumps and compares its p-energy to the analytic partial sum
/// `sum_j 2^{j(n-p)} * omega_n`. Requires p > n.
pub fn bump_sum_energy(dim: u32, p: f64, bumps: i32, h: f64) -> Result<BumpSumReport> {
    crate::energy::check_exponent(p)?;
    check_mesh(h)?;
    if dim != 1 {
        return Err(Error::OutOfRange(
            "bump-sum energies are computed for dimension 1".into(),
        ));
    }
    if p <= dim as f64 {
        return Err(Error::OutOfRange(format!(
            "the bump-sum example requires p > n (got p = {p}, n = {dim})"
        )));
    }
    let omega = unit_ball_volume(dim);
    let analytic: f64 = (0..=bumps.max(-1))
        .map(|j| 2f64.powf(j as f64 * (dim as f64 - p)) * omega)
        .sum();

    let scenario = build_scenario(&ScenarioSpec::BumpSum { dim, bumps, h })?;
    let g = scenario.exhaustion.graph(1)?;
    let mut discrete = 0.0;
    let mut per_bump: Vec<(f64, f64)> = (0..=bumps.max(-1))
        .map(|j| (0.0, 2f64.powf(j as f64 * (dim as f64 - p)) * omega))
        .collect();
    for e in g.edges() {
        let pu = g.position(e.u).unwrap();
        let pv = g.position(e.v).unwrap();
        let du = bump_sum_value(&[pu[0]], bumps);
        let dv = bump_sum_value(&[pv[0]], bumps);
        let grad = (du - dv).abs() / e.len;
        let term = e.mu * grad.powf(p);
        discrete += term;
        let mid = 0.5 * (pu[0] + pv[0]);
        for j in 0..=bumps.max(-1) {
            let c = 4f64.powi(j);
            let r = 2f64.powi(j);
            if (mid - c).abs() <= r {
                per_bump[j as usize].0 += term;
            }
        }
    }
    let relative_error = if analytic > 0.0 {
        (discrete - analytic).abs() / analytic
    } else {
        discrete.abs()
    };
    Ok(BumpSumReport {
        dim,
        p,
        bumps,
        h,
        discrete_energy: discrete,
        analytic_partial_sum: analytic,
        relative_error,
        per_bump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::capacity;
    use crate::graph::ball;

    #[test]
    fn grid_z2_has_one_end() {
        let s = build_scenario(&ScenarioSpec::GridZn {
            dim: 2,
            h: 1.0,
            depth: 4,
        })
        .unwrap();
        let ends = crate::ends::build_ends(&s.exhaustion, 3).unwrap();
        assert_eq!(ends.len(), 1);
    }

    #[test]
    fn weighted_line_capacity_matches_quadrature() {
        // capacity from the origin to the right tail approximates
        // (int_0^X w^{1/(1-p)})^{1-p}; with w = 1 this is X^{1-p}
        let h = 0.25;
        let s = build_scenario(&ScenarioSpec::WeightedLine {
            alpha: 2.0,
            symmetric: false,
            h,
            depth: 4,
        })
        .unwrap();
        let g = s.exhaustion.graph(3).unwrap();
        let p = 1.5;
        let e = NodeSet::singleton(id1(0));
        let x_f = 4.0;
        let f = select_by_pos(&g, |pos| pos[0] >= x_f - 1e-9);
        let cap = capacity(&g, &e, &f, p, 1e-10).unwrap();
        let expect = x_f.powf(1.0 - p);
        assert!(
            (cap.value - expect).abs() < 0.05 * expect,
            "{} vs {}",
            cap.value,
            expect
        );
    }

    #[test]
    fn weighted_line_left_tail_matches_power_quadrature() {
        let h = 0.125;
        let s = build_scenario(&ScenarioSpec::WeightedLine {
            alpha: 2.0,
            symmetric: false,
            h,
            depth: 4,
        })
        .unwrap();
        let g = s.exhaustion.graph(4).unwrap();
        let p = 1.5;
        let e = NodeSet::singleton(id1(0));
        let x_f = -8.0;
        let f = select_by_pos(&g, |pos| pos[0] <= x_f + 1e-9);
        let cap = capacity(&g, &e, &f, p, 1e-10).unwrap();
        // oracle: (int_{x_f}^0 w^{1/(1-p)})^{1-p} with w = |x|^2 below -1
        let q = 1.0 / (1.0 - p);
        let integral = 1.0
            + (x_f.abs().powf(2.0 * q + 1.0) - 1.0) / (2.0 * q + 1.0);
        let expect = integral.powf(1.0 - p);
        assert!(
            (cap.value - expect).abs() < 0.05 * expect,
            "{} vs {}",
            cap.value,
            expect
        );
    }

    #[test]
    fn mesh_refinement_changes_capacity_slowly() {
        let p = 1.5;
        let mut values = Vec::new();
        for h in [0.5, 0.25] {
            let s = build_scenario(&ScenarioSpec::WeightedLine {
                alpha: 2.0,
                symmetric: false,
                h,
                depth: 3,
            })
            .unwrap();
            let g = s.exhaustion.graph(3).unwrap();
            let e = NodeSet::singleton(id1(0));
            let f = select_by_pos(&g, |pos| pos[0] >= 4.0 - 1e-9);
            values.push(capacity(&g, &e, &f, p, 1e-10).unwrap().value);
        }
        let change = (values[1] - values[0]).abs() / values[0];
        assert!(change < 0.05, "mesh halving changed capacity by {change}");
    }

    #[test]
    fn plane_sector_symmetry() {
        let s = build_scenario(&ScenarioSpec::WeightedPlaneSector { h: 0.5, depth: 3 }).unwrap();
        let ex = &s.exhaustion;
        let g = ex.graph(3).unwrap();
        let p = 1.5;
        let base = ball(&g, ex.base(), 1.0).unwrap();
        let f = s.chains[0].set_at(ex, 1, 3).unwrap();
        let gs = s.chains[1].set_at(ex, 1, 3).unwrap();
        let cf = capacity(&g, &base, &f, p, 1e-9).unwrap().value;
        let cg = capacity(&g, &base, &gs, p, 1e-9).unwrap().value;
        assert!(
            (cf - cg).abs() <= 1e-6 * cf.max(cg),
            "mirror capacities differ: {cf} vs {cg}"
        );
    }

    #[test]
    fn plane_weight_is_one_on_sector() {
        assert_eq!(dist_to_sector([3.0, 2.0]), 0.0);
        assert_eq!(dist_to_sector([-3.0, 2.0]), 0.0);
        let d = dist_to_sector([0.0, 2.0]);
        assert!((d - 2.0 / std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn tree_weight_follows_projection() {
        // ray nodes 1, 2, 4, 8 carry weight 2^0, 2^-1, 2^-2, 2^-3
        assert_eq!(tree_weight(1), 1.0);
        assert_eq!(tree_weight(2), 0.5);
        assert_eq!(tree_weight(4), 0.25);
        // node 3 hangs off the root: projection depth 0
        assert_eq!(tree_weight(3), 1.0);
        // node 5 hangs off node 2: projection depth 1; its children too
        assert_eq!(tree_weight(5), 0.5);
        assert_eq!(tree_weight(10), 0.5);
        assert_eq!(tree_weight(11), 0.5);
    }

    #[test]
    fn tree_weight_nonincreasing_along_rays() {
        let s = build_scenario(&ScenarioSpec::BinaryTree { depth: 6 }).unwrap();
        let g = s.exhaustion.graph(6).unwrap();
        for k in 2u64..g.node_count() as u64 {
            if g.contains(NodeId(k)) {
                assert!(tree_weight(k) <= tree_weight(k / 2) + 1e-15);
            }
        }
    }

    #[test]
    fn tree_ends_count_matches_branches() {
        let s = build_scenario(&ScenarioSpec::BinaryTree { depth: 6 }).unwrap();
        for d in [2u32, 3] {
            let ends = crate::ends::build_ends(&s.exhaustion, d).unwrap();
            assert_eq!(ends.len(), 1 << d, "depth {d}");
        }
    }

    #[test]
    fn halfplane_strip_has_two_ends() {
        let s = build_scenario(&ScenarioSpec::HalfplaneStrip { h: 0.5, depth: 3 }).unwrap();
        let ends = crate::ends::build_ends(&s.exhaustion, 2).unwrap();
        assert_eq!(ends.len(), 2);
    }

    #[test]
    fn bump_sum_first_term() {
        // n=1, p=3, J=0: analytic term = omega_1 = 2
        let r = bump_sum_energy(1, 3.0, 0, 0.05).unwrap();
        assert!((r.analytic_partial_sum - 2.0).abs() < 1e-12);
        assert!(r.relative_error < 0.05, "err {}", r.relative_error);
    }

    #[test]
    fn bump_sum_ratio_is_quarter() {
        let r = bump_sum_energy(1, 3.0, 2, 0.05).unwrap();
        // consecutive analytic terms shrink by 2^{n-p} = 1/4
        let ratio = r.per_bump[1].1 / r.per_bump[0].1;
        assert!((ratio - 0.25).abs() < 1e-12);
        let dratio = r.per_bump[1].0 / r.per_bump[0].0;
        assert!((dratio - 0.25).abs() < 0.05 * 0.25, "discrete ratio {dratio}");
    }

    #[test]
    fn bump_sum_no_bumps_zero_energy() {
        let r = bump_sum_energy(1, 3.0, -1, 0.1).unwrap();
        assert_eq!(r.discrete_energy, 0.0);
        assert_eq!(r.analytic_partial_sum, 0.0);
    }

    #[test]
    fn bump_sum_rejects_p_below_dim() {
        assert!(bump_sum_energy(1, 1.0, 1, 0.1).is_err());
        assert!(matches!(
            bump_sum_energy(1, 0.9, 1, 0.1),
            Err(Error::BadExponent(_))
        ));
    }
}
