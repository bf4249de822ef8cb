//! Discrete p-energy, p-harmonic Dirichlet solves, Dirichlet capacity and
//! p-harmonic extensions on truncations.
//!
//! The Dirichlet solver is cyclic coordinate descent over the free nodes.
//! Each one-dimensional subproblem `min_t sum_j mu_j (|t - u_j| / len_j)^p`
//! is convex for every p > 1 and is solved by bisection on its subgradient
//! (closed form for p = 2, where the minimizer is the stiffness-weighted
//! mean). After every sweep an exact line search along the difference of the
//! last two iterates is taken and the result is clamped to the boundary
//! hull; both steps keep the sweep energy nonincreasing and preserve the
//! discrete maximum principle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exhaustion::Exhaustion;
use crate::graph::{distances_with, MetricGraph, NodeId, NodeSet};

/// Node potential on a graph. The per-edge gradient `|u(x)-u(y)| / len` is
/// always recomputed from the values, never stored.
#[derive(Debug, Clone)]
pub struct PotentialField {
    graph: Arc<MetricGraph>,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn new(graph: Arc<MetricGraph>, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.node_count() {
            return Err(Error::Malformed(format!(
                "field has {} values for {} nodes",
                values.len(),
                graph.node_count()
            )));
        }
        Ok(PotentialField { graph, values })
    }

    pub fn constant(graph: Arc<MetricGraph>, c: f64) -> Self {
        let n = graph.node_count();
        PotentialField {
            graph,
            values: vec![c; n],
        }
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, id: NodeId) -> Result<f64> {
        Ok(self.values[self.graph.index_of(id)? as usize])
    }

    /// Gradient on edge `ei`: `|u(x) - u(y)| / len`.
    pub fn gradient(&self, ei: usize) -> f64 {
        let e = &self.graph.edges()[ei];
        let iu = self.graph.index_of(e.u).unwrap() as usize;
        let iv = self.graph.index_of(e.v).unwrap() as usize;
        (self.values[iu] - self.values[iv]).abs() / e.len
    }

    pub fn gradients(&self) -> Vec<f64> {
        (0..self.graph.edge_count())
            .map(|ei| self.gradient(ei))
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// max |u - v| over shared node ids.
    pub fn sup_diff_on(&self, other: &PotentialField, nodes: &NodeSet) -> Result<f64> {
        let mut m: f64 = 0.0;
        for id in nodes.iter() {
            m = m.max((self.value(id)? - other.value(id)?).abs());
        }
        Ok(m)
    }
}

/// Discrete p-energy `sum_e mu(e) g_u(e)^p`. Zero iff u is constant.
pub fn p_energy(field: &PotentialField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let g = field.graph();
    let mut total = 0.0;
    for (ei, e) in g.edges().iter().enumerate() {
        total += e.mu * field.gradient(ei).powf(p);
    }
    Ok(total)
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    Ok(())
}

/// Dirichlet problem: fixed values on a nonempty boundary set, exponent
/// p > 1, stationarity tolerance.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub boundary: Vec<(NodeId, f64)>,
    pub p: f64,
    pub tol: f64,
}

impl DirichletProblem {
    pub fn new(boundary: Vec<(NodeId, f64)>, p: f64, tol: f64) -> Self {
        DirichletProblem { boundary, p, tol }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SweepRow {
    pub sweep: u32,
    pub energy: f64,
    pub residual: f64,
}

/// Converged solve together with its convergence evidence.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: PotentialField,
    pub energy: f64,
    pub residual: f64,
    pub sweeps: u32,
    pub log: Vec<SweepRow>,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Warm start; full value vector in dense node order.
    pub init: Option<Vec<f64>>,
    pub max_sweeps: Option<u32>,
    pub record_log: bool,
}

const DEFAULT_MAX_SWEEPS: u32 = 200_000;

/// x^p for x >= 0, with fast paths for the common exponents.
#[inline]
fn pow_p(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.5 {
        x * x.sqrt()
    } else if p == 3.0 {
        x * x * x
    } else if p == 4.0 {
        let s = x * x;
        s * s
    } else {
        x.powf(p)
    }
}

/// |d|^e * sign(d), with fast paths.
#[inline]
fn pow_signed(d: f64, e: f64) -> f64 {
    if e == 1.0 {
        d
    } else if e == 0.5 {
        d.abs().sqrt().copysign(d)
    } else if e == 2.0 {
        (d * d).copysign(d)
    } else if e == 3.0 {
        d * d * d
    } else {
        d.abs().powf(e).copysign(d)
    }
}

struct Workspace<'g> {
    g: &'g MetricGraph,
    p: f64,
    pm1: f64,
    /// mu / len^p per edge
    stiff: Vec<f64>,
    free: Vec<u32>,
    /// dense node index -> position in `free` (u32::MAX for boundary nodes)
    free_index: Vec<u32>,
    /// flattened adjacency of the free nodes: [adj_off[i]..adj_off[i+1])
    adj_off: Vec<u32>,
    adj_nbr: Vec<u32>,
    adj_edge: Vec<u32>,
    adj_stiff: Vec<f64>,
    /// per-free-node magnitude of the last update, to seed bisection brackets
    last_delta: Vec<f64>,
    hull: (f64, f64),
    /// nodes with |p * dphi| at or below this are left untouched in a sweep
    skip: f64,
}

impl<'g> Workspace<'g> {
    fn new(g: &'g MetricGraph, p: f64, boundary: &[(NodeId, f64)], tol: f64) -> Result<Self> {
        check_exponent(p)?;
        let mut fixed = vec![false; g.node_count()];
        for &(id, v) in boundary {
            if !v.is_finite() {
                return Err(Error::NonFiniteBoundary(id));
            }
            fixed[g.index_of(id)? as usize] = true;
        }
        let free: Vec<u32> = (0..g.node_count() as u32)
            .filter(|&i| !fixed[i as usize])
            .collect();
        let stiff: Vec<f64> = g.edges().iter().map(|e| e.mu / pow_p(e.len, p)).collect();
        let mut adj_off = Vec::with_capacity(free.len() + 1);
        let mut adj_nbr = Vec::new();
        let mut adj_edge = Vec::new();
        let mut adj_stiff = Vec::new();
        adj_off.push(0);
        for &x in &free {
            for &(ei, nbr) in g.adjacency(x) {
                adj_nbr.push(nbr);
                adj_edge.push(ei);
                adj_stiff.push(stiff[ei as usize]);
            }
            adj_off.push(adj_nbr.len() as u32);
        }
        let last_delta = vec![f64::INFINITY; free.len()];
        let mut free_index = vec![u32::MAX; g.node_count()];
        for (fi, &x) in free.iter().enumerate() {
            free_index[x as usize] = fi as u32;
        }
        Ok(Workspace {
            g,
            p,
            pm1: p - 1.0,
            stiff,
            free,
            free_index,
            adj_off,
            adj_nbr,
            adj_edge,
            adj_stiff,
            last_delta,
            hull: (0.0, 0.0),
            skip: 0.05 * tol,
        })
    }

    /// Linearized (Kacanov) correction for 1 < p < 2: freeze conductivities
    /// c_e = stiff_e (|du|^2 + eps^2)^{(p-2)/2} and minimize the resulting
    /// quadratic form, which majorizes the p-energy up to a constant. The
    /// quadratic is solved by Jacobi-preconditioned conjugate gradients on
    /// the free nodes; the caller adopts the candidate only if the true
    /// p-energy decreases.
    fn kacanov_candidate(&self, u: &[f64]) -> Vec<f64> {
        let (hlo, hhi) = self.hull;
        let width = (hhi - hlo).abs() + 1e-30;
        let eps = 1e-10 * width;
        let expo = (self.p - 2.0) / 2.0;
        let mut cond = vec![0.0; self.g.edge_count()];
        for (ei, e) in self.g.edges().iter().enumerate() {
            let iu = self.g.index_of(e.u).unwrap() as usize;
            let iv = self.g.index_of(e.v).unwrap() as usize;
            let d = u[iu] - u[iv];
            cond[ei] = self.stiff[ei] * (d * d + eps * eps).powf(expo);
        }
        let nf = self.free.len();
        // rhs from boundary neighbors, diagonal from all incident edges
        let mut diag = vec![0.0; nf];
        let mut b = vec![0.0; nf];
        for fi in 0..nf {
            let a = self.adj_off[fi] as usize;
            let z = self.adj_off[fi + 1] as usize;
            for k in a..z {
                let c = cond[self.adj_edge[k] as usize];
                diag[fi] += c;
                let nbr = self.adj_nbr[k] as usize;
                if self.free_index[nbr] == u32::MAX {
                    b[fi] += c * u[nbr];
                }
            }
        }
        let matvec = |x: &[f64], out: &mut [f64]| {
            for fi in 0..nf {
                let a = self.adj_off[fi] as usize;
                let z = self.adj_off[fi + 1] as usize;
                let mut s = diag[fi] * x[fi];
                for k in a..z {
                    let nbr = self.adj_nbr[k] as usize;
                    let fj = self.free_index[nbr];
                    if fj != u32::MAX {
                        s -= cond[self.adj_edge[k] as usize] * x[fj as usize];
                    }
                }
                out[fi] = s;
            }
        };
        // PCG, warm-started from the current free values
        let mut x: Vec<f64> = self.free.iter().map(|&i| u[i as usize]).collect();
        let mut r = vec![0.0; nf];
        matvec(&x, &mut r);
        for fi in 0..nf {
            r[fi] = b[fi] - r[fi];
        }
        let b_scale: f64 = b
            .iter()
            .zip(&diag)
            .map(|(bi, d)| (bi / d.max(1e-300)).abs())
            .fold(width, f64::max);
        let mut z: Vec<f64> = r
            .iter()
            .zip(&diag)
            .map(|(ri, d)| ri / d.max(1e-300))
            .collect();
        let mut pdir = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let mut ap = vec![0.0; nf];
        let max_iters = 4000.min(4 * nf.max(1));
        for _ in 0..max_iters {
            let r_inf = r
                .iter()
                .zip(&diag)
                .map(|(ri, d)| (ri / d.max(1e-300)).abs())
                .fold(0.0f64, f64::max);
            if r_inf <= 1e-13 * b_scale {
                break;
            }
            matvec(&pdir, &mut ap);
            let pap: f64 = pdir.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for fi in 0..nf {
                x[fi] += alpha * pdir[fi];
                r[fi] -= alpha * ap[fi];
            }
            for fi in 0..nf {
                z[fi] = r[fi] / diag[fi].max(1e-300);
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz.max(1e-300);
            rz = rz_new;
            for fi in 0..nf {
                pdir[fi] = z[fi] + beta * pdir[fi];
            }
        }
        // only free entries move; clamping keeps the maximum principle
        let mut v = u.to_vec();
        for (fi, &node) in self.free.iter().enumerate() {
            v[node as usize] = x[fi].clamp(hlo, hhi);
        }
        v
    }

    #[inline]
    fn nbrs(&self, fi: usize) -> (&[u32], &[f64]) {
        let a = self.adj_off[fi] as usize;
        let b = self.adj_off[fi + 1] as usize;
        (&self.adj_nbr[a..b], &self.adj_stiff[a..b])
    }

    /// Subgradient of the nodal objective, up to the constant factor p.
    #[inline]
    fn dphi(&self, u: &[f64], fi: usize, t: f64) -> f64 {
        let (nbrs, ws) = self.nbrs(fi);
        let mut s = 0.0;
        for (nbr, w) in nbrs.iter().zip(ws) {
            s += w * pow_signed(t - u[*nbr as usize], self.pm1);
        }
        s
    }

    /// One cyclic sweep of exact nodal minimizations. Nodes whose residual
    /// is already far below tolerance are skipped. Returns the largest
    /// update magnitude.
    fn sweep(&mut self, u: &mut [f64]) -> f64 {
        let mut max_delta = 0.0f64;
        for fi in 0..self.free.len() {
            let x = self.free[fi] as usize;
            let (nbrs, ws) = self.nbrs(fi);
            if nbrs.is_empty() {
                continue;
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let t_new = if self.p == 2.0 {
                let mut num = 0.0;
                let mut den = 0.0;
                for (nbr, w) in nbrs.iter().zip(ws) {
                    let v = u[*nbr as usize];
                    num += w * v;
                    den += w;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                (num / den).clamp(lo, hi)
            } else {
                for nbr in nbrs {
                    let v = u[*nbr as usize];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if lo == hi {
                    lo
                } else {
                    let t0 = u[x].clamp(lo, hi);
                    let d0 = self.dphi(u, fi, t0);
                    if (self.p * d0).abs() <= self.skip {
                        u[x] = t0;
                        continue;
                    }
                    self.bisect(u, fi, t0, d0, lo, hi)
                }
            };
            let delta = (t_new - u[x]).abs();
            if delta > 0.0 {
                self.last_delta[fi] = delta;
            }
            max_delta = max_delta.max(delta);
            u[x] = t_new;
        }
        max_delta
    }

    /// Bisection on the monotone subgradient, starting from a bracket seeded
    /// by the last update size and grown geometrically until it straddles
    /// the root.
    fn bisect(&self, u: &[f64], fi: usize, t0: f64, d0: f64, lo: f64, hi: f64) -> f64 {
        let scale = 1.0 + lo.abs().max(hi.abs());
        let mut step = self.last_delta[fi];
        if !step.is_finite() || step <= 0.0 {
            step = hi - lo;
        }
        step = step.max(1e-14 * scale);
        let (mut a, mut b);
        if d0 > 0.0 {
            // minimizer lies below t0
            b = t0;
            a = (t0 - step).max(lo);
            let mut guard = 0;
            while a > lo && self.dphi(u, fi, a) > 0.0 && guard < 60 {
                b = a;
                step *= 8.0;
                a = (t0 - step).max(lo);
                guard += 1;
            }
        } else {
            a = t0;
            b = (t0 + step).min(hi);
            let mut guard = 0;
            while b < hi && self.dphi(u, fi, b) < 0.0 && guard < 60 {
                a = b;
                step *= 8.0;
                b = (t0 + step).min(hi);
                guard += 1;
            }
        }
        let mut iter = 0;
        while b - a > 1e-16 * scale && iter < 90 {
            let mid = 0.5 * (a + b);
            if self.dphi(u, fi, mid) > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
            iter += 1;
        }
        0.5 * (a + b)
    }

    fn max_residual(&self, u: &[f64]) -> f64 {
        let mut r: f64 = 0.0;
        for fi in 0..self.free.len() {
            let x = self.free[fi] as usize;
            r = r.max((self.p * self.dphi(u, fi, u[x])).abs());
        }
        r
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let mut total = 0.0;
        for (ei, e) in self.g.edges().iter().enumerate() {
            let iu = self.g.index_of(e.u).unwrap() as usize;
            let iv = self.g.index_of(e.v).unwrap() as usize;
            total += self.stiff[ei] * pow_p((u[iu] - u[iv]).abs(), self.p);
        }
        total
    }
}

/// Anderson mixing over the sweep fixed-point map, depth-limited history.
/// Candidates that fail to decrease the energy relative to the plain sweep
/// are rejected, so acceleration never costs monotonicity.
struct Anderson {
    m: usize,
    fs: Vec<Vec<f64>>,
    gs: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(m: usize) -> Self {
        Anderson {
            m,
            fs: Vec::new(),
            gs: Vec::new(),
        }
    }

    fn push(&mut self, f: Vec<f64>, g: Vec<f64>) {
        self.fs.push(f);
        self.gs.push(g);
        if self.fs.len() > self.m {
            self.fs.remove(0);
            self.gs.remove(0);
        }
    }

    /// Mixed candidate from the current (f, g) and the stored history.
    fn candidate(&self, f: &[f64], g: &[f64]) -> Option<Vec<f64>> {
        let h = self.fs.len();
        if h < 2 {
            return None;
        }
        let cols = h - 1;
        // least squares || f - sum gamma_j (f_{j+1} - f_j) ||
        let mut ata = vec![0.0; cols * cols];
        let mut atb = vec![0.0; cols];
        let n = f.len();
        for i in 0..cols {
            for j in i..cols {
                let mut s = 0.0;
                for k in 0..n {
                    let di = self.fs[i + 1][k] - self.fs[i][k];
                    let dj = self.fs[j + 1][k] - self.fs[j][k];
                    s += di * dj;
                }
                ata[i * cols + j] = s;
                ata[j * cols + i] = s;
            }
            let mut s = 0.0;
            for k in 0..n {
                s += (self.fs[i + 1][k] - self.fs[i][k]) * f[k];
            }
            atb[i] = s;
        }
        let gamma = solve_small(&mut ata, &mut atb, cols)?;
        let mut out = g.to_vec();
        for (j, gj) in gamma.iter().enumerate() {
            for k in 0..n {
                out[k] -= gj * (self.gs[j + 1][k] - self.gs[j][k]);
            }
        }
        Some(out)
    }
}

/// Gaussian elimination with partial pivoting for the tiny Anderson system.
fn solve_small(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-30 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / d;
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in (col + 1)..n {
            s -= a[col * n + c] * x[c];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// Deterministic initialization: inverse-graph-distance weighting of the
/// distinct boundary values (one multi-source Dijkstra per value group).
fn idw_init(g: &MetricGraph, boundary: &[(NodeId, f64)]) -> Result<Vec<f64>> {
    let mut groups: Vec<(f64, NodeSet)> = Vec::new();
    for &(id, v) in boundary {
        match groups.iter_mut().find(|(gv, _)| *gv == v) {
            Some((_, set)) => *set = set.union(&NodeSet::singleton(id)),
            None => groups.push((v, NodeSet::singleton(id))),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dists: Vec<(f64, Vec<f64>)> = groups
        .iter()
        .map(|(v, set)| Ok((*v, distances_with(g, set, None)?)))
        .collect::<Result<_>>()?;
    let mut u = vec![0.0; g.node_count()];
    'node: for i in 0..g.node_count() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (v, dist) in &dists {
            let d = dist[i];
            if d == 0.0 {
                u[i] = *v;
                continue 'node;
            }
            let w = 1.0 / d;
            num += w * v;
            den += w;
        }
        u[i] = if den > 0.0 { num / den } else { 0.0 };
    }
    Ok(u)
}

fn run_sweeps(
    ws: &mut Workspace<'_>,
    g_arc: &Arc<MetricGraph>,
    mut u: Vec<f64>,
    tol: f64,
    opts: &SolveOptions,
) -> Result<Solution> {
    let max_sweeps = opts.max_sweeps.unwrap_or(DEFAULT_MAX_SWEEPS);
    let (hlo, hhi) = ws.hull;
    // updates at rounding-noise level mean the iterate is a floating-point
    // fixed point; if the residual still exceeds tol there, it never will
    // (for p < 2 the nodal residual has a rounding floor ~ |noise|^(p-1))
    let noise = 1e-12 * ((hhi - hlo).abs() + 1e-300);
    let mut stagnant = 0u32;
    let mut log = Vec::new();
    let mut prev_energy = ws.energy(&u);
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    let mut anderson = Anderson::new(4);
    if opts.record_log {
        log.push(SweepRow {
            sweep: 0,
            energy: prev_energy,
            residual: ws.max_residual(&u),
        });
    }
    loop {
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                residual: ws.max_residual(&u),
            });
        }
        let mut g = u.clone();
        let max_delta = ws.sweep(&mut g);
        let f: Vec<f64> = g.iter().zip(&u).map(|(a, b)| a - b).collect();
        let energy_g = ws.energy(&g);
        let mut next = g.clone();
        let mut energy = energy_g;
        if let Some(mut cand) = anderson.candidate(&f, &g) {
            for v in cand.iter_mut() {
                *v = v.clamp(hlo, hhi);
            }
            // boundary entries are identical in u and g; keep them exact
            let e_cand = ws.energy(&cand);
            if e_cand <= energy_g {
                next = cand;
                energy = e_cand;
            }
        }
        anderson.push(f, g);
        // linearized (frozen-conductivity) correction: exact for p = 2, a
        // majorizer for p < 2, and a damped heuristic for p > 2; in every
        // case it is adopted only when the true energy decreases
        if sweeps % 4 == 1 {
            let cand = ws.kacanov_candidate(&next);
            let mut theta = 1.0;
            for _ in 0..3 {
                let trial: Vec<f64> = if theta == 1.0 {
                    cand.clone()
                } else {
                    next.iter()
                        .zip(&cand)
                        .map(|(a, b)| a + theta * (b - a))
                        .collect()
                };
                let e_trial = ws.energy(&trial);
                if e_trial < energy {
                    next = trial;
                    energy = e_trial;
                    anderson = Anderson::new(anderson.m);
                    break;
                }
                theta *= 0.5;
            }
        }
        u = next;
        sweeps += 1;
        let rel_drop = (prev_energy - energy).max(0.0) / energy.max(1e-300);
        stagnant = if max_delta <= noise && rel_drop <= 1e-14 {
            stagnant + 1
        } else {
            0
        };
        // the residual pass costs a sweep, so only check when plausible
        let check = max_delta <= 16.0 * tol || rel_drop <= tol * tol || sweeps % 8 == 0;
        if check {
            residual = ws.max_residual(&u);
        }
        if opts.record_log {
            log.push(SweepRow {
                sweep: sweeps,
                energy,
                residual: if check { residual } else { f64::NAN },
            });
        }
        if check && residual <= tol && rel_drop <= tol * tol {
            let field = PotentialField {
                graph: g_arc.clone(),
                values: u,
            };
            return Ok(Solution {
                field,
                energy,
                residual,
                sweeps,
                log,
            });
        }
        if stagnant >= 12 {
            // floating-point fixed point: every nodal subproblem is solved
            // to machine accuracy and no representable iterate improves on
            // this one. For p < 2 the nodal residual |du|^(p-1) has a
            // rounding floor, so `tol` below that floor is unattainable;
            // return the fixed point with the achieved residual reported.
            let residual = ws.max_residual(&u);
            let field = PotentialField {
                graph: g_arc.clone(),
                values: u,
            };
            return Ok(Solution {
                field,
                energy,
                residual,
                sweeps,
                log,
            });
        }
        prev_energy = energy;
    }
}

/// Minimizer of the p-energy over fields agreeing with the boundary data.
/// Deterministic; min/max of the result are attained on the boundary.
pub fn solve_p_harmonic(g: &Arc<MetricGraph>, prob: &DirichletProblem) -> Result<PotentialField> {
    Ok(solve_with(g, prob, &SolveOptions::default())?.field)
}

pub fn solve_with(
    g: &Arc<MetricGraph>,
    prob: &DirichletProblem,
    opts: &SolveOptions,
) -> Result<Solution> {
    if prob.boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut ws = Workspace::new(g, prob.p, &prob.boundary, prob.tol)?;
    let bmin = prob
        .boundary
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let bmax = prob
        .boundary
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    ws.hull = (bmin, bmax);
    let mut u = match &opts.init {
        Some(init) => {
            if init.len() != g.node_count() {
                return Err(Error::Malformed("init length mismatch".into()));
            }
            init.iter().map(|v| v.clamp(bmin, bmax)).collect()
        }
        None => {
            let mut u = idw_init(g, &prob.boundary)?;
            // harmonic interpolation: on larger graphs with p != 2, refine
            // the distance-weighted start by a cheap 2-harmonic pre-solve so
            // the nonlinear sweeps start with the right plateau structure
            if prob.p != 2.0 && ws.free.len() > 200 {
                let mut pre = Workspace::new(g, 2.0, &prob.boundary, 1e-6)?;
                pre.hull = (bmin, bmax);
                for &(id, v) in &prob.boundary {
                    u[g.index_of(id)? as usize] = v;
                }
                let pre_opts = SolveOptions {
                    max_sweeps: Some(20_000),
                    ..Default::default()
                };
                if let Ok(sol) = run_sweeps(&mut pre, g, u.clone(), 1e-6, &pre_opts) {
                    u = sol.field.values;
                }
            }
            u
        }
    };
    for &(id, v) in &prob.boundary {
        u[g.index_of(id)? as usize] = v;
    }
    run_sweeps(&mut ws, g, u, prob.tol, opts)
}

/// Free problem (no boundary): the only stationary fields are constants.
/// Started from any field, coordinate descent flows to a constant.
pub fn solve_free(
    g: &Arc<MetricGraph>,
    p: f64,
    tol: f64,
    init: Vec<f64>,
    opts: &SolveOptions,
) -> Result<Solution> {
    let mut ws = Workspace::new(g, p, &[], tol)?;
    let lo = init.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = init.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ws.hull = (lo, hi);
    if init.len() != g.node_count() {
        return Err(Error::Malformed("init length mismatch".into()));
    }
    run_sweeps(&mut ws, g, init, tol, opts)
}

/// Dirichlet capacity of the disjoint pair (E, F): minimal p-energy among
/// potentials equal to 1 on E and 0 on F; the witness is the minimizer.
#[derive(Debug, Clone)]
pub struct Capacity {
    pub value: f64,
    pub witness: PotentialField,
}

pub fn capacity(
    g: &Arc<MetricGraph>,
    e: &NodeSet,
    f: &NodeSet,
    p: f64,
    tol: f64,
) -> Result<Capacity> {
    capacity_with(g, e, f, p, tol, &SolveOptions::default())
}

pub fn capacity_with(
    g: &Arc<MetricGraph>,
    e: &NodeSet,
    f: &NodeSet,
    p: f64,
    tol: f64,
    opts: &SolveOptions,
) -> Result<Capacity> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptySet);
    }
    if !e.is_disjoint(f) {
        return Err(Error::OverlappingSets);
    }
    let mut boundary: Vec<(NodeId, f64)> = e.iter().map(|id| (id, 1.0)).collect();
    boundary.extend(f.iter().map(|id| (id, 0.0)));
    let prob = DirichletProblem::new(boundary, p, tol);
    let sol = solve_with(g, &prob, opts)?;
    Ok(Capacity {
        value: sol.energy,
        witness: sol.field,
    })
}

/// Boundary data for a p-harmonic extension: prescribed sets with values.
#[derive(Debug, Clone)]
pub struct ExtensionSpec {
    pub prescribed: Vec<(NodeSet, f64)>,
    pub level: u32,
    pub p: f64,
    pub tol: f64,
}

/// Comparison against the next-coarser truncation, for stabilization
/// monitoring.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoarseDiff {
    pub level: u32,
    pub energy: f64,
    pub sup_diff_shared: f64,
    pub sup_diff_base_ball: f64,
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub field: PotentialField,
    pub energy: f64,
    pub level: u32,
    pub coarse: Option<CoarseDiff>,
}

/// p-harmonic extension on a truncation: stationary at every node outside
/// the prescribed sets; no condition is imposed at the truncation frontier
/// (free/natural boundary). Reports the change relative to the coarser
/// truncation so callers can monitor stabilization.
pub fn harmonic_extension(ex: &Exhaustion, spec: &ExtensionSpec) -> Result<Extension> {
    let g = ex.graph(spec.level)?;
    let boundary = extension_boundary(&g, spec, spec.level)?;
    if boundary.len() == g.node_count() {
        // prescribed sets cover all nodes: the extension is the data itself
        let mut values = vec![0.0; g.node_count()];
        for &(id, v) in &boundary {
            values[g.index_of(id)? as usize] = v;
        }
        let field = PotentialField::new(g.clone(), values)?;
        let energy = p_energy(&field, spec.p)?;
        return Ok(Extension {
            field,
            energy,
            level: spec.level,
            coarse: None,
        });
    }

    let coarse_sol = if spec.level > 1 {
        let gc = ex.graph(spec.level - 1)?;
        match extension_boundary(&gc, spec, spec.level - 1) {
            Ok(b) if !b.is_empty() && b.len() < gc.node_count() => {
                let prob = DirichletProblem::new(b, spec.p, spec.tol);
                solve_with(&gc, &prob, &SolveOptions::default()).ok()
            }
            _ => None,
        }
    } else {
        None
    };

    let opts = SolveOptions {
        init: coarse_sol
            .as_ref()
            .map(|s| transfer_values(&s.field, &g, &boundary)),
        ..Default::default()
    };
    let prob = DirichletProblem::new(boundary, spec.p, spec.tol);
    let sol = solve_with(&g, &prob, &opts)?;

    let coarse = match coarse_sol {
        Some(cs) => {
            let shared = cs.field.graph().all_nodes();
            let sup_shared = sol.field.sup_diff_on(&cs.field, &shared)?;
            let r1 = ex.radius(1)?;
            let b1 = crate::graph::ball(&g, ex.base(), r1)?;
            let sup_ball = sol.field.sup_diff_on(&cs.field, &b1)?;
            Some(CoarseDiff {
                level: spec.level - 1,
                energy: cs.energy,
                sup_diff_shared: sup_shared,
                sup_diff_base_ball: sup_ball,
            })
        }
        None => None,
    };
    Ok(Extension {
        field: sol.field,
        energy: sol.energy,
        level: spec.level,
        coarse,
    })
}

fn extension_boundary(
    g: &MetricGraph,
    spec: &ExtensionSpec,
    level: u32,
) -> Result<Vec<(NodeId, f64)>> {
    let mut boundary = Vec::new();
    for (set, v) in &spec.prescribed {
        for id in set.iter() {
            if !g.contains(id) {
                return Err(Error::SetsOutsideTruncation(level));
            }
            boundary.push((id, *v));
        }
    }
    boundary.sort_by_key(|(id, _)| *id);
    boundary.dedup_by_key(|(id, _)| *id);
    Ok(boundary)
}

/// Carries values from a solve on a coarser truncation onto a deeper graph:
/// shared nodes copy their value, new nodes take the value of the nearest
/// node that has one.
pub fn transfer_values(
    from: &PotentialField,
    to: &MetricGraph,
    boundary: &[(NodeId, f64)],
) -> Vec<f64> {
    let n = to.node_count();
    let mut values = vec![f64::NAN; n];
    let mut known: Vec<NodeId> = Vec::new();
    for (i, &id) in to.ids().iter().enumerate() {
        if let Ok(v) = from.value(id) {
            values[i] = v;
            known.push(id);
        }
    }
    for &(id, v) in boundary {
        if let Ok(i) = to.index_of(id) {
            if values[i as usize].is_nan() {
                known.push(id);
            }
            values[i as usize] = v;
        }
    }
    if known.is_empty() {
        return vec![0.0; n];
    }
    // nearest-known fill by multi-source Dijkstra with source tracking
    let known_set = NodeSet::new(known);
    let dist = distances_with(to, &known_set, None).unwrap_or_else(|_| vec![0.0; n]);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| dist[a as usize].total_cmp(&dist[b as usize]).then(a.cmp(&b)));
    for x in order {
        if values[x as usize].is_nan() {
            // nearest already-filled neighbor in distance order
            let mut best: Option<(f64, f64)> = None;
            for &(_, nbr) in to.adjacency(x) {
                let v = values[nbr as usize];
                if !v.is_nan() {
                    let d = dist[nbr as usize];
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, v));
                    }
                }
            }
            values[x as usize] = best.map(|(_, v)| v).unwrap_or(0.0);
        }
    }
    values
}
