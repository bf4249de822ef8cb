//! File formats: graphs, node sets, boundary specs, exhaustions and
//! scenario specs as JSON documents (reals round-trip exactly through the
//! shortest-representation encoder), plus CSV and SVG emitters for data
//! series.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exhaustion::{Exhaustion, RadiusSchedule};
use crate::graph::{MetricGraph, NodeId, NodeSet};
use crate::scenarios::{build_scenario, Scenario, ScenarioSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pos: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub u: u64,
    pub v: u64,
    pub len: f64,
    pub mu: f64,
}

/// On-disk graph document: `{ "nodes": [{id, pos?}], "edges": [{u, v, len, mu}] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
}

impl GraphFile {
    pub fn from_graph(g: &MetricGraph) -> Self {
        GraphFile {
            nodes: g
                .ids()
                .iter()
                .map(|&id| NodeEntry {
                    id: id.0,
                    pos: g
                        .position(id)
                        .filter(|p| p[0].is_finite() && p[1].is_finite()),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeEntry {
                    u: e.u.0,
                    v: e.v.0,
                    len: e.len,
                    mu: e.mu,
                })
                .collect(),
        }
    }

    pub fn into_graph(self) -> Result<MetricGraph> {
        MetricGraph::new(
            self.nodes
                .into_iter()
                .map(|n| (NodeId(n.id), n.pos))
                .collect(),
            self.edges
                .into_iter()
                .map(|e| (NodeId(e.u), NodeId(e.v), e.len, e.mu))
                .collect(),
        )
    }
}

pub fn read_graph(path: &Path) -> Result<MetricGraph> {
    let text = std::fs::read_to_string(path)?;
    let file: GraphFile = serde_json::from_str(&text)?;
    file.into_graph()
}

pub fn write_graph(path: &Path, g: &MetricGraph) -> Result<()> {
    let file = GraphFile::from_graph(g);
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Node-set document: a JSON array of node ids.
pub fn read_node_set(path: &Path) -> Result<NodeSet> {
    let text = std::fs::read_to_string(path)?;
    let ids: Vec<u64> = serde_json::from_str(&text)?;
    Ok(ids.into_iter().map(NodeId).collect())
}

pub fn write_node_set(path: &Path, s: &NodeSet) -> Result<()> {
    let ids: Vec<u64> = s.iter().map(|id| id.0).collect();
    std::fs::write(path, serde_json::to_string(&ids)?)?;
    Ok(())
}

/// Boundary spec document: array of `{node, value}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub node: u64,
    pub value: f64,
}

pub fn read_boundary(path: &Path) -> Result<Vec<(NodeId, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let entries: Vec<BoundaryEntry> = serde_json::from_str(&text)?;
    Ok(entries
        .into_iter()
        .map(|e| (NodeId(e.node), e.value))
        .collect())
}

/// Exhaustion document: either a scenario reference or an explicit list of
/// graph documents plus a radius schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExhaustionFile {
    Scenario { scenario: ScenarioSpec },
    Explicit {
        base: u64,
        radii: Vec<f64>,
        graphs: Vec<GraphFile>,
    },
}

pub fn read_exhaustion(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let file: ExhaustionFile = serde_json::from_str(&text)?;
    match file {
        ExhaustionFile::Scenario { scenario } => build_scenario(&scenario),
        ExhaustionFile::Explicit {
            base,
            radii,
            graphs,
        } => {
            let graphs: Vec<MetricGraph> = graphs
                .into_iter()
                .map(|g| g.into_graph())
                .collect::<Result<_>>()?;
            let ex = Exhaustion::from_graphs(
                NodeId(base),
                RadiusSchedule::Explicit(radii),
                graphs,
            )?;
            Ok(Scenario {
                exhaustion: ex,
                chains: Vec::new(),
            })
        }
    }
}

pub fn read_scenario_spec(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// CSV writer for uniform rows. The header is written verbatim.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Density dump: CSV with edge endpoints and the density value.
pub fn write_density_csv(path: &Path, g: &MetricGraph, rho: &[f64]) -> Result<()> {
    if rho.len() != g.edge_count() {
        return Err(Error::Malformed("density length mismatch".into()));
    }
    let mut out = String::from("u,v,rho\n");
    for (e, r) in g.edges().iter().zip(rho) {
        out.push_str(&format!("{},{},{r}\n", e.u, e.v));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Active-path dump: one node-id sequence per line.
pub fn write_paths(path: &Path, paths: &[Vec<NodeId>]) -> Result<()> {
    let mut out = String::new();
    for p in paths {
        let cells: Vec<String> = p.iter().map(|id| id.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Minimal static SVG rendering of one or more (x, y) series as polylines
/// on log-y axes, for a_n decay plots.
pub fn write_decay_svg(path: &Path, series: &[(&str, Vec<(f64, f64)>)]) -> Result<()> {
    let (w, h) = (640.0, 400.0);
    let margin = 50.0;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (_, s) in series {
        pts.extend(s.iter().filter(|(_, y)| *y > 0.0).copied());
    }
    if pts.is_empty() {
        std::fs::write(path, "<svg xmlns=\"http://www.w3.org/2000/svg\"/>")?;
        return Ok(());
    }
    let (xmin, xmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| {
            (a.min(*x), b.max(*x))
        });
    let (ymin, ymax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, y)| {
            (a.min(y.ln()), b.max(y.ln()))
        });
    let xspan = (xmax - xmin).max(1e-9);
    let yspan = (ymax - ymin).max(1e-9);
    let sx = |x: f64| margin + (x - xmin) / xspan * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y.ln() - ymin) / yspan * (h - 2.0 * margin);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <line x1=\"{m}\" y1=\"{yb}\" x2=\"{xr}\" y2=\"{yb}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{yb}\" stroke=\"black\"/>\n",
        m = margin,
        yb = h - margin,
        xr = w - margin,
    );
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
    for (si, (name, s)) in series.iter().enumerate() {
        let color = colors[si % colors.len()];
        let path_d: Vec<String> = s
            .iter()
            .filter(|(_, y)| *y > 0.0)
            .enumerate()
            .map(|(i, (x, y))| {
                format!("{}{:.2},{:.2}", if i == 0 { "M" } else { "L" }, sx(*x), sy(*y))
            })
            .collect();
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path_d.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-size=\"12\">{name}</text>\n",
            w - margin - 120.0,
            margin + 16.0 * si as f64,
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
