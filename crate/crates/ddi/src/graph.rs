//! The labeled dependence graph and its renderings.
//!
//! Nodes are the concrete memory locations a program touches plus the two
//! sentinels `PR` (program constants) and `HU` (hardware units). A solid
//! edge r → w labeled k records that instance k read r and wrote w; the
//! dashed edge of a pointer assignment records aliasing only and never
//! takes part in dependence derivation.
//!
//! Node order is first appearance in the instance stream (reads before
//! writes within one instance), then declared-but-untouched scalars and
//! pointers in declaration order, then `PR` and `HU`. Everything downstream
//! — the adjacency matrix, DOT, JSON — inherits that order, so two runs of
//! the same program are byte-identical.

use serde::Serialize;

use crate::ast::{InstanceLabel, MemLocation, Program, VarKind};
use crate::classifier::InstrAccess;
use crate::expand::ExpandedProgram;

/// One labeled edge; `src`/`dst` index [`DdiGraph::nodes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: InstanceLabel,
    pub dashed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct DdiGraph {
    pub nodes: Vec<MemLocation>,
    /// Sorted by (sequence, source, destination).
    pub edges: Vec<Edge>,
}

impl DdiGraph {
    pub fn node_index(&self, loc: &MemLocation) -> Option<usize> {
        self.nodes.iter().position(|n| n == loc)
    }

    pub fn solid_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| !e.dashed)
    }

    /// Edge set as (source, destination, label text, dashed) tuples, for
    /// comparisons that do not care about node numbering.
    pub fn edge_tuples(&self) -> Vec<(String, String, String, bool)> {
        self.edges
            .iter()
            .map(|e| {
                (
                    self.nodes[e.src].to_string(),
                    self.nodes[e.dst].to_string(),
                    e.label.to_string(),
                    e.dashed,
                )
            })
            .collect()
    }
}

/// Build the graph for an expanded program.
pub fn build_graph(prog: &Program, xp: &ExpandedProgram) -> DdiGraph {
    let mut g = DdiGraph::default();
    let intern = |g: &mut DdiGraph, loc: &MemLocation| -> usize {
        match g.node_index(loc) {
            Some(ix) => ix,
            None => {
                g.nodes.push(loc.clone());
                g.nodes.len() - 1
            }
        }
    };
    // Sentinels take the last two slots; collect variable nodes first.
    let mut edges: Vec<(MemLocation, MemLocation, InstanceLabel, bool)> = Vec::new();
    for inst in &xp.instances {
        match &inst.access {
            InstrAccess::Pair(pair) => {
                for r in &pair.reads {
                    if !r.is_sentinel() {
                        intern(&mut g, r);
                    }
                }
                for w in &pair.writes {
                    if !w.is_sentinel() {
                        intern(&mut g, w);
                    }
                }
                for w in &pair.writes {
                    for r in &pair.reads {
                        edges.push((r.clone(), w.clone(), inst.label, false));
                    }
                }
            }
            InstrAccess::Dashed { src, dst } => {
                intern(&mut g, src);
                intern(&mut g, dst);
                edges.push((src.clone(), dst.clone(), inst.label, true));
            }
            InstrAccess::None => {}
        }
    }
    for decl in &prog.decls {
        if decl.kind == VarKind::Array {
            continue; // an untouched array has no element locations
        }
        let loc = match decl.kind {
            VarKind::Pointer => MemLocation::Pointer(decl.name.clone()),
            _ => MemLocation::Scalar(decl.name.clone()),
        };
        intern(&mut g, &loc);
    }
    let pr = intern(&mut g, &MemLocation::Pr);
    let hu = intern(&mut g, &MemLocation::Hu);
    debug_assert!(pr + 1 == hu && hu + 1 == g.nodes.len());
    for (src, dst, label, dashed) in edges {
        let src = g.node_index(&src).expect("edge endpoints are interned");
        let dst = g.node_index(&dst).expect("edge endpoints are interned");
        g.edges.push(Edge { src, dst, label, dashed });
    }
    g.edges.sort_by_key(|e| (e.label.seq, e.src, e.dst));
    g
}

// ---- adjacency matrix -------------------------------------------------

/// The graph as a label matrix: `cells[r][c]` holds the labels of every edge
/// from node r to node c, in stream order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    pub order: Vec<MemLocation>,
    pub cells: Vec<Vec<Vec<InstanceLabel>>>,
}

pub fn adjacency_matrix(g: &DdiGraph) -> Matrix {
    let n = g.nodes.len();
    let mut cells = vec![vec![Vec::new(); n]; n];
    for e in &g.edges {
        cells[e.src][e.dst].push(e.label);
    }
    for row in &mut cells {
        for cell in row.iter_mut() {
            cell.sort();
        }
    }
    Matrix { order: g.nodes.clone(), cells }
}

/// Plain-text table; empty cells print as ".".
pub fn matrix_text(m: &Matrix) -> String {
    let names: Vec<String> = m.order.iter().map(|n| n.to_string()).collect();
    let rendered: Vec<Vec<String>> = m
        .cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    if cell.is_empty() {
                        ".".to_string()
                    } else {
                        cell.iter()
                            .map(|l| l.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    }
                })
                .collect()
        })
        .collect();
    let mut widths: Vec<usize> = names.iter().map(String::len).collect();
    for row in &rendered {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.len());
        }
    }
    let corner = names.iter().map(String::len).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&" ".repeat(corner));
    for (c, name) in names.iter().enumerate() {
        out.push(' ');
        out.push_str(&format!("{name:>w$}", w = widths[c]));
    }
    out.push('\n');
    for (r, name) in names.iter().enumerate() {
        out.push_str(&format!("{name:<corner$}"));
        for (c, cell) in rendered[r].iter().enumerate() {
            out.push(' ');
            out.push_str(&format!("{cell:>w$}", w = widths[c]));
        }
        out.push('\n');
    }
    out
}

// ---- DOT --------------------------------------------------------------

/// Graphviz rendering: nodes sorted by name (sentinels last), edges by
/// source, destination, then label; dashed edges marked `style=dashed`.
pub fn graph_dot(g: &DdiGraph) -> String {
    let mut nodes: Vec<&MemLocation> = g.nodes.iter().collect();
    nodes.sort();
    let mut out = String::from("digraph dependences {\n  rankdir=LR;\n");
    for n in nodes {
        out.push_str(&format!("  \"{n}\";\n"));
    }
    let mut edges: Vec<&Edge> = g.edges.iter().collect();
    edges.sort_by_key(|e| (&g.nodes[e.src], &g.nodes[e.dst], e.label.seq));
    for e in edges {
        let style = if e.dashed { ", style=dashed" } else { "" };
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"{}];\n",
            g.nodes[e.src], g.nodes[e.dst], e.label, style
        ));
    }
    out.push_str("}\n");
    out
}

// ---- JSON -------------------------------------------------------------

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub src: String,
    pub dst: String,
    pub label: String,
    pub seq: u32,
    pub dashed: bool,
}

pub fn graph_json(g: &DdiGraph) -> GraphJson {
    GraphJson {
        nodes: g.nodes.iter().map(|n| n.to_string()).collect(),
        edges: g
            .edges
            .iter()
            .map(|e| EdgeJson {
                src: g.nodes[e.src].to_string(),
                dst: g.nodes[e.dst].to_string(),
                label: e.label.to_string(),
                seq: e.label.seq,
                dashed: e.dashed,
            })
            .collect(),
    }
}
