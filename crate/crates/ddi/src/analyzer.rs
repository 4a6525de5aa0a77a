//! Dependence derivation, loop verdicts, and the path closure.
//!
//! Every dependence is read off the graph node-locally: the labels on a
//! node's incoming solid edges are its writers, the labels on its outgoing
//! solid edges its readers, and ordered pairs of distinct labels classify as
//! flow (write then read), anti (read then write), output (write twice), or
//! input (read twice). The sentinel nodes `PR` and `HU` never produce
//! dependences, and dashed edges are invisible here.
//!
//! A dependence is loop-carried when its endpoints run in different
//! iterations of a loop enclosing both; the recorded environments make that
//! exact even when sibling inner loops of different lengths share an outer
//! loop. A loop fails to parallelize exactly when some flow dependence is
//! carried by that loop between instructions of its own body.

use thiserror::Error;

use crate::ast::{InstanceLabel, LoopId, MemLocation, Program};
use crate::expand::ExpandedProgram;
use crate::graph::DdiGraph;

/// Classification of one dependence, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepKind {
    Flow,
    Anti,
    Output,
    Input,
}

impl DepKind {
    pub fn lower(self) -> &'static str {
        match self {
            DepKind::Flow => "flow",
            DepKind::Anti => "anti",
            DepKind::Output => "output",
            DepKind::Input => "input",
        }
    }

    pub fn upper(self) -> &'static str {
        match self {
            DepKind::Flow => "FLOW",
            DepKind::Anti => "ANTI",
            DepKind::Output => "OUTPUT",
            DepKind::Input => "INPUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependence {
    pub kind: DepKind,
    pub earlier: InstanceLabel,
    pub later: InstanceLabel,
    pub location: MemLocation,
    pub carried: bool,
}

impl Dependence {
    /// One-line rendering: `FLOW 4.1 -> 5.2 on a[2] [carried]`.
    pub fn human_line(&self) -> String {
        let carried = if self.carried { " [carried]" } else { "" };
        format!(
            "{} {} -> {} on {}{}",
            self.kind.upper(),
            self.earlier,
            self.later,
            self.location,
            carried
        )
    }
}

/// Sort dependences the way every report lists them.
/// Canonical report order: location, then endpoints, then kind.
pub fn sort_dependences(deps: &mut [Dependence]) {
    deps.sort_by(|a, b| {
        (&a.location, a.earlier.seq, a.later.seq, a.kind)
            .cmp(&(&b.location, b.earlier.seq, b.later.seq, b.kind))
    });
}

/// Derive all dependences from the graph's solid edges.
pub fn find_dependences(
    g: &DdiGraph,
    prog: &Program,
    xp: &ExpandedProgram,
) -> Vec<Dependence> {
    let mut deps = Vec::new();
    for (node_ix, loc) in g.nodes.iter().enumerate() {
        if loc.is_sentinel() {
            continue;
        }
        let mut writers: Vec<InstanceLabel> = Vec::new();
        let mut readers: Vec<InstanceLabel> = Vec::new();
        for e in g.solid_edges() {
            if e.dst == node_ix && !writers.contains(&e.label) {
                writers.push(e.label);
            }
            if e.src == node_ix && !readers.contains(&e.label) {
                readers.push(e.label);
            }
        }
        writers.sort();
        readers.sort();
        for &w in &writers {
            for &r in &readers {
                if same_key(w, r) {
                    continue;
                }
                let (kind, earlier, later) = if w.seq < r.seq {
                    (DepKind::Flow, w, r)
                } else {
                    (DepKind::Anti, r, w)
                };
                deps.push(dependence_between(prog, xp, kind, earlier, later, loc.clone()));
            }
        }
        for (i, &first) in writers.iter().enumerate() {
            for &second in &writers[i + 1..] {
                if same_key(first, second) {
                    continue;
                }
                deps.push(dependence_between(prog, xp, DepKind::Output, first, second, loc.clone()));
            }
        }
        for (i, &first) in readers.iter().enumerate() {
            for &second in &readers[i + 1..] {
                if same_key(first, second) {
                    continue;
                }
                deps.push(dependence_between(prog, xp, DepKind::Input, first, second, loc.clone()));
            }
        }
    }
    sort_dependences(&mut deps);
    deps
}

fn same_key(a: InstanceLabel, b: InstanceLabel) -> bool {
    a.base == b.base && a.iter == b.iter
}

/// Build one dependence record, deciding whether a shared loop carries it.
pub fn dependence_between(
    prog: &Program,
    xp: &ExpandedProgram,
    kind: DepKind,
    earlier: InstanceLabel,
    later: InstanceLabel,
    location: MemLocation,
) -> Dependence {
    let carried = common_loops(prog, xp, earlier, later)
        .into_iter()
        .any(|lid| carried_by(prog, xp, lid, earlier, later));
    Dependence { kind, earlier, later, location, carried }
}

/// Loops enclosing both endpoints. Loop-header instances are excluded: their
/// single bare-label instance stands for every iteration at once, so
/// iteration distance is meaningless for them.
fn common_loops(
    prog: &Program,
    xp: &ExpandedProgram,
    a: InstanceLabel,
    b: InstanceLabel,
) -> Vec<LoopId> {
    if a.iter.is_none() || b.iter.is_none() {
        return Vec::new();
    }
    let la = &prog.instructions[xp.by_seq(a.seq).instr].loops;
    let lb = &prog.instructions[xp.by_seq(b.seq).instr].loops;
    la.iter().filter(|l| lb.contains(l)).copied().collect()
}

/// Do the two instances run in different iterations of the given loop?
fn carried_by(
    prog: &Program,
    xp: &ExpandedProgram,
    lid: LoopId,
    a: InstanceLabel,
    b: InstanceLabel,
) -> bool {
    let var = &prog.loops[lid].var;
    let va = lookup(&xp.by_seq(a.seq).env, var);
    let vb = lookup(&xp.by_seq(b.seq).env, var);
    va != vb
}

fn lookup(env: &[(String, i64)], var: &str) -> Option<i64> {
    env.iter().rev().find(|(n, _)| n == var).map(|(_, v)| *v)
}

/// Per-loop parallelizability verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopVerdict {
    /// 1-based loop number in program order.
    pub id: usize,
    pub var: String,
    pub parallelizable: bool,
    /// Flow dependences carried by this loop between its own instructions.
    pub blockers: Vec<Dependence>,
}

pub fn parallelizability_report(
    deps: &[Dependence],
    prog: &Program,
    xp: &ExpandedProgram,
) -> Vec<LoopVerdict> {
    prog.loops
        .iter()
        .enumerate()
        .map(|(lid, meta)| {
            let mut blockers: Vec<Dependence> = deps
                .iter()
                .filter(|d| {
                    d.kind == DepKind::Flow
                        && d.carried
                        && common_loops(prog, xp, d.earlier, d.later).contains(&lid)
                        && carried_by(prog, xp, lid, d.earlier, d.later)
                })
                .cloned()
                .collect();
            sort_dependences(&mut blockers);
            LoopVerdict {
                id: lid + 1,
                var: meta.var.clone(),
                parallelizable: blockers.is_empty(),
                blockers,
            }
        })
        .collect()
}

// ---- closure ----------------------------------------------------------

/// Default limit on closure pairs.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClosureError {
    #[error("closure exceeded {cap} label pairs; raise the cap to go further")]
    PathExplosion { cap: usize },
}

/// All pairs of distinct labels that co-occur on a directed solid path whose
/// interior nodes are ordinary memory locations (`PR`/`HU` may only start or
/// end a path). Pairs are normalized earliest-first and sorted.
pub fn dependence_closure(
    g: &DdiGraph,
    cap: usize,
) -> Result<Vec<(InstanceLabel, InstanceLabel)>, ClosureError> {
    let solid: Vec<usize> = (0..g.edges.len()).filter(|&i| !g.edges[i].dashed).collect();
    // Forward adjacency over edges: e chains to f when f starts at e's
    // destination and that junction is not a sentinel.
    let mut starting_at: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for &e in &solid {
        starting_at[g.edges[e].src].push(e);
    }
    let mut pairs: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
    let mut seen = vec![0u32; g.edges.len()];
    let mut mark = 0u32;
    for &start in &solid {
        mark += 1;
        let mut stack: Vec<usize> = Vec::new();
        let junction = g.edges[start].dst;
        if g.nodes[junction].is_sentinel() {
            continue;
        }
        for &f in &starting_at[junction] {
            if seen[f] != mark {
                seen[f] = mark;
                stack.push(f);
            }
        }
        let first = g.edges[start].label;
        while let Some(e) = stack.pop() {
            let second = g.edges[e].label;
            if !same_key(first, second) {
                let key = if first.seq <= second.seq {
                    (first.seq, second.seq)
                } else {
                    (second.seq, first.seq)
                };
                pairs.insert(key);
                if pairs.len() > cap {
                    return Err(ClosureError::PathExplosion { cap });
                }
            }
            let junction = g.edges[e].dst;
            if g.nodes[junction].is_sentinel() {
                continue;
            }
            for &f in &starting_at[junction] {
                if seen[f] != mark {
                    seen[f] = mark;
                    stack.push(f);
                }
            }
        }
    }
    let mut result: Vec<(InstanceLabel, InstanceLabel)> = pairs
        .into_iter()
        .map(|(a, b)| {
            let find = |seq: u32| {
                g.edges
                    .iter()
                    .find(|e| e.label.seq == seq)
                    .expect("closure labels come from edges")
                    .label
            };
            (find(a), find(b))
        })
        .collect();
    result.sort_by_key(|(a, b)| (a.seq, b.seq));
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::{expand_loops, DEFAULT_UNROLL_CAP};
    use crate::frontend::parse_program;
    use crate::graph::build_graph;

    fn pipeline(src: &str) -> (Program, ExpandedProgram, DdiGraph) {
        let prog = parse_program(src).expect("source parses");
        let xp = expand_loops(&prog, DEFAULT_UNROLL_CAP).expect("expansion succeeds");
        let g = build_graph(&prog, &xp);
        (prog, xp, g)
    }

    fn dep_lines(src: &str) -> Vec<String> {
        let (prog, xp, g) = pipeline(src);
        find_dependences(&g, &prog, &xp).iter().map(Dependence::human_line).collect()
    }

    #[test]
    fn straight_line_dependences_are_exact_and_sorted() {
        let lines = dep_lines("int a,b,c,d;\nc=a+b;\nd=a-10;\nif(c>d)\n  b=a+10;\n");
        assert_eq!(
            lines,
            vec![
                "INPUT 1 -> 2 on a",
                "INPUT 1 -> 4 on a",
                "INPUT 2 -> 4 on a",
                "ANTI 1 -> 4 on b",
                "FLOW 1 -> 3 on c",
                "FLOW 2 -> 3 on d",
            ]
        );
    }

    #[test]
    fn sentinel_nodes_never_generate_dependences() {
        // Both statements read PR and write distinct variables; the only
        // labels meeting at a shared node meet at PR.
        let lines = dep_lines("int a,b;\na=1;\nb=2;\n");
        assert!(lines.is_empty());
    }

    #[test]
    fn array_loop_dependences_carry_across_iterations() {
        let lines = dep_lines(
            "int a[],b[],c[],i;\nfor(i=2;i<5;i++) {\n  a[i]=b[i]+c[i];\n  a[i+1]=a[i-1]+c[i-1];\n  c[i-1]=b[i];\n}\n",
        );
        for expected in [
            "FLOW 4.1 -> 5.2 on a[2] [carried]",
            "FLOW 4.2 -> 5.3 on a[3] [carried]",
            "FLOW 5.1 -> 5.3 on a[3] [carried]",
            "OUTPUT 5.1 -> 4.2 on a[3] [carried]",
            "ANTI 5.1 -> 6.1 on c[1]",
        ] {
            assert!(lines.contains(&expected.to_string()), "missing {expected} in {lines:#?}");
        }
    }

    #[test]
    fn same_iteration_dependences_are_not_carried() {
        let (prog, xp, g) = pipeline("int c,s,i;\nc=0;\nfor(i=1;i<3;i++) {\n  s=c+i;\n  c=s;\n}\n");
        let deps = find_dependences(&g, &prog, &xp);
        let line = |needle: &str| {
            deps.iter()
                .find(|d| d.human_line().starts_with(needle))
                .unwrap_or_else(|| panic!("no dependence starting {needle}"))
        };
        assert!(!line("FLOW 5.1 -> 6.1 on s").carried);
        assert!(line("FLOW 6.1 -> 5.2 on c").carried);
        // Read and write of c inside one iteration: anti, but not carried.
        assert!(!line("ANTI 5.1 -> 6.1 on c").carried);
    }

    #[test]
    fn loop_verdict_blocks_on_carried_flow() {
        let (prog, xp, g) = pipeline("int c,s,i;\nc=0;\nfor(i=1;i<3;i++) {\n  s=c+i;\n  c=s;\n}\n");
        let deps = find_dependences(&g, &prog, &xp);
        let verdicts = parallelizability_report(&deps, &prog, &xp);
        assert_eq!(verdicts.len(), 1);
        assert_eq!(verdicts[0].id, 1);
        assert_eq!(verdicts[0].var, "i");
        assert!(!verdicts[0].parallelizable);
        assert!(verdicts[0]
            .blockers
            .iter()
            .any(|d| d.human_line() == "FLOW 6.1 -> 5.2 on c [carried]"));
    }

    #[test]
    fn independent_element_loop_is_parallelizable() {
        let (prog, xp, g) =
            pipeline("int a[],b[],i;\nfor(i=1;i<4;i++) {\n  a[i]=b[i];\n}\n");
        let deps = find_dependences(&g, &prog, &xp);
        let verdicts = parallelizability_report(&deps, &prog, &xp);
        assert!(verdicts[0].parallelizable);
        assert!(verdicts[0].blockers.is_empty());
    }

    #[test]
    fn inner_loop_escapes_blame_for_outer_carried_flow() {
        // a[1][1] is written in (i=1,j=1) and read in (i=2,j=1): carried by
        // the outer loop only, so the inner loop stays parallelizable if
        // nothing else blocks it.
        let (prog, xp, g) = pipeline(
            "int a[],c[],i,j;\nfor(i=1;i<3;i++) {\n  for(j=1;j<3;j++) {\n    a[i][j]=c[i-1][j-1];\n    c[i][j]=a[i-1][j];\n  }\n}\n",
        );
        let deps = find_dependences(&g, &prog, &xp);
        let verdicts = parallelizability_report(&deps, &prog, &xp);
        assert_eq!(verdicts.len(), 2);
        let outer = &verdicts[0];
        let inner = &verdicts[1];
        assert!(!outer.parallelizable);
        assert!(outer
            .blockers
            .iter()
            .any(|d| d.human_line() == "FLOW 7.1 -> 8.3 on a[1][1] [carried]"));
        assert!(!inner
            .blockers
            .iter()
            .any(|d| d.human_line().contains("on a[1][1]")));
        // The cross-diagonal c access is carried by both.
        assert!(inner
            .blockers
            .iter()
            .any(|d| d.human_line() == "FLOW 8.1 -> 7.4 on c[1][1] [carried]"));
        assert!(!inner.parallelizable);
    }

    #[test]
    fn header_instances_never_carry() {
        let (prog, xp, g) = pipeline("int i,s;\nfor(i=1;i<3;i++) {\n  s=s+i;\n}\n");
        let deps = find_dependences(&g, &prog, &xp);
        let header_involved =
            |d: &Dependence| d.earlier.iter.is_none() || d.later.iter.is_none();
        assert!(deps.iter().any(header_involved), "expected header dependences on i");
        for d in deps.iter().filter(|d| header_involved(d)) {
            assert!(!d.carried, "header dependence marked carried: {}", d.human_line());
        }
        // Body reads of i in different iterations do carry — as an input
        // dependence, which never blocks anything.
        assert!(deps
            .iter()
            .any(|d| d.human_line() == "INPUT 4.1 -> 4.2 on i [carried]"));
    }

    #[test]
    fn pointer_bookkeeping_stays_out_of_dependences() {
        let lines = dep_lines("int a=3,*p,c;\np=&a;\nc=*p+a;\nprint p,*p,c;\n");
        assert_eq!(
            lines,
            vec![
                "FLOW 1 -> 3 on a",
                "FLOW 1 -> 4 on a",
                "INPUT 3 -> 4 on a",
                "FLOW 3 -> 4 on c",
            ]
        );
    }

    #[test]
    fn closure_collects_pairs_along_paths() {
        let (_, _, g) = pipeline("int a,b,c,d;\nc=a+b;\nd=a-10;\nif(c>d)\n  b=a+10;\n");
        let pairs: Vec<String> = dependence_closure(&g, DEFAULT_CLOSURE_CAP)
            .expect("closure fits")
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        assert_eq!(pairs, vec!["(1,3)", "(1,4)", "(2,3)", "(3,4)"]);
    }

    #[test]
    fn closure_chains_through_copies() {
        let (_, _, g) = pipeline("int x,y,z,w;\ny=x;\nz=y;\nw=z;\n");
        let pairs: Vec<String> = dependence_closure(&g, DEFAULT_CLOSURE_CAP)
            .expect("closure fits")
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        assert_eq!(pairs, vec!["(1,2)", "(1,3)", "(2,3)"]);
    }

    #[test]
    fn closure_refuses_to_pass_through_sentinels() {
        let (_, _, g) = pipeline("int a,b;\nprint a;\nread b;\n");
        assert_eq!(dependence_closure(&g, DEFAULT_CLOSURE_CAP), Ok(Vec::new()));
        let (_, _, g) = pipeline("int a,b;\na=5;\nb=a;\n");
        let pairs: Vec<String> = dependence_closure(&g, DEFAULT_CLOSURE_CAP)
            .expect("closure fits")
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        assert_eq!(pairs, vec!["(1,2)"]);
    }

    #[test]
    fn closure_cap_reports_explosion() {
        let (_, _, g) = pipeline(
            "int a,b,c,d,e;\nb=a;\nc=b;\nd=c;\ne=d;\na=e;\nb=a;\nc=b;\nd=c;\n",
        );
        assert_eq!(
            dependence_closure(&g, 3),
            Err(ClosureError::PathExplosion { cap: 3 })
        );
    }
}
