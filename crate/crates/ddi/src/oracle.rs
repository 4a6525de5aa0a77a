//! Brute-force dependence checker.
//!
//! Recomputes the dependence set straight from the expanded instance stream,
//! without building a graph: every read/write access becomes an event, and
//! all ordered pairs of events on the same location are compared directly.
//! The result must match the graph-derived set exactly, which gives the
//! randomized tests an independent second opinion to diff against.

use crate::analyzer::{dependence_between, sort_dependences, DepKind, Dependence};
use crate::ast::{InstanceLabel, MemLocation, Program};
use crate::classifier::InstrAccess;
use crate::expand::ExpandedProgram;

/// One location touched by one instance, as a read or a write.
struct Event {
    label: InstanceLabel,
    location: MemLocation,
    is_write: bool,
}

/// Derive the dependence set by comparing every pair of accesses.
pub fn brute_force_dependences(prog: &Program, xp: &ExpandedProgram) -> Vec<Dependence> {
    let mut events = Vec::new();
    for inst in &xp.instances {
        let InstrAccess::Pair(pair) = &inst.access else {
            continue;
        };
        for loc in &pair.reads {
            if !loc.is_sentinel() {
                events.push(Event { label: inst.label, location: loc.clone(), is_write: false });
            }
        }
        for loc in &pair.writes {
            if !loc.is_sentinel() {
                events.push(Event { label: inst.label, location: loc.clone(), is_write: true });
            }
        }
    }
    let mut deps = Vec::new();
    for (i, first) in events.iter().enumerate() {
        for second in &events[i + 1..] {
            if first.location != second.location {
                continue;
            }
            let (a, b) = if first.label.seq <= second.label.seq {
                (first, second)
            } else {
                (second, first)
            };
            if a.label.base == b.label.base && a.label.iter == b.label.iter {
                continue;
            }
            let kind = match (a.is_write, b.is_write) {
                (true, false) => DepKind::Flow,
                (false, true) => DepKind::Anti,
                (true, true) => DepKind::Output,
                (false, false) => DepKind::Input,
            };
            deps.push(dependence_between(
                prog,
                xp,
                kind,
                a.label,
                b.label,
                a.location.clone(),
            ));
        }
    }
    sort_dependences(&mut deps);
    deps.dedup();
    deps
}

/// Set difference in both directions between two dependence lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceDiff {
    /// Present in the reference set but absent from the candidate.
    pub missing: Vec<Dependence>,
    /// Present in the candidate but absent from the reference set.
    pub extra: Vec<Dependence>,
}

impl DependenceDiff {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

/// Diff a candidate dependence list against a reference list.
pub fn diff_dependences(candidate: &[Dependence], reference: &[Dependence]) -> DependenceDiff {
    let missing = reference
        .iter()
        .filter(|d| !candidate.contains(d))
        .cloned()
        .collect();
    let extra = candidate
        .iter()
        .filter(|d| !reference.contains(d))
        .cloned()
        .collect();
    DependenceDiff { missing, extra }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::find_dependences;
    use crate::expand::{expand_loops, DEFAULT_UNROLL_CAP};
    use crate::frontend::parse_program;
    use crate::graph::build_graph;

    fn both(src: &str) -> (Vec<Dependence>, Vec<Dependence>) {
        let prog = parse_program(src).expect("source parses");
        let xp = expand_loops(&prog, DEFAULT_UNROLL_CAP).expect("expansion succeeds");
        let g = build_graph(&prog, &xp);
        (find_dependences(&g, &prog, &xp), brute_force_dependences(&prog, &xp))
    }

    #[test]
    fn agrees_with_the_graph_on_straight_line_code() {
        let (graph_deps, brute) = both(
            "int a,b,c,d;\nc=a+b;\nd=a-10;\nif(c>d)\n  b=a+10;\n",
        );
        let lines: Vec<String> = brute.iter().map(Dependence::human_line).collect();
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
        assert_eq!(graph_deps, brute);
    }

    #[test]
    fn agrees_with_the_graph_on_loops() {
        let (graph_deps, brute) = both(
            "int a[],b[],c[],i;\nfor(i=2;i<5;i++) {\n  a[i]=b[i]+c[i];\n  a[i+1]=a[i-1]+c[i-1];\n  c[i-1]=b[i];\n}\n",
        );
        assert_eq!(graph_deps, brute);
        assert!(brute
            .iter()
            .any(|d| d.human_line() == "FLOW 4.1 -> 5.2 on a[2] [carried]"));
    }

    #[test]
    fn agrees_with_the_graph_on_pointer_code() {
        let (graph_deps, brute) = both("int a=3,*p,c;\np=&a;\nc=*p+a;\nprint p,*p,c;\n");
        assert_eq!(graph_deps, brute);
    }

    #[test]
    fn diff_reports_both_directions() {
        let (graph_deps, brute) = both("int a,b;\na=1;\nb=a;\n");
        assert!(diff_dependences(&graph_deps, &brute).is_empty());
        let shorter = &graph_deps[..graph_deps.len() - 1];
        let diff = diff_dependences(shorter, &brute);
        assert_eq!(diff.missing.len(), 1);
        assert!(diff.extra.is_empty());
        let diff = diff_dependences(&brute, shorter);
        assert_eq!(diff.extra.len(), 1);
        assert!(diff.missing.is_empty());
    }
}
