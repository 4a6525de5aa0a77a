//! Instruction classification and memory-access extraction.
//!
//! Every instruction record falls into one of four classes depending on how
//! it touches memory, and every executable instance of it yields an access
//! pair: the set of locations it reads and the single location it writes.
//! Constants read from the program text count as reads of the `PR` node and
//! input/output/comparison hardware counts as the `HU` node, so the pair is
//! never empty. Subscript expressions are index arithmetic, not data flow:
//! they are evaluated away under the loop environment and contribute no
//! reads of their own.
//!
//! A pointer assignment `p=&x` is the one instruction that produces no
//! access pair; it yields the dashed bookkeeping edge x ⇢ p instead.

use thiserror::Error;

use crate::ast::{
    BinOp, BoundExpr, DeclEntry, Expr, InstrKind, InstrSlot, Instruction, LValue, MemLocation,
    Program, StmtNode, VarKind,
};

/// How an instruction relates to memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrClass {
    /// No memory access at all: `break`, `continue`, `goto`.
    Nmai,
    /// Reads only (the write target is a hardware unit): conditions, `print`.
    Mar,
    /// Writes a variable while reading only `PR`/`HU`: constant assignments,
    /// `read`, declaration initializers.
    Maw,
    /// Reads variables and writes one: arithmetic, copies, loop increments.
    Marw,
}

impl std::fmt::Display for InstrClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InstrClass::Nmai => "NMAI",
            InstrClass::Mar => "MAR",
            InstrClass::Maw => "MAW",
            InstrClass::Marw => "MARW",
        })
    }
}

/// The locations one instance reads and writes. `reads` keeps first-occurrence
/// order with duplicates collapsed; `writes` holds exactly one location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessPair {
    pub reads: Vec<MemLocation>,
    pub writes: Vec<MemLocation>,
}

/// What one instruction instance contributes to the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstrAccess {
    Pair(AccessPair),
    /// `p=&x`: a dashed edge from pointee to pointer, excluded from
    /// dependence analysis.
    Dashed { src: MemLocation, dst: MemLocation },
    /// Control transfers access nothing.
    None,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccessError {
    #[error("subscript is not an affine index expression: {detail}")]
    NonAffineSubscript { detail: String },
    #[error("pointer '{ptr}' is dereferenced before any assignment binds it")]
    UnboundPointer { ptr: String },
}

/// Which variable each pointer designates at each program point. Pointer
/// assignments are restricted to unguarded top level, so resolution by
/// instruction index is exact.
#[derive(Debug, Clone, Default)]
pub struct PointsToMap {
    /// `(index, pointer, pointee)` in ascending index order.
    entries: Vec<(u32, String, String)>,
}

impl PointsToMap {
    pub fn build(prog: &Program) -> Self {
        let mut entries = Vec::new();
        for instr in &prog.instructions {
            if instr.kind != InstrKind::PointerAssign {
                continue;
            }
            if let StmtNode::PtrAssign { ptr, target } = &prog.stmt(instr.stmt).node {
                entries.push((instr.index, ptr.clone(), target.clone()));
            }
        }
        PointsToMap { entries }
    }

    /// The variable `ptr` designates just before the instruction with the
    /// given index: the latest earlier assignment wins.
    pub fn resolve(&self, ptr: &str, before_index: u32) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(idx, p, _)| *idx < before_index && p == ptr)
            .map(|(_, _, t)| t.as_str())
    }
}

/// Classify one instruction record by its static access shape.
pub fn classify_instruction(prog: &Program, instr: &Instruction) -> InstrClass {
    match instr.kind {
        InstrKind::ControlTransfer => InstrClass::Nmai,
        InstrKind::Conditional | InstrKind::Output | InstrKind::LoopCond => InstrClass::Mar,
        InstrKind::Input | InstrKind::Declaration | InstrKind::PointerAssign => InstrClass::Maw,
        InstrKind::LoopIncr => InstrClass::Marw,
        InstrKind::LoopInit => match &prog.stmt(instr.stmt).node {
            StmtNode::For { init: BoundExpr::Var(_), .. } => InstrClass::Marw,
            _ => InstrClass::Maw,
        },
        InstrKind::Assignment | InstrKind::Arithmetic => {
            if let StmtNode::Assign { value, .. } = &prog.stmt(instr.stmt).node {
                if reads_memory(value) {
                    InstrClass::Marw
                } else {
                    InstrClass::Maw
                }
            } else {
                InstrClass::Marw
            }
        }
    }
}

/// Does the expression read any variable location? Subscript interiors do
/// not count — they are evaluated away statically.
fn reads_memory(e: &Expr) -> bool {
    match e {
        Expr::Const(_) => false,
        Expr::Var(_) | Expr::ArrayElem(..) | Expr::Deref(_) => true,
        Expr::Neg(inner) => reads_memory(inner),
        Expr::Binary(_, l, r) => reads_memory(l) || reads_memory(r),
    }
}

/// The access pair (or dashed edge) of one instance, with subscripts
/// evaluated under the loop-variable environment `env`.
pub fn instance_access(
    prog: &Program,
    instr: &Instruction,
    env: &[(String, i64)],
    pts: &PointsToMap,
) -> Result<InstrAccess, AccessError> {
    let stmt = prog.stmt(instr.stmt);
    let mut reads = Vec::new();
    let write: MemLocation = match (instr.kind, &stmt.node) {
        (InstrKind::ControlTransfer, _) => return Ok(InstrAccess::None),
        (InstrKind::PointerAssign, StmtNode::PtrAssign { ptr, target }) => {
            return Ok(InstrAccess::Dashed {
                src: MemLocation::Scalar(target.clone()),
                dst: MemLocation::Pointer(ptr.clone()),
            })
        }
        (InstrKind::Declaration, StmtNode::Decl { entries }) => {
            let InstrSlot::DeclEntry(k) = instr.slot else {
                unreachable!("declaration record always carries an entry slot");
            };
            let DeclEntry::Scalar { name, .. } = &entries[k] else {
                unreachable!("only initialized scalars produce declaration records");
            };
            push_unique(&mut reads, MemLocation::Pr);
            MemLocation::Scalar(name.clone())
        }
        (InstrKind::Input, StmtNode::Read { targets }) => {
            let InstrSlot::ReadTarget(k) = instr.slot else {
                unreachable!("input record always carries a target slot");
            };
            push_unique(&mut reads, MemLocation::Hu);
            MemLocation::Scalar(targets[k].clone())
        }
        (InstrKind::Output, StmtNode::Print { args }) => {
            for arg in args {
                collect_reads(prog, arg, env, pts, instr.index, &mut reads)?;
            }
            MemLocation::Hu
        }
        (InstrKind::Conditional, StmtNode::If { lhs, rhs, .. }) => {
            collect_reads(prog, lhs, env, pts, instr.index, &mut reads)?;
            collect_reads(prog, rhs, env, pts, instr.index, &mut reads)?;
            MemLocation::Hu
        }
        (InstrKind::LoopInit, StmtNode::For { var, init, .. }) => {
            push_bound_read(&mut reads, init);
            MemLocation::Scalar(var.clone())
        }
        (InstrKind::LoopCond, StmtNode::For { var, bound, .. }) => {
            push_unique(&mut reads, MemLocation::Scalar(var.clone()));
            push_bound_read(&mut reads, bound);
            MemLocation::Hu
        }
        (InstrKind::LoopIncr, StmtNode::For { var, .. }) => {
            push_unique(&mut reads, MemLocation::Scalar(var.clone()));
            push_unique(&mut reads, MemLocation::Pr);
            MemLocation::Scalar(var.clone())
        }
        (InstrKind::Assignment | InstrKind::Arithmetic, StmtNode::Assign { target, value }) => {
            collect_reads(prog, value, env, pts, instr.index, &mut reads)?;
            match target {
                LValue::Scalar(name) => MemLocation::Scalar(name.clone()),
                LValue::ArrayElem(name, subs) => {
                    MemLocation::ArrayElem(name.clone(), eval_subscripts(subs, env)?)
                }
                LValue::Deref(ptr) => {
                    let Some(pointee) = pts.resolve(ptr, instr.index) else {
                        return Err(AccessError::UnboundPointer { ptr: ptr.clone() });
                    };
                    MemLocation::Scalar(pointee.to_string())
                }
            }
        }
        (kind, node) => unreachable!("instruction kind {kind:?} on statement {node:?}"),
    };
    Ok(InstrAccess::Pair(AccessPair { reads, writes: vec![write] }))
}

fn push_unique(reads: &mut Vec<MemLocation>, loc: MemLocation) {
    if !reads.contains(&loc) {
        reads.push(loc);
    }
}

fn push_bound_read(reads: &mut Vec<MemLocation>, bound: &BoundExpr) {
    match bound {
        BoundExpr::Const(_) => push_unique(reads, MemLocation::Pr),
        BoundExpr::Var(n) => push_unique(reads, MemLocation::Scalar(n.clone())),
    }
}

/// Walk an expression collecting read locations. Constants read `PR`; array
/// subscripts are resolved to concrete elements and contribute no reads.
fn collect_reads(
    prog: &Program,
    e: &Expr,
    env: &[(String, i64)],
    pts: &PointsToMap,
    at_index: u32,
    reads: &mut Vec<MemLocation>,
) -> Result<(), AccessError> {
    match e {
        Expr::Const(_) => push_unique(reads, MemLocation::Pr),
        Expr::Var(n) => {
            // A bare pointer name only parses as a whole `print` argument and
            // reads the pointer's own value, not the pointee's.
            if prog.var_kind(n) == Some(VarKind::Pointer) {
                push_unique(reads, MemLocation::Pointer(n.clone()));
            } else {
                push_unique(reads, MemLocation::Scalar(n.clone()));
            }
        }
        Expr::ArrayElem(name, subs) => {
            push_unique(
                reads,
                MemLocation::ArrayElem(name.clone(), eval_subscripts(subs, env)?),
            );
        }
        Expr::Deref(ptr) => {
            let Some(pointee) = pts.resolve(ptr, at_index) else {
                return Err(AccessError::UnboundPointer { ptr: ptr.clone() });
            };
            push_unique(reads, MemLocation::Scalar(pointee.to_string()));
        }
        Expr::Neg(inner) => collect_reads(prog, inner, env, pts, at_index, reads)?,
        Expr::Binary(_, l, r) => {
            collect_reads(prog, l, env, pts, at_index, reads)?;
            collect_reads(prog, r, env, pts, at_index, reads)?;
        }
    }
    Ok(())
}

fn eval_subscripts(subs: &[Expr], env: &[(String, i64)]) -> Result<Vec<i64>, AccessError> {
    subs.iter().map(|s| eval_affine(s, env)).collect()
}

/// Evaluate an affine index expression: constants and active loop variables
/// combined with `+`, `-`, unary minus, multiplication by a constant, and
/// division by a nonzero constant. Anything else is rejected.
pub fn eval_affine(e: &Expr, env: &[(String, i64)]) -> Result<i64, AccessError> {
    match e {
        Expr::Const(v) => Ok(*v),
        Expr::Var(n) => env
            .iter()
            .rev()
            .find(|(name, _)| name == n)
            .map(|(_, v)| *v)
            .ok_or_else(|| AccessError::NonAffineSubscript {
                detail: format!("'{n}' is not an active loop variable"),
            }),
        Expr::Neg(inner) => Ok(eval_affine(inner, env)?.wrapping_neg()),
        Expr::Binary(op, l, r) => {
            match op {
                BinOp::Mul if uses_variable(l) && uses_variable(r) => {
                    return Err(AccessError::NonAffineSubscript {
                        detail: "product of two index variables".into(),
                    })
                }
                BinOp::Div if uses_variable(r) => {
                    return Err(AccessError::NonAffineSubscript {
                        detail: "division by an index variable".into(),
                    })
                }
                _ => {}
            }
            let lv = eval_affine(l, env)?;
            let rv = eval_affine(r, env)?;
            match op {
                BinOp::Add => Ok(lv.wrapping_add(rv)),
                BinOp::Sub => Ok(lv.wrapping_sub(rv)),
                BinOp::Mul => Ok(lv.wrapping_mul(rv)),
                BinOp::Div => {
                    if rv == 0 {
                        Err(AccessError::NonAffineSubscript {
                            detail: "division by zero in a subscript".into(),
                        })
                    } else {
                        Ok(lv.wrapping_div(rv))
                    }
                }
            }
        }
        Expr::ArrayElem(..) => Err(AccessError::NonAffineSubscript {
            detail: "array element used as a subscript".into(),
        }),
        Expr::Deref(_) => Err(AccessError::NonAffineSubscript {
            detail: "pointer dereference used as a subscript".into(),
        }),
    }
}

fn uses_variable(e: &Expr) -> bool {
    match e {
        Expr::Const(_) => false,
        Expr::Var(_) | Expr::ArrayElem(..) | Expr::Deref(_) => true,
        Expr::Neg(inner) => uses_variable(inner),
        Expr::Binary(_, l, r) => uses_variable(l) || uses_variable(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn scalar(n: &str) -> MemLocation {
        MemLocation::Scalar(n.into())
    }

    fn elem(n: &str, subs: &[i64]) -> MemLocation {
        MemLocation::ArrayElem(n.into(), subs.to_vec())
    }

    fn access_at(prog: &Program, index: u32, env: &[(String, i64)]) -> AccessPair {
        let instr = prog.instruction_by_index(index).expect("index exists");
        let pts = PointsToMap::build(prog);
        match instance_access(prog, instr, env, &pts).expect("access extraction succeeds") {
            InstrAccess::Pair(p) => p,
            other => panic!("expected an access pair, got {other:?}"),
        }
    }

    fn class_at(prog: &Program, index: u32) -> InstrClass {
        classify_instruction(prog, prog.instruction_by_index(index).expect("index exists"))
    }

    #[test]
    fn straight_line_classes() {
        let prog = parse_program(
            "int a,b=3,c,d;\nc=a+b;\nd=5;\nif(c>d)\n  b=a+10;\nprint c;\nread a;\n",
        )
        .expect("source parses");
        assert_eq!(class_at(&prog, 1), InstrClass::Maw); // b=3
        assert_eq!(class_at(&prog, 2), InstrClass::Marw); // c=a+b
        assert_eq!(class_at(&prog, 3), InstrClass::Maw); // d=5
        assert_eq!(class_at(&prog, 4), InstrClass::Mar); // if(c>d)
        assert_eq!(class_at(&prog, 5), InstrClass::Marw); // b=a+10
        assert_eq!(class_at(&prog, 6), InstrClass::Mar); // print c
        assert_eq!(class_at(&prog, 7), InstrClass::Maw); // read a
    }

    #[test]
    fn loop_header_classes() {
        let prog =
            parse_program("int i,n,s;\nfor(i=1;i<n;i++) {\n  s=s+i;\n}\n").expect("source parses");
        assert_eq!(class_at(&prog, 1), InstrClass::Maw); // i=1
        assert_eq!(class_at(&prog, 2), InstrClass::Mar); // i<n
        assert_eq!(class_at(&prog, 3), InstrClass::Marw); // i++
        let symbolic =
            parse_program("int i,n,s;\nfor(i=n;i<5;i++) {\n  s=s+i;\n}\n").expect("source parses");
        assert_eq!(class_at(&symbolic, 1), InstrClass::Marw); // i=n reads n
    }

    #[test]
    fn jumps_access_nothing() {
        let prog = parse_program("int i;\nfor(i=1;i<3;i++) {\n  break;\n}\ngoto out;\n")
            .expect("source parses");
        assert_eq!(class_at(&prog, 4), InstrClass::Nmai);
        assert_eq!(class_at(&prog, 5), InstrClass::Nmai);
        let pts = PointsToMap::build(&prog);
        let jump = prog.instruction_by_index(4).expect("index exists");
        assert_eq!(
            instance_access(&prog, jump, &[], &pts).expect("jump access"),
            InstrAccess::None
        );
    }

    #[test]
    fn arithmetic_reads_variables_and_constants() {
        let prog = parse_program("int a,b,c,d;\nc=a+b;\nd=a-10;\nb=a+10;\n").expect("source parses");
        let c = access_at(&prog, 1, &[]);
        assert_eq!(c.reads, vec![scalar("a"), scalar("b")]);
        assert_eq!(c.writes, vec![scalar("c")]);
        let d = access_at(&prog, 2, &[]);
        assert_eq!(d.reads, vec![scalar("a"), MemLocation::Pr]);
        assert_eq!(d.writes, vec![scalar("d")]);
    }

    #[test]
    fn duplicate_reads_collapse() {
        let prog = parse_program("int a,c;\nc=a+a;\n").expect("source parses");
        assert_eq!(access_at(&prog, 1, &[]).reads, vec![scalar("a")]);
    }

    #[test]
    fn subscripts_resolve_and_contribute_no_reads() {
        let prog = parse_program(
            "int a[],b[],c[],i;\nfor(i=2;i<5;i++) {\n  a[i+1]=a[i-1]+c[i-1];\n  c[i-1]=b[i];\n}\n",
        )
        .expect("source parses");
        let env = [("i".to_string(), 2i64)];
        let first = access_at(&prog, 4, &env);
        assert_eq!(first.reads, vec![elem("a", &[1]), elem("c", &[1])]);
        assert_eq!(first.writes, vec![elem("a", &[3])]);
        let second = access_at(&prog, 5, &env);
        assert_eq!(second.reads, vec![elem("b", &[2])]);
        assert_eq!(second.writes, vec![elem("c", &[1])]);
    }

    #[test]
    fn constant_subscripts_do_not_read_pr() {
        let prog = parse_program("int a[];\na[2]=5;\n").expect("source parses");
        let pair = access_at(&prog, 1, &[]);
        assert_eq!(pair.reads, vec![MemLocation::Pr]);
        assert_eq!(pair.writes, vec![elem("a", &[2])]);
    }

    #[test]
    fn loop_header_access_pairs() {
        let prog =
            parse_program("int i,s;\nfor(i=1;i<5;i=i+2) {\n  s=s+1;\n}\n").expect("source parses");
        let init = access_at(&prog, 1, &[]);
        assert_eq!(init.reads, vec![MemLocation::Pr]);
        assert_eq!(init.writes, vec![scalar("i")]);
        let cond = access_at(&prog, 2, &[]);
        assert_eq!(cond.reads, vec![scalar("i"), MemLocation::Pr]);
        assert_eq!(cond.writes, vec![MemLocation::Hu]);
        let incr = access_at(&prog, 3, &[]);
        assert_eq!(incr.reads, vec![scalar("i"), MemLocation::Pr]);
        assert_eq!(incr.writes, vec![scalar("i")]);
    }

    #[test]
    fn reads_and_prints_touch_hardware() {
        let prog = parse_program("int a,b;\nread a,b;\nprint a,b;\n").expect("source parses");
        let read_a = access_at(&prog, 1, &[]);
        assert_eq!(read_a.reads, vec![MemLocation::Hu]);
        assert_eq!(read_a.writes, vec![scalar("a")]);
        let print = access_at(&prog, 2, &[]);
        assert_eq!(print.reads, vec![scalar("a"), scalar("b")]);
        assert_eq!(print.writes, vec![MemLocation::Hu]);
    }

    #[test]
    fn pointer_assignment_is_a_dashed_edge() {
        let prog = parse_program("int a=3,*p,c;\np=&a;\nc=*p+a;\n").expect("source parses");
        let pts = PointsToMap::build(&prog);
        let ptr = prog.instruction_by_index(2).expect("index exists");
        assert_eq!(
            instance_access(&prog, ptr, &[], &pts).expect("dashed access"),
            InstrAccess::Dashed { src: scalar("a"), dst: MemLocation::Pointer("p".into()) }
        );
        // Dereference and direct read of the same variable collapse.
        let c = access_at(&prog, 3, &[]);
        assert_eq!(c.reads, vec![scalar("a")]);
        assert_eq!(c.writes, vec![scalar("c")]);
    }

    #[test]
    fn printing_a_pointer_reads_the_pointer_itself() {
        let prog =
            parse_program("int a=3,*p,c;\np=&a;\nc=*p+a;\nprint p,*p,c;\n").expect("source parses");
        let print = access_at(&prog, 4, &[]);
        assert_eq!(
            print.reads,
            vec![MemLocation::Pointer("p".into()), scalar("a"), scalar("c")]
        );
    }

    #[test]
    fn points_to_resolution_is_flow_sensitive() {
        let prog = parse_program("int a,b,*p,c;\np=&a;\nc=*p;\np=&b;\nc=*p;\n")
            .expect("source parses");
        let pts = PointsToMap::build(&prog);
        assert_eq!(pts.resolve("p", 2), Some("a"));
        assert_eq!(pts.resolve("p", 4), Some("b"));
        assert_eq!(pts.resolve("p", 1), None);
        assert_eq!(access_at(&prog, 2, &[]).reads, vec![scalar("a")]);
        assert_eq!(access_at(&prog, 4, &[]).reads, vec![scalar("b")]);
    }

    #[test]
    fn unbound_pointer_is_reported() {
        let prog = parse_program("int a,*p,c;\nc=*p;\np=&a;\n").expect("source parses");
        let pts = PointsToMap::build(&prog);
        let instr = prog.instruction_by_index(1).expect("index exists");
        assert_eq!(
            instance_access(&prog, instr, &[], &pts),
            Err(AccessError::UnboundPointer { ptr: "p".into() })
        );
    }

    #[test]
    fn non_affine_subscripts_are_rejected() {
        let env = [("i".to_string(), 2i64), ("j".to_string(), 1i64)];
        let prog = parse_program(
            "int a[],i,j;\nfor(i=1;i<3;i++) {\n  for(j=1;j<3;j++) {\n    a[i*j]=1;\n  }\n}\n",
        )
        .expect("source parses");
        let instr = prog.instruction_by_index(7).expect("index exists");
        let pts = PointsToMap::build(&prog);
        assert!(matches!(
            instance_access(&prog, instr, &env, &pts),
            Err(AccessError::NonAffineSubscript { .. })
        ));
        // Affine combinations evaluate, including constant multipliers and
        // divisors.
        assert_eq!(eval_affine(&expr_from("a[2*i]"), &env).expect("affine"), 4);
        assert_eq!(eval_affine(&expr_from("a[i/2]"), &env).expect("affine"), 1);
        assert_eq!(eval_affine(&expr_from("a[i+j-1]"), &env).expect("affine"), 2);
        assert!(eval_affine(&expr_from("a[i/0]"), &env).is_err());
        assert!(eval_affine(&expr_from("a[k]"), &env).is_err());
    }

    /// Build the first subscript expression of `a[...]` from a snippet.
    fn expr_from(snippet: &str) -> Expr {
        let src = format!(
            "int a[],i,j,k;\nfor(i=1;i<3;i++) {{\n  for(j=1;j<3;j++) {{\n    {snippet}=1;\n  }}\n}}\n"
        );
        let prog = parse_program(&src).expect("snippet parses");
        let assign = prog
            .stmts
            .iter()
            .find_map(|s| match &s.node {
                StmtNode::Assign { target: LValue::ArrayElem(_, subs), .. } => {
                    Some(subs[0].clone())
                }
                _ => None,
            })
            .expect("snippet contains an array assignment");
        assign
    }
}
