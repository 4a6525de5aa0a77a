//! Reference interpreter.
//!
//! Executes a program directly from its statement tree with 64-bit wrapping
//! arithmetic, so every run is total apart from the listed errors. Reads of
//! never-written locations yield 0, `goto` is a no-op, and printing a
//! pointer prints the pointee's 1-based declaration ordinal — a stable
//! stand-in for an address. Loops run dynamically, so symbolic bounds that
//! static expansion rejects execute fine here (guarded by a fuel cap).
//!
//! The traced variant additionally records an access event per executed
//! instruction, labeled the same way expansion labels instances; for
//! jump-free, guard-free programs the two streams coincide, which the test
//! suite uses to cross-check the static access model against real execution.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::ast::{
    BoundExpr, DeclEntry, Expr, InstanceLabel, InstrSlot, LValue, MemLocation, Program, StmtId,
    StmtNode, VarKind,
};

/// Default statement budget for one execution.
pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("pointer '{ptr}' is used before any assignment binds it")]
    UnboundPointer { ptr: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("read past the end of the input sequence")]
    InputExhausted,
    #[error("execution exceeded the statement budget")]
    FuelExhausted,
}

/// Everything observable about one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub printed: Vec<i64>,
    pub final_store: BTreeMap<MemLocation, i64>,
}

/// One executed instruction's accesses, labeled like an expanded instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessEvent {
    pub label: InstanceLabel,
    pub reads: Vec<MemLocation>,
    pub writes: Vec<MemLocation>,
}

pub fn interpret(prog: &Program, inputs: &[i64]) -> Result<ExecutionResult, InterpError> {
    interpret_with_fuel(prog, inputs, DEFAULT_FUEL)
}

pub fn interpret_with_fuel(
    prog: &Program,
    inputs: &[i64],
    fuel: u64,
) -> Result<ExecutionResult, InterpError> {
    run(prog, inputs, fuel, false).map(|(result, _)| result)
}

/// Execute and record the access-event stream.
pub fn interpret_traced(
    prog: &Program,
    inputs: &[i64],
) -> Result<(ExecutionResult, Vec<AccessEvent>), InterpError> {
    run(prog, inputs, DEFAULT_FUEL, true)
}

fn run(
    prog: &Program,
    inputs: &[i64],
    fuel: u64,
    traced: bool,
) -> Result<(ExecutionResult, Vec<AccessEvent>), InterpError> {
    let mut records_by_stmt: HashMap<StmtId, Vec<usize>> = HashMap::new();
    for (pos, instr) in prog.instructions.iter().enumerate() {
        records_by_stmt.entry(instr.stmt).or_default().push(pos);
    }
    let mut interp = Interp {
        prog,
        records_by_stmt,
        store: HashMap::new(),
        ptrs: HashMap::new(),
        printed: Vec::new(),
        inputs,
        cursor: 0,
        fuel,
        traced,
        events: Vec::new(),
        visits: HashMap::new(),
        seq: 0,
        headers_seen: vec![false; prog.loops.len()],
    };
    for &id in &prog.top {
        interp.exec(id)?;
    }
    let result = ExecutionResult {
        printed: interp.printed,
        final_store: interp.store.into_iter().collect(),
    };
    Ok((result, interp.events))
}

/// What a statement's execution asks of its enclosing loop.
enum Flow {
    Normal,
    Break,
    Continue,
}

struct Interp<'p> {
    prog: &'p Program,
    records_by_stmt: HashMap<StmtId, Vec<usize>>,
    store: HashMap<MemLocation, i64>,
    ptrs: HashMap<String, String>,
    printed: Vec<i64>,
    inputs: &'p [i64],
    cursor: usize,
    fuel: u64,
    traced: bool,
    events: Vec<AccessEvent>,
    visits: HashMap<usize, u32>,
    seq: u32,
    headers_seen: Vec<bool>,
}

impl<'p> Interp<'p> {
    fn charge(&mut self) -> Result<(), InterpError> {
        if self.fuel == 0 {
            return Err(InterpError::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn load(&self, loc: &MemLocation) -> i64 {
        self.store.get(loc).copied().unwrap_or(0)
    }

    fn next_input(&mut self) -> Result<i64, InterpError> {
        let Some(&v) = self.inputs.get(self.cursor) else {
            return Err(InterpError::InputExhausted);
        };
        self.cursor += 1;
        Ok(v)
    }

    fn pointee(&self, ptr: &str) -> Result<&str, InterpError> {
        self.ptrs
            .get(ptr)
            .map(String::as_str)
            .ok_or_else(|| InterpError::UnboundPointer { ptr: ptr.to_string() })
    }

    /// Record an event for instruction record `rec`, mirroring the labels
    /// static expansion assigns. Header records never take visit ordinals.
    fn emit(&mut self, rec: usize, reads: Vec<MemLocation>, writes: Vec<MemLocation>) {
        if !self.traced {
            return;
        }
        let instr = &self.prog.instructions[rec];
        let header = matches!(
            instr.slot,
            InstrSlot::LoopInit | InstrSlot::LoopCond | InstrSlot::LoopIncr
        );
        let iter = if header || instr.loops.is_empty() {
            None
        } else {
            let count = self.visits.entry(rec).or_insert(0);
            *count += 1;
            Some(*count)
        };
        self.seq += 1;
        self.events.push(AccessEvent {
            label: InstanceLabel { base: instr.index, iter, seq: self.seq },
            reads,
            writes,
        });
    }

    fn eval(&mut self, e: &Expr, reads: &mut Vec<MemLocation>) -> Result<i64, InterpError> {
        match e {
            Expr::Const(v) => {
                push_unique(reads, MemLocation::Pr);
                Ok(*v)
            }
            Expr::Var(n) => {
                // A bare pointer name only reaches evaluation as a whole
                // `print` argument; `exec` intercepts that case first.
                let loc = MemLocation::Scalar(n.clone());
                push_unique(reads, loc.clone());
                Ok(self.load(&loc))
            }
            Expr::ArrayElem(name, subs) => {
                // Subscripts are index arithmetic: evaluated, not recorded.
                let mut scratch = Vec::new();
                let vals = subs
                    .iter()
                    .map(|s| self.eval(s, &mut scratch))
                    .collect::<Result<Vec<i64>, _>>()?;
                let loc = MemLocation::ArrayElem(name.clone(), vals);
                push_unique(reads, loc.clone());
                Ok(self.load(&loc))
            }
            Expr::Deref(p) => {
                let loc = MemLocation::Scalar(self.pointee(p)?.to_string());
                push_unique(reads, loc.clone());
                Ok(self.load(&loc))
            }
            Expr::Neg(inner) => Ok(self.eval(inner, reads)?.wrapping_neg()),
            Expr::Binary(op, l, r) => {
                let lv = self.eval(l, reads)?;
                let rv = self.eval(r, reads)?;
                match op {
                    crate::ast::BinOp::Add => Ok(lv.wrapping_add(rv)),
                    crate::ast::BinOp::Sub => Ok(lv.wrapping_sub(rv)),
                    crate::ast::BinOp::Mul => Ok(lv.wrapping_mul(rv)),
                    crate::ast::BinOp::Div => {
                        if rv == 0 {
                            Err(InterpError::DivisionByZero)
                        } else {
                            Ok(lv.wrapping_div(rv))
                        }
                    }
                }
            }
        }
    }

    fn bound(&mut self, b: &BoundExpr, reads: &mut Vec<MemLocation>) -> i64 {
        match b {
            BoundExpr::Const(v) => {
                push_unique(reads, MemLocation::Pr);
                *v
            }
            BoundExpr::Var(n) => {
                let loc = MemLocation::Scalar(n.clone());
                push_unique(reads, loc.clone());
                self.load(&loc)
            }
        }
    }

    fn exec(&mut self, id: StmtId) -> Result<Flow, InterpError> {
        self.charge()?;
        let node = self.prog.stmt(id).node.clone();
        let recs = self.records_by_stmt.get(&id).cloned().unwrap_or_default();
        match &node {
            StmtNode::Decl { entries } => {
                for (rec, entry) in recs.iter().zip(entries.iter().filter(|e| {
                    matches!(e, DeclEntry::Scalar { init: Some(_), .. })
                })) {
                    if let DeclEntry::Scalar { name, init: Some(v) } = entry {
                        let loc = MemLocation::Scalar(name.clone());
                        self.store.insert(loc.clone(), *v);
                        self.emit(*rec, vec![MemLocation::Pr], vec![loc]);
                    }
                }
                Ok(Flow::Normal)
            }
            StmtNode::Assign { target, value } => {
                let mut reads = Vec::new();
                let v = self.eval(value, &mut reads)?;
                let loc = match target {
                    LValue::Scalar(name) => MemLocation::Scalar(name.clone()),
                    LValue::ArrayElem(name, subs) => {
                        let mut scratch = Vec::new();
                        let vals = subs
                            .iter()
                            .map(|s| self.eval(s, &mut scratch))
                            .collect::<Result<Vec<i64>, _>>()?;
                        MemLocation::ArrayElem(name.clone(), vals)
                    }
                    LValue::Deref(p) => MemLocation::Scalar(self.pointee(p)?.to_string()),
                };
                self.store.insert(loc.clone(), v);
                self.emit(recs[0], reads, vec![loc]);
                Ok(Flow::Normal)
            }
            StmtNode::If { lhs, op, rhs, body } => {
                let mut reads = Vec::new();
                let l = self.eval(lhs, &mut reads)?;
                let r = self.eval(rhs, &mut reads)?;
                self.emit(recs[0], reads, vec![MemLocation::Hu]);
                if op.holds(l, r) {
                    self.exec(*body)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtNode::For { var, init, op, bound, step, body, loop_id } => {
                // Header events mirror expansion: once per loop, up front.
                if self.traced && !self.headers_seen[*loop_id] {
                    self.headers_seen[*loop_id] = true;
                    let var_loc = MemLocation::Scalar(var.clone());
                    let mut init_reads = Vec::new();
                    self.bound(init, &mut init_reads);
                    self.emit(recs[0], init_reads, vec![var_loc.clone()]);
                    let mut cond_reads = vec![var_loc.clone()];
                    self.bound(bound, &mut cond_reads);
                    self.emit(recs[1], cond_reads, vec![MemLocation::Hu]);
                    self.emit(
                        recs[2],
                        vec![var_loc.clone(), MemLocation::Pr],
                        vec![var_loc],
                    );
                }
                let var_loc = MemLocation::Scalar(var.clone());
                let mut scratch = Vec::new();
                let start = self.bound(init, &mut scratch);
                self.store.insert(var_loc.clone(), start);
                loop {
                    self.charge()?;
                    let current = self.load(&var_loc);
                    let limit = self.bound(bound, &mut scratch);
                    if !op.holds(current, limit) {
                        break;
                    }
                    let mut broke = false;
                    for &b in body {
                        match self.exec(b)? {
                            Flow::Normal => {}
                            Flow::Continue => break,
                            Flow::Break => {
                                broke = true;
                                break;
                            }
                        }
                    }
                    if broke {
                        break;
                    }
                    let next = self.load(&var_loc).wrapping_add(step.delta());
                    self.store.insert(var_loc.clone(), next);
                }
                Ok(Flow::Normal)
            }
            StmtNode::Read { targets } => {
                for (rec, name) in recs.iter().zip(targets.iter()) {
                    let v = self.next_input()?;
                    let loc = MemLocation::Scalar(name.clone());
                    self.store.insert(loc.clone(), v);
                    self.emit(*rec, vec![MemLocation::Hu], vec![loc]);
                }
                Ok(Flow::Normal)
            }
            StmtNode::Print { args } => {
                let mut reads = Vec::new();
                let mut values = Vec::new();
                for arg in args {
                    if let Expr::Var(name) = arg {
                        if self.prog.var_kind(name) == Some(VarKind::Pointer) {
                            let pointee = self.pointee(name)?.to_string();
                            let ordinal = self
                                .prog
                                .decls
                                .iter()
                                .position(|d| d.name == pointee)
                                .expect("pointee is declared")
                                as i64
                                + 1;
                            push_unique(&mut reads, MemLocation::Pointer(name.clone()));
                            values.push(ordinal);
                            continue;
                        }
                    }
                    values.push(self.eval(arg, &mut reads)?);
                }
                self.printed.extend(values);
                self.emit(recs[0], reads, vec![MemLocation::Hu]);
                Ok(Flow::Normal)
            }
            StmtNode::PtrAssign { ptr, target } => {
                self.ptrs.insert(ptr.clone(), target.clone());
                Ok(Flow::Normal)
            }
            StmtNode::Jump(kind) => Ok(match kind {
                crate::ast::JumpKind::Break => Flow::Break,
                crate::ast::JumpKind::Continue => Flow::Continue,
            }),
            StmtNode::Goto(_) => Ok(Flow::Normal),
        }
    }
}

fn push_unique(reads: &mut Vec<MemLocation>, loc: MemLocation) {
    if !reads.contains(&loc) {
        reads.push(loc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::InstrAccess;
    use crate::expand::{expand_loops, DEFAULT_UNROLL_CAP};
    use crate::frontend::parse_program;

    fn printed(src: &str) -> Vec<i64> {
        printed_with(src, &[])
    }

    fn printed_with(src: &str, inputs: &[i64]) -> Vec<i64> {
        interpret(&parse_program(src).expect("source parses"), inputs)
            .expect("execution succeeds")
            .printed
    }

    #[test]
    fn straight_line_programs_print_their_values() {
        assert_eq!(printed("int a,b=3,c=5,d;\na=b+5;\nd=b*10;\nprint d;\n"), vec![30]);
        assert_eq!(
            printed("int a,b=3,c=5,d;\na=b+5;\nd=b*c;\na=b+c;\nprint a,d;\n"),
            vec![8, 15]
        );
        assert_eq!(printed("int a,b=3,c;\na=b+5;\nc=a;\nprint c;\n"), vec![8]);
    }

    #[test]
    fn pointers_print_ordinals_and_dereference_values() {
        assert_eq!(
            printed("int a=3,*p,c;\np=&a;\nc=*p+a;\nprint p,*p,c;\n"),
            vec![1, 3, 6]
        );
    }

    #[test]
    fn unwritten_locations_read_as_zero() {
        assert_eq!(printed("int a,b[];\nprint a+1,b[4];\n"), vec![1, 0]);
    }

    #[test]
    fn loops_accumulate() {
        assert_eq!(
            printed("int s,i,c;\ns=0;\nfor(i=1;i<2;i++) {\n  s=s+i;\n  c=s*5;\n}\nprint s,c;\n"),
            vec![1, 5]
        );
        assert_eq!(
            printed("int c,s,i;\nc=0;\nfor(i=1;i<3;i++) {\n  s=c+i;\n  c=s;\n}\nprint c;\n"),
            vec![3]
        );
    }

    #[test]
    fn symbolic_bounds_execute_dynamically() {
        assert_eq!(
            printed_with("int i,n,s;\nread n;\nfor(i=1;i<n;i++) {\n  s=s+i;\n}\nprint s;\n", &[4]),
            vec![6]
        );
    }

    #[test]
    fn break_skips_the_increment_and_continue_does_not() {
        let src = "int s,i;\nfor(i=1;i<10;i++) {\n  if(i>2)\n    break;\n  s=s+i;\n}\nprint s,i;\n";
        assert_eq!(printed(src), vec![3, 3]);
        let src = "int s,i;\nfor(i=1;i<4;i++) {\n  if(i==2)\n    continue;\n  s=s+i;\n}\nprint s,i;\n";
        assert_eq!(printed(src), vec![4, 4]);
    }

    #[test]
    fn goto_is_inert() {
        assert_eq!(printed("int a=1;\ngoto end;\nprint a;\n"), vec![1]);
    }

    #[test]
    fn arithmetic_wraps() {
        assert_eq!(
            printed("int a=9223372036854775807,b;\nb=a+1;\nprint b;\n"),
            vec![i64::MIN]
        );
    }

    #[test]
    fn reads_consume_inputs_in_order() {
        assert_eq!(
            printed_with("int a,b;\nread a,b;\nprint b-a;\n", &[3, 10]),
            vec![7]
        );
        let prog = parse_program("int a,b;\nread a,b;\n").expect("source parses");
        assert_eq!(interpret(&prog, &[1]), Err(InterpError::InputExhausted));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let prog = parse_program("int a,b;\nb=a/0;\n").expect("source parses");
        assert_eq!(interpret(&prog, &[]), Err(InterpError::DivisionByZero));
        assert_eq!(printed("int a=7,b;\nb=a/2;\nprint b;\n"), vec![3]);
    }

    #[test]
    fn unbound_pointers_are_errors() {
        let prog = parse_program("int a,*p;\nprint p;\n").expect("source parses");
        assert_eq!(
            interpret(&prog, &[]),
            Err(InterpError::UnboundPointer { ptr: "p".into() })
        );
    }

    #[test]
    fn runaway_loops_hit_the_fuel_cap() {
        let prog = parse_program("int i,s;\nfor(i=1;i<5;i=i+0) {\n  s=s+1;\n}\n")
            .expect("source parses");
        assert_eq!(
            interpret_with_fuel(&prog, &[], 1_000),
            Err(InterpError::FuelExhausted)
        );
    }

    #[test]
    fn final_store_reflects_all_writes() {
        let prog = parse_program("int a,b=3;\na=b*2;\n").expect("source parses");
        let result = interpret(&prog, &[]).expect("execution succeeds");
        assert_eq!(
            result.final_store.get(&MemLocation::Scalar("a".into())),
            Some(&6)
        );
        assert_eq!(
            result.final_store.get(&MemLocation::Scalar("b".into())),
            Some(&3)
        );
    }

    #[test]
    fn trace_matches_static_expansion_for_plain_programs() {
        let src = "int a[],b[],s,i;\ns=3;\nfor(i=1;i<4;i++) {\n  a[i]=b[i]+s;\n  b[i]=a[i]*2;\n}\nprint s;\n";
        let prog = parse_program(src).expect("source parses");
        let xp = expand_loops(&prog, DEFAULT_UNROLL_CAP).expect("expansion succeeds");
        let (_, events) = interpret_traced(&prog, &[]).expect("execution succeeds");
        let static_stream: Vec<(String, Vec<MemLocation>, Vec<MemLocation>)> = xp
            .instances
            .iter()
            .filter_map(|i| match &i.access {
                InstrAccess::Pair(p) => {
                    Some((i.label.to_string(), p.reads.clone(), p.writes.clone()))
                }
                _ => None,
            })
            .collect();
        let dynamic_stream: Vec<(String, Vec<MemLocation>, Vec<MemLocation>)> = events
            .iter()
            .map(|e| (e.label.to_string(), e.reads.clone(), e.writes.clone()))
            .collect();
        assert_eq!(static_stream, dynamic_stream);
    }
}
