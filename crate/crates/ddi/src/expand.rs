//! Loop expansion: flattening a program into its instance stream.
//!
//! Loops with constant bounds are unrolled completely. Header instructions
//! (init, condition, increment) appear exactly once each with their bare
//! index — for a nested loop, during the first iteration of its enclosing
//! loop — while body instructions get one instance per visit, labeled
//! `index.ordinal` with a flat per-instruction ordinal. The global `seq`
//! gives every instance its place in the static chronology that dependence
//! direction and the transforms' liveness windows are judged against.
//!
//! Guarded statements and control transfers are expanded like everything
//! else: whether they execute is run-time behavior, but they occupy a place
//! in the stream (a `break` instance is what makes the transforms treat the
//! rest of its loop's writes as uncertain).

use std::collections::HashMap;

use thiserror::Error;

use crate::ast::{BoundExpr, InstanceLabel, InstrSlot, Program, Stmt, StmtId, StmtNode};
use crate::classifier::{instance_access, AccessError, InstrAccess, PointsToMap};

/// Default limit on the number of emitted instances.
pub const DEFAULT_UNROLL_CAP: usize = 10_000;

/// One instance of an instruction in the expanded stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionInstance {
    /// Position of the instruction record in [`Program::instructions`].
    pub instr: usize,
    pub label: InstanceLabel,
    /// Active loop variables at emission, outermost first.
    pub env: Vec<(String, i64)>,
    pub access: InstrAccess,
}

/// The fully unrolled program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedProgram {
    /// Instances in stream order; `instances[k].label.seq == k + 1`.
    pub instances: Vec<InstructionInstance>,
    pub unroll_cap: usize,
}

impl ExpandedProgram {
    /// Instance with the given (1-based) stream position.
    pub fn by_seq(&self, seq: u32) -> &InstructionInstance {
        &self.instances[(seq - 1) as usize]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExpandError {
    #[error("loop bound '{var}' is symbolic; expansion needs constant bounds")]
    SymbolicBound { var: String },
    #[error("expansion exceeded {cap} instances; raise the unroll cap to go further")]
    UnrollCapExceeded { cap: usize },
    #[error("loop variable '{var}' overflowed while stepping")]
    CounterOverflow { var: String },
    #[error(transparent)]
    Access(#[from] AccessError),
}

/// Unroll every loop and compute each instance's access pair.
pub fn expand_loops(prog: &Program, cap: usize) -> Result<ExpandedProgram, ExpandError> {
    let mut records_by_stmt: HashMap<StmtId, Vec<usize>> = HashMap::new();
    for (pos, instr) in prog.instructions.iter().enumerate() {
        records_by_stmt.entry(instr.stmt).or_default().push(pos);
    }
    let mut ex = Expander {
        prog,
        pts: PointsToMap::build(prog),
        records_by_stmt,
        cap,
        seq: 0,
        visits: HashMap::new(),
        header_done: vec![false; prog.loops.len()],
        env: Vec::new(),
        out: Vec::new(),
    };
    for &id in &prog.top {
        ex.walk(id)?;
    }
    Ok(ExpandedProgram { instances: ex.out, unroll_cap: cap })
}

struct Expander<'p> {
    prog: &'p Program,
    pts: PointsToMap,
    records_by_stmt: HashMap<StmtId, Vec<usize>>,
    cap: usize,
    seq: u32,
    /// Flat visit ordinal per instruction record position.
    visits: HashMap<usize, u32>,
    header_done: Vec<bool>,
    env: Vec<(String, i64)>,
    out: Vec<InstructionInstance>,
}

impl<'p> Expander<'p> {
    fn records(&self, id: StmtId) -> Vec<usize> {
        self.records_by_stmt.get(&id).cloned().unwrap_or_default()
    }

    fn emit(&mut self, rec: usize) -> Result<(), ExpandError> {
        if self.out.len() >= self.cap {
            return Err(ExpandError::UnrollCapExceeded { cap: self.cap });
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
        let access = instance_access(self.prog, instr, &self.env, &self.pts)?;
        self.out.push(InstructionInstance {
            instr: rec,
            label: InstanceLabel { base: instr.index, iter, seq: self.seq },
            env: self.env.clone(),
            access,
        });
        Ok(())
    }

    fn walk(&mut self, id: StmtId) -> Result<(), ExpandError> {
        let stmt: &Stmt = self.prog.stmt(id);
        match &stmt.node {
            StmtNode::Decl { .. }
            | StmtNode::Assign { .. }
            | StmtNode::Read { .. }
            | StmtNode::Print { .. }
            | StmtNode::PtrAssign { .. }
            | StmtNode::Jump(_)
            | StmtNode::Goto(_) => {
                for rec in self.records(id) {
                    self.emit(rec)?;
                }
                Ok(())
            }
            StmtNode::If { body, .. } => {
                for rec in self.records(id) {
                    self.emit(rec)?;
                }
                self.walk(*body)
            }
            StmtNode::For { var, init, op, bound, step, body, loop_id } => {
                if !self.header_done[*loop_id] {
                    self.header_done[*loop_id] = true;
                    for rec in self.records(id) {
                        self.emit(rec)?;
                    }
                }
                let mut value = bound_value(init)?;
                let limit = bound_value(bound)?;
                let mut iterations = 0usize;
                while op.holds(value, limit) {
                    iterations += 1;
                    if iterations > self.cap {
                        return Err(ExpandError::UnrollCapExceeded { cap: self.cap });
                    }
                    self.env.push((var.clone(), value));
                    for &b in body {
                        let walked = self.walk(b);
                        if walked.is_err() {
                            self.env.pop();
                            return walked;
                        }
                    }
                    self.env.pop();
                    value = value
                        .checked_add(step.delta())
                        .ok_or_else(|| ExpandError::CounterOverflow { var: var.clone() })?;
                }
                Ok(())
            }
        }
    }
}

fn bound_value(b: &BoundExpr) -> Result<i64, ExpandError> {
    match b {
        BoundExpr::Const(v) => Ok(*v),
        BoundExpr::Var(n) => Err(ExpandError::SymbolicBound { var: n.clone() }),
    }
}
