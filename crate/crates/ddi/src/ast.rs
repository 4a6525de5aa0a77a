//! Syntax tree and program representation.
//!
//! A parsed program keeps two coordinated views: the statement tree (used by
//! the pretty-printer and the interpreter) and a flat list of numbered
//! instruction records (used by classification, expansion, and the graph).
//! Statement indices are the labels that appear on graph edges and in
//! dependence reports; they are assigned once at parse time and survive
//! transforms unchanged, so a transformed program may legitimately have gaps.

use std::fmt;

/// Identifier of a statement in [`Program::stmts`].
pub type StmtId = usize;

/// Identifier of a loop in [`Program::loops`].
pub type LoopId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            RelOp::Lt => lhs < rhs,
            RelOp::Le => lhs <= rhs,
            RelOp::Gt => lhs > rhs,
            RelOp::Ge => lhs >= rhs,
            RelOp::Eq => lhs == rhs,
            RelOp::Ne => lhs != rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    /// A scalar variable read. A pointer name is only legal here as a bare
    /// `print` argument; the parser enforces that.
    Var(String),
    /// `a[e]` or `a[e][e]` — one expression per subscript position.
    ArrayElem(String, Vec<Expr>),
    /// `*p` — reads (or, as an lvalue, writes) the pointee of `p`.
    Deref(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LValue {
    Scalar(String),
    ArrayElem(String, Vec<Expr>),
    Deref(String),
}

/// One entry of an `int ...;` declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclEntry {
    Scalar { name: String, init: Option<i64> },
    Array { name: String },
    Pointer { name: String },
}

impl DeclEntry {
    pub fn name(&self) -> &str {
        match self {
            DeclEntry::Scalar { name, .. }
            | DeclEntry::Array { name }
            | DeclEntry::Pointer { name } => name,
        }
    }
}

/// A loop bound position: a literal, or a scalar variable (accepted
/// syntactically, rejected by the expander with a symbolic-bound error).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundExpr {
    Const(i64),
    Var(String),
}

/// The increment clause of a `for` header. All forms reduce to adding a
/// constant (possibly negative) to the loop variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// `i++`
    Inc,
    /// `i--`
    Dec,
    /// `i=i+c`
    AddConst(i64),
    /// `i=i-c`
    SubConst(i64),
}

impl Step {
    pub fn delta(self) -> i64 {
        match self {
            Step::Inc => 1,
            Step::Dec => -1,
            Step::AddConst(c) => c,
            Step::SubConst(c) => c.wrapping_neg(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    Break,
    Continue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtNode {
    Decl {
        entries: Vec<DeclEntry>,
    },
    Assign {
        target: LValue,
        value: Expr,
    },
    If {
        lhs: Expr,
        op: RelOp,
        rhs: Expr,
        body: StmtId,
    },
    For {
        var: String,
        init: BoundExpr,
        op: RelOp,
        bound: BoundExpr,
        step: Step,
        body: Vec<StmtId>,
        loop_id: LoopId,
    },
    Read {
        targets: Vec<String>,
    },
    Print {
        args: Vec<Expr>,
    },
    /// `p = &x;`
    PtrAssign {
        ptr: String,
        target: String,
    },
    Jump(JumpKind),
    /// `goto L;` — parses, classifies as a non-memory-access instruction, and
    /// is a no-op at run time (the grammar has no label definitions).
    Goto(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub node: StmtNode,
    pub line: u32,
}

/// The syntactic category of one instruction record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstrKind {
    /// An initialized entry of a declaration (`b=3` inside `int a,b=3;`).
    Declaration,
    /// `lhs = expr;` where the right-hand side is a constant or a single value.
    Assignment,
    /// `lhs = expr;` with an arithmetic operator on the right-hand side.
    Arithmetic,
    Conditional,
    LoopInit,
    LoopCond,
    LoopIncr,
    /// One target of a `read` statement.
    Input,
    Output,
    ControlTransfer,
    PointerAssign,
}

/// The part of a statement one instruction record stands for. Declarations
/// and multi-target `read`s expand to several records sharing one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrSlot {
    Whole,
    /// Which entry of a declaration (position in `entries`).
    DeclEntry(usize),
    /// Which target of a `read` (position in `targets`).
    ReadTarget(usize),
    LoopInit,
    LoopCond,
    LoopIncr,
}

/// One numbered instruction. `index` is the label base used on edges and in
/// dependence records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub index: u32,
    pub kind: InstrKind,
    pub stmt: StmtId,
    pub slot: InstrSlot,
    /// Enclosing loops, outermost first.
    pub loops: Vec<LoopId>,
    /// True when any enclosing `if` guards this instruction.
    pub guarded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Scalar,
    Array,
    Pointer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub name: String,
    pub kind: VarKind,
}

/// Metadata for one `for` loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopMeta {
    pub var: String,
    pub stmt: StmtId,
    pub init_index: u32,
    pub cond_index: u32,
    pub incr_index: u32,
    /// Indices of every instruction strictly inside the loop, nested loops'
    /// headers and bodies included.
    pub body_indices: Vec<u32>,
    pub parent: Option<LoopId>,
}

impl LoopMeta {
    pub fn contains_index(&self, index: u32) -> bool {
        self.body_indices.binary_search(&index).is_ok()
    }
}

/// A parsed (or transformed) program.
#[derive(Debug, Clone, Default)]
pub struct Program {
    /// Statement arena; the tree structure lives in `For` bodies, `If` bodies,
    /// and [`Program::top`].
    pub stmts: Vec<Stmt>,
    /// Top-level statement order.
    pub top: Vec<StmtId>,
    /// Flat instruction records ordered by textual position.
    pub instructions: Vec<Instruction>,
    /// Declared variables in declaration order.
    pub decls: Vec<Decl>,
    pub loops: Vec<LoopMeta>,
}

impl Program {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn var_kind(&self, name: &str) -> Option<VarKind> {
        self.decl(name).map(|d| d.kind)
    }

    /// First instruction record with the given index. Records produced from
    /// one declaration or `read` share an index but agree on everything the
    /// callers of this accessor care about (statement, loops, guardedness).
    pub fn instruction_by_index(&self, index: u32) -> Option<&Instruction> {
        self.instructions.iter().find(|i| i.index == index)
    }

    pub fn stmt(&self, id: StmtId) -> &Stmt {
        &self.stmts[id]
    }

    /// Highest instruction index, 0 for an instruction-free program.
    pub fn max_index(&self) -> u32 {
        self.instructions.iter().map(|i| i.index).max().unwrap_or(0)
    }
}

/// A concrete memory location: the nodes of the dependence graph.
///
/// `Pr` stands in for constants supplied by the programmer and `Hu` for
/// hardware units (input/output devices and the comparison unit); neither is
/// ever the location of a dependence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MemLocation {
    Scalar(String),
    ArrayElem(String, Vec<i64>),
    /// The pointer variable itself (its address value), not its pointee.
    Pointer(String),
    Pr,
    Hu,
}

impl MemLocation {
    pub fn is_sentinel(&self) -> bool {
        matches!(self, MemLocation::Pr | MemLocation::Hu)
    }

    /// Name of the underlying variable, if this is a variable location.
    pub fn var_name(&self) -> Option<&str> {
        match self {
            MemLocation::Scalar(n) | MemLocation::ArrayElem(n, _) | MemLocation::Pointer(n) => {
                Some(n)
            }
            MemLocation::Pr | MemLocation::Hu => None,
        }
    }

    fn sort_key(&self) -> (u8, &str, &[i64]) {
        match self {
            MemLocation::Scalar(n) => (0, n.as_str(), &[]),
            MemLocation::ArrayElem(n, subs) => (0, n.as_str(), subs.as_slice()),
            MemLocation::Pointer(n) => (0, n.as_str(), &[]),
            MemLocation::Pr => (1, "", &[]),
            MemLocation::Hu => (2, "", &[]),
        }
    }
}

impl PartialOrd for MemLocation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MemLocation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for MemLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemLocation::Scalar(n) | MemLocation::Pointer(n) => write!(f, "{n}"),
            MemLocation::ArrayElem(n, subs) => {
                write!(f, "{n}")?;
                for s in subs {
                    write!(f, "[{s}]")?;
                }
                Ok(())
            }
            MemLocation::Pr => write!(f, "PR"),
            MemLocation::Hu => write!(f, "HU"),
        }
    }
}

/// Label of one instruction instance after loop expansion.
///
/// `iter` is the flat visit ordinal for instructions inside loops and `None`
/// for straight-line and loop-header instructions, matching the `4.2` / `4`
/// notation in reports. `seq` is the global position in the expanded stream
/// and identifies the instance uniquely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InstanceLabel {
    pub base: u32,
    pub iter: Option<u32>,
    pub seq: u32,
}

impl InstanceLabel {
    pub fn bare(base: u32, seq: u32) -> Self {
        InstanceLabel { base, iter: None, seq }
    }
}

impl PartialOrd for InstanceLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for InstanceLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.seq.cmp(&other.seq)
    }
}

impl fmt::Display for InstanceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.iter {
            Some(k) => write!(f, "{}.{}", self.base, k),
            None => write!(f, "{}", self.base),
        }
    }
}
