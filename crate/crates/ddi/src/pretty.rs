//! Canonical source rendering.
//!
//! Every program has exactly one canonical spelling: no spaces inside
//! expressions, one statement per line, two-space indentation per nesting
//! level, and `{`/`}` around loop bodies. Parsing the canonical rendering
//! yields the original tree back, which the transforms rely on when they
//! rebuild a program after editing it.
//!
//! [`render_instance`] prints one instruction instance with its subscripts
//! evaluated under a loop-variable environment, the notation dependence
//! reports use for expanded loop bodies (`a[2]=b[2]+c[2];`).

use crate::ast::{
    BinOp, BoundExpr, DeclEntry, Expr, InstrSlot, Instruction, LValue, Program, Step, Stmt,
    StmtId, StmtNode,
};

/// Render the whole program in canonical form, trailing newline included.
pub fn program_source(prog: &Program) -> String {
    render_program(prog, false)
}

/// Canonical form with a ` // k` comment naming each statement's instruction
/// index (loop headers show all three).
pub fn program_source_with_indices(prog: &Program) -> String {
    render_program(prog, true)
}

fn render_program(prog: &Program, indices: bool) -> String {
    let mut out = String::new();
    for &id in &prog.top {
        write_stmt(&mut out, prog, id, 0, indices);
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_stmt(out: &mut String, prog: &Program, id: StmtId, level: usize, indices: bool) {
    let stmt = prog.stmt(id);
    indent(out, level);
    match &stmt.node {
        StmtNode::Decl { entries } => {
            out.push_str("int ");
            for (i, entry) in entries.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match entry {
                    DeclEntry::Scalar { name, init: None } => out.push_str(name),
                    DeclEntry::Scalar { name, init: Some(v) } => {
                        out.push_str(name);
                        out.push('=');
                        out.push_str(&v.to_string());
                    }
                    DeclEntry::Array { name } => {
                        out.push_str(name);
                        out.push_str("[]");
                    }
                    DeclEntry::Pointer { name } => {
                        out.push('*');
                        out.push_str(name);
                    }
                }
            }
            out.push(';');
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
        StmtNode::Assign { target, value } => {
            write_lvalue(out, target);
            out.push('=');
            write_expr(out, value);
            out.push(';');
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
        StmtNode::If { lhs, op, rhs, body } => {
            out.push_str("if(");
            write_expr(out, lhs);
            out.push_str(op.symbol());
            write_expr(out, rhs);
            out.push(')');
            index_comment(out, prog, id, indices);
            out.push('\n');
            write_stmt(out, prog, *body, level + 1, indices);
        }
        StmtNode::For { var, init, op, bound, step, body, .. } => {
            out.push_str("for(");
            out.push_str(var);
            out.push('=');
            write_bound(out, init);
            out.push(';');
            out.push_str(var);
            out.push_str(op.symbol());
            write_bound(out, bound);
            out.push(';');
            write_step(out, var, *step);
            out.push_str(") {");
            index_comment(out, prog, id, indices);
            out.push('\n');
            for &b in body {
                write_stmt(out, prog, b, level + 1, indices);
            }
            indent(out, level);
            out.push_str("}\n");
        }
        StmtNode::Read { targets } => {
            out.push_str("read ");
            out.push_str(&targets.join(","));
            out.push(';');
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
        StmtNode::Print { args } => {
            out.push_str("print ");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr(out, a);
            }
            out.push(';');
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
        StmtNode::PtrAssign { ptr, target } => {
            out.push_str(ptr);
            out.push_str("=&");
            out.push_str(target);
            out.push(';');
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
        StmtNode::Jump(kind) => {
            out.push_str(match kind {
                crate::ast::JumpKind::Break => "break;",
                crate::ast::JumpKind::Continue => "continue;",
            });
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
        StmtNode::Goto(label) => {
            out.push_str("goto ");
            out.push_str(label);
            out.push(';');
            index_comment(out, prog, id, indices);
            out.push('\n');
        }
    }
}

/// Append ` // k` (or ` // k,k+1,k+2` for a loop header) when the statement
/// owns instruction records.
fn index_comment(out: &mut String, prog: &Program, id: StmtId, enabled: bool) {
    if !enabled {
        return;
    }
    if let StmtNode::For { loop_id, .. } = &prog.stmt(id).node {
        let meta = &prog.loops[*loop_id];
        out.push_str(&format!(
            " // {},{},{}",
            meta.init_index, meta.cond_index, meta.incr_index
        ));
        return;
    }
    let mut seen = Vec::new();
    for instr in prog.instructions.iter().filter(|i| i.stmt == id) {
        if !seen.contains(&instr.index) {
            seen.push(instr.index);
        }
    }
    if !seen.is_empty() {
        let list: Vec<String> = seen.iter().map(|i| i.to_string()).collect();
        out.push_str(" // ");
        out.push_str(&list.join(","));
    }
}

fn write_lvalue(out: &mut String, lv: &LValue) {
    match lv {
        LValue::Scalar(name) => out.push_str(name),
        LValue::ArrayElem(name, subs) => {
            out.push_str(name);
            for s in subs {
                out.push('[');
                write_expr(out, s);
                out.push(']');
            }
        }
        LValue::Deref(name) => {
            out.push('*');
            out.push_str(name);
        }
    }
}

fn write_bound(out: &mut String, b: &BoundExpr) {
    match b {
        BoundExpr::Const(v) => out.push_str(&v.to_string()),
        BoundExpr::Var(n) => out.push_str(n),
    }
}

fn write_step(out: &mut String, var: &str, step: Step) {
    match step {
        Step::Inc => {
            out.push_str(var);
            out.push_str("++");
        }
        Step::Dec => {
            out.push_str(var);
            out.push_str("--");
        }
        Step::AddConst(c) => out.push_str(&format!("{var}={var}+{c}")),
        Step::SubConst(c) => out.push_str(&format!("{var}={var}-{c}")),
    }
}

// ---- expressions ------------------------------------------------------

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Add | BinOp::Sub => 1,
        BinOp::Mul | BinOp::Div => 2,
    }
}

/// Render in a context with no surrounding operator.
pub fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Const(v) => out.push_str(&v.to_string()),
        Expr::Var(n) => out.push_str(n),
        Expr::ArrayElem(n, subs) => {
            out.push_str(n);
            for s in subs {
                out.push('[');
                write_expr(out, s);
                out.push(']');
            }
        }
        Expr::Deref(n) => {
            out.push('*');
            out.push_str(n);
        }
        Expr::Neg(inner) => {
            out.push('-');
            match inner.as_ref() {
                Expr::Binary(..) | Expr::Neg(_) => {
                    out.push('(');
                    write_expr(out, inner);
                    out.push(')');
                }
                _ => write_expr(out, inner),
            }
        }
        Expr::Binary(op, l, r) => {
            write_operand(out, l, *op, false);
            out.push_str(op.symbol());
            write_operand(out, r, *op, true);
        }
    }
}

/// Render as an operand of `parent`, parenthesizing where re-parsing would
/// otherwise regroup the tree (or glue `-` tokens into `--`).
fn write_operand(out: &mut String, e: &Expr, parent: BinOp, right: bool) {
    let needs_parens = match e {
        Expr::Binary(op, ..) => prec(*op) < prec(parent) || (right && prec(*op) <= prec(parent)),
        // `a--5` and `a--b` would lex as a decrement token.
        Expr::Neg(_) => right,
        Expr::Const(v) => right && *v < 0,
        _ => false,
    };
    if needs_parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

// ---- instance rendering ----------------------------------------------

/// Evaluate a subscript expression under the loop-variable environment.
/// `None` when a variable is unbound or a divisor is zero; the caller then
/// falls back to the symbolic spelling.
fn eval_sub(e: &Expr, env: &[(String, i64)]) -> Option<i64> {
    match e {
        Expr::Const(v) => Some(*v),
        Expr::Var(n) => env.iter().rev().find(|(name, _)| name == n).map(|(_, v)| *v),
        Expr::Neg(inner) => eval_sub(inner, env).map(i64::wrapping_neg),
        Expr::Binary(op, l, r) => {
            let l = eval_sub(l, env)?;
            let r = eval_sub(r, env)?;
            match op {
                BinOp::Add => Some(l.wrapping_add(r)),
                BinOp::Sub => Some(l.wrapping_sub(r)),
                BinOp::Mul => Some(l.wrapping_mul(r)),
                BinOp::Div => (r != 0).then(|| l.wrapping_div(r)),
            }
        }
        Expr::ArrayElem(..) | Expr::Deref(_) => None,
    }
}

/// Like [`write_expr`] but with every subscript replaced by its value under
/// `env`. Scalar variables stay symbolic — only index arithmetic is resolved.
fn write_expr_env(out: &mut String, e: &Expr, env: &[(String, i64)]) {
    match e {
        Expr::ArrayElem(n, subs) => {
            out.push_str(n);
            for s in subs {
                out.push('[');
                match eval_sub(s, env) {
                    Some(v) => out.push_str(&v.to_string()),
                    None => write_expr(out, s),
                }
                out.push(']');
            }
        }
        Expr::Binary(op, l, r) => {
            write_operand_env(out, l, *op, false, env);
            out.push_str(op.symbol());
            write_operand_env(out, r, *op, true, env);
        }
        Expr::Neg(inner) => {
            out.push('-');
            match inner.as_ref() {
                Expr::Binary(..) | Expr::Neg(_) => {
                    out.push('(');
                    write_expr_env(out, inner, env);
                    out.push(')');
                }
                _ => write_expr_env(out, inner, env),
            }
        }
        _ => write_expr(out, e),
    }
}

fn write_operand_env(out: &mut String, e: &Expr, parent: BinOp, right: bool, env: &[(String, i64)]) {
    let needs_parens = match e {
        Expr::Binary(op, ..) => prec(*op) < prec(parent) || (right && prec(*op) <= prec(parent)),
        Expr::Neg(_) => right,
        Expr::Const(v) => right && *v < 0,
        _ => false,
    };
    if needs_parens {
        out.push('(');
        write_expr_env(out, e, env);
        out.push(')');
    } else {
        write_expr_env(out, e, env);
    }
}

/// Print one instruction instance the way dependence listings spell it:
/// subscripts evaluated under `env`, scalars symbolic, loop-header pieces as
/// bare fragments (`i=2`, `i<5`, `i++`), statements with their semicolon.
pub fn render_instance(prog: &Program, instr: &Instruction, env: &[(String, i64)]) -> String {
    let stmt: &Stmt = prog.stmt(instr.stmt);
    let mut out = String::new();
    match (&stmt.node, instr.slot) {
        (StmtNode::Decl { entries }, InstrSlot::DeclEntry(k)) => {
            if let DeclEntry::Scalar { name, init: Some(v) } = &entries[k] {
                out.push_str(&format!("int {name}={v};"));
            }
        }
        (StmtNode::Read { targets }, InstrSlot::ReadTarget(k)) => {
            out.push_str(&format!("read {};", targets[k]));
        }
        (StmtNode::Assign { target, value }, _) => {
            match target {
                LValue::ArrayElem(name, subs) => {
                    out.push_str(name);
                    for s in subs {
                        out.push('[');
                        match eval_sub(s, env) {
                            Some(v) => out.push_str(&v.to_string()),
                            None => write_expr(&mut out, s),
                        }
                        out.push(']');
                    }
                }
                LValue::Scalar(name) => out.push_str(name),
                LValue::Deref(name) => {
                    out.push('*');
                    out.push_str(name);
                }
            }
            out.push('=');
            write_expr_env(&mut out, value, env);
            out.push(';');
        }
        (StmtNode::If { lhs, op, rhs, .. }, _) => {
            out.push_str("if(");
            write_expr_env(&mut out, lhs, env);
            out.push_str(op.symbol());
            write_expr_env(&mut out, rhs, env);
            out.push(')');
        }
        (StmtNode::For { var, init, op, bound, step, .. }, slot) => match slot {
            InstrSlot::LoopInit => {
                out.push_str(var);
                out.push('=');
                write_bound(&mut out, init);
            }
            InstrSlot::LoopCond => {
                out.push_str(var);
                out.push_str(op.symbol());
                write_bound(&mut out, bound);
            }
            _ => write_step(&mut out, var, *step),
        },
        (StmtNode::Print { args }, _) => {
            out.push_str("print ");
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_expr_env(&mut out, a, env);
            }
            out.push(';');
        }
        (StmtNode::PtrAssign { ptr, target }, _) => {
            out.push_str(&format!("{ptr}=&{target};"));
        }
        (StmtNode::Jump(kind), _) => out.push_str(match kind {
            crate::ast::JumpKind::Break => "break;",
            crate::ast::JumpKind::Continue => "continue;",
        }),
        (StmtNode::Goto(label), _) => out.push_str(&format!("goto {label};")),
        _ => {}
    }
    out
}
