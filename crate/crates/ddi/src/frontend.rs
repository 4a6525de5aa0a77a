//! Lexer and recursive-descent parser for the mini-language.
//!
//! The accepted grammar is documented in `docs/grammar.md`. Parsing also
//! performs the semantic checks that make the rest of the pipeline total:
//! declare-before-use, single declaration per name, pointer/array usage rules,
//! and the loop-variable write ban. Statement indices are assigned here and
//! never change afterwards.

use crate::ast::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: u32, col: u32, message: String },
    #[error("unknown identifier '{name}' at line {line}")]
    UnknownIdentifier { name: String, line: u32 },
    #[error("unsupported construct at line {line}: {what}")]
    UnsupportedConstruct { what: String, line: u32 },
    #[error("duplicate declaration of '{name}' at line {line}")]
    DuplicateDeclaration { name: String, line: u32 },
    #[error("'{name}' is a reserved name (line {line})")]
    ReservedName { name: String, line: u32 },
}

impl FrontendError {
    fn parse(line: u32, col: u32, message: impl Into<String>) -> Self {
        FrontendError::Parse { line, col, message: message.into() }
    }
}

type Result<T> = std::result::Result<T, FrontendError>;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    KwInt,
    KwIf,
    KwFor,
    KwWhile,
    KwRead,
    KwPrint,
    KwBreak,
    KwContinue,
    KwGoto,
    Plus,
    Minus,
    Star,
    Slash,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Amp,
    PlusPlus,
    MinusMinus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(v) => format!("integer {v}"),
            Tok::Ident(n) => format!("identifier '{n}'"),
            Tok::KwInt => "'int'".into(),
            Tok::KwIf => "'if'".into(),
            Tok::KwFor => "'for'".into(),
            Tok::KwWhile => "'while'".into(),
            Tok::KwRead => "'read'".into(),
            Tok::KwPrint => "'print'".into(),
            Tok::KwBreak => "'break'".into(),
            Tok::KwContinue => "'continue'".into(),
            Tok::KwGoto => "'goto'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Assign => "'='".into(),
            Tok::EqEq => "'=='".into(),
            Tok::NotEq => "'!='".into(),
            Tok::Lt => "'<'".into(),
            Tok::Le => "'<='".into(),
            Tok::Gt => "'>'".into(),
            Tok::Ge => "'>='".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Amp => "'&'".into(),
            Tok::PlusPlus => "'++'".into(),
            Tok::MinusMinus => "'--'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            out.push(Token { tok: $tok, line, col });
            i += $len;
            col += $len as u32;
        }};
    }
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let value: i64 = text.parse().map_err(|_| {
                    FrontendError::parse(line, col, format!("integer literal '{text}' out of range"))
                })?;
                out.push(Token { tok: Tok::Int(value), line, col });
                col += (i - start) as u32;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match word {
                    "int" => Tok::KwInt,
                    "if" => Tok::KwIf,
                    "for" => Tok::KwFor,
                    "while" => Tok::KwWhile,
                    "read" => Tok::KwRead,
                    "print" => Tok::KwPrint,
                    "break" => Tok::KwBreak,
                    "continue" => Tok::KwContinue,
                    "goto" => Tok::KwGoto,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push(Token { tok, line, col });
                col += (i - start) as u32;
            }
            '+' if bytes.get(i + 1) == Some(&b'+') => push!(Tok::PlusPlus, 2),
            '-' if bytes.get(i + 1) == Some(&b'-') => push!(Tok::MinusMinus, 2),
            '=' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::EqEq, 2),
            '!' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::NotEq, 2),
            '<' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::Le, 2),
            '>' if bytes.get(i + 1) == Some(&b'=') => push!(Tok::Ge, 2),
            '+' => push!(Tok::Plus, 1),
            '-' => push!(Tok::Minus, 1),
            '*' => push!(Tok::Star, 1),
            '/' => push!(Tok::Slash, 1),
            '=' => push!(Tok::Assign, 1),
            '<' => push!(Tok::Lt, 1),
            '>' => push!(Tok::Gt, 1),
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            ',' => push!(Tok::Comma, 1),
            ';' => push!(Tok::Semi, 1),
            '&' => push!(Tok::Amp, 1),
            _ => {
                return Err(FrontendError::parse(
                    line,
                    col,
                    format!("unexpected character '{c}'"),
                ))
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    prog: Program,
    /// Instruction index counter.
    next_index: u32,
    /// Active loop nest, outermost first.
    loop_stack: Vec<LoopId>,
    /// Depth of enclosing `if` guards.
    guard_depth: u32,
    /// Pointer -> pointee bindings seen so far (top-level only), for the
    /// loop-variable deref-write check.
    ptr_targets: Vec<(String, String)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.tokens[self.pos];
        (t.line, t.col)
    }

    fn line(&self) -> u32 {
        self.tokens[self.pos].line
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let (line, col) = self.here();
            Err(FrontendError::parse(
                line,
                col,
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        if let Tok::Ident(n) = self.peek().clone() {
            self.bump();
            Ok(n)
        } else {
            let (line, col) = self.here();
            Err(FrontendError::parse(
                line,
                col,
                format!("expected an identifier, found {}", self.peek().describe()),
            ))
        }
    }

    fn fresh_index(&mut self) -> u32 {
        self.next_index += 1;
        self.next_index
    }

    fn declared(&self, name: &str) -> Option<VarKind> {
        self.prog.var_kind(name)
    }

    fn require_kind(&self, name: &str, want: VarKind, line: u32) -> Result<()> {
        match self.declared(name) {
            None => Err(FrontendError::UnknownIdentifier { name: name.into(), line }),
            Some(k) if k == want => Ok(()),
            Some(_) => {
                let noun = match want {
                    VarKind::Scalar => "a scalar",
                    VarKind::Array => "an array",
                    VarKind::Pointer => "a pointer",
                };
                Err(FrontendError::UnsupportedConstruct {
                    what: format!("'{name}' used as {noun}"),
                    line,
                })
            }
        }
    }

    fn push_instr(&mut self, index: u32, kind: InstrKind, stmt: StmtId, slot: InstrSlot) {
        self.prog.instructions.push(Instruction {
            index,
            kind,
            stmt,
            slot,
            loops: self.loop_stack.clone(),
            guarded: self.guard_depth > 0,
        });
        for &l in &self.loop_stack {
            self.prog.loops[l].body_indices.push(index);
        }
    }

    fn add_stmt(&mut self, node: StmtNode, line: u32) -> StmtId {
        let id = self.prog.stmts.len();
        self.prog.stmts.push(Stmt { node, line });
        id
    }

    // ---- declarations -------------------------------------------------

    fn parse_decl(&mut self) -> Result<StmtId> {
        let line = self.line();
        if !self.loop_stack.is_empty() || self.guard_depth > 0 {
            return Err(FrontendError::UnsupportedConstruct {
                what: "declaration inside a loop or conditional".into(),
                line,
            });
        }
        self.expect(Tok::KwInt)?;
        let mut entries = Vec::new();
        loop {
            let entry = self.parse_decl_entry(line)?;
            let name = entry.name().to_string();
            if name == "PR" || name == "HU" {
                return Err(FrontendError::ReservedName { name, line });
            }
            if self.declared(&name).is_some()
                || entries.iter().any(|e: &DeclEntry| e.name() == name)
            {
                return Err(FrontendError::DuplicateDeclaration { name, line });
            }
            let kind = match &entry {
                DeclEntry::Scalar { .. } => VarKind::Scalar,
                DeclEntry::Array { .. } => VarKind::Array,
                DeclEntry::Pointer { .. } => VarKind::Pointer,
            };
            self.prog.decls.push(Decl { name, kind });
            entries.push(entry);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        let has_init = entries
            .iter()
            .any(|e| matches!(e, DeclEntry::Scalar { init: Some(_), .. }));
        let id = self.add_stmt(StmtNode::Decl { entries }, line);
        if has_init {
            // Initialized entries become constant-assignment records sharing
            // one index; an initializer-free declaration takes no index.
            let index = self.fresh_index();
            let StmtNode::Decl { entries } = &self.prog.stmts[id].node else {
                unreachable!()
            };
            let slots: Vec<usize> = entries
                .iter()
                .enumerate()
                .filter(|(_, e)| matches!(e, DeclEntry::Scalar { init: Some(_), .. }))
                .map(|(i, _)| i)
                .collect();
            for slot in slots {
                self.push_instr(index, InstrKind::Declaration, id, InstrSlot::DeclEntry(slot));
            }
        }
        Ok(id)
    }

    fn parse_decl_entry(&mut self, line: u32) -> Result<DeclEntry> {
        if *self.peek() == Tok::Star {
            self.bump();
            let name = self.expect_ident()?;
            return Ok(DeclEntry::Pointer { name });
        }
        let name = self.expect_ident()?;
        match self.peek() {
            Tok::LBracket => {
                self.bump();
                self.expect(Tok::RBracket)?;
                Ok(DeclEntry::Array { name })
            }
            Tok::Assign => {
                self.bump();
                let value = self.parse_const_int()?;
                let _ = line;
                Ok(DeclEntry::Scalar { name, init: Some(value) })
            }
            _ => Ok(DeclEntry::Scalar { name, init: None }),
        }
    }

    fn parse_const_int(&mut self) -> Result<i64> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        if let Tok::Int(v) = *self.peek() {
            self.bump();
            Ok(if negative { v.wrapping_neg() } else { v })
        } else {
            let (line, col) = self.here();
            Err(FrontendError::parse(
                line,
                col,
                format!("expected an integer constant, found {}", self.peek().describe()),
            ))
        }
    }

    // ---- expressions --------------------------------------------------

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Minus => {
                self.bump();
                // Fold a negated literal into the literal itself so `-5` has
                // one canonical tree no matter how it was spelled.
                match self.parse_factor()? {
                    Expr::Const(v) => Ok(Expr::Const(v.wrapping_neg())),
                    e => Ok(Expr::Neg(Box::new(e))),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Star => {
                self.bump();
                if *self.peek() == Tok::Star {
                    return Err(FrontendError::UnsupportedConstruct {
                        what: "multi-level pointer dereference ('**p')".into(),
                        line,
                    });
                }
                let name = self.expect_ident()?;
                self.require_kind(&name, VarKind::Pointer, line)?;
                Ok(Expr::Deref(name))
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    return Err(FrontendError::UnsupportedConstruct {
                        what: format!("function call '{name}(...)'"),
                        line,
                    });
                }
                match self.declared(&name) {
                    None => Err(FrontendError::UnknownIdentifier { name, line }),
                    Some(VarKind::Array) => {
                        let subs = self.parse_subscripts(&name, line)?;
                        Ok(Expr::ArrayElem(name, subs))
                    }
                    Some(VarKind::Pointer) => {
                        // Legal only as a bare `print` argument; the print
                        // parser builds that case itself, so reaching here
                        // means a pointer leaked into arithmetic.
                        Err(FrontendError::UnsupportedConstruct {
                            what: format!("pointer '{name}' used as a value"),
                            line,
                        })
                    }
                    Some(VarKind::Scalar) => Ok(Expr::Var(name)),
                }
            }
            other => {
                let (l, c) = self.here();
                Err(FrontendError::parse(
                    l,
                    c,
                    format!("expected an expression, found {}", other.describe()),
                ))
            }
        }
    }

    fn parse_subscripts(&mut self, name: &str, line: u32) -> Result<Vec<Expr>> {
        let mut subs = Vec::new();
        while *self.peek() == Tok::LBracket {
            self.bump();
            subs.push(self.parse_expr()?);
            self.expect(Tok::RBracket)?;
        }
        if subs.is_empty() {
            return Err(FrontendError::UnsupportedConstruct {
                what: format!("array '{name}' used without a subscript"),
                line,
            });
        }
        Ok(subs)
    }

    // ---- statements ---------------------------------------------------

    fn parse_stmt(&mut self) -> Result<StmtId> {
        let line = self.line();
        match self.peek().clone() {
            Tok::KwInt => self.parse_decl(),
            Tok::KwWhile => Err(FrontendError::UnsupportedConstruct {
                what: "while loop".into(),
                line,
            }),
            Tok::KwIf => self.parse_if(),
            Tok::KwFor => self.parse_for(),
            Tok::KwRead => self.parse_read(),
            Tok::KwPrint => self.parse_print(),
            Tok::KwBreak | Tok::KwContinue => {
                let kind = if self.bump() == Tok::KwBreak {
                    JumpKind::Break
                } else {
                    JumpKind::Continue
                };
                self.expect(Tok::Semi)?;
                if self.loop_stack.is_empty() {
                    let word = match kind {
                        JumpKind::Break => "break",
                        JumpKind::Continue => "continue",
                    };
                    return Err(FrontendError::parse(
                        line,
                        1,
                        format!("'{word}' outside of a loop"),
                    ));
                }
                let id = self.add_stmt(StmtNode::Jump(kind), line);
                let index = self.fresh_index();
                self.push_instr(index, InstrKind::ControlTransfer, id, InstrSlot::Whole);
                Ok(id)
            }
            Tok::KwGoto => {
                self.bump();
                let label = self.expect_ident()?;
                self.expect(Tok::Semi)?;
                let id = self.add_stmt(StmtNode::Goto(label), line);
                let index = self.fresh_index();
                self.push_instr(index, InstrKind::ControlTransfer, id, InstrSlot::Whole);
                Ok(id)
            }
            Tok::Star | Tok::Ident(_) => self.parse_assign(),
            other => {
                let (l, c) = self.here();
                Err(FrontendError::parse(
                    l,
                    c,
                    format!("expected a statement, found {}", other.describe()),
                ))
            }
        }
    }

    fn parse_if(&mut self) -> Result<StmtId> {
        let line = self.line();
        self.expect(Tok::KwIf)?;
        self.expect(Tok::LParen)?;
        let lhs = self.parse_expr()?;
        let op = self.parse_relop()?;
        let rhs = self.parse_expr()?;
        self.expect(Tok::RParen)?;
        let id = self.add_stmt(
            StmtNode::If { lhs, op, rhs, body: usize::MAX },
            line,
        );
        let index = self.fresh_index();
        self.push_instr(index, InstrKind::Conditional, id, InstrSlot::Whole);
        self.guard_depth += 1;
        let body = self.parse_guarded_stmt();
        self.guard_depth -= 1;
        let body = body?;
        if let StmtNode::If { body: slot, .. } = &mut self.prog.stmts[id].node {
            *slot = body;
        }
        Ok(id)
    }

    /// The single statement an `if` guards. Declarations are not statements in
    /// guard position.
    fn parse_guarded_stmt(&mut self) -> Result<StmtId> {
        let line = self.line();
        if *self.peek() == Tok::KwInt {
            return Err(FrontendError::UnsupportedConstruct {
                what: "declaration inside a loop or conditional".into(),
                line,
            });
        }
        self.parse_stmt()
    }

    fn parse_relop(&mut self) -> Result<RelOp> {
        let op = match self.peek() {
            Tok::Lt => RelOp::Lt,
            Tok::Le => RelOp::Le,
            Tok::Gt => RelOp::Gt,
            Tok::Ge => RelOp::Ge,
            Tok::EqEq => RelOp::Eq,
            Tok::NotEq => RelOp::Ne,
            other => {
                let (l, c) = self.here();
                return Err(FrontendError::parse(
                    l,
                    c,
                    format!("expected a comparison operator, found {}", other.describe()),
                ));
            }
        };
        self.bump();
        Ok(op)
    }

    fn parse_bound(&mut self, line: u32) -> Result<BoundExpr> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => Ok(BoundExpr::Const(self.parse_const_int()?)),
            Tok::Ident(name) => {
                self.bump();
                self.require_kind(&name, VarKind::Scalar, line)?;
                Ok(BoundExpr::Var(name))
            }
            other => {
                let (l, c) = self.here();
                Err(FrontendError::parse(
                    l,
                    c,
                    format!("expected a loop bound, found {}", other.describe()),
                ))
            }
        }
    }

    fn parse_for(&mut self) -> Result<StmtId> {
        let line = self.line();
        self.expect(Tok::KwFor)?;
        self.expect(Tok::LParen)?;
        let var = self.expect_ident()?;
        self.require_kind(&var, VarKind::Scalar, line)?;
        if self
            .loop_stack
            .iter()
            .any(|&l| self.prog.loops[l].var == var)
        {
            return Err(FrontendError::UnsupportedConstruct {
                what: format!("loop variable '{var}' reused by an enclosing loop"),
                line,
            });
        }
        self.expect(Tok::Assign)?;
        let init = self.parse_bound(line)?;
        self.expect(Tok::Semi)?;
        let cond_var = self.expect_ident()?;
        if cond_var != var {
            return Err(FrontendError::parse(
                line,
                1,
                format!("loop condition tests '{cond_var}' but the loop variable is '{var}'"),
            ));
        }
        let op = self.parse_relop()?;
        let bound = self.parse_bound(line)?;
        self.expect(Tok::Semi)?;
        let step = self.parse_step(&var, line)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;

        let loop_id = self.prog.loops.len();
        let init_index = self.fresh_index();
        let cond_index = self.fresh_index();
        let incr_index = self.fresh_index();
        self.prog.loops.push(LoopMeta {
            var: var.clone(),
            stmt: usize::MAX,
            init_index,
            cond_index,
            incr_index,
            body_indices: Vec::new(),
            parent: self.loop_stack.last().copied(),
        });
        let id = self.add_stmt(
            StmtNode::For {
                var,
                init,
                op,
                bound,
                step,
                body: Vec::new(),
                loop_id,
            },
            line,
        );
        self.prog.loops[loop_id].stmt = id;
        self.push_instr(init_index, InstrKind::LoopInit, id, InstrSlot::LoopInit);
        self.push_instr(cond_index, InstrKind::LoopCond, id, InstrSlot::LoopCond);
        self.push_instr(incr_index, InstrKind::LoopIncr, id, InstrSlot::LoopIncr);

        self.loop_stack.push(loop_id);
        let mut body = Vec::new();
        let body_result = loop {
            if *self.peek() == Tok::RBrace {
                self.bump();
                break Ok(());
            }
            if *self.peek() == Tok::Eof {
                let (l, c) = self.here();
                break Err(FrontendError::parse(l, c, "unclosed loop body".to_string()));
            }
            if *self.peek() == Tok::KwInt {
                break Err(FrontendError::UnsupportedConstruct {
                    what: "declaration inside a loop or conditional".into(),
                    line: self.line(),
                });
            }
            match self.parse_stmt() {
                Ok(s) => body.push(s),
                Err(e) => break Err(e),
            }
        };
        self.loop_stack.pop();
        body_result?;
        if let StmtNode::For { body: slot, .. } = &mut self.prog.stmts[id].node {
            *slot = body;
        }
        Ok(id)
    }

    fn parse_step(&mut self, var: &str, line: u32) -> Result<Step> {
        let name = self.expect_ident()?;
        if name != var {
            return Err(FrontendError::parse(
                line,
                1,
                format!("loop increment updates '{name}' but the loop variable is '{var}'"),
            ));
        }
        match self.peek().clone() {
            Tok::PlusPlus => {
                self.bump();
                Ok(Step::Inc)
            }
            Tok::MinusMinus => {
                self.bump();
                Ok(Step::Dec)
            }
            Tok::Assign => {
                self.bump();
                let lhs = self.expect_ident()?;
                if lhs != var {
                    return Err(FrontendError::parse(
                        line,
                        1,
                        format!("loop increment must have the form {var}={var}+c or {var}={var}-c"),
                    ));
                }
                let sub = match self.bump() {
                    Tok::Plus => false,
                    Tok::Minus => true,
                    other => {
                        return Err(FrontendError::parse(
                            line,
                            1,
                            format!(
                                "expected '+' or '-' in the loop increment, found {}",
                                other.describe()
                            ),
                        ))
                    }
                };
                let c = self.parse_const_int()?;
                // Keep the stored constant non-negative so the canonical
                // rendering never emits a `-` that would lex as `--`.
                Ok(match (sub, c < 0) {
                    (false, false) => Step::AddConst(c),
                    (false, true) => Step::SubConst(c.wrapping_neg()),
                    (true, false) => Step::SubConst(c),
                    (true, true) => Step::AddConst(c.wrapping_neg()),
                })
            }
            other => Err(FrontendError::parse(
                line,
                1,
                format!("expected a loop increment, found {}", other.describe()),
            )),
        }
    }

    fn parse_read(&mut self) -> Result<StmtId> {
        let line = self.line();
        self.expect(Tok::KwRead)?;
        let mut targets = Vec::new();
        loop {
            let name = self.expect_ident()?;
            self.require_kind(&name, VarKind::Scalar, line)?;
            self.check_loop_var_write(&name, line)?;
            if targets.contains(&name) {
                return Err(FrontendError::parse(
                    line,
                    1,
                    format!("duplicate read target '{name}'"),
                ));
            }
            targets.push(name);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        let n = targets.len();
        let id = self.add_stmt(StmtNode::Read { targets }, line);
        let index = self.fresh_index();
        for slot in 0..n {
            self.push_instr(index, InstrKind::Input, id, InstrSlot::ReadTarget(slot));
        }
        Ok(id)
    }

    fn parse_print(&mut self) -> Result<StmtId> {
        let line = self.line();
        self.expect(Tok::KwPrint)?;
        let mut args = Vec::new();
        loop {
            // A bare pointer name is allowed here (prints its address value);
            // anywhere deeper in an expression it is rejected.
            if let Tok::Ident(name) = self.peek().clone() {
                if self.declared(&name) == Some(VarKind::Pointer)
                    && matches!(self.peek2(), Tok::Comma | Tok::Semi)
                {
                    self.bump();
                    args.push(Expr::Var(name));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                        continue;
                    }
                    break;
                }
            }
            args.push(self.parse_expr()?);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        let id = self.add_stmt(StmtNode::Print { args }, line);
        let index = self.fresh_index();
        self.push_instr(index, InstrKind::Output, id, InstrSlot::Whole);
        Ok(id)
    }

    /// Rejects writes to a variable that is the loop variable of any active
    /// enclosing loop; the expander's iteration environments would otherwise
    /// disagree with execution.
    fn check_loop_var_write(&self, name: &str, line: u32) -> Result<()> {
        if self
            .loop_stack
            .iter()
            .any(|&l| self.prog.loops[l].var == name)
        {
            return Err(FrontendError::UnsupportedConstruct {
                what: format!("write to loop variable '{name}' inside its loop"),
                line,
            });
        }
        Ok(())
    }

    fn parse_assign(&mut self) -> Result<StmtId> {
        let line = self.line();
        // Left-hand side.
        let target = if *self.peek() == Tok::Star {
            self.bump();
            if *self.peek() == Tok::Star {
                return Err(FrontendError::UnsupportedConstruct {
                    what: "multi-level pointer dereference ('**p')".into(),
                    line,
                });
            }
            let name = self.expect_ident()?;
            self.require_kind(&name, VarKind::Pointer, line)?;
            if let Some((_, pointee)) = self.ptr_targets.iter().rev().find(|(p, _)| p == &name) {
                self.check_loop_var_write(&pointee.clone(), line)?;
            }
            LValue::Deref(name)
        } else {
            let name = self.expect_ident()?;
            if *self.peek() == Tok::LParen {
                return Err(FrontendError::UnsupportedConstruct {
                    what: format!("function call '{name}(...)'"),
                    line,
                });
            }
            match self.declared(&name) {
                None => return Err(FrontendError::UnknownIdentifier { name, line }),
                Some(VarKind::Array) => {
                    let subs = self.parse_subscripts(&name, line)?;
                    LValue::ArrayElem(name, subs)
                }
                Some(VarKind::Pointer) => {
                    // Only `p = &x;` is a legal pointer write.
                    self.expect(Tok::Assign)?;
                    if *self.peek() != Tok::Amp {
                        return Err(FrontendError::UnsupportedConstruct {
                            what: format!("pointer '{name}' assigned a non-address value"),
                            line,
                        });
                    }
                    self.bump();
                    let target = self.expect_ident()?;
                    self.require_kind(&target, VarKind::Scalar, line)?;
                    self.expect(Tok::Semi)?;
                    if !self.loop_stack.is_empty() || self.guard_depth > 0 {
                        return Err(FrontendError::UnsupportedConstruct {
                            what: "pointer assignment inside a loop or conditional".into(),
                            line,
                        });
                    }
                    self.ptr_targets.push((name.clone(), target.clone()));
                    let id = self.add_stmt(StmtNode::PtrAssign { ptr: name, target }, line);
                    let index = self.fresh_index();
                    self.push_instr(index, InstrKind::PointerAssign, id, InstrSlot::Whole);
                    return Ok(id);
                }
                Some(VarKind::Scalar) => {
                    self.check_loop_var_write(&name, line)?;
                    LValue::Scalar(name)
                }
            }
        };
        self.expect(Tok::Assign)?;
        if *self.peek() == Tok::Amp {
            return Err(FrontendError::UnsupportedConstruct {
                what: "address-of on the right-hand side of a non-pointer assignment".into(),
                line,
            });
        }
        let value = self.parse_expr()?;
        self.expect(Tok::Semi)?;
        let kind = if matches!(value, Expr::Binary(..)) {
            InstrKind::Arithmetic
        } else {
            InstrKind::Assignment
        };
        let id = self.add_stmt(StmtNode::Assign { target, value }, line);
        let index = self.fresh_index();
        self.push_instr(index, kind, id, InstrSlot::Whole);
        Ok(id)
    }

    fn parse_program(mut self) -> Result<Program> {
        while *self.peek() != Tok::Eof {
            let id = self.parse_stmt()?;
            self.prog.top.push(id);
        }
        Ok(self.prog)
    }
}

/// Parses source text into a [`Program`].
///
/// Instruction indices count consecutively from 1 in textual order; a `for`
/// header takes three consecutive indices (init, condition, increment) ahead
/// of its body, an `if` takes one ahead of its guarded statement, and a
/// declaration takes one index only when it initializes something.
pub fn parse_program(src: &str) -> Result<Program> {
    let tokens = lex(src)?;
    let parser = Parser {
        tokens,
        pos: 0,
        prog: Program::default(),
        next_index: 0,
        loop_stack: Vec::new(),
        guard_depth: 0,
        ptr_targets: Vec::new(),
    };
    parser.parse_program()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indices(prog: &Program) -> Vec<u32> {
        prog.instructions.iter().map(|i| i.index).collect()
    }

    #[test]
    fn straight_line_indices_match_labels() {
        let src = "int a,b,c,d;\nc=a+b;\nd=a-10;\nif(c>d)\nb=a+10;\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(indices(&prog), vec![1, 2, 3, 4]);
        assert_eq!(
            prog.instructions.iter().map(|i| i.kind).collect::<Vec<_>>(),
            vec![
                InstrKind::Arithmetic,
                InstrKind::Arithmetic,
                InstrKind::Conditional,
                InstrKind::Arithmetic,
            ]
        );
        assert!(prog.instructions[3].guarded);
    }

    #[test]
    fn empty_program_parses() {
        let prog = parse_program("").unwrap();
        assert!(prog.instructions.is_empty());
        assert!(prog.top.is_empty());
    }

    #[test]
    fn for_header_takes_three_consecutive_indices() {
        let src = "int c,s,i;\nc=0;\nfor(i=1;i<3;i++) {\ns=c+i;\nc=s;\n}\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(indices(&prog), vec![1, 2, 3, 4, 5, 6]);
        let lp = &prog.loops[0];
        assert_eq!((lp.init_index, lp.cond_index, lp.incr_index), (2, 3, 4));
        assert_eq!(lp.body_indices, vec![5, 6]);
        assert_eq!(prog.instruction_by_index(5).unwrap().loops, vec![0]);
    }

    #[test]
    fn declaration_initializers_share_one_index() {
        let src = "int a,b=3,c=5,d;\na=b+5;\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(indices(&prog), vec![1, 1, 2]);
        assert_eq!(prog.instructions[0].kind, InstrKind::Declaration);
        assert_eq!(prog.instructions[0].slot, InstrSlot::DeclEntry(1));
        assert_eq!(prog.instructions[1].slot, InstrSlot::DeclEntry(2));
    }

    #[test]
    fn bare_declaration_takes_no_index() {
        let src = "int a,b;\na=b;\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(indices(&prog), vec![1]);
    }

    #[test]
    fn read_targets_each_get_a_record() {
        let src = "int a,b;\nread a,b;\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(indices(&prog), vec![1, 1]);
        assert!(prog.instructions.iter().all(|i| i.kind == InstrKind::Input));
    }

    #[test]
    fn while_is_rejected() {
        let err = parse_program("int a;\nwhile(a>0)\na=a-1;\n").unwrap_err();
        assert!(matches!(err, FrontendError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn function_call_is_rejected() {
        let err = parse_program("int a;\na=f(1);\n").unwrap_err();
        assert!(
            matches!(err, FrontendError::UnsupportedConstruct { ref what, .. } if what.contains("function call"))
        );
    }

    #[test]
    fn double_deref_is_rejected() {
        let err = parse_program("int a,*p;\np=&a;\n**p=1;\n").unwrap_err();
        assert!(matches!(err, FrontendError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn undeclared_identifier_is_reported() {
        let err = parse_program("int a;\na=b+1;\n").unwrap_err();
        assert_eq!(
            err,
            FrontendError::UnknownIdentifier { name: "b".into(), line: 2 }
        );
    }

    #[test]
    fn duplicate_declaration_is_reported() {
        let err = parse_program("int a;\nint a;\n").unwrap_err();
        assert!(matches!(err, FrontendError::DuplicateDeclaration { .. }));
    }

    #[test]
    fn reserved_names_are_rejected() {
        let err = parse_program("int PR;\n").unwrap_err();
        assert!(matches!(err, FrontendError::ReservedName { .. }));
    }

    #[test]
    fn pointer_assignment_in_loop_is_rejected() {
        let src = "int a,i,*p;\nfor(i=0;i<2;i++) {\np=&a;\n}\n";
        let err = parse_program(src).unwrap_err();
        assert!(
            matches!(err, FrontendError::UnsupportedConstruct { ref what, .. } if what.contains("pointer assignment"))
        );
    }

    #[test]
    fn pointer_assignment_under_if_is_rejected() {
        let src = "int a,b,*p;\nif(a>b)\np=&a;\n";
        let err = parse_program(src).unwrap_err();
        assert!(matches!(err, FrontendError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn loop_variable_writes_are_rejected() {
        let src = "int i;\nfor(i=0;i<2;i++) {\ni=i+1;\n}\n";
        assert!(matches!(
            parse_program(src).unwrap_err(),
            FrontendError::UnsupportedConstruct { .. }
        ));
        let src = "int i;\nfor(i=0;i<2;i++) {\nread i;\n}\n";
        assert!(matches!(
            parse_program(src).unwrap_err(),
            FrontendError::UnsupportedConstruct { .. }
        ));
        let src = "int a,i,*p;\np=&i;\nfor(i=0;i<2;i++) {\n*p=3;\n}\n";
        assert!(matches!(
            parse_program(src).unwrap_err(),
            FrontendError::UnsupportedConstruct { .. }
        ));
    }

    #[test]
    fn break_outside_loop_is_an_error() {
        let err = parse_program("break;\n").unwrap_err();
        assert!(matches!(err, FrontendError::Parse { .. }));
    }

    #[test]
    fn pointer_read_allowed_only_as_print_argument() {
        assert!(parse_program("int a,*p;\np=&a;\nprint p;\n").is_ok());
        let err = parse_program("int a,b,*p;\np=&a;\nb=p+1;\n").unwrap_err();
        assert!(matches!(err, FrontendError::UnsupportedConstruct { .. }));
    }

    #[test]
    fn symbolic_bounds_parse() {
        let src = "int i,n;\nfor(i=0;i<n;i++) {\nprint i;\n}\n";
        let prog = parse_program(src).unwrap();
        let StmtNode::For { bound, .. } = &prog.stmt(prog.loops[0].stmt).node else {
            panic!("not a for");
        };
        assert_eq!(*bound, BoundExpr::Var("n".into()));
    }

    #[test]
    fn comments_are_skipped() {
        let src = "// a comment\nint a; // trailing\na=1;\n";
        assert!(parse_program(src).is_ok());
    }

    #[test]
    fn nested_loop_membership_is_transitive() {
        let src = "int a[],c[],i,j;\nfor(i=1;i<3;i++) {\nfor(j=1;j<3;j++) {\na[i][j]=c[i-1][j-1];\nc[i][j]=a[i-1][j];\n}\n}\n";
        let prog = parse_program(src).unwrap();
        assert_eq!(prog.loops.len(), 2);
        let outer = &prog.loops[0];
        let inner = &prog.loops[1];
        assert_eq!(outer.body_indices, vec![4, 5, 6, 7, 8]);
        assert_eq!(inner.body_indices, vec![7, 8]);
        assert_eq!(inner.parent, Some(0));
    }
}
