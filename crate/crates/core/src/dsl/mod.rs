//! Text formats: the statechart DSL, expressions, scenario scripts,
//! test-case text forms and DOT export.

mod dot;
mod format;
mod lexer;
mod render;
mod scenario;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{BinaryOp, BindingKind, Expr, Scope, Type, UnaryOp, Value};
use crate::model::{
    Action, EventDecl, Param, StateKind, StateNode, Statechart, StructureError, TransitionDef,
    VarDecl,
};
use lexer::{lex_line, Tok, Token};

pub use dot::emit_dot;
pub use format::{format_testcase, parse_testcase_text, TextFormError};
pub use render::render_model;
pub use scenario::{parse_scenarios, render_scenarios};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Lex,
    Parse,
    Resolve,
    Type,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Lex => "lex",
            ErrorKind::Parse => "parse",
            ErrorKind::Resolve => "resolve",
            ErrorKind::Type => "type",
        })
    }
}

/// First error found in a document. Line and column are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{line}:{column}: {kind} error: {message}")]
pub struct SourceError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: ErrorKind,
}

impl SourceError {
    pub(crate) fn new(
        kind: ErrorKind,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        SourceError {
            line,
            column,
            message: message.into(),
            kind,
        }
    }
}

const RESERVED: [&str; 5] = ["true", "false", "not", "and", "or"];

/// Iterates `(line number, line text)` with LF or CRLF endings.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

pub(crate) struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(toks: &'a [Token], line: usize, line_len: usize) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col: line_len + 1,
        }
    }

    pub(crate) fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|t| &t.tok)
    }

    fn peek_ident(&self) -> Option<&'a str> {
        match self.peek_tok() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn skip(&mut self) {
        self.pos += 1;
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    /// Position of the next token, or one past the end of the line.
    pub(crate) fn here(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => (self.line, self.end_col),
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> SourceError {
        let (line, col) = self.here();
        SourceError::new(ErrorKind::Parse, line, col, message)
    }

    fn unexpected(&self, wanted: &str) -> SourceError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.tok.describe())),
            None => self.error(format!("expected {wanted}, found end of line")),
        }
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), SourceError> {
        if self.peek_tok() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    /// An identifier that is not a reserved word. Returns it with its column.
    pub(crate) fn ident(&mut self, what: &str) -> Result<(String, usize), SourceError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s),
                col,
                ..
            }) if !RESERVED.contains(&s.as_str()) => {
                self.pos += 1;
                Ok((s.clone(), *col))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> Result<(), SourceError> {
        if self.peek_ident() == Some(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident() == Some(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn finish(&self) -> Result<(), SourceError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error(format!("unexpected {}", t.tok.describe()))),
        }
    }
}

// ---------------------------------------------------------------------------
// Expressions

/// Untyped syntax tree with source positions.
#[derive(Clone, Debug)]
pub(crate) struct SExpr {
    kind: SKind,
    line: usize,
    col: usize,
}

#[derive(Clone, Debug)]
enum SKind {
    Int(i64),
    Bool(bool),
    Name(String),
    Unary(UnaryOp, Box<SExpr>),
    Binary(BinaryOp, Box<SExpr>, Box<SExpr>),
}

fn comparison_op(tok: &Tok) -> Option<BinaryOp> {
    Some(match tok {
        Tok::Lt => BinaryOp::Lt,
        Tok::Le => BinaryOp::Le,
        Tok::Gt => BinaryOp::Gt,
        Tok::Ge => BinaryOp::Ge,
        Tok::EqEq => BinaryOp::Eq,
        Tok::Ne => BinaryOp::Ne,
        _ => return None,
    })
}

pub(crate) fn parse_sexpr(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    parse_or(cur)
}

fn parse_or(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let mut lhs = parse_and(cur)?;
    while cur.peek_ident() == Some("or") {
        let (line, col) = cur.here();
        cur.bump();
        let rhs = parse_and(cur)?;
        lhs = binary(BinaryOp::Or, lhs, rhs, line, col);
    }
    Ok(lhs)
}

fn parse_and(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let mut lhs = parse_cmp(cur)?;
    while cur.peek_ident() == Some("and") {
        let (line, col) = cur.here();
        cur.bump();
        let rhs = parse_cmp(cur)?;
        lhs = binary(BinaryOp::And, lhs, rhs, line, col);
    }
    Ok(lhs)
}

fn parse_cmp(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let lhs = parse_add(cur)?;
    let Some(op) = cur.peek_tok().and_then(comparison_op) else {
        return Ok(lhs);
    };
    let (line, col) = cur.here();
    cur.bump();
    let rhs = parse_add(cur)?;
    if cur.peek_tok().and_then(comparison_op).is_some() {
        return Err(cur.error("comparison operators cannot be chained; add parentheses"));
    }
    Ok(binary(op, lhs, rhs, line, col))
}

fn parse_add(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let mut lhs = parse_mul(cur)?;
    loop {
        let op = match cur.peek_tok() {
            Some(Tok::Plus) => BinaryOp::Add,
            Some(Tok::Minus) => BinaryOp::Sub,
            _ => return Ok(lhs),
        };
        let (line, col) = cur.here();
        cur.bump();
        let rhs = parse_mul(cur)?;
        lhs = binary(op, lhs, rhs, line, col);
    }
}

fn parse_mul(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let mut lhs = parse_unary(cur)?;
    while cur.peek_tok() == Some(&Tok::Star) {
        let (line, col) = cur.here();
        cur.bump();
        let rhs = parse_unary(cur)?;
        lhs = binary(BinaryOp::Mul, lhs, rhs, line, col);
    }
    Ok(lhs)
}

fn parse_unary(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let (line, col) = cur.here();
    if cur.peek_ident() == Some("not") {
        cur.bump();
        let inner = parse_unary(cur)?;
        return Ok(SExpr {
            kind: SKind::Unary(UnaryOp::Not, Box::new(inner)),
            line,
            col,
        });
    }
    if cur.peek_tok() == Some(&Tok::Minus) {
        cur.bump();
        // A minus directly before a literal is part of the literal.
        if let Some(Tok::Int(v)) = cur.peek_tok() {
            cur.bump();
            return Ok(SExpr {
                kind: SKind::Int(-v),
                line,
                col,
            });
        }
        let inner = parse_unary(cur)?;
        return Ok(SExpr {
            kind: SKind::Unary(UnaryOp::Neg, Box::new(inner)),
            line,
            col,
        });
    }
    parse_primary(cur)
}

fn parse_primary(cur: &mut Cursor<'_>) -> Result<SExpr, SourceError> {
    let (line, col) = cur.here();
    let kind = match cur.peek_tok() {
        Some(Tok::Int(v)) => SKind::Int(*v),
        Some(Tok::Ident(s)) if s == "true" => SKind::Bool(true),
        Some(Tok::Ident(s)) if s == "false" => SKind::Bool(false),
        Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) => SKind::Name(s.clone()),
        Some(Tok::LParen) => {
            cur.bump();
            let inner = parse_or(cur)?;
            cur.expect(Tok::RParen)?;
            return Ok(inner);
        }
        _ => return Err(cur.unexpected("an expression")),
    };
    cur.bump();
    Ok(SExpr { kind, line, col })
}

fn binary(op: BinaryOp, lhs: SExpr, rhs: SExpr, line: usize, col: usize) -> SExpr {
    SExpr {
        kind: SKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        line,
        col,
    }
}

/// Resolves names and checks types, producing a typed [`Expr`].
pub(crate) fn check_sexpr(e: &SExpr, scope: &Scope) -> Result<(Expr, Type), SourceError> {
    let type_err = |msg: String| SourceError::new(ErrorKind::Type, e.line, e.col, msg);
    match &e.kind {
        SKind::Int(v) => Ok((Expr::Int(*v), Type::Int)),
        SKind::Bool(v) => Ok((Expr::Bool(*v), Type::Bool)),
        SKind::Name(n) => match scope.lookup(n) {
            Some(b) => Ok((Expr::Var(n.clone()), b.ty)),
            None => Err(SourceError::new(
                ErrorKind::Resolve,
                e.line,
                e.col,
                format!("unknown name `{n}`"),
            )),
        },
        SKind::Unary(op, inner) => {
            let (x, ty) = check_sexpr(inner, scope)?;
            let want = if *op == UnaryOp::Not {
                Type::Bool
            } else {
                Type::Int
            };
            if ty != want {
                let sym = if *op == UnaryOp::Not { "not" } else { "-" };
                return Err(type_err(format!("`{sym}` expects {want}, found {ty}")));
            }
            Ok((Expr::unary(*op, x), want))
        }
        SKind::Binary(op, lhs, rhs) => {
            let (l, lt) = check_sexpr(lhs, scope)?;
            let (r, rt) = check_sexpr(rhs, scope)?;
            let typed = Expr::binary(*op, l, r);
            let result = match op {
                BinaryOp::Eq | BinaryOp::Ne => {
                    if lt != rt {
                        return Err(type_err(format!(
                            "`{}` compares {lt} with {rt}",
                            op.symbol()
                        )));
                    }
                    Type::Bool
                }
                _ => {
                    let (operand, result) = match op {
                        BinaryOp::And | BinaryOp::Or => (Type::Bool, Type::Bool),
                        BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => (Type::Int, Type::Int),
                        _ => (Type::Int, Type::Bool),
                    };
                    if lt != operand || rt != operand {
                        let found = if lt != operand { lt } else { rt };
                        return Err(type_err(format!(
                            "`{}` expects {operand} operands, found {found}",
                            op.symbol()
                        )));
                    }
                    result
                }
            };
            Ok((typed, result))
        }
    }
}

/// Parses and type-checks a standalone expression against `scope`.
pub fn parse_expr(text: &str, scope: &Scope) -> Result<Expr, SourceError> {
    let mut out = None;
    for (line, raw) in lines(text) {
        let toks = lex_line(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        if out.is_some() {
            return Err(SourceError::new(
                ErrorKind::Parse,
                line,
                toks[0].col,
                "expression continues past its first line",
            ));
        }
        let mut cur = Cursor::new(&toks, line, raw.chars().count());
        let e = parse_sexpr(&mut cur)?;
        cur.finish()?;
        out = Some(check_sexpr(&e, scope)?.0);
    }
    out.ok_or_else(|| SourceError::new(ErrorKind::Parse, 1, 1, "empty expression"))
}

// ---------------------------------------------------------------------------
// Models

struct PendingTransition {
    line: usize,
    id: String,
    source: (String, usize),
    target: (String, usize),
    trigger: Option<(String, usize)>,
    guard: Option<SExpr>,
    actions: Vec<PendingAction>,
}

enum PendingAction {
    Assign {
        var: String,
        col: usize,
        expr: SExpr,
    },
    Emit(String),
}

struct PendingState {
    line: usize,
    node: StateNode,
    parent_col: usize,
    child_col: usize,
}

fn parse_type(cur: &mut Cursor<'_>) -> Result<Type, SourceError> {
    if cur.eat_keyword("int") {
        Ok(Type::Int)
    } else if cur.eat_keyword("bool") {
        Ok(Type::Bool)
    } else {
        Err(cur.unexpected("`int` or `bool`"))
    }
}

fn parse_literal(cur: &mut Cursor<'_>) -> Result<Value, SourceError> {
    let negative = cur.peek_tok() == Some(&Tok::Minus);
    if negative {
        cur.bump();
    }
    match cur.peek_tok() {
        Some(Tok::Int(v)) => {
            let v = if negative { -v } else { *v };
            cur.bump();
            Ok(Value::Int(v))
        }
        Some(Tok::Ident(s)) if !negative && (s == "true" || s == "false") => {
            let v = s == "true";
            cur.bump();
            Ok(Value::Bool(v))
        }
        _ => Err(cur.unexpected("a literal")),
    }
}

/// Parses a statechart document into a resolved, type-checked model.
/// Stops at the first error.
pub fn parse_model(text: &str) -> Result<Statechart, SourceError> {
    let mut sc: Option<Statechart> = None;
    let mut var_lines: HashMap<String, usize> = HashMap::new();
    let mut event_lines: HashMap<String, usize> = HashMap::new();
    let mut states: Vec<PendingState> = Vec::new();
    let mut accepts: Vec<(String, usize, usize)> = Vec::new();
    let mut transitions: Vec<PendingTransition> = Vec::new();

    for (line, raw) in lines(text) {
        let toks = lex_line(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(&toks, line, raw.chars().count());
        let Some(chart) = sc.as_mut() else {
            cur.keyword("statechart")?;
            let (name, _) = cur.ident("a chart name")?;
            cur.finish()?;
            sc = Some(Statechart::new(name));
            continue;
        };
        let (word, word_col) = match cur.peek() {
            Some(Token {
                tok: Tok::Ident(w),
                col,
                ..
            }) => (w.clone(), *col),
            _ => return Err(cur.unexpected("a declaration")),
        };
        cur.bump();
        match word.as_str() {
            "var" => {
                let (name, col) = cur.ident("a variable name")?;
                cur.expect(Tok::Colon)?;
                let ty = parse_type(&mut cur)?;
                cur.expect(Tok::Eq)?;
                let (lline, lcol) = cur.here();
                let initial = parse_literal(&mut cur)?;
                cur.finish()?;
                if initial.ty() != ty {
                    return Err(SourceError::new(
                        ErrorKind::Type,
                        lline,
                        lcol,
                        format!("initial value of `{name}` must be {ty}"),
                    ));
                }
                if var_lines.insert(name.clone(), line).is_some() {
                    return Err(SourceError::new(
                        ErrorKind::Resolve,
                        line,
                        col,
                        format!("duplicate variable `{name}`"),
                    ));
                }
                chart.vars.push(VarDecl { name, ty, initial });
            }
            "event" => {
                let (name, col) = cur.ident("an event name")?;
                let mut params: Vec<Param> = Vec::new();
                if cur.peek_tok() == Some(&Tok::LParen) {
                    cur.bump();
                    loop {
                        let (pname, pcol) = cur.ident("a parameter name")?;
                        cur.expect(Tok::Colon)?;
                        let ty = parse_type(&mut cur)?;
                        if params.iter().any(|p| p.name == pname) {
                            return Err(SourceError::new(
                                ErrorKind::Resolve,
                                line,
                                pcol,
                                format!("duplicate parameter `{pname}`"),
                            ));
                        }
                        params.push(Param { name: pname, ty });
                        if cur.peek_tok() == Some(&Tok::Comma) {
                            cur.bump();
                            continue;
                        }
                        cur.expect(Tok::RParen)?;
                        break;
                    }
                }
                cur.finish()?;
                if event_lines.insert(name.clone(), line).is_some() {
                    return Err(SourceError::new(
                        ErrorKind::Resolve,
                        line,
                        col,
                        format!("duplicate event `{name}`"),
                    ));
                }
                chart.events.push(EventDecl { name, params });
            }
            "state" => {
                let (id, col) = cur.ident("a state name")?;
                let mut node = StateNode::simple(id.clone());
                let (mut parent_col, mut child_col) = (col, col);
                let mut seen: Vec<String> = Vec::new();
                while !cur.at_end() {
                    let (attr, acol) = cur.ident("`kind`, `parent` or `initialchild`")?;
                    if seen.contains(&attr) {
                        return Err(SourceError::new(
                            ErrorKind::Parse,
                            line,
                            acol,
                            format!("`{attr}` given twice"),
                        ));
                    }
                    cur.expect(Tok::Eq)?;
                    match attr.as_str() {
                        "kind" => {
                            let (k, kcol) = cur.ident("a state kind")?;
                            node.kind = match k.as_str() {
                                "initial" => StateKind::Initial,
                                "composite" => StateKind::Composite,
                                "simple" => StateKind::Simple,
                                _ => {
                                    return Err(SourceError::new(
                                        ErrorKind::Parse,
                                        line,
                                        kcol,
                                        format!("unknown state kind `{k}`"),
                                    ))
                                }
                            };
                        }
                        "parent" => {
                            let (p, pcol) = cur.ident("a state name")?;
                            node.parent = Some(p);
                            parent_col = pcol;
                        }
                        "initialchild" => {
                            let (c, ccol) = cur.ident("a state name")?;
                            node.initial_child = Some(c);
                            child_col = ccol;
                        }
                        _ => {
                            return Err(SourceError::new(
                                ErrorKind::Parse,
                                line,
                                acol,
                                format!("unknown state attribute `{attr}`"),
                            ))
                        }
                    }
                    seen.push(attr);
                }
                if states.iter().any(|s| s.node.id == id) {
                    return Err(SourceError::new(
                        ErrorKind::Resolve,
                        line,
                        col,
                        format!("duplicate state `{id}`"),
                    ));
                }
                states.push(PendingState {
                    line,
                    node,
                    parent_col,
                    child_col,
                });
            }
            "accepting" => loop {
                let (id, col) = cur.ident("a state name")?;
                accepts.push((id, line, col));
                if cur.peek_tok() == Some(&Tok::Comma) {
                    cur.bump();
                    continue;
                }
                cur.finish()?;
                break;
            },
            "transition" => {
                let (id, id_col) = cur.ident("a transition id")?;
                cur.expect(Tok::Colon)?;
                let source = cur.ident("a source state")?;
                cur.expect(Tok::Arrow)?;
                let target = cur.ident("a target state")?;
                let trigger = if cur.eat_keyword("on") {
                    Some(cur.ident("an event name")?)
                } else {
                    None
                };
                let guard = if cur.eat_keyword("when") {
                    Some(parse_sexpr(&mut cur)?)
                } else {
                    None
                };
                let mut actions = Vec::new();
                if cur.eat_keyword("do") {
                    loop {
                        if cur.eat_keyword("emit") {
                            actions.push(PendingAction::Emit(cur.ident("a signal name")?.0));
                        } else {
                            let (var, col) = cur.ident("an action")?;
                            cur.expect(Tok::Assign)?;
                            let expr = parse_sexpr(&mut cur)?;
                            actions.push(PendingAction::Assign { var, col, expr });
                        }
                        if cur.peek_tok() == Some(&Tok::Semi) {
                            cur.bump();
                            continue;
                        }
                        break;
                    }
                }
                cur.finish()?;
                if transitions.iter().any(|t| t.id == id) {
                    return Err(SourceError::new(
                        ErrorKind::Resolve,
                        line,
                        id_col,
                        format!("duplicate transition id `{id}`"),
                    ));
                }
                transitions.push(PendingTransition {
                    line,
                    id,
                    source,
                    target,
                    trigger,
                    guard,
                    actions,
                });
            }
            other => {
                return Err(SourceError::new(
                    ErrorKind::Parse,
                    line,
                    word_col,
                    format!("unknown declaration `{other}`"),
                ))
            }
        }
    }

    let mut sc =
        sc.ok_or_else(|| SourceError::new(ErrorKind::Parse, 1, 1, "expected `statechart <name>`"))?;

    for e in &sc.events {
        for p in &e.params {
            if var_lines.contains_key(&p.name) {
                let eline = event_lines[&e.name];
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    eline,
                    1,
                    format!(
                        "parameter `{}` of `{}` clashes with a variable",
                        p.name, e.name
                    ),
                ));
            }
        }
    }

    let state_ids: Vec<String> = states.iter().map(|s| s.node.id.clone()).collect();
    let known_state = |id: &str| state_ids.iter().any(|s| s == id);
    for ps in &states {
        if let Some(p) = &ps.node.parent {
            if !known_state(p) {
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    ps.line,
                    ps.parent_col,
                    format!("unknown state `{p}`"),
                ));
            }
        }
        if let Some(c) = &ps.node.initial_child {
            if !known_state(c) {
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    ps.line,
                    ps.child_col,
                    format!("unknown state `{c}`"),
                ));
            }
        }
    }
    for (id, line, col) in &accepts {
        match states.iter_mut().find(|s| &s.node.id == id) {
            Some(s) => s.node.accepting = true,
            None => {
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    *line,
                    *col,
                    format!("unknown state `{id}`"),
                ))
            }
        }
    }
    sc.states = states.iter().map(|s| s.node.clone()).collect();

    let mut trans_lines: Vec<(String, usize)> = Vec::new();
    for pt in transitions {
        for (name, col) in [&pt.source, &pt.target] {
            if !known_state(name) {
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    pt.line,
                    *col,
                    format!("unknown state `{name}`"),
                ));
            }
        }
        if let Some((ev, col)) = &pt.trigger {
            if sc.event(ev).is_none() {
                return Err(SourceError::new(
                    ErrorKind::Resolve,
                    pt.line,
                    *col,
                    format!("unknown event `{ev}`"),
                ));
            }
        }
        let mut t = TransitionDef::new(pt.id.clone(), pt.source.0.clone(), pt.target.0.clone());
        t.trigger = pt.trigger.as_ref().map(|(e, _)| e.clone());
        let scope = sc.scope_for(&t);
        if let Some(g) = &pt.guard {
            let (expr, ty) = check_sexpr(g, &scope)?;
            if ty != Type::Bool {
                return Err(SourceError::new(
                    ErrorKind::Type,
                    g.line,
                    g.col,
                    format!("guard must be bool, found {ty}"),
                ));
            }
            t.guard = Some(expr);
        }
        for a in &pt.actions {
            match a {
                PendingAction::Emit(name) => t.actions.push(Action::Emit(name.clone())),
                PendingAction::Assign { var, col, expr } => {
                    let binding = scope.lookup(var);
                    let decl_ty = match binding {
                        Some(b) if b.kind == BindingKind::Var => b.ty,
                        Some(_) => {
                            return Err(SourceError::new(
                                ErrorKind::Resolve,
                                pt.line,
                                *col,
                                format!("cannot assign to parameter `{var}`"),
                            ))
                        }
                        None => {
                            return Err(SourceError::new(
                                ErrorKind::Resolve,
                                pt.line,
                                *col,
                                format!("unknown variable `{var}`"),
                            ))
                        }
                    };
                    let (e, ty) = check_sexpr(expr, &scope)?;
                    if ty != decl_ty {
                        return Err(SourceError::new(
                            ErrorKind::Type,
                            expr.line,
                            expr.col,
                            format!("cannot assign {ty} to {decl_ty} variable `{var}`"),
                        ));
                    }
                    t.actions.push(Action::Assign {
                        var: var.clone(),
                        expr: e,
                    });
                }
            }
        }
        trans_lines.push((pt.id.clone(), pt.line));
        sc.transitions.push(t);
    }

    sc.check_structure()
        .map_err(|e| locate(&e, &states, &trans_lines))?;
    Ok(sc)
}

/// Maps a late structural error back to the declaration it concerns.
fn locate(
    err: &StructureError,
    states: &[PendingState],
    trans_lines: &[(String, usize)],
) -> SourceError {
    let state_line = |id: &str| states.iter().find(|s| s.node.id == id).map(|s| s.line);
    let line = match err {
        StructureError::MultipleInitialStates => states
            .iter()
            .filter(|s| s.node.kind == StateKind::Initial)
            .nth(1)
            .map(|s| s.line),
        StructureError::ParentNotComposite(id)
        | StructureError::AcceptingComposite(id)
        | StructureError::MissingInitialChild(id)
        | StructureError::BadInitialChild(id)
        | StructureError::InitialChildOnLeaf(id)
        | StructureError::HierarchyCycle(id) => state_line(id),
        StructureError::UnguardedCompletion(id) => {
            trans_lines.iter().find(|(t, _)| t == id).map(|(_, l)| *l)
        }
        _ => None,
    };
    SourceError::new(ErrorKind::Resolve, line.unwrap_or(1), 1, err.to_string())
}
