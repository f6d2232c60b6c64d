//! Typed guard/action expressions over integer and boolean values.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Value type of a variable, parameter or expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Type {
    Int,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool(v) => Some(v),
            Value::Int(_) => None,
        }
    }

    /// The zero value of a type: `0` or `false`.
    pub fn default_of(ty: Type) -> Value {
        match ty {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge
            | BinaryOp::Eq
            | BinaryOp::Ne => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

/// Expression tree. Variable references are resolved names; the tree is
/// type-correct when produced by the parser.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary(op, Box::new(operand))
    }

    /// Type of the expression under `scope`.
    pub fn type_of(&self, scope: &Scope) -> Result<Type, TypeError> {
        match self {
            Expr::Int(_) => Ok(Type::Int),
            Expr::Bool(_) => Ok(Type::Bool),
            Expr::Var(name) => scope
                .lookup(name)
                .map(|b| b.ty)
                .ok_or_else(|| TypeError::Unresolved(name.clone())),
            Expr::Unary(op, inner) => {
                let want = match op {
                    UnaryOp::Not => Type::Bool,
                    UnaryOp::Neg => Type::Int,
                };
                let got = inner.type_of(scope)?;
                if got != want {
                    return Err(TypeError::Mismatch {
                        context: if *op == UnaryOp::Not { "not" } else { "-" }.into(),
                        expected: want,
                        found: got,
                    });
                }
                Ok(want)
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = lhs.type_of(scope)?;
                let r = rhs.type_of(scope)?;
                let (operand, result) = match op {
                    BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => (Type::Int, Type::Int),
                    BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                        (Type::Int, Type::Bool)
                    }
                    BinaryOp::And | BinaryOp::Or => (Type::Bool, Type::Bool),
                    BinaryOp::Eq | BinaryOp::Ne => {
                        if l != r {
                            return Err(TypeError::Mismatch {
                                context: op.symbol().into(),
                                expected: l,
                                found: r,
                            });
                        }
                        return Ok(Type::Bool);
                    }
                };
                for found in [l, r] {
                    if found != operand {
                        return Err(TypeError::Mismatch {
                            context: op.symbol().into(),
                            expected: operand,
                            found,
                        });
                    }
                }
                Ok(result)
            }
        }
    }

    /// Evaluates against a variable lookup. Arithmetic is checked.
    pub fn eval<L: Lookup + ?Sized>(&self, env: &L) -> Result<Value, EvalError> {
        match self {
            Expr::Int(v) => Ok(Value::Int(*v)),
            Expr::Bool(v) => Ok(Value::Bool(*v)),
            Expr::Var(name) => env
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.clone())),
            Expr::Unary(UnaryOp::Not, inner) => Ok(Value::Bool(!want_bool(inner.eval(env)?)?)),
            Expr::Unary(UnaryOp::Neg, inner) => want_int(inner.eval(env)?)?
                .checked_neg()
                .map(Value::Int)
                .ok_or(EvalError::Overflow),
            Expr::Binary(op, lhs, rhs) => {
                let l = lhs.eval(env)?;
                let r = rhs.eval(env)?;
                let v = match op {
                    BinaryOp::Add => Value::Int(
                        want_int(l)?
                            .checked_add(want_int(r)?)
                            .ok_or(EvalError::Overflow)?,
                    ),
                    BinaryOp::Sub => Value::Int(
                        want_int(l)?
                            .checked_sub(want_int(r)?)
                            .ok_or(EvalError::Overflow)?,
                    ),
                    BinaryOp::Mul => Value::Int(
                        want_int(l)?
                            .checked_mul(want_int(r)?)
                            .ok_or(EvalError::Overflow)?,
                    ),
                    BinaryOp::Lt => Value::Bool(want_int(l)? < want_int(r)?),
                    BinaryOp::Le => Value::Bool(want_int(l)? <= want_int(r)?),
                    BinaryOp::Gt => Value::Bool(want_int(l)? > want_int(r)?),
                    BinaryOp::Ge => Value::Bool(want_int(l)? >= want_int(r)?),
                    BinaryOp::Eq => Value::Bool(l == r),
                    BinaryOp::Ne => Value::Bool(l != r),
                    BinaryOp::And => Value::Bool(want_bool(l)? && want_bool(r)?),
                    BinaryOp::Or => Value::Bool(want_bool(l)? || want_bool(r)?),
                };
                Ok(v)
            }
        }
    }

    /// Atomic conditions: maximal boolean subterms that are not built from
    /// `and`, `or` or `not`. Left-to-right order.
    pub fn atoms(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            Expr::Unary(UnaryOp::Not, inner) => inner.collect_atoms(out),
            Expr::Binary(BinaryOp::And | BinaryOp::Or, lhs, rhs) => {
                lhs.collect_atoms(out);
                rhs.collect_atoms(out);
            }
            _ => out.push(self),
        }
    }

    /// Names referenced anywhere in the tree.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(name) = e {
                out.push(name.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, inner) => inner.walk(f),
            Expr::Binary(_, lhs, rhs) => {
                lhs.walk(f);
                rhs.walk(f);
            }
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(..) => 6,
            Expr::Int(v) if *v < 0 => 6,
            _ => 7,
        }
    }
}

fn want_int(v: Value) -> Result<i64, EvalError> {
    v.as_int().ok_or(EvalError::TypeMismatch(Type::Int))
}

fn want_bool(v: Value) -> Result<bool, EvalError> {
    v.as_bool().ok_or(EvalError::TypeMismatch(Type::Bool))
}

/// Prints with the minimum parentheses needed to re-parse into the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(v) => write!(f, "{v}"),
            Expr::Var(name) => f.write_str(name),
            Expr::Unary(op, inner) => {
                match op {
                    UnaryOp::Not => f.write_str("not ")?,
                    UnaryOp::Neg => f.write_str("-")?,
                }
                // `- 5` would re-parse as the literal -5, so keep the parens.
                let wrap = inner.precedence() < 6
                    || (*op == UnaryOp::Neg && matches!(**inner, Expr::Int(_)));
                write_operand(f, inner, wrap)
            }
            Expr::Binary(op, lhs, rhs) => {
                let prec = op.precedence();
                let lwrap =
                    lhs.precedence() < prec || (op.is_comparison() && lhs.precedence() == prec);
                let rwrap = rhs.precedence() <= prec;
                write_operand(f, lhs, lwrap)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, rhs, rwrap)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Kind of name bound in a [`Scope`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BindingKind {
    Var,
    Param,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub ty: Type,
    pub kind: BindingKind,
}

/// Names visible to an expression: chart variables plus, inside a
/// triggered transition, the trigger's parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scope {
    bindings: Vec<Binding>,
}

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, ty: Type, kind: BindingKind) -> Self {
        self.push(name, ty, kind);
        self
    }

    pub fn push(&mut self, name: impl Into<String>, ty: Type, kind: BindingKind) {
        self.bindings.push(Binding {
            name: name.into(),
            ty,
            kind,
        });
    }

    pub fn lookup(&self, name: &str) -> Option<&Binding> {
        // Later bindings shadow earlier ones.
        self.bindings.iter().rev().find(|b| b.name == name)
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }
}

/// Read access to variable values during evaluation.
pub trait Lookup {
    fn get(&self, name: &str) -> Option<Value>;
}

impl Lookup for BTreeMap<String, Value> {
    fn get(&self, name: &str) -> Option<Value> {
        BTreeMap::get(self, name).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown name `{0}`")]
    Unresolved(String),
    #[error("operator `{context}` expects {expected}, found {found}")]
    Mismatch {
        context: String,
        expected: Type,
        found: Type,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("integer overflow")]
    Overflow,
    #[error("expected a value of type {0}")]
    TypeMismatch(Type),
}
