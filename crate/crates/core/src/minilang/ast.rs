//! Abstract syntax. Statement nodes carry their assigned [`StatementId`] after
//! checking; expression nodes keep their source spans so conditions can be
//! located and rewritten later.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::program::{Span, StatementId};

/// Scalar and array types of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    Str,
    /// Fixed-length array of `int`.
    IntArray(usize),
}

impl Type {
    pub fn is_scalar(self) -> bool {
        !matches!(self, Type::IntArray(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Bool => write!(f, "bool"),
            Type::Str => write!(f, "string"),
            Type::IntArray(n) => write!(f, "int[{n}]"),
        }
    }
}

/// Literal values allowed in expressions and global initializers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength for parsing and pretty-printing. Higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    Var(String),
    Index { array: String, index: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Not(Box<Expr>),
    Call { function: String, args: Vec<Expr> },
}

impl Expr {
    /// Canonical rendering with single spaces around binary operators and the
    /// minimal parentheses implied by precedence.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, min_prec: u8) {
        match &self.kind {
            ExprKind::Literal(Literal::Int(v)) => out.push_str(&v.to_string()),
            ExprKind::Literal(Literal::Bool(b)) => out.push_str(if *b { "true" } else { "false" }),
            ExprKind::Literal(Literal::Str(s)) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        _ => out.push(c),
                    }
                }
                out.push('"');
            }
            ExprKind::Var(name) => out.push_str(name),
            ExprKind::Index { array, index } => {
                out.push_str(array);
                out.push('[');
                index.render_into(out, 0);
                out.push(']');
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let prec = op.precedence();
                let paren = prec < min_prec;
                if paren {
                    out.push('(');
                }
                lhs.render_into(out, prec);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                // Left-associative: the right operand needs one level more.
                rhs.render_into(out, prec + 1);
                if paren {
                    out.push(')');
                }
            }
            ExprKind::Not(inner) => {
                out.push('!');
                inner.render_into(out, u8::MAX);
            }
            ExprKind::Call { function, args } => {
                out.push_str(function);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.render_into(out, 0);
                }
                out.push(')');
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    /// Assigned by the checker; `u32::MAX` until then.
    pub id: StatementId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl { name: String, ty: Type, init: Option<Expr> },
    Assign { target: String, index: Option<Expr>, value: Expr },
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Return(Option<Expr>),
    Print(Expr),
}

/// A function declaration: scalar parameters, optional scalar return type, and
/// the statement tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub ret: Option<Type>,
    pub body: Vec<Stmt>,
    pub span: Span,
    /// All locals declared anywhere in the body, in declaration order.
    pub locals: Vec<(String, Type)>,
}

/// A global variable with optional literal initializer; defaults are
/// `0` / `false` / `""` / zero-filled.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDecl {
    pub name: String,
    pub ty: Type,
    pub init: Option<Literal>,
    pub span: Span,
}
