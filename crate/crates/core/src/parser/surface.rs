//! Concrete syntax tree as written by the user, before desugaring.
//!
//! Literals keep their source lexeme so printing reproduces them exactly.

use crate::diagnostic::Span;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SurfaceSpec {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Import(Ident),
    Constant(ConstantDecl),
    Input(InputDecl),
    Output(OutputDecl),
    Trigger(TriggerDecl),
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Import(i) => i.span,
            Decl::Constant(c) => c.span,
            Decl::Input(i) => i.span,
            Decl::Output(o) => o.span,
            Decl::Trigger(t) => t.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceType {
    Named(Ident),
    Tuple(Vec<SurfaceType>, Span),
}

impl SurfaceType {
    pub fn span(&self) -> Span {
        match self {
            SurfaceType::Named(i) => i.span,
            SurfaceType::Tuple(_, s) => *s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub name: Ident,
    pub ty: Option<SurfaceType>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantDecl {
    pub name: Ident,
    pub ty: Option<SurfaceType>,
    pub value: SExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: Option<SurfaceType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    pub ty: Option<SurfaceType>,
    pub body: StreamBody,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamBody {
    /// `[@pac] := expr`
    Shorthand { pacing: Option<SPacing>, expr: SExpr },
    Clauses(Clauses),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Clauses {
    pub spawn: Option<Clause>,
    pub eval: Option<Clause>,
    pub close: Option<Clause>,
}

/// One `spawn`/`eval`/`close` clause. Close clauses never carry `with`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub pacing: Option<SPacing>,
    pub when: Option<SExpr>,
    pub with: Option<SExpr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriggerDecl {
    pub params: Vec<Param>,
    pub body: TriggerBody,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TriggerBody {
    /// `trigger [@pac] condition ["message"]`
    Condition {
        pacing: Option<SPacing>,
        condition: SExpr,
        message: Option<String>,
    },
    Clauses(Clauses),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SPacing {
    /// Number plus unit, e.g. `1Hz`, `200ms`.
    Frequency { value: String, unit: String, span: Span },
    Activation(Activation),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Activation {
    True(Span),
    Stream(Ident),
    And(Box<Activation>, Box<Activation>),
    Or(Box<Activation>, Box<Activation>),
}

impl Activation {
    pub fn span(&self) -> Span {
        match self {
            Activation::True(s) => *s,
            Activation::Stream(i) => i.span,
            Activation::And(a, b) | Activation::Or(a, b) => a.span().to(b.span()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
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
            BinOp::Pow => "**",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
            BinOp::Pow => 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExprKind {
    Int(String),
    Float(String),
    Str(String),
    Bool(bool),
    Duration(String, String),
    Ident(String),
    /// `name(args)`, `name<T, U>(args)`: stream access or function call.
    Call { name: Ident, generics: Vec<SurfaceType>, args: Vec<SExpr> },
    Unary(UnOp, Box<SExpr>),
    Binary(BinOp, Box<SExpr>, Box<SExpr>),
    Ite(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Tuple(Vec<SExpr>),
    Field(Box<SExpr>, usize),
    Method { receiver: Box<SExpr>, name: Ident, args: Vec<NamedArg> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedArg {
    pub label: Option<Ident>,
    pub value: SExpr,
}
