//! The `.lie` document format: declarations, equations, vector fields,
//! reduction ansätze and solution records.

mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, ExprError};

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_expr_in};
pub use printer::print;

/// Byte range plus 1-based line/column of its start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SourceSpan {
    pub begin: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl SourceSpan {
    pub fn covers(&self, other: &SourceSpan) -> bool {
        self.begin <= other.begin && other.end <= self.end
    }

    pub fn join(&self, other: &SourceSpan) -> SourceSpan {
        if other.begin < self.begin {
            return other.join(self);
        }
        SourceSpan { begin: self.begin, end: self.end.max(other.end), line: self.line, col: self.col }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("kernel `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("derivative index on `{0}`, which is not a dependent variable")]
    JetOnNonDependent(String),
    #[error("duplicate item or declaration `{0}`")]
    Duplicate(String),
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("invalid item: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

pub type Result<T> = std::result::Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelDecl {
    pub name: String,
    pub arity: usize,
    /// First derivative of a unary kernel, over `@1`.
    pub rule: Option<Expr>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Header {
    pub indep: Vec<String>,
    pub dep: Vec<String>,
    pub params: Vec<String>,
    pub consts: Vec<String>,
    pub kernels: Vec<KernelDecl>,
}

impl Header {
    pub fn kernel(&self, name: &str) -> Option<&KernelDecl> {
        self.kernels.iter().find(|k| k.name == name)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.indep.iter().chain(&self.dep).chain(&self.params).chain(&self.consts).any(|n| n == name)
            || self.kernel(name).is_some()
    }
}

/// Coefficients of a point vector field, keyed by coordinate name in
/// declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDef {
    pub coeffs: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzDef {
    pub old: Vec<String>,
    pub new: Vec<(String, Expr)>,
    /// Old dependent symbol and its expression in terms of the new one.
    pub dep: (String, Expr),
    pub inverse: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionDef {
    pub dep: String,
    pub value: Expr,
    /// Each expression must be nonzero.
    pub require: Vec<Expr>,
    /// Each expression vanishes on a singular set.
    pub singular: Vec<Expr>,
    pub source: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ItemKind {
    /// `lhs - rhs`.
    Equation(Expr),
    Field(FieldDef),
    Ansatz(AnsatzDef),
    Solution(SolutionDef),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub name: String,
    pub kind: ItemKind,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub header: Header,
    pub items: Vec<Item>,
}

impl Document {
    pub fn item(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn equation(&self, name: &str) -> Option<&Expr> {
        match &self.item(name)?.kind {
            ItemKind::Equation(e) => Some(e),
            _ => None,
        }
    }

    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        match &self.item(name)?.kind {
            ItemKind::Field(f) => Some(f),
            _ => None,
        }
    }

    pub fn ansatz(&self, name: &str) -> Option<&AnsatzDef> {
        match &self.item(name)?.kind {
            ItemKind::Ansatz(a) => Some(a),
            _ => None,
        }
    }

    pub fn solution(&self, name: &str) -> Option<&SolutionDef> {
        match &self.item(name)?.kind {
            ItemKind::Solution(s) => Some(s),
            _ => None,
        }
    }

    /// Rewrites every expression in the body.
    pub fn map_exprs(&self, f: &mut dyn FnMut(&Expr) -> std::result::Result<Expr, ExprError>) -> std::result::Result<Document, ExprError> {
        let pairs = |v: &[(String, Expr)], f: &mut dyn FnMut(&Expr) -> std::result::Result<Expr, ExprError>| {
            v.iter().map(|(n, e)| Ok((n.clone(), f(e)?))).collect::<std::result::Result<Vec<_>, ExprError>>()
        };
        let mut items = Vec::with_capacity(self.items.len());
        for it in &self.items {
            let kind = match &it.kind {
                ItemKind::Equation(e) => ItemKind::Equation(f(e)?),
                ItemKind::Field(d) => ItemKind::Field(FieldDef { coeffs: pairs(&d.coeffs, f)? }),
                ItemKind::Ansatz(a) => ItemKind::Ansatz(AnsatzDef {
                    old: a.old.clone(),
                    new: pairs(&a.new, f)?,
                    dep: (a.dep.0.clone(), f(&a.dep.1)?),
                    inverse: pairs(&a.inverse, f)?,
                }),
                ItemKind::Solution(sd) => ItemKind::Solution(SolutionDef {
                    dep: sd.dep.clone(),
                    value: f(&sd.value)?,
                    require: sd.require.iter().map(|e| f(e)).collect::<std::result::Result<_, _>>()?,
                    singular: sd.singular.iter().map(|e| f(e)).collect::<std::result::Result<_, _>>()?,
                    source: sd.source.clone(),
                }),
            };
            items.push(Item { name: it.name.clone(), kind, span: it.span });
        }
        Ok(Document { header: self.header.clone(), items })
    }

    /// Item-wise normal-form equality, ignoring spans.
    pub fn same_items(&self, other: &Document) -> bool {
        self.header == other.header
            && self.items.len() == other.items.len()
            && self.items.iter().zip(&other.items).all(|(a, b)| a.name == b.name && a.kind.equiv(&b.kind))
    }
}

fn pairs_equiv(a: &[(String, Expr)], b: &[(String, Expr)]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|((n, x), (m, y))| n == m && x.equiv(y))
}

fn list_equiv(a: &[Expr], b: &[Expr]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.equiv(y))
}

impl ItemKind {
    pub fn equiv(&self, other: &ItemKind) -> bool {
        match (self, other) {
            (ItemKind::Equation(a), ItemKind::Equation(b)) => a.equiv(b),
            (ItemKind::Field(a), ItemKind::Field(b)) => pairs_equiv(&a.coeffs, &b.coeffs),
            (ItemKind::Ansatz(a), ItemKind::Ansatz(b)) => {
                a.old == b.old
                    && pairs_equiv(&a.new, &b.new)
                    && a.dep.0 == b.dep.0
                    && a.dep.1.equiv(&b.dep.1)
                    && pairs_equiv(&a.inverse, &b.inverse)
            }
            (ItemKind::Solution(a), ItemKind::Solution(b)) => {
                a.dep == b.dep
                    && a.value.equiv(&b.value)
                    && list_equiv(&a.require, &b.require)
                    && list_equiv(&a.singular, &b.singular)
                    && a.source == b.source
            }
            _ => false,
        }
    }
}
