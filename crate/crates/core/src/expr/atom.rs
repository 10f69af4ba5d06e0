use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::Expr;

/// Role of a named symbol. The declaration order of the variants is the
/// canonical precedence used when ordering factors and terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymKind {
    /// Independent (base) variable: x, y, z, t and reduced-stage variables.
    Var,
    /// Named transcendental parameter (a, b, c, d, A, B, C, ...).
    Param,
    /// Arbitrary constant of integration (c_1, a_4, beta_2, ...).
    Const,
    /// Euler's number, used as the base of `exp`.
    Euler,
    /// Argument-slot placeholder `@i` inside kernel templates.
    Slot,
    /// Basis vector `D<var>` while parsing vector fields.
    Basis,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub kind: SymKind,
    pub name: Arc<str>,
}

impl Symbol {
    pub fn new(kind: SymKind, name: &str) -> Self {
        Symbol { kind, name: Arc::from(name) }
    }

    pub fn var(name: &str) -> Self {
        Self::new(SymKind::Var, name)
    }

    pub fn param(name: &str) -> Self {
        Self::new(SymKind::Param, name)
    }

    pub fn constant(name: &str) -> Self {
        Self::new(SymKind::Const, name)
    }

    pub fn slot(i: usize) -> Self {
        Self::new(SymKind::Slot, &format!("@{i}"))
    }

    pub fn euler() -> Self {
        Self::new(SymKind::Euler, "e")
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.kind
            .cmp(&other.kind)
            .then_with(|| natural_cmp(&self.name, &other.name))
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Name order with trailing digit runs compared numerically, so that
/// `c_2 < c_10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if cut == s.len() {
            (s, None)
        } else {
            (&s[..cut], s[cut..].parse().ok())
        }
    }
    let (pa, na) = split(a);
    let (pb, nb) = split(b);
    pa.cmp(pb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}

/// Derivative counts per independent variable. Mixed partials commute, so
/// the representation is a sorted list and never depends on insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<(Arc<str>, u8)>);

impl MultiIndex {
    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn from_vars<S: AsRef<str>>(vars: &[S]) -> Self {
        let mut idx = MultiIndex::zero();
        for v in vars {
            idx = idx.incremented(v.as_ref());
        }
        idx
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|(_, c)| *c as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, var: &str) -> u8 {
        self.0
            .iter()
            .find(|(v, _)| &**v == var)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }

    pub fn entries(&self) -> &[(Arc<str>, u8)] {
        &self.0
    }

    pub fn incremented(&self, var: &str) -> Self {
        let mut out = self.0.clone();
        match out.iter_mut().find(|(v, _)| &**v == var) {
            Some(entry) => entry.1 += 1,
            None => {
                out.push((Arc::from(var), 1));
                out.sort_by(|a, b| natural_cmp(&a.0, &b.0));
            }
        }
        MultiIndex(out)
    }

    /// `self - other` when `other` is componentwise below `self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::new();
        for (v, c) in &self.0 {
            let o = other.count(v);
            if o > *c {
                return None;
            }
            if c - o > 0 {
                out.push((v.clone(), c - o));
            }
        }
        for (v, _) in &other.0 {
            if self.count(v) == 0 {
                return None;
            }
        }
        Some(MultiIndex(out))
    }

    /// Variables repeated according to their counts, in canonical order.
    pub fn expanded(&self) -> Vec<Arc<str>> {
        self.0
            .iter()
            .flat_map(|(v, c)| std::iter::repeat(v.clone()).take(*c as usize))
            .collect()
    }

    /// Every multi-index over `vars` with total order in `1..=max_order`,
    /// sorted by order and then lexicographically.
    pub fn all_up_to(vars: &[&str], max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut frontier = vec![MultiIndex::zero()];
        for _ in 0..max_order {
            let mut next = Vec::new();
            for idx in &frontier {
                for v in vars {
                    let n = idx.incremented(v);
                    if !next.contains(&n) {
                        next.push(n);
                    }
                }
            }
            next.sort();
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| {
            for (a, b) in self.0.iter().zip(other.0.iter()) {
                let c = natural_cmp(&a.0, &b.0).then(b.1.cmp(&a.1));
                if c != Ordering::Equal {
                    return c;
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A jet coordinate: a dependent symbol together with a derivative index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetVar {
    pub dep: Arc<str>,
    pub idx: MultiIndex,
}

impl JetVar {
    pub fn new(dep: &str, idx: MultiIndex) -> Self {
        JetVar { dep: Arc::from(dep), idx }
    }

    pub fn base(dep: &str) -> Self {
        Self::new(dep, MultiIndex::zero())
    }

    pub fn order(&self) -> u32 {
        self.idx.order()
    }
}

impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| natural_cmp(&self.dep, &other.dep))
            .then_with(|| self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Application of an opaque kernel, possibly differentiated in its slots.
///
/// `rule`, when present, gives the first derivative of a unary kernel as a
/// template over `@1` (antiderivative kernels and `log`). Such kernels never
/// carry a nonzero derivative index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FnApp {
    pub name: Arc<str>,
    pub args: Vec<Expr>,
    pub derivs: Vec<u8>,
    pub rule: Option<Expr>,
}

impl FnApp {
    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn total_derivs(&self) -> u32 {
        self.derivs.iter().map(|d| *d as u32).sum()
    }

    pub fn with_slot_derivative(&self, slot: usize) -> FnApp {
        let mut derivs = self.derivs.clone();
        derivs[slot] += 1;
        FnApp { derivs, ..self.clone() }
    }
}

impl Ord for FnApp {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.name, &other.name)
            .then_with(|| self.total_derivs().cmp(&other.total_derivs()))
            .then_with(|| other.derivs.cmp(&self.derivs))
            .then_with(|| self.args.cmp(&other.args))
            .then_with(|| self.rule.cmp(&other.rule))
    }
}

impl PartialOrd for FnApp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Power kernel `base^exp` for exponents that are not integers
/// (rational like 1/2, or symbolic like a_4/a_1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PowAtom {
    pub base: Expr,
    pub exp: Expr,
}

/// Generator of the polynomial ring that normal forms live in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Sym(Symbol),
    Jet(JetVar),
    Fn(Arc<FnApp>),
    Pow(Arc<PowAtom>),
}

impl Atom {
    fn rank(&self) -> u8 {
        match self {
            Atom::Sym(s) => match s.kind {
                SymKind::Var => 0,
                SymKind::Param => 2,
                SymKind::Const => 3,
                SymKind::Euler => 6,
                SymKind::Slot => 7,
                SymKind::Basis => 8,
            },
            Atom::Jet(_) => 1,
            Atom::Fn(_) => 4,
            Atom::Pow(_) => 5,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Atom::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        match self {
            Atom::Jet(j) => Some(j),
            _ => None,
        }
    }

    pub fn is_var(&self, name: &str) -> bool {
        matches!(self, Atom::Sym(s) if s.kind == SymKind::Var && &*s.name == name)
    }

    /// Jet coordinate of order at least one.
    pub fn is_derivative_jet(&self) -> bool {
        matches!(self, Atom::Jet(j) if j.order() > 0)
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Atom::Fn(a), Atom::Fn(b)) = (self, other) {
            if Arc::ptr_eq(a, b) {
                return Ordering::Equal;
            }
        }
        self.rank().cmp(&other.rank()).then_with(|| match (self, other) {
            (Atom::Sym(a), Atom::Sym(b)) => a.cmp(b),
            (Atom::Jet(a), Atom::Jet(b)) => a.cmp(b),
            (Atom::Fn(a), Atom::Fn(b)) => a.cmp(b),
            (Atom::Pow(a), Atom::Pow(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymKind::Euler => write!(f, "exp(1)"),
            _ => write!(f, "{}", self.name),
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.idx.is_zero() {
            return write!(f, "{}", self.dep);
        }
        write!(f, "d({}", self.dep)?;
        for v in self.idx.expanded() {
            write!(f, ",{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sym(s) => write!(f, "{s}"),
            Atom::Jet(j) => write!(f, "{j}"),
            Atom::Fn(app) => {
                write!(f, "{}", app.name)?;
                if app.derivs.iter().any(|d| *d > 0) {
                    let ds: Vec<String> = app.derivs.iter().map(|d| d.to_string()).collect();
                    write!(f, "^({})", ds.join(","))?;
                }
                let args: Vec<String> = app.args.iter().map(|a| a.to_string()).collect();
                write!(f, "({})", args.join(","))
            }
            Atom::Pow(p) => {
                if p.base.as_atom().map_or(false, |a| {
                    matches!(a, Atom::Sym(s) if s.kind == SymKind::Euler)
                }) {
                    write!(f, "exp({})", p.exp)
                } else {
                    write!(f, "({})^({})", p.base, p.exp)
                }
            }
        }
    }
}
