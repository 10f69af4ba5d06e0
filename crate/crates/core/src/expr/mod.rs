//! Exact symbolic kernel.
//!
//! An [`Expr`] is always held in normal form: a numerator Laurent polynomial
//! over ℚ in [`Atom`] generators, divided by a product of primitive
//! non-monomial polynomial factors. Atoms are independent variables, jet
//! coordinates, parameters and constants, opaque kernel applications and
//! power kernels. Two expressions are equal as rational functions exactly
//! when their difference normalizes to zero; for denominators that are
//! products of monomials and irreducible factors the normal form is also
//! structurally unique.

mod atom;
mod diff;
mod display;
mod eval;
mod poly;
mod subst;
mod term;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use atom::{natural_cmp, Atom, FnApp, JetVar, MultiIndex, PowAtom, SymKind, Symbol};
pub use diff::{Derivation, Partial, Total, DEFAULT_JET_CAP};
pub use eval::EvalPoint;
pub use poly::{Monomial, Poly, Q};
pub use subst::{KernelTable, Substitution};
pub use term::{normalize, Term, MIN_EXPONENT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DegenerateDivision,
    #[error("jet order {order} exceeds the configured cap {cap}")]
    JetOrderExceeded { order: u32, cap: u32 },
    #[error("cyclic substitution through {0}")]
    CyclicSubstitution(String),
    #[error("unbound symbol {0}")]
    UnboundSymbol(String),
    #[error("pole while evaluating {0}")]
    EvaluationPole(String),
    #[error("non-real value while evaluating {0}")]
    NonReal(String),
    #[error("integer exponent {0} is outside the supported range")]
    ExponentOutOfRange(i64),
    #[error("kernel {name} expects {expected} arguments, got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ExprError>;

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ExprData {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

/// Immutable expression in normal form. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<ExprData>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn q_pow(q: &Q, k: i32) -> Q {
    if k >= 0 {
        num_traits::pow(q.clone(), k as usize)
    } else {
        num_traits::pow(q.recip(), (-k) as usize)
    }
}

/// `p = c * m * prim` with `prim` primitive, positive-leading and free of
/// monomial content. `prim` is `None` when `p` is a monomial.
fn split_content(p: &Poly) -> (Q, Monomial, Option<Poly>) {
    let m = p.monomial_content();
    let p1 = p.mul_monomial(&m.inv(), &Q::one());
    let mut c = p1.rational_content();
    if !p1.is_positive_leading() {
        c = -c;
    }
    if p1.is_monomial() {
        let (mm, qq) = &p1.0[0];
        return (qq.clone(), m.mul(mm), None);
    }
    let prim = p1.scale(&c.recip());
    (c, m, Some(prim))
}

fn push_factor(factors: &mut Vec<(Poly, u32)>, p: Poly, k: u32) {
    if k == 0 {
        return;
    }
    if let Some(entry) = factors.iter_mut().find(|(f, _)| *f == p) {
        entry.1 += k;
        return;
    }
    for i in 0..factors.len() {
        let existing = factors[i].0.clone();
        if let Some(r) = p.div_exact(&existing) {
            if let (_, _, Some(rp)) = split_content(&r) {
                factors[i].1 += k;
                push_factor(factors, rp, k);
                return;
            }
        }
        if let Some(r) = existing.div_exact(&p) {
            if let (_, _, Some(rp)) = split_content(&r) {
                let ke = factors.remove(i).1;
                push_factor(factors, p.clone(), ke + k);
                push_factor(factors, rp, ke);
                return;
            }
        }
    }
    factors.push((p, k));
    factors.sort();
}

impl Expr {
    fn from_data(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        Expr(Arc::new(ExprData { num, den }))
    }

    pub fn zero() -> Expr {
        Self::from_data(Poly::zero(), Vec::new())
    }

    pub fn one() -> Expr {
        Self::from_data(Poly::one(), Vec::new())
    }

    pub fn int(n: i64) -> Expr {
        Self::rational(q_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Self::rational(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn rational(q: Q) -> Expr {
        Self::from_data(Poly::constant(q), Vec::new())
    }

    pub fn atom(a: Atom) -> Expr {
        Self::from_data(Poly::monomial(Monomial::atom(a), Q::one()), Vec::new())
    }

    pub fn sym(s: Symbol) -> Expr {
        Self::atom(Atom::Sym(s))
    }

    pub fn var(name: &str) -> Expr {
        Self::sym(Symbol::var(name))
    }

    pub fn param(name: &str) -> Expr {
        Self::sym(Symbol::param(name))
    }

    pub fn constant(name: &str) -> Expr {
        Self::sym(Symbol::constant(name))
    }

    pub fn slot(i: usize) -> Expr {
        Self::sym(Symbol::slot(i))
    }

    pub fn jet(j: JetVar) -> Expr {
        Self::atom(Atom::Jet(j))
    }

    /// `dep` differentiated once per entry of `vars`.
    pub fn jet_of(dep: &str, vars: &[&str]) -> Expr {
        Self::jet(JetVar::new(dep, MultiIndex::from_vars(vars)))
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        let n = args.len();
        Self::atom(Atom::Fn(Arc::new(FnApp {
            name: Arc::from(name),
            args,
            derivs: vec![0; n],
            rule: None,
        })))
    }

    /// Unary kernel whose first derivative is `rule` with `@1` bound to the
    /// argument.
    pub fn call_with_rule(name: &str, arg: Expr, rule: Expr) -> Expr {
        Self::atom(Atom::Fn(Arc::new(FnApp {
            name: Arc::from(name),
            args: vec![arg],
            derivs: vec![0],
            rule: Some(rule),
        })))
    }

    pub fn fn_app(app: FnApp) -> Expr {
        Self::atom(Atom::Fn(Arc::new(app)))
    }

    pub fn log(arg: Expr) -> Expr {
        let rule = Expr::one().div(&Expr::slot(1)).expect("slot is nonzero");
        Self::call_with_rule("log", arg, rule)
    }

    pub fn euler() -> Expr {
        Self::sym(Symbol::euler())
    }

    pub fn exp(arg: &Expr) -> Expr {
        Self::euler().pow(arg)
    }

    pub fn sqrt(arg: &Expr) -> Expr {
        arg.pow(&Expr::frac(1, 2))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Self::build(p, Vec::new())
    }

    pub fn num(&self) -> &Poly {
        &self.0.num
    }

    pub fn den(&self) -> &[(Poly, u32)] {
        &self.0.den
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().map_or(false, |q| q.is_one())
    }

    pub fn as_rational(&self) -> Option<Q> {
        if !self.0.den.is_empty() {
            return None;
        }
        self.0.num.as_constant()
    }

    pub fn as_integer(&self) -> Option<i64> {
        let q = self.as_rational()?;
        if q.is_integer() {
            q.to_integer().to_i64()
        } else {
            None
        }
    }

    /// The atom when the expression is exactly one atom with unit
    /// coefficient.
    pub fn as_atom(&self) -> Option<&Atom> {
        if !self.0.den.is_empty() {
            return None;
        }
        match self.0.num.0.as_slice() {
            [(m, q)] if q.is_one() && m.0.len() == 1 && m.0[0].1 == 1 => Some(&m.0[0].0),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        self.as_atom().and_then(Atom::as_symbol)
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        self.as_atom().and_then(Atom::as_jet)
    }

    /// Normalizes a numerator over a product of denominator factors.
    fn build(num: Poly, den: Vec<(Poly, u32)>) -> Expr {
        if num.is_zero() {
            return Expr::zero();
        }
        let mut num = num;
        let mut factors: Vec<(Poly, u32)> = Vec::new();
        for (p, k) in den {
            let (c, m, prim) = split_content(&p);
            num = num.mul_monomial(&m.pow(-(k as i32)), &q_pow(&c, -(k as i32)));
            if let Some(prim) = prim {
                push_factor(&mut factors, prim, k);
            }
        }
        for entry in factors.iter_mut() {
            while entry.1 > 0 {
                match num.div_exact(&entry.0) {
                    Some(q) => {
                        num = q;
                        entry.1 -= 1;
                    }
                    None => break,
                }
            }
        }
        factors.retain(|(_, k)| *k > 0);
        let (plain, extras) = normalize_pow_terms(num);
        let base = Self::from_data(plain, factors.clone());
        if extras.is_empty() {
            return base;
        }
        let inv_den = Self::from_data(Poly::one(), factors);
        let mut out = base;
        for e in extras {
            out = out.add(&e.mul(&inv_den));
        }
        out
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.0.den.is_empty() && other.0.den.is_empty() {
            return Self::from_data(self.0.num.add(&other.0.num), Vec::new());
        }
        if self.0.den == other.0.den {
            return Self::build(self.0.num.add(&other.0.num), self.0.den.clone());
        }
        let mut lcm: Vec<(Poly, u32)> = self.0.den.clone();
        for (p, k) in &other.0.den {
            match lcm.iter_mut().find(|(f, _)| f == p) {
                Some(entry) => entry.1 = entry.1.max(*k),
                None => lcm.push((p.clone(), *k)),
            }
        }
        lcm.sort();
        let lift = |den: &[(Poly, u32)]| -> Poly {
            let mut out = Poly::one();
            for (p, k) in &lcm {
                let have = den.iter().find(|(f, _)| f == p).map_or(0, |(_, kk)| *kk);
                out = out.mul(&p.pow(k - have));
            }
            out
        };
        let num = self
            .0
            .num
            .mul(&lift(&self.0.den))
            .add(&other.0.num.mul(&lift(&other.0.den)));
        Self::build(num, lcm)
    }

    pub fn neg(&self) -> Expr {
        Self::from_data(self.0.num.neg(), self.0.den.clone())
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(q) = other.as_rational() {
            return self.scale(&q);
        }
        if let Some(q) = self.as_rational() {
            return other.scale(&q);
        }
        let num = self.0.num.mul(&other.0.num);
        if self.0.den.is_empty() && other.0.den.is_empty() && !has_pow(&num) {
            return Self::from_data(num, Vec::new());
        }
        let mut den = self.0.den.clone();
        den.extend(other.0.den.iter().cloned());
        Self::build(num, den)
    }

    pub fn scale(&self, q: &Q) -> Expr {
        if q.is_zero() {
            return Expr::zero();
        }
        Self::from_data(self.0.num.scale(q), self.0.den.clone())
    }

    pub fn inv(&self) -> Result<Expr> {
        if self.is_zero() {
            return Err(ExprError::DegenerateDivision);
        }
        let mut num = Poly::one();
        for (p, k) in &self.0.den {
            num = num.mul(&p.pow(*k));
        }
        Ok(Self::build(num, vec![(self.0.num.clone(), 1)]))
    }

    pub fn div(&self, other: &Expr) -> Result<Expr> {
        if other.is_zero() {
            return Err(ExprError::DegenerateDivision);
        }
        if let Some(q) = other.as_rational() {
            return Ok(self.scale(&q.recip()));
        }
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_int(&self, n: i32) -> Result<Expr> {
        if n == 0 {
            return Ok(Expr::one());
        }
        if n < 0 {
            return self.inv()?.pow_int(-n);
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.mul(self);
        }
        Ok(out)
    }

    /// Power with an arbitrary exponent. Integer exponents expand exactly;
    /// anything else becomes a power kernel on each factor of the base.
    pub fn pow(&self, exponent: &Expr) -> Expr {
        if let Some(n) = exponent.as_integer() {
            if let Ok(n) = i32::try_from(n) {
                if let Ok(e) = self.pow_int(n) {
                    return e;
                }
            }
        }
        if exponent.is_zero() {
            return Expr::one();
        }
        if self.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return Expr::one();
        }
        let mut out = Expr::one();
        let (c, m, prim) = split_content(&self.0.num);
        let mut c = c;
        let mut prim = prim;
        if c.is_negative() {
            c = -c;
            match prim.as_mut() {
                Some(p) => *p = p.neg(),
                None => {
                    // Signed monomial base stays whole.
                    let signed = Poly::monomial(m.clone(), -Q::one());
                    out = out.mul(&pow_factor(signed, exponent));
                    return out
                        .mul(&pow_factor(Poly::constant(c), exponent))
                        .mul(&self.den_pow(exponent));
                }
            }
        }
        if !c.is_one() {
            out = out.mul(&pow_factor(Poly::constant(c), exponent));
        }
        for (a, e) in &m.0 {
            let ex = exponent.scale(&q_int(*e as i64));
            out = out.mul(&pow_factor(Poly::monomial(Monomial::atom(a.clone()), Q::one()), &ex));
        }
        if let Some(p) = prim {
            out = out.mul(&pow_factor(p, exponent));
        }
        out.mul(&self.den_pow(exponent))
    }

    fn den_pow(&self, exponent: &Expr) -> Expr {
        let mut out = Expr::one();
        for (p, k) in &self.0.den {
            let ex = exponent.scale(&q_int(-(*k as i64)));
            out = out.mul(&pow_factor(p.clone(), &ex));
        }
        out
    }

    /// Atoms appearing at the top level (numerator or denominator).
    pub fn atoms(&self) -> Vec<Atom> {
        let mut set = BTreeSet::new();
        for a in self.0.num.atoms() {
            set.insert(a);
        }
        for (p, _) in &self.0.den {
            for a in p.atoms() {
                set.insert(a);
            }
        }
        set.into_iter().collect()
    }

    /// Every atom reachable, including those inside kernel arguments and
    /// power-kernel bases and exponents.
    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut set = BTreeSet::new();
        self.collect_atoms(&mut set);
        set
    }

    fn collect_atoms(&self, set: &mut BTreeSet<Atom>) {
        for a in self.atoms() {
            match &a {
                Atom::Fn(app) => {
                    for arg in &app.args {
                        arg.collect_atoms(set);
                    }
                }
                Atom::Pow(p) => {
                    p.base.collect_atoms(set);
                    p.exp.collect_atoms(set);
                }
                _ => {}
            }
            set.insert(a);
        }
    }

    pub fn contains(&self, pred: &dyn Fn(&Atom) -> bool) -> bool {
        self.free_atoms().iter().any(pred)
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.contains(&|a| a.is_var(name))
    }

    /// Jet coordinates reachable anywhere in the expression.
    pub fn jets(&self) -> Vec<JetVar> {
        self.free_atoms()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Jet(j) => Some(j),
                _ => None,
            })
            .collect()
    }

    pub fn max_jet_order(&self) -> u32 {
        self.jets().iter().map(JetVar::order).max().unwrap_or(0)
    }

    /// Splits the numerator by the part of each monomial made of atoms
    /// selected by `pred`: `self = Σ key · coeff`. Fails when the
    /// denominator involves a selected atom, or when a selected atom occurs
    /// only inside a coefficient's kernel arguments.
    pub fn split_by(&self, pred: &dyn Fn(&Atom) -> bool) -> std::result::Result<Vec<(Monomial, Expr)>, String> {
        for (p, _) in &self.0.den {
            let e = Expr::from_data(p.clone(), Vec::new());
            if e.contains(pred) {
                return Err(format!("denominator factor {e} depends on a collected atom"));
            }
        }
        let inv_den = Expr::from_data(Poly::one(), self.0.den.clone());
        let mut groups: Vec<(Monomial, Vec<(Monomial, Q)>)> = Vec::new();
        for (m, q) in &self.0.num.0 {
            let key = m.only(|a| pred(a));
            let rest = m.without(|a| pred(a));
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, terms)) => terms.push((rest, q.clone())),
                None => groups.push((key, vec![(rest, q.clone())])),
            }
        }
        let mut out = Vec::with_capacity(groups.len());
        for (key, terms) in groups {
            let coeff = Expr::from_data(Poly::from_terms(terms), Vec::new()).mul(&inv_den);
            if coeff.contains(pred) {
                return Err(format!("coefficient of {} still depends on a collected atom", Expr::monomial_expr(&key)));
            }
            out.push((key, coeff));
        }
        out.sort_by(|a, b| b.0.cmp(&a.0));
        Ok(out)
    }

    pub fn monomial_expr(m: &Monomial) -> Expr {
        Expr::build(Poly::monomial(m.clone(), Q::one()), Vec::new())
    }

    /// Numerator terms as separate expressions sharing the denominator.
    pub fn terms(&self) -> Vec<Expr> {
        let inv_den = Expr::from_data(Poly::one(), self.0.den.clone());
        self.0
            .num
            .0
            .iter()
            .map(|(m, q)| Expr::from_data(Poly::monomial(m.clone(), q.clone()), Vec::new()).mul(&inv_den))
            .collect()
    }

    /// Difference normalizes to zero.
    pub fn equiv(&self, other: &Expr) -> bool {
        self == other || self.sub(other).is_zero()
    }
}

fn has_pow(p: &Poly) -> bool {
    p.0.iter().any(|(m, _)| m.0.iter().any(|(a, _)| matches!(a, Atom::Pow(_))))
}

/// Power kernel on a single base factor, reduced so that the constant part
/// of the exponent lies in [0, 1).
fn pow_factor(base: Poly, exponent: &Expr) -> Expr {
    let base_expr = Expr::from_data(base, Vec::new());
    if let Some(Atom::Pow(p)) = base_expr.as_atom() {
        return p.base.pow(&p.exp.mul(exponent));
    }
    if let Some(n) = exponent.as_integer() {
        if let Ok(e) = base_expr.pow_int(n as i32) {
            return e;
        }
    }
    let atom = Atom::Pow(Arc::new(PowAtom { base: base_expr, exp: exponent.clone() }));
    Expr::build(Poly::monomial(Monomial::atom(atom), Q::one()), Vec::new())
}

fn constant_part(e: &Expr) -> Q {
    if e.0.den.is_empty() {
        e.0.num.constant_term()
    } else {
        Q::zero()
    }
}

/// Applies the power-kernel relations to each numerator term. Terms that
/// pick up a non-atomic integer power of a base are returned separately as
/// full expressions.
fn normalize_pow_terms(num: Poly) -> (Poly, Vec<Expr>) {
    if !has_pow(&num) {
        return (num, Vec::new());
    }
    let mut plain = Vec::with_capacity(num.0.len());
    let mut extras = Vec::new();
    let mut changed = false;
    for (m, q) in num.0 {
        match reduce_monomial(&m) {
            None => plain.push((m, q)),
            Some((m2, extra)) => {
                changed = true;
                match extra {
                    None => plain.push((m2, q)),
                    Some(x) => extras.push(Expr::from_data(Poly::monomial(m2, q), Vec::new()).mul(&x)),
                }
            }
        }
    }
    let plain = if changed { Poly::from_terms(plain) } else { Poly(plain) };
    (plain, extras)
}

fn reduce_monomial(m: &Monomial) -> Option<(Monomial, Option<Expr>)> {
    let pows: Vec<(&PowAtom, i32)> = m
        .0
        .iter()
        .filter_map(|(a, e)| match a {
            Atom::Pow(p) => Some((&**p, *e)),
            _ => None,
        })
        .collect();
    if pows.is_empty() {
        return None;
    }
    let mut canonical = true;
    for (i, (p, e)) in pows.iter().enumerate() {
        if *e != 1 {
            canonical = false;
        }
        if i > 0 && pows[i - 1].0.base == p.base {
            canonical = false;
        }
        let c = constant_part(&p.exp);
        if c.is_negative() || c >= Q::one() || p.exp.is_zero() {
            canonical = false;
        }
    }
    if canonical {
        return None;
    }
    let mut pairs: Vec<(Atom, i32)> = m
        .0
        .iter()
        .filter(|(a, _)| !matches!(a, Atom::Pow(_)))
        .cloned()
        .collect();
    let mut extra: Option<Expr> = None;
    let mut i = 0;
    while i < pows.len() {
        let base = pows[i].0.base.clone();
        let mut sigma = Expr::zero();
        while i < pows.len() && pows[i].0.base == base {
            sigma = sigma.add(&pows[i].0.exp.scale(&q_int(pows[i].1 as i64)));
            i += 1;
        }
        let c = constant_part(&sigma);
        let n = c.floor().to_integer().to_i64().unwrap_or(0);
        let reduced = sigma.sub(&Expr::int(n));
        if !reduced.is_zero() {
            pairs.push((
                Atom::Pow(Arc::new(PowAtom { base: base.clone(), exp: reduced })),
                1,
            ));
        }
        if n != 0 {
            match base.as_atom() {
                Some(a) => pairs.push((a.clone(), n as i32)),
                None => {
                    let f = base.pow_int(n as i32).unwrap_or_else(|_| Expr::zero());
                    extra = Some(match extra {
                        Some(x) => x.mul(&f),
                        None => f,
                    });
                }
            }
        }
    }
    Some((Monomial::from_pairs(pairs), extra))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}
