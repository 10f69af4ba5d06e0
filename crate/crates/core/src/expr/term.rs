use std::sync::Arc;

use num_traits::One;

use super::{Atom, Expr, ExprError, FnApp, JetVar, Q, Result, Symbol};

/// Lowest integer exponent accepted in a raw tree.
pub const MIN_EXPONENT: i64 = -6;

/// Unnormalized expression tree, as built by a parser or by hand.
///
/// [`normalize`] turns it into the canonical [`Expr`]; [`Expr::to_term`]
/// goes back to a flat sum of products.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Rational(Q),
    Sym(Symbol),
    Jet(JetVar),
    Call {
        name: String,
        args: Vec<Term>,
        derivs: Vec<u8>,
        rule: Option<Expr>,
    },
    Sum(Vec<Term>),
    Product(Vec<Term>),
    IntPow(Box<Term>, i64),
    /// Power with a non-integer or symbolic exponent.
    Pow(Box<Term>, Box<Term>),
}

impl Term {
    pub fn int(n: i64) -> Term {
        Term::Rational(Q::from_integer(n.into()))
    }

    pub fn var(name: &str) -> Term {
        Term::Sym(Symbol::var(name))
    }

    pub fn neg(t: Term) -> Term {
        Term::Product(vec![Term::int(-1), t])
    }

    pub fn div(a: Term, b: Term) -> Term {
        Term::Product(vec![a, Term::IntPow(Box::new(b), -1)])
    }
}

pub fn normalize(t: &Term) -> Result<Expr> {
    Ok(match t {
        Term::Rational(q) => Expr::rational(q.clone()),
        Term::Sym(s) => Expr::sym(s.clone()),
        Term::Jet(j) => Expr::jet(j.clone()),
        Term::Call { name, args, derivs, rule } => {
            let args = args.iter().map(normalize).collect::<Result<Vec<_>>>()?;
            if derivs.len() != args.len() {
                return Err(ExprError::ArityMismatch {
                    name: name.clone(),
                    expected: args.len(),
                    got: derivs.len(),
                });
            }
            let app = FnApp { name: Arc::from(name.as_str()), args, derivs: derivs.clone(), rule: rule.clone() };
            Expr::fn_app(app)
        }
        Term::Sum(ts) => {
            let mut acc = Expr::zero();
            for t in ts {
                acc = acc.add(&normalize(t)?);
            }
            acc
        }
        Term::Product(ts) => {
            let mut acc = Expr::one();
            for t in ts {
                acc = acc.mul(&normalize(t)?);
            }
            acc
        }
        Term::IntPow(b, n) => {
            if *n < MIN_EXPONENT || *n > i32::MAX as i64 {
                return Err(ExprError::ExponentOutOfRange(*n));
            }
            normalize(b)?.pow_int(*n as i32)?
        }
        Term::Pow(b, e) => {
            let base = normalize(b)?;
            let exp = normalize(e)?;
            if let Some(n) = exp.as_integer() {
                if n < MIN_EXPONENT {
                    return Err(ExprError::ExponentOutOfRange(n));
                }
                if base.is_zero() && n < 0 {
                    return Err(ExprError::DegenerateDivision);
                }
            }
            base.pow(&exp)
        }
    })
}

fn atom_term(a: &Atom) -> Term {
    match a {
        Atom::Sym(s) => Term::Sym(s.clone()),
        Atom::Jet(j) => Term::Jet(j.clone()),
        Atom::Fn(app) => Term::Call {
            name: app.name.to_string(),
            args: app.args.iter().map(Expr::to_term).collect(),
            derivs: app.derivs.clone(),
            rule: app.rule.clone(),
        },
        Atom::Pow(p) => Term::Pow(Box::new(p.base.to_term()), Box::new(p.exp.to_term())),
    }
}

fn poly_term(p: &super::Poly) -> Term {
    let terms: Vec<Term> = p
        .terms()
        .iter()
        .map(|(m, q)| {
            let mut factors = Vec::new();
            if !q.is_one() {
                factors.push(Term::Rational(q.clone()));
            }
            for (a, e) in m.factors() {
                let t = atom_term(a);
                factors.push(if *e == 1 { t } else { Term::IntPow(Box::new(t), *e as i64) });
            }
            match factors.len() {
                0 => Term::Rational(Q::one()),
                1 => factors.pop().unwrap(),
                _ => Term::Product(factors),
            }
        })
        .collect();
    match terms.len() {
        0 => Term::int(0),
        1 => terms.into_iter().next().unwrap(),
        _ => Term::Sum(terms),
    }
}

impl Expr {
    /// Flat tree view of the normal form: numerator sum of products times
    /// negative powers of the denominator factors.
    pub fn to_term(&self) -> Term {
        let num = poly_term(self.num());
        if self.den().is_empty() {
            return num;
        }
        let mut factors = vec![num];
        for (p, k) in self.den() {
            factors.push(Term::IntPow(Box::new(poly_term(p)), -(*k as i64)));
        }
        Term::Product(factors)
    }
}
