use std::collections::HashMap;

use super::{Atom, Expr, ExprError, JetVar, Poly, Result, SymKind, Symbol};

/// Default ceiling on jet order reachable through total derivatives.
pub const DEFAULT_JET_CAP: u32 = 6;

/// A derivation of the expression ring, fixed by its action on leaf atoms.
///
/// Kernel applications and power kernels are handled by the chain rule, so
/// implementors only describe symbols and jet coordinates.
pub trait Derivation {
    fn leaf(&self, atom: &Atom) -> Result<Expr>;

    fn apply(&self, e: &Expr) -> Result<Expr> {
        let mut cache = HashMap::new();
        derive_expr(self, e, &mut cache)
    }
}

fn derive_expr<D: Derivation + ?Sized>(d: &D, e: &Expr, cache: &mut HashMap<Atom, Expr>) -> Result<Expr> {
    let mut out = derive_poly(d, e.num(), cache)?;
    if e.den().is_empty() {
        return Ok(out.mul(&den_inverse(e)));
    }
    // d(N/D) = N'/D - (N/D) * Σ k p'/p
    out = out.mul(&den_inverse(e));
    let mut log_deriv = Expr::zero();
    for (p, k) in e.den() {
        let dp = derive_poly(d, p, cache)?;
        if dp.is_zero() {
            continue;
        }
        let pe = Expr::from_poly(p.clone());
        log_deriv = log_deriv.add(&dp.div(&pe)?.scale(&super::q_int(*k as i64)));
    }
    Ok(out.sub(&e.mul(&log_deriv)))
}

fn den_inverse(e: &Expr) -> Expr {
    if e.den().is_empty() {
        return Expr::one();
    }
    Expr::build(Poly::one(), e.den().to_vec())
}

fn derive_poly<D: Derivation + ?Sized>(d: &D, p: &Poly, cache: &mut HashMap<Atom, Expr>) -> Result<Expr> {
    let mut out = Expr::zero();
    for a in p.atoms() {
        let da = derive_atom(d, &a, cache)?;
        if da.is_zero() {
            continue;
        }
        out = out.add(&Expr::from_poly(p.raw_partial(&a)).mul(&da));
    }
    Ok(out)
}

fn derive_atom<D: Derivation + ?Sized>(d: &D, a: &Atom, cache: &mut HashMap<Atom, Expr>) -> Result<Expr> {
    if let Some(v) = cache.get(a) {
        return Ok(v.clone());
    }
    let v = match a {
        Atom::Sym(_) | Atom::Jet(_) => d.leaf(a)?,
        Atom::Fn(app) => {
            let mut acc = Expr::zero();
            for (i, arg) in app.args.iter().enumerate() {
                let da = derive_expr(d, arg, cache)?;
                if da.is_zero() {
                    continue;
                }
                let outer = match &app.rule {
                    Some(rule) => rule.substitute_slots(&app.args)?,
                    None => Expr::fn_app(app.with_slot_derivative(i)),
                };
                acc = acc.add(&outer.mul(&da));
            }
            acc
        }
        Atom::Pow(p) => {
            // d b^s = b^s (s' ln b + s b'/b)
            let ds = derive_expr(d, &p.exp, cache)?;
            let db = derive_expr(d, &p.base, cache)?;
            let mut inner = Expr::zero();
            if !ds.is_zero() {
                let is_e = matches!(p.base.as_symbol(), Some(s) if s.kind == SymKind::Euler);
                let ln = if is_e { Expr::one() } else { Expr::log(p.base.clone()) };
                inner = inner.add(&ds.mul(&ln));
            }
            if !db.is_zero() {
                inner = inner.add(&p.exp.mul(&db).div(&p.base)?);
            }
            if inner.is_zero() {
                Expr::zero()
            } else {
                Expr::atom(a.clone()).mul(&inner)
            }
        }
    };
    cache.insert(a.clone(), v.clone());
    Ok(v)
}

/// Partial derivative with respect to a single coordinate of jet space.
pub struct Partial<'a>(pub &'a Atom);

impl Derivation for Partial<'_> {
    fn leaf(&self, atom: &Atom) -> Result<Expr> {
        Ok(if atom == self.0 { Expr::one() } else { Expr::zero() })
    }
}

/// Total derivative `D_var` on jet space, bounded by a jet-order cap.
pub struct Total<'a> {
    pub var: &'a str,
    pub cap: u32,
}

impl Derivation for Total<'_> {
    fn leaf(&self, atom: &Atom) -> Result<Expr> {
        match atom {
            Atom::Sym(s) if s.kind == SymKind::Var && &*s.name == self.var => Ok(Expr::one()),
            Atom::Sym(_) => Ok(Expr::zero()),
            Atom::Jet(j) => {
                let order = j.order() + 1;
                if order > self.cap {
                    return Err(ExprError::JetOrderExceeded { order, cap: self.cap });
                }
                Ok(Expr::jet(JetVar { dep: j.dep.clone(), idx: j.idx.incremented(self.var) }))
            }
            _ => unreachable!("kernels are handled by the chain rule"),
        }
    }
}

impl Expr {
    /// Partial derivative treating every jet coordinate as independent.
    pub fn diff(&self, wrt: &Atom) -> Expr {
        Partial(wrt).apply(self).expect("partial derivatives do not fail")
    }

    pub fn diff_var(&self, name: &str) -> Expr {
        self.diff(&Atom::Sym(Symbol::var(name)))
    }

    pub fn total_derivative(&self, var: &str) -> Result<Expr> {
        self.total_derivative_capped(var, DEFAULT_JET_CAP)
    }

    pub fn total_derivative_capped(&self, var: &str, cap: u32) -> Result<Expr> {
        Total { var, cap }.apply(self)
    }

    /// Iterated total derivative `D_J`.
    pub fn total_derivative_multi(&self, idx: &super::MultiIndex) -> Result<Expr> {
        let mut out = self.clone();
        for v in idx.expanded() {
            out = out.total_derivative(&v)?;
        }
        Ok(out)
    }
}
