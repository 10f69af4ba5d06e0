use std::collections::{BTreeMap, HashMap};

use super::{Atom, Expr, ExprError, FnApp, Poly, PowAtom, Result, Symbol};
use std::sync::Arc;

/// Rewrites atoms bottom-up. `f` sees each distinct atom once, after the
/// atom's own arguments (kernel args, power base and exponent) have been
/// rewritten, and returns `None` to keep it.
pub(crate) fn rewrite(e: &Expr, f: &mut dyn FnMut(&Atom) -> Result<Option<Expr>>) -> Result<Expr> {
    let mut cache: HashMap<Atom, Option<Expr>> = HashMap::new();
    rewrite_cached(e, f, &mut cache)
}

fn rewrite_cached(
    e: &Expr,
    f: &mut dyn FnMut(&Atom) -> Result<Option<Expr>>,
    cache: &mut HashMap<Atom, Option<Expr>>,
) -> Result<Expr> {
    let mut any = false;
    for a in e.atoms() {
        if !cache.contains_key(&a) {
            let r = rewrite_atom(&a, f, cache)?;
            cache.insert(a.clone(), r);
        }
        any |= cache[&a].is_some();
    }
    if !any {
        return Ok(e.clone());
    }
    let num = rebuild_poly(e.num(), cache)?;
    let mut den = Expr::one();
    for (p, k) in e.den() {
        den = den.mul(&rebuild_poly(p, cache)?.pow_int(*k as i32)?);
    }
    num.div(&den)
}

fn rewrite_atom(
    a: &Atom,
    f: &mut dyn FnMut(&Atom) -> Result<Option<Expr>>,
    cache: &mut HashMap<Atom, Option<Expr>>,
) -> Result<Option<Expr>> {
    // Rewrite children first, then offer the (possibly rebuilt) atom to `f`.
    let rebuilt = match a {
        Atom::Fn(app) => {
            let mut changed = false;
            let mut args = Vec::with_capacity(app.args.len());
            for arg in &app.args {
                let r = rewrite_cached(arg, f, cache)?;
                changed |= r != *arg;
                args.push(r);
            }
            changed.then(|| Atom::Fn(Arc::new(FnApp { args, ..(**app).clone() })))
        }
        Atom::Pow(p) => {
            let base = rewrite_cached(&p.base, f, cache)?;
            let exp = rewrite_cached(&p.exp, f, cache)?;
            if base != p.base || exp != p.exp {
                return match f(&Atom::Pow(Arc::new(PowAtom { base: base.clone(), exp: exp.clone() })))? {
                    Some(r) => Ok(Some(r)),
                    None => Ok(Some(base.pow(&exp))),
                };
            }
            None
        }
        _ => None,
    };
    match rebuilt {
        Some(atom) => Ok(Some(f(&atom)?.unwrap_or_else(|| Expr::atom(atom)))),
        None => f(a),
    }
}

fn rebuild_poly(p: &Poly, cache: &HashMap<Atom, Option<Expr>>) -> Result<Expr> {
    let mut kept = Vec::new();
    let mut out = Expr::zero();
    for (m, q) in p.terms() {
        if m.factors().iter().all(|(a, _)| cache.get(a).map_or(true, Option::is_none)) {
            kept.push((m.clone(), q.clone()));
            continue;
        }
        let mut term = Expr::rational(q.clone());
        for (a, e) in m.factors() {
            let base = match cache.get(a) {
                Some(Some(r)) => r.clone(),
                _ => Expr::atom(a.clone()),
            };
            term = term.mul(&base.pow_int(*e)?);
        }
        out = out.add(&term);
    }
    Ok(out.add(&Expr::from_poly(Poly::from_terms(kept))))
}

/// Simultaneous replacement of atoms by expressions.
///
/// A key may occur in its own replacement (`x -> x + eps*lam(t)`), but a
/// chain of two or more keys that refer to each other in a loop is rejected.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    map: BTreeMap<Atom, Expr>,
}

impl Substitution {
    pub fn new<I: IntoIterator<Item = (Atom, Expr)>>(pairs: I) -> Result<Self> {
        let map: BTreeMap<Atom, Expr> = pairs.into_iter().collect();
        let sub = Substitution { map };
        sub.check_cycles()?;
        Ok(sub)
    }

    pub fn vars<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Expr)>,
        S: AsRef<str>,
    {
        Self::new(pairs.into_iter().map(|(n, e)| (Atom::Sym(Symbol::var(n.as_ref())), e)))
    }

    pub fn get(&self, a: &Atom) -> Option<&Expr> {
        self.map.get(a)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn check_cycles(&self) -> Result<()> {
        let keys: Vec<&Atom> = self.map.keys().collect();
        let edges: Vec<Vec<usize>> = keys
            .iter()
            .map(|k| {
                let atoms = self.map[*k].free_atoms();
                keys.iter()
                    .enumerate()
                    .filter(|(_, other)| **other != *k && atoms.contains(**other))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; keys.len()];
        fn visit(i: usize, edges: &[Vec<usize>], state: &mut [u8]) -> Option<usize> {
            state[i] = 1;
            for &j in &edges[i] {
                if state[j] == 1 {
                    return Some(j);
                }
                if state[j] == 0 {
                    if let Some(c) = visit(j, edges, state) {
                        return Some(c);
                    }
                }
            }
            state[i] = 2;
            None
        }
        for i in 0..keys.len() {
            if state[i] == 0 {
                if let Some(c) = visit(i, &edges, &mut state) {
                    return Err(ExprError::CyclicSubstitution(keys[c].to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        if self.map.is_empty() {
            return Ok(e.clone());
        }
        rewrite(e, &mut |a| Ok(self.map.get(a).cloned()))
    }
}

/// Kernel templates keyed by name: arity and a body over slots `@1..@n`.
#[derive(Clone, Debug, Default)]
pub struct KernelTable {
    entries: BTreeMap<String, (usize, Expr)>,
}

impl KernelTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, arity: usize, template: Expr) {
        self.entries.insert(name.to_string(), (arity, template));
    }

    pub fn get(&self, name: &str) -> Option<&(usize, Expr)> {
        self.entries.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Template for `name` differentiated `derivs[i]` times in slot `i+1`.
    pub fn derivative_template(&self, name: &str, derivs: &[u8]) -> Result<Option<Expr>> {
        let Some((arity, body)) = self.entries.get(name) else {
            return Ok(None);
        };
        if *arity != derivs.len() {
            return Err(ExprError::ArityMismatch { name: name.to_string(), expected: *arity, got: derivs.len() });
        }
        let mut out = body.clone();
        for (i, d) in derivs.iter().enumerate() {
            let slot = Atom::Sym(Symbol::slot(i + 1));
            for _ in 0..*d {
                out = out.diff(&slot);
            }
        }
        Ok(Some(out))
    }
}

impl Expr {
    /// Simultaneous substitution of atoms, descending into kernel arguments
    /// and power kernels.
    pub fn substitute(&self, pairs: &[(Atom, Expr)]) -> Result<Expr> {
        Substitution::new(pairs.iter().cloned())?.apply(self)
    }

    pub fn substitute_vars(&self, pairs: &[(&str, Expr)]) -> Result<Expr> {
        Substitution::vars(pairs.iter().map(|(n, e)| (*n, e.clone())))?.apply(self)
    }

    /// Binds `@1..@n` to `args`.
    pub fn substitute_slots(&self, args: &[Expr]) -> Result<Expr> {
        let pairs = args
            .iter()
            .enumerate()
            .map(|(i, a)| (Atom::Sym(Symbol::slot(i + 1)), a.clone()));
        Substitution { map: pairs.collect() }.apply(self)
    }

    /// Replaces every application of a tabled kernel (and its derivatives)
    /// by the template, differentiated in its slots and bound to the
    /// arguments.
    pub fn instantiate(&self, table: &KernelTable) -> Result<Expr> {
        if table.is_empty() {
            return Ok(self.clone());
        }
        rewrite(self, &mut |a| match a {
            Atom::Fn(app) => match table.derivative_template(&app.name, &app.derivs)? {
                Some(t) => Ok(Some(t.substitute_slots(&app.args)?)),
                None => Ok(None),
            },
            _ => Ok(None),
        })
    }

    /// Applies `f` to every atom, including those nested in kernels.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Result<Expr> {
        rewrite(self, &mut |a| Ok(f(a)))
    }
}
