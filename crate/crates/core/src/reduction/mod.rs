//! Similarity reductions: pulling equations back through an ansatz.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;
use thiserror::Error;

use crate::dsl::AnsatzDef;
use crate::expr::{
    Atom, Derivation, Expr, ExprError, JetVar, MultiIndex, SymKind, DEFAULT_JET_CAP,
};
use crate::lie::{LieError, VectorField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("old variable `{0}` survives the reduction")]
    ResidualOldVariable(String),
    #[error("malformed ansatz: {0}")]
    BadAnsatz(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

pub type Result<T> = std::result::Result<T, ReductionError>;

/// Change of variables `new_j = N_j(old)`, `old_dep = U(old, new_dep)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionAnsatz {
    pub name: String,
    pub old: Vec<String>,
    pub new: Vec<(String, Expr)>,
    pub old_dep: String,
    pub new_dep: String,
    /// `U`, in the old variables and the order-zero new dependent symbol.
    pub dep: Expr,
    /// Old variables in terms of new ones (and possibly other old ones).
    pub inverse: Vec<(String, Expr)>,
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(ReductionError::BadAnsatz(msg.into()))
}

impl ReductionAnsatz {
    pub fn from_def(name: &str, def: &AnsatzDef) -> Result<Self> {
        let (old_dep, dep) = def.dep.clone();
        let deps: BTreeSet<JetVar> =
            dep.free_atoms().into_iter().filter_map(|a| a.as_jet().cloned()).filter(|j| *j.dep != *old_dep).collect();
        let new_dep = match deps.iter().next() {
            Some(j) if deps.len() == 1 && j.order() == 0 => j.dep.to_string(),
            Some(_) => return bad(format!("{name}: the dependent ansatz must use one new symbol, undifferentiated")),
            None => return bad(format!("{name}: the dependent ansatz has no new dependent symbol")),
        };
        let a = ReductionAnsatz {
            name: name.to_string(),
            old: def.old.clone(),
            new: def.new.clone(),
            old_dep,
            new_dep,
            dep,
            inverse: def.inverse.clone(),
        };
        a.validate()?;
        Ok(a)
    }

    /// `new_i = old_i` and `old_dep = new_dep`.
    pub fn identity(old: &[&str], new: &[&str], old_dep: &str, new_dep: &str) -> Self {
        ReductionAnsatz {
            name: "identity".into(),
            old: old.iter().map(|s| s.to_string()).collect(),
            new: new.iter().zip(old).map(|(n, o)| (n.to_string(), Expr::var(o))).collect(),
            old_dep: old_dep.into(),
            new_dep: new_dep.into(),
            dep: Expr::jet(JetVar::base(new_dep)),
            inverse: old.iter().zip(new).map(|(o, n)| (o.to_string(), Expr::var(n))).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.new.is_empty() || self.new.len() > self.old.len() {
            return bad(format!("{}: {} new variables for {} old", self.name, self.new.len(), self.old.len()));
        }
        if self.old_dep == self.new_dep {
            return bad(format!("{}: old and new dependent symbols coincide", self.name));
        }
        for (n, e) in &self.new {
            if e.contains(&|a| a.as_jet().is_some()) {
                return bad(format!("{}: `{n}` depends on a dependent variable", self.name));
            }
            if let Some(v) = self.new_vars_in(e).into_iter().next() {
                return bad(format!("{}: `{n}` refers to the new variable `{v}`", self.name));
            }
        }
        if self.dep.contains(&|a| matches!(a, Atom::Jet(j) if *j.dep == *self.old_dep)) {
            return bad(format!("{}: the dependent ansatz refers to `{}`", self.name, self.old_dep));
        }
        Ok(())
    }

    pub fn new_names(&self) -> Vec<&str> {
        self.new.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn is_old_only(&self, name: &str) -> bool {
        self.old.iter().any(|o| o == name) && !self.new.iter().any(|(n, _)| n == name)
    }

    fn new_vars_in(&self, e: &Expr) -> Vec<String> {
        let names = self.new_names();
        vars_of(e).into_iter().filter(|v| names.contains(&v.as_str()) && !self.old.contains(v)).collect()
    }

    fn new_jet(&self, idx: MultiIndex) -> Expr {
        Expr::jet(JetVar::new(&self.new_dep, idx))
    }

    /// `D_J U` in old coordinates, for every `J` in `wanted`.
    fn derivatives(&self, wanted: &BTreeSet<MultiIndex>) -> Result<BTreeMap<MultiIndex, Expr>> {
        let grads: BTreeMap<&str, Vec<Expr>> = self
            .old
            .iter()
            .map(|o| (o.as_str(), self.new.iter().map(|(_, n)| n.diff_var(o)).collect()))
            .collect();
        let mut table: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
        table.insert(MultiIndex::zero(), self.dep.clone());
        for j in wanted {
            let mut cur = MultiIndex::zero();
            for v in j.expanded() {
                let next = cur.incremented(&v);
                if !table.contains_key(&next) {
                    let Some(g) = grads.get(&*v) else {
                        return bad(format!("{}: `{v}` is not an old variable", self.name));
                    };
                    let d = Chain { ansatz: self, var: &v, grads: g }.apply(&table[&cur])?;
                    table.insert(next.clone(), d);
                }
                cur = next;
            }
        }
        Ok(table)
    }

    /// Substitutes the ansatz into `eq` and rewrites old variables through
    /// the inverse hints, without collecting.
    pub fn substitute_into(&self, eq: &Expr) -> Result<Expr> {
        let wanted: BTreeSet<MultiIndex> =
            eq.free_atoms().iter().filter_map(Atom::as_jet).filter(|j| *j.dep == *self.old_dep).map(|j| j.idx.clone()).collect();
        let table = self.derivatives(&wanted)?;
        let e = eq.map_atoms(&mut |a| match a {
            Atom::Jet(j) if *j.dep == *self.old_dep => Some(table[&j.idx].clone()),
            _ => None,
        })?;
        let inv: Vec<(&str, Expr)> = self.inverse.iter().map(|(o, e)| (o.as_str(), e.clone())).collect();
        Ok(e.substitute_vars(&inv)?)
    }

    /// The old dependent variable once the new one is replaced by `g`, a
    /// function of the new variables.
    pub fn lift(&self, g: &Expr) -> Result<Expr> {
        let fwd: Vec<(&str, Expr)> = self.new.iter().filter(|(n, _)| !self.old.contains(n)).map(|(n, e)| (n.as_str(), e.clone())).collect();
        let g_old = g.substitute_vars(&fwd)?;
        Ok(self.dep.substitute(&[(Atom::Jet(JetVar::base(&self.new_dep)), g_old)])?)
    }

    /// Hand composition `self ∘ next`: first `self`, then `next` on the
    /// variables `self` produced.
    pub fn compose(&self, next: &ReductionAnsatz) -> Result<ReductionAnsatz> {
        let mine: BTreeSet<&str> = self.new_names().into_iter().collect();
        let theirs: BTreeSet<&str> = next.old.iter().map(String::as_str).collect();
        if mine != theirs || next.old_dep != self.new_dep {
            return bad(format!("{} cannot follow {}", next.name, self.name));
        }
        let fwd: Vec<(&str, Expr)> = self.new.iter().map(|(n, e)| (n.as_str(), e.clone())).collect();
        let new = next
            .new
            .iter()
            .map(|(n, e)| Ok((n.clone(), e.substitute_vars(&fwd)?)))
            .collect::<Result<Vec<_>>>()?;
        let inner = next.dep.substitute_vars(&fwd)?;
        let dep = self.dep.substitute(&[(Atom::Jet(JetVar::base(&self.new_dep)), inner)])?;
        // Variables of `self` that `next` does not invert fall back to
        // their forward definitions.
        let mut back: Vec<(&str, Expr)> = Vec::new();
        for (n, e) in &self.new {
            let rhs = match next.inverse.iter().find(|(o, _)| o == n) {
                Some((_, inv)) => inv.substitute_vars(&fwd_except(&fwd, &next.inverse))?,
                None => e.clone(),
            };
            back.push((n.as_str(), rhs));
        }
        let mut inverse = Vec::new();
        for (o, e) in &self.inverse {
            let rhs = e.substitute_vars(&back)?;
            if rhs != Expr::var(o) {
                inverse.push((o.clone(), rhs));
            }
        }
        let out = ReductionAnsatz {
            name: format!("{}+{}", self.name, next.name),
            old: self.old.clone(),
            new,
            old_dep: self.old_dep.clone(),
            new_dep: next.new_dep.clone(),
            dep,
            inverse,
        };
        out.validate()?;
        Ok(out)
    }
}

fn fwd_except<'a>(fwd: &[(&'a str, Expr)], inverted: &[(String, Expr)]) -> Vec<(&'a str, Expr)> {
    fwd.iter().filter(|(n, _)| !inverted.iter().any(|(o, _)| o == n)).cloned().collect()
}

fn vars_of(e: &Expr) -> BTreeSet<String> {
    e.free_atoms()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Sym(s) if s.kind == SymKind::Var => Some(s.name.to_string()),
            _ => None,
        })
        .collect()
}

/// Total derivative in an old variable, with the new dependent symbol
/// differentiated through the new variables.
struct Chain<'a> {
    ansatz: &'a ReductionAnsatz,
    var: &'a str,
    grads: &'a [Expr],
}

impl Derivation for Chain<'_> {
    fn leaf(&self, atom: &Atom) -> std::result::Result<Expr, ExprError> {
        match atom {
            Atom::Sym(s) if s.kind == SymKind::Var && &*s.name == self.var => Ok(Expr::one()),
            Atom::Jet(j) if *j.dep == *self.ansatz.new_dep => {
                if j.order() + 1 > DEFAULT_JET_CAP {
                    return Err(ExprError::JetOrderExceeded { order: j.order() + 1, cap: DEFAULT_JET_CAP });
                }
                let mut out = Expr::zero();
                for ((n, _), g) in self.ansatz.new.iter().zip(self.grads) {
                    if !g.is_zero() {
                        out = out.add(&g.mul(&self.ansatz.new_jet(j.idx.incremented(n))));
                    }
                }
                Ok(out)
            }
            _ => Ok(Expr::zero()),
        }
    }
}

/// An equation in the new jet space, with the factor dropped on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPde {
    pub equation: Expr,
    /// Substituted equation = multiplier · equation.
    pub multiplier: Expr,
    pub vars: Vec<String>,
    pub dep: String,
    /// Names of the ansätze applied, in order.
    pub chain: Vec<String>,
}

impl ReducedPde {
    /// Pulls this equation back through a further ansatz.
    pub fn then(&self, next: &ReductionAnsatz) -> Result<ReducedPde> {
        let mut r = pullback(&self.equation, next)?;
        let mut chain = self.chain.clone();
        chain.append(&mut r.chain);
        r.chain = chain;
        Ok(r)
    }
}

fn is_jet_of(dep: &str) -> impl Fn(&Atom) -> bool + '_ {
    move |a: &Atom| matches!(a, Atom::Jet(j) if *j.dep == *dep)
}

/// Pulls `eq` back through the ansatz and strips the jet-free factor.
pub fn pullback(eq: &Expr, ansatz: &ReductionAnsatz) -> Result<ReducedPde> {
    let e = ansatz.substitute_into(eq)?;
    let vars = ansatz.new_names().into_iter().map(String::from).collect();
    let chain = vec![ansatz.name.clone()];
    let dep = ansatz.new_dep.clone();
    let parts = e.split_by(&is_jet_of(&ansatz.new_dep)).map_err(ReductionError::BadAnsatz)?;
    let Some(pivot) = parts.iter().map(|(_, c)| c).min_by_key(|c| weight(c)) else {
        return Ok(ReducedPde { equation: Expr::zero(), multiplier: Expr::one(), vars, dep, chain });
    };
    let mut reduced = Expr::zero();
    for (m, c) in &parts {
        let ratio = c.div(pivot)?;
        if let Some(v) = vars_of(&ratio).into_iter().find(|v| ansatz.is_old_only(v)) {
            return Err(ReductionError::ResidualOldVariable(v));
        }
        reduced = reduced.add(&Expr::monomial_expr(m).mul(&ratio));
    }
    let equation = primitive(&reduced, &is_jet_of(&ansatz.new_dep));
    let multiplier = e.div(&equation)?;
    Ok(ReducedPde { equation, multiplier, vars, dep, chain })
}

fn weight(e: &Expr) -> (usize, usize) {
    (e.num().len() + e.den().len(), e.to_string().len())
}

/// Clears denominators and removes the jet-free monomial and rational
/// content; the leading term ends up positive.
fn primitive(e: &Expr, is_jet: &dyn Fn(&Atom) -> bool) -> Expr {
    let num = e.num();
    if num.is_zero() {
        return Expr::zero();
    }
    let m = num.monomial_content().without(is_jet);
    let p = num.mul_monomial(&m.inv(), &One::one());
    let mut c = p.rational_content();
    if !p.is_positive_leading() {
        c = -c;
    }
    Expr::from_poly(p.scale(&c.recip()))
}

/// `Some(e1/e2)` when the ratio is nonzero and free of jet variables.
pub fn equal_up_to_multiplier(e1: &Expr, e2: &Expr) -> Option<Expr> {
    if e1.is_zero() || e2.is_zero() {
        return (e1.is_zero() && e2.is_zero()).then(Expr::one);
    }
    let r = e1.div(e2).ok()?;
    (!r.is_zero() && !r.contains(&|a| a.as_jet().is_some())).then_some(r)
}

/// Result of applying a field to the invariants of an ansatz.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationReport {
    /// One entry per new variable, then `dep` for the dependent ansatz.
    pub entries: Vec<(String, Expr)>,
}

impl AnnihilationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|(_, e)| e.is_zero())
    }

    pub fn failures(&self) -> Vec<&(String, Expr)> {
        self.entries.iter().filter(|(_, e)| !e.is_zero()).collect()
    }
}

/// Checks that every new variable, and the new dependent variable solved
/// from the ansatz, is constant along `v`.
pub fn annihilation_check(v: &VectorField, ansatz: &ReductionAnsatz) -> Result<AnnihilationReport> {
    if v.dep != ansatz.old_dep || ansatz.old.iter().any(|o| !v.vars.contains(o)) {
        return bad(format!("{} does not live on the space of the field", ansatz.name));
    }
    let mut entries = Vec::new();
    for (n, e) in &ansatz.new {
        entries.push((n.clone(), v.apply(e)?));
    }
    let g = Atom::Jet(JetVar::base(&ansatz.new_dep));
    let scale = ansatz.dep.diff(&g);
    if scale.is_zero() || scale.contains(&|a| *a == g) {
        return bad(format!("{}: the dependent ansatz is not affine in `{}`", ansatz.name, ansatz.new_dep));
    }
    let base = ansatz.dep.sub(&scale.mul(&Expr::atom(g)));
    let u = Expr::jet(JetVar::base(&v.dep));
    let invariant = u.sub(&base).div(&scale)?;
    let moved = v.apply(&invariant)?;
    let on_ansatz = moved.substitute(&[(Atom::Jet(JetVar::base(&v.dep)), ansatz.dep.clone())])?;
    entries.push(("dep".into(), on_ansatz));
    Ok(AnnihilationReport { entries })
}

/// Closed-form candidate for a reduced ODE.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolutionCandidate {
    pub dep: String,
    pub var: String,
    pub value: Expr,
    /// Expressions assumed nonzero.
    pub constraints: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeReport {
    pub residual: Expr,
}

impl OdeReport {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

impl OdeSolutionCandidate {
    pub fn new(dep: &str, var: &str, value: Expr) -> Self {
        OdeSolutionCandidate { dep: dep.into(), var: var.into(), value, constraints: Vec::new() }
    }

    /// Variables other than the independent one, which a candidate may not
    /// depend on.
    pub fn stray_variables(&self) -> Vec<String> {
        let mut out: Vec<String> = vars_of(&self.value).into_iter().filter(|v| *v != self.var).collect();
        out.extend(self.value.jets().into_iter().map(|j| j.to_string()));
        out
    }
}

/// Substitutes the candidate and its derivatives into `ode`. Symbols in
/// `assume` are replaced first, in both the equation and the candidate.
pub fn verify_ode_solution(ode: &Expr, cand: &OdeSolutionCandidate, assume: &[(&str, Expr)]) -> Result<OdeReport> {
    let sub = |e: &Expr| -> Result<Expr> {
        if assume.is_empty() {
            return Ok(e.clone());
        }
        let pairs: Vec<(Atom, Expr)> = e
            .free_atoms()
            .into_iter()
            .filter_map(|a| {
                let name = a.as_symbol()?.name.to_string();
                assume.iter().find(|(n, _)| *n == name).map(|(_, v)| (a, v.clone()))
            })
            .collect();
        Ok(e.substitute(&pairs)?)
    };
    let ode = sub(ode)?;
    let value = sub(&cand.value)?;
    let mut derivs: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
    for j in ode.jets() {
        if *j.dep != *cand.dep || derivs.contains_key(&j.idx) {
            continue;
        }
        let mut d = value.clone();
        for v in j.idx.expanded() {
            d = d.diff_var(&v);
        }
        derivs.insert(j.idx.clone(), d);
    }
    let residual = ode.map_atoms(&mut |a| match a {
        Atom::Jet(j) if *j.dep == *cand.dep => Some(derivs[&j.idx].clone()),
        _ => None,
    })?;
    Ok(OdeReport { residual })
}
