use std::collections::{BTreeMap, BTreeSet};

use super::{prolong_indices, LieError, ProlongedField, Result, VectorField};
use crate::expr::{Atom, Derivation, Expr, JetVar, KernelTable, Monomial, MultiIndex, Substitution, SymKind, Total, Q, DEFAULT_JET_CAP};
use crate::par;

/// `pr v (eq)`: every coordinate of jet space that `eq` depends on,
/// weighted by the matching coefficient of the prolonged field.
pub fn invariance_expression(pv: &ProlongedField, eq: &Expr) -> Result<Expr> {
    let need = eq.max_jet_order();
    if need > pv.order {
        return Err(LieError::InsufficientProlongation { need, have: pv.order });
    }
    pv.apply(eq)
}

fn dominated(j: &JetVar, leading: &JetVar) -> Option<MultiIndex> {
    if j.dep != leading.dep {
        return None;
    }
    j.idx.checked_sub(&leading.idx)
}

fn dominated_jets(e: &Expr, leading: &JetVar) -> Vec<(JetVar, MultiIndex)> {
    e.jets().into_iter().filter_map(|j| dominated(&j, leading).map(|k| (j, k))).collect()
}

/// Eliminates `leading` and all its derivatives from `expr` using `eq = 0`
/// and its total derivatives.
pub fn on_shell_reduce(expr: &Expr, eq: &Expr, leading: &JetVar) -> Result<Expr> {
    let lead = Atom::Jet(leading.clone());
    let coeff = eq.diff(&lead);
    if coeff.is_zero() || !coeff.diff(&lead).is_zero() {
        return Err(LieError::NotAffineInLeading(lead.to_string()));
    }
    let rest = eq.sub(&coeff.mul(&Expr::atom(lead.clone())));
    let solved = rest.neg().div(&coeff)?;
    if !dominated_jets(&solved, leading).is_empty() {
        return Err(LieError::NotAffineInLeading(lead.to_string()));
    }
    let mut cache: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
    cache.insert(MultiIndex::zero(), solved);
    let mut cur = expr.clone();
    for _ in 0..=DEFAULT_JET_CAP {
        let hits = dominated_jets(&cur, leading);
        if hits.is_empty() {
            return Ok(cur);
        }
        let mut pairs = Vec::with_capacity(hits.len());
        for (j, k) in hits {
            pairs.push((Atom::Jet(j), derived(&mut cache, &k)?));
        }
        cur = Substitution::new(pairs)?.apply(&cur)?;
    }
    Err(LieError::NotAffineInLeading(lead.to_string()))
}

fn derived(cache: &mut BTreeMap<MultiIndex, Expr>, k: &MultiIndex) -> Result<Expr> {
    if let Some(e) = cache.get(k) {
        return Ok(e.clone());
    }
    let last = k.expanded().pop().expect("nonzero index");
    let parent = k.checked_sub(&MultiIndex::from_vars(&[&*last])).unwrap();
    let base = derived(cache, &parent)?;
    let e = Total { var: &last, cap: DEFAULT_JET_CAP }.apply(&base)?;
    cache.insert(k.clone(), e.clone());
    Ok(e)
}

/// One equation per independent jet monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct DeterminingSystem {
    pub equations: Vec<(Monomial, Expr)>,
}

impl DeterminingSystem {
    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// `Σ key · coefficient`.
    pub fn reassemble(&self) -> Expr {
        self.equations.iter().fold(Expr::zero(), |acc, (k, c)| acc.add(&Expr::monomial_expr(k).mul(c)))
    }

    pub fn coefficient(&self, key: &Monomial) -> Option<&Expr> {
        self.equations.iter().find(|(k, _)| k == key).map(|(_, c)| c)
    }
}

/// Splits an on-shell expression by monomials in the derivative jets of
/// `dep`.
pub fn collect_determining(expr: &Expr, dep: &str) -> Result<DeterminingSystem> {
    let is_key = |a: &Atom| matches!(a, Atom::Jet(j) if j.order() > 0 && *j.dep == *dep);
    let equations = expr.split_by(&is_key).map_err(LieError::CollectionFailure)?;
    for (k, c) in &equations {
        if c.contains(&is_key) {
            return Err(LieError::CollectionFailure(format!("coefficient of {} depends on derivatives", Expr::monomial_expr(k))));
        }
    }
    Ok(DeterminingSystem { equations })
}

/// Name of the unknown kernel standing for the coefficient of `coord`.
pub fn unknown_name(coord: &str, is_dep: bool) -> String {
    if is_dep {
        format!("eta_{coord}")
    } else {
        format!("xi_{coord}")
    }
}

/// The field whose coefficients are unknown kernels of all base
/// coordinates.
pub fn generic_field(vars: &[&str], dep: &str) -> VectorField {
    let mut args: Vec<Expr> = vars.iter().map(|v| Expr::var(v)).collect();
    args.push(Expr::jet(JetVar::base(dep)));
    let xi = vars.iter().map(|v| Expr::call(&unknown_name(v, false), args.clone())).collect();
    let eta = Expr::call(&unknown_name(dep, true), args);
    VectorField::new(vars, dep, xi, eta).expect("kernels of base coordinates")
}

/// Generates the determining system of `eq`, eliminating `leading` on
/// shell. Also returns the on-shell invariance expression.
pub fn determining_system(eq: &Expr, vars: &[&str], dep: &str, leading: &JetVar) -> Result<(DeterminingSystem, Expr)> {
    let v = generic_field(vars, dep);
    let wanted: BTreeSet<MultiIndex> = eq.jets().into_iter().filter(|j| *j.dep == *dep).map(|j| j.idx).collect();
    let wanted: Vec<MultiIndex> = wanted.into_iter().filter(|j| !j.is_zero()).collect();
    let mut pv = prolong_indices(&v, &wanted)?;
    pv.order = eq.max_jet_order();
    let inv = invariance_expression(&pv, eq)?;
    let shell = on_shell_reduce(&inv, eq, leading)?;
    Ok((collect_determining(&shell, dep)?, shell))
}

/// Outcome of substituting a concrete field into a determining system.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    /// Key monomial and the residual of its equation.
    pub entries: Vec<(Monomial, Expr)>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|(_, r)| r.is_zero())
    }

    pub fn failures(&self) -> impl Iterator<Item = &(Monomial, Expr)> {
        self.entries.iter().filter(|(_, r)| !r.is_zero())
    }
}

/// Templates binding the unknown kernels to the coefficients of `candidate`.
pub fn kernel_table(candidate: &VectorField) -> Result<KernelTable> {
    let mut to_slots: Vec<(Atom, Expr)> =
        (0..candidate.vars.len()).map(|i| (candidate.var_atom(i), Expr::slot(i + 1))).collect();
    to_slots.push((candidate.dep_atom(), Expr::slot(candidate.vars.len() + 1)));
    let arity = to_slots.len();
    let mut table = KernelTable::new();
    for (name, c) in candidate.coords() {
        let template = c.substitute(&to_slots)?;
        table.insert(&unknown_name(name, name == candidate.dep), arity, template);
    }
    Ok(table)
}

/// Substitutes `candidate` for the unknown kernels in every equation.
pub fn check_infinitesimals(sys: &DeterminingSystem, candidate: &VectorField) -> Result<CheckReport> {
    let table = kernel_table(candidate)?;
    let residuals = par::map(&sys.equations, |(_, c)| c.instantiate(&table));
    let mut entries = Vec::with_capacity(residuals.len());
    for ((k, _), r) in sys.equations.iter().zip(residuals) {
        entries.push((k.clone(), r?));
    }
    Ok(CheckReport { entries })
}

/// Weights `(w_i, w_u)` when `v = Σ w_i x_i ∂_{x_i} + w_u u ∂_u` with
/// rational weights.
pub fn diagonal_weights(v: &VectorField) -> Option<(Vec<Q>, Q)> {
    let mut w = Vec::new();
    for (i, xi) in v.xi.iter().enumerate() {
        w.push(xi.div(&Expr::atom(v.var_atom(i))).ok()?.as_rational()?);
    }
    let wu = v.eta.div(&Expr::atom(v.dep_atom())).ok()?.as_rational()?;
    Some((w, wu))
}

/// Scaling weight of every term of `eq` under `x_i → e^{w_i ε} x_i`,
/// `u → e^{w_u ε} u`. The equation admits the scaling when all weights
/// agree.
pub fn scaling_weights(eq: &Expr, vars: &[&str], dep: &str, w: &[Q], wu: &Q) -> Vec<Q> {
    let weight_of = |a: &Atom| -> Q {
        match a {
            Atom::Sym(s) if s.kind == SymKind::Var => {
                vars.iter().position(|v| **v == *s.name).map_or_else(Q::default, |i| w[i].clone())
            }
            Atom::Jet(j) if *j.dep == *dep => {
                let mut q = wu.clone();
                for (v, c) in j.idx.entries() {
                    if let Some(i) = vars.iter().position(|x| **x == **v) {
                        q -= w[i].clone() * Q::from_integer((*c as i64).into());
                    }
                }
                q
            }
            _ => Q::default(),
        }
    };
    let den_weight: Q = eq
        .den()
        .iter()
        .map(|(p, k)| {
            let lead = p.leading().map(|(m, _)| m.clone()).unwrap_or_else(Monomial::one);
            monomial_weight(&lead, &weight_of) * Q::from_integer((*k as i64).into())
        })
        .sum();
    eq.num().terms().iter().map(|(m, _)| monomial_weight(m, &weight_of) - den_weight.clone()).collect()
}

fn monomial_weight(m: &Monomial, weight_of: &dyn Fn(&Atom) -> Q) -> Q {
    m.factors().iter().map(|(a, e)| weight_of(a) * Q::from_integer((*e as i64).into())).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::lie::prolong;

    const VARS: &[&str] = &["x", "y", "z", "t"];

    fn cbs() -> Expr {
        let doc = parse(
            "indep x, y, z, t\ndep u\nparam a, b, c, d\n\
             equation cbs: d(u,x,t) + a*u_x*u_xy + b*u_y*u_xx + c*u_x*u_xz + d*u_z*u_xx + u_xxxy + u_xxxz = 0\n",
        )
        .unwrap();
        doc.equation("cbs").unwrap().clone()
    }

    fn lead() -> JetVar {
        JetVar::new("u", MultiIndex::from_vars(&["x", "t"]))
    }

    #[test]
    fn translation_leaves_autonomous_equation_invariant() {
        let dt = VectorField::new(VARS, "u", vec![Expr::zero(), Expr::zero(), Expr::zero(), Expr::one()], Expr::zero())
            .unwrap();
        let eq = Expr::jet_of("u", &["x", "t"]);
        assert!(invariance_expression(&prolong(&dt, 2).unwrap(), &eq).unwrap().is_zero());
    }

    #[test]
    fn order_zero_equation_gives_eta() {
        let v = generic_field(VARS, "u");
        let pv = prolong(&v, 1).unwrap();
        assert_eq!(invariance_expression(&pv, &Expr::jet_of("u", &[])).unwrap(), v.eta);
        let e = invariance_expression(&prolong(&v, 2).unwrap(), &cbs()).unwrap_err();
        assert_eq!(e, LieError::InsufficientProlongation { need: 4, have: 2 });
    }

    #[test]
    fn solving_for_the_leading_derivative() {
        let eq = cbs();
        let ut = Expr::jet_of("u", &["x", "t"]);
        let got = on_shell_reduce(&ut, &eq, &lead()).unwrap();
        assert_eq!(got, ut.sub(&eq));
        assert!(on_shell_reduce(&eq, &eq, &lead()).unwrap().is_zero());
        let ux = Expr::jet_of("u", &["x"]);
        assert_eq!(on_shell_reduce(&ux, &eq, &lead()).unwrap(), ux);
        let sq = ut.mul(&ut);
        assert!(matches!(on_shell_reduce(&ut, &sq, &lead()), Err(LieError::NotAffineInLeading(_))));
    }

    #[test]
    fn derivatives_of_the_leading_term_are_eliminated() {
        let eq = cbs();
        let e = Expr::jet_of("u", &["x", "x", "t"]).mul(&Expr::jet_of("u", &["y", "x", "t"]));
        let got = on_shell_reduce(&e, &eq, &lead()).unwrap();
        assert!(dominated_jets(&got, &lead()).is_empty());
    }

    #[test]
    fn collecting_monomials() {
        assert!(collect_determining(&Expr::zero(), "u").unwrap().is_empty());
        let k = Expr::call("k", vec![Expr::var("x")]);
        let e = k.mul(&Expr::jet_of("u", &["x", "x"]));
        let sys = collect_determining(&e, "u").unwrap();
        assert_eq!(sys.len(), 1);
        assert_eq!(sys.equations[0].1, k);
        assert_eq!(sys.reassemble(), e);
    }

    #[test]
    fn scaling_weights_of_cbs_terms_agree() {
        let eq = cbs();
        let q = |n: i64| Q::from_integer(n.into());
        let w1 = scaling_weights(&eq, VARS, "u", &[q(1), q(0), q(0), q(2)], &q(-1));
        assert_eq!(w1.len(), 7);
        assert!(w1.iter().all(|w| *w == w1[0]));
        let w4 = scaling_weights(&eq, VARS, "u", &[q(-1), q(2), q(2), q(0)], &q(1));
        assert!(w4.iter().all(|w| *w == w4[0]));
        let bad = scaling_weights(&eq, VARS, "u", &[q(1), q(0), q(0), q(0)], &q(0));
        assert!(bad.iter().any(|w| *w != bad[0]));
    }
}
