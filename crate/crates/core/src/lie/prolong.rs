use std::collections::{BTreeMap, BTreeSet};

use super::{LieError, Result, VectorField};
use crate::expr::{Atom, Derivation, Expr, ExprError, JetVar, MultiIndex, Total, DEFAULT_JET_CAP};
use crate::par;

/// A point field lifted to jet space up to a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedField {
    pub field: VectorField,
    pub order: u32,
    /// `η^J` for every computed `J`, including `η^∅ = η`.
    pub eta_j: BTreeMap<MultiIndex, Expr>,
}

impl ProlongedField {
    pub fn eta(&self, idx: &MultiIndex) -> Option<&Expr> {
        self.eta_j.get(idx)
    }

    /// Applies the prolonged field to a function on jet space.
    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        for j in e.jets() {
            if *j.dep == *self.field.dep && !self.eta_j.contains_key(&j.idx) {
                return Err(LieError::InsufficientProlongation { need: j.order(), have: self.order });
            }
        }
        Ok(Derivation::apply(self, e)?)
    }
}

impl Derivation for ProlongedField {
    fn leaf(&self, atom: &Atom) -> std::result::Result<Expr, ExprError> {
        match atom {
            Atom::Jet(j) if *j.dep == *self.field.dep => Ok(self.eta_j.get(&j.idx).cloned().unwrap_or_else(Expr::zero)),
            _ => self.field.leaf(atom),
        }
    }
}

fn jet(dep: &str, idx: MultiIndex) -> Expr {
    Expr::jet(JetVar::new(dep, idx))
}

fn check_order(p: u32) -> Result<()> {
    if p > DEFAULT_JET_CAP {
        return Err(ExprError::JetOrderExceeded { order: p, cap: DEFAULT_JET_CAP }.into());
    }
    Ok(())
}

/// Splits `J` into a parent index and the variable added last.
fn parent(idx: &MultiIndex) -> (MultiIndex, String) {
    let last = idx.expanded().pop().expect("nonzero index");
    let p = idx.checked_sub(&MultiIndex::from_vars(&[&*last])).unwrap();
    (p, last.to_string())
}

/// `J` together with every index on its parent chain.
fn close_under_parents(wanted: &[MultiIndex]) -> BTreeSet<MultiIndex> {
    let mut out = BTreeSet::new();
    for j in wanted {
        let mut cur = j.clone();
        while !cur.is_zero() && out.insert(cur.clone()) {
            cur = parent(&cur).0;
        }
    }
    out
}

fn by_order(set: &BTreeSet<MultiIndex>) -> Vec<Vec<MultiIndex>> {
    let max = set.iter().map(MultiIndex::order).max().unwrap_or(0);
    (1..=max).map(|k| set.iter().filter(|j| j.order() == k).cloned().collect()).collect()
}

/// Characteristic `Q = η - Σ ξ^i u_i`.
fn characteristic(v: &VectorField) -> Expr {
    let mut q = v.eta.clone();
    for (x, xi) in v.vars.iter().zip(&v.xi) {
        q = q.sub(&xi.mul(&jet(&v.dep, MultiIndex::from_vars(&[x]))));
    }
    q
}

/// Prolongs `v` to the listed indices (and whatever they need) with the
/// closed formula `η^J = D_J Q + Σ ξ^i u_{J,i}`. Indices of equal order are
/// processed in parallel.
pub fn prolong_indices(v: &VectorField, wanted: &[MultiIndex]) -> Result<ProlongedField> {
    let all = close_under_parents(wanted);
    let order = all.iter().map(MultiIndex::order).max().unwrap_or(0);
    check_order(order)?;
    let cap = order + 1;
    let mut dq: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
    dq.insert(MultiIndex::zero(), characteristic(v));
    for level in by_order(&all) {
        let computed = par::map(&level, |j| {
            let (p, var) = parent(j);
            Total { var: &var, cap }.apply(&dq[&p])
        });
        for (j, e) in level.into_iter().zip(computed) {
            dq.insert(j, e?);
        }
    }
    let entries: Vec<(MultiIndex, Expr)> = dq.into_iter().collect();
    let etas = par::map(&entries, |(j, d)| {
        if j.is_zero() {
            return v.eta.clone();
        }
        let mut e = d.clone();
        for (x, xi) in v.vars.iter().zip(&v.xi) {
            e = e.add(&xi.mul(&jet(&v.dep, j.incremented(x))));
        }
        e
    });
    let eta_j = entries.into_iter().map(|(j, _)| j).zip(etas).collect();
    Ok(ProlongedField { field: v.clone(), order, eta_j })
}

/// Every `η^J` with `1 ≤ |J| ≤ p`, by the closed formula.
pub fn prolong(v: &VectorField, p: u32) -> Result<ProlongedField> {
    check_order(p)?;
    let vars = v.var_refs();
    let mut pv = prolong_indices(v, &MultiIndex::all_up_to(&vars, p))?;
    pv.order = p;
    Ok(pv)
}

/// Same result as [`prolong`], built by the recursion
/// `η^{J,i} = D_i η^J - Σ_k (D_i ξ^k) u_{J,k}`.
pub fn prolong_recursive(v: &VectorField, p: u32) -> Result<ProlongedField> {
    check_order(p)?;
    let vars = v.var_refs();
    let cap = p + 1;
    let mut eta_j: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
    eta_j.insert(MultiIndex::zero(), v.eta.clone());
    let mut dxi: BTreeMap<&str, Vec<Expr>> = BTreeMap::new();
    for x in &vars {
        let row = v.xi.iter().map(|xi| Total { var: x, cap }.apply(xi)).collect::<std::result::Result<_, _>>()?;
        dxi.insert(x, row);
    }
    let all: BTreeSet<MultiIndex> = MultiIndex::all_up_to(&vars, p).into_iter().collect();
    for level in by_order(&all) {
        for j in level {
            let (par_idx, i) = parent(&j);
            let mut e = Total { var: &i, cap }.apply(&eta_j[&par_idx])?;
            for (k, xk) in vars.iter().enumerate() {
                e = e.sub(&dxi[i.as_str()][k].mul(&jet(&v.dep, par_idx.incremented(xk))));
            }
            eta_j.insert(j, e);
        }
    }
    Ok(ProlongedField { field: v.clone(), order: p, eta_j })
}

#[cfg(test)]
mod tests {
    use super::*;

    const VARS: &[&str] = &["x", "y", "z", "t"];

    fn field(xi: [Expr; 4], eta: Expr) -> VectorField {
        VectorField::new(VARS, "u", xi.to_vec(), eta).unwrap()
    }

    fn z() -> Expr {
        Expr::zero()
    }

    #[test]
    fn translations_prolong_trivially() {
        let dx = field([Expr::one(), z(), z(), z()], z());
        let pv = prolong(&dx, 4).unwrap();
        assert_eq!(pv.eta_j.len(), 1 + 4 + 10 + 20 + 35);
        assert!(pv.eta_j.values().all(Expr::is_zero));
        let zero = prolong(&VectorField::zero(VARS, "u"), 4).unwrap();
        assert!(zero.eta_j.values().all(Expr::is_zero));
    }

    #[test]
    fn scaling_part_of_first_generator() {
        let v = field([Expr::var("x"), z(), z(), z()], -Expr::jet_of("u", &[]));
        let pv = prolong(&v, 2).unwrap();
        let ux = MultiIndex::from_vars(&["x"]);
        assert_eq!(pv.eta(&ux).unwrap(), &(Expr::int(-2) * Expr::jet_of("u", &["x"])));
        let uxx = MultiIndex::from_vars(&["x", "x"]);
        assert_eq!(pv.eta(&uxx).unwrap(), &(Expr::int(-3) * Expr::jet_of("u", &["x", "x"])));
        assert_eq!(prolong_recursive(&v, 2).unwrap().eta_j, pv.eta_j);
    }

    #[test]
    fn order_above_cap_is_rejected() {
        let v = VectorField::zero(VARS, "u");
        assert!(matches!(
            prolong(&v, 7),
            Err(LieError::Expr(ExprError::JetOrderExceeded { order: 7, .. }))
        ));
    }

    #[test]
    fn selected_indices_match_full_prolongation() {
        let v = field([Expr::var("t") * Expr::var("x"), z(), Expr::var("y"), z()], Expr::var("x") * Expr::jet_of("u", &[]));
        let full = prolong(&v, 3).unwrap();
        let idx = MultiIndex::from_vars(&["x", "x", "y"]);
        let part = prolong_indices(&v, &[idx.clone()]).unwrap();
        assert_eq!(part.eta(&idx), full.eta(&idx));
        assert_eq!(part.eta_j.len(), 4);
    }
}
