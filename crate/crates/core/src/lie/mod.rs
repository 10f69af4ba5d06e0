//! Point vector fields on jet space: prolongation, invariance conditions,
//! determining systems, brackets and commutator tables.

mod bracket;
mod determining;
mod prolong;

use std::fmt;

use thiserror::Error;

use crate::dsl::FieldDef;
use crate::expr::{Atom, Derivation, Expr, ExprError, JetVar, Symbol};

pub use bracket::{commutator_table, decompose, lie_bracket, BracketDecomposition};
pub use determining::{
    check_infinitesimals, collect_determining, determining_system, diagonal_weights, generic_field,
    invariance_expression, kernel_table, on_shell_reduce, scaling_weights, unknown_name, CheckReport,
    DeterminingSystem,
};
pub use prolong::{prolong, prolong_indices, prolong_recursive, ProlongedField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("coefficient of {0} depends on derivatives of the dependent variable")]
    NotPointField(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("equation has order {need} but the prolongation stops at order {have}")]
    InsufficientProlongation { need: u32, have: u32 },
    #[error("equation is not affine in {0}")]
    NotAffineInLeading(String),
    #[error("cannot collect jet monomials: {0}")]
    CollectionFailure(String),
    #[error("fields live on different spaces")]
    SpaceMismatch,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T> = std::result::Result<T, LieError>;

/// `Σ ξ^i ∂/∂x_i + η ∂/∂u` with coefficients depending on base
/// coordinates only.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub vars: Vec<String>,
    pub dep: String,
    pub xi: Vec<Expr>,
    pub eta: Expr,
}

impl VectorField {
    pub fn new(vars: &[&str], dep: &str, xi: Vec<Expr>, eta: Expr) -> Result<Self> {
        assert_eq!(vars.len(), xi.len(), "one coefficient per independent variable");
        let v = VectorField { vars: vars.iter().map(|s| s.to_string()).collect(), dep: dep.into(), xi, eta };
        v.check_point()?;
        Ok(v)
    }

    pub fn zero(vars: &[&str], dep: &str) -> Self {
        VectorField::new(vars, dep, vec![Expr::zero(); vars.len()], Expr::zero()).unwrap()
    }

    /// Field from a parsed definition; coordinates it does not mention get
    /// coefficient zero.
    pub fn from_def(def: &FieldDef, vars: &[&str], dep: &str) -> Result<Self> {
        let mut xi = vec![Expr::zero(); vars.len()];
        let mut eta = Expr::zero();
        for (name, c) in &def.coeffs {
            if name == dep {
                eta = c.clone();
            } else if let Some(i) = vars.iter().position(|v| v == name) {
                xi[i] = c.clone();
            } else {
                return Err(LieError::UnknownCoordinate(name.clone()));
            }
        }
        VectorField::new(vars, dep, xi, eta)
    }

    fn check_point(&self) -> Result<()> {
        for (name, c) in self.coords() {
            if c.contains(&|a| matches!(a, Atom::Jet(j) if j.order() > 0)) {
                return Err(LieError::NotPointField(name.to_string()));
            }
        }
        Ok(())
    }

    pub fn var_refs(&self) -> Vec<&str> {
        self.vars.iter().map(String::as_str).collect()
    }

    /// `(coordinate, coefficient)` pairs, independent variables first.
    pub fn coords(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.vars
            .iter()
            .map(String::as_str)
            .zip(self.xi.iter())
            .chain(std::iter::once((self.dep.as_str(), &self.eta)))
    }

    pub fn coeff(&self, name: &str) -> Option<&Expr> {
        self.coords().find(|(n, _)| *n == name).map(|(_, c)| c)
    }

    fn same_space(&self, other: &VectorField) -> Result<()> {
        if self.vars != other.vars || self.dep != other.dep {
            return Err(LieError::SpaceMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &VectorField, f: impl Fn(&Expr, &Expr) -> Expr) -> Result<VectorField> {
        self.same_space(other)?;
        Ok(VectorField {
            vars: self.vars.clone(),
            dep: self.dep.clone(),
            xi: self.xi.iter().zip(&other.xi).map(|(a, b)| f(a, b)).collect(),
            eta: f(&self.eta, &other.eta),
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, k: &Expr) -> VectorField {
        self.map(|c| Ok(c.mul(k))).unwrap()
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> std::result::Result<Expr, ExprError>) -> Result<VectorField> {
        let xi = self.xi.iter().map(&mut f).collect::<std::result::Result<Vec<_>, _>>()?;
        let eta = f(&self.eta)?;
        Ok(VectorField { vars: self.vars.clone(), dep: self.dep.clone(), xi, eta })
    }

    pub fn is_zero(&self) -> bool {
        self.xi.iter().all(Expr::is_zero) && self.eta.is_zero()
    }

    pub fn equiv(&self, other: &VectorField) -> bool {
        self.sub(other).map_or(false, |d| d.is_zero())
    }

    /// The field acting as a derivation on functions of the base coordinates.
    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        Ok(Derivation::apply(self, e)?)
    }

    pub fn dep_atom(&self) -> Atom {
        Atom::Jet(JetVar::base(&self.dep))
    }

    pub fn var_atom(&self, i: usize) -> Atom {
        Atom::Sym(Symbol::var(&self.vars[i]))
    }
}

impl Derivation for VectorField {
    fn leaf(&self, atom: &Atom) -> std::result::Result<Expr, ExprError> {
        Ok(match atom {
            Atom::Sym(s) if s.kind == crate::expr::SymKind::Var => {
                match self.vars.iter().position(|v| **v == *s.name) {
                    Some(i) => self.xi[i].clone(),
                    None => Expr::zero(),
                }
            }
            Atom::Jet(j) if j.order() == 0 && *j.dep == *self.dep => self.eta.clone(),
            _ => Expr::zero(),
        })
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> =
            self.coords().filter(|(_, c)| !c.is_zero()).map(|(n, c)| format!("({c})*D{n}")).collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    const VARS: &[&str] = &["x", "y", "z", "t"];

    #[test]
    fn field_from_definition() {
        let doc = parse("indep x, y, z, t\ndep u\nfield v = x*Dx + 2*t*Dt - u*Du\n").unwrap();
        let v = VectorField::from_def(doc.field("v").unwrap(), VARS, "u").unwrap();
        assert_eq!(v.xi[3], Expr::int(2) * Expr::var("t"));
        assert_eq!(v.eta, -Expr::jet_of("u", &[]));
        assert_eq!(v.to_string(), "(x)*Dx + (2*t)*Dt + (-u)*Du");
    }

    #[test]
    fn derivative_coefficients_are_rejected() {
        let e = VectorField::new(&["x"], "u", vec![Expr::jet_of("u", &["x"])], Expr::zero()).unwrap_err();
        assert_eq!(e, LieError::NotPointField("x".into()));
    }

    #[test]
    fn acts_as_derivation() {
        let v = VectorField::new(&["x", "t"], "u", vec![Expr::var("x"), Expr::int(2) * Expr::var("t")], Expr::zero())
            .unwrap();
        let e = Expr::var("x") * Expr::var("x") * Expr::var("t");
        let got = v.apply(&e).unwrap();
        assert_eq!(got, Expr::int(4) * Expr::var("x") * Expr::var("x") * Expr::var("t"));
    }
}
