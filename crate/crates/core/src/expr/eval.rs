use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::ToPrimitive;

use super::{Atom, Expr, ExprError, JetVar, KernelTable, Poly, Result, SymKind, Symbol};

/// Numeric values for atoms, plus kernel templates for opaque functions.
#[derive(Default)]
pub struct EvalPoint {
    values: HashMap<Atom, f64>,
    kernels: KernelTable,
    templates: Mutex<HashMap<(String, Vec<u8>), Expr>>,
}

impl Clone for EvalPoint {
    fn clone(&self) -> Self {
        EvalPoint {
            values: self.values.clone(),
            kernels: self.kernels.clone(),
            templates: Mutex::new(self.templates.lock().map(|t| t.clone()).unwrap_or_default()),
        }
    }
}

impl std::fmt::Debug for EvalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvalPoint").field("values", &self.values).finish()
    }
}

impl EvalPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_kernels(kernels: KernelTable) -> Self {
        EvalPoint { kernels, ..Self::default() }
    }

    pub fn set(&mut self, atom: Atom, v: f64) -> &mut Self {
        self.values.insert(atom, v);
        self
    }

    pub fn set_var(&mut self, name: &str, v: f64) -> &mut Self {
        self.set(Atom::Sym(Symbol::var(name)), v)
    }

    pub fn set_param(&mut self, name: &str, v: f64) -> &mut Self {
        self.set(Atom::Sym(Symbol::param(name)), v)
    }

    pub fn set_const(&mut self, name: &str, v: f64) -> &mut Self {
        self.set(Atom::Sym(Symbol::constant(name)), v)
    }

    pub fn set_jet(&mut self, jet: JetVar, v: f64) -> &mut Self {
        self.set(Atom::Jet(jet), v)
    }

    pub fn get(&self, atom: &Atom) -> Option<f64> {
        self.values.get(atom).copied()
    }

    pub fn kernels(&self) -> &KernelTable {
        &self.kernels
    }

    fn template(&self, name: &str, derivs: &[u8]) -> Result<Option<Expr>> {
        let key = (name.to_string(), derivs.to_vec());
        if let Some(t) = self.templates.lock().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(Some(t));
        }
        let t = self.kernels.derivative_template(name, derivs)?;
        if let (Some(t), Ok(mut m)) = (&t, self.templates.lock()) {
            m.insert(key, t.clone());
        }
        Ok(t)
    }
}

fn check(v: f64, what: &dyn Fn() -> String) -> Result<f64> {
    if v.is_nan() {
        return Err(ExprError::NonReal(what()));
    }
    if v.is_infinite() {
        return Err(ExprError::EvaluationPole(what()));
    }
    Ok(v)
}

fn eval_atom(a: &Atom, pt: &EvalPoint, cache: &mut HashMap<Atom, f64>) -> Result<f64> {
    if let Some(v) = pt.values.get(a) {
        return Ok(*v);
    }
    if let Some(v) = cache.get(a) {
        return Ok(*v);
    }
    let v = match a {
        Atom::Sym(s) if s.kind == SymKind::Euler => std::f64::consts::E,
        Atom::Sym(s) => return Err(ExprError::UnboundSymbol(s.name.to_string())),
        Atom::Jet(j) => return Err(ExprError::UnboundSymbol(j.to_string())),
        Atom::Fn(app) => {
            let args: Vec<f64> = app
                .args
                .iter()
                .map(|e| eval_with(e, pt, cache))
                .collect::<Result<_>>()?;
            if let Some(t) = pt.template(&app.name, &app.derivs)? {
                let mut inner = EvalPoint::new();
                for (i, v) in args.iter().enumerate() {
                    inner.set(Atom::Sym(Symbol::slot(i + 1)), *v);
                }
                inner.kernels = pt.kernels.clone();
                let mut c = HashMap::new();
                eval_with(&t, &inner, &mut c)?
            } else if &*app.name == "log" && app.rule.is_some() && args.len() == 1 {
                if args[0] == 0.0 {
                    return Err(ExprError::EvaluationPole(a.to_string()));
                }
                if args[0] < 0.0 {
                    return Err(ExprError::NonReal(a.to_string()));
                }
                args[0].ln()
            } else {
                return Err(ExprError::UnboundSymbol(a.to_string()));
            }
        }
        Atom::Pow(p) => {
            let b = eval_with(&p.base, pt, cache)?;
            let e = eval_with(&p.exp, pt, cache)?;
            if b == 0.0 && e < 0.0 {
                return Err(ExprError::EvaluationPole(a.to_string()));
            }
            if b < 0.0 && e.fract() != 0.0 {
                return Err(ExprError::NonReal(a.to_string()));
            }
            b.powf(e)
        }
    };
    let v = check(v, &|| a.to_string())?;
    cache.insert(a.clone(), v);
    Ok(v)
}

fn eval_poly(p: &Poly, pt: &EvalPoint, cache: &mut HashMap<Atom, f64>) -> Result<f64> {
    let mut acc = 0.0;
    for (m, q) in p.terms() {
        let mut t = q.to_f64().unwrap_or(f64::NAN);
        for (a, e) in m.factors() {
            let v = eval_atom(a, pt, cache)?;
            if v == 0.0 && *e < 0 {
                return Err(ExprError::EvaluationPole(a.to_string()));
            }
            t *= v.powi(*e);
        }
        acc += t;
    }
    Ok(acc)
}

fn eval_with(e: &Expr, pt: &EvalPoint, cache: &mut HashMap<Atom, f64>) -> Result<f64> {
    let n = eval_poly(e.num(), pt, cache)?;
    let mut d = 1.0;
    for (p, k) in e.den() {
        let v = eval_poly(p, pt, cache)?;
        if v == 0.0 {
            return Err(ExprError::EvaluationPole(Expr::from_poly(p.clone()).to_string()));
        }
        d *= v.powi(*k as i32);
    }
    check(n / d, &|| e.to_string())
}

impl Expr {
    /// Floating-point value at `pt`. Terms are accumulated in canonical
    /// order, so results are reproducible bit for bit.
    pub fn eval(&self, pt: &EvalPoint) -> Result<f64> {
        let mut cache = HashMap::new();
        eval_with(self, pt, &mut cache)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_rational_functions() {
        let x = Expr::var("x");
        let e = (&x + Expr::one()).div(&(&x - Expr::one())).unwrap();
        let mut pt = EvalPoint::new();
        pt.set_var("x", 3.0);
        assert_eq!(e.eval(&pt).unwrap(), 2.0);
        pt.set_var("x", 1.0);
        assert!(matches!(e.eval(&pt), Err(ExprError::EvaluationPole(_))));
    }

    #[test]
    fn unbound_and_nonreal() {
        let x = Expr::var("x");
        assert!(matches!(x.eval(&EvalPoint::new()), Err(ExprError::UnboundSymbol(_))));
        let mut pt = EvalPoint::new();
        pt.set_var("x", -4.0);
        assert!(matches!(Expr::sqrt(&x).eval(&pt), Err(ExprError::NonReal(_))));
    }

    #[test]
    fn kernels_evaluate_through_templates() {
        let mut table = KernelTable::new();
        table.insert("lam", 1, Expr::slot(1).pow_int(3).unwrap());
        let t = Expr::var("t");
        let e = Expr::call("lam", vec![t.clone()]).diff_var("t");
        let mut pt = EvalPoint::with_kernels(table);
        pt.set_var("t", 2.0);
        assert_eq!(e.eval(&pt).unwrap(), 12.0);
    }
}
