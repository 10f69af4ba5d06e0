//! One-parameter groups generated by `v1..v6`.

use super::{CatalogError, GammaSpec, Result, Specialization, DEP, VARS};
use crate::expr::{Atom, Expr, JetVar, Symbol};
use crate::lie::VectorField;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    /// Closed form of the flow.
    Exact,
    /// `id + eps*v`, correct to first order in `eps`.
    FirstOrder,
}

/// A point map `(x, y, z, t, u) -> (x', y', z', t', u')` depending on the
/// group parameter `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMap {
    pub index: usize,
    pub validity: Validity,
    /// Images of `x, y, z, t, u`.
    pub forward: Vec<Expr>,
    /// Preimages of `x, y, z, t`, written in the image coordinates.
    pub inverse: Vec<Expr>,
}

/// The group parameter.
pub fn eps() -> Expr {
    Expr::constant("eps")
}

fn eps_atom() -> Atom {
    Atom::Sym(Symbol::constant("eps"))
}

fn coords() -> Vec<Expr> {
    VARS.iter().map(|v| Expr::var(v)).chain(std::iter::once(Expr::jet(JetVar::base(DEP)))).collect()
}

fn coord_atoms() -> Vec<Atom> {
    VARS.iter().map(|v| Atom::Sym(Symbol::var(v))).chain(std::iter::once(Atom::Jet(JetVar::base(DEP)))).collect()
}

/// `w = (b*z - d*y)/b`.
fn w() -> Expr {
    let (b, d) = (Expr::param("b"), Expr::param("d"));
    b.mul(&Expr::var("z")).sub(&d.mul(&Expr::var("y"))).div(&b).expect("b is a nonzero symbol")
}

fn half(e: Expr) -> Expr {
    e.scale(&crate::expr::Q::new(1.into(), 2.into()))
}

/// Closed-form flow of `v_i`. Needs a constant `lambda` and `gamma` either
/// zero or `w`.
pub fn flow(i: usize, spec: &Specialization) -> Result<FlowMap> {
    let unsupported = || CatalogError::UnsupportedSpecialization { index: i, spec: spec.to_string() };
    let l = spec.lambda_const().ok_or_else(unsupported)?;
    let with_gamma = match spec.gamma {
        GammaSpec::Zero => false,
        GammaSpec::Argument => true,
        GammaSpec::Generic => return Err(unsupported()),
    };
    let [x, y, z, t, u]: [Expr; 5] = coords().try_into().unwrap();
    let (a, b, c, d) = (Expr::param("a"), Expr::param("b"), Expr::param("c"), Expr::param("d"));
    let e = eps();
    let g = |term: Expr| if with_gamma { term } else { Expr::zero() };
    let ex = |k: i64| Expr::exp(&e.mul(&Expr::int(k)));
    let e2 = e.mul(&e);
    let shift_x = || x.add(&e.mul(&l));
    let unshift_x = || x.sub(&e.mul(&l));
    let (forward, inverse) = match i {
        1 => (
            vec![
                x.add(&l).mul(&ex(1)).sub(&l),
                y.clone(),
                z.clone(),
                t.mul(&ex(2)),
                u.mul(&ex(-1)).add(&g(w().mul(&Expr::one().sub(&ex(-1))))),
            ],
            vec![x.add(&l).mul(&ex(-1)).sub(&l), y.clone(), z.clone(), t.mul(&ex(-2))],
        ),
        2 => (
            vec![shift_x(), y.clone(), z.clone(), t.add(&e), u.add(&g(e.mul(&w())))],
            vec![unshift_x(), y.clone(), z.clone(), t.sub(&e)],
        ),
        3 => {
            let shear = e.mul(&a).mul(&t).div(&c)?;
            let k = b.mul(&c).sub(&a.mul(&d)).div(&b.mul(&c))?;
            let du = e.mul(&x).div(&c)?.add(&half(e2.mul(&l)).div(&c)?);
            let dg = g(e.mul(&w()).add(&half(e2.mul(&t).mul(&k))));
            (
                vec![shift_x(), y.add(&shear), z.add(&e.mul(&t)), t.clone(), u.add(&du).add(&dg)],
                vec![unshift_x(), y.sub(&shear), z.sub(&e.mul(&t)), t.clone()],
            )
        }
        4 => (
            vec![
                x.sub(&l).mul(&ex(-1)).add(&l),
                y.mul(&ex(2)),
                z.mul(&ex(2)),
                t.clone(),
                u.mul(&ex(1)).add(&g(w().mul(&ex(2).sub(&ex(1))))),
            ],
            vec![x.sub(&l).mul(&ex(1)).add(&l), y.mul(&ex(-2)), z.mul(&ex(-2)), t.clone()],
        ),
        5 => (
            vec![shift_x(), y.clone(), z.add(&e), t.clone(), u.add(&g(e.mul(&w()).add(&half(e2.clone()))))],
            vec![unshift_x(), y.clone(), z.sub(&e), t.clone()],
        ),
        6 => {
            let dg = e.mul(&w()).sub(&half(e2.mul(&d)).div(&b)?);
            (
                vec![shift_x(), y.add(&e), z.clone(), t.clone(), u.add(&g(dg))],
                vec![unshift_x(), y.sub(&e), z.clone(), t.clone()],
            )
        }
        _ => return Err(CatalogError::Unknown(format!("v{i}"))),
    };
    Ok(FlowMap { index: i, validity: Validity::Exact, forward, inverse })
}

/// `id + eps*v` for any specialization. The base part must be affine and
/// triangular in `t`, which holds for every `v_i`.
pub fn first_order_flow(i: usize, v: &VectorField) -> Result<FlowMap> {
    let e = eps();
    let forward: Vec<Expr> = coords().iter().zip(v.coords()).map(|(q, (_, c))| q.add(&e.mul(c))).collect();
    let not_affine = || CatalogError::UnsupportedSpecialization { index: i, spec: "non-affine base map".into() };
    let free_of_vars = |x: &Expr| !VARS.iter().any(|n| x.contains_var(n));

    let split = |k: usize| -> Result<(Expr, Expr)> {
        let q = Expr::var(VARS[k]);
        let alpha = v.xi[k].diff_var(VARS[k]);
        let beta = v.xi[k].sub(&alpha.mul(&q));
        Ok((alpha, beta))
    };
    let (at, bt) = split(3)?;
    if !free_of_vars(&at) || !free_of_vars(&bt) {
        return Err(not_affine());
    }
    let t_pre = Expr::var("t").sub(&e.mul(&bt)).div(&Expr::one().add(&e.mul(&at)))?;
    let mut inverse = Vec::new();
    for k in 0..3 {
        let (alpha, beta) = split(k)?;
        let only_t = ["x", "y", "z"].iter().all(|n| !beta.contains_var(n));
        if !free_of_vars(&alpha) || !only_t {
            return Err(not_affine());
        }
        let beta = beta.substitute_vars(&[("t", t_pre.clone())])?;
        let q = Expr::var(VARS[k]);
        inverse.push(q.sub(&e.mul(&beta)).div(&Expr::one().add(&e.mul(&alpha)))?);
    }
    inverse.push(t_pre);
    Ok(FlowMap { index: i, validity: Validity::FirstOrder, forward, inverse })
}

impl FlowMap {
    /// The map at a fixed group parameter.
    pub fn at(&self, value: &Expr) -> Result<FlowMap> {
        let s = [(eps_atom(), value.clone())];
        let map = |v: &[Expr]| v.iter().map(|e| e.substitute(&s)).collect::<std::result::Result<Vec<_>, _>>();
        Ok(FlowMap { index: self.index, validity: self.validity, forward: map(&self.forward)?, inverse: map(&self.inverse)? })
    }

    /// The map with the parameters bound.
    pub fn bind(&self, p: &super::CbsParams) -> Result<FlowMap> {
        let map = |v: &[Expr]| v.iter().map(|e| p.apply(e)).collect::<Result<Vec<_>>>();
        Ok(FlowMap { index: self.index, validity: self.validity, forward: map(&self.forward)?, inverse: map(&self.inverse)? })
    }

    /// `expr` with the coordinates replaced by their images.
    pub fn pull(&self, expr: &Expr) -> Result<Expr> {
        let s: Vec<(Atom, Expr)> = coord_atoms().into_iter().zip(self.forward.iter().cloned()).collect();
        Ok(expr.substitute(&s)?)
    }

    /// `u~(p') = U(p, S(p))` with `p` the preimage of `p'`.
    pub fn transformed_solution(&self, sol: &Expr) -> Result<Expr> {
        let on_graph = self.forward[4].substitute(&[(Atom::Jet(JetVar::base(DEP)), sol.clone())])?;
        let s: Vec<(&str, Expr)> = VARS.iter().copied().zip(self.inverse.iter().cloned()).collect();
        Ok(on_graph.substitute_vars(&s)?)
    }

    pub fn is_identity_at_zero(&self) -> Result<bool> {
        let m = self.at(&Expr::zero())?;
        Ok(m.forward.iter().zip(coords()).all(|(f, c)| f.equiv(&c)))
    }

    /// `d/d eps` of the map at `eps = 0`.
    pub fn tangent(&self) -> Result<Vec<Expr>> {
        let e = eps_atom();
        self.forward.iter().map(|f| Ok(f.diff(&e).substitute(&[(e.clone(), Expr::zero())])?)).collect()
    }

    pub fn tangent_matches(&self, v: &VectorField) -> Result<bool> {
        Ok(self.tangent()?.iter().zip(v.coords()).all(|(a, (_, b))| a.equiv(b)))
    }

    /// `d/d eps F - v(F)` per coordinate; all zero for an exact flow.
    pub fn ode_residual(&self, v: &VectorField) -> Result<Vec<Expr>> {
        let e = eps_atom();
        self.forward.iter().zip(v.coords()).map(|(f, (_, c))| Ok(f.diff(&e).sub(&self.pull(c)?))).collect()
    }

    /// `F(inverse)` minus the identity on the base coordinates.
    pub fn inverse_residual(&self) -> Result<Vec<Expr>> {
        let s: Vec<(&str, Expr)> = VARS.iter().copied().zip(self.inverse.iter().cloned()).collect();
        self.forward[..4]
            .iter()
            .zip(VARS)
            .map(|(f, q)| Ok(f.substitute_vars(&s)?.sub(&Expr::var(q))))
            .collect()
    }

    /// `F(e1) o F(e2) - F(e1 + e2)` per coordinate.
    pub fn group_law_residual(&self) -> Result<Vec<Expr>> {
        let (e1, e2) = (Expr::constant("eps1"), Expr::constant("eps2"));
        let outer = self.at(&e1)?;
        let inner = self.at(&e2)?;
        let sum = self.at(&e1.add(&e2))?;
        outer.forward.iter().zip(&sum.forward).map(|(f, g)| Ok(inner.pull(f)?.sub(g))).collect()
    }
}
