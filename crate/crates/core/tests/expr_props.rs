//! Algebraic and differential identities of the expression kernel.

mod common;

use common::{ex, jet_poly, kernels, term};
use lieforge::expr::{normalize, Atom, EvalPoint, Expr, ExprError, JetVar, MultiIndex, Symbol};
use proptest::prelude::*;

fn x() -> Atom {
    Atom::Sym(Symbol::var("x"))
}

fn y() -> Atom {
    Atom::Sym(Symbol::var("y"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn addition_commutes(a in term(), b in term()) {
        let (a, b) = (ex(&a), ex(&b));
        prop_assert!((&a + &b).equiv(&(&b + &a)));
        prop_assert_eq!(&a + &b, &b + &a);
    }

    #[test]
    fn addition_associates(a in term(), b in term(), c in term()) {
        let (a, b, c) = (ex(&a), ex(&b), ex(&c));
        prop_assert!(((&a + &b) + &c).equiv(&(&a + (&b + &c))));
    }

    #[test]
    fn multiplication_associates(a in term(), b in term(), c in term()) {
        let (a, b, c) = (ex(&a), ex(&b), ex(&c));
        prop_assert!(((&a * &b) * &c).equiv(&(&a * (&b * &c))));
    }

    #[test]
    fn distributivity(a in term(), b in term(), c in term()) {
        let (a, b, c) = (ex(&a), ex(&b), ex(&c));
        prop_assert!((&a * (&b + &c)).equiv(&(&a * &b + &a * &c)));
    }

    #[test]
    fn self_difference_vanishes(a in term()) {
        let a = ex(&a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn normalize_is_idempotent(a in term()) {
        let e = ex(&a);
        let again = normalize(&e.to_term()).unwrap();
        prop_assert_eq!(&again, &e);
    }

    #[test]
    fn partial_derivatives_commute(a in term()) {
        let e = ex(&a);
        let xy = e.diff(&x()).diff(&y());
        let yx = e.diff(&y()).diff(&x());
        prop_assert!(xy.equiv(&yx));
    }

    #[test]
    fn leibniz(a in term(), b in term()) {
        let (a, b) = (ex(&a), ex(&b));
        let lhs = (&a * &b).diff(&x());
        let rhs = a.diff(&x()) * &b + &a * b.diff(&x());
        prop_assert!(lhs.equiv(&rhs));
    }

    #[test]
    fn total_derivatives_commute(e in jet_poly()) {
        let xy = e.total_derivative("x").unwrap().total_derivative("y").unwrap();
        let yx = e.total_derivative("y").unwrap().total_derivative("x").unwrap();
        prop_assert_eq!(xy, yx);
    }

    #[test]
    fn eval_commutes_with_substitution(
        a in term(),
        s in term(),
        vals in prop::collection::vec(-2.0f64..2.0, 6),
    ) {
        let e = ex(&a);
        let s = ex(&s).substitute_vars(&[("x", Expr::var("t"))]).unwrap();
        let mut pt = EvalPoint::with_kernels(kernels());
        pt.set_var("x", vals[0]).set_var("y", vals[1]).set_var("t", vals[2]);
        pt.set_param("a", vals[3]).set_param("b", vals[4]);
        pt.set_jet(JetVar::base("u"), vals[5]);
        pt.set_jet(JetVar::new("u", MultiIndex::from_vars(&["x"])), 0.5);
        pt.set_jet(JetVar::new("u", MultiIndex::from_vars(&["x", "y"])), -0.25);
        let lhs = e.substitute_vars(&[("x", s.clone())]).unwrap().eval(&pt);
        let sv = s.eval(&pt);
        prop_assume!(sv.is_ok());
        let mut pt2 = pt.clone();
        pt2.set_var("x", sv.unwrap());
        let rhs = e.eval(&pt2);
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                let scale = l.abs().max(r.abs()).max(1.0);
                prop_assert!((l - r).abs() <= 1e-12 * scale * 64.0, "{} vs {}", l, r);
            }
            (Err(ExprError::EvaluationPole(_)), _) | (_, Err(ExprError::EvaluationPole(_))) => {}
            (l, r) => prop_assert!(false, "{:?} vs {:?}", l, r),
        }
    }
}

