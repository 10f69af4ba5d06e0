//! Prolongation, bracket and determining-system identities.

use lieforge::dsl::{parse, Document};
use lieforge::expr::{Atom, Derivation, Expr, JetVar, KernelTable, MultiIndex};
use lieforge::lie::{
    commutator_table, determining_system, lie_bracket, prolong, prolong_recursive, ProlongedField, VectorField,
};
use proptest::prelude::*;

mod common;

use common::{point_field, poly, VARS};

fn cbs_doc() -> Document {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/cbs.lie")).unwrap();
    parse(&src).unwrap()
}

fn generators(doc: &Document, kernels: Option<&KernelTable>) -> Vec<VectorField> {
    (1..=6)
        .map(|i| {
            let v = VectorField::from_def(doc.field(&format!("v{i}")).unwrap(), VARS, "u").unwrap();
            match kernels {
                Some(k) => v.map(|c| c.instantiate(k)).unwrap(),
                None => v,
            }
        })
        .collect()
}

fn vanishing_kernels() -> KernelTable {
    let mut k = KernelTable::new();
    k.insert("lam", 1, Expr::zero());
    k.insert("gam", 2, Expr::zero());
    k
}

#[test]
fn closed_formula_matches_recursion_on_generators() {
    let doc = cbs_doc();
    for v in generators(&doc, None) {
        let a = prolong(&v, 4).unwrap();
        let b = prolong_recursive(&v, 4).unwrap();
        assert_eq!(a.eta_j.len(), b.eta_j.len());
        for (j, e) in &a.eta_j {
            assert!(e.equiv(&b.eta_j[j]), "{v}: η^{j:?} differs");
        }
    }
}

#[test]
fn jacobi_identity_on_all_triples() {
    let g = generators(&cbs_doc(), Some(&vanishing_kernels()));
    let mut triples = 0;
    for i in 0..6 {
        for j in i + 1..6 {
            for k in j + 1..6 {
                let (u, v, w) = (&g[i], &g[j], &g[k]);
                let s = lie_bracket(u, &lie_bracket(v, w).unwrap())
                    .unwrap()
                    .add(&lie_bracket(v, &lie_bracket(w, u).unwrap()).unwrap())
                    .unwrap()
                    .add(&lie_bracket(w, &lie_bracket(u, v).unwrap()).unwrap())
                    .unwrap();
                assert!(s.is_zero(), "v{} v{} v{}", i + 1, j + 1, k + 1);
                triples += 1;
            }
        }
    }
    assert_eq!(triples, 20);
}

#[test]
fn table_is_antisymmetric_and_closes() {
    let g = generators(&cbs_doc(), Some(&vanishing_kernels()));
    let table = commutator_table(&g).unwrap();
    for i in 0..6 {
        assert!(table[i][i].raw.is_zero());
        for j in 0..6 {
            assert!(table[i][j].in_span(), "[v{}, v{}] leaves the span", i + 1, j + 1);
            let back = lie_bracket(&g[j], &g[i]).unwrap();
            assert!(table[i][j].raw.add(&back).unwrap().is_zero());
        }
    }
}

#[test]
fn generic_kernels_do_not_close() {
    let g = generators(&cbs_doc(), None);
    let table = commutator_table(&g).unwrap();
    let outside = table.iter().flatten().filter(|d| !d.in_span()).count();
    assert!(outside > 0);
}

#[test]
fn determining_system_reassembles_to_invariance_expression() {
    let doc = cbs_doc();
    let eq = doc.equation("cbs").unwrap();
    let lead = JetVar::new("u", MultiIndex::from_vars(&["x", "t"]));
    let (sys, shell) = determining_system(eq, VARS, "u", &lead).unwrap();
    assert_eq!(sys.reassemble(), shell);
    let key = |vars: &[&[&str]]| {
        vars.iter().fold(Expr::one(), |acc, v| acc * Expr::jet_of("u", v))
    };
    let k = key(&[&["x", "y"], &["x"]]);
    let c = sys.coefficient(&k.num().terms()[0].0).expect("u_x u_xy appears");
    let only_unknowns = c.free_atoms().iter().all(|a| match a {
        Atom::Fn(f) => f.name.starts_with("xi_") || f.name.starts_with("eta_"),
        Atom::Sym(_) | Atom::Jet(_) => true,
        Atom::Pow(_) => false,
    });
    assert!(only_unknowns);
    for (_, coeff) in &sys.equations {
        assert!(!coeff.contains(&|a| matches!(a, Atom::Jet(j) if j.order() > 0)));
    }
}

/// `[pr v, pr w]` restricted to derivative coordinates up to the order of
/// the prolongations.
fn prolonged_bracket(pv: &ProlongedField, pw: &ProlongedField) -> Vec<(MultiIndex, Expr)> {
    pv.eta_j
        .keys()
        .map(|j| {
            let e = pv.apply(&pw.eta_j[j]).unwrap().sub(&pw.apply(&pv.eta_j[j]).unwrap());
            (j.clone(), e)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_formula_matches_recursion(v in point_field()) {
        let a = prolong(&v, 3).unwrap();
        let b = prolong_recursive(&v, 3).unwrap();
        for (j, e) in &a.eta_j {
            prop_assert!(e.equiv(&b.eta_j[j]), "η^{:?}", j);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn prolongation_is_linear(v in point_field(), w in point_field()) {
        let (al, be) = (Expr::param("alpha"), Expr::frac(-3, 2));
        let comb = v.scale(&al).add(&w.scale(&be)).unwrap();
        let (pc, pv, pw) = (prolong(&comb, 3).unwrap(), prolong(&v, 3).unwrap(), prolong(&w, 3).unwrap());
        for (j, e) in &pc.eta_j {
            let rhs = pv.eta_j[j].mul(&al).add(&pw.eta_j[j].mul(&be));
            prop_assert!(e.equiv(&rhs), "η^{:?}", j);
        }
    }

    #[test]
    fn prolongation_is_a_homomorphism(v in point_field(), w in point_field()) {
        let p = 2;
        let (pv, pw) = (prolong(&v, p).unwrap(), prolong(&w, p).unwrap());
        let lhs = prolong(&lie_bracket(&v, &w).unwrap(), p).unwrap();
        for (j, e) in prolonged_bracket(&pv, &pw) {
            prop_assert!(lhs.eta_j[&j].equiv(&e), "η^{:?}", j);
        }
    }

    #[test]
    fn jacobi_on_random_fields(u in point_field(), v in point_field(), w in point_field()) {
        let s = lie_bracket(&u, &lie_bracket(&v, &w).unwrap()).unwrap()
            .add(&lie_bracket(&v, &lie_bracket(&w, &u).unwrap()).unwrap()).unwrap()
            .add(&lie_bracket(&w, &lie_bracket(&u, &v).unwrap()).unwrap()).unwrap();
        prop_assert!(s.is_zero());
    }

    #[test]
    fn fields_act_as_derivations(v in point_field(), f in poly(), g in poly()) {
        let lhs = v.apply(&f.mul(&g)).unwrap();
        let rhs = Derivation::apply(&v, &f).unwrap().mul(&g).add(&f.mul(&v.apply(&g).unwrap()));
        prop_assert!(lhs.equiv(&rhs));
    }
}
