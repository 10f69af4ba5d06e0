//! Strategies and fixtures shared by the property suites.
#![allow(dead_code)]

use std::path::PathBuf;

use lieforge::dsl::parse;
use lieforge::expr::{normalize, Expr, JetVar, KernelTable, MultiIndex, Symbol, Term};
use lieforge::lie::VectorField;
use proptest::prelude::*;

pub const VARS: &[&str] = &["x", "y", "z", "t"];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Every `.lie` fixture as `(file name, source)`.
pub fn fixtures() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(fixture_dir()).expect("fixture directory") {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "lie") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.push((name, std::fs::read_to_string(&path).unwrap()));
        }
    }
    out.sort();
    assert!(!out.is_empty(), "no .lie fixtures found");
    out
}

/// Fixtures whose printed form parses back to the same items.
pub fn fixture_round_trip_failures() -> Vec<String> {
    let mut bad = Vec::new();
    for (name, src) in fixtures() {
        match parse(&src) {
            Ok(doc) => match parse(&lieforge::dsl::print(&doc)) {
                Ok(again) if doc.same_items(&again) => {}
                _ => bad.push(name),
            },
            Err(_) => bad.push(name),
        }
    }
    bad
}

pub fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        (-4i64..5).prop_map(Term::int),
        (1i64..4, 2i64..5).prop_map(|(n, d)| Term::div(Term::int(n), Term::int(d))),
        Just(Term::var("x")),
        Just(Term::var("y")),
        Just(Term::var("t")),
        Just(Term::Sym(Symbol::param("a"))),
        Just(Term::Sym(Symbol::param("b"))),
        Just(Term::Jet(JetVar::base("u"))),
        Just(Term::Jet(JetVar::new("u", MultiIndex::from_vars(&["x"])))),
        Just(Term::Jet(JetVar::new("u", MultiIndex::from_vars(&["x", "y"])))),
    ]
}

pub fn call(name: &str, args: Vec<Term>) -> Term {
    let n = args.len();
    Term::Call { name: name.into(), args, derivs: vec![0; n], rule: None }
}

/// Random rational expressions over a few symbols, jets and kernels.
pub fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Term::Sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Term::Product),
            (inner.clone(), 2i64..4).prop_map(|(b, n)| Term::IntPow(Box::new(b), n)),
            inner.clone().prop_map(|a| call("g", vec![a])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| call("f", vec![a, b])),
            inner.clone().prop_map(|a| {
                // 1/(a^2 + 1) never vanishes identically
                Term::div(
                    Term::int(1),
                    Term::Sum(vec![Term::IntPow(Box::new(a), 2), Term::int(1)]),
                )
            }),
        ]
    })
}

/// Polynomials in jet variables up to order 2.
pub fn jet_poly() -> impl Strategy<Value = Expr> {
    let jets: Vec<Expr> = [&[][..], &["x"], &["y"], &["x", "x"], &["x", "y"], &["y", "y"]]
        .iter()
        .map(|v| Expr::jet_of("u", v))
        .collect();
    let monomial = (
        -3i64..4,
        prop::collection::vec(0usize..jets.len(), 0..3),
        prop::sample::select(vec!["x", "y", "a"]),
    )
        .prop_map(move |(c, idx, s)| {
            let mut m = Expr::int(c);
            for i in idx {
                m = m * &jets[i];
            }
            let sym = if s == "a" { Expr::param("a") } else { Expr::var(s) };
            m * sym
        });
    prop::collection::vec(monomial, 1..5).prop_map(|ms| ms.into_iter().fold(Expr::zero(), |a, b| a + b))
}

pub fn ex(t: &Term) -> Expr {
    normalize(t).expect("generated terms are well formed")
}

pub fn kernels() -> KernelTable {
    let mut k = KernelTable::new();
    k.insert("g", 1, Expr::slot(1) * Expr::slot(1) + Expr::int(1));
    k.insert("f", 2, Expr::slot(1) - Expr::int(2) * Expr::slot(2));
    k
}

/// Low-degree polynomial in the base coordinates.
pub fn poly() -> impl Strategy<Value = Expr> {
    let coords = ["x", "y", "z", "t", "u"];
    let mono = (-2i64..3, prop::collection::vec(0usize..5, 0..3)).prop_map(move |(c, idx)| {
        idx.into_iter().fold(Expr::int(c), |acc, i| {
            let f = if coords[i] == "u" { Expr::jet_of("u", &[]) } else { Expr::var(coords[i]) };
            acc * f
        })
    });
    prop::collection::vec(mono, 0..3).prop_map(|ms| ms.into_iter().fold(Expr::zero(), |a, b| a + b))
}

pub fn point_field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec(poly(), 5).prop_map(|mut c| {
        let eta = c.pop().unwrap();
        VectorField::new(VARS, "u", c, eta).unwrap()
    })
}

pub const HEADER: &str = "indep x, y, t\ndep u\nparam a, b\nconst c1, c2\nkernel lam/1, gam/2\n";

/// Random expression text over the fixed header.
pub fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..9).prop_map(|n| n.to_string()),
        (1i64..9, 2i64..9).prop_map(|(n, d)| format!("{n}/{d}")),
        Just("1.25".to_string()),
        prop::sample::select(vec!["x", "y", "t", "a", "b", "c1", "c2", "u", "u_x", "u_xy", "u_tt"])
            .prop_map(String::from),
    ];
    leaf.prop_recursive(3, 20, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 2i64..4).prop_map(|(a, n)| format!("({a})^{n}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(({b})^2 + 1)")),
            inner.clone().prop_map(|a| format!("lam({a})")),
            inner.clone().prop_map(|a| format!("lam'({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("gam^(1,0)({a}, {b})")),
            inner.clone().prop_map(|a| format!("d({a}, x)")),
            inner.clone().prop_map(|a| format!("exp({a})")),
        ]
    })
}

pub fn item_text(i: usize) -> impl Strategy<Value = String> {
    prop_oneof![
        (expr_text(), expr_text()).prop_map(move |(l, r)| format!("equation e{i}: {l} = {r}")),
        (expr_text(), expr_text(), expr_text())
            .prop_map(move |(p, q, r)| format!("field v{i} = ({p})*Dx + ({q})*Dt + ({r})*Du")),
        (expr_text(), expr_text()).prop_map(move |(v, r)| {
            format!("solution s{i} {{\n  u = {v}\n  require ({r})^2 + 1\n  source \"random {i}\"\n}}")
        }),
    ]
}

pub fn document_text() -> impl Strategy<Value = String> {
    (0usize..4).prop_flat_map(|n| {
        let items: Vec<_> = (0..n).map(item_text).collect();
        items.prop_map(|items| format!("{HEADER}\n{}\n", items.join("\n")))
    })
}

