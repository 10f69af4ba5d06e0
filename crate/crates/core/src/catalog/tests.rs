use super::*;
use crate::reduction::{verify_ode_solution, OdeSolutionCandidate};

fn cat() -> Catalog {
    Catalog::embedded().unwrap()
}

fn residual(eq: &Expr, sol: &Expr) -> Expr {
    verify_ode_solution(eq, &OdeSolutionCandidate::new(DEP, "x", sol.clone()), &[]).unwrap().residual
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn embedded_and_directory_agree() {
    let a = cat();
    let b = Catalog::from_dir(&fixture_dir()).unwrap();
    assert!(a.cbs.same_items(&b.cbs));
    assert!(a.reductions.same_items(&b.reductions));
    assert_eq!(a.manifest, b.manifest);
    assert!(matches!(Catalog::from_dir(Path::new("/nonexistent")), Err(CatalogError::Io { .. })));
}

#[test]
fn hand_built_equation_matches_fixture() {
    let c = cat();
    assert!(build_pde(&CbsParams::symbolic()).equiv(c.equation().unwrap()));
    let p: CbsParams = "a=1,b=2,c=3,d=1".parse().unwrap();
    assert!(build_pde(&p).equiv(&p.apply(c.equation().unwrap()).unwrap()));
}

#[test]
fn collapses_to_potential_kdv() {
    let e = collapse_to_x(&build_pde(&CbsParams::symbolic())).unwrap();
    let k = Expr::param("a") + Expr::param("b") + Expr::param("c") + Expr::param("d");
    let ux = jet(&["x"]);
    let inner = jet(&["t"]) + half(&k).mul(&ux).mul(&ux) + Expr::int(2) * jet(&["x", "x", "x"]);
    let dx = inner.total_derivative("x").unwrap();
    assert!(e.equiv(&dx), "{e}");
}

fn half(e: &Expr) -> Expr {
    e.div(&Expr::int(2)).unwrap()
}

#[test]
fn parameters_parse_and_degenerate() {
    let p: CbsParams = "a=1,b=2,c=3,d=1".parse().unwrap();
    assert!(p.is_nondegenerate());
    assert_eq!(p.as_f64(), Some([1.0, 2.0, 3.0, 1.0]));
    assert_eq!(p.to_string(), "a=1,b=2,c=3,d=1");
    let q: CbsParams = "a=1,b=2,c=1,d=1".parse().unwrap();
    let failing: Vec<_> = q.nondegeneracy().into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
    assert_eq!(failing, ["c != a"]);
    let r: CbsParams = "a=2,b=1,c=4,d=2".parse().unwrap();
    assert!(!r.is_nondegenerate());
    assert!(CbsParams::symbolic().is_nondegenerate());
    assert!("a=1,e=2".parse::<CbsParams>().is_err());
    assert!("a=1/2".parse::<CbsParams>().is_ok());
}

#[test]
fn specialization_round_trip() {
    for s in ["lambda=0,gamma=0", "lambda=generic,gamma=generic", "lambda=3/2,gamma=arg", "lambda=k,gamma=0"] {
        let spec: Specialization = s.parse().unwrap();
        assert_eq!(spec.to_string(), s);
    }
    assert!("gamma=w".parse::<Specialization>().is_err());
    assert!("mu=0".parse::<Specialization>().is_err());
}

#[test]
fn generators_specialize() {
    let c = cat();
    let v1 = c.generator(1, &Specialization::default()).unwrap();
    let t = Expr::var("t");
    assert!(v1.xi[3].equiv(&(Expr::int(2) * &t)));
    assert!(v1.eta.equiv(&-Expr::jet(JetVar::base("u"))));
    let g = c.generator(2, &Specialization::generic()).unwrap();
    assert!(g.eta.contains(&|a| matches!(a, Atom::Fn(f) if &*f.name == "gam")));
    assert!(c.generator(7, &Specialization::default()).is_err());
}

fn specs() -> Vec<Specialization> {
    ["lambda=0,gamma=0", "lambda=0,gamma=arg", "lambda=3/2,gamma=arg", "lambda=k,gamma=0"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

#[test]
fn exact_flows_solve_the_characteristic_system() {
    let c = cat();
    for spec in specs() {
        for i in 1..=6 {
            let v = c.generator(i, &spec).unwrap();
            let f = flow(i, &spec).unwrap();
            assert!(f.is_identity_at_zero().unwrap(), "X{i} {spec}");
            assert!(f.tangent_matches(&v).unwrap(), "X{i} {spec}");
            assert!(f.ode_residual(&v).unwrap().iter().all(Expr::is_zero), "X{i} {spec}");
            assert!(f.inverse_residual().unwrap().iter().all(Expr::is_zero), "X{i} {spec}");
            assert!(f.group_law_residual().unwrap().iter().all(Expr::is_zero), "X{i} {spec}");
        }
    }
}

#[test]
fn generic_functions_have_no_closed_flow() {
    for s in ["lambda=generic,gamma=0", "lambda=0,gamma=generic"] {
        let spec: Specialization = s.parse().unwrap();
        assert!(matches!(flow(2, &spec), Err(CatalogError::UnsupportedSpecialization { .. })));
    }
}

#[test]
fn first_order_forms() {
    let c = cat();
    for spec in [Specialization::generic(), Specialization::default()] {
        for i in 1..=6 {
            let v = c.generator(i, &spec).unwrap();
            let f = first_order_flow(i, &v).unwrap();
            assert!(f.is_identity_at_zero().unwrap());
            assert!(f.tangent_matches(&v).unwrap());
            assert!(f.inverse_residual().unwrap().iter().all(Expr::is_zero), "X{i} {spec}");
        }
    }
    let lam = c.generator(1, &Specialization::default()).unwrap();
    let f = first_order_flow(1, &lam).unwrap();
    assert!(!f.ode_residual(&lam).unwrap().iter().all(Expr::is_zero));
}

#[test]
fn exact_orbits_of_rebuilt_solution_stay_solutions() {
    let c = cat();
    let eq = c.equation().unwrap().clone();
    let s = c.solution("S1c", &CbsParams::symbolic()).unwrap();
    assert!(residual(&eq, &s.value).is_zero());
    let spec = Specialization::default();
    for i in 1..=6 {
        let f = flow(i, &spec).unwrap();
        let moved = f.transformed_solution(&s.value).unwrap();
        assert!(residual(&eq, &moved).is_zero(), "X{i}");
    }
}

#[test]
fn solutions_are_well_scoped() {
    let c = cat();
    let p: CbsParams = "a=1,b=2,c=3,d=1".parse().unwrap();
    let sols = c.solutions(&p).unwrap();
    let names: Vec<_> = sols.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["S1", "S2", "S3", "S4", "S5", "S1c"]);
    for s in &sols {
        assert!(s.undeclared_symbols(&c.solutions).is_empty(), "{}", s.name);
        assert!(!s.value.contains(&|a| matches!(a, Atom::Sym(sym) if sym.kind == crate::expr::SymKind::Param)));
        assert!(!s.provenance.is_empty());
    }
}

#[test]
fn printed_first_chain_solution_leaves_a_residual() {
    let c = cat();
    let eq = c.equation().unwrap().clone();
    let s1 = c.solution("S1", &CbsParams::symbolic()).unwrap();
    let r = residual(&eq, &s1.value);
    let x = Expr::var("x");
    let t = Expr::var("t");
    let k = Expr::int(3) * (Expr::param("c") - Expr::param("a"));
    let k = k.div(&(Expr::param("b") * Expr::param("c") - Expr::param("a") * Expr::param("d"))).unwrap();
    let expect = k.div(&(t * x.pow_int(2).unwrap())).unwrap();
    assert!(r.equiv(&expect), "{r}");
}

#[test]
fn manifest_table_and_kernels() {
    let c = cat();
    let table = c.manifest.printed_table().unwrap();
    assert_eq!(table.len(), 6);
    assert!(table.iter().all(|r| r.len() == 6));
    let k = c.numeric_kernels().unwrap();
    for name in ["rho", "Rho", "lam", "Lam"] {
        assert!(k.get(name).is_some(), "{name}");
    }
    let p: CbsParams = c.manifest.params.parse().unwrap();
    assert!(p.is_nondegenerate());
}
