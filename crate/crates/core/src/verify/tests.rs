use super::*;
use crate::catalog::{build_pde, first_order_flow, flow, Catalog, CbsParams, Specialization};

fn params() -> CbsParams {
    "a=1,b=2,c=3,d=1".parse().unwrap()
}

fn eq() -> Expr {
    build_pde(&params())
}

fn box_domain(samples: usize) -> SampleDomain {
    SampleDomain::new(&[("x", 1.0, 2.0), ("y", -1.0, 1.0), ("z", -1.0, 1.0), ("t", 1.0, 2.0)], samples, 7)
}

fn env() -> NumericEnv {
    NumericEnv::new(Catalog::embedded().unwrap().numeric_kernels().unwrap())
}

fn solution(name: &str) -> (Expr, Vec<Expr>) {
    let cat = Catalog::embedded().unwrap();
    let cfg = AuditConfig::embedded();
    let s = cat.solution(name, &params()).unwrap();
    let b = cfg.constant_bindings().unwrap();
    let v = s.value.substitute(&b).unwrap();
    let sing = s.singular.iter().map(|e| e.substitute(&b).unwrap()).collect();
    (v, sing)
}

#[test]
fn constant_has_zero_residual() {
    let r = residual("c", &Expr::int(5), &eq(), "u", &env(), &box_domain(20), 1e-10).unwrap();
    assert!(r.points.iter().all(|p| p.residual == 0.0 && p.relative == 0.0));
    assert!(r.passed());
}

#[test]
fn product_xy_is_flagged_term_by_term() {
    let xy = Expr::var("x") * Expr::var("y");
    let r = residual("xy", &xy, &eq(), "u", &env(), &box_domain(20), 1e-10).unwrap();
    for p in &r.points {
        assert_eq!(p.residual, p.coords[1]);
        assert_eq!(p.relative, 1.0);
    }
    assert!(!r.passed());
}

#[test]
fn rebuilt_solution_passes_and_printed_one_does_not() {
    let (good, sing) = solution("S1c");
    assert!(symbolic_residual(&eq(), "u", &good).unwrap().is_zero());
    let dom = box_domain(200).excluding(&sing, 0.5);
    let r = residual("S1c", &good, &eq(), "u", &env(), &dom, 1e-10).unwrap();
    assert!(r.passed(), "{}", r.max_relative);
    let (bad, _) = solution("S1");
    assert!(!symbolic_residual(&eq(), "u", &bad).unwrap().is_zero());
    let r = residual("S1", &bad, &eq(), "u", &env(), &dom, 1e-10).unwrap();
    assert!(r.max_relative >= 1e-4);
}

#[test]
fn reports_are_deterministic_across_schedulers() {
    let (v, _) = solution("S3");
    let dom = box_domain(64);
    par::set_parallel(true);
    let a = residual("S3", &v, &eq(), "u", &env(), &dom, 1e-10).unwrap();
    par::set_parallel(false);
    let b = residual("S3", &v, &eq(), "u", &env(), &dom, 1e-10).unwrap();
    par::set_parallel(true);
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn exclusions_force_resampling() {
    let x = Expr::var("x");
    let near = x.sub(&Expr::frac(3, 2));
    let dom = box_domain(50).excluding(&[near.clone()], 0.25);
    let r = residual("x", &x, &eq(), "u", &env(), &dom, 1e-10).unwrap();
    assert!(r.resampled > 0);
    assert!(r.points.iter().all(|p| (p.coords[0] - 1.5).abs() >= 0.25));
    let impossible = box_domain(3).excluding(&[near], 10.0);
    assert!(matches!(
        residual("x", &x, &eq(), "u", &env(), &impossible, 1e-10),
        Err(VerifyError::SamplingExhausted { .. })
    ));
}

#[test]
fn poles_are_resampled_not_dropped() {
    let x = Expr::var("x");
    let v = Expr::var("y").div(&x.sub(&Expr::one())).unwrap();
    let mut dom = SampleDomain::new(&[("x", 1.0, 1.0), ("y", 0.0, 1.0), ("z", 0.0, 1.0), ("t", 1.0, 2.0)], 2, 1);
    dom.max_tries = 4;
    let r = residual("p", &v, &eq(), "u", &env(), &dom, 1e-10);
    assert!(matches!(r, Err(VerifyError::SamplingExhausted { .. })), "{r:?}");
}

#[test]
fn cube_derivative() {
    let x = Expr::var("x");
    let mut pt = EvalPoint::new();
    pt.set_var("x", 2.0);
    let r = fd_crosscheck(&x.pow_int(3).unwrap(), &pt, "x", 1).unwrap();
    assert!((r.symbolic - 12.0).abs() < 1e-12);
    assert!(r.steps.iter().any(|s| s.2 < 1e-6));
    assert!(r.passed && r.richardson_ok(), "{r:?}");
}

#[test]
fn mixed_fourth_derivative_of_first_chain_solution() {
    let (v, _) = solution("S1c");
    let vt = v.diff_var("t");
    let mut pt = env().point();
    for (k, val) in [("x", 1.3), ("y", 0.2), ("z", -0.4), ("t", 1.7)] {
        pt.set_var(k, val);
    }
    let r = fd_crosscheck(&vt, &pt, "x", 3).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn gamma_chain_rule_against_differences() {
    let mut k = KernelTable::new();
    k.insert("gam", 2, Expr::slot(1).pow_int(2).unwrap());
    let (b, d) = (Expr::int(2), Expr::int(1));
    let w = b.mul(&Expr::var("z")).sub(&d.mul(&Expr::var("y"))).div(&b).unwrap();
    let e = Expr::call("gam", vec![w.clone(), Expr::var("t")]);
    let mut pt = EvalPoint::with_kernels(k);
    for (n, val) in [("y", 0.3), ("z", 0.8), ("t", 1.1)] {
        pt.set_var(n, val);
    }
    let r = fd_crosscheck(&e, &pt, "y", 1).unwrap();
    let wv = w.eval(&pt).unwrap();
    assert!((r.symbolic - (-0.5 * 2.0 * wv)).abs() < 1e-12);
    assert!(r.passed, "{r:?}");
}

#[test]
fn richardson_ratio_on_catalog_solutions() {
    let dom = box_domain(20);
    let cfg = AuditConfig::embedded();
    let env = env();
    for name in ["S1", "S2", "S3", "S1c"] {
        let (v, _) = solution(name);
        let dv: Vec<Expr> = crate::catalog::VARS.iter().map(|x| v.diff_var(x)).collect();
        for i in 0..dom.samples {
            let (coords, _, _) = dom.sample(&env, i, &|_| Ok(Some(()))).unwrap();
            let pt = dom.point(&env, &coords);
            for (var, d) in crate::catalog::VARS.iter().zip(&dv) {
                let r = fd_compare(&v, d, &pt, var, 1).unwrap();
                assert!(r.passed && r.richardson_ok(), "{name} d{var} {r:?}");
            }
        }
    }
    for name in ["S4", "S5"] {
        let (v, sing) = solution(name);
        let d = cfg.sample_domain(cfg.domain_for_solution(name).unwrap(), &sing);
        let d = SampleDomain { samples: 20, ..d };
        let dv: Vec<Expr> = crate::catalog::VARS.iter().map(|x| v.diff_var(x)).collect();
        for i in 0..d.samples {
            let (coords, _, _) = d.sample(&env, i, &|_| Ok(Some(()))).unwrap();
            let pt = d.point(&env, &coords);
            for (var, d) in crate::catalog::VARS.iter().zip(&dv) {
                let r = fd_compare(&v, d, &pt, var, 1).unwrap();
                assert!(r.passed && r.richardson_ok(), "{name} d{var} {r:?}");
            }
        }
    }
}

#[test]
fn slope_of_a_square_law() {
    let e: Vec<(f64, f64)> = [1e-1, 1e-2, 1e-3].iter().map(|&x| (x, 3.0 * x * x)).collect();
    assert!((loglog_slope(&e).unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(loglog_slope(&[(0.1, 0.0), (0.01, 0.0)]), None);
}

#[test]
fn exact_orbits_and_first_order_slope() {
    let (v, sing) = solution("S1c");
    let dom = box_domain(40).excluding(&sing, 0.5);
    let spec = Specialization::default();
    for i in 1..=6 {
        let fm = flow(i, &spec).unwrap().bind(&params()).unwrap();
        let r = orbit_check(&v, &fm, &eq(), "u", &[0.3, -0.7], &env(), &dom, 1e-8, (1.8, 2.2)).unwrap();
        assert!(r.passed(), "X{i} {r:?}");
    }
    let cat = Catalog::embedded().unwrap();
    let g = cat.generator(1, &spec).unwrap();
    let g = g.map(|c| params().apply(c).map_err(|_| ExprError::DegenerateDivision)).unwrap();
    let fm = first_order_flow(1, &g).unwrap();
    let r = orbit_check(&v, &fm, &eq(), "u", &[1e-1, 1e-2, 1e-3], &env(), &dom, 1e-8, (1.8, 2.2)).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn zero_parameter_orbit_is_the_solution_itself() {
    let (v, _) = solution("S1");
    let dom = box_domain(30);
    let base = residual("S1", &v, &eq(), "u", &env(), &dom, 1e-10).unwrap();
    let fm = flow(3, &Specialization::default()).unwrap().bind(&params()).unwrap();
    let r = orbit_check(&v, &fm, &eq(), "u", &[0.0], &env(), &dom, 1e-8, (1.8, 2.2)).unwrap();
    assert_eq!(r.entries[0].1, base.max_relative);
}

#[test]
fn embedded_config_is_complete() {
    let cfg = AuditConfig::embedded();
    assert_eq!(cfg.samples, 200);
    for s in ["S1", "S2", "S3", "S4", "S5", "S1c"] {
        assert!(cfg.domain_for_solution(s).is_ok(), "{s}");
    }
    assert!(cfg.constant_bindings().is_ok());
    assert!(AuditConfig::from_path(std::path::Path::new("/nonexistent/audit.toml")).is_err());
}
