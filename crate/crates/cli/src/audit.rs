//! Every check of the audit, grouped by category.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use lieforge::catalog::{first_order_flow, flow, Catalog, CbsParams, Specialization, DEP, VARS};
use lieforge::expr::{Atom, Expr, JetVar, MultiIndex};
use lieforge::lie::{
    check_infinitesimals, commutator_table, determining_system, diagonal_weights, kernel_table, lie_bracket,
    scaling_weights, DeterminingSystem, VectorField,
};
use lieforge::par;
use lieforge::reduction::{equal_up_to_multiplier, pullback, verify_ode_solution, OdeSolutionCandidate, ReductionAnsatz};
use lieforge::verify::{self, AuditConfig, NumericEnv, SampleDomain};
use serde_json::json;

use crate::report::{judge, Item, Observation, Report};

/// Everything a run needs, resolved from flags, environment and fixtures.
pub struct Context {
    pub cat: Catalog,
    pub cfg: AuditConfig,
    pub params: CbsParams,
    pub spec: Specialization,
    pub seed: u64,
    system: OnceLock<Result<(DeterminingSystem, f64), String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Catalog(#[from] lieforge::catalog::CatalogError),
    #[error(transparent)]
    Verify(#[from] lieforge::verify::VerifyError),
    #[error("parameters {params} violate {violated}")]
    Degenerate { params: String, violated: String },
    #[error("parameters {0} must give a, b, c and d numeric values")]
    Unbound(String),
}

impl Context {
    pub fn load(fixtures: Option<PathBuf>, params: Option<&str>, spec: Option<&str>, seed: Option<u64>) -> Result<Self, ConfigError> {
        let dir = fixtures.or_else(|| std::env::var_os("LIEFORGE_FIXTURES").map(PathBuf::from));
        let cat = match &dir {
            Some(d) => Catalog::from_dir(d)?,
            None => Catalog::embedded()?,
        };
        let cfg = AuditConfig::load(dir.as_deref())?;
        let params: CbsParams = params.unwrap_or(&cat.manifest.params).parse()?;
        if params.as_f64().is_none() {
            return Err(ConfigError::Unbound(params.to_string()));
        }
        let violated: Vec<&str> = params.nondegeneracy().into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
        if !violated.is_empty() {
            return Err(ConfigError::Degenerate { params: params.to_string(), violated: violated.join(", ") });
        }
        let spec: Specialization = spec.unwrap_or("lambda=0,gamma=0").parse()?;
        let seed = seed.unwrap_or(cfg.seed);
        Ok(Context { cat, cfg, params, spec, seed, system: OnceLock::new() })
    }

    /// Recorded residual strings are tied to the manifest parameters and the
    /// default specialization.
    pub fn exact_residuals(&self) -> bool {
        self.cat.manifest.params.parse::<CbsParams>().ok().as_ref() == Some(&self.params)
            && self.spec == Specialization::default()
            && self.seed == self.cfg.seed
    }

    pub fn equation(&self) -> Expr {
        self.cat.equation().expect("catalog has the equation").clone()
    }

    pub fn bound_equation(&self) -> Result<Expr, String> {
        self.params.apply(&self.equation()).map_err(|e| e.to_string())
    }

    pub fn leading() -> JetVar {
        JetVar::new(DEP, MultiIndex::from_vars(&["x", "t"]))
    }

    /// The determining system of the equation and the seconds it took.
    pub fn system(&self) -> Result<&(DeterminingSystem, f64), String> {
        self.system
            .get_or_init(|| {
                let start = Instant::now();
                let (sys, _) = determining_system(&self.equation(), &VARS, DEP, &Self::leading()).map_err(|e| e.to_string())?;
                Ok((sys, start.elapsed().as_secs_f64()))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn env(&self) -> Result<NumericEnv, String> {
        Ok(NumericEnv::new(self.cat.numeric_kernels().map_err(|e| e.to_string())?))
    }

    pub fn item(&self, id: &str, category: &str, obs: Observation) -> Item {
        judge(id, category, obs, &self.cat.manifest, self.exact_residuals())
    }

    pub fn report(&self, command: &str, items: Vec<Item>) -> Report {
        Report::new(command, self.params.to_string(), self.spec.to_string(), self.seed, items)
    }
}

type Found = Vec<(String, &'static str, Observation)>;

fn obs<T>(r: Result<T, String>, f: impl FnOnce(T) -> Observation) -> Observation {
    match r {
        Ok(v) => f(v),
        Err(e) => Observation::error(e),
    }
}

fn field_in(ctx: &Context, name: &str, spec: &Specialization) -> Result<VectorField, String> {
    if let Some(v) = translation(name) {
        return Ok(v);
    }
    ctx.cat.field(name, spec).map_err(|e| e.to_string())
}

/// `Dx`, `Dy`, `Dz`, `Dt`.
pub fn translation(name: &str) -> Option<VectorField> {
    let var = name.strip_prefix('D')?;
    let i = VARS.iter().position(|v| *v == var)?;
    let xi = (0..4).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect();
    VectorField::new(&VARS, DEP, xi, Expr::zero()).ok()
}

fn join_failures(fails: Vec<String>) -> Option<String> {
    (!fails.is_empty()).then(|| fails.join("; "))
}

/// Checks a field of the equation's space against its determining system.
pub fn check_field(ctx: &Context, v: &VectorField) -> Observation {
    obs(ctx.system(), |(sys, _)| match check_infinitesimals(sys, v) {
        Ok(rep) => {
            let fails: Vec<String> =
                rep.failures().map(|(k, r)| format!("{}: {r}", Expr::monomial_expr(k))).collect();
            let n = fails.len();
            Observation::from_bool(
                n == 0,
                if n == 0 { format!("{} equations vanish", rep.entries.len()) } else { format!("{n} of {} equations fail", rep.entries.len()) },
                join_failures(fails),
            )
        }
        Err(e) => Observation::error(e),
    })
}

pub fn determining(ctx: &Context) -> Found {
    let mut out: Found = Vec::new();
    out.push((
        "determining.system".into(),
        "determining",
        obs(ctx.system(), |(sys, secs)| {
            Observation::from_bool(!sys.is_empty(), format!("{} equations in {:.2}s", sys.len(), secs), None).metric("seconds", *secs)
        }),
    ));
    let generic = Specialization::generic();
    let mut fields: Vec<(String, String, Specialization)> =
        ["Dx", "Dy", "Dz", "Dt"].iter().map(|n| (format!("determining.{n}"), n.to_string(), ctx.spec.clone())).collect();
    for i in 1..=6 {
        fields.push((format!("determining.v{i}"), format!("v{i}"), ctx.spec.clone()));
        fields.push((format!("determining.v{i}.generic"), format!("v{i}"), generic.clone()));
    }
    for n in ["family", "family_v3"] {
        fields.push((format!("determining.{n}"), n.to_string(), generic.clone()));
    }
    let results = par::map(&fields, |(id, name, spec)| {
        let o = match field_in(ctx, name, spec) {
            Ok(v) => check_field(ctx, &v),
            Err(e) => Observation::error(e),
        };
        (id.clone(), "determining", o)
    });
    out.extend(results);
    for i in [1, 4] {
        let o = obs(field_in(ctx, &format!("v{i}"), &Specialization::default()), |v| match diagonal_weights(&v) {
            Some((w, wu)) => {
                let ws = scaling_weights(&ctx.equation(), &VARS, DEP, &w, &wu);
                let all_equal = ws.windows(2).all(|p| p[0] == p[1]);
                let shown: Vec<String> = ws.iter().map(|q| q.to_string()).collect();
                Observation::from_bool(all_equal, format!("term weights {}", shown.join(", ")), Some(shown.join(", ")))
            }
            None => Observation::fail("not a diagonal scaling", None),
        });
        out.push((format!("scaling.v{i}"), "determining", o));
    }
    out
}

/// The printed determining equations with the kernels bound to a field.
pub fn printed_system(ctx: &Context) -> Found {
    let generic = Specialization::generic();
    let names: Vec<String> = (1..=6).map(|i| format!("v{i}")).chain(["family".into(), "family_v3".into()]).collect();
    par::map(&names, |n| {
        let o = obs(field_in(ctx, n, &generic), |v| {
            let table = match kernel_table(&v) {
                Ok(t) => t,
                Err(e) => return Observation::error(e),
            };
            let doc = &ctx.cat.printed_system;
            let mut fails = Vec::new();
            let mut total = 0;
            for it in &doc.items {
                let Some(eq) = doc.equation(&it.name) else { continue };
                total += 1;
                match eq.instantiate(&table) {
                    Ok(r) if r.is_zero() => {}
                    Ok(r) => fails.push(format!("{}: {r}", it.name)),
                    Err(e) => fails.push(format!("{}: error {e}", it.name)),
                }
            }
            let n = fails.len();
            Observation::from_bool(n == 0, format!("{} of {total} printed equations fail", n), join_failures(fails))
        });
        (format!("printed_system.{n}"), "determining", o)
    })
}

fn coefficient_vector(e: &Expr) -> Vec<Expr> {
    (1..=6)
        .map(|k| e.diff(&Atom::Sym(lieforge::expr::Symbol::constant(&format!("v{k}")))))
        .collect()
}

/// Resolves basis names, failing on the first unknown one.
pub fn basis(ctx: &Context, names: &[String]) -> Result<Vec<VectorField>, String> {
    names.iter().map(|n| field_in(ctx, n, &ctx.spec)).collect()
}

pub fn default_basis() -> Vec<String> {
    (1..=6).map(|i| format!("v{i}")).collect()
}

pub fn table(ctx: &Context) -> Found {
    table_of(ctx, &default_basis())
}

/// The commutator table of `names`. The printed table is only consulted for
/// the default basis.
pub fn table_of(ctx: &Context, names: &[String]) -> Found {
    let basis = match basis(ctx, names) {
        Ok(b) => b,
        Err(e) => return vec![("table".into(), "table", Observation::error(e))],
    };
    let mut out: Found = Vec::new();
    let computed = match commutator_table(&basis) {
        Ok(t) => t,
        Err(e) => return vec![("table".into(), "table", Observation::error(e))],
    };
    let n = names.len();
    let printed = if names == default_basis().as_slice() {
        ctx.cat.manifest.printed_table().map(Some).map_err(|e| e.to_string())
    } else {
        Ok(None)
    };
    let o = obs(printed, |printed| {
        let mut fails = Vec::new();
        let mut shown = Vec::new();
        for (i, row) in computed.iter().enumerate() {
            let mut srow = Vec::new();
            for (j, d) in row.iter().enumerate() {
                let got = render_entry(d.coords.as_deref(), d.in_span());
                srow.push(got.clone());
                let (ni, nj) = (&names[i], &names[j]);
                match &printed {
                    Some(p) => {
                        let want = coefficient_vector(&p[i][j]);
                        let ok = d.in_span() && d.coords.as_ref().is_some_and(|c| c.iter().zip(&want).all(|(a, b)| a.equiv(b)));
                        if !ok {
                            fails.push(format!("[{ni},{nj}] = {got}, printed {}", p[i][j]));
                        }
                    }
                    None if !d.in_span() => fails.push(format!("[{ni},{nj}] outside span, residual {}", d.residual)),
                    None => {}
                }
            }
            shown.push(srow);
        }
        let bad = fails.len();
        let detail = if printed.is_some() {
            format!("{} of {} entries match", n * n - bad, n * n)
        } else {
            format!("{} of {} entries in span", n * n - bad, n * n)
        };
        Observation::from_bool(bad == 0, detail, join_failures(fails)).with_data(json!({ "basis": names, "entries": shown }))
    });
    out.push(("table".into(), "table", o));

    let mut bad = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !computed[i][j].raw.add(&computed[j][i].raw).is_ok_and(|s| s.is_zero()) {
                bad.push(format!("{},{}", names[i], names[j]));
            }
        }
    }
    out.push((
        "table.antisymmetry".into(),
        "table",
        Observation::from_bool(bad.is_empty(), format!("[vi,vj] = -[vj,vi] for all {} pairs", n * n), join_failures(bad)),
    ));

    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                triples.push((i, j, k));
            }
        }
    }
    let jac = par::map(&triples, |&(i, j, k)| -> Result<bool, String> {
        let br = |a: &VectorField, b: &VectorField| lie_bracket(a, b).map_err(|e| e.to_string());
        let (a, b, c) = (&basis[i], &basis[j], &basis[k]);
        let s = br(a, &br(b, c)?)?.add(&br(b, &br(c, a)?)?).map_err(|e| e.to_string())?;
        let s = s.add(&br(c, &br(a, b)?)?).map_err(|e| e.to_string())?;
        Ok(s.is_zero())
    });
    let mut fails = Vec::new();
    for ((i, j, k), r) in triples.iter().zip(jac) {
        match r {
            Ok(true) => {}
            Ok(false) => fails.push(format!("{},{},{}", names[*i], names[*j], names[*k])),
            Err(e) => fails.push(format!("{},{},{}: {e}", names[*i], names[*j], names[*k])),
        }
    }
    out.push((
        "table.jacobi".into(),
        "table",
        Observation::from_bool(fails.is_empty(), format!("{} triples", triples.len()), join_failures(fails)).metric("triples", triples.len() as f64),
    ));
    out
}

/// `Σ c_k v_k` as text, or `outside span`.
pub fn render_entry(coords: Option<&[Expr]>, in_span: bool) -> String {
    match coords {
        Some(c) if in_span => {
            let parts: Vec<String> = c
                .iter()
                .enumerate()
                .filter(|(_, k)| !k.is_zero())
                .map(|(i, k)| if k.is_one() { format!("v{}", i + 1) } else { format!("({k})*v{}", i + 1) })
                .collect();
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" + ")
            }
        }
        _ => "outside span".into(),
    }
}

fn ansatz(ctx: &Context, name: &str) -> Result<ReductionAnsatz, String> {
    ctx.cat.ansatz(name).map_err(|e| e.to_string())
}

fn reduced_eq(ctx: &Context, name: &str) -> Result<Expr, String> {
    if name == "cbs" {
        return Ok(ctx.equation());
    }
    ctx.cat.reduced_equation(name).cloned().map_err(|e| e.to_string())
}

/// `(generator, ansatz)` pairs whose invariants are checked.
pub const ANNIHILATION: [(&str, &str); 8] = [
    ("s1_generator", "s1_invariants"),
    ("s1_case1_generator", "s1_case1"),
    ("s1_sub1_generator", "s1_sub1"),
    ("s1_sub2_generator", "s1_sub2"),
    ("s2_generator", "s2_invariants"),
    ("s2_similarity_generator", "s2_similarity"),
    ("s2_similarity_generator_printed", "s2_similarity"),
    ("s2_hpde_generator", "s2_ode"),
];

pub fn annihilation(ctx: &Context) -> Found {
    par::map(&ANNIHILATION, |(g, a)| {
        let o = obs(ansatz(ctx, a), |an| {
            let old: Vec<&str> = an.old.iter().map(String::as_str).collect();
            let v = match ctx.cat.reduced_field(g, &old, &an.old_dep) {
                Ok(v) => v,
                Err(e) => return Observation::error(e),
            };
            match lieforge::reduction::annihilation_check(&v, &an) {
                Ok(rep) => {
                    let fails: Vec<String> = rep.failures().iter().map(|(n, r)| format!("{n}: {r}")).collect();
                    Observation::from_bool(fails.is_empty(), format!("{} invariants", rep.entries.len()), join_failures(fails))
                }
                Err(e) => Observation::error(e),
            }
        });
        (format!("annihilation.{g}"), "reduction", o)
    })
}

/// `(id, input equation, ansatz, printed result)`.
pub const PULLBACKS: [(&str, &str, &str, &str); 8] = [
    ("reduce.s1_fpde", "cbs", "s1_invariants", "s1_fpde"),
    ("reduce.s1_hpde", "s1_fpde", "s1_case1", "s1_hpde"),
    ("reduce.s1_hpde_half", "s1_fpde", "s1_case1", "s1_hpde_half"),
    ("reduce.s1_ode1", "s1_hpde", "s1_sub1", "s1_ode1"),
    ("reduce.s1_ode2", "s1_hpde", "s1_sub2", "s1_ode2"),
    ("reduce.s2_fpde", "cbs", "s2_invariants", "s2_fpde"),
    ("reduce.s2_hpde", "s2_fpde", "s2_similarity", "s2_hpde"),
    ("reduce.s2_ode", "s2_hpde", "s2_ode", "s2_ode_printed"),
];

/// Pulls `input` back through `ansatz` and compares with `printed`.
pub fn compare_pullback(ctx: &Context, input: &str, an: &str, printed: Option<&str>) -> Observation {
    let run = || -> Result<Observation, String> {
        let eq = reduced_eq(ctx, input)?;
        let a = ansatz(ctx, an)?;
        let r = match pullback(&eq, &a) {
            Ok(r) => r,
            Err(e) => return Ok(Observation::error(e)),
        };
        let data = json!({ "equation": r.equation.to_string(), "multiplier": r.multiplier.to_string() });
        let Some(p) = printed else {
            return Ok(Observation::pass(format!("{} = 0", r.equation)).with_data(data));
        };
        let target = reduced_eq(ctx, p)?;
        Ok(match equal_up_to_multiplier(&r.equation, &target) {
            Some(m) => Observation::pass(format!("matches {p} with factor {m}")).with_data(data),
            None => Observation::fail(format!("differs from {p}"), Some(r.equation.to_string())).with_data(data),
        })
    };
    run().unwrap_or_else(Observation::error)
}

pub fn reductions(ctx: &Context) -> Found {
    let mut out: Found = par::map(&PULLBACKS, |(id, input, an, printed)| (id.to_string(), "reduction", compare_pullback(ctx, input, an, Some(printed))));

    let compose = || -> Result<Observation, String> {
        let eq = ctx.equation();
        let (inv, case1, hand) = (ansatz(ctx, "s1_invariants")?, ansatz(ctx, "s1_case1")?, ansatz(ctx, "s1_composed")?);
        let err = |e: lieforge::reduction::ReductionError| e.to_string();
        let chained = pullback(&eq, &inv).map_err(err)?.then(&case1).map_err(err)?;
        let composed = pullback(&eq, &inv.compose(&case1).map_err(err)?).map_err(err)?;
        let by_hand = pullback(&eq, &hand).map_err(err)?;
        let a = equal_up_to_multiplier(&chained.equation, &composed.equation).is_some();
        let b = equal_up_to_multiplier(&chained.equation, &by_hand.equation).is_some();
        Ok(Observation::from_bool(a && b, format!("two stages agree with the composed ansatz: {}", chained.equation), Some(composed.equation.to_string())))
    };
    out.push(("compose.s1".into(), "reduction", compose().unwrap_or_else(Observation::error)));

    let lifts: [(&str, &[&str], &str, &str); 5] = [
        ("S1", &["s1_invariants", "s1_case1", "s1_sub1"], "s1_g1", "S1"),
        ("S2", &["s1_invariants", "s1_case1", "s1_sub1"], "s1_g2", "S2"),
        ("S3", &["s1_invariants", "s1_case1", "s1_sub2"], "s1_g3", "S3"),
        ("S4", &["s2_invariants", "s2_similarity", "s2_ode"], "s2_g1", "S4"),
        ("S5", &["s2_invariants", "s2_similarity", "s2_ode"], "s2_g2", "S5"),
    ];
    out.extend(par::map(&lifts, |(id, chain, root, sol)| {
        let run = || -> Result<Observation, String> {
            let mut value = ctx.cat.ode_root(root).map_err(|e| e.to_string())?.value.clone();
            for a in chain.iter().rev() {
                value = ansatz(ctx, a)?.lift(&value).map_err(|e| e.to_string())?;
            }
            let printed = ctx.cat.solution(sol, &CbsParams::symbolic()).map_err(|e| e.to_string())?.value;
            let diff = value.sub(&printed);
            Ok(Observation::from_bool(diff.is_zero(), format!("lifting {root} reproduces {sol}"), Some(diff.to_string())))
        };
        (format!("lift.{id}"), "reduction", run().unwrap_or_else(Observation::error))
    }));

    let odes: [(&str, &str); 5] =
        [("s1_ode1", "s1_g1"), ("s1_ode1", "s1_g2"), ("s1_ode2", "s1_g3"), ("s2_ode_printed", "s2_g1"), ("s2_ode_printed", "s2_g2")];
    for (ode, root) in odes {
        let run = || -> Result<Observation, String> {
            let eq = reduced_eq(ctx, ode)?;
            let s = ctx.cat.ode_root(root).map_err(|e| e.to_string())?;
            let cand = OdeSolutionCandidate::new(&s.dep, "zeta", s.value.clone());
            let stray = cand.stray_variables();
            if !stray.is_empty() {
                return Ok(Observation::fail(format!("depends on {}", stray.join(", ")), Some(stray.join(", "))));
            }
            let rep = verify_ode_solution(&eq, &cand, &[]).map_err(|e| e.to_string())?;
            Ok(Observation::from_bool(rep.passed(), format!("{} solves {ode}", s.value), Some(rep.residual.to_string())))
        };
        out.push((format!("ode.{root}"), "reduction", run().unwrap_or_else(Observation::error)));
    }
    out
}

/// `(id, field, equation, vars, dep, leading)`.
pub const REDUCED_SYMMETRIES: [(&str, &str, &str, &[&str], &str, &[&str]); 5] = [
    ("reduced.s1_fpde_family", "s1_fpde_family", "s1_fpde", &["X", "Y", "T"], "f", &["X", "T"]),
    ("reduced.s1_hpde_family", "s1_hpde_family", "s1_hpde", &["r", "s"], "H", &["r", "r", "r", "s"]),
    ("reduced.s2_family", "s2_family", "s2_fpde", &["X", "Y", "Z"], "f", &["X", "X", "X", "Z"]),
    ("reduced.s2_family_printed", "s2_family_printed", "s2_fpde", &["X", "Y", "Z"], "f", &["X", "X", "X", "Z"]),
    ("reduced.s2_hpde_generator", "s2_hpde_generator", "s2_hpde", &["r", "s"], "H", &["r", "r", "r", "s"]),
];

/// The chain of ansätze that produces a reduced equation from the full one.
fn chain_of(eq: &str) -> Option<&'static [&'static str]> {
    Some(match eq {
        "s1_fpde" => &["s1_invariants"],
        "s1_hpde" => &["s1_invariants", "s1_case1"],
        "s2_fpde" => &["s2_invariants"],
        "s2_hpde" => &["s2_invariants", "s2_similarity"],
        _ => return None,
    })
}

/// Pulls the full equation back through the whole chain ending in `eq`.
pub fn recomputed_eq(ctx: &Context, eq: &str) -> Result<Expr, String> {
    let chain = chain_of(eq).ok_or_else(|| format!("no chain ends in `{eq}`"))?;
    let mut r = pullback(&ctx.equation(), &ansatz(ctx, chain[0])?).map_err(|e| e.to_string())?;
    for a in &chain[1..] {
        r = r.then(&ansatz(ctx, a)?).map_err(|e| e.to_string())?;
    }
    Ok(r.equation)
}

/// Checks each reduced family against the printed reduced equation and
/// against the one recomputed from the full equation.
pub fn reduced_symmetries(ctx: &Context) -> Found {
    let jobs: Vec<_> = REDUCED_SYMMETRIES.iter().flat_map(|j| [(j, false), (j, true)]).collect();
    par::map(&jobs, |((id, field, eq, vars, dep, lead), recomputed)| {
        let run = || -> Result<Observation, String> {
            let e = if *recomputed { recomputed_eq(ctx, eq)? } else { reduced_eq(ctx, eq)? };
            let v = ctx.cat.reduced_field(field, vars, dep).map_err(|e| e.to_string())?;
            let leading = JetVar::new(dep, MultiIndex::from_vars(lead));
            let (sys, _) = determining_system(&e, vars, dep, &leading).map_err(|e| e.to_string())?;
            let rep = check_infinitesimals(&sys, &v).map_err(|e| e.to_string())?;
            let fails: Vec<String> = rep.failures().map(|(k, r)| format!("{}: {r}", Expr::monomial_expr(k))).collect();
            let n = fails.len();
            Ok(Observation::from_bool(n == 0, format!("{n} of {} equations fail", sys.len()), join_failures(fails)))
        };
        let id = if *recomputed { format!("{id}.recomputed") } else { id.to_string() };
        (id, "reduction", run().unwrap_or_else(Observation::error))
    })
}

/// A solution with parameters and constants bound, and its singular set.
pub fn bound_solution(ctx: &Context, name: &str) -> Result<(Expr, Vec<Expr>), String> {
    let s = ctx.cat.solution(name, &ctx.params).map_err(|e| e.to_string())?;
    let b = ctx.cfg.constant_bindings().map_err(|e| e.to_string())?;
    let value = s.value.substitute(&b).map_err(|e| e.to_string())?;
    let sing = s.singular.iter().map(|e| e.substitute(&b)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    Ok((value, sing))
}

pub fn domain(ctx: &Context, name: &str, sing: &[Expr]) -> Result<SampleDomain, String> {
    let d = ctx.cfg.domain_for_solution(name).map_err(|e| e.to_string())?;
    let mut dom = ctx.cfg.sample_domain(d, sing);
    dom.seed = ctx.seed;
    Ok(dom)
}

pub fn solution_symbolic(ctx: &Context, name: &str) -> Observation {
    let run = || -> Result<Observation, String> {
        let (value, _) = bound_solution(ctx, name)?;
        let r = verify::symbolic_residual(&ctx.bound_equation()?, DEP, &value).map_err(|e| e.to_string())?;
        Ok(Observation::from_bool(r.is_zero(), "symbolic residual".to_string(), Some(r.to_string())))
    };
    run().unwrap_or_else(Observation::error)
}

pub fn solution_numeric(ctx: &Context, name: &str) -> Observation {
    let run = || -> Result<Observation, String> {
        let (value, sing) = bound_solution(ctx, name)?;
        let dom = domain(ctx, name, &sing)?;
        let thr = ctx.cfg.residual_threshold;
        let rep = verify::residual(name, &value, &ctx.bound_equation()?, DEP, &ctx.env()?, &dom, thr).map_err(|e| e.to_string())?;
        let floor = ctx.cfg.discrepancy_floor;
        let residual = if rep.max_relative >= floor {
            format!("max relative residual >= {floor:e}")
        } else {
            format!("max relative residual below {floor:e}")
        };
        let o = Observation::from_bool(
            rep.passed(),
            format!("max relative residual {:.3e} over {} points", rep.max_relative, rep.points.len()),
            Some(residual),
        );
        Ok(o.metric("max_relative", rep.max_relative).metric("resampled", rep.resampled as f64))
    };
    run().unwrap_or_else(Observation::error)
}

pub fn solutions(ctx: &Context) -> Found {
    let names: Vec<String> = match ctx.cat.solutions(&ctx.params) {
        Ok(s) => s.into_iter().map(|s| s.name).collect(),
        Err(e) => return vec![("solutions".into(), "solution", Observation::error(e))],
    };
    let mut jobs = Vec::new();
    for n in &names {
        jobs.push((n.clone(), true));
        jobs.push((n.clone(), false));
    }
    par::map(&jobs, |(n, symbolic)| {
        if *symbolic {
            (format!("solution.{n}.symbolic"), "solution", solution_symbolic(ctx, n))
        } else {
            (format!("solution.{n}.numeric"), "solution", solution_numeric(ctx, n))
        }
    })
}

pub fn fd_checks(ctx: &Context) -> Found {
    let names: Vec<String> = ctx.cfg.solutions.keys().cloned().collect();
    par::map(&names, |name| {
        let run = || -> Result<Observation, String> {
            let (value, sing) = bound_solution(ctx, name)?;
            let mut dom = domain(ctx, name, &sing)?;
            dom.samples = ctx.cfg.fd_points;
            let env = ctx.env()?;
            let derivs: Vec<Expr> = VARS.iter().map(|v| value.diff_var(v)).collect();
            let mut fails = Vec::new();
            let mut worst: f64 = 0.0;
            for p in verify::sample_points(&dom, &env, &value).map_err(|e| e.to_string())? {
                for (v, d) in VARS.iter().zip(&derivs) {
                    let r = verify::fd_compare(&value, d, &p, v, 1).map_err(|e| e.to_string())?;
                    if let Some(q) = r.richardson_ratio.filter(|_| !r.exact_stencil) {
                        worst = worst.max((q - 4.0).abs());
                    }
                    if !(r.passed && r.richardson_ok()) {
                        fails.push(format!("d/d{v} ratio {:?}", r.richardson_ratio));
                    }
                }
            }
            let n = fails.len();
            Ok(Observation::from_bool(n == 0, format!("first derivatives at {} points, worst |ratio - 4| = {worst:.3}", dom.samples), join_failures(fails))
                .metric("worst_ratio_deviation", worst))
        };
        (format!("fd.{name}"), "numeric", run().unwrap_or_else(Observation::error))
    })
}

/// Solutions whose orbits are followed.
pub const ORBIT_SOLUTIONS: [&str; 2] = ["S1", "S1c"];

pub fn orbit(ctx: &Context, name: &str, i: usize, first_order: bool, eps: Option<&[f64]>) -> Observation {
    let run = || -> Result<Observation, String> {
        let (value, sing) = bound_solution(ctx, name)?;
        let dom = domain(ctx, name, &sing)?;
        let fm = if first_order {
            let g = ctx.cat.generator(i, &ctx.spec).map_err(|e| e.to_string())?;
            let g = g.map(|c| ctx.params.apply(c).map_err(|_| lieforge::expr::ExprError::DegenerateDivision)).map_err(|e| e.to_string())?;
            first_order_flow(i, &g).map_err(|e| e.to_string())?
        } else {
            flow(i, &ctx.spec).and_then(|f| f.bind(&ctx.params)).map_err(|e| e.to_string())?
        };
        let eps = eps.map(<[f64]>::to_vec).unwrap_or_else(|| if first_order { ctx.cfg.first_order_eps.clone() } else { ctx.cfg.orbit_eps.clone() });
        let rep = verify::orbit_check(
            &value,
            &fm,
            &ctx.bound_equation()?,
            DEP,
            &eps,
            &ctx.env()?,
            &dom,
            ctx.cfg.orbit_threshold,
            ctx.cfg.slope_window(),
        )
        .map_err(|e| e.to_string())?;
        let shown: Vec<String> = rep.entries.iter().map(|(e, r)| format!("{e:e}: {r:.2e}")).collect();
        let detail = match rep.slope {
            Some(s) if first_order => format!("slope {s:.3}; {}", shown.join(", ")),
            _ => shown.join(", "),
        };
        let residual = if first_order {
            if rep.slope.is_some() { "slope outside window" } else { "no slope" }
        } else {
            "transformed function is not a solution"
        };
        let mut o = Observation::from_bool(rep.passed(), detail, Some(residual.to_string()));
        if let Some(s) = rep.slope {
            o = o.metric("slope", s);
        }
        let worst = rep.entries.iter().map(|e| e.1).fold(0.0, f64::max);
        Ok(o.metric("max_relative", worst))
    };
    run().unwrap_or_else(Observation::error)
}

pub fn orbits(ctx: &Context) -> Found {
    let mut jobs = Vec::new();
    for s in ORBIT_SOLUTIONS {
        for i in 1..=6 {
            jobs.push((s, i, false));
            jobs.push((s, i, true));
        }
    }
    par::map(&jobs, |&(s, i, fo)| {
        let kind = if fo { "first-order" } else { "exact" };
        (format!("orbit.{s}.X{i}.{kind}"), "orbit", orbit(ctx, s, i, fo, None))
    })
}

/// Every audit item, in report order.
pub fn run(ctx: &Context) -> Vec<Item> {
    let groups: [fn(&Context) -> Found; 9] =
        [determining, printed_system, table, annihilation, reductions, reduced_symmetries, solutions, fd_checks, orbits];
    let found: Vec<Found> = par::map(&groups, |g| g(ctx));
    found.into_iter().flatten().map(|(id, cat, o)| ctx.item(&id, cat, o)).collect()
}
