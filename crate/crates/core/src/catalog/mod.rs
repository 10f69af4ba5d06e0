//! The CBS fixture set: equation, generators, flows, reductions and
//! solution records.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::dsl::{parse, Document, ParseError, SolutionDef};
use crate::expr::{Atom, Expr, ExprError, JetVar, KernelTable, MultiIndex, Symbol, Q};
use crate::lie::{LieError, VectorField};
use crate::reduction::{ReductionAnsatz, ReductionError};

mod flow;
mod manifest;

pub use flow::{first_order_flow, flow, FlowMap, Validity};
pub use manifest::{Expected, Manifest, PrintedTable, Status};

/// Independent variables of the CBS equation, in coefficient order.
pub const VARS: [&str; 4] = ["x", "y", "z", "t"];
pub const DEP: &str = "u";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{file}: {err}")]
    Parse { file: String, err: ParseError },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("unknown catalog item `{0}`")]
    Unknown(String),
    #[error("no closed-form flow for v{index} under {spec}")]
    UnsupportedSpecialization { index: usize, spec: String },
    #[error("bad specification `{0}`")]
    BadSpec(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

pub type Result<T> = std::result::Result<T, CatalogError>;

/// Fixture files, in the order they are loaded.
pub const FIXTURES: [&str; 5] = ["cbs.lie", "reductions.lie", "solutions.lie", "printed_system.lie", "manifest.json"];

const EMBEDDED: [&str; 5] = [
    include_str!("../../../../fixtures/cbs.lie"),
    include_str!("../../../../fixtures/reductions.lie"),
    include_str!("../../../../fixtures/solutions.lie"),
    include_str!("../../../../fixtures/printed_system.lie"),
    include_str!("../../../../fixtures/manifest.json"),
];

/// The parameters `a, b, c, d`, symbolic or bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CbsParams {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
}

impl Default for CbsParams {
    fn default() -> Self {
        CbsParams::symbolic()
    }
}

impl CbsParams {
    pub fn symbolic() -> Self {
        CbsParams { a: Expr::param("a"), b: Expr::param("b"), c: Expr::param("c"), d: Expr::param("d") }
    }

    pub fn rational(a: Q, b: Q, c: Q, d: Q) -> Self {
        CbsParams { a: Expr::rational(a), b: Expr::rational(b), c: Expr::rational(c), d: Expr::rational(d) }
    }

    pub fn is_symbolic(&self) -> bool {
        *self == CbsParams::symbolic()
    }

    fn named(&self) -> [(&'static str, &Expr); 4] {
        [("a", &self.a), ("b", &self.b), ("c", &self.c), ("d", &self.d)]
    }

    pub fn bindings(&self) -> Vec<(Atom, Expr)> {
        self.named()
            .into_iter()
            .filter(|(n, e)| **e != Expr::param(n))
            .map(|(n, e)| (Atom::Sym(Symbol::param(n)), e.clone()))
            .collect()
    }

    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        let b = self.bindings();
        if b.is_empty() {
            return Ok(e.clone());
        }
        Ok(e.substitute(&b)?)
    }

    /// Nondegeneracy conditions with whether each holds (for symbolic
    /// parameters: whether it holds generically).
    pub fn nondegeneracy(&self) -> Vec<(&'static str, bool)> {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        vec![
            ("a != 0", !a.is_zero()),
            ("b != 0", !b.is_zero()),
            ("c != 0", !c.is_zero()),
            ("b*c - a*d != 0", !b.mul(c).sub(&a.mul(d)).is_zero()),
            ("c != a", !c.sub(a).is_zero()),
        ]
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.nondegeneracy().iter().all(|(_, ok)| *ok)
    }

    pub fn as_f64(&self) -> Option<[f64; 4]> {
        let f = |e: &Expr| e.as_rational().and_then(|q| q.to_f64());
        Some([f(&self.a)?, f(&self.b)?, f(&self.c)?, f(&self.d)?])
    }
}

impl FromStr for CbsParams {
    type Err = CatalogError;

    /// `a=1,b=2,c=3,d=1`; omitted names stay symbolic.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = CbsParams::symbolic();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| CatalogError::BadSpec(part.into()))?;
            let q: Q = parse_rational(v.trim()).ok_or_else(|| CatalogError::BadSpec(part.into()))?;
            let slot = match k.trim() {
                "a" => &mut p.a,
                "b" => &mut p.b,
                "c" => &mut p.c,
                "d" => &mut p.d,
                _ => return Err(CatalogError::BadSpec(part.into())),
            };
            *slot = Expr::rational(q);
        }
        Ok(p)
    }
}

impl fmt::Display for CbsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.named().iter().map(|(n, e)| format!("{n}={e}")).collect();
        f.write_str(&parts.join(","))
    }
}

pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Ok(q) = s.parse::<Q>() {
        return Some(q);
    }
    let v: f64 = s.parse().ok()?;
    Q::from_float(v)
}

/// Choice for the arbitrary function `λ(t)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    Generic,
    Zero,
    Const(Expr),
}

/// Choice for the arbitrary function `γ(w, t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaSpec {
    Generic,
    Zero,
    /// `γ(w, t) = w`.
    Argument,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Specialization {
    pub lambda: LambdaSpec,
    pub gamma: GammaSpec,
}

impl Default for Specialization {
    fn default() -> Self {
        Specialization { lambda: LambdaSpec::Zero, gamma: GammaSpec::Zero }
    }
}

impl Specialization {
    pub fn generic() -> Self {
        Specialization { lambda: LambdaSpec::Generic, gamma: GammaSpec::Generic }
    }

    pub fn kernels(&self) -> KernelTable {
        let mut k = KernelTable::new();
        match &self.lambda {
            LambdaSpec::Generic => {}
            LambdaSpec::Zero => k.insert("lam", 1, Expr::zero()),
            LambdaSpec::Const(c) => k.insert("lam", 1, c.clone()),
        }
        match self.gamma {
            GammaSpec::Generic => {}
            GammaSpec::Zero => k.insert("gam", 2, Expr::zero()),
            GammaSpec::Argument => k.insert("gam", 2, Expr::slot(1)),
        }
        k
    }

    /// `λ` as a constant, when it is one.
    pub fn lambda_const(&self) -> Option<Expr> {
        match &self.lambda {
            LambdaSpec::Generic => None,
            LambdaSpec::Zero => Some(Expr::zero()),
            LambdaSpec::Const(c) => Some(c.clone()),
        }
    }
}

impl FromStr for Specialization {
    type Err = CatalogError;

    /// `lambda=0,gamma=0`; values `generic`, a rational or a constant name
    /// for `lambda`; `generic`, `0` or `arg` for `gamma`.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = Specialization::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || CatalogError::BadSpec(part.into());
            let (k, v) = part.split_once('=').ok_or_else(bad)?;
            let v = v.trim();
            match k.trim() {
                "lambda" | "lam" => {
                    spec.lambda = match v {
                        "generic" => LambdaSpec::Generic,
                        _ => match parse_rational(v) {
                            Some(q) if q == Q::from_integer(0.into()) => LambdaSpec::Zero,
                            Some(q) => LambdaSpec::Const(Expr::rational(q)),
                            None if v.chars().all(|c| c.is_alphanumeric() || c == '_') && !v.is_empty() => {
                                LambdaSpec::Const(Expr::constant(v))
                            }
                            None => return Err(bad()),
                        },
                    }
                }
                "gamma" | "gam" => {
                    spec.gamma = match v {
                        "generic" => GammaSpec::Generic,
                        "0" => GammaSpec::Zero,
                        "arg" => GammaSpec::Argument,
                        _ => return Err(bad()),
                    }
                }
                _ => return Err(bad()),
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for Specialization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = match &self.lambda {
            LambdaSpec::Generic => "generic".to_string(),
            LambdaSpec::Zero => "0".to_string(),
            LambdaSpec::Const(c) => c.to_string(),
        };
        let g = match self.gamma {
            GammaSpec::Generic => "generic",
            GammaSpec::Zero => "0",
            GammaSpec::Argument => "arg",
        };
        write!(f, "lambda={l},gamma={g}")
    }
}

fn jet(vars: &[&str]) -> Expr {
    Expr::jet(JetVar::new(DEP, MultiIndex::from_vars(vars)))
}

/// The seven-term potential CBS equation, built term by term.
pub fn build_pde(p: &CbsParams) -> Expr {
    let ux = jet(&["x"]);
    let uxx = jet(&["x", "x"]);
    jet(&["x", "t"])
        + p.a.mul(&ux).mul(&jet(&["x", "y"]))
        + p.b.mul(&jet(&["y"])).mul(&uxx)
        + p.c.mul(&ux).mul(&jet(&["x", "z"]))
        + p.d.mul(&jet(&["z"])).mul(&uxx)
        + jet(&["x", "x", "x", "y"])
        + jet(&["x", "x", "x", "z"])
}

/// Replaces every `y` and `z` derivative by an `x` derivative.
pub fn collapse_to_x(e: &Expr) -> Result<Expr> {
    Ok(e.map_atoms(&mut |a| match a {
        Atom::Jet(j) if j.idx.count("y") + j.idx.count("z") > 0 => {
            let mut idx = MultiIndex::zero();
            for v in j.idx.expanded() {
                idx = idx.incremented(if &*v == "y" || &*v == "z" { "x" } else { &v });
            }
            Some(Expr::jet(JetVar::new(&j.dep, idx)))
        }
        _ => None,
    })?)
}

/// A closed-form solution of the CBS equation.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionRecord {
    pub name: String,
    pub value: Expr,
    /// Expressions that must be nonzero.
    pub constraints: Vec<Expr>,
    /// Expressions whose zero sets are singular.
    pub singular: Vec<Expr>,
    pub provenance: String,
}

impl SolutionRecord {
    fn from_def(name: &str, s: &SolutionDef) -> Self {
        SolutionRecord {
            name: name.to_string(),
            value: s.value.clone(),
            constraints: s.require.clone(),
            singular: s.singular.clone(),
            provenance: s.source.clone().unwrap_or_default(),
        }
    }

    fn map(&self, f: &dyn Fn(&Expr) -> Result<Expr>) -> Result<Self> {
        let all = |v: &[Expr]| v.iter().map(f).collect::<Result<Vec<_>>>();
        Ok(SolutionRecord {
            name: self.name.clone(),
            value: f(&self.value)?,
            constraints: all(&self.constraints)?,
            singular: all(&self.singular)?,
            provenance: self.provenance.clone(),
        })
    }

    /// Symbols outside `x, y, z, t` and the given declarations.
    pub fn undeclared_symbols(&self, doc: &Document) -> Vec<String> {
        let mut out = Vec::new();
        for a in self.value.free_atoms() {
            let ok = match &a {
                Atom::Sym(s) => {
                    use crate::expr::SymKind::*;
                    match s.kind {
                        Var => VARS.contains(&&*s.name),
                        Param | Const => doc.header.is_declared(&s.name),
                        Euler => true,
                        Slot | Basis => false,
                    }
                }
                Atom::Jet(_) => false,
                Atom::Fn(app) => doc.header.kernel(&app.name).is_some(),
                Atom::Pow(_) => true,
            };
            if !ok {
                out.push(a.to_string());
            }
        }
        out
    }
}

/// Loaded fixture set.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub cbs: Document,
    /// With the definitions of `A`, `B`, `C` substituted everywhere.
    pub reductions: Document,
    pub solutions: Document,
    pub printed_system: Document,
    pub manifest: Manifest,
    pub source: Option<PathBuf>,
}

fn parse_named(file: &str, text: &str) -> Result<Document> {
    parse(text).map_err(|err| CatalogError::Parse { file: file.into(), err })
}

/// `param := rhs` for every equation `def_<param>: param = rhs`.
fn definitions(doc: &Document) -> Vec<(Atom, Expr)> {
    doc.items
        .iter()
        .filter_map(|it| {
            let name = it.name.strip_prefix("def_")?;
            let eq = doc.equation(&it.name)?;
            let p = Expr::param(name);
            Some((p.as_atom()?.clone(), p.sub(eq)))
        })
        .collect()
}

impl Catalog {
    pub fn embedded() -> Result<Self> {
        Self::from_texts(&EMBEDDED, None)
    }

    /// Loads every fixture from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut texts = Vec::new();
        for f in FIXTURES {
            let path = dir.join(f);
            let t = std::fs::read_to_string(&path).map_err(|e| CatalogError::Io { path, msg: e.to_string() })?;
            texts.push(t);
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        Self::from_texts(&refs, Some(dir.to_path_buf()))
    }

    /// `LIEFORGE_FIXTURES` when set, otherwise the embedded copies.
    pub fn load() -> Result<Self> {
        match std::env::var_os("LIEFORGE_FIXTURES") {
            Some(d) => Self::from_dir(Path::new(&d)),
            None => Self::embedded(),
        }
    }

    fn from_texts(texts: &[&str], source: Option<PathBuf>) -> Result<Self> {
        let cbs = parse_named(FIXTURES[0], texts[0])?;
        let raw = parse_named(FIXTURES[1], texts[1])?;
        let defs = definitions(&raw);
        let reductions = raw.map_exprs(&mut |e| e.substitute(&defs))?;
        let solutions = parse_named(FIXTURES[2], texts[2])?;
        let printed_system = parse_named(FIXTURES[3], texts[3])?;
        let manifest: Manifest = serde_json::from_str(texts[4]).map_err(|e| CatalogError::Manifest(e.to_string()))?;
        let cat = Catalog { cbs, reductions, solutions, printed_system, manifest, source };
        cat.equation()?;
        Ok(cat)
    }

    pub fn equation(&self) -> Result<&Expr> {
        self.cbs.equation("cbs").ok_or_else(|| CatalogError::Unknown("cbs".into()))
    }

    /// A named field of the CBS document, specialized.
    pub fn field(&self, name: &str, spec: &Specialization) -> Result<VectorField> {
        let def = self.cbs.field(name).ok_or_else(|| CatalogError::Unknown(name.into()))?;
        let v = VectorField::from_def(def, &VARS, DEP)?;
        let k = spec.kernels();
        Ok(v.map(|c| c.instantiate(&k))?)
    }

    /// `v_i` for `i` in `1..=6`.
    pub fn generator(&self, i: usize, spec: &Specialization) -> Result<VectorField> {
        if !(1..=6).contains(&i) {
            return Err(CatalogError::Unknown(format!("v{i}")));
        }
        self.field(&format!("v{i}"), spec)
    }

    pub fn generators(&self, spec: &Specialization) -> Result<Vec<VectorField>> {
        (1..=6).map(|i| self.generator(i, spec)).collect()
    }

    /// A field of the reductions document over the given space.
    pub fn reduced_field(&self, name: &str, vars: &[&str], dep: &str) -> Result<VectorField> {
        let def = self.reductions.field(name).ok_or_else(|| CatalogError::Unknown(name.into()))?;
        Ok(VectorField::from_def(def, vars, dep)?)
    }

    pub fn ansatz(&self, name: &str) -> Result<ReductionAnsatz> {
        let def = self.reductions.ansatz(name).ok_or_else(|| CatalogError::Unknown(name.into()))?;
        Ok(ReductionAnsatz::from_def(name, def)?)
    }

    pub fn reduced_equation(&self, name: &str) -> Result<&Expr> {
        self.reductions.equation(name).ok_or_else(|| CatalogError::Unknown(name.into()))
    }

    /// Closed-form root of a reduced ODE.
    pub fn ode_root(&self, name: &str) -> Result<&SolutionDef> {
        self.reductions.solution(name).ok_or_else(|| CatalogError::Unknown(name.into()))
    }

    /// Every solution record, with the parameters bound.
    pub fn solutions(&self, p: &CbsParams) -> Result<Vec<SolutionRecord>> {
        self.solutions
            .items
            .iter()
            .filter_map(|it| self.solutions.solution(&it.name).map(|s| SolutionRecord::from_def(&it.name, s)))
            .map(|r| r.map(&|e| p.apply(e)))
            .collect()
    }

    pub fn solution(&self, name: &str, p: &CbsParams) -> Result<SolutionRecord> {
        let s = self.solutions.solution(name).ok_or_else(|| CatalogError::Unknown(name.into()))?;
        SolutionRecord::from_def(name, s).map(&|e| p.apply(e))
    }

    /// Numeric stand-ins for the arbitrary functions, from the manifest.
    pub fn numeric_kernels(&self) -> Result<KernelTable> {
        self.manifest.kernel_table()
    }
}

/// The five printed solutions, in order.
pub const PRINTED_SOLUTIONS: [&str; 5] = ["S1", "S2", "S3", "S4", "S5"];

#[cfg(test)]
mod tests;
