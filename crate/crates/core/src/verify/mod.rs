//! Numeric checks: sampled residuals of closed-form solutions, finite
//! differences against symbolic derivatives, and symmetry orbits.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, FlowMap, Validity};
use crate::expr::{Atom, EvalPoint, Expr, ExprError, KernelTable, MultiIndex, Symbol};
use crate::par;

mod config;

pub use config::{AuditConfig, DomainConfig};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("no admissible sample for point {point} after {tries} tries")]
    SamplingExhausted { point: usize, tries: usize },
    #[error("empty interval for {0}")]
    EmptyInterval(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

pub type Result<T> = std::result::Result<T, VerifyError>;

/// Where and how many points to sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDomain {
    /// `(variable, lo, hi)` in coordinate order.
    pub intervals: Vec<(String, f64, f64)>,
    /// Points with `|e| < margin` for any of these are rejected.
    pub exclusions: Vec<Expr>,
    pub margin: f64,
    pub samples: usize,
    pub seed: u64,
    /// Resampling budget per point.
    pub max_tries: usize,
}

impl SampleDomain {
    pub fn new(intervals: &[(&str, f64, f64)], samples: usize, seed: u64) -> Self {
        SampleDomain {
            intervals: intervals.iter().map(|(v, lo, hi)| (v.to_string(), *lo, *hi)).collect(),
            exclusions: Vec::new(),
            margin: 0.0,
            samples,
            seed,
            max_tries: 64,
        }
    }

    pub fn excluding(mut self, exprs: &[Expr], margin: f64) -> Self {
        self.exclusions.extend(exprs.iter().cloned());
        self.margin = margin;
        self
    }

    fn validate(&self) -> Result<()> {
        for (v, lo, hi) in &self.intervals {
            if !(lo <= hi) {
                return Err(VerifyError::EmptyInterval(v.clone()));
            }
        }
        Ok(())
    }

    /// Independent stream for point `i`, so results do not depend on the
    /// evaluation order.
    fn rng(&self, i: usize) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(i as u64);
        r
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.intervals.iter().map(|(_, lo, hi)| if lo == hi { *lo } else { rng.gen_range(*lo..*hi) }).collect()
    }

    fn point(&self, env: &NumericEnv, coords: &[f64]) -> EvalPoint {
        let mut pt = env.point();
        for ((v, _, _), x) in self.intervals.iter().zip(coords) {
            pt.set_var(v, *x);
        }
        pt
    }

    fn admissible(&self, pt: &EvalPoint) -> bool {
        self.exclusions.iter().all(|e| matches!(e.eval(pt), Ok(v) if v.abs() >= self.margin))
    }

    /// Samples point `i`, retrying until `f` accepts it.
    fn sample<T>(&self, env: &NumericEnv, i: usize, f: &dyn Fn(&EvalPoint) -> Result<Option<T>>) -> Result<(Vec<f64>, T, usize)> {
        let mut rng = self.rng(i);
        for tries in 0..self.max_tries {
            let coords = self.draw(&mut rng);
            let pt = self.point(env, &coords);
            if !self.admissible(&pt) {
                continue;
            }
            if let Some(v) = f(&pt)? {
                return Ok((coords, v, tries));
            }
        }
        Err(VerifyError::SamplingExhausted { point: i, tries: self.max_tries })
    }
}

/// Admissible points of `dom` at which `value` evaluates to a real number.
pub fn sample_points(dom: &SampleDomain, env: &NumericEnv, value: &Expr) -> Result<Vec<EvalPoint>> {
    dom.validate()?;
    let pts = par::map_range(dom.samples, |i| {
        dom.sample(env, i, &|pt| match value.eval(pt) {
            Ok(_) => Ok(Some(pt.clone())),
            Err(ExprError::EvaluationPole(_) | ExprError::NonReal(_)) => Ok(None),
            Err(e) => Err(e.into()),
        })
    });
    pts.into_iter().map(|r| r.map(|(_, p, _)| p)).collect()
}

/// Numeric values for constants and concrete kernels.
#[derive(Clone, Debug, Default)]
pub struct NumericEnv {
    pub kernels: KernelTable,
    pub values: BTreeMap<String, f64>,
}

impl NumericEnv {
    pub fn new(kernels: KernelTable) -> Self {
        NumericEnv { kernels, values: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.values.insert(name.to_string(), v);
        self
    }

    fn point(&self) -> EvalPoint {
        let mut pt = EvalPoint::with_kernels(self.kernels.clone());
        for (k, v) in &self.values {
            pt.set_const(k, *v);
            pt.set_param(k, *v);
        }
        pt
    }
}

/// The terms of `eq` with every jet of `dep` replaced by the matching
/// derivative of `value`.
pub fn substituted_terms(eq: &Expr, dep: &str, value: &Expr) -> Result<Vec<Expr>> {
    let mut derivs: HashMap<MultiIndex, Expr> = HashMap::new();
    let mut d = |idx: &MultiIndex| -> Expr {
        if let Some(e) = derivs.get(idx) {
            return e.clone();
        }
        let mut e = value.clone();
        for v in idx.expanded() {
            e = e.diff_var(&v);
        }
        derivs.insert(idx.clone(), e.clone());
        e
    };
    eq.terms()
        .iter()
        .map(|t| {
            Ok(t.map_atoms(&mut |a| match a {
                Atom::Jet(j) if *j.dep == *dep => Some(d(&j.idx)),
                _ => None,
            })?)
        })
        .collect()
}

/// Normal form of `eq` evaluated on `u = value`.
pub fn symbolic_residual(eq: &Expr, dep: &str, value: &Expr) -> Result<Expr> {
    let terms = substituted_terms(eq, dep, value)?;
    Ok(terms.iter().fold(Expr::zero(), |acc, t| acc.add(t)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResidual {
    pub coords: Vec<f64>,
    pub residual: f64,
    /// Largest magnitude among the individual terms.
    pub scale: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub points: Vec<PointResidual>,
    pub max_relative: f64,
    pub threshold: f64,
    pub seed: u64,
    pub values: BTreeMap<String, f64>,
    /// Draws rejected because of the margin or a pole.
    pub resampled: usize,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.max_relative <= self.threshold
    }
}

/// `None` at a pole or a non-real value.
fn evaluate_terms(terms: &[Expr], pt: &EvalPoint) -> Result<Option<(f64, f64)>> {
    let mut sum = 0.0;
    let mut scale: f64 = 0.0;
    for t in terms {
        let v = match t.eval(pt) {
            Ok(v) => v,
            Err(ExprError::EvaluationPole(_) | ExprError::NonReal(_)) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        sum += v;
        scale = scale.max(v.abs());
    }
    Ok(Some((sum, scale)))
}

fn relative(residual: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        residual.abs()
    } else {
        residual.abs() / scale
    }
}

/// Samples `eq` on `u = value` over `dom`. Points where any term has a pole
/// are redrawn.
pub fn residual(name: &str, value: &Expr, eq: &Expr, dep: &str, env: &NumericEnv, dom: &SampleDomain, threshold: f64) -> Result<ResidualReport> {
    dom.validate()?;
    let terms = substituted_terms(eq, dep, value)?;
    let results = par::map_range(dom.samples, |i| dom.sample(env, i, &|pt| evaluate_terms(&terms, pt)));
    let mut points = Vec::with_capacity(dom.samples);
    let mut resampled = 0;
    for r in results {
        let (coords, (res, scale), tries) = r?;
        resampled += tries;
        points.push(PointResidual { coords, residual: res, scale, relative: relative(res, scale) });
    }
    let max_relative = points.iter().map(|p| p.relative).fold(0.0, f64::max);
    Ok(ResidualReport {
        name: name.to_string(),
        points,
        max_relative,
        threshold,
        seed: dom.seed,
        values: env.values.clone(),
        resampled,
    })
}

/// Central stencil for the `order`-th derivative, `O(h^2)` accurate.
fn stencil(order: u32) -> &'static [(i32, f64)] {
    match order {
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
    }
}

pub const FD_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Acceptable relative error of the best step, per derivative order.
pub fn fd_tolerance(order: u32) -> f64 {
    match order {
        1 => 1e-6,
        2 => 1e-5,
        3 => 1e-3,
        _ => 1e-2,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub var: String,
    pub order: u32,
    pub symbolic: f64,
    /// `(h, estimate, |estimate - symbolic|)`.
    pub steps: Vec<(f64, f64, f64)>,
    /// Error at `h` over error at `h/2`, for the largest step.
    pub richardson_ratio: Option<f64>,
    /// The largest-step error is already at rounding level.
    pub exact_stencil: bool,
    pub passed: bool,
}

impl FdReport {
    pub fn richardson_ok(&self) -> bool {
        self.exact_stencil || self.richardson_ratio.is_some_and(|r| (3.8..=4.2).contains(&r))
    }
}

fn fd_estimate(e: &Expr, pt: &EvalPoint, var: &Symbol, x0: f64, h: f64, order: u32) -> Result<f64> {
    let mut p = pt.clone();
    let mut acc = 0.0;
    for (k, c) in stencil(order) {
        p.set(Atom::Sym(var.clone()), x0 + *k as f64 * h);
        acc += c * e.eval(&p)?;
    }
    Ok(acc / h.powi(order as i32))
}

/// Compares the symbolic `order`-th derivative of `e` in `var` with central
/// differences at `pt`.
pub fn fd_crosscheck(e: &Expr, pt: &EvalPoint, var: &str, order: u32) -> Result<FdReport> {
    let order = order.clamp(1, 4);
    let mut d = e.clone();
    for _ in 0..order {
        d = d.diff_var(var);
    }
    fd_compare(e, &d, pt, var, order)
}

/// As [`fd_crosscheck`] with the derivative `d` supplied.
pub fn fd_compare(e: &Expr, d: &Expr, pt: &EvalPoint, var: &str, order: u32) -> Result<FdReport> {
    let order = order.clamp(1, 4);
    let sym = Symbol::var(var);
    let x0 = pt.get(&Atom::Sym(sym.clone())).ok_or_else(|| ExprError::UnboundSymbol(var.into()))?;
    let symbolic = d.eval(pt)?;
    let scale = symbolic.abs().max(e.eval(pt)?.abs()).max(1.0);
    let mut steps = Vec::new();
    for h in FD_STEPS {
        let est = fd_estimate(e, pt, &sym, x0, h, order)?;
        steps.push((h, est, (est - symbolic).abs()));
    }
    let h0 = FD_STEPS[0];
    let e0 = steps[0].2;
    let e1 = (fd_estimate(e, pt, &sym, x0, h0 / 2.0, order)? - symbolic).abs();
    let floor = 1e-13 * scale / h0.powi(order as i32);
    let exact_stencil = e0 <= floor.max(1e-12 * scale);
    let richardson_ratio = (e1 > 0.0).then(|| e0 / e1);
    let best = steps.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
    let passed = best <= fd_tolerance(order) * scale;
    Ok(FdReport { var: var.into(), order, symbolic, steps, richardson_ratio, exact_stencil, passed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitMode {
    /// Every transformed function must be a solution.
    Exact,
    /// The residual must shrink like `eps^2`, unless the first-order form
    /// already maps solutions to solutions.
    Slope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub index: usize,
    pub mode: OrbitMode,
    /// `(eps, max relative residual)`.
    pub entries: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub threshold: f64,
    pub slope_window: (f64, f64),
}

impl OrbitReport {
    pub fn passed(&self) -> bool {
        match self.mode {
            OrbitMode::Exact => self.entries.iter().all(|(_, r)| *r <= self.threshold),
            OrbitMode::Slope => {
                self.slope.is_some_and(|s| s >= self.slope_window.0 && s <= self.slope_window.1)
                    || self.entries.iter().all(|(_, r)| *r <= self.threshold)
            }
        }
    }
}

/// Least-squares slope of `log r` against `log eps`.
pub fn loglog_slope(entries: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = entries
        .iter()
        .filter(|(e, r)| *e > 0.0 && *r > 0.0)
        .map(|(e, r)| (e.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Transforms `value` by `fm` and samples the residual for each `eps`.
/// Exact flows are judged against `threshold`; first-order forms by the
/// log-log slope of the residual.
#[allow(clippy::too_many_arguments)]
pub fn orbit_check(
    value: &Expr,
    fm: &FlowMap,
    eq: &Expr,
    dep: &str,
    eps: &[f64],
    env: &NumericEnv,
    dom: &SampleDomain,
    threshold: f64,
    slope_window: (f64, f64),
) -> Result<OrbitReport> {
    let moved = fm.transformed_solution(value)?;
    let pre: Vec<(&str, Expr)> = crate::catalog::VARS.iter().copied().zip(fm.inverse.iter().cloned()).collect();
    let mut dom = dom.clone();
    dom.exclusions = dom.exclusions.iter().map(|e| e.substitute_vars(&pre)).collect::<std::result::Result<_, _>>()?;
    let mode = match fm.validity {
        Validity::Exact => OrbitMode::Exact,
        Validity::FirstOrder => OrbitMode::Slope,
    };
    let mut entries = Vec::new();
    for &e in eps {
        let env = env.clone().with("eps", e);
        let r = residual("orbit", &moved, eq, dep, &env, &dom, threshold)?;
        entries.push((e, r.max_relative));
    }
    let slope = loglog_slope(&entries);
    Ok(OrbitReport { index: fm.index, mode, entries, slope, threshold, slope_window })
}

#[cfg(test)]
mod tests;
