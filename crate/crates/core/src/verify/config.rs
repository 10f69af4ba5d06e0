use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Result, SampleDomain, VerifyError};
use crate::catalog::{parse_rational, VARS};
use crate::expr::{Atom, Expr, Symbol};

const EMBEDDED: &str = include_str!("../../../../fixtures/audit.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
    pub t: [f64; 2],
    /// Minimum distance from every singular locus.
    pub margin: f64,
}

/// Tolerances, sample sizes and domains for the numeric checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub seed: u64,
    pub samples: usize,
    pub max_tries: usize,
    pub residual_threshold: f64,
    pub orbit_threshold: f64,
    /// A symbolic nonzero residual must show at least this relative size
    /// somewhere.
    pub discrepancy_floor: f64,
    pub orbit_eps: Vec<f64>,
    pub first_order_eps: Vec<f64>,
    pub slope_window: [f64; 2],
    pub fd_points: usize,
    /// Exact values for the free constants, as rationals.
    pub constants: BTreeMap<String, String>,
    pub domains: BTreeMap<String, DomainConfig>,
    /// Solution name to domain name.
    pub solutions: BTreeMap<String, String>,
}

impl AuditConfig {
    pub fn embedded() -> Self {
        toml::from_str(EMBEDDED).expect("embedded audit config parses")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| VerifyError::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| VerifyError::Config(format!("{}: {e}", path.display())))
    }

    /// `audit.toml` from `dir` when present there, otherwise the embedded one.
    pub fn load(dir: Option<&Path>) -> Result<Self> {
        match dir.map(|d| d.join("audit.toml")) {
            Some(p) if p.exists() => Self::from_path(&p),
            _ => Ok(Self::embedded()),
        }
    }

    pub fn constant_bindings(&self) -> Result<Vec<(Atom, Expr)>> {
        self.constants
            .iter()
            .map(|(k, v)| {
                let q = parse_rational(v).ok_or_else(|| VerifyError::Config(format!("constant {k} = `{v}`")))?;
                Ok((Atom::Sym(Symbol::constant(k)), Expr::rational(q)))
            })
            .collect()
    }

    pub fn domain(&self, name: &str) -> Result<&DomainConfig> {
        self.domains.get(name).ok_or_else(|| VerifyError::Config(format!("unknown domain `{name}`")))
    }

    pub fn domain_for_solution(&self, solution: &str) -> Result<&DomainConfig> {
        let d = self.solutions.get(solution).ok_or_else(|| VerifyError::Config(format!("no domain for `{solution}`")))?;
        self.domain(d)
    }

    pub fn sample_domain(&self, d: &DomainConfig, exclusions: &[Expr]) -> SampleDomain {
        let iv = [d.x, d.y, d.z, d.t];
        let intervals: Vec<(&str, f64, f64)> = VARS.iter().zip(iv).map(|(v, [lo, hi])| (*v, lo, hi)).collect();
        let mut s = SampleDomain::new(&intervals, self.samples, self.seed).excluding(exclusions, d.margin);
        s.max_tries = self.max_tries;
        s
    }

    pub fn slope_window(&self) -> (f64, f64) {
        (self.slope_window[0], self.slope_window[1])
    }
}
