use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CatalogError, Result};
use crate::dsl::{parse_expr_in, Header};
use crate::expr::{Atom, Expr, KernelTable, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    DocumentedDiscrepancy,
}

/// What an audit item is expected to produce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub status: Status,
    /// Canonical form of the recorded residual for a discrepancy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A commutator table as printed, entries over `v1..v6`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrintedTable {
    pub entries: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Default numeric parameters.
    pub params: String,
    /// Numeric stand-ins for the arbitrary functions, over `w1, w2, ...`.
    pub kernels: BTreeMap<String, String>,
    pub table: PrintedTable,
    pub expected: BTreeMap<String, Expected>,
}

fn slot_header(n: usize) -> Header {
    Header { consts: (1..=n).map(|i| format!("w{i}")).collect(), ..Header::default() }
}

fn basis_header() -> Header {
    Header { params: ["a", "b", "c", "d"].map(String::from).to_vec(), consts: (1..=6).map(|i| format!("v{i}")).collect(), ..Header::default() }
}

impl Manifest {
    pub fn kernel_table(&self) -> Result<KernelTable> {
        let mut k = KernelTable::new();
        for (name, text) in &self.kernels {
            let (name, arity) = match name.split_once('/') {
                Some((n, a)) => (n, a.parse().map_err(|_| CatalogError::Manifest(format!("bad arity in `{name}`")))?),
                None => (name.as_str(), 1),
            };
            let body = parse_expr_in(&slot_header(arity), text).map_err(|e| CatalogError::Manifest(format!("kernel {name}: {e}")))?;
            let subst: Vec<_> = (1..=arity).map(|i| (Atom::Sym(Symbol::constant(&format!("w{i}"))), Expr::slot(i))).collect();
            k.insert(name, arity, body.substitute(&subst)?);
        }
        Ok(k)
    }

    /// The printed table with entries as combinations of `v1..v6`, which
    /// parse as constants.
    pub fn printed_table(&self) -> Result<Vec<Vec<Expr>>> {
        let h = basis_header();
        self.table
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_expr_in(&h, s).map_err(|e| CatalogError::Manifest(format!("table entry `{s}`: {e}"))))
                    .collect()
            })
            .collect()
    }

    pub fn expected(&self, id: &str) -> Option<&Expected> {
        self.expected.get(id)
    }
}
