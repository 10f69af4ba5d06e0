use std::fmt::Write;

use super::{Document, ItemKind};
use crate::expr::Expr;

fn list(out: &mut String, kw: &str, names: &[String]) {
    if !names.is_empty() {
        let _ = writeln!(out, "{kw} {}", names.join(", "));
    }
}

fn exprs(es: &[Expr]) -> String {
    es.iter().map(Expr::to_string).collect::<Vec<_>>().join(", ")
}

/// Canonical text for a document. Items come out in their original order;
/// every expression is printed from its normal form.
pub fn print(doc: &Document) -> String {
    let h = &doc.header;
    let mut out = String::new();
    list(&mut out, "indep", &h.indep);
    list(&mut out, "dep", &h.dep);
    list(&mut out, "param", &h.params);
    list(&mut out, "const", &h.consts);
    for k in &h.kernels {
        match &k.rule {
            None => {
                let _ = writeln!(out, "kernel {}/{}", k.name, k.arity);
            }
            Some(r) => {
                let _ = writeln!(out, "kernel {}/{} = {r}", k.name, k.arity);
            }
        }
    }
    for item in &doc.items {
        out.push('\n');
        match &item.kind {
            ItemKind::Equation(e) => {
                let _ = writeln!(out, "equation {}: {e} = 0", item.name);
            }
            ItemKind::Field(f) => {
                let terms: Vec<String> = f.coeffs.iter().map(|(v, c)| format!("({c})*D{v}")).collect();
                let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                let _ = writeln!(out, "field {} = {body}", item.name);
            }
            ItemKind::Ansatz(a) => {
                let _ = writeln!(out, "ansatz {} {{", item.name);
                if !a.old.is_empty() {
                    let _ = writeln!(out, "  old {}", a.old.join(", "));
                }
                for (n, e) in &a.new {
                    let _ = writeln!(out, "  new {n} = {e}");
                }
                let _ = writeln!(out, "  dep {} = {}", a.dep.0, a.dep.1);
                for (n, e) in &a.inverse {
                    let _ = writeln!(out, "  inverse {n} = {e}");
                }
                out.push_str("}\n");
            }
            ItemKind::Solution(s) => {
                let _ = writeln!(out, "solution {} {{", item.name);
                let _ = writeln!(out, "  {} = {}", s.dep, s.value);
                if !s.require.is_empty() {
                    let _ = writeln!(out, "  require {}", exprs(&s.require));
                }
                if !s.singular.is_empty() {
                    let _ = writeln!(out, "  singular {}", exprs(&s.singular));
                }
                if let Some(src) = &s.source {
                    let _ = writeln!(out, "  source \"{src}\"");
                }
                out.push_str("}\n");
            }
        }
    }
    out
}
