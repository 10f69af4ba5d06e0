//! Round-trip and error-locality properties of the `.lie` format.

use std::collections::HashSet;

use lieforge::dsl::{parse, print, tokenize, TokenKind};
use proptest::prelude::*;

mod common;

use common::{document_text, fixtures};

#[test]
fn fixtures_round_trip() {
    for (name, src) in fixtures() {
        let doc = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print(&doc);
        let again = parse(&printed).unwrap_or_else(|e| panic!("{name} reprint: {e}\n{printed}"));
        assert!(doc.same_items(&again), "{name} changed on round trip");
        assert_eq!(print(&again), printed, "{name}: printing is not a fixed point");
    }
}

const KEYWORDS: &[&str] = &[
    "indep", "dep", "param", "const", "kernel", "equation", "field", "ansatz", "solution", "old", "new",
    "inverse", "require", "singular", "source", "exp", "sqrt", "log",
];

fn splice(src: &str, begin: usize, end: usize, with: &str) -> String {
    format!("{}{}{}", &src[..begin], with, &src[end..])
}

#[test]
fn corrupting_any_token_is_reported_at_that_token() {
    for (name, src) in fixtures() {
        let toks = tokenize(&src).unwrap();
        for t in toks.iter().filter(|t| !matches!(t.kind, TokenKind::Newline | TokenKind::Eof)) {
            let bad = splice(&src, t.span.begin, t.span.end, "$");
            let e = parse(&bad).expect_err("`$` is never valid");
            assert!(
                e.span.covers(&lieforge::dsl::SourceSpan { end: t.span.begin + 1, ..t.span }),
                "{name}: `$` at {} reported at {}",
                t.span,
                e.span
            );
        }
    }
}

#[test]
fn undeclared_symbols_are_reported_at_their_use() {
    for (name, src) in fixtures() {
        let doc = parse(&src).unwrap();
        let items: HashSet<&str> = doc.items.iter().map(|i| i.name.as_str()).collect();
        let toks = tokenize(&src).unwrap();
        let body_start = doc.items.first().map_or(src.len(), |i| i.span.begin);
        let mut checked = 0;
        for (i, t) in toks.iter().enumerate() {
            let TokenKind::Ident(s) = &t.kind else { continue };
            if t.span.begin < body_start || KEYWORDS.contains(&s.as_str()) || items.contains(s.as_str()) {
                continue;
            }
            if s == "d" && toks.get(i + 1).map(|n| &n.kind) == Some(&TokenKind::LParen) {
                continue;
            }
            let bad = splice(&src, t.span.begin, t.span.end, "zzq");
            let e = parse(&bad).expect_err("undeclared symbol must be rejected");
            let zspan = lieforge::dsl::SourceSpan { end: t.span.begin + 3, ..t.span };
            assert!(e.span.covers(&zspan), "{name}: `{s}` at {} reported at {} ({})", t.span, e.span, e.kind);
            checked += 1;
        }
        assert!(checked > 0 || doc.items.is_empty(), "{name}: nothing checked");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn random_documents_round_trip(src in document_text()) {
        let doc = parse(&src).map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let printed = print(&doc);
        let again = parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert!(doc.same_items(&again), "{}", printed);
    }
}
