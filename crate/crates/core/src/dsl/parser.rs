use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigInt;

use super::lexer::{tokenize, Token, TokenKind};
use super::{
    AnsatzDef, Document, FieldDef, Header, Item, ItemKind, KernelDecl, ParseError, ParseErrorKind, Result,
    SolutionDef, SourceSpan,
};
use crate::expr::{Atom, Expr, ExprError, FnApp, JetVar, MultiIndex, Q, SymKind, Symbol};

use crate::expr::MIN_EXPONENT;

#[derive(Clone, Copy, Default)]
struct Ctx {
    basis: bool,
    slots: bool,
}

struct Parser<'h> {
    toks: Vec<Token>,
    pos: usize,
    header: &'h mut Header,
}

fn err<T>(kind: ParseErrorKind, span: SourceSpan) -> Result<T> {
    Err(ParseError { kind, span })
}

fn syntax<T>(msg: impl Into<String>, span: SourceSpan) -> Result<T> {
    err(ParseErrorKind::Syntax(msg.into()), span)
}

fn lift<T>(r: std::result::Result<T, ExprError>, span: SourceSpan) -> Result<T> {
    r.map_err(|e| ParseError { kind: ParseErrorKind::Expr(e), span })
}

fn describe(k: &TokenKind) -> String {
    match k {
        TokenKind::Ident(s) => format!("`{s}`"),
        TokenKind::Number(s) => format!("number {s}"),
        TokenKind::Str(_) => "string".into(),
        TokenKind::Slot(n) => format!("`@{n}`"),
        TokenKind::Newline => "end of line".into(),
        TokenKind::Eof => "end of input".into(),
        other => format!("`{}`", match other {
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Caret => "^",
            TokenKind::Prime => "'",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Eq => "=",
            TokenKind::Neq => "!=",
            _ => "?",
        }),
    }
}

fn starts_primary(k: &TokenKind) -> bool {
    matches!(k, TokenKind::Ident(_) | TokenKind::Number(_) | TokenKind::LParen | TokenKind::Slot(_))
}

fn parse_number(s: &str) -> Q {
    match s.split_once('.') {
        None => Q::from_integer(s.parse::<BigInt>().expect("lexer yields digits")),
        Some((i, f)) => {
            let digits: BigInt = format!("{i}{f}").parse().expect("lexer yields digits");
            Q::new(digits, num_traits::pow(BigInt::from(10), f.len()))
        }
    }
}

impl<'h> Parser<'h> {
    fn peek(&self) -> &TokenKind {
        &self.toks[self.pos].kind
    }


    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, k: &TokenKind) -> bool {
        if self.peek() == k {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, k: TokenKind) -> Result<SourceSpan> {
        if *self.peek() == k {
            Ok(self.bump().span)
        } else {
            syntax(format!("expected {}, found {}", describe(&k), describe(self.peek())), self.span())
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan)> {
        match self.peek().clone() {
            TokenKind::Ident(s) => Ok((s, self.bump().span)),
            other => syntax(format!("expected a name, found {}", describe(&other)), self.span()),
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            TokenKind::Newline => {
                self.bump();
                Ok(())
            }
            TokenKind::Eof => Ok(()),
            k if starts_primary(k) => syntax("implicit multiplication is not allowed; write `*`", self.span()),
            k => syntax(format!("expected end of line, found {}", describe(k)), self.span()),
        }
    }

    fn skip_newlines(&mut self) {
        while self.eat(&TokenKind::Newline) {}
    }

    // ---- expressions ----

    fn expr(&mut self, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        let (mut acc, mut sp) = self.term(ctx)?;
        loop {
            let neg = match self.peek() {
                TokenKind::Plus => false,
                TokenKind::Minus => true,
                _ => return Ok((acc, sp)),
            };
            self.bump();
            let (rhs, rsp) = self.term(ctx)?;
            acc = if neg { acc.sub(&rhs) } else { acc.add(&rhs) };
            sp = sp.join(&rsp);
        }
    }

    fn term(&mut self, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        let (mut acc, mut sp) = self.unary(ctx)?;
        loop {
            if starts_primary(self.peek()) {
                return syntax("implicit multiplication is not allowed; write `*`", self.span());
            }
            let div = match self.peek() {
                TokenKind::Star => false,
                TokenKind::Slash => true,
                _ => return Ok((acc, sp)),
            };
            self.bump();
            let (rhs, rsp) = self.unary(ctx)?;
            acc = if div { lift(acc.div(&rhs), rsp)? } else { acc.mul(&rhs) };
            sp = sp.join(&rsp);
        }
    }

    fn unary(&mut self, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        if *self.peek() == TokenKind::Minus {
            let s = self.bump().span;
            let (e, sp) = self.unary(ctx)?;
            return Ok((e.neg(), s.join(&sp)));
        }
        self.power(ctx)
    }

    fn power(&mut self, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        let (base, bsp) = self.primary(ctx)?;
        if *self.peek() != TokenKind::Caret {
            return Ok((base, bsp));
        }
        self.bump();
        let (exp, esp) = self.unary(ctx)?;
        let sp = bsp.join(&esp);
        if let Some(n) = exp.as_integer() {
            if n < MIN_EXPONENT {
                return lift(Err(ExprError::ExponentOutOfRange(n)), esp);
            }
            let n = i32::try_from(n).map_err(|_| ParseError {
                kind: ParseErrorKind::Expr(ExprError::ExponentOutOfRange(n)),
                span: esp,
            })?;
            return Ok((lift(base.pow_int(n), sp)?, sp));
        }
        if exp.as_rational().is_none() && base.is_zero() {
            return lift(Err(ExprError::DegenerateDivision), sp);
        }
        Ok((base.pow(&exp), sp))
    }

    fn args(&mut self, ctx: Ctx) -> Result<(Vec<Expr>, SourceSpan)> {
        let open = self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != TokenKind::RParen {
            loop {
                args.push(self.expr(ctx)?.0);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        let close = self.expect(TokenKind::RParen)?;
        Ok((args, open.join(&close)))
    }

    fn primary(&mut self, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Number(s) => Ok((Expr::rational(parse_number(&s)), tok.span)),
            TokenKind::Slot(n) => {
                if !ctx.slots {
                    return syntax("slot placeholders are only allowed in kernel rules", tok.span);
                }
                Ok((Expr::slot(n), tok.span))
            }
            TokenKind::LParen => {
                let (e, _) = self.expr(ctx)?;
                let close = self.expect(TokenKind::RParen)?;
                Ok((e, tok.span.join(&close)))
            }
            TokenKind::Ident(name) => self.named(name, tok.span, ctx),
            other => syntax(format!("expected an expression, found {}", describe(&other)), tok.span),
        }
    }

    fn named(&mut self, name: String, sp: SourceSpan, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        let call_follows = *self.peek() == TokenKind::LParen;
        if name == "d" && call_follows {
            return self.derivative(sp, ctx);
        }
        if matches!(name.as_str(), "exp" | "sqrt" | "log") && call_follows && !self.header.is_declared(&name) {
            let (args, asp) = self.args(ctx)?;
            if args.len() != 1 {
                return err(ParseErrorKind::Arity { name, expected: 1, got: args.len() }, asp);
            }
            let e = match name.as_str() {
                "exp" => Expr::exp(&args[0]),
                "sqrt" => Expr::sqrt(&args[0]),
                _ => {
                    if args[0].is_zero() {
                        return lift(Err(ExprError::EvaluationPole("log(0)".into())), asp);
                    }
                    Expr::log(args[0].clone())
                }
            };
            return Ok((e, sp.join(&asp)));
        }
        if let Some(k) = self.header.kernel(&name).cloned() {
            return self.kernel_call(k, sp, ctx);
        }
        let h = &self.header;
        if h.indep.contains(&name) {
            return Ok((Expr::var(&name), sp));
        }
        if h.dep.contains(&name) {
            return Ok((Expr::jet(JetVar::base(&name)), sp));
        }
        if h.params.contains(&name) {
            return Ok((Expr::param(&name), sp));
        }
        if h.consts.contains(&name) {
            return Ok((Expr::constant(&name), sp));
        }
        if ctx.basis {
            if let Some(coord) = name.strip_prefix('D') {
                if h.indep.iter().chain(&h.dep).any(|v| v == coord) {
                    return Ok((Expr::sym(Symbol::new(SymKind::Basis, coord)), sp));
                }
            }
        }
        if let Some((head, tail)) = name.split_once('_') {
            let singles: Vec<String> = tail.chars().map(String::from).collect();
            let all_vars = !tail.is_empty() && singles.iter().all(|c| h.indep.contains(c));
            if all_vars && h.dep.iter().any(|d| d == head) {
                let idx = MultiIndex::from_vars(&singles);
                if idx.order() > crate::expr::DEFAULT_JET_CAP {
                    return lift(
                        Err(ExprError::JetOrderExceeded { order: idx.order(), cap: crate::expr::DEFAULT_JET_CAP }),
                        sp,
                    );
                }
                return Ok((Expr::jet(JetVar::new(head, idx)), sp));
            }
            if all_vars && h.is_declared(head) {
                return err(ParseErrorKind::JetOnNonDependent(head.to_string()), sp);
            }
        }
        err(ParseErrorKind::Undeclared(name), sp)
    }

    fn derivative(&mut self, sp: SourceSpan, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        self.expect(TokenKind::LParen)?;
        let (mut out, _) = self.expr(ctx)?;
        let mut vars = Vec::new();
        while self.eat(&TokenKind::Comma) {
            let (v, vsp) = self.ident()?;
            if !self.header.indep.contains(&v) {
                if self.header.is_declared(&v) {
                    return syntax(format!("`{v}` is not an independent variable"), vsp);
                }
                return err(ParseErrorKind::Undeclared(v), vsp);
            }
            vars.push((v, vsp));
        }
        let close = self.expect(TokenKind::RParen)?;
        let full = sp.join(&close);
        if vars.is_empty() {
            return syntax("d(...) needs at least one variable", full);
        }
        for (v, _) in &vars {
            out = lift(out.total_derivative(v), full)?;
        }
        Ok((out, full))
    }

    fn kernel_call(&mut self, k: KernelDecl, sp: SourceSpan, ctx: Ctx) -> Result<(Expr, SourceSpan)> {
        let mut derivs = vec![0u8; k.arity];
        let mut primes = 0;
        while *self.peek() == TokenKind::Prime {
            self.bump();
            primes += 1;
        }
        if primes > 0 {
            if k.arity != 1 {
                return syntax(format!("primes need a unary kernel; use {}^(..)", k.name), self.prev_span());
            }
            derivs[0] = primes;
        } else if *self.peek() == TokenKind::Caret {
            self.bump();
            let open = self.expect(TokenKind::LParen)?;
            let mut counts = Vec::new();
            loop {
                match self.peek().clone() {
                    TokenKind::Number(s) if !s.contains('.') => {
                        let n: u8 = s.parse().map_err(|_| ParseError {
                            kind: ParseErrorKind::Syntax("derivative count too large".into()),
                            span: self.span(),
                        })?;
                        counts.push(n);
                        self.bump();
                    }
                    other => return syntax(format!("expected a derivative count, found {}", describe(&other)), self.span()),
                }
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
            let close = self.expect(TokenKind::RParen)?;
            if counts.len() != k.arity {
                return err(
                    ParseErrorKind::Arity { name: k.name.clone(), expected: k.arity, got: counts.len() },
                    open.join(&close),
                );
            }
            derivs = counts;
        }
        if *self.peek() != TokenKind::LParen {
            return syntax(format!("kernel `{}` must be applied to arguments", k.name), sp);
        }
        let (args, asp) = self.args(ctx)?;
        let full = sp.join(&asp);
        if args.len() != k.arity {
            return err(ParseErrorKind::Arity { name: k.name.clone(), expected: k.arity, got: args.len() }, asp);
        }
        if k.rule.is_some() && derivs.iter().any(|d| *d > 0) {
            // Rule kernels are differentiated through their rule.
            let mut e = Expr::fn_app(FnApp {
                name: Arc::from(k.name.as_str()),
                args: vec![Expr::slot(1)],
                derivs: vec![0],
                rule: k.rule.clone(),
            });
            for _ in 0..derivs[0] {
                e = e.diff(&Atom::Sym(Symbol::slot(1)));
            }
            return Ok((lift(e.substitute_slots(&args), full)?, full));
        }
        let app = FnApp { name: Arc::from(k.name.as_str()), args, derivs, rule: k.rule.clone() };
        Ok((Expr::fn_app(app), full))
    }

    // ---- statements ----

    fn declare(&mut self, name: &str, sp: SourceSpan) -> Result<()> {
        if self.header.is_declared(name) {
            return err(ParseErrorKind::Duplicate(name.to_string()), sp);
        }
        Ok(())
    }

    fn name_list(&mut self) -> Result<Vec<(String, SourceSpan)>> {
        let mut out = vec![self.ident()?];
        while self.eat(&TokenKind::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn declaration(&mut self, kw: &str) -> Result<()> {
        for (n, sp) in self.name_list()? {
            self.declare(&n, sp)?;
            let h = &mut *self.header;
            match kw {
                "indep" => h.indep.push(n),
                "dep" => h.dep.push(n),
                "param" => h.params.push(n),
                _ => h.consts.push(n),
            }
        }
        Ok(())
    }

    fn kernels(&mut self) -> Result<()> {
        loop {
            let (name, sp) = self.ident()?;
            self.declare(&name, sp)?;
            self.expect(TokenKind::Slash)?;
            let arity = match self.peek().clone() {
                TokenKind::Number(s) if !s.contains('.') => {
                    let sp = self.bump().span;
                    s.parse::<usize>()
                        .ok()
                        .filter(|n| *n >= 1)
                        .ok_or(ParseError { kind: ParseErrorKind::Syntax("arity must be a positive integer".into()), span: sp })?
                }
                other => return syntax(format!("expected an arity, found {}", describe(&other)), self.span()),
            };
            let mut rule = None;
            if self.eat(&TokenKind::Eq) {
                let (r, rsp) = self.expr(Ctx { slots: true, basis: false })?;
                if arity != 1 {
                    return err(ParseErrorKind::Invalid("derivative rules are only supported for unary kernels".into()), rsp);
                }
                rule = Some(r);
            }
            self.header.kernels.push(KernelDecl { name, arity, rule });
            if !self.eat(&TokenKind::Comma) {
                return Ok(());
            }
        }
    }

    fn field(&mut self) -> Result<FieldDef> {
        let (e, sp) = self.expr(Ctx { basis: true, slots: false })?;
        let is_basis = |a: &Atom| matches!(a, Atom::Sym(s) if s.kind == SymKind::Basis);
        let parts = e
            .split_by(&is_basis)
            .map_err(|m| ParseError { kind: ParseErrorKind::Invalid(m), span: sp })?;
        let mut coeffs: Vec<(String, Expr)> = Vec::new();
        for (key, coeff) in parts {
            let name = match key.factors() {
                [(Atom::Sym(s), 1)] => s.name.to_string(),
                _ => {
                    return err(
                        ParseErrorKind::Invalid("every field term must be linear in exactly one basis vector".into()),
                        sp,
                    )
                }
            };
            coeffs.push((name, coeff));
        }
        let order: Vec<&String> = self.header.indep.iter().chain(&self.header.dep).collect();
        coeffs.sort_by_key(|(n, _)| order.iter().position(|o| *o == n));
        Ok(FieldDef { coeffs })
    }

    fn block_entries(&mut self, mut entry: impl FnMut(&mut Self, String, SourceSpan) -> Result<()>) -> Result<SourceSpan> {
        self.expect(TokenKind::LBrace)?;
        loop {
            self.skip_newlines();
            if *self.peek() == TokenKind::RBrace {
                return Ok(self.bump().span);
            }
            let (kw, sp) = self.ident()?;
            entry(self, kw, sp)?;
            if *self.peek() != TokenKind::RBrace {
                self.end_of_statement()?;
            }
        }
    }

    fn require_var(&self, name: &str, sp: SourceSpan, dep: bool) -> Result<()> {
        let list = if dep { &self.header.dep } else { &self.header.indep };
        if list.iter().any(|v| v == name) {
            return Ok(());
        }
        if self.header.is_declared(name) {
            let what = if dep { "a dependent" } else { "an independent" };
            return err(ParseErrorKind::Invalid(format!("`{name}` is not {what} variable")), sp);
        }
        err(ParseErrorKind::Undeclared(name.to_string()), sp)
    }

    fn ansatz(&mut self) -> Result<AnsatzDef> {
        let mut old = Vec::new();
        let mut new = Vec::new();
        let mut dep: Option<(String, Expr)> = None;
        let mut inverse = Vec::new();
        let close = self.block_entries(|p, kw, sp| {
            match kw.as_str() {
                "old" => {
                    for (n, nsp) in p.name_list()? {
                        p.require_var(&n, nsp, false)?;
                        old.push(n);
                    }
                }
                "new" | "inverse" | "dep" => {
                    let (n, nsp) = p.ident()?;
                    p.require_var(&n, nsp, kw == "dep")?;
                    p.expect(TokenKind::Eq)?;
                    let (e, _) = p.expr(Ctx::default())?;
                    match kw.as_str() {
                        "new" => new.push((n, e)),
                        "inverse" => inverse.push((n, e)),
                        _ => {
                            if dep.is_some() {
                                return err(ParseErrorKind::Duplicate("dep".into()), sp);
                            }
                            dep = Some((n, e));
                        }
                    }
                }
                other => return syntax(format!("unknown ansatz entry `{other}`"), sp),
            }
            Ok(())
        })?;
        let dep = dep.ok_or(ParseError {
            kind: ParseErrorKind::Invalid("ansatz needs a `dep` entry".into()),
            span: close,
        })?;
        Ok(AnsatzDef { old, new, dep, inverse })
    }

    fn solution(&mut self) -> Result<SolutionDef> {
        let mut value: Option<(String, Expr)> = None;
        let mut require = Vec::new();
        let mut singular = Vec::new();
        let mut source = None;
        let close = self.block_entries(|p, kw, sp| {
            match kw.as_str() {
                "require" | "singular" => loop {
                    let (e, _) = p.expr(Ctx::default())?;
                    if kw == "require" {
                        require.push(e);
                    } else {
                        singular.push(e);
                    }
                    if !p.eat(&TokenKind::Comma) {
                        break;
                    }
                },
                "source" => match p.peek().clone() {
                    TokenKind::Str(s) => {
                        p.bump();
                        source = Some(s);
                    }
                    other => return syntax(format!("expected a string, found {}", describe(&other)), p.span()),
                },
                name => {
                    p.require_var(name, sp, true)?;
                    if value.is_some() {
                        return err(ParseErrorKind::Duplicate(name.to_string()), sp);
                    }
                    p.expect(TokenKind::Eq)?;
                    let (e, _) = p.expr(Ctx::default())?;
                    value = Some((name.to_string(), e));
                }
            }
            Ok(())
        })?;
        let (dep, value) = value.ok_or(ParseError {
            kind: ParseErrorKind::Invalid("solution needs a `<dep> = <expr>` entry".into()),
            span: close,
        })?;
        Ok(SolutionDef { dep, value, require, singular, source })
    }

    fn document(&mut self) -> Result<Vec<Item>> {
        let mut items: Vec<Item> = Vec::new();
        let mut names: HashSet<String> = HashSet::new();
        loop {
            self.skip_newlines();
            if *self.peek() == TokenKind::Eof {
                return Ok(items);
            }
            let (kw, kw_span) = self.ident()?;
            match kw.as_str() {
                "indep" | "dep" | "param" | "const" => self.declaration(&kw)?,
                "kernel" => self.kernels()?,
                "equation" | "field" | "ansatz" | "solution" => {
                    let (name, nsp) = self.ident()?;
                    if !names.insert(name.clone()) {
                        return err(ParseErrorKind::Duplicate(name), nsp);
                    }
                    let kind = match kw.as_str() {
                        "equation" => {
                            self.expect(TokenKind::Colon)?;
                            let (l, _) = self.expr(Ctx::default())?;
                            self.expect(TokenKind::Eq)?;
                            let (r, _) = self.expr(Ctx::default())?;
                            ItemKind::Equation(l.sub(&r))
                        }
                        "field" => {
                            self.expect(TokenKind::Eq)?;
                            ItemKind::Field(self.field()?)
                        }
                        "ansatz" => ItemKind::Ansatz(self.ansatz()?),
                        _ => ItemKind::Solution(self.solution()?),
                    };
                    let span = kw_span.join(&self.prev_span());
                    items.push(Item { name, kind, span });
                }
                other => return syntax(format!("expected a declaration or item, found `{other}`"), kw_span),
            }
            self.end_of_statement()?;
        }
    }
}

/// Parses a complete `.lie` document.
pub fn parse(text: &str) -> Result<Document> {
    let toks = tokenize(text)?;
    let mut header = Header::default();
    let items = Parser { toks, pos: 0, header: &mut header }.document()?;
    Ok(Document { header, items })
}

/// Parses a single expression against an existing header.
pub fn parse_expr_in(header: &Header, text: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut h = header.clone();
    let mut p = Parser { toks, pos: 0, header: &mut h };
    let (e, _) = p.expr(Ctx::default())?;
    p.skip_newlines();
    if *p.peek() != TokenKind::Eof {
        if starts_primary(p.peek()) {
            return syntax("implicit multiplication is not allowed; write `*`", p.span());
        }
        return syntax(format!("unexpected {}", describe(p.peek())), p.span());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "indep x, y, z, t\ndep u\nparam a, b, c, d\nkernel lam/1, gam/2\n";

    #[test]
    fn cbs_equation_parses() {
        let src = format!(
            "{HEAD}equation cbs: d(u,x,t) + a*u_x*u_xy + b*u_y*u_xx + c*u_x*u_xz + d*u_z*u_xx + u_xxxy + u_xxxz = 0\n"
        );
        let doc = parse(&src).unwrap();
        let e = doc.equation("cbs").unwrap();
        assert_eq!(e.num().len(), 7);
    }

    #[test]
    fn field_with_kernels() {
        let src = format!(
            "{HEAD}field v5 = lam(t)*Dx + Dz + (lam'(t)*y/b + gam((b*z-d*y)/b, t))*Du\n"
        );
        let doc = parse(&src).unwrap();
        let f = doc.field("v5").unwrap();
        let names: Vec<&str> = f.coeffs.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["x", "z", "u"]);
    }

    #[test]
    fn empty_body() {
        let doc = parse(HEAD).unwrap();
        assert!(doc.items.is_empty());
        assert_eq!(doc.header.kernels.len(), 2);
    }

    #[test]
    fn rejects_implicit_multiplication() {
        let e = parse(&format!("{HEAD}equation e: a u_x = 0\n")).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        let bad = &format!("{HEAD}equation e: a u_x = 0\n")[e.span.begin..e.span.end];
        assert_eq!(bad, "u_x");
    }

    #[test]
    fn error_kinds() {
        let e = parse(&format!("{HEAD}equation e: q*u = 0\n")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Undeclared("q".into()));
        let e = parse(&format!("{HEAD}equation e: gam(x) = 0\n")).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Arity { expected: 2, got: 1, .. }));
        let e = parse(&format!("{HEAD}equation e: a_x = 0\n")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::JetOnNonDependent("a".into()));
        let e = parse(&format!("{HEAD}equation e: 1/(x-x) = 0\n")).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Expr(ExprError::DegenerateDivision));
    }

    #[test]
    fn precedence() {
        let h = parse(HEAD).unwrap().header;
        let e = parse_expr_in(&h, "-x^2").unwrap();
        assert_eq!(e, Expr::var("x").pow_int(2).unwrap().neg());
        let e = parse_expr_in(&h, "2/3").unwrap();
        assert_eq!(e, Expr::frac(2, 3));
        let e = parse_expr_in(&h, "x^(-2)*x^2 + 0.5").unwrap();
        assert_eq!(e, Expr::frac(3, 2));
    }
}
