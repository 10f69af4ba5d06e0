use super::{ParseError, ParseErrorKind, Result, SourceSpan};

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    /// Integer or decimal literal, kept verbatim.
    Number(String),
    Str(String),
    Slot(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Prime,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eq,
    Neq,
    Newline,
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

/// A newline after one of these continues the statement.
fn continues(kind: &TokenKind) -> bool {
    use TokenKind::*;
    matches!(
        kind,
        Plus | Minus | Star | Slash | Caret | Comma | Colon | Eq | Neq | LBrace | Newline
    )
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out: Vec<Token> = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1u32, 0usize);
    let mut depth = 0i32;
    let span = |b: usize, e: usize, line: u32, ls: usize| SourceSpan { begin: b, end: e, line, col: (b - ls + 1) as u32 };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let kind = match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                continue;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            '\n' => {
                let sp = span(i, i + 1, line, line_start);
                i += 1;
                line += 1;
                line_start = i;
                let emit = depth == 0 && out.last().map_or(false, |t| !continues(&t.kind));
                if emit {
                    out.push(Token { kind: TokenKind::Newline, span: sp });
                }
                continue;
            }
            '+' => TokenKind::Plus,
            '-' => TokenKind::Minus,
            '*' => TokenKind::Star,
            '/' => TokenKind::Slash,
            '^' => TokenKind::Caret,
            '\'' => TokenKind::Prime,
            '(' => {
                depth += 1;
                TokenKind::LParen
            }
            ')' => {
                depth -= 1;
                TokenKind::RParen
            }
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            ',' => TokenKind::Comma,
            ':' => TokenKind::Colon,
            '=' => TokenKind::Eq,
            '!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                TokenKind::Neq
            }
            '"' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j] != b'"' && bytes[j] != b'\n' {
                    j += 1;
                }
                if j >= bytes.len() || bytes[j] != b'"' {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax("unterminated string".into()),
                        span: span(i, j, line, line_start),
                    });
                }
                let s = src[i + 1..j].to_string();
                i = j;
                TokenKind::Str(s)
            }
            '@' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: usize = src[i + 1..j].parse().map_err(|_| ParseError {
                    kind: ParseErrorKind::Syntax("expected slot number after `@`".into()),
                    span: span(i, j.max(i + 1), line, line_start),
                })?;
                if n == 0 {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax("slots are numbered from 1".into()),
                        span: span(i, j, line, line_start),
                    });
                }
                i = j - 1;
                TokenKind::Slot(n)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let s = src[i..j].to_string();
                i = j - 1;
                TokenKind::Number(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let s = src[i..j].to_string();
                i = j - 1;
                TokenKind::Ident(s)
            }
            _ => {
                let w = src[i..].chars().next().map_or(1, char::len_utf8);
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{}`", &src[i..i + w])),
                    span: span(i, i + w, line, line_start),
                });
            }
        };
        i += 1;
        out.push(Token { kind, span: span(start, i, line, line_start) });
    }
    // A line that opens with a binary operator continues the previous one.
    let mut i = 0;
    while i + 1 < out.len() {
        let leads = matches!(out[i + 1].kind, TokenKind::Plus | TokenKind::Minus | TokenKind::Star | TokenKind::Slash | TokenKind::Caret);
        if out[i].kind == TokenKind::Newline && leads {
            out.remove(i);
        } else {
            i += 1;
        }
    }
    let end = span(src.len(), src.len(), line, line_start);
    if !matches!(out.last().map(|t| &t.kind), None | Some(TokenKind::Newline)) {
        out.push(Token { kind: TokenKind::Newline, span: end });
    }
    out.push(Token { kind: TokenKind::Eof, span: end });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn newlines_inside_parens_and_after_operators_are_dropped() {
        let k = kinds("a = (x\n + y) +\n z\nb");
        let nl = k.iter().filter(|t| **t == TokenKind::Newline).count();
        assert_eq!(nl, 2);
    }

    #[test]
    fn leading_operator_continues_the_line() {
        let k = kinds("a = x\n  + y\nb");
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Newline).count(), 2);
    }

    #[test]
    fn spans_track_lines() {
        let toks = tokenize("x\n  yy").unwrap();
        let yy = toks.iter().find(|t| t.kind == TokenKind::Ident("yy".into())).unwrap();
        assert_eq!((yy.span.line, yy.span.col, yy.span.begin, yy.span.end), (2, 3, 4, 6));
    }

    #[test]
    fn bad_character_is_located() {
        let e = tokenize("x + $").unwrap_err();
        assert_eq!((e.span.begin, e.span.end), (4, 5));
    }
}
