//! Germ file reader.
//!
//! A germ file is TOML:
//!
//! ```toml
//! name = "zw-4-2"                      # optional
//! source_dim = 4
//! variables = ["x1", "x2", "x3", "x4"]
//! components = ["x1*x3 - x2*x4", "x1*x4 + x2*x3"]
//!
//! [flags]                              # optional
//! isolated_critical_point = true
//! isolated_critical_value = true
//! ```
//!
//! Component strings use the grammar
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | power
//! power  := atom ['^' integer]
//! atom   := number | variable | '(' expr ')'
//! number := digits ['.' digits]          (read exactly, 0.25 == 1/4)
//! ```
//!
//! Division is only allowed by a nonzero constant, so `3/2*x` and `x/4` are
//! fine while `1/x` is rejected.

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Deserialize;

use super::{GermError, GermFlags, MapGerm, Polynomial};

/// Parse failure inside one polynomial string; `offset` is a byte offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            d if d.is_ascii_digit() || d == '.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &src[start..i];
                let mut frac_part = "";
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_part = &src[fs..i];
                }
                if int_part.is_empty() && frac_part.is_empty() {
                    return Err(ExprError {
                        offset: start,
                        message: "malformed number".into(),
                    });
                }
                let digits = format!("{int_part}{frac_part}");
                let num: BigInt = digits.parse().map_err(|_| ExprError {
                    offset: start,
                    message: "malformed number".into(),
                })?;
                let den = BigInt::from(10u32).pow(frac_part.len() as u32);
                out.push((Tok::Num(BigRational::new(num, den)), start));
                continue;
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(ExprError {
                    offset: start,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Polynomial, ExprError> {
        let n = self.vars.len();
        let mut acc = match self.peek() {
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                -&self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        debug_assert_eq!(acc.num_vars(), n);
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let d = self.unary()?;
                    match d.as_constant() {
                        Some(c) if !c.is_zero() => acc = acc.scale(&c.recip()),
                        Some(_) => {
                            return Err(ExprError {
                                offset: at,
                                message: "division by zero".into(),
                            })
                        }
                        None => {
                            return Err(ExprError {
                                offset: at,
                                message: "division is only allowed by a constant".into(),
                            })
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, ExprError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            match self.toks.get(self.pos) {
                Some((Tok::Num(k), _)) if k.is_integer() => {
                    let k = k.to_integer();
                    let k: u32 = k.try_into().map_err(|_| ExprError {
                        offset: at,
                        message: "exponent too large".into(),
                    })?;
                    self.pos += 1;
                    return Ok(base.pow(k));
                }
                _ => return self.err("expected a non-negative integer exponent after '^'"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ExprError> {
        let n = self.vars.len();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(c), _)) => {
                self.pos += 1;
                Ok(Polynomial::constant(n, c))
            }
            Some((Tok::Ident(name), off)) => {
                self.pos += 1;
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Polynomial::var(n, i)),
                    None => Err(ExprError {
                        offset: off,
                        message: format!("unknown variable '{name}'"),
                    }),
                }
            }
            Some((Tok::LParen, _)) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.err("expected ')'"),
                }
            }
            Some(_) => self.err("expected a number, variable or '('"),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses one polynomial string over the named variables.
pub fn parse_polynomial(src: &str, vars: &[String]) -> Result<Polynomial, ExprError> {
    let toks = tokenize(src)?;
    let mut p = ExprParser {
        toks,
        pos: 0,
        end: src.len(),
        vars,
    };
    if p.toks.is_empty() {
        return p.err("empty expression");
    }
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(poly)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGerm {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    description: Option<String>,
    source_dim: toml::Spanned<i64>,
    variables: toml::Spanned<Vec<String>>,
    components: toml::Spanned<Vec<toml::Spanned<String>>>,
    #[serde(default)]
    flags: GermFlags,
}

/// 1-based line and column of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before
        .rfind('\n')
        .map_or(before.chars().count(), |nl| before[nl + 1..].chars().count())
        + 1;
    (line, col)
}

fn syntax_at(text: &str, offset: usize, message: impl Into<String>) -> GermError {
    let (line, column) = line_col(text, offset);
    GermError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

// Offset of the first content byte of a TOML string whose span starts at `span`.
fn string_content_start(text: &str, span: &Range<usize>) -> usize {
    let rest = &text[span.start..];
    if rest.starts_with("\"\"\"") || rest.starts_with("'''") {
        span.start + 3
    } else {
        span.start + 1
    }
}

/// Reads a germ file, returning an exact [`MapGerm`].
pub fn parse_germ(text: &str) -> Result<MapGerm, GermError> {
    let raw: RawGerm = toml::from_str(text).map_err(|e| {
        let off = e.span().map(|s| s.start).unwrap_or(0);
        syntax_at(text, off, e.message().trim().to_string())
    })?;

    let m_span = raw.source_dim.span();
    let m = *raw.source_dim.get_ref();
    if m < 1 {
        return Err(syntax_at(text, m_span.start, "source_dim must be positive"));
    }
    let m = m as usize;

    let vars_span = raw.variables.span();
    let vars = raw.variables.into_inner();
    if vars.len() != m {
        return Err(GermError::VariableCount {
            expected: m,
            found: vars.len(),
        });
    }
    for (i, v) in vars.iter().enumerate() {
        let valid = v
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(syntax_at(
                text,
                vars_span.start,
                format!("invalid variable name '{v}'"),
            ));
        }
        if vars[..i].contains(v) {
            return Err(syntax_at(
                text,
                vars_span.start,
                format!("duplicate variable name '{v}'"),
            ));
        }
    }

    let comps_span = raw.components.span();
    let mut components = Vec::new();
    let mut origins = Vec::new();
    for spanned in raw.components.into_inner() {
        let span = spanned.span();
        let start = string_content_start(text, &span);
        let src = spanned.into_inner();
        let poly = parse_polynomial(&src, &vars)
            .map_err(|e| syntax_at(text, start + e.offset, e.message))?;
        components.push(poly);
        origins.push(start);
    }
    if components.is_empty() {
        return Err(syntax_at(text, comps_span.start, "no components given"));
    }
    for (i, p) in components.iter().enumerate() {
        if !p.constant_term().is_zero() {
            let (line, column) = line_col(text, origins[i]);
            return Err(GermError::ConstantTerm {
                component: i + 1,
                line,
                column,
            });
        }
    }
    let mut germ = MapGerm::with_variables(m, components, raw.flags, vars)?;
    germ.name = raw.name;
    germ.description = raw.description;
    Ok(germ)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn decimals_are_exact() {
        let v = names(&["x"]);
        let a = parse_polynomial("0.25*x", &v).unwrap();
        let b = parse_polynomial("x/4", &v).unwrap();
        let c = parse_polynomial("1/4*x", &v).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let v = names(&["x", "y"]);
        let a = parse_polynomial("-x^2 + 2*x*y - (y)^2", &v).unwrap();
        let b = parse_polynomial("-(x - y)^2", &v).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn division_by_variable_rejected() {
        let v = names(&["x"]);
        let err = parse_polynomial("1/x", &v).unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn unknown_variable_offset() {
        let v = names(&["x", "y"]);
        let err = parse_polynomial("x + 3*w", &v).unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(err.message.contains("'w'"));
    }

    #[test]
    fn line_col_counts_from_one() {
        let t = "ab\ncd\nef";
        assert_eq!(line_col(t, 0), (1, 1));
        assert_eq!(line_col(t, 4), (2, 2));
        assert_eq!(line_col(t, 6), (3, 1));
    }
}
