//! Recursive-descent parser for the formula syntax documented in the parent module.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{Coalition, Comparison, Formula};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {position}: {message}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Slash,
    Comma,
    Star,
    OpenCoop,
    CloseCoop,
    OpenDual,
    CloseDual,
    Cmp(Comparison),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Star => f.write_str("`*`"),
            Tok::OpenCoop => f.write_str("`<<`"),
            Tok::CloseCoop => f.write_str("`>>`"),
            Tok::OpenDual => f.write_str("`[[`"),
            Tok::CloseDual => f.write_str("`]]`"),
            Tok::Cmp(c) => write!(f, "`{c}`"),
        }
    }
}

fn err(position: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        position,
        message: message.into(),
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let two = |s: &[u8]| bytes[i..].starts_with(s);
        let (tok, len) = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'{' => (Tok::LBrace, 1),
            b'}' => (Tok::RBrace, 1),
            b'!' => (Tok::Bang, 1),
            b'&' => (Tok::Amp, 1),
            b'|' => (Tok::Pipe, 1),
            b'/' => (Tok::Slash, 1),
            b',' => (Tok::Comma, 1),
            b'*' => (Tok::Star, 1),
            b'-' if two(b"->") => (Tok::Arrow, 2),
            b'<' if two(b"<<") => (Tok::OpenCoop, 2),
            b'<' if two(b"<=") => (Tok::Cmp(Comparison::Le), 2),
            b'<' => (Tok::Cmp(Comparison::Lt), 1),
            b'>' if two(b">>") => (Tok::CloseCoop, 2),
            b'>' if two(b">=") => (Tok::Cmp(Comparison::Ge), 2),
            b'>' => (Tok::Cmp(Comparison::Gt), 1),
            b'[' if two(b"[[") => (Tok::OpenDual, 2),
            b']' if two(b"]]") => (Tok::CloseDual, 2),
            b'0'..=b'9' => {
                let end = i + bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
                if bytes.get(end) == Some(&b'.') {
                    return Err(err(i, "decimal numbers are not accepted, write thresholds as num/den"));
                }
                let is_ident = bytes
                    .get(end)
                    .is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_');
                if is_ident {
                    let end = i + ident_len(&bytes[i..]);
                    (Tok::Ident(input[i..end].to_string()), end - i)
                } else {
                    (Tok::Number(input[i..end].to_string()), end - i)
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let end = i + ident_len(&bytes[i..]);
                (Tok::Ident(input[i..end].to_string()), end - i)
            }
            _ => {
                let ch = input[i..].chars().next().unwrap_or('?');
                return Err(err(i, format!("unexpected character `{ch}`")));
            }
        };
        out.push((i, tok));
        i += len;
    }
    Ok(out)
}

fn ident_len(bytes: &[u8]) -> usize {
    bytes
        .iter()
        .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_' || **b == b'.')
        .count()
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {tok}")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(t) => err(self.offset(), format!("{what}, found {t}")),
            None => err(self.offset(), format!("{what}, found end of input")),
        }
    }

    fn keyword(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.until()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.keyword() == Some("U") {
            self.pos += 1;
            let rhs = self.until()?;
            return Ok(lhs.until(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(Tok::OpenCoop) | Some(Tok::OpenDual) => self.modality(),
            Some(Tok::Ident(k)) if k == "X" || k == "F" || k == "G" => {
                let k = k.clone();
                self.pos += 1;
                let inner = self.unary()?;
                Ok(match k.as_str() {
                    "X" => inner.next(),
                    "F" => inner.eventually(),
                    _ => inner.always(),
                })
            }
            _ => self.primary(),
        }
    }

    fn modality(&mut self) -> Result<Formula, ParseError> {
        let dual = matches!(self.bump(), Some(Tok::OpenDual));
        let close = if dual { Tok::CloseDual } else { Tok::CloseCoop };
        let coalition = if self.eat(&Tok::Star) {
            Coalition::Grand
        } else {
            let mut names = BTreeSet::new();
            if self.peek() != Some(&close) {
                loop {
                    let at = self.offset();
                    match self.bump() {
                        Some(Tok::Ident(s)) | Some(Tok::Number(s)) => {
                            if !names.insert(s.clone()) {
                                return Err(err(at, format!("agent `{s}` listed twice")));
                            }
                        }
                        _ => {
                            self.pos -= 1;
                            return Err(self.unexpected("expected agent name"));
                        }
                    }
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            Coalition::Agents(names)
        };
        self.expect(close)?;
        self.expect(Tok::LBrace)?;
        let cmp = match self.bump() {
            Some(Tok::Cmp(c)) => c,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("expected one of `<=`, `<`, `>`, `>=`"));
            }
        };
        let at = self.offset();
        let threshold = self.rational()?;
        if !threshold.is_probability() {
            return Err(err(at, format!("threshold {threshold} is outside [0,1]")));
        }
        self.expect(Tok::RBrace)?;
        let path = self.unary()?;
        Ok(if dual {
            Formula::dual(coalition, cmp, threshold, path)
        } else {
            Formula::strategic(coalition, cmp, threshold, path)
        })
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let at = self.offset();
        let Some(Tok::Number(num)) = self.bump() else {
            self.pos -= 1;
            return Err(self.unexpected("expected a rational threshold"));
        };
        let text = if self.eat(&Tok::Slash) {
            match self.bump() {
                Some(Tok::Number(den)) => format!("{num}/{den}"),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("expected a denominator"));
                }
            }
        } else {
            num
        };
        text.parse().map_err(|e| err(at, format!("{e}")))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::LParen) => {
                let f = self.implies()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(s)) => match s.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::True.not()),
                "U" => Err(err(at, "`U` needs a left operand")),
                _ => Ok(Formula::Atom(s)),
            },
            Some(_) => {
                self.pos -= 1;
                Err(self.unexpected("expected a formula"))
            }
            None => Err(err(at, "unexpected end of input, expected a formula")),
        }
    }
}

/// Parses one formula. Names are not resolved here; binding against a model
/// happens in the checker.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.implies()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected("expected end of formula"));
    }
    Ok(f)
}

/// Parses a formula file: one formula per line, `#` starts a comment line,
/// blank lines are skipped. Errors carry the 1-based line number.
pub fn parse_formula_lines(text: &str) -> Result<Vec<(usize, Formula)>, (usize, ParseError)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_formula(l).map(|f| (i + 1, f)).map_err(|e| (i + 1, e)))
        .collect()
}
