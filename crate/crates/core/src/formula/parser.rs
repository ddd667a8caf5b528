//! Recursive-descent parser for the formula syntax.
//!
//! Binding strength, tightest first: `!` and modalities, `&`, `|`, `->`,
//! `<->`. Both arrows associate to the right.

use super::{Exponent, Formula, FormulaError, Modality};

const MAX_EXPONENT: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    Dia(Modality),
    Box(Modality),
    Caret,
    Eq,
    DotDot,
    BigAnd,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, message: String| FormulaError::Parse { pos, message };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            _ if c.is_whitespace() => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '!' | '~' => {
                out.push((start, Tok::Not));
                i += 1;
            }
            '&' => {
                out.push((start, Tok::And));
                i += 1;
            }
            '|' => {
                out.push((start, Tok::Or));
                i += 1;
            }
            '(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            '^' => {
                out.push((start, Tok::Caret));
                i += 1;
            }
            '=' => {
                out.push((start, Tok::Eq));
                i += 1;
            }
            '.' if src[i..].starts_with("..") => {
                out.push((start, Tok::DotDot));
                i += 2;
            }
            '-' if src[i..].starts_with("->") => {
                out.push((start, Tok::Implies));
                i += 2;
            }
            '<' if src[i..].starts_with("<->") => {
                out.push((start, Tok::Iff));
                i += 3;
            }
            '<' | '[' => {
                let close = if c == '<' { '>' } else { ']' };
                let end = src[i + 1..].find(close).ok_or_else(|| err(start, format!("unclosed `{c}`")))?;
                let name = src[i + 1..i + 1 + end].trim();
                let m = Modality::from_name(name).ok_or_else(|| err(start, format!("unknown modality `{name}`")))?;
                out.push((start, if c == '<' { Tok::Dia(m) } else { Tok::Box(m) }));
                i += end + 2;
            }
            _ if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Num(src[start..i].to_string())));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &src[start..i];
                out.push((start, if word == "AND" { Tok::BigAnd } else { Tok::Ident(word.to_string()) }));
            }
            _ => return Err(err(start, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    bound: Vec<String>,
}

/// Parses a formula in concrete syntax.
pub fn parse(src: &str) -> Result<Formula, FormulaError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len(), bound: Vec::new() };
    let f = p.iff()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, message: &str) -> FormulaError {
        FormulaError::Parse { pos: self.offset(), message: message.to_string() }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), FormulaError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.implies()?;
        if self.eat(&Tok::Iff) {
            return Ok(Formula::iff(lhs, self.iff()?));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            return Ok(Formula::implies(lhs, self.implies()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn number(&mut self) -> Result<u32, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                match n.parse::<u64>() {
                    Ok(v) if v <= MAX_EXPONENT && v <= u32::MAX as u64 => Ok(v as u32),
                    _ => Err(FormulaError::Overflow(n)),
                }
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Dia(m)) | Some(Tok::Box(m)) => {
                let boxed = matches!(self.peek(), Some(Tok::Box(_)));
                self.pos += 1;
                let exponent = if self.eat(&Tok::Caret) {
                    Some(match self.peek().cloned() {
                        Some(Tok::Ident(v)) => {
                            if !self.bound.contains(&v) {
                                return Err(FormulaError::UnboundIndex(v));
                            }
                            self.pos += 1;
                            Exponent::Var(v)
                        }
                        _ => Exponent::Lit(self.number()?),
                    })
                } else {
                    None
                };
                let body = Box::new(self.unary()?);
                Ok(match exponent {
                    None if boxed => Formula::Boxed(m, body),
                    None => Formula::Diamond(m, body),
                    Some(exponent) => Formula::Power { modality: m, boxed, exponent, body },
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::Ident(w)) => {
                self.pos += 1;
                Ok(match w.as_str() {
                    "T" => Formula::Top,
                    "F" => Formula::Bottom,
                    _ => Formula::Prop(w),
                })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::BigAnd) => {
                self.pos += 1;
                let var = match self.peek().cloned() {
                    Some(Tok::Ident(v)) => {
                        self.pos += 1;
                        v
                    }
                    _ => return Err(self.error("expected an index variable")),
                };
                self.expect(&Tok::Eq, "`=`")?;
                let lo = self.number()?;
                self.expect(&Tok::DotDot, "`..`")?;
                let hi = self.number()?;
                if lo > hi {
                    return Err(FormulaError::EmptyRange { lo, hi });
                }
                self.expect(&Tok::LParen, "`(`")?;
                self.bound.push(var.clone());
                let body = self.iff();
                self.bound.pop();
                let body = Box::new(body?);
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Formula::BigAnd { var, lo, hi, body })
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}
