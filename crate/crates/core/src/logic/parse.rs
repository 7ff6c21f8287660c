//! Recursive-descent parser for the text grammar.
//!
//! ```text
//! formula := disj ("->" formula)?
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "!" unary | ("exists" | "forall") ident ("," ident)* "." formula
//!          | "(" formula ")" | "true" | "false" | atom
//! atom    := term ("=" | "!=" | "<") term | ident "(" term ("," term)* ")"
//! term    := "#" digits | ident | ident "(" term ("," term)* ")"
//! ```
//!
//! A free identifier is a constant when the signature declares it. Without a
//! signature, names starting with `u`..`z` are variables and all others constants.

use super::{Formula, LogicError, Result, Signature, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Param(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Arrow,
    Bang,
    Eq,
    Neq,
    Lt,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier {s:?}"),
        Tok::Param(k) => format!("parameter #{k}"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'=' => Tok::Eq,
            b'<' => Tok::Lt,
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            b'!' => Tok::Bang,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'#' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let k = text[i + 1..j]
                    .parse()
                    .map_err(|_| LogicError::Parse { offset: start, message: "expected parameter index after '#'".into() })?;
                i = j;
                out.push((Tok::Param(k), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'\'') {
                    j += 1;
                }
                out.push((Tok::Ident(text[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(LogicError::Parse { offset: start, message: format!("unexpected character {ch:?}") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: Option<&'a Signature>,
    bound: Vec<String>,
}

const KEYWORDS: [&str; 4] = ["exists", "forall", "true", "false"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        Err(LogicError::Parse {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(what)
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disj()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Tok::Ident(k) if k == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(k) if k == "exists" || k == "forall" => {
                self.bump();
                let mut vars = vec![self.binder()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    vars.push(self.binder()?);
                }
                self.expect(Tok::Dot, "'.'")?;
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let body = self.formula();
                self.bound.truncate(depth);
                let body = body?;
                Ok(vars.iter().rev().fold(body, |acc, v| {
                    if k == "exists" {
                        Formula::exists(v, acc)
                    } else {
                        Formula::forall(v, acc)
                    }
                }))
            }
            _ => self.atom(),
        }
    }

    fn binder(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(v) if !KEYWORDS.contains(&v.as_str()) => {
                self.bump();
                Ok(v)
            }
            _ => self.error("a variable"),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let (lhs, had_args) = self.term_or_application()?;
        let op = self.peek().clone();
        match op {
            Tok::Eq | Tok::Neq | Tok::Lt => {
                self.bump();
                let lhs = self.as_term(lhs)?;
                let (rhs, _) = self.term_or_application()?;
                let rhs = self.as_term(rhs)?;
                Ok(match op {
                    Tok::Eq => Formula::Eq(lhs, rhs),
                    Tok::Neq => Formula::not(Formula::Eq(lhs, rhs)),
                    _ => {
                        self.check_relation("<", 2)?;
                        Formula::Rel("<".into(), vec![lhs, rhs])
                    }
                })
            }
            _ => match lhs {
                Term::App(r, args) if had_args => {
                    self.check_relation(&r, args.len())?;
                    Ok(Formula::Rel(r, args))
                }
                _ => self.error("'=', '!=' or '<' after a term"),
            },
        }
    }

    fn check_relation(&self, name: &str, arity: usize) -> Result<()> {
        if let Some(sig) = self.sig {
            let i = sig.relation(name).ok_or_else(|| LogicError::UnknownSymbol(name.to_string()))?;
            if sig.relations[i].1 != arity {
                return Err(LogicError::Arity { symbol: name.to_string(), expected: sig.relations[i].1, got: arity });
            }
        }
        Ok(())
    }

    /// A term whose head application has not yet been classified as function or relation.
    fn term_or_application(&mut self) -> Result<(Term, bool)> {
        match self.peek().clone() {
            Tok::Param(k) => {
                self.bump();
                Ok((Term::Param(k), false))
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "')' or ','")?;
                    Ok((Term::App(name, args), true))
                } else {
                    Ok((self.classify(name), false))
                }
            }
            _ => self.error("a term"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let (t, _) = self.term_or_application()?;
        self.as_term(t)
    }

    /// Validates a head application as a function term against the signature.
    fn as_term(&self, t: Term) -> Result<Term> {
        if let (Term::App(f, args), Some(sig)) = (&t, self.sig) {
            let i = sig.function(f).ok_or_else(|| LogicError::UnknownSymbol(f.clone()))?;
            if sig.functions[i].1 != args.len() {
                return Err(LogicError::Arity { symbol: f.clone(), expected: sig.functions[i].1, got: args.len() });
            }
        }
        Ok(t)
    }

    fn classify(&self, name: String) -> Term {
        if self.bound.contains(&name) {
            return Term::Var(name);
        }
        let is_const = match self.sig {
            Some(sig) => sig.constant(&name).is_some(),
            None => !matches!(name.as_bytes()[0], b'u'..=b'z'),
        };
        if is_const {
            Term::Const(name)
        } else {
            Term::Var(name)
        }
    }
}

/// Parses without a signature (naming convention decides variables vs constants).
pub fn parse(text: &str) -> Result<Formula> {
    parse_inner(text, None)
}

/// Parses and checks every symbol against `sig`.
pub fn parse_with(text: &str, sig: &Signature) -> Result<Formula> {
    let f = parse_inner(text, Some(sig))?;
    f.check_signature(sig)?;
    Ok(f)
}

fn parse_inner(text: &str, sig: Option<&Signature>) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0, sig, bound: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.error("end of input");
    }
    Ok(f)
}
