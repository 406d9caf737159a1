//! Text grammar for formulas.
//!
//! ```text
//! or     := and ('|' and)*
//! and    := until ('&' until)*
//! until  := unary ('U' '[' int ',' int ']' until)?      (right-associative)
//! unary  := '!' unary | 'G' interval? unary | 'F' interval? unary | atom
//! atom   := 'T' | identifier | '(' or ')'
//! ```
//!
//! Precedence is `!` over the temporal operators over `&` over `|`. `G` and
//! `F` without a bracketed interval are unbounded; interval endpoints are
//! nonnegative integers counted in steps.

use super::atom::PredicateTable;
use super::formula::{Formula, Interval};
use super::StlError;

/// Parses `text` against the grammar, resolving predicate names in `table`.
/// The result round-trips through [`Formula`]'s `Display` implementation.
pub fn parse_formula(text: &str, table: &PredicateTable) -> Result<Formula, StlError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        table,
    };
    let f = p.parse_or()?;
    match p.peek() {
        None => Ok(f),
        Some(tok) => Err(StlError::Syntax {
            position: tok.pos,
            message: format!("unexpected `{}` after formula", tok.kind.describe()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    True,
    Ident(String),
    Int(usize),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    OpUntil,
    OpEventually,
    OpGlobally,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::True => "T".into(),
            TokenKind::Ident(s) => s.clone(),
            TokenKind::Int(n) => n.to_string(),
            TokenKind::Bang => "!".into(),
            TokenKind::Amp => "&".into(),
            TokenKind::Pipe => "|".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
            TokenKind::LBracket => "[".into(),
            TokenKind::RBracket => "]".into(),
            TokenKind::Comma => ",".into(),
            TokenKind::OpUntil => "U".into(),
            TokenKind::OpEventually => "F".into(),
            TokenKind::OpGlobally => "G".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, StlError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '!' => tokens.push(Token {
                kind: TokenKind::Bang,
                pos,
            }),
            '&' => tokens.push(Token {
                kind: TokenKind::Amp,
                pos,
            }),
            '|' => tokens.push(Token {
                kind: TokenKind::Pipe,
                pos,
            }),
            '(' => tokens.push(Token {
                kind: TokenKind::LParen,
                pos,
            }),
            ')' => tokens.push(Token {
                kind: TokenKind::RParen,
                pos,
            }),
            '[' => tokens.push(Token {
                kind: TokenKind::LBracket,
                pos,
            }),
            ']' => tokens.push(Token {
                kind: TokenKind::RBracket,
                pos,
            }),
            ',' => tokens.push(Token {
                kind: TokenKind::Comma,
                pos,
            }),
            '0'..='9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: usize = text[i..j].parse().map_err(|_| StlError::Syntax {
                    position: pos,
                    message: "integer too large".into(),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Int(n),
                    pos,
                });
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &text[i..j];
                let kind = match word {
                    "T" => TokenKind::True,
                    "U" => TokenKind::OpUntil,
                    "F" => TokenKind::OpEventually,
                    "G" => TokenKind::OpGlobally,
                    _ => TokenKind::Ident(word.to_string()),
                };
                tokens.push(Token { kind, pos });
                i = j;
                continue;
            }
            other => {
                return Err(StlError::Syntax {
                    position: pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    table: &'a PredicateTable,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> Result<(), StlError> {
        match self.next() {
            Some(tok) if &tok.kind == kind => Ok(()),
            Some(tok) => Err(StlError::Syntax {
                position: tok.pos,
                message: format!(
                    "expected `{}`, found `{}`",
                    kind.describe(),
                    tok.kind.describe()
                ),
            }),
            None => Err(StlError::Syntax {
                position: self.end_pos(),
                message: format!("expected `{}`, found end of input", kind.describe()),
            }),
        }
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map(|t| t.pos + 1).unwrap_or(0)
    }

    fn parse_or(&mut self) -> Result<Formula, StlError> {
        let mut f = self.parse_and()?;
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Pipe)) {
            self.next();
            let rhs = self.parse_and()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn parse_and(&mut self) -> Result<Formula, StlError> {
        let mut f = self.parse_until()?;
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Amp)) {
            self.next();
            let rhs = self.parse_until()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn parse_until(&mut self) -> Result<Formula, StlError> {
        let lhs = self.parse_unary()?;
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::OpUntil)) {
            self.next();
            let interval = self.parse_interval_required()?;
            let rhs = self.parse_until()?;
            return Ok(Formula::until(interval, lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Formula, StlError> {
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Bang) => {
                self.next();
                Ok(Formula::not(self.parse_unary()?))
            }
            Some(TokenKind::OpEventually) => {
                self.next();
                let interval = self.parse_interval_optional()?;
                Ok(Formula::eventually(interval, self.parse_unary()?))
            }
            Some(TokenKind::OpGlobally) => {
                self.next();
                let interval = self.parse_interval_optional()?;
                Ok(Formula::globally(interval, self.parse_unary()?))
            }
            _ => self.parse_atom(),
        }
    }

    fn parse_atom(&mut self) -> Result<Formula, StlError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::True,
                ..
            }) => Ok(Formula::True),
            Some(Token {
                kind: TokenKind::Ident(name),
                ..
            }) => {
                let atom = self
                    .table
                    .get(&name)
                    .ok_or(StlError::UnknownPredicate(name))?;
                Ok(Formula::pred(atom.clone()))
            }
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                let inner = self.parse_or()?;
                self.eat(&TokenKind::RParen)?;
                Ok(inner)
            }
            Some(tok) => Err(StlError::Syntax {
                position: tok.pos,
                message: format!("expected a formula, found `{}`", tok.kind.describe()),
            }),
            None => Err(StlError::Syntax {
                position: self.end_pos(),
                message: "expected a formula, found end of input".into(),
            }),
        }
    }

    fn parse_interval_required(&mut self) -> Result<Interval, StlError> {
        self.eat(&TokenKind::LBracket)?;
        self.parse_interval_body()
    }

    /// `F` / `G` may omit the interval, meaning unbounded `[0, inf)`.
    fn parse_interval_optional(&mut self) -> Result<Interval, StlError> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LBracket)) {
            self.next();
            self.parse_interval_body()
        } else {
            Ok(Interval::unbounded(0))
        }
    }

    fn parse_interval_body(&mut self) -> Result<Interval, StlError> {
        let lo = self.parse_int()?;
        self.eat(&TokenKind::Comma)?;
        let (hi, hi_pos) = match self.next() {
            Some(Token {
                kind: TokenKind::Int(n),
                pos,
            }) => (n, pos),
            Some(tok) => {
                return Err(StlError::Syntax {
                    position: tok.pos,
                    message: format!("expected integer, found `{}`", tok.kind.describe()),
                })
            }
            None => {
                return Err(StlError::Syntax {
                    position: self.end_pos(),
                    message: "expected integer, found end of input".into(),
                })
            }
        };
        self.eat(&TokenKind::RBracket)?;
        Interval::bounded(lo, hi).map_err(|_| StlError::Syntax {
            position: hi_pos,
            message: format!("interval bounds out of order: [{lo},{hi}]"),
        })
    }

    fn parse_int(&mut self) -> Result<usize, StlError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::Int(n),
                ..
            }) => Ok(n),
            Some(tok) => Err(StlError::Syntax {
                position: tok.pos,
                message: format!("expected integer, found `{}`", tok.kind.describe()),
            }),
            None => Err(StlError::Syntax {
                position: self.end_pos(),
                message: "expected integer, found end of input".into(),
            }),
        }
    }
}
