use thiserror::Error;

use super::{Expr, Func};

/// Parse failure; `position` is a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("variable x{index} at position {position} is out of range for dimension {dim}")]
    VariableOutOfRange {
        position: usize,
        index: usize,
        dim: usize,
    },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::VariableOutOfRange { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Int(u32),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn next(&mut self) -> Result<(usize, Token), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((start, Token::End));
        };
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            self.pos += 1;
            return Ok((start, tok));
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((start, Token::Ident(rest[..len].to_string())));
        }
        Err(ParseError::Syntax {
            position: start,
            message: format!("unexpected character {c:?}"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(usize, Token), ParseError> {
        let bytes = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let int_digits = digits(&mut i);
        let mut is_int = true;
        if i < bytes.len() && bytes[i] == b'.' {
            is_int = false;
            i += 1;
            let frac = digits(&mut i);
            if int_digits + frac == 0 {
                return Err(ParseError::Syntax {
                    position: start,
                    message: "malformed number".into(),
                });
            }
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let exp_start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_start {
                is_int = false;
                i = j;
            }
        }
        let text = &self.src[start..i];
        self.pos = i;
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            position: start,
            message: format!("malformed number {text:?}"),
        })?;
        if !value.is_finite() {
            return Err(ParseError::Syntax {
                position: start,
                message: format!("number {text:?} is out of range"),
            });
        }
        if is_int {
            if let Ok(k) = text.parse::<u32>() {
                return Ok((start, Token::Int(k)));
            }
        }
        Ok((start, Token::Num(value)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Token),
    dim: usize,
    depth: usize,
}

// Nesting beyond this is rejected rather than risking stack exhaustion.
const MAX_DEPTH: usize = 1024;
const MAX_EXPONENT: u32 = 1024;

/// Parses `text` as an expression over the variables `x0 … x{dim-1}`.
pub fn parse(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let peeked = lexer.next()?;
    let mut p = Parser {
        lexer,
        peeked,
        dim,
        depth: 0,
    };
    let e = p.sum()?;
    match &p.peeked {
        (_, Token::End) => Ok(e),
        (pos, tok) => Err(ParseError::Syntax {
            position: *pos,
            message: format!("unexpected {tok:?} after expression"),
        }),
    }
}

impl Parser<'_> {
    fn bump(&mut self) -> Result<(usize, Token), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::Syntax {
                position: self.peeked.0,
                message: "expression nested too deeply".into(),
            });
        }
        Ok(())
    }

    // Each operator appended to a left-deep chain deepens the tree by one, so
    // chains count against the same depth budget as nesting.
    fn sum(&mut self) -> Result<Expr, ParseError> {
        let base = self.depth;
        let mut acc = self.product()?;
        loop {
            let add = match self.peeked.1 {
                Token::Plus => true,
                Token::Minus => false,
                _ => break,
            };
            self.bump()?;
            self.enter()?;
            let rhs = self.product()?;
            acc = Expr::new(if add {
                super::Node::Add(acc, rhs)
            } else {
                super::Node::Sub(acc, rhs)
            });
        }
        self.depth = base;
        Ok(acc)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let base = self.depth;
        let mut acc = self.unary()?;
        loop {
            let mul = match self.peeked.1 {
                Token::Star => true,
                Token::Slash => false,
                _ => break,
            };
            self.bump()?;
            self.enter()?;
            let rhs = self.unary()?;
            acc = Expr::new(if mul {
                super::Node::Mul(acc, rhs)
            } else {
                super::Node::Div(acc, rhs)
            });
        }
        self.depth = base;
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peeked.1 == Token::Minus {
            self.bump()?;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::new(super::Node::Neg(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.depth;
        let mut acc = self.atom()?;
        while self.peeked.1 == Token::Caret {
            self.bump()?;
            self.enter()?;
            match self.bump()? {
                (_, Token::Int(k)) if k <= MAX_EXPONENT => {
                    acc = Expr::new(super::Node::Pow(acc, k))
                }
                (pos, tok) => {
                    return Err(ParseError::Syntax {
                        position: pos,
                        message: format!(
                            "exponent must be an integer literal in 0..={MAX_EXPONENT}, found {tok:?}"
                        ),
                    })
                }
            }
        }
        self.depth = base;
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = self.bump()?;
        match tok {
            Token::Num(v) => Ok(Expr::num(v)),
            Token::Int(k) => Ok(Expr::num(k as f64)),
            Token::LParen => {
                self.enter()?;
                let inner = self.sum()?;
                self.depth -= 1;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => self.identifier(pos, name),
            Token::End => Err(ParseError::Syntax {
                position: pos,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                position: pos,
                message: format!("unexpected {other:?}"),
            }),
        }
    }

    fn identifier(&mut self, pos: usize, name: String) -> Result<Expr, ParseError> {
        let func = match name.as_str() {
            "pi" => return Ok(Expr::pi()),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        };
        if let Some(func) = func {
            match self.bump()? {
                (_, Token::LParen) => {}
                (p, _) => {
                    return Err(ParseError::Syntax {
                        position: p,
                        message: format!("expected '(' after {name}"),
                    })
                }
            }
            self.enter()?;
            let arg = self.sum()?;
            self.depth -= 1;
            self.expect_rparen()?;
            return Ok(Expr::call(func, arg));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index >= self.dim {
                    return Err(ParseError::VariableOutOfRange {
                        position: pos,
                        index,
                        dim: self.dim,
                    });
                }
                return Ok(Expr::var(index));
            }
        }
        Err(ParseError::UnknownIdentifier {
            position: pos,
            name,
        })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.bump()? {
            (_, Token::RParen) => Ok(()),
            (pos, tok) => Err(ParseError::Syntax {
                position: pos,
                message: format!("expected ')', found {tok:?}"),
            }),
        }
    }
}
