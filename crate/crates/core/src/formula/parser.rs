use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    One,
    Zero,
    Inv,
    Neg,
    Delta,
    Box,
    Dia,
    And,
    Or,
    Imp,
    Coimp,
    Iff,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("atom `{name}`"),
            Token::End => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Token::One => "1",
            Token::Zero => "0",
            Token::Inv => "~",
            Token::Neg => "!",
            Token::Delta => "#",
            Token::Box => "[]",
            Token::Dia => "<>",
            Token::And => "&",
            Token::Or => "|",
            Token::Imp => "->",
            Token::Coimp => "-<",
            Token::Iff => "<->",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::Ident(_) | Token::End => "",
        }
    }

    /// Binding power and right-associativity of infix operators.
    fn infix(&self) -> Option<(u8, bool)> {
        match self {
            Token::Iff => Some((1, false)),
            Token::Imp => Some((2, true)),
            Token::Coimp => Some((3, true)),
            Token::Or => Some((4, false)),
            Token::And => Some((5, false)),
            _ => None,
        }
    }
}

fn tokenize(input: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &input[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Token::Iff, 3)
        } else if rest.starts_with("<>") {
            (Token::Dia, 2)
        } else if rest.starts_with("[]") {
            (Token::Box, 2)
        } else if rest.starts_with("->") {
            (Token::Imp, 2)
        } else if rest.starts_with("-<") {
            (Token::Coimp, 2)
        } else {
            match c {
                b'~' => (Token::Inv, 1),
                b'!' => (Token::Neg, 1),
                b'#' => (Token::Delta, 1),
                b'&' => (Token::And, 1),
                b'|' => (Token::Or, 1),
                b'(' => (Token::LParen, 1),
                b')' => (Token::RParen, 1),
                b'1' => (Token::One, 1),
                b'0' => (Token::Zero, 1),
                b'a'..=b'z' => {
                    let mut j = i + 1;
                    while j < bytes.len()
                        && (bytes[j].is_ascii_lowercase() || bytes[j].is_ascii_digit() || bytes[j] == b'_')
                    {
                        j += 1;
                    }
                    (Token::Ident(input[i..j].to_string()), j - i)
                }
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(ParseError {
                        position: start,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            }
        };
        out.push((start, tok));
        i += len;
    }
    out.push((input.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> ParseError {
        ParseError {
            position: self.offset(),
            message,
        }
    }

    fn expression(&mut self, min_bp: u8) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while let Some((bp, right_assoc)) = self.peek().infix() {
            if bp < min_bp {
                break;
            }
            let op = self.bump();
            let next_min = if right_assoc { bp } else { bp + 1 };
            let rhs = self.expression(next_min)?;
            lhs = match op {
                Token::Iff => Formula::iff(lhs, rhs),
                Token::Imp => Formula::imp(lhs, rhs),
                Token::Coimp => Formula::coimp(lhs, rhs),
                Token::Or => Formula::or(lhs, rhs),
                Token::And => Formula::and(lhs, rhs),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let tok = self.peek().clone();
        match tok {
            Token::Ident(name) => {
                self.bump();
                Ok(Formula::atom(&name))
            }
            Token::One => {
                self.bump();
                Ok(Formula::Top)
            }
            Token::Zero => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Token::Inv | Token::Neg | Token::Delta | Token::Box | Token::Dia => {
                self.bump();
                let sub = self.unary()?;
                Ok(match tok {
                    Token::Inv => Formula::inv(sub),
                    Token::Neg => Formula::neg(sub),
                    Token::Delta => Formula::delta(sub),
                    Token::Box => Formula::boxed(sub),
                    _ => Formula::dia(sub),
                })
            }
            Token::LParen => {
                self.bump();
                let inner = self.expression(0)?;
                if *self.peek() != Token::RParen {
                    return Err(self.error(format!("expected `)`, found {}", self.peek().describe())));
                }
                self.bump();
                Ok(inner)
            }
            other => Err(self.error(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses the ASCII formula grammar.
///
/// Precedence from loosest to tightest: `<->`, `->`, `-<`, `|`, `&`, then
/// the prefix operators. `->` and `-<` associate to the right.
pub fn parse(input: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.expression(0)?;
    if *parser.peek() != Token::End {
        return Err(parser.error(format!("unexpected {}", parser.peek().describe())));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::atom("p")
    }

    #[test]
    fn smallest_implication() {
        assert_eq!(parse("p -> p").unwrap(), Formula::imp(p(), p()));
    }

    #[test]
    fn running_example() {
        let f = parse("[]p -> ~<>~p").unwrap();
        assert_eq!(
            f,
            Formula::imp(Formula::boxed(p()), Formula::inv(Formula::dia(Formula::inv(p()))))
        );
    }

    #[test]
    fn dangling_connective_is_reported() {
        let err = parse("p & -> q").unwrap_err();
        assert_eq!(err.position, 4);
    }

    #[test]
    fn precedence_and_associativity() {
        let q = Formula::atom("q");
        let r = Formula::atom("r");
        assert_eq!(
            parse("p -> q -> r").unwrap(),
            Formula::imp(p(), Formula::imp(q.clone(), r.clone()))
        );
        assert_eq!(
            parse("p & q | r").unwrap(),
            Formula::or(Formula::and(p(), q.clone()), r.clone())
        );
        assert_eq!(
            parse("p <-> q -> r").unwrap(),
            Formula::iff(p(), Formula::imp(q.clone(), r.clone()))
        );
        assert_eq!(parse("p -< q | r").unwrap(), Formula::coimp(p(), Formula::or(q, r)));
        assert_eq!(
            parse("~[]#!p").unwrap(),
            Formula::inv(Formula::boxed(Formula::delta(Formula::neg(p()))))
        );
        assert_eq!(parse("1 & 0").unwrap(), Formula::and(Formula::Top, Formula::Bottom));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("").is_err());
        assert!(parse("(p").is_err());
        assert!(parse("p q").is_err());
        assert!(parse("P").is_err());
        assert!(parse("_top").is_err());
        assert_eq!(parse("p $ q").unwrap_err().position, 2);
    }
}
