//! S-expression reader: `expr := atom | "(" opsym expr+ ")"`.

use super::{Formula, OperatorTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown operator `{symbol}`")]
    UnknownOperator { symbol: String },
    #[error("operator `{op}` expects {expected} operand(s), got {got}")]
    Arity { op: String, expected: usize, got: usize },
    #[error("`{token}` is not a valid atom")]
    InvalidAtom { token: String },
}

impl ParseError {
    /// Stable error name used in API error bodies.
    pub fn name(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::UnknownOperator { .. } => "UnknownOperator",
            ParseError::Arity { .. } => "ArityError",
            ParseError::InvalidAtom { .. } => "InvalidAtom",
        }
    }
}

pub(crate) fn is_atom_lexeme(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn is_metavariable(s: &str) -> bool {
    s.strip_prefix('?')
        .is_some_and(|rest| rest.split('.').all(is_atom_lexeme))
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Word(&'a str),
}

fn tokenize(input: &str) -> Vec<(usize, Token<'_>)> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push((i, Token::Open));
                chars.next();
            }
            ')' => {
                out.push((i, Token::Close));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let start = i;
                let mut end = input.len();
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' {
                        end = j;
                        break;
                    }
                    chars.next();
                }
                out.push((start, Token::Word(&input[start..end])));
            }
        }
    }
    out
}

struct Reader<'a, 't> {
    table: &'t OperatorTable,
    tokens: Vec<(usize, Token<'a>)>,
    pos: usize,
    len: usize,
    templates: bool,
}

impl<'a> Reader<'a, '_> {
    fn expr(&mut self) -> Result<Formula, ParseError> {
        let Some((at, tok)) = self.tokens.get(self.pos) else {
            return Err(ParseError::Syntax {
                position: self.len,
                message: "unexpected end of input".into(),
            });
        };
        let at = *at;
        self.pos += 1;
        match tok {
            Token::Close => Err(ParseError::Syntax {
                position: at,
                message: "unbalanced `)`".into(),
            }),
            Token::Word(w) => {
                let w = *w;
                if self.table.operator(w).is_some() {
                    return Err(ParseError::Syntax {
                        position: at,
                        message: format!("operator `{w}` used as an atom"),
                    });
                }
                if is_atom_lexeme(w) || (self.templates && is_metavariable(w)) {
                    Ok(Formula::atom(w))
                } else {
                    Err(ParseError::InvalidAtom { token: w.to_string() })
                }
            }
            Token::Open => {
                let op = match self.tokens.get(self.pos) {
                    Some((_, Token::Word(w))) => *w,
                    Some((p, _)) => {
                        return Err(ParseError::Syntax {
                            position: *p,
                            message: "expected an operator after `(`".into(),
                        })
                    }
                    None => {
                        return Err(ParseError::Syntax {
                            position: self.len,
                            message: "unbalanced `(`".into(),
                        })
                    }
                };
                self.pos += 1;
                let mut operands = Vec::new();
                loop {
                    match self.tokens.get(self.pos) {
                        Some((_, Token::Close)) => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => operands.push(self.expr()?),
                        None => {
                            return Err(ParseError::Syntax {
                                position: self.len,
                                message: format!("unbalanced `(` opened at byte {at}"),
                            })
                        }
                    }
                }
                let expected = self
                    .table
                    .arity(op)
                    .ok_or_else(|| ParseError::UnknownOperator { symbol: op.into() })?;
                if operands.is_empty() {
                    return Err(ParseError::Syntax {
                        position: at,
                        message: format!("operator `{op}` applied to nothing"),
                    });
                }
                if operands.len() != expected {
                    return Err(ParseError::Arity {
                        op: op.into(),
                        expected,
                        got: operands.len(),
                    });
                }
                Ok(Formula::compound(op, operands))
            }
        }
    }
}

fn read(table: &OperatorTable, input: &str, templates: bool) -> Result<Formula, ParseError> {
    let mut reader = Reader {
        table,
        tokens: tokenize(input),
        pos: 0,
        len: input.len(),
        templates,
    };
    let f = reader.expr()?;
    if let Some((at, _)) = reader.tokens.get(reader.pos) {
        return Err(ParseError::Syntax {
            position: *at,
            message: "trailing input".into(),
        });
    }
    Ok(f)
}

/// Parses a formula written in the table's S-expression syntax.
pub fn parse(table: &OperatorTable, input: &str) -> Result<Formula, ParseError> {
    read(table, input, false)
}

/// Like [`parse`], but also accepts `?name` metavariables.
pub fn parse_template(table: &OperatorTable, input: &str) -> Result<Formula, ParseError> {
    read(table, input, true)
}
