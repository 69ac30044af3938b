//! Reader for the call-style notation shared by system files, relative
//! formula references and tactics:
//!
//! ```text
//! -- comment to end of line
//! Rule(name = "impI",
//!      args = ["implication" =: Identity(operator=->)],
//!      branches = [NewBranch(goal = SubOf(operand=2), newHypotheses = [SubOf(operand=1)])])
//! ```

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arg {
    pub key: Option<String>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Call {
        name: String,
        args: Vec<Arg>,
    },
    List(Vec<Expr>),
    Str(String),
    Int(i64),
    Word(String),
    /// `"name" =: value`
    Named(String, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    /// Views the expression as a call; a bare word is a call with no arguments.
    pub fn as_call(&self) -> Option<(&str, &[Arg])> {
        match &self.kind {
            ExprKind::Call { name, args } => Some((name, args)),
            ExprKind::Word(name) => Some((name, &[])),
            _ => None,
        }
    }

    /// A word or a string, e.g. an operator symbol or a rule name.
    pub fn as_text(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Word(w) | ExprKind::Str(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.kind {
            ExprKind::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.as_text() {
            Some("true") => Some(true),
            Some("false") => Some(false),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Expr]> {
        match &self.kind {
            ExprKind::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.pos, message)
    }
}

/// Keyword arguments of a call, with helpers that report misuse at the
/// right position.
pub struct Args<'a> {
    call: &'a str,
    pos: Pos,
    args: &'a [Arg],
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    pub fn new(call: &'a str, pos: Pos, args: &'a [Arg]) -> Self {
        Args {
            call,
            pos,
            args,
            used: vec![false; args.len()],
        }
    }

    /// The `index`-th positional argument, or the keyword argument `key`.
    pub fn get(&mut self, index: Option<usize>, key: &str) -> Option<&'a Expr> {
        if let Some(i) = self.args.iter().position(|a| a.key.as_deref() == Some(key)) {
            self.used[i] = true;
            return Some(&self.args[i].value);
        }
        let i = index?;
        let (n, _) = self.args.iter().enumerate().filter(|(_, a)| a.key.is_none()).nth(i)?;
        self.used[n] = true;
        Some(&self.args[n].value)
    }

    pub fn require(&mut self, index: Option<usize>, key: &str) -> Result<&'a Expr, SyntaxError> {
        self.get(index, key)
            .ok_or_else(|| SyntaxError::new(self.pos, format!("{} needs `{key}`", self.call)))
    }

    pub fn text(&mut self, index: Option<usize>, key: &str) -> Result<Option<&'a str>, SyntaxError> {
        match self.get(index, key) {
            None => Ok(None),
            Some(e) => e
                .as_text()
                .map(Some)
                .ok_or_else(|| e.error(format!("`{key}` must be a name or string"))),
        }
    }

    pub fn int(&mut self, index: Option<usize>, key: &str) -> Result<Option<i64>, SyntaxError> {
        match self.get(index, key) {
            None => Ok(None),
            Some(e) => e
                .as_int()
                .map(Some)
                .ok_or_else(|| e.error(format!("`{key}` must be an integer"))),
        }
    }

    pub fn bool(&mut self, key: &str) -> Result<Option<bool>, SyntaxError> {
        match self.get(None, key) {
            None => Ok(None),
            Some(e) => e
                .as_bool()
                .map(Some)
                .ok_or_else(|| e.error(format!("`{key}` must be true or false"))),
        }
    }

    pub fn list(&mut self, key: &str) -> Result<&'a [Expr], SyntaxError> {
        match self.get(None, key) {
            None => Ok(&[]),
            Some(e) => e.as_list().ok_or_else(|| e.error(format!("`{key}` must be a list"))),
        }
    }

    /// Fails on any argument no getter asked for.
    pub fn finish(self) -> Result<(), SyntaxError> {
        for (a, used) in self.args.iter().zip(&self.used) {
            if !used {
                let what = match &a.key {
                    Some(k) => format!("unexpected argument `{k}`"),
                    None => "unexpected positional argument".to_string(),
                };
                return Err(a.value.error(format!("{}: {what}", self.call)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Bind,
    Str(String),
    Word(String),
}

fn is_word_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ',' | '=' | '"'))
}

fn lex(input: &str) -> Result<Vec<(Pos, Tok)>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            let mut n = 0;
            while i + n < chars.len() && chars[i + n] != '\n' {
                n += 1;
            }
            advance(n, &mut i);
            continue;
        }
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((pos, tok));
            advance(1, &mut i);
            continue;
        }
        if c == '=' {
            if chars.get(i + 1) == Some(&':') {
                out.push((pos, Tok::Bind));
                advance(2, &mut i);
            } else {
                out.push((pos, Tok::Eq));
                advance(1, &mut i);
            }
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            let mut n = 1;
            loop {
                match chars.get(i + n) {
                    None | Some('\n') => return Err(SyntaxError::new(pos, "unterminated string")),
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(i + n + 1) {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            _ => return Err(SyntaxError::new(pos, "bad escape in string")),
                        }
                        n += 2;
                    }
                    Some(ch) => {
                        s.push(*ch);
                        n += 1;
                    }
                }
            }
            out.push((pos, Tok::Str(s)));
            advance(n + 1, &mut i);
            continue;
        }
        let mut n = 0;
        while i + n < chars.len() && is_word_char(chars[i + n]) {
            n += 1;
        }
        out.push((pos, Tok::Word(chars[i..i + n].iter().collect())));
        advance(n, &mut i);
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Pos, Tok)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<(Pos, Tok)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.pos();
        let Some((_, tok)) = self.bump() else {
            return Err(SyntaxError::new(pos, "unexpected end of input"));
        };
        let base = match tok {
            Tok::Str(s) => Expr {
                kind: ExprKind::Str(s),
                pos,
            },
            Tok::Word(w) => {
                if self.peek() == Some(&Tok::Open) {
                    self.bump();
                    let args = self.call_args()?;
                    Expr {
                        kind: ExprKind::Call { name: w, args },
                        pos,
                    }
                } else if let Ok(n) = w.parse::<i64>() {
                    Expr {
                        kind: ExprKind::Int(n),
                        pos,
                    }
                } else {
                    Expr {
                        kind: ExprKind::Word(w),
                        pos,
                    }
                }
            }
            Tok::LBracket => {
                let mut items = Vec::new();
                loop {
                    if self.peek() == Some(&Tok::RBracket) {
                        self.bump();
                        break;
                    }
                    items.push(self.expr()?);
                    match self.peek() {
                        Some(Tok::Comma) => {
                            self.bump();
                        }
                        Some(Tok::RBracket) => {}
                        _ => return Err(SyntaxError::new(self.pos(), "expected `,` or `]`")),
                    }
                }
                Expr {
                    kind: ExprKind::List(items),
                    pos,
                }
            }
            other => return Err(SyntaxError::new(pos, format!("unexpected {}", describe(&other)))),
        };
        if self.peek() == Some(&Tok::Bind) {
            self.bump();
            let name = match base.kind {
                ExprKind::Str(s) | ExprKind::Word(s) => s,
                _ => return Err(SyntaxError::new(pos, "only a name may precede `=:`")),
            };
            let value = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Named(name, Box::new(value)),
                pos,
            });
        }
        Ok(base)
    }

    fn call_args(&mut self) -> Result<Vec<Arg>, SyntaxError> {
        let mut args = Vec::new();
        loop {
            if self.peek() == Some(&Tok::Close) {
                self.bump();
                return Ok(args);
            }
            let keyed = matches!(
                (self.toks.get(self.at), self.toks.get(self.at + 1)),
                (Some((_, Tok::Word(_))), Some((_, Tok::Eq)))
            );
            if keyed {
                let Some((_, Tok::Word(key))) = self.bump() else {
                    unreachable!()
                };
                self.bump();
                let value = self.expr()?;
                args.push(Arg { key: Some(key), value });
            } else {
                let value = self.expr()?;
                args.push(Arg { key: None, value });
            }
            match self.peek() {
                Some(Tok::Comma) => {
                    self.bump();
                }
                Some(Tok::Close) => {}
                _ => return Err(SyntaxError::new(self.pos(), "expected `,` or `)`")),
            }
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Eq => "`=`".into(),
        Tok::Bind => "`=:`".into(),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Word(w) => format!("`{w}`"),
    }
}

fn end_pos(input: &str) -> Pos {
    let line = input.matches('\n').count() + 1;
    let col = input.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, col }
}

/// Reads a sequence of top-level expressions.
pub fn parse_items(input: &str) -> Result<Vec<Expr>, SyntaxError> {
    let mut p = Parser {
        toks: lex(input)?,
        at: 0,
        end: end_pos(input),
    };
    let mut items = Vec::new();
    while p.peek().is_some() {
        items.push(p.expr()?);
    }
    Ok(items)
}

/// Reads exactly one expression.
pub fn parse_expr(input: &str) -> Result<Expr, SyntaxError> {
    let mut items = parse_items(input)?;
    match items.len() {
        1 => Ok(items.pop().expect("one item")),
        0 => Err(SyntaxError::new(end_pos(input), "empty input")),
        _ => Err(items[1].error("expected a single expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_the_implication_rule() {
        let text = r#"
-- anything after two hyphens is a comment
Rule(args = ["implication" =: Identity(operator=->)],
     branches = [NewBranch(goal = SubOf(operand=2), -- goal is y
                           newHypotheses = [SubOf(operand=1)])])
"#;
        let items = parse_items(text).unwrap();
        assert_eq!(items.len(), 1);
        let (name, args) = items[0].as_call().unwrap();
        assert_eq!(name, "Rule");
        assert_eq!(args.len(), 2);
        assert_eq!(args[0].key.as_deref(), Some("args"));
        let list = args[0].value.as_list().unwrap();
        let ExprKind::Named(arg, spec) = &list[0].kind else {
            panic!("expected a named argument")
        };
        assert_eq!(arg, "implication");
        let (ctor, sargs) = spec.as_call().unwrap();
        assert_eq!(ctor, "Identity");
        assert_eq!(sargs[0].key.as_deref(), Some("operator"));
        assert_eq!(sargs[0].value.as_text(), Some("->"));
        assert_eq!(items[0].pos, Pos { line: 3, col: 1 });
    }

    #[test]
    fn scalars() {
        let e = parse_expr(r#"F(1, -2, true, "a \"q\"", x, [])"#).unwrap();
        let (_, args) = e.as_call().unwrap();
        assert_eq!(args[0].value.as_int(), Some(1));
        assert_eq!(args[1].value.as_int(), Some(-2));
        assert_eq!(args[2].value.as_bool(), Some(true));
        assert_eq!(args[3].value.as_text(), Some("a \"q\""));
        assert_eq!(args[4].value.as_call().map(|c| c.0), Some("x"));
        assert_eq!(args[5].value.as_list().map(<[Expr]>::len), Some(0));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_items("Rule(a = 1,\n  b = )").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 7 });
        assert!(parse_items("F(\"open").is_err());
        assert!(parse_expr("A B").is_err());
        assert!(parse_expr("F(x y)").is_err());
    }

    #[test]
    fn args_helper_reports_unused() {
        let e = parse_expr("Rule(name = \"x\", bogus = 3)").unwrap();
        let (name, args) = e.as_call().unwrap();
        let mut a = Args::new(name, e.pos, args);
        assert_eq!(a.text(None, "name").unwrap(), Some("x"));
        assert!(a.finish().unwrap_err().message.contains("bogus"));
    }
}
