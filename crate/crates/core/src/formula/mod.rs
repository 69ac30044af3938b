//! Formulas, operator tables, and the S-expression surface syntax.
//!
//! A [`Formula`] is an immutable, reference-counted tree. Structural equality
//! is the identity used for hash-consing in a [`FormulaStore`], which keeps
//! one graph vertex per distinct formula.

mod parse;
mod store;

pub use parse::{parse, parse_template, ParseError};
pub use store::{FormulaStore, ATOM_KEY, FORMULA_LABEL, OPERAND_KEY, OPERAND_LABEL, OP_KEY};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Atom(Arc<str>),
    Compound { op: Arc<str>, operands: Vec<Formula> },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(Arc<Node>);

impl Formula {
    pub fn atom(name: impl AsRef<str>) -> Self {
        Formula(Arc::new(Node::Atom(Arc::from(name.as_ref()))))
    }

    pub fn compound(op: impl AsRef<str>, operands: Vec<Formula>) -> Self {
        Formula(Arc::new(Node::Compound {
            op: Arc::from(op.as_ref()),
            operands,
        }))
    }

    pub fn binary(op: impl AsRef<str>, left: Formula, right: Formula) -> Self {
        Self::compound(op, vec![left, right])
    }

    pub fn unary(op: impl AsRef<str>, operand: Formula) -> Self {
        Self::compound(op, vec![operand])
    }

    pub fn is_atom(&self) -> bool {
        matches!(*self.0, Node::Atom(_))
    }

    pub fn atom_name(&self) -> Option<&str> {
        match &*self.0 {
            Node::Atom(name) => Some(name),
            Node::Compound { .. } => None,
        }
    }

    /// Principal operator of a compound formula.
    pub fn op(&self) -> Option<&str> {
        match &*self.0 {
            Node::Atom(_) => None,
            Node::Compound { op, .. } => Some(op),
        }
    }

    /// The principal operator, or the atom's own name for atoms. Used for
    /// `operator=` constraints so constants such as `bot` can be selected.
    pub fn head(&self) -> &str {
        match &*self.0 {
            Node::Atom(name) => name,
            Node::Compound { op, .. } => op,
        }
    }

    pub fn operands(&self) -> &[Formula] {
        match &*self.0 {
            Node::Atom(_) => &[],
            Node::Compound { operands, .. } => operands,
        }
    }

    /// The `index`-th operand, counting from 1.
    pub fn operand(&self, index: usize) -> Option<&Formula> {
        index.checked_sub(1).and_then(|i| self.operands().get(i))
    }

    /// Number of nodes in the formula tree (shared subterms counted every time).
    pub fn size(&self) -> usize {
        1 + self.operands().iter().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        self.operands().iter().map(Formula::depth).max().map_or(0, |d| d + 1)
    }

    /// Reflexive-transitive operand closure.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.insert(self.clone()) {
            for o in self.operands() {
                o.collect_subformulas(out);
            }
        }
    }

    pub fn is_subformula_of(&self, other: &Formula) -> bool {
        self == other || other.operands().iter().any(|o| self.is_subformula_of(o))
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| f.atom_name().map(str::to_string))
            .collect()
    }

    /// Template metavariables (`?name` atoms).
    pub fn metavariables(&self) -> BTreeSet<String> {
        self.atoms().into_iter().filter(|a| a.starts_with('?')).collect()
    }

    /// Uniform substitution of atoms, leaving unmapped atoms alone.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Formula>) -> Formula {
        match &*self.0 {
            Node::Atom(name) => map(name).unwrap_or_else(|| self.clone()),
            Node::Compound { op, operands } => {
                Formula::compound(op.as_ref(), operands.iter().map(|o| o.substitute(map)).collect())
            }
        }
    }

    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s);
        s
    }

    fn write_sexpr(&self, out: &mut String) {
        match &*self.0 {
            Node::Atom(name) => out.push_str(name),
            Node::Compound { op, operands } => {
                out.push('(');
                out.push_str(op);
                for o in operands {
                    out.push(' ');
                    o.write_sexpr(out);
                }
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub symbol: String,
    pub arity: usize,
    pub infix: bool,
    /// Glyph used by the infix renderer.
    pub display: String,
}

/// A named nullary symbol such as falsum. Constants are written like atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    pub display: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Sexpr,
    Infix,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorTable {
    operators: Vec<Operator>,
    constants: Vec<Constant>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("operator `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("operator `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("`{0}` is not a valid operator symbol")]
    BadSymbol(String),
}

impl OperatorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_operator(mut self, symbol: &str, arity: usize, infix: bool, display: &str) -> Result<Self, TableError> {
        self.add_operator(Operator {
            symbol: symbol.into(),
            arity,
            infix,
            display: display.into(),
        })?;
        Ok(self)
    }

    pub fn with_constant(mut self, name: &str, display: &str) -> Result<Self, TableError> {
        self.add_constant(Constant {
            name: name.into(),
            display: display.into(),
        })?;
        Ok(self)
    }

    pub fn add_operator(&mut self, op: Operator) -> Result<(), TableError> {
        if op.arity == 0 {
            return Err(TableError::ZeroArity(op.symbol));
        }
        if op.symbol.is_empty() || op.symbol.chars().any(|c| c.is_whitespace() || c == '(' || c == ')') {
            return Err(TableError::BadSymbol(op.symbol));
        }
        if self.is_symbol(&op.symbol) {
            return Err(TableError::DuplicateSymbol(op.symbol));
        }
        self.operators.push(op);
        Ok(())
    }

    pub fn add_constant(&mut self, c: Constant) -> Result<(), TableError> {
        if !parse::is_atom_lexeme(&c.name) {
            return Err(TableError::BadSymbol(c.name));
        }
        if self.is_symbol(&c.name) {
            return Err(TableError::DuplicateSymbol(c.name));
        }
        self.constants.push(c);
        Ok(())
    }

    fn is_symbol(&self, s: &str) -> bool {
        self.operators.iter().any(|o| o.symbol == s) || self.constants.iter().any(|c| c.name == s)
    }

    pub fn operator(&self, symbol: &str) -> Option<&Operator> {
        self.operators.iter().find(|o| o.symbol == symbol)
    }

    pub fn constant(&self, name: &str) -> Option<&Constant> {
        self.constants.iter().find(|c| c.name == name)
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.operator(symbol).map(|o| o.arity)
    }

    /// Checks that every compound uses a known operator at its declared arity.
    pub fn check(&self, f: &Formula) -> Result<(), ParseError> {
        match f.op() {
            None => {
                let name = f.atom_name().expect("atom");
                if self.operator(name).is_some() {
                    return Err(ParseError::UnknownOperator { symbol: name.into() });
                }
                Ok(())
            }
            Some(op) => {
                let expected = self
                    .arity(op)
                    .ok_or_else(|| ParseError::UnknownOperator { symbol: op.into() })?;
                if expected != f.operands().len() {
                    return Err(ParseError::Arity {
                        op: op.into(),
                        expected,
                        got: f.operands().len(),
                    });
                }
                f.operands().iter().try_for_each(|o| self.check(o))
            }
        }
    }

    pub fn parse(&self, input: &str) -> Result<Formula, ParseError> {
        parse(self, input)
    }

    pub fn render(&self, f: &Formula, style: RenderStyle) -> String {
        match style {
            RenderStyle::Sexpr => f.to_sexpr(),
            RenderStyle::Infix => {
                let mut out = String::new();
                self.write_infix(f, &mut out);
                out
            }
        }
    }

    fn write_infix(&self, f: &Formula, out: &mut String) {
        if let Some(name) = f.atom_name() {
            match self.constant(name) {
                Some(c) => out.push_str(&c.display),
                None => out.push_str(name),
            }
            return;
        }
        let op = f.op().expect("compound");
        let (glyph, infix) = self.operator(op).map_or((op, false), |o| (o.display.as_str(), o.infix));
        let operands = f.operands();
        match operands {
            [l, r] if infix => {
                out.push('(');
                self.write_infix(l, out);
                out.push(' ');
                out.push_str(glyph);
                out.push(' ');
                self.write_infix(r, out);
                out.push(')');
            }
            [x] => {
                out.push_str(glyph);
                self.write_infix(x, out);
            }
            _ => {
                out.push_str(glyph);
                out.push('(');
                for (i, o) in operands.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.write_infix(o, out);
                }
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn table() -> OperatorTable {
        OperatorTable::new()
            .with_operator("->", 2, true, "→")
            .unwrap()
            .with_operator("and", 2, true, "∧")
            .unwrap()
            .with_operator("or", 2, true, "∨")
            .unwrap()
            .with_operator("box", 1, false, "☐")
            .unwrap()
            .with_constant("bot", "⊥")
            .unwrap()
    }

    fn a() -> Formula {
        Formula::atom("A")
    }
    fn b() -> Formula {
        Formula::atom("B")
    }
    fn c() -> Formula {
        Formula::atom("C")
    }

    #[test]
    fn subformulas_of_implication() {
        let ab = Formula::binary("and", a(), b());
        let f = Formula::binary("->", ab.clone(), c());
        let expected: BTreeSet<Formula> = [a(), b(), c(), ab, f.clone()].into_iter().collect();
        assert_eq!(f.subformulas(), expected);
        assert_eq!(a().subformulas(), [a()].into_iter().collect());
    }

    #[test]
    fn goal_of_worked_example_has_eight_subformulas() {
        let t = table();
        let goal = t.parse("(-> (-> (and A B) C) (-> B (-> A C)))").unwrap();
        assert_eq!(goal.subformulas().len(), 8);
        assert!(goal.subformulas().len() <= goal.size());
    }

    #[test]
    fn rendering() {
        let t = table();
        let ab = Formula::binary("and", a(), b());
        assert_eq!(t.render(&ab, RenderStyle::Sexpr), "(and A B)");
        assert_eq!(t.render(&ab, RenderStyle::Infix), "(A ∧ B)");
        let nested = t.parse("(-> (box (-> A bot)) A)").unwrap();
        assert_eq!(t.render(&nested, RenderStyle::Infix), "(☐(A → ⊥) → A)");
    }

    #[test]
    fn table_rejects_bad_declarations() {
        let t = table();
        assert_eq!(
            t.clone().with_operator("and", 2, true, "&").unwrap_err(),
            TableError::DuplicateSymbol("and".into())
        );
        assert_eq!(
            t.with_operator("top", 0, false, "⊤").unwrap_err(),
            TableError::ZeroArity("top".into())
        );
    }

    #[test]
    fn substitution_replaces_metavariables() {
        let t = table();
        let schema = parse_template(&t, "(-> ?a (-> ?b ?a))").unwrap();
        assert_eq!(
            schema.metavariables(),
            ["?a".to_string(), "?b".to_string()].into_iter().collect()
        );
        let inst = schema.substitute(&|name| match name {
            "?a" => Some(Formula::atom("p")),
            "?b" => Some(Formula::binary("->", Formula::atom("p"), Formula::atom("p"))),
            _ => None,
        });
        assert_eq!(inst.to_sexpr(), "(-> p (-> (-> p p) p))");
    }
}
