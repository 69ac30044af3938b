//! Relative formula references: composable functions from a frame formula to
//! a set of formulas, used to state rule arguments, branch goals and
//! introduced hypotheses.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::formula::Formula;
use crate::syntax::{Args, Expr, ExprKind, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RefSpec {
    Identity {
        operator: Option<String>,
        operand: Option<usize>,
    },
    SuperOf {
        operator: Option<String>,
        operand: Option<usize>,
    },
    SubOf {
        operator: Option<String>,
        operand: Option<usize>,
    },
    Both(Box<RefSpec>, Box<RefSpec>),
    And(Box<RefSpec>, Box<RefSpec>),
    That(Box<RefSpec>),
    Arg(String),
}

impl RefSpec {
    pub fn identity() -> Self {
        RefSpec::Identity {
            operator: None,
            operand: None,
        }
    }

    pub fn super_of() -> Self {
        RefSpec::SuperOf {
            operator: None,
            operand: None,
        }
    }

    pub fn sub_of() -> Self {
        RefSpec::SubOf {
            operator: None,
            operand: None,
        }
    }

    pub fn arg(name: impl Into<String>) -> Self {
        RefSpec::Arg(name.into())
    }

    pub fn both(a: RefSpec, b: RefSpec) -> Self {
        RefSpec::Both(Box::new(a), Box::new(b))
    }

    pub fn and(a: RefSpec, b: RefSpec) -> Self {
        RefSpec::And(Box::new(a), Box::new(b))
    }

    pub fn that(r: RefSpec) -> Self {
        RefSpec::That(Box::new(r))
    }

    /// Adds a principal-operator constraint to an atomic combinator.
    pub fn operator(mut self, op: impl Into<String>) -> Self {
        match &mut self {
            RefSpec::Identity { operator, .. }
            | RefSpec::SuperOf { operator, .. }
            | RefSpec::SubOf { operator, .. } => *operator = Some(op.into()),
            _ => panic!("operator constraint on a compound reference"),
        }
        self
    }

    /// Adds an operand index (1-based) to an atomic combinator.
    pub fn operand(mut self, index: usize) -> Self {
        match &mut self {
            RefSpec::Identity { operand, .. } | RefSpec::SuperOf { operand, .. } | RefSpec::SubOf { operand, .. } => {
                *operand = Some(index)
            }
            _ => panic!("operand index on a compound reference"),
        }
        self
    }

    /// Argument names referenced anywhere in the tree.
    pub fn arg_names(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_args(&mut out);
        out
    }

    fn collect_args<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            RefSpec::Arg(n) => {
                out.insert(n);
            }
            RefSpec::Both(a, b) | RefSpec::And(a, b) => {
                a.collect_args(out);
                b.collect_args(out);
            }
            RefSpec::That(r) => r.collect_args(out),
            _ => {}
        }
    }

    /// Operator symbols used in constraints.
    pub fn operators(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_operators(&mut out);
        out
    }

    fn collect_operators<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            RefSpec::Identity { operator, .. }
            | RefSpec::SuperOf { operator, .. }
            | RefSpec::SubOf { operator, .. } => out.extend(operator.as_deref()),
            RefSpec::Both(a, b) | RefSpec::And(a, b) => {
                a.collect_operators(out);
                b.collect_operators(out);
            }
            RefSpec::That(r) => r.collect_operators(out),
            RefSpec::Arg(_) => {}
        }
    }

    pub fn from_expr(e: &Expr) -> Result<RefSpec, SyntaxError> {
        if let ExprKind::Str(s) = &e.kind {
            return Err(e.error(format!("expected a formula reference, found string {s:?}")));
        }
        let (name, args) = e.as_call().ok_or_else(|| e.error("expected a formula reference"))?;
        let mut a = Args::new(name, e.pos, args);
        let spec = match name {
            "Identity" | "SuperOf" | "SubOf" => {
                let operator = a.text(None, "operator")?.map(str::to_string);
                let operand = match a.int(None, "operand")? {
                    None => None,
                    Some(n) if n >= 1 => Some(n as usize),
                    Some(_) => return Err(e.error("operand indices start at 1")),
                };
                match name {
                    "Identity" => RefSpec::Identity { operator, operand },
                    "SuperOf" => RefSpec::SuperOf { operator, operand },
                    _ => RefSpec::SubOf { operator, operand },
                }
            }
            "Both" | "And" => {
                let l = RefSpec::from_expr(a.require(Some(0), "left")?)?;
                let r = RefSpec::from_expr(a.require(Some(1), "right")?)?;
                if name == "Both" {
                    RefSpec::both(l, r)
                } else {
                    RefSpec::and(l, r)
                }
            }
            "That" => RefSpec::that(RefSpec::from_expr(a.require(Some(0), "ref")?)?),
            "Arg" => {
                let n = a
                    .text(Some(0), "name")?
                    .ok_or_else(|| e.error("Arg needs an argument name"))?;
                RefSpec::Arg(n.to_string())
            }
            other => return Err(e.error(format!("unknown formula reference `{other}`"))),
        };
        a.finish()?;
        Ok(spec)
    }

    pub fn parse(text: &str) -> Result<RefSpec, SyntaxError> {
        RefSpec::from_expr(&crate::syntax::parse_expr(text)?)
    }
}

impl fmt::Display for RefSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atomic = |f: &mut fmt::Formatter<'_>, name: &str, operator: &Option<String>, operand: &Option<usize>| {
            write!(f, "{name}(")?;
            if let Some(op) = operator {
                write!(f, "operator={op}")?;
            }
            if let Some(i) = operand {
                if operator.is_some() {
                    f.write_str(", ")?;
                }
                write!(f, "operand={i}")?;
            }
            f.write_str(")")
        };
        match self {
            RefSpec::Identity { operator, operand } => atomic(f, "Identity", operator, operand),
            RefSpec::SuperOf { operator, operand } => atomic(f, "SuperOf", operator, operand),
            RefSpec::SubOf { operator, operand } => atomic(f, "SubOf", operator, operand),
            RefSpec::Both(a, b) => write!(f, "Both({a}, {b})"),
            RefSpec::And(a, b) => write!(f, "And({a}, {b})"),
            RefSpec::That(r) => write!(f, "That({r})"),
            RefSpec::Arg(n) => write!(f, "Arg({n:?})"),
        }
    }
}

/// Evaluation context: the frame, the finite universe that superformula
/// references range over, and the rule arguments bound so far.
#[derive(Debug, Clone, Copy)]
pub struct RefContext<'a> {
    pub frame: &'a Formula,
    pub universe: &'a BTreeSet<Formula>,
    pub args: &'a BTreeMap<String, Formula>,
}

impl<'a> RefContext<'a> {
    pub fn new(frame: &'a Formula, universe: &'a BTreeSet<Formula>, args: &'a BTreeMap<String, Formula>) -> Self {
        RefContext { frame, universe, args }
    }

    pub fn with_frame(self, frame: &'a Formula) -> Self {
        RefContext { frame, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefError {
    #[error("argument `{0}` is not bound")]
    UnboundArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("argument `{0}` is not declared by the rule")]
    UnboundArgument(String),
    #[error("operand index is only meaningful on SuperOf and SubOf")]
    MisplacedOperandIndex,
}

fn admits(operator: &Option<String>, f: &Formula) -> bool {
    operator.as_deref().is_none_or(|op| f.head() == op)
}

/// Evaluates `spec` against `ctx`.
pub fn eval(spec: &RefSpec, ctx: RefContext<'_>) -> Result<BTreeSet<Formula>, RefError> {
    let f = ctx.frame;
    Ok(match spec {
        RefSpec::Identity { operator, .. } => {
            if admits(operator, f) {
                BTreeSet::from([f.clone()])
            } else {
                BTreeSet::new()
            }
        }
        RefSpec::SubOf { operator, operand } => {
            let candidates = match operand {
                Some(i) => f.operand(*i).cloned().into_iter().collect(),
                None => f.subformulas(),
            };
            candidates.into_iter().filter(|g| admits(operator, g)).collect()
        }
        RefSpec::SuperOf { operator, operand } => ctx
            .universe
            .iter()
            .filter(|g| admits(operator, g))
            .filter(|g| match operand {
                Some(i) => g.operand(*i) == Some(f),
                None => f.is_subformula_of(g),
            })
            .cloned()
            .collect(),
        RefSpec::Both(a, b) => {
            let left = eval(a, ctx)?;
            if left.is_empty() {
                // still surface unbound arguments on the right
                eval(b, ctx)?;
                return Ok(left);
            }
            let right = eval(b, ctx)?;
            left.intersection(&right).cloned().collect()
        }
        RefSpec::And(a, b) => {
            let mut out = BTreeSet::new();
            for g in eval(a, ctx)? {
                out.extend(eval(b, ctx.with_frame(&g))?);
            }
            out
        }
        RefSpec::That(r) => {
            if eval(r, ctx)?.is_empty() {
                BTreeSet::new()
            } else {
                BTreeSet::from([f.clone()])
            }
        }
        RefSpec::Arg(n) => {
            let g = ctx.args.get(n).ok_or_else(|| RefError::UnboundArgument(n.clone()))?;
            BTreeSet::from([g.clone()])
        }
    })
}

/// Static checks against the argument names a rule declares.
pub fn validate(spec: &RefSpec, rule_args: &[&str]) -> Result<(), Vec<ValidationError>> {
    let mut errors = Vec::new();
    collect_errors(spec, rule_args, &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn collect_errors(spec: &RefSpec, rule_args: &[&str], errors: &mut Vec<ValidationError>) {
    match spec {
        RefSpec::Identity { operand: Some(_), .. } => errors.push(ValidationError::MisplacedOperandIndex),
        RefSpec::Identity { .. } | RefSpec::SuperOf { .. } | RefSpec::SubOf { .. } => {}
        RefSpec::Both(a, b) | RefSpec::And(a, b) => {
            collect_errors(a, rule_args, errors);
            collect_errors(b, rule_args, errors);
        }
        RefSpec::That(r) => collect_errors(r, rule_args, errors),
        RefSpec::Arg(n) => {
            if !rule_args.contains(&n.as_str()) {
                errors.push(ValidationError::UnboundArgument(n.clone()));
            }
        }
    }
}
