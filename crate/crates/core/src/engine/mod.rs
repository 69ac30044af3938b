//! Rule representation and application for backward natural deduction,
//! forward Fitch proofs and Hilbert derivations.
//!
//! Every rule application is described by a [`Step`]: a rule name, an
//! optional target goal and named arguments. [`Proof`] dispatches steps to the
//! style-specific appliers, keeps an undo history and enumerates candidate
//! steps for tactics and user interfaces.

mod backward;
mod fitch;
mod hilbert;
mod proof;

pub use proof::{Candidate, ImportError, Proof, ProofDocument, State};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::formula::{Formula, OperatorTable, ParseError};
use crate::proofgraph::{Citation, ProofError, ScopeError};
use crate::refspec::{self, RefError, RefSpec};

/// Name of the pseudo-rule that succeeds exactly on complete proofs.
pub const QED: &str = "qed";
/// Name of the Fitch pseudo-rule that closes the innermost subproof.
pub const END: &str = "end";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Backward,
    Fitch,
    Hilbert,
}

impl Style {
    pub fn as_str(self) -> &'static str {
        match self {
            Style::Backward => "backward",
            Style::Fitch => "fitch",
            Style::Hilbert => "hilbert",
        }
    }

    pub fn parse(s: &str) -> Option<Style> {
        match s {
            "backward" => Some(Style::Backward),
            "fitch" => Some(Style::Fitch),
            "hilbert" => Some(Style::Hilbert),
            _ => None,
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a backward rule's argument candidates come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgSource {
    /// A reference evaluated with the target goal as frame.
    Ref(RefSpec),
    /// Every interned formula, optionally with a given principal operator.
    Universe(Option<String>),
    /// The hypotheses in scope at the target goal.
    Hypotheses(Option<String>),
}

impl fmt::Display for ArgSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let enumerator = |f: &mut fmt::Formatter<'_>, name: &str, op: &Option<String>| match op {
            Some(op) => write!(f, "{name}(operator={op})"),
            None => write!(f, "{name}()"),
        };
        match self {
            ArgSource::Ref(r) => write!(f, "{r}"),
            ArgSource::Universe(op) => enumerator(f, "Universe", op),
            ArgSource::Hypotheses(op) => enumerator(f, "Hypotheses", op),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchSpec {
    pub role: String,
    pub goal: RefSpec,
    pub hypotheses: Vec<RefSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackwardRule {
    pub name: String,
    pub args: Vec<(String, ArgSource)>,
    pub branches: Vec<BranchSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PremiseSpec {
    /// A cited line whose formula satisfies `spec` (evaluated with the line's
    /// formula as frame). With `outer`, the line must sit directly outside
    /// the innermost strict subproof.
    Line { role: String, spec: RefSpec, outer: bool },
    /// A cited subproof. Binds `role` to its last cited line and
    /// `role.hyp` to its hypothesis.
    Subproof {
        role: String,
        hypothesis: RefSpec,
        last: RefSpec,
    },
}

impl PremiseSpec {
    pub fn role(&self) -> &str {
        match self {
            PremiseSpec::Line { role, .. } | PremiseSpec::Subproof { role, .. } => role,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConclusionSpec {
    /// The union of references evaluated with the current target as frame.
    Refs(Vec<RefSpec>),
    /// A template whose `?name` metavariables are replaced by bound formulas.
    Schema(Formula),
    /// Any formula for which the reference, with the formula as frame, is
    /// nonempty. The user supplies it; enumeration draws from the universe.
    Check(RefSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitchRule {
    pub name: String,
    pub premises: Vec<PremiseSpec>,
    pub conclusion: ConclusionSpec,
}

/// Opens a subproof. The hypothesis is computed from a frame formula (the
/// current target or any formula of the universe); `aim`, if present, gives
/// the formula the subproof is meant to reach.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenRule {
    pub name: String,
    pub hypothesis: ConclusionSpec,
    pub aim: Option<RefSpec>,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomSchema {
    pub name: String,
    pub schema: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Backward(BackwardRule),
    /// Closes a goal whose formula is a hypothesis in scope.
    Leaf {
        name: String,
    },
    Fitch(FitchRule),
    Open(OpenRule),
    Axiom(AxiomSchema),
    ModusPonens {
        name: String,
        implication: String,
    },
    Necessitation {
        name: String,
        operator: String,
    },
    Hypothesis {
        name: String,
    },
}

impl Rule {
    pub fn name(&self) -> &str {
        match self {
            Rule::Backward(r) => &r.name,
            Rule::Fitch(r) => &r.name,
            Rule::Open(r) => &r.name,
            Rule::Axiom(a) => &a.name,
            Rule::Leaf { name }
            | Rule::ModusPonens { name, .. }
            | Rule::Necessitation { name, .. }
            | Rule::Hypothesis { name } => name,
        }
    }

    pub fn style(&self) -> Style {
        match self {
            Rule::Backward(_) | Rule::Leaf { .. } => Style::Backward,
            Rule::Fitch(_) | Rule::Open(_) => Style::Fitch,
            Rule::Axiom(_) | Rule::ModusPonens { .. } | Rule::Necessitation { .. } | Rule::Hypothesis { .. } => {
                Style::Hilbert
            }
        }
    }

    /// Kind tag used in catalogs.
    pub fn kind(&self) -> &'static str {
        match self {
            Rule::Backward(_) => "rule",
            Rule::Leaf { .. } => "leaf",
            Rule::Fitch(_) => "line",
            Rule::Open(_) => "open",
            Rule::Axiom(_) => "axiom",
            Rule::ModusPonens { .. } => "mp",
            Rule::Necessitation { .. } => "nec",
            Rule::Hypothesis { .. } => "hypothesis",
        }
    }

    /// Number of premises an application of the rule has.
    pub fn premise_count(&self) -> usize {
        match self {
            Rule::Backward(r) => r.branches.len(),
            Rule::Fitch(r) => r.premises.len(),
            Rule::ModusPonens { .. } => 2,
            Rule::Necessitation { .. } => 1,
            Rule::Leaf { .. } | Rule::Open(_) | Rule::Axiom(_) | Rule::Hypothesis { .. } => 0,
        }
    }

    /// Argument names a step for this rule may carry.
    pub fn arg_names(&self) -> Vec<String> {
        match self {
            Rule::Backward(r) => r.args.iter().map(|(n, _)| n.clone()).collect(),
            Rule::Fitch(r) => r.premises.iter().map(|p| p.role().to_string()).collect(),
            Rule::Open(_) => vec!["frame".into()],
            Rule::Axiom(a) => a
                .schema
                .metavariables()
                .into_iter()
                .map(|m| m.trim_start_matches('?').to_string())
                .collect(),
            Rule::ModusPonens { .. } => vec!["minor".into(), "major".into()],
            Rule::Necessitation { .. } => vec!["line".into()],
            Rule::Leaf { .. } | Rule::Hypothesis { .. } => Vec::new(),
        }
    }
}

/// A named collection of rules over one operator table.
#[derive(Debug, Clone)]
pub struct Calculus {
    pub name: String,
    pub style: Style,
    pub table: OperatorTable,
    pub rules: Vec<Arc<Rule>>,
}

impl Calculus {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name() == name).map(|r| r.as_ref())
    }

    pub fn premise_counts(&self) -> BTreeMap<String, usize> {
        self.rules
            .iter()
            .map(|r| (r.name().to_string(), r.premise_count()))
            .collect()
    }

    /// Static well-formedness: unique names, matching styles, argument
    /// references that resolve, and operators the table knows.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        let mut names = BTreeSet::new();
        for rule in &self.rules {
            let name = rule.name();
            if !names.insert(name) {
                errors.push(format!("rule `{name}` is declared twice"));
            }
            if name == QED || name == END {
                errors.push(format!("rule name `{name}` is reserved"));
            }
            if rule.style() != self.style {
                errors.push(format!(
                    "rule `{name}` is a {} rule in a {} system",
                    rule.style(),
                    self.style
                ));
            }
            let check = |spec: &RefSpec, scope: &[&str], errors: &mut Vec<String>| {
                if let Err(es) = refspec::validate(spec, scope) {
                    errors.extend(es.into_iter().map(|e| format!("rule `{name}`: {e}")));
                }
                for op in spec.operators() {
                    if self.table.operator(op).is_none() && self.table.constant(op).is_none() {
                        errors.push(format!("rule `{name}`: unknown operator `{op}`"));
                    }
                }
            };
            let check_template = |t: &Formula, scope: &[&str], errors: &mut Vec<String>| {
                if let Err(e) = self.table.check(t) {
                    errors.push(format!("rule `{name}`: {e}"));
                }
                for m in t.metavariables() {
                    if !scope.contains(&m.trim_start_matches('?')) {
                        errors.push(format!("rule `{name}`: metavariable `{m}` is not bound"));
                    }
                }
            };
            match rule.as_ref() {
                Rule::Backward(r) => {
                    let mut scope: Vec<&str> = Vec::new();
                    for (arg, source) in &r.args {
                        if scope.contains(&arg.as_str()) {
                            errors.push(format!("rule `{name}`: argument `{arg}` declared twice"));
                        }
                        if let ArgSource::Ref(spec) = source {
                            check(spec, &scope, &mut errors);
                        }
                        scope.push(arg);
                    }
                    for b in &r.branches {
                        check(&b.goal, &scope, &mut errors);
                        for h in &b.hypotheses {
                            check(h, &scope, &mut errors);
                        }
                    }
                }
                Rule::Fitch(r) => {
                    let mut scope: Vec<String> = vec!["target".into()];
                    for p in &r.premises {
                        let view: Vec<&str> = scope.iter().map(String::as_str).collect();
                        match p {
                            PremiseSpec::Line { spec, .. } => check(spec, &view, &mut errors),
                            PremiseSpec::Subproof { hypothesis, last, .. } => {
                                check(hypothesis, &view, &mut errors);
                                check(last, &view, &mut errors);
                            }
                        }
                        if scope.iter().any(|s| s == p.role()) {
                            errors.push(format!("rule `{name}`: role `{}` declared twice", p.role()));
                        }
                        scope.push(p.role().to_string());
                        if let PremiseSpec::Subproof { role, .. } = p {
                            scope.push(format!("{role}.hyp"));
                        }
                    }
                    let view: Vec<&str> = scope.iter().map(String::as_str).collect();
                    match &r.conclusion {
                        ConclusionSpec::Refs(specs) => specs.iter().for_each(|s| check(s, &view, &mut errors)),
                        ConclusionSpec::Check(s) => check(s, &view, &mut errors),
                        ConclusionSpec::Schema(t) => check_template(t, &view, &mut errors),
                    }
                }
                Rule::Open(r) => {
                    let scope = ["target"];
                    match &r.hypothesis {
                        ConclusionSpec::Refs(specs) => specs.iter().for_each(|s| check(s, &scope, &mut errors)),
                        ConclusionSpec::Check(s) => check(s, &scope, &mut errors),
                        ConclusionSpec::Schema(t) => check_template(t, &scope, &mut errors),
                    }
                    if let Some(aim) = &r.aim {
                        check(aim, &["target", "hypothesis"], &mut errors);
                    }
                }
                Rule::Axiom(a) => {
                    if let Err(e) = self.table.check(&a.schema) {
                        errors.push(format!("axiom `{name}`: {e}"));
                    }
                }
                Rule::ModusPonens { implication: op, .. } => {
                    if self.table.arity(op) != Some(2) {
                        errors.push(format!("rule `{name}`: `{op}` is not a binary operator"));
                    }
                }
                Rule::Necessitation { operator: op, .. } => {
                    if self.table.arity(op) != Some(1) {
                        errors.push(format!("rule `{name}`: `{op}` is not a unary operator"));
                    }
                }
                Rule::Leaf { .. } | Rule::Hypothesis { .. } => {}
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// A step argument: a cited line, a cited subproof, or a formula in
/// S-expression syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepArg {
    Line(usize),
    Subproof([usize; 2]),
    Formula(String),
}

impl StepArg {
    pub fn citation(&self) -> Option<Citation> {
        match self {
            StepArg::Line(n) => Some(Citation::Line(*n)),
            StepArg::Subproof(r) => Some(Citation::Subproof(*r)),
            StepArg::Formula(_) => None,
        }
    }
}

impl From<Citation> for StepArg {
    fn from(c: Citation) -> Self {
        match c {
            Citation::Line(n) => StepArg::Line(n),
            Citation::Subproof(r) => StepArg::Subproof(r),
        }
    }
}

impl From<&Formula> for StepArg {
    fn from(f: &Formula) -> Self {
        StepArg::Formula(f.to_sexpr())
    }
}

/// One rule application request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub rule: String,
    /// Goal vertex id (backward proofs); the leftmost open goal if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub args: BTreeMap<String, StepArg>,
    /// Formula the step concludes, for rules whose conclusion is not
    /// determined by their arguments.
    #[serde(default, rename = "resultFormula", skip_serializing_if = "Option::is_none")]
    pub result: Option<String>,
}

impl Step {
    pub fn new(rule: impl Into<String>) -> Self {
        Step {
            rule: rule.into(),
            target: None,
            args: BTreeMap::new(),
            result: None,
        }
    }

    pub fn target(mut self, target: impl Into<String>) -> Self {
        self.target = Some(target.into());
        self
    }

    pub fn arg(mut self, name: impl Into<String>, value: impl Into<StepArg>) -> Self {
        self.args.insert(name.into(), value.into());
        self
    }

    pub fn formula_arg(self, name: impl Into<String>, sexpr: &str) -> Self {
        self.arg(name, StepArg::Formula(sexpr.to_string()))
    }

    pub fn line(self, name: impl Into<String>, n: usize) -> Self {
        self.arg(name, StepArg::Line(n))
    }

    pub fn subproof(self, name: impl Into<String>, start: usize, end: usize) -> Self {
        self.arg(name, StepArg::Subproof([start, end]))
    }

    pub fn result(mut self, sexpr: impl Into<String>) -> Self {
        self.result = Some(sexpr.into());
        self
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rule)?;
        if let Some(t) = &self.target {
            write!(f, " @{t}")?;
        }
        for (k, v) in &self.args {
            match v {
                StepArg::Line(n) => write!(f, " {k}={n}")?,
                StepArg::Subproof([a, b]) => write!(f, " {k}={a}-{b}")?,
                StepArg::Formula(s) => write!(f, " {k}={s}")?,
            }
        }
        if let Some(r) = &self.result {
            write!(f, " => {r}")?;
        }
        Ok(())
    }
}

/// Restrictions a tactic may put on a rule's enumerated candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Filter {
    /// Backward: no new branch repeats a (goal, hypotheses) pair already on
    /// the path from the root.
    NoCycle,
    /// Linear: the conclusion is not already available, and nothing is done
    /// once the current target is available.
    Fresh,
    /// Linear: the conclusion is a subformula of the goal or of a hypothesis,
    /// or a constant.
    Bounded,
    /// Fitch: the step closes the innermost subproof on a line deriving its aim.
    ReachesTarget,
    /// Fitch: the step concludes the current target.
    ToTarget,
    /// Fitch: a subproof opened with the current target as frame.
    OnTarget,
    /// Fitch: a subproof opened with some other frame.
    OffTarget,
}

impl Filter {
    pub const ALL: [Filter; 7] = [
        Filter::NoCycle,
        Filter::Fresh,
        Filter::Bounded,
        Filter::ReachesTarget,
        Filter::ToTarget,
        Filter::OnTarget,
        Filter::OffTarget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Filter::NoCycle => "NoCycle",
            Filter::Fresh => "Fresh",
            Filter::Bounded => "Bounded",
            Filter::ReachesTarget => "ReachesTarget",
            Filter::ToTarget => "ToTarget",
            Filter::OnTarget => "OnTarget",
            Filter::OffTarget => "OffTarget",
        }
    }

    pub fn parse(s: &str) -> Option<Filter> {
        Filter::ALL.into_iter().find(|f| f.name() == s)
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` does not apply: {reason}")]
    NotApplicable { rule: String, reason: String },
    #[error("rule `{rule}`: branch `{branch}` goal refers to {count} formulas")]
    AmbiguousBranchGoal { rule: String, branch: String, count: usize },
    #[error("rule `{rule}`: {count} argument assignments apply; choose one")]
    AmbiguousArguments { rule: String, count: usize },
    #[error("rule `{rule}`: bad argument `{arg}`: {reason}")]
    BadArgument { rule: String, arg: String, reason: String },
    #[error("rule `{rule}`: {formula} is not an admissible conclusion")]
    InvalidConclusion { rule: String, formula: String },
    #[error("rule `{rule}` needs a result formula")]
    MissingResultFormula { rule: String },
    #[error("line {major} is not an implication from line {minor}")]
    NonMatchingMP { minor: usize, major: usize },
    #[error("line {line} depends on open hypotheses")]
    NecessitationUnderHypothesis { line: usize },
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("the proof has no open goal")]
    NoOpenGoal,
    #[error("nothing to undo")]
    NothingToUndo,
    #[error(transparent)]
    Scope(#[from] ScopeError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Ref(#[from] RefError),
}

impl EngineError {
    /// Stable error name, as reported by the HTTP API.
    pub fn name(&self) -> &'static str {
        match self {
            EngineError::UnknownRule(_) => "UnknownRule",
            EngineError::NotApplicable { .. } => "NotApplicable",
            EngineError::AmbiguousBranchGoal { .. } => "AmbiguousBranchGoal",
            EngineError::AmbiguousArguments { .. } => "AmbiguousArguments",
            EngineError::BadArgument { .. } => "BadArgument",
            EngineError::InvalidConclusion { .. } => "InvalidConclusion",
            EngineError::MissingResultFormula { .. } => "MissingResultFormula",
            EngineError::NonMatchingMP { .. } => "NonMatchingMP",
            EngineError::NecessitationUnderHypothesis { .. } => "NecessitationUnderHypothesis",
            EngineError::UnknownTarget(_) => "UnknownTarget",
            EngineError::NoOpenGoal => "NoOpenGoal",
            EngineError::NothingToUndo => "NothingToUndo",
            EngineError::Scope(_) => "ScopeError",
            EngineError::Parse(e) => e.name(),
            EngineError::Proof(e) => e.name(),
            EngineError::Ref(_) => "UnboundArgument",
        }
    }

    pub(crate) fn not_applicable(rule: &str, reason: impl Into<String>) -> Self {
        EngineError::NotApplicable {
            rule: rule.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn bad_arg(rule: &str, arg: &str, reason: impl Into<String>) -> Self {
        EngineError::BadArgument {
            rule: rule.to_string(),
            arg: arg.to_string(),
            reason: reason.into(),
        }
    }
}

/// Replaces every `?name` metavariable of `template` by `bindings[name]`.
/// Returns `None` when some metavariable is unbound.
pub fn instantiate(template: &Formula, bindings: &BTreeMap<String, Formula>) -> Option<Formula> {
    let out = template.substitute(&|atom| bindings.get(atom.strip_prefix('?')?).cloned());
    out.metavariables().is_empty().then_some(out)
}
