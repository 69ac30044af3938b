use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;
use crate::graphstore::{GraphDocument, Mark, PropertyGraph, VertexId};
use crate::proofgraph::{Branch, FitchState, HilbertState, ProofState};

use super::{backward, fitch, hilbert, Calculus, EngineError, Filter, Rule, Step, Style, END, QED};

/// What applying a candidate would do, as far as filters need to know.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Preview {
    Branches {
        goal: VertexId,
        branches: Vec<Branch>,
    },
    /// Some branch goal does not resolve to exactly one formula.
    Ambiguous,
    Leaf,
    Line {
        conclusion: Formula,
        closes: Option<usize>,
    },
    Open {
        frame: Formula,
        hypothesis: Formula,
    },
    End,
    Qed,
}

/// A fully specified step that applies at the current state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub step: Step,
    pub(crate) preview: Preview,
}

impl Candidate {
    pub(crate) fn new(step: Step, preview: Preview) -> Self {
        Candidate { step, preview }
    }

    /// The formula the step concludes, for line-producing steps.
    pub fn conclusion(&self) -> Option<&Formula> {
        match &self.preview {
            Preview::Line { conclusion, .. } => Some(conclusion),
            Preview::Open { hypothesis, .. } => Some(hypothesis),
            _ => None,
        }
    }

    /// New goals, for backward steps.
    pub fn branches(&self) -> Option<&[Branch]> {
        match &self.preview {
            Preview::Branches { branches, .. } => Some(branches),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum State {
    Backward(ProofState),
    Fitch(FitchState),
    Hilbert(HilbertState),
}

#[derive(Debug, Clone)]
enum Undo {
    Graph(Mark),
    Fitch(Box<FitchState>),
    Hilbert(usize),
}

/// A proof under construction in some calculus, with undo history.
#[derive(Debug, Clone)]
pub struct Proof {
    calculus: Arc<Calculus>,
    state: State,
    history: Vec<(Undo, Step)>,
}

/// Serialized proof: header plus the proof graph; linear proofs also carry
/// their step log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDocument {
    pub system: String,
    #[serde(rename = "rootGoal")]
    pub root_goal: String,
    pub kind: Style,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Step>,
    #[serde(flatten)]
    pub graph: GraphDocument,
}

impl ProofDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ImportError> {
        serde_json::from_str(text).map_err(|e| ImportError(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid proof document: {0}")]
pub struct ImportError(pub String);

impl Proof {
    pub fn new(calculus: Arc<Calculus>, goal: Formula) -> Result<Self, EngineError> {
        calculus.table.check(&goal)?;
        if !goal.metavariables().is_empty() {
            return Err(crate::formula::ParseError::InvalidAtom {
                token: goal.metavariables().into_iter().next().expect("nonempty"),
            }
            .into());
        }
        let state = match calculus.style {
            Style::Backward => State::Backward(ProofState::new(goal)),
            Style::Fitch => State::Fitch(FitchState::new(goal)),
            Style::Hilbert => State::Hilbert(HilbertState::new(goal)),
        };
        Ok(Proof {
            calculus,
            state,
            history: Vec::new(),
        })
    }

    pub fn parse(calculus: Arc<Calculus>, goal: &str) -> Result<Self, EngineError> {
        let goal = calculus.table.parse(goal)?;
        Proof::new(calculus, goal)
    }

    pub fn calculus(&self) -> &Arc<Calculus> {
        &self.calculus
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn goal(&self) -> &Formula {
        match &self.state {
            State::Backward(s) => s.root_goal(),
            State::Fitch(s) => s.goal(),
            State::Hilbert(s) => s.goal(),
        }
    }

    pub fn is_complete(&self) -> bool {
        match &self.state {
            State::Backward(s) => s.is_complete(),
            State::Fitch(s) => s.is_complete(),
            State::Hilbert(s) => s.is_complete(),
        }
    }

    /// Human-readable completeness report.
    pub fn report(&self) -> String {
        match &self.state {
            State::Backward(s) => s.check_complete(&self.calculus.premise_counts()).to_string(),
            State::Fitch(s) if s.is_complete() => "complete".into(),
            State::Fitch(s) if s.depth() > 0 => {
                let n = s.depth();
                format!("{n} open subproof{}", if n == 1 { "" } else { "s" })
            }
            State::Hilbert(s) if s.is_complete() => "complete".into(),
            _ => "goal not derived".into(),
        }
    }

    /// Steps applied so far, oldest first.
    pub fn steps(&self) -> Vec<Step> {
        self.history.iter().map(|(_, s)| s.clone()).collect()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    /// Names of the rules usable at this point, including the pseudo-rules.
    pub fn rule_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.calculus.rules.iter().map(|r| r.name().to_string()).collect();
        if self.calculus.style == Style::Fitch {
            names.push(END.into());
        }
        names.push(QED.into());
        names
    }

    /// Every way `rule` applies. For backward proofs `target` names the goal
    /// vertex (default: the leftmost open goal).
    pub fn candidates(&self, rule: &str, target: Option<&str>) -> Result<Vec<Candidate>, EngineError> {
        if rule == QED {
            return Ok(if self.is_complete() {
                vec![Candidate::new(Step::new(QED), Preview::Qed)]
            } else {
                Vec::new()
            });
        }
        if rule == END && self.calculus.style == Style::Fitch {
            let State::Fitch(s) = &self.state else { unreachable!() };
            return Ok(if s.depth() > 0 {
                vec![Candidate::new(Step::new(END), Preview::End)]
            } else {
                Vec::new()
            });
        }
        let r = self
            .calculus
            .rule(rule)
            .ok_or_else(|| EngineError::UnknownRule(rule.to_string()))?;
        match &self.state {
            State::Backward(s) => {
                let goal = match backward::resolve_target(s, target) {
                    Ok(g) => g,
                    Err(EngineError::NoOpenGoal) => return Ok(Vec::new()),
                    Err(e) => return Err(e),
                };
                backward::enumerate(s, r, goal)
            }
            State::Fitch(s) => fitch::enumerate(s, r),
            State::Hilbert(s) => Ok(hilbert::enumerate(s, r)),
        }
    }

    /// Candidates of every rule, in declaration order.
    pub fn applicable(&self, target: Option<&str>) -> Result<Vec<Candidate>, EngineError> {
        let mut out = Vec::new();
        for name in self.rule_names() {
            out.extend(self.candidates(&name, target)?);
        }
        Ok(out)
    }

    /// Whether `c` passes every filter at the current state.
    pub fn admits(&self, c: &Candidate, filters: &[Filter]) -> bool {
        filters.iter().all(|f| self.admits_one(c, *f))
    }

    fn admits_one(&self, c: &Candidate, filter: Filter) -> bool {
        match (&self.state, &c.preview, filter) {
            (State::Backward(s), Preview::Branches { goal, branches }, Filter::NoCycle) => {
                let base = s.hypotheses(*goal);
                let seen: Vec<(Formula, BTreeSet<Formula>)> = s
                    .path(*goal)
                    .into_iter()
                    .map(|v| (s.formula_of(v).expect("deduction").clone(), s.hypotheses(v)))
                    .collect();
                branches.iter().all(|b| {
                    let mut hyps = base.clone();
                    hyps.extend(b.hypotheses.iter().cloned());
                    !seen.iter().any(|(f, h)| *f == b.goal && *h == hyps)
                })
            }
            (State::Fitch(s), p, Filter::Fresh) => {
                if fitch::local(s).contains(s.target()) {
                    return false;
                }
                let have = fitch::available(s);
                match p {
                    Preview::Line { conclusion, .. } => conclusion == s.target() || !have.contains(conclusion),
                    Preview::Open { frame, hypothesis } => !have.contains(hypothesis) && !have.contains(frame),
                    _ => true,
                }
            }
            (State::Fitch(s), Preview::Line { conclusion, .. }, Filter::Bounded) => {
                let mut bound = s.goal().subformulas();
                for l in s.lines().iter().filter(|l| l.opens) {
                    bound.extend(l.formula.subformulas());
                }
                bound.contains(conclusion) || self.calculus.table.constant(conclusion.head()).is_some()
            }
            (State::Fitch(s), p, Filter::ReachesTarget) => match p {
                Preview::Line { closes: Some(end), .. } => {
                    let Some(sub) = s.innermost().map(|i| &s.subproofs()[i]) else {
                        return false;
                    };
                    let opener = &s.line(sub.start).expect("subproofs start on a line").rule;
                    let paired = opener.strip_suffix(".open") == Some(c.step.rule.as_str());
                    paired
                        && sub
                            .aim
                            .as_ref()
                            .is_some_and(|a| s.line(*end).is_some_and(|l| &l.formula == a))
                }
                _ => false,
            },
            (State::Fitch(s), p, Filter::ToTarget) => match p {
                Preview::Line { conclusion, .. } => conclusion == s.target(),
                _ => false,
            },
            (State::Fitch(s), p, Filter::OnTarget | Filter::OffTarget) => match p {
                Preview::Open { frame, .. } => (frame == s.target()) == (filter == Filter::OnTarget),
                _ => false,
            },
            (State::Hilbert(s), p, Filter::Fresh) => {
                if s.is_complete() {
                    return false;
                }
                match p {
                    Preview::Line { conclusion, .. } => !s.derives(conclusion),
                    _ => true,
                }
            }
            (State::Hilbert(s), Preview::Line { conclusion, .. }, Filter::Bounded) => {
                hilbert::universe(s).contains(conclusion)
            }
            _ => true,
        }
    }

    fn undo_point(&self) -> Undo {
        match &self.state {
            State::Backward(s) => Undo::Graph(s.mark()),
            State::Fitch(s) => Undo::Fitch(Box::new(s.clone())),
            State::Hilbert(s) => Undo::Hilbert(s.lines().len()),
        }
    }

    fn restore(&mut self, undo: Undo) {
        match (&mut self.state, undo) {
            (State::Backward(s), Undo::Graph(m)) => s.rollback(m),
            (State::Fitch(s), Undo::Fitch(saved)) => *s = *saved,
            (State::Hilbert(s), Undo::Hilbert(n)) => s.truncate(n),
            _ => unreachable!("undo entries match the proof style"),
        }
    }

    /// Applies `step`. On error the proof is unchanged.
    pub fn apply(&mut self, step: &Step) -> Result<(), EngineError> {
        if step.rule == QED {
            return if self.is_complete() {
                Ok(())
            } else {
                Err(EngineError::not_applicable(
                    QED,
                    format!("the proof is not complete: {}", self.report()),
                ))
            };
        }
        let step = self.complete_args(step)?;
        let undo = self.undo_point();
        let calc = Arc::clone(&self.calculus);
        let result = match &mut self.state {
            State::Backward(s) => backward::apply(&calc, s, &step),
            State::Fitch(s) if step.rule == END => s.close_subproof().map(|_| ()).map_err(Into::into),
            State::Fitch(s) => fitch::apply(&calc, s, &step),
            State::Hilbert(s) => hilbert::apply(&calc, s, &step),
        };
        match result {
            Ok(()) => {
                self.history.push((undo, step));
                Ok(())
            }
            Err(e) => {
                self.restore(undo);
                Err(e)
            }
        }
    }

    /// For linear proofs, a step without arguments for a rule that needs
    /// them stands for the rule's unique candidate.
    fn complete_args(&self, step: &Step) -> Result<Step, EngineError> {
        if self.calculus.style == Style::Backward || !step.args.is_empty() || step.rule == END {
            return Ok(step.clone());
        }
        let Some(rule) = self.calculus.rule(&step.rule) else {
            return Err(EngineError::UnknownRule(step.rule.clone()));
        };
        if rule.arg_names().is_empty() || matches!(rule, Rule::Open(_)) {
            return Ok(step.clone());
        }
        let result = step
            .result
            .as_deref()
            .map(|t| self.calculus.table.parse(t))
            .transpose()?;
        let mut cands: Vec<Candidate> = self
            .candidates(&step.rule, None)?
            .into_iter()
            .filter(|c| result.is_none() || c.conclusion() == result.as_ref())
            .collect();
        match cands.len() {
            0 => Err(EngineError::not_applicable(&step.rule, "no arguments satisfy the rule")),
            1 => Ok(cands.pop().expect("one candidate").step),
            count => Err(EngineError::AmbiguousArguments {
                rule: step.rule.clone(),
                count,
            }),
        }
    }

    /// Reverts the most recent step.
    pub fn undo(&mut self) -> Result<Step, EngineError> {
        let (undo, step) = self.history.pop().ok_or(EngineError::NothingToUndo)?;
        self.restore(undo);
        Ok(step)
    }

    /// Reverts steps until `len` remain.
    pub fn truncate(&mut self, len: usize) {
        while self.history.len() > len {
            self.undo().expect("history is nonempty");
        }
    }

    /// The proof graph. Linear proofs are converted on the fly.
    pub fn graph(&self) -> std::borrow::Cow<'_, PropertyGraph> {
        match &self.state {
            State::Backward(s) => std::borrow::Cow::Borrowed(s.graph()),
            State::Fitch(s) => std::borrow::Cow::Owned(s.to_graph()),
            State::Hilbert(s) => std::borrow::Cow::Owned(s.to_graph()),
        }
    }

    pub fn export(&self) -> ProofDocument {
        ProofDocument {
            system: self.calculus.name.clone(),
            root_goal: self.goal().to_sexpr(),
            kind: self.calculus.style,
            steps: match self.calculus.style {
                Style::Backward => Vec::new(),
                _ => self.steps(),
            },
            graph: self.graph().export_compact(),
        }
    }

    /// Rebuilds a proof from a document. Backward proofs are validated
    /// structurally; linear proofs are replayed and compared.
    pub fn import(calculus: Arc<Calculus>, doc: &ProofDocument) -> Result<Proof, ImportError> {
        let bad = |m: String| ImportError(m);
        if doc.system != calculus.name {
            return Err(bad(format!(
                "document is for system `{}`, not `{}`",
                doc.system, calculus.name
            )));
        }
        if doc.kind != calculus.style {
            return Err(bad(format!(
                "document is a {} proof, the system is {}",
                doc.kind, calculus.style
            )));
        }
        let goal = calculus.table.parse(&doc.root_goal).map_err(|e| bad(e.to_string()))?;
        match calculus.style {
            Style::Backward => {
                let graph = PropertyGraph::import(&doc.graph).map_err(|e| bad(e.to_string()))?;
                let state = ProofState::from_graph(graph, &calculus.table, &calculus.premise_counts()).map_err(bad)?;
                if state.root_goal() != &goal {
                    return Err(bad(format!(
                        "root deduction derives {}, header says {goal}",
                        state.root_goal()
                    )));
                }
                Ok(Proof {
                    calculus,
                    state: State::Backward(state),
                    history: Vec::new(),
                })
            }
            _ => {
                let mut proof = Proof::new(calculus, goal).map_err(|e| bad(e.to_string()))?;
                for (i, step) in doc.steps.iter().enumerate() {
                    proof
                        .apply(step)
                        .map_err(|e| bad(format!("step {} ({step}): {}", i + 1, e)))?;
                }
                if proof.graph().export_compact() != doc.graph {
                    return Err(bad("graph does not match the replayed steps".into()));
                }
                Ok(proof)
            }
        }
    }
}
