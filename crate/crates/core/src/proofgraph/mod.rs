//! Proof states and their graph encoding.
//!
//! A backward proof is a tree of deduction vertices. Each deduction vertex
//! has one `Derives` edge to the formula it concludes and one `Premise` edge
//! per premise, pointing at the child deduction and labeled with the
//! premise's role. Open goals are deduction vertices with `status = "goal"`;
//! hypotheses introduced by a branch hang off the child goal as
//! `Introduces` edges.

mod document;
mod fitch;
mod hilbert;

pub use document::{DEPTH_KEY, LINE_KEY, SUBPROOF_START_KEY};
pub use fitch::{Citation, FitchLine, FitchState, ScopeError, Subproof};
pub use hilbert::{HilbertLine, HilbertState, Justification};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::formula::{Formula, FormulaStore, OperatorTable, FORMULA_LABEL};
use crate::graphstore::{EdgeRecord, ElementId, Mark, PropertyGraph, Value, VertexId};

pub const DEDUCTION_LABEL: &str = "Deduction";
pub const DERIVES_LABEL: &str = "Derives";
pub const PREMISE_LABEL: &str = "Premise";
pub const INTRODUCES_LABEL: &str = "Introduces";
pub const STATUS_KEY: &str = "status";
pub const RULE_KEY: &str = "rule";
pub const LEAF_KIND_KEY: &str = "leafKind";
pub const ROLE_KEY: &str = "role";
pub const INDEX_KEY: &str = "index";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Goal,
    Leaf,
    Regular,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Goal => "goal",
            Status::Leaf => "leaf",
            Status::Regular => "regular",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        match s {
            "goal" => Some(Status::Goal),
            "leaf" => Some(Status::Leaf),
            "regular" => Some(Status::Regular),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    Hypothesis,
    Axiom,
}

impl LeafKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LeafKind::Hypothesis => "hypothesis",
            LeafKind::Axiom => "axiom",
        }
    }
}

/// One child goal created by a rule application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub role: String,
    pub goal: Formula,
    pub hypotheses: Vec<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofError {
    #[error("{0} is not a deduction vertex")]
    NotADeduction(VertexId),
    #[error("{0} is not an open goal")]
    NotAGoal(VertexId),
    #[error("{formula} is not among the hypotheses in scope")]
    NotAHypothesis { formula: String },
}

impl ProofError {
    pub fn name(&self) -> &'static str {
        match self {
            ProofError::NotADeduction(_) => "NotADeduction",
            ProofError::NotAGoal(_) => "NotAGoal",
            ProofError::NotAHypothesis { .. } => "NotAHypothesis",
        }
    }
}

/// Result of [`ProofState::check_complete`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completeness {
    pub complete: bool,
    pub open_goals: usize,
    pub violations: Vec<String>,
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complete {
            return f.write_str("complete");
        }
        let mut parts = Vec::new();
        if self.open_goals > 0 {
            let s = if self.open_goals == 1 { "" } else { "s" };
            parts.push(format!("{} open goal{s}", self.open_goals));
        }
        parts.extend(self.violations.iter().cloned());
        f.write_str(&parts.join("; "))
    }
}

/// A backward (goal-directed) proof.
#[derive(Debug, Clone)]
pub struct ProofState {
    graph: PropertyGraph,
    formulas: FormulaStore,
    root: VertexId,
    root_goal: Formula,
}

/// Structural equality of the underlying graphs.
impl PartialEq for ProofState {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
    }
}

fn text(s: &str) -> Value {
    Value::Text(s.to_string())
}

impl ProofState {
    /// A proof of `goal` with a single open goal and the goal's formula DAG
    /// interned.
    pub fn new(goal: Formula) -> Self {
        let mut graph = PropertyGraph::new();
        let mut formulas = FormulaStore::new();
        let fv = formulas.intern(&mut graph, &goal);
        let root = graph
            .add_vertex([DEDUCTION_LABEL], [(STATUS_KEY, text("goal"))])
            .expect("distinct keys");
        graph
            .add_edge(root, fv, [DERIVES_LABEL], [] as [(&str, Value); 0])
            .expect("vertices exist");
        graph.forget_history();
        ProofState {
            graph,
            formulas,
            root,
            root_goal: goal,
        }
    }

    pub fn graph(&self) -> &PropertyGraph {
        &self.graph
    }

    pub fn formulas(&self) -> &FormulaStore {
        &self.formulas
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn root_goal(&self) -> &Formula {
        &self.root_goal
    }

    /// All formulas interned in the proof graph.
    pub fn universe(&self) -> BTreeSet<Formula> {
        self.formulas.universe()
    }

    pub fn is_deduction(&self, v: VertexId) -> bool {
        self.graph.vertex(v).is_some_and(|r| r.has_label(DEDUCTION_LABEL))
    }

    pub fn deductions(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.graph.vertices_with_label(DEDUCTION_LABEL).map(|(id, _)| id)
    }

    pub fn status(&self, v: VertexId) -> Option<Status> {
        let r = self.graph.vertex(v)?;
        if !r.has_label(DEDUCTION_LABEL) {
            return None;
        }
        r.prop(STATUS_KEY).and_then(Value::as_text).and_then(Status::parse)
    }

    pub fn rule(&self, v: VertexId) -> Option<&str> {
        self.graph.vertex(v)?.prop(RULE_KEY).and_then(Value::as_text)
    }

    pub fn leaf_kind(&self, v: VertexId) -> Option<&str> {
        self.graph.vertex(v)?.prop(LEAF_KIND_KEY).and_then(Value::as_text)
    }

    /// The formula a deduction vertex derives.
    pub fn formula_of(&self, v: VertexId) -> Option<&Formula> {
        let (_, e) = self.graph.out_edges(v).find(|(_, e)| e.has_label(DERIVES_LABEL))?;
        self.formulas.formula(e.dst)
    }

    fn premise_edges(&self, v: VertexId) -> Vec<(i64, String, VertexId)> {
        let mut out: Vec<(i64, String, VertexId)> = self
            .graph
            .out_edges(v)
            .filter(|(_, e)| e.has_label(PREMISE_LABEL))
            .map(|(_, e)| {
                (
                    e.prop(INDEX_KEY).and_then(Value::as_int).unwrap_or(0),
                    e.prop(ROLE_KEY).and_then(Value::as_text).unwrap_or("").to_string(),
                    e.dst,
                )
            })
            .collect();
        out.sort();
        out
    }

    /// Child deductions in premise order, with their roles.
    pub fn children(&self, v: VertexId) -> Vec<(String, VertexId)> {
        self.premise_edges(v).into_iter().map(|(_, r, c)| (r, c)).collect()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.graph
            .in_edges(v)
            .find(|(_, e)| e.has_label(PREMISE_LABEL))
            .map(|(_, e)| e.src)
    }

    /// Hypotheses introduced at `v` itself.
    pub fn introduced(&self, v: VertexId) -> Vec<Formula> {
        self.graph
            .out_edges(v)
            .filter(|(_, e)| e.has_label(INTRODUCES_LABEL))
            .filter_map(|(_, e)| self.formulas.formula(e.dst).cloned())
            .collect()
    }

    /// Hypotheses in scope at `v`: everything introduced on the path from the
    /// root down to `v`.
    pub fn hypotheses(&self, v: VertexId) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        let mut at = Some(v);
        let mut guard = 0;
        while let Some(n) = at {
            out.extend(self.introduced(n));
            at = self.parent(n);
            guard += 1;
            if guard > self.graph.vertex_count() {
                break;
            }
        }
        out
    }

    /// Deductions on the path from the root to `v`, root first.
    pub fn path(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut at = v;
        while let Some(p) = self.parent(at) {
            if out.len() > self.graph.vertex_count() {
                break;
            }
            out.push(p);
            at = p;
        }
        out.reverse();
        out
    }

    /// Open goals in depth-first, leftmost-first order.
    pub fn open_goals(&self) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        let mut seen = BTreeSet::new();
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            if self.status(v) == Some(Status::Goal) {
                out.push(v);
            }
            let children = self.children(v);
            stack.extend(children.into_iter().rev().map(|(_, c)| c));
        }
        out
    }

    /// The leftmost open goal.
    pub fn focus(&self) -> Option<VertexId> {
        self.open_goals().into_iter().next()
    }

    pub fn is_complete(&self) -> bool {
        self.open_goals().is_empty()
    }

    fn require_goal(&self, v: VertexId) -> Result<(), ProofError> {
        match self.status(v) {
            Some(Status::Goal) => Ok(()),
            Some(_) => Err(ProofError::NotAGoal(v)),
            None => Err(ProofError::NotADeduction(v)),
        }
    }

    /// Replaces the open goal `goal` by an application of `rule` with one new
    /// child goal per branch. With no branches the goal becomes an axiom leaf
    /// labelled with the rule.
    pub fn expand(&mut self, goal: VertexId, rule: &str, branches: &[Branch]) -> Result<Vec<VertexId>, ProofError> {
        self.require_goal(goal)?;
        let g = &mut self.graph;
        let el = ElementId::Vertex(goal);
        g.set_property(el, RULE_KEY, text(rule)).expect("goal exists");
        if branches.is_empty() {
            g.set_property(el, STATUS_KEY, text("leaf")).expect("goal exists");
            g.set_property(el, LEAF_KIND_KEY, text(LeafKind::Axiom.as_str()))
                .expect("goal exists");
            return Ok(Vec::new());
        }
        g.set_property(el, STATUS_KEY, text("regular")).expect("goal exists");
        let mut children = Vec::with_capacity(branches.len());
        for (i, b) in branches.iter().enumerate() {
            let fv = self.formulas.intern(&mut self.graph, &b.goal);
            let child = self
                .graph
                .add_vertex([DEDUCTION_LABEL], [(STATUS_KEY, text("goal"))])
                .expect("distinct keys");
            self.graph
                .add_edge(child, fv, [DERIVES_LABEL], [] as [(&str, Value); 0])
                .expect("vertices exist");
            self.graph
                .add_edge(
                    goal,
                    child,
                    [PREMISE_LABEL],
                    [(ROLE_KEY, text(&b.role)), (INDEX_KEY, Value::Int(i as i64 + 1))],
                )
                .expect("vertices exist");
            let mut seen = BTreeSet::new();
            for h in &b.hypotheses {
                if !seen.insert(h) {
                    continue;
                }
                let hv = self.formulas.intern(&mut self.graph, h);
                self.graph
                    .add_edge(child, hv, [INTRODUCES_LABEL], [] as [(&str, Value); 0])
                    .expect("vertices exist");
            }
            children.push(child);
        }
        Ok(children)
    }

    /// Closes `goal` as a leaf when its formula is a hypothesis in scope.
    pub fn close_with_hypothesis(&mut self, goal: VertexId) -> Result<(), ProofError> {
        self.require_goal(goal)?;
        let f = self.formula_of(goal).expect("goal derives a formula").clone();
        if !self.hypotheses(goal).contains(&f) {
            return Err(ProofError::NotAHypothesis { formula: f.to_sexpr() });
        }
        let el = ElementId::Vertex(goal);
        self.graph
            .set_property(el, STATUS_KEY, text("leaf"))
            .expect("goal exists");
        self.graph
            .set_property(el, LEAF_KIND_KEY, text(LeafKind::Hypothesis.as_str()))
            .expect("goal exists");
        Ok(())
    }

    pub fn mark(&self) -> Mark {
        self.graph.mark()
    }

    pub fn rollback(&mut self, mark: Mark) {
        self.graph.rollback(mark);
        self.formulas.sync(&self.graph);
    }

    /// Checks completeness and every structural invariant. `premise_counts`
    /// maps rule names to their number of premises.
    pub fn check_complete(&self, premise_counts: &BTreeMap<String, usize>) -> Completeness {
        let violations = self.violations(premise_counts);
        let open_goals = self
            .deductions()
            .filter(|v| self.status(*v) == Some(Status::Goal))
            .count();
        Completeness {
            complete: open_goals == 0 && violations.is_empty(),
            open_goals,
            violations,
        }
    }

    /// Invariant violations, each named; empty when the graph is well formed.
    pub fn violations(&self, premise_counts: &BTreeMap<String, usize>) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.graph.check_integrity() {
            out.push(format!("store integrity: {e}"));
        }
        let deductions: Vec<VertexId> = self.deductions().collect();
        for &v in &deductions {
            let derives: Vec<&EdgeRecord> = self
                .graph
                .out_edges(v)
                .filter(|(_, e)| e.has_label(DERIVES_LABEL))
                .map(|(_, e)| e)
                .collect();
            match derives.as_slice() {
                [e] if self.graph.vertex(e.dst).is_some_and(|r| r.has_label(FORMULA_LABEL)) => {}
                [_] => out.push(format!("deduction {v}: derives edge does not reach a formula")),
                [] => out.push(format!("deduction {v}: missing derives edge")),
                _ => out.push(format!("deduction {v}: {} derives edges", derives.len())),
            }
            for (eid, e) in self.graph.out_edges(v) {
                if e.has_label(PREMISE_LABEL) && !self.is_deduction(e.dst) {
                    out.push(format!("premise edge {eid} does not reach a deduction"));
                }
                if e.has_label(PREMISE_LABEL)
                    && (e.prop(ROLE_KEY).and_then(Value::as_text).is_none()
                        || e.prop(INDEX_KEY).and_then(Value::as_int).is_none())
                {
                    out.push(format!("premise edge {eid} lacks a role or index"));
                }
                if e.has_label(INTRODUCES_LABEL) && self.formulas.formula(e.dst).is_none() {
                    out.push(format!("introduces edge {eid} does not reach a formula"));
                }
            }
            let premises = self.premise_edges(v);
            let indices: Vec<i64> = premises.iter().map(|(i, _, _)| *i).collect();
            let expected: Vec<i64> = (1..=premises.len() as i64).collect();
            if indices != expected {
                out.push(format!(
                    "deduction {v}: premise indices {indices:?} are not 1..={}",
                    premises.len()
                ));
            }
            match self.status(v) {
                None => out.push(format!("deduction {v}: missing or unknown status")),
                Some(Status::Goal) => {
                    if !premises.is_empty() {
                        out.push(format!("goal {v} has premise edges"));
                    }
                }
                Some(Status::Leaf) => {
                    if !premises.is_empty() {
                        out.push(format!("leaf {v} has premise edges"));
                    }
                    match self.leaf_kind(v) {
                        Some("hypothesis") => {
                            if let Some(f) = self.formula_of(v) {
                                if !self.hypotheses(v).contains(f) {
                                    out.push(format!("leaf {v}: {f} is not a hypothesis in scope"));
                                }
                            }
                        }
                        Some("axiom") => {
                            if self.rule(v).is_none() {
                                out.push(format!("axiom leaf {v} names no rule"));
                            }
                        }
                        _ => out.push(format!("leaf {v}: missing or unknown leafKind")),
                    }
                }
                Some(Status::Regular) => match self.rule(v) {
                    None => out.push(format!("deduction {v}: rule application without a rule name")),
                    Some(rule) => match premise_counts.get(rule) {
                        None => out.push(format!("deduction {v}: unknown rule `{rule}`")),
                        Some(&n) if n != premises.len() => out.push(format!(
                            "deduction {v}: rule `{rule}` needs {n} premise edges, found {}",
                            premises.len()
                        )),
                        Some(_) => {}
                    },
                },
            }
        }
        // tree shape
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                out.push(format!("deduction {v} is reachable twice"));
                continue;
            }
            stack.extend(self.children(v).into_iter().map(|(_, c)| c));
        }
        for &v in &deductions {
            let parents = self
                .graph
                .in_edges(v)
                .filter(|(_, e)| e.has_label(PREMISE_LABEL))
                .count();
            if v == self.root && parents != 0 {
                out.push(format!("root {v} has a parent"));
            }
            if v != self.root && parents != 1 && seen.contains(&v) {
                out.push(format!("deduction {v} has {parents} parents"));
            }
            if !seen.contains(&v) {
                out.push(format!("deduction {v} is not reachable from the root"));
            }
        }
        if self.formula_of(self.root) != Some(&self.root_goal) {
            out.push("root does not derive the proof's goal".into());
        }
        out
    }

    /// Formulas referenced by derives edges that are neither subformulas of
    /// the root goal nor of any introduced hypothesis.
    pub fn outside_subformula_closure(&self) -> Vec<Formula> {
        let mut allowed = self.root_goal.subformulas();
        for v in self.deductions() {
            for h in self.introduced(v) {
                allowed.extend(h.subformulas());
            }
        }
        let mut out: Vec<Formula> = self
            .deductions()
            .filter_map(|v| self.formula_of(v))
            .filter(|f| !allowed.contains(*f))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Rebuilds a proof from a graph, checking every invariant except
    /// completeness.
    pub fn from_graph(
        graph: PropertyGraph,
        table: &OperatorTable,
        premise_counts: &BTreeMap<String, usize>,
    ) -> Result<Self, String> {
        let formulas = FormulaStore::rebuild(&graph, table)?;
        let roots: Vec<VertexId> = graph
            .vertices_with_label(DEDUCTION_LABEL)
            .filter(|(id, _)| !graph.in_edges(*id).any(|(_, e)| e.has_label(PREMISE_LABEL)))
            .map(|(id, _)| id)
            .collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err("no root deduction".into()),
            _ => return Err(format!("{} candidate root deductions", roots.len())),
        };
        let root_goal = graph
            .out_edges(root)
            .find(|(_, e)| e.has_label(DERIVES_LABEL))
            .and_then(|(_, e)| formulas.formula(e.dst).cloned())
            .ok_or("root deduction derives no formula")?;
        let mut state = ProofState {
            graph,
            formulas,
            root,
            root_goal,
        };
        state.graph.forget_history();
        match state.violations(premise_counts).into_iter().next() {
            Some(v) => Err(v),
            None => Ok(state),
        }
    }

    /// Direct graph access for tests that corrupt states on purpose.
    #[doc(hidden)]
    pub fn graph_mut(&mut self) -> &mut PropertyGraph {
        &mut self.graph
    }
}
