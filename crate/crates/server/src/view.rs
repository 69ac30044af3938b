use graphlf::engine::{Calculus, Candidate, Proof, State, Step, Style};
use graphlf::formula::{Formula, RenderStyle};
use graphlf::graphstore::VertexId;
use graphlf::proofgraph::{Justification, ProofState};
use graphlf::systems::DeductiveSystem;
use serde::Serialize;

use crate::session::Session;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaView {
    pub sexpr: String,
    pub display: String,
}

impl FormulaView {
    pub fn new(calc: &Calculus, f: &Formula) -> Self {
        FormulaView {
            sexpr: f.to_sexpr(),
            display: calc.table.render(f, RenderStyle::Infix),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GoalView {
    pub id: String,
    pub formula: FormulaView,
    pub hypotheses: Vec<FormulaView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChildView {
    pub role: String,
    pub id: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeView {
    pub id: String,
    pub formula: FormulaView,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_kind: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub introduces: Vec<FormulaView>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ChildView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeView {
    pub root: String,
    pub nodes: Vec<NodeView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LineView {
    pub number: usize,
    pub formula: FormulaView,
    pub rule: String,
    pub depth: usize,
    pub citations: Vec<String>,
    pub opens: bool,
}

/// Snapshot of a session as sent to clients.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StateView {
    pub session_id: String,
    pub owner: String,
    pub system: String,
    pub kind: Style,
    pub goal: FormulaView,
    pub version: u64,
    pub complete: bool,
    pub report: String,
    pub steps: Vec<Step>,
    pub created_at: u64,
    pub updated_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub open_goals: Option<Vec<GoalView>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<LineView>>,
}

fn goal_view(calc: &Calculus, s: &ProofState, g: VertexId) -> GoalView {
    GoalView {
        id: g.to_string(),
        formula: FormulaView::new(calc, s.formula_of(g).expect("goals derive a formula")),
        hypotheses: s.hypotheses(g).iter().map(|h| FormulaView::new(calc, h)).collect(),
    }
}

fn tree_view(calc: &Calculus, s: &ProofState) -> TreeView {
    let mut nodes: Vec<NodeView> = s
        .deductions()
        .map(|v| NodeView {
            id: v.to_string(),
            formula: FormulaView::new(calc, s.formula_of(v).expect("deductions derive a formula")),
            status: s.status(v).map_or("goal", |x| x.as_str()),
            rule: s.rule(v).map(str::to_string),
            leaf_kind: s.leaf_kind(v).map(str::to_string),
            introduces: s.introduced(v).iter().map(|h| FormulaView::new(calc, h)).collect(),
            children: s
                .children(v)
                .into_iter()
                .map(|(role, c)| ChildView {
                    role,
                    id: c.to_string(),
                })
                .collect(),
        })
        .collect();
    nodes.sort_by_key(|n| n.id[1..].parse::<u64>().unwrap_or(u64::MAX));
    TreeView {
        root: s.root().to_string(),
        nodes,
    }
}

fn justification(j: &Justification) -> Vec<String> {
    match j {
        Justification::ModusPonens { minor, major } => vec![minor.to_string(), major.to_string()],
        Justification::Necessitation { line } => vec![line.to_string()],
        Justification::Axiom { .. } | Justification::Hypothesis => Vec::new(),
    }
}

pub fn state_view(session: &Session) -> StateView {
    let proof: &Proof = &session.proof;
    let calc = proof.calculus();
    let (mut open_goals, mut tree, mut lines) = (None, None, None);
    match proof.state() {
        State::Backward(s) => {
            open_goals = Some(s.open_goals().into_iter().map(|g| goal_view(calc, s, g)).collect());
            tree = Some(tree_view(calc, s));
        }
        State::Fitch(s) => {
            lines = Some(
                s.lines()
                    .iter()
                    .enumerate()
                    .map(|(i, l)| LineView {
                        number: i + 1,
                        formula: FormulaView::new(calc, &l.formula),
                        rule: l.rule.clone(),
                        depth: l.depth,
                        citations: l.citations.iter().map(|(_, c)| c.to_string()).collect(),
                        opens: l.opens,
                    })
                    .collect(),
            );
        }
        State::Hilbert(s) => {
            lines = Some(
                s.lines()
                    .iter()
                    .enumerate()
                    .map(|(i, l)| LineView {
                        number: i + 1,
                        formula: FormulaView::new(calc, &l.formula),
                        rule: l.rule.clone(),
                        depth: 0,
                        citations: justification(&l.justification),
                        opens: false,
                    })
                    .collect(),
            );
        }
    }
    StateView {
        session_id: session.id.clone(),
        owner: session.owner.clone(),
        system: session.system.name.clone(),
        kind: calc.style,
        goal: FormulaView::new(calc, proof.goal()),
        version: session.version,
        complete: proof.is_complete(),
        report: proof.report(),
        steps: proof.steps(),
        created_at: session.created_at,
        updated_at: session.updated_at,
        open_goals,
        tree,
        lines,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchView {
    pub role: String,
    pub goal: FormulaView,
    pub hypotheses: Vec<FormulaView>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateView {
    pub step: Step,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<FormulaView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchView>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleCandidates {
    pub rule: String,
    pub candidates: Vec<CandidateView>,
}

/// Candidates grouped by rule, in the system's rule order.
pub fn candidates_view(calc: &Calculus, rules: &[String], cands: Vec<Candidate>) -> Vec<RuleCandidates> {
    let mut out: Vec<RuleCandidates> = rules
        .iter()
        .map(|r| RuleCandidates {
            rule: r.clone(),
            candidates: Vec::new(),
        })
        .collect();
    for c in cands {
        let view = CandidateView {
            conclusion: c.conclusion().map(|f| FormulaView::new(calc, f)),
            branches: c.branches().map(|bs| {
                bs.iter()
                    .map(|b| BranchView {
                        role: b.role.clone(),
                        goal: FormulaView::new(calc, &b.goal),
                        hypotheses: b.hypotheses.iter().map(|h| FormulaView::new(calc, h)).collect(),
                    })
                    .collect()
            }),
            step: c.step,
        };
        match out.iter_mut().find(|r| r.rule == view.step.rule) {
            Some(r) => r.candidates.push(view),
            None => out.push(RuleCandidates {
                rule: view.step.rule.clone(),
                candidates: vec![view],
            }),
        }
    }
    out.retain(|r| !r.candidates.is_empty());
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleView {
    pub name: String,
    pub kind: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemView {
    pub name: String,
    pub description: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extends: Option<String>,
    pub kind: Style,
    pub operators: Vec<graphlf::formula::Operator>,
    pub constants: Vec<graphlf::formula::Constant>,
    pub rules: Vec<RuleView>,
    pub strategies: Vec<String>,
    pub tactics: Vec<String>,
    pub examples: Vec<String>,
}

pub fn system_view(sys: &DeductiveSystem) -> SystemView {
    SystemView {
        name: sys.name.clone(),
        description: sys.description.clone(),
        extends: sys.extends.clone(),
        kind: sys.style(),
        operators: sys.table().operators().to_vec(),
        constants: sys.table().constants().to_vec(),
        rules: sys
            .rules()
            .iter()
            .map(|r| RuleView {
                name: r.name().to_string(),
                kind: r.kind(),
            })
            .collect(),
        strategies: sys.strategies.iter().map(|(n, _)| n.clone()).collect(),
        tactics: sys.tactics.iter().map(|(n, _)| n.clone()).collect(),
        examples: sys.examples.clone(),
    }
}
