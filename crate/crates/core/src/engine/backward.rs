use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;
use crate::graphstore::VertexId;
use crate::proofgraph::{Branch, ProofState};
use crate::refspec::{eval, RefContext};

use super::proof::{Candidate, Preview};
use super::{ArgSource, BackwardRule, Calculus, EngineError, Rule, Step, StepArg};

pub(crate) fn resolve_target(st: &ProofState, target: Option<&str>) -> Result<VertexId, EngineError> {
    match target {
        None => st.focus().ok_or(EngineError::NoOpenGoal),
        Some(t) => {
            let v: VertexId = t.parse().map_err(|_| EngineError::UnknownTarget(t.to_string()))?;
            if st.is_deduction(v) {
                Ok(v)
            } else {
                Err(EngineError::UnknownTarget(t.to_string()))
            }
        }
    }
}

struct Scope<'a> {
    frame: &'a Formula,
    universe: &'a BTreeSet<Formula>,
    hypotheses: &'a BTreeSet<Formula>,
}

fn source_values(
    source: &ArgSource,
    scope: &Scope<'_>,
    args: &BTreeMap<String, Formula>,
) -> Result<BTreeSet<Formula>, EngineError> {
    let by_head = |set: &BTreeSet<Formula>, op: &Option<String>| {
        set.iter()
            .filter(|f| op.as_deref().is_none_or(|o| f.head() == o))
            .cloned()
            .collect()
    };
    Ok(match source {
        ArgSource::Ref(spec) => eval(spec, RefContext::new(scope.frame, scope.universe, args))?,
        ArgSource::Universe(op) => by_head(scope.universe, op),
        ArgSource::Hypotheses(op) => by_head(scope.hypotheses, op),
    })
}

fn assignments(rule: &BackwardRule, scope: &Scope<'_>) -> Result<Vec<BTreeMap<String, Formula>>, EngineError> {
    let mut out = vec![BTreeMap::new()];
    for (name, source) in &rule.args {
        let mut next = Vec::new();
        for a in out {
            for f in source_values(source, scope, &a)? {
                let mut b = a.clone();
                b.insert(name.clone(), f);
                next.push(b);
            }
        }
        out = next;
    }
    Ok(out)
}

fn branches(
    rule: &BackwardRule,
    scope: &Scope<'_>,
    args: &BTreeMap<String, Formula>,
) -> Result<Vec<Branch>, EngineError> {
    let ctx = RefContext::new(scope.frame, scope.universe, args);
    let mut out = Vec::with_capacity(rule.branches.len());
    for b in &rule.branches {
        let goals = eval(&b.goal, ctx)?;
        if goals.len() != 1 {
            return Err(EngineError::AmbiguousBranchGoal {
                rule: rule.name.clone(),
                branch: b.role.clone(),
                count: goals.len(),
            });
        }
        let mut hypotheses = Vec::new();
        for h in &b.hypotheses {
            hypotheses.extend(eval(h, ctx)?);
        }
        out.push(Branch {
            role: b.role.clone(),
            goal: goals.into_iter().next().expect("one goal"),
            hypotheses,
        });
    }
    Ok(out)
}

fn step_for(rule: &str, goal: VertexId, args: &BTreeMap<String, Formula>) -> Step {
    let mut step = Step::new(rule).target(goal.to_string());
    for (k, f) in args {
        step.args.insert(k.clone(), StepArg::from(f));
    }
    step
}

pub(crate) fn enumerate(st: &ProofState, rule: &Rule, goal: VertexId) -> Result<Vec<Candidate>, EngineError> {
    if st.status(goal) != Some(crate::proofgraph::Status::Goal) {
        return Ok(Vec::new());
    }
    let frame = st.formula_of(goal).expect("goal derives a formula");
    let hypotheses = st.hypotheses(goal);
    match rule {
        Rule::Leaf { name } => Ok(if hypotheses.contains(frame) {
            vec![Candidate::new(step_for(name, goal, &BTreeMap::new()), Preview::Leaf)]
        } else {
            Vec::new()
        }),
        Rule::Backward(r) => {
            let universe = st.universe();
            let scope = Scope {
                frame,
                universe: &universe,
                hypotheses: &hypotheses,
            };
            let mut out = Vec::new();
            for a in assignments(r, &scope)? {
                let preview = match branches(r, &scope, &a) {
                    Ok(bs) => Preview::Branches { goal, branches: bs },
                    Err(EngineError::AmbiguousBranchGoal { .. }) => Preview::Ambiguous,
                    Err(e) => return Err(e),
                };
                out.push(Candidate::new(step_for(&r.name, goal, &a), preview));
            }
            Ok(out)
        }
        _ => Ok(Vec::new()),
    }
}

pub(crate) fn apply(calc: &Calculus, st: &mut ProofState, step: &Step) -> Result<(), EngineError> {
    let rule = calc
        .rule(&step.rule)
        .ok_or_else(|| EngineError::UnknownRule(step.rule.clone()))?;
    let goal = resolve_target(st, step.target.as_deref())?;
    match rule {
        Rule::Leaf { name } => {
            if let Some(arg) = step.args.keys().next() {
                return Err(EngineError::bad_arg(name, arg, "the rule takes no arguments"));
            }
            st.close_with_hypothesis(goal)?;
            Ok(())
        }
        Rule::Backward(r) => {
            let mut given = BTreeMap::new();
            for (k, v) in &step.args {
                if !r.args.iter().any(|(n, _)| n == k) {
                    return Err(EngineError::bad_arg(&r.name, k, "the rule declares no such argument"));
                }
                let StepArg::Formula(text) = v else {
                    return Err(EngineError::bad_arg(&r.name, k, "expected a formula"));
                };
                given.insert(k.clone(), calc.table.parse(text)?);
            }
            if st.status(goal) != Some(crate::proofgraph::Status::Goal) {
                return Err(crate::proofgraph::ProofError::NotAGoal(goal).into());
            }
            let frame = st.formula_of(goal).expect("goal derives a formula").clone();
            let hypotheses = st.hypotheses(goal);
            let universe = st.universe();
            let scope = Scope {
                frame: &frame,
                universe: &universe,
                hypotheses: &hypotheses,
            };
            let mut matching: Vec<_> = assignments(r, &scope)?
                .into_iter()
                .filter(|a| given.iter().all(|(k, f)| a.get(k) == Some(f)))
                .collect();
            let args = match matching.len() {
                0 => {
                    let reason = if given.is_empty() {
                        format!("no arguments satisfy the rule at goal {}", frame)
                    } else {
                        let shown: Vec<String> = given.iter().map(|(k, f)| format!("{k} = {f}")).collect();
                        format!("{} does not satisfy the rule at goal {}", shown.join(", "), frame)
                    };
                    return Err(EngineError::not_applicable(&r.name, reason));
                }
                1 => matching.pop().expect("one assignment"),
                count => {
                    return Err(EngineError::AmbiguousArguments {
                        rule: r.name.clone(),
                        count,
                    })
                }
            };
            let bs = branches(r, &scope, &args)?;
            st.expand(goal, &r.name, &bs)?;
            Ok(())
        }
        other => Err(EngineError::not_applicable(other.name(), "not a backward rule")),
    }
}
