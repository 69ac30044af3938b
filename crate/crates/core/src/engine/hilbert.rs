use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;
use crate::proofgraph::{HilbertLine, HilbertState, Justification, ScopeError};

use super::proof::{Candidate, Preview};
use super::{instantiate, AxiomSchema, Calculus, EngineError, Rule, Step, StepArg};

/// Subformulas of the goal; axiom instances are drawn from these.
pub(crate) fn universe(st: &HilbertState) -> BTreeSet<Formula> {
    st.goal().subformulas()
}

fn substitutions(schema: &AxiomSchema, u: &BTreeSet<Formula>) -> Vec<BTreeMap<String, Formula>> {
    let mut out = vec![BTreeMap::new()];
    for m in schema.schema.metavariables() {
        let name = m.trim_start_matches('?').to_string();
        let mut next = Vec::with_capacity(out.len() * u.len());
        for s in &out {
            for f in u {
                let mut t = s.clone();
                t.insert(name.clone(), f.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn implication_of<'a>(f: &'a Formula, op: &str) -> Option<(&'a Formula, &'a Formula)> {
    (f.op() == Some(op) && f.operands().len() == 2).then(|| (&f.operands()[0], &f.operands()[1]))
}

fn line_preview(conclusion: Formula) -> Preview {
    Preview::Line {
        conclusion,
        closes: None,
    }
}

pub(crate) fn enumerate(st: &HilbertState, rule: &Rule) -> Vec<Candidate> {
    let mut out = Vec::new();
    match rule {
        Rule::Axiom(a) => {
            let u = universe(st);
            for s in substitutions(a, &u) {
                let f = instantiate(&a.schema, &s).expect("every metavariable bound");
                let mut step = Step::new(&a.name).result(f.to_sexpr());
                for (k, v) in &s {
                    step.args.insert(k.clone(), StepArg::from(v));
                }
                out.push(Candidate::new(step, line_preview(f)));
            }
        }
        Rule::ModusPonens { name, implication } => {
            for (j, major) in st.lines().iter().enumerate() {
                let Some((ante, cons)) = implication_of(&major.formula, implication) else {
                    continue;
                };
                for (i, minor) in st.lines().iter().enumerate() {
                    if &minor.formula == ante {
                        let step = Step::new(name).line("minor", i + 1).line("major", j + 1);
                        out.push(Candidate::new(step, line_preview(cons.clone())));
                    }
                }
            }
        }
        Rule::Necessitation { name, operator } => {
            for (i, l) in st.lines().iter().enumerate() {
                if l.deps.is_empty() {
                    let f = Formula::unary(operator, l.formula.clone());
                    out.push(Candidate::new(Step::new(name).line("line", i + 1), line_preview(f)));
                }
            }
        }
        _ => {}
    }
    out
}

fn line_arg(st: &HilbertState, rule: &str, step: &Step, key: &str) -> Result<usize, EngineError> {
    match step.args.get(key) {
        Some(StepArg::Line(n)) => {
            st.line(*n).ok_or(ScopeError::UnknownLine(*n))?;
            Ok(*n)
        }
        Some(_) => Err(EngineError::bad_arg(rule, key, "expected a line number")),
        None => Err(EngineError::bad_arg(rule, key, "missing line")),
    }
}

fn only_args(rule: &str, step: &Step, allowed: &[&str]) -> Result<(), EngineError> {
    match step.args.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(EngineError::bad_arg(rule, k, "the rule declares no such argument")),
        None => Ok(()),
    }
}

pub(crate) fn apply(calc: &Calculus, st: &mut HilbertState, step: &Step) -> Result<(), EngineError> {
    let rule = calc
        .rule(&step.rule)
        .ok_or_else(|| EngineError::UnknownRule(step.rule.clone()))?;
    let result = step.result.as_deref().map(|t| calc.table.parse(t)).transpose()?;
    let check_result = |f: &Formula| match &result {
        Some(r) if r != f => Err(EngineError::InvalidConclusion {
            rule: step.rule.clone(),
            formula: r.to_sexpr(),
        }),
        _ => Ok(()),
    };
    let line = match rule {
        Rule::Axiom(a) => {
            let mut subst = BTreeMap::new();
            let metas: Vec<String> = a
                .schema
                .metavariables()
                .into_iter()
                .map(|m| m.trim_start_matches('?').to_string())
                .collect();
            let allowed: Vec<&str> = metas.iter().map(String::as_str).collect();
            only_args(&a.name, step, &allowed)?;
            for m in &metas {
                match step.args.get(m) {
                    Some(StepArg::Formula(t)) => {
                        subst.insert(m.clone(), calc.table.parse(t)?);
                    }
                    Some(_) => return Err(EngineError::bad_arg(&a.name, m, "expected a formula")),
                    None => return Err(EngineError::bad_arg(&a.name, m, "missing substitution")),
                }
            }
            let f = instantiate(&a.schema, &subst).expect("every metavariable bound");
            check_result(&f)?;
            HilbertLine {
                formula: f,
                rule: a.name.clone(),
                justification: Justification::Axiom {
                    schema: a.name.clone(),
                    substitution: subst,
                },
                deps: BTreeSet::new(),
            }
        }
        Rule::ModusPonens { name, implication } => {
            only_args(name, step, &["minor", "major"])?;
            let mut minor = line_arg(st, name, step, "minor")?;
            let mut major = line_arg(st, name, step, "major")?;
            let fits = |minor: usize, major: usize| {
                let m = &st.line(minor).expect("checked").formula;
                implication_of(&st.line(major).expect("checked").formula, implication)
                    .filter(|(ante, _)| *ante == m)
                    .map(|(_, cons)| cons.clone())
            };
            let conclusion = match fits(minor, major) {
                Some(c) => c,
                None => match fits(major, minor) {
                    Some(c) => {
                        std::mem::swap(&mut minor, &mut major);
                        c
                    }
                    None => return Err(EngineError::NonMatchingMP { minor, major }),
                },
            };
            check_result(&conclusion)?;
            let mut deps = st.line(minor).expect("checked").deps.clone();
            deps.extend(st.line(major).expect("checked").deps.iter().copied());
            HilbertLine {
                formula: conclusion,
                rule: name.clone(),
                justification: Justification::ModusPonens { minor, major },
                deps,
            }
        }
        Rule::Necessitation { name, operator } => {
            only_args(name, step, &["line"])?;
            let n = line_arg(st, name, step, "line")?;
            let premise = st.line(n).expect("checked");
            if !premise.deps.is_empty() {
                return Err(EngineError::NecessitationUnderHypothesis { line: n });
            }
            let f = Formula::unary(operator, premise.formula.clone());
            check_result(&f)?;
            HilbertLine {
                formula: f,
                rule: name.clone(),
                justification: Justification::Necessitation { line: n },
                deps: BTreeSet::new(),
            }
        }
        Rule::Hypothesis { name } => {
            only_args(name, step, &[])?;
            let f = result
                .clone()
                .ok_or_else(|| EngineError::MissingResultFormula { rule: name.clone() })?;
            HilbertLine {
                formula: f,
                rule: name.clone(),
                justification: Justification::Hypothesis,
                deps: BTreeSet::from([st.lines().len() + 1]),
            }
        }
        other => return Err(EngineError::not_applicable(other.name(), "not a Hilbert rule")),
    };
    st.push(line);
    Ok(())
}
