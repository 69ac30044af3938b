use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;
use crate::proofgraph::{Citation, FitchState};
use crate::refspec::{eval, RefContext};

use super::proof::{Candidate, Preview};
use super::{
    instantiate, Calculus, ConclusionSpec, EngineError, FitchRule, OpenRule, PremiseSpec, Rule, Step, StepArg,
};

/// Subformulas of the goal and of every line.
pub(crate) fn universe(st: &FitchState) -> BTreeSet<Formula> {
    let mut u = st.goal().subformulas();
    for l in st.lines() {
        u.extend(l.formula.subformulas());
    }
    u
}

/// Formulas standing on lines citable at the current position.
pub(crate) fn available(st: &FitchState) -> BTreeSet<Formula> {
    st.citable_lines(false)
        .into_iter()
        .map(|n| st.line(n).expect("citable").formula.clone())
        .collect()
}

/// Formulas standing on lines directly inside the innermost open subproof
/// (or at top level when none is open).
pub(crate) fn local(st: &FitchState) -> BTreeSet<Formula> {
    let here = st.innermost();
    st.lines()
        .iter()
        .filter(|l| l.context == here)
        .map(|l| l.formula.clone())
        .collect()
}

struct Binding {
    args: BTreeMap<String, Formula>,
    citations: Vec<(String, Citation)>,
    /// End line of a cited innermost open subproof, which the step closes.
    closes: Option<usize>,
}

fn satisfies(
    spec: &crate::refspec::RefSpec,
    frame: &Formula,
    u: &BTreeSet<Formula>,
    args: &BTreeMap<String, Formula>,
) -> Result<bool, EngineError> {
    Ok(!eval(spec, RefContext::new(frame, u, args))?.is_empty())
}

/// Binds one premise to a citation. `Ok(None)` when the citation does not
/// fit the premise.
fn bind(
    st: &FitchState,
    premise: &PremiseSpec,
    citation: Citation,
    u: &BTreeSet<Formula>,
    b: &Binding,
    rule: &str,
) -> Result<Option<Binding>, EngineError> {
    let mut args = b.args.clone();
    let mut closes = b.closes;
    match (premise, citation) {
        (PremiseSpec::Line { role, spec, outer }, Citation::Line(n)) => {
            let f = st.check_line(n, *outer)?.formula.clone();
            if !satisfies(spec, &f, u, &args)? {
                return Ok(None);
            }
            args.insert(role.clone(), f);
        }
        (PremiseSpec::Subproof { role, hypothesis, last }, Citation::Subproof([s, e])) => {
            let (_, closing) = st.check_subproof(s, e)?;
            let hyp = st.line(s).expect("checked").formula.clone();
            let end = st.line(e).expect("checked").formula.clone();
            if !satisfies(hypothesis, &hyp, u, &args)? || !satisfies(last, &end, u, &args)? {
                return Ok(None);
            }
            if closing {
                if closes.is_some_and(|c| c != e) {
                    return Ok(None);
                }
                closes = Some(e);
            }
            args.insert(role.clone(), end);
            args.insert(format!("{role}.hyp"), hyp);
        }
        (p, _) => {
            return Err(EngineError::bad_arg(
                rule,
                p.role(),
                match p {
                    PremiseSpec::Line { .. } => "expected a line number",
                    PremiseSpec::Subproof { .. } => "expected a subproof range",
                },
            ))
        }
    }
    let mut citations = b.citations.clone();
    citations.push((premise.role().to_string(), citation));
    Ok(Some(Binding {
        args,
        citations,
        closes,
    }))
}

/// After closing a subproof, every other cited line must still be in scope.
fn still_citable(st: &FitchState, rule: &FitchRule, b: &Binding) -> Result<Option<FitchState>, EngineError> {
    if b.closes.is_none() {
        return Ok(None);
    }
    let mut after = st.clone();
    after.close_subproof()?;
    for (p, (_, c)) in rule.premises.iter().zip(&b.citations) {
        match (p, c) {
            (PremiseSpec::Line { outer, .. }, Citation::Line(n)) => {
                after.check_line(*n, *outer)?;
            }
            (_, Citation::Subproof([s, e])) => {
                after.check_subproof(*s, *e)?;
            }
            _ => {}
        }
    }
    Ok(Some(after))
}

/// Conclusions admitted by `spec`; for `Check`, candidates come from `pool`.
fn conclusions(
    spec: &ConclusionSpec,
    frame: &Formula,
    u: &BTreeSet<Formula>,
    args: &BTreeMap<String, Formula>,
    pool: &BTreeSet<Formula>,
) -> Result<BTreeSet<Formula>, EngineError> {
    Ok(match spec {
        ConclusionSpec::Refs(specs) => {
            let mut out = BTreeSet::new();
            for s in specs {
                out.extend(eval(s, RefContext::new(frame, u, args))?);
            }
            out
        }
        ConclusionSpec::Schema(t) => instantiate(t, args).into_iter().collect(),
        ConclusionSpec::Check(s) => {
            let mut out = BTreeSet::new();
            for c in pool {
                if satisfies(s, c, u, args)? {
                    out.insert(c.clone());
                }
            }
            out
        }
    })
}

fn target_args(st: &FitchState) -> BTreeMap<String, Formula> {
    BTreeMap::from([("target".to_string(), st.target().clone())])
}

fn line_bindings(st: &FitchState, rule: &FitchRule, u: &BTreeSet<Formula>) -> Result<Vec<Binding>, EngineError> {
    let mut out = vec![Binding {
        args: target_args(st),
        citations: Vec::new(),
        closes: None,
    }];
    for p in &rule.premises {
        let options: Vec<Citation> = match p {
            PremiseSpec::Line { outer, .. } => st.citable_lines(*outer).into_iter().map(Citation::Line).collect(),
            PremiseSpec::Subproof { .. } => st.citable_subproofs().into_iter().map(Citation::Subproof).collect(),
        };
        let mut next = Vec::new();
        for b in &out {
            for c in &options {
                if let Some(nb) = bind(st, p, *c, u, b, &rule.name)? {
                    next.push(nb);
                }
            }
        }
        out = next;
    }
    let mut kept = Vec::with_capacity(out.len());
    for b in out {
        if b.closes.is_none() || still_citable(st, rule, &b).is_ok() {
            kept.push(b);
        }
    }
    Ok(kept)
}

fn frames(st: &FitchState, u: &BTreeSet<Formula>) -> Vec<Formula> {
    let target = st.target().clone();
    let mut out = vec![target.clone()];
    out.extend(u.iter().filter(|f| **f != target).cloned());
    out
}

fn open_options(
    rule: &OpenRule,
    frame: &Formula,
    u: &BTreeSet<Formula>,
) -> Result<Vec<(Formula, Option<Formula>)>, EngineError> {
    let args = BTreeMap::from([("target".to_string(), frame.clone())]);
    let mut out = Vec::new();
    for h in conclusions(&rule.hypothesis, frame, u, &args, u)? {
        match aim(rule, frame, &h, u)? {
            Some(Some(a)) => out.push((h, Some(a))),
            Some(None) => out.push((h, None)),
            None => {}
        }
    }
    Ok(out)
}

/// The aim of a subproof opened with hypothesis `h` from `frame`:
/// `Some(None)` for rules without aims, `None` when the aim is not unique.
fn aim(
    rule: &OpenRule,
    frame: &Formula,
    h: &Formula,
    u: &BTreeSet<Formula>,
) -> Result<Option<Option<Formula>>, EngineError> {
    let Some(spec) = &rule.aim else {
        return Ok(Some(None));
    };
    let args = BTreeMap::from([
        ("target".to_string(), frame.clone()),
        ("hypothesis".to_string(), h.clone()),
    ]);
    let aims = eval(spec, RefContext::new(frame, u, &args))?;
    Ok((aims.len() == 1).then(|| aims.into_iter().next()))
}

pub(crate) fn enumerate(st: &FitchState, rule: &Rule) -> Result<Vec<Candidate>, EngineError> {
    let u = universe(st);
    match rule {
        Rule::Fitch(r) => {
            let mut out = Vec::new();
            for b in line_bindings(st, r, &u)? {
                let after = still_citable(st, r, &b)?;
                let at = after.as_ref().unwrap_or(st);
                let mut args = b.args.clone();
                args.insert("target".into(), at.target().clone());
                for c in conclusions(&r.conclusion, at.target(), &u, &args, &u)? {
                    let mut step = Step::new(&r.name).result(c.to_sexpr());
                    for (role, cit) in &b.citations {
                        step.args.insert(role.clone(), StepArg::from(*cit));
                    }
                    out.push(Candidate::new(
                        step,
                        Preview::Line {
                            conclusion: c,
                            closes: b.closes,
                        },
                    ));
                }
            }
            Ok(out)
        }
        Rule::Open(r) => {
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for frame in frames(st, &u) {
                for (h, a) in open_options(r, &frame, &u)? {
                    if !seen.insert((h.clone(), a.clone())) {
                        continue;
                    }
                    let step = Step::new(&r.name).arg("frame", &frame).result(h.to_sexpr());
                    out.push(Candidate::new(
                        step,
                        Preview::Open {
                            frame: frame.clone(),
                            hypothesis: h,
                        },
                    ));
                }
            }
            Ok(out)
        }
        _ => Ok(Vec::new()),
    }
}

fn parse_result(calc: &Calculus, step: &Step) -> Result<Option<Formula>, EngineError> {
    step.result
        .as_deref()
        .map(|t| calc.table.parse(t))
        .transpose()
        .map_err(Into::into)
}

/// Picks the conclusion: the supplied result if admissible, else the unique
/// admissible formula.
fn choose(
    rule: &str,
    spec: &ConclusionSpec,
    frame: &Formula,
    u: &BTreeSet<Formula>,
    args: &BTreeMap<String, Formula>,
    result: Option<Formula>,
) -> Result<Formula, EngineError> {
    match result {
        Some(f) => {
            let pool = BTreeSet::from([f.clone()]);
            let mut wider = u.clone();
            wider.extend(f.subformulas());
            if conclusions(spec, frame, &wider, args, &pool)?.contains(&f) {
                Ok(f)
            } else {
                Err(EngineError::InvalidConclusion {
                    rule: rule.to_string(),
                    formula: f.to_sexpr(),
                })
            }
        }
        None => {
            if matches!(spec, ConclusionSpec::Check(_)) {
                return Err(EngineError::MissingResultFormula { rule: rule.to_string() });
            }
            let all = conclusions(spec, frame, u, args, u)?;
            match all.len() {
                0 => Err(EngineError::not_applicable(rule, "no conclusion is admissible")),
                1 => Ok(all.into_iter().next().expect("one conclusion")),
                _ => Err(EngineError::MissingResultFormula { rule: rule.to_string() }),
            }
        }
    }
}

pub(crate) fn apply(calc: &Calculus, st: &mut FitchState, step: &Step) -> Result<(), EngineError> {
    let rule = calc
        .rule(&step.rule)
        .ok_or_else(|| EngineError::UnknownRule(step.rule.clone()))?;
    let u = universe(st);
    match rule {
        Rule::Fitch(r) => {
            for k in step.args.keys() {
                if !r.premises.iter().any(|p| p.role() == k) {
                    return Err(EngineError::bad_arg(&r.name, k, "the rule declares no such premise"));
                }
            }
            let mut b = Binding {
                args: target_args(st),
                citations: Vec::new(),
                closes: None,
            };
            for p in &r.premises {
                let arg = step
                    .args
                    .get(p.role())
                    .ok_or_else(|| EngineError::bad_arg(&r.name, p.role(), "missing citation"))?;
                let c = arg
                    .citation()
                    .ok_or_else(|| EngineError::bad_arg(&r.name, p.role(), "expected a citation"))?;
                b = bind(st, p, c, &u, &b, &r.name)?.ok_or_else(|| {
                    EngineError::not_applicable(&r.name, format!("line {c} does not fit premise `{}`", p.role()))
                })?;
            }
            let after = still_citable(st, r, &b)?;
            let at = after.as_ref().unwrap_or(st);
            let mut args = b.args.clone();
            args.insert("target".into(), at.target().clone());
            let result = parse_result(calc, step)?;
            let conclusion = choose(&r.name, &r.conclusion, at.target(), &u, &args, result)?;
            if let Some(after) = after {
                *st = after;
            }
            st.push_line(conclusion, &r.name, b.citations);
            Ok(())
        }
        Rule::Open(r) => {
            if let Some(k) = step.args.keys().find(|k| *k != "frame") {
                return Err(EngineError::bad_arg(&r.name, k, "the rule declares no such argument"));
            }
            let frame = match step.args.get("frame") {
                None => st.target().clone(),
                Some(StepArg::Formula(t)) => {
                    let f = calc.table.parse(t)?;
                    if &f != st.target() && !u.contains(&f) {
                        return Err(EngineError::bad_arg(
                            &r.name,
                            "frame",
                            format!("{f} is not in the proof's universe"),
                        ));
                    }
                    f
                }
                Some(_) => return Err(EngineError::bad_arg(&r.name, "frame", "expected a formula")),
            };
            let args = BTreeMap::from([("target".to_string(), frame.clone())]);
            let result = parse_result(calc, step)?;
            let h = choose(&r.name, &r.hypothesis, &frame, &u, &args, result)?;
            let a = aim(r, &frame, &h, &u)?
                .ok_or_else(|| EngineError::not_applicable(&r.name, format!("no unique aim from frame {frame}")))?;
            st.open_subproof(h, &r.name, r.strict, a);
            Ok(())
        }
        other => Err(EngineError::not_applicable(other.name(), "not a Fitch rule")),
    }
}
