#![allow(dead_code)]

pub mod graphs;

use std::collections::{BTreeMap, BTreeSet};

use graphlf::engine::{Filter, Proof, Step, Style, END, QED};
use graphlf::formula::Formula;
use graphlf::graphstore::{GraphDocument, PropertyGraph};
use graphlf::systems::{DeductiveSystem, Registry};
use graphlf::tactics::{run, Outcome, Tactic};
use proptest::prelude::*;

pub const WORKED_GOAL: &str = "(-> (-> (and A B) C) (-> B (-> A C)))";

pub fn system(name: &str) -> DeductiveSystem {
    Registry::builtin().get(name).expect("built-in system")
}

/// The worked example as a script of backward steps.
pub fn worked_script() -> Vec<Step> {
    vec![
        Step::new("impI"),
        Step::new("impI"),
        Step::new("impI"),
        Step::new("impE").formula_arg("major", "(-> (and A B) C)"),
        Step::new("andI"),
        Step::new("hyp"),
        Step::new("hyp"),
        Step::new("hyp"),
    ]
}

pub fn run_script(sys: &DeductiveSystem, goal: &str, script: &[Step]) -> Proof {
    let mut p = sys.new_proof(goal).expect("goal parses");
    for s in script {
        p.apply(s).unwrap_or_else(|e| panic!("step {s}: {e}"));
    }
    p
}

/// A hand-written natural deduction tree: conclusion, discharged
/// hypotheses, premises.
pub struct Tree {
    pub conclusion: &'static str,
    pub discharges: Vec<&'static str>,
    pub premises: Vec<Tree>,
}

fn node(conclusion: &'static str, discharges: Vec<&'static str>, premises: Vec<Tree>) -> Tree {
    Tree {
        conclusion,
        discharges,
        premises,
    }
}

pub fn worked_tree() -> Tree {
    let a = node("A", vec![], vec![]);
    let b = node("B", vec![], vec![]);
    let ab = node("(and A B)", vec![], vec![a, b]);
    let imp = node("(-> (and A B) C)", vec![], vec![]);
    let c = node("C", vec![], vec![ab, imp]);
    let ac = node("(-> A C)", vec!["A"], vec![c]);
    let bac = node("(-> B (-> A C))", vec!["B"], vec![ac]);
    node(WORKED_GOAL, vec!["(-> (and A B) C)"], vec![bac])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub formulas: usize,
    pub deductions: usize,
    pub derives: usize,
    pub premises: usize,
}

/// Counts by recursion over the tree. Formulas are shared, so the formula
/// count is the number of distinct subterms of everything mentioned.
pub fn tree_counts(t: &Tree) -> Counts {
    fn walk(t: &Tree, f: &mut BTreeSet<String>, c: &mut Counts) {
        subterms(t.conclusion, f);
        for d in &t.discharges {
            subterms(d, f);
        }
        c.deductions += 1;
        c.derives += 1;
        c.premises += t.premises.len();
        for p in &t.premises {
            walk(p, f, c);
        }
    }
    let mut f = BTreeSet::new();
    let mut c = Counts {
        formulas: 0,
        deductions: 0,
        derives: 0,
        premises: 0,
    };
    walk(t, &mut f, &mut c);
    c.formulas = f.len();
    c
}

/// Canonical text of every subterm of an s-expression, read token by token.
pub fn subterms(s: &str, out: &mut BTreeSet<String>) {
    let spaced = s.replace('(', " ( ").replace(')', " ) ");
    let toks: Vec<&str> = spaced.split_whitespace().collect();
    fn read(toks: &[&str], i: &mut usize, out: &mut BTreeSet<String>) -> String {
        let t = toks[*i];
        *i += 1;
        if t != "(" {
            out.insert(t.to_string());
            return t.to_string();
        }
        let mut parts = vec![toks[*i].to_string()];
        *i += 1;
        while toks[*i] != ")" {
            parts.push(read(toks, i, out));
        }
        *i += 1;
        let whole = format!("({})", parts.join(" "));
        out.insert(whole.clone());
        whole
    }
    read(&toks, &mut 0, out);
}

/// Counts read off an exported graph by label.
pub fn graph_counts(doc: &GraphDocument) -> Counts {
    let v = |l: &str| doc.vertices.iter().filter(|x| x.labels.iter().any(|y| y == l)).count();
    let e = |l: &str| doc.edges.iter().filter(|x| x.labels.iter().any(|y| y == l)).count();
    Counts {
        formulas: v("Formula"),
        deductions: v("Deduction"),
        derives: e("Derives"),
        premises: e("Premise"),
    }
}

/// Classical truth value; `box` is read as truth of its operand under every
/// valuation, which only matters for the modal examples.
pub fn eval(f: &Formula, v: &BTreeMap<String, bool>) -> bool {
    if let Some(a) = f.atom_name() {
        return match a {
            "bot" => false,
            "top" => true,
            _ => v[a],
        };
    }
    let o = f.operands();
    match f.op().unwrap() {
        "->" => !eval(&o[0], v) || eval(&o[1], v),
        "and" => eval(&o[0], v) && eval(&o[1], v),
        "or" => eval(&o[0], v) || eval(&o[1], v),
        "not" => !eval(&o[0], v),
        "box" => tautology(&o[0]),
        op => panic!("no truth table for {op}"),
    }
}

fn atoms(f: &Formula, out: &mut BTreeSet<String>) {
    match f.atom_name() {
        Some("bot") | Some("top") => {}
        Some(a) => {
            out.insert(a.to_string());
        }
        None => f.operands().iter().for_each(|g| atoms(g, out)),
    }
}

/// Exhaustive truth-table check.
pub fn tautology(f: &Formula) -> bool {
    let mut names = BTreeSet::new();
    atoms(f, &mut names);
    let names: Vec<String> = names.into_iter().collect();
    assert!(names.len() <= 4, "oracle limited to 4 atoms");
    (0..1u32 << names.len()).all(|bits| {
        let v = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), bits >> i & 1 == 1))
            .collect();
        eval(f, &v)
    })
}

/// Random formulas over `atoms`, depth at most `depth`. Operators are
/// (symbol, arity) pairs with arity 1 or 2.
pub fn formula_text(
    atoms: &'static [&'static str],
    ops: &'static [(&'static str, usize)],
    depth: u32,
) -> BoxedStrategy<String> {
    let leaf = prop::sample::select(atoms).prop_map(str::to_string);
    leaf.prop_recursive(depth, 16, 2, move |inner| {
        (prop::sample::select(ops), inner.clone(), inner).prop_map(|((op, arity), a, b)| {
            if arity == 1 {
                format!("({op} {a})")
            } else {
                format!("({op} {a} {b})")
            }
        })
    })
    .boxed()
}

pub const ATOMS: &[&str] = &["A", "B", "C"];

/// Built-in systems with the connectives their goals may use.
pub const SYSTEMS: &[(&str, &[(&str, usize)])] = &[
    ("nd-minimal", &[("->", 2)]),
    ("nd-intuitionistic", &[("->", 2), ("and", 2), ("or", 2)]),
    ("nd-classical", &[("->", 2), ("and", 2), ("or", 2)]),
    ("fitch-intuitionistic", &[("->", 2), ("and", 2), ("or", 2)]),
    ("fitch-classical", &[("->", 2), ("and", 2), ("or", 2)]),
    ("hilbert-k", &[("->", 2), ("box", 1)]),
];

/// Random tactics over the given rule names, at most `depth` combinators
/// deep.
pub fn tactic(rules: Vec<String>, depth: u32) -> BoxedStrategy<Tactic> {
    let filters = prop::sample::subsequence(vec![Filter::NoCycle, Filter::Fresh], 0..=2);
    let leaf = (prop::sample::select(rules), filters).prop_map(|(r, f)| Tactic::filtered(r, &f));
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Tactic::many),
            inner.clone().prop_map(Tactic::try_),
            inner.clone().prop_map(Tactic::some),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tactic::and_then(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Tactic::or_else(a, b)),
        ]
    })
    .boxed()
}

/// A system, a goal over three atoms of depth at most 3, a random tactic,
/// and choices for a short prefix of steps taken before the tactic runs.
#[derive(Debug, Clone)]
pub struct Triple {
    pub system: &'static str,
    pub goal: String,
    pub tactic: Tactic,
    pub second: Tactic,
    pub prefix: Vec<usize>,
}

pub fn triple() -> BoxedStrategy<Triple> {
    let reg = Registry::builtin();
    let options: Vec<BoxedStrategy<Triple>> = SYSTEMS
        .iter()
        .map(|(name, ops)| {
            let sys = reg.get(name).unwrap();
            let mut rules: Vec<String> = sys.rules().iter().map(|r| r.name().to_string()).collect();
            if sys.style() == Style::Fitch {
                rules.push(END.into());
            }
            rules.push(QED.into());
            (
                formula_text(ATOMS, ops, 3),
                tactic(rules.clone(), 3),
                tactic(rules, 2),
                prop::collection::vec(0usize..8, 0..3),
            )
                .prop_map(move |(goal, tactic, second, prefix)| Triple {
                    system: name,
                    goal,
                    tactic,
                    second,
                    prefix,
                })
                .boxed()
        })
        .collect();
    prop::strategy::Union::new(options).boxed()
}

/// Fresh proof of the triple's goal with the prefix applied; a prefix
/// choice picks among the applicable candidates modulo their number.
pub fn start(reg: &Registry, t: &Triple) -> Proof {
    let sys = reg.get(t.system).unwrap();
    let mut p = sys.new_proof(&t.goal).unwrap();
    for k in &t.prefix {
        let cands: Vec<_> = p
            .applicable(None)
            .unwrap()
            .into_iter()
            .filter(|c| c.step.rule != QED)
            .collect();
        if cands.is_empty() {
            break;
        }
        let mut step = cands[k % cands.len()].step.clone();
        step.target = None;
        p.apply(&step).unwrap();
    }
    p
}

/// Everything observable about a proof's state.
pub fn snapshot(p: &Proof) -> (PropertyGraph, Vec<Step>, String) {
    (p.graph().into_owned(), p.steps(), p.export().to_json())
}

pub const RANDOM_FUEL: u64 = 40;

/// Checks the combinator laws, rollback and replay on one triple.
pub fn check_triple(reg: &Registry, t: &Triple) -> Result<(), String> {
    let c = examine_triple(reg, t, RANDOM_FUEL);
    c.laws.and(c.rollback)
}

/// Result of running one triple under every combinator law.
pub struct TripleCheck {
    pub laws: Result<(), String>,
    /// Runs that did not succeed, each compared against the pre-state.
    pub failing_runs: usize,
    pub rollback: Result<(), String>,
}

pub fn examine_triple(reg: &Registry, t: &Triple, fuel: u64) -> TripleCheck {
    let pre = snapshot(&start(reg, t));
    let failing = std::cell::Cell::new(0);
    let rollback = std::cell::RefCell::new(Ok(()));
    let go = |tac: &Tactic| {
        let mut p = start(reg, t);
        let r = run(tac, &mut p, fuel);
        let snap = snapshot(&p);
        if !r.outcome.is_success() {
            failing.set(failing.get() + 1);
            if snap != pre && rollback.borrow().is_ok() {
                *rollback.borrow_mut() = Err(format!("{} run of {tac} changed the state", r.outcome.name()));
            }
        }
        (r, snap)
    };
    let laws = (|| {
        let (plain, after) = go(&t.tactic);
        if let Outcome::Success { trace } = &plain.outcome {
            let mut q = start(reg, t);
            for s in trace {
                q.apply(s).map_err(|e| format!("replaying {s}: {e}"))?;
            }
            // ids burned by backtracking differ; compare compact exports
            let replayed = snapshot(&q);
            if replayed.1 != after.1 || replayed.2 != after.2 {
                return Err("replayed trace does not reproduce the final state".to_string());
            }
        }
        let some = go(&Tactic::some(t.tactic.clone()));
        let expanded = go(&Tactic::and_then(t.tactic.clone(), Tactic::many(t.tactic.clone())));
        if some.0 != expanded.0 || some.1 != expanded.1 {
            return Err("Some(t) differs from AndThen(t, Many(t))".into());
        }
        let or = go(&Tactic::or_else(t.tactic.clone(), t.second.clone()));
        let or_expanded = go(&Tactic::and_then(Tactic::try_(t.tactic.clone()), t.second.clone()));
        if or.0 != or_expanded.0 || or.1 != or_expanded.1 {
            return Err("OrElse(t, u) differs from AndThen(Try(t), u)".into());
        }
        for wrapped in [Tactic::try_(t.tactic.clone()), Tactic::many(t.tactic.clone())] {
            let r = go(&wrapped);
            if r.0.outcome == Outcome::Failure {
                return Err(format!("{wrapped} failed"));
            }
        }
        Ok(())
    })();
    TripleCheck {
        laws,
        failing_runs: failing.get(),
        rollback: rollback.into_inner(),
    }
}

/// Text of every formula vertex in an exported graph, rebuilt from the
/// `op`/`atom` properties and numbered operand edges.
pub fn document_formulas(doc: &GraphDocument) -> BTreeMap<String, String> {
    fn text(doc: &GraphDocument, id: &str, memo: &mut BTreeMap<String, String>) -> String {
        if let Some(t) = memo.get(id) {
            return t.clone();
        }
        let v = doc.vertices.iter().find(|v| v.id == id).unwrap();
        let t = if let Some(a) = v.props.get("atom") {
            a.as_text().unwrap().to_string()
        } else {
            let op = v.props["op"].as_text().unwrap().to_string();
            let mut ops: Vec<(i64, &str)> = doc
                .edges
                .iter()
                .filter(|e| e.dst == id && e.labels.iter().any(|l| l == "Operand"))
                .map(|e| (e.props["operand"].as_int().unwrap(), e.src.as_str()))
                .collect();
            ops.sort();
            if ops.is_empty() {
                op
            } else {
                let parts: Vec<String> = ops.iter().map(|(_, s)| text(doc, s, memo)).collect();
                format!("({op} {})", parts.join(" "))
            }
        };
        memo.insert(id.to_string(), t.clone());
        t
    }
    let mut memo = BTreeMap::new();
    for v in &doc.vertices {
        if v.labels.iter().any(|l| l == "Formula") {
            text(doc, &v.id, &mut memo);
        }
    }
    memo
}

/// Every formula in the graph is a subformula of the goal or of a
/// hypothesis some deduction introduces.
pub fn subformula_invariant(doc: &GraphDocument, goal: &str) -> Result<(), String> {
    let texts = document_formulas(doc);
    let mut allowed = BTreeSet::new();
    subterms(goal, &mut allowed);
    for e in doc.edges.iter().filter(|e| e.labels.iter().any(|l| l == "Introduces")) {
        subterms(&texts[&e.dst], &mut allowed);
    }
    match texts.values().find(|t| !allowed.contains(*t)) {
        Some(t) => Err(format!("{t} is not a subformula of {goal} or a hypothesis")),
        None => Ok(()),
    }
}

/// A fixed sequence of random goals.
pub fn sample_goals(ops: &'static [(&'static str, usize)], depth: u32, count: usize) -> Vec<String> {
    use proptest::strategy::ValueTree;
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let s = formula_text(ATOMS, ops, depth);
    (0..count).map(|_| s.new_tree(&mut runner).unwrap().current()).collect()
}

pub const CORPUS_FUEL: u64 = 2_000;

/// Goals the default strategy of `system` proves, with their proofs.
pub fn prove_corpus(reg: &Registry, system: &str, goals: &[String], fuel: u64) -> Vec<(String, Proof)> {
    let sys = reg.get(system).unwrap();
    goals
        .iter()
        .filter_map(|g| {
            let (p, r) = sys.prove(g, graphlf::systems::DEFAULT_STRATEGY, fuel).ok()?;
            r.outcome.is_success().then(|| (g.clone(), p))
        })
        .collect()
}
