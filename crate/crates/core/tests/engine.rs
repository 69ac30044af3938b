mod common;

use std::time::Instant;

use common::*;
use graphlf::engine::{EngineError, Proof, State, Step};
use graphlf::proofgraph::ScopeError;
use graphlf::systems::Registry;

#[test]
fn worked_example_reconstruction() {
    let sys = system("nd-intuitionistic");
    let t = Instant::now();
    let p = run_script(&sys, WORKED_GOAL, &worked_script());
    let elapsed = t.elapsed();
    assert!(p.is_complete(), "{}", p.report());
    assert_eq!(p.report(), "complete");
    let doc = p.export();
    let expected = tree_counts(&worked_tree());
    assert_eq!(
        expected,
        Counts {
            formulas: 8,
            deductions: 8,
            derives: 8,
            premises: 7
        }
    );
    assert_eq!(graph_counts(&doc.graph), expected);
    assert!(elapsed.as_secs_f64() < 1.0);
}

#[test]
fn worked_example_first_step_matches_rule_semantics() {
    let sys = system("nd-intuitionistic");
    let p = run_script(&sys, WORKED_GOAL, &worked_script()[..1]);
    let State::Backward(s) = p.state() else { panic!() };
    let goals = s.open_goals();
    assert_eq!(goals.len(), 1);
    assert_eq!(s.formula_of(goals[0]).unwrap().to_sexpr(), "(-> B (-> A C))");
    let hyps: Vec<String> = s.hypotheses(goals[0]).iter().map(|h| h.to_sexpr()).collect();
    assert_eq!(hyps, ["(-> (and A B) C)"]);
}

#[test]
fn impe_opens_minor_and_major_goals() {
    let sys = system("nd-intuitionistic");
    let mut p = run_script(&sys, WORKED_GOAL, &worked_script()[..3]);
    p.apply(&Step::new("impE").formula_arg("major", "(-> (and A B) C)"))
        .unwrap();
    let State::Backward(s) = p.state() else { panic!() };
    let goals: Vec<String> = s
        .open_goals()
        .iter()
        .map(|g| s.formula_of(*g).unwrap().to_sexpr())
        .collect();
    assert_eq!(goals, ["(and A B)", "(-> (and A B) C)"]);
}

#[test]
fn impe_without_major_is_ambiguous_when_two_implications_fit() {
    let sys = system("nd-intuitionistic");
    let mut p = run_script(&sys, WORKED_GOAL, &worked_script()[..3]);
    let err = p.apply(&Step::new("impE")).unwrap_err();
    assert_eq!(err.name(), "AmbiguousArguments");
    assert_eq!(p.history_len(), 3);
}

#[test]
fn impi_applicability() {
    let sys = system("nd-intuitionistic");
    let p = sys.new_proof("(-> (and A B) C)").unwrap();
    let cands = p.candidates("impI", None).unwrap();
    assert_eq!(cands.len(), 1);
    assert_eq!(
        cands[0].step.args["implication"],
        graphlf::engine::StepArg::Formula("(-> (and A B) C)".into())
    );
    let q = sys.new_proof("(and A B)").unwrap();
    assert!(q.candidates("impI", None).unwrap().is_empty());
}

#[test]
fn impi_on_atomic_goal_is_rejected_without_mutation() {
    let sys = system("nd-minimal");
    let mut p = sys.new_proof("A").unwrap();
    let before = p.graph().into_owned();
    let err = p.apply(&Step::new("impI")).unwrap_err();
    assert_eq!(err.name(), "NotApplicable");
    assert_eq!(*p.graph(), before);
}

#[test]
fn undo_restores_structure() {
    let sys = system("nd-intuitionistic");
    let mut p = sys.new_proof(WORKED_GOAL).unwrap();
    let fresh = p.graph().into_owned();
    assert_eq!(p.undo().unwrap_err(), EngineError::NothingToUndo);
    p.apply(&Step::new("impI")).unwrap();
    p.undo().unwrap();
    assert_eq!(*p.graph(), fresh);
    p.apply(&Step::new("impI")).unwrap();
    p.apply(&Step::new("impI")).unwrap();
    p.undo().unwrap();
    p.undo().unwrap();
    assert_eq!(*p.graph(), fresh);
}

#[test]
fn undo_then_redo_exports_the_same_document() {
    let sys = system("nd-intuitionistic");
    let script = worked_script();
    let mut p = run_script(&sys, WORKED_GOAL, &script);
    let full = p.export();
    for _ in 0..4 {
        p.undo().unwrap();
    }
    for s in &script[4..] {
        p.apply(s).unwrap();
    }
    assert_eq!(p.export(), full);
}

#[test]
fn export_import_round_trip() {
    let sys = system("nd-intuitionistic");
    let p = run_script(&sys, WORKED_GOAL, &worked_script());
    let text = p.export().to_json();
    let doc = graphlf::engine::ProofDocument::from_json(&text).unwrap();
    let q = Proof::import(sys.calculus.clone(), &doc).unwrap();
    assert!(q.is_complete());
    assert_eq!(q.export().to_json(), text);
}

#[test]
fn fitch_and_elimination_has_two_projections() {
    let sys = system("fitch-intuitionistic");
    let mut p = sys.new_proof("(-> (and A B) (and B A))").unwrap();
    p.apply(&Step::new("impI.open")).unwrap();
    let cands = p.candidates("andE", None).unwrap();
    let got: Vec<String> = cands.iter().map(|c| c.conclusion().unwrap().to_sexpr()).collect();
    assert_eq!(got, ["A", "B"]);
}

#[test]
fn fitch_conjunction_introduction_and_implication_closing() {
    let sys = system("fitch-intuitionistic");
    let mut p = sys.new_proof("(-> (and A B) (and B A))").unwrap();
    p.apply(&Step::new("impI.open")).unwrap();
    p.apply(&Step::new("andE").line("conjunction", 1).result("B")).unwrap();
    p.apply(&Step::new("andE").line("conjunction", 1).result("A")).unwrap();
    p.apply(&Step::new("andI").line("left", 2).line("right", 3)).unwrap();
    p.apply(&Step::new("impI").subproof("sub", 1, 4)).unwrap();
    let State::Fitch(s) = p.state() else { panic!() };
    assert_eq!(s.lines()[3].formula.to_sexpr(), "(and B A)");
    let last = s.lines().last().unwrap();
    assert_eq!(last.formula.to_sexpr(), "(-> (and A B) (and B A))");
    assert_eq!(last.depth, 0);
    assert!(p.is_complete());
}

#[test]
fn fitch_rejects_a_conclusion_the_rule_does_not_admit() {
    let sys = system("fitch-intuitionistic");
    let mut p = sys.new_proof("(-> A (or A B))").unwrap();
    p.apply(&Step::new("impI.open")).unwrap();
    let err = p
        .apply(&Step::new("orI1").line("disjunct", 1).result("(or B A)"))
        .unwrap_err();
    assert_eq!(err.name(), "InvalidConclusion");
    let err = p.apply(&Step::new("orI1").line("disjunct", 1)).unwrap_err();
    assert_eq!(err.name(), "MissingResultFormula");
    p.apply(&Step::new("orI1").line("disjunct", 1).result("(or A B)"))
        .unwrap();
}

const STRICT_SYSTEM: &str = r#"
System(name="fitch-box", style=fitch)
Operator("->", arity=2, infix=true)
Operator("box", arity=1)
LineRule(reit, premises=[Line("line")], conclusion=Refs([Arg("line")]))
LineRule(boxE, premises=[Line("boxed", Identity(operator=box), outer=true)],
  conclusion=Refs([And(Arg("boxed"), SubOf(operand=1))]))
Open(assume, Check(Identity()))
Open(box, Check(Identity()), strict=true)
"#;

#[test]
fn strict_subproofs_enforce_scope() {
    let mut reg = Registry::builtin();
    reg.load(STRICT_SYSTEM).unwrap();
    let sys = reg.get("fitch-box").unwrap();
    let mut p = sys.new_proof("(-> (box p) (box p))").unwrap();
    p.apply(&Step::new("assume").result("(box p)")).unwrap();
    p.apply(&Step::new("box").result("q")).unwrap();
    // line 1 lies outside the strict subproof
    let err = p.apply(&Step::new("reit").line("line", 1)).unwrap_err();
    assert_eq!(err, EngineError::Scope(ScopeError::AcrossStrictBoundary(1)));
    p.apply(&Step::new("boxE").line("boxed", 1)).unwrap();
    p.apply(&Step::new("end")).unwrap();
    // line 3 now sits in a closed subproof
    let before = p.steps();
    let err = p.apply(&Step::new("reit").line("line", 3)).unwrap_err();
    assert_eq!(err.name(), "ScopeError");
    assert_eq!(err, EngineError::Scope(ScopeError::InClosedSubproof(3)));
    assert_eq!(p.steps(), before);
}

fn hilbert_box_script() -> Vec<Step> {
    vec![
        Step::new("K2")
            .formula_arg("a", "p")
            .formula_arg("b", "(-> p p)")
            .formula_arg("c", "p"),
        Step::new("K1").formula_arg("a", "p").formula_arg("b", "(-> p p)"),
        Step::new("mp").line("minor", 2).line("major", 1),
        Step::new("K1").formula_arg("a", "p").formula_arg("b", "p"),
        Step::new("mp").line("minor", 4).line("major", 3),
        Step::new("nec").line("line", 5),
    ]
}

#[test]
fn hilbert_k_necessitation_of_identity() {
    let sys = system("hilbert-k");
    let t = Instant::now();
    let p = run_script(&sys, "(box (-> p p))", &hilbert_box_script());
    assert!(t.elapsed().as_secs_f64() < 1.0);
    let State::Hilbert(s) = p.state() else { panic!() };
    let lines: Vec<String> = s.lines().iter().map(|l| l.formula.to_sexpr()).collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[4], "(-> p p)");
    assert_eq!(lines[5], "(box (-> p p))");
    assert!(p.is_complete());
}

#[test]
fn hilbert_k_axiom_instance() {
    let sys = system("hilbert-k");
    let mut p = sys.new_proof("(-> (box (-> p q)) (-> (box p) (box q)))").unwrap();
    p.apply(&Step::new("K").formula_arg("a", "p").formula_arg("b", "q"))
        .unwrap();
    assert!(p.is_complete());
}

#[test]
fn hilbert_modus_ponens_checks_shape() {
    let sys = system("hilbert-k");
    let mut p = sys.new_proof("q").unwrap();
    p.apply(&Step::new("hyp").result("p")).unwrap();
    p.apply(&Step::new("hyp").result("(-> p q)")).unwrap();
    p.apply(&Step::new("hyp").result("r")).unwrap();
    let err = p.apply(&Step::new("mp").line("minor", 3).line("major", 2)).unwrap_err();
    assert_eq!(err.name(), "NonMatchingMP");
    // symmetric citation is accepted
    p.apply(&Step::new("mp").line("minor", 2).line("major", 1)).unwrap();
    let State::Hilbert(s) = p.state() else { panic!() };
    assert_eq!(s.lines()[3].formula.to_sexpr(), "q");
}

#[test]
fn necessitation_under_hypothesis_is_rejected() {
    let sys = system("hilbert-k");
    let mut p = sys.new_proof("(box p)").unwrap();
    p.apply(&Step::new("hyp").result("p")).unwrap();
    let err = p.apply(&Step::new("nec").line("line", 1)).unwrap_err();
    assert_eq!(err, EngineError::NecessitationUnderHypothesis { line: 1 });
    assert_eq!(p.history_len(), 1);
}

#[test]
fn linear_proofs_round_trip_through_documents() {
    let sys = system("hilbert-k");
    let p = run_script(&sys, "(box (-> p p))", &hilbert_box_script());
    let doc = p.export();
    let q = Proof::import(sys.calculus.clone(), &doc).unwrap();
    assert_eq!(q.export(), doc);
    let mut bad = doc.clone();
    bad.steps.pop();
    assert!(Proof::import(sys.calculus.clone(), &bad).is_err());
}
