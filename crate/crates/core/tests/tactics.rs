mod common;

use common::*;
use graphlf::engine::{Filter, State, Step};
use graphlf::systems::{Registry, SystemError};
use graphlf::tactics::{run, Outcome, Tactic, DEFAULT_FUEL};
use proptest::prelude::*;

fn impi() -> Tactic {
    Tactic::atomic("impI")
}

#[test]
fn many_intro_leaves_the_core_goal() {
    let sys = system("nd-minimal");
    let mut p = sys.new_proof("(-> A (-> B C))").unwrap();
    let r = run(&Tactic::many(impi()), &mut p, DEFAULT_FUEL);
    let Outcome::Success { trace } = &r.outcome else {
        panic!("{r:?}")
    };
    assert_eq!(trace.len(), 2);
    let State::Backward(s) = p.state() else { panic!() };
    let goals = s.open_goals();
    assert_eq!(goals.len(), 1);
    assert_eq!(s.formula_of(goals[0]).unwrap().to_sexpr(), "C");
    let hyps: Vec<String> = s.hypotheses(goals[0]).iter().map(|h| h.to_sexpr()).collect();
    assert_eq!(hyps, ["A", "B"]);
}

#[test]
fn atomic_fails_and_try_succeeds_on_an_atom() {
    let sys = system("nd-minimal");
    let mut p = sys.new_proof("A").unwrap();
    assert_eq!(run(&impi(), &mut p, DEFAULT_FUEL).outcome, Outcome::Failure);
    let r = run(&Tactic::try_(impi()), &mut p, DEFAULT_FUEL);
    assert_eq!(r.outcome, Outcome::Success { trace: vec![] });
    assert_eq!(
        run(&Tactic::some(impi()), &mut p, DEFAULT_FUEL).outcome,
        Outcome::Failure
    );
    assert_eq!(p.history_len(), 0);
}

#[test]
fn or_else_falls_through_to_the_second_tactic() {
    let sys = system("nd-intuitionistic");
    let mut p = sys.new_proof("(-> A B)").unwrap();
    let r = run(&Tactic::or_else(Tactic::atomic("andI"), impi()), &mut p, DEFAULT_FUEL);
    let Outcome::Success { trace } = r.outcome else {
        panic!()
    };
    let rules: Vec<&str> = trace.iter().map(|s| s.rule.as_str()).collect();
    assert_eq!(rules, ["impI"]);
}

#[test]
fn and_then_backtracks_into_earlier_choices() {
    // the first impE candidate leaves an unprovable minor premise
    let sys = system("nd-minimal");
    let mut p = sys.new_proof("(-> (-> B C) (-> (-> A C) (-> A C)))").unwrap();
    let t = Tactic::and_then(
        Tactic::many(impi()),
        Tactic::and_then(Tactic::atomic("impE"), Tactic::some(Tactic::atomic("hyp"))),
    );
    let r = run(&Tactic::and_then(t, Tactic::atomic("qed")), &mut p, DEFAULT_FUEL);
    assert!(r.outcome.is_success(), "{r:?}");
    assert!(p.is_complete());
}

#[test]
fn fuel_exhaustion_is_reported_and_rolled_back() {
    let sys = system("fitch-intuitionistic");
    let mut p = sys.new_proof("(-> A A)").unwrap();
    let r = run(&Tactic::many(Tactic::atomic("assume")), &mut p, 5);
    assert_eq!(r.outcome, Outcome::FuelExhausted);
    assert_eq!(r.fuel_used, 5);
    assert_eq!(p.history_len(), 0);
}

#[test]
fn filters_prune_candidates() {
    let sys = system("fitch-intuitionistic");
    let mut p = sys.new_proof("(-> A A)").unwrap();
    p.apply(&Step::new("impI.open")).unwrap();
    let fresh = Tactic::filtered("reit", &[Filter::Fresh]);
    assert_eq!(run(&fresh, &mut p, DEFAULT_FUEL).outcome, Outcome::Failure);
}

#[test]
fn surface_syntax_round_trips() {
    let text = r#"AndThen(Many(Atomic("impI", [NoCycle])), OrElse(Atomic("hyp"), Some(Try(Atomic("impE")))))"#;
    let t = Tactic::parse(text).unwrap();
    assert_eq!(t.to_string(), text);
    assert_eq!(Tactic::parse(&t.to_string()).unwrap(), t);
    assert!(Tactic::parse("Atomic(impI, [Sideways])").is_err());
}

#[test]
fn strategies_by_name() {
    let sys = system("nd-intuitionistic");
    let (p, r) = sys.prove(WORKED_GOAL, "auto", DEFAULT_FUEL).unwrap();
    assert!(r.outcome.is_success());
    assert!(p.is_complete());
    let err = sys.prove(WORKED_GOAL, "nope", DEFAULT_FUEL).unwrap_err();
    assert!(matches!(err, SystemError::UnknownStrategy { .. }));
    assert_eq!(err.name(), "UnknownStrategy");
}

#[test]
fn intuitionistic_strategy_does_not_prove_classical_laws() {
    let sys = system("nd-intuitionistic");
    for goal in ["(-> (-> (-> A B) A) A)", "(-> (-> (-> A bot) bot) A)"] {
        let (p, r) = sys.prove(goal, "auto", DEFAULT_FUEL).unwrap();
        assert!(!r.outcome.is_success(), "{goal}");
        assert_eq!(p.history_len(), 0);
    }
}

#[test]
fn classical_fitch_strategy_proves_classical_laws() {
    let sys = system("fitch-classical");
    for goal in ["(-> (-> (-> A B) A) A)", "(-> (-> (-> A bot) bot) A)"] {
        let (p, r) = sys.prove(goal, "auto", DEFAULT_FUEL).unwrap();
        assert!(r.outcome.is_success(), "{goal}");
        assert!(p.is_complete());
        assert!(tautology(p.goal()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn combinator_laws_rollback_and_replay(t in triple()) {
        let reg = Registry::builtin();
        if let Err(e) = check_triple(&reg, &t) {
            prop_assert!(false, "{e}\n{t:?}");
        }
    }
}
