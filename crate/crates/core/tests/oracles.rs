mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::formula_text;
use common::graphs::{graph_spec, match_case, pattern, transform_case, undo_case};
use graphlf::formula::{Formula, FormulaStore, OperatorTable, RenderStyle, OPERAND_LABEL};
use graphlf::graphstore::{PropertyGraph, VertexId};
use graphlf::refspec::{eval, RefContext, RefSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matcher_agrees_with_brute_force(spec in graph_spec(), p in pattern()) {
        match_case(&spec, &p).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn transforms_undo_to_the_original((spec, actions, use_rollback) in transform_case()) {
        undo_case(&spec, &actions, use_rollback).map_err(TestCaseError::fail)?;
    }
}

// ---- formulas ----

const OPS: &[(&str, usize)] = &[("->", 2), ("and", 2), ("or", 2), ("box", 1)];

fn table() -> OperatorTable {
    OperatorTable::new()
        .with_operator("->", 2, true, "→")
        .unwrap()
        .with_operator("and", 2, true, "∧")
        .unwrap()
        .with_operator("or", 2, true, "∨")
        .unwrap()
        .with_operator("box", 1, false, "☐")
        .unwrap()
        .with_constant("bot", "⊥")
        .unwrap()
}

fn formula() -> impl Strategy<Value = String> {
    formula_text(&["A", "B", "C", "bot"], OPS, 4)
}

/// Subterm relation by direct recursion.
fn occurs_in(g: &Formula, f: &Formula) -> bool {
    g == f || f.operands().iter().any(|o| occurs_in(g, o))
}

fn closure(f: &Formula, out: &mut Vec<Formula>) {
    if !out.contains(f) {
        out.push(f.clone());
    }
    for o in f.operands() {
        closure(o, out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sexpr_rendering_round_trips(text in formula()) {
        let t = table();
        let f = t.parse(&text).unwrap();
        let back = t.parse(&t.render(&f, RenderStyle::Sexpr)).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(f.to_sexpr(), text);
    }

    #[test]
    fn interning_is_hash_consing(texts in prop::collection::vec(formula(), 1..6)) {
        let t = table();
        let fs: Vec<Formula> = texts.iter().map(|x| t.parse(x).unwrap()).collect();
        let mut g = PropertyGraph::new();
        let mut store = FormulaStore::new();
        let ids: Vec<VertexId> = fs.iter().map(|f| store.intern(&mut g, f)).collect();
        for (i, f) in fs.iter().enumerate() {
            for (j, h) in fs.iter().enumerate() {
                prop_assert_eq!(ids[i] == ids[j], f == h);
            }
            prop_assert_eq!(store.intern(&mut g, f), ids[i]);
        }
        let mut all = Vec::new();
        for f in &fs {
            closure(f, &mut all);
        }
        prop_assert_eq!(store.len(), all.len());
        prop_assert_eq!(g.vertex_count(), all.len());
        let compound_edges: usize = all.iter().map(|f| f.operands().len()).sum();
        prop_assert_eq!(g.edge_count(), compound_edges);
        // operand edges go from smaller to strictly larger formulas: no cycles
        for (_, e) in g.edges() {
            prop_assert!(e.has_label(OPERAND_LABEL));
            let (a, b) = (store.formula(e.src).unwrap(), store.formula(e.dst).unwrap());
            prop_assert!(occurs_in(a, b) && a != b);
        }
        g.check_integrity().unwrap();
    }

    #[test]
    fn subformulas_by_closure(text in formula()) {
        let f = table().parse(&text).unwrap();
        let mut all = Vec::new();
        closure(&f, &mut all);
        let expected: BTreeSet<Formula> = all.into_iter().collect();
        let got = f.subformulas();
        prop_assert!(got.contains(&f));
        prop_assert!(got.len() <= f.size());
        prop_assert_eq!(got, expected);
    }
}

// ---- relative formula references ----

fn leaf_ref() -> impl Strategy<Value = RefSpec> {
    let op = prop::option::of(prop::sample::select(vec!["->", "and", "box"]));
    let idx = prop::option::of(1usize..=2);
    prop_oneof![
        op.clone().prop_map(|o| RefSpec::Identity {
            operator: o.map(str::to_string),
            operand: None,
        }),
        (op.clone(), idx.clone()).prop_map(|(o, i)| RefSpec::SubOf {
            operator: o.map(str::to_string),
            operand: i,
        }),
        (op, idx).prop_map(|(o, i)| RefSpec::SuperOf {
            operator: o.map(str::to_string),
            operand: i,
        }),
        Just(RefSpec::arg("x")),
    ]
}

fn refspec() -> impl Strategy<Value = RefSpec> {
    leaf_ref().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RefSpec::both(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| RefSpec::and(a, b)),
            inner.prop_map(RefSpec::that),
        ]
    })
}

/// Set-builder reading of each combinator over an explicit candidate set.
fn reference(spec: &RefSpec, frame: &Formula, universe: &[Formula], x: &Formula) -> BTreeSet<Formula> {
    let head_ok = |op: &Option<String>, g: &Formula| {
        op.as_deref()
            .is_none_or(|o| g.op() == Some(o) || g.atom_name() == Some(o))
    };
    let mut everything = universe.to_vec();
    closure(frame, &mut everything);
    match spec {
        RefSpec::Identity { operator, .. } => everything
            .iter()
            .filter(|g| *g == frame && head_ok(operator, g))
            .cloned()
            .collect(),
        RefSpec::SubOf { operator, operand } => everything
            .iter()
            .filter(|g| match operand {
                Some(i) => frame.operands().get(i - 1) == Some(*g),
                None => occurs_in(g, frame),
            })
            .filter(|g| head_ok(operator, g))
            .cloned()
            .collect(),
        RefSpec::SuperOf { operator, operand } => universe
            .iter()
            .filter(|g| match operand {
                Some(i) => g.operands().get(i - 1) == Some(frame),
                None => occurs_in(frame, g),
            })
            .filter(|g| head_ok(operator, g))
            .cloned()
            .collect(),
        RefSpec::Both(a, b) => {
            let l = reference(a, frame, universe, x);
            let r = reference(b, frame, universe, x);
            l.intersection(&r).cloned().collect()
        }
        RefSpec::And(a, b) => reference(a, frame, universe, x)
            .iter()
            .flat_map(|g| reference(b, g, universe, x))
            .collect(),
        RefSpec::That(r) => {
            if reference(r, frame, universe, x).is_empty() {
                BTreeSet::new()
            } else {
                BTreeSet::from([frame.clone()])
            }
        }
        RefSpec::Arg(_) => BTreeSet::from([x.clone()]),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn refspec_agrees_with_set_builder_reading(
        goal in formula(),
        spec in refspec(),
        frame_pick in any::<prop::sample::Index>(),
        arg_pick in any::<prop::sample::Index>(),
    ) {
        let goal = table().parse(&goal).unwrap();
        let mut universe = Vec::new();
        closure(&goal, &mut universe);
        let frame = frame_pick.get(&universe).clone();
        let x = arg_pick.get(&universe).clone();
        let u: BTreeSet<Formula> = universe.iter().cloned().collect();
        let args = BTreeMap::from([("x".to_string(), x.clone())]);
        let got = eval(&spec, RefContext::new(&frame, &u, &args)).unwrap();
        prop_assert_eq!(got, reference(&spec, &frame, &universe, &x));
    }
}

#[test]
fn refspec_examples_on_an_implication() {
    let t = table();
    let frame = t.parse("(-> (and A B) C)").unwrap();
    let u = frame.subformulas();
    let none = BTreeMap::new();
    let ev = |text: &str, f: &Formula| {
        let spec = RefSpec::parse(text).unwrap();
        let got: Vec<String> = eval(&spec, RefContext::new(f, &u, &none))
            .unwrap()
            .iter()
            .map(|g| g.to_sexpr())
            .collect();
        got
    };
    assert_eq!(ev("Identity(operator=->)", &frame), ["(-> (and A B) C)"]);
    assert_eq!(ev("SubOf(operand=2)", &frame), ["C"]);
    assert_eq!(ev("SubOf(operand=1)", &frame), ["(and A B)"]);
    let conj = t.parse("(and A B)").unwrap();
    assert!(ev("Identity(operator=->)", &conj).is_empty());
    let unbound = eval(&RefSpec::arg("y"), RefContext::new(&frame, &u, &none)).unwrap_err();
    assert!(unbound.to_string().contains('y'));
}
