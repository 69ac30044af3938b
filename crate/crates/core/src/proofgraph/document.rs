//! Graph encodings of linear (Fitch and Hilbert) proofs.
//!
//! Lines become deduction vertices carrying their line number, depth and
//! rule; citations become premise edges from the citing line to the cited
//! one. Hypothesis lines are leaves.

use crate::formula::FormulaStore;
use crate::graphstore::{PropertyGraph, Value, VertexId};

use super::{
    Citation, FitchState, HilbertState, Justification, DEDUCTION_LABEL, DERIVES_LABEL, INDEX_KEY, LEAF_KIND_KEY,
    PREMISE_LABEL, ROLE_KEY, RULE_KEY, STATUS_KEY,
};

pub const LINE_KEY: &str = "line";
pub const DEPTH_KEY: &str = "depth";
pub const SUBPROOF_START_KEY: &str = "subproofStart";

fn line_vertex(
    graph: &mut PropertyGraph,
    formulas: &mut FormulaStore,
    line: usize,
    depth: usize,
    rule: &str,
    leaf: Option<&str>,
    formula: &crate::formula::Formula,
) -> VertexId {
    let mut props: Vec<(&str, Value)> = vec![
        (LINE_KEY, Value::Int(line as i64)),
        (DEPTH_KEY, Value::Int(depth as i64)),
        (RULE_KEY, Value::Text(rule.to_string())),
    ];
    match leaf {
        Some(kind) => {
            props.push((STATUS_KEY, Value::Text("leaf".into())));
            props.push((LEAF_KIND_KEY, Value::Text(kind.into())));
        }
        None => props.push((STATUS_KEY, Value::Text("regular".into()))),
    }
    let fv = formulas.intern(graph, formula);
    let v = graph.add_vertex([DEDUCTION_LABEL], props).expect("distinct keys");
    graph
        .add_edge(v, fv, [DERIVES_LABEL], [] as [(&str, Value); 0])
        .expect("vertices exist");
    v
}

fn premise(graph: &mut PropertyGraph, from: VertexId, to: VertexId, role: &str, index: usize, start: Option<usize>) {
    let mut props = vec![
        (ROLE_KEY, Value::Text(role.to_string())),
        (INDEX_KEY, Value::Int(index as i64)),
    ];
    if let Some(s) = start {
        props.push((SUBPROOF_START_KEY, Value::Int(s as i64)));
    }
    graph
        .add_edge(from, to, [PREMISE_LABEL], props)
        .expect("vertices exist");
}

impl FitchState {
    pub fn to_graph(&self) -> PropertyGraph {
        let mut graph = PropertyGraph::new();
        let mut formulas = FormulaStore::new();
        formulas.intern(&mut graph, self.goal());
        let mut vertices = Vec::with_capacity(self.lines().len());
        for (i, line) in self.lines().iter().enumerate() {
            let leaf = line.opens.then_some("hypothesis");
            let v = line_vertex(
                &mut graph,
                &mut formulas,
                i + 1,
                line.depth,
                &line.rule,
                leaf,
                &line.formula,
            );
            for (k, (role, c)) in line.citations.iter().enumerate() {
                match c {
                    Citation::Line(n) => premise(&mut graph, v, vertices[n - 1], role, k + 1, None),
                    Citation::Subproof([s, e]) => premise(&mut graph, v, vertices[e - 1], role, k + 1, Some(*s)),
                }
            }
            vertices.push(v);
        }
        graph.forget_history();
        graph
    }
}

impl HilbertState {
    pub fn to_graph(&self) -> PropertyGraph {
        let mut graph = PropertyGraph::new();
        let mut formulas = FormulaStore::new();
        formulas.intern(&mut graph, self.goal());
        let mut vertices = Vec::with_capacity(self.lines().len());
        for (i, line) in self.lines().iter().enumerate() {
            let leaf = match line.justification {
                Justification::Hypothesis => Some("hypothesis"),
                Justification::Axiom { .. } => Some("axiom"),
                _ => None,
            };
            let v = line_vertex(&mut graph, &mut formulas, i + 1, 0, &line.rule, leaf, &line.formula);
            match &line.justification {
                Justification::ModusPonens { minor, major } => {
                    premise(&mut graph, v, vertices[minor - 1], "minor", 1, None);
                    premise(&mut graph, v, vertices[major - 1], "major", 2, None);
                }
                Justification::Necessitation { line } => {
                    premise(&mut graph, v, vertices[line - 1], "premise1", 1, None)
                }
                Justification::Axiom { .. } | Justification::Hypothesis => {}
            }
            vertices.push(v);
        }
        graph.forget_history();
        graph
    }
}
