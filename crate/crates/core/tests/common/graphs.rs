//! Random labelled graphs, patterns and transforms, with a brute-force
//! matcher to compare against.

use std::collections::{BTreeMap, BTreeSet};

use graphlf::graphstore::{
    Binding, Direction, ElementId, GraphPattern, PropRef, PropertyGraph, TransformScript, Value, VertexId, WhereClause,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub vertices: Vec<(Vec<&'static str>, Option<i64>)>,
    pub edges: Vec<(usize, usize, &'static str, Option<i64>)>,
}

pub fn labels() -> impl Strategy<Value = Vec<&'static str>> {
    prop::sample::subsequence(vec!["P", "Q"], 0..=2)
}

pub fn graph_spec() -> impl Strategy<Value = GraphSpec> {
    prop::collection::vec((labels(), prop::option::of(0i64..2)), 0..=8).prop_flat_map(|vertices| {
        let n = vertices.len();
        let edges = if n == 0 {
            Just(Vec::new()).boxed()
        } else {
            prop::collection::vec(
                (
                    0..n,
                    0..n,
                    prop::sample::select(vec!["r", "s"]),
                    prop::option::of(0i64..2),
                ),
                0..=12,
            )
            .boxed()
        };
        (Just(vertices), edges).prop_map(|(vertices, edges)| GraphSpec { vertices, edges })
    })
}

pub fn build(spec: &GraphSpec) -> (PropertyGraph, Vec<VertexId>) {
    let mut g = PropertyGraph::new();
    let ids: Vec<VertexId> = spec
        .vertices
        .iter()
        .map(|(l, k)| g.add_vertex(l.clone(), k.map(|k| ("k", Value::Int(k)))).unwrap())
        .collect();
    for (s, d, l, k) in &spec.edges {
        g.add_edge(ids[*s], ids[*d], [*l], k.map(|k| ("k", Value::Int(k))))
            .unwrap();
    }
    (g, ids)
}

pub fn pattern() -> impl Strategy<Value = GraphPattern> {
    let node = (labels(), prop::option::of(0i64..2));
    (prop::collection::vec(node, 1..=3)).prop_flat_map(|nodes| {
        let k = nodes.len();
        let dir = prop::sample::select(vec![Direction::Outgoing, Direction::Incoming, Direction::Either]);
        let edge = (
            0..k,
            0..k,
            dir,
            prop::sample::subsequence(vec!["r", "s"], 0..=1),
            prop::option::of(0i64..2),
        );
        let wh = prop::option::of((0..4usize, 0..k, 0..k));
        (Just(nodes), prop::collection::vec(edge, 0..=2), wh).prop_map(|(nodes, edges, wh)| {
            let mut p = GraphPattern::new();
            for (i, (l, kv)) in nodes.iter().enumerate() {
                p = p.node(format!("n{i}"), l.clone(), kv.map(|x| ("k", Value::Int(x))));
            }
            for (i, (s, d, dir, l, kv)) in edges.iter().enumerate() {
                p = p.edge(
                    format!("e{i}"),
                    format!("n{s}"),
                    format!("n{d}"),
                    *dir,
                    l.clone(),
                    kv.map(|x| ("k", Value::Int(x))),
                );
            }
            if let Some((kind, a, b)) = wh {
                let (a, b) = (format!("n{a}"), format!("n{b}"));
                p = p.where_clause(match kind {
                    0 => WhereClause::PropEq(PropRef::new(&a, "k"), PropRef::new(&b, "k")),
                    1 => WhereClause::PropNe(PropRef::new(&a, "k"), PropRef::new(&b, "k")),
                    2 => WhereClause::Same(a, b),
                    _ => WhereClause::Distinct(a, b),
                });
            }
            p
        })
    })
}

/// Enumerates every assignment of binders to elements and keeps those that
/// satisfy the pattern.
pub fn brute_force(g: &PropertyGraph, p: &GraphPattern) -> Vec<Binding> {
    let vs: Vec<VertexId> = g.vertices().map(|(v, _)| v).collect();
    let es: Vec<_> = g.edges().map(|(e, _)| e).collect();
    let fits = |el: ElementId, labels: &[String], props: &[(String, Value)]| {
        let have = g.labels(el).unwrap();
        let kv = g.props(el).unwrap();
        labels.iter().all(|l| have.contains(l)) && props.iter().all(|(k, v)| kv.get(k) == Some(v))
    };
    let mut out = Vec::new();
    let total_nodes = vs.len().pow(p.nodes.len() as u32);
    let total_edges = es.len().pow(p.edges.len() as u32);
    for mut a in 0..total_nodes {
        let mut nodes = BTreeMap::new();
        for n in &p.nodes {
            nodes.insert(n.binder.clone(), vs[a % vs.len()]);
            a /= vs.len();
        }
        if !p
            .nodes
            .iter()
            .all(|n| fits(ElementId::Vertex(nodes[&n.binder]), &n.labels, &n.props))
        {
            continue;
        }
        for mut b in 0..total_edges {
            let mut edges = Vec::new();
            for _ in &p.edges {
                edges.push(es[b % es.len()]);
                b /= es.len();
            }
            if edges.iter().collect::<BTreeSet<_>>().len() != edges.len() {
                continue;
            }
            let edges_ok = p.edges.iter().zip(&edges).all(|(ep, e)| {
                let rec = g.edge(*e).unwrap();
                let (s, d) = (nodes[&ep.src], nodes[&ep.dst]);
                let forward = rec.src == s && rec.dst == d;
                let backward = rec.src == d && rec.dst == s;
                let dir_ok = match ep.direction {
                    Direction::Outgoing => forward,
                    Direction::Incoming => backward,
                    Direction::Either => forward || backward,
                };
                dir_ok && fits(ElementId::Edge(*e), &ep.labels, &ep.props)
            });
            if !edges_ok {
                continue;
            }
            let mut env: BTreeMap<String, ElementId> =
                nodes.iter().map(|(k, v)| (k.clone(), ElementId::Vertex(*v))).collect();
            for (ep, e) in p.edges.iter().zip(&edges) {
                env.insert(ep.binder.clone(), ElementId::Edge(*e));
            }
            let prop = |r: &PropRef| g.props(env[&r.binder]).unwrap().get(&r.key).cloned();
            let wheres_ok = p.wheres.iter().all(|w| match w {
                WhereClause::PropEq(a, b) => matches!((prop(a), prop(b)), (Some(x), Some(y)) if x == y),
                WhereClause::PropNe(a, b) => matches!((prop(a), prop(b)), (Some(x), Some(y)) if x != y),
                WhereClause::Same(a, b) => env[a] == env[b],
                WhereClause::Distinct(a, b) => env[a] != env[b],
            });
            if wheres_ok {
                out.push(Binding::new(
                    p.binder_names().iter().map(|n| (n.to_string(), env[*n])).collect(),
                ));
            }
        }
    }
    out.sort();
    out
}

pub fn match_case(spec: &GraphSpec, p: &GraphPattern) -> Result<(), String> {
    let (g, _) = build(spec);
    let found = g.find(p).map_err(|e| e.to_string())?;
    if found != brute_force(&g, p) {
        return Err(format!("matcher and enumeration disagree on {p:?}"));
    }
    // identical construction gives identical order
    let (h, _) = build(spec);
    if h.find(p).map_err(|e| e.to_string())? != found {
        return Err("match order depends on more than the graph".into());
    }
    Ok(())
}

/// Script actions: (kind, binder choice, value).
pub type Actions = Vec<(usize, usize, i64)>;

pub fn transform_case() -> impl Strategy<Value = (GraphSpec, Actions, bool)> {
    (
        graph_spec(),
        prop::collection::vec((0..5usize, 0..3usize, 0i64..3), 1..6),
        any::<bool>(),
    )
}

/// Applies a random script, some of which fail, then undoes it by reverting
/// the entry or rolling back to a mark.
pub fn undo_case(spec: &GraphSpec, actions: &Actions, use_rollback: bool) -> Result<(), String> {
    let (mut g, _) = build(spec);
    let original = g.clone();
    let pattern = GraphPattern::new().node("a", Vec::<&str>::new(), Vec::<(&str, Value)>::new());
    let mut script = TransformScript::new();
    for (i, (kind, which, v)) in actions.iter().enumerate() {
        let other = if *which == 0 {
            "a".to_string()
        } else {
            format!("c{}", which)
        };
        script = match kind {
            0 => script.create_vertex(format!("c{}", i + 1), ["N"], [("k", Value::Int(*v))]),
            1 => script.create_edge("a", other, ["t"], Vec::<(&str, Value)>::new()),
            2 => script.set_property(other, "k", Value::Int(*v)),
            3 => script.add_label("a", "M"),
            _ => script.create_vertex("a", ["Dup"], Vec::<(&str, Value)>::new()),
        };
    }
    let mark = g.mark();
    if let Ok(entry) = g.apply_transform(&pattern, &script) {
        g.check_integrity().map_err(|e| format!("{e:?}"))?;
        if use_rollback {
            g.rollback(mark);
        } else {
            g.revert(&entry).map_err(|e| e.to_string())?;
        }
    }
    g.check_integrity().map_err(|e| format!("{e:?}"))?;
    if g.export() != original.export() || g != original {
        return Err("undo did not restore the graph".into());
    }
    Ok(())
}
