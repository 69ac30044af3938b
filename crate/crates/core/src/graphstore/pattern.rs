//! Declarative graph patterns and the matcher that enumerates their bindings.
//!
//! Node binders may share a vertex (homomorphic matching); edge binders must
//! bind pairwise distinct edges, as in Cypher's relationship uniqueness.

use std::collections::{BTreeMap, BTreeSet};

use super::{EdgeId, ElementId, GraphError, PropertyGraph, Value, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub struct NodePattern {
    pub binder: String,
    pub labels: Vec<String>,
    pub props: Vec<(String, Value)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `src -> dst`
    Outgoing,
    /// `src <- dst`
    Incoming,
    Either,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePattern {
    pub binder: String,
    pub src: String,
    pub dst: String,
    pub labels: Vec<String>,
    pub props: Vec<(String, Value)>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropRef {
    pub binder: String,
    pub key: String,
}

impl PropRef {
    pub fn new(binder: impl Into<String>, key: impl Into<String>) -> Self {
        Self {
            binder: binder.into(),
            key: key.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WhereClause {
    /// Both properties exist and are equal.
    PropEq(PropRef, PropRef),
    /// Both properties exist and differ.
    PropNe(PropRef, PropRef),
    /// The two binders denote the same element.
    Same(String, String),
    /// The two binders denote different elements.
    Distinct(String, String),
}

impl WhereClause {
    fn binders(&self) -> [&str; 2] {
        match self {
            WhereClause::PropEq(a, b) | WhereClause::PropNe(a, b) => [&a.binder, &b.binder],
            WhereClause::Same(a, b) | WhereClause::Distinct(a, b) => [a, b],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphPattern {
    pub nodes: Vec<NodePattern>,
    pub edges: Vec<EdgePattern>,
    pub wheres: Vec<WhereClause>,
}

/// An assignment of every binder to a graph element, in declaration order
/// (node binders first, then edge binders).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    entries: Vec<(String, ElementId)>,
}

impl Binding {
    pub fn new(entries: Vec<(String, ElementId)>) -> Self {
        Self { entries }
    }

    pub fn get(&self, binder: &str) -> Option<ElementId> {
        self.entries.iter().find(|(b, _)| b == binder).map(|(_, e)| *e)
    }

    pub fn vertex(&self, binder: &str) -> Option<VertexId> {
        match self.get(binder)? {
            ElementId::Vertex(v) => Some(v),
            ElementId::Edge(_) => None,
        }
    }

    pub fn edge(&self, binder: &str) -> Option<EdgeId> {
        match self.get(binder)? {
            ElementId::Edge(e) => Some(e),
            ElementId::Vertex(_) => None,
        }
    }

    pub fn entries(&self) -> &[(String, ElementId)] {
        &self.entries
    }

    fn key(&self) -> Vec<ElementId> {
        self.entries.iter().map(|(_, e)| *e).collect()
    }
}

impl GraphPattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node<L, S, P, K, V>(mut self, binder: impl Into<String>, labels: L, props: P) -> Self
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<Value>,
    {
        self.nodes.push(NodePattern {
            binder: binder.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        });
        self
    }

    #[allow(clippy::too_many_arguments)]
    pub fn edge<L, S, P, K, V>(
        mut self,
        binder: impl Into<String>,
        src: impl Into<String>,
        dst: impl Into<String>,
        direction: Direction,
        labels: L,
        props: P,
    ) -> Self
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<Value>,
    {
        self.edges.push(EdgePattern {
            binder: binder.into(),
            src: src.into(),
            dst: dst.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            direction,
        });
        self
    }

    pub fn where_clause(mut self, clause: WhereClause) -> Self {
        self.wheres.push(clause);
        self
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let mut seen = BTreeSet::new();
        for name in self
            .nodes
            .iter()
            .map(|n| &n.binder)
            .chain(self.edges.iter().map(|e| &e.binder))
        {
            if !seen.insert(name.as_str()) {
                return Err(GraphError::InvalidPattern(format!("binder `{name}` declared twice")));
            }
        }
        let nodes: BTreeSet<&str> = self.nodes.iter().map(|n| n.binder.as_str()).collect();
        for e in &self.edges {
            for end in [&e.src, &e.dst] {
                if !nodes.contains(end.as_str()) {
                    return Err(GraphError::InvalidPattern(format!(
                        "edge `{}` refers to undeclared node `{end}`",
                        e.binder
                    )));
                }
            }
        }
        for w in &self.wheres {
            for b in w.binders() {
                if !seen.contains(b) {
                    return Err(GraphError::InvalidPattern(format!(
                        "where clause uses unknown binder `{b}`"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn binder_names(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .map(|n| n.binder.as_str())
            .chain(self.edges.iter().map(|e| e.binder.as_str()))
            .collect()
    }
}

impl PropertyGraph {
    /// Every binding of `pattern` in this graph, sorted by the bound element
    /// ids in binder declaration order.
    pub fn find(&self, pattern: &GraphPattern) -> Result<Vec<Binding>, GraphError> {
        pattern.validate()?;
        let mut matcher = Matcher {
            graph: self,
            pattern,
            assigned: BTreeMap::new(),
            used_edges: BTreeSet::new(),
            out: Vec::new(),
        };
        matcher.assign_node(0);
        let mut out = matcher.out;
        out.sort_by_key(Binding::key);
        Ok(out)
    }

    pub(crate) fn element_satisfies(&self, element: ElementId, labels: &[String], props: &[(String, Value)]) -> bool {
        let (Some(have_labels), Some(have_props)) = (self.labels(element), self.props(element)) else {
            return false;
        };
        labels.iter().all(|l| have_labels.contains(l)) && props.iter().all(|(k, v)| have_props.get(k) == Some(v))
    }
}

struct Matcher<'a> {
    graph: &'a PropertyGraph,
    pattern: &'a GraphPattern,
    assigned: BTreeMap<&'a str, ElementId>,
    used_edges: BTreeSet<EdgeId>,
    out: Vec<Binding>,
}

impl<'a> Matcher<'a> {
    fn assign_node(&mut self, index: usize) {
        let Some(node) = self.pattern.nodes.get(index) else {
            self.assign_edge(0);
            return;
        };
        for (id, _) in self.graph.vertices() {
            let el = ElementId::Vertex(id);
            if !self.graph.element_satisfies(el, &node.labels, &node.props) {
                continue;
            }
            self.assigned.insert(&node.binder, el);
            if self.node_edges_feasible(&node.binder) && self.wheres_hold() {
                self.assign_node(index + 1);
            }
            self.assigned.remove(node.binder.as_str());
        }
    }

    fn assign_edge(&mut self, index: usize) {
        let Some(edge) = self.pattern.edges.get(index) else {
            if self.wheres_hold() {
                let entries = self
                    .pattern
                    .binder_names()
                    .into_iter()
                    .map(|b| (b.to_string(), self.assigned[b]))
                    .collect();
                self.out.push(Binding::new(entries));
            }
            return;
        };
        let src = self.vertex_of(&edge.src);
        let dst = self.vertex_of(&edge.dst);
        for id in self.candidate_edges(edge, src, dst) {
            if self.used_edges.contains(&id) {
                continue;
            }
            self.assigned.insert(&edge.binder, ElementId::Edge(id));
            self.used_edges.insert(id);
            if self.wheres_hold() {
                self.assign_edge(index + 1);
            }
            self.used_edges.remove(&id);
            self.assigned.remove(edge.binder.as_str());
        }
    }

    fn vertex_of(&self, binder: &str) -> VertexId {
        match self.assigned[binder] {
            ElementId::Vertex(v) => v,
            ElementId::Edge(_) => unreachable!("node binder bound to an edge"),
        }
    }

    fn candidate_edges(&self, edge: &EdgePattern, src: VertexId, dst: VertexId) -> Vec<EdgeId> {
        let forward = || {
            self.graph
                .out_edges(src)
                .filter(move |(_, r)| r.dst == dst)
                .map(|(id, _)| id)
        };
        let backward = || {
            self.graph
                .out_edges(dst)
                .filter(move |(_, r)| r.dst == src)
                .map(|(id, _)| id)
        };
        let mut ids: Vec<EdgeId> = match edge.direction {
            Direction::Outgoing => forward().collect(),
            Direction::Incoming => backward().collect(),
            Direction::Either => forward()
                .chain(backward())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        };
        ids.retain(|id| {
            self.graph
                .element_satisfies(ElementId::Edge(*id), &edge.labels, &edge.props)
        });
        ids.sort();
        ids
    }

    /// Every edge pattern whose endpoints are now both bound still has a
    /// candidate edge.
    fn node_edges_feasible(&self, just_bound: &str) -> bool {
        self.pattern
            .edges
            .iter()
            .filter(|e| e.src == just_bound || e.dst == just_bound)
            .filter(|e| self.assigned.contains_key(e.src.as_str()) && self.assigned.contains_key(e.dst.as_str()))
            .all(|e| {
                !self
                    .candidate_edges(e, self.vertex_of(&e.src), self.vertex_of(&e.dst))
                    .is_empty()
            })
    }

    fn wheres_hold(&self) -> bool {
        self.pattern.wheres.iter().all(|w| {
            let [a, b] = w.binders();
            match (self.assigned.get(a), self.assigned.get(b)) {
                (Some(x), Some(y)) => clause_holds(self.graph, w, *x, *y),
                _ => true,
            }
        })
    }
}

pub(crate) fn clause_holds(graph: &PropertyGraph, clause: &WhereClause, left: ElementId, right: ElementId) -> bool {
    let prop = |el: ElementId, key: &str| graph.props(el).and_then(|p| p.get(key)).cloned();
    match clause {
        WhereClause::PropEq(a, b) => match (prop(left, &a.key), prop(right, &b.key)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
        WhereClause::PropNe(a, b) => match (prop(left, &a.key), prop(right, &b.key)) {
            (Some(x), Some(y)) => x != y,
            _ => false,
        },
        WhereClause::Same(..) => left == right,
        WhereClause::Distinct(..) => left != right,
    }
}
