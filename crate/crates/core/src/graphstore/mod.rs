//! Embedded labeled property graph store.
//!
//! A [`PropertyGraph`] is a directed multigraph whose vertices and edges carry
//! a set of labels and a map of key/value properties. Every mutation is
//! recorded in a journal so callers can take a [`Mark`] and later roll the
//! graph back to it; this is what rule application undo and tactic
//! backtracking are built on.
//!
//! Identifiers are assigned monotonically and never reused, even after a
//! rollback, so an id observed once always denotes the same element.

mod document;
mod pattern;
mod transform;

pub use document::{EdgeDocument, GraphDocument, VertexDocument, DOCUMENT_VERSION};
pub use pattern::{Binding, Direction, EdgePattern, GraphPattern, NodePattern, PropRef, WhereClause};
pub use transform::{TransformAction, TransformScript};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl std::str::FromStr for VertexId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('v')
            .and_then(|n| n.parse().ok())
            .map(VertexId)
            .ok_or_else(|| GraphError::BadId(s.to_string()))
    }
}

impl std::str::FromStr for EdgeId {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('e')
            .and_then(|n| n.parse().ok())
            .map(EdgeId)
            .ok_or_else(|| GraphError::BadId(s.to_string()))
    }
}

/// Either kind of graph element. Vertices order before edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementId {
    Vertex(VertexId),
    Edge(EdgeId),
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementId::Vertex(v) => v.fmt(f),
            ElementId::Edge(e) => e.fmt(f),
        }
    }
}

/// Scalar property value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Text(String),
}

impl Value {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

pub type Properties = BTreeMap<String, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate property key `{0}`")]
    DuplicateKey(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("malformed pattern: {0}")]
    InvalidPattern(String),
    #[error("pattern has no match")]
    NoMatch,
    #[error("transform action {index} failed: {reason}")]
    TransformFailed { index: usize, reason: String },
    #[error("malformed element id `{0}`")]
    BadId(String),
    #[error("invalid graph document: {0}")]
    Document(String),
}

/// Builds a property map, rejecting repeated keys.
pub fn properties<K, V, I>(pairs: I) -> Result<Properties, GraphError>
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<Value>,
{
    let mut props = Properties::new();
    for (k, v) in pairs {
        let k = k.into();
        if props.contains_key(&k) {
            return Err(GraphError::DuplicateKey(k));
        }
        props.insert(k, v.into());
    }
    Ok(props)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRecord {
    pub labels: BTreeSet<String>,
    pub props: Properties,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRecord {
    pub src: VertexId,
    pub dst: VertexId,
    pub labels: BTreeSet<String>,
    pub props: Properties,
}

impl VertexRecord {
    pub fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn prop(&self, key: &str) -> Option<&Value> {
        self.props.get(key)
    }
}

impl EdgeRecord {
    pub fn has_label(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn prop(&self, key: &str) -> Option<&Value> {
        self.props.get(key)
    }
}

/// One journaled mutation, holding what is needed to invert it.
#[derive(Debug, Clone, PartialEq)]
enum Change {
    VertexAdded(VertexId),
    VertexRemoved(VertexId, VertexRecord),
    EdgeAdded(EdgeId),
    EdgeRemoved(EdgeId, EdgeRecord),
    LabelAdded(ElementId, String),
    LabelRemoved(ElementId, String),
    PropertySet {
        element: ElementId,
        key: String,
        previous: Option<Value>,
    },
}

/// Position in the mutation journal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mark(usize);

/// The changes made by one transform, in application order.
#[derive(Debug, Clone, PartialEq)]
pub struct UndoEntry {
    changes: Vec<Change>,
}

impl UndoEntry {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    vertices: BTreeMap<VertexId, VertexRecord>,
    edges: BTreeMap<EdgeId, EdgeRecord>,
    outgoing: BTreeMap<VertexId, BTreeSet<EdgeId>>,
    incoming: BTreeMap<VertexId, BTreeSet<EdgeId>>,
    next_vertex: u64,
    next_edge: u64,
    journal: Vec<Change>,
}

/// Structural equality: same element ids, labels, properties and endpoints.
/// Journals and id counters are not compared.
impl PartialEq for PropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for PropertyGraph {}

impl PropertyGraph {
    pub fn new() -> Self {
        Self {
            next_vertex: 1,
            next_edge: 1,
            ..Default::default()
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&VertexRecord> {
        self.vertices.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&EdgeRecord> {
        self.edges.get(&id)
    }

    pub fn contains_vertex(&self, id: VertexId) -> bool {
        self.vertices.contains_key(&id)
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &VertexRecord)> + '_ {
        self.vertices.iter().map(|(id, r)| (*id, r))
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &EdgeRecord)> + '_ {
        self.edges.iter().map(|(id, r)| (*id, r))
    }

    pub fn vertices_with_label<'a>(
        &'a self,
        label: &'a str,
    ) -> impl Iterator<Item = (VertexId, &'a VertexRecord)> + 'a {
        self.vertices().filter(move |(_, r)| r.has_label(label))
    }

    /// Outgoing edges of `v`, ascending by id.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = (EdgeId, &EdgeRecord)> + '_ {
        self.outgoing
            .get(&v)
            .into_iter()
            .flatten()
            .map(move |e| (*e, &self.edges[e]))
    }

    /// Incoming edges of `v`, ascending by id.
    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = (EdgeId, &EdgeRecord)> + '_ {
        self.incoming
            .get(&v)
            .into_iter()
            .flatten()
            .map(move |e| (*e, &self.edges[e]))
    }

    pub fn labels(&self, element: ElementId) -> Option<&BTreeSet<String>> {
        match element {
            ElementId::Vertex(v) => self.vertices.get(&v).map(|r| &r.labels),
            ElementId::Edge(e) => self.edges.get(&e).map(|r| &r.labels),
        }
    }

    pub fn props(&self, element: ElementId) -> Option<&Properties> {
        match element {
            ElementId::Vertex(v) => self.vertices.get(&v).map(|r| &r.props),
            ElementId::Edge(e) => self.edges.get(&e).map(|r| &r.props),
        }
    }

    pub fn contains(&self, element: ElementId) -> bool {
        match element {
            ElementId::Vertex(v) => self.vertices.contains_key(&v),
            ElementId::Edge(e) => self.edges.contains_key(&e),
        }
    }

    pub fn add_vertex<L, S, K, V, P>(&mut self, labels: L, props: P) -> Result<VertexId, GraphError>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<Value>,
    {
        let record = VertexRecord {
            labels: labels.into_iter().map(Into::into).collect(),
            props: properties(props)?,
        };
        Ok(self.insert_vertex(record))
    }

    pub fn add_edge<L, S, K, V, P>(
        &mut self,
        src: VertexId,
        dst: VertexId,
        labels: L,
        props: P,
    ) -> Result<EdgeId, GraphError>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<Value>,
    {
        for v in [src, dst] {
            if !self.vertices.contains_key(&v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        let record = EdgeRecord {
            src,
            dst,
            labels: labels.into_iter().map(Into::into).collect(),
            props: properties(props)?,
        };
        Ok(self.insert_edge(record))
    }

    pub(crate) fn insert_vertex(&mut self, record: VertexRecord) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        self.raw_restore_vertex(id, record);
        self.journal.push(Change::VertexAdded(id));
        id
    }

    pub(crate) fn insert_edge(&mut self, record: EdgeRecord) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.raw_restore_edge(id, record);
        self.journal.push(Change::EdgeAdded(id));
        id
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<EdgeRecord, GraphError> {
        let record = self.raw_remove_edge(id).ok_or(GraphError::UnknownEdge(id))?;
        self.journal.push(Change::EdgeRemoved(id, record.clone()));
        Ok(record)
    }

    /// Removes a vertex together with every incident edge.
    pub fn remove_vertex(&mut self, id: VertexId) -> Result<VertexRecord, GraphError> {
        if !self.vertices.contains_key(&id) {
            return Err(GraphError::UnknownVertex(id));
        }
        let incident: BTreeSet<EdgeId> = self
            .outgoing
            .get(&id)
            .into_iter()
            .chain(self.incoming.get(&id))
            .flatten()
            .copied()
            .collect();
        for e in incident {
            self.remove_edge(e)?;
        }
        let record = self.raw_remove_vertex(id).expect("checked above");
        self.journal.push(Change::VertexRemoved(id, record.clone()));
        Ok(record)
    }

    pub fn add_label(&mut self, element: ElementId, label: impl Into<String>) -> Result<bool, GraphError> {
        let label = label.into();
        let inserted = self.labels_mut(element)?.insert(label.clone());
        if inserted {
            self.journal.push(Change::LabelAdded(element, label));
        }
        Ok(inserted)
    }

    pub fn remove_label(&mut self, element: ElementId, label: &str) -> Result<bool, GraphError> {
        let removed = self.labels_mut(element)?.remove(label);
        if removed {
            self.journal.push(Change::LabelRemoved(element, label.to_string()));
        }
        Ok(removed)
    }

    /// Sets (or overwrites) a property; returns the previous value.
    pub fn set_property(
        &mut self,
        element: ElementId,
        key: impl Into<String>,
        value: impl Into<Value>,
    ) -> Result<Option<Value>, GraphError> {
        let key = key.into();
        let previous = self.props_mut(element)?.insert(key.clone(), value.into());
        self.journal.push(Change::PropertySet {
            element,
            key,
            previous: previous.clone(),
        });
        Ok(previous)
    }

    pub fn remove_property(&mut self, element: ElementId, key: &str) -> Result<Option<Value>, GraphError> {
        let previous = self.props_mut(element)?.remove(key);
        if previous.is_some() {
            self.journal.push(Change::PropertySet {
                element,
                key: key.to_string(),
                previous: previous.clone(),
            });
        }
        Ok(previous)
    }

    pub fn mark(&self) -> Mark {
        Mark(self.journal.len())
    }

    /// Reverts every change made after `mark`. Marks taken after `mark` become
    /// invalid.
    pub fn rollback(&mut self, mark: Mark) {
        while self.journal.len() > mark.0 {
            let change = self.journal.pop().expect("length checked");
            self.invert(change);
        }
    }

    pub fn changes_since(&self, mark: Mark) -> UndoEntry {
        UndoEntry {
            changes: self.journal[mark.0.min(self.journal.len())..].to_vec(),
        }
    }

    /// Applies the inverse of `entry`. The inversion is itself journaled, so
    /// outstanding marks stay valid.
    pub fn revert(&mut self, entry: &UndoEntry) -> Result<(), GraphError> {
        for change in entry.changes.iter().rev() {
            match change {
                Change::VertexAdded(v) => {
                    self.remove_vertex(*v)?;
                }
                Change::VertexRemoved(v, record) => {
                    if self.vertices.contains_key(v) {
                        return Err(GraphError::Document(format!("vertex {v} already present")));
                    }
                    self.raw_restore_vertex(*v, record.clone());
                    self.journal.push(Change::VertexAdded(*v));
                }
                Change::EdgeAdded(e) => {
                    self.remove_edge(*e)?;
                }
                Change::EdgeRemoved(e, record) => {
                    for v in [record.src, record.dst] {
                        if !self.vertices.contains_key(&v) {
                            return Err(GraphError::UnknownVertex(v));
                        }
                    }
                    self.raw_restore_edge(*e, record.clone());
                    self.journal.push(Change::EdgeAdded(*e));
                }
                Change::LabelAdded(el, label) => {
                    self.remove_label(*el, label)?;
                }
                Change::LabelRemoved(el, label) => {
                    self.add_label(*el, label.clone())?;
                }
                Change::PropertySet { element, key, previous } => match previous {
                    Some(value) => {
                        self.set_property(*element, key.clone(), value.clone())?;
                    }
                    None => {
                        self.remove_property(*element, key)?;
                    }
                },
            }
        }
        Ok(())
    }

    /// Drops the journal. Outstanding marks become meaningless.
    pub fn forget_history(&mut self) {
        self.journal.clear();
    }

    pub fn journal_len(&self) -> usize {
        self.journal.len()
    }

    /// Checks the store's own invariants: every edge has live endpoints and
    /// the adjacency indexes agree with the edge table.
    pub fn check_integrity(&self) -> Result<(), String> {
        for (id, e) in &self.edges {
            if !self.vertices.contains_key(&e.src) || !self.vertices.contains_key(&e.dst) {
                return Err(format!("edge {id} is dangling"));
            }
            if !self.outgoing.get(&e.src).is_some_and(|s| s.contains(id))
                || !self.incoming.get(&e.dst).is_some_and(|s| s.contains(id))
            {
                return Err(format!("edge {id} missing from adjacency index"));
            }
        }
        let indexed: usize = self.outgoing.values().map(BTreeSet::len).sum();
        let indexed_in: usize = self.incoming.values().map(BTreeSet::len).sum();
        if indexed != self.edges.len() || indexed_in != self.edges.len() {
            return Err("adjacency index holds stale edges".into());
        }
        Ok(())
    }

    fn labels_mut(&mut self, element: ElementId) -> Result<&mut BTreeSet<String>, GraphError> {
        match element {
            ElementId::Vertex(v) => self
                .vertices
                .get_mut(&v)
                .map(|r| &mut r.labels)
                .ok_or(GraphError::UnknownVertex(v)),
            ElementId::Edge(e) => self
                .edges
                .get_mut(&e)
                .map(|r| &mut r.labels)
                .ok_or(GraphError::UnknownEdge(e)),
        }
    }

    fn props_mut(&mut self, element: ElementId) -> Result<&mut Properties, GraphError> {
        match element {
            ElementId::Vertex(v) => self
                .vertices
                .get_mut(&v)
                .map(|r| &mut r.props)
                .ok_or(GraphError::UnknownVertex(v)),
            ElementId::Edge(e) => self
                .edges
                .get_mut(&e)
                .map(|r| &mut r.props)
                .ok_or(GraphError::UnknownEdge(e)),
        }
    }

    fn raw_restore_vertex(&mut self, id: VertexId, record: VertexRecord) {
        self.next_vertex = self.next_vertex.max(id.0 + 1);
        self.vertices.insert(id, record);
    }

    fn raw_restore_edge(&mut self, id: EdgeId, record: EdgeRecord) {
        self.next_edge = self.next_edge.max(id.0 + 1);
        self.outgoing.entry(record.src).or_default().insert(id);
        self.incoming.entry(record.dst).or_default().insert(id);
        self.edges.insert(id, record);
    }

    fn raw_remove_edge(&mut self, id: EdgeId) -> Option<EdgeRecord> {
        let record = self.edges.remove(&id)?;
        if let Some(set) = self.outgoing.get_mut(&record.src) {
            set.remove(&id);
            if set.is_empty() {
                self.outgoing.remove(&record.src);
            }
        }
        if let Some(set) = self.incoming.get_mut(&record.dst) {
            set.remove(&id);
            if set.is_empty() {
                self.incoming.remove(&record.dst);
            }
        }
        Some(record)
    }

    fn raw_remove_vertex(&mut self, id: VertexId) -> Option<VertexRecord> {
        debug_assert!(self.outgoing.get(&id).is_none_or(BTreeSet::is_empty));
        debug_assert!(self.incoming.get(&id).is_none_or(BTreeSet::is_empty));
        self.vertices.remove(&id)
    }

    fn invert(&mut self, change: Change) {
        match change {
            Change::VertexAdded(v) => {
                self.raw_remove_vertex(v);
            }
            Change::VertexRemoved(v, record) => self.raw_restore_vertex(v, record),
            Change::EdgeAdded(e) => {
                self.raw_remove_edge(e);
            }
            Change::EdgeRemoved(e, record) => self.raw_restore_edge(e, record),
            Change::LabelAdded(el, label) => {
                if let Ok(labels) = self.labels_mut(el) {
                    labels.remove(&label);
                }
            }
            Change::LabelRemoved(el, label) => {
                if let Ok(labels) = self.labels_mut(el) {
                    labels.insert(label);
                }
            }
            Change::PropertySet { element, key, previous } => {
                if let Ok(props) = self.props_mut(element) {
                    match previous {
                        Some(v) => {
                            props.insert(key, v);
                        }
                        None => {
                            props.remove(&key);
                        }
                    }
                }
            }
        }
    }
}
