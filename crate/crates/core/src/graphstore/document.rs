//! Canonical JSON export and import of whole graphs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EdgeId, EdgeRecord, GraphError, Properties, PropertyGraph, VertexId, VertexRecord};

pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDocument {
    pub id: String,
    pub labels: Vec<String>,
    pub props: Properties,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub labels: Vec<String>,
    pub props: Properties,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub version: u32,
    pub vertices: Vec<VertexDocument>,
    pub edges: Vec<EdgeDocument>,
}

impl GraphDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Document(e.to_string()))
    }
}

impl PropertyGraph {
    /// Exports the graph with vertices and edges sorted by id, so two
    /// structurally equal graphs export to identical bytes.
    pub fn export(&self) -> GraphDocument {
        GraphDocument {
            version: DOCUMENT_VERSION,
            vertices: self
                .vertices()
                .map(|(id, r)| VertexDocument {
                    id: id.to_string(),
                    labels: r.labels.iter().cloned().collect(),
                    props: r.props.clone(),
                })
                .collect(),
            edges: self
                .edges()
                .map(|(id, r)| EdgeDocument {
                    id: id.to_string(),
                    src: r.src.to_string(),
                    dst: r.dst.to_string(),
                    labels: r.labels.iter().cloned().collect(),
                    props: r.props.clone(),
                })
                .collect(),
        }
    }

    /// Like [`export`](Self::export), but renumbers vertices and edges to
    /// `v1..vn` and `e1..em` in id order. Two graphs built by the same
    /// sequence of surviving insertions export identically even when one of
    /// them burned ids on work that was later rolled back.
    pub fn export_compact(&self) -> GraphDocument {
        let rank: BTreeMap<VertexId, usize> = self.vertices().enumerate().map(|(n, (id, _))| (id, n + 1)).collect();
        let mut doc = self.export();
        for (n, v) in doc.vertices.iter_mut().enumerate() {
            v.id = VertexId(n as u64 + 1).to_string();
        }
        for (n, (e, (_, r))) in doc.edges.iter_mut().zip(self.edges()).enumerate() {
            e.id = EdgeId(n as u64 + 1).to_string();
            e.src = VertexId(rank[&r.src] as u64).to_string();
            e.dst = VertexId(rank[&r.dst] as u64).to_string();
        }
        doc
    }

    /// Rebuilds a graph from a document. Canonical ids (`v7`, `e3`) are kept;
    /// any other id strings are renamed to fresh ids in document order.
    pub fn import(doc: &GraphDocument) -> Result<Self, GraphError> {
        if doc.version != DOCUMENT_VERSION {
            return Err(GraphError::Document(format!("unsupported version {}", doc.version)));
        }
        let canonical = doc.vertices.iter().all(|v| v.id.parse::<VertexId>().is_ok())
            && doc.edges.iter().all(|e| e.id.parse::<EdgeId>().is_ok());

        let mut vertex_ids: BTreeMap<&str, VertexId> = BTreeMap::new();
        for (n, v) in doc.vertices.iter().enumerate() {
            let id = if canonical {
                v.id.parse().expect("checked")
            } else {
                VertexId(n as u64 + 1)
            };
            if vertex_ids.insert(&v.id, id).is_some() {
                return Err(GraphError::Document(format!("duplicate vertex id `{}`", v.id)));
            }
        }
        let mut g = PropertyGraph::new();
        for v in &doc.vertices {
            let labels: BTreeSet<String> = v.labels.iter().cloned().collect();
            if labels.len() != v.labels.len() {
                return Err(GraphError::Document(format!("vertex `{}` repeats a label", v.id)));
            }
            g.raw_restore_vertex(
                vertex_ids[v.id.as_str()],
                VertexRecord {
                    labels,
                    props: v.props.clone(),
                },
            );
        }
        let mut edge_ids = BTreeSet::new();
        for (n, e) in doc.edges.iter().enumerate() {
            let id = if canonical {
                e.id.parse().expect("checked")
            } else {
                EdgeId(n as u64 + 1)
            };
            if !edge_ids.insert(id) {
                return Err(GraphError::Document(format!("duplicate edge id `{}`", e.id)));
            }
            let endpoint = |s: &str| {
                vertex_ids
                    .get(s)
                    .copied()
                    .ok_or_else(|| GraphError::Document(format!("edge `{}` has dangling endpoint `{s}`", e.id)))
            };
            let labels: BTreeSet<String> = e.labels.iter().cloned().collect();
            if labels.len() != e.labels.len() {
                return Err(GraphError::Document(format!("edge `{}` repeats a label", e.id)));
            }
            let record = EdgeRecord {
                src: endpoint(&e.src)?,
                dst: endpoint(&e.dst)?,
                labels,
                props: e.props.clone(),
            };
            g.raw_restore_edge(id, record);
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Value;
    use super::*;

    const NO_PROPS: [(&str, Value); 0] = [];

    fn sample() -> PropertyGraph {
        let mut g = PropertyGraph::new();
        let a = g.add_vertex(["Formula"], [("atom", "A")]).unwrap();
        let b = g.add_vertex(["Formula"], [("op", "->"), ("n", "1")]).unwrap();
        g.add_edge(a, b, ["Operand"], [("operand", 1i64)]).unwrap();
        g.add_edge(b, b, ["Loop"], [("flag", true)]).unwrap();
        g
    }

    #[test]
    fn export_import_round_trip_is_byte_identical() {
        let g = sample();
        let text = g.export().to_json();
        let back = PropertyGraph::import(&GraphDocument::from_json(&text).unwrap()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.export().to_json(), text);
        back.check_integrity().unwrap();
    }

    #[test]
    fn export_shape() {
        let g = sample();
        let json: serde_json::Value = serde_json::from_str(&g.export().to_json()).unwrap();
        assert_eq!(json["version"], 1);
        assert_eq!(json["vertices"][0]["id"], "v1");
        assert_eq!(json["edges"][0]["src"], "v1");
        assert_eq!(json["edges"][0]["props"]["operand"], 1);
        assert_eq!(json["edges"][1]["props"]["flag"], true);
    }

    #[test]
    fn compact_export_ignores_burned_ids() {
        let mut g = PropertyGraph::new();
        let a = g.add_vertex(["A"], NO_PROPS).unwrap();
        let mark = g.mark();
        g.add_vertex(["Scratch"], NO_PROPS).unwrap();
        g.rollback(mark);
        let b = g.add_vertex(["B"], NO_PROPS).unwrap();
        g.add_edge(a, b, ["E"], NO_PROPS).unwrap();

        let mut fresh = PropertyGraph::new();
        let a = fresh.add_vertex(["A"], NO_PROPS).unwrap();
        let b = fresh.add_vertex(["B"], NO_PROPS).unwrap();
        fresh.add_edge(a, b, ["E"], NO_PROPS).unwrap();

        assert_ne!(g.export(), fresh.export());
        assert_eq!(g.export_compact().to_json(), fresh.export_compact().to_json());
        let back = PropertyGraph::import(&g.export_compact()).unwrap();
        assert_eq!(back, fresh);
    }

    #[test]
    fn non_canonical_ids_are_renamed() {
        let doc = GraphDocument {
            version: 1,
            vertices: vec![
                VertexDocument {
                    id: "alpha".into(),
                    labels: vec!["X".into()],
                    props: Properties::new(),
                },
                VertexDocument {
                    id: "beta".into(),
                    labels: vec![],
                    props: Properties::new(),
                },
            ],
            edges: vec![EdgeDocument {
                id: "r".into(),
                src: "beta".into(),
                dst: "alpha".into(),
                labels: vec![],
                props: Properties::new(),
            }],
        };
        let g = PropertyGraph::import(&doc).unwrap();
        assert_eq!(g.vertex_count(), 2);
        let (_, e) = g.edges().next().unwrap();
        assert_eq!(e.src, VertexId(2));
        assert_eq!(e.dst, VertexId(1));
    }

    #[test]
    fn dangling_edges_are_rejected() {
        let mut doc = sample().export();
        doc.edges[0].dst = "v99".into();
        assert!(matches!(PropertyGraph::import(&doc), Err(GraphError::Document(_))));
        let mut g = PropertyGraph::new();
        g.add_vertex(["A"], NO_PROPS).unwrap();
        let mut doc = g.export();
        doc.version = 2;
        assert!(PropertyGraph::import(&doc).is_err());
    }
}
