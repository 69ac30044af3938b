//! All-or-nothing graph transformations driven by a pattern binding.

use std::collections::BTreeMap;

use super::{properties, Binding, ElementId, GraphError, GraphPattern, PropertyGraph, UndoEntry, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum TransformAction {
    CreateVertex {
        binder: String,
        labels: Vec<String>,
        props: Vec<(String, Value)>,
    },
    CreateEdge {
        binder: Option<String>,
        src: String,
        dst: String,
        labels: Vec<String>,
        props: Vec<(String, Value)>,
    },
    SetProperty {
        binder: String,
        key: String,
        value: Value,
    },
    AddLabel {
        binder: String,
        label: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransformScript {
    pub actions: Vec<TransformAction>,
}

impl TransformScript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_vertex<L, S, P, K, V>(mut self, binder: impl Into<String>, labels: L, props: P) -> Self
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
        P: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<Value>,
    {
        self.actions.push(TransformAction::CreateVertex {
            binder: binder.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        });
        self
    }

    pub fn create_edge<L, S, P, K, V>(
        mut self,
        src: impl Into<String>,
        dst: impl Into<String>,
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
        self.actions.push(TransformAction::CreateEdge {
            binder: None,
            src: src.into(),
            dst: dst.into(),
            labels: labels.into_iter().map(Into::into).collect(),
            props: props.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        });
        self
    }

    pub fn set_property(mut self, binder: impl Into<String>, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.actions.push(TransformAction::SetProperty {
            binder: binder.into(),
            key: key.into(),
            value: value.into(),
        });
        self
    }

    pub fn add_label(mut self, binder: impl Into<String>, label: impl Into<String>) -> Self {
        self.actions.push(TransformAction::AddLabel {
            binder: binder.into(),
            label: label.into(),
        });
        self
    }
}

impl PropertyGraph {
    /// Runs `script` against the first binding of `pattern`.
    pub fn apply_transform(
        &mut self,
        pattern: &GraphPattern,
        script: &TransformScript,
    ) -> Result<UndoEntry, GraphError> {
        let binding = self.find(pattern)?.into_iter().next().ok_or(GraphError::NoMatch)?;
        self.apply_transform_at(&binding, script)
    }

    /// Runs `script` with the given binding. On any failure the graph is left
    /// exactly as it was.
    pub fn apply_transform_at(&mut self, binding: &Binding, script: &TransformScript) -> Result<UndoEntry, GraphError> {
        let mark = self.mark();
        let mut env: BTreeMap<String, ElementId> = binding.entries().iter().map(|(b, e)| (b.clone(), *e)).collect();
        for (index, action) in script.actions.iter().enumerate() {
            if let Err(reason) = self.run_action(action, &mut env) {
                self.rollback(mark);
                return Err(GraphError::TransformFailed { index, reason });
            }
        }
        Ok(self.changes_since(mark))
    }

    fn run_action(&mut self, action: &TransformAction, env: &mut BTreeMap<String, ElementId>) -> Result<(), String> {
        let lookup = |env: &BTreeMap<String, ElementId>, b: &str| {
            env.get(b).copied().ok_or_else(|| format!("unbound binder `{b}`"))
        };
        match action {
            TransformAction::CreateVertex { binder, labels, props } => {
                if env.contains_key(binder) {
                    return Err(format!("binder `{binder}` already bound"));
                }
                let props = properties(props.iter().cloned()).map_err(|e| e.to_string())?;
                let id = self.insert_vertex(super::VertexRecord {
                    labels: labels.iter().cloned().collect(),
                    props,
                });
                env.insert(binder.clone(), ElementId::Vertex(id));
            }
            TransformAction::CreateEdge {
                binder,
                src,
                dst,
                labels,
                props,
            } => {
                let as_vertex = |el: ElementId| match el {
                    ElementId::Vertex(v) => Ok(v),
                    ElementId::Edge(e) => Err(format!("{e} is not a vertex")),
                };
                let s = as_vertex(lookup(env, src)?)?;
                let d = as_vertex(lookup(env, dst)?)?;
                if let Some(b) = binder {
                    if env.contains_key(b) {
                        return Err(format!("binder `{b}` already bound"));
                    }
                }
                let id = self
                    .add_edge(s, d, labels.iter().cloned(), props.iter().cloned())
                    .map_err(|e| e.to_string())?;
                if let Some(b) = binder {
                    env.insert(b.clone(), ElementId::Edge(id));
                }
            }
            TransformAction::SetProperty { binder, key, value } => {
                let el = lookup(env, binder)?;
                self.set_property(el, key.clone(), value.clone())
                    .map_err(|e| e.to_string())?;
            }
            TransformAction::AddLabel { binder, label } => {
                let el = lookup(env, binder)?;
                self.add_label(el, label.clone()).map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }
}
