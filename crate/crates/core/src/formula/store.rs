use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::graphstore::{PropertyGraph, Value, VertexId};

use super::{Formula, OperatorTable};

pub const FORMULA_LABEL: &str = "Formula";
pub const OPERAND_LABEL: &str = "Operand";
pub const OP_KEY: &str = "op";
pub const ATOM_KEY: &str = "atom";
pub const OPERAND_KEY: &str = "operand";

/// Interning table from formulas to their graph vertices.
///
/// The store does not own the graph; the owner must pass the same graph to
/// every call and call [`FormulaStore::sync`] after rolling the graph back.
#[derive(Debug, Clone, Default)]
pub struct FormulaStore {
    by_formula: HashMap<Formula, VertexId>,
    by_vertex: BTreeMap<VertexId, Formula>,
}

impl FormulaStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_vertex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_vertex.is_empty()
    }

    pub fn vertex(&self, f: &Formula) -> Option<VertexId> {
        self.by_formula.get(f).copied()
    }

    pub fn formula(&self, v: VertexId) -> Option<&Formula> {
        self.by_vertex.get(&v)
    }

    /// All interned formulas.
    pub fn universe(&self) -> BTreeSet<Formula> {
        self.by_vertex.values().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &Formula)> + '_ {
        self.by_vertex.iter().map(|(v, f)| (*v, f))
    }

    /// Returns the vertex for `f`, creating vertices for it and any missing
    /// subformulas. Operand edges point from each operand into the compound
    /// and carry the 1-based operand index.
    pub fn intern(&mut self, graph: &mut PropertyGraph, f: &Formula) -> VertexId {
        if let Some(v) = self.vertex(f) {
            return v;
        }
        let operand_vertices: Vec<VertexId> = f.operands().iter().map(|o| self.intern(graph, o)).collect();
        let props: Vec<(&str, Value)> = match f.op() {
            Some(op) => vec![(OP_KEY, op.into())],
            None => vec![(ATOM_KEY, f.atom_name().expect("atom").into())],
        };
        let v = graph
            .add_vertex([FORMULA_LABEL], props)
            .expect("formula vertex properties are distinct");
        for (i, o) in operand_vertices.into_iter().enumerate() {
            graph
                .add_edge(o, v, [OPERAND_LABEL], [(OPERAND_KEY, Value::Int(i as i64 + 1))])
                .expect("operand vertices exist");
        }
        self.by_formula.insert(f.clone(), v);
        self.by_vertex.insert(v, f.clone());
        v
    }

    /// Drops entries whose vertex no longer exists, e.g. after a rollback.
    pub fn sync(&mut self, graph: &PropertyGraph) {
        let gone: Vec<VertexId> = self
            .by_vertex
            .keys()
            .filter(|v| !graph.contains_vertex(**v))
            .copied()
            .collect();
        for v in gone {
            if let Some(f) = self.by_vertex.remove(&v) {
                self.by_formula.remove(&f);
            }
        }
    }

    /// Reconstructs the table from the formula vertices of `graph`, checking
    /// operator arities, acyclicity and that no formula appears twice.
    pub fn rebuild(graph: &PropertyGraph, table: &OperatorTable) -> Result<Self, String> {
        let mut store = FormulaStore::new();
        let mut visiting = BTreeSet::new();
        let ids: Vec<VertexId> = graph.vertices_with_label(FORMULA_LABEL).map(|(id, _)| id).collect();
        for id in ids {
            let f = decode(graph, table, id, &mut visiting, &mut store.by_vertex)?;
            if let Some(other) = store.by_formula.insert(f.clone(), id) {
                if other != id {
                    return Err(format!("formula {f} is stored twice ({other} and {id})"));
                }
            }
        }
        Ok(store)
    }
}

fn decode(
    graph: &PropertyGraph,
    table: &OperatorTable,
    id: VertexId,
    visiting: &mut BTreeSet<VertexId>,
    done: &mut BTreeMap<VertexId, Formula>,
) -> Result<Formula, String> {
    if let Some(f) = done.get(&id) {
        return Ok(f.clone());
    }
    if !visiting.insert(id) {
        return Err(format!("formula vertex {id} lies on an operand cycle"));
    }
    let record = graph.vertex(id).ok_or_else(|| format!("unknown vertex {id}"))?;
    if !record.has_label(FORMULA_LABEL) {
        return Err(format!("operand edge into non-formula vertex {id}"));
    }
    let mut operands: Vec<(i64, VertexId)> = Vec::new();
    for (eid, e) in graph.in_edges(id) {
        if !e.has_label(OPERAND_LABEL) {
            continue;
        }
        let index = e
            .prop(OPERAND_KEY)
            .and_then(Value::as_int)
            .ok_or_else(|| format!("operand edge {eid} lacks an integer `{OPERAND_KEY}`"))?;
        operands.push((index, e.src));
    }
    operands.sort();
    let f = match (record.prop(OP_KEY), record.prop(ATOM_KEY)) {
        (Some(Value::Text(op)), None) => {
            let arity = table
                .arity(op)
                .ok_or_else(|| format!("vertex {id}: unknown operator `{op}`"))?;
            if operands.len() != arity || operands.iter().enumerate().any(|(i, (n, _))| *n != i as i64 + 1) {
                return Err(format!(
                    "vertex {id}: operator `{op}` needs operand edges 1..={arity}, found {:?}",
                    operands.iter().map(|(n, _)| *n).collect::<Vec<_>>()
                ));
            }
            let mut children = Vec::with_capacity(arity);
            for (_, src) in &operands {
                children.push(decode(graph, table, *src, visiting, done)?);
            }
            Formula::compound(op, children)
        }
        (None, Some(Value::Text(name))) => {
            if !operands.is_empty() {
                return Err(format!("atom vertex {id} has incoming operand edges"));
            }
            Formula::atom(name)
        }
        _ => {
            return Err(format!(
                "formula vertex {id} needs exactly one of `{OP_KEY}`/`{ATOM_KEY}`"
            ))
        }
    };
    visiting.remove(&id);
    done.insert(id, f.clone());
    Ok(f)
}
