//! Flat Hilbert-style derivations.

use std::collections::{BTreeMap, BTreeSet};

use crate::formula::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom {
        schema: String,
        substitution: BTreeMap<String, Formula>,
    },
    ModusPonens {
        minor: usize,
        major: usize,
    },
    Necessitation {
        line: usize,
    },
    Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLine {
    pub formula: Formula,
    pub rule: String,
    pub justification: Justification,
    /// Hypothesis lines this line depends on.
    pub deps: BTreeSet<usize>,
}

/// A Hilbert derivation aiming at `goal`. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertState {
    goal: Formula,
    lines: Vec<HilbertLine>,
}

impl HilbertState {
    pub fn new(goal: Formula) -> Self {
        HilbertState {
            goal,
            lines: Vec::new(),
        }
    }

    pub fn goal(&self) -> &Formula {
        &self.goal
    }

    pub fn lines(&self) -> &[HilbertLine] {
        &self.lines
    }

    pub fn line(&self, n: usize) -> Option<&HilbertLine> {
        n.checked_sub(1).and_then(|i| self.lines.get(i))
    }

    pub fn push(&mut self, line: HilbertLine) -> usize {
        self.lines.push(line);
        self.lines.len()
    }

    pub fn truncate(&mut self, len: usize) {
        self.lines.truncate(len);
    }

    /// Whether `f` already stands on some line.
    pub fn derives(&self, f: &Formula) -> bool {
        self.lines.iter().any(|l| &l.formula == f)
    }

    /// Complete when the goal stands on a line that depends on no hypothesis.
    pub fn is_complete(&self) -> bool {
        self.lines.iter().any(|l| l.deps.is_empty() && l.formula == self.goal)
    }
}
