//! Forward, line-numbered proofs with nested subproofs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;

/// What a premise cites: one line, or a subproof from its hypothesis line to
/// a line directly inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Citation {
    Line(usize),
    Subproof([usize; 2]),
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Citation::Line(n) => write!(f, "{n}"),
            Citation::Subproof([a, b]) => write!(f, "{a}-{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitchLine {
    pub formula: Formula,
    pub rule: String,
    pub citations: Vec<(String, Citation)>,
    pub depth: usize,
    /// Innermost subproof containing the line.
    pub context: Option<usize>,
    /// True for the hypothesis line that opens a subproof.
    pub opens: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subproof {
    /// Line number of the hypothesis.
    pub start: usize,
    /// Last line number, once closed.
    pub end: Option<usize>,
    pub parent: Option<usize>,
    pub strict: bool,
    /// Formula the subproof aims to derive, if it was opened towards one.
    pub aim: Option<Formula>,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScopeError {
    #[error("there is no line {0}")]
    UnknownLine(usize),
    #[error("line {0} lies inside a closed subproof")]
    InClosedSubproof(usize),
    #[error("line {0} lies outside the enclosing strict subproof")]
    AcrossStrictBoundary(usize),
    #[error("line {0} is not directly outside the innermost strict subproof")]
    NotOuter(usize),
    #[error("no subproof starts at line {0}")]
    UnknownSubproof(usize),
    #[error("subproof {0} is still open and not the innermost one")]
    SubproofStillOpen(usize),
    #[error("line {end} is not directly inside the subproof starting at line {start}")]
    BadSubproofEnd { start: usize, end: usize },
    #[error("no subproof is open")]
    NothingToClose,
}

/// A Fitch proof of `goal`. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitchState {
    goal: Formula,
    lines: Vec<FitchLine>,
    subproofs: Vec<Subproof>,
    open: Vec<usize>,
}

impl FitchState {
    pub fn new(goal: Formula) -> Self {
        FitchState {
            goal,
            lines: Vec::new(),
            subproofs: Vec::new(),
            open: Vec::new(),
        }
    }

    pub fn goal(&self) -> &Formula {
        &self.goal
    }

    pub fn lines(&self) -> &[FitchLine] {
        &self.lines
    }

    pub fn line(&self, n: usize) -> Option<&FitchLine> {
        n.checked_sub(1).and_then(|i| self.lines.get(i))
    }

    pub fn subproofs(&self) -> &[Subproof] {
        &self.subproofs
    }

    /// Indices of the open subproofs, outermost first.
    pub fn open_subproofs(&self) -> &[usize] {
        &self.open
    }

    pub fn depth(&self) -> usize {
        self.open.len()
    }

    pub fn innermost(&self) -> Option<usize> {
        self.open.last().copied()
    }

    /// The formula currently being aimed at: the aim of the innermost open
    /// subproof that has one, else the goal.
    pub fn target(&self) -> &Formula {
        self.open
            .iter()
            .rev()
            .find_map(|s| self.subproofs[*s].aim.as_ref())
            .unwrap_or(&self.goal)
    }

    /// Position of a context in the open stack; the top level is -1.
    fn stack_position(&self, context: Option<usize>) -> Option<isize> {
        match context {
            None => Some(-1),
            Some(s) => self.open.iter().position(|o| *o == s).map(|p| p as isize),
        }
    }

    fn strict_positions(&self) -> impl Iterator<Item = isize> + '_ {
        self.open
            .iter()
            .enumerate()
            .filter(|(_, s)| self.subproofs[**s].strict)
            .map(|(i, _)| i as isize)
    }

    fn context_citable(&self, context: Option<usize>, line: usize, outer: bool) -> Result<(), ScopeError> {
        let p = self.stack_position(context).ok_or(ScopeError::InClosedSubproof(line))?;
        if outer {
            let boundary = self.strict_positions().last().ok_or(ScopeError::NotOuter(line))?;
            if p >= boundary || self.strict_positions().any(|b| p < b && b < boundary) {
                return Err(ScopeError::NotOuter(line));
            }
            Ok(())
        } else if self.strict_positions().any(|b| b > p) {
            Err(ScopeError::AcrossStrictBoundary(line))
        } else {
            Ok(())
        }
    }

    /// Whether line `n` may be cited at the current position. With `outer`,
    /// the line must instead sit directly outside the innermost strict
    /// subproof.
    pub fn check_line(&self, n: usize, outer: bool) -> Result<&FitchLine, ScopeError> {
        let line = self.line(n).ok_or(ScopeError::UnknownLine(n))?;
        self.context_citable(line.context, n, outer)?;
        Ok(line)
    }

    pub fn subproof_starting_at(&self, start: usize) -> Option<usize> {
        self.subproofs.iter().position(|s| s.start == start)
    }

    /// Whether the subproof `start..end` may be cited. Returns the subproof
    /// index and whether citing it closes it (it is the innermost open one).
    pub fn check_subproof(&self, start: usize, end: usize) -> Result<(usize, bool), ScopeError> {
        let s = self
            .subproof_starting_at(start)
            .ok_or(ScopeError::UnknownSubproof(start))?;
        let sub = &self.subproofs[s];
        let end_line = self.line(end).ok_or(ScopeError::UnknownLine(end))?;
        if end_line.context != Some(s) {
            return Err(ScopeError::BadSubproofEnd { start, end });
        }
        if sub.end.is_none() {
            if self.innermost() != Some(s) {
                return Err(ScopeError::SubproofStillOpen(start));
            }
            return Ok((s, true));
        }
        self.context_citable(sub.parent, start, false)?;
        Ok((s, false))
    }

    /// Lines citable by ordinary premises at the current position.
    pub fn citable_lines(&self, outer: bool) -> Vec<usize> {
        (1..=self.lines.len())
            .filter(|n| self.check_line(*n, outer).is_ok())
            .collect()
    }

    /// Subproof citations available at the current position.
    pub fn citable_subproofs(&self) -> Vec<[usize; 2]> {
        let mut out = Vec::new();
        for sub in &self.subproofs {
            for (i, line) in self.lines.iter().enumerate() {
                let n = i + 1;
                if self.subproof_starting_at(sub.start) == line.context && self.check_subproof(sub.start, n).is_ok() {
                    out.push([sub.start, n]);
                }
            }
        }
        out
    }

    /// Appends a line at the current depth.
    pub fn push_line(&mut self, formula: Formula, rule: &str, citations: Vec<(String, Citation)>) -> usize {
        self.lines.push(FitchLine {
            formula,
            rule: rule.to_string(),
            citations,
            depth: self.depth(),
            context: self.innermost(),
            opens: false,
        });
        self.lines.len()
    }

    /// Opens a subproof whose first line is `hypothesis`.
    pub fn open_subproof(&mut self, hypothesis: Formula, rule: &str, strict: bool, aim: Option<Formula>) -> usize {
        let index = self.subproofs.len();
        self.subproofs.push(Subproof {
            start: self.lines.len() + 1,
            end: None,
            parent: self.innermost(),
            strict,
            aim,
            depth: self.depth() + 1,
        });
        self.open.push(index);
        self.lines.push(FitchLine {
            formula: hypothesis,
            rule: rule.to_string(),
            citations: Vec::new(),
            depth: self.depth(),
            context: Some(index),
            opens: true,
        });
        self.lines.len()
    }

    /// Closes the innermost subproof.
    pub fn close_subproof(&mut self) -> Result<usize, ScopeError> {
        let s = self.open.pop().ok_or(ScopeError::NothingToClose)?;
        self.subproofs[s].end = Some(self.lines.len());
        Ok(s)
    }

    /// Complete when no subproof is open and the goal stands on a top-level
    /// line.
    pub fn is_complete(&self) -> bool {
        self.open.is_empty() && self.lines.iter().any(|l| l.context.is_none() && l.formula == self.goal)
    }
}
