//! Backtracking tactic combinators over [`Proof`].
//!
//! Tactics run in continuation-passing style: an atomic tactic tries its
//! candidates in order and hands each resulting state to the rest of the
//! search, undoing the step when the rest fails. `Many` commits greedily to
//! the first success of its body on each iteration. Fuel counts attempted
//! rule applications.

use std::fmt;

use serde::Serialize;

use crate::engine::{EngineError, Filter, Proof, Step};
use crate::syntax::{parse_expr, Args, Expr, SyntaxError};

pub const DEFAULT_FUEL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tactic {
    Atomic {
        rule: String,
        filters: Vec<Filter>,
    },
    Many(Box<Tactic>),
    Try(Box<Tactic>),
    AndThen(Box<Tactic>, Box<Tactic>),
    /// `AndThen(t, Many(t))`.
    Some(Box<Tactic>),
    /// `AndThen(Try(a), b)`.
    OrElse(Box<Tactic>, Box<Tactic>),
}

impl Tactic {
    pub fn atomic(rule: impl Into<String>) -> Tactic {
        Tactic::Atomic {
            rule: rule.into(),
            filters: Vec::new(),
        }
    }

    pub fn filtered(rule: impl Into<String>, filters: &[Filter]) -> Tactic {
        Tactic::Atomic {
            rule: rule.into(),
            filters: filters.to_vec(),
        }
    }

    pub fn many(t: Tactic) -> Tactic {
        Tactic::Many(Box::new(t))
    }

    pub fn try_(t: Tactic) -> Tactic {
        Tactic::Try(Box::new(t))
    }

    pub fn and_then(a: Tactic, b: Tactic) -> Tactic {
        Tactic::AndThen(Box::new(a), Box::new(b))
    }

    pub fn some(t: Tactic) -> Tactic {
        Tactic::Some(Box::new(t))
    }

    pub fn or_else(a: Tactic, b: Tactic) -> Tactic {
        Tactic::OrElse(Box::new(a), Box::new(b))
    }

    /// Rule names referenced by atomic tactics.
    pub fn rules(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_rules(&mut out);
        out
    }

    fn collect_rules<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tactic::Atomic { rule, .. } => out.push(rule),
            Tactic::Many(t) | Tactic::Try(t) | Tactic::Some(t) => t.collect_rules(out),
            Tactic::AndThen(a, b) | Tactic::OrElse(a, b) => {
                a.collect_rules(out);
                b.collect_rules(out);
            }
        }
    }

    /// Parses the surface syntax. `lookup` resolves `Use(name)` references to
    /// previously defined tactics.
    pub fn from_expr(e: &Expr, lookup: &dyn Fn(&str) -> Option<Tactic>) -> Result<Tactic, SyntaxError> {
        let (name, args) = e.as_call().ok_or_else(|| e.error("expected a tactic"))?;
        let mut a = Args::new(name, e.pos, args);
        let sub = |x: &Expr| Tactic::from_expr(x, lookup);
        let t = match name {
            "Atomic" => {
                let rule = a
                    .text(Some(0), "rule")?
                    .ok_or_else(|| e.error("Atomic needs a rule name"))?;
                let mut filters = Vec::new();
                if let Some(list) = a.get(Some(1), "filters") {
                    let items = list.as_list().ok_or_else(|| list.error("expected a list of filters"))?;
                    for f in items {
                        let n = f.as_text().ok_or_else(|| f.error("expected a filter name"))?;
                        filters.push(Filter::parse(n).ok_or_else(|| f.error(format!("unknown filter `{n}`")))?);
                    }
                }
                Tactic::Atomic {
                    rule: rule.to_string(),
                    filters,
                }
            }
            "Many" | "Try" | "Some" => {
                let body = sub(a.require(Some(0), "tactic")?)?;
                match name {
                    "Many" => Tactic::many(body),
                    "Try" => Tactic::try_(body),
                    _ => Tactic::some(body),
                }
            }
            "AndThen" | "OrElse" => {
                // n-ary forms nest to the right
                if args.len() < 2 || args.iter().any(|x| x.key.is_some()) {
                    return Err(e.error(format!("{name} takes two or more positional tactics")));
                }
                let mut parts = args.iter().rev().map(|x| sub(&x.value));
                let mut acc = parts.next().expect("nonempty")?;
                for p in parts {
                    acc = if name == "AndThen" {
                        Tactic::and_then(p?, acc)
                    } else {
                        Tactic::or_else(p?, acc)
                    };
                }
                return Ok(acc);
            }
            "Use" => {
                let n = a
                    .text(Some(0), "name")?
                    .ok_or_else(|| e.error("Use needs a tactic name"))?;
                lookup(n).ok_or_else(|| e.error(format!("unknown tactic `{n}`")))?
            }
            other => return Err(e.error(format!("unknown tactic `{other}`"))),
        };
        a.finish()?;
        Ok(t)
    }

    pub fn parse(text: &str) -> Result<Tactic, SyntaxError> {
        Tactic::from_expr(&parse_expr(text)?, &|_| None)
    }
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tactic::Atomic { rule, filters } => {
                write!(f, "Atomic({rule:?}")?;
                if !filters.is_empty() {
                    let names: Vec<&str> = filters.iter().map(|x| x.name()).collect();
                    write!(f, ", [{}]", names.join(", "))?;
                }
                f.write_str(")")
            }
            Tactic::Many(t) => write!(f, "Many({t})"),
            Tactic::Try(t) => write!(f, "Try({t})"),
            Tactic::Some(t) => write!(f, "Some({t})"),
            Tactic::AndThen(a, b) => write!(f, "AndThen({a}, {b})"),
            Tactic::OrElse(a, b) => write!(f, "OrElse({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "camelCase")]
pub enum Outcome {
    Success { trace: Vec<Step> },
    Failure,
    FuelExhausted,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Success { .. } => "success",
            Outcome::Failure => "failure",
            Outcome::FuelExhausted => "fuelExhausted",
        }
    }
}

/// Result of [`run`]: the outcome and the number of attempted applications.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub outcome: Outcome,
    pub fuel_used: u64,
}

struct OutOfFuel;

/// `Ok(true)`: the whole remaining search succeeded. `Ok(false)`: it failed
/// and every step taken on the way was undone.
type Res = Result<bool, OutOfFuel>;

struct Runner<'p> {
    proof: &'p mut Proof,
    fuel: u64,
    used: u64,
    trace: Vec<Step>,
}

impl Runner<'_> {
    fn reset(&mut self, len: usize, trace: usize) {
        self.proof.truncate(len);
        self.trace.truncate(trace);
    }

    fn exec(&mut self, t: &Tactic, k: &mut dyn FnMut(&mut Self) -> Res) -> Res {
        match t {
            Tactic::Atomic { rule, filters } => self.atomic(rule, filters, k),
            Tactic::Try(body) => self.try_(body, k),
            Tactic::Many(body) => self.many(body, k),
            Tactic::AndThen(a, b) => self.exec(a, &mut |s: &mut Self| s.exec(b, k)),
            Tactic::Some(body) => self.exec(body, &mut |s: &mut Self| s.many(body, k)),
            Tactic::OrElse(a, b) => self.try_(a, &mut |s: &mut Self| s.exec(b, k)),
        }
    }

    fn atomic(&mut self, rule: &str, filters: &[Filter], k: &mut dyn FnMut(&mut Self) -> Res) -> Res {
        let Ok(candidates) = self.proof.candidates(rule, None) else {
            return Ok(false);
        };
        for c in candidates {
            if !self.proof.admits(&c, filters) {
                continue;
            }
            if self.used >= self.fuel {
                return Err(OutOfFuel);
            }
            self.used += 1;
            let mut step = c.step;
            step.target = None;
            let (len, trace) = (self.proof.history_len(), self.trace.len());
            if self.proof.apply(&step).is_err() {
                continue;
            }
            self.trace.push(step);
            if k(self)? {
                return Ok(true);
            }
            self.reset(len, trace);
        }
        Ok(false)
    }

    fn try_(&mut self, body: &Tactic, k: &mut dyn FnMut(&mut Self) -> Res) -> Res {
        if self.exec(body, k)? {
            return Ok(true);
        }
        k(self)
    }

    fn many(&mut self, body: &Tactic, k: &mut dyn FnMut(&mut Self) -> Res) -> Res {
        let (len, trace) = (self.proof.history_len(), self.trace.len());
        loop {
            let before = self.proof.history_len();
            if !self.exec(body, &mut |_| Ok(true))? || self.proof.history_len() == before {
                break;
            }
        }
        if k(self)? {
            return Ok(true);
        }
        self.reset(len, trace);
        Ok(false)
    }
}

/// Runs `tactic` on `proof` with at most `fuel` attempted applications.
/// On anything but success the proof is left as it was.
pub fn run(tactic: &Tactic, proof: &mut Proof, fuel: u64) -> Run {
    let len = proof.history_len();
    let mut runner = Runner {
        proof,
        fuel,
        used: 0,
        trace: Vec::new(),
    };
    let outcome = match runner.exec(tactic, &mut |_| Ok(true)) {
        Ok(true) => Outcome::Success {
            trace: std::mem::take(&mut runner.trace),
        },
        Ok(false) => Outcome::Failure,
        Err(OutOfFuel) => {
            runner.proof.truncate(len);
            Outcome::FuelExhausted
        }
    };
    Run {
        outcome,
        fuel_used: runner.used,
    }
}

/// Checks that every rule a tactic mentions exists in the proof's calculus.
pub fn check_rules(tactic: &Tactic, proof: &Proof) -> Result<(), EngineError> {
    let names = proof.rule_names();
    for r in tactic.rules() {
        if !names.iter().any(|n| n == r) {
            return Err(EngineError::UnknownRule(r.to_string()));
        }
    }
    Ok(())
}
