//! Deductive systems and their registry.
//!
//! Systems are read from definition files (see [`load`] for the format).
//! A system may extend another: it inherits the parent's operators, rules
//! and strategies. Inheritance is resolved on lookup, so replacing a parent
//! changes every system built on it.

mod load;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::engine::{Calculus, EngineError, Proof, Rule, Style, END, QED};
use crate::formula::{Constant, Formula, Operator, OperatorTable, ParseError};
use crate::syntax::SyntaxError;
use crate::tactics::{self, Run, Tactic};

/// Definition files of the built-in systems, in registration order.
pub const BUILTIN: [(&str, &str); 6] = [
    ("nd-minimal", include_str!("../../systems/nd-minimal.glf")),
    ("nd-intuitionistic", include_str!("../../systems/nd-intuitionistic.glf")),
    ("nd-classical", include_str!("../../systems/nd-classical.glf")),
    (
        "fitch-intuitionistic",
        include_str!("../../systems/fitch-intuitionistic.glf"),
    ),
    ("fitch-classical", include_str!("../../systems/fitch-classical.glf")),
    ("hilbert-k", include_str!("../../systems/hilbert-k.glf")),
];

/// Name of the strategy used when none is given.
pub const DEFAULT_STRATEGY: &str = "auto";

/// A system as written in its definition file, without inherited parts.
#[derive(Debug, Clone)]
pub struct SystemDef {
    pub name: String,
    pub style: Style,
    pub extends: Option<String>,
    pub description: String,
    pub operators: Vec<Operator>,
    pub constants: Vec<Constant>,
    pub rules: Vec<Arc<Rule>>,
    pub strategies: Vec<(String, Tactic)>,
    /// Named helper tactics, usable by later definitions but not listed as
    /// strategies.
    pub tactics: Vec<(String, Tactic)>,
    pub examples: Vec<String>,
}

/// A system with inheritance resolved.
#[derive(Debug, Clone)]
pub struct DeductiveSystem {
    pub name: String,
    pub description: String,
    pub extends: Option<String>,
    pub calculus: Arc<Calculus>,
    pub strategies: Vec<(String, Tactic)>,
    pub tactics: Vec<(String, Tactic)>,
    pub examples: Vec<String>,
}

impl DeductiveSystem {
    pub fn style(&self) -> Style {
        self.calculus.style
    }

    pub fn table(&self) -> &OperatorTable {
        &self.calculus.table
    }

    pub fn rules(&self) -> &[Arc<Rule>] {
        &self.calculus.rules
    }

    pub fn strategy(&self, name: &str) -> Result<&Tactic, SystemError> {
        self.strategies
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| SystemError::UnknownStrategy {
                system: self.name.clone(),
                strategy: name.to_string(),
            })
    }

    pub fn example_formulas(&self) -> Result<Vec<Formula>, ParseError> {
        self.examples.iter().map(|e| self.calculus.table.parse(e)).collect()
    }

    pub fn new_proof(&self, goal: &str) -> Result<Proof, EngineError> {
        Proof::parse(Arc::clone(&self.calculus), goal)
    }

    /// Runs a named strategy against a fresh proof of `goal`.
    pub fn prove(&self, goal: &str, strategy: &str, fuel: u64) -> Result<(Proof, Run), SystemError> {
        let tactic = self.strategy(strategy)?;
        let mut proof = self.new_proof(goal)?;
        let run = tactics::run(tactic, &mut proof, fuel);
        Ok((proof, run))
    }

    fn problems(&self) -> Vec<String> {
        let mut out = match self.calculus.validate() {
            Ok(()) => Vec::new(),
            Err(es) => es,
        };
        for (name, t) in &self.strategies {
            for r in t.rules() {
                let pseudo = r == QED || (r == END && self.style() == Style::Fitch);
                if !pseudo && self.calculus.rule(r).is_none() {
                    out.push(format!("strategy `{name}` uses unknown rule `{r}`"));
                }
            }
        }
        for e in &self.examples {
            if let Err(err) = self.calculus.table.parse(e) {
                out.push(format!("example {e:?}: {err}"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("system `{system}` is invalid: {}", problems.join("; "))]
    Invalid { system: String, problems: Vec<String> },
    #[error("a system named `{0}` is already registered")]
    DuplicateName(String),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("system `{system}` has no strategy `{strategy}`")]
    UnknownStrategy { system: String, strategy: String },
    #[error("system `{0}` extends itself")]
    CyclicExtension(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl SystemError {
    pub fn name(&self) -> &'static str {
        match self {
            SystemError::Syntax(_) => "SyntaxError",
            SystemError::Invalid { .. } => "InvalidSystem",
            SystemError::DuplicateName(_) => "DuplicateName",
            SystemError::UnknownSystem(_) => "UnknownSystem",
            SystemError::UnknownStrategy { .. } => "UnknownStrategy",
            SystemError::CyclicExtension(_) => "CyclicExtension",
            SystemError::Engine(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    defs: BTreeMap<String, Arc<SystemDef>>,
    order: Vec<String>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// A registry holding the built-in systems.
    pub fn builtin() -> Self {
        let mut r = Registry::new();
        for (name, source) in BUILTIN {
            r.load(source)
                .unwrap_or_else(|e| panic!("built-in system {name} is invalid: {e}"));
        }
        r
    }

    /// Parses a definition file against the current registry, without
    /// registering it.
    pub fn parse(&self, source: &str) -> Result<SystemDef, SystemError> {
        let (header, items) = load::read_items(source)?;
        let (mut table, inherited) = match &header.extends {
            Some(parent) => {
                let p = self.get(parent)?;
                if p.style() != header.style {
                    return Err(SystemError::Invalid {
                        system: header.name.clone(),
                        problems: vec![format!(
                            "a {} system cannot extend the {} system `{parent}`",
                            header.style,
                            p.style()
                        )],
                    });
                }
                let mut named = p.tactics.clone();
                named.extend(p.strategies.iter().cloned());
                (p.calculus.table.clone(), named)
            }
            None => (OperatorTable::new(), Vec::new()),
        };
        Ok(load::read_body(header, &items, &mut table, &inherited)?)
    }

    /// Parses and registers a definition file. Returns the system's name.
    pub fn load(&mut self, source: &str) -> Result<String, SystemError> {
        let def = self.parse(source)?;
        let name = def.name.clone();
        self.register(def)?;
        Ok(name)
    }

    pub fn register(&mut self, def: SystemDef) -> Result<(), SystemError> {
        if self.defs.contains_key(&def.name) {
            return Err(SystemError::DuplicateName(def.name));
        }
        self.check(&def)?;
        self.order.push(def.name.clone());
        self.defs.insert(def.name.clone(), Arc::new(def));
        Ok(())
    }

    /// Replaces a registered definition. Systems extending it see the new
    /// version on their next lookup.
    pub fn replace(&mut self, def: SystemDef) -> Result<(), SystemError> {
        if !self.defs.contains_key(&def.name) {
            return Err(SystemError::UnknownSystem(def.name));
        }
        self.check(&def)?;
        self.defs.insert(def.name.clone(), Arc::new(def));
        Ok(())
    }

    fn check(&self, def: &SystemDef) -> Result<(), SystemError> {
        let sys = self.resolve(def, 0)?;
        let problems = sys.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SystemError::Invalid {
                system: def.name.clone(),
                problems,
            })
        }
    }

    pub fn definition(&self, name: &str) -> Result<&SystemDef, SystemError> {
        self.defs
            .get(name)
            .map(|d| d.as_ref())
            .ok_or_else(|| SystemError::UnknownSystem(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<DeductiveSystem, SystemError> {
        let def = self
            .defs
            .get(name)
            .ok_or_else(|| SystemError::UnknownSystem(name.to_string()))?;
        self.resolve(def, 0)
    }

    fn resolve(&self, def: &SystemDef, depth: usize) -> Result<DeductiveSystem, SystemError> {
        if depth > self.defs.len() {
            return Err(SystemError::CyclicExtension(def.name.clone()));
        }
        let (mut table, mut rules, mut strategies, mut tactics) = match &def.extends {
            Some(parent) => {
                let pdef = self
                    .defs
                    .get(parent)
                    .ok_or_else(|| SystemError::UnknownSystem(parent.clone()))?;
                let p = self.resolve(pdef, depth + 1)?;
                let calc = Arc::try_unwrap(p.calculus).unwrap_or_else(|c| (*c).clone());
                (calc.table, calc.rules, p.strategies, p.tactics)
            }
            None => (OperatorTable::new(), Vec::new(), Vec::new(), Vec::new()),
        };
        let invalid = |m: String| SystemError::Invalid {
            system: def.name.clone(),
            problems: vec![m],
        };
        for op in &def.operators {
            table.add_operator(op.clone()).map_err(|e| invalid(e.to_string()))?;
        }
        for c in &def.constants {
            table.add_constant(c.clone()).map_err(|e| invalid(e.to_string()))?;
        }
        rules.extend(def.rules.iter().cloned());
        for (n, t) in &def.strategies {
            strategies.retain(|(m, _)| m != n);
            strategies.push((n.clone(), t.clone()));
        }
        for (n, t) in &def.tactics {
            tactics.retain(|(m, _)| m != n);
            tactics.push((n.clone(), t.clone()));
        }
        Ok(DeductiveSystem {
            name: def.name.clone(),
            description: def.description.clone(),
            extends: def.extends.clone(),
            calculus: Arc::new(Calculus {
                name: def.name.clone(),
                style: def.style,
                table,
                rules,
            }),
            strategies,
            tactics,
            examples: def.examples.clone(),
        })
    }

    /// Registered names in registration order.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn list(&self) -> Vec<DeductiveSystem> {
        self.order
            .iter()
            .map(|n| self.get(n).expect("registered systems resolve"))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
