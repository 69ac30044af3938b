//! Reader for system definition files.
//!
//! A file is a sequence of calls. The first is the header:
//!
//! ```text
//! System(name="nd-classical", style=backward, extends="nd-intuitionistic")
//! Rule("RAA",
//!   args=["negation" =: SuperOf(operand=1, operator=->),
//!         "falsum" =: And(Arg("negation"), SubOf(operand=2, operator=bot))],
//!   branches=[Branch("refutation", goal=Arg("falsum"), hypotheses=[Arg("negation")])])
//! Example("(-> (-> (-> A bot) bot) A)")
//! Strategy("auto", AndThen(Many(Atomic(impI)), Atomic(qed)))
//! ```
//!
//! `--` starts a comment.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::engine::{
    ArgSource, AxiomSchema, BackwardRule, BranchSpec, ConclusionSpec, FitchRule, OpenRule, PremiseSpec, Rule, Style,
};
use crate::formula::{parse_template, Constant, Operator, OperatorTable};
use crate::refspec::RefSpec;
use crate::syntax::{parse_items, Args, Expr, ExprKind, SyntaxError};
use crate::tactics::Tactic;

use super::{SystemDef, SystemError};

/// The header of a definition file: name, style and parent.
pub(crate) struct Header {
    pub name: String,
    pub style: Style,
    pub extends: Option<String>,
    pub description: String,
}

pub(crate) fn read_items(source: &str) -> Result<(Header, Vec<Expr>), SystemError> {
    let items = parse_items(source)?;
    let mut iter = items.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| SyntaxError::new(Default::default(), "empty system definition"))?;
    let (name, args) = first.as_call().ok_or_else(|| first.error("expected System(...)"))?;
    if name != "System" {
        return Err(first.error("the file must start with System(...)").into());
    }
    let mut a = Args::new(name, first.pos, args);
    let sys_name = a
        .text(Some(0), "name")?
        .ok_or_else(|| first.error("System needs a name"))?
        .to_string();
    let style_expr = a.require(None, "style")?;
    let style = style_expr
        .as_text()
        .and_then(Style::parse)
        .ok_or_else(|| style_expr.error("style must be backward, fitch or hilbert"))?;
    let extends = a.text(None, "extends")?.map(str::to_string);
    let description = a.text(None, "description")?.unwrap_or_default().to_string();
    a.finish()?;
    Ok((
        Header {
            name: sys_name,
            style,
            extends,
            description,
        },
        iter.collect(),
    ))
}

fn text<'a>(a: &mut Args<'a>, index: Option<usize>, key: &str, at: &Expr) -> Result<&'a str, SyntaxError> {
    a.text(index, key)?.ok_or_else(|| at.error(format!("missing `{key}`")))
}

fn refspec(e: &Expr) -> Result<RefSpec, SyntaxError> {
    RefSpec::from_expr(e)
}

fn refspecs(items: &[Expr]) -> Result<Vec<RefSpec>, SyntaxError> {
    items.iter().map(refspec).collect()
}

fn arg_source(e: &Expr) -> Result<ArgSource, SyntaxError> {
    if let Some((name @ ("Universe" | "Hypotheses"), args)) = e.as_call() {
        let mut a = Args::new(name, e.pos, args);
        let op = a.text(None, "operator")?.map(str::to_string);
        a.finish()?;
        return Ok(if name == "Universe" {
            ArgSource::Universe(op)
        } else {
            ArgSource::Hypotheses(op)
        });
    }
    Ok(ArgSource::Ref(refspec(e)?))
}

struct Reader<'t> {
    table: &'t mut OperatorTable,
    def: SystemDef,
    tactics: BTreeMap<String, Tactic>,
}

impl Reader<'_> {
    fn template(&self, e: &Expr) -> Result<crate::formula::Formula, SyntaxError> {
        let t = e.as_text().ok_or_else(|| e.error("expected a formula in quotes"))?;
        parse_template(self.table, t).map_err(|err| e.error(err.to_string()))
    }

    fn conclusion(&self, e: &Expr) -> Result<ConclusionSpec, SyntaxError> {
        let (name, args) = e.as_call().ok_or_else(|| e.error("expected Refs, Schema or Check"))?;
        let mut a = Args::new(name, e.pos, args);
        let c = match name {
            "Refs" => {
                let list = a.require(Some(0), "refs")?;
                ConclusionSpec::Refs(refspecs(
                    list.as_list().ok_or_else(|| list.error("Refs takes a list"))?,
                )?)
            }
            "Schema" => ConclusionSpec::Schema(self.template(a.require(Some(0), "formula")?)?),
            "Check" => ConclusionSpec::Check(refspec(a.require(Some(0), "ref")?)?),
            other => return Err(e.error(format!("unknown conclusion form `{other}`"))),
        };
        a.finish()?;
        Ok(c)
    }

    fn premise(&self, e: &Expr) -> Result<PremiseSpec, SyntaxError> {
        let (name, args) = e.as_call().ok_or_else(|| e.error("expected Line or Subproof"))?;
        let mut a = Args::new(name, e.pos, args);
        let role = text(&mut a, Some(0), "role", e)?.to_string();
        let p = match name {
            "Line" => PremiseSpec::Line {
                role,
                spec: match a.get(Some(1), "ref") {
                    Some(x) => refspec(x)?,
                    None => RefSpec::identity(),
                },
                outer: a.bool("outer")?.unwrap_or(false),
            },
            "Subproof" => PremiseSpec::Subproof {
                role,
                hypothesis: match a.get(None, "hypothesis") {
                    Some(x) => refspec(x)?,
                    None => RefSpec::identity(),
                },
                last: match a.get(None, "last") {
                    Some(x) => refspec(x)?,
                    None => RefSpec::identity(),
                },
            },
            other => return Err(e.error(format!("unknown premise form `{other}`"))),
        };
        a.finish()?;
        Ok(p)
    }

    fn branch(&self, e: &Expr) -> Result<BranchSpec, SyntaxError> {
        let (name, args) = e.as_call().ok_or_else(|| e.error("expected Branch(...)"))?;
        if name != "Branch" {
            return Err(e.error("expected Branch(...)"));
        }
        let mut a = Args::new(name, e.pos, args);
        let role = text(&mut a, Some(0), "role", e)?.to_string();
        let goal = refspec(a.require(Some(1), "goal")?)?;
        let hypotheses = match a.get(None, "hypotheses") {
            Some(x) => refspecs(x.as_list().ok_or_else(|| x.error("expected a list"))?)?,
            None => Vec::new(),
        };
        a.finish()?;
        Ok(BranchSpec { role, goal, hypotheses })
    }

    fn rule(&mut self, e: &Expr, rule: Rule) -> Result<(), SyntaxError> {
        if rule.style() != self.def.style {
            return Err(e.error(format!("a {} rule in a {} system", rule.style(), self.def.style)));
        }
        self.def.rules.push(Arc::new(rule));
        Ok(())
    }

    fn item(&mut self, e: &Expr) -> Result<(), SyntaxError> {
        let (name, args) = e.as_call().ok_or_else(|| e.error("expected a declaration"))?;
        let mut a = Args::new(name, e.pos, args);
        match name {
            "Operator" => {
                let symbol = text(&mut a, Some(0), "symbol", e)?.to_string();
                let arity = a.int(None, "arity")?.ok_or_else(|| e.error("missing `arity`"))?;
                if arity < 1 {
                    return Err(e.error("operators take at least one operand"));
                }
                let op = Operator {
                    display: a.text(None, "display")?.unwrap_or(&symbol).to_string(),
                    infix: a.bool("infix")?.unwrap_or(false),
                    arity: arity as usize,
                    symbol,
                };
                self.table
                    .add_operator(op.clone())
                    .map_err(|err| e.error(err.to_string()))?;
                self.def.operators.push(op);
            }
            "Constant" => {
                let name = text(&mut a, Some(0), "name", e)?.to_string();
                let c = Constant {
                    display: a.text(None, "display")?.unwrap_or(&name).to_string(),
                    name,
                };
                self.table
                    .add_constant(c.clone())
                    .map_err(|err| e.error(err.to_string()))?;
                self.def.constants.push(c);
            }
            "Rule" => {
                let rule_name = text(&mut a, Some(0), "name", e)?.to_string();
                let mut args_out = Vec::new();
                if let Some(list) = a.get(None, "args") {
                    for item in list.as_list().ok_or_else(|| list.error("expected a list"))? {
                        let ExprKind::Named(n, value) = &item.kind else {
                            return Err(item.error("expected \"name\" =: source"));
                        };
                        args_out.push((n.clone(), arg_source(value)?));
                    }
                }
                let mut branches = Vec::new();
                if let Some(list) = a.get(None, "branches") {
                    for b in list.as_list().ok_or_else(|| list.error("expected a list"))? {
                        branches.push(self.branch(b)?);
                    }
                }
                a.finish()?;
                return self.rule(
                    e,
                    Rule::Backward(BackwardRule {
                        name: rule_name,
                        args: args_out,
                        branches,
                    }),
                );
            }
            "Leaf" => {
                let name = text(&mut a, Some(0), "name", e)?.to_string();
                a.finish()?;
                return self.rule(e, Rule::Leaf { name });
            }
            "LineRule" => {
                let rule_name = text(&mut a, Some(0), "name", e)?.to_string();
                let mut premises = Vec::new();
                for p in a.list("premises")? {
                    premises.push(self.premise(p)?);
                }
                let conclusion = self.conclusion(a.require(None, "conclusion")?)?;
                a.finish()?;
                return self.rule(
                    e,
                    Rule::Fitch(FitchRule {
                        name: rule_name,
                        premises,
                        conclusion,
                    }),
                );
            }
            "Open" => {
                let rule_name = text(&mut a, Some(0), "name", e)?.to_string();
                let hypothesis = self.conclusion(a.require(Some(1), "hypothesis")?)?;
                let aim = a.get(None, "aim").map(refspec).transpose()?;
                let strict = a.bool("strict")?.unwrap_or(false);
                a.finish()?;
                return self.rule(
                    e,
                    Rule::Open(OpenRule {
                        name: rule_name,
                        hypothesis,
                        aim,
                        strict,
                    }),
                );
            }
            "Axiom" => {
                let rule_name = text(&mut a, Some(0), "name", e)?.to_string();
                let schema = self.template(a.require(Some(1), "schema")?)?;
                a.finish()?;
                return self.rule(
                    e,
                    Rule::Axiom(AxiomSchema {
                        name: rule_name,
                        schema,
                    }),
                );
            }
            "ModusPonens" => {
                let name = text(&mut a, Some(0), "name", e)?.to_string();
                let implication = a.text(None, "implication")?.unwrap_or("->").to_string();
                a.finish()?;
                return self.rule(e, Rule::ModusPonens { name, implication });
            }
            "Necessitation" => {
                let name = text(&mut a, Some(0), "name", e)?.to_string();
                let operator = a.text(None, "operator")?.unwrap_or("box").to_string();
                a.finish()?;
                return self.rule(e, Rule::Necessitation { name, operator });
            }
            "Hypothesis" => {
                let name = text(&mut a, Some(0), "name", e)?.to_string();
                a.finish()?;
                return self.rule(e, Rule::Hypothesis { name });
            }
            "Example" => {
                let f = a.require(Some(0), "formula")?;
                let t = f.as_text().ok_or_else(|| f.error("expected a formula in quotes"))?;
                self.def.examples.push(t.to_string());
            }
            "Tactic" | "Strategy" => {
                let tname = text(&mut a, Some(0), "name", e)?.to_string();
                let body = a.require(Some(1), "tactic")?;
                let tactics = &self.tactics;
                let t = Tactic::from_expr(body, &|n| tactics.get(n).cloned())?;
                self.tactics.insert(tname.clone(), t.clone());
                let list = if name == "Strategy" {
                    &mut self.def.strategies
                } else {
                    &mut self.def.tactics
                };
                list.retain(|(n, _)| *n != tname);
                list.push((tname, t));
            }
            other => return Err(e.error(format!("unknown declaration `{other}`"))),
        }
        a.finish()
    }
}

/// Reads the body of a definition. `table` starts as the parent's operator
/// table and `inherited` holds the parent's strategies, usable via `Use`.
pub(crate) fn read_body(
    header: Header,
    items: &[Expr],
    table: &mut OperatorTable,
    inherited: &[(String, Tactic)],
) -> Result<SystemDef, SyntaxError> {
    let mut r = Reader {
        table,
        def: SystemDef {
            name: header.name,
            style: header.style,
            extends: header.extends,
            description: header.description,
            operators: Vec::new(),
            constants: Vec::new(),
            rules: Vec::new(),
            strategies: Vec::new(),
            tactics: Vec::new(),
            examples: Vec::new(),
        },
        tactics: inherited.iter().cloned().collect(),
    };
    for e in items {
        r.item(e)?;
    }
    Ok(r.def)
}
