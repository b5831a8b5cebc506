//! Lowering from epistemic statements to threshold comparisons.
//!
//! Every graded operator reduces to comparisons between subjective
//! probabilities and named thresholds, combined with plain world formulas
//! for the factive operators. The lowered form is what the evaluator scores
//! against a belief distribution; thresholds stay symbolic so the same
//! lowered formula can be evaluated under different threshold tables.

use thiserror::Error;

use crate::elot::ast::{
    AgentName, BaseFormula, ClassRef, EpistemicFormula, ModalFormula, ObjName, TermArg, VarName,
};
use crate::elot::domain::DomainSignature;
use crate::elot::thresholds::ThresholdName;

/// Comparison operator in a lowered formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Ge,
    Gt,
    Le,
    Lt,
}

impl CmpOp {
    pub fn compare(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
        }
    }
}

/// A subjective probability: the agent's degree of belief in a world formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProbTerm {
    pub agent: AgentName,
    pub body: BaseFormula,
}

/// Right-hand side of a lowered comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    /// A named threshold, resolved against the active table at evaluation.
    Threshold(ThresholdName),
    /// Strength-superlative threshold: min(1, alpha * theta).
    MostThreshold(ThresholdName),
    /// Strength-superlative threshold: theta / alpha.
    LeastThreshold(ThresholdName),
    /// Another subjective probability (comparatives and class superlatives).
    Prob(ProbTerm),
}

/// Statement lowered to probability comparisons and world-formula checks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LoweredFormula {
    Cmp {
        op: CmpOp,
        lhs: ProbTerm,
        rhs: Rhs,
    },
    /// The world formula holds in the actual state (factive component).
    Holds(BaseFormula),
    And(Vec<LoweredFormula>),
    Or(Vec<LoweredFormula>),
    Not(Box<LoweredFormula>),
    Implies(Box<LoweredFormula>, Box<LoweredFormula>),
    /// Vacuous truth (e.g. a universal over an empty class).
    True,
    /// Vacuous falsehood (e.g. an existential over an empty class).
    False,
}

#[derive(Debug, Error)]
pub enum LowerError {
    #[error("degree(...) is a function term and has no truth value on its own")]
    DegreeAtTop,
    #[error("class `{0}` cannot be enumerated during lowering")]
    NonEnumerableClass(String),
}

/// Substitutes a constant for a free variable in a world formula.
/// Quantifiers that rebind the same name shadow it, so substitution stops
/// there; constants cannot be captured.
pub fn subst_base(f: &BaseFormula, var: &str, value: &str) -> BaseFormula {
    match f {
        BaseFormula::Pred { name, args } => BaseFormula::Pred {
            name: name.clone(),
            args: args
                .iter()
                .map(|a| match a {
                    TermArg::Var(v) if v == var => TermArg::Const(value.to_owned()),
                    other => other.clone(),
                })
                .collect(),
        },
        BaseFormula::And(items) => {
            BaseFormula::And(items.iter().map(|i| subst_base(i, var, value)).collect())
        }
        BaseFormula::Or(items) => {
            BaseFormula::Or(items.iter().map(|i| subst_base(i, var, value)).collect())
        }
        BaseFormula::Not(inner) => BaseFormula::Not(Box::new(subst_base(inner, var, value))),
        BaseFormula::Implies(lhs, rhs) => BaseFormula::Implies(
            Box::new(subst_base(lhs, var, value)),
            Box::new(subst_base(rhs, var, value)),
        ),
        BaseFormula::Exists {
            var: bound,
            restriction,
            body,
        }
        | BaseFormula::Forall {
            var: bound,
            restriction,
            body,
        } => {
            // A quantifier rebinding the name shadows it everywhere,
            // including the restriction (which holds the binding occurrence).
            if bound == var {
                return f.clone();
            }
            let restriction = Box::new(subst_base(restriction, var, value));
            let body = Box::new(subst_base(body, var, value));
            if matches!(f, BaseFormula::Exists { .. }) {
                BaseFormula::Exists {
                    var: bound.clone(),
                    restriction,
                    body,
                }
            } else {
                BaseFormula::Forall {
                    var: bound.clone(),
                    restriction,
                    body,
                }
            }
        }
    }
}

fn subst_modal(m: &ModalFormula, var: &str, value: &str) -> ModalFormula {
    match m {
        ModalFormula::Graded { word, body } => ModalFormula::Graded {
            word: *word,
            body: subst_base(body, var, value),
        },
        ModalFormula::More { pred, left, right } => ModalFormula::More {
            pred: *pred,
            left: subst_base(left, var, value),
            right: subst_base(right, var, value),
        },
        ModalFormula::Less { pred, left, right } => ModalFormula::Less {
            pred: *pred,
            left: subst_base(left, var, value),
            right: subst_base(right, var, value),
        },
        ModalFormula::MostSup {
            pred,
            object,
            class,
            body,
        } => ModalFormula::MostSup {
            pred: *pred,
            object: object.clone(),
            class: class.clone(),
            body: if class.var == var {
                body.clone()
            } else {
                subst_base(body, var, value)
            },
        },
        ModalFormula::LeastSup {
            pred,
            object,
            class,
            body,
        } => ModalFormula::LeastSup {
            pred: *pred,
            object: object.clone(),
            class: class.clone(),
            body: if class.var == var {
                body.clone()
            } else {
                subst_base(body, var, value)
            },
        },
        ModalFormula::MostStr { pred, body } => ModalFormula::MostStr {
            pred: *pred,
            body: subst_base(body, var, value),
        },
        ModalFormula::LeastStr { pred, body } => ModalFormula::LeastStr {
            pred: *pred,
            body: subst_base(body, var, value),
        },
    }
}

/// Substitutes a constant for a free variable in a statement (used when
/// expanding statement-level quantifiers).
pub fn subst_epistemic(f: &EpistemicFormula, var: &str, value: &str) -> EpistemicFormula {
    let base = |b: &BaseFormula| subst_base(b, var, value);
    match f {
        EpistemicFormula::Believes { agent, body } => EpistemicFormula::Believes {
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::BelievesModal { agent, modal } => EpistemicFormula::BelievesModal {
            agent: agent.clone(),
            modal: subst_modal(modal, var, value),
        },
        EpistemicFormula::KnowsThat { agent, body } => EpistemicFormula::KnowsThat {
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::KnowsIf { agent, body } => EpistemicFormula::KnowsIf {
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::NotKnowsThat { agent, body } => EpistemicFormula::NotKnowsThat {
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::NotKnowsIf { agent, body } => EpistemicFormula::NotKnowsIf {
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::KnowsAbout { agent, class, body } => EpistemicFormula::KnowsAbout {
            agent: agent.clone(),
            class: class.clone(),
            body: if class.var == var {
                body.clone()
            } else {
                base(body)
            },
        },
        EpistemicFormula::CertainThat { agent, body } => EpistemicFormula::CertainThat {
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::CertainAbout { agent, class, body } => EpistemicFormula::CertainAbout {
            agent: agent.clone(),
            class: class.clone(),
            body: if class.var == var {
                body.clone()
            } else {
                base(body)
            },
        },
        EpistemicFormula::UncertainIf { agent, left, right } => EpistemicFormula::UncertainIf {
            agent: agent.clone(),
            left: base(left),
            right: base(right),
        },
        EpistemicFormula::UncertainAbout { agent, class, body } => {
            EpistemicFormula::UncertainAbout {
                agent: agent.clone(),
                class: class.clone(),
                body: if class.var == var {
                    body.clone()
                } else {
                    base(body)
                },
            }
        }
        EpistemicFormula::Degree { pred, agent, body } => EpistemicFormula::Degree {
            pred: *pred,
            agent: agent.clone(),
            body: base(body),
        },
        EpistemicFormula::Exists {
            var: bound,
            restriction,
            body,
        }
        | EpistemicFormula::Forall {
            var: bound,
            restriction,
            body,
        } => {
            if bound == var {
                return f.clone();
            }
            let restriction = base(restriction);
            let body = Box::new(subst_epistemic(body, var, value));
            if matches!(f, EpistemicFormula::Exists { .. }) {
                EpistemicFormula::Exists {
                    var: bound.clone(),
                    restriction,
                    body,
                }
            } else {
                EpistemicFormula::Forall {
                    var: bound.clone(),
                    restriction,
                    body,
                }
            }
        }
        EpistemicFormula::And(items) => EpistemicFormula::And(
            items
                .iter()
                .map(|i| subst_epistemic(i, var, value))
                .collect(),
        ),
        EpistemicFormula::Or(items) => EpistemicFormula::Or(
            items
                .iter()
                .map(|i| subst_epistemic(i, var, value))
                .collect(),
        ),
        EpistemicFormula::Not(inner) => {
            EpistemicFormula::Not(Box::new(subst_epistemic(inner, var, value)))
        }
        EpistemicFormula::Implies(lhs, rhs) => EpistemicFormula::Implies(
            Box::new(subst_epistemic(lhs, var, value)),
            Box::new(subst_epistemic(rhs, var, value)),
        ),
    }
}

fn prob(agent: &str, body: BaseFormula) -> ProbTerm {
    ProbTerm {
        agent: agent.to_owned(),
        body,
    }
}

fn cmp(op: CmpOp, lhs: ProbTerm, rhs: Rhs) -> LoweredFormula {
    LoweredFormula::Cmp { op, lhs, rhs }
}

/// believes := Pr(phi) at or above the believes threshold.
fn lower_believes(agent: &str, body: &BaseFormula) -> LoweredFormula {
    cmp(
        CmpOp::Ge,
        prob(agent, body.clone()),
        Rhs::Threshold(ThresholdName::Believes),
    )
}

/// knows_that := believes(phi) and phi actually holds.
fn lower_knows_that(agent: &str, body: &BaseFormula) -> LoweredFormula {
    LoweredFormula::And(vec![
        lower_believes(agent, body),
        LoweredFormula::Holds(body.clone()),
    ])
}

fn negated(body: &BaseFormula) -> BaseFormula {
    BaseFormula::Not(Box::new(body.clone()))
}

/// Splits a statement-level quantifier restriction back into its class and
/// extra conjuncts. The parser guarantees the first conjunct is a class
/// application of the bound variable.
fn split_restriction(restriction: &BaseFormula) -> (&str, Vec<&BaseFormula>) {
    match restriction {
        BaseFormula::Pred { name, .. } => (name, Vec::new()),
        BaseFormula::And(items) => match &items[0] {
            BaseFormula::Pred { name, .. } => (name, items[1..].iter().collect()),
            other => unreachable!("restriction head is a class application, got {other:?}"),
        },
        other => unreachable!("restriction is a class application or conjunction, got {other:?}"),
    }
}

fn class_members<'d>(
    domain: &'d DomainSignature,
    class: &str,
) -> Result<&'d [String], LowerError> {
    domain
        .class_members(class)
        .ok_or_else(|| LowerError::NonEnumerableClass(class.to_owned()))
}

/// Conjunction of already-lowered parts, collapsing the 0- and 1-element
/// cases (`and` is syntactically at least binary).
fn flat_and(mut items: Vec<LoweredFormula>) -> LoweredFormula {
    match items.len() {
        0 => LoweredFormula::True,
        1 => items.pop().expect("one element"),
        _ => LoweredFormula::And(items),
    }
}

fn flat_or(mut items: Vec<LoweredFormula>) -> LoweredFormula {
    match items.len() {
        0 => LoweredFormula::False,
        1 => items.pop().expect("one element"),
        _ => LoweredFormula::Or(items),
    }
}

fn lower_modal(agent: &str, m: &ModalFormula, domain: &DomainSignature) -> Result<LoweredFormula, LowerError> {
    Ok(match m {
        ModalFormula::Graded { word, body } => {
            // "unlikely" bounds the probability from above; every other
            // graded word bounds it from below.
            let op = if *word == ThresholdName::Unlikely {
                CmpOp::Le
            } else {
                CmpOp::Ge
            };
            cmp(op, prob(agent, body.clone()), Rhs::Threshold(*word))
        }
        ModalFormula::More { left, right, .. } => cmp(
            CmpOp::Gt,
            prob(agent, left.clone()),
            Rhs::Prob(prob(agent, right.clone())),
        ),
        ModalFormula::Less { left, right, .. } => cmp(
            CmpOp::Lt,
            prob(agent, left.clone()),
            Rhs::Prob(prob(agent, right.clone())),
        ),
        ModalFormula::MostSup {
            object,
            class,
            body,
            ..
        } => lower_class_superlative(agent, object, class, body, CmpOp::Ge, domain)?,
        ModalFormula::LeastSup {
            object,
            class,
            body,
            ..
        } => lower_class_superlative(agent, object, class, body, CmpOp::Le, domain)?,
        ModalFormula::MostStr { pred, body } => cmp(
            CmpOp::Ge,
            prob(agent, body.clone()),
            Rhs::MostThreshold(*pred),
        ),
        ModalFormula::LeastStr { pred, body } => cmp(
            CmpOp::Le,
            prob(agent, body.clone()),
            Rhs::LeastThreshold(*pred),
        ),
    })
}

/// `object` ranks first (or last) in subjective probability among the class:
/// a conjunction of pairwise comparisons against every other member.
fn lower_class_superlative(
    agent: &str,
    object: &ObjName,
    class: &ClassRef,
    body: &BaseFormula,
    op: CmpOp,
    domain: &DomainSignature,
) -> Result<LoweredFormula, LowerError> {
    let members = class_members(domain, &class.pred)?;
    let subject_body = subst_base(body, &class.var, object);
    let comparisons: Vec<LoweredFormula> = members
        .iter()
        .filter(|m| *m != object)
        .map(|m| {
            cmp(
                op,
                prob(agent, subject_body.clone()),
                Rhs::Prob(prob(agent, subst_base(body, &class.var, m))),
            )
        })
        .collect();
    Ok(flat_and(comparisons))
}

/// Lowers a statement to threshold comparisons over subjective probabilities.
pub fn lower(
    f: &EpistemicFormula,
    domain: &DomainSignature,
) -> Result<LoweredFormula, LowerError> {
    Ok(match f {
        EpistemicFormula::Believes { agent, body } => lower_believes(agent, body),
        EpistemicFormula::BelievesModal { agent, modal } => lower_modal(agent, modal, domain)?,
        EpistemicFormula::KnowsThat { agent, body } => lower_knows_that(agent, body),
        EpistemicFormula::KnowsIf { agent, body } => LoweredFormula::Or(vec![
            lower_knows_that(agent, body),
            lower_knows_that(agent, &negated(body)),
        ]),
        EpistemicFormula::NotKnowsThat { agent, body } => LoweredFormula::And(vec![
            LoweredFormula::Not(Box::new(lower_believes(agent, body))),
            LoweredFormula::Holds(body.clone()),
        ]),
        EpistemicFormula::NotKnowsIf { agent, body } => LoweredFormula::And(vec![
            LoweredFormula::Not(Box::new(lower_knows_that(agent, body))),
            LoweredFormula::Not(Box::new(lower_knows_that(agent, &negated(body)))),
        ]),
        EpistemicFormula::KnowsAbout { agent, class, body } => {
            let members = class_members(domain, &class.pred)?;
            flat_or(
                members
                    .iter()
                    .map(|m| lower_knows_that(agent, &subst_base(body, &class.var, m)))
                    .collect(),
            )
        }
        EpistemicFormula::CertainThat { agent, body } => cmp(
            CmpOp::Ge,
            prob(agent, body.clone()),
            Rhs::Threshold(ThresholdName::Certain),
        ),
        EpistemicFormula::CertainAbout { agent, class, body } => {
            let members = class_members(domain, &class.pred)?;
            flat_or(
                members
                    .iter()
                    .map(|m| {
                        cmp(
                            CmpOp::Ge,
                            prob(agent, subst_base(body, &class.var, m)),
                            Rhs::Threshold(ThresholdName::Certain),
                        )
                    })
                    .collect(),
            )
        }
        EpistemicFormula::UncertainIf { agent, left, right } => LoweredFormula::And(vec![
            cmp(
                CmpOp::Lt,
                prob(agent, left.clone()),
                Rhs::Threshold(ThresholdName::Uncertain),
            ),
            cmp(
                CmpOp::Lt,
                prob(agent, right.clone()),
                Rhs::Threshold(ThresholdName::Uncertain),
            ),
        ]),
        EpistemicFormula::UncertainAbout { agent, class, body } => {
            let members = class_members(domain, &class.pred)?;
            flat_and(
                members
                    .iter()
                    .map(|m| {
                        cmp(
                            CmpOp::Lt,
                            prob(agent, subst_base(body, &class.var, m)),
                            Rhs::Threshold(ThresholdName::Uncertain),
                        )
                    })
                    .collect(),
            )
        }
        EpistemicFormula::Degree { .. } => return Err(LowerError::DegreeAtTop),
        EpistemicFormula::Forall {
            var,
            restriction,
            body,
        } => lower_quantifier(var, restriction, body, true, domain)?,
        EpistemicFormula::Exists {
            var,
            restriction,
            body,
        } => lower_quantifier(var, restriction, body, false, domain)?,
        EpistemicFormula::And(items) => LoweredFormula::And(
            items
                .iter()
                .map(|i| lower(i, domain))
                .collect::<Result<_, _>>()?,
        ),
        EpistemicFormula::Or(items) => LoweredFormula::Or(
            items
                .iter()
                .map(|i| lower(i, domain))
                .collect::<Result<_, _>>()?,
        ),
        EpistemicFormula::Not(inner) => LoweredFormula::Not(Box::new(lower(inner, domain)?)),
        EpistemicFormula::Implies(lhs, rhs) => LoweredFormula::Implies(
            Box::new(lower(lhs, domain)?),
            Box::new(lower(rhs, domain)?),
        ),
    })
}

/// Expands a statement-level quantifier over its (enumerable) class. Extra
/// restriction conjuncts beyond the class become world-formula guards:
/// `forall` guards each instance with an implication, `exists` conjoins the
/// guard with the instance.
fn lower_quantifier(
    var: &VarName,
    restriction: &BaseFormula,
    body: &EpistemicFormula,
    universal: bool,
    domain: &DomainSignature,
) -> Result<LoweredFormula, LowerError> {
    let (class, extras) = split_restriction(restriction);
    let members = class_members(domain, class)?;
    let mut instances = Vec::with_capacity(members.len());
    for member in members {
        let lowered_body = lower(&subst_epistemic(body, var, member), domain)?;
        if extras.is_empty() {
            instances.push(lowered_body);
            continue;
        }
        let guards: Vec<BaseFormula> = extras
            .iter()
            .map(|e| subst_base(e, var, member))
            .collect();
        let guard = LoweredFormula::Holds(if guards.len() == 1 {
            guards.into_iter().next().expect("one guard")
        } else {
            BaseFormula::And(guards)
        });
        instances.push(if universal {
            LoweredFormula::Implies(Box::new(guard), Box::new(lowered_body))
        } else {
            LoweredFormula::And(vec![guard, lowered_body])
        });
    }
    Ok(if universal {
        flat_and(instances)
    } else {
        flat_or(instances)
    })
}
