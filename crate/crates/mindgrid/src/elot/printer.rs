//! Canonical printers for the statement language and its lowered form.
//!
//! Printing is the inverse of parsing: `parse(print(f)) == f`, and for input
//! already in canonical form (no extra whitespace) `print(parse(s)) == s`.
//! Arguments are joined with `", "`.

use std::fmt::Write;

use crate::elot::ast::{BaseFormula, EpistemicFormula, ModalFormula, TermArg};
use crate::elot::lower::{CmpOp, LoweredFormula, ProbTerm, Rhs};

pub fn print_epistemic(f: &EpistemicFormula) -> String {
    let mut out = String::new();
    write_epistemic(&mut out, f);
    out
}

pub fn print_base(f: &BaseFormula) -> String {
    let mut out = String::new();
    write_base(&mut out, f);
    out
}

pub fn print_lowered(f: &LoweredFormula) -> String {
    let mut out = String::new();
    write_lowered(&mut out, f);
    out
}

fn write_args<T>(out: &mut String, items: &[T], mut write_item: impl FnMut(&mut String, &T)) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_item(out, item);
    }
}

fn write_epistemic(out: &mut String, f: &EpistemicFormula) {
    match f {
        EpistemicFormula::Believes { agent, body } => {
            let _ = write!(out, "believes({agent}, formula(");
            write_base(out, body);
            out.push_str("))");
        }
        EpistemicFormula::BelievesModal { agent, modal } => {
            let _ = write!(out, "believes({agent}, ");
            write_modal(out, modal);
            out.push(')');
        }
        EpistemicFormula::KnowsThat { agent, body }
        | EpistemicFormula::KnowsIf { agent, body }
        | EpistemicFormula::NotKnowsThat { agent, body }
        | EpistemicFormula::NotKnowsIf { agent, body }
        | EpistemicFormula::CertainThat { agent, body } => {
            let name = match f {
                EpistemicFormula::KnowsThat { .. } => "knows_that",
                EpistemicFormula::KnowsIf { .. } => "knows_if",
                EpistemicFormula::NotKnowsThat { .. } => "not_knows_that",
                EpistemicFormula::NotKnowsIf { .. } => "not_knows_if",
                _ => "certain_that",
            };
            let _ = write!(out, "{name}({agent}, formula(");
            write_base(out, body);
            out.push_str("))");
        }
        EpistemicFormula::KnowsAbout { agent, class, body }
        | EpistemicFormula::CertainAbout { agent, class, body }
        | EpistemicFormula::UncertainAbout { agent, class, body } => {
            let name = match f {
                EpistemicFormula::KnowsAbout { .. } => "knows_about",
                EpistemicFormula::CertainAbout { .. } => "certain_about",
                _ => "uncertain_about",
            };
            let _ = write!(out, "{name}({agent}, {}({}), ", class.pred, class.var);
            write_base(out, body);
            out.push(')');
        }
        EpistemicFormula::UncertainIf { agent, left, right } => {
            let _ = write!(out, "uncertain_if({agent}, formula(");
            write_base(out, left);
            out.push_str("), formula(");
            write_base(out, right);
            out.push_str("))");
        }
        EpistemicFormula::Degree { pred, agent, body } => {
            let _ = write!(out, "degree({pred}, {agent}, formula(");
            write_base(out, body);
            out.push_str("))");
        }
        EpistemicFormula::Exists {
            var: _,
            restriction,
            body,
        }
        | EpistemicFormula::Forall {
            var: _,
            restriction,
            body,
        } => {
            let name = if matches!(f, EpistemicFormula::Exists { .. }) {
                "exists"
            } else {
                "forall"
            };
            let _ = write!(out, "{name}(");
            write_base(out, restriction);
            out.push_str(", ");
            write_epistemic(out, body);
            out.push(')');
        }
        EpistemicFormula::And(items) => {
            out.push_str("and(");
            write_args(out, items, write_epistemic);
            out.push(')');
        }
        EpistemicFormula::Or(items) => {
            out.push_str("or(");
            write_args(out, items, write_epistemic);
            out.push(')');
        }
        EpistemicFormula::Not(inner) => {
            out.push_str("not(");
            write_epistemic(out, inner);
            out.push(')');
        }
        EpistemicFormula::Implies(lhs, rhs) => {
            out.push_str("implies(");
            write_epistemic(out, lhs);
            out.push_str(", ");
            write_epistemic(out, rhs);
            out.push(')');
        }
    }
}

fn write_modal(out: &mut String, m: &ModalFormula) {
    match m {
        ModalFormula::Graded { word, body } => {
            let _ = write!(out, "{word}(");
            write_base(out, body);
            out.push(')');
        }
        ModalFormula::More { pred, left, right } | ModalFormula::Less { pred, left, right } => {
            let name = if matches!(m, ModalFormula::More { .. }) {
                "more"
            } else {
                "less"
            };
            let _ = write!(out, "{name}({pred}, ");
            write_base(out, left);
            out.push_str(", ");
            write_base(out, right);
            out.push(')');
        }
        ModalFormula::MostSup {
            pred,
            object,
            class,
            body,
        }
        | ModalFormula::LeastSup {
            pred,
            object,
            class,
            body,
        } => {
            let name = if matches!(m, ModalFormula::MostSup { .. }) {
                "most"
            } else {
                "least"
            };
            let _ = write!(out, "{name}({pred}, {object}, {}({}), ", class.pred, class.var);
            write_base(out, body);
            out.push(')');
        }
        ModalFormula::MostStr { pred, body } | ModalFormula::LeastStr { pred, body } => {
            let name = if matches!(m, ModalFormula::MostStr { .. }) {
                "most"
            } else {
                "least"
            };
            let _ = write!(out, "{name}({pred}, ");
            write_base(out, body);
            out.push(')');
        }
    }
}

fn write_term_arg(out: &mut String, arg: &TermArg) {
    match arg {
        TermArg::Const(name) | TermArg::Var(name) => out.push_str(name),
    }
}

fn write_base(out: &mut String, f: &BaseFormula) {
    match f {
        BaseFormula::Pred { name, args } => {
            let _ = write!(out, "{name}(");
            write_args(out, args, write_term_arg);
            out.push(')');
        }
        BaseFormula::And(items) => {
            out.push_str("and(");
            write_args(out, items, write_base);
            out.push(')');
        }
        BaseFormula::Or(items) => {
            out.push_str("or(");
            write_args(out, items, write_base);
            out.push(')');
        }
        BaseFormula::Not(inner) => {
            out.push_str("not(");
            write_base(out, inner);
            out.push(')');
        }
        BaseFormula::Implies(lhs, rhs) => {
            out.push_str("implies(");
            write_base(out, lhs);
            out.push_str(", ");
            write_base(out, rhs);
            out.push(')');
        }
        BaseFormula::Exists {
            var: _,
            restriction,
            body,
        }
        | BaseFormula::Forall {
            var: _,
            restriction,
            body,
        } => {
            let name = if matches!(f, BaseFormula::Exists { .. }) {
                "exists"
            } else {
                "forall"
            };
            let _ = write!(out, "{name}(");
            write_base(out, restriction);
            out.push_str(", ");
            write_base(out, body);
            out.push(')');
        }
    }
}

fn cmp_symbol(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Ge => ">=",
        CmpOp::Gt => ">",
        CmpOp::Le => "<=",
        CmpOp::Lt => "<",
    }
}

fn write_prob(out: &mut String, p: &ProbTerm) {
    let _ = write!(out, "prob_of({}, ", p.agent);
    write_base(out, &p.body);
    out.push(')');
}

fn write_lowered(out: &mut String, f: &LoweredFormula) {
    match f {
        LoweredFormula::Cmp { op, lhs, rhs } => {
            let _ = write!(out, "{}(", cmp_symbol(*op));
            write_prob(out, lhs);
            out.push_str(", ");
            match rhs {
                Rhs::Threshold(name) => {
                    let _ = write!(out, "threshold({name})");
                }
                Rhs::MostThreshold(name) => {
                    let _ = write!(out, "most_threshold({name})");
                }
                Rhs::LeastThreshold(name) => {
                    let _ = write!(out, "least_threshold({name})");
                }
                Rhs::Prob(p) => write_prob(out, p),
            }
            out.push(')');
        }
        LoweredFormula::Holds(base) => write_base(out, base),
        LoweredFormula::And(items) => {
            out.push_str("and(");
            write_args(out, items, write_lowered);
            out.push(')');
        }
        LoweredFormula::Or(items) => {
            out.push_str("or(");
            write_args(out, items, write_lowered);
            out.push(')');
        }
        LoweredFormula::Not(inner) => {
            out.push_str("not(");
            write_lowered(out, inner);
            out.push(')');
        }
        LoweredFormula::Implies(lhs, rhs) => {
            out.push_str("implies(");
            write_lowered(out, lhs);
            out.push_str(", ");
            write_lowered(out, rhs);
            out.push(')');
        }
        LoweredFormula::True => out.push_str("true"),
        LoweredFormula::False => out.push_str("false"),
    }
}
