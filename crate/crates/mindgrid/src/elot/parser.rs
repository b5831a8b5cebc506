//! Recursive-descent parser and type checker for the statement language.
//!
//! Parsing runs in two stages. A generic term reader first turns the input
//! into a head-plus-arguments tree with byte positions. A type-driven
//! elaborator then checks that tree against a [`DomainSignature`], resolving
//! the overloaded surface forms (`believes` takes either a `formula(...)`
//! wrapper or a modal application; `most`/`least` are strength superlatives
//! at arity 2 and class superlatives at arity 4) and producing the typed AST.
//!
//! [`parse_lowered`] reads the threshold-comparison language that
//! [`crate::elot::lower::lower`] targets, so lowered output can be inspected
//! and round-tripped in tests.

use thiserror::Error;

use crate::elot::ast::{
    BaseFormula, ClassRef, EpistemicFormula, ModalFormula, TermArg, TypeTag, VarName,
};
use crate::elot::domain::DomainSignature;
use crate::elot::lower::{CmpOp, LoweredFormula, ProbTerm, Rhs};
use crate::elot::thresholds::ThresholdName;

/// Parse or type-check failure, with a byte offset into the input.
#[derive(Debug, Error)]
pub enum ElotError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("type error at byte {pos}: expected {expected}, found {found}: {msg}")]
    Type {
        pos: usize,
        expected: &'static str,
        found: String,
        msg: String,
    },
}

impl ElotError {
    fn ty(pos: usize, expected: &'static str, found: impl Into<String>, msg: &str) -> ElotError {
        ElotError::Type {
            pos,
            expected,
            found: found.into(),
            msg: msg.to_owned(),
        }
    }

    fn syn(pos: usize, msg: impl Into<String>) -> ElotError {
        ElotError::Syntax {
            pos,
            msg: msg.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Stage 1: tokens and raw terms.

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    LParen,
    RParen,
    Comma,
    /// Comparison operator head used by the lowered language.
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    pos: usize,
}

fn lex(input: &str) -> Result<Vec<Tok>, ElotError> {
    let bytes = input.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let kind = match c {
            '(' => {
                i += 1;
                TokKind::LParen
            }
            ')' => {
                i += 1;
                TokKind::RParen
            }
            ',' => {
                i += 1;
                TokKind::Comma
            }
            '>' | '<' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                let sym = match (c, eq) {
                    ('>', true) => ">=",
                    ('>', false) => ">",
                    ('<', true) => "<=",
                    _ => "<",
                };
                let pos = i;
                i += if eq { 2 } else { 1 };
                toks.push(Tok {
                    kind: TokKind::Sym(sym),
                    pos,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push(Tok {
                    kind: TokKind::Ident(input[start..i].to_owned()),
                    pos: start,
                });
                continue;
            }
            other => return Err(ElotError::syn(i, format!("unexpected character `{other}`"))),
        };
        toks.push(Tok {
            kind,
            pos: i - 1, // single-char token consumed above
        });
    }
    Ok(toks)
}

/// Uninterpreted application tree: `head(arg, ...)` or a bare atom.
#[derive(Debug, Clone)]
struct RawTerm {
    head: String,
    pos: usize,
    args: Vec<RawTerm>,
    /// True when the head was written with parentheses (distinguishes the
    /// atom `believes` from a zero-argument call, which is rejected).
    applied: bool,
}

impl RawTerm {
    fn is_atom(&self) -> bool {
        !self.applied
    }
}

struct Cursor<'a> {
    toks: &'a [Tok],
    i: usize,
    input_len: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.input_len, |t| t.pos)
    }

    fn next_tok(&mut self, expected: &str) -> Result<&'a Tok, ElotError> {
        let tok = self
            .toks
            .get(self.i)
            .ok_or_else(|| ElotError::syn(self.input_len, format!("expected {expected}, found end of input")))?;
        self.i += 1;
        Ok(tok)
    }

    fn term(&mut self) -> Result<RawTerm, ElotError> {
        let tok = self.next_tok("a term")?;
        let head = match &tok.kind {
            TokKind::Ident(s) => s.clone(),
            TokKind::Sym(s) => (*s).to_owned(),
            TokKind::LParen => return Err(ElotError::syn(tok.pos, "expected a term, found `(`")),
            TokKind::RParen => return Err(ElotError::syn(tok.pos, "expected a term, found `)`")),
            TokKind::Comma => return Err(ElotError::syn(tok.pos, "expected a term, found `,`")),
        };
        let pos = tok.pos;
        let mut args = Vec::new();
        let mut applied = false;
        if matches!(self.peek().map(|t| &t.kind), Some(TokKind::LParen)) {
            self.i += 1;
            applied = true;
            if matches!(self.peek().map(|t| &t.kind), Some(TokKind::RParen)) {
                return Err(ElotError::syn(self.here(), "empty argument list"));
            }
            loop {
                args.push(self.term()?);
                let sep = self.next_tok("`,` or `)`")?;
                match sep.kind {
                    TokKind::Comma => continue,
                    TokKind::RParen => break,
                    _ => {
                        return Err(ElotError::syn(
                            sep.pos,
                            format!("expected `,` or `)` in argument list of `{head}`"),
                        ))
                    }
                }
            }
        }
        Ok(RawTerm {
            head,
            pos,
            args,
            applied,
        })
    }
}

fn parse_raw(input: &str) -> Result<RawTerm, ElotError> {
    let toks = lex(input)?;
    let mut cur = Cursor {
        toks: &toks,
        i: 0,
        input_len: input.len(),
    };
    let term = cur.term()?;
    if let Some(tok) = cur.peek() {
        return Err(ElotError::syn(tok.pos, "unexpected trailing input"));
    }
    Ok(term)
}

// ---------------------------------------------------------------------------
// Stage 2: elaboration.

/// Parses and type-checks a statement.
pub fn parse_epistemic(
    input: &str,
    domain: &DomainSignature,
) -> Result<EpistemicFormula, ElotError> {
    let raw = parse_raw(input)?;
    let mut scope = Vec::new();
    check_epistemic(&raw, &mut scope, domain)
}

/// Parses a formula in the lowered threshold-comparison language.
pub fn parse_lowered(input: &str, domain: &DomainSignature) -> Result<LoweredFormula, ElotError> {
    let raw = parse_raw(input)?;
    let mut scope = Vec::new();
    check_lowered(&raw, &mut scope, domain)
}

fn is_var_name(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase())
}

const GRADED_WORDS: [(&str, ThresholdName); 7] = [
    ("could", ThresholdName::Could),
    ("might", ThresholdName::Might),
    ("may", ThresholdName::May),
    ("should", ThresholdName::Should),
    ("must", ThresholdName::Must),
    ("likely", ThresholdName::Likely),
    ("unlikely", ThresholdName::Unlikely),
];

const EPISTEMIC_HEADS: [&str; 12] = [
    "believes",
    "knows_that",
    "knows_if",
    "knows_about",
    "not_knows_that",
    "not_knows_if",
    "certain_that",
    "certain_about",
    "uncertain_if",
    "uncertain_about",
    "degree",
    "formula",
];

const MODAL_HEADS: [&str; 11] = [
    "could", "might", "may", "should", "must", "likely", "unlikely", "more", "less", "most",
    "least",
];

fn arity(raw: &RawTerm, n: usize) -> Result<(), ElotError> {
    if raw.args.len() != n {
        return Err(ElotError::syn(
            raw.pos,
            format!("`{}` takes {n} argument(s), got {}", raw.head, raw.args.len()),
        ));
    }
    Ok(())
}

fn describe_found(raw: &RawTerm, domain: &DomainSignature) -> String {
    let head = raw.head.as_str();
    if domain.is_class(head) || domain.is_predicate(head) {
        format!("{} (world predicate `{head}`)", TypeTag::Base)
    } else if EPISTEMIC_HEADS.contains(&head) || head == "forall" || head == "exists" {
        format!("{} (operator `{head}`)", TypeTag::Epistemic)
    } else if MODAL_HEADS.contains(&head) {
        format!("{} (modal `{head}`)", TypeTag::ModalFn)
    } else if raw.is_atom() && is_var_name(head) {
        format!("variable `{head}`")
    } else {
        format!("`{head}`")
    }
}

fn check_agent(raw: &RawTerm, domain: &DomainSignature) -> Result<String, ElotError> {
    if raw.is_atom() && domain.is_agent(&raw.head) {
        Ok(raw.head.clone())
    } else {
        Err(ElotError::ty(
            raw.pos,
            "A",
            describe_found(raw, domain),
            "operator argument must name an agent",
        ))
    }
}

fn check_threshold_word(raw: &RawTerm) -> Result<ThresholdName, ElotError> {
    if raw.is_atom() {
        if let Some(name) = ThresholdName::parse(&raw.head) {
            return Ok(name);
        }
    }
    Err(ElotError::ty(
        raw.pos,
        "P",
        format!("`{}`", raw.head),
        "expected a graded predicate word (believes, certain, uncertain, likely, unlikely, could, might, may, should, must)",
    ))
}

/// Checks a class argument `color(C)` of the `*_about` operators and class
/// superlatives: the class must be enumerable and the argument a fresh
/// variable, which the caller pushes into scope for the body.
fn check_class_ref(
    raw: &RawTerm,
    scope: &[VarName],
    domain: &DomainSignature,
) -> Result<ClassRef, ElotError> {
    if !domain.is_class(&raw.head) {
        return Err(ElotError::ty(
            raw.pos,
            "Phi/O",
            describe_found(raw, domain),
            "expected a class applied to a fresh variable, e.g. color(C)",
        ));
    }
    if domain.class_members(&raw.head).is_none() {
        return Err(ElotError::ty(
            raw.pos,
            "Phi/O",
            format!("non-enumerable class `{}`", raw.head),
            "this operator enumerates the class at lowering time",
        ));
    }
    arity(raw, 1)?;
    let arg = &raw.args[0];
    if !(arg.is_atom() && is_var_name(&arg.head)) {
        return Err(ElotError::ty(
            arg.pos,
            "O",
            describe_found(arg, domain),
            "class argument must be a fresh variable",
        ));
    }
    if scope.contains(&arg.head) {
        return Err(ElotError::ty(
            arg.pos,
            "O",
            format!("variable `{}`", arg.head),
            "variable is already bound in an enclosing scope",
        ));
    }
    Ok(ClassRef {
        pred: raw.head.clone(),
        var: arg.head.clone(),
    })
}

/// Checks a quantifier restriction: `class(V)` or `and(class(V), extras...)`
/// where the extras are world formulas over `V` and enclosing variables.
/// Returns the bound variable and the restriction formula (which includes
/// the class conjunct). `require_enumerable` is set for statement-level
/// quantifiers, which expand the class during lowering.
fn check_restriction(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
    require_enumerable: bool,
) -> Result<(VarName, BaseFormula), ElotError> {
    let (class_app, extras) = if raw.head == "and" && raw.applied {
        if raw.args.len() < 2 {
            return Err(ElotError::syn(raw.pos, "`and` takes at least 2 arguments"));
        }
        (&raw.args[0], &raw.args[1..])
    } else {
        (raw, &[][..])
    };
    if !domain.is_class(&class_app.head) || !class_app.applied {
        return Err(ElotError::ty(
            class_app.pos,
            "Phi/O",
            describe_found(class_app, domain),
            "quantifier restriction must start with a class applied to a fresh variable",
        ));
    }
    if require_enumerable && domain.class_members(&class_app.head).is_none() {
        return Err(ElotError::ty(
            class_app.pos,
            "Phi/O",
            format!("non-enumerable class `{}`", class_app.head),
            "statement-level quantifiers enumerate their class at lowering time",
        ));
    }
    arity(class_app, 1)?;
    let var_term = &class_app.args[0];
    if !(var_term.is_atom() && is_var_name(&var_term.head)) {
        return Err(ElotError::ty(
            var_term.pos,
            "O",
            describe_found(var_term, domain),
            "quantifier restriction must bind a variable",
        ));
    }
    if scope.contains(&var_term.head) {
        return Err(ElotError::ty(
            var_term.pos,
            "O",
            format!("variable `{}`", var_term.head),
            "variable is already bound in an enclosing scope",
        ));
    }
    let var = var_term.head.clone();
    let class_formula = BaseFormula::Pred {
        name: class_app.head.clone(),
        args: vec![TermArg::Var(var.clone())],
    };
    if extras.is_empty() {
        return Ok((var, class_formula));
    }
    scope.push(var.clone());
    let mut conjuncts = vec![class_formula];
    for extra in extras {
        let checked = check_base(extra, scope, domain);
        if checked.is_err() {
            scope.pop();
        }
        conjuncts.push(checked?);
    }
    scope.pop();
    Ok((var, BaseFormula::And(conjuncts)))
}

/// Checks the `formula(phi)` wrapper used by operators whose argument is a
/// world formula.
fn check_formula_wrapper(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
    operator: &str,
) -> Result<BaseFormula, ElotError> {
    if raw.head != "formula" || !raw.applied {
        return Err(ElotError::ty(
            raw.pos,
            "Phi",
            describe_found(raw, domain),
            &format!("`{operator}` takes its world formula wrapped as formula(...)"),
        ));
    }
    arity(raw, 1)?;
    check_base(&raw.args[0], scope, domain)
}

fn check_epistemic(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
) -> Result<EpistemicFormula, ElotError> {
    match raw.head.as_str() {
        "believes" => {
            arity(raw, 2)?;
            let agent = check_agent(&raw.args[0], domain)?;
            let arg = &raw.args[1];
            if arg.head == "formula" && arg.applied {
                let body = check_formula_wrapper(arg, scope, domain, "believes")?;
                return Ok(EpistemicFormula::Believes { agent, body });
            }
            if MODAL_HEADS.contains(&arg.head.as_str()) && arg.applied {
                let modal = check_modal(arg, scope, domain)?;
                return Ok(EpistemicFormula::BelievesModal { agent, modal });
            }
            Err(ElotError::ty(
                arg.pos,
                "E/A",
                describe_found(arg, domain),
                "the second argument of believes must be formula(...) or a modal application",
            ))
        }
        "knows_that" | "knows_if" | "not_knows_that" | "not_knows_if" | "certain_that" => {
            arity(raw, 2)?;
            let agent = check_agent(&raw.args[0], domain)?;
            let body = check_formula_wrapper(&raw.args[1], scope, domain, &raw.head)?;
            Ok(match raw.head.as_str() {
                "knows_that" => EpistemicFormula::KnowsThat { agent, body },
                "knows_if" => EpistemicFormula::KnowsIf { agent, body },
                "not_knows_that" => EpistemicFormula::NotKnowsThat { agent, body },
                "not_knows_if" => EpistemicFormula::NotKnowsIf { agent, body },
                _ => EpistemicFormula::CertainThat { agent, body },
            })
        }
        "uncertain_if" => {
            arity(raw, 3)?;
            let agent = check_agent(&raw.args[0], domain)?;
            let left = check_formula_wrapper(&raw.args[1], scope, domain, "uncertain_if")?;
            let right = check_formula_wrapper(&raw.args[2], scope, domain, "uncertain_if")?;
            Ok(EpistemicFormula::UncertainIf { agent, left, right })
        }
        "knows_about" | "certain_about" | "uncertain_about" => {
            arity(raw, 3)?;
            let agent = check_agent(&raw.args[0], domain)?;
            let class = check_class_ref(&raw.args[1], scope, domain)?;
            scope.push(class.var.clone());
            let body = check_base(&raw.args[2], scope, domain);
            scope.pop();
            let body = body?;
            Ok(match raw.head.as_str() {
                "knows_about" => EpistemicFormula::KnowsAbout { agent, class, body },
                "certain_about" => EpistemicFormula::CertainAbout { agent, class, body },
                _ => EpistemicFormula::UncertainAbout { agent, class, body },
            })
        }
        "degree" => {
            arity(raw, 3)?;
            check_threshold_word(&raw.args[0])?;
            check_agent(&raw.args[1], domain)?;
            check_formula_wrapper(&raw.args[2], scope, domain, "degree")?;
            // The arguments are well formed, but the result is a degree
            // term, not a statement.
            Err(ElotError::ty(
                raw.pos,
                "E",
                format!("{} (degree term)", TypeTag::FunctionTerm),
                "degree(...) is a function term and cannot stand alone as a statement",
            ))
        }
        "forall" | "exists" => {
            arity(raw, 2)?;
            let (var, restriction) = check_restriction(&raw.args[0], scope, domain, true)?;
            scope.push(var.clone());
            let body = check_epistemic(&raw.args[1], scope, domain);
            scope.pop();
            let body = Box::new(body?);
            Ok(if raw.head == "forall" {
                EpistemicFormula::Forall {
                    var,
                    restriction,
                    body,
                }
            } else {
                EpistemicFormula::Exists {
                    var,
                    restriction,
                    body,
                }
            })
        }
        "and" | "or" => {
            if raw.args.len() < 2 {
                return Err(ElotError::syn(
                    raw.pos,
                    format!("`{}` takes at least 2 arguments", raw.head),
                ));
            }
            let items: Result<Vec<_>, _> = raw
                .args
                .iter()
                .map(|a| check_epistemic(a, scope, domain))
                .collect();
            let items = items?;
            Ok(if raw.head == "and" {
                EpistemicFormula::And(items)
            } else {
                EpistemicFormula::Or(items)
            })
        }
        "not" => {
            arity(raw, 1)?;
            Ok(EpistemicFormula::Not(Box::new(check_epistemic(
                &raw.args[0],
                scope,
                domain,
            )?)))
        }
        "implies" => {
            arity(raw, 2)?;
            let lhs = check_epistemic(&raw.args[0], scope, domain)?;
            let rhs = check_epistemic(&raw.args[1], scope, domain)?;
            Ok(EpistemicFormula::Implies(Box::new(lhs), Box::new(rhs)))
        }
        head if domain.is_predicate(head) || domain.is_class(head) => Err(ElotError::ty(
            raw.pos,
            "E",
            describe_found(raw, domain),
            "a world formula cannot stand alone as a statement; wrap it under an epistemic operator",
        )),
        head if MODAL_HEADS.contains(&head) => Err(ElotError::ty(
            raw.pos,
            "E",
            describe_found(raw, domain),
            "modal applications only occur as the second argument of believes",
        )),
        head => Err(ElotError::syn(
            raw.pos,
            format!("unknown operator `{head}`"),
        )),
    }
}

fn check_modal(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
) -> Result<ModalFormula, ElotError> {
    if let Some(&(_, word)) = GRADED_WORDS.iter().find(|(w, _)| *w == raw.head) {
        arity(raw, 1)?;
        let body = check_base(&raw.args[0], scope, domain)?;
        return Ok(ModalFormula::Graded { word, body });
    }
    match raw.head.as_str() {
        "more" | "less" => {
            arity(raw, 3)?;
            let pred = check_threshold_word(&raw.args[0])?;
            let left = check_base(&raw.args[1], scope, domain)?;
            let right = check_base(&raw.args[2], scope, domain)?;
            Ok(if raw.head == "more" {
                ModalFormula::More { pred, left, right }
            } else {
                ModalFormula::Less { pred, left, right }
            })
        }
        "most" | "least" => match raw.args.len() {
            2 => {
                let pred = check_threshold_word(&raw.args[0])?;
                let body = check_base(&raw.args[1], scope, domain)?;
                Ok(if raw.head == "most" {
                    ModalFormula::MostStr { pred, body }
                } else {
                    ModalFormula::LeastStr { pred, body }
                })
            }
            4 => {
                let pred = check_threshold_word(&raw.args[0])?;
                let class = check_class_ref(&raw.args[2], scope, domain)?;
                let object_term = &raw.args[1];
                let members = domain
                    .class_members(&class.pred)
                    .expect("check_class_ref enforces enumerability");
                if !(object_term.is_atom() && members.iter().any(|m| m == &object_term.head)) {
                    return Err(ElotError::ty(
                        object_term.pos,
                        "O",
                        describe_found(object_term, domain),
                        &format!("superlative subject must be a member of class `{}`", class.pred),
                    ));
                }
                let object = object_term.head.clone();
                scope.push(class.var.clone());
                let body = check_base(&raw.args[3], scope, domain);
                scope.pop();
                let body = body?;
                Ok(if raw.head == "most" {
                    ModalFormula::MostSup {
                        pred,
                        object,
                        class,
                        body,
                    }
                } else {
                    ModalFormula::LeastSup {
                        pred,
                        object,
                        class,
                        body,
                    }
                })
            }
            n => Err(ElotError::syn(
                raw.pos,
                format!("`{}` takes 2 or 4 arguments, got {n}", raw.head),
            )),
        },
        _ => unreachable!("caller checked MODAL_HEADS"),
    }
}

fn check_term_arg(
    raw: &RawTerm,
    scope: &[VarName],
    domain: &DomainSignature,
) -> Result<TermArg, ElotError> {
    if !raw.is_atom() {
        return Err(ElotError::ty(
            raw.pos,
            "O",
            describe_found(raw, domain),
            "predicate arguments must be constants or variables",
        ));
    }
    if is_var_name(&raw.head) {
        if scope.contains(&raw.head) {
            Ok(TermArg::Var(raw.head.clone()))
        } else {
            Err(ElotError::ty(
                raw.pos,
                "O",
                format!("unbound variable `{}`", raw.head),
                "variables must be bound by an enclosing quantifier or class argument",
            ))
        }
    } else if domain.is_constant(&raw.head) || domain.is_agent(&raw.head) {
        Ok(TermArg::Const(raw.head.clone()))
    } else {
        Err(ElotError::ty(
            raw.pos,
            "O",
            format!("unknown identifier `{}`", raw.head),
            "not a known object constant",
        ))
    }
}

fn check_base(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
) -> Result<BaseFormula, ElotError> {
    match raw.head.as_str() {
        "and" | "or" => {
            if raw.args.len() < 2 {
                return Err(ElotError::syn(
                    raw.pos,
                    format!("`{}` takes at least 2 arguments", raw.head),
                ));
            }
            let items: Result<Vec<_>, _> = raw
                .args
                .iter()
                .map(|a| check_base(a, scope, domain))
                .collect();
            let items = items?;
            Ok(if raw.head == "and" {
                BaseFormula::And(items)
            } else {
                BaseFormula::Or(items)
            })
        }
        "not" => {
            arity(raw, 1)?;
            Ok(BaseFormula::Not(Box::new(check_base(
                &raw.args[0],
                scope,
                domain,
            )?)))
        }
        "implies" => {
            arity(raw, 2)?;
            let lhs = check_base(&raw.args[0], scope, domain)?;
            let rhs = check_base(&raw.args[1], scope, domain)?;
            Ok(BaseFormula::Implies(Box::new(lhs), Box::new(rhs)))
        }
        "forall" | "exists" => {
            arity(raw, 2)?;
            let (var, restriction) = check_restriction(&raw.args[0], scope, domain, false)?;
            scope.push(var.clone());
            let body = check_base(&raw.args[1], scope, domain);
            scope.pop();
            let body = Box::new(body?);
            Ok(if raw.head == "forall" {
                BaseFormula::Forall {
                    var,
                    restriction: Box::new(restriction),
                    body,
                }
            } else {
                BaseFormula::Exists {
                    var,
                    restriction: Box::new(restriction),
                    body,
                }
            })
        }
        "formula" => Err(ElotError::ty(
            raw.pos,
            "Phi",
            "formula(...) wrapper".to_owned(),
            "formula(...) is only valid as an operator argument",
        )),
        head if EPISTEMIC_HEADS.contains(&head) => Err(ElotError::ty(
            raw.pos,
            "Phi",
            describe_found(raw, domain),
            "epistemic operators cannot appear inside a world formula",
        )),
        head if MODAL_HEADS.contains(&head) => Err(ElotError::ty(
            raw.pos,
            "Phi",
            describe_found(raw, domain),
            "modal applications cannot appear inside a world formula",
        )),
        head if domain.is_class(head) || domain.is_predicate(head) => {
            if !raw.applied {
                return Err(ElotError::syn(
                    raw.pos,
                    format!("predicate `{head}` must be applied to arguments"),
                ));
            }
            let want = if domain.is_class(head) {
                1
            } else {
                domain.predicates[head].arity
            };
            arity(raw, want)?;
            let args: Result<Vec<_>, _> = raw
                .args
                .iter()
                .map(|a| check_term_arg(a, scope, domain))
                .collect();
            Ok(BaseFormula::Pred {
                name: head.to_owned(),
                args: args?,
            })
        }
        head => Err(ElotError::syn(
            raw.pos,
            format!("unknown predicate `{head}`"),
        )),
    }
}

// ---------------------------------------------------------------------------
// Lowered language.

fn check_prob_term(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
) -> Result<ProbTerm, ElotError> {
    if raw.head != "prob_of" || !raw.applied {
        return Err(ElotError::syn(
            raw.pos,
            format!(
                "comparison left-hand side must be prob_of(agent, formula); found `{}`",
                raw.head
            ),
        ));
    }
    arity(raw, 2)?;
    let agent = check_agent(&raw.args[0], domain)?;
    let body = check_base(&raw.args[1], scope, domain)?;
    Ok(ProbTerm { agent, body })
}

fn check_rhs(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
) -> Result<Rhs, ElotError> {
    match raw.head.as_str() {
        "threshold" | "most_threshold" | "least_threshold" if raw.applied => {
            arity(raw, 1)?;
            let name = check_threshold_word(&raw.args[0])?;
            Ok(match raw.head.as_str() {
                "threshold" => Rhs::Threshold(name),
                "most_threshold" => Rhs::MostThreshold(name),
                _ => Rhs::LeastThreshold(name),
            })
        }
        "prob_of" => Ok(Rhs::Prob(check_prob_term(raw, scope, domain)?)),
        _ => Err(ElotError::syn(
            raw.pos,
            format!(
                "comparison right-hand side must be threshold(name), most_threshold(name), \
                 least_threshold(name), or prob_of(...); found `{}`",
                raw.head
            ),
        )),
    }
}

fn check_lowered(
    raw: &RawTerm,
    scope: &mut Vec<VarName>,
    domain: &DomainSignature,
) -> Result<LoweredFormula, ElotError> {
    match raw.head.as_str() {
        ">=" | ">" | "<=" | "<" => {
            arity(raw, 2)?;
            let lhs = check_prob_term(&raw.args[0], scope, domain)?;
            let rhs = check_rhs(&raw.args[1], scope, domain)?;
            let op = match raw.head.as_str() {
                ">=" => CmpOp::Ge,
                ">" => CmpOp::Gt,
                "<=" => CmpOp::Le,
                _ => CmpOp::Lt,
            };
            Ok(LoweredFormula::Cmp { op, lhs, rhs })
        }
        "and" | "or" => {
            if raw.args.len() < 2 {
                return Err(ElotError::syn(
                    raw.pos,
                    format!("`{}` takes at least 2 arguments", raw.head),
                ));
            }
            let items: Result<Vec<_>, _> = raw
                .args
                .iter()
                .map(|a| check_lowered(a, scope, domain))
                .collect();
            let items = items?;
            // A connective whose children are all plain world formulas is a
            // world formula, not a lowered connective.
            if items
                .iter()
                .all(|i| matches!(i, LoweredFormula::Holds(_)))
            {
                let bases: Vec<BaseFormula> = items
                    .into_iter()
                    .map(|i| match i {
                        LoweredFormula::Holds(b) => b,
                        _ => unreachable!(),
                    })
                    .collect();
                return Ok(LoweredFormula::Holds(if raw.head == "and" {
                    BaseFormula::And(bases)
                } else {
                    BaseFormula::Or(bases)
                }));
            }
            Ok(if raw.head == "and" {
                LoweredFormula::And(items)
            } else {
                LoweredFormula::Or(items)
            })
        }
        "not" => {
            arity(raw, 1)?;
            let inner = check_lowered(&raw.args[0], scope, domain)?;
            Ok(match inner {
                LoweredFormula::Holds(b) => LoweredFormula::Holds(BaseFormula::Not(Box::new(b))),
                other => LoweredFormula::Not(Box::new(other)),
            })
        }
        "implies" => {
            arity(raw, 2)?;
            let lhs = check_lowered(&raw.args[0], scope, domain)?;
            let rhs = check_lowered(&raw.args[1], scope, domain)?;
            Ok(match (lhs, rhs) {
                (LoweredFormula::Holds(a), LoweredFormula::Holds(b)) => {
                    LoweredFormula::Holds(BaseFormula::Implies(Box::new(a), Box::new(b)))
                }
                (a, b) => LoweredFormula::Implies(Box::new(a), Box::new(b)),
            })
        }
        "true" if raw.is_atom() => Ok(LoweredFormula::True),
        "false" if raw.is_atom() => Ok(LoweredFormula::False),
        "prob_of" | "threshold" | "most_threshold" | "least_threshold" => Err(ElotError::syn(
            raw.pos,
            format!("`{}` is only valid inside a comparison", raw.head),
        )),
        _ => Ok(LoweredFormula::Holds(check_base(raw, scope, domain)?)),
    }
}
