//! Typed language for graded epistemic statements.
//!
//! Statements like "the player knows that box 3 is empty" are parsed into a
//! typed AST ([`ast::EpistemicFormula`]), checked against a domain
//! vocabulary ([`domain::DomainSignature`]), and lowered to comparisons
//! between subjective probabilities and named thresholds
//! ([`lower::LoweredFormula`]), which the evaluator scores against an
//! inferred belief distribution.

pub mod ast;
pub mod domain;
pub mod lower;
pub mod parser;
pub mod printer;
pub mod thresholds;

pub use ast::{BaseFormula, ClassRef, EpistemicFormula, ModalFormula, TermArg, TypeTag};
pub use domain::DomainSignature;
pub use lower::{lower, subst_base, CmpOp, LoweredFormula, LowerError, ProbTerm, Rhs};
pub use parser::{parse_epistemic, parse_lowered, ElotError};
pub use printer::{print_base, print_epistemic, print_lowered};
pub use thresholds::{ThresholdName, ThresholdTable};
