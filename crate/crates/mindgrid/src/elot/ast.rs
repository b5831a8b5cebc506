//! Typed AST for the epistemic formula language.
//!
//! Two-level structure: [`BaseFormula`] is first-order logic over the world
//! (predicates, connectives, restricted quantifiers), and
//! [`EpistemicFormula`] wraps base formulas in graded-belief operators.
//! Modal verbs and adjectives ("might", "likely", ...) are functions from an
//! agent to a truth value and only occur under a belief operator; they live
//! in [`ModalFormula`].

use crate::elot::thresholds::ThresholdName;

/// Variable name. Surface syntax: identifier starting with an uppercase letter.
pub type VarName = String;
/// Object constant name (e.g. `box3`, `red`, `triangle`). Lowercase identifier.
pub type ObjName = String;
/// Agent constant name (e.g. `player`).
pub type AgentName = String;
/// Predicate or class name (e.g. `inside`, `key`).
pub type PredName = String;

/// Argument of a predicate application.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermArg {
    /// Object constant.
    Const(ObjName),
    /// Variable bound by an enclosing quantifier or class argument.
    Var(VarName),
}

/// First-order formula about the world state.
///
/// Quantifiers bind exactly one fresh variable through a restriction formula
/// whose first conjunct is a unary class predicate applied to that variable
/// (`key(K)`, or `and(key(K), iscolor(K, red))`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BaseFormula {
    /// Predicate application, e.g. `inside(K, box2)`.
    Pred { name: PredName, args: Vec<TermArg> },
    /// N-ary conjunction (two or more conjuncts).
    And(Vec<BaseFormula>),
    /// N-ary disjunction (two or more disjuncts).
    Or(Vec<BaseFormula>),
    Not(Box<BaseFormula>),
    /// Material implication.
    Implies(Box<BaseFormula>, Box<BaseFormula>),
    Exists {
        var: VarName,
        restriction: Box<BaseFormula>,
        body: Box<BaseFormula>,
    },
    Forall {
        var: VarName,
        restriction: Box<BaseFormula>,
        body: Box<BaseFormula>,
    },
}

/// Class argument of the `*_about` and superlative operators: a unary class
/// predicate applied to the variable it binds, e.g. `color(C)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassRef {
    pub pred: PredName,
    pub var: VarName,
}

/// Modal function applied under a belief operator. Denotes a predicate of the
/// believing agent: `believes(player, might(phi))` holds when the agent's
/// subjective probability of `phi` clears the `might` threshold.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModalFormula {
    /// Threshold modal verb or adjective: `could`, `might`, `may`, `should`,
    /// `must`, `likely` (subjective probability at least the named threshold)
    /// or `unlikely` (at most its threshold).
    Graded { word: ThresholdName, body: BaseFormula },
    /// Comparative: degree of `left` strictly exceeds degree of `right`.
    More {
        pred: ThresholdName,
        left: BaseFormula,
        right: BaseFormula,
    },
    /// Comparative: degree of `left` strictly below degree of `right`.
    Less {
        pred: ThresholdName,
        left: BaseFormula,
        right: BaseFormula,
    },
    /// Superlative over a class: `object` maximizes the degree of `body`
    /// among members of `class` (body has `class.var` free).
    MostSup {
        pred: ThresholdName,
        object: ObjName,
        class: ClassRef,
        body: BaseFormula,
    },
    /// Superlative over a class, minimizing.
    LeastSup {
        pred: ThresholdName,
        object: ObjName,
        class: ClassRef,
        body: BaseFormula,
    },
    /// Strength superlative: degree at least min(1, alpha * theta_pred).
    MostStr { pred: ThresholdName, body: BaseFormula },
    /// Strength superlative: degree at most theta_pred / alpha.
    LeastStr { pred: ThresholdName, body: BaseFormula },
}

/// Top-level epistemic formula (a statement about an agent's mental state).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EpistemicFormula {
    /// Plain graded belief: subjective probability of `body` clears the
    /// `believes` threshold. Surface form `believes(A, formula(phi))`.
    Believes { agent: AgentName, body: BaseFormula },
    /// Belief in a modal claim: `believes(A, might(phi))` and friends.
    BelievesModal { agent: AgentName, modal: ModalFormula },
    /// Belief plus truth: `knows_that(A, formula(phi))`.
    KnowsThat { agent: AgentName, body: BaseFormula },
    /// Knows whether: knows_that(phi) or knows_that(not phi).
    KnowsIf { agent: AgentName, body: BaseFormula },
    /// True but not believed: `phi` holds and the agent does not believe it.
    NotKnowsThat { agent: AgentName, body: BaseFormula },
    /// Negation of knows_if: the agent knows neither `phi` nor `not phi`.
    NotKnowsIf { agent: AgentName, body: BaseFormula },
    /// Exists a class member for which the agent knows the instantiated body.
    KnowsAbout {
        agent: AgentName,
        class: ClassRef,
        body: BaseFormula,
    },
    /// Subjective probability clears the `certain` threshold.
    CertainThat { agent: AgentName, body: BaseFormula },
    /// Exists a class member whose instantiated body the agent is certain of.
    CertainAbout {
        agent: AgentName,
        class: ClassRef,
        body: BaseFormula,
    },
    /// Both formulas sit below the `uncertain` threshold.
    UncertainIf {
        agent: AgentName,
        left: BaseFormula,
        right: BaseFormula,
    },
    /// Every class member's instantiated body sits below the threshold.
    UncertainAbout {
        agent: AgentName,
        class: ClassRef,
        body: BaseFormula,
    },
    /// Raw degree term: the agent's subjective probability of `body`.
    /// Has function-term type, not statement type; rejected at the top level.
    Degree {
        pred: ThresholdName,
        agent: AgentName,
        body: BaseFormula,
    },
    /// Quantification over class members at the statement level, e.g.
    /// `forall(box(B), knows_about(player, color(C), ...))`.
    Exists {
        var: VarName,
        restriction: BaseFormula,
        body: Box<EpistemicFormula>,
    },
    Forall {
        var: VarName,
        restriction: BaseFormula,
        body: Box<EpistemicFormula>,
    },
    And(Vec<EpistemicFormula>),
    Or(Vec<EpistemicFormula>),
    Not(Box<EpistemicFormula>),
    Implies(Box<EpistemicFormula>, Box<EpistemicFormula>),
}

/// Type assigned to a checked node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeTag {
    /// Statement type: an epistemic formula.
    Epistemic,
    /// World formula type.
    Base,
    /// Modal function type (predicate of an agent).
    ModalFn,
    /// Function term type (degree expressions).
    FunctionTerm,
    Agent,
    Object,
    PredSymbol,
    /// Class function type (unary class predicate with its variable).
    ClassFn,
}

impl TypeTag {
    /// Compact name used in diagnostic messages.
    pub fn as_str(self) -> &'static str {
        match self {
            TypeTag::Epistemic => "E",
            TypeTag::Base => "Phi",
            TypeTag::ModalFn => "E/A",
            TypeTag::FunctionTerm => "Phi_F",
            TypeTag::Agent => "A",
            TypeTag::Object => "O",
            TypeTag::PredSymbol => "P",
            TypeTag::ClassFn => "Phi/O",
        }
    }
}

impl std::fmt::Display for TypeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
