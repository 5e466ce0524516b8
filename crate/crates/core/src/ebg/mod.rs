//! Explanation-based generalization of interaction traces into templates.

pub mod corpus;
pub mod explain;
pub mod template;
pub mod theory;
pub mod trace;

pub use explain::{enumerate_cuts, explain, ExplNode, ExplainError, ExplanationTree, NodeKind, OperationalityCut};
pub use template::{
    derive_templates, operationalize, remember, score, score_templates, select_templates, Derivation,
    DeriveOptions, Rejection, Scope, Template, TemplateError, TemplateScore, VANILLA,
};
pub use theory::{is_event_predicate, unify, DomainTheory, Literal, Term, TheoryError, TheoryRule};
pub use trace::{check_trace, parse_traces, write_traces, EventKind, Trace, TraceError, TraceEvent};
