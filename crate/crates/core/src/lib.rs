//! Personalizing interaction programs by partial evaluation.
//!
//! An interaction program is a tree of pages whose hyperlinks are labeled
//! with boolean variables. Specializing it with a partial assignment deletes
//! the links that are ruled out and skips the ones already decided, leaving
//! a smaller program the user can keep browsing.

pub mod analysis;
pub mod ebg;
pub mod fixtures;
pub mod ingest;
pub mod mapper;
pub mod model;
pub mod pe;

pub use model::{
    Assignment, Attribute, Catalog, Conflict, Edge, InteractionProgram, Item, Node, PageId,
    PathValuation, Schema, Variable, Violation,
};
pub use pe::{
    apply_sequence, click, partial_evaluate, Outcome, PeError, SpecializationKind,
    SpecializationResult,
};
