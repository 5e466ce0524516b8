use personable_core::ebg::{TemplateError, TheoryError, TraceError};
use personable_core::analysis::AnalysisError;
use personable_core::ingest::SiteError;
use personable_core::mapper::MapError;
use personable_core::{PeError, Variable};

use crate::session::Status;
use crate::store::StoreError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown site `{0}`")]
    UnknownSite(String),
    #[error("site `{0}` already exists")]
    SiteExists(String),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("slot `{0}` is not declared by the site's theory")]
    UnknownSlot(String),
    #[error("template `{template}` belongs to another user or site")]
    ScopeMismatch { template: String },
    #[error("session `{session}` is {status:?}")]
    SessionNotActive { session: String, status: Status },
    #[error("session `{session}` was never saved")]
    NotSaved { session: String },
    #[error("session `{session}` is not completed")]
    NotCompleted { session: String },
    #[error("`{variable}` contradicts the session's earlier choices")]
    ConflictsWithSession { variable: Variable },
    #[error("no pages remain")]
    NoMatch,
    #[error("site `{0}` has no domain theory")]
    NoTheory(String),
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Pe(#[from] PeError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Activities(#[from] AnalysisError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("session `{session}` no longer equals a fresh specialization of its assignment")]
    InvariantViolated { session: String },
    #[error("replaying session `{session}` failed: {reason}")]
    ReplayDiverged { session: String, reason: String },
}

impl ServiceError {
    /// Stable machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::UnknownSite(_) => "unknown-site",
            ServiceError::SiteExists(_) => "site-exists",
            ServiceError::UnknownTemplate(_) => "unknown-template",
            ServiceError::UnknownSession(_) => "unknown-session",
            ServiceError::UnknownAttribute(_) => "unknown-attribute",
            ServiceError::UnknownSlot(_) => "unknown-slot",
            ServiceError::ScopeMismatch { .. } => "scope-mismatch",
            ServiceError::SessionNotActive { .. } => "session-not-active",
            ServiceError::NotSaved { .. } => "not-saved",
            ServiceError::NotCompleted { .. } => "not-completed",
            ServiceError::ConflictsWithSession { .. } => "contradiction",
            ServiceError::NoMatch => "no-match",
            ServiceError::NoTheory(_) => "no-theory",
            ServiceError::BadRequest(_) => "bad-request",
            ServiceError::Pe(PeError::NoSuchEdge { .. }) => "no-such-edge",
            ServiceError::Pe(PeError::UnknownVariable(_)) => "unknown-variable",
            ServiceError::Pe(_) => "inconsistent-assignment",
            ServiceError::Map(MapError::Contradiction { .. }) => "contradiction",
            ServiceError::Map(MapError::AllTermsUnknown(_)) => "unrecognized-terms",
            ServiceError::Site(_) => "invalid-site",
            ServiceError::Theory(_) => "invalid-theory",
            ServiceError::Trace(_) => "invalid-trace",
            ServiceError::Activities(_) => "invalid-activities",
            ServiceError::Template(TemplateError::ScopeViolation { .. }) => "scope-violation",
            ServiceError::Template(_) => "invalid-template",
            ServiceError::Store(StoreError::NotFound { .. }) => "not-found",
            ServiceError::Store(StoreError::Corrupt { .. }) => "corrupt-record",
            ServiceError::Store(_) => "storage",
            ServiceError::InvariantViolated { .. } => "invariant-violated",
            ServiceError::ReplayDiverged { .. } => "replay-diverged",
        }
    }
}
