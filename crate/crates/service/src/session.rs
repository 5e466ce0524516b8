//! Session state and the pure transition function shared by live requests
//! and log replay.

use std::collections::BTreeMap;

use personable_core::ebg::{EventKind, Template, Trace, TraceEvent};
use personable_core::{
    click, partial_evaluate, Assignment, InteractionProgram, PeError, SpecializationKind,
    SpecializationResult, Variable,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Active,
    Saved,
    Completed,
}

/// One entry of a session's history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum Step {
    /// The session started from a template.
    Template {
        template: String,
        baked: Assignment,
        slots: BTreeMap<String, String>,
    },
    Click { variable: Variable, ts: u64 },
    /// Terms as typed, the variables they asserted, and everything the
    /// mapping added (so replay does not depend on the lexicon).
    OutOfTurn {
        terms: Vec<String>,
        asserted: Vec<Variable>,
        added: Assignment,
        ts: u64,
    },
    FormFill { slot: String, value: String, ts: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub site: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    pub applied: Assignment,
    #[serde(default)]
    pub slots: BTreeMap<String, String>,
    pub history: Vec<Step>,
    pub status: Status,
    /// Set once the session has been saved at least once.
    #[serde(default)]
    pub ever_saved: bool,
}

impl Session {
    pub fn new(id: String, site: String, user: Option<String>) -> Self {
        Self {
            id,
            site,
            user,
            applied: Assignment::new(),
            slots: BTreeMap::new(),
            history: Vec::new(),
            status: Status::Active,
            ever_saved: false,
        }
    }

    pub fn template(&self) -> Option<&str> {
        self.history.iter().find_map(|s| match s {
            Step::Template { template, .. } => Some(template.as_str()),
            _ => None,
        })
    }
}

/// Entries of the append-only session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum LogEntry {
    Created {
        site: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        user: Option<String>,
    },
    Step(Step),
    Saved,
    Resumed,
}

/// A session together with its specialized program.
#[derive(Debug, Clone, PartialEq)]
pub struct LiveSession {
    pub session: Session,
    pub current: SpecializationResult,
}

pub fn base_result(base: &InteractionProgram) -> SpecializationResult {
    partial_evaluate(base, &Assignment::new()).expect("empty assignment is always valid")
}

impl LiveSession {
    pub fn start(session: Session, base: &InteractionProgram) -> Self {
        Self {
            session,
            current: base_result(base),
        }
    }

    /// The step that starts a session from the catalog template `id`.
    pub fn template_step(id: &str, template: &Template) -> Step {
        Step::Template {
            template: id.to_string(),
            baked: template.baked.clone(),
            slots: template.slots.clone(),
        }
    }

    /// Applies one step. On error, and when the step would leave no page
    /// reachable, the session is left untouched; the latter returns
    /// `Ok(false)`.
    pub fn apply(&mut self, base: &InteractionProgram, step: Step) -> Result<bool, ServiceError> {
        if self.session.status != Status::Active
            && !(self.session.status == Status::Completed && matches!(step, Step::FormFill { .. }))
        {
            return Err(ServiceError::SessionNotActive {
                session: self.session.id.clone(),
                status: self.session.status,
            });
        }
        let added = match &step {
            Step::Template { baked, .. } => baked.clone(),
            Step::Click { variable, .. } => {
                let program = self.current.program().ok_or(ServiceError::NoMatch)?;
                // Validates that the link is on the current page.
                click(program, program.root.page(), variable)?;
                Assignment::closed_from_trues(&base.schema, [variable]).map_err(PeError::from)?
            }
            Step::OutOfTurn { added, .. } => added.clone(),
            Step::FormFill { slot, value, .. } => {
                self.session.slots.insert(slot.clone(), value.clone());
                self.session.history.push(step);
                return Ok(true);
            }
        };
        let prior = &self.session.applied;
        let applied = prior.union(&added).ok_or_else(|| {
            let (variable, _) = added
                .iter()
                .find(|(v, x)| prior.get(v).is_some_and(|y| y != *x))
                .expect("union fails only on a disagreeing entry");
            ServiceError::ConflictsWithSession {
                variable: variable.clone(),
            }
        })?;
        let next = partial_evaluate(base, &applied)?;
        if next.is_empty() {
            return Ok(false);
        }
        if let Step::Template { slots, .. } = &step {
            self.session.slots.extend(slots.clone());
        }
        self.session.applied = applied;
        if next.kind() == SpecializationKind::Complete {
            self.session.status = Status::Completed;
        }
        self.current = next;
        self.session.history.push(step);
        Ok(true)
    }

    /// Rebuilds a session from its log.
    pub fn replay(
        id: &str,
        base: &InteractionProgram,
        entries: &[LogEntry],
    ) -> Result<LiveSession, ServiceError> {
        Self::replay_from(id, base, None, entries)
    }

    /// Continues replay from an already rebuilt session (e.g. a snapshot).
    pub fn replay_from(
        id: &str,
        base: &InteractionProgram,
        start: Option<LiveSession>,
        entries: &[LogEntry],
    ) -> Result<LiveSession, ServiceError> {
        let mut live = start;
        for entry in entries {
            match (entry, live.as_mut()) {
                (LogEntry::Created { site, user }, None) => {
                    live = Some(LiveSession::start(
                        Session::new(id.to_string(), site.clone(), user.clone()),
                        base,
                    ));
                }
                (LogEntry::Step(step), Some(l)) => {
                    if !l.apply(base, step.clone())? {
                        return Err(ServiceError::ReplayDiverged {
                            session: id.to_string(),
                            reason: "logged step leaves no page reachable".into(),
                        });
                    }
                }
                (LogEntry::Saved, Some(l)) => {
                    l.session.status = Status::Saved;
                    l.session.ever_saved = true;
                }
                (LogEntry::Resumed, Some(l)) => l.session.status = resumed_status(&l.current),
                (e, _) => {
                    return Err(ServiceError::ReplayDiverged {
                        session: id.to_string(),
                        reason: format!("unexpected log entry {e:?}"),
                    })
                }
            }
        }
        live.ok_or_else(|| ServiceError::ReplayDiverged {
            session: id.to_string(),
            reason: "log has no creation entry".into(),
        })
    }

    /// Recomputes the specialized program from scratch and compares.
    pub fn check_invariant(&self, base: &InteractionProgram) -> Result<(), ServiceError> {
        let fresh = partial_evaluate(base, &self.session.applied)?;
        let same = match (fresh.program(), self.current.program()) {
            (Some(a), Some(b)) => a.same_structure(b),
            (None, None) => true,
            _ => false,
        };
        if same && fresh.kind() == self.current.kind() {
            Ok(())
        } else {
            Err(ServiceError::InvariantViolated {
                session: self.session.id.clone(),
            })
        }
    }

    /// The completed session as a trace. Template steps are provenance only.
    pub fn export_trace(&self) -> Result<Trace, ServiceError> {
        if self.session.status != Status::Completed {
            return Err(ServiceError::NotCompleted {
                session: self.session.id.clone(),
            });
        }
        let mut events = Vec::new();
        for step in &self.session.history {
            match step {
                Step::Template { .. } => {}
                Step::Click { variable, ts } => events.push(TraceEvent::click(variable, *ts)),
                Step::OutOfTurn { asserted, ts, .. } => {
                    events.extend(asserted.iter().map(|v| TraceEvent {
                        kind: EventKind::OutOfTurn,
                        name: v.attribute.clone(),
                        value: v.value.clone(),
                        ts: *ts,
                    }))
                }
                Step::FormFill { slot, value, ts } => events.push(TraceEvent::form_fill(slot, value, *ts)),
            }
        }
        Ok(Trace {
            id: self.session.id.clone(),
            user: self.session.user.clone().unwrap_or_else(|| "anonymous".into()),
            events,
            template: self.session.template().map(str::to_string),
        })
    }
}

pub fn resumed_status(current: &SpecializationResult) -> Status {
    if current.kind() == SpecializationKind::Complete {
        Status::Completed
    } else {
        Status::Active
    }
}
