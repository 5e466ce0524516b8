//! Interaction traces and the trace log format.
//!
//! A trace log has one JSON object per line:
//!
//! ```text
//! {"trace":"linus-1","user":"linus","ts":1,"kind":"click","name":"category","value":"Science"}
//! ```
//!
//! `kind` is `click`, `out-of-turn` or `form-fill`. A line of kind `template`
//! records the template a session started from; it is provenance, not an
//! event.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ebg::theory::{Literal, PROVIDED, SELECTED};
use crate::model::{Schema, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Click,
    OutOfTurn,
    FormFill,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    /// Attribute for browse events, slot for form fills.
    pub name: String,
    pub value: String,
    pub ts: u64,
}

impl TraceEvent {
    pub fn click(var: &Variable, ts: u64) -> Self {
        Self {
            kind: EventKind::Click,
            name: var.attribute.clone(),
            value: var.value.clone(),
            ts,
        }
    }

    pub fn form_fill(slot: &str, value: &str, ts: u64) -> Self {
        Self {
            kind: EventKind::FormFill,
            name: slot.to_string(),
            value: value.to_string(),
            ts,
        }
    }

    pub fn is_browse(&self) -> bool {
        matches!(self.kind, EventKind::Click | EventKind::OutOfTurn)
    }

    /// Browse variable, for click and out-of-turn events.
    pub fn variable(&self) -> Option<Variable> {
        self.is_browse()
            .then(|| Variable::new(&self.name, &self.value))
    }

    pub fn literal(&self) -> Literal {
        let pred = if self.is_browse() { SELECTED } else { PROVIDED };
        Literal::ground(pred, &[&self.name, &self.value])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub id: String,
    pub user: String,
    pub events: Vec<TraceEvent>,
    /// Template the session started from, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

impl Trace {
    pub fn last_ts(&self) -> u64 {
        self.events.iter().map(|e| e.ts).max().unwrap_or(0)
    }

    pub fn browse_variables(&self) -> Vec<Variable> {
        self.events.iter().filter_map(TraceEvent::variable).collect()
    }

    /// Last value given for a form slot.
    pub fn slot(&self, slot: &str) -> Option<&str> {
        self.events
            .iter()
            .rev()
            .find(|e| e.kind == EventKind::FormFill && e.name == slot)
            .map(|e| e.value.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace log line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace `{trace}` has events for two users")]
    MixedUsers { trace: String },
    #[error("trace `{trace}` event {index} uses unknown variable `{variable}`")]
    UnknownVariable {
        trace: String,
        index: usize,
        variable: Variable,
    },
    #[error("trace `{trace}` event {index} fills undeclared slot `{slot}`")]
    UnknownSlot {
        trace: String,
        index: usize,
        slot: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum LineKind {
    Click,
    OutOfTurn,
    FormFill,
    Template,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceLine {
    trace: String,
    user: String,
    ts: u64,
    kind: LineKind,
    name: String,
    value: String,
}

/// Parses a trace log; traces are returned in order of first appearance.
pub fn parse_traces(text: &str) -> Result<Vec<Trace>, TraceError> {
    let mut traces: Vec<Trace> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: TraceLine =
            serde_json::from_str(raw).map_err(|source| TraceError::Line { line: i + 1, source })?;
        let idx = match traces.iter().position(|t| t.id == line.trace) {
            Some(idx) => idx,
            None => {
                traces.push(Trace {
                    id: line.trace.clone(),
                    user: line.user.clone(),
                    events: Vec::new(),
                    template: None,
                });
                traces.len() - 1
            }
        };
        let trace = &mut traces[idx];
        if trace.user != line.user {
            return Err(TraceError::MixedUsers { trace: line.trace });
        }
        let kind = match line.kind {
            LineKind::Template => {
                trace.template = Some(line.value);
                continue;
            }
            LineKind::Click => EventKind::Click,
            LineKind::OutOfTurn => EventKind::OutOfTurn,
            LineKind::FormFill => EventKind::FormFill,
        };
        trace.events.push(TraceEvent {
            kind,
            name: line.name,
            value: line.value,
            ts: line.ts,
        });
    }
    Ok(traces)
}

pub fn write_traces<'a>(traces: impl IntoIterator<Item = &'a Trace>) -> String {
    let mut out = String::new();
    let mut push = |line: TraceLine| {
        out.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
        out.push('\n');
    };
    for t in traces {
        if let Some(template) = &t.template {
            push(TraceLine {
                trace: t.id.clone(),
                user: t.user.clone(),
                ts: t.events.first().map_or(0, |e| e.ts),
                kind: LineKind::Template,
                name: "template".into(),
                value: template.clone(),
            });
        }
        for e in &t.events {
            push(TraceLine {
                trace: t.id.clone(),
                user: t.user.clone(),
                ts: e.ts,
                kind: match e.kind {
                    EventKind::Click => LineKind::Click,
                    EventKind::OutOfTurn => LineKind::OutOfTurn,
                    EventKind::FormFill => LineKind::FormFill,
                },
                name: e.name.clone(),
                value: e.value.clone(),
            });
        }
    }
    out
}

/// Browse events must name schema variables; form fills must name declared
/// slots.
pub fn check_trace(trace: &Trace, schema: &Schema, slots: &BTreeSet<String>) -> Result<(), TraceError> {
    for (index, e) in trace.events.iter().enumerate() {
        match e.variable() {
            Some(var) if !schema.contains(&var) => {
                return Err(TraceError::UnknownVariable {
                    trace: trace.id.clone(),
                    index,
                    variable: var,
                })
            }
            None if !slots.contains(&e.name) => {
                return Err(TraceError::UnknownSlot {
                    trace: trace.id.clone(),
                    index,
                    slot: e.name.clone(),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn linus_trace_parses() {
        let t = fixtures::linus_trace();
        assert_eq!(t.user, "linus");
        assert_eq!(t.events.len(), 4);
        assert_eq!(t.slot("payment"), Some("Discover"));
        assert_eq!(t.browse_variables().len(), 2);
        check_trace(&t, fixtures::bookstore_site().schema(), &fixtures::bookstore_theory().slots())
            .unwrap();
    }

    #[test]
    fn template_lines_are_provenance() {
        let mut t = fixtures::linus_trace();
        t.template = Some("bookstore:remembered:linus".into());
        let text = write_traces([&t]);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(parse_traces(&text).unwrap(), vec![t]);
    }

    #[test]
    fn bad_lines_and_unknown_names_are_errors() {
        assert!(matches!(parse_traces("{\"trace\":1}"), Err(TraceError::Line { line: 1, .. })));
        let mut t = fixtures::linus_trace();
        t.events[3].name = "gift-wrap".into();
        assert!(matches!(
            check_trace(&t, fixtures::bookstore_site().schema(), &fixtures::bookstore_theory().slots()),
            Err(TraceError::UnknownSlot { .. })
        ));
    }
}
