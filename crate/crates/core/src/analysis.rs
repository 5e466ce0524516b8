//! Personability of a representation for an information-seeking activity.
//!
//! A representation is personable for an activity when the activity can be
//! carried out by a sequence of partial evaluations. It is unpersonable when
//! the variables the user would need are missing, or when the activity can
//! only be expressed by deciding every variable on the way to the goal (a
//! complete evaluation, which leaves nothing to interact with).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{Assignment, InteractionProgram, PageId, Variable};
use crate::pe::{partial_evaluate, SpecializationKind, SpecializationResult};

/// Which leaves the user would be happy with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    /// Acceptable leaf pages by id.
    Items(BTreeSet<String>),
    /// Every listed variable must hold on the path to the leaf.
    Constraints(Vec<Variable>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActivityKind {
    /// The user can articulate some variables and wants leaves meeting a goal.
    Seek {
        expressible: Vec<Variable>,
        goal: Goal,
    },
    /// A question about the interaction itself ("which types exist?"), which
    /// no assignment expresses. Answered by listing remaining choices.
    Enquire { enquire: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivitySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(flatten)]
    pub kind: ActivityKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ActivityFile {
    activity: Vec<ActivitySpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("activity `{name}` is invalid: {reason}")]
    InvalidActivity { name: String, reason: String },
    #[error("cannot parse activities: {0}")]
    Parse(#[from] toml::de::Error),
}

pub fn parse_activities(text: &str) -> Result<Vec<ActivitySpec>, AnalysisError> {
    Ok(toml::from_str::<ActivityFile>(text)?.activity)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// Realizable by partial evaluation; `realizing` is the smallest part of
    /// the expressible input that already does it.
    Personable { realizing: Vec<Variable> },
    /// Not realizable: either variables are missing from the program, or what
    /// the user can say never leads to the goal.
    UnpersonableMissingVariables {
        missing: Vec<Variable>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        unreachable_goal: Vec<PageId>,
    },
    /// Realizable only by deciding everything on the goal path.
    UnpersonableCompleteOnly { complete: Assignment },
    /// A meta-enquiry about the interaction; not an assignment at all.
    OutOfScope { enquiry: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Personable { .. } => "personable",
            Verdict::UnpersonableMissingVariables { .. } => "unpersonable-missing-variables",
            Verdict::UnpersonableCompleteOnly { .. } => "unpersonable-complete-only",
            Verdict::OutOfScope { .. } => "out-of-scope",
        }
    }
}

fn goal_leaves(p: &InteractionProgram, goal: &Goal) -> BTreeSet<PageId> {
    p.enumerate_paths()
        .into_iter()
        .filter(|path| match goal {
            Goal::Items(ids) => ids.contains(path.leaf.as_str()),
            Goal::Constraints(vars) => vars.iter().all(|v| path.valuation.get(v) == Some(true)),
        })
        .map(|path| path.leaf)
        .collect()
}

/// Upper bound on expressible variables for the exponential subset search.
pub const MAX_SUBSET_SEARCH: usize = 20;

pub fn assess(p: &InteractionProgram, activity: &ActivitySpec) -> Result<Verdict, AnalysisError> {
    let (expressible, goal) = match &activity.kind {
        ActivityKind::Enquire { enquire } => {
            return Ok(Verdict::OutOfScope {
                enquiry: enquire.clone(),
            })
        }
        ActivityKind::Seek { expressible, goal } => (expressible, goal),
    };
    let invalid = |reason: String| AnalysisError::InvalidActivity {
        name: activity.name.clone(),
        reason,
    };

    let in_use = p.variables_in_use();
    let mut missing: Vec<Variable> = expressible
        .iter()
        .filter(|v| !in_use.contains(v))
        .cloned()
        .collect();
    if !missing.is_empty() {
        missing.dedup();
        return Ok(Verdict::UnpersonableMissingVariables {
            missing,
            unreachable_goal: Vec::new(),
        });
    }

    let specialize = |vars: &[&Variable]| -> Result<SpecializationResult, AnalysisError> {
        let a = Assignment::closed_from_trues(&p.schema, vars.iter().copied())
            .map_err(|e| invalid(e.to_string()))?;
        partial_evaluate(p, &a).map_err(|e| invalid(e.to_string()))
    };
    let all: Vec<&Variable> = expressible.iter().collect();
    let targets = goal_leaves(p, goal);
    let r = specialize(&all)?;
    let reached: BTreeSet<PageId> = r.leaves().into_iter().collect();

    if r.is_empty() || reached.is_disjoint(&targets) {
        return Ok(Verdict::UnpersonableMissingVariables {
            missing: Vec::new(),
            unreachable_goal: targets.into_iter().collect(),
        });
    }
    if r.kind() == SpecializationKind::Partial {
        return Ok(Verdict::Personable {
            realizing: expressible.clone(),
        });
    }

    // Complete: look for the smallest proper subset of the input that pins
    // the result down to goal leaves while leaving interaction in place.
    let n = all.len();
    if n > MAX_SUBSET_SEARCH {
        return Err(invalid(format!(
            "{n} expressible variables; the minimal-subset search handles at most {MAX_SUBSET_SEARCH}"
        )));
    }
    let mut subsets: Vec<u64> = (0..(1u64 << n) - 1).collect();
    subsets.sort_by_key(|m| m.count_ones());
    for mask in subsets {
        let subset: Vec<&Variable> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| all[i]).collect();
        let rs = specialize(&subset)?;
        if rs.kind() != SpecializationKind::Partial {
            continue;
        }
        if rs.leaves().iter().all(|l| targets.contains(l)) {
            return Ok(Verdict::Personable {
                realizing: subset.into_iter().cloned().collect(),
            });
        }
    }
    let complete = Assignment::closed_from_trues(&p.schema, all.iter().copied())
        .map_err(|e| invalid(e.to_string()))?;
    Ok(Verdict::UnpersonableCompleteOnly { complete })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenDiagnosis {
    pub frozen: bool,
    pub depth: usize,
    /// The single-level edges, when frozen.
    pub single_level: Vec<Variable>,
}

/// A program is frozen when every root-to-leaf path has at most one edge:
/// one click completes every evaluation.
pub fn detect_frozen(p: &InteractionProgram) -> FrozenDiagnosis {
    let depth = p.depth();
    let frozen = depth <= 1;
    FrozenDiagnosis {
        frozen,
        depth,
        single_level: if frozen {
            p.root.edges().iter().map(|e| e.variable.clone()).collect()
        } else {
            Vec::new()
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudienceRow {
    pub activity: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudienceReport {
    pub rows: Vec<AudienceRow>,
    pub summary: BTreeMap<String, usize>,
}

pub fn audience(
    p: &InteractionProgram,
    activities: &[ActivitySpec],
) -> Result<AudienceReport, AnalysisError> {
    let mut report = AudienceReport::default();
    for a in activities {
        let verdict = assess(p, a)?;
        *report.summary.entry(verdict.label().to_string()).or_default() += 1;
        report.rows.push(AudienceRow {
            activity: a.name.clone(),
            verdict,
        });
    }
    Ok(report)
}
