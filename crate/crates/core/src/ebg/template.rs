//! Interaction templates: what an operationality cut bakes in, what it leaves
//! open, and how templates are scored and selected against a trace corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ebg::explain::{enumerate_cuts, explain, ExplanationTree, OperationalityCut};
use crate::ebg::theory::{DomainTheory, Literal};
use crate::ebg::trace::{EventKind, Trace};
use crate::model::{Assignment, InteractionProgram, Variable};
use crate::pe::{partial_evaluate, PeError, SpecializationKind, SpecializationResult};

pub const VANILLA: &str = "vanilla";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    PerUser(String),
    Global,
}

impl Scope {
    pub fn applies_to(&self, user: &str) -> bool {
        match self {
            Scope::PerUser(u) => u == user,
            Scope::Global => true,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::PerUser(u) => write!(f, "user:{u}"),
            Scope::Global => f.write_str("global"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    pub scope: Scope,
    /// Browse variables fixed in advance (closed).
    pub baked: Assignment,
    /// Form slots filled in advance.
    pub slots: BTreeMap<String, String>,
    /// Subgoals the user still has to achieve.
    pub free: Vec<Literal>,
    /// Trace events the template makes unnecessary.
    pub subsumed_events: usize,
    pub entry_kind: SpecializationKind,
    /// The program a session starts from.
    pub entry: InteractionProgram,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("frontier {0:?} is not a valid cut")]
    InvalidCut(Vec<usize>),
    #[error("global template would bake user-specific slots {slots:?}")]
    ScopeViolation { slots: Vec<String> },
    #[error("baked choices leave no page of the site reachable")]
    EmptyEntry,
    #[error(transparent)]
    Pe(#[from] PeError),
}

impl Template {
    /// The unpersonalized site: nothing baked, the top goal left open.
    pub fn vanilla(theory: &DomainTheory, base: &InteractionProgram) -> Self {
        Self {
            name: VANILLA.into(),
            scope: Scope::Global,
            baked: Assignment::new(),
            slots: BTreeMap::new(),
            free: vec![theory.top.clone()],
            subsumed_events: 0,
            entry_kind: if base.root.is_leaf() {
                SpecializationKind::Complete
            } else {
                SpecializationKind::Partial
            },
            entry: base.clone(),
        }
    }

    pub fn is_vanilla(&self) -> bool {
        self.name == VANILLA
    }

    /// Whether the trace never contradicts anything baked in.
    pub fn consistent_with(&self, trace: &Trace) -> bool {
        trace.events.iter().all(|e| match e.kind {
            EventKind::Click | EventKind::OutOfTurn => self
                .baked
                .true_value_of(&e.name)
                .is_none_or(|v| v == e.value)
                && self.baked.get(&Variable::new(&e.name, &e.value)) != Some(false),
            EventKind::FormFill => self.slots.get(&e.name).is_none_or(|v| *v == e.value),
        })
    }

    /// Finishes the trace's browsing from this template's entry program.
    pub fn replay(&self, trace: &Trace) -> Result<SpecializationResult, PeError> {
        let a = Assignment::closed_from_trues(&self.entry.schema, trace.browse_variables().iter())?;
        partial_evaluate(&self.entry, &a.without_decided(&self.baked))
    }

    fn key(&self) -> (Scope, Assignment, BTreeMap<String, String>, Vec<Literal>) {
        (self.scope.clone(), self.baked.clone(), self.slots.clone(), self.free.clone())
    }
}

/// Bakes the frontier's event leaves into a template. Frontier nodes that are
/// not events become free obligations.
pub fn operationalize(
    tree: &ExplanationTree,
    cut: &OperationalityCut,
    scope: Scope,
    theory: &DomainTheory,
    base: &InteractionProgram,
) -> Result<Template, TemplateError> {
    if !tree.is_valid_cut(&cut.frontier) {
        return Err(TemplateError::InvalidCut(cut.frontier.clone()));
    }
    let mut trues: Vec<Variable> = Vec::new();
    let mut slots = BTreeMap::new();
    let mut free = Vec::new();
    for &f in &cut.frontier {
        let node = &tree.nodes[f];
        match node.event() {
            Some(e) => match e.variable() {
                Some(v) => trues.push(v),
                None => {
                    slots.insert(e.name.clone(), e.value.clone());
                }
            },
            None => free.push(node.literal.clone()),
        }
    }
    if scope == Scope::Global {
        let leaking: Vec<String> = slots
            .keys()
            .filter(|s| theory.user_specific.contains(*s))
            .cloned()
            .collect();
        if !leaking.is_empty() {
            return Err(TemplateError::ScopeViolation { slots: leaking });
        }
    }
    if cut.is_root() {
        let mut t = Template::vanilla(theory, base);
        t.scope = scope;
        return Ok(t);
    }
    let subsumed_events = trues.len() + slots.len();
    let baked = Assignment::closed_from_trues(&base.schema, trues.iter())
        .map_err(PeError::from)?;
    let entry = partial_evaluate(base, &baked)?;
    let entry_kind = entry.kind();
    let entry = entry.into_program().ok_or(TemplateError::EmptyEntry)?;
    let name = template_name(&scope, &baked, &slots, &free);
    Ok(Template {
        name,
        scope,
        baked,
        slots,
        free,
        subsumed_events,
        entry_kind,
        entry,
    })
}

fn template_name(
    scope: &Scope,
    baked: &Assignment,
    slots: &BTreeMap<String, String>,
    free: &[Literal],
) -> String {
    let mut fixed: Vec<String> = baked.trues().map(Variable::to_string).collect();
    fixed.extend(slots.iter().map(|(k, v)| format!("{k}={v}")));
    let open: Vec<String> = free.iter().map(Literal::to_string).collect();
    format!(
        "{scope} [{}] asks [{}]",
        fixed.join(", "),
        open.join(", ")
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateScore {
    pub template: String,
    pub scope: Scope,
    /// Traces the template could be offered for.
    pub applicable: usize,
    /// Applicable traces that never contradict the template.
    pub covered: usize,
    pub coverage: f64,
    /// Events saved per covered trace.
    pub savings: f64,
    pub utility: f64,
}

pub fn score(template: &Template, corpus: &[Trace]) -> TemplateScore {
    let applicable: Vec<&Trace> = corpus
        .iter()
        .filter(|t| template.scope.applies_to(&t.user))
        .collect();
    let covered = applicable.iter().filter(|t| template.consistent_with(t)).count();
    let coverage = if applicable.is_empty() {
        0.0
    } else {
        covered as f64 / applicable.len() as f64
    };
    let savings = template.subsumed_events as f64;
    TemplateScore {
        template: template.name.clone(),
        scope: template.scope.clone(),
        applicable: applicable.len(),
        covered,
        coverage,
        savings,
        utility: coverage * savings,
    }
}

/// Scores every template, best first (ties broken by name).
pub fn score_templates(templates: &[Template], corpus: &[Trace]) -> Vec<TemplateScore> {
    let mut table: Vec<TemplateScore> = templates.iter().map(|t| score(t, corpus)).collect();
    table.sort_by(|a, b| {
        b.utility
            .total_cmp(&a.utility)
            .then_with(|| a.template.cmp(&b.template))
    });
    table
}

/// The `k` best templates with positive utility, plus vanilla.
pub fn select_templates(templates: &[Template], table: &[TemplateScore], k: usize) -> Vec<Template> {
    let by_name: BTreeMap<&str, &Template> = templates.iter().map(|t| (t.name.as_str(), t)).collect();
    let mut out: Vec<Template> = table
        .iter()
        .filter(|s| s.utility > 0.0 && s.template != VANILLA)
        .take(k)
        .filter_map(|s| by_name.get(s.template.as_str()).map(|t| (*t).clone()))
        .collect();
    if let Some(v) = by_name.get(VANILLA) {
        out.push((*v).clone());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub candidate: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    /// Every candidate, scored and ranked.
    pub table: Vec<TemplateScore>,
    /// The retained templates; vanilla is always last.
    pub templates: Vec<Template>,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Copy)]
pub struct DeriveOptions {
    pub max_frontier: usize,
    pub top_k: usize,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        Self {
            max_frontier: 8,
            top_k: 5,
        }
    }
}

/// Explains each user's most recent trace, turns every cut into a per-user
/// and a global candidate, and ranks all candidates on the whole corpus.
pub fn derive_templates(
    theory: &DomainTheory,
    base: &InteractionProgram,
    corpus: &[Trace],
    opts: DeriveOptions,
) -> Derivation {
    let mut latest: BTreeMap<&str, &Trace> = BTreeMap::new();
    for t in corpus {
        let slot = latest.entry(&t.user).or_insert(t);
        if t.last_ts() >= slot.last_ts() {
            *slot = t;
        }
    }

    let mut candidates = vec![Template::vanilla(theory, base)];
    let mut seen: BTreeSet<_> = candidates.iter().map(Template::key).collect();
    let mut rejected = Vec::new();
    for (user, trace) in latest {
        let tree = match explain(theory, trace) {
            Ok(t) => t,
            Err(e) => {
                rejected.push(Rejection {
                    candidate: format!("trace {}", trace.id),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        for cut in enumerate_cuts(&tree, opts.max_frontier) {
            if cut.is_root() {
                continue;
            }
            for scope in [Scope::PerUser(user.to_string()), Scope::Global] {
                match operationalize(&tree, &cut, scope.clone(), theory, base) {
                    Ok(t) => {
                        if seen.insert(t.key()) {
                            candidates.push(t);
                        }
                    }
                    Err(e) => rejected.push(Rejection {
                        candidate: format!("{scope} cut {:?} of {}", cut.frontier, trace.id),
                        reason: e.to_string(),
                    }),
                }
            }
        }
    }
    let table = score_templates(&candidates, corpus);
    let templates = select_templates(&candidates, &table, opts.top_k);
    Derivation {
        table,
        templates,
        rejected,
    }
}

/// Remembers the user's rememberable form slots seen in at least `threshold`
/// of their traces, using the most recent value. Returns `None` when nothing
/// qualifies.
pub fn remember(
    theory: &DomainTheory,
    base: &InteractionProgram,
    user: &str,
    traces: &[Trace],
    threshold: usize,
) -> Option<Template> {
    let mut mine: Vec<&Trace> = traces.iter().filter(|t| t.user == user).collect();
    mine.sort_by_key(|t| t.last_ts());
    let mut slots = BTreeMap::new();
    for slot in &theory.rememberable {
        let with: Vec<&str> = mine.iter().filter_map(|t| t.slot(slot)).collect();
        if !with.is_empty() && with.len() >= threshold.max(1) {
            slots.insert(slot.clone(), with[with.len() - 1].to_string());
        }
    }
    if slots.is_empty() {
        return None;
    }

    // Open obligations: walk down from the root, expanding nodes whose
    // subtree contains a remembered slot.
    let free = match mine.last().and_then(|t| explain(theory, t).ok()) {
        None => vec![theory.top.clone()],
        Some(tree) => {
            let mut free = Vec::new();
            let mut stack = vec![0usize];
            while let Some(n) = stack.pop() {
                let node = &tree.nodes[n];
                let remembered = |tree: &ExplanationTree| {
                    tree.events_under(n).iter().any(|e| {
                        e.kind == EventKind::FormFill && slots.contains_key(&e.name)
                    })
                };
                if node.is_event() {
                    if !remembered(&tree) {
                        free.push(node.literal.clone());
                    }
                } else if remembered(&tree) {
                    stack.extend(node.children.iter().rev());
                } else {
                    free.push(node.literal.clone());
                }
            }
            free
        }
    };
    let scope = Scope::PerUser(user.to_string());
    let baked = Assignment::new();
    let name = template_name(&scope, &baked, &slots, &free);
    Some(Template {
        name,
        scope,
        subsumed_events: slots.len(),
        baked,
        slots,
        free,
        entry_kind: if base.root.is_leaf() {
            SpecializationKind::Complete
        } else {
            SpecializationKind::Partial
        },
        entry: base.clone(),
    })
}
