//! Explanations of traces and the operationality cuts through them.
//!
//! An explanation proves the theory's top goal by backward chaining, with
//! `selected`/`provided` literals matched against the trace's events. Rules
//! are tried in theory order and the first proof wins; other rules that could
//! also have proved a node are listed as alternatives.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ebg::theory::{is_event_predicate, unify, DomainTheory, Literal};
use crate::ebg::trace::{Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum NodeKind {
    Rule {
        rule: String,
        alternatives: Vec<String>,
    },
    Event {
        index: usize,
        event: TraceEvent,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplNode {
    pub literal: Literal,
    pub kind: NodeKind,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
}

impl ExplNode {
    pub fn is_event(&self) -> bool {
        matches!(self.kind, NodeKind::Event { .. })
    }

    pub fn event(&self) -> Option<&TraceEvent> {
        match &self.kind {
            NodeKind::Event { event, .. } => Some(event),
            NodeKind::Rule { .. } => None,
        }
    }
}

/// Arena tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationTree {
    pub trace: String,
    pub user: String,
    pub nodes: Vec<ExplNode>,
    /// Trace events not used by the proof.
    pub unexplained: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExplainError {
    #[error("trace `{trace}` does not prove the top goal; unsatisfied: {}", list(.unsatisfied))]
    NoProof {
        trace: String,
        unsatisfied: Vec<Literal>,
    },
}

fn list(ls: &[Literal]) -> String {
    ls.iter().map(Literal::to_string).collect::<Vec<_>>().join(", ")
}

struct Prover<'a> {
    theory: &'a DomainTheory,
    events: &'a [TraceEvent],
    nodes: Vec<ExplNode>,
    used: BTreeSet<usize>,
    fresh: usize,
}

impl Prover<'_> {
    fn prove(&mut self, goal: &Literal) -> Result<usize, Vec<Literal>> {
        if is_event_predicate(&goal.predicate) {
            let hit = (0..self.events.len()).find(|i| {
                !self.used.contains(i)
                    && unify(goal, &self.events[*i].literal(), &mut BTreeMap::new())
            });
            return match hit {
                Some(i) => {
                    self.used.insert(i);
                    Ok(self.push(ExplNode {
                        literal: self.events[i].literal(),
                        kind: NodeKind::Event {
                            index: i,
                            event: self.events[i].clone(),
                        },
                        children: Vec::new(),
                        parent: None,
                    }))
                }
                None => Err(vec![goal.clone()]),
            };
        }

        let candidates: Vec<usize> = (0..self.theory.rules.len())
            .filter(|&r| unify(&self.theory.rules[r].head, goal, &mut BTreeMap::new()))
            .collect();
        let mut first_failure: Option<Vec<Literal>> = None;
        for (pos, &r) in candidates.iter().enumerate() {
            let mark = (self.nodes.len(), self.used.clone());
            match self.apply(r, goal) {
                Ok(id) => {
                    // Later rules that would also have succeeded from the
                    // same state.
                    let alternatives = candidates[pos + 1..]
                        .iter()
                        .filter(|&&alt| {
                            let mut dry = Prover {
                                theory: self.theory,
                                events: self.events,
                                nodes: self.nodes[..mark.0].to_vec(),
                                used: mark.1.clone(),
                                fresh: self.fresh,
                            };
                            dry.apply(alt, goal).is_ok()
                        })
                        .map(|&alt| self.theory.rules[alt].name.clone())
                        .collect();
                    if let NodeKind::Rule { alternatives: a, .. } = &mut self.nodes[id].kind {
                        *a = alternatives;
                    }
                    return Ok(id);
                }
                Err(missing) => {
                    self.nodes.truncate(mark.0);
                    self.used = mark.1;
                    first_failure.get_or_insert(missing);
                }
            }
        }
        Err(first_failure.unwrap_or_else(|| vec![goal.clone()]))
    }

    fn apply(&mut self, r: usize, goal: &Literal) -> Result<usize, Vec<Literal>> {
        self.fresh += 1;
        let suffix = format!("#{}", self.fresh);
        let rule = &self.theory.rules[r];
        let head = rule.head.rename(&suffix);
        let mut bindings = BTreeMap::new();
        if !unify(&head, goal, &mut bindings) {
            return Err(vec![goal.clone()]);
        }
        let mut children = Vec::with_capacity(rule.body.len());
        for lit in &rule.body {
            let inst = lit.rename(&suffix).substitute(&bindings);
            let child = self.prove(&inst)?;
            let proved = self.nodes[child].literal.clone();
            unify(&inst, &proved, &mut bindings);
            children.push(child);
        }
        let id = self.push(ExplNode {
            literal: head.substitute(&bindings),
            kind: NodeKind::Rule {
                rule: rule.name.clone(),
                alternatives: Vec::new(),
            },
            children: children.clone(),
            parent: None,
        });
        for c in children {
            self.nodes[c].parent = Some(id);
        }
        Ok(id)
    }

    fn push(&mut self, node: ExplNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

/// Proves the theory's top goal from the trace's events.
pub fn explain(theory: &DomainTheory, trace: &Trace) -> Result<ExplanationTree, ExplainError> {
    let mut prover = Prover {
        theory,
        events: &trace.events,
        nodes: Vec::new(),
        used: BTreeSet::new(),
        fresh: 0,
    };
    let root = prover.prove(&theory.top).map_err(|unsatisfied| ExplainError::NoProof {
        trace: trace.id.clone(),
        unsatisfied,
    })?;
    let unexplained = (0..trace.events.len())
        .filter(|i| !prover.used.contains(i))
        .collect();
    Ok(ExplanationTree {
        trace: trace.id.clone(),
        user: trace.user.clone(),
        nodes: renumber(prover.nodes, root),
        unexplained,
    })
}

/// Rewrites the arena in preorder so the root is node 0.
fn renumber(nodes: Vec<ExplNode>, root: usize) -> Vec<ExplNode> {
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        order.push(n);
        stack.extend(nodes[n].children.iter().rev());
    }
    let new_id: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    order
        .iter()
        .map(|&o| {
            let n = &nodes[o];
            ExplNode {
                literal: n.literal.clone(),
                kind: n.kind.clone(),
                children: n.children.iter().map(|c| new_id[c]).collect(),
                parent: n.parent.and_then(|p| new_id.get(&p).copied()),
            }
        })
        .collect()
}

impl ExplanationTree {
    pub fn root(&self) -> &ExplNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&n| self.nodes[n].children.is_empty())
            .collect()
    }

    pub fn descendants(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = self.nodes[n].children.clone();
        while let Some(c) = stack.pop() {
            out.push(c);
            stack.extend(self.nodes[c].children.iter().copied());
        }
        out.sort_unstable();
        out
    }

    /// Event leaves in the subtree rooted at `n` (including `n`).
    pub fn events_under(&self, n: usize) -> Vec<&TraceEvent> {
        let mut ids = self.descendants(n);
        ids.push(n);
        ids.sort_unstable();
        ids.into_iter().filter_map(|i| self.nodes[i].event()).collect()
    }

    fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        while let Some(p) = self.nodes[b].parent {
            if p == a {
                return true;
            }
            b = p;
        }
        false
    }

    /// A cut is valid when no frontier node is an ancestor of another and
    /// every leaf lies at or below exactly one frontier node.
    pub fn is_valid_cut(&self, frontier: &[usize]) -> bool {
        if frontier.iter().any(|&f| f >= self.nodes.len()) {
            return false;
        }
        let set: BTreeSet<usize> = frontier.iter().copied().collect();
        if set.len() != frontier.len() {
            return false;
        }
        for &a in frontier {
            for &b in frontier {
                if a != b && self.is_ancestor(a, b) {
                    return false;
                }
            }
        }
        self.leaves().into_iter().all(|leaf| {
            set.contains(&leaf) || set.iter().any(|&f| self.is_ancestor(f, leaf))
        })
    }
}

/// A horizontal plane through an explanation tree. Frontier nodes above it
/// stay open in the template; everything strictly below the frontier is
/// settled by it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OperationalityCut {
    pub frontier: Vec<usize>,
    pub below: Vec<usize>,
}

impl OperationalityCut {
    pub fn new(tree: &ExplanationTree, mut frontier: Vec<usize>) -> Self {
        frontier.sort_unstable();
        let mut below: Vec<usize> = frontier.iter().flat_map(|&f| tree.descendants(f)).collect();
        below.sort_unstable();
        Self { frontier, below }
    }

    pub fn is_root(&self) -> bool {
        self.frontier == [0]
    }
}

/// All cuts with at most `max_frontier` frontier nodes, root cut first. The
/// leaf-level cut is always included, even when it exceeds the bound.
pub fn enumerate_cuts(tree: &ExplanationTree, max_frontier: usize) -> Vec<OperationalityCut> {
    let max = max_frontier.max(1);
    let mut frontiers = cuts_of(tree, 0, max);
    let mut leaf_cut = tree.leaves();
    leaf_cut.sort_unstable();
    for f in &mut frontiers {
        f.sort_unstable();
    }
    if !frontiers.contains(&leaf_cut) {
        frontiers.push(leaf_cut);
    }
    frontiers
        .into_iter()
        .map(|f| OperationalityCut::new(tree, f))
        .collect()
}

fn cuts_of(tree: &ExplanationTree, n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![n]];
    let children = &tree.nodes[n].children;
    if children.is_empty() {
        return out;
    }
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for &c in children {
        let sub = cuts_of(tree, c, max);
        let mut next = Vec::new();
        for prefix in &combos {
            for s in &sub {
                if prefix.len() + s.len() <= max {
                    let mut f = prefix.clone();
                    f.extend(s);
                    next.push(f);
                }
            }
        }
        combos = next;
    }
    out.extend(combos);
    out
}
