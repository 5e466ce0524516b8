//! The personalization operator: specialize an interaction program with
//! respect to a partial assignment.
//!
//! Edges whose variable is decided false are deleted. Edges decided true are
//! kept and marked resolved; a branch whose only surviving edge is resolved is
//! replaced by that edge's child. Branches left without edges are dead ends
//! and disappear together with their incoming edge, up to a fixpoint (the
//! bottom-up traversal reaches it in one pass).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{
    Assignment, Branch, Conflict, Edge, InteractionProgram, Leaf, Node, PageId, Variable,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PeError {
    #[error("inconsistent assignment: {0}")]
    InconsistentAssignment(#[from] Conflict),
    #[error("variable `{0}` is not part of the program schema")]
    UnknownVariable(Variable),
    #[error("no edge labeled `{variable}` leaves page `{page}`")]
    NoSuchEdge { page: PageId, variable: Variable },
    #[error("steps {first} and {second} disagree on `{variable}`")]
    ConflictingSteps {
        first: usize,
        second: usize,
        variable: Variable,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecializationKind {
    Partial,
    Complete,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "program", rename_all = "lowercase")]
pub enum Outcome {
    /// Interaction remains: the root is still a branch.
    Partial(InteractionProgram),
    /// The root is a leaf; nothing is left to ask.
    Complete(InteractionProgram),
    /// No leaf is consistent with the assignment.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecializationResult {
    pub outcome: Outcome,
    pub eliminated: BTreeSet<PageId>,
}

impl SpecializationResult {
    fn from_root(program: &InteractionProgram, root: Option<Node>, eliminated: BTreeSet<PageId>) -> Self {
        let outcome = match root {
            None => Outcome::Empty,
            Some(root) => {
                let complete = root.is_leaf();
                let p = InteractionProgram::new(program.schema.clone(), root);
                if complete {
                    Outcome::Complete(p)
                } else {
                    Outcome::Partial(p)
                }
            }
        };
        Self {
            outcome,
            eliminated,
        }
    }

    pub fn kind(&self) -> SpecializationKind {
        match self.outcome {
            Outcome::Partial(_) => SpecializationKind::Partial,
            Outcome::Complete(_) => SpecializationKind::Complete,
            Outcome::Empty => SpecializationKind::Empty,
        }
    }

    pub fn program(&self) -> Option<&InteractionProgram> {
        match &self.outcome {
            Outcome::Partial(p) | Outcome::Complete(p) => Some(p),
            Outcome::Empty => None,
        }
    }

    pub fn into_program(self) -> Option<InteractionProgram> {
        match self.outcome {
            Outcome::Partial(p) | Outcome::Complete(p) => Some(p),
            Outcome::Empty => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.outcome, Outcome::Empty)
    }

    /// Leaf pages still reachable, in left-to-right order.
    pub fn leaves(&self) -> Vec<PageId> {
        self.program().map(|p| p.leaf_pages()).unwrap_or_default()
    }
}

/// Checks the assignment against the schema and returns its closure.
pub fn prepare_assignment(
    program: &InteractionProgram,
    a: &Assignment,
) -> Result<Assignment, PeError> {
    if let Some(unknown) = a.variables().find(|v| !program.schema.contains(v)) {
        return Err(PeError::UnknownVariable(unknown.clone()));
    }
    Ok(a.clone().closed(&program.schema)?)
}

pub fn partial_evaluate(
    program: &InteractionProgram,
    a: &Assignment,
) -> Result<SpecializationResult, PeError> {
    let a = prepare_assignment(program, a)?;
    let mut eliminated = BTreeSet::new();
    let root = specialize(&program.root, &a, &mut eliminated);
    Ok(SpecializationResult::from_root(program, root, eliminated))
}

fn specialize(node: &Node, a: &Assignment, eliminated: &mut BTreeSet<PageId>) -> Option<Node> {
    let branch = match node {
        Node::Leaf(l) => return Some(Node::Leaf(l.clone())),
        Node::Branch(b) => b,
    };
    let mut edges = Vec::with_capacity(branch.edges.len());
    for e in &branch.edges {
        let resolved = match a.get(&e.variable) {
            Some(false) => {
                e.child.collect_pages(eliminated);
                continue;
            }
            Some(true) => true,
            None => e.resolved,
        };
        if let Some(child) = specialize(&e.child, a, eliminated) {
            edges.push(Edge {
                variable: e.variable.clone(),
                anchor: e.anchor.clone(),
                resolved,
                child,
            });
        }
    }
    match edges.len() {
        0 => match &branch.content {
            Some(content) => Some(Node::Leaf(Leaf {
                page: branch.page.clone(),
                content: content.clone(),
            })),
            None => {
                eliminated.insert(branch.page.clone());
                None
            }
        },
        1 if edges[0].resolved => {
            eliminated.insert(branch.page.clone());
            edges.pop().map(|e| e.child)
        }
        _ => Some(Node::Branch(Branch {
            page: branch.page.clone(),
            content: branch.content.clone(),
            edges,
        })),
    }
}

/// A hyperlink click on the current root page: partial evaluation with the
/// clicked variable set true (plus closure).
pub fn click(
    program: &InteractionProgram,
    page: &PageId,
    variable: &Variable,
) -> Result<SpecializationResult, PeError> {
    let no_edge = || PeError::NoSuchEdge {
        page: page.clone(),
        variable: variable.clone(),
    };
    if program.root.page() != page || !program.root.edges().iter().any(|e| &e.variable == variable)
    {
        return Err(no_edge());
    }
    let a = Assignment::closed_from_trues(&program.schema, [variable])?;
    partial_evaluate(program, &a)
}

/// Folds `partial_evaluate` over the steps. The union of all steps must be
/// consistent; otherwise the first disagreeing pair is reported.
pub fn apply_sequence(
    program: &InteractionProgram,
    steps: &[Assignment],
) -> Result<SpecializationResult, PeError> {
    let closed: Vec<Assignment> = steps
        .iter()
        .map(|s| prepare_assignment(program, s))
        .collect::<Result<_, _>>()?;
    for (j, later) in closed.iter().enumerate() {
        for (i, earlier) in closed[..j].iter().enumerate() {
            if let Some((var, _)) = later.iter().find(|(v, b)| earlier.get(v).is_some_and(|x| x != *b)) {
                return Err(PeError::ConflictingSteps {
                    first: i,
                    second: j,
                    variable: var.clone(),
                });
            }
        }
    }
    let mut current = SpecializationResult {
        outcome: Outcome::Partial(program.clone()),
        eliminated: BTreeSet::new(),
    };
    if program.root.is_leaf() {
        current.outcome = Outcome::Complete(program.clone());
    }
    for step in &closed {
        let Some(p) = current.program() else { break };
        let next = partial_evaluate(p, step)?;
        current.eliminated.extend(next.eliminated);
        current.outcome = next.outcome;
    }
    Ok(current)
}
