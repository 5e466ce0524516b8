//! Random trace corpora for testing template derivation.

use rand::Rng;

use crate::ebg::trace::{Trace, TraceEvent};
use crate::model::{InteractionProgram, Node, Variable};

/// Clicks from the root to a uniformly chosen child at every branch.
pub fn random_walk(rng: &mut impl Rng, program: &InteractionProgram) -> Vec<Variable> {
    let mut out = Vec::new();
    let mut node = &program.root;
    while let Node::Branch(b) = node {
        let edge = &b.edges[rng.random_range(0..b.edges.len())];
        if !edge.resolved {
            out.push(edge.variable.clone());
        }
        node = &edge.child;
    }
    out
}

/// A user with fixed form answers.
#[derive(Debug, Clone)]
pub struct Shopper {
    pub user: String,
    pub slots: Vec<(String, String)>,
}

/// `n` traces: each picks a shopper, walks the program at random and then
/// fills the shopper's slots. Timestamps increase across the corpus.
pub fn random_corpus(
    rng: &mut impl Rng,
    program: &InteractionProgram,
    shoppers: &[Shopper],
    n: usize,
) -> Vec<Trace> {
    let mut ts = 0u64;
    let mut tick = || {
        ts += 1;
        ts
    };
    (0..n)
        .map(|i| {
            let shopper = &shoppers[rng.random_range(0..shoppers.len())];
            let mut events: Vec<TraceEvent> = random_walk(rng, program)
                .iter()
                .map(|v| TraceEvent::click(v, tick()))
                .collect();
            events.extend(
                shopper
                    .slots
                    .iter()
                    .map(|(k, v)| TraceEvent::form_fill(k, v, tick())),
            );
            Trace {
                id: format!("t{i}"),
                user: shopper.user.clone(),
                events,
                template: None,
            }
        })
        .collect()
}
