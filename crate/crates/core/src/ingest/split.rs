//! Within-page modeling: a hyperlink whose label coalesces several variables
//! becomes a chain of single-variable edges, one per attribute, in schema
//! declaration order. Links sharing a prefix share the intermediate pages.

use crate::model::{Branch, Edge, Node, PageId, Schema, Variable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("link on page `{page}` names attribute `{attribute}` twice")]
    DuplicateAttributeInLabel { page: PageId, attribute: String },
    #[error("link on page `{page}` uses `{variable}` which is not in the schema")]
    UnknownVariable { page: PageId, variable: Variable },
    #[error("links on page `{page}` overlap: one label is a prefix of another")]
    OverlappingLabels { page: PageId },
    #[error("link on page `{page}` has an empty label")]
    EmptyLabel { page: PageId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoalescedLink {
    pub label: Vec<Variable>,
    pub anchor: Option<String>,
    pub child: Node,
}

pub fn split_coalesced(
    schema: &Schema,
    page: &PageId,
    links: Vec<CoalescedLink>,
) -> Result<Vec<Edge>, SplitError> {
    let mut chains = Vec::with_capacity(links.len());
    for link in links {
        if link.label.is_empty() {
            return Err(SplitError::EmptyLabel { page: page.clone() });
        }
        let mut label = link.label;
        for var in &label {
            if !schema.contains(var) {
                return Err(SplitError::UnknownVariable {
                    page: page.clone(),
                    variable: var.clone(),
                });
            }
        }
        label.sort_by_key(|v| schema.position(&v.attribute));
        if let Some(w) = label.windows(2).find(|w| w[0].attribute == w[1].attribute) {
            return Err(SplitError::DuplicateAttributeInLabel {
                page: page.clone(),
                attribute: w[0].attribute.clone(),
            });
        }
        // Anchors of coalesced links are split on '/' when the pieces line up.
        let anchors: Vec<String> = match &link.anchor {
            Some(a) if a.split('/').count() == label.len() => {
                a.split('/').map(|s| s.trim().to_string()).collect()
            }
            Some(a) if label.len() == 1 => vec![a.clone()],
            _ => label.iter().map(|v| v.value.clone()).collect(),
        };
        chains.push((label, anchors, link.child));
    }
    group(page, chains)
}

type Chain = (Vec<Variable>, Vec<String>, Node);

fn group(page: &PageId, chains: Vec<Chain>) -> Result<Vec<Edge>, SplitError> {
    let mut edges: Vec<Edge> = Vec::new();
    let mut pending: Vec<(Variable, String, Vec<Chain>)> = Vec::new();
    for (mut label, mut anchors, child) in chains {
        let head = label.remove(0);
        let anchor = anchors.remove(0);
        match pending.iter_mut().find(|(v, _, _)| *v == head) {
            Some((_, _, rest)) => rest.push((label, anchors, child)),
            None => pending.push((head, anchor, vec![(label, anchors, child)])),
        }
    }
    for (var, anchor, rest) in pending {
        let child = if rest.len() == 1 && rest[0].0.is_empty() {
            rest.into_iter().next().expect("one element").2
        } else {
            if rest.iter().any(|(label, _, _)| label.is_empty()) {
                return Err(SplitError::OverlappingLabels { page: page.clone() });
            }
            let sub = PageId(format!("{page}/{var}"));
            let sub_edges = group(&sub, rest)?;
            Node::Branch(Branch {
                page: sub,
                content: None,
                edges: sub_edges,
            })
        };
        edges.push(Edge::new(var, anchor, child));
    }
    Ok(edges)
}
