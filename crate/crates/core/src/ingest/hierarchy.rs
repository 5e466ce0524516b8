//! Generating browsing hierarchies from a flat catalog. With `n` attributes
//! there are `n!` orders and each yields a different site.

use crate::model::{Catalog, Edge, InteractionProgram, Item, Node, PageId, Variable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HierarchyError {
    #[error("attribute `{0}` in the order is not part of the schema")]
    UnknownAttribute(String),
    #[error("attribute `{0}` appears twice in the order")]
    RepeatedAttribute(String),
    #[error("items {items:?} are identical on every ordered attribute")]
    AmbiguousLeaf { items: Vec<String> },
    #[error("item `{item}` has no value for ordered attribute `{attribute}`")]
    MissingValue { item: String, attribute: String },
    #[error("the catalog has no items")]
    EmptyCatalog,
}

/// Level `i` branches on `order[i]`. Edges exist only for values that some
/// surviving item carries, so no dead ends are produced. Leaf pages are named
/// by item id.
pub fn build_hierarchy(
    catalog: &Catalog,
    order: &[String],
) -> Result<InteractionProgram, HierarchyError> {
    for (i, attr) in order.iter().enumerate() {
        if catalog.schema.attribute(attr).is_none() {
            return Err(HierarchyError::UnknownAttribute(attr.clone()));
        }
        if order[..i].contains(attr) {
            return Err(HierarchyError::RepeatedAttribute(attr.clone()));
        }
        if let Some(item) = catalog.items.iter().find(|it| !it.values.contains_key(attr)) {
            return Err(HierarchyError::MissingValue {
                item: item.id.clone(),
                attribute: attr.clone(),
            });
        }
    }
    if catalog.items.is_empty() {
        return Err(HierarchyError::EmptyCatalog);
    }
    let items: Vec<&Item> = catalog.items.iter().collect();
    let root = level(catalog, order, &items, "index")?;
    Ok(InteractionProgram::new(catalog.schema.clone(), root))
}

fn level(
    catalog: &Catalog,
    order: &[String],
    items: &[&Item],
    page: &str,
) -> Result<Node, HierarchyError> {
    let Some((attr_name, rest)) = order.split_first() else {
        return match items {
            [item] => Ok(Node::leaf(&item.id, item.content_ref())),
            _ => Err(HierarchyError::AmbiguousLeaf {
                items: items.iter().map(|i| i.id.clone()).collect(),
            }),
        };
    };
    let attr = catalog
        .schema
        .attribute(attr_name)
        .expect("order checked against schema");
    let mut edges = Vec::new();
    for value in &attr.values {
        let group: Vec<&Item> = items
            .iter()
            .copied()
            .filter(|it| it.values.get(attr_name) == Some(value))
            .collect();
        if group.is_empty() {
            continue;
        }
        let child_page = if page == "index" {
            format!("{attr_name}={value}")
        } else {
            format!("{page}/{attr_name}={value}")
        };
        let child = level(catalog, rest, &group, &child_page)?;
        edges.push(Edge::new(Variable::new(attr_name, value), value, child));
    }
    Ok(Node::Branch(crate::model::Branch {
        page: PageId::new(page),
        content: None,
        edges,
    }))
}
