//! Value types for interaction programs: attributes, variables, assignments,
//! catalogs and the decision tree itself.
//!
//! A [`Variable`] is an `(attribute, value)` pair. Each edge of an
//! [`InteractionProgram`] is guarded by exactly one variable, so every edge is
//! one opportunity for the user to communicate an aspect of what they want.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Variables and attributes
// ---------------------------------------------------------------------------

/// One `(attribute, value)` pair; rendered as `attribute=value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub attribute: String,
    pub value: String,
}

impl Variable {
    pub fn new(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            attribute: attribute.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed variable `{0}`: expected `attribute=value`")]
pub struct ParseVariableError(pub String);

impl FromStr for Variable {
    type Err = ParseVariableError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (attr, value) = s
            .split_once('=')
            .ok_or_else(|| ParseVariableError(s.to_string()))?;
        let (attr, value) = (attr.trim(), value.trim());
        if attr.is_empty() || value.is_empty() {
            return Err(ParseVariableError(s.to_string()));
        }
        Ok(Variable::new(attr, value))
    }
}

impl Serialize for Variable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Variable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default = "default_exclusive")]
    pub exclusive: bool,
}

fn default_exclusive() -> bool {
    true
}

impl Attribute {
    pub fn exclusive(name: impl Into<String>, values: &[&str]) -> Self {
        Self {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
            exclusive: true,
        }
    }

    pub fn has_value(&self, value: &str) -> bool {
        self.values.iter().any(|v| v == value)
    }
}

/// Ordered set of attributes. Declaration order is significant: it fixes the
/// edge order of generated hierarchies and the split order of coalesced links.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Attribute>", into = "Vec<Attribute>")]
pub struct Schema {
    attributes: IndexMap<String, Attribute>,
}

impl From<Vec<Attribute>> for Schema {
    fn from(attrs: Vec<Attribute>) -> Self {
        Self {
            attributes: attrs.into_iter().map(|a| (a.name.clone(), a)).collect(),
        }
    }
}

impl From<Schema> for Vec<Attribute> {
    fn from(s: Schema) -> Self {
        s.attributes.into_values().collect()
    }
}

impl Schema {
    pub fn new(attrs: Vec<Attribute>) -> Self {
        attrs.into()
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.get(name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.get_index_of(name)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes.values()
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn contains(&self, var: &Variable) -> bool {
        self.attribute(&var.attribute)
            .is_some_and(|a| a.has_value(&var.value))
    }

    /// Attributes unknown to the schema are treated as non-exclusive.
    pub fn is_exclusive(&self, attribute: &str) -> bool {
        self.attribute(attribute).is_some_and(|a| a.exclusive)
    }

    pub fn variables(&self) -> impl Iterator<Item = Variable> + '_ {
        self.attributes()
            .flat_map(|a| a.values.iter().map(move |v| Variable::new(&a.name, v)))
    }
}

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

/// Two values of one exclusive attribute would both be true.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("conflicting values for exclusive attribute `{attribute}`: {first} vs {second}")]
pub struct Conflict {
    pub attribute: String,
    pub first: String,
    pub second: String,
}

/// A partial valuation of variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    entries: BTreeMap<Variable, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Asserts every variable true and applies exclusivity closure.
    pub fn closed_from_trues<'a>(
        schema: &Schema,
        trues: impl IntoIterator<Item = &'a Variable>,
    ) -> Result<Self, Conflict> {
        let mut a = Assignment::new();
        for v in trues {
            a.set(v.clone(), true);
        }
        a.closed(schema)
    }

    pub fn set(&mut self, var: Variable, value: bool) -> Option<bool> {
        self.entries.insert(var, value)
    }

    pub fn get(&self, var: &Variable) -> Option<bool> {
        self.entries.get(var).copied()
    }

    pub fn is_decided(&self, var: &Variable) -> bool {
        self.entries.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, bool)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn trues(&self) -> impl Iterator<Item = &Variable> {
        self.entries.iter().filter(|(_, v)| **v).map(|(k, _)| k)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.entries.keys()
    }

    /// The value asserted true for `attribute`, if any.
    pub fn true_value_of(&self, attribute: &str) -> Option<&str> {
        self.trues()
            .find(|v| v.attribute == attribute)
            .map(|v| v.value.as_str())
    }

    pub fn check_consistent(&self, schema: &Schema) -> Result<(), Conflict> {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for v in self.trues() {
            if !schema.is_exclusive(&v.attribute) {
                continue;
            }
            if let Some(prev) = seen.insert(&v.attribute, &v.value) {
                return Err(Conflict {
                    attribute: v.attribute.clone(),
                    first: prev.to_string(),
                    second: v.value.clone(),
                });
            }
        }
        Ok(())
    }

    /// Exclusivity closure: for each true value of an exclusive attribute,
    /// every other schema value of that attribute is set false.
    pub fn closed(mut self, schema: &Schema) -> Result<Self, Conflict> {
        self.check_consistent(schema)?;
        let trues: Vec<Variable> = self.trues().cloned().collect();
        for v in trues {
            let Some(attr) = schema.attribute(&v.attribute) else {
                continue;
            };
            if !attr.exclusive {
                continue;
            }
            for other in attr.values.iter().filter(|o| **o != v.value) {
                let key = Variable::new(&attr.name, other);
                if self.get(&key) == Some(true) {
                    return Err(Conflict {
                        attribute: attr.name.clone(),
                        first: v.value.clone(),
                        second: other.clone(),
                    });
                }
                self.entries.insert(key, false);
            }
        }
        Ok(self)
    }

    /// True when no variable is decided differently by the two assignments.
    pub fn agrees_with(&self, other: &Assignment) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .iter()
            .all(|(k, v)| large.get(k).is_none_or(|w| w == v))
    }

    /// Union of two assignments; `None` when they disagree on a variable.
    pub fn union(&self, other: &Assignment) -> Option<Assignment> {
        if !self.agrees_with(other) {
            return None;
        }
        let mut out = self.clone();
        out.entries
            .extend(other.entries.iter().map(|(k, v)| (k.clone(), *v)));
        Some(out)
    }

    /// Drops every variable decided by `decided`.
    pub fn without_decided(&self, decided: &Assignment) -> Assignment {
        Assignment {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| !decided.is_decided(k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

impl FromIterator<(Variable, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Variable, bool)>>(iter: T) -> Self {
        Assignment {
            entries: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{}", u8::from(v))?;
        }
        write!(f, "}}")
    }
}

// ---------------------------------------------------------------------------
// Interaction programs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PageId(pub String);

impl PageId {
    pub fn new(id: impl Into<String>) -> Self {
        PageId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PageId {
    fn from(s: &str) -> Self {
        PageId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub variable: Variable,
    pub anchor: String,
    /// Set once the guarding variable has been decided true by a partial
    /// evaluation while undecided siblings remain. A resolved edge no longer
    /// contributes its variable to path valuations.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub resolved: bool,
    pub child: Node,
}

impl Edge {
    pub fn new(variable: Variable, anchor: impl Into<String>, child: Node) -> Self {
        Self {
            variable,
            anchor: anchor.into(),
            resolved: false,
            child,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub page: PageId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaf {
    pub page: PageId,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Branch(Branch),
    Leaf(Leaf),
}

impl Node {
    pub fn leaf(page: impl Into<String>, content: impl Into<String>) -> Node {
        Node::Leaf(Leaf {
            page: PageId(page.into()),
            content: content.into(),
        })
    }

    pub fn branch(page: impl Into<String>, edges: Vec<Edge>) -> Node {
        Node::Branch(Branch {
            page: PageId(page.into()),
            content: None,
            edges,
        })
    }

    pub fn page(&self) -> &PageId {
        match self {
            Node::Branch(b) => &b.page,
            Node::Leaf(l) => &l.page,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }

    pub fn edges(&self) -> &[Edge] {
        match self {
            Node::Branch(b) => &b.edges,
            Node::Leaf(_) => &[],
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        for e in self.edges() {
            e.child.walk(f);
        }
    }

    pub fn collect_pages(&self, out: &mut BTreeSet<PageId>) {
        self.walk(&mut |n| {
            out.insert(n.page().clone());
        });
    }

    pub fn leaf_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |node| n += usize::from(node.is_leaf()));
        n
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.edges()
            .iter()
            .map(|e| 1 + e.child.depth())
            .max()
            .unwrap_or(0)
    }

    /// A copy with every edge list sorted by variable, for comparisons that
    /// ignore edge order.
    pub fn sorted(&self) -> Node {
        match self {
            Node::Leaf(l) => Node::Leaf(l.clone()),
            Node::Branch(b) => {
                let mut edges: Vec<Edge> = b
                    .edges
                    .iter()
                    .map(|e| Edge {
                        child: e.child.sorted(),
                        ..e.clone()
                    })
                    .collect();
                edges.sort_by(|x, y| x.variable.cmp(&y.variable));
                Node::Branch(Branch {
                    page: b.page.clone(),
                    content: b.content.clone(),
                    edges,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionProgram {
    pub schema: Schema,
    pub root: Node,
}

/// Leaf page reached by one root-to-leaf path together with the valuation
/// induced by the path's edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathValuation {
    pub leaf: PageId,
    pub valuation: Assignment,
}

/// One broken invariant found by [`InteractionProgram::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    #[error("page id `{page}` occurs more than once")]
    DuplicatePageId { page: PageId },
    #[error("page `{page}` has two edges labeled `{variable}`")]
    DuplicateSiblingVariable { page: PageId, variable: Variable },
    #[error("page `{page}` has an edge labeled `{variable}` which is not in the schema")]
    UnknownVariable { page: PageId, variable: Variable },
    #[error("branch `{page}` has no edges")]
    EmptyBranch { page: PageId },
    #[error("path to `{leaf}` assigns two values of exclusive attribute `{attribute}`")]
    ConflictingPath { leaf: PageId, attribute: String },
}

impl InteractionProgram {
    pub fn new(schema: Schema, root: Node) -> Self {
        Self { schema, root }
    }

    /// Returns every broken invariant; an empty report means the program is
    /// valid and canonical.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        let mut pages = HashSet::new();
        let mut path = Vec::new();
        self.validate_node(&self.root, &mut pages, &mut path, &mut report);
        report
    }

    fn validate_node<'a>(
        &self,
        node: &'a Node,
        pages: &mut HashSet<&'a PageId>,
        path: &mut Vec<&'a Variable>,
        report: &mut Vec<Violation>,
    ) {
        if !pages.insert(node.page()) {
            report.push(Violation::DuplicatePageId {
                page: node.page().clone(),
            });
        }
        match node {
            Node::Leaf(l) => {
                let mut chosen: BTreeMap<&str, &str> = BTreeMap::new();
                let mut flagged = BTreeSet::new();
                for v in path.iter() {
                    if !self.schema.is_exclusive(&v.attribute) {
                        continue;
                    }
                    if let Some(prev) = chosen.insert(&v.attribute, &v.value) {
                        if prev != v.value && flagged.insert(&v.attribute) {
                            report.push(Violation::ConflictingPath {
                                leaf: l.page.clone(),
                                attribute: v.attribute.clone(),
                            });
                        }
                    }
                }
            }
            Node::Branch(b) => {
                if b.edges.is_empty() {
                    report.push(Violation::EmptyBranch {
                        page: b.page.clone(),
                    });
                }
                let mut siblings = HashSet::new();
                for e in &b.edges {
                    if !siblings.insert(&e.variable) {
                        report.push(Violation::DuplicateSiblingVariable {
                            page: b.page.clone(),
                            variable: e.variable.clone(),
                        });
                    }
                    if !self.schema.contains(&e.variable) {
                        report.push(Violation::UnknownVariable {
                            page: b.page.clone(),
                            variable: e.variable.clone(),
                        });
                    }
                    path.push(&e.variable);
                    self.validate_node(&e.child, pages, path, report);
                    path.pop();
                }
            }
        }
    }

    /// One entry per leaf in left-to-right order. Resolved edges contribute
    /// nothing; traversed variables are true and exclusivity closure adds the
    /// false entries.
    pub fn enumerate_paths(&self) -> Vec<PathValuation> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.paths_from(&self.root, &mut path, &mut out);
        out
    }

    fn paths_from<'a>(
        &self,
        node: &'a Node,
        path: &mut Vec<&'a Variable>,
        out: &mut Vec<PathValuation>,
    ) {
        match node {
            Node::Leaf(l) => {
                let mut valuation = Assignment::new();
                for v in path.iter() {
                    valuation.set((*v).clone(), true);
                }
                // A valid program never conflicts on a path; fall back to the
                // unclosed valuation rather than panicking on invalid input.
                let valuation = valuation.clone().closed(&self.schema).unwrap_or(valuation);
                out.push(PathValuation {
                    leaf: l.page.clone(),
                    valuation,
                });
            }
            Node::Branch(b) => {
                for e in &b.edges {
                    if e.resolved {
                        self.paths_from(&e.child, path, out);
                    } else {
                        path.push(&e.variable);
                        self.paths_from(&e.child, path, out);
                        path.pop();
                    }
                }
            }
        }
    }

    /// Variables that label at least one edge.
    pub fn variables_in_use(&self) -> BTreeSet<Variable> {
        let mut out = BTreeSet::new();
        self.root.walk(&mut |n| {
            for e in n.edges() {
                out.insert(e.variable.clone());
            }
        });
        out
    }

    pub fn find(&self, page: &PageId) -> Option<&Node> {
        let mut found = None;
        self.root.walk(&mut |n| {
            if found.is_none() && n.page() == page {
                found = Some(n);
            }
        });
        found
    }

    pub fn leaf_pages(&self) -> Vec<PageId> {
        let mut out = Vec::new();
        self.root.walk(&mut |n| {
            if n.is_leaf() {
                out.push(n.page().clone());
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Structural equality ignoring edge order.
    pub fn same_structure(&self, other: &InteractionProgram) -> bool {
        self.root.sorted() == other.root.sorted()
    }

    /// Indented outline, one line per edge.
    pub fn outline(&self) -> String {
        fn go(node: &Node, indent: usize, out: &mut String) {
            match node {
                Node::Leaf(l) => {
                    out.push_str(&format!("{}[{}] {}\n", "  ".repeat(indent), l.page, l.content))
                }
                Node::Branch(b) => {
                    out.push_str(&format!("{}[{}]\n", "  ".repeat(indent), b.page));
                    for e in &b.edges {
                        let mark = if e.resolved { " (resolved)" } else { "" };
                        out.push_str(&format!(
                            "{}if ({}){mark}\n",
                            "  ".repeat(indent + 1),
                            e.variable
                        ));
                        go(&e.child, indent + 2, out);
                    }
                }
            }
        }
        let mut out = String::new();
        go(&self.root, 0, &mut out);
        out
    }
}

// ---------------------------------------------------------------------------
// Catalogs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    #[serde(default)]
    pub content: Option<String>,
    pub values: BTreeMap<String, String>,
}

impl Item {
    pub fn content_ref(&self) -> &str {
        self.content.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema: Schema,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("duplicate item id `{0}`")]
    DuplicateItem(String),
    #[error("item `{item}` references unknown value `{attribute}={value}`")]
    UnknownValue {
        item: String,
        attribute: String,
        value: String,
    },
}

impl Catalog {
    pub fn new(schema: Schema, items: Vec<Item>) -> Result<Self, CatalogError> {
        let mut ids = HashSet::new();
        for item in &items {
            if !ids.insert(item.id.as_str()) {
                return Err(CatalogError::DuplicateItem(item.id.clone()));
            }
            for (attr, value) in &item.values {
                if !schema.contains(&Variable::new(attr, value)) {
                    return Err(CatalogError::UnknownValue {
                        item: item.id.clone(),
                        attribute: attr.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        Ok(Self { schema, items })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera_schema() -> Schema {
        Schema::new(vec![
            Attribute::exclusive("maker", &["Canon", "Nikon", "Minolta"]),
            Attribute::exclusive("type", &["35mm", "APS", "SLR"]),
        ])
    }

    fn v(s: &str) -> Variable {
        s.parse().unwrap()
    }

    #[test]
    fn variable_round_trips_through_text() {
        let var = v("maker=Nikon");
        assert_eq!(var.to_string(), "maker=Nikon");
        assert!("maker".parse::<Variable>().is_err());
        assert!("=x".parse::<Variable>().is_err());
    }

    #[test]
    fn closure_sets_conflicting_values_false() {
        let a = Assignment::closed_from_trues(&camera_schema(), [&v("type=SLR")]).unwrap();
        assert_eq!(a.get(&v("type=SLR")), Some(true));
        assert_eq!(a.get(&v("type=35mm")), Some(false));
        assert_eq!(a.get(&v("type=APS")), Some(false));
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn two_trues_in_exclusive_attribute_conflict() {
        let err =
            Assignment::closed_from_trues(&camera_schema(), [&v("type=SLR"), &v("type=APS")])
                .unwrap_err();
        assert_eq!(err.attribute, "type");
    }

    #[test]
    fn non_exclusive_attributes_are_not_closed() {
        let mut schema = camera_schema();
        schema = Schema::new(
            schema
                .attributes()
                .cloned()
                .chain([Attribute {
                    name: "feature".into(),
                    values: vec!["zoom".into(), "flash".into()],
                    exclusive: false,
                }])
                .collect(),
        );
        let a = Assignment::closed_from_trues(&schema, [&v("feature=zoom"), &v("feature=flash")])
            .unwrap();
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn union_rejects_disagreement() {
        let s = camera_schema();
        let a = Assignment::closed_from_trues(&s, [&v("maker=Canon")]).unwrap();
        let b = Assignment::closed_from_trues(&s, [&v("maker=Nikon")]).unwrap();
        assert!(a.union(&b).is_none());
        let c = Assignment::closed_from_trues(&s, [&v("type=SLR")]).unwrap();
        assert_eq!(a.union(&c).unwrap().len(), 6);
    }

    #[test]
    fn single_leaf_program_is_valid_with_one_empty_path() {
        let p = InteractionProgram::new(camera_schema(), Node::leaf("only", "only"));
        assert!(p.validate().is_empty());
        let paths = p.enumerate_paths();
        assert_eq!(paths.len(), 1);
        assert!(paths[0].valuation.is_empty());
    }

    #[test]
    fn duplicate_sibling_variable_is_reported() {
        let p = InteractionProgram::new(
            camera_schema(),
            Node::branch(
                "root",
                vec![
                    Edge::new(v("type=SLR"), "SLR", Node::leaf("a", "a")),
                    Edge::new(v("type=SLR"), "SLR", Node::leaf("b", "b")),
                ],
            ),
        );
        assert_eq!(
            p.validate(),
            vec![Violation::DuplicateSiblingVariable {
                page: "root".into(),
                variable: v("type=SLR"),
            }]
        );
    }

    #[test]
    fn empty_branch_and_conflicting_path_are_reported() {
        let p = InteractionProgram::new(
            camera_schema(),
            Node::branch(
                "root",
                vec![
                    Edge::new(
                        v("maker=Canon"),
                        "Canon",
                        Node::branch(
                            "canon",
                            vec![Edge::new(v("maker=Nikon"), "Nikon", Node::leaf("x", "x"))],
                        ),
                    ),
                    Edge::new(v("maker=Nikon"), "Nikon", Node::branch("nikon", vec![])),
                ],
            ),
        );
        let report = p.validate();
        assert!(report.contains(&Violation::ConflictingPath {
            leaf: "x".into(),
            attribute: "maker".into()
        }));
        assert!(report.contains(&Violation::EmptyBranch {
            page: "nikon".into()
        }));
        assert_eq!(report.len(), 2);
    }

    #[test]
    fn same_variable_twice_on_a_path_is_not_a_conflict() {
        let p = InteractionProgram::new(
            camera_schema(),
            Node::branch(
                "root",
                vec![Edge::new(
                    v("maker=Canon"),
                    "Canon",
                    Node::branch(
                        "canon",
                        vec![Edge::new(v("maker=Canon"), "Canon", Node::leaf("x", "x"))],
                    ),
                )],
            ),
        );
        assert!(p.validate().is_empty());
    }

    #[test]
    fn catalog_rejects_unknown_values_and_duplicates() {
        let item = |id: &str, m: &str| Item {
            id: id.into(),
            content: None,
            values: [("maker".to_string(), m.to_string())].into(),
        };
        assert!(matches!(
            Catalog::new(camera_schema(), vec![item("a", "Leica")]),
            Err(CatalogError::UnknownValue { .. })
        ));
        assert!(matches!(
            Catalog::new(camera_schema(), vec![item("a", "Canon"), item("a", "Nikon")]),
            Err(CatalogError::DuplicateItem(_))
        ));
    }
}
