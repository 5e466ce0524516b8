//! Site-description files.
//!
//! A site is a TOML document with these top-level keys (any other key is an
//! error):
//!
//! ```toml
//! name = "camera"                       # optional site id
//!
//! [[schema]]                            # attributes, in declaration order
//! name = "maker"
//! values = ["Canon", "Nikon", "Minolta"]
//! exclusive = true                      # default
//!
//! [catalog]                             # EITHER a flat catalog ...
//! order = ["maker", "type"]
//! [[catalog.items]]
//! id = "canon-35mm"
//! content = "canon-35mm"                # optional, defaults to id
//! values = { maker = "Canon", type = "35mm" }
//!
//! [[pages]]                             # ... OR an explicit page tree
//! id = "cameras"                        # the first page is the root
//! content = "..."                       # optional on pages with links
//! links = [{ to = "canon", label = "maker=Canon", anchor = "Canon" }]
//!
//! [lexicon]                             # out-of-turn term -> variables
//! "SLR" = ["type=SLR"]
//!
//! [[implies]]                           # forward implication rules
//! name = "R1"
//! if = ["seat=senior"]
//! then = ["branch=senate"]
//!
//! [content.canon-35mm]                  # content-ref -> title/body
//! title = "Canon 35mm"
//! body = "..."
//! ```
//!
//! A link label may coalesce several variables (`"party=D, branch=senate"`);
//! such links are split into chains of single-variable edges on load. A page
//! linked from two parents is duplicated, since programs are trees.
//!
//! There is no standard format for this; the layout above is our own.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ingest::hierarchy::{build_hierarchy, HierarchyError};
use crate::ingest::split::{split_coalesced, CoalescedLink, SplitError};
use crate::mapper::{ImplicationRule, Lexicon, LexiconError, RuleSet};
use crate::model::{
    Attribute, Branch, Catalog, CatalogError, InteractionProgram, Item, Leaf, Node, PageId, Schema,
    Variable, Violation,
};

#[derive(Debug, thiserror::Error)]
pub enum SiteError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

fn schema_err(msg: impl Into<String>) -> SiteError {
    SiteError::Schema(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub schema: Vec<Attribute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pages: Option<Vec<PageEntry>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lexicon: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub implies: Vec<RuleEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub content: BTreeMap<String, ContentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogSection {
    pub order: Vec<String>,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub to: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleEntry {
    pub name: String,
    #[serde(rename = "if")]
    pub antecedents: Vec<String>,
    #[serde(rename = "then")]
    pub consequents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentEntry {
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub body: String,
}

/// A loaded site: program plus the mapping resources for out-of-turn input.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub name: Option<String>,
    pub program: InteractionProgram,
    pub lexicon: Lexicon,
    pub rules: RuleSet,
    pub content: BTreeMap<String, ContentEntry>,
    pub report: Vec<Violation>,
}

impl Site {
    pub fn schema(&self) -> &Schema {
        &self.program.schema
    }
}

/// Line and column (1-based) of a byte offset.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

pub fn parse_site_file(text: &str) -> Result<SiteFile, SiteError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| locate(text, s.start));
        SiteError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn parse_var(raw: &str, context: &str) -> Result<Variable, SiteError> {
    raw.parse()
        .map_err(|e| schema_err(format!("{context}: {e}")))
}

pub fn load_site(text: &str) -> Result<Site, SiteError> {
    let file = parse_site_file(text)?;
    site_from_file(&file)
}

pub fn site_from_file(file: &SiteFile) -> Result<Site, SiteError> {
    let schema = check_schema(&file.schema)?;

    let root = match (&file.catalog, &file.pages) {
        (Some(_), Some(_)) => return Err(schema_err("a site has either `catalog` or `pages`, not both")),
        (None, None) => return Err(schema_err("a site needs a `catalog` or `pages` section")),
        (Some(c), None) => {
            let catalog = Catalog::new(schema.clone(), c.items.clone())?;
            build_hierarchy(&catalog, &c.order)?.root
        }
        (None, Some(pages)) => build_page_tree(&schema, pages)?,
    };
    let program = InteractionProgram::new(schema.clone(), root);

    let mut lexicon_entries = Vec::with_capacity(file.lexicon.len());
    for (term, vars) in &file.lexicon {
        let vars = vars
            .iter()
            .map(|v| parse_var(v, &format!("lexicon term `{term}`")))
            .collect::<Result<Vec<_>, _>>()?;
        lexicon_entries.push((term.as_str(), vars));
    }
    let lexicon = Lexicon::new(&schema, lexicon_entries)?;

    let mut rules = Vec::with_capacity(file.implies.len());
    for r in &file.implies {
        let ctx = format!("rule `{}`", r.name);
        rules.push(ImplicationRule {
            name: r.name.clone(),
            antecedents: r
                .antecedents
                .iter()
                .map(|v| parse_var(v, &ctx))
                .collect::<Result<_, _>>()?,
            consequents: r
                .consequents
                .iter()
                .map(|v| parse_var(v, &ctx))
                .collect::<Result<_, _>>()?,
        });
    }
    let rules = RuleSet::new(&schema, rules)?;
    let report = program.validate();

    Ok(Site {
        name: file.name.clone(),
        program,
        lexicon,
        rules,
        content: file.content.clone(),
        report,
    })
}

fn check_schema(attrs: &[Attribute]) -> Result<Schema, SiteError> {
    if attrs.is_empty() {
        return Err(schema_err("no attributes declared"));
    }
    let mut names = std::collections::HashSet::new();
    for a in attrs {
        if !names.insert(a.name.as_str()) {
            return Err(schema_err(format!("duplicate attribute `{}`", a.name)));
        }
        if a.values.is_empty() {
            return Err(schema_err(format!("attribute `{}` has no values", a.name)));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = a.values.iter().find(|v| !seen.insert(v.as_str())) {
            return Err(schema_err(format!(
                "attribute `{}` lists value `{dup}` twice",
                a.name
            )));
        }
    }
    Ok(Schema::new(attrs.to_vec()))
}

fn build_page_tree(schema: &Schema, pages: &[PageEntry]) -> Result<Node, SiteError> {
    let Some(root) = pages.first() else {
        return Err(schema_err("`pages` is empty"));
    };
    let mut by_id: HashMap<&str, &PageEntry> = HashMap::new();
    for p in pages {
        if by_id.insert(p.id.as_str(), p).is_some() {
            return Err(schema_err(format!("duplicate page id `{}`", p.id)));
        }
    }
    let mut builder = PageTreeBuilder {
        schema,
        by_id,
        copies: HashMap::new(),
        stack: Vec::new(),
    };
    builder.build(root)
}

struct PageTreeBuilder<'a> {
    schema: &'a Schema,
    by_id: HashMap<&'a str, &'a PageEntry>,
    /// How many times each page has been instantiated; later copies get a
    /// `#n` suffix so page ids stay unique.
    copies: HashMap<&'a str, usize>,
    stack: Vec<&'a str>,
}

impl<'a> PageTreeBuilder<'a> {
    fn build(&mut self, page: &'a PageEntry) -> Result<Node, SiteError> {
        if self.stack.contains(&page.id.as_str()) {
            return Err(schema_err(format!("page `{}` links back to itself", page.id)));
        }
        let n = self.copies.entry(page.id.as_str()).or_insert(0);
        *n += 1;
        let page_id = if *n == 1 {
            page.id.clone()
        } else {
            format!("{}#{}", page.id, n)
        };
        if page.links.is_empty() {
            return Ok(Node::Leaf(Leaf {
                page: PageId(page_id.clone()),
                content: page.content.clone().unwrap_or(page_id),
            }));
        }
        self.stack.push(&page.id);
        let mut links = Vec::with_capacity(page.links.len());
        for link in &page.links {
            let target = self.by_id.get(link.to.as_str()).copied().ok_or_else(|| {
                schema_err(format!("page `{}` links to unknown page `{}`", page.id, link.to))
            })?;
            let label = link
                .label
                .split(',')
                .map(|v| parse_var(v, &format!("link `{}` on page `{}`", link.label, page.id)))
                .collect::<Result<Vec<_>, _>>()?;
            let child = self.build(target)?;
            links.push(CoalescedLink {
                label,
                anchor: link.anchor.clone(),
                child,
            });
        }
        self.stack.pop();
        let edges = split_coalesced(self.schema, &PageId(page_id.clone()), links)?;
        Ok(Node::Branch(Branch {
            page: PageId(page_id),
            content: page.content.clone(),
            edges,
        }))
    }
}

/// Serializes a site back to the description format, always in `pages` form
/// with single-variable labels.
pub fn save_site(site: &Site) -> String {
    let mut pages = Vec::new();
    fn emit(node: &Node, pages: &mut Vec<PageEntry>) {
        match node {
            Node::Leaf(l) => pages.push(PageEntry {
                id: l.page.0.clone(),
                content: Some(l.content.clone()),
                links: Vec::new(),
            }),
            Node::Branch(b) => {
                pages.push(PageEntry {
                    id: b.page.0.clone(),
                    content: b.content.clone(),
                    links: b
                        .edges
                        .iter()
                        .map(|e| LinkEntry {
                            to: e.child.page().0.clone(),
                            label: e.variable.to_string(),
                            anchor: Some(e.anchor.clone()),
                        })
                        .collect(),
                });
                for e in &b.edges {
                    emit(&e.child, pages);
                }
            }
        }
    }
    emit(&site.program.root, &mut pages);

    let lexicon = site
        .lexicon
        .terms()
        .map(|(t, vars)| (t.to_string(), vars.iter().map(|v| v.to_string()).collect()))
        .collect();
    let implies = site
        .rules
        .rules()
        .iter()
        .map(|r| RuleEntry {
            name: r.name.clone(),
            antecedents: r.antecedents.iter().map(|v| v.to_string()).collect(),
            consequents: r.consequents.iter().map(|v| v.to_string()).collect(),
        })
        .collect();
    let file = SiteFile {
        name: site.name.clone(),
        schema: site.program.schema.attributes().cloned().collect(),
        catalog: None,
        pages: Some(pages),
        lexicon,
        implies,
        content: site.content.clone(),
    };
    toml::to_string(&file).expect("site files always serialize")
}
