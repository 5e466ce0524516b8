//! Maps out-of-turn user terms to closed assignments.
//!
//! Terms are looked up in an exact-match lexicon (after case folding and
//! whitespace normalization), implication rules are fired forward to a
//! fixpoint, and exclusivity closure adds the false entries. Every decided
//! variable carries exactly one provenance record.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::is_cyclic_directed;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

use crate::model::{Assignment, Schema, Variable};

/// Case-fold, trim and collapse internal whitespace.
pub fn normalize_term(term: &str) -> String {
    term.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("term `{term}` refers to `{variable}` which is not in the schema")]
    UnknownVariable { term: String, variable: Variable },
    #[error("term `{0}` occurs twice after normalization")]
    DuplicateTerm(String),
    #[error("term `{term}` is polysemous: it spans exclusive attributes {attributes:?}")]
    Polysemous {
        term: String,
        attributes: Vec<String>,
    },
    #[error("term `{term}` asserts two values of exclusive attribute `{attribute}`")]
    SelfContradictory { term: String, attribute: String },
    #[error("term `{0}` maps to no variables")]
    EmptyTerm(String),
    #[error("rule `{rule}` refers to `{variable}` which is not in the schema")]
    UnknownRuleVariable { rule: String, variable: Variable },
    #[error("implication rules form a cycle")]
    CyclicRules,
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: BTreeMap<String, BTreeSet<Variable>>,
}

impl Lexicon {
    pub fn new<I, T>(schema: &Schema, entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (T, Vec<Variable>)>,
        T: AsRef<str>,
    {
        let mut out = BTreeMap::new();
        for (term, vars) in entries {
            let term = term.as_ref();
            let norm = normalize_term(term);
            if vars.is_empty() {
                return Err(LexiconError::EmptyTerm(term.to_string()));
            }
            for var in &vars {
                if !schema.contains(var) {
                    return Err(LexiconError::UnknownVariable {
                        term: term.to_string(),
                        variable: var.clone(),
                    });
                }
            }
            let mut exclusive: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for var in vars.iter().filter(|v| schema.is_exclusive(&v.attribute)) {
                exclusive.entry(&var.attribute).or_default().insert(&var.value);
            }
            if exclusive.len() > 1 {
                return Err(LexiconError::Polysemous {
                    term: term.to_string(),
                    attributes: exclusive.keys().map(|s| s.to_string()).collect(),
                });
            }
            if let Some((attr, _)) = exclusive.iter().find(|(_, vals)| vals.len() > 1) {
                return Err(LexiconError::SelfContradictory {
                    term: term.to_string(),
                    attribute: attr.to_string(),
                });
            }
            if out.insert(norm.clone(), vars.into_iter().collect()).is_some() {
                return Err(LexiconError::DuplicateTerm(norm));
            }
        }
        Ok(Self { entries: out })
    }

    pub fn lookup(&self, term: &str) -> Option<&BTreeSet<Variable>> {
        self.entries.get(&normalize_term(term))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &BTreeSet<Variable>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Forward implication: when every antecedent is true, every consequent is
/// asserted true.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationRule {
    pub name: String,
    pub antecedents: BTreeSet<Variable>,
    pub consequents: BTreeSet<Variable>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    rules: Vec<ImplicationRule>,
}

impl RuleSet {
    /// Checks schema membership and acyclicity; rules are kept sorted by name
    /// so that firing order never depends on declaration order.
    pub fn new(schema: &Schema, mut rules: Vec<ImplicationRule>) -> Result<Self, LexiconError> {
        let mut names = BTreeSet::new();
        let mut graph: DiGraphMap<&Variable, ()> = DiGraphMap::new();
        for r in &rules {
            if !names.insert(r.name.as_str()) {
                return Err(LexiconError::DuplicateRule(r.name.clone()));
            }
            for var in r.antecedents.iter().chain(&r.consequents) {
                if !schema.contains(var) {
                    return Err(LexiconError::UnknownRuleVariable {
                        rule: r.name.clone(),
                        variable: var.clone(),
                    });
                }
            }
            for a in &r.antecedents {
                for c in &r.consequents {
                    graph.add_edge(a, c, ());
                }
            }
        }
        if is_cyclic_directed(&graph) {
            return Err(LexiconError::CyclicRules);
        }
        rules.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(Self { rules })
    }

    pub fn empty() -> Self {
        Self { rules: Vec::new() }
    }

    pub fn rules(&self) -> &[ImplicationRule] {
        &self.rules
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::empty()
    }
}

/// Where a decided variable came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    /// Decided before this mapping (e.g. an earlier click in the session).
    Prior,
    Term { term: String },
    Rule { rule: String },
    /// False because another value of the same exclusive attribute is true.
    Exclusivity { because: Variable },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub variable: Variable,
    pub value: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum MapError {
    #[error("contradiction on `{variable}`: derived both true and false")]
    Contradiction {
        variable: Variable,
        /// Derivation of both conflicting entries, antecedents first.
        chain: Vec<DerivationStep>,
    },
    #[error("none of the terms {0:?} is recognized")]
    AllTermsUnknown(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    pub assignment: Assignment,
    pub unrecognized: Vec<String>,
    pub provenance: BTreeMap<Variable, Provenance>,
}

impl Mapping {
    /// Variables asserted true directly by a term.
    pub fn asserted(&self) -> impl Iterator<Item = &Variable> {
        self.provenance
            .iter()
            .filter(|(_, p)| matches!(p, Provenance::Term { .. }))
            .map(|(v, _)| v)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Mapper<'a> {
    pub schema: &'a Schema,
    pub lexicon: &'a Lexicon,
    pub rules: &'a RuleSet,
}

impl<'a> Mapper<'a> {
    pub fn new(schema: &'a Schema, lexicon: &'a Lexicon, rules: &'a RuleSet) -> Self {
        Self {
            schema,
            lexicon,
            rules,
        }
    }

    pub fn map_terms<S: AsRef<str>>(&self, terms: &[S]) -> Result<Mapping, MapError> {
        self.map_with_prior(&Assignment::new(), terms)
    }

    /// Same as [`Mapper::map_terms`] but checked against entries decided
    /// earlier; the returned assignment covers only what the terms add.
    pub fn map_with_prior<S: AsRef<str>>(
        &self,
        prior: &Assignment,
        terms: &[S],
    ) -> Result<Mapping, MapError> {
        let mut prov: BTreeMap<Variable, (bool, Provenance)> = BTreeMap::new();
        for (var, value) in prior.iter() {
            prov.insert(var.clone(), (value, Provenance::Prior));
        }

        let mut unrecognized = Vec::new();
        let mut recognized = 0usize;
        // Sorted so that provenance does not depend on term order.
        let mut sorted: Vec<&str> = terms.iter().map(|t| t.as_ref()).collect();
        sorted.sort_by_key(|t| normalize_term(t));
        for term in sorted {
            let Some(vars) = self.lexicon.lookup(term) else {
                unrecognized.push(term.to_string());
                continue;
            };
            recognized += 1;
            for var in vars {
                self.assert_true(&mut prov, var, Provenance::Term {
                    term: normalize_term(term),
                })?;
            }
        }
        if recognized == 0 && !terms.is_empty() {
            return Err(MapError::AllTermsUnknown(unrecognized));
        }
        // Keep unrecognized terms in caller order.
        unrecognized.sort_by_key(|t| terms.iter().position(|x| x.as_ref() == t));

        // Rules fire in rounds: every rule enabled by the previous round fires
        // together, in name order.
        loop {
            let holds = |v: &Variable, prov: &BTreeMap<Variable, (bool, Provenance)>| {
                prov.get(v).is_some_and(|(b, _)| *b)
            };
            let enabled: Vec<&ImplicationRule> = self
                .rules
                .rules()
                .iter()
                .filter(|r| r.antecedents.iter().all(|v| holds(v, &prov)))
                .filter(|r| r.consequents.iter().any(|v| !holds(v, &prov)))
                .collect();
            if enabled.is_empty() {
                break;
            }
            for r in enabled {
                for c in &r.consequents {
                    if !holds(c, &prov) {
                        self.assert_true(&mut prov, c, Provenance::Rule {
                            rule: r.name.clone(),
                        })?;
                    }
                }
            }
        }

        let mut assignment = Assignment::new();
        let mut provenance = BTreeMap::new();
        for (var, (value, p)) in prov {
            if p != Provenance::Prior {
                assignment.set(var.clone(), value);
                provenance.insert(var, p);
            }
        }
        Ok(Mapping {
            assignment,
            unrecognized,
            provenance,
        })
    }

    /// Records `var` as true and closes its exclusive attribute, reporting a
    /// contradiction with both derivations when closure meets a true entry.
    fn assert_true(
        &self,
        prov: &mut BTreeMap<Variable, (bool, Provenance)>,
        var: &Variable,
        why: Provenance,
    ) -> Result<(), MapError> {
        match prov.get(var) {
            Some((true, _)) => return Ok(()),
            Some((false, _)) => {
                let mut chain = self.derivation(prov, var);
                chain.push(DerivationStep {
                    variable: var.clone(),
                    value: true,
                    provenance: why,
                });
                return Err(MapError::Contradiction {
                    variable: var.clone(),
                    chain,
                });
            }
            None => {}
        }
        prov.insert(var.clone(), (true, why.clone()));
        let Some(attr) = self.schema.attribute(&var.attribute) else {
            return Ok(());
        };
        if !attr.exclusive {
            return Ok(());
        }
        for other in attr.values.iter().filter(|o| **o != var.value) {
            let key = Variable::new(&attr.name, other);
            match prov.get(&key) {
                Some((true, _)) => {
                    let mut chain = self.derivation(prov, &key);
                    chain.extend(self.derivation(prov, var));
                    return Err(MapError::Contradiction {
                        variable: key,
                        chain,
                    });
                }
                Some((false, _)) => {}
                None => {
                    prov.insert(
                        key,
                        (false, Provenance::Exclusivity {
                            because: var.clone(),
                        }),
                    );
                }
            }
        }
        Ok(())
    }
}

impl Mapper<'_> {
    /// Derivation of one entry: the entry itself preceded by the derivations
    /// of whatever it depends on.
    fn derivation(
        &self,
        prov: &BTreeMap<Variable, (bool, Provenance)>,
        var: &Variable,
    ) -> Vec<DerivationStep> {
        let mut out = Vec::new();
        self.derive_into(prov, var, &mut BTreeSet::new(), &mut out);
        out
    }

    fn derive_into(
        &self,
        prov: &BTreeMap<Variable, (bool, Provenance)>,
        var: &Variable,
        seen: &mut BTreeSet<Variable>,
        out: &mut Vec<DerivationStep>,
    ) {
        if !seen.insert(var.clone()) {
            return;
        }
        let Some((value, p)) = prov.get(var) else {
            return;
        };
        match p {
            Provenance::Exclusivity { because } => self.derive_into(prov, because, seen, out),
            Provenance::Rule { rule } => {
                if let Some(r) = self.rules.rules().iter().find(|r| &r.name == rule) {
                    for a in &r.antecedents {
                        self.derive_into(prov, a, seen, out);
                    }
                }
            }
            Provenance::Prior | Provenance::Term { .. } => {}
        }
        out.push(DerivationStep {
            variable: var.clone(),
            value: *value,
            provenance: p.clone(),
        });
    }
}
