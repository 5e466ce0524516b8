//! Domain theories: Horn rules over literals such as `selected(attr, value)`,
//! `provided(slot, value)` and `achieved(subgoal)`.
//!
//! Theory files are TOML:
//!
//! ```toml
//! top = "achieved(successful_interaction)"
//! user_specific = ["payment", "shipping"]   # slots never shared across users
//! rememberable = ["payment", "shipping"]    # slots kept by remembrance
//!
//! [[rules]]
//! name = "pay"
//! head = "achieved(payment)"
//! body = ["provided(payment, ?P)"]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use petgraph::algo::is_cyclic_directed;
use petgraph::graphmap::DiGraphMap;
use serde::{Deserialize, Serialize};

/// Predicate matched by click and out-of-turn events.
pub const SELECTED: &str = "selected";
/// Predicate matched by form-fill events.
pub const PROVIDED: &str = "provided";

pub fn is_event_predicate(p: &str) -> bool {
    p == SELECTED || p == PROVIDED
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn ground(predicate: &str, args: &[&str]) -> Self {
        Self {
            predicate: predicate.to_string(),
            args: args.iter().map(|a| Term::Const(a.to_string())).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn substitute(&self, bindings: &BTreeMap<String, String>) -> Literal {
        Literal {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => bindings
                        .get(v)
                        .map(|c| Term::Const(c.clone()))
                        .unwrap_or_else(|| t.clone()),
                    Term::Const(_) => t.clone(),
                })
                .collect(),
        }
    }

    /// Appends `suffix` to every variable name.
    pub fn rename(&self, suffix: &str) -> Literal {
        Literal {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => Term::Var(format!("{v}{suffix}")),
                    Term::Const(_) => t.clone(),
                })
                .collect(),
        }
    }

    /// The constant in argument position `i`, if any.
    pub fn const_arg(&self, i: usize) -> Option<&str> {
        match self.args.get(i) {
            Some(Term::Const(c)) => Some(c),
            _ => None,
        }
    }

    /// Shape used for the rule dependency graph: variables become `_`.
    fn key(&self) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(_) => "_".into(),
            })
            .collect();
        format!("{}({})", self.predicate, args.join(","))
    }
}

/// Extends `bindings` so that the two literals become equal.
pub fn unify(a: &Literal, b: &Literal, bindings: &mut BTreeMap<String, String>) -> bool {
    if a.predicate != b.predicate || a.args.len() != b.args.len() {
        return false;
    }
    let mut trial = bindings.clone();
    for (x, y) in a.args.iter().zip(&b.args) {
        let resolve = |t: &Term, bs: &BTreeMap<String, String>| match t {
            Term::Var(v) => bs.get(v).map(|c| Term::Const(c.clone())).unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        };
        match (resolve(x, &trial), resolve(y, &trial)) {
            (Term::Const(p), Term::Const(q)) => {
                if p != q {
                    return false;
                }
            }
            (Term::Var(v), Term::Const(c)) | (Term::Const(c), Term::Var(v)) => {
                trial.insert(v, c);
            }
            // Two unbound variables: leave both free.
            (Term::Var(_), Term::Var(_)) => {}
        }
    }
    *bindings = trial;
    true
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return f.write_str(&self.predicate);
        }
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed literal `{0}`")]
pub struct LiteralSyntaxError(pub String);

impl FromStr for Literal {
    type Err = LiteralSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LiteralSyntaxError(s.to_string());
        let s = s.trim();
        let (predicate, args) = match s.find('(') {
            None => (s, Vec::new()),
            Some(open) => {
                let inner = s[open + 1..].strip_suffix(')').ok_or_else(err)?;
                let args = inner
                    .split(',')
                    .map(|a| {
                        let a = a.trim().trim_matches('"');
                        match a.strip_prefix('?') {
                            Some("") => Err(err()),
                            Some(v) => Ok(Term::Var(v.to_string())),
                            None if a.is_empty() => Err(err()),
                            None => Ok(Term::Const(a.to_string())),
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (s[..open].trim(), args)
            }
        };
        let valid = !predicate.is_empty()
            && predicate
                .chars()
                .all(|c| c.is_alphanumeric() || c == '_' || c == '-');
        if !valid {
            return Err(err());
        }
        Ok(Literal {
            predicate: predicate.to_string(),
            args,
        })
    }
}

impl Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryRule {
    pub name: String,
    pub head: Literal,
    pub body: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TheoryFile {
    top: Literal,
    #[serde(default)]
    user_specific: Vec<String>,
    #[serde(default)]
    rememberable: Vec<String>,
    rules: Vec<TheoryRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum TheoryError {
    #[error("cannot parse theory: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("no rule concludes the top goal `{0}`")]
    NoTopRule(Literal),
    #[error("rule `{0}` concludes an event predicate")]
    EventHead(String),
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(String),
    #[error("theory rules form a cycle")]
    Cyclic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainTheory {
    pub top: Literal,
    pub rules: Vec<TheoryRule>,
    /// Slots whose values belong to one user and never transfer to others.
    pub user_specific: BTreeSet<String>,
    /// Slots that remembrance may store between sessions.
    pub rememberable: BTreeSet<String>,
}

impl DomainTheory {
    pub fn new(
        top: Literal,
        rules: Vec<TheoryRule>,
        user_specific: BTreeSet<String>,
        rememberable: BTreeSet<String>,
    ) -> Result<Self, TheoryError> {
        let mut names = BTreeSet::new();
        let mut graph: DiGraphMap<usize, ()> = DiGraphMap::new();
        let mut keys: BTreeMap<String, usize> = BTreeMap::new();
        let id = |k: String, keys: &mut BTreeMap<String, usize>| {
            let n = keys.len();
            *keys.entry(k).or_insert(n)
        };
        for r in &rules {
            if !names.insert(r.name.as_str()) {
                return Err(TheoryError::DuplicateRule(r.name.clone()));
            }
            if is_event_predicate(&r.head.predicate) {
                return Err(TheoryError::EventHead(r.name.clone()));
            }
            let h = id(r.head.key(), &mut keys);
            graph.add_node(h);
            for b in r.body.iter().filter(|b| !is_event_predicate(&b.predicate)) {
                let t = id(b.key(), &mut keys);
                graph.add_edge(h, t, ());
            }
        }
        if is_cyclic_directed(&graph) {
            return Err(TheoryError::Cyclic);
        }
        if !rules
            .iter()
            .any(|r| unify(&r.head.rename("#h"), &top, &mut BTreeMap::new()))
        {
            return Err(TheoryError::NoTopRule(top));
        }
        Ok(Self {
            top,
            rules,
            user_specific,
            rememberable,
        })
    }

    pub fn parse(text: &str) -> Result<Self, TheoryError> {
        let f: TheoryFile = toml::from_str(text)?;
        Self::new(
            f.top,
            f.rules,
            f.user_specific.into_iter().collect(),
            f.rememberable.into_iter().collect(),
        )
    }

    /// Slot names mentioned by `provided(...)` literals or slot metadata.
    pub fn slots(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .rules
            .iter()
            .flat_map(|r| r.body.iter())
            .filter(|l| l.predicate == PROVIDED)
            .filter_map(|l| l.const_arg(0).map(str::to_string))
            .collect();
        out.extend(self.user_specific.iter().cloned());
        out.extend(self.rememberable.iter().cloned());
        out
    }
}
