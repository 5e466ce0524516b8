//! Synthetic hierarchies and random inputs for tests and benchmarks.
//!
//! Everything here is deterministic for a given seed.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Assignment, Attribute, Catalog, Edge, InteractionProgram, Item, Node, Schema, Variable,
};

pub const MAX_SYNTHETIC_LEAVES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("{fanout}^{depth} leaves exceeds the limit of {MAX_SYNTHETIC_LEAVES}")]
    SizeLimitExceeded { depth: u32, fanout: u32 },
    #[error("depth and fanout must both be at least 1")]
    InvalidShape,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A complete tree with `fanout^depth` leaves. Each branch picks, at random,
/// an attribute not yet used on its path and `fanout` of that attribute's
/// values.
pub fn generate_synthetic(depth: u32, fanout: u32, seed: u64) -> Result<InteractionProgram, SynthError> {
    if depth == 0 || fanout == 0 {
        return Err(SynthError::InvalidShape);
    }
    if u64::from(fanout)
        .checked_pow(depth)
        .is_none_or(|n| n > MAX_SYNTHETIC_LEAVES)
    {
        return Err(SynthError::SizeLimitExceeded { depth, fanout });
    }

    let mut rng = rng(seed);
    let attrs: Vec<Attribute> = (0..depth)
        .map(|i| Attribute {
            name: format!("a{i}"),
            values: (0..fanout + 1).map(|j| format!("v{j}")).collect(),
            exclusive: true,
        })
        .collect();
    let schema = Schema::new(attrs);
    let mut counter = 0usize;
    let root = full_level(&schema, depth, fanout, &mut Vec::new(), &mut rng, &mut counter);
    Ok(InteractionProgram::new(schema, root))
}

fn full_level(
    schema: &Schema,
    remaining: u32,
    fanout: u32,
    used: &mut Vec<usize>,
    rng: &mut ChaCha8Rng,
    counter: &mut usize,
) -> Node {
    *counter += 1;
    let page = format!("p{}", *counter);
    if remaining == 0 {
        return Node::leaf(page.clone(), page);
    }
    let free: Vec<usize> = (0..schema.len()).filter(|i| !used.contains(i)).collect();
    let pick = *free.choose(rng).expect("depth never exceeds attribute count");
    let attr = schema.attributes().nth(pick).expect("index in range").clone();
    let mut values = attr.values.clone();
    values.shuffle(rng);
    values.truncate(fanout as usize);
    values.sort_by_key(|v| attr.values.iter().position(|x| x == v));
    used.push(pick);
    let edges = values
        .into_iter()
        .map(|value| {
            let child = full_level(schema, remaining - 1, fanout, used, rng, counter);
            Edge::new(Variable::new(&attr.name, &value), value, child)
        })
        .collect();
    used.pop();
    Node::branch(page, edges)
}

/// Shape bounds for [`random_program`].
#[derive(Debug, Clone, Copy)]
pub struct RandomShape {
    pub max_depth: usize,
    pub max_fanout: usize,
}

impl Default for RandomShape {
    fn default() -> Self {
        Self {
            max_depth: 5,
            max_fanout: 4,
        }
    }
}

/// An irregular valid program: branches mostly test one attribute, sometimes
/// mix attributes, paths may repeat a variable, and one attribute is
/// non-exclusive.
pub fn random_program(rng: &mut impl Rng, shape: RandomShape) -> InteractionProgram {
    let n_attrs = shape.max_depth + 2;
    let attrs: Vec<Attribute> = (0..n_attrs)
        .map(|i| Attribute {
            name: format!("a{i}"),
            values: (0..rng.random_range(2..=shape.max_fanout.max(2) + 1))
                .map(|j| format!("v{j}"))
                .collect(),
            exclusive: i + 1 != n_attrs,
        })
        .collect();
    let schema = Schema::new(attrs);
    let mut counter = 0;
    let depth = rng.random_range(1..=shape.max_depth);
    let root = random_node(&schema, depth, shape.max_fanout, &mut Vec::new(), rng, &mut counter, true);
    InteractionProgram::new(schema, root)
}

fn random_node(
    schema: &Schema,
    remaining: usize,
    fanout: usize,
    path: &mut Vec<Variable>,
    rng: &mut impl Rng,
    counter: &mut usize,
    is_root: bool,
) -> Node {
    *counter += 1;
    let page = format!("n{}", *counter);
    if remaining == 0 || (!is_root && rng.random_bool(0.2)) {
        return Node::leaf(page.clone(), page);
    }
    let attrs: Vec<&Attribute> = schema.attributes().collect();
    let main = attrs[rng.random_range(0..attrs.len())];
    let width = rng.random_range(1..=fanout);
    let mut vars: Vec<Variable> = Vec::new();
    for _ in 0..width * 2 {
        if vars.len() == width {
            break;
        }
        let attr = if rng.random_bool(0.8) {
            main
        } else {
            attrs[rng.random_range(0..attrs.len())]
        };
        // On an exclusive attribute already fixed on the path only the same
        // value keeps the path consistent.
        let fixed = path
            .iter()
            .find(|v| v.attribute == attr.name && attr.exclusive)
            .map(|v| v.value.clone());
        let value = fixed.unwrap_or_else(|| attr.values[rng.random_range(0..attr.values.len())].clone());
        let var = Variable::new(&attr.name, value);
        if !vars.contains(&var) {
            vars.push(var);
        }
    }
    let edges = vars
        .into_iter()
        .map(|var| {
            path.push(var.clone());
            let child = random_node(schema, remaining - 1, fanout, path, rng, counter, false);
            path.pop();
            let anchor = var.value.clone();
            Edge::new(var, anchor, child)
        })
        .collect();
    Node::branch(page, edges)
}

/// A random closed, consistent assignment over the program's schema.
pub fn random_assignment(rng: &mut impl Rng, schema: &Schema) -> Assignment {
    let mut a = Assignment::new();
    for attr in schema.attributes() {
        match rng.random_range(0..4) {
            0 | 1 => {}
            2 => {
                let v = &attr.values[rng.random_range(0..attr.values.len())];
                a.set(Variable::new(&attr.name, v), true);
            }
            _ => {
                for v in &attr.values {
                    if rng.random_bool(0.4) {
                        let value = !attr.exclusive && rng.random_bool(0.5);
                        a.set(Variable::new(&attr.name, v), value);
                    }
                }
            }
        }
    }
    a.closed(schema).expect("at most one true value per exclusive attribute")
}

/// Splits a closed assignment into two closed parts whose union is the
/// original.
pub fn random_split(rng: &mut impl Rng, schema: &Schema, a: &Assignment) -> (Assignment, Assignment) {
    let mut left = Assignment::new();
    let mut right = Assignment::new();
    for (var, value) in a.iter() {
        if rng.random_bool(0.5) {
            left.set(var.clone(), value);
        } else {
            right.set(var.clone(), value);
        }
    }
    let left = left.closed(schema).expect("subset of a consistent assignment");
    let right = right.closed(schema).expect("subset of a consistent assignment");
    (left, right)
}

/// A random catalog whose items are pairwise distinct on all attributes.
pub fn random_catalog(rng: &mut impl Rng, n_attrs: usize, max_values: usize, n_items: usize) -> Catalog {
    let attrs: Vec<Attribute> = (0..n_attrs)
        .map(|i| Attribute {
            name: format!("a{i}"),
            values: (0..rng.random_range(1..=max_values.max(1)))
                .map(|j| format!("v{j}"))
                .collect(),
            exclusive: true,
        })
        .collect();
    let schema = Schema::new(attrs);
    let mut seen = std::collections::BTreeSet::new();
    let mut items = Vec::new();
    for _ in 0..n_items * 4 {
        if items.len() == n_items {
            break;
        }
        let values: std::collections::BTreeMap<String, String> = schema
            .attributes()
            .map(|a| (a.name.clone(), a.values[rng.random_range(0..a.values.len())].clone()))
            .collect();
        if seen.insert(values.clone()) {
            items.push(Item {
                id: format!("item{}", items.len()),
                content: None,
                values,
            });
        }
    }
    Catalog::new(schema, items).expect("generated values come from the schema")
}
