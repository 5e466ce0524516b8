#![allow(dead_code)]

use std::collections::BTreeSet;

use personable_core::{Assignment, InteractionProgram, PageId, PathValuation, Variable};

/// Keeps only the entries of `valuation` whose variable `a` leaves open.
pub fn restrict(valuation: &Assignment, a: &Assignment) -> Assignment {
    valuation.iter().filter(|(v, _)| !a.is_decided(v)).map(|(v, b)| (v.clone(), b)).collect()
}

/// Brute-force leaf-set contract: the paths of `p` consistent with `a`, each
/// restricted to the variables `a` leaves open.
pub fn oracle_paths(p: &InteractionProgram, a: &Assignment) -> Vec<(PageId, Assignment)> {
    let mut out: Vec<(PageId, Assignment)> = p
        .enumerate_paths()
        .into_iter()
        .filter(|path| {
            path.valuation
                .iter()
                .all(|(v, b)| a.get(v).is_none_or(|x| x == b))
        })
        .map(|path| (path.leaf, restrict(&path.valuation, a)))
        .collect();
    out.sort();
    out
}

pub fn restricted_paths(paths: Vec<PathValuation>, a: &Assignment) -> Vec<(PageId, Assignment)> {
    let mut out: Vec<(PageId, Assignment)> = paths
        .into_iter()
        .map(|p| (p.leaf, restrict(&p.valuation, a)))
        .collect();
    out.sort();
    out
}

pub fn leaf_set(leaves: Vec<PageId>) -> BTreeSet<PageId> {
    leaves.into_iter().collect()
}

pub fn v(s: &str) -> Variable {
    s.parse().unwrap()
}
