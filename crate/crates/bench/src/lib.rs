//! Inputs shared by the benchmarks.

use personable_core::ingest::generate_synthetic;
use personable_core::ingest::synth::{random_assignment, rng};
use personable_core::{Assignment, InteractionProgram};

/// A synthetic site of `fanout^depth` leaves and a few assignments over it.
pub fn workload(depth: u32, fanout: u32) -> (InteractionProgram, Vec<Assignment>) {
    let seed = u64::from(depth) * 100 + u64::from(fanout);
    let p = generate_synthetic(depth, fanout, seed).expect("benchmark shapes stay under the size guard");
    let mut r = rng(seed);
    let assignments = (0..4).map(|_| random_assignment(&mut r, &p.schema)).collect();
    (p, assignments)
}
