use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use personable_bench::workload;
use personable_core::ebg::corpus::{random_corpus, Shopper};
use personable_core::ebg::{derive_templates, DeriveOptions};
use personable_core::ingest::synth::rng;
use personable_core::mapper::Mapper;
use personable_core::{fixtures, partial_evaluate, Assignment};
use std::hint::black_box;

fn partial_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("partial_evaluate");
    group.sample_size(10);
    for (depth, fanout) in [(3, 10), (4, 10), (5, 10)] {
        let (p, assignments) = workload(depth, fanout);
        group.throughput(Throughput::Elements(p.root.leaf_count() as u64));
        group.bench_with_input(BenchmarkId::new("random", p.root.leaf_count()), &p, |b, p| {
            b.iter(|| {
                for a in &assignments {
                    black_box(partial_evaluate(p, a).unwrap());
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("empty", p.root.leaf_count()), &p, |b, p| {
            b.iter(|| black_box(partial_evaluate(p, &Assignment::new()).unwrap()))
        });
    }
    group.finish();
}

fn term_mapping(c: &mut Criterion) {
    let site = fixtures::congress_site();
    let mapper = Mapper::new(site.schema(), &site.lexicon, &site.rules);
    c.bench_function("map_terms/congress", |b| {
        b.iter(|| black_box(mapper.map_terms(&["North Dakota", "Senior seat", "Republican"]).unwrap()))
    });
}

fn template_derivation(c: &mut Criterion) {
    let theory = fixtures::bookstore_theory();
    let base = fixtures::bookstore_site().program;
    let shoppers: Vec<Shopper> = ["linus", "ada", "grace", "alan"]
        .iter()
        .map(|u| Shopper {
            user: u.to_string(),
            slots: vec![("payment".into(), format!("{u}-card")), ("shipping".into(), "Fedex".into())],
        })
        .collect();
    let corpus = random_corpus(&mut rng(3), &base, &shoppers, 50);
    c.bench_function("derive_templates/bookstore-50", |b| {
        b.iter(|| black_box(derive_templates(&theory, &base, &corpus, DeriveOptions::default())))
    });
}

criterion_group!(benches, partial_evaluation, term_mapping, template_derivation);
criterion_main!(benches);
