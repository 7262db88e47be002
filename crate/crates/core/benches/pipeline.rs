//! Sequential vs rayon-parallel execution of the collection pipeline.
//!
//! Build without default features to see `Parallel` fall back to sequential:
//! `cargo bench -p mdsts-core --no-default-features`.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mdsts_core::synth::{generate, CorpusSpec, Generator};
use mdsts_core::{analyze_collection, entropy_vector, influence_map, Alphabet, AnalysisConfig, Execution, MultiSeries};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn corpus(entities: usize) -> Vec<MultiSeries> {
    generate(&CorpusSpec {
        entity_count: entities,
        component_count: 3,
        length: 585,
        generators: vec![
            Generator::Markov { bias: 0.95 },
            Generator::BurstySparse { zero_density: 0.6 },
            Generator::Markov { bias: 0.85 },
        ],
        seed: 1996,
    })
    .expect("valid corpus spec")
}

fn collection(c: &mut Criterion) {
    let config = AnalysisConfig { holdout_tail: 52, ..AnalysisConfig::default() };
    let mut group = c.benchmark_group("analyze_collection");
    group.sample_size(20);
    for n in [42, 336] {
        let entities = corpus(n);
        group.throughput(Throughput::Elements(n as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &entities, |b, e| {
                b.iter(|| analyze_collection(e, None, &config, exec).expect("analysis runs"))
            });
        }
    }
    group.finish();
}

fn simplex(c: &mut Criterion) {
    let alphabet = Alphabet::new(4).expect("valid alphabet");
    let vectors: Vec<_> =
        corpus(336).iter().map(|m| entropy_vector(m, alphabet, true).expect("entropy vector")).collect();
    let mut group = c.benchmark_group("influence_map");
    group.throughput(Throughput::Elements(vectors.len() as u64));
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| influence_map(&vectors, exec).expect("same dimension")));
    }
    group.finish();
}

criterion_group!(benches, collection, simplex);
criterion_main!(benches);
