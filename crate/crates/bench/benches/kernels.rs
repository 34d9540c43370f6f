use std::hint::black_box;
use std::sync::Arc;

use cfree_core::analytic::{h_tilde, TwoStateElement};
use cfree_core::embeddings::{embed_cfree, embed_free, OperatorPair};
use cfree_core::random::{random_pair, trial_rng};
use cfree_core::series::{cfree_r_transform, k_series, series_from_moments, StateSide};
use cfree_core::spaces::{build_product_basis, BasisSide, FourSpaces, Index, ProductBasis};
use cfree_core::states::{alternating_word_vector, moment_data, psi_center};
use cfree_core::Complex64;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn spaces() -> FourSpaces {
    FourSpaces::from_dims([3, 3, 3, 3]).unwrap()
}

fn basis(depth: usize, side: BasisSide) -> Arc<ProductBasis> {
    Arc::new(build_product_basis(spaces(), depth, side))
}

fn bench_basis(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_product_basis");
    for depth in [4, 6, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| build_product_basis(spaces(), black_box(d), BasisSide::H))
        });
    }
    group.finish();
}

fn bench_embed(c: &mut Criterion) {
    let mut group = c.benchmark_group("embed_cfree");
    let pair = random_pair(Index::Alpha, &spaces(), &mut trial_rng(0, 0));
    for depth in [4, 6, 8] {
        let hb = basis(depth, BasisSide::H);
        group.bench_with_input(BenchmarkId::from_parameter(depth), &hb, |b, hb| {
            b.iter(|| embed_cfree(black_box(&pair), hb).unwrap())
        });
    }
    group.finish();
}

fn bench_word_vector(c: &mut Criterion) {
    let hb = basis(6, BasisSide::H);
    let rng = &mut trial_rng(0, 1);
    let pairs: Vec<OperatorPair> = (0..5)
        .map(|i| {
            let index = if i % 2 == 0 { Index::Alpha } else { Index::Beta };
            psi_center(&random_pair(index, &spaces(), rng))
        })
        .collect();
    let ops: Vec<_> = pairs.iter().map(|p| embed_cfree(p, &hb).unwrap()).collect();
    let mut group = c.benchmark_group("alternating_word_len5");
    group.bench_function("closed_form", |b| b.iter(|| alternating_word_vector(black_box(&pairs), &hb).unwrap()));
    group.bench_function("matrix_application", |b| {
        b.iter(|| {
            let mut v = hb.distinguished_vector();
            for op in &ops {
                v = op.apply(&v).unwrap();
            }
            v
        })
    });
    group.finish();
}

fn bench_transforms(c: &mut Criterion) {
    let depth = 8;
    let (hb, kb) = (basis(depth, BasisSide::H), basis(depth, BasisSide::K));
    let pair = random_pair(Index::Alpha, &spaces(), &mut trial_rng(0, 2));
    let elem = TwoStateElement::from_cfree_pair(&pair, &hb, &kb).unwrap();
    let t = Complex64::new(0.1, 0.05);
    c.bench_function("h_tilde_resolvent_depth8", |b| b.iter(|| h_tilde(&elem, black_box(t)).unwrap()));

    let m = moment_data(&embed_cfree(&pair, &hb).unwrap(), &embed_free(&pair.s, Index::Alpha, &kb).unwrap(), depth).unwrap();
    let k = k_series(&series_from_moments(&m, StateSide::Psi));
    c.bench_function("compositional_inverse_order8", |b| b.iter(|| black_box(&k).compositional_inverse().unwrap()));
    c.bench_function("cfree_r_transform_order8", |b| b.iter(|| cfree_r_transform(black_box(&m)).unwrap()));
}

criterion_group!(benches, bench_basis, bench_embed, bench_word_vector, bench_transforms);
criterion_main!(benches);
