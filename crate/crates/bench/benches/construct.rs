use criterion::{criterion_group, criterion_main, Criterion};
use gal_bench::{elementary, pauli_assoc, type_two};
use gal_core::artifact::{verify_artifact, Artifact};
use gal_core::lie::verify_lie;
use gal_core::{build, census, decide, default_field, verify_witness, FinAbGroup, Kind};
use std::hint::black_box;

fn construction(c: &mut Criterion) {
    let (p, f) = pauli_assoc(6);
    c.bench_function("build assoc pauli n=12", |b| b.iter(|| build(black_box(&p), &f).unwrap()));
    let real = build(&p, &f).unwrap();
    c.bench_function("verify grading pauli n=12", |b| b.iter(|| real.ambient().verify()));

    let (p, f) = elementary(4, 3, Kind::So);
    c.bench_function("build so Z4 n=12", |b| b.iter(|| build(black_box(&p), &f).unwrap()));

    let (p, f) = type_two(8);
    c.bench_function("build sl-II n=8", |b| b.iter(|| build(black_box(&p), &f).unwrap()));
    let l = build(&p, &f).unwrap().lie().unwrap().clone();
    c.bench_function("verify lie sl-II n=8", |b| b.iter(|| verify_lie(black_box(&l))));
}

fn decision(c: &mut Criterion) {
    let (p, f) = elementary(4, 2, Kind::SlI);
    let q = p.reverse().unwrap().transform(1, &f).unwrap();
    c.bench_function("decide sl-I with reversal", |b| b.iter(|| decide(black_box(&p), &q, &f).unwrap()));
    let d = decide(&p, &q, &f).unwrap();
    c.bench_function("verify witness sl-I", |b| b.iter(|| verify_witness(&p, &q, &d, &f).unwrap()));

    let g = FinAbGroup::new(&[2, 2]).unwrap();
    let fg = default_field(&g, None).unwrap();
    c.bench_function("census so Z2xZ2 n<=4", |b| b.iter(|| census(&g, Kind::So, 4, &fg).unwrap()));
}

fn artifacts(c: &mut Criterion) {
    let (p, f) = type_two(6);
    let a = Artifact::from_realization(&p, &build(&p, &f).unwrap(), &f, false);
    let text = a.to_json();
    c.bench_function("artifact parse", |b| b.iter(|| Artifact::from_json(black_box(&text)).unwrap()));
    c.bench_function("artifact verify sl-II n=6", |b| b.iter(|| verify_artifact(&a, false).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = construction, decision, artifacts
}
criterion_main!(benches);
