//! Benchmarks along the whole pipeline: parsing, typechecking,
//! elaboration, evaluation, and the relation primitives they lean on.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use gradsum_core::elaborate::{elaborate, Mode};
use gradsum_core::harness::{enum_exprs, enum_types};
use gradsum_core::target::evaluate;
use gradsum_core::typecheck::synth;
use gradsum_core::{dcons, parse_expr, subtype, type_precision, Ctx, Type};

/// The four-way migration example: a committed consumer applied to a
/// still-unknown producer, so elaboration must insert a cast.
const MIGRATION: &str = "((fn y => case y of inj2 z => z) : (Unit +2 Unit) -> Unit) \
                         ((inj2 ()) : (Unit +? Unit))";

/// A deeper program exercising arrows, both case forms, and several
/// distinct coercion sites.
const LAYERED: &str = "((fn f => ((fn p => case p of inj1 a => f a | inj2 b => inj2 b) \
                       : (Unit +? Unit) -> (Unit +? Unit)) ((inj1 ()) : (Unit +? Unit))) \
                       : (Unit -> (Unit +*1 Unit)) -> (Unit +? Unit)) \
                       ((fn u => inj1 u) : Unit -> (Unit +1 Unit))";

fn sample_types(depth: usize) -> Vec<Type> {
    enum_types(depth).types
}

fn bench_relations(c: &mut Criterion) {
    let types = sample_types(2);
    let mut g = c.benchmark_group("relations");
    g.bench_function("dcons-all-pairs-depth2", |b| {
        b.iter(|| {
            let mut hits = 0u32;
            for a in &types {
                for t in &types {
                    if dcons(black_box(a), black_box(t)) {
                        hits += 1;
                    }
                }
            }
            hits
        })
    });
    g.bench_function("subtype-all-pairs-depth2", |b| {
        b.iter(|| {
            let mut hits = 0u32;
            for a in &types {
                for t in &types {
                    if subtype(black_box(a), black_box(t)) {
                        hits += 1;
                    }
                }
            }
            hits
        })
    });
    g.bench_function("precision-all-pairs-depth2", |b| {
        b.iter(|| {
            let mut hits = 0u32;
            for a in &types {
                for t in &types {
                    if type_precision(black_box(a), black_box(t)) {
                        hits += 1;
                    }
                }
            }
            hits
        })
    });
    g.finish();
}

fn bench_syntax(c: &mut Criterion) {
    let mut g = c.benchmark_group("syntax");
    g.bench_function("parse-migration", |b| {
        b.iter(|| parse_expr(black_box(MIGRATION)).unwrap())
    });
    let parsed = parse_expr(LAYERED).unwrap();
    g.bench_function("print-layered", |b| {
        b.iter(|| black_box(&parsed).to_string())
    });
    let printed = parsed.to_string();
    g.bench_function("reparse-layered", |b| {
        b.iter(|| parse_expr(black_box(&printed)).unwrap())
    });
    g.finish();
}

fn bench_typecheck(c: &mut Criterion) {
    let migration = parse_expr(MIGRATION).unwrap();
    let layered = parse_expr(LAYERED).unwrap();
    let mut g = c.benchmark_group("typecheck");
    g.bench_function("synth-migration", |b| {
        b.iter(|| synth(&Ctx::empty(), black_box(&migration)).unwrap())
    });
    g.bench_function("synth-layered", |b| {
        b.iter(|| synth(&Ctx::empty(), black_box(&layered)).unwrap())
    });
    g.finish();
}

fn bench_elaborate_and_run(c: &mut Criterion) {
    let layered = parse_expr(LAYERED).unwrap();
    let derivation = synth(&Ctx::empty(), &layered).unwrap();
    let mut g = c.benchmark_group("pipeline");
    g.bench_function("elaborate-standard", |b| {
        b.iter(|| elaborate(black_box(&derivation), Mode::Standard))
    });
    g.bench_function("elaborate-saturating", |b| {
        b.iter(|| elaborate(black_box(&derivation), Mode::Saturating))
    });
    let standard = elaborate(&derivation, Mode::Standard);
    let saturated = elaborate(&derivation, Mode::Saturating);
    g.bench_function("evaluate-standard", |b| {
        b.iter(|| evaluate(black_box(&standard), 10_000, false))
    });
    g.bench_function("evaluate-saturating", |b| {
        b.iter(|| evaluate(black_box(&saturated), 10_000, false))
    });
    g.bench_function("parse-to-value", |b| {
        b.iter(|| {
            let e = parse_expr(black_box(LAYERED)).unwrap();
            let d = synth(&Ctx::empty(), &e).unwrap();
            let m = elaborate(&d, Mode::Standard);
            evaluate(&m, 10_000, false)
        })
    });
    g.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let annos = sample_types(1);
    let mut g = c.benchmark_group("enumeration");
    g.bench_function("types-depth2", |b| b.iter(|| enum_types(black_box(2))));
    g.bench_function("exprs-size4-closed", |b| {
        b.iter(|| enum_exprs(&Ctx::empty(), black_box(4), black_box(&annos)))
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_relations,
    bench_syntax,
    bench_typecheck,
    bench_elaborate_and_run,
    bench_enumeration
);
criterion_main!(benches);
