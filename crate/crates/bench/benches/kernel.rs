use std::hint::black_box;

use criterion::{Criterion, criterion_group, criterion_main};

use prolong_core::coframe::{self, LiftedCoframe};
use prolong_core::covering::Covering;
use prolong_core::jet::JetContext;
use prolong_core::RationalExpr;

fn mkhz_covering(order: usize) -> Covering {
    let eq = coframe::mkhz_equation(order + 5).unwrap();
    let ctx = eq.ctx().clone();
    let j = |s: &str| RationalExpr::symbol(ctx.jet_by_name("u", s).unwrap());
    let v1 = RationalExpr::symbol(prolong_core::covering::family_symbol("v", 1));
    let a = &(&RationalExpr::ratio(1, 2) * &j("x").pow(2)) + &j("y");
    let seed = vec![&a * &v1, v1.clone(), &j("x") * &v1];
    Covering::family(eq, "v", 1, seed, order).unwrap()
}

fn flatness(c: &mut Criterion) {
    c.bench_function("mkhz flatness K=3", |b| {
        b.iter(|| black_box(mkhz_covering(3).flatness_check(3).unwrap().passed()))
    });
}

fn reduction(c: &mut Criterion) {
    let eq = coframe::mkhz_equation(6).unwrap();
    let ctx: &JetContext = eq.ctx();
    let e = ctx.total_derivative(&RationalExpr::symbol(ctx.jet_by_name("u", "yy").unwrap()), 2).unwrap();
    let e = ctx.total_derivative(&e, 0).unwrap();
    c.bench_function("reduce u_tyyy", |b| b.iter(|| black_box(eq.reduce(&e).unwrap())));
}

fn congruences(c: &mut Criterion) {
    let mut group = c.benchmark_group("coframe");
    group.sample_size(10);
    group.bench_function("n=2 congruences", |b| {
        b.iter(|| black_box(LiftedCoframe::standard(2).unwrap().structure_congruences()))
    });
    group.finish();
}

criterion_group!(benches, flatness, reduction, congruences);
criterion_main!(benches);
