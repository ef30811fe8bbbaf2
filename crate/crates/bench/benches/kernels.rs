use criterion::{criterion_group, criterion_main, Criterion};
use laxtower::context::{AlgebraContext, RMatrixKind};
use laxtower::fourier::FourierField;
use laxtower::functional::Functional;
use laxtower::hierarchy::{EvolveOptions, HierarchyName, HierarchySpec};
use laxtower::laurent::LaurentElement;
use laxtower::tower::BracketTower;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn setup() -> (AlgebraContext, LaurentElement, LaurentElement) {
    let ctx = AlgebraContext::with_caps(RMatrixKind::Benny, 20, -18, 14);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let u = ctx.random_element(&mut rng, -3, 2, 4, 1.0);
    let v = ctx.random_element(&mut rng, -3, 2, 4, 1.0);
    (ctx, u, v)
}

fn bench_multiply(c: &mut Criterion) {
    let (ctx, u, v) = setup();
    c.bench_function("laurent multiply (6 degrees, 4 modes)", |b| {
        b.iter(|| ctx.mul(black_box(&u), black_box(&v)).unwrap())
    });
}

fn bench_lie_bracket(c: &mut Criterion) {
    let (ctx, u, v) = setup();
    c.bench_function("lie bracket", |b| {
        b.iter(|| ctx.lie_bracket(black_box(&u), black_box(&v)).unwrap())
    });
}

fn bench_bracket_eval(c: &mut Criterion) {
    let tower = BracketTower::new(AlgebraContext::with_caps(RMatrixKind::Benny, 20, -18, 14));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let l = LaurentElement::from_pairs([
        (1, FourierField::constant(1.0)),
        (0, FourierField::random(&mut rng, 1, 0.3)),
        (-1, FourierField::random(&mut rng, 1, 0.3)),
    ]);
    let mut a = LaurentElement::zero();
    for d in -1..=1 {
        a.set_coeff(d, FourierField::random(&mut rng, 1, 1.0));
    }
    let f = Functional::linear(a.clone());
    let h = Functional::trace_monomial(3);
    c.bench_function("bracket eval n=3", |b| {
        b.iter(|| tower.bracket_n(&f, &h, black_box(&l), 3).unwrap())
    });
    c.bench_function("hamiltonian field n=2", |b| {
        b.iter(|| tower.ham_field(&h, black_box(&l), 2).unwrap())
    });
}

fn bench_rk4_step(c: &mut Criterion) {
    let spec = HierarchySpec::new(HierarchyName::Benny).with_mode_cap(32);
    let state = spec
        .state(vec![FourierField::sine(1, 0.1), FourierField::constant(1.0)])
        .unwrap();
    c.bench_function("rk4 evolve 10 steps (K=32)", |b| {
        b.iter(|| {
            let opts = EvolveOptions {
                flow_m: 2,
                dt: 1e-3,
                t_final: 1e-2,
                sample_every: 1_000_000,
                ..Default::default()
            };
            spec.evolve(black_box(&state), &opts).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_multiply,
    bench_lie_bracket,
    bench_bracket_eval,
    bench_rk4_step
);
criterion_main!(benches);
