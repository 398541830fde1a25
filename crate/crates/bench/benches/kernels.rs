use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use biharm::certificates::{verify_qgrad_bound, FyRange};
use biharm::dynamics::{integrate_orbit, rhs, seed_unstable};
use biharm::flow::{cubic_initial_data, flow_rhs, init_flow, step, FlowOptions};
use biharm::maps::{bi_energy, bubble, construct_map, Domain};
use biharm::reduction::{reduced_rhs_numeric, FdOrder, closed_rhs_on_grid};
use biharm::{FlowParams, Parity, RadialGrid, RadialProfile};

fn ode(c: &mut Criterion) {
    let phi = [0.3, -0.2, 0.7, 1.1];
    c.bench_function("rhs", |b| b.iter(|| rhs(black_box(&phi))));
    let seed = seed_unstable(1e-4, 9e-4).unwrap();
    c.bench_function("orbit to blowup", |b| b.iter(|| integrate_orbit(black_box(seed), 60.0, 1e-10).unwrap()));
    c.bench_function("construct_map(10)", |b| b.iter(|| construct_map(black_box(10.0)).unwrap()));
}

fn reduction(c: &mut Criterion) {
    let psi = RadialProfile::from_fn(RadialGrid::uniform(257, 1.0).unwrap(), |r| 2.0 * r.atan(), Parity::Odd).unwrap();
    c.bench_function("nested reduction 257", |b| b.iter(|| reduced_rhs_numeric(black_box(&psi), FlowParams::biharmonic()).unwrap()));
    c.bench_function("closed form 257", |b| b.iter(|| closed_rhs_on_grid(black_box(&psi), 4, FdOrder::Second).unwrap()));
}

fn pde(c: &mut Criterion) {
    let (p, s) = cubic_initial_data(257, 0.3, 0.5).unwrap();
    let st = init_flow(&p, s, 0.3, 0.5, 4).unwrap();
    let v = st.values().to_vec();
    c.bench_function("flow rhs 257", |b| b.iter(|| flow_rhs(black_box(&v), 0.5, 1.0 / 256.0, 4)));
    let implicit = FlowOptions { fixed_dt: Some(1e-4), ..FlowOptions::default() };
    c.bench_function("implicit step 257", |b| b.iter(|| step(black_box(&st), &implicit).unwrap()));
    c.bench_function("explicit step 257", |b| b.iter(|| step(black_box(&st), &FlowOptions::explicit()).unwrap()));
}

fn quadrature(c: &mut Criterion) {
    let b1 = bubble(1.0, RadialGrid::uniform(33, 1.0).unwrap()).unwrap();
    c.bench_function("bubble energy all space", |b| b.iter(|| bi_energy(black_box(&b1), Domain::AllSpace, 1e-10).unwrap()));
    c.bench_function("qgrad 1e4 x 1e2", |b| b.iter(|| verify_qgrad_bound(10_000, 100, FyRange::Tight).unwrap()));
}

criterion_group!(benches, ode, reduction, pde, quadrature);
criterion_main!(benches);
