use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use prmlearn::env::{shortest_path_policy, Environment, Policy};
use prmlearn::par;

fn rollouts(c: &mut Criterion) {
    let env = Environment::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/office.toml")).unwrap();
    let m = &env.nmdp;
    let policies = [
        ("shortest-path", shortest_path_policy(&env.map, &env.waypoints().unwrap()).unwrap()),
        ("uniform", Policy::uniform(m)),
    ];
    let episodes = 2000;
    let mut group = c.benchmark_group("rollouts");
    for (name, pi) in &policies {
        let run = |i: usize| {
            let mut rng = par::episode_rng(7, i as u64);
            m.rollout(pi, env.config.n_episode, &mut rng).unwrap().len()
        };
        group.bench_with_input(BenchmarkId::new("sequential", name), &episodes, |b, &n| {
            b.iter(|| black_box(par::map_range_seq(n, run)))
        });
        group.bench_with_input(BenchmarkId::new("parallel", name), &episodes, |b, &n| {
            b.iter(|| black_box(par::map_range(n, run)))
        });
    }
    group.finish();
}

criterion_group!(benches, rollouts);
criterion_main!(benches);
