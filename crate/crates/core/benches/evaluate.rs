use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use restaurant_pomdp::harness::{evaluate_with, Execution};
use restaurant_pomdp::{MctsParams, Policy, RestaurantConfig};

fn config() -> RestaurantConfig {
    RestaurantConfig::three_tables()
        .with_overrides(&["n_tables=2", "horizon=60"])
        .unwrap()
}

fn bench_execution(c: &mut Criterion) {
    let cfg = config();
    let policies = [
        Policy::Greedy,
        Policy::Mcts(MctsParams {
            budget: 100,
            ..MctsParams::default()
        }),
    ];
    let mut group = c.benchmark_group("evaluate_32_episodes");
    group.sample_size(10);
    for policy in &policies {
        for (label, exec) in [
            ("sequential", Execution::Sequential),
            ("parallel", Execution::Parallel),
        ] {
            group.bench_with_input(BenchmarkId::new(label, policy.name()), policy, |b, p| {
                b.iter(|| evaluate_with(p, &cfg, 32, 0, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    use restaurant_pomdp::belief_init;
    use restaurant_pomdp::rng::stream;
    let cfg = config();
    let b = belief_init(&cfg);
    let mcts = Policy::Mcts(MctsParams::default());
    c.bench_function("mcts_1000_sims", |bench| {
        let mut rng = stream(0, 2);
        bench.iter(|| mcts.act(&b, &cfg, &mut rng).unwrap())
    });
}

criterion_group!(benches, bench_execution, bench_step);
criterion_main!(benches);
