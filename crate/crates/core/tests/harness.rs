mod common;

use common::{three_tables, two_tables};
use restaurant_pomdp::harness::{
    evaluate_with, paired_difference, replay_actions, run_summaries, EpisodeSummary, Execution,
};
use restaurant_pomdp::rng::stream;
use restaurant_pomdp::{belief_init, belief_step, run_episode, EpisodeTrace, MctsParams, Policy};

#[test]
fn replaying_actions_reproduces_the_trace() {
    let cfg = three_tables();
    for policy in [Policy::Random, Policy::Greedy, Policy::Fcfs] {
        for seed in 0..10 {
            let t = run_episode(&policy, &cfg, seed).unwrap();
            let r = replay_actions(&t.actions(), &cfg, seed).unwrap();
            assert_eq!(r.steps, t.steps);
            assert_eq!(r.final_state, t.final_state);
            assert_eq!(r.discounted_return, t.discounted_return);
        }
    }
}

#[test]
fn recorded_beliefs_match_an_offline_filter() {
    let cfg = three_tables();
    let t = run_episode(&Policy::Greedy, &cfg, 17).unwrap();
    let mut b = belief_init(&cfg);
    for s in &t.steps {
        b = belief_step(&b, s.action, s.duration, &s.observations, &cfg).unwrap();
        let got: Vec<Vec<f64>> = b.tables.iter().map(|tb| tb.satisfaction.clone()).collect();
        assert_eq!(got, s.beliefs);
    }
}

#[test]
fn return_is_discounted_sum_of_rewards() {
    let cfg = two_tables();
    let t = run_episode(&Policy::Random, &cfg, 2).unwrap();
    let mut g = 0.0;
    for s in &t.steps {
        g += cfg.gamma.powf(s.clock as f64) * s.reward;
        assert_eq!(s.discounted_return, g);
    }
    assert!((t.recompute_return() - t.discounted_return).abs() <= 1e-9);
    assert!(t.final_state.clock >= cfg.horizon || t.final_state.all_done());
}

#[test]
fn trace_survives_jsonl() {
    let cfg = three_tables();
    let t = run_episode(&Policy::Fcfs, &cfg, 5).unwrap();
    let mut buf = Vec::new();
    t.write_jsonl(&mut buf).unwrap();
    assert_eq!(
        buf.iter().filter(|&&c| c == b'\n').count(),
        t.steps.len() + 2
    );
    assert_eq!(EpisodeTrace::read_jsonl(buf.as_slice()).unwrap(), t);
}

#[test]
fn parallel_and_sequential_metrics_agree() {
    let cfg = two_tables();
    let mcts = Policy::Mcts(MctsParams {
        budget: 50,
        ..MctsParams::default()
    });
    for policy in [Policy::Random, Policy::Greedy, mcts] {
        let seq = evaluate_with(&policy, &cfg, 24, 100, Execution::Sequential).unwrap();
        let par = evaluate_with(&policy, &cfg, 24, 100, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.returns, par.returns);
    }
}

#[test]
fn metrics_conserve_episode_data() {
    let cfg = two_tables();
    let n = 40;
    let summaries = run_summaries(&Policy::Random, &cfg, n, 7, Execution::Sequential).unwrap();
    let m = evaluate_with(&Policy::Random, &cfg, n, 7, Execution::Sequential).unwrap();
    assert_eq!(m.episodes, n);
    assert_eq!(m.returns.len(), n);
    let seeds: Vec<u64> = summaries.iter().map(|s| s.seed).collect();
    assert_eq!(seeds, (7..7 + n as u64).collect::<Vec<_>>());
    let total: f64 = summaries.iter().map(|s| s.discounted_return).sum();
    assert!((m.mean_return * n as f64 - total).abs() <= 1e-9 * total.abs().max(1.0));
    assert!((m.std_error - m.std_return / (n as f64).sqrt()).abs() <= 1e-12);
    assert!((0.0..=1.0).contains(&m.completion_rate));
    for (i, &mean) in m.mean_final_satisfaction.iter().enumerate() {
        let want = summaries
            .iter()
            .map(|s| f64::from(s.final_satisfaction[i]))
            .sum::<f64>()
            / n as f64;
        assert!((mean - want).abs() <= 1e-12);
    }
    let single: Vec<EpisodeSummary> = (0..n as u64)
        .map(|k| EpisodeSummary::from(&run_episode(&Policy::Random, &cfg, 7 + k).unwrap()))
        .collect();
    assert_eq!(single, summaries);
}

#[test]
fn paired_difference_of_identical_runs_is_zero() {
    let cfg = two_tables();
    let a = evaluate_with(&Policy::Greedy, &cfg, 10, 0, Execution::Sequential).unwrap();
    assert_eq!(paired_difference(&a.returns, &a.returns), (0.0, 0.0));
}

#[test]
fn seeds_are_independent_streams() {
    let a: Vec<u32> = (0..4)
        .map(|_| rand::Rng::random(&mut stream(1, 1)))
        .collect();
    assert!(a.windows(2).all(|w| w[0] == w[1]));
    let x: u64 = rand::Rng::random(&mut stream(1, 1));
    let y: u64 = rand::Rng::random(&mut stream(1, 2));
    assert_ne!(x, y);
}
