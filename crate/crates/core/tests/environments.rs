use compound_returns::env::{
    exact_values, gridworld_10x8, gridworld_4x3, parse_mrp, random_ergodic_mrp, random_walk_19, sample_episode,
    visit_distribution, write_mrp, EpisodeSampler, TabularMRP,
};
use compound_returns::seed::rng_for;
use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent solver: Jacobi value iteration to a fixed point.
fn value_iteration(mrp: &TabularMRP, gamma: f64) -> DVector<f64> {
    let step = mrp.value_dynamics() * gamma;
    let r = mrp.expected_rewards();
    let mut v = DVector::zeros(mrp.n_states());
    for _ in 0..1_000_000 {
        let next = &r + &step * &v;
        let change = (&next - &v).amax();
        v = next;
        if change < 1e-15 {
            break;
        }
    }
    v
}

fn benchmarks() -> Vec<(&'static str, TabularMRP, f64)> {
    vec![
        ("rw19", random_walk_19(), 1.0),
        ("grid4x3", gridworld_4x3(), 1.0),
        ("grid10x8", gridworld_10x8(), 0.99),
    ]
}

#[test]
fn linear_solve_matches_value_iteration() {
    for (name, mrp, gamma) in benchmarks() {
        let exact = exact_values(&mrp, gamma).unwrap();
        let iterated = value_iteration(&mrp, gamma);
        let gap = (&exact - &iterated).amax();
        assert!(gap < 1e-10, "{name}: solvers differ by {gap:e}");
    }
}

#[test]
fn bellman_residual_is_negligible() {
    for (name, mrp, gamma) in benchmarks() {
        let v = exact_values(&mrp, gamma).unwrap();
        let residual = (mrp.expected_rewards() + mrp.value_dynamics() * &v * gamma - &v).amax();
        assert!(residual < 1e-10, "{name}: residual {residual:e}");
    }
}

#[test]
fn random_walk_values_are_linear() {
    let v = exact_values(&random_walk_19(), 1.0).unwrap();
    for i in 1..=19 {
        assert!((v[i] - (i as f64 / 10.0 - 1.0)).abs() < 1e-12, "state {i}: {}", v[i]);
    }
    assert_eq!(v[0], 0.0);
    assert_eq!(v[20], 0.0);
}

#[test]
fn sparse_grid_values_are_positive_where_goal_is_reachable() {
    let mrp = gridworld_10x8();
    let v = exact_values(&mrp, 0.99).unwrap();
    assert!((0..mrp.n_states()).filter(|&s| !mrp.is_terminal(s)).all(|s| v[s] > 0.0));
}

#[test]
fn random_walk_episode_length_matches_absorption_time() {
    let mrp = random_walk_19();
    // expected steps to absorption: (I − P̃) t = 1 on non-terminal states
    let n = mrp.n_states();
    let mut ones = DVector::from_element(n, 1.0);
    for s in mrp.terminals().collect::<Vec<_>>() {
        ones[s] = 0.0;
    }
    let t = (DMatrix::identity(n, n) - mrp.value_dynamics())
        .lu()
        .solve(&ones)
        .unwrap();
    let expected = t[10];
    assert!((expected - 100.0).abs() < 1e-9, "analytic absorption time {expected}");

    let episodes = 10_000;
    let lengths: Vec<f64> = (0..episodes)
        .map(|k| {
            let traj = sample_episode(&mrp, 1000 + k, 1_000_000).unwrap();
            assert!(traj.terminated());
            traj.len() as f64
        })
        .collect();
    let mean = lengths.iter().sum::<f64>() / episodes as f64;
    let var = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (episodes as f64 - 1.0);
    let se = (var / episodes as f64).sqrt();
    assert!(
        (mean - expected).abs() < 4.0 * se,
        "mean length {mean}, expected {expected}, se {se}"
    );
}

#[test]
fn terminated_flag_tracks_last_state() {
    let mrp = gridworld_4x3();
    for seed in 0..200 {
        let traj = sample_episode(&mrp, seed, 15).unwrap();
        let last = *traj.states().last().unwrap();
        assert_eq!(traj.terminated(), mrp.is_terminal(last));
        assert!(traj.len() <= 15);
    }
}

#[test]
fn stationary_distribution_matches_long_run_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mrp = random_ergodic_mrp(6, &mut rng);
    let model = visit_distribution(&mrp).unwrap();
    let d = model.d();
    assert!((d.sum() - 1.0).abs() < 1e-12);
    let p = mrp.restart_chain();
    let rows: Vec<_> = (0..6)
        .map(|s| WeightedIndex::new(p.row(s).iter().copied()).unwrap())
        .collect();
    let mut counts = [0usize; 6];
    let mut s = 0;
    let steps = 1_000_000;
    let mut sim = rng_for(7, 0);
    for _ in 0..steps {
        s = rows[s].sample(&mut sim);
        counts[s] += 1;
    }
    for (state, &count) in counts.iter().enumerate() {
        let freq = count as f64 / steps as f64;
        assert!((freq - d[state]).abs() < 1e-3, "state {state}: {freq} vs {}", d[state]);
    }
}

#[test]
fn episodic_visit_distribution_uses_restarts() {
    let mrp = random_walk_19();
    let model = visit_distribution(&mrp).unwrap();
    // expected visits per episode from the center are min(k, 20 − k), plus one
    // step spent in whichever terminal ends the episode
    let total = 100.0 + 1.0;
    for k in 1..20 {
        let expected = k.min(20 - k) as f64 / total;
        assert!((model.d()[k] - expected).abs() < 1e-12, "state {k}");
    }
    assert!((model.d()[0] + model.d()[20] - 1.0 / total).abs() < 1e-12);
}

#[test]
fn text_format_round_trips_every_benchmark() {
    for (name, mrp, _) in benchmarks() {
        let text = write_mrp(&mrp);
        assert_eq!(parse_mrp(&text).unwrap(), mrp, "{name}");
        assert_eq!(write_mrp(&parse_mrp(&text).unwrap()), text, "{name}");
    }
}

#[test]
fn random_walk_golden_file() {
    let golden = include_str!("golden/random_walk_19.mrp");
    assert_eq!(write_mrp(&random_walk_19()), golden);
}

#[test]
fn sampler_shares_streams_between_copies() {
    let mrp = gridworld_10x8();
    let sampler = EpisodeSampler::new(&mrp);
    let a = sampler.episode(&mut rng_for(5, 9), 200);
    let b = EpisodeSampler::new(&mrp).episode(&mut rng_for(5, 9), 200);
    assert_eq!(a, b);
}
