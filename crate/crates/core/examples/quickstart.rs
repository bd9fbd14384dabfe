use compound_returns::env::{exact_values, random_walk_19, EpisodeSampler};
use compound_returns::pilar::pilar_search;
use compound_returns::seed::rng_for;
use compound_returns::td::offline_episode_backup;
use compound_returns::variance::{compound_variance, nstep_variance};
use compound_returns::VarianceParams;

fn main() -> compound_returns::Result<()> {
    // the two-bootstrap return that tracks TD(λ) at effective n-step 3
    let pilar = pilar_search(3.0, 0.99)?;
    let w = pilar.weights()?;
    println!("n1 = {}, n2 = {}, c = {:.3}", pilar.n1, pilar.n2, pilar.c);

    // variance under independent unit-variance TD errors
    let p = VarianceParams::new(1.0, 0.0, 0.99)?;
    println!("{:.4} vs {:.4}", compound_variance(&w.cumulative(), &p), nstep_variance(3, &p));

    // offline learning on the 19-state random walk
    let mrp = random_walk_19();
    let truth = exact_values(&mrp, 1.0)?;
    let sampler = EpisodeSampler::new(&mrp);
    let mut rng = rng_for(0, 0);
    let mut values = vec![0.0; mrp.n_states()];
    for _ in 0..50 {
        let episode = sampler.episode(&mut rng, 10_000);
        values = offline_episode_backup(&values, &episode, &w, 1.0, 0.4)?;
    }
    println!("v(10) = {:.3}, true {:.3}", values[10], truth[10]);
    Ok(())
}
