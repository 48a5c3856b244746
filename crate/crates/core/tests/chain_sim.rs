use catrep::analytic::{link_success_probability, link_time, LinkParams};
use catrep::chain_sim::{sample_link_time, simulate_chain, ChainConfig, StageProbabilities, SwapCost};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn operating_point() -> LinkParams<f64> {
    LinkParams::<f64>::new(0.13, 0.16, 150.0).with_efficiencies(0.9, 0.9)
}

/// Tap chosen so that `P0 = target` at the given amplitude and lengths, by bisection.
fn link_with_p0(target: f64) -> LinkParams<f64> {
    let base = LinkParams::<f64>::new(0.3, 0.1, 100.0).with_efficiencies(1.0, 0.9);
    let (mut lo, mut hi) = (1e-6, 0.5);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if link_success_probability(&base.with_tap(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    base.with_tap(0.5 * (lo + hi))
}

#[test]
fn link_time_moments_match_geometric_law() {
    let p = link_with_p0(0.01);
    let p0 = link_success_probability(&p);
    assert!((p0 - 0.01).abs() < 1e-9);
    let tau = p.round_time();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let samples: Vec<f64> = (0..n).map(|_| sample_link_time(&p, &mut rng)).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean / link_time(&p) - 1.0).abs() < 0.02);
    // attempts ~ Geometric(p0) on {1, 2, ...}: variance (1 - p0) / p0^2 rounds^2
    let expect_var = (1.0 - p0) / (p0 * p0) * tau * tau;
    assert!((var / expect_var - 1.0).abs() < 0.05, "{var} vs {expect_var}");
    assert!(samples.iter().all(|&t| t >= tau));
}

#[test]
fn certain_link_takes_one_round() {
    let p = operating_point();
    let mut c = ChainConfig::new(p, 2, 100, 9);
    c.postselection = false;
    c.keep_records = true;
    c.stages = Some(StageProbabilities { p0: 1.0, swaps: vec![1.0], p_ps: None });
    let r = simulate_chain(&c).unwrap();
    assert!(r.records.unwrap().iter().all(|t| t.rounds == 1 && t.total_time == p.round_time()));
    assert!((r.mean_time / p.round_time() - 1.0).abs() < 1e-12);
}

#[test]
fn two_links_wait_for_the_slower() {
    let p = operating_point();
    let mut c = ChainConfig::new(p, 2, 20_000, 77);
    c.postselection = false;
    c.stages = Some(StageProbabilities { p0: 0.01, swaps: vec![1.0], p_ps: None });
    let r = simulate_chain(&c).unwrap();
    let target = 1.5 * p.round_time() / 0.01;
    assert!(r.within_sigma(target, 3.0), "mean {} vs {target} (se {})", r.mean_time, r.std_error);
    // exact mean of the larger of two geometrics: (3 - 2p) / (p (2 - p)) rounds
    let exact = (3.0 - 0.02) / (0.01 * 1.99) * p.round_time();
    assert!(r.within_sigma(exact, 3.0));
}

#[test]
fn failed_swaps_restart_both_links() {
    // one link round per attempt, swap succeeds with 1/4: rounds ~ Geometric(1/4), mean 4
    let p = operating_point();
    let mut c = ChainConfig::new(p, 2, 20_000, 1);
    c.postselection = false;
    c.stages = Some(StageProbabilities { p0: 1.0, swaps: vec![0.25], p_ps: None });
    let r = simulate_chain(&c).unwrap();
    assert!(r.within_sigma(4.0 * p.round_time(), 3.0));
    c.swap_cost = SwapCost::Heralded;
    let r = simulate_chain(&c).unwrap();
    assert!(r.within_sigma(8.0 * p.round_time(), 3.0));
}

#[test]
fn four_link_operating_point() {
    let c = ChainConfig::new(operating_point(), 4, 20_000, 42);
    let r = simulate_chain(&c).unwrap();
    let analytic = r.analytic.as_ref().unwrap().total_time;
    assert!((r.mean_time / analytic - 1.0).abs() < 0.3, "{} vs {analytic}", r.mean_time);
    assert!((r.mean_time / 23.0 - 1.0).abs() < 0.25, "{}", r.mean_time);
    assert!(r.final_fidelity > 0.9);
    assert!(r.quantile(0.5) < r.quantile(0.9));
}

#[test]
fn parallel_runs_are_bitwise_stable() {
    let c = ChainConfig::new(operating_point(), 4, 500, 5);
    let a = simulate_chain(&c).unwrap();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| simulate_chain(&c).unwrap());
    assert_eq!(a.times, b.times);
    assert_eq!(a.mean_time.to_bits(), b.mean_time.to_bits());
}
