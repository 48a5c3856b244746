//! Monte Carlo timing of nested repeater chains.
//!
//! Every elementary link retries once per round `L0/c` until it heralds. A swap waits for
//! both of its segments, succeeds with the level's probability and otherwise throws both
//! segments away. Postselection does the same with two complete chains. Fidelities are not
//! sampled: they follow the analytic state maps, which are identical for every trial.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    chain_report, link_state, link_success_probability, swap_stage, ChainModel, LinkParams, MixedLinkState, RateReport,
    SwapAcceptance,
};
use crate::error::{check_range, Error, Result};

/// Classical cost of heralding a swap or postselection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapCost {
    /// Swaps are instantaneous.
    #[default]
    Free,
    /// A level-`k` swap costs `2^(k-1)` rounds (the signal travels from the middle station
    /// to the segment ends); postselection costs `n_links` rounds (end-to-end exchange).
    Heralded,
}

/// Success probabilities of every stage, bypassing the physics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageProbabilities {
    pub p0: f64,
    /// One entry per swap level.
    pub swaps: Vec<f64>,
    pub p_ps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_links: usize,
    pub link: LinkParams<f64>,
    pub n_trials: usize,
    pub rng_seed: u64,
    pub postselection: bool,
    pub acceptance: SwapAcceptance,
    pub swap_cost: SwapCost,
    /// Use these probabilities instead of the analytic ones.
    pub stages: Option<StageProbabilities>,
    /// Keep every [`TrialRecord`] in the report.
    pub keep_records: bool,
}

impl ChainConfig {
    pub fn new(link: LinkParams<f64>, n_links: usize, n_trials: usize, rng_seed: u64) -> Self {
        Self {
            n_links,
            link,
            n_trials,
            rng_seed,
            postselection: true,
            acceptance: SwapAcceptance::OddOnly,
            swap_cost: SwapCost::Free,
            stages: None,
            keep_records: false,
        }
    }

    pub fn model(&self) -> ChainModel {
        ChainModel { n_links: self.n_links, postselection: self.postselection, acceptance: self.acceptance }
    }

    pub fn validate(&self) -> Result<()> {
        let levels = self.model().levels()?;
        self.link.validate()?;
        if self.n_trials == 0 {
            return Err(Error::InvalidParameter { name: "n_trials", value: 0.0, reason: "need at least one trial" });
        }
        if let Some(s) = &self.stages {
            check_probability("p0", s.p0)?;
            if s.swaps.len() != levels as usize {
                return Err(Error::InvalidParameter {
                    name: "swaps",
                    value: s.swaps.len() as f64,
                    reason: "need one swap probability per nesting level",
                });
            }
            for &p in &s.swaps {
                check_probability("swap probability", p)?;
            }
            match (self.postselection, s.p_ps) {
                (true, Some(p)) => check_probability("p_ps", p)?,
                (true, None) => {
                    return Err(Error::InvalidParameter {
                        name: "p_ps",
                        value: f64::NAN,
                        reason: "required when postselecting",
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Probabilities the simulation draws from.
    pub fn resolved_stages(&self) -> Result<StageProbabilities> {
        if let Some(s) = &self.stages {
            return Ok(s.clone());
        }
        let r = chain_report(&self.link, &self.model())?;
        Ok(StageProbabilities { p0: r.p0, swaps: r.swap_probabilities, p_ps: r.p_ps })
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        check_range(name, p, f64::MIN_POSITIVE, 1.0, "must lie in (0, 1]")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub total_time: f64,
    pub rounds: u64,
    /// Attempts made at each link position, summed over restarts. Positions cover both
    /// chains when postselecting.
    pub attempts_per_link: Vec<u64>,
    /// Elementary links heralded, including those later discarded by failed swaps.
    pub link_heralds: u64,
    /// Failed swaps per level.
    pub swap_retries: Vec<u64>,
    pub postselection_retries: u64,
    pub final_state: MixedLinkState<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSimReport {
    pub n_links: usize,
    pub n_trials: usize,
    pub rng_seed: u64,
    pub round_time: f64,
    pub stages: StageProbabilities,
    pub mean_time: f64,
    pub std_dev: f64,
    pub std_error: f64,
    /// `(3/2)^k round / (P0 prod P)`, one `3/2` per max-of-two wait.
    pub formula_time: f64,
    /// `mean_time / formula_time - 1`.
    pub relative_deviation: f64,
    /// Analytic report, when the probabilities come from the physics.
    pub analytic: Option<RateReport<f64>>,
    /// Heralded links per attempt over all trials.
    pub link_success_frequency: f64,
    pub link_attempts: u64,
    pub final_state: MixedLinkState<f64>,
    pub final_fidelity: f64,
    /// Per-trial totals in trial order.
    pub times: Vec<f64>,
    pub records: Option<Vec<TrialRecord>>,
}

impl ChainSimReport {
    /// Empirical quantile by nearest rank, `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut t = self.times.clone();
        t.sort_by(f64::total_cmp);
        let i = ((q.clamp(0.0, 1.0) * (t.len() - 1) as f64).round()) as usize;
        t[i]
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        (self.mean_time - target).abs() <= k * self.std_error
    }

    /// One JSON object per trial record.
    pub fn write_records_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in self.records.iter().flatten() {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Time to herald one elementary link: geometric attempts of one round each.
pub fn sample_link_time<R: Rng + ?Sized>(params: &LinkParams<f64>, rng: &mut R) -> f64 {
    let p0 = link_success_probability(params);
    attempts(p0, rng) as f64 * params.round_time()
}

fn attempts<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    Geometric::new(p).expect("probability in (0, 1]").sample(rng) + 1
}

struct Plan {
    p0: f64,
    /// Success probability of levels 1..; the last entry is postselection when enabled.
    stage_p: Vec<f64>,
    stage_cost: Vec<u64>,
    n_positions: usize,
    n_swaps: usize,
}

struct Tally {
    attempts: Vec<u64>,
    heralds: u64,
    retries: Vec<u64>,
}

impl Plan {
    /// Rounds until a level-`level` segment starting at link `pos` is ready.
    fn segment(&self, level: usize, pos: usize, rng: &mut ChaCha8Rng, tally: &mut Tally) -> u64 {
        if level == 0 {
            let n = attempts(self.p0, rng);
            tally.attempts[pos] += n;
            tally.heralds += 1;
            return n;
        }
        let half = 1 << (level - 1);
        let mut rounds = 0;
        loop {
            let left = self.segment(level - 1, pos, rng, tally);
            let right = self.segment(level - 1, pos + half, rng, tally);
            rounds += left.max(right) + self.stage_cost[level - 1];
            if rng.random::<f64>() < self.stage_p[level - 1] {
                return rounds;
            }
            tally.retries[level - 1] += 1;
        }
    }
}

/// Run `config.n_trials` independent deliveries.
///
/// Trial `i` draws from ChaCha8 stream `i` under `rng_seed`, so results do not depend on
/// thread scheduling.
pub fn simulate_chain(config: &ChainConfig) -> Result<ChainSimReport> {
    config.validate()?;
    let levels = config.model().levels()? as usize;
    let stages = config.resolved_stages()?;
    let mut stage_p = stages.swaps.clone();
    let mut stage_cost: Vec<u64> = match config.swap_cost {
        SwapCost::Free => vec![0; levels],
        SwapCost::Heralded => (0..levels).map(|k| 1 << k).collect(),
    };
    if config.postselection {
        stage_p.push(stages.p_ps.expect("validated"));
        stage_cost.push(match config.swap_cost {
            SwapCost::Free => 0,
            SwapCost::Heralded => config.n_links as u64,
        });
    }
    let top = stage_p.len();
    let plan = Plan { p0: stages.p0, stage_p, stage_cost, n_positions: 1 << top, n_swaps: levels };

    let (final_state, final_fidelity, analytic) = final_quality(config, levels)?;
    let tau = config.link.round_time();
    let records: Vec<TrialRecord> = (0..config.n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(trial as u64);
            let mut tally = Tally { attempts: vec![0; plan.n_positions], retries: vec![0; top], heralds: 0 };
            let rounds = plan.segment(top, 0, &mut rng, &mut tally);
            let ps_retries = if config.postselection { tally.retries.pop().unwrap_or(0) } else { 0 };
            debug_assert_eq!(tally.retries.len(), plan.n_swaps);
            TrialRecord {
                trial,
                total_time: rounds as f64 * tau,
                rounds,
                attempts_per_link: tally.attempts,
                link_heralds: tally.heralds,
                swap_retries: tally.retries,
                postselection_retries: ps_retries,
                final_state,
            }
        })
        .collect();

    let n = records.len() as f64;
    let times: Vec<f64> = records.iter().map(|r| r.total_time).collect();
    let mean = times.iter().sum::<f64>() / n;
    let var = if records.len() > 1 { times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let link_attempts: u64 = records.iter().flat_map(|r| r.attempts_per_link.iter()).sum();
    let heralds: u64 = records.iter().map(|r| r.link_heralds).sum();
    let factor = 1.5f64.powi(top as i32);
    let formula_time = factor * tau / (stages.p0 * plan.stage_p.iter().product::<f64>());
    Ok(ChainSimReport {
        n_links: config.n_links,
        n_trials: config.n_trials,
        rng_seed: config.rng_seed,
        round_time: tau,
        stages,
        mean_time: mean,
        std_dev: var.sqrt(),
        std_error: (var / n).sqrt(),
        formula_time,
        relative_deviation: mean / formula_time - 1.0,
        analytic,
        link_success_frequency: heralds as f64 / link_attempts as f64,
        link_attempts,
        final_state,
        final_fidelity,
        times,
        records: config.keep_records.then_some(records),
    })
}

fn final_quality(config: &ChainConfig, levels: usize) -> Result<(MixedLinkState<f64>, f64, Option<RateReport<f64>>)> {
    let mut state = link_state(&config.link);
    for _ in 0..levels {
        state = swap_stage(&state, &config.link, config.acceptance).state_after;
    }
    let fidelity = if config.postselection {
        crate::analytic::postselected_fidelity(&state, &state, &config.link)
    } else {
        state.f_minus
    };
    let analytic = match config.stages {
        None => Some(chain_report(&config.link, &config.model())?),
        Some(_) => None,
    };
    Ok((state, fidelity, analytic))
}
