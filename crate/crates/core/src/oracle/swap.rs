use std::collections::BTreeMap;

use num_complex::Complex;

use super::{check_alpha, quasi_bell_state, sectors, CircuitResult, QuasiBell};
use crate::analytic::{LinkParams, MixedLinkState, SwapOutcome};
use crate::error::{Error, Result};
use crate::fock::{cutoff_for, DensityOperator, DetectionModel, Parity};
use crate::scalar::Real;

/// Exact statistics of the swap station acting on two segments.
#[derive(Debug, Clone)]
pub struct SwapCircuit<T: Real> {
    /// Every `(d_b, d~_b)` pattern; patterns with one empty port carry the conditional
    /// `A, C` state (relabeled for `d~_b`) and its fidelity with `phi_-` (odd totals) or
    /// `phi_+` (even totals).
    pub results: Vec<CircuitResult<T>>,
    /// Aggregated by total count `n >= 1`.
    pub outcomes: Vec<SwapOutcome<T>>,
    /// Both detectors silent.
    pub vacuum_probability: T,
    pub total_probability: T,
}

impl<T: Real> SwapCircuit<T> {
    pub fn outcome(&self, n: usize) -> Option<&SwapOutcome<T>> {
        self.outcomes.iter().find(|o| o.count == n)
    }

    /// Summed over odd counts: `(probability, mean fidelity)`.
    pub fn odd_success(&self) -> (T, T) {
        let odd = self.outcomes.iter().filter(|o| o.parity == Parity::Odd);
        let (p, pf) = odd.fold((T::zero(), T::zero()), |(p, pf), o| (p + o.p_success, pf + o.p_success * o.fidelity));
        (p, pf / p)
    }
}

/// Swap of segment `A-B_a` (state `ab`) with segment `B_c-C` (state `bc`).
///
/// The `B` memories are combined on a 50/50 splitter and counted with efficiency
/// `eta_m eta_d`; `A` and `C` are kept. Modes are ordered `[A, B_a, B_c, C]`.
pub fn swap_circuit<T: Real>(
    ab: &MixedLinkState<T>,
    bc: &MixedLinkState<T>,
    p: &LinkParams<T>,
) -> Result<SwapCircuit<T>> {
    p.validate()?;
    if ab.level != bc.level {
        return Err(Error::InvalidState(format!("swapping segments of levels {} and {}", ab.level, bc.level)));
    }
    let b2 = p.stored_alpha_sq();
    check_alpha(p.alpha_sq.as_f64())?;
    let d_end = cutoff_for(b2.as_f64()) + 1;
    let d_mid = cutoff_for(2.0 * b2.as_f64()) + 1;
    let beta = Complex::new(b2.sqrt(), T::zero());
    let model = DetectionModel::new(p.eta())?;

    let mut probs: BTreeMap<Vec<usize>, T> = BTreeMap::new();
    let mut states: BTreeMap<Vec<usize>, DensityOperator<T>> = BTreeMap::new();
    for (s1, w1) in sectors(ab) {
        let left = quasi_bell_state(QuasiBell::phi(s1), beta, [d_end, d_mid])?;
        for (s2, w2) in sectors(bc) {
            let right = quasi_bell_state(QuasiBell::phi(s2), beta, [d_mid, d_end])?;
            let w = w1 * w2;
            // B_a ends up holding the sum port d_b
            let psi = left.tensor(&right).beamsplitter(2, 1, T::lit(0.5))?;
            let meas = psi.measure_lossy_where(&[1, 2], &model, |c, _| c[0] == 0 || c[1] == 0)?;
            for pat in meas.patterns {
                *probs.entry(pat.counts.clone()).or_insert(T::zero()) += w * pat.probability;
                if let Some(rho) = pat.state {
                    match states.get_mut(&pat.counts) {
                        Some(acc) => acc.add_scaled(&rho, w),
                        None => {
                            states.insert(pat.counts, rho.scaled(w));
                        }
                    }
                }
            }
        }
    }

    let targets = [
        quasi_bell_state(QuasiBell::PhiMinus, beta, [d_end, d_end])?,
        quasi_bell_state(QuasiBell::PhiPlus, beta, [d_end, d_end])?,
    ];
    let mut results = Vec::with_capacity(probs.len());
    let mut by_count: BTreeMap<usize, (T, T)> = BTreeMap::new();
    let mut total = T::zero();
    let mut vacuum = T::zero();
    for (counts, prob) in probs {
        total += prob;
        let n = counts[0] + counts[1];
        if n == 0 {
            vacuum = prob;
        }
        let mut result = CircuitResult {
            label: format!("d={},d~={}", counts[0], counts[1]),
            counts: counts.clone(),
            probability: prob,
            conditional_state: None,
            fidelity_vs_target: None,
        };
        if n > 0 && prob > T::zero() {
            if let Some(rho) = states.remove(&counts) {
                let rho = rho.scaled(T::one() / prob);
                let rho = if counts[1] > 0 { rho.apply_parity(1)? } else { rho };
                let target = &targets[if n % 2 == 1 { 0 } else { 1 }];
                let f = rho.fidelity_pure(target);
                let e = by_count.entry(n).or_insert((T::zero(), T::zero()));
                e.0 += prob;
                e.1 += prob * f;
                result.conditional_state = Some(rho);
                result.fidelity_vs_target = Some(f);
            }
        }
        results.push(result);
    }
    let outcomes = by_count
        .into_iter()
        .map(|(n, (prob, pf))| {
            let f = pf / prob;
            SwapOutcome {
                parity: Parity::of(n),
                count: n,
                p_success: prob,
                state_after: MixedLinkState { f_minus: f, f_plus: T::one() - f, level: ab.level + 1 },
                fidelity: f,
            }
        })
        .collect();
    Ok(SwapCircuit { results, outcomes, vacuum_probability: vacuum, total_probability: total })
}
