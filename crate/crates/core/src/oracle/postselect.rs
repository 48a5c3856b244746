use num_complex::Complex;

use super::{check_alpha, lossy_subspace, quasi_bell_state, sectors, CircuitResult, QuasiBell};
use crate::analytic::{LinkParams, MixedLinkState};
use crate::error::Result;
use crate::fock::{cutoff_for, DensityOperator, DetectionModel, FockVector};
use crate::scalar::Real;

/// Exact statistics of single-photon postselection across two chains.
#[derive(Debug, Clone)]
pub struct PostselectionCircuit<T: Real> {
    /// Every detector pattern `(A_d, A_d~, C_d, C_d~)` after local 50/50 combining.
    pub patterns: Vec<CircuitResult<T>>,
    /// The accepted event: exactly one photon at `A` and one at `C`. Its state is the
    /// dual-rail two-qubit state (`|0>` = chain 1, `|1>` = chain 2 at each location)
    /// and the target is `(|A1 C2> + |A2 C1>)/sqrt(2)`.
    pub accepted: CircuitResult<T>,
    /// Acceptance summed over detector patterns; equals `accepted.probability`.
    pub detector_acceptance: T,
}

/// Postselect two chains with end states `s1` (memories `A1, C1`) and `s2` (`A2, C2`).
pub fn postselection_circuit<T: Real>(
    s1: &MixedLinkState<T>,
    s2: &MixedLinkState<T>,
    p: &LinkParams<T>,
) -> Result<PostselectionCircuit<T>> {
    p.validate()?;
    check_alpha(p.alpha_sq.as_f64())?;
    let b2 = p.stored_alpha_sq();
    let d = cutoff_for(2.0 * b2.as_f64()) + 1;
    let beta = Complex::new(b2.sqrt(), T::zero());
    let eta = p.eta();
    let model = DetectionModel::new(eta)?;
    // modes [A1, C1, A2, C2]; dual-rail basis ordered (A qubit, C qubit)
    let basis = vec![vec![1, 1, 0, 0], vec![1, 0, 0, 1], vec![0, 1, 1, 0], vec![0, 0, 1, 1]];
    let zero = Complex::new(T::zero(), T::zero());
    let mut dual = vec![zero; 16];
    let mut probs: Vec<(Vec<usize>, T)> = Vec::new();
    for (sa, wa) in sectors(s1) {
        let chain1 = quasi_bell_state(QuasiBell::phi(sa), beta, [d, d])?;
        for (sb, wb) in sectors(s2) {
            let chain2 = quasi_bell_state(QuasiBell::phi(sb), beta, [d, d])?;
            let w = wa * wb;
            let psi: FockVector<T> = chain1.tensor(&chain2);
            for (acc, x) in dual.iter_mut().zip(lossy_subspace(&psi, eta, &basis)) {
                *acc += x.scale(w);
            }
            let combined = psi.beamsplitter(2, 0, T::lit(0.5))?.beamsplitter(3, 1, T::lit(0.5))?;
            let meas = combined.measure_lossy(&[0, 2, 1, 3], &model, T::zero())?;
            if probs.is_empty() {
                probs = meas.patterns.iter().map(|pat| (pat.counts.clone(), T::zero())).collect();
            }
            for (slot, pat) in probs.iter_mut().zip(&meas.patterns) {
                slot.1 += w * pat.probability;
            }
        }
    }
    let mut detector_acceptance = T::zero();
    let patterns = probs
        .into_iter()
        .map(|(counts, prob)| {
            if counts[0] + counts[1] == 1 && counts[2] + counts[3] == 1 {
                detector_acceptance += prob;
            }
            CircuitResult {
                label: format!("A=({},{}),C=({},{})", counts[0], counts[1], counts[2], counts[3]),
                counts,
                probability: prob,
                conditional_state: None,
                fidelity_vs_target: None,
            }
        })
        .collect();

    let rho = DensityOperator::new(vec![2, 2], dual)?;
    let prob = rho.trace();
    let rho = rho.scaled(T::one() / prob);
    let s = T::lit(0.5).sqrt();
    let target = FockVector::new(vec![2, 2], vec![zero, Complex::new(s, T::zero()), Complex::new(s, T::zero()), zero])?;
    let f = rho.fidelity_pure(&target);
    Ok(PostselectionCircuit {
        patterns,
        accepted: CircuitResult {
            label: "one photon per location".into(),
            counts: vec![1, 1],
            probability: prob,
            conditional_state: Some(rho),
            fidelity_vs_target: Some(f),
        },
        detector_acceptance,
    })
}
