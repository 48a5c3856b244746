use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{check_alpha, quasi_bell_state, CircuitResult, QuasiBell};
use crate::error::Result;
use crate::fock::{cutoff_for, DetectionModel};
use crate::scalar::Real;

/// Verdict of the parity-resolving Bell analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellOutcome {
    State(QuasiBell),
    /// Both detectors silent.
    Failure,
    /// Both detectors clicked; impossible for quasi-Bell inputs.
    Ambiguous,
}

/// `(odd, 0) -> phi_-`, `(even > 0, 0) -> phi_+`, `(0, odd) -> psi_-`,
/// `(0, even > 0) -> psi_+`, `(0, 0)` fails.
pub fn classify(counts: [usize; 2]) -> BellOutcome {
    match counts {
        [0, 0] => BellOutcome::Failure,
        [n, 0] if n % 2 == 1 => BellOutcome::State(QuasiBell::PhiMinus),
        [_, 0] => BellOutcome::State(QuasiBell::PhiPlus),
        [0, n] if n % 2 == 1 => BellOutcome::State(QuasiBell::PsiMinus),
        [0, _] => BellOutcome::State(QuasiBell::PsiPlus),
        _ => BellOutcome::Ambiguous,
    }
}

#[derive(Debug, Clone)]
pub struct Discrimination<T: Real> {
    pub input: QuasiBell,
    /// Every `(sum port, difference port)` pattern.
    pub patterns: Vec<CircuitResult<T>>,
    /// Probability of each verdict, in the order phi+, phi-, psi+, psi-, failure, ambiguous.
    pub verdicts: Vec<(BellOutcome, T)>,
}

impl<T: Real> Discrimination<T> {
    pub fn probability(&self, verdict: BellOutcome) -> T {
        self.verdicts.iter().find(|(v, _)| *v == verdict).map_or(T::zero(), |(_, p)| *p)
    }

    pub fn failure_probability(&self) -> T {
        self.probability(BellOutcome::Failure)
    }

    pub fn correct_probability(&self) -> T {
        self.probability(BellOutcome::State(self.input))
    }
}

/// Combine the two modes of a quasi-Bell state on a 50/50 splitter and count both outputs
/// with efficiency `eta_d`.
pub fn quasi_bell_discriminator<T: Real>(input: QuasiBell, alpha_sq: T, eta_d: T) -> Result<Discrimination<T>> {
    check_alpha(alpha_sq.as_f64())?;
    let d = cutoff_for(2.0 * alpha_sq.as_f64()) + 1;
    let psi = quasi_bell_state(input, Complex::new(alpha_sq.sqrt(), T::zero()), [d, d])?;
    // mode 0 becomes the sum port
    let out = psi.beamsplitter(1, 0, T::lit(0.5))?;
    let meas = out.measure_lossy(&[0, 1], &DetectionModel::new(eta_d)?, T::zero())?;
    let mut verdicts: Vec<(BellOutcome, T)> = QuasiBell::ALL
        .iter()
        .map(|&q| BellOutcome::State(q))
        .chain([BellOutcome::Failure, BellOutcome::Ambiguous])
        .map(|v| (v, T::zero()))
        .collect();
    let patterns = meas
        .patterns
        .into_iter()
        .map(|pat| {
            let v = classify([pat.counts[0], pat.counts[1]]);
            if let Some(slot) = verdicts.iter_mut().find(|(x, _)| *x == v) {
                slot.1 += pat.probability;
            }
            CircuitResult {
                label: format!("d={},d~={}", pat.counts[0], pat.counts[1]),
                counts: pat.counts,
                probability: pat.probability,
                conditional_state: None,
                fidelity_vs_target: None,
            }
        })
        .collect();
    Ok(Discrimination { input, patterns, verdicts })
}
