use serde::{Deserialize, Serialize};

use super::{LinkParams, MixedLinkState};
use crate::error::{Error, Result};
use crate::fock::Parity;
use crate::scalar::{ln_factorial, Real};

/// Which detection counts herald a successful swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapAcceptance {
    /// Odd counts only: the small-amplitude regime, where even counts are dominated by
    /// two-photon bunching of the error sector.
    #[default]
    OddOnly,
    /// Every nonzero count; even outcomes are corrected to the minus sector by a local flip.
    AnyNonzero,
}

/// Result of one swap conditioned on a specific total count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome<T: Real> {
    pub parity: Parity,
    pub count: usize,
    pub p_success: T,
    /// Post-swap state, already rotated so that the target is the minus sector.
    pub state_after: MixedLinkState<T>,
    /// `F_-` for odd counts, `G_+` for even counts.
    pub fidelity: T,
}

/// A swap aggregated over the accepted counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapStage<T: Real> {
    pub probability: T,
    pub odd_probability: T,
    pub even_probability: T,
    pub state_after: MixedLinkState<T>,
}

/// `(x, r)` with `x = 2(1 - eta)|alpha|^2 cos^2 theta` and `r = M_-^theta / M_+^theta`.
fn loss_and_ratio<T: Real>(p: &LinkParams<T>) -> (T, T) {
    let n = p.normalizations();
    let x = T::lit(2.0) * (T::one() - p.eta()) * p.stored_alpha_sq();
    (x, n.m_minus_theta / n.m_plus_theta)
}

/// Sector weights and quasi-Bell ratio as seen by the given parity branch.
fn oriented<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, parity: Parity) -> (T, T, T, T) {
    let (x, r) = loss_and_ratio(p);
    match parity {
        Parity::Odd => (s.f_minus, s.f_plus, r, x),
        Parity::Even => (s.f_plus, s.f_minus, T::one() / r, x),
    }
}

/// Unnormalized target-sector weight after the swap, `N^odd` or (by exchanging the
/// sectors) `N^even`.
pub fn swap_numerator<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, parity: Parity) -> T {
    let (fm, fp, r, x) = oriented(s, p, parity);
    let two = T::lit(2.0);
    (fm * fm + (fp * r).powi(2)) * x.cosh() + two * fm * fp * r * x.sinh()
}

/// Total post-swap weight `D^odd` / `D^even`.
pub fn swap_denominator<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, parity: Parity) -> T {
    let (fm, fp, r, x) = oriented(s, p, parity);
    let two = T::lit(2.0);
    let cross = two * fm * fp;
    (fm * fm + cross + (fp * r).powi(2)) * x.cosh() + (fp * fp + cross) * r * x.sinh() + fm * fm / r * x.sinh()
}

/// `F_-` (odd) or `G_+` (even) after one swap of two segments in state `s`.
pub fn swap_fidelity<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, parity: Parity) -> T {
    swap_numerator(s, p, parity) / swap_denominator(s, p, parity)
}

/// Probability that the two swap detectors record `n >= 1` photons in total.
pub fn swap_probability_n<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "count", value: 0.0, reason: "swap heralds need n >= 1" });
    }
    let parity = Parity::of(n);
    let norm = p.normalizations();
    let m = match parity {
        Parity::Odd => norm.m_minus_theta,
        Parity::Even => norm.m_plus_theta,
    };
    let eta = p.eta();
    if eta == T::zero() {
        return Ok(T::zero());
    }
    let y = T::lit(2.0) * p.stored_alpha_sq();
    let ln = T::lit(2.0).ln() - m.ln() + T::lit(n as f64) * (eta * y).ln() - ln_factorial::<T>(n) - y
        + swap_denominator(s, p, parity).ln();
    Ok(ln.exp())
}

pub fn swap_outcome<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, n: usize) -> Result<SwapOutcome<T>> {
    let p_success = swap_probability_n(s, p, n)?;
    let parity = Parity::of(n);
    let fidelity = swap_fidelity(s, p, parity);
    Ok(SwapOutcome {
        parity,
        count: n,
        p_success,
        state_after: MixedLinkState { f_minus: fidelity, f_plus: T::one() - fidelity, level: s.level + 1 },
        fidelity,
    })
}

/// Swap success probability and output state summed over the accepted counts.
///
/// The odd and even series are resummed: `sum_{n odd} z^n/n! = sinh z` and
/// `sum_{n even, n >= 2} z^n/n! = cosh z - 1`.
pub fn swap_stage<T: Real>(s: &MixedLinkState<T>, p: &LinkParams<T>, acceptance: SwapAcceptance) -> SwapStage<T> {
    let norm = p.normalizations();
    let y = T::lit(2.0) * p.stored_alpha_sq();
    let z = p.eta() * y;
    let two = T::lit(2.0);
    let odd = two / norm.m_minus_theta * (-y).exp() * z.sinh() * swap_denominator(s, p, Parity::Odd);
    // cosh z - 1 = 2 sinh^2(z/2), stable for small z
    let even_series = two * (z / two).sinh().powi(2);
    let even = two / norm.m_plus_theta * (-y).exp() * even_series * swap_denominator(s, p, Parity::Even);
    let f_odd = swap_fidelity(s, p, Parity::Odd);
    let (probability, f) = match acceptance {
        SwapAcceptance::OddOnly => (odd, f_odd),
        SwapAcceptance::AnyNonzero => {
            let total = odd + even;
            let g = swap_fidelity(s, p, Parity::Even);
            (total, (odd * f_odd + even * g) / total)
        }
    };
    SwapStage {
        probability,
        odd_probability: odd,
        even_probability: even,
        state_after: MixedLinkState { f_minus: f, f_plus: T::one() - f, level: s.level + 1 },
    }
}

/// `F_-^1 -> 1/(2 - eta)` for vanishing amplitude and tap.
pub fn small_alpha_swap_fidelity<T: Real>(eta: T) -> T {
    T::one() / (T::lit(2.0) - eta)
}

/// `P_1 -> eta(2 - eta)/2` for vanishing amplitude and tap.
pub fn small_alpha_swap_probability<T: Real>(eta: T) -> T {
    eta * (T::lit(2.0) - eta) / T::lit(2.0)
}

/// Parity-independent fidelity `1/(1 + tanh x)` of a swap between error-free segments at
/// large amplitude.
pub fn large_alpha_swap_fidelity<T: Real>(p: &LinkParams<T>) -> T {
    let (x, _) = loss_and_ratio(p);
    T::one() / (T::one() + x.tanh())
}

/// `1 - e^{-2 eta |alpha|^2 cos^2 theta}`: the probability of any click.
pub fn large_alpha_swap_probability<T: Real>(p: &LinkParams<T>) -> T {
    -(-T::lit(2.0) * p.eta() * p.stored_alpha_sq()).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64, s: f64, eta_m: f64, eta_d: f64) -> LinkParams<f64> {
        LinkParams::new(a, s, 100.0).with_efficiencies(eta_m, eta_d)
    }

    fn mixed(f: f64) -> MixedLinkState<f64> {
        MixedLinkState::new(f, 0).unwrap()
    }

    #[test]
    fn lossless_error_free_swap_is_perfect() {
        let p = params(1.0, 0.01, 1.0, 1.0);
        let s = MixedLinkState::pure(0);
        assert_relative_eq!(swap_numerator(&s, &p, Parity::Odd), 1.0, epsilon = 1e-14);
        assert_relative_eq!(swap_denominator(&s, &p, Parity::Odd), 1.0, epsilon = 1e-14);
        assert_relative_eq!(swap_fidelity(&s, &p, Parity::Even), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn even_branch_is_the_sector_exchange() {
        let p = params(0.7, 0.05, 0.9, 0.9);
        let s = mixed(0.85);
        let n = p.normalizations();
        // exchanging the sectors maps r to 1/r, i.e. M_+ <-> M_-
        let (x, r) = loss_and_ratio(&p);
        let (fm, fp) = (0.15, 0.85);
        let rr = 1.0 / r;
        let direct = (fm * fm + (fp * rr).powi(2)) * x.cosh() + 2.0 * fm * fp * rr * x.sinh();
        assert_relative_eq!(swap_numerator(&s, &p, Parity::Even), direct, epsilon = 1e-14);
        assert_relative_eq!(rr, n.m_plus_theta / n.m_minus_theta, epsilon = 1e-14);
    }

    #[test]
    fn fidelity_bounded_on_random_inputs() {
        let mut k = 0u64;
        let mut u = || {
            k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (k >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let p = params(0.01 + 4.0 * u(), 0.001 + 0.5 * u(), 0.05 + 0.95 * u(), 0.05 + 0.95 * u());
            let s = mixed(u());
            for parity in [Parity::Odd, Parity::Even] {
                let (num, den) = (swap_numerator(&s, &p, parity), swap_denominator(&s, &p, parity));
                assert!(den >= num && num >= 0.0, "{num} {den}");
            }
            let stage = swap_stage(&s, &p, SwapAcceptance::AnyNonzero);
            assert!(stage.probability <= 1.0 + 1e-12);
            assert_eq!(stage.state_after.f_minus + stage.state_after.f_plus, 1.0);
        }
    }

    #[test]
    fn resummed_stage_matches_series() {
        let p = params(1.3, 0.05, 0.9, 0.85);
        let s = mixed(0.93);
        let stage = swap_stage(&s, &p, SwapAcceptance::AnyNonzero);
        let odd: f64 = (1..80).step_by(2).map(|n| swap_probability_n(&s, &p, n).unwrap()).sum();
        let even: f64 = (2..80).step_by(2).map(|n| swap_probability_n(&s, &p, n).unwrap()).sum();
        assert_relative_eq!(stage.odd_probability, odd, max_relative = 1e-12);
        assert_relative_eq!(stage.even_probability, even, max_relative = 1e-12);
        assert!(swap_probability_n(&s, &p, 0).is_err());
    }

    #[test]
    fn series_sum_identity_in_the_error_free_limit() {
        for a in [1.0, 2.0, 4.0] {
            let p = params(a, 1e-12, 0.9, 0.9);
            let s = MixedLinkState::pure(0);
            let total: f64 = (1..200).map(|n| swap_probability_n(&s, &p, n).unwrap()).sum();
            // the series converges to 1 - e^{-2 eta a} only as the cat overlap e^{-2a} vanishes
            let overlap = (-2.0 * a).exp();
            assert!((total - large_alpha_swap_probability(&p)).abs() < 1e-10 + overlap, "a = {a}");
        }
        let p = params(12.0, 1e-14, 0.9, 0.9);
        let total: f64 = (1..400).map(|n| swap_probability_n(&MixedLinkState::pure(0), &p, n).unwrap()).sum();
        assert!((total - large_alpha_swap_probability(&p)).abs() < 1e-10);
    }

    #[test]
    fn small_alpha_limits() {
        let p = params(1e-6, 1e-6, 0.9, 0.9);
        let s = MixedLinkState::pure(0);
        assert_relative_eq!(swap_fidelity(&s, &p, Parity::Odd), 1.0 / 1.19, epsilon = 1e-4);
        assert_relative_eq!(small_alpha_swap_fidelity(0.81), 0.840336, epsilon = 1e-6);
        let stage = swap_stage(&s, &p, SwapAcceptance::OddOnly);
        assert_relative_eq!(stage.probability, 0.48195, epsilon = 1e-4);
        assert_relative_eq!(small_alpha_swap_probability(0.81), 0.48195, epsilon = 1e-10);
        assert_eq!(swap_probability_n(&s, &params(1.0, 0.1, 0.0, 0.9), 3).unwrap(), 0.0);
    }

    #[test]
    fn large_alpha_limit() {
        let p = params(4.0, 1e-4, 0.9, 0.9);
        let s = mixed(0.995);
        for parity in [Parity::Odd, Parity::Even] {
            assert!((swap_fidelity(&s, &p, parity) - large_alpha_swap_fidelity(&p)).abs() < 0.01);
        }
        let p2 = params(2.0, 1e-9, 0.9, 0.9);
        assert_relative_eq!(large_alpha_swap_fidelity(&p2), 1.0 / (1.0 + 0.76f64.tanh()), epsilon = 1e-6);
    }

    #[test]
    fn high_efficiency_threshold_at_two_photons() {
        let f = |eta: f64| swap_fidelity(&MixedLinkState::pure(0), &params(2.0, 1e-9, eta, eta), Parity::Odd);
        assert!(f(0.99) >= 0.9);
        assert!(f(0.98) < 0.9);
    }

    #[test]
    fn outcome_carries_level_and_parity() {
        let p = params(0.5, 0.05, 0.9, 0.9);
        let o = swap_outcome(&mixed(0.9), &p, 2).unwrap();
        assert_eq!(o.parity, Parity::Even);
        assert_eq!(o.state_after.level, 1);
        assert_eq!(o.fidelity, o.state_after.f_minus);
    }
}
