use serde::{Deserialize, Serialize};

use super::link::{link_fidelity, link_state, link_success_probability, link_time};
use super::swap::{swap_stage, SwapAcceptance};
use super::{LinkParams, MixedLinkState};
use crate::error::{check_range, Error, Result};
use crate::scalar::Real;

/// Leading-order probability `eta^2 F^2 / 2` that two chains with minus-sector weight
/// `f_minus` each leave exactly one photon at either end.
pub fn postselection_probability<T: Real>(f_minus: T, p: &LinkParams<T>) -> T {
    let eta = p.eta();
    eta * eta * f_minus * f_minus / T::lit(2.0)
}

/// Exact single-photon-per-location postselection of two chains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostselectionExact<T: Real> {
    pub probability: T,
    /// Fidelity of the accepted two-photon state with `(|A1 C2> + |A2 C1>)/sqrt(2)`.
    pub fidelity: T,
}

/// Closed-form postselection of two chains holding `s1` and `s2`.
///
/// Each memory is read out with efficiency `eta_m eta_d`. Conditioned on one click per
/// location, only the odd-total (`|10>`/`|01>`-like) and even-total (`|11>`/`|00>`-like)
/// components of each chain survive; their weights `O` and `E` set the fidelity
/// `O1 O2 / (O1 O2 + E1 E2)`.
pub fn postselection_exact<T: Real>(
    s1: &MixedLinkState<T>,
    s2: &MixedLinkState<T>,
    p: &LinkParams<T>,
) -> PostselectionExact<T> {
    let n = p.normalizations();
    let eta = p.eta();
    let b2 = p.stored_alpha_sq();
    let two = T::lit(2.0);
    let kappa = (-T::lit(4.0) * (T::one() - eta) * b2).exp();
    // minus sector sits on odd totals, plus sector on even totals; loss leaks kappa between them
    let weights = |s: &MixedLinkState<T>| {
        let odd = s.f_minus * two * (T::one() + kappa) / n.m_minus_theta
            + s.f_plus * two * (T::one() - kappa) / n.m_plus_theta;
        let even = s.f_minus * two * (T::one() - kappa) / n.m_minus_theta
            + s.f_plus * two * (T::one() + kappa) / n.m_plus_theta;
        (odd, even)
    };
    let (o1, e1) = weights(s1);
    let (o2, e2) = weights(s2);
    let g = (-two * eta * b2).exp();
    let gamma = eta * b2;
    PostselectionExact {
        probability: two * g * g * gamma * gamma * (o1 * o2 + e1 * e2),
        fidelity: o1 * o2 / (o1 * o2 + e1 * e2),
    }
}

pub fn postselected_fidelity<T: Real>(s1: &MixedLinkState<T>, s2: &MixedLinkState<T>, p: &LinkParams<T>) -> T {
    postselection_exact(s1, s2, p).fidelity
}

/// Which chain [`chain_report`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainModel {
    /// 2 or 4 elementary links.
    pub n_links: usize,
    /// Combine two complete chains by single-photon postselection.
    pub postselection: bool,
    pub acceptance: SwapAcceptance,
}

impl ChainModel {
    pub const FOUR_LINKS: Self = Self { n_links: 4, postselection: true, acceptance: SwapAcceptance::OddOnly };

    pub fn levels(&self) -> Result<u32> {
        match self.n_links {
            2 => Ok(1),
            4 => Ok(2),
            n => Err(Error::UnsupportedChain(n)),
        }
    }
}

impl Default for ChainModel {
    fn default() -> Self {
        Self::FOUR_LINKS
    }
}

/// Stage-by-stage analytic rate and fidelity of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport<T: Real> {
    pub n_links: usize,
    pub p0: T,
    pub t0: T,
    pub f0: T,
    /// Swap success probability per nesting level, `P1, P2, ...`.
    pub swap_probabilities: Vec<T>,
    /// Minus-sector weight after each nesting level, `F_-^1, F_-^2, ...`.
    pub swap_fidelities: Vec<T>,
    /// Leading-order postselection probability used in the rate.
    pub p_ps: Option<T>,
    pub p_ps_exact: Option<T>,
    pub postselected_fidelity: Option<T>,
    /// Fidelity of the state the chain delivers.
    pub final_fidelity: T,
    /// `(3/2)^k` with one factor per max-of-two wait (each swap level, plus the
    /// pairing of two chains when postselecting).
    pub waiting_factor: T,
    /// Mean time to deliver one end-to-end pair, seconds.
    pub total_time: T,
    /// Same rate with one `3/2` factor per swap level only.
    pub time_swap_waits_only: T,
}

impl<T: Real> RateReport<T> {
    pub fn p1(&self) -> T {
        self.swap_probabilities[0]
    }

    pub fn f1(&self) -> T {
        self.swap_fidelities[0]
    }

    pub fn p2(&self) -> Option<T> {
        self.swap_probabilities.get(1).copied()
    }

    pub fn f2(&self) -> Option<T> {
        self.swap_fidelities.get(1).copied()
    }
}

/// Analytic rate of a nested chain of `model.n_links` links.
///
/// Each swap level waits for the slower of two independent segments (factor `3/2` in the
/// small-probability limit) and restarts both on failure; postselection pairs two full
/// chains, adding one more factor.
pub fn chain_report<T: Real>(p: &LinkParams<T>, model: &ChainModel) -> Result<RateReport<T>> {
    let levels = model.levels()?;
    let t0 = link_time(p);
    let mut state = link_state(p);
    let mut swap_probabilities = Vec::with_capacity(levels as usize);
    let mut swap_fidelities = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        let stage = swap_stage(&state, p, model.acceptance);
        swap_probabilities.push(stage.probability);
        swap_fidelities.push(stage.state_after.f_minus);
        state = stage.state_after;
    }
    let three_halves = T::lit(1.5);
    let mut denominator: T = swap_probabilities.iter().copied().fold(T::one(), |a, b| a * b);
    let mut factor = three_halves.powi(levels as i32);
    let swap_factor = factor;
    let (p_ps, p_ps_exact, f_ps) = if model.postselection {
        let pps = postselection_probability(state.f_minus, p);
        let exact = postselection_exact(&state, &state, p);
        denominator *= pps;
        factor *= three_halves;
        (Some(pps), Some(exact.probability), Some(exact.fidelity))
    } else {
        (None, None, None)
    };
    Ok(RateReport {
        n_links: model.n_links,
        p0: link_success_probability(p),
        t0,
        f0: link_fidelity(p),
        swap_probabilities,
        swap_fidelities,
        p_ps,
        p_ps_exact,
        postselected_fidelity: f_ps,
        final_fidelity: f_ps.unwrap_or(state.f_minus),
        waiting_factor: factor,
        total_time: factor * t0 / denominator,
        time_swap_waits_only: swap_factor * t0 / denominator,
    })
}

/// Four links, two swap levels, odd-count swaps and a final postselection.
pub fn chain_time_four_links<T: Real>(p: &LinkParams<T>) -> Result<RateReport<T>> {
    chain_report(p, &ChainModel::FOUR_LINKS)
}

/// Two-copy purification fidelity map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurificationForm {
    /// `F^2 / (F^2 + (1 - F)^2)`.
    #[default]
    Standard,
    /// `F^2 / (F^2 + (1 - F^2))`, which reduces to `F^2`.
    Quadratic,
}

pub fn purification_map<T: Real>(f_in: T, form: PurificationForm) -> Result<T> {
    let v = f_in.as_f64();
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::InvalidParameter { name: "f_in", value: v, reason: "must lie in (0, 1]" });
    }
    let f2 = f_in * f_in;
    let wrong = match form {
        PurificationForm::Standard => (T::one() - f_in).powi(2),
        PurificationForm::Quadratic => T::one() - f2,
    };
    Ok(f2 / (f2 + wrong))
}

/// Mean time to send one photon straight down `length_km` of fiber from a source firing at
/// `source_rate_hz`.
pub fn direct_transmission_time<T: Real>(length_km: T, source_rate_hz: T, attenuation_length_km: T) -> Result<T> {
    check_range("length_km", length_km.as_f64(), 0.0, f64::INFINITY, "must be >= 0")?;
    check_range("source_rate_hz", source_rate_hz.as_f64(), f64::MIN_POSITIVE, f64::INFINITY, "must be > 0")?;
    check_range(
        "attenuation_length_km",
        attenuation_length_km.as_f64(),
        f64::MIN_POSITIVE,
        f64::INFINITY,
        "must be > 0",
    )?;
    Ok((length_km / attenuation_length_km).exp() / source_rate_hz)
}
