use super::{LinkParams, MixedLinkState};
use crate::scalar::Real;

/// Fiber transmission from one end of the link to the central station.
pub fn eta_t<T: Real>(p: &LinkParams<T>) -> T {
    (-p.length_km / (T::lit(2.0) * p.attenuation_length_km)).exp()
}

/// Heralding probability `P0` of one attempt, summed over both detectors.
pub fn link_success_probability<T: Real>(p: &LinkParams<T>) -> T {
    let n = p.normalizations();
    let two = T::lit(2.0);
    let x = p.alpha_sq * p.tap;
    // evaluated as a log-sum so long links cannot underflow midway
    let ln = two.ln() - two * n.n_minus.ln() + (two * x).ln() - two * x
        + (n.m_minus_theta + two * n.m_plus_theta * x).ln()
        - p.length_km / (two * p.attenuation_length_km)
        + p.eta_d.ln();
    ln.exp()
}

/// Large-`alpha` form `s|a|^2 e^{-2 s|a|^2} (2 + 4 s|a|^2) eta_t eta_d` of [`link_success_probability`].
pub fn link_success_probability_large_alpha<T: Real>(p: &LinkParams<T>) -> T {
    let x = p.alpha_sq * p.tap;
    let two = T::lit(2.0);
    x * (-two * x).exp() * (two + T::lit(4.0) * x) * eta_t(p) * p.eta_d
}

/// Fidelity `F_-^0` of the heralded state with the target `|phi_-^theta>`.
pub fn link_fidelity<T: Real>(p: &LinkParams<T>) -> T {
    let n = p.normalizations();
    n.m_minus_theta / (n.m_minus_theta + T::lit(2.0) * n.m_plus_theta * p.alpha_sq * p.tap)
}

/// Mean time `T0 = (L0/c)/P0` to herald one elementary link, seconds.
pub fn link_time<T: Real>(p: &LinkParams<T>) -> T {
    p.round_time() / link_success_probability(p)
}

pub fn link_state<T: Real>(p: &LinkParams<T>) -> MixedLinkState<T> {
    let f = link_fidelity(p);
    MixedLinkState { f_minus: f, f_plus: T::one() - f, level: 0 }
}
