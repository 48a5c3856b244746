//! Closed-form link, swap, postselection and chain-rate model.
//!
//! Everything here is a pure function of [`LinkParams`] and the two-weight
//! [`MixedLinkState`] that a repeater segment carries between nesting levels.

mod chain;
mod link;
mod swap;

pub use chain::{
    chain_report, chain_time_four_links, direct_transmission_time, postselected_fidelity, postselection_exact,
    postselection_probability, purification_map, ChainModel, PostselectionExact, PurificationForm, RateReport,
};
pub use link::{
    eta_t, link_fidelity, link_state, link_success_probability, link_success_probability_large_alpha, link_time,
};
pub use swap::{
    large_alpha_swap_fidelity, large_alpha_swap_probability, small_alpha_swap_fidelity, small_alpha_swap_probability,
    swap_denominator, swap_fidelity, swap_numerator, swap_outcome, swap_probability_n, swap_stage, SwapAcceptance,
    SwapOutcome, SwapStage,
};

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::scalar::Real;

/// Attenuation length of telecom fiber, km.
pub const DEFAULT_ATTENUATION_KM: f64 = 22.0;
/// Speed of light in fiber, km/s.
pub const DEFAULT_LIGHT_SPEED_KM_S: f64 = 2.0e5;

/// Physical parameters of one elementary link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams<T: Real> {
    /// Mean photon number `|alpha|^2` of each source cat.
    pub alpha_sq: T,
    /// Fraction `sin^2 theta` tapped towards the central station.
    pub tap: T,
    /// Link length `L0`, km.
    pub length_km: T,
    pub attenuation_length_km: T,
    pub eta_d: T,
    pub eta_m: T,
    pub light_speed_km_s: T,
}

impl<T: Real> LinkParams<T> {
    /// Parameters with default fiber constants and perfect efficiencies.
    pub fn new(alpha_sq: T, tap: T, length_km: T) -> Self {
        Self {
            alpha_sq,
            tap,
            length_km,
            attenuation_length_km: T::lit(DEFAULT_ATTENUATION_KM),
            eta_d: T::one(),
            eta_m: T::one(),
            light_speed_km_s: T::lit(DEFAULT_LIGHT_SPEED_KM_S),
        }
    }

    pub fn with_efficiencies(mut self, eta_m: T, eta_d: T) -> Self {
        self.eta_m = eta_m;
        self.eta_d = eta_d;
        self
    }

    pub fn with_alpha_sq(mut self, alpha_sq: T) -> Self {
        self.alpha_sq = alpha_sq;
        self
    }

    pub fn with_tap(mut self, tap: T) -> Self {
        self.tap = tap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let f = |x: T| x.as_f64();
        if !(f(self.alpha_sq) > 0.0 && f(self.alpha_sq).is_finite()) {
            return Err(Error::InvalidParameter { name: "alpha_sq", value: f(self.alpha_sq), reason: "must be > 0" });
        }
        if !(f(self.tap) > 0.0 && f(self.tap) < 1.0) {
            return Err(Error::InvalidParameter { name: "tap", value: f(self.tap), reason: "must lie in (0, 1)" });
        }
        for (name, v) in [("eta_d", self.eta_d), ("eta_m", self.eta_m)] {
            if !(f(v) > 0.0 && f(v) <= 1.0) {
                return Err(Error::InvalidParameter { name, value: f(v), reason: "must lie in (0, 1]" });
            }
        }
        for (name, v) in [
            ("length_km", self.length_km),
            ("attenuation_length_km", self.attenuation_length_km),
            ("light_speed_km_s", self.light_speed_km_s),
        ] {
            check_range(name, f(v), f64::MIN_POSITIVE, f64::INFINITY, "must be > 0")?;
        }
        Ok(())
    }

    /// `cos^2 theta`.
    pub fn cos_sq(&self) -> T {
        T::one() - self.tap
    }

    /// Mean photon number `|alpha|^2 cos^2 theta` left in each memory.
    pub fn stored_alpha_sq(&self) -> T {
        self.alpha_sq * self.cos_sq()
    }

    /// Combined retrieval-and-detection efficiency `eta_m eta_d`.
    pub fn eta(&self) -> T {
        self.eta_m * self.eta_d
    }

    /// One communication round `L0 / c`, seconds.
    pub fn round_time(&self) -> T {
        self.length_km / self.light_speed_km_s
    }

    pub fn normalizations(&self) -> Normalizations<T> {
        Normalizations::new(self.alpha_sq, self.tap)
    }
}

/// Cat and quasi-Bell normalization constants for one `(|alpha|^2, tap)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizations<T: Real> {
    pub n_plus: T,
    pub n_minus: T,
    pub m_plus: T,
    pub m_minus: T,
    pub m_plus_theta: T,
    pub m_minus_theta: T,
}

impl<T: Real> Normalizations<T> {
    pub fn new(alpha_sq: T, tap: T) -> Self {
        let two = T::lit(2.0);
        // expm1 keeps the minus-sector constants accurate as alpha -> 0
        let minus = |x: T| -two * (-x).exp_m1();
        let plus = |x: T| two * (T::one() + (-x).exp());
        let cos_sq = T::one() - tap;
        Self {
            n_plus: plus(two * alpha_sq),
            n_minus: minus(two * alpha_sq),
            m_plus: plus(T::lit(4.0) * alpha_sq),
            m_minus: minus(T::lit(4.0) * alpha_sq),
            m_plus_theta: plus(T::lit(4.0) * alpha_sq * cos_sq),
            m_minus_theta: minus(T::lit(4.0) * alpha_sq * cos_sq),
        }
    }
}

/// Classical mixture `F_- |phi_-><phi_-| + F_+ |phi_+><phi_+|` held by a segment after
/// `level` swaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedLinkState<T: Real> {
    pub f_minus: T,
    pub f_plus: T,
    pub level: u32,
}

impl<T: Real> MixedLinkState<T> {
    pub fn new(f_minus: T, level: u32) -> Result<Self> {
        check_range("f_minus", f_minus.as_f64(), 0.0, 1.0, "must lie in [0, 1]")?;
        Ok(Self { f_minus, f_plus: T::one() - f_minus, level })
    }

    pub fn pure(level: u32) -> Self {
        Self { f_minus: T::one(), f_plus: T::zero(), level }
    }

    /// Weight of sector `sigma` (`-1` or `+1`).
    pub fn weight(&self, sigma: i8) -> T {
        if sigma < 0 {
            self.f_minus
        } else {
            self.f_plus
        }
    }
}
