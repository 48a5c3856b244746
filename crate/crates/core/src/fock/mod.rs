//! Truncated Fock-space states of a few bosonic modes and the linear-optics
//! toolbox (coherent and cat preparation, beamsplitters, loss, photon
//! subtraction, number-resolving detection) the oracle circuits are built from.
//!
//! Storage is dense and row-major: mode 0 is the most significant index. Each
//! mode carries its own cutoff so that weakly populated tap modes do not inflate
//! the dimension of the memory modes.
//!
//! Beamsplitter convention (real, orthogonal), used everywhere:
//!
//! ```text
//! a_i^dag -> sqrt(1-t) a_i^dag + sqrt(t) a_j^dag
//! a_j^dag -> -sqrt(t) a_i^dag + sqrt(1-t) a_j^dag
//! ```
//!
//! so `|alpha>_i |0>_j` becomes `|sqrt(1-t) alpha>_i |sqrt(t) alpha>_j`. For a 50/50
//! splitter `beamsplitter(j, i, 0.5)` leaves the sum port `(a_i + a_j)/sqrt(2)` in
//! mode `i`.

mod density;
mod detection;
mod state;

pub use density::DensityOperator;
pub use detection::{DetectionModel, DetectionOutcome, LossyMeasurement, PatternOutcome};
pub use state::{cat_state, coherent_state, FockVector};

pub(crate) use state::strides as strides_of;

use crate::scalar::{ln_factorial, Real};

/// Largest weight a truncated preparation or beamsplitter may discard.
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Weight a beamsplitter may push above a mode's cutoff before it is an error.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Smallest per-mode cutoff ever used.
pub const MIN_CUTOFF: usize = 12;

/// Photon-number parity of a cat state or a detection record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// `+1` for even, `-1` for odd: the sign in `|alpha> +- |-alpha>`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn matches(self, n: usize) -> bool {
        Parity::of(n) == self
    }
}

/// Poisson weight beyond `n_max` for mean `mean`, summed directly (no `1 - sum`).
pub fn poisson_tail<T: Real>(mean: T, n_max: usize) -> T {
    if mean <= T::zero() {
        return T::zero();
    }
    let ln_mean = mean.ln();
    let mut tail = T::zero();
    let mut n = n_max + 1;
    loop {
        let term = (T::lit(n as f64) * ln_mean - mean - ln_factorial::<T>(n)).exp();
        tail += term;
        // terms decrease monotonically once n exceeds the mean
        if T::lit(n as f64) > mean && term <= tail * T::epsilon() {
            break;
        }
        if term == T::zero() && T::lit(n as f64) > mean {
            break;
        }
        n += 1;
    }
    tail
}

/// Cutoff `N_max` for a mode whose largest coherent amplitude has mean photon number
/// `mean`: the smallest `n` with Poisson tail below [`TAIL_TOLERANCE`], never below
/// [`MIN_CUTOFF`]. The mode dimension is `N_max + 1`.
pub fn cutoff_for(mean: f64) -> usize {
    let mut n = MIN_CUTOFF;
    while poisson_tail(mean, n) >= TAIL_TOLERANCE {
        n += 1;
    }
    n
}

/// Cutoff for a cat of parity `parity` built on amplitude `|alpha|^2 = mean`. The cat keeps
/// only a fraction of the Poisson weight, so its relative tail is correspondingly heavier.
pub fn cat_cutoff_for(mean: f64, parity: Parity) -> usize {
    let kept = match parity {
        Parity::Even => 0.5 * (1.0 + (-2.0 * mean).exp()),
        Parity::Odd => -0.5 * (-2.0 * mean).exp_m1(),
    };
    let mut n = MIN_CUTOFF;
    while poisson_tail(mean, n) >= TAIL_TOLERANCE * kept {
        n += 1;
    }
    n
}
