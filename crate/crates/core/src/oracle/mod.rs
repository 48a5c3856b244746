//! Brute-force Fock-space circuits: the elementary link, the swap station, two-chain
//! postselection and quasi-Bell discrimination. Each returns exact detection statistics
//! and conditional states, independent of the closed forms in [`crate::analytic`].
//!
//! Mixed inputs are handled branch by branch over the `(-, +)` sectors: every branch is a
//! pure state, and conditional states from different branches are summed with their
//! classical weights.

mod bell;
mod link;
mod postselect;
mod swap;

pub use bell::{classify, quasi_bell_discriminator, BellOutcome, Discrimination};
pub use link::{elementary_link_circuit, elementary_link_circuit_phased, LinkCircuit};
pub use postselect::{postselection_circuit, PostselectionCircuit};
pub use swap::{swap_circuit, SwapCircuit};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_state, DensityOperator, FockVector};
use crate::scalar::{thinning_weight, Real};

/// Largest `|alpha|^2` the dense circuits accept.
pub const ORACLE_ALPHA_SQ_LIMIT: f64 = 4.0;

/// One detection pattern of a circuit.
#[derive(Debug, Clone)]
pub struct CircuitResult<T: Real> {
    pub label: String,
    pub counts: Vec<usize>,
    pub probability: T,
    /// Normalized state of the undetected modes, when the circuit keeps one for this pattern.
    pub conditional_state: Option<DensityOperator<T>>,
    pub fidelity_vs_target: Option<T>,
}

/// The four two-mode quasi-Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiBell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl QuasiBell {
    pub const ALL: [QuasiBell; 4] = [QuasiBell::PhiPlus, QuasiBell::PhiMinus, QuasiBell::PsiPlus, QuasiBell::PsiMinus];

    /// `phi_-` for `sigma < 0`, `phi_+` otherwise.
    pub fn phi(sigma: i8) -> Self {
        if sigma < 0 {
            QuasiBell::PhiMinus
        } else {
            QuasiBell::PhiPlus
        }
    }

    fn sign(self) -> f64 {
        match self {
            QuasiBell::PhiPlus | QuasiBell::PsiPlus => 1.0,
            QuasiBell::PhiMinus | QuasiBell::PsiMinus => -1.0,
        }
    }

    fn correlated(self) -> bool {
        matches!(self, QuasiBell::PhiPlus | QuasiBell::PhiMinus)
    }
}

/// `(|beta, +-beta> +- |-beta, -+beta>)`, normalized in the truncated space `dims`.
pub fn quasi_bell_state<T: Real>(kind: QuasiBell, beta: Complex<T>, dims: [usize; 2]) -> Result<FockVector<T>> {
    let plus_a = coherent_state(beta, dims[0] - 1)?;
    let minus_a = coherent_state(-beta, dims[0] - 1)?;
    let plus_b = coherent_state(beta, dims[1] - 1)?;
    let minus_b = coherent_state(-beta, dims[1] - 1)?;
    let (first, second) = if kind.correlated() {
        (plus_a.tensor(&plus_b), minus_a.tensor(&minus_b))
    } else {
        (plus_a.tensor(&minus_b), minus_a.tensor(&plus_b))
    };
    let one = Complex::new(T::one(), T::zero());
    let s = Complex::new(T::lit(kind.sign()), T::zero());
    FockVector::superpose(&[(one, &first), (s, &second)])?.normalized()
}

pub(crate) fn check_alpha(alpha_sq: f64) -> Result<()> {
    if alpha_sq > ORACLE_ALPHA_SQ_LIMIT {
        Err(Error::OracleRange { alpha_sq, limit: ORACLE_ALPHA_SQ_LIMIT })
    } else {
        Ok(())
    }
}

/// Sector weights `(sigma, F_sigma)` of a two-weight mixture, dropping empty sectors.
pub(crate) fn sectors<T: Real>(s: &crate::analytic::MixedLinkState<T>) -> Vec<(i8, T)> {
    [(-1i8, s.f_minus), (1, s.f_plus)].into_iter().filter(|&(_, w)| w > T::zero()).collect()
}

/// Unnormalized state on the span of `basis` (occupation vectors) after every mode of
/// `psi` loses photons with survival `eta`, conditioned on the survivors matching one of
/// the basis vectors exactly.
pub(crate) fn lossy_subspace<T: Real>(psi: &FockVector<T>, eta: T, basis: &[Vec<usize>]) -> Vec<Complex<T>> {
    let dims = psi.dims();
    let nb = basis.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut rho = vec![zero; nb * nb];
    let st = crate::fock::strides_of(dims);
    let total: usize = dims.iter().product();
    let mut v = vec![zero; nb];
    for lost in 0..total {
        let l: Vec<usize> = (0..dims.len()).map(|m| (lost / st[m]) % dims[m]).collect();
        for (b, out) in basis.iter().enumerate() {
            v[b] = zero;
            let mut idx = 0;
            let mut w = T::one();
            let mut inside = true;
            for m in 0..dims.len() {
                let n = out[m] + l[m];
                if n >= dims[m] {
                    inside = false;
                    break;
                }
                idx += n * st[m];
                w *= thinning_weight(n, out[m], eta).sqrt();
            }
            if inside {
                v[b] = psi.amplitudes()[idx].scale(w);
            }
        }
        for a in 0..nb {
            for b in 0..nb {
                rho[a * nb + b] += v[a] * v[b].conj();
            }
        }
    }
    rho
}
