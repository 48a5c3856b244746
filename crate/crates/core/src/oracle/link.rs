use num_complex::Complex;

use super::{check_alpha, quasi_bell_state, CircuitResult, QuasiBell};
use crate::analytic::{eta_t, LinkParams};
use crate::error::Result;
use crate::fock::{cat_cutoff_for, cat_state, cutoff_for, DetectionModel, FockVector, Parity};
use crate::scalar::Real;

/// Exact statistics of one elementary-link attempt.
#[derive(Debug, Clone)]
pub struct LinkCircuit<T: Real> {
    /// Every `(d, d~)` click pattern inside the cutoffs; single-click patterns carry the
    /// conditional memory state and its fidelity with the target.
    pub results: Vec<CircuitResult<T>>,
    /// Probability of exactly one click in total.
    pub herald_probability: T,
    /// Fidelity of the heralded state (after relabeling `d~` heralds), averaged over both
    /// single-click patterns.
    pub herald_fidelity: T,
    /// Per-mode dimensions `[s_a, a', s_b, b']`.
    pub dims: Vec<usize>,
}

pub fn elementary_link_circuit<T: Real>(p: &LinkParams<T>) -> Result<LinkCircuit<T>> {
    elementary_link_circuit_phased(p, T::zero())
}

/// Elementary link with source amplitude `|alpha| e^{i phase}`.
///
/// Two odd cats each leak a fraction `tap` into a traveling mode; the traveling modes
/// meet on a 50/50 splitter and are counted with overall efficiency `eta_t eta_d`
/// (symmetric loss commutes with the splitter). A single click in `d` heralds
/// `phi_-^theta` on the memories; a click in `d~` heralds `psi_-^theta`, relabeled to
/// `phi_-^theta` by the parity flip on the second memory.
pub fn elementary_link_circuit_phased<T: Real>(p: &LinkParams<T>, phase: T) -> Result<LinkCircuit<T>> {
    p.validate()?;
    let a = p.alpha_sq.as_f64();
    check_alpha(a)?;
    let dm = cat_cutoff_for(a, Parity::Odd) + 1;
    let dt = cutoff_for(2.0 * a * p.tap.as_f64()) + 1;
    let alpha = Complex::from_polar(p.alpha_sq.sqrt(), phase);
    let cat = cat_state(alpha, Parity::Odd, dm - 1)?;
    let vac = FockVector::vacuum(vec![dt]);
    let half = T::lit(0.5);
    // modes [s_a, a', s_b, b']; afterwards a' holds d and b' holds d~
    let psi = cat
        .tensor(&vac)
        .tensor(&cat)
        .tensor(&vac)
        .beamsplitter(0, 1, p.tap)?
        .beamsplitter(2, 3, p.tap)?
        .beamsplitter(3, 1, half)?;
    let model = DetectionModel::new(eta_t(p) * p.eta_d)?;
    let meas = psi.measure_lossy_where(&[1, 3], &model, |c, _| c[0] + c[1] == 1)?;

    let beta = alpha.scale(p.cos_sq().sqrt());
    let target = quasi_bell_state(QuasiBell::PhiMinus, beta, [dm, dm])?;
    let mut results = Vec::with_capacity(meas.patterns.len());
    let (mut herald_p, mut herald_pf) = (T::zero(), T::zero());
    for pat in meas.patterns {
        let (state, fidelity) = match pat.state {
            Some(rho) => {
                let rho = rho.scaled(T::one() / pat.probability);
                let rho = if pat.counts[1] == 1 { rho.apply_parity(1)? } else { rho };
                let f = rho.fidelity_pure(&target);
                herald_p += pat.probability;
                herald_pf += pat.probability * f;
                (Some(rho), Some(f))
            }
            None => (None, None),
        };
        results.push(CircuitResult {
            label: format!("d={},d~={}", pat.counts[0], pat.counts[1]),
            counts: pat.counts,
            probability: pat.probability,
            conditional_state: state,
            fidelity_vs_target: fidelity,
        });
    }
    Ok(LinkCircuit {
        results,
        herald_probability: herald_p,
        herald_fidelity: herald_pf / herald_p,
        dims: vec![dm, dt, dm, dt],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{link_fidelity, link_success_probability};

    fn weak(a: f64, s: f64) -> LinkParams<f64> {
        // eta_t eta_d = 1e-8: the regime the closed forms are first order in
        LinkParams { length_km: 1e-12, ..LinkParams::<f64>::new(a, s, 1.0) }.with_efficiencies(1.0, 1e-8)
    }

    #[test]
    fn probabilities_are_exhaustive() {
        let c = elementary_link_circuit(&LinkParams::<f64>::new(0.5, 0.1, 100.0).with_efficiencies(1.0, 0.9)).unwrap();
        let total: f64 = c.results.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-8);
        for r in c.results.iter().filter(|r| r.conditional_state.is_some()) {
            r.conditional_state.as_ref().unwrap().validate(1e-9).unwrap();
        }
    }

    #[test]
    fn weak_heralding_matches_closed_forms() {
        for (a, s) in [(0.5, 0.05), (1.0, 0.1), (0.1, 0.01)] {
            let p = weak(a, s);
            let c = elementary_link_circuit(&p).unwrap();
            let bound = 3.0 * (a * s) * (a * s);
            assert!((c.herald_fidelity - link_fidelity(&p)).abs() <= bound, "F at {a},{s}");
            let rel = c.herald_probability / link_success_probability(&p) - 1.0;
            assert!(rel.abs() <= bound, "P at {a},{s}: {rel}");
        }
    }

    #[test]
    fn finite_efficiency_adds_second_photon_error() {
        let p = LinkParams::<f64>::new(0.5, 0.05, 100.0).with_efficiencies(1.0, 0.9);
        let c = elementary_link_circuit(&p).unwrap();
        let f0 = link_fidelity(&p);
        let x = 0.5 * 0.05;
        let herald = eta_t(&p) * 0.9;
        assert!((c.herald_fidelity - f0).abs() <= 3.0 * x * x + herald * (1.0 - f0));
    }

    #[test]
    fn vanishing_tap_never_heralds() {
        let c = elementary_link_circuit(&LinkParams::<f64>::new(0.5, 1e-9, 100.0).with_efficiencies(1.0, 0.9)).unwrap();
        assert!(c.herald_probability < 1e-8);
    }

    #[test]
    fn single_photon_limit_scales_with_tap() {
        // |alpha|^2 -> 0: two single photons, either of which may be tapped and detected,
        // so the herald probability approaches 2 eta_t eta_d sin^2 theta
        let base = LinkParams::<f64>::new(0.01, 0.05, 100.0).with_efficiencies(1.0, 0.9);
        let c1 = elementary_link_circuit(&base).unwrap();
        let c2 = elementary_link_circuit(&base.with_tap(0.1)).unwrap();
        let eta = eta_t(&base) * 0.9;
        assert!((c1.herald_probability / (2.0 * eta * 0.05) - 1.0).abs() < 0.05);
        assert!((c2.herald_probability / c1.herald_probability - 2.0).abs() < 0.1);
    }

    #[test]
    fn phase_covariance() {
        let p = LinkParams::<f64>::new(0.5, 0.1, 100.0).with_efficiencies(1.0, 0.9);
        let c0 = elementary_link_circuit(&p).unwrap();
        let c1 = elementary_link_circuit_phased(&p, 0.7).unwrap();
        assert!((c0.herald_fidelity - c1.herald_fidelity).abs() < 1e-10);
        assert!((c0.herald_probability - c1.herald_probability).abs() < 1e-12);
    }
}
