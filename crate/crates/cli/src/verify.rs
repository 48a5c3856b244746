use anyhow::Result;
use catrep::analytic::{
    link_fidelity, link_state, link_success_probability, postselection_exact, swap_outcome, swap_stage, LinkParams,
    SwapAcceptance,
};
use catrep::fock::{coherent_state, cutoff_for};
use catrep::oracle::{
    elementary_link_circuit, postselection_circuit, quasi_bell_discriminator, quasi_bell_state, swap_circuit,
    QuasiBell, ORACLE_ALPHA_SQ_LIMIT,
};
use catrep::Error;
use num_complex::Complex;

use crate::table::{num, Table};

const LINK_ALPHA: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
const SWAP_ALPHA: [f64; 3] = [0.1, 0.5, 1.0];
const TAPS: [f64; 3] = [0.01, 0.05, 0.1];

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    /// Worst discrepancy divided by its tolerance.
    pub worst_ratio: f64,
}

/// Analytic-side parameters; `eta_fault` rescales the detector efficiency the closed forms
/// see, leaving the circuits untouched.
struct Sides {
    eta_fault: f64,
}

impl Sides {
    fn analytic(&self, p: &LinkParams<f64>) -> LinkParams<f64> {
        LinkParams { eta_d: p.eta_d * self.eta_fault, ..*p }
    }
}

fn check(name: &'static str, ratios: impl IntoIterator<Item = f64>) -> Check {
    let worst = ratios.into_iter().fold(0.0f64, |w, r| if r.is_nan() { f64::INFINITY } else { w.max(r) });
    Check { name, pass: worst <= 1.0, worst_ratio: worst }
}

/// Refuse amplitudes the dense circuits cannot hold.
pub fn admit(link: &LinkParams<f64>) -> Result<(), Error> {
    if link.alpha_sq > ORACLE_ALPHA_SQ_LIMIT {
        return Err(Error::OracleRange { alpha_sq: link.alpha_sq, limit: ORACLE_ALPHA_SQ_LIMIT });
    }
    Ok(())
}

pub fn run(link: &LinkParams<f64>, eta_fault: f64) -> Result<Vec<Check>> {
    admit(link)?;
    let sides = Sides { eta_fault };
    let mut checks = Vec::new();

    // weak heralding, where the closed forms are exact to second order in |alpha|^2 tap
    let mut r = Vec::new();
    for a in LINK_ALPHA {
        for s in TAPS {
            let p = LinkParams { length_km: 1e-12, ..LinkParams::new(a, s, 1.0) }.with_efficiencies(1.0, 1e-8);
            let c = elementary_link_circuit(&p)?;
            let q = sides.analytic(&p);
            let bound = 3.0 * (a * s).powi(2);
            r.push((c.herald_fidelity - link_fidelity(&q)).abs() / bound);
            r.push((c.herald_probability / link_success_probability(&q) - 1.0).abs() / bound);
        }
    }
    checks.push(check("link_weak_heralding", r));

    // configured link: finite herald efficiency adds a second-photon error
    let c = elementary_link_circuit(link)?;
    let q = sides.analytic(link);
    let f0 = link_fidelity(&q);
    let herald = catrep::analytic::eta_t(link) * link.eta_d;
    let bound = 3.0 * (link.alpha_sq * link.tap).powi(2) + herald * (1.0 - f0) + 1e-12;
    checks.push(check("link_configured", [(c.herald_fidelity - f0).abs() / bound]));

    let mut r = Vec::new();
    for a in SWAP_ALPHA {
        for s in TAPS {
            let p = LinkParams { eta_d: link.eta_d, eta_m: link.eta_m, ..LinkParams::new(a, s, link.length_km) };
            let state = link_state(&p);
            let c = swap_circuit(&state, &state, &p)?;
            let q = sides.analytic(&p);
            for n in 1..=6 {
                let closed = swap_outcome(&state, &q, n)?;
                let (pe, fe) = c.outcome(n).map_or((0.0, closed.fidelity), |o| (o.p_success, o.fidelity));
                r.push((pe - closed.p_success).abs() / 1e-3);
                if pe > 1e-6 {
                    r.push((fe - closed.fidelity).abs() / 1e-3);
                }
            }
        }
    }
    checks.push(check("swap_per_count", r));

    let mut r = Vec::new();
    for p in [*link, LinkParams::new(0.3, 0.05, 150.0).with_efficiencies(0.9, 0.9)] {
        let s = swap_stage(&link_state(&p), &p, SwapAcceptance::OddOnly).state_after;
        let c = postselection_circuit(&s, &s, &p)?;
        let ex = postselection_exact(&s, &s, &sides.analytic(&p));
        r.push((c.accepted.fidelity_vs_target.unwrap_or(f64::NAN) - ex.fidelity).abs() / 1e-8);
        r.push((c.accepted.probability / ex.probability - 1.0).abs() / 1e-7);
    }
    checks.push(check("postselection", r));

    let mut r = Vec::new();
    for a in LINK_ALPHA {
        let exact = 2.0 * (-2.0 * a).exp() / (1.0 + (-4.0 * a).exp());
        for kind in [QuasiBell::PhiPlus, QuasiBell::PsiPlus] {
            r.push((quasi_bell_discriminator(kind, a, 1.0)?.failure_probability() - exact).abs() / 1e-8);
        }
        for kind in [QuasiBell::PhiMinus, QuasiBell::PsiMinus] {
            r.push(quasi_bell_discriminator(kind, a, 1.0)?.failure_probability() / 1e-10);
        }
    }
    checks.push(check("discriminator", r));

    let mut r = Vec::new();
    for a in LINK_ALPHA {
        let d = cutoff_for(a) + 1;
        let phi = quasi_bell_state(QuasiBell::PhiMinus, Complex::new(a.sqrt(), 0.0), [d, d])?;
        let half = phi.to_density().partial_trace(&[0])?;
        r.push((half.von_neumann_entropy() - 1.0).abs() / 1e-6);
    }
    checks.push(check("one_ebit", r));

    let mut r = Vec::new();
    for a in LINK_ALPHA {
        let d = cutoff_for(2.0 * a);
        let psi =
            coherent_state(Complex::new(a.sqrt(), 0.0), d)?.tensor(&coherent_state(Complex::new(0.0, a.sqrt()), d)?);
        for t in [0.1, 0.5, 0.9] {
            let out = psi.beamsplitter(0, 1, t)?;
            r.push((out.norm_sqr() - 1.0).abs() / 1e-10);
            let total = |x: &catrep::FockVector64| x.mean_photon_number(0) + x.mean_photon_number(1);
            r.push((total(&out) - total(&psi)).abs() / 1e-8);
        }
    }
    checks.push(check("beamsplitter_invariants", r));
    Ok(checks)
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new("verify", &["check", "status", "worst_over_tolerance"]);
    for c in checks {
        t.push(vec![c.name.into(), if c.pass { "pass" } else { "fail" }.into(), num(c.worst_ratio)]);
    }
    t
}
