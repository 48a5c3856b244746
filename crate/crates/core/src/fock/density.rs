use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};

use super::detection::{DetectionModel, DetectionOutcome};
use super::state::{occupation, strides, FockVector};
use crate::error::{Error, Result};
use crate::scalar::{thinning_weight, Real};

/// Mixed state on a truncated multi-mode Fock space, stored as a dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Real> {
    dims: Vec<usize>,
    mat: Vec<Complex<T>>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(dims: Vec<usize>, mat: Vec<Complex<T>>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if mat.len() != d * d {
            return Err(Error::Dimension { expected: d * d, found: mat.len() });
        }
        Ok(Self { dims, mat })
    }

    pub fn from_pure(psi: &FockVector<T>) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        let mut mat = Vec::with_capacity(d * d);
        for x in a {
            mat.extend(a.iter().map(|y| x * y.conj()));
        }
        Self { dims: psi.dims().to_vec(), mat }
    }

    /// `sum_k p_k |psi_k><psi_k|`.
    pub fn from_ensemble(terms: &[(T, &FockVector<T>)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
        let mut out = Self::zeros(first.1.dims().to_vec());
        for (p, psi) in terms {
            if psi.dims() != out.dims.as_slice() {
                return Err(Error::Dimension { expected: out.dim(), found: psi.len() });
            }
            out.add_scaled(&Self::from_pure(psi), *p);
        }
        Ok(out)
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self { dims, mat: vec![Complex::new(T::zero(), T::zero()); d * d] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.mat[row * self.dim() + col]
    }

    pub(crate) fn add_scaled(&mut self, other: &Self, w: T) {
        debug_assert_eq!(self.dims, other.dims);
        for (a, b) in self.mat.iter_mut().zip(&other.mat) {
            *a += b.scale(w);
        }
    }

    pub fn scaled(mut self, w: T) -> Self {
        self.mat.iter_mut().for_each(|a| *a = a.scale(w));
        self
    }

    pub fn trace(&self) -> T {
        let d = self.dim();
        (0..d).map(|i| self.mat[i * d + i].re).sum()
    }

    pub fn normalized(self) -> Result<Self> {
        let tr = self.trace();
        if tr <= T::min_positive_value() {
            return Err(Error::InvalidState("zero trace".into()));
        }
        Ok(self.scaled(T::one() / tr))
    }

    pub fn purity(&self) -> T {
        self.mat.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.mat[i * d + j] - self.mat[j * d + i].conj()).norm());
            }
        }
        worst
    }

    /// Spectrum in ascending order, computed in double precision.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
            let a = self.mat[i * d + j];
            Complex64::new(a.re.as_f64(), a.im.as_f64())
        });
        // symmetrize so round-off never leaks into the solver
        let h = (&m + m.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Trace one, Hermitian and positive semidefinite, each within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let tr = self.trace().as_f64();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_defect().as_f64();
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:.3e})")));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues().iter().filter(|&&l| l > 1e-14).map(|&l| -l * l.log2()).sum()
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_pure(&self, psi: &FockVector<T>) -> T {
        assert_eq!(self.dims.as_slice(), psi.dims(), "fidelity against a state of another space");
        let a = psi.amplitudes();
        let d = a.len();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..d {
            if a[i].norm_sqr() == T::zero() {
                continue;
            }
            let row = &self.mat[i * d..(i + 1) * d];
            let mut r = Complex::new(T::zero(), T::zero());
            for (x, y) in row.iter().zip(a) {
                r += x * y;
            }
            acc += a[i].conj() * r;
        }
        acc.re
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.n_modes() {
            Ok(())
        } else {
            Err(Error::InvalidMode { mode, n_modes: self.n_modes() })
        }
    }

    pub fn photon_distribution(&self, mode: usize) -> Vec<T> {
        let st = strides(&self.dims);
        let d = self.dim();
        let mut p = vec![T::zero(); self.dims[mode]];
        for i in 0..d {
            p[occupation(i, &self.dims, &st, mode)] += self.mat[i * d + i].re;
        }
        p
    }

    pub fn mean_photon_number(&self, mode: usize) -> T {
        let p = self.photon_distribution(mode);
        p.iter().enumerate().map(|(n, &w)| T::lit(n as f64) * w).sum::<T>() / self.trace()
    }

    /// `P rho P` with `P` the parity operator on `mode`.
    pub fn apply_parity(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let st = strides(&self.dims);
        let d = self.dim();
        let mut out = self.clone();
        for i in 0..d {
            let pi = occupation(i, &self.dims, &st, mode) % 2;
            for j in 0..d {
                if pi != occupation(j, &self.dims, &st, mode) % 2 {
                    out.mat[i * d + j] = -out.mat[i * d + j];
                }
            }
        }
        Ok(out)
    }

    /// Pure-loss channel on one mode: each photon survives independently with
    /// probability `survival`.
    pub fn loss_channel(&self, mode: usize, survival: T) -> Result<Self> {
        self.check_mode(mode)?;
        if !(survival >= T::zero() && survival <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "survival",
                value: survival.as_f64(),
                reason: "must lie in [0, 1]",
            });
        }
        let dm = self.dims[mode];
        // amp[n][l] = sqrt(C(n,l) eta^(n-l) (1-eta)^l): l photons lost
        let amp: Vec<Vec<T>> =
            (0..dm).map(|n| (0..=n).map(|l| thinning_weight(n, n - l, survival).sqrt()).collect()).collect();
        let st = strides(&self.dims);
        let d = self.dim();
        let s = st[mode];
        let mut out = Self::zeros(self.dims.clone());
        for i in 0..d {
            let n = occupation(i, &self.dims, &st, mode);
            for j in 0..d {
                let rho = self.mat[i * d + j];
                if rho.norm_sqr() == T::zero() {
                    continue;
                }
                let m = occupation(j, &self.dims, &st, mode);
                // l photons lost from both sides of the coherence
                #[allow(clippy::needless_range_loop)]
                for l in 0..=n.min(m) {
                    let w = amp[n][l] * amp[m][l];
                    out.mat[(i - l * s) * d + (j - l * s)] += rho.scale(w);
                }
            }
        }
        Ok(out)
    }

    /// Number-resolving measurement of `mode` through `model`; the measured mode is
    /// traced out of each conditional state. Outcomes with zero probability carry no state.
    pub fn detect_number(&self, mode: usize, model: &DetectionModel<T>) -> Result<Vec<DetectionOutcome<T>>> {
        let lossy = self.loss_channel(mode, model.efficiency)?;
        let dm = self.dims[mode];
        let keep: Vec<usize> = (0..self.n_modes()).filter(|&m| m != mode).collect();
        let mut out = Vec::with_capacity(dm);
        for n in 0..dm {
            let block = lossy.project(mode, n);
            let p = block.trace();
            let state = if p > T::zero() && !keep.is_empty() {
                Some(block.partial_trace(&keep)?.scaled(T::one() / p))
            } else {
                None
            };
            out.push(DetectionOutcome { count: n, probability: p, state });
        }
        Ok(out)
    }

    /// Unnormalized `|n><n|_mode rho |n><n|_mode`.
    pub fn project(&self, mode: usize, n: usize) -> Self {
        let st = strides(&self.dims);
        let d = self.dim();
        let mut out = Self::zeros(self.dims.clone());
        let rows: Vec<usize> = (0..d).filter(|&i| occupation(i, &self.dims, &st, mode) == n).collect();
        for &i in &rows {
            for &j in &rows {
                out.mat[i * d + j] = self.mat[i * d + j];
            }
        }
        out
    }

    /// Reduced state on `keep` (in the order given).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        for &m in keep {
            self.check_mode(m)?;
        }
        let traced: Vec<usize> = (0..self.n_modes()).filter(|m| !keep.contains(m)).collect();
        let st = strides(&self.dims);
        let kdims: Vec<usize> = keep.iter().map(|&m| self.dims[m]).collect();
        let tdims: Vec<usize> = traced.iter().map(|&m| self.dims[m]).collect();
        let kst = strides(&kdims);
        let tst = strides(&tdims);
        let kd: usize = kdims.iter().product();
        let td: usize = tdims.iter().product();
        let full = |k: usize, t: usize| -> usize {
            let mut idx = 0;
            for (pos, &m) in keep.iter().enumerate() {
                idx += occupation(k, &kdims, &kst, pos) * st[m];
            }
            for (pos, &m) in traced.iter().enumerate() {
                idx += occupation(t, &tdims, &tst, pos) * st[m];
            }
            idx
        };
        let d = self.dim();
        let mut out = Self::zeros(kdims.clone());
        for t in 0..td {
            for a in 0..kd {
                let i = full(a, t);
                for b in 0..kd {
                    out.mat[a * kd + b] += self.mat[i * d + full(b, t)];
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cat_state, coherent_state, Parity};
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn pure_state_properties() {
        let psi = cat_state(c(1.0), Parity::Even, 20).unwrap();
        let rho = psi.to_density();
        rho.validate(1e-10).unwrap();
        assert_relative_eq!(rho.purity(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(rho.fidelity_pure(&psi), 1.0, epsilon = 1e-12);
        assert!(rho.von_neumann_entropy().abs() < 1e-8);
    }

    #[test]
    fn loss_keeps_coherent_states_pure() {
        let psi = coherent_state(c(1.3), 24).unwrap();
        let out = psi.to_density().loss_channel(0, 0.6).unwrap();
        let expect = coherent_state(c(1.3 * 0.6f64.sqrt()), 24).unwrap();
        assert_relative_eq!(out.fidelity_pure(&expect), 1.0, epsilon = 1e-10);
        assert_relative_eq!(out.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn loss_on_single_photon() {
        let one = FockVector::<f64>::basis(vec![3], &[1]).to_density();
        let out = one.loss_channel(0, 0.7).unwrap();
        assert_relative_eq!(out.get(1, 1).re, 0.7, epsilon = 1e-14);
        assert_relative_eq!(out.get(0, 0).re, 0.3, epsilon = 1e-14);
        assert_eq!(one.loss_channel(0, 1.0).unwrap(), one);
        assert!(one.loss_channel(0, 1.5).is_err());
    }

    #[test]
    fn loss_dephases_cats() {
        // after loss the cat coherence shrinks by exp(-2(1-eta)|alpha|^2)
        let a = 1.0f64;
        let eta = 0.8;
        let even = cat_state(c(a), Parity::Even, 20).unwrap().to_density().loss_channel(0, eta).unwrap();
        let beta = a * eta.sqrt();
        let b2 = beta * beta;
        let k = (-2.0 * (1.0 - eta) * a * a).exp();
        let n_even = 2.0 * (1.0 + (-2.0 * a * a).exp());
        // weight on the even cat of amplitude beta
        let m_plus = 2.0 * (1.0 + (-2.0 * b2).exp());
        let expect = m_plus * (1.0 + k) / (2.0 * n_even);
        let target = cat_state(c(beta), Parity::Even, 20).unwrap();
        assert_relative_eq!(even.fidelity_pure(&target), expect, epsilon = 1e-10);
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let a = coherent_state(c(0.5), 12).unwrap();
        let b = cat_state(c(0.7), Parity::Odd, 12).unwrap();
        let rho = a.tensor(&b).to_density();
        let ra = rho.partial_trace(&[0]).unwrap();
        assert_relative_eq!(ra.fidelity_pure(&a), 1.0, epsilon = 1e-12);
        let rb = rho.partial_trace(&[1]).unwrap();
        assert_relative_eq!(rb.fidelity_pure(&b), 1.0, epsilon = 1e-12);

        // (|01> + |10>)/sqrt 2 has one bit of entanglement
        let s = 0.5f64.sqrt();
        let bell = FockVector::new(vec![2, 2], vec![c(0.0), c(s), c(s), c(0.0)]).unwrap();
        let half = bell.to_density().partial_trace(&[1]).unwrap();
        assert_relative_eq!(half.von_neumann_entropy(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parity_flips_coherences() {
        let psi = coherent_state(c(0.9), 16).unwrap();
        let flipped = psi.to_density().apply_parity(0).unwrap();
        let minus = coherent_state(c(-0.9), 16).unwrap();
        assert_relative_eq!(flipped.fidelity_pure(&minus), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn detection_of_lossy_coherent_state_is_poisson() {
        let psi = coherent_state(c(1.0), 18).unwrap().tensor(&FockVector::vacuum(vec![2]));
        let model = DetectionModel { efficiency: 0.5 };
        let out = psi.to_density().detect_number(0, &model).unwrap();
        let mean = 0.5f64;
        for o in out.iter().take(6) {
            let poisson = (-mean).exp() * mean.powi(o.count as i32) / (1..=o.count).product::<usize>() as f64;
            assert_relative_eq!(o.probability, poisson, epsilon = 1e-10);
            assert_eq!(o.state.as_ref().unwrap().dims(), &[2]);
        }
        let total: f64 = out.iter().map(|o| o.probability).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ensemble_mixture() {
        let a = FockVector::<f64>::basis(vec![2], &[0]);
        let b = FockVector::<f64>::basis(vec![2], &[1]);
        let rho = DensityOperator::from_ensemble(&[(0.5, &a), (0.5, &b)]).unwrap();
        rho.validate(1e-12).unwrap();
        assert_relative_eq!(rho.von_neumann_entropy(), 1.0, epsilon = 1e-12);
        assert!(DensityOperator::<f64>::new(vec![2], vec![c(1.0)]).is_err());
    }
}
