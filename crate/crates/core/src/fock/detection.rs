use num_complex::Complex;

use super::density::DensityOperator;
use super::state::{occupation, strides, FockVector};
use crate::error::{Error, Result};
use crate::scalar::{thinning_weight, Real};

/// Number-resolving detector preceded by a pure-loss channel of transmission `efficiency`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel<T: Real> {
    pub efficiency: T,
}

impl<T: Real> DetectionModel<T> {
    pub fn ideal() -> Self {
        Self { efficiency: T::one() }
    }

    pub fn new(efficiency: T) -> Result<Self> {
        if efficiency >= T::zero() && efficiency <= T::one() {
            Ok(Self { efficiency })
        } else {
            Err(Error::InvalidParameter {
                name: "efficiency",
                value: efficiency.as_f64(),
                reason: "must lie in [0, 1]",
            })
        }
    }
}

/// One click count on a single mode, with the normalized state of the remaining modes.
#[derive(Debug, Clone)]
pub struct DetectionOutcome<T: Real> {
    pub count: usize,
    pub probability: T,
    pub state: Option<DensityOperator<T>>,
}

/// Joint click pattern on several modes.
#[derive(Debug, Clone)]
pub struct PatternOutcome<T: Real> {
    pub counts: Vec<usize>,
    pub probability: T,
    /// Unnormalized conditional state of the unmeasured modes (trace = `probability`);
    /// `None` when every mode was measured or the pattern fell below the threshold.
    pub state: Option<DensityOperator<T>>,
}

/// Every click pattern of a lossy joint measurement of a pure state.
#[derive(Debug, Clone)]
pub struct LossyMeasurement<T: Real> {
    pub measured: Vec<usize>,
    pub kept: Vec<usize>,
    pub patterns: Vec<PatternOutcome<T>>,
}

impl<T: Real> LossyMeasurement<T> {
    pub fn total_probability(&self) -> T {
        self.patterns.iter().map(|p| p.probability).sum()
    }

    pub fn pattern(&self, counts: &[usize]) -> Option<&PatternOutcome<T>> {
        self.patterns.iter().find(|p| p.counts == counts)
    }
}

impl<T: Real> FockVector<T> {
    /// Lossy number-resolving measurement of `modes`, all through the same `model`.
    ///
    /// Pattern probabilities are exact for every pattern inside the cutoffs;
    /// conditional states are built only for patterns with probability at least
    /// `min_probability`.
    pub fn measure_lossy(
        &self,
        modes: &[usize],
        model: &DetectionModel<T>,
        min_probability: T,
    ) -> Result<LossyMeasurement<T>> {
        self.measure_lossy_where(modes, model, |_, p| p >= min_probability)
    }

    /// As [`measure_lossy`](Self::measure_lossy), building conditional states only for
    /// patterns accepted by `want(counts, probability)`.
    pub fn measure_lossy_where(
        &self,
        modes: &[usize],
        model: &DetectionModel<T>,
        want: impl Fn(&[usize], T) -> bool,
    ) -> Result<LossyMeasurement<T>> {
        for (k, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..k].contains(&m) {
                return Err(Error::SameMode(m));
            }
        }
        let dims = self.dims();
        let st = self.strides();
        let kept: Vec<usize> = (0..self.n_modes()).filter(|m| !modes.contains(m)).collect();
        let mdims: Vec<usize> = modes.iter().map(|&m| dims[m]).collect();
        let kdims: Vec<usize> = kept.iter().map(|&m| dims[m]).collect();
        let mst = strides(&mdims);
        let kst = strides(&kdims);
        let md: usize = mdims.iter().product();
        let kd: usize = kdims.iter().product();

        // regroup amplitudes as blocks[measured index][kept index]
        let zero = Complex::new(T::zero(), T::zero());
        let mut blocks = vec![zero; md * kd];
        for (i, a) in self.amplitudes().iter().enumerate() {
            let mi: usize = modes.iter().enumerate().map(|(p, &m)| occupation(i, dims, &st, m) * mst[p]).sum();
            let ki: usize = kept.iter().enumerate().map(|(p, &m)| occupation(i, dims, &st, m) * kst[p]).sum();
            blocks[mi * kd + ki] = *a;
        }

        // pattern probabilities: thin the measured marginal one mode at a time
        let block_norms: Vec<T> =
            (0..md).map(|mi| blocks[mi * kd..(mi + 1) * kd].iter().map(|a| a.norm_sqr()).sum()).collect();
        let mut probs = block_norms.clone();
        let eta = model.efficiency;
        for (p, &d) in mdims.iter().enumerate() {
            let s = mst[p];
            let mut next = vec![T::zero(); md];
            for (mi, &w) in probs.iter().enumerate() {
                if w == T::zero() {
                    continue;
                }
                let m = occupation(mi, &mdims, &mst, p);
                for n in 0..=m.min(d - 1) {
                    next[mi - (m - n) * s] += w * thinning_weight(m, n, eta);
                }
            }
            probs = next;
        }

        // sqrt thinning amplitudes per mode, indexed [m][n]
        let amp: Vec<Vec<Vec<T>>> = mdims
            .iter()
            .map(|&d| (0..d).map(|m| (0..=m).map(|n| thinning_weight(m, n, eta).sqrt()).collect()).collect())
            .collect();

        let mut patterns = Vec::with_capacity(md);
        for (ni, &p) in probs.iter().enumerate() {
            let counts: Vec<usize> = (0..modes.len()).map(|q| occupation(ni, &mdims, &mst, q)).collect();
            let state = if kept.is_empty() || p <= T::zero() || !want(&counts, p) {
                None
            } else {
                let mut rho = vec![zero; kd * kd];
                // enumerate every pre-loss occupation m >= n componentwise
                for mi in 0..md {
                    let mut w = T::one();
                    for (q, &n) in counts.iter().enumerate() {
                        let m = occupation(mi, &mdims, &mst, q);
                        if m < n {
                            w = T::zero();
                            break;
                        }
                        w *= amp[q][m][n];
                    }
                    if w == T::zero() || block_norms[mi] <= T::min_positive_value() {
                        continue;
                    }
                    let u = &blocks[mi * kd..(mi + 1) * kd];
                    for (a, ua) in u.iter().enumerate() {
                        if ua.norm_sqr() == T::zero() {
                            continue;
                        }
                        let x = ua.scale(w * w);
                        for (b, ub) in u.iter().enumerate() {
                            rho[a * kd + b] += x * ub.conj();
                        }
                    }
                }
                Some(DensityOperator::new(kdims.clone(), rho)?)
            };
            patterns.push(PatternOutcome { counts, probability: p, state });
        }
        Ok(LossyMeasurement { measured: modes.to_vec(), kept, patterns })
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
    fn model_validation() {
        assert!(DetectionModel::new(1.2f64).is_err());
        assert_eq!(DetectionModel::<f64>::ideal().efficiency, 1.0);
    }

    #[test]
    fn matches_loss_then_detect_on_density() {
        let psi = cat_state(c(0.9), Parity::Odd, 13)
            .unwrap()
            .tensor(&coherent_state(c(0.5), 13).unwrap())
            .beamsplitter(0, 1, 0.3)
            .unwrap()
            .tensor(&cat_state(c(0.6), Parity::Even, 13).unwrap());
        let model = DetectionModel { efficiency: 0.7 };
        let fast = psi.measure_lossy(&[1], &model, 0.0).unwrap();
        let slow = psi.to_density().detect_number(1, &model).unwrap();
        for o in &slow {
            let p = fast.pattern(&[o.count]).unwrap();
            assert_relative_eq!(p.probability, o.probability, epsilon = 1e-12);
            if o.probability > 1e-8 {
                let mine = p.state.clone().unwrap().scaled(1.0 / p.probability);
                let theirs = o.state.as_ref().unwrap();
                for i in 0..mine.dim() {
                    for j in 0..mine.dim() {
                        assert!((mine.get(i, j) - theirs.get(i, j)).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn joint_pattern_probabilities_factorize_for_products() {
        let a = coherent_state(c(0.8), 14).unwrap();
        let b = coherent_state(c(0.4), 14).unwrap();
        let psi = a.tensor(&b);
        let model = DetectionModel { efficiency: 0.9 };
        let joint = psi.measure_lossy(&[0, 1], &model, 0.0).unwrap();
        assert_relative_eq!(joint.total_probability(), 1.0, epsilon = 1e-10);
        let (ma, mb): (f64, f64) = (0.64 * 0.9, 0.16 * 0.9);
        let p = joint.pattern(&[1, 2]).unwrap().probability;
        let expect = (-ma).exp() * ma * (-mb).exp() * mb * mb / 2.0;
        assert_relative_eq!(p, expect, epsilon = 1e-12);
        assert!(joint.patterns.iter().all(|p| p.state.is_none()));
    }

    #[test]
    fn thresholded_states_are_skipped() {
        let psi = coherent_state(c(0.5), 12).unwrap().tensor(&FockVector::vacuum(vec![2]));
        let out = psi.measure_lossy(&[0], &DetectionModel::ideal(), 1e-3).unwrap();
        assert!(out.pattern(&[0]).unwrap().state.is_some());
        assert!(out.pattern(&[9]).unwrap().state.is_none());
        assert!(psi.measure_lossy(&[0, 0], &DetectionModel::ideal(), 0.0).is_err());
    }
}
