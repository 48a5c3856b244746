use num_complex::Complex;

use super::{DensityOperator, Parity, NORM_TOLERANCE, TAIL_TOLERANCE};
use crate::error::{Error, Result};
use crate::scalar::{ln_binomial, ln_factorial, Real};

/// Pure state of `dims.len()` bosonic modes in a truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<T: Real> {
    dims: Vec<usize>,
    amps: Vec<Complex<T>>,
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for m in (0..dims.len().saturating_sub(1)).rev() {
        s[m] = s[m + 1] * dims[m + 1];
    }
    s
}

pub(crate) fn occupation(index: usize, dims: &[usize], strides: &[usize], mode: usize) -> usize {
    (index / strides[mode]) % dims[mode]
}

impl<T: Real> FockVector<T> {
    pub fn new(dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if amps.len() != expected {
            return Err(Error::Dimension { expected, found: amps.len() });
        }
        if dims.contains(&0) {
            return Err(Error::InvalidState("zero-dimensional mode".into()));
        }
        Ok(Self { dims, amps })
    }

    pub fn vacuum(dims: Vec<usize>) -> Self {
        Self::basis(dims.clone(), &vec![0; dims.len()])
    }

    /// Number state `|n_0, n_1, ...>`.
    pub fn basis(dims: Vec<usize>, occupations: &[usize]) -> Self {
        assert_eq!(dims.len(), occupations.len());
        let total: usize = dims.iter().product();
        let mut amps = vec![Complex::new(T::zero(), T::zero()); total];
        let st = strides(&dims);
        let idx: usize = occupations
            .iter()
            .zip(&st)
            .zip(&dims)
            .map(|((&n, &s), &d)| {
                assert!(n < d, "occupation {n} beyond cutoff {}", d - 1);
                n * s
            })
            .sum();
        amps[idx] = Complex::new(T::one(), T::zero());
        Self { dims, amps }
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    /// Amplitude of a number state.
    pub fn amplitude(&self, occupations: &[usize]) -> Complex<T> {
        let st = self.strides();
        let idx: usize = occupations.iter().zip(&st).map(|(n, s)| n * s).sum();
        self.amps[idx]
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.n_modes() {
            Ok(())
        } else {
            Err(Error::InvalidMode { mode, n_modes: self.n_modes() })
        }
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= T::min_positive_value() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        let inv = T::one() / n.sqrt();
        self.amps.iter_mut().for_each(|a| *a = a.scale(inv));
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dims, other.dims, "inner product of mismatched spaces");
        self.amps.iter().zip(&other.amps).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|<self|other>|^2`.
    pub fn overlap_sqr(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// `self (x) other`, with `other`'s modes appended after ours.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Self { dims, amps }
    }

    /// `sum_k c_k |psi_k>` over states sharing one space.
    pub fn superpose(terms: &[(Complex<T>, &Self)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidState("empty superposition".into()))?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); first.1.len()];
        for (c, psi) in terms {
            if psi.dims != first.1.dims {
                return Err(Error::Dimension { expected: first.1.len(), found: psi.len() });
            }
            for (o, a) in amps.iter_mut().zip(&psi.amps) {
                *o += c * a;
            }
        }
        Ok(Self { dims: first.1.dims.clone(), amps })
    }

    /// Marginal photon-number distribution of one mode.
    pub fn photon_distribution(&self, mode: usize) -> Vec<T> {
        let st = self.strides();
        let mut p = vec![T::zero(); self.dims[mode]];
        for (i, a) in self.amps.iter().enumerate() {
            p[occupation(i, &self.dims, &st, mode)] += a.norm_sqr();
        }
        p
    }

    pub fn mean_photon_number(&self, mode: usize) -> T {
        let p = self.photon_distribution(mode);
        let norm: T = p.iter().copied().sum();
        p.iter().enumerate().map(|(n, &w)| T::lit(n as f64) * w).sum::<T>() / norm
    }

    /// Population of the highest retained level of `mode`.
    pub fn top_level_population(&self, mode: usize) -> T {
        *self.photon_distribution(mode).last().expect("non-empty mode")
    }

    /// Truncation adequacy: no mode may have population `>= tol` in its top level.
    pub fn check_truncation(&self, tol: T) -> Result<()> {
        for m in 0..self.n_modes() {
            let top = self.top_level_population(m);
            if top >= tol {
                return Err(Error::Truncation {
                    alpha_sq: self.mean_photon_number(m).as_f64(),
                    n_max: self.dims[m] - 1,
                    tail: top.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Photon-number parity operator `(-1)^{n}` on one mode: maps `|beta>` to `|-beta>`.
    pub fn apply_parity(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let st = self.strides();
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            if occupation(i, &self.dims, &st, mode) % 2 == 1 {
                *a = -*a;
            }
        }
        Ok(out)
    }

    /// Rotates `mode` by `exp(i phi n)`.
    pub fn apply_phase(&self, mode: usize, phi: T) -> Result<Self> {
        self.check_mode(mode)?;
        let st = self.strides();
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            let n = occupation(i, &self.dims, &st, mode);
            *a *= Complex::from_polar(T::one(), phi * T::lit(n as f64));
        }
        Ok(out)
    }

    /// Single-photon subtraction `a |psi> / ||a |psi>||`.
    pub fn subtract_photon(&self, mode: usize) -> Result<Self> {
        self.check_mode(mode)?;
        let st = self.strides();
        let mut amps = vec![Complex::new(T::zero(), T::zero()); self.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let n = occupation(i, &self.dims, &st, mode);
            if n > 0 {
                amps[i - st[mode]] = a.scale(T::lit(n as f64).sqrt());
            }
        }
        let out = Self { dims: self.dims.clone(), amps };
        if out.norm_sqr() <= T::min_positive_value() {
            return Err(Error::ZeroVector { mode });
        }
        out.normalized()
    }

    /// Two-mode beamsplitter of transmissivity `t` between modes `i` and `j`.
    ///
    /// Total photon number is conserved sector by sector; amplitude pushed above a
    /// mode's cutoff is discarded and the call fails if that discarded weight exceeds
    /// [`NORM_TOLERANCE`].
    pub fn beamsplitter(&self, i: usize, j: usize, t: T) -> Result<Self> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return Err(Error::SameMode(i));
        }
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::InvalidParameter {
                name: "transmissivity",
                value: t.as_f64(),
                reason: "must lie in [0, 1]",
            });
        }
        let (di, dj) = (self.dims[i], self.dims[j]);
        let table = BeamsplitterTable::new(di, dj, t);
        let st = self.strides();
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; self.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            if *a == zero {
                continue;
            }
            let n = occupation(idx, &self.dims, &st, i);
            let m = occupation(idx, &self.dims, &st, j);
            let base = idx - n * st[i] - m * st[j];
            for &(p, q, c) in table.row(n, m) {
                out[base + p * st[i] + q * st[j]] += a.scale(c);
            }
        }
        let result = Self { dims: self.dims.clone(), amps: out };
        let lost = self.norm_sqr() - result.norm_sqr();
        if lost > T::lit(NORM_TOLERANCE) {
            return Err(Error::Truncation {
                alpha_sq: (result.mean_photon_number(i) + result.mean_photon_number(j)).as_f64(),
                n_max: di.min(dj) - 1,
                tail: lost.as_f64(),
            });
        }
        Ok(result)
    }

    /// Pure-state density operator `|psi><psi|`.
    pub fn to_density(&self) -> DensityOperator<T> {
        DensityOperator::from_pure(self)
    }
}

/// Matrix elements `<p, q| U(t) |n, m>` restricted to outputs inside the cutoffs.
struct BeamsplitterTable<T> {
    dj: usize,
    rows: Vec<Vec<(usize, usize, T)>>,
}

impl<T: Real> BeamsplitterTable<T> {
    fn new(di: usize, dj: usize, t: T) -> Self {
        let c = (T::one() - t).sqrt();
        let s = t.sqrt();
        let mut rows = Vec::with_capacity(di * dj);
        for n in 0..di {
            for m in 0..dj {
                let total = n + m;
                let mut row = Vec::new();
                let half_norm = -(ln_factorial::<T>(n) + ln_factorial::<T>(m));
                for p in total.saturating_sub(dj - 1)..=total.min(di - 1) {
                    let q = total - p;
                    // a_i^dag^n a_j^dag^m -> (c a_i + s a_j)^n (-s a_i + c a_j)^m, collect a_i^p a_j^q
                    let mut coeff = T::zero();
                    for k in p.saturating_sub(m)..=p.min(n) {
                        let l = p - k;
                        let mag = (ln_binomial::<T>(n, k) + ln_binomial::<T>(m, l)).exp()
                            * c.powi((k + m - l) as i32)
                            * s.powi((n - k + l) as i32);
                        coeff += if l % 2 == 1 { -mag } else { mag };
                    }
                    if coeff != T::zero() {
                        let scale = (T::lit(0.5) * (ln_factorial::<T>(p) + ln_factorial::<T>(q) + half_norm)).exp();
                        row.push((p, q, coeff * scale));
                    }
                }
                rows.push(row);
            }
        }
        Self { dj, rows }
    }

    fn row(&self, n: usize, m: usize) -> &[(usize, usize, T)] {
        &self.rows[n * self.dj + m]
    }
}

/// Single-mode coherent state `|alpha>` truncated at `n_max` and renormalized.
pub fn coherent_state<T: Real>(alpha: Complex<T>, n_max: usize) -> Result<FockVector<T>> {
    let mean = alpha.norm_sqr();
    let tail = super::poisson_tail(mean, n_max);
    if tail >= T::lit(TAIL_TOLERANCE) {
        return Err(Error::Truncation { alpha_sq: mean.as_f64(), n_max, tail: tail.as_f64() });
    }
    let amps = (0..=n_max).map(|n| coherent_amplitude(alpha, n)).collect();
    FockVector::new(vec![n_max + 1], amps)?.normalized()
}

/// `<n|alpha>` without truncation.
pub(crate) fn coherent_amplitude<T: Real>(alpha: Complex<T>, n: usize) -> Complex<T> {
    let r = alpha.norm();
    if r == T::zero() {
        return if n == 0 { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
    }
    let ln_mag = T::lit(n as f64) * r.ln() - T::lit(0.5) * (ln_factorial::<T>(n) + r * r);
    Complex::from_polar(ln_mag.exp(), alpha.arg() * T::lit(n as f64))
}

/// Normalized cat state `(|alpha> +- |-alpha>)/sqrt(N_+-)`: even parity keeps only even
/// photon numbers, odd parity only odd ones.
pub fn cat_state<T: Real>(alpha: Complex<T>, parity: Parity, n_max: usize) -> Result<FockVector<T>> {
    let mean = alpha.norm_sqr();
    if parity == Parity::Odd && mean == T::zero() {
        return Err(Error::UndefinedCat);
    }
    let keep = |n: usize| parity.matches(n);
    // weight beyond the cutoff relative to the cat's own norm
    let weight = |n: usize| coherent_amplitude(alpha, n).norm_sqr();
    let kept: T = (0..=n_max).filter(|&n| keep(n)).map(weight).sum();
    let mut tail = T::zero();
    let mut n = n_max + 1;
    loop {
        let w = weight(n);
        if keep(n) {
            tail += w;
        }
        if T::lit(n as f64) > mean && w <= (kept + tail) * T::epsilon() * T::epsilon() {
            break;
        }
        n += 1;
    }
    let rel_tail = tail / (kept + tail);
    if rel_tail >= T::lit(TAIL_TOLERANCE) {
        return Err(Error::Truncation { alpha_sq: mean.as_f64(), n_max, tail: rel_tail.as_f64() });
    }
    let amps = (0..=n_max)
        .map(|n| if keep(n) { coherent_amplitude(alpha, n) } else { Complex::new(T::zero(), T::zero()) })
        .collect();
    FockVector::new(vec![n_max + 1], amps)?.normalized()
}
