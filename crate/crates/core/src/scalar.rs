use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the physics kernels are written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(n!)` accumulated in the working precision.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).map(|k| T::lit(k as f64).ln()).sum()
}

/// `ln C(n, k)`.
pub fn ln_binomial<T: Real>(n: usize, k: usize) -> T {
    debug_assert!(k <= n);
    ln_factorial::<T>(n) - ln_factorial::<T>(k) - ln_factorial::<T>(n - k)
}

/// Binomial thinning weight `C(m, n) eta^n (1-eta)^(m-n)`: probability that `n` of `m`
/// photons survive a channel of transmission `eta`.
pub fn thinning_weight<T: Real>(m: usize, n: usize, eta: T) -> T {
    if n > m {
        return T::zero();
    }
    let lost = m - n;
    if eta == T::one() {
        return if lost == 0 { T::one() } else { T::zero() };
    }
    if eta == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    let ln = ln_binomial::<T>(m, n) + T::lit(n as f64) * eta.ln() + T::lit(lost as f64) * (T::one() - eta).ln();
    ln.exp()
}
