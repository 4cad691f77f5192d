//! Scalar abstraction shared by the signal-processing and statistics code.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
///
/// Every numeric routine in the crate is written against this trait. The
/// statistics code is only accurate to the advertised tolerances in `f64`;
/// `f32` is supported for the DSP path where memory matters more.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Real>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    Some(xs.iter().copied().sum::<T>() / T::from_usize_lossy(xs.len()))
}

/// Mean of the `Some` entries of an iterator.
pub fn mean_present<T: Real, I: IntoIterator<Item = Option<T>>>(it: I) -> Option<T> {
    let mut sum = T::zero();
    let mut n = 0usize;
    for v in it.into_iter().flatten() {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / T::from_usize_lossy(n))
}
