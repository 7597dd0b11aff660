//! Scalar traits shared by the numerical kernels.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};

/// Exact-arithmetic friendly ring: enough for the cubic matching map and its Jacobian.
pub trait Ring: Clone + Num + std::ops::Neg<Output = Self> + Debug {}
impl<T: Clone + Num + std::ops::Neg<Output = T> + Debug> Ring for T {}

/// Floating point scalar used by everything that needs sqrt, exp, trig.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Shorthand for constant conversion; panics only for values no float can hold.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable")
    }
    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("integer not representable")
    }
    fn to_f64_(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
