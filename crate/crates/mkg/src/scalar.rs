//! Scalar abstraction for the type-agnostic numerical kernels.

use num_traits as nt;

/// Floating-point scalar usable by the generic kernels (potential evaluation,
/// quadrature, the relativistic pusher). `f64` is the pipeline default; `f32`
/// is supported where the tolerances permit.
pub trait Scalar:
    nt::Float + nt::FloatConst + nt::FromPrimitive + nt::NumAssign + Copy + Send + Sync + std::fmt::Debug
{
    const ZERO: Self;
    const ONE: Self;
    const TWO: Self;
    const HALF: Self;

    /// Lossy conversion from `f64` literals (constants, tolerances).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const TWO: Self = 2.0;
            const HALF: Self = 0.5;
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
