//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point type the crate can compute with (`f32` or `f64`).
///
/// Tolerance defaults scale with the precision of the type: the `f64`
/// values are the documented production defaults, the `f32` values are
/// loose enough for single precision round-off at desk-scale sizes.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Default max-abs tolerance for unitarity and Hermiticity checks.
    const DEFAULT_TOL: f64;
    /// Default tolerance for identities that involve a linear solve.
    const DEFAULT_TOL_SOLVE: f64;
    /// Default trace-drift tolerance for density-matrix integration.
    const DEFAULT_TOL_TRACE: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const DEFAULT_TOL: f64 = 1e-10;
    const DEFAULT_TOL_SOLVE: f64 = 1e-10;
    const DEFAULT_TOL_TRACE: f64 = 1e-8;
}

impl Real for f32 {
    const DEFAULT_TOL: f64 = 1e-4;
    const DEFAULT_TOL_SOLVE: f64 = 1e-4;
    const DEFAULT_TOL_TRACE: f64 = 1e-4;
}

pub type C<T> = Complex<T>;
pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn imag_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// `|z|`.
#[inline]
pub fn abs<T: Real>(z: C<T>) -> T {
    z.modulus()
}

/// `arg z ∈ (−π, π]`.
#[inline]
pub fn arg<T: Real>(z: C<T>) -> T {
    z.argument()
}
