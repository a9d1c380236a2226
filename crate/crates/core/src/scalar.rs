//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the simulator can run on (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Inner kernel of the RK4 stepper, overridden where a faster one exists.
    #[doc(hidden)]
    #[inline]
    fn band_apply(
        factor: &[[Self; 4]; 10],
        value: &[[[Self; 4]; 10]],
        diagonal: &[[[Self; 4]; 2]],
        psi: &[[Self; 4]],
        out: &mut [[Self; 4]],
    ) {
        crate::band::apply_generic(factor, value, diagonal, psi, out)
    }
}

impl Real for f32 {}

impl Real for f64 {
    #[inline]
    fn band_apply(
        factor: &[[Self; 4]; 10],
        value: &[[[Self; 4]; 10]],
        diagonal: &[[[Self; 4]; 2]],
        psi: &[[Self; 4]],
        out: &mut [[Self; 4]],
    ) {
        crate::band::apply_f64(factor, value, diagonal, psi, out)
    }
}

/// `(cos x, sin x)` with exact zeros and units at integer multiples of π/2.
///
/// Phase set-points such as `kπ/2 / k` land an ulp away from π/2, where the
/// library `cos` returns ~6e-17 instead of 0. The flux-dependent couplings
/// must vanish exactly there, so angles within a few ulps of a quadrant point
/// are snapped onto it.
pub fn quadrant_cos_sin<T: Real>(x: T) -> (T, T) {
    let half_pi = T::FRAC_PI_2();
    let m = (x / half_pi).round();
    let rem = x - m * half_pi;
    let snap = T::epsilon() * T::lit(8.0) * T::one().max(x.abs());
    if rem.abs() <= snap {
        let quadrant = m.to_i64().map(|q| q.rem_euclid(4)).unwrap_or(0);
        let (o, z) = (T::one(), T::zero());
        return match quadrant {
            0 => (o, z),
            1 => (z, o),
            2 => (-o, z),
            _ => (z, -o),
        };
    }
    (x.cos(), x.sin())
}
