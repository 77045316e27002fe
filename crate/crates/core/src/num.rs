//! Scalar math shims that work with and without `std`.
//!
//! `powi` is implemented by binary exponentiation in both configurations so
//! that expression evaluation gives bit-identical results regardless of the
//! feature set.

macro_rules! shim {
    ($name:ident, $libm:ident) => {
        #[inline]
        pub fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            {
                x.$name()
            }
            #[cfg(not(feature = "std"))]
            {
                libm::$libm(x)
            }
        }
    };
}

shim!(sin, sin);
shim!(cos, cos);
shim!(exp, exp);
shim!(sqrt, sqrt);
shim!(ln, log);
shim!(acos, acos);

#[inline]
pub fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Integer power by repeated squaring; total for every `(x, n)` pair.
pub fn powi(x: f64, n: i32) -> f64 {
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut k = n.unsigned_abs();
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_naive_products() {
        assert_eq!(powi(2.0, 10), 1024.0);
        assert_eq!(powi(3.0, 0), 1.0);
        assert_eq!(powi(2.0, -2), 0.25);
        assert_eq!(powi(-2.0, 3), -8.0);
    }

    #[test]
    fn shims_agree_with_std() {
        for &x in &[0.0, 0.5, 1.0, core::f64::consts::FRAC_PI_4] {
            assert_eq!(sin(x), x.sin());
            assert_eq!(cos(x), x.cos());
            assert_eq!(exp(x), x.exp());
            assert_eq!(sqrt(x), x.sqrt());
        }
    }
}
