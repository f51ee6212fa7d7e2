//! Filtered exact sign predicates.
//!
//! Every `f64` is a dyadic rational, so each predicate here is evaluated
//! exactly with respect to its floating-point inputs: a fast evaluation with
//! a forward error bound settles the sign whenever the result is clear of
//! the bound, and the remaining cases fall back to arbitrary-precision
//! rationals.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// Unit roundoff of `f64`.
const UNIT: f64 = f64::EPSILON * 0.5;

/// Absolute slack covering underflow into the subnormal range.
const TINY: f64 = 1e-290;

/// Exact rational value of a finite float.
///
/// # Panics
/// Panics on NaN or infinity; callers validate finiteness at construction.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn sign_of(x: &BigRational) -> Ordering {
    if x.is_zero() {
        Ordering::Equal
    } else if x.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

fn filtered(value: f64, bound: f64) -> Option<Ordering> {
    if value > bound {
        Some(Ordering::Greater)
    } else if value < -bound {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// Sign of `<a, x> - c`.
pub fn affine_sign(a: &[f64], x: &[f64], c: f64) -> Ordering {
    debug_assert_eq!(a.len(), x.len());
    let mut s = -c;
    let mut mag = c.abs();
    for (ai, xi) in a.iter().zip(x) {
        let p = ai * xi;
        s += p;
        mag += p.abs();
    }
    let bound = (4 * (a.len() + 2)) as f64 * UNIT * mag + TINY;
    if let Some(o) = filtered(s, bound) {
        return o;
    }
    let mut exact = -rational(c);
    for (ai, xi) in a.iter().zip(x) {
        exact += rational(*ai) * rational(*xi);
    }
    sign_of(&exact)
}

/// Sign of `|x - center|^2 - radius^2`.
pub fn sphere_sign(center: &[f64], x: &[f64], radius: f64) -> Ordering {
    debug_assert_eq!(center.len(), x.len());
    let r2 = radius * radius;
    let mut s = -r2;
    let mut mag = r2;
    for (ci, xi) in center.iter().zip(x) {
        let diff = xi - ci;
        let sq = diff * diff;
        s += sq;
        mag += sq;
    }
    let bound = (8 * (center.len() + 3)) as f64 * UNIT * mag + TINY;
    if let Some(o) = filtered(s, bound) {
        return o;
    }
    let r = rational(radius);
    let mut exact = -(&r * &r);
    for (ci, xi) in center.iter().zip(x) {
        let diff = rational(*xi) - rational(*ci);
        exact += &diff * &diff;
    }
    sign_of(&exact)
}

/// Sign of `|x|^k - y`.
pub fn power_sign(x: f64, k: u32, y: f64) -> Ordering {
    let p = x.abs().powi(k as i32);
    let bound = (4 * (k as usize + 2)) as f64 * UNIT * (p + y.abs()) + TINY;
    if p.is_finite() {
        if let Some(o) = filtered(p - y, bound) {
            return o;
        }
    }
    let base = rational(x.abs());
    let mut acc = BigRational::from_integer(1.into());
    for _ in 0..k {
        acc *= &base;
    }
    sign_of(&(acc - rational(y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_sign_detects_exact_zero() {
        // 0.1 + 0.2 != 0.3 in floats, but 0.5 * 0.2 + 0.5 * 0.4 - 0.3 is
        // nonzero only through representation error; the exact path decides.
        let a = [0.5, 0.5];
        let x = [0.2, 0.4];
        let s = affine_sign(&a, &x, 0.3);
        let exact = rational(0.5) * rational(0.2) + rational(0.5) * rational(0.4) - rational(0.3);
        assert_eq!(s, sign_of(&exact));
        assert_eq!(
            affine_sign(&[1.0, 1.0], &[0.25, 0.75], 1.0),
            Ordering::Equal
        );
    }

    #[test]
    fn sphere_boundary_is_exact() {
        assert_eq!(sphere_sign(&[0.0, 0.0], &[0.6, 0.8], 1.0), {
            let e = rational(0.6) * rational(0.6) + rational(0.8) * rational(0.8) - rational(1.0);
            sign_of(&e)
        });
        assert_eq!(
            sphere_sign(&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 1.0),
            Ordering::Equal
        );
        assert_eq!(
            sphere_sign(&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0000001], 1.0),
            Ordering::Greater
        );
    }

    #[test]
    fn power_sign_matches_rational() {
        assert_eq!(power_sign(0.5, 2, 0.25), Ordering::Equal);
        assert_eq!(power_sign(-0.5, 3, 0.125), Ordering::Equal);
        assert_eq!(power_sign(0.1, 2, 0.01), {
            let e = rational(0.1) * rational(0.1) - rational(0.01);
            sign_of(&e)
        });
    }
}
