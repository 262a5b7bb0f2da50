//! Alternating twist products: integer 2x2 matrices built from a coefficient
//! list, with the exactly provable facts about them (unit determinant, the
//! coefficient-product bounds on the max-entry length proxy).
//!
//! Factor `i` (1-based) with coefficient `a` is upper-triangular
//! `[[1, a], [0, 1]]` for odd `i` and lower-triangular `[[1, 0], [a, 1]]` for
//! even `i`; the product is taken left to right.

use crate::error::{Error, Result};

/// Integer 2x2 matrix with entries wide enough for long products of small
/// twist coefficients; construction fails loudly on overflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mat2 {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1, b: 0, c: 0, d: 1 };

    fn mul_checked(self, rhs: Mat2) -> Option<Mat2> {
        let m = |x: i128, y: i128| x.checked_mul(y);
        Some(Mat2 {
            a: m(self.a, rhs.a)?.checked_add(m(self.b, rhs.c)?)?,
            b: m(self.a, rhs.b)?.checked_add(m(self.b, rhs.d)?)?,
            c: m(self.c, rhs.a)?.checked_add(m(self.d, rhs.c)?)?,
            d: m(self.c, rhs.b)?.checked_add(m(self.d, rhs.d)?)?,
        })
    }

    pub fn det(self) -> Option<i128> {
        self.a.checked_mul(self.d)?.checked_sub(self.b.checked_mul(self.c)?)
    }

    pub fn max_abs_entry(self) -> i128 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

/// One twist factor: odd 1-based index is upper-triangular, even is lower.
pub fn twist_factor(index1: usize, a: i64) -> Mat2 {
    let a = i128::from(a);
    if index1 % 2 == 1 {
        Mat2 { a: 1, b: a, c: 0, d: 1 }
    } else {
        Mat2 { a: 1, b: 0, c: a, d: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct TwistProduct {
    pub matrix: Mat2,
    /// Product of the coefficients: lower bound for the length proxy.
    pub lower: i128,
    /// Product of (coefficient + 2): upper bound for the length proxy.
    pub upper: i128,
    /// Max absolute entry of the product: the length proxy itself.
    pub proxy: i128,
    pub det: i128,
}

/// Multiplies the twist factors for `coeffs` left to right.
///
/// Coefficients must be at least 2; that is what makes the product bounds
/// strict enough to sandwich the proxy.
pub fn dehn_twist_product(coeffs: &[i64]) -> Result<TwistProduct> {
    if coeffs.is_empty() {
        return Err(Error::EmptySet);
    }
    for (i, &a) in coeffs.iter().enumerate() {
        if a < 2 {
            return Err(Error::InvalidCoefficient(i + 1, a));
        }
    }
    let mut m = Mat2::IDENTITY;
    let mut lower: i128 = 1;
    let mut upper: i128 = 1;
    for (i, &a) in coeffs.iter().enumerate() {
        m = m
            .mul_checked(twist_factor(i + 1, a))
            .ok_or(Error::EntryOverflow(i + 1))?;
        lower = lower.checked_mul(i128::from(a)).ok_or(Error::EntryOverflow(i + 1))?;
        upper = upper
            .checked_mul(i128::from(a) + 2)
            .ok_or(Error::EntryOverflow(i + 1))?;
    }
    let det = m.det().ok_or(Error::EntryOverflow(coeffs.len()))?;
    Ok(TwistProduct { matrix: m, lower, upper, proxy: m.max_abs_entry(), det })
}

#[derive(Clone, Debug)]
pub struct TwistReport {
    pub product: TwistProduct,
    pub det_ok: bool,
    pub bounds_ok: bool,
}

impl TwistReport {
    pub fn pass(&self) -> bool {
        self.det_ok && self.bounds_ok
    }
}

/// Checks `det = 1` and `prod a(i) <= proxy <= prod (a(i) + 2)`.
pub fn twist_bounds_check(coeffs: &[i64]) -> Result<TwistReport> {
    let product = dehn_twist_product(coeffs)?;
    let det_ok = product.det == 1;
    let bounds_ok = product.lower <= product.proxy && product.proxy <= product.upper;
    Ok(TwistReport { product, det_ok, bounds_ok })
}
