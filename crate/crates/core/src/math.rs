// Thin wrappers so the same libm routines are used with and without `std`.

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn log1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// Standard normal CDF.
#[inline]
pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// `ceil(1 / x)` for `x > 0`, treating reciprocals that land a few ulps above
/// an integer as that integer so that `ceil_recip(1.0 / k) == k`.
#[inline]
pub(crate) fn ceil_recip(x: f64) -> f64 {
    let y = 1.0 / x;
    if !y.is_finite() {
        return y;
    }
    let n = round(y);
    if n >= 1.0 && (y - n).abs() <= 4.0 * f64::EPSILON * n {
        n
    } else {
        ceil(y)
    }
}
