//! Thin wrappers over `libm` so the numerics read like `std` code.

pub const TAU: f64 = core::f64::consts::TAU;

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Representative of `x` in `[0, 1)`.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - floor(x);
    // x - floor(x) rounds to 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}
