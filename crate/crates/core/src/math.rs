//! Transcendental functions, always taken from `libm` so results do not
//! depend on whether the platform math library is linked in.

use num_complex::Complex64;

pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `e^{i theta}`.
pub fn cis(theta: f64) -> Complex64 {
    let (s, c) = libm::sincos(theta);
    Complex64::new(c, s)
}

/// `|z|`.
pub fn modulus(z: Complex64) -> f64 {
    libm::hypot(z.re, z.im)
}
