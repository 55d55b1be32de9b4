//! Scalar Fourier symbols shared by the 3-D and radial representations.

/// Relativistic dispersion `sqrt(m^2 + |xi|^2)`.
#[inline]
pub fn bracket_m(ximag_sq: f64, m: f64) -> f64 {
    (m * m + ximag_sq).sqrt()
}

/// Inhomogeneous Sobolev weight `(1 + |xi|^2)^(1/2)`.
#[inline]
pub fn japanese_bracket(ximag_sq: f64) -> f64 {
    (1.0 + ximag_sq).sqrt()
}

/// Fourier multiplier of the Yukawa/Coulomb potential `exp(-mu0 r)/r`:
/// `4*pi / (|xi|^2 + mu0^2)`. The Coulomb zero mode (`mu0 = 0`, `xi = 0`)
/// is gauged to 0.
#[inline]
pub fn yukawa_multiplier(ximag_sq: f64, mu0: f64) -> f64 {
    let denom = ximag_sq + mu0 * mu0;
    if denom == 0.0 {
        0.0
    } else {
        4.0 * std::f64::consts::PI / denom
    }
}
