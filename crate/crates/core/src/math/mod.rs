//! Special functions and quadrature shared by every other module.
//!
//! Complex amplitudes throughout the crate use [`num_complex::Complex64`].

pub mod bessel;
pub mod quadrature;

pub use bessel::bessel_j;
pub use quadrature::{
    integrate_2d_polar, integrate_2d_polar_on, AzimuthalGrid, QuadratureRule,
};

/// i^m for integer m, exact on the unit cycle.
pub fn i_pow(m: i32) -> num_complex::Complex64 {
    match m.rem_euclid(4) {
        0 => num_complex::Complex64::new(1.0, 0.0),
        1 => num_complex::Complex64::new(0.0, 1.0),
        2 => num_complex::Complex64::new(-1.0, 0.0),
        _ => num_complex::Complex64::new(0.0, -1.0),
    }
}
