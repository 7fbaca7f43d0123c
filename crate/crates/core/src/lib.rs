//! Numerics on the Bergman domain D = SU(2,2)/S(U(2)×U(2)) and its coherent-state quantization.
//!
//! Group and algebra machinery, the oscillator realization of the discrete series,
//! coherent-state symbols and star products, the invariant Laplacian and its
//! spectrum, and the free scalar field built on that spectrum.

pub mod algebra;
pub mod coherent;
pub mod diff;
pub mod field;
pub mod fock;
pub mod group;
pub mod laplacian;

use nalgebra::{Matrix2, Matrix4};
pub use num_complex::Complex64 as C64;

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Shorthand constructor for a complex number.
pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Assemble [[a, b], [c, d]] from 2×2 blocks.
pub fn blocks(a: &Mat2, b: &Mat2, cc: &Mat2, d: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(cc);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    m
}

/// The 2×2 block (i, j), i, j ∈ {0, 1}.
pub fn block(m: &Mat4, i: usize, j: usize) -> Mat2 {
    m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned()
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs<R: nalgebra::Dim, K: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, K>>(
    m: &nalgebra::Matrix<C64, R, K, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
