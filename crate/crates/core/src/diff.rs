//! Central finite differences with Richardson extrapolation.

use crate::C64;

/// A derivative estimate with the disagreement between the last two Richardson levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
}

/// Mixed central difference ∂ⁿf/∂x₁…∂xₙ at the origin with step h.
pub fn central_mixed<F>(f: &F, n: usize, h: f64) -> C64
where
    F: Fn(&[f64]) -> C64 + ?Sized,
{
    let mut x = vec![0.0; n];
    let mut acc = C64::default();
    for mask in 0..(1u32 << n) {
        let mut sign = 1.0;
        for (i, xi) in x.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *xi = -h;
                sign = -sign;
            } else {
                *xi = h;
            }
        }
        acc += f(&x) * sign;
    }
    acc / (2.0 * h).powi(n as i32)
}

/// Mixed derivative from steps h, h/2, h/4 with two Richardson levels.
pub fn richardson_mixed<F>(f: &F, n: usize, h: f64) -> Estimate
where
    F: Fn(&[f64]) -> C64 + ?Sized,
{
    if n == 0 {
        return Estimate { value: f(&[]), error: 0.0 };
    }
    let d: Vec<C64> = [h, h / 2.0, h / 4.0].iter().map(|&s| central_mixed(f, n, s)).collect();
    let r1 = (d[1] * 4.0 - d[0]) / 3.0;
    let r2 = (d[2] * 4.0 - d[1]) / 3.0;
    Estimate { value: r2, error: (r2 - r1).norm() }
}

/// First derivative of a scalar function of one real variable at t = 0.
pub fn richardson_first<F>(f: F, h: f64) -> Estimate
where
    F: Fn(f64) -> C64,
{
    richardson_mixed(&|x: &[f64]| f(x[0]), 1, h)
}
