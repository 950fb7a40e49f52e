//! Complex discrete Fourier transforms along one axis of a row-major array.
//!
//! Power-of-two lengths use an iterative radix-2 transform; any other length
//! falls back to the exact O(n²) DFT.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Sign convention: forward uses `exp(-2πi jk/n)`, inverse `exp(+2πi jk/n)`.
/// Neither direction normalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// Transforms every line of length `n` along `axis` of a `dim`-dimensional
/// cube stored row-major (axis 0 slowest).
pub fn transform_axis(data: &mut [Complex64], n: usize, dim: usize, axis: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let stride = n.pow((dim - 1 - axis) as u32);
    let block = stride * n;
    let plan = Plan::new(n, dir);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[base + j * stride];
            }
            plan.run(&mut line);
            for (j, value) in line.iter().enumerate() {
                data[base + j * stride] = *value;
            }
        }
    }
}

/// Multidimensional transform over all axes.
pub fn transform(data: &mut [Complex64], n: usize, dim: usize, dir: Direction) {
    for axis in 0..dim {
        transform_axis(data, n, dim, axis, dir);
    }
}

struct Plan {
    n: usize,
    twiddles: Vec<Complex64>,
    radix2: bool,
}

impl Plan {
    fn new(n: usize, dir: Direction) -> Self {
        let radix2 = n.is_power_of_two();
        // Radix-2 needs n/2 twiddles, the direct DFT all n roots of unity.
        let count = if radix2 { n / 2 } else { n };
        let twiddles = (0..count)
            .map(|k| Complex64::from_polar(1.0, dir.sign() * 2.0 * PI * k as f64 / n as f64))
            .collect();
        Plan { n, twiddles, radix2 }
    }

    fn run(&self, line: &mut [Complex64]) {
        if self.radix2 {
            self.radix2(line);
        } else {
            self.direct(line);
        }
    }

    fn radix2(&self, a: &mut [Complex64]) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let u = a[start + k];
                    let v = a[start + k + half] * w;
                    a[start + k] = u + v;
                    a[start + k + half] = u - v;
                }
            }
            len <<= 1;
        }
    }

    fn direct(&self, a: &mut [Complex64]) {
        let n = self.n;
        let input: Vec<Complex64> = a.to_vec();
        for (k, out) in a.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in input.iter().enumerate() {
                acc += x * self.twiddles[(j * k) % n];
            }
            *out = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(input: &[Complex64], dir: Direction) -> Vec<Complex64> {
        let n = input.len();
        (0..n)
            .map(|k| {
                input
                    .iter()
                    .enumerate()
                    .map(|(j, x)| {
                        let phase = dir.sign() * 2.0 * PI * (j * k) as f64 / n as f64;
                        x * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn radix2_matches_naive_dft() {
        let input: Vec<Complex64> = (0..32)
            .map(|j| Complex64::new(libm::sin(j as f64 * 0.7), libm::cos(j as f64 * 1.3)))
            .collect();
        let expected = naive(&input, Direction::Forward);
        let mut got = input.clone();
        transform(&mut got, 32, 1, Direction::Forward);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn odd_length_uses_exact_dft() {
        let input: Vec<Complex64> = (0..7).map(|j| Complex64::new(j as f64, -(j as f64) * 0.5)).collect();
        let expected = naive(&input, Direction::Inverse);
        let mut got = input.clone();
        transform(&mut got, 7, 1, Direction::Inverse);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_axes_are_separable() {
        let n = 8;
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i % 5) as f64, (i % 3) as f64))
            .collect();
        let original = data.clone();
        transform(&mut data, n, 2, Direction::Forward);
        transform(&mut data, n, 2, Direction::Inverse);
        for (a, b) in data.iter().zip(&original) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-12);
        }
    }
}
