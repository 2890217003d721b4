//! Discrete Fourier transforms: iterative radix-2 for powers of two,
//! Bluestein's chirp-z for every other length.
//!
//! Forward: `X_k = Σ x_j e^{−2πi jk/n}`. The inverse carries the `1/n`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
enum Plan {
    Trivial,
    Radix2 {
        twiddles: Vec<Complex64>,
        bit_reverse: Vec<u32>,
    },
    Bluestein {
        inner: Box<Fft>,
        chirp: Vec<Complex64>,
        kernel: Vec<Complex64>,
    },
}

/// One-dimensional transform of fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    plan: Plan,
}

impl Fft {
    /// Plans a transform of length `len` (≥ 1).
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let plan = if len == 1 {
            Plan::Trivial
        } else if len.is_power_of_two() {
            let bits = len.trailing_zeros();
            let twiddles = (0..len / 2)
                .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
                .collect();
            let bit_reverse = (0..len as u32)
                .map(|i| i.reverse_bits() >> (32 - bits))
                .collect();
            Plan::Radix2 {
                twiddles,
                bit_reverse,
            }
        } else {
            let m = (2 * len - 1).next_power_of_two();
            // j² mod 2n keeps the chirp argument small
            let chirp: Vec<Complex64> = (0..len)
                .map(|j| {
                    let jj = (j as u64 * j as u64) % (2 * len as u64);
                    Complex64::from_polar(1.0, -PI * jj as f64 / len as f64)
                })
                .collect();
            let inner = Fft::new(m);
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for j in 1..len {
                kernel[j] = chirp[j].conj();
                kernel[m - j] = chirp[j].conj();
            }
            inner.forward(&mut kernel);
            Plan::Bluestein {
                inner: Box::new(inner),
                chirp,
                kernel,
            }
        };
        Self { len, plan }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len, "buffer length does not match the plan");
        match &self.plan {
            Plan::Trivial => {}
            Plan::Radix2 {
                twiddles,
                bit_reverse,
            } => radix2(data, twiddles, bit_reverse),
            Plan::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                let m = inner.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for ((w, x), c) in work.iter_mut().zip(data.iter()).zip(chirp) {
                    *w = x * c;
                }
                inner.forward(&mut work);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w *= k;
                }
                inner.inverse(&mut work);
                for ((x, w), c) in data.iter_mut().zip(&work).zip(chirp) {
                    *x = w * c;
                }
            }
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        for x in data.iter_mut() {
            *x = x.conj();
        }
        self.forward(data);
        let scale = 1.0 / self.len as f64;
        for x in data.iter_mut() {
            *x = x.conj() * scale;
        }
    }
}

fn radix2(data: &mut [Complex64], twiddles: &[Complex64], bit_reverse: &[u32]) {
    let n = data.len();
    for (i, &j) in bit_reverse.iter().enumerate() {
        let j = j as usize;
        if i < j {
            data.swap(i, j);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[k * stride];
                *b = *a - t;
                *a += t;
            }
        }
        half *= 2;
    }
}

/// Two-dimensional transform over a row-major `width × height` grid.
#[derive(Debug, Clone)]
pub struct Fft2 {
    width: usize,
    height: usize,
    rows: Fft,
    cols: Fft,
}

const BLOCK: usize = 32;

impl Fft2 {
    pub fn new(width: usize, height: usize) -> Self {
        let rows = Fft::new(width);
        let cols = if height == width {
            rows.clone()
        } else {
            Fft::new(height)
        };
        Self {
            width,
            height,
            rows,
            cols,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, Fft::forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, Fft::inverse);
    }

    fn apply(&self, data: &mut [Complex64], op: fn(&Fft, &mut [Complex64])) {
        let (w, h) = (self.width, self.height);
        assert_eq!(data.len(), w * h, "buffer size does not match the plan");
        for row in data.chunks_exact_mut(w) {
            op(&self.rows, row);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); w * h];
        transpose(data, &mut t, w, h);
        for col in t.chunks_exact_mut(h) {
            op(&self.cols, col);
        }
        transpose(&t, data, h, w);
    }
}

/// `dst[x·h + y] = src[y·w + x]` in cache-sized tiles.
fn transpose(src: &[Complex64], dst: &mut [Complex64], w: usize, h: usize) {
    for y0 in (0..h).step_by(BLOCK) {
        for x0 in (0..w).step_by(BLOCK) {
            for y in y0..(y0 + BLOCK).min(h) {
                for x in x0..(x0 + BLOCK).min(w) {
                    dst[x * h + y] = src[y * w + x];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::new((j as f64 * 0.7).sin() + 0.1 * j as f64, (j as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1, 2, 3, 5, 8, 12, 17, 64, 100, 135] {
            let x = signal(n);
            let mut y = x.clone();
            Fft::new(n).forward(&mut y);
            let want = naive(&x);
            let scale = want.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() < 1e-11 * scale, "n = {n}");
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        for n in [7, 16, 30] {
            let x = signal(n);
            let mut y = x.clone();
            let f = Fft::new(n);
            f.forward(&mut y);
            f.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_d_separable() {
        let (w, h) = (6, 4);
        let x = signal(w * h);
        let mut y = x.clone();
        Fft2::new(w, h).forward(&mut y);
        for v in 0..h {
            for u in 0..w {
                let mut s = Complex64::new(0.0, 0.0);
                for yy in 0..h {
                    for xx in 0..w {
                        let ph = -2.0 * PI * ((u * xx) as f64 / w as f64 + (v * yy) as f64 / h as f64);
                        s += x[yy * w + xx] * Complex64::from_polar(1.0, ph);
                    }
                }
                assert!((y[v * w + u] - s).norm() < 1e-10);
            }
        }
        Fft2::new(w, h).inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
