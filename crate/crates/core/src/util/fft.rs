//! Radix-2 FFT, sized for the 64-point OFDM symbols used here.
//!
//! The transform is unitary (`1/sqrt(N)` both ways) so that symbol power in
//! the frequency domain equals sample power in the time domain.

use num_complex::Complex64;
use std::f64::consts::PI;

fn bit_reverse(x: usize, log2n: u32) -> usize {
    let mut out = 0usize;
    let mut v = x;
    for _ in 0..log2n {
        out = (out << 1) | (v & 1);
        v >>= 1;
    }
    out
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "FFT size must be a power of two");
    let log2n = n.trailing_zeros();
    for i in 0..n {
        let j = bit_reverse(i, log2n);
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let step = Complex64::from_polar(1.0, sign * 2.0 * PI / size as f64);
        for start in (0..n).step_by(size) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..half {
                let even = buf[start + k];
                let odd = w * buf[start + k + half];
                buf[start + k] = even + odd;
                buf[start + k + half] = even - odd;
                w *= step;
            }
        }
        size *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Frequency -> time (used on the transmit side).
pub fn ifft(freq: &[Complex64]) -> Vec<Complex64> {
    let mut buf = freq.to_vec();
    transform(&mut buf, true);
    buf
}

/// Time -> frequency (used on the receive side).
pub fn fft(time: &[Complex64]) -> Vec<Complex64> {
    let mut buf = time.to_vec();
    transform(&mut buf, false);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft_direct(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::ZERO;
                for (i, v) in x.iter().enumerate() {
                    acc += v * Complex64::from_polar(1.0, -2.0 * PI * (k * i) as f64 / n as f64);
                }
                acc / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn matches_direct_dft() {
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let got = fft(&x);
        let want = dft_direct(&x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let back = ifft(&fft(&x));
        for (g, w) in back.iter().zip(&x) {
            assert!((g - w).norm() < 1e-10);
        }
    }

    #[test]
    fn unitary_preserves_power() {
        let x: Vec<Complex64> = (0..64).map(|i| Complex64::new(1.0, i as f64)).collect();
        let f = fft(&x);
        let px: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let pf: f64 = f.iter().map(|v| v.norm_sqr()).sum();
        assert!((px - pf).abs() < 1e-8 * px);
    }
}
