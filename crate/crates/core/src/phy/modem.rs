//! Gray-mapped constellations with unit average power and a max-log
//! soft demapper.
//!
//! BPSK maps bit 0 to +1 and bit 1 to -1 on the real axis. Square QAM
//! splits each point's bits evenly between I and Q (I first), Gray-coded
//! per axis. LLRs are natural-log with positive meaning bit 0, computed
//! per axis with the max-log approximation.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModemError {
    #[error("unsupported modulation order m = {0}")]
    UnsupportedOrder(u32),
    #[error("bit count {0} not divisible by m = {1}")]
    BitCount(usize, u32),
}

/// Clamp for demapped LLRs, keeping blocks finite even at zero noise.
pub const LLR_CLAMP: f64 = 1e6;

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// PAM levels indexed by the Gray-coded bit pattern of one axis, scaled
/// so the full QAM constellation has unit average power.
fn pam_levels(bits_per_axis: u32, scale: f64) -> Vec<f64> {
    let l = 1usize << bits_per_axis;
    let mut levels = vec![0.0; l];
    for (i, lv) in (0..l).map(|i| (i, (2 * i) as f64 - (l - 1) as f64)) {
        levels[gray(i)] = lv / scale;
    }
    levels
}

/// Per-axis amplitude normalizer: sqrt(2 (2^m - 1) / 3) for square QAM.
fn qam_scale(m: u32) -> f64 {
    ((2.0 / 3.0) * ((1u32 << m) as f64 - 1.0)).sqrt()
}

pub fn supported(m: u32) -> bool {
    matches!(m, 1 | 2 | 4 | 6 | 8)
}

/// Maps coded bits (values 0/1) onto constellation points, `m` bits per
/// point.
pub fn modulate(bits: &[u8], m: u32) -> Result<Vec<Complex64>, ModemError> {
    if !supported(m) {
        return Err(ModemError::UnsupportedOrder(m));
    }
    if bits.len() % m as usize != 0 {
        return Err(ModemError::BitCount(bits.len(), m));
    }
    if m == 1 {
        return Ok(bits
            .iter()
            .map(|&b| Complex64::new(if b == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect());
    }
    let half = m / 2;
    let levels = pam_levels(half, qam_scale(m));
    let pack = |chunk: &[u8]| {
        let mut v = 0usize;
        for &b in chunk {
            v = (v << 1) | b as usize;
        }
        v
    };
    Ok(bits
        .chunks(m as usize)
        .map(|chunk| {
            let (i_bits, q_bits) = chunk.split_at(half as usize);
            Complex64::new(levels[pack(i_bits)], levels[pack(q_bits)])
        })
        .collect())
}

/// Max-log LLRs for the `m` bits of one received point. `noise_var` is
/// the effective complex noise variance after equalization; LLRs append
/// to `out`.
pub fn demap_llr(y: Complex64, m: u32, noise_var: f64, out: &mut Vec<f64>) -> Result<(), ModemError> {
    if !supported(m) {
        return Err(ModemError::UnsupportedOrder(m));
    }
    let nv = noise_var.max(1e-300);
    if m == 1 {
        out.push((4.0 * y.re / nv).clamp(-LLR_CLAMP, LLR_CLAMP));
        return Ok(());
    }
    let half = m / 2;
    let levels = pam_levels(half, qam_scale(m));
    let mut axis = |value: f64| {
        // Each axis sees real noise of variance nv/2, so the max-log
        // denominator 2 sigma_axis^2 is nv itself.
        let l = levels.len();
        for bit in 0..half {
            let mask = 1usize << (half - 1 - bit);
            let mut d0 = f64::INFINITY;
            let mut d1 = f64::INFINITY;
            for (pattern, &level) in levels.iter().enumerate().take(l) {
                let d = (value - level) * (value - level);
                if pattern & mask == 0 {
                    d0 = d0.min(d);
                } else {
                    d1 = d1.min(d);
                }
            }
            out.push(((d1 - d0) / nv).clamp(-LLR_CLAMP, LLR_CLAMP));
        }
    };
    axis(y.re);
    axis(y.im);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_convention() {
        let pts = modulate(&[0, 1], 1).unwrap();
        assert_eq!(pts[0], Complex64::new(1.0, 0.0));
        assert_eq!(pts[1], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(matches!(modulate(&[0, 1, 0], 3), Err(ModemError::UnsupportedOrder(3))));
        assert!(matches!(modulate(&[0, 1, 0], 2), Err(ModemError::BitCount(3, 2))));
    }

    #[test]
    fn unit_average_power_exhaustive() {
        for m in [2u32, 4, 6, 8] {
            let n_points = 1usize << m;
            let mut power = 0.0;
            for idx in 0..n_points {
                let bits: Vec<u8> =
                    (0..m).map(|b| ((idx >> (m - 1 - b)) & 1) as u8).collect();
                power += modulate(&bits, m).unwrap()[0].norm_sqr();
            }
            power /= n_points as f64;
            assert!((power - 1.0).abs() < 1e-12, "m={m}: mean power {power}");
        }
    }

    #[test]
    fn gray_neighbors_differ_by_one_bit() {
        // Adjacent PAM levels of the 16QAM axis differ in exactly one bit.
        let levels = pam_levels(2, qam_scale(4));
        let mut by_value: Vec<(usize, f64)> = levels.iter().cloned().enumerate().collect();
        by_value.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for pair in by_value.windows(2) {
            let diff = (pair[0].0 ^ pair[1].0).count_ones();
            assert_eq!(diff, 1);
        }
    }

    #[test]
    fn hard_decision_roundtrip_all_orders() {
        for m in [1u32, 2, 4, 6, 8] {
            let n_points = 1usize << m;
            for idx in 0..n_points {
                let bits: Vec<u8> =
                    (0..m).map(|b| ((idx >> (m - 1 - b)) & 1) as u8).collect();
                let y = modulate(&bits, m).unwrap()[0];
                let mut llr = Vec::new();
                demap_llr(y, m, 1e-6, &mut llr).unwrap();
                let hard: Vec<u8> = llr.iter().map(|&v| if v < 0.0 { 1 } else { 0 }).collect();
                assert_eq!(hard, bits, "m={m} idx={idx}");
            }
        }
    }

    #[test]
    fn llr_sign_matches_distance_at_noise() {
        // QPSK at high SNR: all four points demap exactly.
        for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let y = modulate(&bits, 2).unwrap()[0];
            let mut llr = Vec::new();
            demap_llr(y * 1.02, 2, 0.01, &mut llr).unwrap();
            for (l, &b) in llr.iter().zip(&bits) {
                assert!((*l > 0.0) == (b == 0));
            }
        }
    }

    #[test]
    fn llr_scales_inversely_with_noise() {
        let y = Complex64::new(0.7, -0.2);
        let mut a = Vec::new();
        let mut b = Vec::new();
        demap_llr(y, 4, 0.1, &mut a).unwrap();
        demap_llr(y, 4, 0.2, &mut b).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - 2.0 * y).abs() < 1e-9);
        }
    }
}
