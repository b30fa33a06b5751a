//! Polar code construction by Gaussian-approximation density evolution.
//!
//! Mean channel LLRs evolve through the same natural-order butterfly the
//! decoder uses; the least reliable synthetic channels are frozen. The
//! initial mean per channel use is `4 * 10^(snr_db/10)` (BPSK, LLR
//! `2y/sigma^2`). Shortened codeword positions enter the evolution as
//! effectively noiseless channels and their input indices are frozen
//! structurally, which keeps the shortened bits known-zero at the decoder.

/// Mean LLR treated as "known bit" during construction.
const MU_KNOWN: f64 = 1e9;

fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < 10.0 {
        (0.0218 - 0.4527 * x.powf(0.86)).exp()
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let at10 = phi(10.0);
    if y > at10 {
        ((0.0218 - y.ln()) / 0.4527).powf(1.0 / 0.86)
    } else {
        // phi is monotone decreasing; bisect on [10, 4e9].
        let (mut lo, mut hi) = (10.0f64, 4.0 * MU_KNOWN);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Check node update for a pair of mean LLRs.
fn ga_pair_minus(a: f64, b: f64) -> f64 {
    if a >= MU_KNOWN {
        return b.min(MU_KNOWN);
    }
    if b >= MU_KNOWN {
        return a.min(MU_KNOWN);
    }
    phi_inv(1.0 - (1.0 - phi(a)) * (1.0 - phi(b)))
}

/// Per-input-bit reliabilities (mean LLRs) for the given per-position
/// channel means. Mirrors the decoder recursion: left child takes the
/// check-node combination of positions `i` and `i + half`, right child the
/// variable-node sum.
pub fn ga_reliabilities(channel_means: &[f64]) -> Vec<f64> {
    let n = channel_means.len();
    assert!(n.is_power_of_two());
    fn recurse(mu: &[f64], out: &mut Vec<f64>) {
        let sz = mu.len();
        if sz == 1 {
            out.push(mu[0]);
            return;
        }
        let half = sz / 2;
        let left: Vec<f64> = (0..half).map(|i| ga_pair_minus(mu[i], mu[i + half])).collect();
        recurse(&left, out);
        let right: Vec<f64> =
            (0..half).map(|i| (mu[i] + mu[i + half]).min(MU_KNOWN)).collect();
        recurse(&right, out);
    }
    let mut out = Vec::with_capacity(n);
    recurse(channel_means, &mut out);
    out
}

/// Frozen mask for an `(n, k_total)` code with `shortened` tail positions
/// removed from the air. `k_total` counts every unfrozen bit (message plus
/// CRC). Input indices `n - shortened ..` are always frozen; the remaining
/// frozen set is the least reliable of the rest. Deterministic for fixed
/// arguments.
pub fn frozen_mask(n: usize, k_total: usize, design_snr_db: f64, shortened: usize) -> Vec<bool> {
    assert!(n.is_power_of_two());
    let transmitted = n - shortened;
    assert!(k_total <= transmitted, "k_total {k_total} exceeds transmitted length {transmitted}");
    let mu_init = 4.0 * 10f64.powf(design_snr_db / 10.0);
    let means: Vec<f64> =
        (0..n).map(|i| if i < transmitted { mu_init } else { MU_KNOWN }).collect();
    let rel = ga_reliabilities(&means);

    let mut frozen = vec![false; n];
    for f in frozen.iter_mut().skip(transmitted) {
        *f = true;
    }
    let mut order: Vec<usize> = (0..transmitted).collect();
    order.sort_by(|&a, &b| rel[a].partial_cmp(&rel[b]).unwrap().then(a.cmp(&b)));
    for &idx in order.iter().take(transmitted - k_total) {
        frozen[idx] = true;
    }
    frozen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_count_and_determinism() {
        let a = frozen_mask(256, 128, 2.0, 0);
        let b = frozen_mask(256, 128, 2.0, 0);
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|&&f| f).count(), 128);
        // Input 0 polarizes to the worst channel.
        assert!(a[0]);
        // The last input polarizes to the best channel.
        assert!(!a[255]);
    }

    #[test]
    fn shortened_tail_always_frozen() {
        let mask = frozen_mask(64, 20, 1.0, 16);
        assert!(mask[48..].iter().all(|&f| f));
        assert_eq!(mask.iter().filter(|&&f| !f).count(), 20);
    }

    #[test]
    fn reliabilities_monotone_in_snr() {
        let lo = ga_reliabilities(&vec![4.0 * 10f64.powf(0.0); 128]);
        let hi = ga_reliabilities(&vec![4.0 * 10f64.powf(0.5); 128]);
        let better = lo.iter().zip(&hi).filter(|(l, h)| h >= l).count();
        assert_eq!(better, 128);
    }

    #[test]
    fn phi_inv_inverts_phi() {
        for &x in &[0.1, 0.5, 2.0, 9.0, 15.0, 80.0, 400.0] {
            let y = phi(x);
            let back = phi_inv(y);
            assert!((back - x).abs() < 1e-3 * x.max(1.0), "x={x} back={back}");
        }
    }
}
