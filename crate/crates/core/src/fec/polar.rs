//! Polar encoder and successive-cancellation list decoder.
//!
//! Both sides use the natural-order butterfly (no bit reversal): input bit
//! `j` contributes to codeword bit `i` whenever the set bits of `i` cover
//! those of `j`. The list decoder keeps `L` candidate paths in parallel
//! lanes of shared stage buffers; a fork at an information leaf reorders
//! lanes and hands the permutation back up the recursion, where ancestors
//! apply it lazily when reading their stage data.

use super::crc::{crc8_append, crc8_check, CRC_BITS};
use super::{FecError, PolarCodeSpec};

/// In-place polar transform `x = u G` over GF(2).
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        let mut i = 0;
        while i < n {
            for j in i..i + h {
                bits[j] ^= bits[j + h];
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// Encodes `msg` (exactly `k` bits, values 0/1): appends CRC-8, places the
/// result on the unfrozen inputs in increasing index order, zeros
/// elsewhere, and applies the polar transform.
pub fn encode(spec: &PolarCodeSpec, msg: &[u8]) -> Result<Vec<u8>, FecError> {
    if msg.len() != spec.k {
        return Err(FecError::MessageLength { got: msg.len(), want: spec.k });
    }
    debug_assert!(msg.iter().all(|&b| b <= 1));
    let with_crc = crc8_append(msg);
    let mut u = vec![0u8; spec.n];
    for (&idx, &bit) in spec.unfrozen.iter().zip(with_crc.iter()) {
        u[idx] = bit;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// Metric assigned to the initially-inactive lanes; must dominate any real
/// accumulated path metric so they are displaced at the first fork.
const LANE_INACTIVE: f64 = 1e30;

struct ListDecoder<'a> {
    l: usize,
    frozen: &'a [bool],
    /// Stage LLRs, heap-indexed: the node of size `sz` reads its input at
    /// positions `sz..2sz`. Lane-major within a position.
    soft: Vec<f64>,
    metric: Vec<f64>,
    /// One row of `l` decisions (+1/-1) per information leaf.
    decisions: Vec<i8>,
    /// One lane permutation row per information leaf.
    maps: Vec<u8>,
    rows: usize,
    leaf: usize,
}

impl<'a> ListDecoder<'a> {
    fn new(n: usize, l: usize, frozen: &'a [bool], llr: &[f64]) -> Self {
        let mut soft = vec![0.0; 2 * n * l];
        for (i, &v) in llr.iter().enumerate() {
            for lane in 0..l {
                soft[(n + i) * l + lane] = v;
            }
        }
        let mut metric = vec![LANE_INACTIVE; l];
        metric[0] = 0.0;
        let k_total = frozen.iter().filter(|&&f| !f).count();
        ListDecoder {
            l,
            frozen,
            soft,
            metric,
            decisions: vec![0; k_total * l],
            maps: vec![0; k_total * l],
            rows: 0,
            leaf: 0,
        }
    }

    fn frozen_leaf(&mut self, hard: &mut [i8]) -> Vec<u8> {
        for lane in 0..self.l {
            let llr = self.soft[self.l + lane];
            hard[lane] = 1;
            if llr < 0.0 {
                self.metric[lane] -= llr;
            }
        }
        (0..self.l as u8).collect()
    }

    fn info_leaf(&mut self, hard: &mut [i8]) -> Vec<u8> {
        let l = self.l;
        // Candidate c = lane * 2 + bit, metric extended by the max-log
        // penalty of deciding against the LLR sign.
        let mut cand_metric = vec![0.0f64; 2 * l];
        for lane in 0..l {
            let llr = self.soft[l + lane];
            cand_metric[2 * lane] = self.metric[lane] + (-llr).max(0.0);
            cand_metric[2 * lane + 1] = self.metric[lane] + llr.max(0.0);
        }
        let mut order: Vec<usize> = (0..2 * l).collect();
        order.sort_by(|&a, &b| {
            cand_metric[a].partial_cmp(&cand_metric[b]).unwrap().then(a.cmp(&b))
        });

        let mut map = vec![0u8; l];
        let mut new_metric = vec![0.0; l];
        for (new_lane, &c) in order.iter().take(l).enumerate() {
            let src = c / 2;
            let bit_one = c % 2 == 1;
            map[new_lane] = src as u8;
            new_metric[new_lane] = cand_metric[c];
            hard[new_lane] = if bit_one { -1 } else { 1 };
            self.decisions[self.rows * l + new_lane] = hard[new_lane];
            self.maps[self.rows * l + new_lane] = src as u8;
        }
        self.metric = new_metric;
        self.rows += 1;
        map
    }

    fn node(&mut self, sz: usize, hard: &mut [i8]) -> Vec<u8> {
        let l = self.l;
        if sz == 1 {
            let is_frozen = self.frozen[self.leaf];
            self.leaf += 1;
            return if is_frozen { self.frozen_leaf(hard) } else { self.info_leaf(hard) };
        }
        let half = sz / 2;

        // f: sign-min combination feeding the left child.
        for i in 0..half {
            for lane in 0..l {
                let a = self.soft[(sz + i) * l + lane];
                let b = self.soft[(sz + half + i) * l + lane];
                self.soft[(half + i) * l + lane] =
                    a.abs().min(b.abs()) * a.signum() * b.signum();
            }
        }
        let lmap = self.node(half, &mut hard[..half * l]);

        // g: parent inputs re-read through the left child's lane map.
        for i in 0..half {
            for lane in 0..l {
                let src = lmap[lane] as usize;
                let a = self.soft[(sz + i) * l + src];
                let b = self.soft[(sz + half + i) * l + src];
                let u = hard[i * l + lane];
                self.soft[(half + i) * l + lane] = if u > 0 { a + b } else { b - a };
            }
        }
        let rmap = self.node(half, &mut hard[half * l..]);

        // Combine codeword bits: left (through rmap) xor right.
        let mut tmp = vec![0i8; l];
        for i in 0..half {
            for lane in 0..l {
                tmp[lane] = hard[i * l + rmap[lane] as usize] * hard[(half + i) * l + lane];
            }
            hard[i * l..(i + 1) * l].copy_from_slice(&tmp);
        }
        lmap_compose(&lmap, &rmap)
    }
}

fn lmap_compose(lmap: &[u8], rmap: &[u8]) -> Vec<u8> {
    rmap.iter().map(|&r| lmap[r as usize]).collect()
}

/// Successive-cancellation list decode. Returns the message bits of the
/// most likely surviving path whose CRC-8 passes, or `None` when no path
/// passes (a decode failure, counted by the BLER machinery upstream).
pub fn decode_scl(
    spec: &PolarCodeSpec,
    llr: &[f64],
    list_size: usize,
) -> Result<Option<Vec<u8>>, FecError> {
    if llr.len() != spec.n {
        return Err(FecError::LlrLength { got: llr.len(), want: spec.n });
    }
    if list_size == 0 || list_size > 64 {
        return Err(FecError::BadListSize(list_size));
    }
    let l = list_size;
    let mut dec = ListDecoder::new(spec.n, l, &spec.frozen, llr);
    let mut hard = vec![0i8; spec.n * l];
    dec.node(spec.n, &mut hard);

    let k_total = spec.k + CRC_BITS;
    debug_assert_eq!(dec.rows, k_total);

    // Re-align the decision history to final lane order by composing the
    // fork permutations backwards.
    if dec.rows > 1 {
        let mut acc: Vec<u8> = dec.maps[(dec.rows - 1) * l..dec.rows * l].to_vec();
        for row in (0..dec.rows - 1).rev() {
            let slice = &mut dec.decisions[row * l..(row + 1) * l];
            let orig = slice.to_vec();
            for lane in 0..l {
                slice[lane] = orig[acc[lane] as usize];
            }
            let maps_row = &dec.maps[row * l..(row + 1) * l];
            acc = acc.iter().map(|&a| maps_row[a as usize]).collect();
        }
    }

    let mut lanes: Vec<usize> = (0..l).collect();
    lanes.sort_by(|&a, &b| dec.metric[a].partial_cmp(&dec.metric[b]).unwrap().then(a.cmp(&b)));
    for &lane in &lanes {
        if dec.metric[lane] >= LANE_INACTIVE {
            continue;
        }
        let bits: Vec<u8> = (0..k_total)
            .map(|row| if dec.decisions[row * l + lane] < 0 { 1 } else { 0 })
            .collect();
        if crc8_check(&bits) {
            return Ok(Some(bits[..spec.k].to_vec()));
        }
    }
    Ok(None)
}
