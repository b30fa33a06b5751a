//! Channel coding: polar codes with CRC-8 and list decoding, sized to the
//! payload geometry of each MCS level.
//!
//! One code block covers one OFDM payload stream: `50 symbols * 48 data
//! subcarriers * m` coded bits, carried by the smallest power-of-two polar
//! code shortened down to that length. The CRC rides inside the code-rate
//! budget, so the unfrozen bit count is exactly `coded_bits * r`.

pub mod construct;
pub mod crc;
pub mod polar;

use crate::allocation::McsLevel;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

pub use crc::{crc8, crc8_append, crc8_check, CRC_BITS};
pub use polar::{decode_scl, encode, polar_transform};

#[derive(Debug, Error, PartialEq)]
pub enum FecError {
    #[error("codeword length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("(n={n}, k={k}) infeasible: need k + 8 CRC bits <= transmitted length {transmitted}")]
    Infeasible { n: usize, k: usize, transmitted: usize },
    #[error("shortening target {target} outside [n/2, n] = [{}, {n}]", n / 2)]
    BadShorteningTarget { n: usize, target: usize },
    #[error("message has {got} bits, code carries {want}")]
    MessageLength { got: usize, want: usize },
    #[error("LLR block has {got} entries, expected {want}")]
    LlrLength { got: usize, want: usize },
    #[error("list size {0} unsupported")]
    BadListSize(usize),
    #[error("rate-match target {got} does not match the code's transmitted length {want}")]
    RateMatchTarget { got: usize, want: usize },
    #[error("LLR values must be finite")]
    NonFiniteLlr,
    #[error("coded bit budget {coded} not divisible by code rate {num}/{den}")]
    RateIndivisible { coded: usize, num: u32, den: u32 },
}

/// A constructed polar code: length, payload size, frozen set and the
/// shortening applied on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCodeSpec {
    pub n: usize,
    /// Information bits excluding the CRC.
    pub k: usize,
    pub crc_bits: usize,
    pub design_snr_db: f64,
    /// Codeword bits actually transmitted (`n` when unshortened).
    pub transmitted: usize,
    frozen: Vec<bool>,
    unfrozen: Vec<usize>,
}

impl PolarCodeSpec {
    /// Full-length code.
    pub fn construct(n: usize, k: usize, design_snr_db: f64) -> Result<Self, FecError> {
        Self::construct_shortened(n, k, design_snr_db, n)
    }

    /// Code shortened to `target` transmitted bits. The `n - target` tail
    /// inputs are frozen so the untransmitted codeword bits are known zero.
    pub fn construct_shortened(
        n: usize,
        k: usize,
        design_snr_db: f64,
        target: usize,
    ) -> Result<Self, FecError> {
        if !n.is_power_of_two() || n < 2 {
            return Err(FecError::NotPowerOfTwo(n));
        }
        if target < n / 2 || target > n {
            return Err(FecError::BadShorteningTarget { n, target });
        }
        if k == 0 || k + CRC_BITS > target {
            return Err(FecError::Infeasible { n, k, transmitted: target });
        }
        let frozen = construct::frozen_mask(n, k + CRC_BITS, design_snr_db, n - target);
        let unfrozen: Vec<usize> =
            frozen.iter().enumerate().filter(|(_, &f)| !f).map(|(i, _)| i).collect();
        Ok(PolarCodeSpec {
            n,
            k,
            crc_bits: CRC_BITS,
            design_snr_db,
            transmitted: target,
            frozen,
            unfrozen,
        })
    }

    pub fn frozen_set(&self) -> &[bool] {
        &self.frozen
    }

    pub fn frozen_count(&self) -> usize {
        self.n - self.k - self.crc_bits
    }
}

/// LLR magnitude standing in for "known bit zero" at shortened positions.
pub const LLR_KNOWN_ZERO: f64 = 1e9;

/// Log-likelihood ratios for one codeword (natural log, positive means
/// bit 0 more likely).
#[derive(Debug, Clone, PartialEq)]
pub struct LlrBlock {
    llr: Vec<f64>,
}

impl LlrBlock {
    pub fn new(llr: Vec<f64>) -> Result<Self, FecError> {
        if llr.iter().any(|v| !v.is_finite()) {
            return Err(FecError::NonFiniteLlr);
        }
        Ok(LlrBlock { llr })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.llr
    }

    pub fn len(&self) -> usize {
        self.llr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llr.is_empty()
    }
}

/// Drops the shortened (known-zero) tail for transmission.
pub fn rate_match(
    spec: &PolarCodeSpec,
    codeword: &[u8],
    target: usize,
) -> Result<Vec<u8>, FecError> {
    if codeword.len() != spec.n {
        return Err(FecError::MessageLength { got: codeword.len(), want: spec.n });
    }
    if target != spec.transmitted {
        return Err(FecError::RateMatchTarget { got: target, want: spec.transmitted });
    }
    debug_assert!(codeword[spec.transmitted..].iter().all(|&b| b == 0));
    Ok(codeword[..target].to_vec())
}

/// Inverse of [`rate_match`] on the LLR side: shortened positions come
/// back as strongly-known zeros.
pub fn rate_unmatch_llrs(spec: &PolarCodeSpec, llrs: &[f64]) -> Result<LlrBlock, FecError> {
    if llrs.len() != spec.transmitted {
        return Err(FecError::LlrLength { got: llrs.len(), want: spec.transmitted });
    }
    let mut full = Vec::with_capacity(spec.n);
    full.extend_from_slice(llrs);
    full.resize(spec.n, LLR_KNOWN_ZERO);
    LlrBlock::new(full)
}

/// Decode through the full spec (LLR block must cover all `n` positions).
pub fn decode(
    spec: &PolarCodeSpec,
    llrs: &LlrBlock,
    list_size: usize,
) -> Result<Option<Vec<u8>>, FecError> {
    polar::decode_scl(spec, llrs.as_slice(), list_size)
}

/// Construction design SNR (dB) per MCS index. Pinned constants: the
/// frozen sets they produce are part of the reproducibility contract.
pub const DESIGN_SNR_DB: [f64; 10] = [0.0, 2.0, 3.0, 5.5, 9.0, 12.0, 15.0, 17.5, 21.0, 23.0];

/// Code geometry for one stream at one MCS level.
#[derive(Debug, Clone)]
pub struct StreamCode {
    /// Coded bits on the air (fills the payload exactly).
    pub coded_bits: usize,
    /// Message bits per block, CRC excluded.
    pub info_bits: usize,
    pub spec: Arc<PolarCodeSpec>,
}

/// Builds (or fetches) the code for `mcs` filling `n_symbols` OFDM symbols
/// of `n_data` subcarriers.
pub fn code_for_mcs(
    mcs: &McsLevel,
    n_data: usize,
    n_symbols: usize,
) -> Result<StreamCode, FecError> {
    let coded = n_symbols * n_data * mcs.m as usize;
    let num = mcs.rate_num as usize;
    let den = mcs.rate_den as usize;
    if (coded * num) % den != 0 {
        return Err(FecError::RateIndivisible { coded, num: mcs.rate_num, den: mcs.rate_den });
    }
    let unfrozen_total = coded * num / den;
    let k = unfrozen_total - CRC_BITS;
    let design = DESIGN_SNR_DB[mcs.index as usize];
    let spec = cached_code(coded.next_power_of_two(), k, design, coded)?;
    Ok(StreamCode { coded_bits: coded, info_bits: k, spec })
}

type CodeKey = (usize, usize, usize, i64);

fn cached_code(
    n: usize,
    k: usize,
    design_snr_db: f64,
    target: usize,
) -> Result<Arc<PolarCodeSpec>, FecError> {
    static CACHE: OnceLock<Mutex<HashMap<CodeKey, Arc<PolarCodeSpec>>>> = OnceLock::new();
    let key = (n, k, target, (design_snr_db * 1000.0).round() as i64);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(found) = cache.lock().unwrap().get(&key) {
        return Ok(found.clone());
    }
    let spec = Arc::new(PolarCodeSpec::construct_shortened(n, k, design_snr_db, target)?);
    cache.lock().unwrap().insert(key, spec.clone());
    Ok(spec)
}

fn bits_to_hex(bits: &[u8]) -> String {
    let mut s = String::with_capacity(bits.len().div_ceil(4));
    for chunk in bits.chunks(4) {
        let mut v = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            v |= b << (3 - i);
        }
        s.push(char::from_digit(v as u32, 16).unwrap());
    }
    s
}

fn hex_to_bits(s: &str, len: usize) -> Option<Vec<u8>> {
    let mut bits = Vec::with_capacity(s.len() * 4);
    for c in s.chars() {
        let v = c.to_digit(16)? as u8;
        for i in (0..4).rev() {
            bits.push((v >> i) & 1);
        }
    }
    if bits.len() < len {
        return None;
    }
    bits.truncate(len);
    Some(bits)
}

/// One conformance test-vector line: `n k design_snr_db msg_hex code_hex`.
pub fn format_test_vector(spec: &PolarCodeSpec, msg: &[u8], codeword: &[u8]) -> String {
    format!(
        "{} {} {} {} {}",
        spec.n,
        spec.k,
        spec.design_snr_db,
        bits_to_hex(msg),
        bits_to_hex(codeword)
    )
}

/// Parses a test-vector line back into `(spec, msg, codeword)`.
pub fn parse_test_vector(line: &str) -> Option<(PolarCodeSpec, Vec<u8>, Vec<u8>)> {
    let mut it = line.split_whitespace();
    let n: usize = it.next()?.parse().ok()?;
    let k: usize = it.next()?.parse().ok()?;
    let snr: f64 = it.next()?.parse().ok()?;
    let msg = hex_to_bits(it.next()?, k)?;
    let code = hex_to_bits(it.next()?, n)?;
    let spec = PolarCodeSpec::construct(n, k, snr).ok()?;
    Some((spec, msg, code))
}
