//! CRC-8, polynomial 0x07 (x^8 + x^2 + x + 1), init 0x00, no reflection,
//! no final xor. Operates on bit slices (values 0/1), most significant bit
//! of the register first, so message lengths need not be byte-aligned.

pub const CRC_BITS: usize = 8;
const POLY: u8 = 0x07;

/// CRC register after absorbing `bits`. The CRC of the empty message is
/// the initialization constant 0x00.
pub fn crc8(bits: &[u8]) -> u8 {
    let mut reg: u8 = 0x00;
    for &b in bits {
        debug_assert!(b <= 1);
        let fb = (reg >> 7) ^ b;
        reg <<= 1;
        if fb != 0 {
            reg ^= POLY;
        }
    }
    reg
}

/// Appends the CRC of `bits` as 8 bits, most significant first.
pub fn crc8_append(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() + CRC_BITS);
    out.extend_from_slice(bits);
    let r = crc8(bits);
    for i in (0..CRC_BITS).rev() {
        out.push((r >> i) & 1);
    }
    out
}

/// Checks a `message || crc` bit sequence.
pub fn crc8_check(bits_with_crc: &[u8]) -> bool {
    if bits_with_crc.len() < CRC_BITS {
        return false;
    }
    let (msg, tail) = bits_with_crc.split_at(bits_with_crc.len() - CRC_BITS);
    let r = crc8(msg);
    tail.iter().enumerate().all(|(i, &b)| b == (r >> (CRC_BITS - 1 - i)) & 1)
}
