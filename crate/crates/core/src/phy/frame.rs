//! Two-stage frame construction.
//!
//! Stage 1 sounds the TX antennas orthogonally in time (STF + LTF per
//! antenna, everything else silent). Stage 2 carries one STF, three
//! stream-precoded LTFs, a SERVICE symbol with the MCS indices, and 50
//! superposed payload symbols. Four FPS pilot subcarriers ride in every
//! payload symbol, precoded in a 3-symbol cycle (common, private 1,
//! private 2) so each user sees pilots through a live precoder at least
//! once every three symbols.

use super::modem::modulate;
use super::{FrameConfig, PhyError};
use crate::allocation::{mcs_level, McsTriple};
use crate::fec::{self, StreamCode};
use crate::precoding::{PrecoderSet, STREAM_C, STREAM_P1, STREAM_P2};
use crate::rng::{rng_for, Stream};
use crate::util::fft::ifft;
use crate::Group;
use num_complex::Complex64;
use rand::Rng;

/// Which stream a payload belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Common,
    Private(Group),
}

impl StreamRole {
    pub fn index(self) -> usize {
        match self {
            StreamRole::Common => STREAM_C,
            StreamRole::Private(Group::G1) => STREAM_P1,
            StreamRole::Private(Group::G2) => STREAM_P2,
        }
    }

    pub fn all() -> [StreamRole; 3] {
        [StreamRole::Common, StreamRole::Private(Group::G1), StreamRole::Private(Group::G2)]
    }
}

/// One encoded and modulated stream: message bits, the code that carried
/// them, and the constellation points filling the payload grid.
#[derive(Debug, Clone)]
pub struct StreamPayload {
    pub role: StreamRole,
    pub mcs: u8,
    pub bits: Vec<u8>,
    pub code: StreamCode,
    /// `payload_symbols * data_bins` points, symbol-major.
    pub symbols: Vec<Complex64>,
}

impl StreamPayload {
    /// Encodes `bits` (must match the MCS's message size) into payload
    /// points.
    pub fn encode(
        role: StreamRole,
        mcs: u8,
        bits: Vec<u8>,
        cfg: &FrameConfig,
    ) -> Result<StreamPayload, PhyError> {
        let level = mcs_level(mcs)?;
        let code = fec::code_for_mcs(level, cfg.data_bins.len(), cfg.payload_symbols)?;
        if bits.len() != code.info_bits {
            return Err(PhyError::PayloadSize { got: bits.len(), want: code.info_bits });
        }
        let codeword = fec::encode(&code.spec, &bits)?;
        let on_air = fec::rate_match(&code.spec, &codeword, code.coded_bits)?;
        let symbols = modulate(&on_air, level.m)?;
        debug_assert_eq!(symbols.len(), cfg.payload_symbols * cfg.data_bins.len());
        Ok(StreamPayload { role, mcs, bits, code, symbols })
    }

    /// Random message bits from the derived per-stream stream.
    pub fn random(
        role: StreamRole,
        mcs: u8,
        cfg: &FrameConfig,
        seed: u64,
    ) -> Result<StreamPayload, PhyError> {
        let level = mcs_level(mcs)?;
        let code = fec::code_for_mcs(level, cfg.data_bins.len(), cfg.payload_symbols)?;
        let mut rng = rng_for(seed, &[Stream::PayloadBits as u64, role.index() as u64]);
        let bits: Vec<u8> = (0..code.info_bits).map(|_| rng.random_range(0..=1u8)).collect();
        Self::encode(role, mcs, bits, cfg)
    }
}

/// Out-of-band frame descriptor available to receivers (the SERVICE
/// symbol duplicates the MCS indices in-band).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMeta {
    pub mcs: McsTriple,
    pub n_tx: usize,
}

impl FrameMeta {
    pub fn stream_active(&self, s: usize) -> bool {
        match s {
            STREAM_C => self.mcs.common.is_some(),
            STREAM_P1 => self.mcs.private1.is_some(),
            STREAM_P2 => self.mcs.private2.is_some(),
            _ => false,
        }
    }
}

/// Time-domain frame, one waveform per TX antenna and stage.
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub stage1: Vec<Vec<Complex64>>,
    pub stage2: Vec<Vec<Complex64>>,
    pub meta: FrameMeta,
}

/// One OFDM symbol with cyclic prefix from a frequency-domain loading.
fn ofdm_symbol(cfg: &FrameConfig, freq: &[Complex64]) -> Vec<Complex64> {
    let time = ifft(freq);
    let mut out = Vec::with_capacity(cfg.symbol_samples());
    out.extend_from_slice(&time[cfg.n_fft - cfg.cp_len..]);
    out.extend_from_slice(&time);
    out
}

/// Training field: double-length cyclic prefix plus two repetitions of
/// the symbol (160 samples in the default layout).
fn training_field(cfg: &FrameConfig, freq: &[Complex64]) -> Vec<Complex64> {
    let time = ifft(freq);
    let mut out = Vec::with_capacity(cfg.field_samples());
    out.extend_from_slice(&time[cfg.n_fft - 2 * cfg.cp_len..]);
    out.extend_from_slice(&time);
    out.extend_from_slice(&time);
    out
}

/// Stage 1: each antenna transmits STF + LTF in its own time slot at the
/// full power budget; other antennas stay silent.
pub fn build_stage1(cfg: &FrameConfig, n_tx: usize, p_t: f64) -> Vec<Vec<Complex64>> {
    let ltf = cfg.ltf_sequence();
    let stf = cfg.stf_sequence();
    let occupied = cfg.occupied_bins().len() as f64;
    // Unit-magnitude pilots scaled so the slot's time-average power is p_t.
    let scale = (p_t * cfg.n_fft as f64 / occupied).sqrt();
    let stf_scale = {
        let stf_power: f64 = stf.iter().map(|v| v.norm_sqr()).sum();
        (p_t * cfg.n_fft as f64 / stf_power).sqrt()
    };
    let slot = 2 * cfg.field_samples();
    let mut out = vec![vec![Complex64::ZERO; n_tx * slot]; n_tx];
    for (a, wave) in out.iter_mut().enumerate() {
        let stf_freq: Vec<Complex64> = stf.iter().map(|v| v * stf_scale).collect();
        let ltf_freq: Vec<Complex64> = ltf.iter().map(|v| v * scale).collect();
        let mut samples = training_field(cfg, &stf_freq);
        samples.extend(training_field(cfg, &ltf_freq));
        wave[a * slot..(a + 1) * slot].copy_from_slice(&samples);
    }
    out
}

/// SERVICE bit layout: three 4-bit MCS indices (common, private 1,
/// private 2), 0xF when the stream is absent.
pub fn service_bits(mcs: &McsTriple) -> Vec<u8> {
    let mut bits = Vec::with_capacity(12);
    for idx in [mcs.common, mcs.private1, mcs.private2] {
        let v = idx.unwrap_or(0xF);
        for b in (0..4).rev() {
            bits.push((v >> b) & 1);
        }
    }
    bits
}

pub fn parse_service_bits(bits: &[u8]) -> Option<McsTriple> {
    if bits.len() != 12 {
        return None;
    }
    let mut vals = [0u8; 3];
    for (i, chunk) in bits.chunks(4).enumerate() {
        vals[i] = chunk.iter().fold(0, |acc, &b| (acc << 1) | b);
    }
    let decode = |v: u8| if v == 0xF { Ok(None) } else if v <= 9 { Ok(Some(v)) } else { Err(()) };
    Some(McsTriple {
        common: decode(vals[0]).ok()?,
        private1: decode(vals[1]).ok()?,
        private2: decode(vals[2]).ok()?,
    })
}

/// The short code protecting the SERVICE symbol (BPSK over one OFDM
/// symbol's data bins).
pub fn service_code(cfg: &FrameConfig) -> Result<StreamCode, PhyError> {
    let coded = cfg.data_bins.len();
    let n = coded.next_power_of_two();
    let spec = fec::PolarCodeSpec::construct_shortened(n, 12, 0.0, coded)?;
    Ok(StreamCode { coded_bits: coded, info_bits: 12, spec: std::sync::Arc::new(spec) })
}

/// Stage 2: preamble (STF, three precoded LTFs), SERVICE, then the
/// superposed payload with cycled FPS pilots. The per-subcarrier payload
/// is exactly `p_c s_c + p_1 s_1 + p_2 s_2`.
pub fn build_stage2(
    cfg: &FrameConfig,
    precoders: &PrecoderSet,
    payloads: &[StreamPayload],
) -> Result<TxFrame, PhyError> {
    cfg.validate()?;
    let n_tx = precoders.p_c.len();
    let n_data = cfg.data_bins.len();
    let mut stream_symbols: [Option<&StreamPayload>; 3] = [None; 3];
    let mut mcs = McsTriple { common: None, private1: None, private2: None };
    for pl in payloads {
        if pl.symbols.len() != cfg.payload_symbols * n_data {
            return Err(PhyError::PayloadSize {
                got: pl.symbols.len(),
                want: cfg.payload_symbols * n_data,
            });
        }
        let s = pl.role.index();
        if stream_symbols[s].is_some() {
            return Err(PhyError::DuplicateStream(s));
        }
        stream_symbols[s] = Some(pl);
        match s {
            STREAM_C => mcs.common = Some(pl.mcs),
            STREAM_P1 => mcs.private1 = Some(pl.mcs),
            STREAM_P2 => mcs.private2 = Some(pl.mcs),
            _ => unreachable!(),
        }
    }

    let ltf = cfg.ltf_sequence();
    let stf = cfg.stf_sequence();
    let stf_scale = {
        let stf_power: f64 = stf.iter().map(|v| v.norm_sqr()).sum();
        (cfg.n_fft as f64 / stf_power).sqrt()
    };

    let mut waves: Vec<Vec<Complex64>> = vec![Vec::with_capacity(cfg.stage2_samples()); n_tx];

    // STF rides the common precoder (silent under SDMA; unused by the
    // simulated receivers either way).
    for a in 0..n_tx {
        let freq: Vec<Complex64> = stf.iter().map(|v| v * stf_scale * precoders.p_c[a]).collect();
        waves[a].extend(training_field(cfg, &freq));
    }
    // One LTF per stream: unit-magnitude pilots through the stream's
    // precoder column, like any payload symbol (zero column -> silent).
    for s in [STREAM_C, STREAM_P1, STREAM_P2] {
        for a in 0..n_tx {
            let w = precoders.column(s)[a];
            let freq: Vec<Complex64> = ltf.iter().map(|v| v * w).collect();
            let field = training_field(cfg, &freq);
            waves[a].extend(field);
        }
    }

    // SERVICE symbol: MCS indices, BPSK, common-precoded, pilots included.
    let sc = service_code(cfg)?;
    let service_codeword = fec::encode(&sc.spec, &service_bits(&mcs))?;
    let service_air = fec::rate_match(&sc.spec, &service_codeword, sc.coded_bits)?;
    let service_pts = modulate(&service_air, 1)?;
    for a in 0..n_tx {
        let mut freq = vec![Complex64::ZERO; cfg.n_fft];
        for (j, &bin) in cfg.data_bins.iter().enumerate() {
            freq[bin] = precoders.p_c[a] * service_pts[j];
        }
        for &bin in &cfg.fps_bins {
            freq[bin] = precoders.p_c[a] * cfg.pilot_value();
        }
        waves[a].extend(ofdm_symbol(cfg, &freq));
    }

    // Payload symbols with the 3-symbol pilot precoder cycle.
    for t in 1..=cfg.payload_symbols {
        let pilot_stream = cfg.pilot_stream_for_symbol(t);
        for a in 0..n_tx {
            let mut freq = vec![Complex64::ZERO; cfg.n_fft];
            for (j, &bin) in cfg.data_bins.iter().enumerate() {
                let mut v = Complex64::ZERO;
                for s in [STREAM_C, STREAM_P1, STREAM_P2] {
                    if let Some(pl) = stream_symbols[s] {
                        v += precoders.column(s)[a] * pl.symbols[(t - 1) * n_data + j];
                    }
                }
                freq[bin] = v;
            }
            for &bin in &cfg.fps_bins {
                freq[bin] = precoders.column(pilot_stream)[a] * cfg.pilot_value();
            }
            waves[a].extend(ofdm_symbol(cfg, &freq));
        }
    }

    Ok(TxFrame { stage1: Vec::new(), stage2: waves, meta: FrameMeta { mcs, n_tx } })
}

/// Builds both stages in one call.
pub fn build_frame(
    cfg: &FrameConfig,
    precoders: &PrecoderSet,
    payloads: &[StreamPayload],
    p_t: f64,
) -> Result<TxFrame, PhyError> {
    let mut frame = build_stage2(cfg, precoders, payloads)?;
    frame.stage1 = build_stage1(cfg, precoders.p_c.len(), p_t);
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precoding::Mode;
    use crate::util::fft::fft;

    fn cfg() -> FrameConfig {
        FrameConfig::default()
    }

    fn test_precoders(active_c: bool) -> PrecoderSet {
        let mut p = PrecoderSet::zeros(2, Mode::Rsma);
        if active_c {
            p.p_c = vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.25)];
        }
        p.p_1 = vec![Complex64::new(0.25, -0.15), Complex64::new(0.1, 0.2)];
        p.p_2 = vec![Complex64::new(-0.1, 0.05), Complex64::new(0.3, 0.0)];
        p
    }

    fn payloads(cfg: &FrameConfig, with_common: bool) -> Vec<StreamPayload> {
        let mut v = vec![
            StreamPayload::random(StreamRole::Private(Group::G1), 2, cfg, 11).unwrap(),
            StreamPayload::random(StreamRole::Private(Group::G2), 0, cfg, 11).unwrap(),
        ];
        if with_common {
            v.push(StreamPayload::random(StreamRole::Common, 4, cfg, 11).unwrap());
        }
        v
    }

    #[test]
    fn stage1_antennas_orthogonal_in_time() {
        let c = cfg();
        let waves = build_stage1(&c, 2, 0.2);
        assert_eq!(waves[0].len(), 2 * 320);
        for n in 0..waves[0].len() {
            let both_active = waves[0][n].norm() > 1e-12 && waves[1][n].norm() > 1e-12;
            assert!(!both_active, "overlap at sample {n}");
        }
        // 8 us fields at 20 MHz: 160 samples each.
        assert_eq!(c.field_samples(), 160);
    }

    #[test]
    fn ltf_power_flat_on_occupied_bins() {
        let c = cfg();
        let ltf = c.ltf_sequence();
        for &bin in &c.occupied_bins() {
            assert!((ltf[bin].norm() - 1.0).abs() < 1e-12);
        }
        for &bin in &c.guard_bins {
            assert_eq!(ltf[bin], Complex64::ZERO);
        }
    }

    #[test]
    fn frame_sample_counts_match_layout() {
        let c = cfg();
        let frame = build_frame(&c, &test_precoders(true), &payloads(&c, true), 0.2).unwrap();
        // 4 training fields + (1 SERVICE + 50 payload) * 80 samples.
        assert_eq!(c.stage2_samples(), 4 * 160 + 51 * 80);
        assert_eq!(frame.stage2[0].len(), 4720);
        assert_eq!(frame.stage1[0].len(), 640);
    }

    #[test]
    fn payload_superposition_is_exact() {
        // The full frame equals the sample-wise sum of three single-stream
        // frames built with the other precoder columns zeroed.
        let c = cfg();
        let p = test_precoders(true);
        let pls = payloads(&c, true);
        let full = build_stage2(&c, &p, &pls).unwrap();
        let mut acc = vec![vec![Complex64::ZERO; full.stage2[0].len()]; 2];
        for s in [STREAM_C, STREAM_P1, STREAM_P2] {
            let mut solo = PrecoderSet::zeros(2, Mode::Rsma);
            *solo.column_mut(s) = p.column(s).to_vec();
            let frame_s = build_stage2(&c, &solo, &pls).unwrap();
            for a in 0..2 {
                for (dst, src) in acc[a].iter_mut().zip(&frame_s.stage2[a]) {
                    *dst += src;
                }
            }
        }
        for a in 0..2 {
            for (got, want) in acc[a].iter().zip(&full.stage2[a]) {
                assert!((got - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn payload_bins_carry_weighted_sum() {
        // With only the common stream active, payload bin k holds
        // p_c[a] * s_c[k] exactly.
        let c = cfg();
        let mut p = test_precoders(true);
        p.p_1 = vec![Complex64::ZERO; 2];
        p.p_2 = vec![Complex64::ZERO; 2];
        let pl = StreamPayload::random(StreamRole::Common, 3, &c, 5).unwrap();
        let frame = build_stage2(&c, &p, std::slice::from_ref(&pl)).unwrap();
        // First payload symbol starts after 4 fields + SERVICE.
        let start = 4 * 160 + 80;
        for a in 0..2 {
            let sym = &frame.stage2[a][start + 16..start + 80];
            let freq = fft(sym);
            for (j, &bin) in c.data_bins.iter().enumerate() {
                let want = p.p_c[a] * pl.symbols[j];
                assert!((freq[bin] - want).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn pilot_cycle_follows_symbol_index() {
        let c = cfg();
        assert_eq!(c.pilot_stream_for_symbol(1), STREAM_C);
        assert_eq!(c.pilot_stream_for_symbol(2), STREAM_P1);
        assert_eq!(c.pilot_stream_for_symbol(3), STREAM_P2);
        assert_eq!(c.pilot_stream_for_symbol(4), STREAM_C);
        assert_eq!(c.pilot_stream_for_symbol(7), STREAM_C);
    }

    #[test]
    fn average_tx_power_within_budget() {
        let c = cfg();
        let p_t = 0.2;
        let mut p = test_precoders(true);
        // Stretch the precoders to the full budget for a tight check.
        let scale = (p_t / p.total_power()).sqrt();
        for s in 0..3 {
            for v in p.column_mut(s).iter_mut() {
                *v *= scale;
            }
        }
        let frame = build_stage2(&c, &p, &payloads(&c, true)).unwrap();
        let samples: usize = frame.stage2[0].len();
        let power: f64 = (0..samples)
            .map(|n| frame.stage2.iter().map(|w| w[n].norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / samples as f64;
        assert!(power <= p_t * 1.01, "mean TX power {power} above budget {p_t}");
    }

    #[test]
    fn service_bits_roundtrip() {
        let mcs = McsTriple { common: Some(5), private1: Some(0), private2: None };
        let bits = service_bits(&mcs);
        assert_eq!(parse_service_bits(&bits), Some(mcs));
    }

    #[test]
    fn payload_size_validated() {
        let c = cfg();
        let level_bits = fec::code_for_mcs(&crate::allocation::MCS_TABLE[2], 48, 50)
            .unwrap()
            .info_bits;
        let err = StreamPayload::encode(StreamRole::Common, 2, vec![0; level_bits - 1], &c);
        assert!(matches!(err, Err(PhyError::PayloadSize { .. })));
    }
}
