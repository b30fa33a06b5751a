//! Per-user receive chain.
//!
//! Known frame timing (simulation), so the pipeline is: estimate the
//! precoded effective channels from the three stage-2 LTFs, track the
//! common phase per payload symbol from the FPS pilots, equalize and
//! decode the common stream treating both privates as noise, re-encode
//! and subtract it on CRC success, then decode the own private stream.
//! On a common CRC failure the private decode proceeds without
//! subtraction and the outcome is flagged.

use super::frame::{parse_service_bits, service_code, FrameMeta, StreamPayload, StreamRole};
use super::modem::demap_llr;
use super::{FrameConfig, PhyError, RxObservation};
use crate::allocation::{mcs_level, McsTriple};
use crate::fec::{self, rate_unmatch_llrs};
use crate::precoding::{STREAM_C, STREAM_P1, STREAM_P2};
use crate::scenario::{estimate_csi_ls, wideband_average, WidebandCsit};
use crate::util::fft::fft;
use crate::Group;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOptions {
    pub list_size: usize,
    /// Track and correct the per-symbol common phase from the FPS pilots.
    pub fps_enabled: bool,
    /// Take the MCS indices from the decoded SERVICE symbol instead of
    /// the out-of-band descriptor.
    pub trust_service: bool,
    /// Include measured interference power in the LLR noise variance.
    pub interference_aware_llr: bool,
    /// Test knob: multiply the LLR noise variance by this factor.
    pub llr_variance_scale: f64,
}

impl Default for ReceiverOptions {
    fn default() -> Self {
        ReceiverOptions {
            list_size: 2,
            fps_enabled: true,
            trust_service: false,
            interference_aware_llr: true,
            llr_variance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamDecode {
    /// The stream is not part of this frame (or not meant for this user).
    NotPresent,
    Decoded(Vec<u8>),
    Failed,
}

impl StreamDecode {
    pub fn is_decoded(&self) -> bool {
        matches!(self, StreamDecode::Decoded(_))
    }

    pub fn bits(&self) -> Option<&[u8]> {
        match self {
            StreamDecode::Decoded(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Whether the common contribution was subtracted before the private
    /// decode.
    pub sic_applied: bool,
    pub common_crc_ok: Option<bool>,
    /// Estimated common phase per symbol (SERVICE first, then payload).
    pub phase_track: Vec<f64>,
    /// MCS triple recovered from SERVICE, when it was decoded.
    pub service_mcs: Option<McsTriple>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveOutcome {
    pub common: StreamDecode,
    pub private: StreamDecode,
    pub diagnostics: Diagnostics,
}

/// Effective noise power for LLR scaling: thermal noise plus the
/// measured residual interference amplitudes.
pub fn effective_noise_variance(sigma2: f64, interferer_amplitudes: &[Complex64]) -> f64 {
    sigma2 + interferer_amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
}

/// Frequency bins of one OFDM symbol inside a longer series.
fn symbol_bins(series: &[Complex64], offset: usize, cfg: &FrameConfig) -> Vec<Complex64> {
    fft(&series[offset + cfg.cp_len..offset + cfg.symbol_samples()])
}

/// Average of the two repetitions of a training field.
fn field_bins(series: &[Complex64], offset: usize, cfg: &FrameConfig) -> Vec<Complex64> {
    let first = fft(&series[offset + 2 * cfg.cp_len..offset + 2 * cfg.cp_len + cfg.n_fft]);
    let second = fft(&series[offset + 2 * cfg.cp_len + cfg.n_fft..offset + cfg.field_samples()]);
    first.iter().zip(&second).map(|(a, b)| (a + b) / 2.0).collect()
}

/// Stage-1 processing: per-antenna least-squares estimates on the
/// occupied bins, averaged into the wideband CSIT vector.
pub fn stage1_wideband_csit(
    obs: &RxObservation,
    cfg: &FrameConfig,
    n_tx: usize,
    p_t: f64,
) -> Result<WidebandCsit, PhyError> {
    let want = cfg.stage1_samples(n_tx);
    if obs.stage1.len() != want {
        return Err(PhyError::ObservationLength { got: obs.stage1.len(), want });
    }
    let occupied = cfg.occupied_bins();
    let scale = (p_t * cfg.n_fft as f64 / occupied.len() as f64).sqrt();
    let known: Vec<Complex64> = cfg.ltf_sequence().iter().map(|v| v * scale).collect();
    let slot = 2 * cfg.field_samples();
    let mut per_antenna: Vec<Vec<Option<Complex64>>> = Vec::with_capacity(n_tx);
    for a in 0..n_tx {
        let ltf_offset = a * slot + cfg.field_samples();
        let rx = field_bins(&obs.stage1, ltf_offset, cfg);
        per_antenna.push(estimate_csi_ls(&rx, &known).map_err(|e| {
            PhyError::Malformed(format!("stage-1 estimation failed: {e}"))
        })?);
    }
    let ests: Vec<Option<Vec<Complex64>>> = (0..cfg.n_fft)
        .map(|k| {
            let per_bin: Option<Vec<Complex64>> =
                (0..n_tx).map(|a| per_antenna[a][k]).collect();
            per_bin
        })
        .collect();
    wideband_average(&ests)
        .map_err(|e| PhyError::Malformed(format!("wideband averaging failed: {e}")))
}

/// Per-bin effective channel of one precoded stream from its LTF
/// (plain division; this is `h[k]^H p_s`, not the conjugate convention).
fn effective_channel(
    series: &[Complex64],
    offset: usize,
    cfg: &FrameConfig,
    known: &[Complex64],
) -> Vec<Complex64> {
    let rx = field_bins(series, offset, cfg);
    rx.iter()
        .zip(known)
        .map(|(&y, &x)| if x == Complex64::ZERO { Complex64::ZERO } else { y / x })
        .collect()
}

struct StreamEstimates {
    /// `e[s][bin]` effective channel, `None` when the stream is inactive.
    e: [Option<Vec<Complex64>>; 3],
}

impl StreamEstimates {
    fn active(&self, s: usize) -> bool {
        self.e[s].is_some()
    }
}

/// Decodes one stream from phase-corrected payload bins.
#[allow(clippy::too_many_arguments)]
fn decode_stream(
    payload: &[Vec<Complex64>],
    cfg: &FrameConfig,
    mcs_idx: u8,
    e_own: &[Complex64],
    interferers: &[&Vec<Complex64>],
    sigma2: f64,
    opts: &ReceiverOptions,
) -> Result<Option<Vec<u8>>, PhyError> {
    let level = mcs_level(mcs_idx)?;
    let code = fec::code_for_mcs(level, cfg.data_bins.len(), cfg.payload_symbols)?;
    let mut llrs = Vec::with_capacity(code.coded_bits);
    for bins in payload.iter() {
        for &bin in &cfg.data_bins {
            let e = e_own[bin];
            let gain = e.norm_sqr().max(1e-300);
            let interference: f64 = if opts.interference_aware_llr {
                interferers.iter().map(|ch| ch[bin].norm_sqr()).sum()
            } else {
                0.0
            };
            let noise = opts.llr_variance_scale * (sigma2 + interference) / gain;
            let equalized = bins[bin] / e;
            demap_llr(equalized, level.m, noise, &mut llrs)?;
        }
    }
    let block = rate_unmatch_llrs(&code.spec, &llrs)?;
    Ok(fec::decode(&code.spec, &block, opts.list_size)?)
}

/// Runs the full receive pipeline for one user of `group`.
pub fn receive_user(
    obs: &RxObservation,
    group: Group,
    cfg: &FrameConfig,
    meta: &FrameMeta,
    sigma2: f64,
    opts: &ReceiverOptions,
) -> Result<ReceiveOutcome, PhyError> {
    cfg.validate()?;
    let want = cfg.stage2_samples();
    if obs.stage2.len() != want {
        return Err(PhyError::ObservationLength { got: obs.stage2.len(), want });
    }
    let known_ltf = cfg.ltf_sequence();
    let field = cfg.field_samples();

    // Effective channels from the three precoded LTFs; only streams the
    // descriptor marks active get estimates.
    let ltf_offsets = [field, 2 * field, 3 * field];
    let estimates = StreamEstimates {
        e: std::array::from_fn(|s| {
            meta.stream_active(s)
                .then(|| effective_channel(&obs.stage2, ltf_offsets[s], cfg, &known_ltf))
        }),
    };

    // FFT SERVICE + payload symbols and correct the common phase from
    // whatever pilots each symbol carries.
    let payload_base = 4 * field;
    let n_symbols = 1 + cfg.payload_symbols;
    let mut symbols: Vec<Vec<Complex64>> = (0..n_symbols)
        .map(|t| symbol_bins(&obs.stage2, payload_base + t * cfg.symbol_samples(), cfg))
        .collect();
    // A pilot set is only trusted when its expected energy clears the
    // noise floor comfortably; otherwise the phase estimate would be
    // noise-driven (zeroed precoders, orthogonal users) and the most
    // recent valid estimate is reused instead.
    let pilot_gate = 30.0 * sigma2 * cfg.fps_bins.len() as f64;
    let mut phase_track = Vec::with_capacity(n_symbols);
    let mut last_phase = 0.0f64;
    for (t, bins) in symbols.iter_mut().enumerate() {
        let pilot_stream = if t == 0 { STREAM_C } else { cfg.pilot_stream_for_symbol(t) };
        if opts.fps_enabled {
            if let Some(e) = &estimates.e[pilot_stream] {
                let expected_power: f64 = cfg.fps_bins.iter().map(|&b| e[b].norm_sqr()).sum();
                if expected_power > pilot_gate {
                    let corr: Complex64 = cfg
                        .fps_bins
                        .iter()
                        .map(|&b| bins[b] * (e[b] * cfg.pilot_value()).conj())
                        .sum();
                    if corr.norm() > 0.0 {
                        last_phase = corr.arg();
                    }
                }
            }
        }
        phase_track.push(last_phase);
        if last_phase != 0.0 {
            let rot = Complex64::from_polar(1.0, -last_phase);
            for v in bins.iter_mut() {
                *v *= rot;
            }
        }
    }

    // Optionally replace the out-of-band MCS descriptor with the decoded
    // SERVICE content (common-precoded, so only meaningful when the
    // common stream is on).
    let mut mcs = meta.mcs;
    let mut service_mcs = None;
    if opts.trust_service {
        let e_c = estimates.e[STREAM_C]
            .as_ref()
            .ok_or_else(|| PhyError::Malformed("SERVICE requires the common stream".into()))?;
        let sc = service_code(cfg)?;
        let mut llrs = Vec::with_capacity(sc.coded_bits);
        let interferers: Vec<&Vec<Complex64>> = [STREAM_P1, STREAM_P2]
            .into_iter()
            .filter_map(|s| estimates.e[s].as_ref())
            .collect();
        for &bin in &cfg.data_bins {
            let e = e_c[bin];
            let gain = e.norm_sqr().max(1e-300);
            let interference: f64 = interferers.iter().map(|ch| ch[bin].norm_sqr()).sum();
            let noise = opts.llr_variance_scale * (sigma2 + interference) / gain;
            demap_llr(symbols[0][bin] / e, 1, noise, &mut llrs)?;
        }
        let block = rate_unmatch_llrs(&sc.spec, &llrs)?;
        let decoded = fec::decode(&sc.spec, &block, opts.list_size)?
            .and_then(|bits| parse_service_bits(&bits));
        match decoded {
            Some(triple) => {
                service_mcs = Some(triple);
                mcs = triple;
            }
            None => {
                return Ok(ReceiveOutcome {
                    common: StreamDecode::Failed,
                    private: StreamDecode::Failed,
                    diagnostics: Diagnostics {
                        sic_applied: false,
                        common_crc_ok: Some(false),
                        phase_track,
                        service_mcs: None,
                    },
                });
            }
        }
    }

    let payload = &mut symbols[1..];

    // Common stream first, both privates treated as noise.
    let mut common = StreamDecode::NotPresent;
    let mut common_crc_ok = None;
    let mut sic_applied = false;
    if let (Some(mcs_c), Some(e_c)) = (mcs.common, estimates.e[STREAM_C].as_ref()) {
        let interferers: Vec<&Vec<Complex64>> = [STREAM_P1, STREAM_P2]
            .into_iter()
            .filter_map(|s| estimates.e[s].as_ref())
            .collect();
        let decoded = decode_stream(payload, cfg, mcs_c, e_c, &interferers, sigma2, opts)?;
        common_crc_ok = Some(decoded.is_some());
        match decoded {
            Some(bits) => {
                // SIC: re-encode, re-modulate, scale by the estimated
                // effective channel, subtract.
                let reenc = StreamPayload::encode(StreamRole::Common, mcs_c, bits.clone(), cfg)?;
                let n_data = cfg.data_bins.len();
                for (t, bins) in payload.iter_mut().enumerate() {
                    for (j, &bin) in cfg.data_bins.iter().enumerate() {
                        bins[bin] -= e_c[bin] * reenc.symbols[t * n_data + j];
                    }
                }
                sic_applied = true;
                common = StreamDecode::Decoded(bits);
            }
            None => common = StreamDecode::Failed,
        }
    }

    // Own private stream; the other group's private is interference, and
    // the (uncancelled) common joins it when SIC did not run.
    let own_stream = match group {
        Group::G1 => STREAM_P1,
        Group::G2 => STREAM_P2,
    };
    let other_stream = if own_stream == STREAM_P1 { STREAM_P2 } else { STREAM_P1 };
    let own_mcs = mcs.private(group);
    let mut private = StreamDecode::NotPresent;
    if let (Some(mcs_p), Some(e_own)) = (own_mcs, estimates.e[own_stream].as_ref()) {
        let mut interferers: Vec<&Vec<Complex64>> = Vec::new();
        if let Some(e) = estimates.e[other_stream].as_ref() {
            interferers.push(e);
        }
        if estimates.active(STREAM_C) && !sic_applied {
            interferers.push(estimates.e[STREAM_C].as_ref().unwrap());
        }
        let decoded = decode_stream(payload, cfg, mcs_p, e_own, &interferers, sigma2, opts)?;
        private = match decoded {
            Some(bits) => StreamDecode::Decoded(bits),
            None => StreamDecode::Failed,
        };
    }

    Ok(ReceiveOutcome {
        common,
        private,
        diagnostics: Diagnostics { sic_applied, common_crc_ok, phase_track, service_mcs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::channel::{apply_channel, Impairments};
    use crate::phy::frame::{build_frame, StreamPayload, StreamRole, TxFrame};
    use crate::precoding::{Mode, PrecoderSet};
    use crate::rng::{complex_gaussian, rng_for};
    use crate::scenario::{generate_channels, reference_base, Multipath, ScenarioConfig};

    fn los_scenario() -> ScenarioConfig {
        let mut s = reference_base();
        s.multipath = Multipath::NONE;
        s
    }

    fn rsma_precoders(scale: f64) -> PrecoderSet {
        let mut p = PrecoderSet::zeros(2, Mode::Rsma);
        p.p_c = vec![Complex64::new(0.25, 0.05), Complex64::new(0.15, -0.1)];
        p.p_1 = vec![Complex64::new(0.12, 0.0), Complex64::new(-0.05, 0.1)];
        p.p_2 = vec![Complex64::new(0.03, 0.08), Complex64::new(0.12, 0.02)];
        for s in 0..3 {
            for v in p.column_mut(s).iter_mut() {
                *v *= scale;
            }
        }
        p
    }

    /// Orthogonal-by-group flat channels built directly: both group-1
    /// users on the first array axis, group 2 on the second. Cross-group
    /// private interference is exactly zero, so with a dominant common
    /// precoder every stream decodes exactly in the noiseless limit.
    fn orthogonal_channels() -> Vec<crate::scenario::UserChannel> {
        let mk = |group: Group, user: u8, axis: usize, scale: f64| {
            let mut gain = vec![Complex64::ZERO; 2];
            gain[axis] = Complex64::new(scale, 0.0);
            let taps = vec![crate::scenario::ChannelTap { delay: 0, gain: gain.clone() }];
            let h: Vec<Vec<Complex64>> =
                (0..64).map(|_| gain.iter().map(|g| g.conj()).collect()).collect();
            crate::scenario::UserChannel { group, user, h, taps }
        };
        vec![
            mk(Group::G1, 1, 0, 1.0),
            mk(Group::G1, 2, 0, 0.9),
            mk(Group::G2, 1, 1, 0.8),
            mk(Group::G2, 2, 1, 0.7),
        ]
    }

    /// Dominant common stream plus weak orthogonal privates: residual
    /// interference stays below every constellation decision margin.
    fn hierarchical_precoders() -> PrecoderSet {
        let mut p = PrecoderSet::zeros(2, Mode::Rsma);
        let g = (0.9f64 / 2.0).sqrt();
        p.p_c = vec![Complex64::new(g, 0.0), Complex64::new(g, 0.0)];
        p.p_1 = vec![Complex64::new(0.02, 0.0), Complex64::ZERO];
        p.p_2 = vec![Complex64::ZERO, Complex64::new(0.02, 0.0)];
        p
    }

    fn frame_with(cfg: &FrameConfig, p: &PrecoderSet, mcs: [u8; 3], seed: u64) -> TxFrame {
        let payloads = vec![
            StreamPayload::random(StreamRole::Common, mcs[0], cfg, seed).unwrap(),
            StreamPayload::random(StreamRole::Private(Group::G1), mcs[1], cfg, seed).unwrap(),
            StreamPayload::random(StreamRole::Private(Group::G2), mcs[2], cfg, seed).unwrap(),
        ];
        build_frame(cfg, p, &payloads, 0.2).unwrap()
    }

    #[test]
    fn noiseless_end_to_end_identity() {
        let cfg = FrameConfig::default();
        let chans = orthogonal_channels();
        let p = hierarchical_precoders();
        for mcs in [[0u8, 0, 0], [5, 4, 3], [9, 9, 9]] {
            let frame = frame_with(&cfg, &p, mcs, 77);
            let obs = apply_channel(&frame, &chans, &cfg, 1e-12, 5, Impairments::default());
            for (u, ob) in obs.iter().enumerate() {
                let group = chans[u].group;
                let out = receive_user(ob, group, &cfg, &frame.meta, 1e-12, &Default::default())
                    .unwrap();
                assert!(out.common.is_decoded(), "user {u} failed common at {mcs:?}");
                assert!(out.private.is_decoded(), "user {u} failed private at {mcs:?}");
                assert!(out.diagnostics.sic_applied);
            }
        }
    }

    #[test]
    fn stage1_csit_matches_true_wideband_average() {
        let cfg = FrameConfig::default();
        let scenario = reference_base();
        let chans = generate_channels(&scenario, 3).unwrap();
        let p = rsma_precoders(1.0);
        let frame = frame_with(&cfg, &p, [0, 0, 0], 1);
        // Noise-free stage 1: the estimate equals the exact average of
        // h[k] over the occupied bins.
        let obs = apply_channel(&frame, &chans, &cfg, 0.0, 0, Impairments::default());
        let occupied = cfg.occupied_bins();
        for (u, ob) in obs.iter().enumerate() {
            let est = stage1_wideband_csit(ob, &cfg, 2, 0.2).unwrap();
            let truth = crate::scenario::ideal_csit(&chans[u..u + 1], &occupied);
            for a in 0..2 {
                assert!(
                    (est.h_hat[a] - truth[0].h_hat[a]).norm() < 1e-9,
                    "user {u} antenna {a}: {} vs {}",
                    est.h_hat[a],
                    truth[0].h_hat[a]
                );
            }
        }
    }

    #[test]
    fn effective_noise_variance_values() {
        assert_eq!(effective_noise_variance(0.2, &[]), 0.2);
        let amp = Complex64::new(0.3, 0.4); // power 0.25
        assert!((effective_noise_variance(0.2, &[amp]) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn interference_power_estimated_within_tolerance() {
        // The receiver's per-bin interference estimate (from the other
        // stream's LTF) lands within a few percent of the true power at
        // this SNR, averaged over bins and trials.
        let cfg = FrameConfig::default();
        let scenario = los_scenario();
        let chans = generate_channels(&scenario, 0).unwrap();
        let p = rsma_precoders(1.0);
        let frame = frame_with(&cfg, &p, [2, 2, 2], 9);
        let sigma2 = 1e-5;
        let mut rel_err = 0.0;
        let trials = 40;
        for seed in 0..trials {
            let obs = apply_channel(&frame, &chans, &cfg, sigma2, seed, Impairments::default());
            let known = cfg.ltf_sequence();
            let e1 = effective_channel(&obs[0].stage2, 2 * cfg.field_samples(), &cfg, &known);
            let truth: f64 = cfg
                .data_bins
                .iter()
                .map(|&bin| chans[0].effective_gain(bin, &p.p_1).norm_sqr())
                .sum::<f64>();
            let est: f64 = cfg.data_bins.iter().map(|&bin| e1[bin].norm_sqr()).sum::<f64>();
            rel_err += (est - truth).abs() / truth;
        }
        rel_err /= trials as f64;
        assert!(rel_err < 0.05, "mean relative interference-power error {rel_err}");
    }

    #[test]
    fn phase_rotation_corrected_by_fps() {
        let cfg = FrameConfig::default();
        let chans = orthogonal_channels();
        let p = hierarchical_precoders();
        let frame = frame_with(&cfg, &p, [5, 2, 0], 21);
        let imp = Impairments { common_phase_error_rad: 0.3 };
        let obs = apply_channel(&frame, &chans, &cfg, 1e-12, 5, imp);
        let out = receive_user(&obs[0], Group::G1, &cfg, &frame.meta, 1e-12, &Default::default())
            .unwrap();
        assert!(out.common.is_decoded() && out.private.is_decoded());
        // Tracked phase should sit near the injected rotation.
        let mean_phase: f64 = out.diagnostics.phase_track.iter().sum::<f64>()
            / out.diagnostics.phase_track.len() as f64;
        assert!((mean_phase - 0.3).abs() < 0.02, "tracked phase {mean_phase}");

        let no_fps = ReceiverOptions { fps_enabled: false, ..Default::default() };
        let out = receive_user(&obs[0], Group::G1, &cfg, &frame.meta, 1e-12, &no_fps).unwrap();
        // 0.3 rad pushes outer 16QAM points across decision boundaries,
        // beyond what rate 3/4 can absorb.
        assert!(!out.common.is_decoded());
    }

    #[test]
    fn service_decode_matches_out_of_band() {
        let cfg = FrameConfig::default();
        let chans = orthogonal_channels();
        let p = hierarchical_precoders();
        let frame = frame_with(&cfg, &p, [5, 3, 1], 33);
        let obs = apply_channel(&frame, &chans, &cfg, 1e-9, 2, Impairments::default());
        let opts = ReceiverOptions { trust_service: true, ..Default::default() };
        let out = receive_user(&obs[2], Group::G2, &cfg, &frame.meta, 1e-9, &opts).unwrap();
        assert_eq!(out.diagnostics.service_mcs, Some(frame.meta.mcs));
        assert!(out.common.is_decoded() && out.private.is_decoded());
    }

    #[test]
    fn llr_variance_scaling_is_outcome_invariant() {
        // Max-log LLRs scale uniformly under a wrong noise variance, and
        // the list decoder's path ordering is scale-invariant, so the
        // decode outcome cannot change.
        let cfg = FrameConfig::default();
        let scenario = reference_base();
        let chans = generate_channels(&scenario, 8).unwrap();
        let p = rsma_precoders(1.0);
        let frame = frame_with(&cfg, &p, [4, 2, 2], 51);
        for seed in 0..10u64 {
            let obs = apply_channel(&frame, &chans, &cfg, 3e-4, seed, Impairments::default());
            let base = receive_user(&obs[1], Group::G1, &cfg, &frame.meta, 3e-4, &Default::default())
                .unwrap();
            let scaled_opts =
                ReceiverOptions { llr_variance_scale: 2.0, ..Default::default() };
            let scaled =
                receive_user(&obs[1], Group::G1, &cfg, &frame.meta, 3e-4, &scaled_opts).unwrap();
            assert_eq!(base.common, scaled.common);
            assert_eq!(base.private, scaled.private);
        }
    }

    #[test]
    fn receiver_is_deterministic() {
        let cfg = FrameConfig::default();
        let scenario = reference_base();
        let chans = generate_channels(&scenario, 2).unwrap();
        let p = rsma_precoders(1.0);
        let frame = frame_with(&cfg, &p, [2, 2, 2], 5);
        let obs = apply_channel(&frame, &chans, &cfg, 2e-4, 3, Impairments::default());
        let a = receive_user(&obs[3], Group::G2, &cfg, &frame.meta, 2e-4, &Default::default())
            .unwrap();
        let b = receive_user(&obs[3], Group::G2, &cfg, &frame.meta, 2e-4, &Default::default())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn observation_length_validated() {
        let cfg = FrameConfig::default();
        let ob = RxObservation {
            stage1: vec![],
            stage2: vec![Complex64::ZERO; 100],
            noise_seed: 0,
        };
        let meta = FrameMeta {
            mcs: McsTriple { common: Some(0), private1: Some(0), private2: Some(0) },
            n_tx: 2,
        };
        assert!(matches!(
            receive_user(&ob, Group::G1, &cfg, &meta, 1e-4, &Default::default()),
            Err(PhyError::ObservationLength { .. })
        ));
    }

    #[test]
    fn noise_only_effective_channel_is_small() {
        // Guard against regressions in the known-LTF scaling: estimating
        // a silent stream's LTF yields near-noise-floor power.
        let cfg = FrameConfig::default();
        let mut rng = rng_for(77, &[1]);
        let sigma2 = 1e-4;
        let series: Vec<Complex64> =
            (0..cfg.stage2_samples()).map(|_| complex_gaussian(&mut rng, sigma2)).collect();
        let known = cfg.ltf_sequence();
        let e = effective_channel(&series, cfg.field_samples(), &cfg, &known);
        let mean_power: f64 = cfg.data_bins.iter().map(|&b| e[b].norm_sqr()).sum::<f64>()
            / cfg.data_bins.len() as f64;
        assert!(mean_power < 5.0 * sigma2);
    }
}
