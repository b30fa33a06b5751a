//! Channel application: tap-domain convolution per (user, antenna) plus
//! i.i.d. complex Gaussian noise, and the binary frame-dump format used
//! for replay.

use super::frame::TxFrame;
use super::{FrameConfig, PhyError};
use crate::rng::{complex_gaussian, rng_for, Stream};
use crate::scenario::UserChannel;
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

/// Optional impairments beyond noise and multipath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impairments {
    /// Constant phase rotation applied to every stage-2 sample from the
    /// SERVICE symbol onward (the preamble stays clean, so LTF estimates
    /// do not absorb it). Exercises the FPS tracking loop.
    pub common_phase_error_rad: f64,
}

impl Default for Impairments {
    fn default() -> Self {
        Impairments { common_phase_error_rad: 0.0 }
    }
}

/// Per-user received time series for both stages.
#[derive(Debug, Clone)]
pub struct RxObservation {
    pub stage1: Vec<Complex64>,
    pub stage2: Vec<Complex64>,
    /// Seed of the noise realization, for replay.
    pub noise_seed: u64,
}

fn convolve_add(out: &mut [Complex64], x: &[Complex64], gain: Complex64, delay: usize) {
    for (n, &v) in x.iter().enumerate() {
        let idx = n + delay;
        if idx < out.len() {
            out[idx] += gain * v;
        }
    }
}

/// `y_u = sum_a (x_a conv taps_{u,a}) + CN(0, sigma2)` per sample, with
/// the configured impairments on the stage-2 payload region. `sigma2 = 0`
/// is allowed for noiseless reference runs.
pub fn apply_channel(
    frame: &TxFrame,
    channels: &[UserChannel],
    cfg: &FrameConfig,
    sigma2: f64,
    seed: u64,
    imp: Impairments,
) -> Vec<RxObservation> {
    let payload_start = 4 * cfg.field_samples();
    channels
        .iter()
        .enumerate()
        .map(|(uidx, ch)| {
            let receive_stage = |stage: &[Vec<Complex64>], tag: Stream, rotate: bool| {
                if stage.is_empty() {
                    return Vec::new();
                }
                let len = stage[0].len();
                let mut y = vec![Complex64::ZERO; len];
                for (a, wave) in stage.iter().enumerate() {
                    for tap in &ch.taps {
                        convolve_add(&mut y, wave, tap.gain[a], tap.delay);
                    }
                }
                if rotate && imp.common_phase_error_rad != 0.0 {
                    let rot = Complex64::from_polar(1.0, imp.common_phase_error_rad);
                    for v in y.iter_mut().skip(payload_start) {
                        *v *= rot;
                    }
                }
                if sigma2 > 0.0 {
                    let mut rng = rng_for(seed, &[tag as u64, uidx as u64]);
                    for v in y.iter_mut() {
                        *v += complex_gaussian(&mut rng, sigma2);
                    }
                }
                y
            };
            RxObservation {
                stage1: receive_stage(&frame.stage1, Stream::NoiseStage1, false),
                stage2: receive_stage(&frame.stage2, Stream::NoiseStage2, true),
                noise_seed: seed,
            }
        })
        .collect()
}

/// Writes a frame as little-endian f32 (re, im) pairs, stage 1 then
/// stage 2, antenna-major, with a text sidecar naming the layout.
pub fn dump_frame(frame: &TxFrame, cfg: &FrameConfig, path_base: &Path) -> Result<(), PhyError> {
    let bin_path = path_base.with_extension("bin");
    let mut bytes = Vec::new();
    for stage in [&frame.stage1, &frame.stage2] {
        for wave in stage {
            for v in wave {
                bytes.extend_from_slice(&(v.re as f32).to_le_bytes());
                bytes.extend_from_slice(&(v.im as f32).to_le_bytes());
            }
        }
    }
    std::fs::write(&bin_path, &bytes)
        .map_err(|e| PhyError::Io { path: bin_path.display().to_string(), source: e })?;

    let header_path = path_base.with_extension("txt");
    let mut header = Vec::new();
    let stage1_len = frame.stage1.first().map_or(0, Vec::len);
    writeln!(header, "format = complex-f32-le").unwrap();
    writeln!(header, "config_hash = {:016x}", config_hash(cfg)).unwrap();
    writeln!(header, "n_tx = {}", frame.meta.n_tx).unwrap();
    writeln!(header, "stage1_samples_per_antenna = {stage1_len}").unwrap();
    writeln!(header, "stage2_samples_per_antenna = {}", frame.stage2[0].len()).unwrap();
    writeln!(
        header,
        "mcs = {},{},{}",
        fmt_mcs(frame.meta.mcs.common),
        fmt_mcs(frame.meta.mcs.private1),
        fmt_mcs(frame.meta.mcs.private2)
    )
    .unwrap();
    std::fs::write(&header_path, header)
        .map_err(|e| PhyError::Io { path: header_path.display().to_string(), source: e })?;
    Ok(())
}

fn fmt_mcs(m: Option<u8>) -> String {
    m.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// FNV-1a over the serialized frame layout.
pub fn config_hash(cfg: &FrameConfig) -> u64 {
    let text = serde_json::to_string(cfg).expect("config serializes");
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}
