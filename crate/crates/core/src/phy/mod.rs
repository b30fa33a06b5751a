//! OFDM baseband: frame construction, channel application, and the SIC
//! receiver chain.

pub mod channel;
pub mod frame;
pub mod modem;
pub mod receiver;

use crate::fec::FecError;
use crate::precoding::{STREAM_C, STREAM_P1, STREAM_P2};
use crate::rng::rng_for;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use channel::{apply_channel, Impairments, RxObservation};
pub use frame::{
    build_frame, build_stage1, build_stage2, FrameMeta, StreamPayload, StreamRole, TxFrame,
};
pub use modem::{demap_llr, modulate, ModemError};
pub use receiver::{
    effective_noise_variance, receive_user, stage1_wideband_csit, ReceiveOutcome,
    ReceiverOptions, StreamDecode,
};

#[derive(Debug, Error)]
pub enum PhyError {
    #[error("invalid frame config: {0}")]
    Config(String),
    #[error(transparent)]
    Fec(#[from] FecError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Allocation(#[from] crate::allocation::AllocationError),
    #[error("payload carries {got} bits, MCS budget is {want}")]
    PayloadSize { got: usize, want: usize },
    #[error("two payloads target stream {0}")]
    DuplicateStream(usize),
    #[error("observation has {got} samples, frame layout expects {want}")]
    ObservationLength { got: usize, want: usize },
    #[error("received frame is malformed: {0}")]
    Malformed(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// OFDM frame layout. Defaults follow the 20 MHz / 64-subcarrier grid
/// with a 16-sample cyclic prefix, 48 data bins, 4 pilot bins and 12
/// guard bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    pub n_fft: usize,
    pub cp_len: usize,
    pub data_bins: Vec<usize>,
    pub fps_bins: Vec<usize>,
    pub guard_bins: Vec<usize>,
    pub payload_symbols: usize,
    pub sample_rate: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        // Logical subcarriers -26..26 excluding DC; pilots at +-7, +-21.
        let logical_to_bin = |l: i32| -> usize {
            if l >= 0 {
                l as usize
            } else {
                (64 + l) as usize
            }
        };
        let mut data = Vec::new();
        let mut fps = Vec::new();
        for l in (-26..=26).filter(|&l| l != 0) {
            let bin = logical_to_bin(l);
            if l.abs() == 7 || l.abs() == 21 {
                fps.push(bin);
            } else {
                data.push(bin);
            }
        }
        data.sort_unstable();
        fps.sort_unstable();
        let occupied: std::collections::BTreeSet<usize> =
            data.iter().chain(fps.iter()).copied().collect();
        let guard: Vec<usize> = (0..64).filter(|b| !occupied.contains(b)).collect();
        FrameConfig {
            n_fft: 64,
            cp_len: 16,
            data_bins: data,
            fps_bins: fps,
            guard_bins: guard,
            payload_symbols: 50,
            sample_rate: 20e6,
        }
    }
}

impl FrameConfig {
    pub fn validate(&self) -> Result<(), PhyError> {
        if !self.n_fft.is_power_of_two() {
            return Err(PhyError::Config("n_fft must be a power of two".into()));
        }
        if self.cp_len == 0 || self.cp_len >= self.n_fft {
            return Err(PhyError::Config("cp_len must be in (0, n_fft)".into()));
        }
        let mut seen = vec![false; self.n_fft];
        let mark = |bins: &[usize], seen: &mut Vec<bool>| -> Result<(), PhyError> {
            for &b in bins {
                if b >= self.n_fft {
                    return Err(PhyError::Config(format!("bin {b} out of range")));
                }
                if seen[b] {
                    return Err(PhyError::Config(format!("bin {b} assigned twice")));
                }
                seen[b] = true;
            }
            Ok(())
        };
        mark(&self.data_bins, &mut seen)?;
        mark(&self.fps_bins, &mut seen)?;
        mark(&self.guard_bins, &mut seen)?;
        if seen.iter().any(|&s| !s) {
            return Err(PhyError::Config("bin sets must cover the whole FFT".into()));
        }
        if self.payload_symbols == 0 {
            return Err(PhyError::Config("payload_symbols must be positive".into()));
        }
        Ok(())
    }

    /// Data and pilot bins, ascending.
    pub fn occupied_bins(&self) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.data_bins.iter().chain(self.fps_bins.iter()).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn symbol_samples(&self) -> usize {
        self.n_fft + self.cp_len
    }

    /// Training fields use a double cyclic prefix and two repetitions.
    pub fn field_samples(&self) -> usize {
        2 * self.cp_len + 2 * self.n_fft
    }

    pub fn stage1_samples(&self, n_tx: usize) -> usize {
        n_tx * 2 * self.field_samples()
    }

    /// STF + 3 LTFs + SERVICE + payload.
    pub fn stage2_samples(&self) -> usize {
        4 * self.field_samples() + (1 + self.payload_symbols) * self.symbol_samples()
    }

    /// Known LTF loading: deterministic +-1 on occupied bins, zero on
    /// guards.
    pub fn ltf_sequence(&self) -> Vec<Complex64> {
        let mut rng = rng_for(0x17F, &[self.n_fft as u64]);
        let mut seq = vec![Complex64::ZERO; self.n_fft];
        for &bin in &self.occupied_bins() {
            let sign: bool = rng.random();
            seq[bin] = Complex64::new(if sign { 1.0 } else { -1.0 }, 0.0);
        }
        seq
    }

    /// STF loading: unit QPSK-like values on every fourth occupied bin,
    /// giving the classic short periodic pattern. Kept for frame-format
    /// fidelity; the simulated receivers assume known timing.
    pub fn stf_sequence(&self) -> Vec<Complex64> {
        let mut rng = rng_for(0x57F, &[self.n_fft as u64]);
        let mut seq = vec![Complex64::ZERO; self.n_fft];
        for &bin in &self.occupied_bins() {
            if bin % 4 == 0 {
                let re: bool = rng.random();
                let im: bool = rng.random();
                seq[bin] = Complex64::new(
                    if re { 1.0 } else { -1.0 },
                    if im { 1.0 } else { -1.0 },
                ) / 2f64.sqrt();
            }
        }
        seq
    }

    /// FPS pilot symbol value (before precoding).
    pub fn pilot_value(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    /// Which stream's precoder carries the FPS pilots of 1-indexed
    /// payload symbol `t`: common on 1, 4, 7, ..., private 1 on 2, 5, 8,
    /// ..., private 2 on 3, 6, 9, ...
    pub fn pilot_stream_for_symbol(&self, t: usize) -> usize {
        match t % 3 {
            1 => STREAM_C,
            2 => STREAM_P1,
            _ => STREAM_P2,
        }
    }
}
