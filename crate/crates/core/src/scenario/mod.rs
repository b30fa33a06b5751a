//! Synthetic channels for the nine measurement cases, CSI estimation, and
//! the two channel metrics used to classify them.
//!
//! Each user's channel is a deterministic line-of-sight ray from the lab
//! geometry (free-space amplitude `1/d`, phase `2 pi d / lambda`, plus a
//! per-user gain standing in for antenna/cabling differences) and optional
//! Rayleigh multipath taps with a configured power profile. Per-subcarrier
//! responses come from the tap-domain impulse response, so frequency
//! selectivity is consistent with the cyclic prefix.
//!
//! Vectors follow the receive-conjugate convention: the stored `h[k]`
//! satisfies `y[k] = h[k]^H x[k] + n[k]`, i.e. `conj(h)` is the physical
//! per-antenna gain.

pub mod file;

use crate::rng::{complex_gaussian, derive_u64, rng_for, Stream};
use crate::util::{dot_h, norm};
use crate::Group;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("invalid `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("LTF length {got} does not match the pilot length {want}")]
    LtfLength { got: usize, want: usize },
    #[error("no channel estimates to average")]
    EmptyEstimates,
    #[error("channel vector has zero norm")]
    ZeroNorm,
}

fn field_err(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Field { field, reason: reason.into() }
}

/// Placement and gain of one user antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPlacement {
    pub group: Group,
    /// User index within the group, 1 or 2.
    pub user: u8,
    /// Position in meters.
    pub position: [f64; 2],
    /// Amplitude calibration in power dB applied on top of free space
    /// (antenna gains, cabling, splitters).
    #[serde(default)]
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// TX antenna positions in meters.
    pub tx_antennas: Vec<[f64; 2]>,
    /// Exactly four users, one per (group, user) pair.
    pub users: Vec<UserPlacement>,
}

impl Geometry {
    /// Far-field boundary `2 D^2 / lambda` with `D` the array aperture.
    pub fn fraunhofer_distance(&self) -> f64 {
        let mut aperture: f64 = 0.0;
        for i in 0..self.tx_antennas.len() {
            for j in i + 1..self.tx_antennas.len() {
                aperture = aperture.max(dist(self.tx_antennas[i], self.tx_antennas[j]));
            }
        }
        2.0 * aperture * aperture / self.wavelength
    }

    fn array_center(&self) -> [f64; 2] {
        let n = self.tx_antennas.len() as f64;
        let (sx, sy) =
            self.tx_antennas.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p[0], acc.1 + p[1]));
        [sx / n, sy / n]
    }

    pub fn placement(&self, g: Group, user: u8) -> Option<&UserPlacement> {
        self.users.iter().find(|u| u.group == g && u.user == user)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Random multipath on top of the deterministic ray. Tap `l` (1-based)
/// sits `ceil(l * delay_spread / taps)` samples after the direct path with
/// Rayleigh power `tap_powers[l-1]` relative to the user's mean LOS power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Multipath {
    pub taps: usize,
    #[serde(default)]
    pub tap_powers: Vec<f64>,
    #[serde(default)]
    pub delay_spread: usize,
}

impl Multipath {
    pub const NONE: Multipath = Multipath { taps: 0, tap_powers: Vec::new(), delay_spread: 0 };
}

/// Longest usable delay spread; taps must stay inside the cyclic prefix
/// of the 16-sample OFDM frames.
pub const MAX_DELAY_SPREAD: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_tx: usize,
    pub n_subcarriers: usize,
    pub n_groups: usize,
    pub users_per_group: usize,
    /// Receiver noise variance, linear power.
    pub noise_variance: f64,
    /// Total transmit power budget, linear.
    pub tx_power: f64,
    pub geometry: Geometry,
    pub multipath: Multipath,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_tx < 2 {
            return Err(field_err("n_tx", "need at least 2 TX antennas"));
        }
        if !self.n_subcarriers.is_power_of_two() {
            return Err(field_err("n_subcarriers", "must be a power of two"));
        }
        if self.n_groups != 2 {
            return Err(field_err("n_groups", "fixed at 2"));
        }
        if self.users_per_group != 2 {
            return Err(field_err("users_per_group", "fixed at 2"));
        }
        if !(self.noise_variance > 0.0) {
            return Err(field_err("noise_variance", "must be strictly positive"));
        }
        if !(self.tx_power > 0.0) {
            return Err(field_err("tx_power", "must be strictly positive"));
        }
        if !(self.geometry.wavelength > 0.0) {
            return Err(field_err("geometry.wavelength", "must be strictly positive"));
        }
        if self.geometry.tx_antennas.len() != self.n_tx {
            return Err(field_err(
                "geometry.tx_antennas",
                format!(
                    "expected {} positions, got {}",
                    self.n_tx,
                    self.geometry.tx_antennas.len()
                ),
            ));
        }
        if self.geometry.users.len() != 4 {
            return Err(field_err("geometry.users", "expected exactly 4 users"));
        }
        for g in Group::BOTH {
            for user in 1..=2u8 {
                if self.geometry.placement(g, user).is_none() {
                    return Err(field_err(
                        "geometry.users",
                        format!("missing user {user} of group {g}"),
                    ));
                }
            }
        }
        let fraunhofer = self.geometry.fraunhofer_distance();
        let center = self.geometry.array_center();
        for u in &self.geometry.users {
            let d = dist(u.position, center);
            if d <= fraunhofer {
                return Err(field_err(
                    "geometry.users",
                    format!(
                        "user {} of group {} at {d:.3} m violates the far-field bound {fraunhofer:.3} m",
                        u.user, u.group
                    ),
                ));
            }
        }
        if self.multipath.tap_powers.len() != self.multipath.taps {
            return Err(field_err(
                "multipath.tap_powers",
                format!(
                    "expected {} entries, got {}",
                    self.multipath.taps,
                    self.multipath.tap_powers.len()
                ),
            ));
        }
        if self.multipath.tap_powers.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(field_err("multipath.tap_powers", "powers must be finite and >= 0"));
        }
        if self.multipath.taps > 0 {
            if self.multipath.delay_spread < self.multipath.taps {
                return Err(field_err(
                    "multipath.delay_spread",
                    "need at least one sample per tap",
                ));
            }
            if self.multipath.delay_spread > MAX_DELAY_SPREAD {
                return Err(field_err(
                    "multipath.delay_spread",
                    format!("must fit inside the cyclic prefix (max {MAX_DELAY_SPREAD})"),
                ));
            }
        }
        Ok(())
    }

    /// Ordered user list: (g1,u1), (g1,u2), (g2,u1), (g2,u2).
    pub fn user_order(&self) -> [(Group, u8); 4] {
        [(Group::G1, 1), (Group::G1, 2), (Group::G2, 1), (Group::G2, 2)]
    }
}

/// One tap of the physical impulse response (un-conjugated gains, one per
/// TX antenna).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTap {
    pub delay: usize,
    pub gain: Vec<Complex64>,
}

/// Per-subcarrier channel vectors for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    pub group: Group,
    pub user: u8,
    /// `h[k][a]`, receive-conjugate convention.
    pub h: Vec<Vec<Complex64>>,
    /// Physical taps the frequency response was built from.
    pub taps: Vec<ChannelTap>,
}

impl UserChannel {
    /// Effective scalar amplitude `h[k]^H p` on subcarrier `k` under
    /// precoder `p`.
    pub fn effective_gain(&self, k: usize, p: &[Complex64]) -> Complex64 {
        dot_h(&self.h[k], p)
    }
}

/// Wideband (subcarrier-averaged) channel estimate for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidebandCsit {
    pub h_hat: Vec<Complex64>,
}

/// Deterministic channel synthesis. The same `(config, seed)` pair always
/// produces bit-identical channels; the LOS ray is pure geometry and the
/// multipath taps are drawn per user from the derived stream.
pub fn generate_channels(
    config: &ScenarioConfig,
    rng_seed: u64,
) -> Result<Vec<UserChannel>, ScenarioError> {
    config.validate()?;
    let n_c = config.n_subcarriers;
    let lambda = config.geometry.wavelength;
    let mut out = Vec::with_capacity(4);
    for (uidx, (g, user)) in config.user_order().into_iter().enumerate() {
        let place = config.geometry.placement(g, user).expect("validated");
        let gain_lin = 10f64.powf(place.gain_db / 20.0);
        let los: Vec<Complex64> = config
            .geometry
            .tx_antennas
            .iter()
            .map(|&ant| {
                let d = dist(ant, place.position);
                Complex64::from_polar(gain_lin / d, -2.0 * PI * d / lambda)
            })
            .collect();
        let mut taps = vec![ChannelTap { delay: 0, gain: los.clone() }];
        if config.multipath.taps > 0 {
            let mean_los_power: f64 =
                los.iter().map(|c| c.norm_sqr()).sum::<f64>() / los.len() as f64;
            let mut rng = rng_for(rng_seed, &[Stream::Channel as u64, uidx as u64]);
            for (l, &rel_power) in config.multipath.tap_powers.iter().enumerate() {
                let delay =
                    ((l + 1) * config.multipath.delay_spread).div_ceil(config.multipath.taps);
                let gain: Vec<Complex64> = (0..config.n_tx)
                    .map(|_| complex_gaussian(&mut rng, rel_power * mean_los_power))
                    .collect();
                taps.push(ChannelTap { delay: delay.max(1), gain });
            }
        }
        // Frequency response of the tap line, conjugated into h-convention.
        let h: Vec<Vec<Complex64>> = (0..n_c)
            .map(|k| {
                (0..config.n_tx)
                    .map(|a| {
                        let d_ka: Complex64 = taps
                            .iter()
                            .map(|t| {
                                t.gain[a]
                                    * Complex64::from_polar(
                                        1.0,
                                        -2.0 * PI * (k * t.delay) as f64 / n_c as f64,
                                    )
                            })
                            .sum();
                        d_ka.conj()
                    })
                    .collect()
            })
            .collect();
        out.push(UserChannel { group: g, user, h, taps });
    }
    Ok(out)
}

/// Least-squares channel estimate: per-subcarrier division of the received
/// LTF by the known LTF, conjugated into the same convention as the true
/// channel vectors. Bins where the known LTF is zero (guards) yield `None`.
pub fn estimate_csi_ls(
    rx_ltf: &[Complex64],
    known_ltf: &[Complex64],
) -> Result<Vec<Option<Complex64>>, ScenarioError> {
    if rx_ltf.len() != known_ltf.len() {
        return Err(ScenarioError::LtfLength { got: rx_ltf.len(), want: known_ltf.len() });
    }
    Ok(rx_ltf
        .iter()
        .zip(known_ltf)
        .map(|(&y, &x)| if x == Complex64::ZERO { None } else { Some((y / x).conj()) })
        .collect())
}

/// Arithmetic mean over the available (occupied-subcarrier) estimates.
pub fn wideband_average(
    estimates: &[Option<Vec<Complex64>>],
) -> Result<WidebandCsit, ScenarioError> {
    let mut count = 0usize;
    let mut acc: Option<Vec<Complex64>> = None;
    for est in estimates.iter().flatten() {
        count += 1;
        match &mut acc {
            None => acc = Some(est.clone()),
            Some(a) => {
                for (ai, ei) in a.iter_mut().zip(est) {
                    *ai += ei;
                }
            }
        }
    }
    let mut acc = acc.ok_or(ScenarioError::EmptyEstimates)?;
    for v in acc.iter_mut() {
        *v /= count as f64;
    }
    Ok(WidebandCsit { h_hat: acc })
}

/// Inter-group pathloss difference in dB: `10 log10(||h2|| / ||h1||)`,
/// with `h1` from a group-1 user and `h2` from a group-2 user. Negative
/// when group 2 is the weaker one.
pub fn pathloss_difference_db(h1: &WidebandCsit, h2: &WidebandCsit) -> Result<f64, ScenarioError> {
    let (n1, n2) = (norm(&h1.h_hat), norm(&h2.h_hat));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(ScenarioError::ZeroNorm);
    }
    Ok(10.0 * (n2 / n1).log10())
}

/// Spatial correlation `|h1^H h2| / (||h1|| ||h2||)` in [0, 1].
pub fn spatial_correlation(h1: &WidebandCsit, h2: &WidebandCsit) -> Result<f64, ScenarioError> {
    let (n1, n2) = (norm(&h1.h_hat), norm(&h2.h_hat));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(ScenarioError::ZeroNorm);
    }
    Ok((dot_h(&h1.h_hat, &h2.h_hat).norm() / (n1 * n2)).min(1.0))
}

/// Calibration targets for the nine cases: forward distance of the
/// group-2 trolley, LOS spatial-correlation target, and the pathloss
/// difference the per-case gain is solved for. Distances follow the
/// 1.00-1.50 / 2.00-2.30 / 3.20-3.50 m bands of the measurement layout;
/// the alpha targets sit at the centers of the measured spreads.
pub const NINE_CASE_TARGETS: [CaseTarget; 9] = [
    CaseTarget { forward_m: 1.0, rho_los: 0.95, alpha_db: -0.685 },
    CaseTarget { forward_m: 1.0, rho_los: 0.66, alpha_db: -1.34 },
    CaseTarget { forward_m: 1.0, rho_los: 0.40, alpha_db: -1.727 },
    CaseTarget { forward_m: 2.0, rho_los: 0.75, alpha_db: -5.87 },
    CaseTarget { forward_m: 2.0, rho_los: 0.50, alpha_db: -6.095 },
    CaseTarget { forward_m: 2.0, rho_los: 0.37, alpha_db: -6.59 },
    CaseTarget { forward_m: 3.2, rho_los: 0.85, alpha_db: -13.0 },
    CaseTarget { forward_m: 3.2, rho_los: 0.63, alpha_db: -18.0 },
    CaseTarget { forward_m: 3.2, rho_los: 0.38, alpha_db: -17.73 },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseTarget {
    pub forward_m: f64,
    pub rho_los: f64,
    pub alpha_db: f64,
}

/// Lateral separation between the two users of a group (slightly above
/// half a wavelength, keeping intra-group correlation near 1).
const USER_SEPARATION_M: f64 = 0.07;

/// Builds the nine measurement cases from a base configuration: group 1
/// stays fixed 1 m in front of the array, group 2 moves through three
/// distance bands with lateral offsets that sweep the LOS correlation.
/// The per-case user gain absorbs the antenna/cabling differences needed
/// to land the pathloss targets.
pub fn build_nine_cases(base: &ScenarioConfig) -> Result<Vec<ScenarioConfig>, ScenarioError> {
    base.validate()?;
    let spacing = dist(base.geometry.tx_antennas[0], base.geometry.tx_antennas[1]);
    let lambda = base.geometry.wavelength;
    let mut cases = Vec::with_capacity(9);
    for (idx, target) in NINE_CASE_TARGETS.iter().enumerate() {
        let mut cfg = base.clone();
        // Invert rho = |cos(pi * spacing/lambda * sin(theta))| on the
        // first lobe for the trolley angle.
        let delta_sin = target.rho_los.clamp(0.0, 1.0).acos() / (PI * spacing / lambda);
        let theta = delta_sin.clamp(0.0, 1.0).asin();
        let center = [target.forward_m, target.forward_m * theta.tan()];
        let radial = dist(center, [0.0, 0.0]);
        let gain_db = 2.0 * (target.alpha_db + 10.0 * radial.log10());
        let tangent = [-theta.sin(), theta.cos()];
        for u in cfg.geometry.users.iter_mut() {
            if u.group == Group::G2 {
                let sign = if u.user == 1 { -0.5 } else { 0.5 };
                u.position = [
                    center[0] + sign * USER_SEPARATION_M * tangent[0],
                    center[1] + sign * USER_SEPARATION_M * tangent[1],
                ];
                u.gain_db = gain_db;
            }
        }
        cfg.seed = derive_u64(base.seed, &[10, idx as u64]);
        cfg.validate()?;
        cases.push(cfg);
    }
    Ok(cases)
}

/// Reference base scenario: two TX antennas 0.13 m apart at 2.484 GHz,
/// 23 dBm budget, group-1 users fixed at 1 m, mild three-tap multipath.
/// Noise is set so a group-1 user sees roughly 37 dB of clean full-power
/// MRT SNR, which keeps the MCS operating points of all nine cases on the
/// table.
pub fn reference_base() -> ScenarioConfig {
    let wavelength = 299_792_458.0 / 2.484e9;
    ScenarioConfig {
        n_tx: 2,
        n_subcarriers: 64,
        n_groups: 2,
        users_per_group: 2,
        noise_variance: 8e-5,
        tx_power: 0.2,
        geometry: Geometry {
            wavelength,
            tx_antennas: vec![[0.0, -0.065], [0.0, 0.065]],
            users: vec![
                UserPlacement { group: Group::G1, user: 1, position: [1.0, -0.035], gain_db: 0.0 },
                UserPlacement { group: Group::G1, user: 2, position: [1.0, 0.035], gain_db: 0.0 },
                UserPlacement { group: Group::G2, user: 1, position: [1.2, -0.035], gain_db: 0.0 },
                UserPlacement { group: Group::G2, user: 2, position: [1.2, 0.035], gain_db: 0.0 },
            ],
        },
        multipath: Multipath { taps: 3, tap_powers: vec![0.08, 0.05, 0.02], delay_spread: 6 },
        seed: 0x4d47_4d31,
    }
}

/// Wideband CSIT of every user directly from the true channels (perfect
/// estimation); the measurement pipeline replaces this with LTF-based
/// estimates.
pub fn ideal_csit(channels: &[UserChannel], occupied: &[usize]) -> Vec<WidebandCsit> {
    channels
        .iter()
        .map(|ch| {
            let ests: Vec<Option<Vec<Complex64>>> =
                occupied.iter().map(|&k| Some(ch.h[k].clone())).collect();
            wideband_average(&ests).expect("non-empty occupied set")
        })
        .collect()
}
