//! Rate expressions under the wideband-CSIT-as-truth assumption.
//!
//! Every stream rate is a min over the users that must decode it. The
//! common stream sees both private streams as interference; a private
//! stream sees only the other group's private stream (the common one is
//! removed by SIC before private decoding).

use super::{CsitSet, Mode, PrecoderSet};
use crate::allocation::{allocate_common, CommonSplit};
use crate::util::dot_h;
use crate::Group;
use serde::{Deserialize, Serialize};

/// Per-user SINR of the common stream.
fn common_sinr(csit: &CsitSet, user: usize, p: &PrecoderSet, sigma2: f64) -> f64 {
    let h = &csit.h[user];
    let sig = dot_h(h, &p.p_c).norm_sqr();
    let int = dot_h(h, &p.p_1).norm_sqr() + dot_h(h, &p.p_2).norm_sqr();
    sig / (sigma2 + int)
}

/// Per-user SINR of group `g`'s private stream (common already removed).
fn private_sinr(csit: &CsitSet, user: usize, p: &PrecoderSet, sigma2: f64, g: Group) -> f64 {
    let h = &csit.h[user];
    let sig = dot_h(h, p.private(g)).norm_sqr();
    let int = dot_h(h, p.private(g.other())).norm_sqr();
    sig / (sigma2 + int)
}

/// Highest rate at which every user of group `g` can decode the common
/// stream while treating both private streams as noise.
pub fn common_rate_group(csit: &CsitSet, g: Group, p: &PrecoderSet, sigma2: f64) -> f64 {
    CsitSet::group_users(g)
        .into_iter()
        .map(|u| (1.0 + common_sinr(csit, u, p, sigma2)).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Common stream rate: the min over both groups.
pub fn common_rate(csit: &CsitSet, p: &PrecoderSet, sigma2: f64) -> f64 {
    common_rate_group(csit, Group::G1, p, sigma2)
        .min(common_rate_group(csit, Group::G2, p, sigma2))
}

/// Group `g`'s private stream rate (min over its users), with the other
/// group's private stream as the only interference.
pub fn private_rate_group(csit: &CsitSet, p: &PrecoderSet, sigma2: f64, g: Group) -> f64 {
    CsitSet::group_users(g)
        .into_iter()
        .map(|u| (1.0 + private_sinr(csit, u, p, sigma2, g)).log2())
        .fold(f64::INFINITY, f64::min)
}

/// The three stream rates in one pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamRates {
    pub r_c: f64,
    pub r_p: [f64; 2],
}

pub fn stream_rates(csit: &CsitSet, p: &PrecoderSet, sigma2: f64) -> StreamRates {
    StreamRates {
        r_c: common_rate(csit, p, sigma2),
        r_p: [
            private_rate_group(csit, p, sigma2, Group::G1),
            private_rate_group(csit, p, sigma2, Group::G2),
        ],
    }
}

/// Nonnegative combinations of (r_c, r_p1, r_p2) whose min is the mode's
/// max-min objective with the common split chosen optimally:
///
/// * RSMA: min of (r_c+r_p1+r_p2)/2 (the equalizing split) and
///   r_p_g + r_c for each g (one-sided splits).
/// * SDMA: min of the private rates.
/// * NOMA: min of the surviving private rate and the common rate.
pub fn objective_rows(mode: Mode) -> &'static [[f64; 3]] {
    match mode {
        Mode::Rsma => &[[0.5, 0.5, 0.5], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]],
        Mode::Sdma => &[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        Mode::Noma { common_group: Group::G2 } => &[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]],
        Mode::Noma { common_group: Group::G1 } => &[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
    }
}

/// Max-min net-rate objective of `mode` at the given stream rates.
pub fn mode_objective(mode: Mode, rates: &StreamRates) -> f64 {
    objective_rows(mode)
        .iter()
        .map(|row| row[0] * rates.r_c + row[1] * rates.r_p[0] + row[2] * rates.r_p[1])
        .fold(f64::INFINITY, f64::min)
}

/// Full rate breakdown with the mode's common split applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Common-stream rate supported by each group.
    pub r_c_group: [f64; 2],
    /// Common stream rate (min over groups).
    pub r_c: f64,
    /// Private stream rates.
    pub r_p: [f64; 2],
    /// Common split in effect.
    pub split: CommonSplit,
    /// Net group rates `f_g * r_c + r_p_g`.
    pub r_net: [f64; 2],
}

impl RateReport {
    pub fn min_net(&self) -> f64 {
        self.r_net[0].min(self.r_net[1])
    }
}

pub fn rate_report(csit: &CsitSet, p: &PrecoderSet, sigma2: f64) -> RateReport {
    let r_c_group = [
        common_rate_group(csit, Group::G1, p, sigma2),
        common_rate_group(csit, Group::G2, p, sigma2),
    ];
    let r_c = r_c_group[0].min(r_c_group[1]);
    let r_p = [
        private_rate_group(csit, p, sigma2, Group::G1),
        private_rate_group(csit, p, sigma2, Group::G2),
    ];
    let split = match p.mode.fixed_split() {
        Some(s) => s,
        None => allocate_common(r_p[0], r_p[1], r_c).expect("rates are non-negative"),
    };
    let r_net = [split.f1 * r_c + r_p[0], split.f2 * r_c + r_p[1]];
    RateReport { r_c_group, r_c, r_p, split, r_net }
}
