//! Common-stream allocation and MCS-limited throughput accounting.
//!
//! The common stream carries parts of both group messages; the split
//! fractions decide how much of its rate (or measured throughput) each
//! group is credited with. Two rules apply: when the private-rate gap is
//! small enough the split equalizes the two net rates (S1), otherwise the
//! entire common stream goes to the group with the smaller private rate
//! (S2). Throughput accounting multiplies per-stream data rates by
//! empirical decode frequencies.

use crate::{Group, Scheme};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AllocationError {
    #[error("rate `{name}` must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("decode count {count} exceeds run count {runs}")]
    CountOutOfRange { count: u64, runs: u64 },
    #[error("runs must be positive")]
    ZeroRuns,
    #[error("bandwidth parameters must be positive")]
    NonPositiveBandwidth,
    #[error("MCS index {0} out of range (table has {n} levels)", n = MCS_TABLE.len())]
    BadMcsIndex(u8),
    #[error("scheme {scheme} requires {name} MCS to be {expected}")]
    SchemeMcsMismatch { scheme: Scheme, name: &'static str, expected: &'static str },
}

/// Fractions of the common stream allocated to each group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonSplit {
    pub f1: f64,
    pub f2: f64,
}

impl CommonSplit {
    pub const EVEN: CommonSplit = CommonSplit { f1: 0.5, f2: 0.5 };

    /// Entire common stream to one group.
    pub fn all_to(g: Group) -> CommonSplit {
        match g {
            Group::G1 => CommonSplit { f1: 1.0, f2: 0.0 },
            Group::G2 => CommonSplit { f1: 0.0, f2: 1.0 },
        }
    }

    pub fn fraction(&self, g: Group) -> f64 {
        match g {
            Group::G1 => self.f1,
            Group::G2 => self.f2,
        }
    }
}

/// Splits the common stream between the groups.
///
/// With `|r_p1 - r_p2| <= r_c` the split solves
/// `r_p1 + f1*r_c = r_p2 + f2*r_c` with `f1 + f2 = 1` (S1); otherwise the
/// group with the smaller private rate takes everything (S2). A zero
/// common rate yields the even split by convention, which has no
/// throughput effect.
pub fn allocate_common(r_p1: f64, r_p2: f64, r_c: f64) -> Result<CommonSplit, AllocationError> {
    for (name, value) in [("r_p1", r_p1), ("r_p2", r_p2), ("r_c", r_c)] {
        if value < 0.0 || !value.is_finite() {
            return Err(AllocationError::NegativeRate { name, value });
        }
    }
    if r_c == 0.0 {
        return Ok(CommonSplit::EVEN);
    }
    if (r_p1 - r_p2).abs() <= r_c {
        let f1 = (r_c + r_p2 - r_p1) / (2.0 * r_c);
        Ok(CommonSplit { f1, f2: 1.0 - f1 })
    } else if r_p1 < r_p2 {
        Ok(CommonSplit::all_to(Group::G1))
    } else {
        Ok(CommonSplit::all_to(Group::G2))
    }
}

/// Net group throughput: `f_g * t_c + t_p_g`.
pub fn group_throughput(t_c: f64, t_p_g: f64, split: CommonSplit, g: Group) -> f64 {
    split.fraction(g) * t_c + t_p_g
}

/// Effective bandwidth after cyclic-prefix and guard-band overhead:
/// `total * (n_fft / (n_fft + cp)) * (n_data / n_fft)`.
pub fn effective_bandwidth(
    total_bw: f64,
    n_fft: usize,
    cp_len: usize,
    n_data: usize,
) -> Result<f64, AllocationError> {
    if total_bw <= 0.0 || n_fft == 0 || n_data == 0 {
        return Err(AllocationError::NonPositiveBandwidth);
    }
    Ok(total_bw * (n_fft as f64 / (n_fft + cp_len) as f64) * (n_data as f64 / n_fft as f64))
}

/// Effective bandwidth of the default frame layout (20 MHz, 64-point FFT,
/// 16-sample CP, 48 data subcarriers): 12 MHz.
pub const B_EFF: f64 = 12e6;

/// One modulation-and-coding level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McsLevel {
    pub index: u8,
    pub modulation: &'static str,
    /// Bits per constellation symbol.
    pub m: u32,
    /// Code rate as an exact fraction.
    pub rate_num: u32,
    pub rate_den: u32,
}

impl McsLevel {
    pub fn code_rate(&self) -> f64 {
        self.rate_num as f64 / self.rate_den as f64
    }

    /// Data rate `B * m * r` in bits/s for the given effective bandwidth.
    pub fn data_rate(&self, b_eff: f64) -> f64 {
        b_eff * (self.m * self.rate_num) as f64 / self.rate_den as f64
    }
}

/// The ten supported MCS levels (BPSK 1/2 ... 256QAM 5/6).
pub const MCS_TABLE: [McsLevel; 10] = [
    McsLevel { index: 0, modulation: "BPSK", m: 1, rate_num: 1, rate_den: 2 },
    McsLevel { index: 1, modulation: "BPSK", m: 1, rate_num: 3, rate_den: 4 },
    McsLevel { index: 2, modulation: "QPSK", m: 2, rate_num: 1, rate_den: 2 },
    McsLevel { index: 3, modulation: "QPSK", m: 2, rate_num: 3, rate_den: 4 },
    McsLevel { index: 4, modulation: "16QAM", m: 4, rate_num: 1, rate_den: 2 },
    McsLevel { index: 5, modulation: "16QAM", m: 4, rate_num: 3, rate_den: 4 },
    McsLevel { index: 6, modulation: "64QAM", m: 6, rate_num: 2, rate_den: 3 },
    McsLevel { index: 7, modulation: "64QAM", m: 6, rate_num: 3, rate_den: 4 },
    McsLevel { index: 8, modulation: "256QAM", m: 8, rate_num: 3, rate_den: 4 },
    McsLevel { index: 9, modulation: "256QAM", m: 8, rate_num: 5, rate_den: 6 },
];

pub fn mcs_level(index: u8) -> Result<&'static McsLevel, AllocationError> {
    MCS_TABLE.get(index as usize).ok_or(AllocationError::BadMcsIndex(index))
}

/// Machine-readable export of the MCS table (data rates at [`B_EFF`]).
pub fn mcs_table_export() -> String {
    #[derive(Serialize)]
    struct Row {
        index: u8,
        modulation: &'static str,
        m: u32,
        rate_num: u32,
        rate_den: u32,
        data_rate_bps: f64,
    }
    let rows: Vec<Row> = MCS_TABLE
        .iter()
        .map(|l| Row {
            index: l.index,
            modulation: l.modulation,
            m: l.m,
            rate_num: l.rate_num,
            rate_den: l.rate_den,
            data_rate_bps: l.data_rate(B_EFF),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("static table serializes");
    s.push('\n');
    s
}

/// MCS selection for the three streams. Inactive streams are `None`
/// (SDMA has no common stream; NOMA has no private stream for the group
/// riding the common one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct McsTriple {
    pub common: Option<u8>,
    pub private1: Option<u8>,
    pub private2: Option<u8>,
}

impl McsTriple {
    pub fn private(&self, g: Group) -> Option<u8> {
        match g {
            Group::G1 => self.private1,
            Group::G2 => self.private2,
        }
    }

    /// Validates stream presence against the scheme (NOMA with the common
    /// stream carrying `noma_common`'s message).
    pub fn validate(
        &self,
        scheme: Scheme,
        noma_common: Option<Group>,
    ) -> Result<(), AllocationError> {
        let need = |cond: bool, name: &'static str, expected: &'static str| {
            if cond {
                Ok(())
            } else {
                Err(AllocationError::SchemeMcsMismatch { scheme, name, expected })
            }
        };
        for idx in [self.common, self.private1, self.private2].into_iter().flatten() {
            mcs_level(idx)?;
        }
        match scheme {
            Scheme::Sdma => {
                need(self.common.is_none(), "common", "absent")?;
                need(self.private1.is_some(), "private1", "present")?;
                need(self.private2.is_some(), "private2", "present")
            }
            Scheme::Rsma => {
                need(self.common.is_some(), "common", "present")?;
                need(self.private1.is_some(), "private1", "present")?;
                need(self.private2.is_some(), "private2", "present")
            }
            Scheme::Noma => {
                need(self.common.is_some(), "common", "present")?;
                match noma_common.unwrap_or(Group::G2) {
                    Group::G2 => {
                        need(self.private1.is_some(), "private1", "present")?;
                        need(self.private2.is_none(), "private2", "absent")
                    }
                    Group::G1 => {
                        need(self.private1.is_none(), "private1", "absent")?;
                        need(self.private2.is_some(), "private2", "present")
                    }
                }
            }
        }
    }
}

/// Per-stream decode counts out of `runs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeCounts {
    pub d_c: u64,
    pub d_1: u64,
    pub d_2: u64,
}

/// Measured throughputs and BLERs for one (scheme, MCS triple) campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub scheme: Scheme,
    pub counts: DecodeCounts,
    pub runs: u64,
    pub mcs: McsTriple,
    /// Per-stream throughputs in bits/s; zero for absent streams.
    pub t_c: f64,
    pub t_p1: f64,
    pub t_p2: f64,
    pub split: CommonSplit,
    pub t_group: [f64; 2],
    /// Per-stream BLER, `None` for absent streams.
    pub bler_c: Option<f64>,
    pub bler_1: Option<f64>,
    pub bler_2: Option<f64>,
}

/// Empirical per-stream throughput: `(d / runs) * B * m * r`, computed as
/// `d * rate / runs` so integer-valued products stay exact.
pub fn empirical_throughput(
    d: u64,
    runs: u64,
    mcs: Option<u8>,
    b_eff: f64,
) -> Result<f64, AllocationError> {
    if runs == 0 {
        return Err(AllocationError::ZeroRuns);
    }
    if d > runs {
        return Err(AllocationError::CountOutOfRange { count: d, runs });
    }
    match mcs {
        None => Ok(0.0),
        Some(idx) => {
            let level = mcs_level(idx)?;
            Ok(d as f64 * level.data_rate(b_eff) / runs as f64)
        }
    }
}

/// Per-stream throughputs plus BLERs from raw decode counts.
pub fn empirical_throughputs(
    counts: DecodeCounts,
    runs: u64,
    mcs: McsTriple,
    b_eff: f64,
) -> Result<(f64, f64, f64, [Option<f64>; 3]), AllocationError> {
    let t_c = empirical_throughput(counts.d_c, runs, mcs.common, b_eff)?;
    let t_p1 = empirical_throughput(counts.d_1, runs, mcs.private1, b_eff)?;
    let t_p2 = empirical_throughput(counts.d_2, runs, mcs.private2, b_eff)?;
    let bler = |d: u64, present: bool| present.then(|| 1.0 - d as f64 / runs as f64);
    let blers = [
        bler(counts.d_c, mcs.common.is_some()),
        bler(counts.d_1, mcs.private1.is_some()),
        bler(counts.d_2, mcs.private2.is_some()),
    ];
    Ok((t_c, t_p1, t_p2, blers))
}

impl ThroughputReport {
    /// Assembles the full report. The common split is the scheme's own
    /// rule applied retroactively to the measured throughputs: S1/S2 for
    /// RSMA, the fixed one-sided split for NOMA, and the (inert) even
    /// split for SDMA.
    pub fn assemble(
        scheme: Scheme,
        noma_common: Option<Group>,
        counts: DecodeCounts,
        runs: u64,
        mcs: McsTriple,
        b_eff: f64,
    ) -> Result<ThroughputReport, AllocationError> {
        mcs.validate(scheme, noma_common)?;
        let (t_c, t_p1, t_p2, [bler_c, bler_1, bler_2]) =
            empirical_throughputs(counts, runs, mcs, b_eff)?;
        let split = match scheme {
            Scheme::Rsma => allocate_common(t_p1, t_p2, t_c)?,
            Scheme::Sdma => CommonSplit::EVEN,
            Scheme::Noma => CommonSplit::all_to(noma_common.unwrap_or(Group::G2)),
        };
        let t_group = [
            group_throughput(t_c, t_p1, split, Group::G1),
            group_throughput(t_c, t_p2, split, Group::G2),
        ];
        Ok(ThroughputReport {
            scheme,
            counts,
            runs,
            mcs,
            t_c,
            t_p1,
            t_p2,
            split,
            t_group,
            bler_c,
            bler_1,
            bler_2,
        })
    }

    pub fn min_throughput(&self) -> f64 {
        self.t_group[0].min(self.t_group[1])
    }

    pub fn sum_throughput(&self) -> f64 {
        self.t_group[0] + self.t_group[1]
    }
}

/// Renders bits/s as Mbps with two decimals for human-facing tables.
pub fn mbps(bits_per_s: f64) -> String {
    format!("{:.2}", bits_per_s / 1e6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_symmetric_rates_is_even() {
        let s = allocate_common(1.5, 1.5, 2.0).unwrap();
        assert_eq!(s, CommonSplit::EVEN);
        let n1 = group_throughput(2.0, 1.5, s, Group::G1);
        let n2 = group_throughput(2.0, 1.5, s, Group::G2);
        assert_eq!(n1, n2);
    }

    #[test]
    fn split_big_gap_goes_all_to_weaker() {
        // |3 - 1| > 1 -> S2 branch, everything to group 2.
        let s = allocate_common(3.0, 1.0, 1.0).unwrap();
        assert_eq!(s, CommonSplit::all_to(Group::G2));
        assert_eq!(group_throughput(1.0, 3.0, s, Group::G1), 3.0);
        assert_eq!(group_throughput(1.0, 1.0, s, Group::G2), 2.0);
    }

    #[test]
    fn split_s1_solved_by_hand() {
        // r_p1 = 2, r_p2 = 1, r_c = 2: f1 = (2 + 1 - 2) / 4 = 1/4.
        let s = allocate_common(2.0, 1.0, 2.0).unwrap();
        assert!((s.f1 - 0.25).abs() < 1e-15);
        assert!((s.f2 - 0.75).abs() < 1e-15);
        let n1 = 2.0 + s.f1 * 2.0;
        let n2 = 1.0 + s.f2 * 2.0;
        assert!((n1 - 2.5).abs() < 1e-12 && (n2 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn split_zero_common_rate_convention() {
        assert_eq!(allocate_common(0.3, 0.9, 0.0).unwrap(), CommonSplit::EVEN);
    }

    #[test]
    fn split_rejects_negative() {
        assert!(matches!(
            allocate_common(-0.1, 0.0, 1.0),
            Err(AllocationError::NegativeRate { name: "r_p1", .. })
        ));
    }

    #[test]
    fn split_boundary_takes_s1() {
        // |delta| == r_c: S1 degenerates to the one-sided split.
        let s = allocate_common(2.0, 1.0, 1.0).unwrap();
        assert!((s.f1 - 0.0).abs() < 1e-15);
        assert!((s.f2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn s1_equalizes_net_rates_randomized() {
        let mut state = 0x1234_5678_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let r_p1 = next() * 8.0;
            let r_p2 = next() * 8.0;
            let r_c = next() * 8.0;
            let s = allocate_common(r_p1, r_p2, r_c).unwrap();
            assert!((s.f1 + s.f2 - 1.0).abs() < 1e-12);
            if r_c > 0.0 && (r_p1 - r_p2).abs() <= r_c {
                let n1 = r_p1 + s.f1 * r_c;
                let n2 = r_p2 + s.f2 * r_c;
                assert!((n1 - n2).abs() < 1e-9, "S1 must equalize: {n1} vs {n2}");
            }
        }
    }

    #[test]
    fn split_maximizes_min_against_sweep() {
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let r_p1 = next() * 5.0;
            let r_p2 = next() * 5.0;
            let r_c = next() * 5.0;
            let s = allocate_common(r_p1, r_p2, r_c).unwrap();
            let ours = (r_p1 + s.f1 * r_c).min(r_p2 + s.f2 * r_c);
            let sweep_best = (0..=1000)
                .map(|i| {
                    let f1 = i as f64 / 1000.0;
                    (r_p1 + f1 * r_c).min(r_p2 + (1.0 - f1) * r_c)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            // Sweep quantization can cost at most r_c / 1000 of objective.
            assert!(ours >= sweep_best - r_c / 1000.0 - 1e-12);
        }
    }

    #[test]
    fn mcs_table_row_values() {
        assert_eq!(MCS_TABLE.len(), 10);
        // Spot data rates at 12 MHz: index 2 -> 12 Mbps, 5 -> 36, 9 -> 80.
        assert_eq!(MCS_TABLE[2].data_rate(B_EFF), 12e6);
        assert_eq!(MCS_TABLE[5].data_rate(B_EFF), 36e6);
        assert_eq!(MCS_TABLE[9].data_rate(B_EFF), 80e6);
        assert_eq!(MCS_TABLE[6].m, 6);
        assert_eq!((MCS_TABLE[6].rate_num, MCS_TABLE[6].rate_den), (2, 3));
    }

    #[test]
    fn effective_bandwidth_values() {
        assert_eq!(effective_bandwidth(20e6, 64, 16, 48).unwrap(), 12e6);
        assert_eq!(effective_bandwidth(20e6, 64, 0, 64).unwrap(), 20e6);
        assert_eq!(effective_bandwidth(20e6, 64, 16, 52).unwrap(), 13e6);
        assert!(effective_bandwidth(0.0, 64, 16, 48).is_err());
    }

    #[test]
    fn empirical_throughput_values() {
        // Full decode at QPSK 1/2 over 12 MHz: exactly the table rate.
        assert_eq!(empirical_throughput(100, 100, Some(2), B_EFF).unwrap(), 12e6);
        assert_eq!(empirical_throughput(0, 100, Some(7), B_EFF).unwrap(), 0.0);
        // 88 of 100 at 16QAM 3/4: 0.88 * 36 Mbps = 31.68 Mbps, exact.
        assert_eq!(empirical_throughput(88, 100, Some(5), B_EFF).unwrap(), 31_680_000.0);
        assert!(empirical_throughput(101, 100, Some(0), B_EFF).is_err());
    }

    #[test]
    fn group_throughput_common_half_split() {
        // Common stream at 36 Mbps split evenly, no private: 18 Mbps.
        let t = group_throughput(36e6, 0.0, CommonSplit::EVEN, Group::G1);
        assert_eq!(t, 18e6);
        assert_eq!(group_throughput(36e6, 5e6, CommonSplit::all_to(Group::G2), Group::G1), 5e6);
    }

    #[test]
    fn report_assembly_recomputes_exactly() {
        let counts = DecodeCounts { d_c: 91, d_1: 77, d_2: 100 };
        let mcs = McsTriple { common: Some(5), private1: Some(3), private2: Some(2) };
        let rep =
            ThroughputReport::assemble(Scheme::Rsma, None, counts, 100, mcs, B_EFF).unwrap();
        let (t_c, t_p1, t_p2, _) = empirical_throughputs(counts, 100, mcs, B_EFF).unwrap();
        assert_eq!(rep.t_c, t_c);
        assert_eq!(rep.t_group[0], group_throughput(t_c, t_p1, rep.split, Group::G1));
        assert_eq!(rep.t_group[1], group_throughput(t_c, t_p2, rep.split, Group::G2));
        assert_eq!(rep.bler_1, Some(1.0 - 0.77));
    }

    #[test]
    fn triple_validation_per_scheme() {
        let sdma = McsTriple { common: None, private1: Some(1), private2: Some(1) };
        assert!(sdma.validate(Scheme::Sdma, None).is_ok());
        assert!(sdma.validate(Scheme::Rsma, None).is_err());
        let noma = McsTriple { common: Some(4), private1: Some(4), private2: None };
        assert!(noma.validate(Scheme::Noma, Some(Group::G2)).is_ok());
        assert!(noma.validate(Scheme::Noma, Some(Group::G1)).is_err());
    }

    #[test]
    fn mbps_rendering() {
        assert_eq!(mbps(31_680_000.0), "31.68");
        assert_eq!(mbps(6e6), "6.00");
    }
}
