//! Link-level simulator and optimization toolkit for two-group multicast
//! downlink under three multiple-access schemes (RSMA, SDMA, NOMA).
//!
//! The crate is organized around the measurement pipeline of a two-stage
//! transmission protocol:
//!
//! * [`scenario`] — synthetic channel generation from lab-style geometry,
//!   least-squares CSI estimation, wideband averaging, and the channel
//!   metrics used to classify the nine measurement cases.
//! * [`precoding`] — rate expressions, the WMMSE max-min fairness solver,
//!   and an exhaustive grid oracle for two-antenna instances.
//! * [`allocation`] — common-stream split rules, the MCS table, and all
//!   throughput accounting.
//! * [`fec`] — polar code with CRC-8 and successive-cancellation list
//!   decoding (list 2), plus shortening-based rate matching.
//! * [`phy`] — OFDM frame construction, channel application, and the
//!   SIC receiver chain with fine-phase-shift tracking.
//! * [`experiment`] — seeded Monte-Carlo campaigns, brute-force MCS search,
//!   and report emission.
//!
//! With the default `parallel` feature the Monte-Carlo inner loops run on
//! rayon; without it everything falls back to sequential execution with
//! identical results.

pub mod allocation;
pub mod exec;
pub mod experiment;
pub mod fec;
pub mod phy;
pub mod precoding;
pub mod rng;
pub mod scenario;
pub mod util;

pub use num_complex::Complex64;

use serde::{Deserialize, Serialize};

/// One of the two multicast groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Group {
    G1,
    G2,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::G1, Group::G2];

    /// Zero-based index, for array storage.
    pub fn idx(self) -> usize {
        match self {
            Group::G1 => 0,
            Group::G2 => 1,
        }
    }

    /// The other group.
    pub fn other(self) -> Group {
        match self {
            Group::G1 => Group::G2,
            Group::G2 => Group::G1,
        }
    }

    pub fn from_idx(i: usize) -> Group {
        match i {
            0 => Group::G1,
            1 => Group::G2,
            _ => panic!("group index out of range: {i}"),
        }
    }
}

impl From<Group> for u8 {
    fn from(g: Group) -> u8 {
        g.idx() as u8 + 1
    }
}

impl TryFrom<u8> for Group {
    type Error = String;
    fn try_from(v: u8) -> Result<Group, String> {
        match v {
            1 => Ok(Group::G1),
            2 => Ok(Group::G2),
            _ => Err(format!("group must be 1 or 2, got {v}")),
        }
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.idx() + 1)
    }
}

/// Multiple-access scheme family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rsma,
    Sdma,
    Noma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Rsma, Scheme::Sdma, Scheme::Noma];
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::Rsma => "RSMA",
            Scheme::Sdma => "SDMA",
            Scheme::Noma => "NOMA",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rsma" => Ok(Scheme::Rsma),
            "sdma" => Ok(Scheme::Sdma),
            "noma" => Ok(Scheme::Noma),
            other => Err(format!("unknown scheme `{other}` (expected rsma, sdma or noma)")),
        }
    }
}
